//! Deterministic seed derivation.
//!
//! Child seeds are derived from a master seed with SplitMix64, so replicate
//! `i` of an experiment always sees the same random stream no matter how
//! many other replicates run or in which order.

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of child `index` of `master`.
pub fn split(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x632B_E59B_D9B4_E019)))
}

/// Seed for a path of indices, e.g. `[replicate, circuit]`.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(master, |s, &i| split(s, i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn children_differ_and_repeat() {
        assert_eq!(split(7, 3), split(7, 3));
        assert_ne!(split(7, 3), split(7, 4));
        assert_ne!(split(7, 3), split(8, 3));
        assert_eq!(derive(1, &[2, 3]), split(split(1, 2), 3));
    }
}
