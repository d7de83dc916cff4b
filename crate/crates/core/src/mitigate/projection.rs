use std::collections::BTreeMap;

use crate::sim::ProbDist;

/// Closest probability distribution in L² to a quasi-distribution summing to
/// one, over the same support.
///
/// Entries are visited from the most negative up; each is zeroed while doing
/// so and spreading its mass over the rest keeps the next one negative.
pub fn nearest_physical(quasi: &ProbDist) -> ProbDist {
    let mut entries: Vec<(u64, f64)> = quasi.iter().collect();
    if entries.is_empty() {
        return quasi.clone();
    }
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut keep = entries.len();
    let mut acc = 0.0;
    while keep > 0 && entries[keep - 1].1 + acc / (keep as f64) < 0.0 {
        acc += entries[keep - 1].1;
        keep -= 1;
    }
    let shift = if keep > 0 { acc / keep as f64 } else { 0.0 };
    let mut out: BTreeMap<u64, f64> = BTreeMap::new();
    for (i, &(x, p)) in entries.iter().enumerate() {
        out.insert(x, if i < keep { (p + shift).max(0.0) } else { 0.0 });
    }
    let total: f64 = out.values().sum();
    if total > 0.0 && (total - 1.0).abs() > 1e-15 {
        out.values_mut().for_each(|p| *p /= total);
    }
    ProbDist::from_map(quasi.n_bits(), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(v: &[(u64, f64)]) -> ProbDist {
        ProbDist::from_map(1, v.iter().copied().collect())
    }

    #[test]
    fn clips_single_negative() {
        let p = nearest_physical(&dist(&[(0, 1.2), (1, -0.2)]));
        assert_eq!(p.get(0), 1.0);
        assert_eq!(p.get(1), 0.0);
    }

    #[test]
    fn physical_input_unchanged() {
        let d = dist(&[(0, 0.25), (1, 0.75)]);
        assert_eq!(nearest_physical(&d), d);
    }
}
