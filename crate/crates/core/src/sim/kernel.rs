//! In-place kernels on state vectors and vectorised density matrices.
//!
//! A density matrix on `n` qubits is stored as a vector of `4^n` entries,
//! `rho[r, c]` at index `r | c << n`. A unitary `U` on qubit `k` is applied
//! as `U` on bit `k` and `conj(U)` on bit `k + n`.

use num_complex::Complex64 as C;
use rayon::prelude::*;

const PAR_MIN: usize = 1 << 14;

pub type Mat2 = [[C; 2]; 2];

pub fn conj2(m: &Mat2) -> Mat2 {
    [[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]]
}

/// Applies `m` to bit `k` of `v`.
pub fn apply_1q(v: &mut [C], k: usize, m: &Mat2) {
    let stride = 1usize << k;
    let f = |chunk: &mut [C]| {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = m[0][0] * x + m[0][1] * y;
            *b = m[1][0] * x + m[1][1] * y;
        }
    };
    if v.len() >= PAR_MIN {
        v.par_chunks_mut(2 * stride).for_each(f);
    } else {
        v.chunks_mut(2 * stride).for_each(f);
    }
}

/// Swaps the target bit where the control bit is set.
pub fn apply_cx(v: &mut [C], control: usize, target: usize) {
    let (cb, tb) = (1usize << control, 1usize << target);
    for i in 0..v.len() {
        if i & cb != 0 && i & tb == 0 {
            v.swap(i, i | tb);
        }
    }
}

/// Multiplies entry `i` by `phase(i)`.
pub fn apply_diagonal(v: &mut [C], phase: impl Fn(usize) -> C + Sync) {
    if v.len() >= PAR_MIN {
        v.par_iter_mut().enumerate().for_each(|(i, a)| *a *= phase(i));
    } else {
        v.iter_mut().enumerate().for_each(|(i, a)| *a *= phase(i));
    }
}

/// Scales entry `i` by the real factor `f(i)`.
pub fn scale(v: &mut [C], f: impl Fn(usize) -> f64 + Sync) {
    if v.len() >= PAR_MIN {
        v.par_iter_mut().enumerate().for_each(|(i, a)| *a *= f(i));
    } else {
        v.iter_mut().enumerate().for_each(|(i, a)| *a *= f(i));
    }
}

/// Inserts zero bits at the ascending positions `bits` into `x`.
fn deposit(mut x: usize, bits: &[usize]) -> usize {
    for &b in bits {
        let low = x & ((1 << b) - 1);
        x = ((x >> b) << (b + 1)) | low;
    }
    x
}

/// Calls `f` with the base index of every group spanned by `bits`
/// (ascending), i.e. every index with those bits clear.
pub fn for_each_base(len: usize, bits: &[usize], mut f: impl FnMut(usize)) {
    let count = len >> bits.len();
    for x in 0..count {
        f(deposit(x, bits));
    }
}

/// Density-matrix helpers on the vectorised layout.
pub struct Dm;

impl Dm {
    pub fn unitary_1q(v: &mut [C], n: usize, k: usize, m: &Mat2) {
        apply_1q(v, k, m);
        apply_1q(v, k + n, &conj2(m));
    }

    pub fn cx(v: &mut [C], n: usize, c: usize, t: usize) {
        apply_cx(v, c, t);
        apply_cx(v, c + n, t + n);
    }

    pub fn cz(v: &mut [C], n: usize, a: usize, b: usize) {
        let (ra, rb, ca, cb) = (1 << a, 1 << b, 1 << (a + n), 1 << (b + n));
        scale(v, |i| {
            let r = (i & ra != 0) && (i & rb != 0);
            let c = (i & ca != 0) && (i & cb != 0);
            if r != c {
                -1.0
            } else {
                1.0
            }
        });
    }

    /// Single-qubit depolarizing with Pauli error probability `p`.
    pub fn depolarize_1q(v: &mut [C], n: usize, k: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let q = 4.0 * p / 3.0;
        let (rb, cb) = (1usize << k, 1usize << (k + n));
        for_each_base(v.len(), &[k, k + n], |i| {
            let mix = (v[i] + v[i | rb | cb]) * (q / 2.0);
            v[i] = v[i] * (1.0 - q) + mix;
            v[i | rb | cb] = v[i | rb | cb] * (1.0 - q) + mix;
            v[i | rb] *= 1.0 - q;
            v[i | cb] *= 1.0 - q;
        });
    }

    /// Two-qubit depolarizing with Pauli error probability `p`.
    pub fn depolarize_2q(v: &mut [C], n: usize, a: usize, b: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let q = 16.0 * p / 15.0;
        let mut bits = [a, b, a + n, b + n];
        bits.sort_unstable();
        let row = |x: usize| (if x & 1 != 0 { 1 << a } else { 0 }) | (if x & 2 != 0 { 1 << b } else { 0 });
        let col = |x: usize| row(x) << n;
        for_each_base(v.len(), &bits, |base| {
            let diag: [usize; 4] = std::array::from_fn(|x| base | row(x) | col(x));
            let mix = diag.iter().map(|&i| v[i]).sum::<C>() * (q / 4.0);
            for r in 0..4 {
                for c in 0..4 {
                    let i = base | row(r) | col(c);
                    v[i] *= 1.0 - q;
                    if r == c {
                        v[i] += mix;
                    }
                }
            }
        });
    }

    /// Amplitude damping `gamma` combined with coherence decay to
    /// `coherence` (the factor multiplying off-diagonal entries).
    pub fn relax(v: &mut [C], n: usize, k: usize, gamma: f64, coherence: f64) {
        let (rb, cb) = (1usize << k, 1usize << (k + n));
        for_each_base(v.len(), &[k, k + n], |i| {
            let p11 = v[i | rb | cb];
            v[i] += p11 * gamma;
            v[i | rb | cb] = p11 * (1.0 - gamma);
            v[i | rb] *= coherence;
            v[i | cb] *= coherence;
        });
    }

    /// Correlated dephasing `rho -> (rho + Z_M rho Z_M) / 2`.
    pub fn z_dephase(v: &mut [C], n: usize, mask: usize) {
        let row_mask = mask;
        let col_mask = mask << n;
        scale(v, |i| {
            let r = (i & row_mask).count_ones() % 2;
            let c = (i & col_mask).count_ones() % 2;
            if r == c {
                1.0
            } else {
                0.0
            }
        });
    }

    /// Diagonal unitary `e^{-i theta(x)}` on the basis state `x`.
    pub fn diagonal_phase(v: &mut [C], n: usize, theta: &[f64]) {
        let low = (1usize << n) - 1;
        apply_diagonal(v, |i| {
            let d = theta[i & low] - theta[i >> n];
            C::from_polar(1.0, -d)
        });
    }

    /// Real diagonal `rho[x, x]`.
    pub fn diagonal(v: &[C], n: usize) -> Vec<f64> {
        (0..1usize << n).map(|x| v[x | (x << n)].re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deposit_inserts_zeros() {
        assert_eq!(deposit(0b11, &[1]), 0b101);
        assert_eq!(deposit(0b111, &[0, 2]), 0b11010);
        let mut seen = Vec::new();
        for_each_base(16, &[1, 3], |b| seen.push(b));
        assert_eq!(seen, vec![0b0000, 0b0001, 0b0100, 0b0101]);
    }

    #[test]
    fn depolarizing_preserves_trace() {
        let n = 2;
        let mut v = vec![C::new(0.0, 0.0); 16];
        v[0] = C::new(1.0, 0.0);
        Dm::depolarize_2q(&mut v, n, 0, 1, 0.3);
        let tr: f64 = Dm::diagonal(&v, n).iter().sum();
        assert!((tr - 1.0).abs() < 1e-14);
        // 1 - 16p/15 + 4p/15 on |00><00|
        assert!((v[0].re - (1.0 - 0.3 * 12.0 / 15.0)).abs() < 1e-14);
    }
}
