use nalgebra::DMatrix;
use num_complex::Complex64 as C;

use super::SimError;

/// Dense density matrix on `n` qubits. Qubit `i` is bit `i` of the basis
/// index.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    m: DMatrix<C>,
}

impl DensityMatrix {
    pub fn from_matrix(n: usize, m: DMatrix<C>) -> Result<Self, SimError> {
        let d = 1usize << n;
        if m.nrows() != d || m.ncols() != d {
            return Err(SimError::Dimension { expected: d, found: m.nrows() });
        }
        Ok(DensityMatrix { n, m })
    }

    /// `|psi><psi|`.
    pub fn from_pure(psi: &[C]) -> Self {
        let n = psi.len().trailing_zeros() as usize;
        assert_eq!(1 << n, psi.len(), "state length must be a power of two");
        let v = nalgebra::DVector::from_column_slice(psi);
        DensityMatrix { n, m: &v * v.adjoint() }
    }

    /// Vectorised layout `rho[r, c]` at `r | c << n`.
    pub(crate) fn from_vectorised(n: usize, v: &[C]) -> Self {
        let d = 1usize << n;
        DensityMatrix { n, m: DMatrix::from_fn(d, d, |r, c| v[r | (c << n)]) }
    }

    /// `|0...0><0...0|`.
    pub fn zero_state(n: usize) -> Self {
        let d = 1usize << n;
        let mut m = DMatrix::zeros(d, d);
        m[(0, 0)] = C::new(1.0, 0.0);
        DensityMatrix { n, m }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1usize << n;
        DensityMatrix { n, m: DMatrix::identity(d, d) * C::new(1.0 / d as f64, 0.0) }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &DMatrix<C> {
        &self.m
    }

    pub fn get(&self, r: usize, c: usize) -> C {
        self.m[(r, c)]
    }

    pub fn trace(&self) -> C {
        self.m.trace()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.m - self.m.adjoint()).iter().all(|z| z.norm() <= tol)
    }

    /// Partial trace keeping the listed qubits; qubit `keep[i]` becomes
    /// qubit `i` of the result.
    pub fn reduced(&self, keep: &[usize]) -> DensityMatrix {
        let k = keep.len();
        let traced: Vec<usize> = (0..self.n).filter(|q| !keep.contains(q)).collect();
        let spread = |x: usize, bits: &[usize]| {
            bits.iter().enumerate().fold(0usize, |acc, (i, &b)| acc | ((x >> i) & 1) << b)
        };
        let d = 1usize << k;
        let mut out = DMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                let (rr, cc) = (spread(r, keep), spread(c, keep));
                let mut s = C::new(0.0, 0.0);
                for t in 0..1usize << traced.len() {
                    let e = spread(t, &traced);
                    s += self.m[(rr | e, cc | e)];
                }
                out[(r, c)] = s;
            }
        }
        DensityMatrix { n: k, m: out }
    }

    /// Partial transpose over the listed qubits.
    pub fn partial_transpose(&self, qubits: &[usize]) -> DMatrix<C> {
        let mask = qubits.iter().fold(0usize, |m, &q| m | 1 << q);
        let d = self.dim();
        DMatrix::from_fn(d, d, |r, c| {
            let swap = (r ^ c) & mask;
            self.m[(r ^ swap, c ^ swap)]
        })
    }

    /// Real eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.m)
    }

    /// `Tr(rho sigma)` (real part).
    pub fn overlap(&self, other: &DensityMatrix) -> Result<f64, SimError> {
        if self.n != other.n {
            return Err(SimError::Dimension { expected: self.dim(), found: other.dim() });
        }
        Ok((&self.m * &other.m).trace().re)
    }
}

/// Ascending eigenvalues of `(m + m^dagger) / 2`.
pub fn hermitian_eigenvalues(m: &DMatrix<C>) -> Vec<f64> {
    let h = (m + m.adjoint()) * C::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// State fidelity `Tr(rho |psi><psi|)` against a rank-one target.
pub fn fidelity(rho: &DensityMatrix, ideal_pure: &DensityMatrix) -> Result<f64, SimError> {
    rho.overlap(ideal_pure)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(&[C::new(s, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(s, 0.0)])
    }

    #[test]
    fn fidelity_examples() {
        let b = bell();
        assert!((fidelity(&b, &b).unwrap() - 1.0).abs() < 1e-12);
        assert!((fidelity(&DensityMatrix::maximally_mixed(2), &b).unwrap() - 0.25).abs() < 1e-12);
        assert!(fidelity(&DensityMatrix::zero_state(1), &b).is_err());
    }

    #[test]
    fn reduced_bell_is_mixed() {
        let r = bell().reduced(&[1]);
        assert!((r.get(0, 0).re - 0.5).abs() < 1e-12);
        assert!(r.get(0, 1).norm() < 1e-12);
    }

    #[test]
    fn partial_transpose_of_bell_has_negative_eigenvalue() {
        let pt = bell().partial_transpose(&[1]);
        let ev = hermitian_eigenvalues(&pt);
        assert!((ev[0] + 0.5).abs() < 1e-12);
    }
}
