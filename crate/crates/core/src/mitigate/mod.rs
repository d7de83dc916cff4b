//! Readout-error mitigation on the subspace of observed bitstrings.
//!
//! The readout model is a tensor product of per-bit confusion matrices
//! `A_i[measured][prepared]`, so `p_noisy = A p_ideal`. Elements of `A` are
//! computed on demand; only the submatrix over the observed outcomes is ever
//! touched.

mod gmres;
mod projection;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::sim::{parse_bitstring, Backend, ProbDist, SimError};
use crate::topology::{Calibration, QubitId};

pub use projection::nearest_physical;

pub const DEFAULT_TOL: f64 = 1e-5;
pub const DEFAULT_MAX_ITER: usize = 25;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MitigationError {
    #[error("nothing to mitigate")]
    Empty,
    #[error("bit length mismatch: spec has {spec} bits, data has {data}")]
    LengthMismatch { spec: usize, data: usize },
    #[error("invalid confusion matrix for bit {bit}: {reason}")]
    InvalidSpec { bit: usize, reason: String },
    #[error("reduced calibration matrix is singular")]
    Singular,
    #[error("bad bitstring {0:?}")]
    BadBitstring(String),
    #[error(transparent)]
    Backend(#[from] SimError),
}

/// Tensored readout model. `matrices[i][m][p]` is the probability of reading
/// `m` on bit `i` when `p` was prepared; columns sum to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfusionSpec {
    pub matrices: Vec<[[f64; 2]; 2]>,
}

impl ConfusionSpec {
    pub fn new(matrices: Vec<[[f64; 2]; 2]>) -> Result<Self, MitigationError> {
        let s = ConfusionSpec { matrices };
        s.validate()?;
        Ok(s)
    }

    pub fn identity(n_bits: usize) -> Self {
        ConfusionSpec { matrices: vec![[[1.0, 0.0], [0.0, 1.0]]; n_bits] }
    }

    /// Every bit flips with probability `eps` either way.
    pub fn symmetric(n_bits: usize, eps: f64) -> Self {
        ConfusionSpec { matrices: vec![[[1.0 - eps, eps], [eps, 1.0 - eps]]; n_bits] }
    }

    /// Stored calibration of `qubits`, bit `i` being `qubits[i]`.
    pub fn from_calibration(cal: &Calibration, qubits: &[QubitId]) -> Self {
        let matrices = qubits
            .iter()
            .map(|&q| {
                let r = cal.qubit(q).readout;
                [[r[0][0], r[1][0]], [r[0][1], r[1][1]]]
            })
            .collect();
        ConfusionSpec { matrices }
    }

    /// Runs all-zeros and all-ones preparations on `qubits` and reads off
    /// the flip rate of each bit. `shots = None` uses exact distributions.
    pub fn estimate(
        backend: &dyn Backend,
        qubits: &[QubitId],
        shots: Option<u64>,
        seed: u64,
    ) -> Result<Self, MitigationError> {
        let runs = backend.run(&calibration_circuits(qubits), shots, seed)?;
        let dists: Vec<ProbDist> = runs.iter().map(|r| r.dist()).collect();
        ConfusionSpec::from_calibration_runs(&dists)
    }

    /// Confusion matrices from the outcomes of [`calibration_circuits`], in
    /// the same order.
    pub fn from_calibration_runs(runs: &[ProbDist]) -> Result<Self, MitigationError> {
        if runs.len() % 2 != 0 {
            return Err(MitigationError::LengthMismatch { spec: runs.len() + 1, data: runs.len() });
        }
        let matrices = runs
            .chunks(2)
            .flat_map(|pair| {
                let (zeros, ones) = (&pair[0], &pair[1]);
                (0..zeros.n_bits()).map(move |i| {
                    let p10 = zeros.marginal(&[i]).get(1);
                    let p01 = ones.marginal(&[i]).get(0);
                    [[1.0 - p10, p01], [p10, 1.0 - p01]]
                })
            })
            .collect();
        ConfusionSpec::new(matrices)
    }

    pub fn n_bits(&self) -> usize {
        self.matrices.len()
    }

    pub fn validate(&self) -> Result<(), MitigationError> {
        for (bit, m) in self.matrices.iter().enumerate() {
            let bad = |reason: &str| Err(MitigationError::InvalidSpec { bit, reason: reason.into() });
            if m.iter().flatten().any(|p| !(0.0..=1.0).contains(p)) {
                return bad("entries must lie in [0, 1]");
            }
            for p in 0..2 {
                if (m[0][p] + m[1][p] - 1.0).abs() > 1e-12 {
                    return bad("columns must sum to 1");
                }
            }
            if m[0][0] < 0.5 || m[1][1] < 0.5 {
                log::warn!("bit {bit}: readout fidelity below 0.5, inversion may be ill-conditioned");
            }
        }
        Ok(())
    }

    /// The sub-spec for `bits`, bit `i` of the result being `bits[i]`.
    pub fn select(&self, bits: &[usize]) -> ConfusionSpec {
        ConfusionSpec { matrices: bits.iter().map(|&b| self.matrices[b]).collect() }
    }

    /// `A[row][col]`: probability of reading `row` given `col` was prepared.
    pub fn element(&self, row: u64, col: u64) -> f64 {
        self.matrices
            .iter()
            .enumerate()
            .map(|(i, m)| m[(row >> i & 1) as usize][(col >> i & 1) as usize])
            .product()
    }
}

/// `A[row][col]` for bitstrings (clbit 0 rightmost).
/// All-zeros and all-ones preparations of `qubits`, eight qubits per pair
/// of circuits so each stays small.
pub fn calibration_circuits(qubits: &[QubitId]) -> Vec<Circuit> {
    const CHUNK: usize = 8;
    let reg = qubits.iter().map(|q| q.0 + 1).max().unwrap_or(0);
    let mut circuits = Vec::new();
    for chunk in qubits.chunks(CHUNK) {
        for ones in [false, true] {
            let mut c = Circuit::new(reg, chunk.len());
            if ones {
                c.extend(chunk.iter().map(|&q| Gate::X { q })).expect("valid qubits");
            }
            c.extend(chunk.iter().enumerate().map(|(clbit, &q)| Gate::Measure { q, clbit })).expect("valid qubits");
            circuits.push(c);
        }
    }
    circuits
}

pub fn matrix_element(spec: &ConfusionSpec, row: &str, col: &str) -> Result<f64, MitigationError> {
    for s in [row, col] {
        if s.len() != spec.n_bits() {
            return Err(MitigationError::LengthMismatch { spec: spec.n_bits(), data: s.len() });
        }
    }
    let parse = |s: &str| parse_bitstring(s).ok_or_else(|| MitigationError::BadBitstring(s.into()));
    Ok(spec.element(parse(row)?, parse(col)?))
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Couplings between outcomes further apart than this are dropped.
    pub hamming_limit: Option<u32>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { hamming_limit: None, tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER }
    }
}

/// Output of [`mitigate`]: signed weights over the observed outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiDistribution {
    pub probs: ProbDist,
    pub shots: Option<u64>,
    pub overhead: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

impl QuasiDistribution {
    pub fn nearest_physical(&self) -> ProbDist {
        nearest_physical(&self.probs)
    }

    /// `sigma_bound(overhead, shots)`, or `None` for exact input.
    pub fn sigma_bound(&self) -> Option<f64> {
        self.shots.map(|s| sigma_bound(self.overhead, s))
    }
}

/// The calibration matrix restricted to `support`, coupling-truncated and
/// with columns renormalized to one.
struct Reduced<'a> {
    spec: &'a ConfusionSpec,
    support: &'a [u64],
    limit: Option<u32>,
    col_norm: Vec<f64>,
}

impl<'a> Reduced<'a> {
    fn new(spec: &'a ConfusionSpec, support: &'a [u64], limit: Option<u32>) -> Self {
        let mut r = Reduced { spec, support, limit, col_norm: vec![1.0; support.len()] };
        let norms: Vec<f64> = (0..support.len()).into_par_iter().map(|j| (0..support.len()).map(|i| r.raw(i, j)).sum()).collect();
        r.col_norm = norms;
        r
    }

    fn raw(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.support[i], self.support[j]);
        match self.limit {
            Some(l) if (a ^ b).count_ones() > l => 0.0,
            _ => self.spec.element(a, b),
        }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.raw(i, j) / self.col_norm[j]
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.support.len())
            .into_par_iter()
            .map(|i| x.iter().enumerate().map(|(j, xj)| self.get(i, j) * xj).sum())
            .collect()
    }

    fn dense(&self) -> DMatrix<f64> {
        let m = self.support.len();
        DMatrix::from_fn(m, m, |i, j| self.get(i, j))
    }

    fn is_full_tensor(&self) -> bool {
        self.limit.is_none_or(|l| l as usize >= self.spec.n_bits())
            && self.support.len() as u128 == 1u128 << self.spec.n_bits()
    }
}

/// Mitigates the measured distribution `noisy` (relative frequencies, or an
/// exact distribution when `shots` is `None`).
pub fn mitigate(
    noisy: &ProbDist,
    shots: Option<u64>,
    spec: &ConfusionSpec,
    opts: SolverOptions,
) -> Result<QuasiDistribution, MitigationError> {
    if noisy.is_empty() {
        return Err(MitigationError::Empty);
    }
    if noisy.n_bits() != spec.n_bits() {
        return Err(MitigationError::LengthMismatch { spec: spec.n_bits(), data: noisy.n_bits() });
    }
    spec.validate()?;
    let support: Vec<u64> = noisy.iter().map(|(x, _)| x).collect();
    let b: Vec<f64> = noisy.iter().map(|(_, p)| p).collect();
    let a = Reduced::new(spec, &support, opts.hamming_limit);
    if a.col_norm.iter().any(|&n| n <= 0.0) {
        return Err(MitigationError::Singular);
    }
    let diag: Vec<f64> = (0..support.len()).map(|i| a.get(i, i)).collect();
    if diag.iter().any(|&d| d == 0.0) {
        return Err(MitigationError::Singular);
    }
    let out = gmres::solve(|x| a.apply(x), &diag, &b, opts.tol, opts.max_iter);
    if !out.converged {
        log::warn!("mitigation stopped after {} iterations at residual {:.3e}", out.iterations, out.residual);
    }
    let overhead = reduced_overhead(&a)?;
    let probs = ProbDist::from_map(noisy.n_bits(), support.iter().copied().zip(out.x).collect::<BTreeMap<_, _>>());
    Ok(QuasiDistribution {
        probs,
        shots,
        overhead,
        iterations: out.iterations,
        residual: out.residual,
        converged: out.converged,
    })
}

fn reduced_overhead(a: &Reduced<'_>) -> Result<f64, MitigationError> {
    if a.is_full_tensor() {
        // the 1-norm of a Kronecker product is the product of the 1-norms
        let mut norm = 1.0;
        for m in &a.spec.matrices {
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if det == 0.0 {
                return Err(MitigationError::Singular);
            }
            let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
            norm *= (0..2).map(|c| inv[0][c].abs() + inv[1][c].abs()).fold(0.0, f64::max);
        }
        return Ok(norm * norm);
    }
    let inv = a.dense().try_inverse().ok_or(MitigationError::Singular)?;
    let norm = inv.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    Ok(norm * norm)
}

/// `M = |A_sub^-1|_1^2` over the outcomes in `support`.
pub fn overhead(spec: &ConfusionSpec, support: &[u64]) -> Result<f64, MitigationError> {
    if support.is_empty() {
        return Err(MitigationError::Empty);
    }
    let mut s = support.to_vec();
    s.sort_unstable();
    s.dedup();
    reduced_overhead(&Reduced::new(spec, &s, None))
}

/// Upper bound `sqrt(M / shots)` on the standard deviation of a mitigated
/// expectation value.
pub fn sigma_bound(overhead: f64, shots: u64) -> f64 {
    (overhead / shots as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elements() {
        let s = ConfusionSpec::new(vec![[[0.98, 0.03], [0.02, 0.97]]]).unwrap();
        assert_eq!(matrix_element(&s, "1", "0").unwrap(), 0.02);
        assert_eq!(matrix_element(&s, "0", "1").unwrap(), 0.03);
        assert!(matrix_element(&s, "01", "0").is_err());
        let id = ConfusionSpec::identity(3);
        assert_eq!(matrix_element(&id, "101", "101").unwrap(), 1.0);
        assert_eq!(matrix_element(&id, "101", "100").unwrap(), 0.0);
    }

    #[test]
    fn overhead_single_qubit() {
        let s = ConfusionSpec::symmetric(1, 0.02);
        let m = overhead(&s, &[0, 1]).unwrap();
        assert!((m - (1.0f64 / 0.96).powi(2)).abs() < 1e-12);
        assert!((sigma_bound(m, 4096) - (m / 4096.0).sqrt()).abs() < 1e-15);
        assert_eq!(overhead(&ConfusionSpec::identity(2), &[0, 3]).unwrap(), 1.0);
    }

    #[test]
    fn identity_spec_returns_input() {
        let p = ProbDist::from_dense(2, &[0.5, 0.25, 0.0, 0.25]);
        let q = mitigate(&p, Some(4), &ConfusionSpec::identity(2), SolverOptions::default()).unwrap();
        for (x, v) in p.iter() {
            assert!((q.probs.get(x) - v).abs() < 1e-12);
        }
        assert_eq!(q.overhead, 1.0);
    }

    #[test]
    fn invalid_spec_rejected() {
        assert!(ConfusionSpec::new(vec![[[0.9, 0.0], [0.2, 1.0]]]).is_err());
    }
}
