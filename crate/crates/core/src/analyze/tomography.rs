use nalgebra::DMatrix;
use num_complex::Complex64 as C;

use super::AnalysisError;
use crate::circuit::Pauli;
use crate::embed::TomographySet;
use crate::sim::{hermitian_eigenvalues, DensityMatrix, ProbDist};

/// Conditioned shots below which a ring projection is skipped.
pub const DEFAULT_MIN_SHOTS: u64 = 50;

fn index(p: Pauli) -> usize {
    match p {
        Pauli::X => 1,
        Pauli::Y => 2,
        Pauli::Z => 3,
    }
}

fn sigma(i: usize) -> [[C; 2]; 2] {
    let (o, l, j) = (C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 1.0));
    match i {
        0 => [[l, o], [o, l]],
        1 => [[o, l], [l, o]],
        2 => [[o, -j], [j, o]],
        _ => [[l, o], [o, -l]],
    }
}

/// Two-qubit Pauli expectations `T[i][j] = <sigma_i (x) sigma_j>` with index
/// 0 = I, 1 = X, 2 = Y, 3 = Z, qubit 0 first. Each entry of `settings` holds
/// the outcome distribution over the two measured bits (bit 0 for qubit 0).
/// Single-qubit terms are averaged over the three settings that measure them.
pub fn pauli_expectations(settings: &[((Pauli, Pauli), ProbDist)]) -> Result<[[f64; 4]; 4], AnalysisError> {
    let mut t = [[0.0; 4]; 4];
    t[0][0] = 1.0;
    let mut singles = [[0.0; 4]; 2];
    let mut seen = [[false; 4]; 4];
    for ((a, b), d) in settings {
        let (i, j) = (index(*a), index(*b));
        let total = d.total();
        let parity = |mask: u64| d.iter().map(|(x, p)| if (x & mask).count_ones() % 2 == 0 { p } else { -p }).sum::<f64>() / total;
        t[i][j] = parity(0b11);
        singles[0][i] += parity(0b01) / 3.0;
        singles[1][j] += parity(0b10) / 3.0;
        seen[i][j] = true;
    }
    for (a, b) in Pauli::settings() {
        if !seen[index(a)][index(b)] {
            return Err(AnalysisError::MissingSetting(format!("{}{}", a.label(), b.label())));
        }
    }
    for k in 1..4 {
        t[k][0] = singles[0][k];
        t[0][k] = singles[1][k];
    }
    Ok(t)
}

/// Linear inversion `rho = 1/4 sum T_ij sigma_i (x) sigma_j`.
fn linear_inversion(t: &[[f64; 4]; 4]) -> DMatrix<C> {
    DMatrix::from_fn(4, 4, |r, c| {
        let mut s = C::new(0.0, 0.0);
        for (i, row) in t.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                // qubit 0 is bit 0 of the index
                s += sigma(i)[r & 1][c & 1] * sigma(j)[r >> 1][c >> 1] * v;
            }
        }
        s / 4.0
    })
}

/// Nearest unit-trace positive matrix by clipping negative eigenvalues of
/// the Hermitian part and renormalizing. Returns the clipped mass.
pub fn psd_project(m: &DMatrix<C>) -> (DensityMatrix, f64) {
    let n = m.nrows().trailing_zeros() as usize;
    let h = (m + m.adjoint()) * C::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let clipped: f64 = eig.eigenvalues.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    let kept: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = kept.iter().sum();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(kept.len(), kept.iter().map(|&l| C::new(l / total, 0.0))));
    let rho = &eig.eigenvectors * d * eig.eigenvectors.adjoint();
    (DensityMatrix::from_matrix(n, rho).expect("square power of two"), clipped)
}

#[derive(Clone, Debug)]
pub struct PairEstimate {
    /// Linear-inversion estimate before projection.
    pub linear: DMatrix<C>,
    pub rho: DensityMatrix,
    /// Negative eigenvalue mass removed by the projection.
    pub clipped: f64,
    /// Fewest conditioned shots over the nine settings (`None` for exact
    /// input).
    pub min_shots: Option<f64>,
}

/// Two-qubit state of the pair of `set`, conditioned on the ring reading
/// `projection` (bit `i` is ring qubit `i`), or with the ring traced out
/// when `projection` is `None`.
///
/// Each distribution is over the bits of [`TomographySet::support`].
/// `shots` enables the `min_shots` check on the conditioned counts.
pub fn reconstruct_pair_state(
    settings: &[((Pauli, Pauli), ProbDist)],
    set: &TomographySet,
    projection: Option<u64>,
    shots: Option<u64>,
    min_shots: u64,
) -> Result<PairEstimate, AnalysisError> {
    let width = set.support().len();
    let mut conditioned = Vec::with_capacity(settings.len());
    let mut fewest: Option<f64> = None;
    for (setting, d) in settings {
        if d.n_bits() != width {
            return Err(AnalysisError::BitLength { expected: width, found: d.n_bits() });
        }
        let pair = match projection {
            None => d.marginal(&[0, 1]),
            Some(ring) => {
                let kept = d.iter().filter(|&(x, _)| x >> 2 == ring).map(|(x, p)| (x & 0b11, p));
                let mut m = std::collections::BTreeMap::new();
                for (x, p) in kept {
                    *m.entry(x).or_insert(0.0) += p;
                }
                ProbDist::from_map(2, m)
            }
        };
        let mass = pair.total();
        let enough = match shots {
            Some(s) => {
                let n = mass * s as f64;
                fewest = Some(fewest.map_or(n, |f: f64| f.min(n)));
                n >= min_shots as f64
            }
            None => mass > 1e-12,
        };
        if !enough {
            return Err(AnalysisError::InsufficientShots {
                projection: projection.unwrap_or(0),
                found: shots.map_or(0.0, |s| mass * s as f64),
                needed: min_shots,
            });
        }
        conditioned.push((*setting, pair));
    }
    let linear = linear_inversion(&pauli_expectations(&conditioned)?);
    let (rho, clipped) = psd_project(&linear);
    Ok(PairEstimate { linear, rho, clipped, min_shots: fewest })
}

/// Sum of the magnitudes of the negative eigenvalues of the partial
/// transpose over the qubits in `cut`.
pub fn negativity(rho: &DensityMatrix, cut: &[usize]) -> Result<f64, AnalysisError> {
    let n = rho.n_qubits();
    let mut sorted = cut.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.is_empty() || sorted.len() != cut.len() || sorted.len() >= n || sorted.iter().any(|&q| q >= n) {
        return Err(AnalysisError::NotBipartite(cut.to_vec()));
    }
    let ev = hermitian_eigenvalues(&rho.partial_transpose(cut));
    Ok(ev.iter().filter(|&&l| l < 0.0).map(|l| -l).sum())
}

/// Upper bound `2 (m - 1 + 2N) / (m + 1)` on the teleportation fidelity for
/// local dimension `m`.
pub fn teleport_bound(neg: f64, m: usize) -> Result<f64, AnalysisError> {
    let m_f = m as f64;
    if m < 2 || !(0.0..=(m_f - 1.0) / 2.0 + 1e-9).contains(&neg) {
        return Err(AnalysisError::OutOfRange(neg));
    }
    Ok(2.0 / (m_f + 1.0) * (m_f - 1.0 + 2.0 * neg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(&[C::new(s, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(s, 0.0)])
    }

    #[test]
    fn bell_and_product_negativity() {
        assert!((negativity(&bell(), &[1]).unwrap() - 0.5).abs() < 1e-12);
        assert!(negativity(&DensityMatrix::zero_state(2), &[0]).unwrap().abs() < 1e-12);
        assert!(negativity(&bell(), &[0, 1]).is_err());
        assert!(negativity(&bell(), &[2]).is_err());
    }

    #[test]
    fn teleport_values() {
        assert!((teleport_bound(0.5, 2).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((teleport_bound(0.0, 2).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(teleport_bound(0.6, 2).is_err());
    }

    #[test]
    fn clipping_reports_mass() {
        let mut m = DMatrix::<C>::zeros(4, 4);
        m[(0, 0)] = C::new(1.1, 0.0);
        m[(3, 3)] = C::new(-0.1, 0.0);
        let (rho, clipped) = psd_project(&m);
        assert!((clipped - 0.1).abs() < 1e-12);
        assert!((rho.get(0, 0).re - 1.0).abs() < 1e-12);
    }
}
