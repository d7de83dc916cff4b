
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

use super::AnalysisError;
use crate::circuit::mqc_phase_grid;
use crate::sim::ProbDist;

fn check_bits(d: &ProbDist, n: usize) -> Result<(), AnalysisError> {
    if d.n_bits() != n {
        return Err(AnalysisError::BitLength { expected: n, found: d.n_bits() });
    }
    Ok(())
}

/// `P = p(0...0) + p(1...1)` from the population circuit.
pub fn mqc_population(d: &ProbDist, n: usize) -> Result<f64, AnalysisError> {
    check_bits(d, n)?;
    let ones = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
    Ok(d.get(0) + if n == 0 { 0.0 } else { d.get(ones) })
}

/// `S_phi = p(0...0)` for each MQC circuit.
pub fn mqc_signal(per_phase: &[(f64, ProbDist)], n: usize) -> Result<Vec<(f64, f64)>, AnalysisError> {
    per_phase
        .iter()
        .map(|(phi, d)| {
            check_bits(d, n)?;
            Ok((*phi, d.get(0)))
        })
        .collect()
}

/// `I_q = |sum_phi e^{i q phi} S_phi| / n_phi` for `q = 0..=N+1`.
pub fn mqc_amplitudes(signal: &[(f64, f64)], n: usize) -> Result<Vec<f64>, AnalysisError> {
    let grid = mqc_phase_grid(n);
    let mut sorted: Vec<(f64, f64)> = signal.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    if sorted.len() != grid.len() || sorted.iter().zip(&grid).any(|(s, g)| (s.0 - g).abs() > 1e-9) {
        return Err(AnalysisError::PhaseGrid { n });
    }
    let len = sorted.len() as f64;
    Ok((0..=n + 1)
        .map(|q| sorted.iter().map(|&(phi, s)| C::from_polar(s, q as f64 * phi)).sum::<C>().norm() / len)
        .collect())
}

/// How the coherence is read off the amplitude `I_N`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherenceEstimator {
    /// `C = 2 sqrt(I_N)`.
    #[default]
    Overlap,
    /// `C = 4 I_N`, which equals `2 |rho_{0..0,1..1}|` for the circuits
    /// built here.
    Linear,
}

impl FromStr for CoherenceEstimator {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "overlap" => Ok(Self::Overlap),
            "linear" => Ok(Self::Linear),
            _ => Err(format!("unknown coherence estimator {s:?} (overlap|linear)")),
        }
    }
}

pub fn coherence(i_n: f64, est: CoherenceEstimator) -> f64 {
    match est {
        CoherenceEstimator::Overlap => 2.0 * i_n.max(0.0).sqrt(),
        CoherenceEstimator::Linear => 4.0 * i_n,
    }
}

pub fn ghz_fidelity(population: f64, coherence: f64) -> f64 {
    (population + coherence) / 2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MqcResult {
    pub n: usize,
    pub population: f64,
    pub signal: Vec<(f64, f64)>,
    pub amplitudes: Vec<f64>,
    pub estimator: CoherenceEstimator,
    pub coherence: f64,
    pub fidelity: f64,
}

pub fn analyze_mqc(
    population: &ProbDist,
    per_phase: &[(f64, ProbDist)],
    n: usize,
    est: CoherenceEstimator,
) -> Result<MqcResult, AnalysisError> {
    let p = mqc_population(population, n)?;
    let signal = mqc_signal(per_phase, n)?;
    let amplitudes = mqc_amplitudes(&signal, n)?;
    let c = coherence(amplitudes[n], est);
    Ok(MqcResult { n, population: p, signal, amplitudes, estimator: est, coherence: c, fidelity: ghz_fidelity(p, c) })
}

/// Ideal signal `(1 + cos N phi) / 2`.
#[cfg(test)]
pub(crate) fn ideal_signal(n: usize) -> Vec<(f64, f64)> {
    mqc_phase_grid(n).into_iter().map(|phi| (phi, (1.0 + (n as f64 * phi).cos()) / 2.0)).collect()
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_signal_amplitudes() {
        for n in 1..=8 {
            let amps = mqc_amplitudes(&ideal_signal(n), n).unwrap();
            assert!((amps[0] - 0.5).abs() < 1e-12);
            assert!((amps[n] - 0.25).abs() < 1e-12);
            for (q, a) in amps.iter().enumerate() {
                if q != 0 && q != n {
                    assert!(a.abs() < 1e-12, "n {n} q {q}: {a}");
                }
            }
            let c = coherence(amps[n], CoherenceEstimator::Overlap);
            assert!((c - 1.0).abs() < 1e-12);
            assert!((ghz_fidelity(1.0, c) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_signal_has_no_coherence() {
        let flat: Vec<(f64, f64)> = mqc_phase_grid(4).into_iter().map(|p| (p, 0.3)).collect();
        let amps = mqc_amplitudes(&flat, 4).unwrap();
        assert!(amps[4] < 1e-12);
        assert!((ghz_fidelity(0.8, coherence(amps[4], CoherenceEstimator::Overlap)) - 0.4).abs() < 1e-7);
    }

    #[test]
    fn wrong_grid_rejected() {
        assert!(mqc_amplitudes(&ideal_signal(3), 4).is_err());
    }

    #[test]
    fn fully_mixed_population() {
        let n = 4;
        let d = ProbDist::from_dense(n, &vec![1.0 / 16.0; 16]);
        assert!((mqc_population(&d, n).unwrap() - 2.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn reported_fidelity_arithmetic() {
        assert!((ghz_fidelity(0.6, 0.438) - 0.519).abs() < 1e-12);
    }
}
