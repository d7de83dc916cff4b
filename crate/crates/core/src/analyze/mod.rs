//! Post-processing: GHZ fidelity from multiple-quantum coherences, pair
//! tomography and negativity, entanglement graphs, decay fits.

mod fit;
mod graph;
mod mqc;
mod tomography;

use serde::{Deserialize, Serialize};

pub use fit::{fit_decay, fit_scaling, pearson, DecayFit, LinearFit};
pub use graph::{
    build_entanglement_graph, summary_row, whole_device, EdgeStat, EntanglementGraph, Reducer, SummaryRow,
    Threshold,
};
pub use mqc::{
    analyze_mqc, coherence, ghz_fidelity, mqc_amplitudes, mqc_population, mqc_signal, CoherenceEstimator, MqcResult,
};
pub use tomography::{
    negativity, pauli_expectations, psd_project, reconstruct_pair_state, teleport_bound, PairEstimate,
    DEFAULT_MIN_SHOTS,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("expected {expected} bits, found {found}")]
    BitLength { expected: usize, found: usize },
    #[error("phase grid does not match the {n}-qubit grid")]
    PhaseGrid { n: usize },
    #[error("frequency {q} is outside 0..={max}")]
    FrequencyOutOfRange { q: usize, max: usize },
    #[error("missing Pauli setting {0}")]
    MissingSetting(String),
    #[error("only {found:.1} conditioned shots for projection {projection:#b} (need {needed})")]
    InsufficientShots { projection: u64, found: f64, needed: u64 },
    #[error("cut {0:?} does not split the system in two")]
    NotBipartite(Vec<usize>),
    #[error("need at least {needed} samples, got {found}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("no positive values to fit")]
    NonPositive,
    #[error("degenerate abscissae")]
    Degenerate,
    #[error("lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("zero variance")]
    ZeroVariance,
    #[error("value {0} out of range")]
    OutOfRange(f64),
}

/// Mean and standard error over replicates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`; zero for a single value.
    pub se: f64,
    pub n: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len();
        if n == 0 {
            return Stat { mean: 0.0, se: 0.0, n };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let se = if n < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        };
        Stat { mean, se, n }
    }

    /// Sample standard deviation.
    pub fn sd(&self) -> f64 {
        self.se * (self.n as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_standard_error() {
        let s = Stat::of(&[0.4, 0.5]);
        assert!((s.mean - 0.45).abs() < 1e-15);
        assert!((s.se - 0.05).abs() < 1e-15);
        assert_eq!(Stat::of(&[0.3]).se, 0.0);
    }
}
