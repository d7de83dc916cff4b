//! Depth-minimal state-preparation schedules on a device graph.

mod batches;
mod ghz;
mod schedule;

use serde::{Deserialize, Serialize};

use crate::topology::{Calibration, Edge, QubitId, TopologyError};

pub use batches::{circuits_per_plan, plan_qst_batches, BatchPlan, TomographySet};
pub use ghz::{embed_ghz, embed_ghz_best, GhzEmbedding};
pub use schedule::{schedule_graph_state, GraphStateSchedule};

/// Per-edge cost used to rank otherwise equivalent CNOT choices.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeWeight {
    /// Calibrated two-qubit error.
    #[default]
    CxError,
    Unit,
    /// Two-qubit error plus the relaxation probability of both qubits over
    /// the gate duration.
    T1Aware,
}

impl EdgeWeight {
    pub fn weight(self, cal: &Calibration, a: QubitId, b: QubitId) -> f64 {
        match self {
            EdgeWeight::Unit => 1.0,
            EdgeWeight::CxError => cal.edge(a, b).cx_error,
            EdgeWeight::T1Aware => {
                let e = cal.edge(a, b);
                let t_us = e.cnot_ns as f64 * 1e-3;
                let decay = |q: QubitId| 1.0 - (-t_us / cal.qubit(q).t1_us).exp();
                e.cx_error + decay(a) + decay(b)
            }
        }
    }
}

impl std::str::FromStr for EdgeWeight {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cx-error" | "cx_error" => Ok(EdgeWeight::CxError),
            "unit" => Ok(EdgeWeight::Unit),
            "t1-aware" | "t1_aware" => Ok(EdgeWeight::T1Aware),
            _ => Err(format!("unknown edge weight {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmbedError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("source qubit {0} is inactive")]
    InactiveSource(QubitId),
    #[error("cannot reach {requested} qubits from {from}: component has {available}")]
    Unreachable { from: QubitId, requested: usize, available: usize },
    #[error("no candidate source reaches {0} qubits")]
    NoCandidate(usize),
    #[error("requested GHZ size must be at least 1")]
    EmptyRequest,
}

/// Renders a schedule as DOT with one colour per layer.
pub fn schedule_to_dot(n_qubits: usize, layers: &[Vec<Edge>]) -> String {
    const COLORS: [&str; 6] = ["red", "green", "blue", "orange", "purple", "brown"];
    let mut s = String::from("graph schedule {\n  node [shape=circle];\n");
    for q in 0..n_qubits {
        s.push_str(&format!("  {q};\n"));
    }
    for (i, layer) in layers.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        for e in layer {
            s.push_str(&format!("  {} -- {} [color={color}, label=\"{}\"];\n", e.lo(), e.hi(), i + 1));
        }
    }
    s.push_str("}\n");
    s
}
