use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Stat;
use crate::topology::{DeviceGraph, Edge};

/// How the negativities of one replicate's ring projections are combined.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reducer {
    #[default]
    Max,
    Mean,
}

impl FromStr for Reducer {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "max" => Ok(Reducer::Max),
            "mean" => Ok(Reducer::Mean),
            _ => Err(format!("unknown reducer {s:?} (max|mean)")),
        }
    }
}

impl Reducer {
    fn apply(self, values: &[f64]) -> Option<f64> {
        if values.is_empty() {
            return None;
        }
        Some(match self {
            Reducer::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Reducer::Mean => values.iter().sum::<f64>() / values.len() as f64,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeStat {
    pub edge: Edge,
    /// Replicate mean of the reduced negativity.
    pub negativity: f64,
    pub se: f64,
    /// Replicates with at least one usable projection.
    pub replicates: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementGraph {
    pub reducer: Reducer,
    pub mitigated: bool,
    /// Sorted by edge.
    pub edges: Vec<EdgeStat>,
}

impl EntanglementGraph {
    pub fn get(&self, e: Edge) -> Option<&EdgeStat> {
        self.edges.binary_search_by(|s| s.edge.cmp(&e)).ok().map(|i| &self.edges[i])
    }

    /// Negativity of `e`, zero when it was not measured.
    pub fn negativity(&self, e: Edge) -> f64 {
        self.get(e).map_or(0.0, |s| s.negativity)
    }

    /// Mean and sample standard deviation over edges.
    pub fn mean_sd(&self) -> (f64, f64) {
        let values: Vec<f64> = self.edges.iter().map(|s| s.negativity).collect();
        let s = Stat::of(&values);
        (s.mean, s.sd())
    }
}

/// `table[edge][replicate]` lists the negativity of each usable ring
/// projection.
pub fn build_entanglement_graph(
    table: &BTreeMap<Edge, Vec<Vec<f64>>>,
    reducer: Reducer,
    mitigated: bool,
) -> EntanglementGraph {
    let edges = table
        .iter()
        .map(|(&edge, reps)| {
            let reduced: Vec<f64> = reps.iter().filter_map(|r| reducer.apply(r)).collect();
            if reduced.is_empty() {
                log::warn!("edge {} has no usable projection", edge.key());
            }
            let s = Stat::of(&reduced);
            EdgeStat { edge, negativity: s.mean, se: s.se, replicates: s.n }
        })
        .collect();
    EntanglementGraph { reducer, mitigated, edges }
}

/// Which edges count as entangled.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Threshold {
    /// `N >= x * 0.5`.
    Fraction(f64),
    /// `N > 0`.
    Positive,
}

/// Size of the largest connected set of active qubits joined by edges that
/// pass `threshold`.
pub fn whole_device(g: &DeviceGraph, eg: &EntanglementGraph, threshold: Threshold) -> usize {
    let keep = |n: f64| match threshold {
        Threshold::Fraction(x) => n >= x * 0.5,
        Threshold::Positive => n > 0.0,
    };
    let edges: Vec<(usize, usize)> =
        g.edges().filter(|&e| keep(eg.negativity(e))).map(|e| (e.lo().0, e.hi().0)).collect();
    let inactive: Vec<usize> = g.inactive().iter().map(|q| q.0).collect();
    let sub = DeviceGraph::new(g.n_qubits(), edges, inactive).expect("subgraph of a valid graph");
    sub.connected_components().iter().map(Vec::len).max().unwrap_or(0)
}

/// One row of the device summary table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub device: String,
    pub qubits: usize,
    pub mean_negativity: f64,
    pub sd_negativity: f64,
    pub connected_50: usize,
    pub connected_75: usize,
    pub connected_90: usize,
    pub whole_device: bool,
}

pub fn summary_row(device: &str, g: &DeviceGraph, eg: &EntanglementGraph) -> SummaryRow {
    let (mean, sd) = eg.mean_sd();
    let size = |x| whole_device(g, eg, Threshold::Fraction(x));
    SummaryRow {
        device: device.to_string(),
        qubits: g.n_active(),
        mean_negativity: mean,
        sd_negativity: sd,
        connected_50: size(0.5),
        connected_75: size(0.75),
        connected_90: size(0.9),
        whole_device: whole_device(g, eg, Threshold::Positive) == g.n_active(),
    }
}
