//! JSON layout files.
//!
//! ```json
//! { "n_qubits": 3, "edges": [[0, 1], [1, 2]], "inactive": [],
//!   "calibration": {
//!     "qubits": { "0": { "readout": [[0.98, 0.02], [0.02, 0.98]], "t1_us": 200.0 } },
//!     "edges": { "0-1": { "cx_error": 0.008 } } } }
//! ```
//!
//! Every calibration field is optional and falls back to the defaults of
//! [`QubitCalibration`] and [`EdgeCalibration`].

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Calibration, DeviceGraph, Edge, EdgeCalibration, QubitCalibration, TopologyError};

/// A device graph together with its calibration.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub graph: DeviceGraph,
    pub calibration: Calibration,
}

#[derive(Debug, thiserror::Error)]
pub enum LayoutError {
    #[error("cannot read or write layout: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed layout file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid layout: {0}")]
    Validation(#[from] TopologyError),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutFile {
    n_qubits: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default)]
    inactive: Vec<usize>,
    #[serde(default)]
    calibration: CalibrationFile,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrationFile {
    #[serde(default)]
    qubits: BTreeMap<usize, QubitFile>,
    #[serde(default)]
    edges: BTreeMap<String, EdgeFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QubitFile {
    readout: Option<[[f64; 2]; 2]>,
    t1_us: Option<f64>,
    t2_us: Option<f64>,
    sx_error: Option<f64>,
    x_ns: Option<u64>,
    measure_ns: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeFile {
    cx_error: Option<f64>,
    cnot_ns: Option<u64>,
    zz_rate_mhz: Option<f64>,
}

fn parse_edge_key(key: &str) -> Result<Edge, TopologyError> {
    let bad = || TopologyError::Calibration(format!("bad edge key {key:?}"));
    let (a, b) = key.split_once('-').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a >= b {
        return Err(bad());
    }
    Edge::new(a, b).ok_or_else(bad)
}

impl Layout {
    /// A layout with default calibration.
    pub fn with_defaults(graph: DeviceGraph) -> Self {
        let calibration = Calibration::uniform(&graph);
        Layout { graph, calibration }
    }

    pub fn validate(&self) -> Result<(), TopologyError> {
        self.calibration.validate(&self.graph)
    }

    pub fn from_json(text: &str) -> Result<Self, LayoutError> {
        let file: LayoutFile = serde_json::from_str(text)?;
        let graph = DeviceGraph::new(
            file.n_qubits,
            file.edges.iter().map(|&[a, b]| (a, b)),
            file.inactive.iter().copied(),
        )?;
        let mut calibration = Calibration::uniform(&graph);
        for (q, entry) in file.calibration.qubits {
            let slot = calibration.qubits.get_mut(q).ok_or_else(|| {
                TopologyError::Calibration(format!("calibration for unknown qubit {q}"))
            })?;
            let d = QubitCalibration::default();
            *slot = QubitCalibration {
                readout: entry.readout.unwrap_or(d.readout),
                t1_us: entry.t1_us.unwrap_or(d.t1_us),
                t2_us: entry.t2_us.unwrap_or(d.t2_us),
                sx_error: entry.sx_error.unwrap_or(d.sx_error),
                x_ns: entry.x_ns.unwrap_or(d.x_ns),
                measure_ns: entry.measure_ns.unwrap_or(d.measure_ns),
            };
        }
        for (key, entry) in file.calibration.edges {
            let e = parse_edge_key(&key)?;
            if !graph.has_edge(e.lo(), e.hi()) {
                return Err(TopologyError::Calibration(format!("calibration for non-edge {e}")).into());
            }
            let d = EdgeCalibration::default();
            calibration.edges.insert(
                e,
                EdgeCalibration {
                    cx_error: entry.cx_error.unwrap_or(d.cx_error),
                    cnot_ns: entry.cnot_ns.unwrap_or(d.cnot_ns),
                    zz_rate_mhz: entry.zz_rate_mhz.unwrap_or(d.zz_rate_mhz),
                },
            );
        }
        let layout = Layout { graph, calibration };
        layout.validate()?;
        Ok(layout)
    }

    /// Serializes every field explicitly.
    pub fn to_json(&self) -> String {
        let g = &self.graph;
        let file = LayoutFile {
            n_qubits: g.n_qubits(),
            edges: g.edges().map(Into::into).collect(),
            inactive: g.inactive().iter().map(|q| q.0).collect(),
            calibration: CalibrationFile {
                qubits: self
                    .calibration
                    .qubits
                    .iter()
                    .enumerate()
                    .map(|(i, q)| {
                        let entry = QubitFile {
                            readout: Some(q.readout),
                            t1_us: Some(q.t1_us),
                            t2_us: Some(q.t2_us),
                            sx_error: Some(q.sx_error),
                            x_ns: Some(q.x_ns),
                            measure_ns: Some(q.measure_ns),
                        };
                        (i, entry)
                    })
                    .collect(),
                edges: self
                    .calibration
                    .edges
                    .iter()
                    .map(|(e, c)| {
                        let entry = EdgeFile {
                            cx_error: Some(c.cx_error),
                            cnot_ns: Some(c.cnot_ns),
                            zz_rate_mhz: Some(c.zz_rate_mhz),
                        };
                        (e.key(), entry)
                    })
                    .collect(),
            },
        };
        serde_json::to_string_pretty(&file).expect("layout serializes")
    }
}

pub fn load_layout(path: impl AsRef<Path>) -> Result<Layout, LayoutError> {
    let text = std::fs::read_to_string(path)?;
    Layout::from_json(&text)
}

pub fn save_layout(layout: &Layout, path: impl AsRef<Path>) -> Result<(), LayoutError> {
    layout.validate()?;
    std::fs::write(path, layout.to_json() + "\n")?;
    Ok(())
}
