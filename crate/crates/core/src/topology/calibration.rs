use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{DeviceGraph, Edge, QubitId, TopologyError};

/// Per-qubit calibration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitCalibration {
    /// `readout[prepared][measured]`: each row is a distribution over outcomes.
    pub readout: [[f64; 2]; 2],
    pub t1_us: f64,
    pub t2_us: f64,
    /// Depolarizing probability of a single-qubit gate.
    pub sx_error: f64,
    pub x_ns: u64,
    pub measure_ns: u64,
}

/// Per-edge calibration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeCalibration {
    /// Depolarizing probability of a CNOT/CZ on this edge.
    pub cx_error: f64,
    pub cnot_ns: u64,
    /// Residual ZZ strength ζ in rad/µs. Over an idle window of `t` µs the
    /// pair picks up a conditional phase of `ζ t`.
    pub zz_rate_mhz: f64,
}

impl QubitCalibration {
    pub const DEFAULT_READOUT_FLIP: f64 = 0.02;

    /// Symmetric readout with flip probability `p`.
    pub fn symmetric_readout(p: f64) -> [[f64; 2]; 2] {
        [[1.0 - p, p], [p, 1.0 - p]]
    }

    /// `p(measured | prepared)`.
    pub fn p_measured(&self, measured: u8, prepared: u8) -> f64 {
        self.readout[prepared as usize][measured as usize]
    }
}

impl Default for QubitCalibration {
    fn default() -> Self {
        QubitCalibration {
            readout: Self::symmetric_readout(Self::DEFAULT_READOUT_FLIP),
            t1_us: 200.0,
            t2_us: 120.0,
            sx_error: 3e-4,
            x_ns: 35,
            measure_ns: 700,
        }
    }
}

impl Default for EdgeCalibration {
    fn default() -> Self {
        EdgeCalibration { cx_error: 0.01, cnot_ns: 385, zz_rate_mhz: 0.0 }
    }
}

/// Calibration data for every qubit and edge of a [`DeviceGraph`].
#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub qubits: Vec<QubitCalibration>,
    pub edges: BTreeMap<Edge, EdgeCalibration>,
}

fn check_prob(what: &str, p: f64) -> Result<(), TopologyError> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(TopologyError::Calibration(format!("{what} = {p} is not a probability")))
    }
}

impl Calibration {
    /// Default values for every qubit and edge of `g`.
    pub fn uniform(g: &DeviceGraph) -> Self {
        Calibration {
            qubits: vec![QubitCalibration::default(); g.n_qubits()],
            edges: g.edges().map(|e| (e, EdgeCalibration::default())).collect(),
        }
    }

    pub fn qubit(&self, q: QubitId) -> &QubitCalibration {
        &self.qubits[q.0]
    }

    /// Calibration of the edge `{a, b}`.
    ///
    /// # Panics
    /// If the pair is not an edge of the calibrated graph.
    pub fn edge(&self, a: QubitId, b: QubitId) -> &EdgeCalibration {
        let e = Edge::new(a, b).expect("distinct endpoints");
        self.edges.get(&e).unwrap_or_else(|| panic!("no calibration for edge {e}"))
    }

    /// Sets every readout matrix to a symmetric flip `p`.
    pub fn with_readout_flip(mut self, p: f64) -> Self {
        for q in &mut self.qubits {
            q.readout = QubitCalibration::symmetric_readout(p);
        }
        self
    }

    pub fn with_t2(mut self, t1_us: f64, t2_us: f64) -> Self {
        for q in &mut self.qubits {
            q.t1_us = t1_us;
            q.t2_us = t2_us;
        }
        self
    }

    pub fn with_zz(mut self, zeta: f64) -> Self {
        for e in self.edges.values_mut() {
            e.zz_rate_mhz = zeta;
        }
        self
    }

    pub fn with_gate_errors(mut self, sx_error: f64, cx_error: f64) -> Self {
        for q in &mut self.qubits {
            q.sx_error = sx_error;
        }
        for e in self.edges.values_mut() {
            e.cx_error = cx_error;
        }
        self
    }

    /// Checks the calibration against `g`.
    pub fn validate(&self, g: &DeviceGraph) -> Result<(), TopologyError> {
        if self.qubits.len() != g.n_qubits() {
            return Err(TopologyError::Calibration(format!(
                "{} qubit entries for {} qubits",
                self.qubits.len(),
                g.n_qubits()
            )));
        }
        for (i, q) in self.qubits.iter().enumerate() {
            for (row, r) in q.readout.iter().enumerate() {
                for &p in r {
                    check_prob(&format!("qubit {i} readout"), p)?;
                }
                let sum = r[0] + r[1];
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(TopologyError::Calibration(format!(
                        "qubit {i} readout row {row} sums to {sum}"
                    )));
                }
            }
            check_prob(&format!("qubit {i} sx_error"), q.sx_error)?;
            if !(q.t1_us.is_finite() && q.t1_us > 0.0 && q.t2_us.is_finite() && q.t2_us > 0.0) {
                return Err(TopologyError::Calibration(format!("qubit {i} coherence times must be positive")));
            }
            if q.t2_us > 2.0 * q.t1_us {
                return Err(TopologyError::Calibration(format!(
                    "qubit {i} has t2 {} > 2 t1 {}",
                    q.t2_us, q.t1_us
                )));
            }
        }
        for e in g.edges() {
            if !self.edges.contains_key(&e) {
                return Err(TopologyError::Calibration(format!("missing edge {e}")));
            }
        }
        for (e, c) in &self.edges {
            if !g.has_edge(e.lo(), e.hi()) {
                return Err(TopologyError::Calibration(format!("calibration for non-edge {e}")));
            }
            check_prob(&format!("edge {e} cx_error"), c.cx_error)?;
            if !c.zz_rate_mhz.is_finite() {
                return Err(TopologyError::Calibration(format!("edge {e} zz rate is not finite")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::line;

    #[test]
    fn defaults_validate() {
        let g = line(4).unwrap();
        let cal = Calibration::uniform(&g);
        cal.validate(&g).unwrap();
        assert_eq!(cal.edge(QubitId(2), QubitId(1)).cnot_ns, 385);
        assert_eq!(cal.qubit(QubitId(0)).p_measured(1, 0), 0.02);
    }

    #[test]
    fn rejects_bad_values() {
        let g = line(2).unwrap();
        let mut cal = Calibration::uniform(&g);
        cal.qubits[1].readout = [[0.9, 0.0], [0.0, 1.0]];
        assert!(cal.validate(&g).is_err());

        let mut cal = Calibration::uniform(&g);
        cal.qubits[0].t2_us = 500.0;
        assert!(cal.validate(&g).is_err());

        let mut cal = Calibration::uniform(&g);
        cal.edges.values_mut().for_each(|e| e.cx_error = 1.5);
        assert!(cal.validate(&g).is_err());
    }
}
