//! Gate-level circuit IR.
//!
//! Circuits address physical qubits by their device index. The simulator
//! only allocates the qubits a circuit actually touches.

mod builders;
mod dd;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::topology::QubitId;

pub use builders::{
    build_ghz, build_ghz_population, build_graph_state, build_mqc, build_qst_batch, mqc_phase_grid,
    Idle,
};
pub use dd::{insert_dd, DdScheme};
pub(crate) use builders::build_qst_marked;

/// Single-qubit Pauli measurement basis.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// The nine two-qubit settings in row-major order (XX, XY, ..., ZZ).
    pub fn settings() -> [(Pauli, Pauli); 9] {
        let mut out = [(Pauli::X, Pauli::X); 9];
        for (i, a) in Self::ALL.into_iter().enumerate() {
            for (j, b) in Self::ALL.into_iter().enumerate() {
                out[3 * i + j] = (a, b);
            }
        }
        out
    }

    pub fn label(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Gate {
    H { q: QubitId },
    X { q: QubitId },
    Cx { control: QubitId, target: QubitId },
    Cz { a: QubitId, b: QubitId },
    /// `diag(1, e^{-i angle})`.
    Phase { q: QubitId, angle: f64 },
    /// Idle window of `ns` nanoseconds on all listed qubits at once.
    Delay { qubits: Vec<QubitId>, ns: u64 },
    Measure { q: QubitId, clbit: usize },
    Barrier { qubits: Vec<QubitId> },
    /// Correlated dephasing `rho -> (rho + Z_M rho Z_M) / 2` with `Z_M` the
    /// product of Z over the listed qubits.
    ZDephase { qubits: Vec<QubitId> },
}

impl Gate {
    pub fn qubits(&self) -> Vec<QubitId> {
        match self {
            Gate::H { q } | Gate::X { q } | Gate::Phase { q, .. } | Gate::Measure { q, .. } => vec![*q],
            Gate::Cx { control, target } => vec![*control, *target],
            Gate::Cz { a, b } => vec![*a, *b],
            Gate::Delay { qubits, .. } | Gate::Barrier { qubits } | Gate::ZDephase { qubits } => {
                qubits.clone()
            }
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cx { .. } | Gate::Cz { .. })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("qubit {0} outside the circuit register")]
    QubitOutOfRange(QubitId),
    #[error("qubit {0} used twice in one gate")]
    DuplicateOperand(QubitId),
    #[error("clbit {0} outside the classical register")]
    ClbitOutOfRange(usize),
    #[error("clbit {0} written twice")]
    ClbitReused(usize),
    #[error("non-finite phase angle")]
    NonFiniteAngle,
    #[error("delay of {total_ns} ns cannot fit {needed_ns} ns of pulses")]
    DelayTooShort { total_ns: u64, needed_ns: u64 },
    #[error("staggered decoupling needs a two-colouring of the idle qubits")]
    MissingColoring,
    #[error("tomography sets in one batch overlap on qubit {0}")]
    OverlappingSupports(QubitId),
}

/// An ordered list of gates on `n_qubits` device qubits with `n_clbits`
/// classical bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    n_clbits: usize,
    ops: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize, n_clbits: usize) -> Self {
        Circuit { n_qubits, n_clbits, ops: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_clbits(&self) -> usize {
        self.n_clbits
    }

    pub fn ops(&self) -> &[Gate] {
        &self.ops
    }

    /// Appends a gate after checking its operands.
    pub fn push(&mut self, gate: Gate) -> Result<&mut Self, CircuitError> {
        let qs = gate.qubits();
        let mut seen = BTreeSet::new();
        for &q in &qs {
            if q.0 >= self.n_qubits {
                return Err(CircuitError::QubitOutOfRange(q));
            }
            if !seen.insert(q) {
                return Err(CircuitError::DuplicateOperand(q));
            }
        }
        match &gate {
            Gate::Phase { angle, .. } if !angle.is_finite() => return Err(CircuitError::NonFiniteAngle),
            Gate::Measure { clbit, .. } => {
                if *clbit >= self.n_clbits {
                    return Err(CircuitError::ClbitOutOfRange(*clbit));
                }
                let reused = self.ops.iter().any(|g| matches!(g, Gate::Measure { clbit: c, .. } if c == clbit));
                if reused {
                    return Err(CircuitError::ClbitReused(*clbit));
                }
            }
            _ => {}
        }
        self.ops.push(gate);
        Ok(self)
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<&mut Self, CircuitError> {
        for g in gates {
            self.push(g)?;
        }
        Ok(self)
    }

    /// Sorted set of qubits touched by any gate.
    pub fn used_qubits(&self) -> Vec<QubitId> {
        let set: BTreeSet<QubitId> = self.ops.iter().flat_map(Gate::qubits).collect();
        set.into_iter().collect()
    }

    /// `(qubit, clbit)` for every measurement, in program order.
    pub fn measurements(&self) -> Vec<(QubitId, usize)> {
        self.ops
            .iter()
            .filter_map(|g| match g {
                Gate::Measure { q, clbit } => Some((*q, *clbit)),
                _ => None,
            })
            .collect()
    }

    /// Longest chain of two-qubit gates sharing a qubit. Barriers synchronise
    /// their qubits.
    pub fn two_qubit_depth(&self) -> usize {
        let mut level = vec![0usize; self.n_qubits];
        for g in &self.ops {
            match g {
                Gate::Cx { control: a, target: b } | Gate::Cz { a, b } => {
                    let l = level[a.0].max(level[b.0]) + 1;
                    level[a.0] = l;
                    level[b.0] = l;
                }
                Gate::Barrier { qubits } => {
                    let l = qubits.iter().map(|q| level[q.0]).max().unwrap_or(0);
                    for q in qubits {
                        level[q.0] = l;
                    }
                }
                _ => {}
            }
        }
        level.into_iter().max().unwrap_or(0)
    }

    pub fn count_two_qubit(&self) -> usize {
        self.ops.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Total idle time of qubit `q` in nanoseconds.
    pub fn delay_on(&self, q: QubitId) -> u64 {
        self.ops
            .iter()
            .filter_map(|g| match g {
                Gate::Delay { qubits, ns } if qubits.contains(&q) => Some(*ns),
                _ => None,
            })
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("circuit serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let raw: Circuit = serde_json::from_str(text)?;
        let mut c = Circuit::new(raw.n_qubits, raw.n_clbits);
        c.extend(raw.ops).map_err(serde::de::Error::custom)?;
        Ok(c)
    }

    /// OpenQASM 2 text. Delays and dephasing marks become comments.
    pub fn to_qasm(&self) -> String {
        let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
        let _ = writeln!(s, "qreg q[{}];", self.n_qubits);
        if self.n_clbits > 0 {
            let _ = writeln!(s, "creg c[{}];", self.n_clbits);
        }
        let list = |qs: &[QubitId]| qs.iter().map(|q| format!("q[{q}]")).collect::<Vec<_>>().join(",");
        for g in &self.ops {
            let _ = match g {
                Gate::H { q } => writeln!(s, "h q[{q}];"),
                Gate::X { q } => writeln!(s, "x q[{q}];"),
                Gate::Cx { control, target } => writeln!(s, "cx q[{control}],q[{target}];"),
                Gate::Cz { a, b } => writeln!(s, "cz q[{a}],q[{b}];"),
                Gate::Phase { q, angle } => writeln!(s, "u1({:?}) q[{q}];", -angle),
                Gate::Delay { qubits, ns } => writeln!(s, "// delay({ns}ns) {};", list(qubits)),
                Gate::Measure { q, clbit } => writeln!(s, "measure q[{q}] -> c[{clbit}];"),
                Gate::Barrier { qubits } => writeln!(s, "barrier {};", list(qubits)),
                Gate::ZDephase { qubits } => writeln!(s, "// zdephase {};", list(qubits)),
            };
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(i: usize) -> QubitId {
        QubitId(i)
    }

    #[test]
    fn push_validates_operands() {
        let mut c = Circuit::new(2, 1);
        assert_eq!(c.push(Gate::H { q: q(2) }).unwrap_err(), CircuitError::QubitOutOfRange(q(2)));
        assert_eq!(
            c.push(Gate::Cx { control: q(1), target: q(1) }).unwrap_err(),
            CircuitError::DuplicateOperand(q(1))
        );
        assert_eq!(
            c.push(Gate::Phase { q: q(0), angle: f64::NAN }).unwrap_err(),
            CircuitError::NonFiniteAngle
        );
        c.push(Gate::Measure { q: q(0), clbit: 0 }).unwrap();
        assert_eq!(c.push(Gate::Measure { q: q(1), clbit: 0 }).unwrap_err(), CircuitError::ClbitReused(0));
        assert_eq!(c.push(Gate::Measure { q: q(1), clbit: 1 }).unwrap_err(), CircuitError::ClbitOutOfRange(1));
    }

    #[test]
    fn depth_counts_chains() {
        let mut c = Circuit::new(4, 0);
        c.extend([
            Gate::Cx { control: q(0), target: q(1) },
            Gate::Cx { control: q(2), target: q(3) },
            Gate::Cz { a: q(1), b: q(2) },
            Gate::H { q: q(0) },
        ])
        .unwrap();
        assert_eq!(c.two_qubit_depth(), 2);
        assert_eq!(c.count_two_qubit(), 3);
    }

    #[test]
    fn json_round_trip() {
        let mut c = Circuit::new(3, 2);
        c.extend([
            Gate::H { q: q(0) },
            Gate::Phase { q: q(1), angle: 0.1 + 0.2 },
            Gate::Delay { qubits: vec![q(0), q(2)], ns: 1500 },
            Gate::ZDephase { qubits: vec![q(1)] },
            Gate::Measure { q: q(2), clbit: 1 },
        ])
        .unwrap();
        let back = Circuit::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert!(c.to_json().contains("\"op\":\"delay\""));
    }

    #[test]
    fn qasm_export() {
        let mut c = Circuit::new(2, 2);
        c.extend([
            Gate::H { q: q(0) },
            Gate::Cx { control: q(0), target: q(1) },
            Gate::Measure { q: q(0), clbit: 0 },
        ])
        .unwrap();
        let text = c.to_qasm();
        assert!(text.starts_with("OPENQASM 2.0;"));
        assert!(text.contains("cx q[0],q[1];"));
        assert!(text.contains("measure q[0] -> c[0];"));
    }

    #[test]
    fn nine_settings() {
        let s = Pauli::settings();
        assert_eq!(s[0], (Pauli::X, Pauli::X));
        assert_eq!(s[5], (Pauli::Y, Pauli::Z));
        assert_eq!(s[8], (Pauli::Z, Pauli::Z));
    }
}
