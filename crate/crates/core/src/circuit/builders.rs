//! Circuits for each experiment.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{insert_dd, Circuit, CircuitError, DdScheme, Gate, Pauli};
use crate::embed::{GhzEmbedding, GraphStateSchedule, TomographySet};
use crate::topology::{Edge, QubitId};

/// An idle window inserted between preparation and measurement.
#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Idle {
    pub delay_ns: u64,
    pub dd: DdScheme,
    /// Duration of one X pulse.
    pub x_ns: u64,
}

impl Idle {
    pub fn none() -> Self {
        Idle::default()
    }
}

fn register(qubits: impl IntoIterator<Item = QubitId>) -> usize {
    qubits.into_iter().map(|q| q.0 + 1).max().unwrap_or(0)
}

fn ghz_prep(e: &GhzEmbedding) -> Vec<Gate> {
    let mut ops = vec![Gate::H { q: e.source }];
    for layer in &e.layers {
        ops.extend(layer.iter().map(|&(control, target)| Gate::Cx { control, target }));
    }
    ops
}

fn ghz_colors(e: &GhzEmbedding, qubits: &[QubitId]) -> Vec<u8> {
    let mut color = BTreeMap::from([(e.source, 0u8)]);
    for &(c, t) in e.layers.iter().flatten() {
        let parent = color[&c];
        color.insert(t, 1 - parent);
    }
    qubits.iter().map(|q| color[q]).collect()
}

fn measure_all(c: &mut Circuit, qubits: &[QubitId]) -> Result<(), CircuitError> {
    for (clbit, &q) in qubits.iter().enumerate() {
        c.push(Gate::Measure { q, clbit })?;
    }
    Ok(())
}

/// H on the source followed by the embedding's CNOT layers.
pub fn build_ghz(e: &GhzEmbedding) -> Circuit {
    let mut c = Circuit::new(register(e.included.iter().copied()), 0);
    c.extend(ghz_prep(e)).expect("embedding gates are valid");
    c
}

/// GHZ preparation, idle window, and measurement of every GHZ qubit
/// (clbit `i` is the `i`-th qubit in ascending order).
pub fn build_ghz_population(e: &GhzEmbedding, idle: Idle) -> Result<Circuit, CircuitError> {
    let qubits = e.qubits_sorted();
    let mut c = Circuit::new(register(qubits.iter().copied()), qubits.len());
    c.extend(ghz_prep(e))?;
    let colors = ghz_colors(e, &qubits);
    c.extend(insert_dd(&qubits, Some(&colors), idle.delay_ns, idle.dd, idle.x_ns)?)?;
    measure_all(&mut c, &qubits)?;
    Ok(c)
}

/// Multiple-quantum-coherence circuit: GHZ preparation, idle window,
/// optional refocusing X on every qubit, `PHASE(phi)` on every qubit (so the
/// state picks up `e^{-i N phi}`), the inverse preparation, and measurement.
pub fn build_mqc(e: &GhzEmbedding, phi: f64, pi_pulse: bool, idle: Idle) -> Result<Circuit, CircuitError> {
    let qubits = e.qubits_sorted();
    let mut c = Circuit::new(register(qubits.iter().copied()), qubits.len());
    let prep = ghz_prep(e);
    c.extend(prep.iter().cloned())?;
    let colors = ghz_colors(e, &qubits);
    c.extend(insert_dd(&qubits, Some(&colors), idle.delay_ns, idle.dd, idle.x_ns)?)?;
    if pi_pulse {
        c.extend(qubits.iter().map(|&q| Gate::X { q }))?;
    }
    c.extend(qubits.iter().map(|&q| Gate::Phase { q, angle: phi }))?;
    // every gate in the preparation is self-inverse
    c.extend(prep.into_iter().rev())?;
    measure_all(&mut c, &qubits)?;
    Ok(c)
}

/// `phi_j = pi j / (N + 1)` for `j = 0..=2N+1`.
pub fn mqc_phase_grid(n: usize) -> Vec<f64> {
    (0..2 * n + 2).map(|j| PI * j as f64 / (n + 1) as f64).collect()
}

/// H on every vertex followed by the CZ layers.
pub fn build_graph_state(s: &GraphStateSchedule) -> Circuit {
    let mut c = Circuit::new(register(s.qubits.iter().copied()), 0);
    c.extend(graph_prep(s)).expect("schedule gates are valid");
    c
}

fn graph_prep(s: &GraphStateSchedule) -> Vec<Gate> {
    let mut ops: Vec<Gate> = s.qubits.iter().map(|&q| Gate::H { q }).collect();
    for layer in &s.layers {
        ops.extend(layer.iter().map(|e| Gate::Cz { a: e.lo(), b: e.hi() }));
    }
    ops
}

/// Two-colouring of `qubits` by BFS over `edges`; `None` on an odd cycle.
pub(crate) fn bipartition(qubits: &[QubitId], edges: impl Iterator<Item = Edge>) -> Option<Vec<u8>> {
    let index: BTreeMap<QubitId, usize> = qubits.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let mut adj = vec![Vec::new(); qubits.len()];
    for e in edges {
        if let (Some(&a), Some(&b)) = (index.get(&e.lo()), index.get(&e.hi())) {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut color: Vec<Option<u8>> = vec![None; qubits.len()];
    for start in 0..qubits.len() {
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let cu = color[u]?;
            for &v in &adj[u] {
                match color[v] {
                    None => {
                        color[v] = Some(1 - cu);
                        queue.push_back(v);
                    }
                    Some(cv) if cv == cu => return None,
                    _ => {}
                }
            }
        }
    }
    Some(color.into_iter().map(|c| c.unwrap_or(0)).collect())
}

fn basis_change(q: QubitId, p: Pauli) -> Vec<Gate> {
    match p {
        Pauli::Z => vec![],
        Pauli::X => vec![Gate::H { q }],
        // S-dagger then H
        Pauli::Y => vec![Gate::Phase { q, angle: PI / 2.0 }, Gate::H { q }],
    }
}

/// Graph-state preparation, idle window on every vertex, the Pauli setting on
/// each pair of the batch, and Z measurement of each set's support.
///
/// Clbits follow the batch order, each set contributing its
/// [`TomographySet::support`] in order.
pub fn build_qst_batch(
    s: &GraphStateSchedule,
    batch: &[TomographySet],
    setting: (Pauli, Pauli),
    idle: Idle,
) -> Result<Circuit, CircuitError> {
    build_qst_marked(s, batch, &[], setting, idle)
}

/// As [`build_qst_batch`], with a correlated Z dephasing on each qubit group
/// in `marks` right after preparation.
pub(crate) fn build_qst_marked(
    s: &GraphStateSchedule,
    batch: &[TomographySet],
    marks: &[Vec<QubitId>],
    setting: (Pauli, Pauli),
    idle: Idle,
) -> Result<Circuit, CircuitError> {
    for (i, a) in batch.iter().enumerate() {
        for b in &batch[i + 1..] {
            if let Some(q) = a.overlaps(b) {
                return Err(CircuitError::OverlappingSupports(q));
            }
        }
    }
    let n_clbits: usize = batch.iter().map(|t| t.support().len()).sum();
    let reg = register(s.qubits.iter().copied().chain(batch.iter().flat_map(|t| t.support())));
    let mut c = Circuit::new(reg, n_clbits);
    c.extend(graph_prep(s))?;
    c.extend(marks.iter().map(|m| Gate::ZDephase { qubits: m.clone() }))?;
    if idle.delay_ns > 0 {
        let colors = bipartition(&s.qubits, s.edges());
        c.extend(insert_dd(&s.qubits, colors.as_deref(), idle.delay_ns, idle.dd, idle.x_ns)?)?;
    }
    for t in batch {
        c.extend(basis_change(t.pair.lo(), setting.0))?;
        c.extend(basis_change(t.pair.hi(), setting.1))?;
    }
    let mut clbit = 0;
    for t in batch {
        for q in t.support() {
            c.push(Gate::Measure { q, clbit })?;
            clbit += 1;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{embed_ghz, schedule_graph_state, EdgeWeight};
    use crate::topology::{presets, Calibration};

    #[test]
    fn phase_grid() {
        let g = mqc_phase_grid(1);
        let expect = [0.0, PI / 2.0, PI, 3.0 * PI / 2.0];
        assert_eq!(g.len(), 4);
        for (a, b) in g.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let g = mqc_phase_grid(32);
        assert_eq!(g.len(), 66);
        assert!(g.windows(2).all(|w| ((w[1] - w[0]) - PI / 33.0).abs() < 1e-12));
    }

    #[test]
    fn ghz_depth_matches_embedding() {
        let g = presets::falcon_7();
        let cal = Calibration::uniform(&g);
        let e = embed_ghz(&g, &cal, QubitId(1), 7, EdgeWeight::CxError).unwrap();
        let c = build_ghz(&e);
        assert_eq!(c.two_qubit_depth(), e.depth);
        let single = embed_ghz(&g, &cal, QubitId(0), 1, EdgeWeight::CxError).unwrap();
        assert_eq!(build_ghz(&single).ops(), &[Gate::H { q: QubitId(0) }]);
    }

    #[test]
    fn graph_state_on_falcon_has_depth_three() {
        let s = schedule_graph_state(&presets::falcon_7());
        assert_eq!(build_graph_state(&s).two_qubit_depth(), 3);
    }

    #[test]
    fn empty_batch_measures_nothing() {
        let s = schedule_graph_state(&presets::falcon_7());
        let c = build_qst_batch(&s, &[], (Pauli::Z, Pauli::Z), Idle::none()).unwrap();
        assert_eq!(c.n_clbits(), 0);
        assert!(c.measurements().is_empty());
    }

    #[test]
    fn overlapping_batch_rejected() {
        let g = presets::falcon_7();
        let s = schedule_graph_state(&g);
        let a = TomographySet::new(&g, Edge::new(0, 1).unwrap());
        let b = TomographySet::new(&g, Edge::new(1, 2).unwrap());
        assert!(matches!(
            build_qst_batch(&s, &[a, b], (Pauli::X, Pauli::Y), Idle::none()),
            Err(CircuitError::OverlappingSupports(_))
        ));
    }
}
