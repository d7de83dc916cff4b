//! Light-cone reduction for graph-state tomography.
//!
//! Every CZ of the graph state that touches `S = pair ∪ ring` lies inside
//! the radius-2 neighbourhood of the pair. CZs further out commute with
//! everything that couples back into `S`, so simulating the neighbourhood
//! gives the reduced state of `S` exactly, also under idle noise (relaxation,
//! ZZ, decoupling pulses). Depolarizing errors on the dropped outer CZs are
//! not reproduced. For a noiseless graph
//! state the outer qubits can also be traced out analytically: an outer
//! qubit `o` in `|+>` after its CZs with `S` dephases `S` by the product of Z
//! on `N(o) ∩ S`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::circuit::{build_qst_batch, build_qst_marked, Circuit, CircuitError, Idle, Pauli};
use crate::embed::{GraphStateSchedule, TomographySet};
use crate::topology::{DeviceGraph, Edge, QubitId};

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LightConeMode {
    /// Simulate every qubit within distance 2 of the pair.
    #[default]
    Explicit,
    /// Simulate `pair ∪ ring` only and replace outer qubits by Z-dephasing
    /// marks. Exact for noiseless preparation.
    Marks,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightCone {
    pub set: TomographySet,
    /// `pair ∪ ring`, ascending.
    pub core: Vec<QubitId>,
    /// Radius-2 neighbourhood of the pair, ascending.
    pub qubits: Vec<QubitId>,
    /// For each outer qubit (ascending), its neighbours inside `core`.
    pub marks: Vec<(QubitId, Vec<QubitId>)>,
}

pub fn light_cone_reduce(g: &DeviceGraph, set: &TomographySet) -> LightCone {
    let core: BTreeSet<QubitId> = set.support().into_iter().collect();
    let mut outer: BTreeSet<QubitId> = BTreeSet::new();
    for &r in &set.ring {
        outer.extend(g.neighbors(r).unwrap_or(&[]).iter().filter(|q| !core.contains(q)));
    }
    let marks = outer
        .iter()
        .map(|&o| (o, g.neighbors(o).unwrap_or(&[]).iter().copied().filter(|q| core.contains(q)).collect()))
        .collect();
    LightCone {
        set: set.clone(),
        qubits: core.union(&outer).copied().collect(),
        core: core.into_iter().collect(),
        marks,
    }
}

impl LightCone {
    pub fn size(&self, mode: LightConeMode) -> usize {
        match mode {
            LightConeMode::Explicit => self.qubits.len(),
            LightConeMode::Marks => self.core.len(),
        }
    }

    /// Explicit if the neighbourhood fits under `cap`, otherwise marks.
    pub fn mode_for(&self, cap: usize) -> LightConeMode {
        if self.qubits.len() <= cap {
            LightConeMode::Explicit
        } else {
            LightConeMode::Marks
        }
    }

    /// The induced subgraph on [`LightCone::qubits`]; other qubits are
    /// inactive.
    pub fn subgraph(&self, g: &DeviceGraph) -> DeviceGraph {
        let keep: BTreeSet<QubitId> = self.qubits.iter().copied().collect();
        let edges: Vec<(usize, usize)> = g
            .edges()
            .filter(|e| keep.contains(&e.lo()) && keep.contains(&e.hi()))
            .map(|e| (e.lo().0, e.hi().0))
            .collect();
        let inactive: Vec<usize> = (0..g.n_qubits()).filter(|&i| !keep.contains(&QubitId(i))).collect();
        DeviceGraph::new(g.n_qubits(), edges, inactive).expect("subgraph of a valid graph")
    }

    /// Single-set tomography circuit for this light cone. Measured bits follow
    /// [`TomographySet::support`].
    pub fn circuit(
        &self,
        schedule: &GraphStateSchedule,
        setting: (Pauli, Pauli),
        idle: Idle,
        mode: LightConeMode,
    ) -> Result<Circuit, CircuitError> {
        let batch = std::slice::from_ref(&self.set);
        match mode {
            LightConeMode::Explicit => build_qst_batch(&schedule.restrict(&self.qubits), batch, setting, idle),
            LightConeMode::Marks => {
                let present: BTreeSet<Edge> = schedule.edges().collect();
                let marks: Vec<Vec<QubitId>> = self
                    .marks
                    .iter()
                    .map(|(o, m)| m.iter().copied().filter(|&q| Edge::new(*o, q).is_some_and(|e| present.contains(&e))).collect::<Vec<_>>())
                    .filter(|m| !m.is_empty())
                    .collect();
                build_qst_marked(&schedule.restrict(&self.core), batch, &marks, setting, idle)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{heavy_hex, line};

    #[test]
    fn isolated_edge_is_its_own_cone() {
        let g = line(2).unwrap();
        let set = TomographySet::new(&g, Edge::new(0, 1).unwrap());
        let lc = light_cone_reduce(&g, &set);
        assert_eq!(lc.qubits, vec![QubitId(0), QubitId(1)]);
        assert!(lc.marks.is_empty());
        assert_eq!(lc.subgraph(&g).edge_count(), 1);
    }

    #[test]
    fn heavy_hex_cones_are_small() {
        let g = heavy_hex(4, 4).unwrap();
        for e in g.edges() {
            let lc = light_cone_reduce(&g, &TomographySet::new(&g, e));
            assert!(lc.qubits.len() <= 10, "{e:?} gives {}", lc.qubits.len());
            assert!(lc.core.len() <= 6);
        }
    }
}
