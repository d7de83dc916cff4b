use serde::{Deserialize, Serialize};

use crate::topology::{DeviceGraph, Edge, QubitId};

/// A Bell pair under tomography together with its neighbouring ring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TomographySet {
    pub pair: Edge,
    /// `N(a) ∪ N(b) \ {a, b}`, ascending.
    pub ring: Vec<QubitId>,
}

impl TomographySet {
    pub fn new(g: &DeviceGraph, pair: Edge) -> Self {
        let [a, b] = pair.endpoints();
        let mut ring: Vec<QubitId> = g
            .neighbors(a)
            .unwrap()
            .iter()
            .chain(g.neighbors(b).unwrap())
            .copied()
            .filter(|&q| q != a && q != b)
            .collect();
        ring.sort_unstable();
        ring.dedup();
        TomographySet { pair, ring }
    }

    /// Pair followed by ring: the order of measured bits for this set.
    pub fn support(&self) -> Vec<QubitId> {
        let mut s = vec![self.pair.lo(), self.pair.hi()];
        s.extend(&self.ring);
        s
    }

    pub fn overlaps(&self, other: &TomographySet) -> Option<QubitId> {
        let mine = self.support();
        other.support().into_iter().find(|q| mine.contains(q))
    }
}

/// Tomography sets grouped into batches measured in the same circuits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchPlan {
    pub batches: Vec<Vec<TomographySet>>,
}

impl BatchPlan {
    pub fn n_batches(&self) -> usize {
        self.batches.len()
    }

    pub fn sets(&self) -> impl Iterator<Item = &TomographySet> {
        self.batches.iter().flatten()
    }
}

/// First-fit packing of every edge's tomography set, in edge order, into
/// batches whose supports are pairwise disjoint.
pub fn plan_qst_batches(g: &DeviceGraph) -> BatchPlan {
    let mut batches: Vec<Vec<TomographySet>> = Vec::new();
    let mut occupied: Vec<Vec<bool>> = Vec::new();
    for e in g.edges() {
        let set = TomographySet::new(g, e);
        let support = set.support();
        let slot = occupied.iter().position(|occ| support.iter().all(|q| !occ[q.0]));
        let i = slot.unwrap_or_else(|| {
            batches.push(Vec::new());
            occupied.push(vec![false; g.n_qubits()]);
            batches.len() - 1
        });
        for q in &support {
            occupied[i][q.0] = true;
        }
        batches[i].push(set);
    }
    BatchPlan { batches }
}

/// Circuits needed to run a plan: nine Pauli settings per batch.
pub fn circuits_per_plan(plan: &BatchPlan) -> usize {
    9 * plan.n_batches()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{line, presets};

    #[test]
    fn five_qubit_line_takes_four_batches() {
        let plan = plan_qst_batches(&line(5).unwrap());
        assert_eq!(plan.n_batches(), 4);
        assert_eq!(circuits_per_plan(&plan), 36);
    }

    #[test]
    fn single_edge_is_one_batch() {
        let plan = plan_qst_batches(&line(2).unwrap());
        assert_eq!(plan.batches, vec![vec![TomographySet { pair: Edge::new(0, 1).unwrap(), ring: vec![] }]]);
        assert_eq!(circuits_per_plan(&BatchPlan { batches: vec![] }), 0);
    }

    #[test]
    fn eagle_batches_are_disjoint_and_cover() {
        let g = presets::eagle_127();
        let plan = plan_qst_batches(&g);
        assert!(plan.n_batches() <= 9, "{} batches", plan.n_batches());
        assert_eq!(plan.sets().count(), g.edge_count());
        for batch in &plan.batches {
            for (i, a) in batch.iter().enumerate() {
                for b in &batch[i + 1..] {
                    assert!(a.overlaps(b).is_none());
                }
            }
        }
    }

    #[test]
    fn ring_excludes_pair() {
        let g = presets::falcon_7();
        let s = TomographySet::new(&g, Edge::new(1, 3).unwrap());
        assert_eq!(s.ring, vec![QubitId(0), QubitId(2), QubitId(5)]);
        assert_eq!(s.support()[..2], [QubitId(1), QubitId(3)]);
    }
}
