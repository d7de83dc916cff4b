use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EdgeWeight, EmbedError};
use crate::topology::{Calibration, DeviceGraph, QubitId};

/// A layered CNOT tree preparing a GHZ state from `source`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhzEmbedding {
    pub source: QubitId,
    /// `(control, target)` pairs; each layer is executed in parallel.
    pub layers: Vec<Vec<(QubitId, QubitId)>>,
    /// Qubits in the order they join the state, source first.
    pub included: Vec<QubitId>,
    pub depth: usize,
    pub total_cost: f64,
}

impl GhzEmbedding {
    pub fn size(&self) -> usize {
        self.included.len()
    }

    /// Included qubits in ascending order.
    pub fn qubits_sorted(&self) -> Vec<QubitId> {
        let mut q = self.included.clone();
        q.sort_unstable();
        q
    }

    /// Checks the structural invariants against `g`.
    pub fn validate(&self, g: &DeviceGraph) -> Result<(), String> {
        let mut joined = vec![None; g.n_qubits()];
        joined[self.source.0] = Some(0usize);
        for (k, layer) in self.layers.iter().enumerate() {
            let mut busy = std::collections::BTreeSet::new();
            for &(c, t) in layer {
                if !g.has_edge(c, t) {
                    return Err(format!("{c}->{t} is not a device edge"));
                }
                if !joined[c.0].is_some_and(|j| j <= k) {
                    return Err(format!("control {c} not included before layer {}", k + 1));
                }
                if joined[t.0].is_some() {
                    return Err(format!("target {t} already included"));
                }
                if !busy.insert(c) || !busy.insert(t) {
                    return Err(format!("qubit reused within layer {}", k + 1));
                }
                joined[t.0] = Some(k + 1);
            }
        }
        let count = joined.iter().filter(|j| j.is_some()).count();
        if count != self.included.len() || self.depth != self.layers.len() {
            return Err("bookkeeping mismatch".into());
        }
        Ok(())
    }
}

/// Grows a GHZ state of `n` qubits from `source`, one CNOT per included qubit
/// per layer.
///
/// Each layer takes a maximum matching between included qubits and free
/// neighbours. Targets with more free neighbours of their own are preferred,
/// then lower edge weight, then lower indices. In the last layer only the
/// cheapest of the matched edges are kept.
pub fn embed_ghz(
    g: &DeviceGraph,
    cal: &Calibration,
    source: QubitId,
    n: usize,
    weight: EdgeWeight,
) -> Result<GhzEmbedding, EmbedError> {
    if n == 0 {
        return Err(EmbedError::EmptyRequest);
    }
    g.degree(source)?;
    if !g.is_active(source) {
        return Err(EmbedError::InactiveSource(source));
    }
    let available = g.component_of(source)?.len();
    if n > available {
        return Err(EmbedError::Unreachable { from: source, requested: n, available });
    }

    let mut included = vec![false; g.n_qubits()];
    included[source.0] = true;
    let mut order = vec![source];
    let mut layers = Vec::new();
    let mut total_cost = 0.0;

    while order.len() < n {
        let free_degree = |q: QubitId| g.neighbors(q).unwrap().iter().filter(|v| !included[v.0]).count();
        let mut cands: Vec<(usize, f64, QubitId, QubitId)> = Vec::new();
        for &c in &order {
            for &t in g.neighbors(c)? {
                if !included[t.0] {
                    cands.push((free_degree(t), weight.weight(cal, c, t), c, t));
                }
            }
        }
        cands.sort_by(|a, b| {
            b.0.cmp(&a.0)
                .then(a.1.total_cmp(&b.1))
                .then(a.3.cmp(&b.3))
                .then(a.2.cmp(&b.2))
        });
        let mut layer = max_matching(&cands, g.n_qubits());
        let remaining = n - order.len();
        if layer.len() > remaining {
            layer.sort_by(|a, b| {
                let wa = weight.weight(cal, a.0, a.1);
                let wb = weight.weight(cal, b.0, b.1);
                wa.total_cmp(&wb).then(a.1.cmp(&b.1))
            });
            layer.truncate(remaining);
        }
        layer.sort_by_key(|&(c, t)| (t, c));
        for &(c, t) in &layer {
            included[t.0] = true;
            order.push(t);
            total_cost += weight.weight(cal, c, t);
        }
        layers.push(layer);
    }
    Ok(GhzEmbedding { source, depth: layers.len(), layers, included: order, total_cost })
}

/// Greedy matching in candidate order, then augmenting paths from unmatched
/// targets. Augmentation only reassigns controls, so every greedily chosen
/// target stays matched.
fn max_matching(cands: &[(usize, f64, QubitId, QubitId)], n: usize) -> Vec<(QubitId, QubitId)> {
    // controls adjacent to each target, in candidate order
    let mut targets: Vec<QubitId> = Vec::new();
    let mut adj: Vec<Vec<QubitId>> = vec![Vec::new(); n];
    for &(_, _, c, t) in cands {
        if adj[t.0].is_empty() {
            targets.push(t);
        }
        adj[t.0].push(c);
    }
    let mut owner: Vec<Option<QubitId>> = vec![None; n]; // control -> target
    let mut matched: Vec<Option<QubitId>> = vec![None; n]; // target -> control
    for &(_, _, c, t) in cands {
        if owner[c.0].is_none() && matched[t.0].is_none() {
            owner[c.0] = Some(t);
            matched[t.0] = Some(c);
        }
    }
    fn augment(
        t: QubitId,
        adj: &[Vec<QubitId>],
        owner: &mut [Option<QubitId>],
        matched: &mut [Option<QubitId>],
        seen: &mut [bool],
    ) -> bool {
        for &c in &adj[t.0] {
            if seen[c.0] {
                continue;
            }
            seen[c.0] = true;
            let free = match owner[c.0] {
                None => true,
                Some(t2) => augment(t2, adj, owner, matched, seen),
            };
            if free {
                owner[c.0] = Some(t);
                matched[t.0] = Some(c);
                return true;
            }
        }
        false
    }
    for &t in &targets {
        if matched[t.0].is_none() {
            let mut seen = vec![false; n];
            augment(t, &adj, &mut owner, &mut matched, &mut seen);
        }
    }
    targets.iter().filter_map(|&t| matched[t.0].map(|c| (c, t))).collect()
}

/// Runs [`embed_ghz`] from every candidate source and keeps the shallowest
/// embedding, then the cheapest, then the lowest source index.
pub fn embed_ghz_best(
    g: &DeviceGraph,
    cal: &Calibration,
    n: usize,
    candidates: &[QubitId],
    weight: EdgeWeight,
) -> Result<GhzEmbedding, EmbedError> {
    if n == 0 {
        return Err(EmbedError::EmptyRequest);
    }
    candidates
        .par_iter()
        .filter(|&&s| g.is_active(s))
        .filter_map(|&s| embed_ghz(g, cal, s, n, weight).ok())
        .min_by(|a, b| {
            a.depth
                .cmp(&b.depth)
                .then(a.total_cost.total_cmp(&b.total_cost))
                .then(a.source.cmp(&b.source))
        })
        .ok_or(EmbedError::NoCandidate(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{line, presets};

    fn q(i: usize) -> QubitId {
        QubitId(i)
    }

    #[test]
    fn single_qubit_has_no_layers() {
        let g = line(3).unwrap();
        let cal = Calibration::uniform(&g);
        let e = embed_ghz(&g, &cal, q(1), 1, EdgeWeight::CxError).unwrap();
        assert_eq!(e.depth, 0);
        assert!(e.layers.is_empty());
        assert_eq!(e.included, vec![q(1)]);
    }

    #[test]
    fn falcon_h_layout_needs_four_layers() {
        let g = presets::falcon_7();
        let cal = Calibration::uniform(&g);
        let all: Vec<QubitId> = g.active_qubits().collect();
        let e = embed_ghz_best(&g, &cal, 7, &all, EdgeWeight::CxError).unwrap();
        assert_eq!(e.depth, 4);
        e.validate(&g).unwrap();
    }

    #[test]
    fn path_picks_lowest_optimal_source() {
        let g = line(5).unwrap();
        let cal = Calibration::uniform(&g);
        let all: Vec<QubitId> = g.active_qubits().collect();
        let e = embed_ghz_best(&g, &cal, 5, &all, EdgeWeight::CxError).unwrap();
        assert_eq!((e.depth, e.source), (3, q(1)));
        assert_eq!(embed_ghz(&g, &cal, q(0), 5, EdgeWeight::Unit).unwrap().depth, 4);
    }

    #[test]
    fn lower_error_edge_wins_ties() {
        let g = line(3).unwrap();
        let mut cal = Calibration::uniform(&g);
        cal.edges.values_mut().for_each(|e| e.cx_error = 0.02);
        cal.edges.get_mut(&crate::topology::Edge::new(1, 2).unwrap()).unwrap().cx_error = 0.005;
        let e = embed_ghz(&g, &cal, q(1), 2, EdgeWeight::CxError).unwrap();
        assert_eq!(e.layers, vec![vec![(q(1), q(2))]]);
    }

    #[test]
    fn unreachable_size_is_an_error() {
        let g = crate::topology::DeviceGraph::new(4, [(0, 1), (2, 3)], []).unwrap();
        let cal = Calibration::uniform(&g);
        assert!(matches!(
            embed_ghz(&g, &cal, q(0), 3, EdgeWeight::Unit),
            Err(EmbedError::Unreachable { available: 2, .. })
        ));
        assert_eq!(
            embed_ghz_best(&g, &cal, 3, &[q(0), q(2)], EdgeWeight::Unit),
            Err(EmbedError::NoCandidate(3))
        );
    }
}
