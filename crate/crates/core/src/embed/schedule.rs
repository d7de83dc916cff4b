use serde::{Deserialize, Serialize};

use crate::topology::{DeviceGraph, Edge, QubitId};

/// CZ layers preparing the graph state of a device.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphStateSchedule {
    /// Vertices of the graph state (each gets an initial H).
    pub qubits: Vec<QubitId>,
    pub layers: Vec<Vec<Edge>>,
}

impl GraphStateSchedule {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.layers.iter().flatten().copied()
    }

    /// The schedule restricted to `keep`: vertices outside are dropped along
    /// with every edge touching them. Layer positions are preserved.
    pub fn restrict(&self, keep: &[QubitId]) -> GraphStateSchedule {
        let inside = |q: &QubitId| keep.binary_search(q).is_ok();
        debug_assert!(keep.windows(2).all(|w| w[0] < w[1]));
        GraphStateSchedule {
            qubits: self.qubits.iter().copied().filter(inside).collect(),
            layers: self
                .layers
                .iter()
                .map(|l| l.iter().copied().filter(|e| inside(&e.lo()) && inside(&e.hi())).collect())
                .collect(),
        }
    }

    /// Drops one edge (fault injection).
    pub fn without_edge(&self, edge: Edge) -> GraphStateSchedule {
        GraphStateSchedule {
            qubits: self.qubits.clone(),
            layers: self
                .layers
                .iter()
                .map(|l| l.iter().copied().filter(|&e| e != edge).collect())
                .collect(),
        }
    }

    pub fn to_dot(&self, n_qubits: usize) -> String {
        super::schedule_to_dot(n_qubits, &self.layers)
    }
}

/// Splits the active edges into matchings by repeatedly peeling off a greedy
/// maximal matching.
///
/// Edges touching the vertices of highest remaining degree go first, so each
/// round lowers the maximum degree by one where possible. Should peeling need
/// more layers than the maximum degree on a bipartite graph, the layers come
/// from an alternating-path edge colouring instead, which always uses exactly
/// the maximum degree.
pub fn schedule_graph_state(g: &DeviceGraph) -> GraphStateSchedule {
    let qubits: Vec<QubitId> = g.active_qubits().collect();
    let mut layers = peel(g);
    if layers.len() > g.max_degree() && g.two_coloring().is_some() {
        log::debug!("greedy peeling used {} layers; using bipartite colouring", layers.len());
        layers = bipartite_coloring(g);
    }
    GraphStateSchedule { qubits, layers }
}

fn peel(g: &DeviceGraph) -> Vec<Vec<Edge>> {
    let mut remaining: Vec<Edge> = g.edges().collect();
    let mut degree = vec![0usize; g.n_qubits()];
    for e in &remaining {
        degree[e.lo().0] += 1;
        degree[e.hi().0] += 1;
    }
    let mut layers = Vec::new();
    while !remaining.is_empty() {
        remaining.sort_by_key(|e| {
            let (a, b) = (degree[e.lo().0], degree[e.hi().0]);
            (std::cmp::Reverse(a.max(b)), std::cmp::Reverse(a.min(b)), *e)
        });
        let mut used = vec![false; g.n_qubits()];
        let mut layer = Vec::new();
        let mut rest = Vec::new();
        for e in remaining {
            if used[e.lo().0] || used[e.hi().0] {
                rest.push(e);
            } else {
                used[e.lo().0] = true;
                used[e.hi().0] = true;
                layer.push(e);
            }
        }
        for e in &layer {
            degree[e.lo().0] -= 1;
            degree[e.hi().0] -= 1;
        }
        layer.sort_unstable();
        layers.push(layer);
        remaining = rest;
    }
    layers
}

/// Proper edge colouring with `max_degree` colours for bipartite graphs.
fn bipartite_coloring(g: &DeviceGraph) -> Vec<Vec<Edge>> {
    let k = g.max_degree();
    let n = g.n_qubits();
    // at[v][c] = neighbour joined to v by an edge of colour c
    let mut at: Vec<Vec<Option<usize>>> = vec![vec![None; k]; n];
    let free = |at: &Vec<Vec<Option<usize>>>, v: usize| (0..k).find(|&c| at[v][c].is_none()).unwrap();
    for e in g.edges() {
        let (u, v) = (e.lo().0, e.hi().0);
        let a = free(&at, u);
        let b = free(&at, v);
        if at[v][a].is_some() {
            // flip the a/b alternating path starting at v
            let mut path = vec![v];
            let mut colors = [a, b];
            let mut x = v;
            while let Some(y) = at[x][colors[0]] {
                path.push(y);
                x = y;
                colors.swap(0, 1);
            }
            let mut c = a;
            for w in path.windows(2) {
                at[w[0]][c] = None;
                at[w[1]][c] = None;
                c = if c == a { b } else { a };
            }
            let mut c = a;
            for w in path.windows(2) {
                let other = if c == a { b } else { a };
                at[w[0]][other] = Some(w[1]);
                at[w[1]][other] = Some(w[0]);
                c = other;
            }
        }
        at[u][a] = Some(v);
        at[v][a] = Some(u);
    }
    let mut layers = vec![Vec::new(); k];
    for (u, row) in at.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            if let Some(v) = *v {
                if u < v {
                    layers[c].push(Edge::new(u, v).unwrap());
                }
            }
        }
    }
    layers.retain(|l| !l.is_empty());
    layers
}
