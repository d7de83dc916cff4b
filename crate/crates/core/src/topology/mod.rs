//! Device coupling graphs and their calibration data.
//!
//! A [`DeviceGraph`] is the undirected coupling map of a device: which qubit
//! pairs support a native two-qubit gate. Qubits are indexed densely from zero
//! and never renumbered; qubits that are unusable are marked inactive rather
//! than removed, so that results line up with vendor device maps.

mod calibration;
mod lattice;
mod layout;
pub mod presets;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use calibration::{Calibration, EdgeCalibration, QubitCalibration};
pub use lattice::{heavy_hex, heavy_hex_trimmed, line};
pub use layout::{load_layout, save_layout, Layout, LayoutError};

/// Index of a physical qubit on a device.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitId(pub usize);

impl QubitId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for QubitId {
    fn from(i: usize) -> Self {
        QubitId(i)
    }
}

/// An unordered qubit pair, stored with the smaller index first.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "[usize; 2]", try_from = "[usize; 2]")]
pub struct Edge {
    lo: QubitId,
    hi: QubitId,
}

impl Edge {
    /// Builds the edge `{a, b}`. Returns `None` for a self-loop.
    pub fn new(a: impl Into<QubitId>, b: impl Into<QubitId>) -> Option<Self> {
        let (a, b) = (a.into(), b.into());
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Edge { lo: a, hi: b }),
            std::cmp::Ordering::Greater => Some(Edge { lo: b, hi: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn lo(self) -> QubitId {
        self.lo
    }

    pub fn hi(self) -> QubitId {
        self.hi
    }

    pub fn endpoints(self) -> [QubitId; 2] {
        [self.lo, self.hi]
    }

    pub fn contains(self, q: QubitId) -> bool {
        self.lo == q || self.hi == q
    }

    /// The endpoint that is not `q`, if `q` is an endpoint.
    pub fn other(self, q: QubitId) -> Option<QubitId> {
        if q == self.lo {
            Some(self.hi)
        } else if q == self.hi {
            Some(self.lo)
        } else {
            None
        }
    }

    /// Key used in layout files: `"a-b"` with `a < b`.
    pub fn key(self) -> String {
        format!("{}-{}", self.lo, self.hi)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

impl From<Edge> for [usize; 2] {
    fn from(e: Edge) -> Self {
        [e.lo.0, e.hi.0]
    }
}

impl TryFrom<[usize; 2]> for Edge {
    type Error = String;

    fn try_from([a, b]: [usize; 2]) -> Result<Self, Self::Error> {
        Edge::new(a, b).ok_or_else(|| format!("self-loop on qubit {a}"))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopologyError {
    #[error("unknown qubit {0}")]
    UnknownQubit(QubitId),
    #[error("self-loop on qubit {0}")]
    SelfLoop(QubitId),
    #[error("duplicate edge {0}")]
    DuplicateEdge(Edge),
    #[error("edge {edge} touches inactive qubit {qubit}")]
    EdgeTouchesInactive { edge: Edge, qubit: QubitId },
    #[error("invalid lattice dimensions {rows}x{cols}")]
    InvalidDimensions { rows: usize, cols: usize },
    #[error("calibration: {0}")]
    Calibration(String),
}

/// Coupling graph of a device.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeviceGraph {
    n_qubits: usize,
    edges: BTreeSet<Edge>,
    inactive: BTreeSet<QubitId>,
    adjacency: Vec<Vec<QubitId>>,
}

impl DeviceGraph {
    /// Builds a graph, rejecting self-loops, duplicates, out-of-range ids and
    /// edges that touch an inactive qubit.
    pub fn new<E, I>(n_qubits: usize, edges: E, inactive: I) -> Result<Self, TopologyError>
    where
        E: IntoIterator<Item = (usize, usize)>,
        I: IntoIterator<Item = usize>,
    {
        let inactive: BTreeSet<QubitId> = inactive.into_iter().map(QubitId).collect();
        if let Some(&q) = inactive.iter().find(|q| q.0 >= n_qubits) {
            return Err(TopologyError::UnknownQubit(q));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            for q in [a, b] {
                if q >= n_qubits {
                    return Err(TopologyError::UnknownQubit(QubitId(q)));
                }
            }
            let edge = Edge::new(a, b).ok_or(TopologyError::SelfLoop(QubitId(a)))?;
            for q in edge.endpoints() {
                if inactive.contains(&q) {
                    return Err(TopologyError::EdgeTouchesInactive { edge, qubit: q });
                }
            }
            if !set.insert(edge) {
                return Err(TopologyError::DuplicateEdge(edge));
            }
        }
        let mut adjacency = vec![Vec::new(); n_qubits];
        for e in &set {
            adjacency[e.lo.0].push(e.hi);
            adjacency[e.hi.0].push(e.lo);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(DeviceGraph { n_qubits, edges: set, inactive, adjacency })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: QubitId, b: QubitId) -> bool {
        Edge::new(a, b).is_some_and(|e| self.edges.contains(&e))
    }

    pub fn inactive(&self) -> &BTreeSet<QubitId> {
        &self.inactive
    }

    pub fn contains(&self, q: QubitId) -> bool {
        q.0 < self.n_qubits
    }

    pub fn is_active(&self, q: QubitId) -> bool {
        self.contains(q) && !self.inactive.contains(&q)
    }

    pub fn active_qubits(&self) -> impl Iterator<Item = QubitId> + '_ {
        (0..self.n_qubits).map(QubitId).filter(|q| !self.inactive.contains(q))
    }

    pub fn n_active(&self) -> usize {
        self.n_qubits - self.inactive.len()
    }

    fn check(&self, q: QubitId) -> Result<(), TopologyError> {
        if self.contains(q) {
            Ok(())
        } else {
            Err(TopologyError::UnknownQubit(q))
        }
    }

    pub fn degree(&self, q: QubitId) -> Result<usize, TopologyError> {
        self.check(q)?;
        Ok(self.adjacency[q.0].len())
    }

    /// Neighbours of `q`, sorted by index.
    pub fn neighbors(&self, q: QubitId) -> Result<&[QubitId], TopologyError> {
        self.check(q)?;
        Ok(&self.adjacency[q.0])
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Connected components over the active qubits. Each component is sorted
    /// and components are ordered by their smallest member.
    pub fn connected_components(&self) -> Vec<Vec<QubitId>> {
        let mut seen = vec![false; self.n_qubits];
        let mut out = Vec::new();
        for start in self.active_qubits() {
            if seen[start.0] {
                continue;
            }
            let mut comp = self.bfs(start, &mut seen);
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// The component containing `q` (sorted).
    pub fn component_of(&self, q: QubitId) -> Result<Vec<QubitId>, TopologyError> {
        self.check(q)?;
        let mut seen = vec![false; self.n_qubits];
        let mut comp = self.bfs(q, &mut seen);
        comp.sort_unstable();
        Ok(comp)
    }

    fn bfs(&self, start: QubitId, seen: &mut [bool]) -> Vec<QubitId> {
        let mut queue = VecDeque::from([start]);
        seen[start.0] = true;
        let mut comp = Vec::new();
        while let Some(u) = queue.pop_front() {
            comp.push(u);
            for &v in &self.adjacency[u.0] {
                if !seen[v.0] {
                    seen[v.0] = true;
                    queue.push_back(v);
                }
            }
        }
        comp
    }

    /// Hop distances from `source`; `None` for unreachable qubits.
    pub fn distances_from(&self, source: QubitId) -> Result<Vec<Option<usize>>, TopologyError> {
        self.check(source)?;
        let mut dist = vec![None; self.n_qubits];
        dist[source.0] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u.0].unwrap_or(0);
            for &v in &self.adjacency[u.0] {
                if dist[v.0].is_none() {
                    dist[v.0] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    /// A proper two-colouring of the active qubits (colour 0 or 1 per qubit,
    /// inactive qubits get 0), or `None` when the graph has an odd cycle.
    pub fn two_coloring(&self) -> Option<Vec<u8>> {
        let mut color: Vec<Option<u8>> = vec![None; self.n_qubits];
        for start in self.active_qubits() {
            if color[start.0].is_some() {
                continue;
            }
            color[start.0] = Some(0);
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                let cu = color[u.0]?;
                for &v in &self.adjacency[u.0] {
                    match color[v.0] {
                        None => {
                            color[v.0] = Some(1 - cu);
                            queue.push_back(v);
                        }
                        Some(cv) if cv == cu => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        Some(color.into_iter().map(|c| c.unwrap_or(0)).collect())
    }

    /// A copy of this graph with the given edges removed. Unknown edges are
    /// ignored.
    pub fn without_edges(&self, remove: &[Edge]) -> DeviceGraph {
        let edges = self
            .edges
            .iter()
            .filter(|e| !remove.contains(e))
            .map(|e| (e.lo.0, e.hi.0));
        DeviceGraph::new(self.n_qubits, edges, self.inactive.iter().map(|q| q.0))
            .expect("subset of a valid graph is valid")
    }

    /// Marks additional qubits inactive, dropping their edges.
    pub fn with_inactive(&self, extra: &[QubitId]) -> Result<DeviceGraph, TopologyError> {
        for &q in extra {
            self.check(q)?;
        }
        let inactive: BTreeSet<QubitId> = self.inactive.iter().chain(extra).copied().collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| !inactive.contains(&e.lo) && !inactive.contains(&e.hi))
            .map(|e| (e.lo.0, e.hi.0));
        DeviceGraph::new(self.n_qubits, edges, inactive.iter().map(|q| q.0))
    }
}
