use std::collections::{BTreeSet, HashMap, VecDeque};

use entbench::embed::*;
use entbench::topology::*;
use proptest::prelude::*;

/// Fewest layers to grow a GHZ state of `n` qubits from `source`, by
/// breadth-first search over included sets. Each layer adds any set of free
/// qubits that can be matched to distinct included neighbours.
fn brute_force_depth(g: &DeviceGraph, source: usize, n: usize) -> Option<usize> {
    let nq = g.n_qubits();
    let adj: Vec<u32> = (0..nq)
        .map(|q| g.neighbors(QubitId(q)).unwrap().iter().fold(0u32, |m, v| m | 1 << v.0))
        .collect();
    let start = 1u32 << source;
    let mut dist: HashMap<u32, usize> = HashMap::from([(start, 0)]);
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        if s.count_ones() as usize >= n {
            return Some(d);
        }
        let frontier: Vec<usize> = (0..nq).filter(|&v| s & 1 << v == 0 && adj[v] & s != 0).collect();
        for mask in 1u32..(1 << frontier.len()) {
            let targets: Vec<usize> = (0..frontier.len()).filter(|i| mask & 1 << i != 0).map(|i| frontier[i]).collect();
            if !matchable(&targets, &adj, s, nq) {
                continue;
            }
            let next = targets.iter().fold(s, |m, &t| m | 1 << t);
            if !dist.contains_key(&next) {
                dist.insert(next, d + 1);
                queue.push_back(next);
            }
        }
    }
    None
}

fn matchable(targets: &[usize], adj: &[u32], included: u32, nq: usize) -> bool {
    fn go(i: usize, targets: &[usize], adj: &[u32], avail: u32, nq: usize) -> bool {
        if i == targets.len() {
            return true;
        }
        let choices = adj[targets[i]] & avail;
        (0..nq).any(|c| choices & 1 << c != 0 && go(i + 1, targets, adj, avail & !(1 << c), nq))
    }
    go(0, targets, adj, included, nq)
}

fn connected_graph(n: usize, extra: &[(usize, usize)], parents: &[usize]) -> DeviceGraph {
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for v in 1..n {
        edges.insert((parents[v - 1] % v, v));
    }
    for &(a, b) in extra {
        let (a, b) = (a % n, b % n);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    DeviceGraph::new(n, edges, []).unwrap()
}

fn arb_graph() -> impl Strategy<Value = DeviceGraph> {
    (3usize..=8)
        .prop_flat_map(|n| {
            (Just(n), proptest::collection::vec(0usize..64, n - 1), proptest::collection::vec((0usize..8, 0usize..8), 0..4))
        })
        .prop_map(|(n, parents, extra)| connected_graph(n, &extra, &parents))
}

fn bounded_degree(g: &DeviceGraph) -> bool {
    g.max_degree() <= 3
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn embedding_is_valid_and_sized(g in arb_graph(), src in 0usize..8, n in 1usize..=8) {
        let src = QubitId(src % g.n_qubits());
        let n = n.min(g.n_qubits());
        let cal = Calibration::uniform(&g);
        let e = embed_ghz(&g, &cal, src, n, EdgeWeight::CxError).unwrap();
        prop_assert_eq!(e.size(), n);
        prop_assert_eq!(e.depth, e.layers.len());
        prop_assert!(e.validate(&g).is_ok());
    }

    #[test]
    fn best_depth_is_never_below_exhaustive_search(g in arb_graph().prop_filter("degree", bounded_degree), n in 2usize..=8) {
        let n = n.min(g.n_qubits());
        let cal = Calibration::uniform(&g);
        let all: Vec<QubitId> = g.active_qubits().collect();
        let best = embed_ghz_best(&g, &cal, n, &all, EdgeWeight::CxError).unwrap();
        let oracle = (0..g.n_qubits()).filter_map(|s| brute_force_depth(&g, s, n)).min().unwrap();
        prop_assert!(best.depth >= oracle);
        prop_assert!(best.depth <= oracle + 1, "depth {} vs optimum {}", best.depth, oracle);
    }

    #[test]
    fn schedule_layers_are_matchings_covering_edges(g in arb_graph()) {
        let s = schedule_graph_state(&g);
        let mut seen = BTreeSet::new();
        for layer in &s.layers {
            let mut touched = BTreeSet::new();
            for e in layer {
                prop_assert!(touched.insert(e.lo()) && touched.insert(e.hi()));
                prop_assert!(seen.insert(*e));
            }
        }
        prop_assert_eq!(seen.len(), g.edge_count());
        prop_assert!(s.depth() >= g.max_degree());
    }

    #[test]
    fn batches_are_disjoint_and_cover(g in arb_graph()) {
        let plan = plan_qst_batches(&g);
        prop_assert_eq!(plan.sets().count(), g.edge_count());
        for batch in &plan.batches {
            for (i, a) in batch.iter().enumerate() {
                for b in &batch[i + 1..] {
                    prop_assert!(a.overlaps(b).is_none());
                }
            }
        }
        prop_assert_eq!(circuits_per_plan(&plan), 9 * plan.n_batches());
    }
}

#[test]
fn paths_and_cycles_match_exhaustive_search() {
    for len in 2..=8 {
        let path = line(len).unwrap();
        let cycle = DeviceGraph::new(len, (0..len).map(|i| (i, (i + 1) % len)).filter(|&(a, b)| a != b), []);
        for g in std::iter::once(path).chain(cycle.ok().filter(|_| len >= 3)) {
            let cal = Calibration::uniform(&g);
            let all: Vec<QubitId> = g.active_qubits().collect();
            for n in 2..=len {
                let best = embed_ghz_best(&g, &cal, n, &all, EdgeWeight::CxError).unwrap();
                let oracle = (0..len).filter_map(|s| brute_force_depth(&g, s, n)).min().unwrap();
                assert_eq!(best.depth, oracle, "len {len} n {n}");
            }
        }
    }
}

#[test]
fn path_of_five_exhaustive() {
    let g = line(5).unwrap();
    assert_eq!(brute_force_depth(&g, 2, 5), Some(3));
    assert_eq!(brute_force_depth(&g, 1, 5), Some(3));
    assert_eq!(brute_force_depth(&g, 0, 5), Some(4));
}

#[test]
fn falcon_h_exhaustive_depth_is_four() {
    let g = presets::falcon_7();
    let oracle = (0..7).filter_map(|s| brute_force_depth(&g, s, 7)).min();
    assert_eq!(oracle, Some(4));
}

fn central_source(g: &DeviceGraph) -> QubitId {
    // the active qubit minimising eccentricity, lowest index first
    g.active_qubits()
        .min_by_key(|&q| g.distances_from(q).unwrap().into_iter().flatten().max().unwrap())
        .unwrap()
}

#[test]
fn interior_source_follows_depth_law() {
    let g = heavy_hex(12, 8).unwrap();
    let cal = Calibration::uniform(&g);
    let src = central_source(&g);
    for d in 1..=8 {
        let n = d * (d + 1) / 2 + 1;
        let e = embed_ghz(&g, &cal, src, n, EdgeWeight::CxError).unwrap();
        assert_eq!(e.depth, d, "size {n}");
    }
}

#[test]
fn eagle_thirty_two_qubits() {
    let g = presets::eagle_127();
    let cal = Calibration::uniform(&g);
    let all: Vec<QubitId> = g.active_qubits().collect();
    let best = embed_ghz_best(&g, &cal, 32, &all, EdgeWeight::CxError).unwrap();
    best.validate(&g).unwrap();
    assert!(best.depth <= 8);
    assert_eq!(best.depth, 7);

    // sources on the outer rows do worse
    let rim: Vec<QubitId> = g.active_qubits().filter(|q| q.0 < 14 || q.0 >= 113).collect();
    let edge = embed_ghz_best(&g, &cal, 32, &rim, EdgeWeight::CxError).unwrap();
    assert!(edge.depth > best.depth);
}
