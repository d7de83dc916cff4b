//! Coupling maps of specific devices.

use super::{heavy_hex_trimmed, line, DeviceGraph};

const FALCON_27_EDGES: [(usize, usize); 28] = [
    (0, 1),
    (1, 2),
    (1, 4),
    (2, 3),
    (3, 5),
    (4, 7),
    (5, 8),
    (6, 7),
    (7, 10),
    (8, 9),
    (8, 11),
    (10, 12),
    (11, 14),
    (12, 13),
    (12, 15),
    (13, 14),
    (14, 16),
    (15, 18),
    (16, 19),
    (17, 18),
    (18, 21),
    (19, 20),
    (19, 22),
    (21, 23),
    (22, 25),
    (23, 24),
    (24, 25),
    (25, 26),
];

/// 7-qubit Falcon "H" layout.
pub fn falcon_7() -> DeviceGraph {
    DeviceGraph::new(7, [(0, 1), (1, 2), (1, 3), (3, 5), (4, 5), (5, 6)], [])
        .expect("static layout")
}

/// 16-qubit Falcon: a single heavy-hex ring with four tails.
pub fn falcon_16() -> DeviceGraph {
    DeviceGraph::new(16, FALCON_27_EDGES[..16].iter().copied(), []).expect("static layout")
}

/// 27-qubit Falcon.
pub fn falcon_27() -> DeviceGraph {
    DeviceGraph::new(27, FALCON_27_EDGES, []).expect("static layout")
}

/// 65-qubit Hummingbird.
pub fn hummingbird_65() -> DeviceGraph {
    heavy_hex_trimmed(4, 2).expect("static layout")
}

/// 127-qubit Eagle.
pub fn eagle_127() -> DeviceGraph {
    heavy_hex_trimmed(6, 3).expect("static layout")
}

/// 433-qubit Osprey.
pub fn osprey_433() -> DeviceGraph {
    heavy_hex_trimmed(12, 6).expect("static layout")
}

/// 5-qubit line (Manila, Belem-like linear chip).
pub fn line_5() -> DeviceGraph {
    line(5).expect("static layout")
}

/// Looks a preset up by name.
pub fn by_name(name: &str) -> Option<DeviceGraph> {
    Some(match name {
        "falcon-7" | "falcon7" => falcon_7(),
        "falcon-16" | "falcon16" => falcon_16(),
        "falcon-27" | "falcon27" => falcon_27(),
        "hummingbird-65" | "hummingbird65" => hummingbird_65(),
        "eagle-127" | "eagle127" => eagle_127(),
        "osprey-433" | "osprey433" => osprey_433(),
        "line-5" | "line5" => line_5(),
        _ => return None,
    })
}

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 7] =
    ["falcon-7", "falcon-16", "falcon-27", "hummingbird-65", "eagle-127", "osprey-433", "line-5"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::QubitId;

    fn has(g: &DeviceGraph, a: usize, b: usize) -> bool {
        g.has_edge(QubitId(a), QubitId(b))
    }

    #[test]
    fn eagle_matches_vendor_numbering() {
        let g = eagle_127();
        assert_eq!(g.n_qubits(), 127);
        assert_eq!(g.edge_count(), 144);
        // first row, its bridges and the second row
        assert!(has(&g, 12, 13) && !has(&g, 13, 14));
        for (top, bridge, bottom) in [(0, 14, 18), (4, 15, 22), (8, 16, 26), (12, 17, 30)] {
            assert!(has(&g, top, bridge) && has(&g, bridge, bottom));
        }
        assert!(has(&g, 20, 33) && has(&g, 33, 39));
        // last gap and the trimmed bottom row
        assert!(has(&g, 96, 109) && has(&g, 109, 114));
        assert!(has(&g, 108, 112) && has(&g, 112, 126));
        assert_eq!(g.degree(QubitId(113)).unwrap(), 1);
        assert_eq!(g.max_degree(), 3);
        assert_eq!(g.connected_components().len(), 1);
    }

    #[test]
    fn falcon_layouts() {
        let g = falcon_27();
        assert_eq!(g.edge_count(), 28);
        assert_eq!(g.connected_components().len(), 1);
        assert!(g.two_coloring().is_some());
        let h = falcon_7();
        assert_eq!(h.degree(QubitId(1)).unwrap(), 3);
        assert_eq!(h.degree(QubitId(5)).unwrap(), 3);
        assert_eq!(falcon_16().connected_components().len(), 1);
    }

    #[test]
    fn every_name_resolves() {
        for name in NAMES {
            assert!(by_name(name).is_some(), "{name}");
        }
        assert!(by_name("nonsense").is_none());
    }
}
