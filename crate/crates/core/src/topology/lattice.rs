//! Lattice generators.

use std::collections::BTreeMap;

use super::{DeviceGraph, TopologyError};

/// Coordinates of a heavy-hex vertex before numbering.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Site {
    /// Position `pos` on long row `row`.
    Row { row: usize, pos: usize },
    /// Bridge between long rows `gap` and `gap + 1` at column `pos`.
    Bridge { gap: usize, pos: usize },
}

struct Brickwall {
    sites: Vec<Site>,
    edges: Vec<(Site, Site)>,
}

fn row_width(rows: usize, cols: usize) -> usize {
    if rows == 1 {
        4 * cols + 1
    } else {
        4 * cols + 3
    }
}

fn bridge_positions(gap: usize, cols: usize) -> impl Iterator<Item = usize> {
    let offset = if gap % 2 == 0 { 0 } else { 2 };
    (0..=cols).map(move |k| offset + 4 * k)
}

fn brickwall(rows: usize, cols: usize) -> Brickwall {
    let width = row_width(rows, cols);
    let mut sites = Vec::new();
    let mut edges = Vec::new();
    for row in 0..=rows {
        for pos in 0..width {
            sites.push(Site::Row { row, pos });
            if pos > 0 {
                edges.push((Site::Row { row, pos: pos - 1 }, Site::Row { row, pos }));
            }
        }
        if row == rows {
            break;
        }
        for pos in bridge_positions(row, cols) {
            let b = Site::Bridge { gap: row, pos };
            sites.push(b);
            edges.push((Site::Row { row, pos }, b));
            edges.push((b, Site::Row { row: row + 1, pos }));
        }
    }
    Brickwall { sites, edges }
}

fn number(wall: Brickwall, drop: &[Site]) -> DeviceGraph {
    let kept: BTreeMap<Site, usize> = wall
        .sites
        .into_iter()
        .filter(|s| !drop.contains(s))
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    let index = |s: &Site| kept.get(s).copied();
    let edges: Vec<(usize, usize)> = wall
        .edges
        .iter()
        .filter_map(|(a, b)| Some((index(a)?, index(b)?)))
        .collect();
    DeviceGraph::new(kept.len(), edges, []).expect("generated lattice is valid")
}

/// Heavy-hex lattice of `rows` x `cols` hexagonal cells.
///
/// Long rows of qubits are joined by bridge qubits every fourth position, with
/// the bridge columns alternating between offsets 0 and 2 from one gap to the
/// next. Qubits are numbered row-major: a long row, then the bridges below it.
///
/// `heavy_hex(1, 1)` is a single subdivided hexagon: a 12-cycle.
pub fn heavy_hex(rows: usize, cols: usize) -> Result<DeviceGraph, TopologyError> {
    if rows == 0 || cols == 0 {
        return Err(TopologyError::InvalidDimensions { rows, cols });
    }
    Ok(number(brickwall(rows, cols), &[]))
}

/// [`heavy_hex`] with the two dangling corner qubits removed, as on IBM
/// devices with an even number of cell rows (65, 127 and 433 qubits for
/// `(4, 2)`, `(6, 3)` and `(12, 6)`).
pub fn heavy_hex_trimmed(rows: usize, cols: usize) -> Result<DeviceGraph, TopologyError> {
    if rows < 2 || rows % 2 != 0 || cols == 0 {
        return Err(TopologyError::InvalidDimensions { rows, cols });
    }
    let width = row_width(rows, cols);
    let drop = [Site::Row { row: 0, pos: width - 1 }, Site::Row { row: rows, pos: 0 }];
    Ok(number(brickwall(rows, cols), &drop))
}

/// Path graph `0 - 1 - ... - (n-1)`.
pub fn line(n: usize) -> Result<DeviceGraph, TopologyError> {
    if n == 0 {
        return Err(TopologyError::InvalidDimensions { rows: 0, cols: 0 });
    }
    DeviceGraph::new(n, (1..n).map(|i| (i - 1, i)), [])
}
