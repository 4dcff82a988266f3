use alloc::vec::Vec;

use super::{Edge, Network, Node, NodeId};

const ROWS: u32 = 4;
const COLS: u32 = 5;
const GRID_LENGTH: f64 = 10.0;
const DIAGONAL_LENGTH: f64 = 14.0;

/// The canonical 20-node test network.
///
/// A 4x5 grid numbered row-major (row width 5) with bidirectional grid
/// edges of length 10, plus the bidirectional diagonal 6<->10 of length 14.
pub fn default_network() -> Network {
    let nodes = (0..ROWS * COLS).map(|id| Node { id: NodeId(id), kind: None }).collect();
    let mut edges = Vec::new();
    let mut both = |a: u32, b: u32, length: f64| {
        edges.push(Edge { source: NodeId(a), target: NodeId(b), length });
        edges.push(Edge { source: NodeId(b), target: NodeId(a), length });
    };
    for r in 0..ROWS {
        for c in 0..COLS {
            let id = r * COLS + c;
            if c + 1 < COLS {
                both(id, id + 1, GRID_LENGTH);
            }
            if r + 1 < ROWS {
                both(id, id + COLS, GRID_LENGTH);
            }
        }
    }
    both(6, 10, DIAGONAL_LENGTH);
    Network::new(nodes, edges).expect("default network is well-formed")
}
