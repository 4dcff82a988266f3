use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use super::{EdgeSet, SolveError, SolveErrorKind};
use crate::env::NodeId;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Distance from every node that can reach `t`, computed on reversed edges.
fn distances_to(edges: &EdgeSet, t: NodeId) -> BTreeMap<NodeId, f64> {
    let mut incoming: BTreeMap<NodeId, Vec<(NodeId, f64)>> = BTreeMap::new();
    for (&(u, v), &len) in edges {
        incoming.entry(v).or_default().push((u, len));
    }
    let mut dist = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((Dist(0.0), t)));
    while let Some(Reverse((Dist(d), v))) = heap.pop() {
        if dist.contains_key(&v) {
            continue;
        }
        dist.insert(v, d);
        for &(u, len) in incoming.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
            if !dist.contains_key(&u) {
                heap.push(Reverse((Dist(len + d), u)));
            }
        }
    }
    dist
}

fn out_edges(edges: &EdgeSet, u: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
    edges.range((u, NodeId(0))..=(u, NodeId(u32::MAX))).map(|(&(_, v), &len)| (v, len))
}

/// `true` when `u -> v` lies on some shortest path to the target.
fn on_shortest(dist: &BTreeMap<NodeId, f64>, u: NodeId, v: NodeId, len: f64) -> bool {
    match (dist.get(&u), dist.get(&v)) {
        (Some(&du), Some(&dv)) => len + dv == du,
        _ => false,
    }
}

pub(crate) fn path_cost(edges: &EdgeSet, path: &[NodeId]) -> Option<f64> {
    path.windows(2).try_fold(0.0, |acc, w| edges.get(&(w[0], w[1])).map(|len| acc + len))
}

fn unreachable(s: NodeId, t: NodeId) -> SolveError {
    SolveError::new(SolveErrorKind::Infeasible, format!("node {t} is unreachable from node {s}"))
}

/// Cost-minimal path from `s` to `t`.
///
/// Among equal-cost paths the lexicographically smallest node sequence is
/// returned. The cost is the sum of the traversed lengths taken in path
/// order.
pub fn shortest_path(edges: &EdgeSet, s: NodeId, t: NodeId) -> Result<(f64, Vec<NodeId>), SolveError> {
    if s == t {
        return Ok((0.0, vec![s]));
    }
    let dist = distances_to(edges, t);
    if !dist.contains_key(&s) {
        return Err(unreachable(s, t));
    }
    let mut path = vec![s];
    let mut u = s;
    while u != t {
        // Neighbours come out in ascending order, so the first one on a
        // shortest path gives the lexicographically smallest sequence.
        let (v, _) = out_edges(edges, u)
            .find(|&(v, len)| on_shortest(&dist, u, v, len))
            .expect("a node with a finite distance has a successor on a shortest path");
        path.push(v);
        u = v;
    }
    let cost = path_cost(edges, &path).expect("path follows existing edges");
    Ok((cost, path))
}

/// All shortest `s -> t` paths in lexicographic order, at most `limit` of
/// them. The flag is `true` when the enumeration was cut off.
pub fn shortest_paths_lex(
    edges: &EdgeSet,
    s: NodeId,
    t: NodeId,
    limit: usize,
) -> Result<(Vec<Vec<NodeId>>, bool), SolveError> {
    if s == t {
        return Ok((vec![vec![s]], false));
    }
    let dist = distances_to(edges, t);
    if !dist.contains_key(&s) {
        return Err(unreachable(s, t));
    }
    let mut out = Vec::new();
    let mut stack = vec![s];
    let truncated = enumerate(edges, &dist, t, &mut stack, &mut out, limit);
    Ok((out, truncated))
}

fn enumerate(
    edges: &EdgeSet,
    dist: &BTreeMap<NodeId, f64>,
    t: NodeId,
    stack: &mut Vec<NodeId>,
    out: &mut Vec<Vec<NodeId>>,
    limit: usize,
) -> bool {
    let u = *stack.last().expect("non-empty");
    if u == t {
        if out.len() == limit {
            return true;
        }
        out.push(stack.clone());
        return false;
    }
    for (v, len) in out_edges(edges, u) {
        if on_shortest(dist, u, v, len) {
            stack.push(v);
            let cut = enumerate(edges, dist, t, stack, out, limit);
            stack.pop();
            if cut {
                return true;
            }
        }
    }
    false
}
