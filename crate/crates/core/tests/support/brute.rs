//! Exhaustive search over directed-edge-simple walks, independent of the
//! solver's Dijkstra-based code.

use std::collections::{BTreeMap, BTreeSet};

use portagent_core::solver::{EdgeSet, PathRequirement};
use portagent_core::NodeId;

fn contains_run(path: &[NodeId], run: &[NodeId]) -> bool {
    path.windows(run.len()).any(|w| w == run)
}

fn satisfies(path: &[NodeId], req: Option<&PathRequirement>) -> bool {
    match req {
        None => true,
        Some(PathRequirement::Subpath(run)) => contains_run(path, run),
        Some(PathRequirement::Exact(nodes)) => path == nodes.as_slice(),
    }
}

struct Search<'a> {
    out: BTreeMap<NodeId, Vec<(NodeId, f64)>>,
    t: NodeId,
    req: Option<&'a PathRequirement>,
    used: BTreeSet<(NodeId, NodeId)>,
    path: Vec<NodeId>,
    best: Option<(f64, Vec<NodeId>)>,
    /// All-pairs distances, used only to prune branches that cannot beat
    /// the best walk found so far.
    all: BTreeMap<(NodeId, NodeId), f64>,
    cap: f64,
}

impl Search<'_> {
    fn dist(&self, a: NodeId, b: NodeId) -> f64 {
        self.all.get(&(a, b)).copied().unwrap_or(f64::INFINITY)
    }

    /// Admissible estimate of the cost still needed from `u`.
    fn lower_bound(&self, u: NodeId) -> f64 {
        let Some(PathRequirement::Subpath(run)) = self.req else {
            return self.dist(u, self.t);
        };
        if contains_run(&self.path, run) {
            return self.dist(u, self.t);
        }
        let last = *run.last().unwrap();
        // Cost of the run from position j to its end.
        let rest = |j: usize| -> f64 { run[j..].windows(2).map(|w| self.edge(w[0], w[1])).sum() };
        let mut best = self.dist(u, run[0]) + rest(0) + self.dist(last, self.t);
        for j in 1..run.len() {
            if self.path.ends_with(&run[..j]) {
                best = best.min(rest(j - 1) + self.dist(last, self.t));
            }
        }
        best
    }

    fn edge(&self, a: NodeId, b: NodeId) -> f64 {
        self.out.get(&a).and_then(|succ| succ.iter().find(|(v, _)| *v == b)).map_or(f64::INFINITY, |&(_, len)| len)
    }

    fn visit(&mut self, cost: f64) {
        let u = *self.path.last().unwrap();
        let h = self.lower_bound(u);
        if h.is_infinite() || cost + h > self.cap {
            return;
        }
        if self.best.as_ref().is_some_and(|(b, _)| cost + h > *b) {
            return;
        }
        if let Some(PathRequirement::Exact(nodes)) = self.req {
            if !nodes.starts_with(&self.path) {
                return;
            }
        }
        if u == self.t && satisfies(&self.path, self.req) {
            let better = match &self.best {
                None => true,
                Some((b, p)) => cost < *b || (cost == *b && self.path < *p),
            };
            if better {
                self.best = Some((cost, self.path.clone()));
            }
        }
        let next = self.out.get(&u).cloned().unwrap_or_default();
        for (v, len) in next {
            if self.used.insert((u, v)) {
                self.path.push(v);
                self.visit(cost + len);
                self.path.pop();
                self.used.remove(&(u, v));
            }
        }
    }
}

/// Cheapest walk from `s` to `t` that never repeats a directed edge and
/// meets `req`; ties go to the lexicographically smallest node sequence.
/// The cost is summed front to back along the walk.
pub fn brute_force(edges: &EdgeSet, s: NodeId, t: NodeId, req: Option<&PathRequirement>) -> Option<(f64, Vec<NodeId>)> {
    brute_force_capped(edges, s, t, req, f64::INFINITY)
}

/// As [`brute_force`], restricted to walks costing at most `cap`.
pub fn brute_force_capped(
    edges: &EdgeSet,
    s: NodeId,
    t: NodeId,
    req: Option<&PathRequirement>,
    cap: f64,
) -> Option<(f64, Vec<NodeId>)> {
    let mut out: BTreeMap<NodeId, Vec<(NodeId, f64)>> = BTreeMap::new();
    for (&(u, v), &len) in edges {
        out.entry(u).or_default().push((v, len));
    }
    let mut all = floyd_warshall(edges);
    all.insert((s, s), 0.0);
    all.insert((t, t), 0.0);
    let mut search = Search { out, t, req, used: BTreeSet::new(), path: vec![s], best: None, all, cap };
    search.visit(0.0);
    search.best
}

/// All-pairs distances; absent pairs are unreachable.
pub fn floyd_warshall(edges: &EdgeSet) -> BTreeMap<(NodeId, NodeId), f64> {
    let nodes: BTreeSet<NodeId> = edges.keys().flat_map(|&(u, v)| [u, v]).collect();
    let mut d: BTreeMap<(NodeId, NodeId), f64> = edges.clone();
    for &n in &nodes {
        d.insert((n, n), 0.0);
    }
    for &k in &nodes {
        for &i in &nodes {
            let Some(&ik) = d.get(&(i, k)) else { continue };
            for &j in &nodes {
                let Some(&kj) = d.get(&(k, j)) else { continue };
                let e = d.entry((i, j)).or_insert(f64::INFINITY);
                if ik + kj < *e {
                    *e = ik + kj;
                }
            }
        }
    }
    d
}

/// Flow balance of a walk in edge-indicator form: out minus in degree is
/// +1 at `s`, -1 at `t` and 0 elsewhere (all 0 when `s == t`).
pub fn flow_balanced(path: &[NodeId], s: NodeId, t: NodeId) -> bool {
    let mut net: BTreeMap<NodeId, i64> = BTreeMap::new();
    for w in path.windows(2) {
        *net.entry(w[0]).or_default() += 1;
        *net.entry(w[1]).or_default() -= 1;
    }
    net.iter().all(|(&n, &d)| {
        let want = i64::from(n == s) - i64::from(n == t);
        d == want
    }) && (s == t || (net.get(&s) == Some(&1) && net.get(&t) == Some(&-1)))
}
