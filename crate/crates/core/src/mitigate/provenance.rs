//! Transmitter estimation and provenance-path recovery.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Digraph;

#[derive(Debug, Error, PartialEq)]
pub enum ProvenanceError {
    #[error("observed recipient set is empty")]
    EmptyRecipients,
    #[error("source budget k must be >= 1")]
    ZeroBudget,
    #[error("node {0} out of range")]
    BadNode(usize),
    #[error("recipients unreachable from every transmitter: {0:?}")]
    Orphaned(Vec<usize>),
    #[error("no {k} sources can cover recipients {uncovered:?}")]
    Uncoverable { k: usize, uncovered: Vec<usize> },
}

/// Ranks users by `out-degree / (1 + mean hop distance to P)`, with
/// unreachable recipients counted at diameter + 1. Ties go to smaller ids.
pub fn estimate_transmitters(g: &Digraph, p: &[usize], m: usize) -> Vec<usize> {
    let n = g.len();
    let dists: Vec<Vec<Option<usize>>> = (0..n).map(|u| g.bfs(u)).collect();
    let diameter = dists.iter().flatten().flatten().copied().max().unwrap_or(0);
    let mut scored: Vec<(f64, usize)> = (0..n)
        .map(|u| {
            let mean = if p.is_empty() {
                0.0
            } else {
                p.iter().map(|&t| dists[u][t].unwrap_or(diameter + 1) as f64).sum::<f64>() / p.len() as f64
            };
            (g.out[u].len() as f64 / (1.0 + mean), u)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.into_iter().take(m).map(|(_, u)| u).collect()
}

/// Path metric used by the `dst` step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathMetric {
    Hops,
    /// `-ln p` edge lengths, i.e. most probable paths.
    Probability,
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

fn edge_len(p: f64, metric: PathMetric) -> f64 {
    match metric {
        PathMetric::Hops => 1.0,
        PathMetric::Probability => {
            if p > 0.0 {
                -p.ln()
            } else {
                f64::INFINITY
            }
        }
    }
}

/// Multi-source shortest-path tree restricted to `allowed` edges when
/// given. Returns distances and parents.
fn shortest_tree(
    g: &Digraph,
    srcs: &[usize],
    metric: PathMetric,
    allowed: Option<&BTreeSet<(usize, usize)>>,
) -> (Vec<f64>, Vec<Option<usize>>) {
    let n = g.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![None; n];
    let mut heap = BinaryHeap::new();
    for &s in srcs {
        dist[s] = 0.0;
        heap.push(HeapItem(0.0, s));
    }
    let mut done = vec![false; n];
    while let Some(HeapItem(d, u)) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(v, p) in &g.out[u] {
            if allowed.is_some_and(|a| !a.contains(&(u, v))) {
                continue;
            }
            let nd = d + edge_len(p, metric);
            if nd < dist[v] {
                dist[v] = nd;
                parent[v] = Some(u);
                heap.push(HeapItem(nd, v));
            }
        }
    }
    (dist, parent)
}

fn path_edges(parent: &[Option<usize>], target: usize, out: &mut BTreeSet<(usize, usize)>) {
    let mut v = target;
    while let Some(u) = parent[v] {
        out.insert((u, v));
        v = u;
    }
}

/// Union of shortest paths from `c` to every reachable target.
pub fn dst(g: &Digraph, c: usize, targets: &[usize], metric: PathMetric) -> BTreeSet<(usize, usize)> {
    let (dist, parent) = shortest_tree(g, &[c], metric, None);
    let mut edges = BTreeSet::new();
    for &t in targets {
        if dist[t].is_finite() {
            path_edges(&parent, t, &mut edges);
        }
    }
    edges
}

/// Roots of the subgraph on `nodes` with `edges`: the smallest id of every
/// strongly connected component without incoming edges.
pub fn find_sources(nodes: &BTreeSet<usize>, edges: &BTreeSet<(usize, usize)>) -> Vec<usize> {
    let idx: BTreeMap<usize, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let ids: Vec<usize> = nodes.iter().copied().collect();
    let n = ids.len();
    let mut out = vec![Vec::new(); n];
    let mut inc = vec![Vec::new(); n];
    for &(u, v) in edges {
        let (a, b) = (idx[&u], idx[&v]);
        out[a].push(b);
        inc[b].push(a);
    }
    // Kosaraju: finish order on the graph, then components on the reverse.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut stack = vec![(s, 0usize)];
        seen[s] = true;
        while let Some(&mut (u, ref mut i)) = stack.last_mut() {
            if *i < out[u].len() {
                let v = out[u][*i];
                *i += 1;
                if !seen[v] {
                    seen[v] = true;
                    stack.push((v, 0));
                }
            } else {
                order.push(u);
                stack.pop();
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut ncomp = 0;
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = ncomp;
        while let Some(u) = stack.pop() {
            for &v in &inc[u] {
                if comp[v] == usize::MAX {
                    comp[v] = ncomp;
                    stack.push(v);
                }
            }
        }
        ncomp += 1;
    }
    let mut has_in = vec![false; ncomp];
    for &(u, v) in edges {
        let (cu, cv) = (comp[idx[&u]], comp[idx[&v]]);
        if cu != cv {
            has_in[cv] = true;
        }
    }
    let mut best = vec![usize::MAX; ncomp];
    for (i, &c) in comp.iter().enumerate() {
        best[c] = best[c].min(ids[i]);
    }
    let mut roots: Vec<usize> = (0..ncomp).filter(|&c| !has_in[c]).map(|c| best[c]).collect();
    roots.sort_unstable();
    roots
}

/// Node minimizing the average distance to some pair of `s`, ties by the
/// smaller node and then the smaller pair. `None` when no pair shares an
/// ancestor.
pub fn min_common_ancestor(dist: &[Vec<f64>], s: &[usize]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (c, row) in dist.iter().enumerate() {
        for (a, &u) in s.iter().enumerate() {
            for &v in &s[a + 1..] {
                let (du, dv) = (row[u], row[v]);
                if du.is_finite() && dv.is_finite() {
                    let avg = (du + dv) / 2.0;
                    if best.is_none_or(|(b, _)| avg < b) {
                        best = Some((avg, c));
                    }
                }
            }
        }
    }
    best.map(|(_, c)| c)
}

/// Picks up to `k` nodes from `candidates`, each time the one reaching the
/// most uncovered recipients. Falls back to all nodes when the candidates
/// cannot cover `p`.
pub fn greedy_select(g: &Digraph, candidates: &[usize], p: &[usize], k: usize) -> Result<Vec<usize>, ProvenanceError> {
    let pick = |cands: &[usize]| {
        let reach: Vec<Vec<bool>> = cands.iter().map(|&c| g.reachable(&[c])).collect();
        let mut covered = vec![false; p.len()];
        let mut chosen = Vec::new();
        for _ in 0..k {
            let mut best: Option<(usize, usize)> = None;
            for (ci, &c) in cands.iter().enumerate() {
                if chosen.contains(&c) {
                    continue;
                }
                let gain = p.iter().enumerate().filter(|&(i, &t)| !covered[i] && reach[ci][t]).count();
                if gain > 0 && best.is_none_or(|(bg, _)| gain > bg) {
                    best = Some((gain, ci));
                }
            }
            let Some((_, ci)) = best else { break };
            chosen.push(cands[ci]);
            for (i, &t) in p.iter().enumerate() {
                covered[i] |= reach[ci][t];
            }
        }
        let uncovered: Vec<usize> = p.iter().zip(&covered).filter(|(_, &c)| !c).map(|(&t, _)| t).collect();
        (chosen, uncovered)
    };
    let (chosen, uncovered) = pick(candidates);
    if uncovered.is_empty() {
        return Ok(chosen);
    }
    let all: Vec<usize> = (0..g.len()).collect();
    let (chosen, uncovered) = pick(&all);
    if uncovered.is_empty() {
        Ok(chosen)
    } else {
        Err(ProvenanceError::Uncoverable { k, uncovered })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProvenanceConfig {
    pub k: usize,
    pub transmitters: usize,
    pub metric: PathMetric,
}

impl Default for ProvenanceConfig {
    fn default() -> Self {
        Self { k: 1, transmitters: 10, metric: PathMetric::Hops }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProvenanceResult {
    pub sources: Vec<usize>,
    /// Edges of the provenance subgraph with their probabilities.
    pub edges: Vec<(usize, usize, f64)>,
    /// Product of the edge probabilities.
    pub utility: f64,
    pub transmitters: Vec<usize>,
}

impl ProvenanceResult {
    /// Nodes on the provenance paths.
    pub fn nodes(&self) -> BTreeSet<usize> {
        self.sources.iter().copied().chain(self.edges.iter().flat_map(|e| [e.0, e.1])).collect()
    }
}

fn utility(g: &Digraph, edges: &BTreeSet<(usize, usize)>) -> f64 {
    edges.iter().map(|&(u, v)| g.prob(u, v).unwrap_or(0.0)).product()
}

/// Union over recipients of one best path from the sources, restricted to
/// `allowed` edges when given. `None` if some recipient is unreachable.
fn covering_paths(
    g: &Digraph,
    sources: &[usize],
    p: &[usize],
    metric: PathMetric,
    allowed: Option<&BTreeSet<(usize, usize)>>,
) -> Option<BTreeSet<(usize, usize)>> {
    let (dist, parent) = shortest_tree(g, sources, metric, allowed);
    let mut edges = BTreeSet::new();
    for &t in p {
        if !dist[t].is_finite() {
            return None;
        }
        path_edges(&parent, t, &mut edges);
    }
    Some(edges)
}

/// Union of the most probable paths from `sources` to every recipient.
pub fn max_probability_paths(g: &Digraph, sources: &[usize], p: &[usize]) -> Option<(BTreeSet<(usize, usize)>, f64)> {
    covering_paths(g, sources, p, PathMetric::Probability, None).map(|e| {
        let u = utility(g, &e);
        (e, u)
    })
}

/// Recovers provenance paths and at most `k` sources covering `p`.
pub fn find_provenance_paths(g: &Digraph, p: &[usize], cfg: &ProvenanceConfig) -> Result<ProvenanceResult, ProvenanceError> {
    if p.is_empty() {
        return Err(ProvenanceError::EmptyRecipients);
    }
    if cfg.k == 0 {
        return Err(ProvenanceError::ZeroBudget);
    }
    if let Some(&bad) = p.iter().find(|&&t| t >= g.len()) {
        return Err(ProvenanceError::BadNode(bad));
    }
    let p: Vec<usize> = p.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let transmitters = estimate_transmitters(g, &p, cfg.transmitters);
    let reach = g.reachable(&transmitters);
    if p.iter().all(|&t| !reach[t]) {
        return Err(ProvenanceError::Orphaned(p.clone()));
    }
    let mut edges = BTreeSet::new();
    for &c in &transmitters {
        edges.extend(dst(g, c, &p, cfg.metric));
    }
    let node_set = |edges: &BTreeSet<(usize, usize)>| -> BTreeSet<usize> {
        p.iter().copied().chain(edges.iter().flat_map(|&(u, v)| [u, v])).collect()
    };
    let dist: Vec<Vec<f64>> = (0..g.len()).map(|c| shortest_tree(g, &[c], cfg.metric, None).0).collect();
    let mut sources = find_sources(&node_set(&edges), &edges);
    while sources.len() > cfg.k {
        let Some(c) = min_common_ancestor(&dist, &sources) else {
            sources = greedy_select(g, &sources, &p, cfg.k)?;
            break;
        };
        edges.extend(dst(g, c, &sources, cfg.metric));
        let next = find_sources(&node_set(&edges), &edges);
        if next.len() >= sources.len() {
            sources = greedy_select(g, &next, &p, cfg.k)?;
            break;
        }
        sources = next;
    }
    let pruned = covering_paths(g, &sources, &p, cfg.metric, Some(&edges));
    let baseline = max_probability_paths(g, &sources, &p);
    let chosen = match (pruned, baseline) {
        (Some(a), Some((b, ub))) => {
            if utility(g, &a) >= ub {
                a
            } else {
                b
            }
        }
        (Some(a), None) => a,
        (None, Some((b, _))) => b,
        (None, None) => {
            let reach = g.reachable(&sources);
            let uncovered = p.iter().copied().filter(|&t| !reach[t]).collect();
            return Err(ProvenanceError::Uncoverable { k: cfg.k, uncovered });
        }
    };
    let u = utility(g, &chosen);
    Ok(ProvenanceResult {
        sources,
        edges: chosen.iter().map(|&(a, b)| (a, b, g.prob(a, b).unwrap_or(0.0))).collect(),
        utility: u,
        transmitters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(leaves: usize) -> Digraph {
        Digraph::new(leaves + 1, (1..=leaves).map(|l| (0, l, 0.5)))
    }

    #[test]
    fn star_center_first() {
        let g = star(4);
        assert_eq!(estimate_transmitters(&g, &[1, 2, 3, 4], 1), vec![0]);
        assert_eq!(estimate_transmitters(&g, &[1, 2], 10).len(), 5);
    }

    #[test]
    fn cycle_nearest_first() {
        // 0 -> 1 -> 2 -> 3 -> 0
        let g = Digraph::new(4, (0..4).map(|i| (i, (i + 1) % 4, 1.0)));
        assert_eq!(estimate_transmitters(&g, &[0], 4), vec![0, 3, 2, 1]);
    }

    #[test]
    fn tree_root_recovered() {
        //      0
        //    1   2
        //   3 4    5
        let g = Digraph::new(6, [(0, 1, 0.5), (0, 2, 0.4), (1, 3, 0.9), (1, 4, 0.8), (2, 5, 0.7)]);
        let r = find_provenance_paths(&g, &[3, 4, 5], &ProvenanceConfig { k: 1, transmitters: 2, ..Default::default() })
            .unwrap();
        assert_eq!(r.sources, vec![0]);
        let want = 0.5 * 0.4 * 0.9 * 0.8 * 0.7;
        assert!((r.utility - want).abs() < 1e-15);
    }

    #[test]
    fn unique_in_path() {
        let g = Digraph::new(3, [(0, 1, 0.5), (1, 2, 0.5)]);
        let r = find_provenance_paths(&g, &[2], &ProvenanceConfig::default()).unwrap();
        assert_eq!(r.sources, vec![0]);
        assert_eq!(r.edges.len(), 2);
    }

    #[test]
    fn sources_of_cycle() {
        let nodes: BTreeSet<usize> = [0, 1, 2, 3].into();
        let edges: BTreeSet<(usize, usize)> = [(1, 2), (2, 1), (2, 3)].into();
        assert_eq!(find_sources(&nodes, &edges), vec![0, 1]);
    }

    #[test]
    fn errors() {
        let g = Digraph::new(3, [(0, 1, 0.5)]);
        assert_eq!(find_provenance_paths(&g, &[], &ProvenanceConfig::default()), Err(ProvenanceError::EmptyRecipients));
        let cfg = ProvenanceConfig { k: 1, transmitters: 1, ..Default::default() };
        assert!(matches!(find_provenance_paths(&g, &[2], &cfg), Err(ProvenanceError::Orphaned(_))));
    }
}
