//! Fact checking against a knowledge graph.
//!
//! A claim `(s, p, o)` is scored either by the best path specificity
//! between `s` and `o`, or by a min-cost max-flow "knowledge stream"
//! decomposed into paths, each weighted by its bottleneck and specificity.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::KnowledgeGraph;

#[derive(Debug, Error, PartialEq)]
pub enum KgError {
    #[error("unknown entity {0}")]
    UnknownEntity(String),
    #[error("entity index {0} out of range")]
    BadIndex(usize),
    #[error("claim subject equals object")]
    Reflexive,
    #[error("invalid claim line {line}: {message}")]
    ClaimParse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

/// Claims as JSON lines.
pub fn parse_claims(text: &str) -> Result<Vec<Claim>, KgError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let c: Claim =
            serde_json::from_str(line).map_err(|e| KgError::ClaimParse { line: i + 1, message: e.to_string() })?;
        out.push(c);
    }
    Ok(out)
}

/// Neighbour lists over the knowledge graph.
#[derive(Debug, Clone, PartialEq)]
pub struct KgView {
    pub directed: bool,
    pub neighbors: Vec<Vec<usize>>,
    pub degree: Vec<usize>,
}

impl KgView {
    pub fn new(kg: &KnowledgeGraph, directed: bool) -> Self {
        let mut sets = vec![BTreeSet::new(); kg.entities];
        for t in &kg.triples {
            sets[t.subject].insert(t.object);
            if !directed {
                sets[t.object].insert(t.subject);
            }
        }
        Self { directed, neighbors: sets.into_iter().map(|s| s.into_iter().collect()).collect(), degree: kg.degree.clone() }
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    fn ln_degree(&self, v: usize) -> f64 {
        (self.degree[v].max(1) as f64).ln()
    }
}

/// `1 / (1 + sum of ln d over intermediate entities)`.
pub fn specificity(path: &[usize], view: &KgView) -> f64 {
    let inner = if path.len() > 2 { &path[1..path.len() - 1] } else { &[][..] };
    1.0 / (1.0 + inner.iter().map(|&v| view.ln_degree(v)).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnowledgePath {
    pub entities: Vec<usize>,
    pub specificity: f64,
}

/// All simple paths `s .. o` of at most `max_len` edges, best specificity
/// first, ties by lexicographic entity sequence, truncated to `max_paths`.
pub fn find_paths(view: &KgView, s: usize, o: usize, max_len: usize, max_paths: usize) -> Result<Vec<KnowledgePath>, KgError> {
    for v in [s, o] {
        if v >= view.len() {
            return Err(KgError::BadIndex(v));
        }
    }
    let mut found = Vec::new();
    let mut stack = vec![s];
    let mut on_path = vec![false; view.len()];
    on_path[s] = true;
    fn dfs(
        view: &KgView,
        o: usize,
        max_len: usize,
        stack: &mut Vec<usize>,
        on_path: &mut [bool],
        found: &mut Vec<Vec<usize>>,
    ) {
        let u = *stack.last().unwrap();
        if u == o {
            found.push(stack.clone());
            return;
        }
        if stack.len() > max_len {
            return;
        }
        for &v in &view.neighbors[u] {
            if !on_path[v] {
                on_path[v] = true;
                stack.push(v);
                dfs(view, o, max_len, stack, on_path, found);
                stack.pop();
                on_path[v] = false;
            }
        }
    }
    if s != o {
        dfs(view, o, max_len, &mut stack, &mut on_path, &mut found);
    }
    let mut paths: Vec<KnowledgePath> =
        found.into_iter().map(|p| KnowledgePath { specificity: specificity(&p, view), entities: p }).collect();
    paths.sort_by(|a, b| b.specificity.total_cmp(&a.specificity).then_with(|| a.entities.cmp(&b.entities)));
    paths.truncate(max_paths);
    Ok(paths)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthValue {
    pub tau: f64,
    pub n_paths: usize,
    pub warning: Option<String>,
}

fn resolve(kg: &KnowledgeGraph, claim: &Claim) -> Result<(usize, usize), TruthValue> {
    let s = kg.entity_index(&claim.subject);
    let o = kg.entity_index(&claim.object);
    match (s, o) {
        (Some(s), Some(o)) => Ok((s, o)),
        _ => {
            let missing = if s.is_none() { &claim.subject } else { &claim.object };
            Err(TruthValue { tau: 0.0, n_paths: 0, warning: Some(format!("unresolved entity {missing}")) })
        }
    }
}

fn has_triple(kg: &KnowledgeGraph, s: usize, p: &str, o: usize) -> bool {
    kg.triples.iter().any(|t| t.subject == s && t.object == o && t.predicate == p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathConfig {
    pub max_len: usize,
    pub max_paths: usize,
    pub directed: bool,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self { max_len: 4, max_paths: 1000, directed: false }
    }
}

/// 1 for a triple already in the graph, else the best path specificity,
/// 0 without a path. Unknown entities score 0 with a warning.
pub fn truth_value_path(kg: &KnowledgeGraph, claim: &Claim, cfg: &PathConfig) -> TruthValue {
    let (s, o) = match resolve(kg, claim) {
        Ok(x) => x,
        Err(t) => return t,
    };
    let view = KgView::new(kg, cfg.directed);
    let paths = find_paths(&view, s, o, cfg.max_len, cfg.max_paths).unwrap_or_default();
    if has_triple(kg, s, &claim.predicate, o) {
        return TruthValue { tau: 1.0, n_paths: paths.len(), warning: None };
    }
    let tau = paths.first().map_or(0.0, |p| p.specificity);
    TruthValue { tau, n_paths: paths.len(), warning: None }
}

/// How arc capacities are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapacityRule {
    /// `u -> v` carries `1 / (1 + ln d(v))`, arcs into the sink carry 1.
    Specificity,
    Uniform(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub capacity: f64,
    pub cost: f64,
}

/// Flow network for a claim between `s` and `o`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowProblem {
    pub nodes: usize,
    pub source: usize,
    pub sink: usize,
    pub arcs: Vec<Arc>,
}

impl FlowProblem {
    /// Arcs follow the view's neighbour lists; arcs into the source and
    /// out of the sink are dropped. Cost of `u -> v` is `ln d(v)`, zero into
    /// the sink.
    pub fn new(view: &KgView, s: usize, o: usize, rule: CapacityRule) -> Self {
        let mut arcs = Vec::new();
        for u in 0..view.len() {
            if u == o {
                continue;
            }
            for &v in &view.neighbors[u] {
                if v == s {
                    continue;
                }
                let (capacity, cost) = if v == o {
                    (match rule { CapacityRule::Specificity => 1.0, CapacityRule::Uniform(c) => c }, 0.0)
                } else {
                    let ln = view.ln_degree(v);
                    (match rule { CapacityRule::Specificity => 1.0 / (1.0 + ln), CapacityRule::Uniform(c) => c }, ln)
                };
                arcs.push(Arc { from: u, to: v, capacity, cost });
            }
        }
        Self { nodes: view.len(), source: s, sink: o, arcs }
    }
}

const FLOOR: f64 = 1e-12;

/// Min-cost max-flow by successive shortest augmenting paths
/// (Bellman-Ford on the residual graph). Returns the flow on each arc.
pub fn min_cost_max_flow(p: &FlowProblem) -> Vec<f64> {
    let n = p.nodes;
    let m = p.arcs.len();
    // Residual arc 2k is forward, 2k+1 backward.
    let mut flow = vec![0.0; m];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, a) in p.arcs.iter().enumerate() {
        out[a.from].push(2 * k);
        out[a.to].push(2 * k + 1);
    }
    let residual = |r: usize, flow: &[f64]| -> (usize, usize, f64, f64) {
        let a = &p.arcs[r / 2];
        if r % 2 == 0 {
            (a.from, a.to, a.capacity - flow[r / 2], a.cost)
        } else {
            (a.to, a.from, flow[r / 2], -a.cost)
        }
    };
    if p.source == p.sink {
        return flow;
    }
    loop {
        let mut dist = vec![f64::INFINITY; n];
        let mut pred: Vec<Option<usize>> = vec![None; n];
        dist[p.source] = 0.0;
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                if !dist[u].is_finite() {
                    continue;
                }
                for &r in &out[u] {
                    let (_, v, cap, cost) = residual(r, &flow);
                    if cap > FLOOR && dist[u] + cost < dist[v] - 1e-15 {
                        dist[v] = dist[u] + cost;
                        pred[v] = Some(r);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if !dist[p.sink].is_finite() {
            break;
        }
        let mut path = Vec::new();
        let mut v = p.sink;
        while v != p.source {
            let r = pred[v].expect("predecessor on shortest path");
            path.push(r);
            v = residual(r, &flow).0;
        }
        let bottleneck = path.iter().map(|&r| residual(r, &flow).2).fold(f64::INFINITY, f64::min);
        if bottleneck < FLOOR {
            break;
        }
        for &r in &path {
            if r % 2 == 0 {
                flow[r / 2] += bottleneck;
            } else {
                flow[r / 2] -= bottleneck;
            }
        }
    }
    cancel_antiparallel(p, &mut flow);
    flow
}

// Net out flow on opposite arcs between the same pair.
fn cancel_antiparallel(p: &FlowProblem, flow: &mut [f64]) {
    for k in 0..p.arcs.len() {
        for l in k + 1..p.arcs.len() {
            if p.arcs[k].from == p.arcs[l].to && p.arcs[k].to == p.arcs[l].from {
                let d = flow[k].min(flow[l]);
                if d > 0.0 {
                    flow[k] -= d;
                    flow[l] -= d;
                }
            }
        }
    }
}

/// Net outflow minus inflow at each node.
pub fn net_outflow(p: &FlowProblem, flow: &[f64]) -> Vec<f64> {
    let mut net = vec![0.0; p.nodes];
    for (a, &f) in p.arcs.iter().zip(flow) {
        net[a.from] += f;
        net[a.to] -= f;
    }
    net
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowPath {
    pub entities: Vec<usize>,
    /// Bottleneck of the remaining flow when the path was extracted.
    pub flow: f64,
    pub specificity: f64,
}

/// Repeatedly removes the cheapest source-sink path in the support of
/// `flow`, carrying its bottleneck.
pub fn decompose(p: &FlowProblem, flow: &[f64], view: &KgView) -> Vec<FlowPath> {
    let mut rest = flow.to_vec();
    let mut out = Vec::new();
    loop {
        // Bellman-Ford on nonnegative costs over the positive-flow support;
        // ties broken by smaller arc index for determinism.
        let n = p.nodes;
        let mut dist = vec![f64::INFINITY; n];
        let mut pred: Vec<Option<usize>> = vec![None; n];
        dist[p.source] = 0.0;
        for _ in 0..n {
            let mut changed = false;
            for (k, a) in p.arcs.iter().enumerate() {
                if rest[k] > FLOOR && dist[a.from].is_finite() && dist[a.from] + a.cost < dist[a.to] - 1e-15 {
                    dist[a.to] = dist[a.from] + a.cost;
                    pred[a.to] = Some(k);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if !dist[p.sink].is_finite() {
            break;
        }
        let mut arcs = Vec::new();
        let mut v = p.sink;
        while v != p.source {
            let k = pred[v].expect("predecessor");
            arcs.push(k);
            v = p.arcs[k].from;
        }
        arcs.reverse();
        let b = arcs.iter().map(|&k| rest[k]).fold(f64::INFINITY, f64::min);
        for &k in &arcs {
            rest[k] -= b;
        }
        let mut entities = vec![p.source];
        entities.extend(arcs.iter().map(|&k| p.arcs[k].to));
        out.push(FlowPath { specificity: specificity(&entities, view), entities, flow: b });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnowledgeFlow {
    pub flow_value: f64,
    pub tau: f64,
    pub paths: Vec<FlowPath>,
    pub warning: Option<String>,
}

/// Knowledge-stream score: `sum over decomposed paths of B(P) * S(P)`.
pub fn knowledge_flow(kg: &KnowledgeGraph, claim: &Claim, rule: CapacityRule, directed: bool) -> KnowledgeFlow {
    let (s, o) = match resolve(kg, claim) {
        Ok(x) => x,
        Err(t) => return KnowledgeFlow { flow_value: 0.0, tau: 0.0, paths: Vec::new(), warning: t.warning },
    };
    let view = KgView::new(kg, directed);
    knowledge_flow_between(&view, s, o, rule)
}

pub fn knowledge_flow_between(view: &KgView, s: usize, o: usize, rule: CapacityRule) -> KnowledgeFlow {
    if s == o {
        return KnowledgeFlow { flow_value: 0.0, tau: 0.0, paths: Vec::new(), warning: Some("subject equals object".into()) };
    }
    let problem = FlowProblem::new(view, s, o, rule);
    let flow = min_cost_max_flow(&problem);
    let flow_value = net_outflow(&problem, &flow)[s];
    let paths = decompose(&problem, &flow, view);
    let tau = paths.iter().map(|p| p.flow * p.specificity).sum();
    KnowledgeFlow { flow_value, tau, paths, warning: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Triple;

    fn kg(n: usize, edges: &[(usize, usize)]) -> KnowledgeGraph {
        let names = (0..n).map(|i| format!("e{i}")).collect();
        let triples = edges.iter().map(|&(a, b)| Triple { subject: a, predicate: "r".into(), object: b }).collect();
        KnowledgeGraph::new(n, names, triples).unwrap()
    }

    fn claim(s: usize, p: &str, o: usize) -> Claim {
        Claim { subject: format!("e{s}"), predicate: p.into(), object: format!("e{o}") }
    }

    // 0 = s, 1 = a, 2 = b, 3 = o
    fn diamond() -> KnowledgeGraph {
        kg(4, &[(0, 1), (1, 3), (0, 2), (2, 3)])
    }

    #[test]
    fn specificity_examples() {
        let g = diamond();
        let v = KgView::new(&g, false);
        assert_eq!(specificity(&[0, 3], &v), 1.0);
        assert!((specificity(&[0, 1, 3], &v) - 1.0 / (1.0 + 2f64.ln())).abs() < 1e-15);
        let mut v2 = v.clone();
        v2.degree[1] = 3;
        assert!(specificity(&[0, 1, 2, 3], &v2) <= specificity(&[0, 1, 3], &v2));
    }

    #[test]
    fn diamond_has_two_paths() {
        let g = diamond();
        let v = KgView::new(&g, false);
        let paths = find_paths(&v, 0, 3, 4, 100).unwrap();
        assert_eq!(paths.len(), 2);
        assert_eq!(paths[0].entities, vec![0, 1, 3]);
        assert!(find_paths(&v, 0, 3, 1, 100).unwrap().is_empty());
        let tv = truth_value_path(&g, &claim(0, "r", 3), &PathConfig::default());
        assert!((tv.tau - 1.0 / (1.0 + 2f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn disconnected_and_exact() {
        let g = kg(4, &[(0, 1), (2, 3)]);
        let tv = truth_value_path(&g, &claim(0, "r", 3), &PathConfig::default());
        assert_eq!(tv.tau, 0.0);
        let tv = truth_value_path(&g, &claim(0, "r", 1), &PathConfig::default());
        assert_eq!(tv.tau, 1.0);
        let f = knowledge_flow(&g, &claim(0, "r", 3), CapacityRule::Specificity, false);
        assert_eq!((f.tau, f.flow_value), (0.0, 0.0));
    }

    #[test]
    fn unknown_entity_warns() {
        let g = diamond();
        let c = Claim { subject: "nobody".into(), predicate: "r".into(), object: "e3".into() };
        let tv = truth_value_path(&g, &c, &PathConfig::default());
        assert_eq!(tv.tau, 0.0);
        assert!(tv.warning.is_some());
    }

    #[test]
    fn single_path_flow() {
        let g = kg(3, &[(0, 1), (1, 2)]);
        let f = knowledge_flow(&g, &claim(0, "x", 2), CapacityRule::Uniform(1.0), false);
        assert!((f.tau - 1.0 / (1.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(f.paths.len(), 1);
        assert!((f.flow_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flow_conserved_on_diamond() {
        let g = diamond();
        let v = KgView::new(&g, false);
        let p = FlowProblem::new(&v, 0, 3, CapacityRule::Specificity);
        let flow = min_cost_max_flow(&p);
        let net = net_outflow(&p, &flow);
        assert!(net[1].abs() < 1e-9 && net[2].abs() < 1e-9);
        assert!((net[0] + net[3]).abs() < 1e-9);
        let cap = 2.0 / (1.0 + 2f64.ln());
        assert!((net[0] - cap).abs() < 1e-12);
    }

    #[test]
    fn claims_parse() {
        let c = parse_claims("{\"subject\":\"a\",\"predicate\":\"p\",\"object\":\"b\"}\n").unwrap();
        assert_eq!(c[0].object, "b");
        assert!(parse_claims("nope").is_err());
    }
}
