//! Independent cascade model: simulation, exact influence and greedy
//! blocking.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Digraph;
use crate::io::stream_rng;

/// Largest graph for which influence is computed exactly.
pub const EXACT_LIMIT: usize = 15;

#[derive(Debug, Error, PartialEq)]
pub enum IcmError {
    #[error("node {0} is both a seed and blocked")]
    SeedBlocked(usize),
    #[error("node {0} out of range")]
    BadNode(usize),
    #[error("edge probability {0} outside [0,1]")]
    BadProbability(f64),
    #[error("block budget {k} exceeds the {free} non-seed nodes")]
    BudgetTooLarge { k: usize, free: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcmInstance {
    pub graph: Digraph,
    pub seeds: Vec<usize>,
    pub blocked: BTreeSet<usize>,
    pub reps: usize,
    pub seed: u64,
}

impl IcmInstance {
    pub fn new(graph: Digraph, seeds: Vec<usize>) -> Self {
        Self { graph, seeds, blocked: BTreeSet::new(), reps: 10_000, seed: 0 }
    }

    pub fn validate(&self) -> Result<(), IcmError> {
        let n = self.graph.len();
        for &v in self.seeds.iter().chain(&self.blocked) {
            if v >= n {
                return Err(IcmError::BadNode(v));
            }
        }
        if let Some(&v) = self.seeds.iter().find(|v| self.blocked.contains(v)) {
            return Err(IcmError::SeedBlocked(v));
        }
        if let Some((_, _, p)) = self.graph.edges().find(|e| !(0.0..=1.0).contains(&e.2)) {
            return Err(IcmError::BadProbability(p));
        }
        Ok(())
    }
}

/// Nodes newly activated at each step, seeds first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationTrace {
    pub steps: Vec<Vec<usize>>,
}

impl SimulationTrace {
    pub fn active_count(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }
}

/// One cascade: every newly active node gets a single attempt on each
/// inactive, unblocked out-neighbour.
pub fn simulate(g: &Digraph, seeds: &[usize], blocked: &BTreeSet<usize>, rng: &mut ChaCha8Rng) -> SimulationTrace {
    let mut active = vec![false; g.len()];
    let mut frontier: Vec<usize> = Vec::new();
    for &s in seeds {
        if !active[s] {
            active[s] = true;
            frontier.push(s);
        }
    }
    let mut steps = vec![frontier.clone()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &u in &frontier {
            for &(v, p) in &g.out[u] {
                if active[v] || blocked.contains(&v) {
                    continue;
                }
                if rng.random::<f64>() < p {
                    active[v] = true;
                    next.push(v);
                }
            }
        }
        if !next.is_empty() {
            steps.push(next.clone());
        }
        frontier = next;
    }
    SimulationTrace { steps }
}

/// Expected final active count by exhaustive enumeration of activation
/// outcomes, memoized on `(active, newly active)` sets.
pub fn exact_influence(g: &Digraph, seeds: &[usize], blocked: &BTreeSet<usize>) -> f64 {
    assert!(g.len() <= 63, "exact influence needs at most 63 nodes");
    let blocked_mask: u64 = blocked.iter().fold(0, |m, &v| m | (1 << v));
    let seed_mask: u64 = seeds.iter().fold(0, |m, &v| m | (1 << v));
    let mut memo = HashMap::new();
    expected(g, seed_mask, seed_mask, blocked_mask, &mut memo)
}

fn expected(g: &Digraph, active: u64, new: u64, blocked: u64, memo: &mut HashMap<(u64, u64), f64>) -> f64 {
    if new == 0 {
        return active.count_ones() as f64;
    }
    if let Some(&v) = memo.get(&(active, new)) {
        return v;
    }
    // Activation probability of each reachable inactive node.
    let mut cand: Vec<(usize, f64)> = Vec::new();
    let mut miss = vec![1.0f64; g.len()];
    for u in 0..g.len() {
        if new & (1 << u) == 0 {
            continue;
        }
        for &(v, p) in &g.out[u] {
            if active & (1 << v) == 0 && blocked & (1 << v) == 0 {
                miss[v] *= 1.0 - p;
            }
        }
    }
    let mut forced: u64 = 0;
    for (v, &m) in miss.iter().enumerate() {
        if active & (1 << v) == 0 && blocked & (1 << v) == 0 && m < 1.0 {
            if m == 0.0 {
                forced |= 1 << v;
            } else {
                cand.push((v, 1.0 - m));
            }
        }
    }
    let mut total = 0.0;
    for subset in 0u64..(1u64 << cand.len()) {
        let mut prob = 1.0;
        let mut hit = forced;
        for (b, &(v, q)) in cand.iter().enumerate() {
            if subset & (1 << b) != 0 {
                prob *= q;
                hit |= 1 << v;
            } else {
                prob *= 1.0 - q;
            }
        }
        total += prob * expected(g, active | hit, hit, blocked, memo);
    }
    memo.insert((active, new), total);
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfluenceEstimate {
    pub mean: f64,
    /// Zero for exact values.
    pub std_error: f64,
    pub exact: bool,
}

/// Monte Carlo mean with replication `r` drawing from stream `(seed, r)`.
pub fn monte_carlo_influence(g: &Digraph, seeds: &[usize], blocked: &BTreeSet<usize>, reps: usize, seed: u64) -> InfluenceEstimate {
    let counts: Vec<u64> = (0..reps as u64)
        .into_par_iter()
        .map(|r| simulate(g, seeds, blocked, &mut stream_rng(seed, r)).active_count() as u64)
        .collect();
    let sum: u64 = counts.iter().sum();
    let sq: u64 = counts.iter().map(|c| c * c).sum();
    let n = reps.max(1) as f64;
    let mean = sum as f64 / n;
    let var = if reps > 1 { (sq as f64 - n * mean * mean) / (n - 1.0) } else { 0.0 };
    InfluenceEstimate { mean, std_error: (var.max(0.0) / n).sqrt(), exact: false }
}

/// Exact for graphs up to [`EXACT_LIMIT`] nodes, Monte Carlo above.
pub fn influence(inst: &IcmInstance) -> InfluenceEstimate {
    if inst.graph.len() <= EXACT_LIMIT {
        InfluenceEstimate { mean: exact_influence(&inst.graph, &inst.seeds, &inst.blocked), std_error: 0.0, exact: true }
    } else {
        monte_carlo_influence(&inst.graph, &inst.seeds, &inst.blocked, inst.reps, inst.seed)
    }
}

/// Single-node heuristics for choosing blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockCriterion {
    OutDegree,
    InDegree,
    ProbabilityMass,
}

/// Free nodes ordered by out-degree, in-degree and outgoing probability
/// mass (all descending), then id.
pub fn ranked_candidates(inst: &IcmInstance) -> Vec<usize> {
    let g = &inst.graph;
    let mut c: Vec<usize> =
        (0..g.len()).filter(|v| !inst.seeds.contains(v) && !inst.blocked.contains(v)).collect();
    let mass = |v: usize| g.out[v].iter().map(|e| e.1).sum::<f64>();
    c.sort_by(|&a, &b| {
        g.out[b]
            .len()
            .cmp(&g.out[a].len())
            .then(g.inc[b].len().cmp(&g.inc[a].len()))
            .then(mass(b).total_cmp(&mass(a)))
            .then(a.cmp(&b))
    });
    c
}

/// Top-`k` free nodes by one criterion, ties by id.
pub fn heuristic_block(inst: &IcmInstance, k: usize, criterion: BlockCriterion) -> Vec<usize> {
    let g = &inst.graph;
    let mut c: Vec<usize> =
        (0..g.len()).filter(|v| !inst.seeds.contains(v) && !inst.blocked.contains(v)).collect();
    let key = |v: usize| match criterion {
        BlockCriterion::OutDegree => g.out[v].len() as f64,
        BlockCriterion::InDegree => g.inc[v].len() as f64,
        BlockCriterion::ProbabilityMass => g.out[v].iter().map(|e| e.1).sum(),
    };
    c.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
    c.truncate(k);
    c
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockResult {
    pub blocked: Vec<usize>,
    pub baseline: InfluenceEstimate,
    pub influence: InfluenceEstimate,
}

/// Greedily blocks the node with the largest influence reduction; ties go
/// to the earlier node in [`ranked_candidates`].
pub fn greedy_block(inst: &IcmInstance, k: usize) -> Result<BlockResult, IcmError> {
    inst.validate()?;
    let free = ranked_candidates(inst);
    if k > free.len() {
        return Err(IcmError::BudgetTooLarge { k, free: free.len() });
    }
    let baseline = influence(inst);
    let mut cur = inst.clone();
    let mut current = baseline;
    let mut chosen = Vec::new();
    for _ in 0..k {
        let mut best: Option<(InfluenceEstimate, usize)> = None;
        for &v in &ranked_candidates(&cur) {
            let mut trial = cur.clone();
            trial.blocked.insert(v);
            let est = influence(&trial);
            if best.is_none_or(|(b, _)| est.mean < b.mean) {
                best = Some((est, v));
            }
        }
        let Some((est, v)) = best else { break };
        cur.blocked.insert(v);
        chosen.push(v);
        current = est;
    }
    Ok(BlockResult { blocked: chosen, baseline, influence: current })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(p: f64) -> Digraph {
        Digraph::new(3, [(0, 1, p), (1, 2, p)])
    }

    #[test]
    fn chain_example_exact() {
        assert_eq!(exact_influence(&chain(0.5), &[0], &BTreeSet::new()), 1.75);
    }

    #[test]
    fn zero_and_one_probabilities() {
        let g = Digraph::new(4, [(0, 1, 0.0), (1, 2, 0.0), (2, 3, 0.0)]);
        assert_eq!(exact_influence(&g, &[0, 2], &BTreeSet::new()), 2.0);
        let g = Digraph::new(5, [(0, 1, 1.0), (1, 2, 1.0), (0, 3, 1.0)]);
        assert_eq!(exact_influence(&g, &[0], &BTreeSet::new()), 4.0);
    }

    #[test]
    fn monte_carlo_near_exact() {
        let g = chain(0.5);
        let mc = monte_carlo_influence(&g, &[0], &BTreeSet::new(), 10_000, 3);
        assert!((mc.mean - 1.75).abs() < 3.0 * mc.std_error + 1e-12);
        let again = monte_carlo_influence(&g, &[0], &BTreeSet::new(), 10_000, 3);
        assert_eq!(mc, again);
    }

    #[test]
    fn star_blocks_a_leaf() {
        let g = Digraph::new(4, (1..4).map(|l| (0, l, 1.0)));
        let inst = IcmInstance::new(g, vec![0]);
        let r = greedy_block(&inst, 1).unwrap();
        assert_eq!(r.baseline.mean - r.influence.mean, 1.0);
        assert_eq!(r.blocked, vec![1]);
    }

    #[test]
    fn chain_blocks_middle() {
        let inst = IcmInstance::new(chain(1.0), vec![0]);
        let r = greedy_block(&inst, 1).unwrap();
        assert_eq!(r.blocked, vec![1]);
        assert_eq!((r.baseline.mean, r.influence.mean), (3.0, 1.0));
    }

    #[test]
    fn validation() {
        let mut inst = IcmInstance::new(chain(0.5), vec![0]);
        inst.blocked.insert(0);
        assert_eq!(inst.validate(), Err(IcmError::SeedBlocked(0)));
        let inst = IcmInstance::new(chain(0.5), vec![0]);
        assert!(matches!(greedy_block(&inst, 5), Err(IcmError::BudgetTooLarge { .. })));
    }
}
