//! Mitigation: provenance paths and transmitters, persuader selection,
//! audience-size estimation, cascade blocking under the independent
//! cascade model and Hawkes mitigation campaigns.

pub mod audience;
pub mod hawkes;
pub mod icm;
pub mod leaders;
pub mod provenance;

use std::collections::VecDeque;

use crate::graph::DiffusionNetwork;

/// Directed graph with edge probabilities and sorted adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Digraph {
    pub out: Vec<Vec<(usize, f64)>>,
    pub inc: Vec<Vec<(usize, f64)>>,
}

impl Digraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for (u, v, p) in edges {
            out[u].push((v, p));
            inc[v].push((u, p));
        }
        for l in out.iter_mut().chain(inc.iter_mut()) {
            l.sort_by(|a, b| a.0.cmp(&b.0));
        }
        Self { out, inc }
    }

    pub fn from_diffusion(net: &DiffusionNetwork) -> Self {
        Self::new(net.users, net.edges.iter().map(|e| (e.src, e.dst, e.prob)))
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.out.iter().enumerate().flat_map(|(u, l)| l.iter().map(move |&(v, p)| (u, v, p)))
    }

    pub fn prob(&self, u: usize, v: usize) -> Option<f64> {
        self.out[u].iter().find(|e| e.0 == v).map(|e| e.1)
    }

    /// Hop distances from `src` (`None` when unreachable).
    pub fn bfs(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        dist[src] = Some(0);
        let mut q = VecDeque::from([src]);
        while let Some(u) = q.pop_front() {
            let d = dist[u].unwrap();
            for &(v, _) in &self.out[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    q.push_back(v);
                }
            }
        }
        dist
    }

    /// Nodes reachable from any of `srcs`, including them.
    pub fn reachable(&self, srcs: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = srcs.to_vec();
        for &s in srcs {
            seen[s] = true;
        }
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.out[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}
