//! Credibility propagation over a signed post network.
//!
//! Posts sharing a viewpoint support each other, posts with conflicting
//! viewpoints oppose each other. Initial credibilities `T0` are smoothed
//! over the normalized link matrix `H = D^-1/2 W D^-1/2` by the fixed-point
//! iteration `T <- mu H T + (1 - mu) T0`, and the news-level verdict is the
//! mean post credibility.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::CredibilityNetwork;
use crate::io::seeded_rng;

#[derive(Debug, Error, PartialEq)]
pub enum CredError {
    #[error("invalid viewpoint distribution: {0}")]
    InvalidDistribution(String),
    #[error("mu must lie in (0,1), got {0}")]
    BadMu(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("empty post set")]
    Empty,
}

fn check_distribution(p: &[f64]) -> Result<(), CredError> {
    if p.is_empty() {
        return Err(CredError::InvalidDistribution("empty".into()));
    }
    if p.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(CredError::InvalidDistribution("negative or non-finite mass".into()));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(CredError::InvalidDistribution(format!("sums to {s}")));
    }
    Ok(())
}

fn kl_to_mixture(p: &[f64], mix: &[f64]) -> f64 {
    p.iter()
        .zip(mix)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &m)| a * (a / m).ln())
        .sum()
}

/// Jensen-Shannon divergence with natural log; range `[0, ln 2]`.
pub fn js_divergence(p: &[f64], q: &[f64]) -> Result<f64, CredError> {
    check_distribution(p)?;
    check_distribution(q)?;
    if p.len() != q.len() {
        return Err(CredError::Dimension(format!("{} vs {} components", p.len(), q.len())));
    }
    let mix: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    Ok((0.5 * kl_to_mixture(p, &mix) + 0.5 * kl_to_mixture(q, &mix)).max(0.0))
}

/// Signed link weight `(-1)^a / (D_JS(p||q) + 1)` where `a = 0` for posts
/// sharing a viewpoint.
pub fn link_weight(p: &[f64], q: &[f64], same_viewpoint: bool) -> Result<f64, CredError> {
    let d = js_divergence(p, q)?;
    let sign = if same_viewpoint { 1.0 } else { -1.0 };
    Ok(sign / (d + 1.0))
}

#[derive(Debug, Clone)]
pub struct PropagationProblem {
    pub initial: DVector<f64>,
    pub weights: DMatrix<f64>,
    pub mu: f64,
    /// `D_ii = sum_k |W_ik|`.
    pub degree: DVector<f64>,
    /// `H = D^-1/2 W D^-1/2`, zero rows for isolated posts.
    pub transition: DMatrix<f64>,
}

impl PropagationProblem {
    pub fn new(initial: Vec<f64>, weights: DMatrix<f64>, mu: f64) -> Result<Self, CredError> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(CredError::BadMu(mu));
        }
        let n = initial.len();
        if weights.nrows() != n || weights.ncols() != n {
            return Err(CredError::Dimension(format!("{n} posts but W is {}x{}", weights.nrows(), weights.ncols())));
        }
        for i in 0..n {
            for j in 0..n {
                if (weights[(i, j)] - weights[(j, i)]).abs() > 1e-12 {
                    return Err(CredError::Dimension("W_link must be symmetric".into()));
                }
            }
        }
        let degree = DVector::from_fn(n, |i, _| weights.row(i).iter().map(|w: &f64| w.abs()).sum::<f64>());
        let inv_sqrt: Vec<f64> = degree.iter().map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }).collect();
        let transition = DMatrix::from_fn(n, n, |i, j| inv_sqrt[i] * weights[(i, j)] * inv_sqrt[j]);
        Ok(Self { initial: DVector::from_vec(initial), weights, mu, degree, transition })
    }

    pub fn from_network(net: &CredibilityNetwork, mu: f64) -> Result<Self, CredError> {
        Self::new(net.credibility.clone(), net.weight_matrix(), mu)
    }

    pub fn len(&self) -> usize {
        self.initial.len()
    }

    pub fn is_empty(&self) -> bool {
        self.initial.is_empty()
    }

    pub fn is_isolated(&self, i: usize) -> bool {
        self.degree[i] == 0.0
    }

    /// `mu/2 * sum_ij |W_ij| (T_i/sqrt(D_i) - b_ij T_j/sqrt(D_j))^2 + (1-mu) ||T - T0||^2`.
    ///
    /// The ordered-pair sum is halved so that each link counts once; with
    /// that normalization the propagation fixed point is the exact minimizer
    /// whenever all links are supporting.
    pub fn objective(&self, t: &DVector<f64>) -> f64 {
        let n = self.len();
        let mut smooth = 0.0;
        for i in 0..n {
            if self.is_isolated(i) {
                continue;
            }
            for j in 0..n {
                let w = self.weights[(i, j)];
                if w == 0.0 {
                    continue;
                }
                let b = if w >= 0.0 { 1.0 } else { 0.0 };
                let r = t[i] / self.degree[i].sqrt() - b * t[j] / self.degree[j].sqrt();
                smooth += w.abs() * r * r;
            }
        }
        let fit = (t - &self.initial).norm_squared();
        0.5 * self.mu * smooth + (1.0 - self.mu) * fit
    }

    /// Direct solve of `(I - mu H) T = (1 - mu) T0`; isolated posts keep T0.
    pub fn closed_form(&self) -> DVector<f64> {
        let n = self.len();
        let a = DMatrix::identity(n, n) - &self.transition * self.mu;
        let rhs = &self.initial * (1.0 - self.mu);
        let mut t = crate::linalg::solve(&a, &rhs);
        for i in 0..n {
            if self.is_isolated(i) {
                t[i] = self.initial[i];
            }
        }
        t
    }
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub credibility: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `||T(t) - T(t-1)||_inf` per iteration.
    pub steps: Vec<f64>,
}

/// Iterates the transition until successive iterates differ by less than
/// `tol` in the max norm.
pub fn propagate(problem: &PropagationProblem, tol: f64, max_iters: usize) -> Propagation {
    propagate_traced(problem, tol, max_iters, |_| {})
}

/// As [`propagate`], calling `observe` with every iterate (starting at T0).
pub fn propagate_traced(
    problem: &PropagationProblem,
    tol: f64,
    max_iters: usize,
    mut observe: impl FnMut(&DVector<f64>),
) -> Propagation {
    let n = problem.len();
    let mut t = problem.initial.clone();
    let fit = &problem.initial * (1.0 - problem.mu);
    let mut steps = Vec::new();
    observe(&t);
    for iter in 1..=max_iters {
        let mut next = &problem.transition * &t * problem.mu + &fit;
        for i in 0..n {
            if problem.is_isolated(i) {
                next[i] = problem.initial[i];
            }
        }
        let step = (&next - &t).amax();
        t = next;
        observe(&t);
        steps.push(step);
        if step < tol {
            return Propagation { credibility: t, iterations: iter, converged: true, steps };
        }
    }
    Propagation { credibility: t, iterations: max_iters, converged: max_iters == 0 && n == 0, steps }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdict {
    /// Mean post credibility clamped to `[-1, 1]`.
    pub score: f64,
    pub fake: bool,
}

/// Mean credibility; negative means fake.
pub fn news_verdict(credibility: &[f64]) -> Result<Verdict, CredError> {
    if credibility.is_empty() {
        return Err(CredError::Empty);
    }
    let score = (credibility.iter().sum::<f64>() / credibility.len() as f64).clamp(-1.0, 1.0);
    Ok(Verdict { score, fake: score < 0.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PostId {
    Index(u64),
    Name(String),
}

impl fmt::Display for PostId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PostId::Index(i) => write!(f, "{i}"),
            PostId::Name(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemPost {
    pub id: PostId,
    pub t0: f64,
    pub viewpoint_dist: Vec<f64>,
    pub major_component: usize,
}

/// On-disk problem: posts plus `(i, j, same_viewpoint)` links by position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub posts: Vec<ProblemPost>,
    pub links: Vec<(usize, usize, bool)>,
}

impl ProblemFile {
    pub fn to_problem(&self, mu: f64) -> Result<PropagationProblem, CredError> {
        let n = self.posts.len();
        let mut w = DMatrix::zeros(n, n);
        for &(i, j, same) in &self.links {
            if i >= n || j >= n || i == j {
                return Err(CredError::Dimension(format!("link ({i},{j}) invalid for {n} posts")));
            }
            let f = link_weight(&self.posts[i].viewpoint_dist, &self.posts[j].viewpoint_dist, same)?;
            w[(i, j)] = f;
            w[(j, i)] = f;
        }
        for p in &self.posts {
            if !(-1.0..=1.0).contains(&p.t0) {
                return Err(CredError::Dimension(format!("t0 {} of post {} outside [-1,1]", p.t0, p.id)));
            }
        }
        PropagationProblem::new(self.posts.iter().map(|p| p.t0).collect(), w, mu)
    }
}

/// Planted single-news instance: a fraction `support` of `n` posts back the
/// (true) news and are credible; the rest deny it. `T0` is noisy.
pub fn planted_instance(seed: u64, n: usize, support: f64, mu: f64) -> Result<ProblemFile, CredError> {
    let mut rng = seeded_rng(seed);
    let mut posts = Vec::with_capacity(n);
    for i in 0..n {
        let backs = rng.random::<f64>() < support;
        let centre = if backs { 0.3 } else { -0.3 };
        let t0 = (centre + 0.8 * (rng.random::<f64>() - 0.5)).clamp(-1.0, 1.0);
        let main = if backs { 0 } else { 1 };
        let mut dist: Vec<f64> = (0..4).map(|_| 0.2 * rng.random::<f64>()).collect();
        dist[main] += 0.6;
        let s: f64 = dist.iter().sum();
        dist.iter_mut().for_each(|x| *x /= s);
        posts.push(ProblemPost { id: PostId::Index(i as u64), t0, viewpoint_dist: dist, major_component: main });
    }
    let mut links = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < 0.3 {
                links.push((i, j, posts[i].major_component == posts[j].major_component));
            }
        }
    }
    let file = ProblemFile { posts, links };
    file.to_problem(mu)?;
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn link_weight_examples() {
        let p = [0.3, 0.7];
        assert_eq!(link_weight(&p, &p, true).unwrap(), 1.0);
        assert_eq!(link_weight(&p, &p, false).unwrap(), -1.0);
        let w = link_weight(&[1.0, 0.0], &[0.0, 1.0], true).unwrap();
        assert_relative_eq!(w, 1.0 / (2f64.ln() + 1.0), epsilon = 1e-15);
        assert_relative_eq!(w, 0.5906, epsilon = 1e-4);
    }

    #[test]
    fn invalid_distribution_rejected() {
        assert!(link_weight(&[0.5, 0.6], &[0.5, 0.5], true).is_err());
        assert!(link_weight(&[0.5, 0.5], &[1.0], true).is_err());
    }

    #[test]
    fn objective_without_links_is_fitting_term() {
        let p = PropagationProblem::new(vec![0.5, -0.2], DMatrix::zeros(2, 2), 0.3).unwrap();
        let t = DVector::from_vec(vec![0.0, 0.0]);
        assert_relative_eq!(p.objective(&t), 0.7 * (0.25 + 0.04), epsilon = 1e-15);
    }

    #[test]
    fn equal_supporting_pair_has_zero_objective() {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let p = PropagationProblem::new(vec![0.4, 0.4], w, 0.5).unwrap();
        assert_eq!(p.objective(&p.initial), 0.0);
    }

    #[test]
    fn isolated_post_keeps_initial_value() {
        let p = PropagationProblem::new(vec![0.7], DMatrix::zeros(1, 1), 0.5).unwrap();
        let out = propagate(&p, 1e-12, 100);
        assert!(out.converged);
        assert_eq!(out.credibility[0], 0.7);
        assert_eq!(p.closed_form()[0], 0.7);
    }

    #[test]
    fn two_post_linear_solve() {
        // (I - H/2)^-1 * T0/2 with H = [[0,1],[1,0]] gives (2/3, 1/3).
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let p = PropagationProblem::new(vec![1.0, 0.0], w, 0.5).unwrap();
        let out = propagate(&p, 1e-14, 1000);
        assert_relative_eq!(out.credibility[0], 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(out.credibility[1], 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn gauge_flip_on_two_posts() {
        let sup = DMatrix::from_row_slice(2, 2, &[0.0, 0.8, 0.8, 0.0]);
        let opp = -sup.clone();
        let a = propagate(&PropagationProblem::new(vec![0.6, 0.2], sup, 0.4).unwrap(), 1e-14, 1000);
        let b = propagate(&PropagationProblem::new(vec![0.6, -0.2], opp, 0.4).unwrap(), 1e-14, 1000);
        assert_relative_eq!(a.credibility[0], b.credibility[0], epsilon = 1e-12);
        assert_relative_eq!(a.credibility[1], -b.credibility[1], epsilon = 1e-12);
    }

    #[test]
    fn verdict_examples() {
        assert_eq!(news_verdict(&[1.0, 1.0]).unwrap().score, 1.0);
        let v = news_verdict(&[1.0, -1.0]).unwrap();
        assert_eq!(v.score, 0.0);
        assert!(!v.fake);
        assert_eq!(news_verdict(&[]), Err(CredError::Empty));
    }

    #[test]
    fn max_iters_exceeded_is_flagged() {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let p = PropagationProblem::new(vec![1.0, 0.0], w, 0.9).unwrap();
        let out = propagate(&p, 1e-15, 3);
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
    }

    #[test]
    fn bad_mu_rejected() {
        assert_eq!(PropagationProblem::new(vec![0.0], DMatrix::zeros(1, 1), 1.0).unwrap_err(), CredError::BadMu(1.0));
    }
}
