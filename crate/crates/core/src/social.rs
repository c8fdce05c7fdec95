//! Friendship-network embeddings: first/second-order proximity (LINE) and
//! community-preserving nonnegative factorization (MNMF).

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::FriendshipNetwork;
use crate::io::{rows_with_id_csv, seeded_rng};
use crate::linalg::frobenius_sq;

#[derive(Debug, Error, PartialEq)]
pub enum SocialError {
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("dimension must be >= 1")]
    ZeroDim,
    #[error("vectors have different lengths")]
    Dimension,
    #[error("non-finite value in round {0}")]
    NonFinite(usize),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

// -log sigmoid(x), stable.
fn neg_log_sigmoid(x: f64) -> f64 {
    (-x).max(0.0) + (-x.abs()).exp().ln_1p()
}

/// First-order proximity `1 / (1 + exp(-u_i . u_j))`.
pub fn line_p1(ui: &[f64], uj: &[f64]) -> Result<f64, SocialError> {
    if ui.len() != uj.len() {
        return Err(SocialError::Dimension);
    }
    Ok(sigmoid(dot(ui, uj)))
}

/// Softmax over all contexts of `u'_k . u_i`.
pub fn line_p2_all(ui: &[f64], contexts: &DMatrix<f64>) -> Result<Vec<f64>, SocialError> {
    if contexts.ncols() != ui.len() {
        return Err(SocialError::Dimension);
    }
    let scores: Vec<f64> = (0..contexts.nrows())
        .map(|k| contexts.row(k).iter().zip(ui).map(|(a, b)| a * b).sum())
        .collect();
    let mx = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - mx).exp()).collect();
    let z: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / z).collect())
}

/// `p2(u_j | u_i)`.
pub fn line_p2(j: usize, ui: &[f64], contexts: &DMatrix<f64>) -> Result<f64, SocialError> {
    Ok(line_p2_all(ui, contexts)?[j])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineOrder {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LineConfig {
    pub dim: usize,
    pub order: LineOrder,
    pub epochs: usize,
    pub lr: f64,
    /// Weight of the non-edge term in the first-order loss.
    pub negative_weight: f64,
    pub seed: u64,
}

impl Default for LineConfig {
    fn default() -> Self {
        Self { dim: 8, order: LineOrder::First, epochs: 200, lr: 0.05, negative_weight: 1.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineModel {
    pub order: LineOrder,
    /// Node vectors, one row per user.
    pub vectors: DMatrix<f64>,
    /// Context vectors; used by the second-order model only.
    pub contexts: DMatrix<f64>,
}

impl LineModel {
    pub fn p1(&self, i: usize, j: usize) -> f64 {
        sigmoid(self.vectors.row(i).dot(&self.vectors.row(j)))
    }

    pub fn embeddings_csv(&self) -> String {
        rows_with_id_csv(&self.vectors, "dim")
    }
}

/// Training data of the LINE objective.
#[derive(Debug, Clone)]
pub struct LineObjective {
    pub users: usize,
    pub order: LineOrder,
    /// First order: unordered edges `i < j`. Second order: directed edges.
    pub edges: Vec<(usize, usize)>,
    /// First order only: every unordered non-adjacent pair.
    pub negatives: Vec<(usize, usize)>,
    pub negative_weight: f64,
}

impl LineObjective {
    pub fn new(net: &FriendshipNetwork, order: LineOrder, negative_weight: f64) -> Result<Self, SocialError> {
        if net.edges.is_empty() {
            return Err(SocialError::EmptyGraph);
        }
        let m = net.users;
        let (edges, negatives) = match order {
            LineOrder::First => {
                let und: BTreeSet<(usize, usize)> = net.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
                let neg = (0..m)
                    .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
                    .filter(|p| !und.contains(p))
                    .collect();
                (und.into_iter().collect(), neg)
            }
            LineOrder::Second => (net.edges.clone(), Vec::new()),
        };
        Ok(Self { users: m, order, edges, negatives, negative_weight })
    }

    pub fn loss(&self, model: &LineModel) -> f64 {
        let u = &model.vectors;
        match self.order {
            LineOrder::First => {
                let pos: f64 = self.edges.iter().map(|&(i, j)| neg_log_sigmoid(u.row(i).dot(&u.row(j)))).sum();
                let neg: f64 = self.negatives.iter().map(|&(i, j)| neg_log_sigmoid(-u.row(i).dot(&u.row(j)))).sum();
                pos + self.negative_weight * neg
            }
            LineOrder::Second => {
                let scores = u * model.contexts.transpose();
                self.edges
                    .iter()
                    .map(|&(i, j)| {
                        let row = scores.row(i);
                        let mx = row.max();
                        let lse = mx + row.iter().map(|s| (s - mx).exp()).sum::<f64>().ln();
                        lse - row[j]
                    })
                    .sum()
            }
        }
    }

    /// Gradients with respect to (vectors, contexts).
    pub fn gradient(&self, model: &LineModel) -> (DMatrix<f64>, DMatrix<f64>) {
        let u = &model.vectors;
        let mut gu = DMatrix::zeros(u.nrows(), u.ncols());
        let mut gc = DMatrix::zeros(model.contexts.nrows(), model.contexts.ncols());
        match self.order {
            LineOrder::First => {
                let mut add = |i: usize, j: usize, coef: f64| {
                    let ri = u.row(i).into_owned();
                    let rj = u.row(j).into_owned();
                    let mut gi = gu.row_mut(i);
                    gi += rj * coef;
                    let mut gj = gu.row_mut(j);
                    gj += ri * coef;
                };
                for &(i, j) in &self.edges {
                    let s = u.row(i).dot(&u.row(j));
                    add(i, j, -(1.0 - sigmoid(s)));
                }
                for &(i, j) in &self.negatives {
                    let s = u.row(i).dot(&u.row(j));
                    add(i, j, self.negative_weight * sigmoid(s));
                }
            }
            LineOrder::Second => {
                let c = &model.contexts;
                let scores = u * c.transpose();
                for &(i, j) in &self.edges {
                    let row = scores.row(i);
                    let mx = row.max();
                    let exps: Vec<f64> = row.iter().map(|s| (s - mx).exp()).collect();
                    let z: f64 = exps.iter().sum();
                    // d/ds_k = softmax_k - [k == j]
                    for k in 0..c.nrows() {
                        let w = exps[k] / z - if k == j { 1.0 } else { 0.0 };
                        if w == 0.0 {
                            continue;
                        }
                        let ck = c.row(k).into_owned();
                        let ui = u.row(i).into_owned();
                        let mut gi = gu.row_mut(i);
                        gi += ck * w;
                        let mut gk = gc.row_mut(k);
                        gk += ui * w;
                    }
                }
            }
        }
        (gu, gc)
    }
}

fn small_uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    let scale = 1.0 / cols as f64;
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = scale * (rng.random::<f64>() - 0.5);
        }
    }
    m
}

/// Seeded initial model: vectors then contexts.
pub fn line_init(users: usize, cfg: &LineConfig) -> LineModel {
    let mut rng = seeded_rng(cfg.seed);
    let vectors = small_uniform(&mut rng, users, cfg.dim);
    let contexts = match cfg.order {
        LineOrder::First => DMatrix::zeros(0, cfg.dim),
        LineOrder::Second => small_uniform(&mut rng, users, cfg.dim),
    };
    LineModel { order: cfg.order, vectors, contexts }
}

/// Full-batch gradient descent. Returns the model and the loss before
/// every epoch plus the final loss.
pub fn line_fit(net: &FriendshipNetwork, cfg: &LineConfig) -> Result<(LineModel, Vec<f64>), SocialError> {
    if cfg.dim == 0 {
        return Err(SocialError::ZeroDim);
    }
    let obj = LineObjective::new(net, cfg.order, cfg.negative_weight)?;
    let mut model = line_init(net.users, cfg);
    let mut trace = vec![obj.loss(&model)];
    for epoch in 0..cfg.epochs {
        let (gu, gc) = obj.gradient(&model);
        model.vectors -= gu * cfg.lr;
        if cfg.order == LineOrder::Second {
            model.contexts -= gc * cfg.lr;
        }
        let l = obj.loss(&model);
        if !l.is_finite() {
            return Err(SocialError::NonFinite(epoch + 1));
        }
        trace.push(l);
    }
    Ok((model, trace))
}

/// Symmetrized binary adjacency.
pub fn symmetric_adjacency(net: &FriendshipNetwork) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(net.users, net.users);
    for &(i, j) in &net.edges {
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    }
    a
}

/// `A_sym - k k^T / 2e` on the symmetrized graph.
pub fn modularity_matrix(net: &FriendshipNetwork) -> Result<DMatrix<f64>, SocialError> {
    if net.edges.is_empty() {
        return Err(SocialError::EmptyGraph);
    }
    let a = symmetric_adjacency(net);
    let k: Vec<f64> = (0..a.nrows()).map(|i| a.row(i).sum()).collect();
    let two_e: f64 = k.iter().sum();
    Ok(DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - k[i] * k[j] / two_e))
}

/// Newman modularity of a partition.
pub fn modularity(b: &DMatrix<f64>, two_e: f64, labels: &[usize]) -> f64 {
    let mut q = 0.0;
    for i in 0..labels.len() {
        for j in 0..labels.len() {
            if labels[i] == labels[j] {
                q += b[(i, j)];
            }
        }
    }
    q / two_e
}

/// `A_sym + ratio * cos(N(i), N(j))`.
pub fn similarity_matrix(net: &FriendshipNetwork, ratio: f64) -> DMatrix<f64> {
    let a = symmetric_adjacency(net);
    let norms: Vec<f64> = (0..a.nrows()).map(|i| a.row(i).norm()).collect();
    let g = &a * &a;
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
        let cos = if norms[i] > 0.0 && norms[j] > 0.0 { g[(i, j)] / (norms[i] * norms[j]) } else { 0.0 };
        a[(i, j)] + ratio * cos
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MnmfConfig {
    pub k: usize,
    pub communities: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iters: usize,
    pub similarity_ratio: f64,
    pub seed: u64,
}

impl Default for MnmfConfig {
    fn default() -> Self {
        Self { k: 4, communities: 2, alpha: 1.0, beta: 1.0, iters: 300, similarity_ratio: 1.0, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MnmfTerms {
    pub proximity: f64,
    pub community: f64,
    pub modularity: f64,
    pub total: f64,
    pub trace_hth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MnmfModel {
    pub s: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub b_mod: DMatrix<f64>,
    pub alpha: f64,
    pub beta: f64,
}

impl MnmfModel {
    pub fn terms(&self) -> MnmfTerms {
        let proximity = frobenius_sq(&(&self.s - &self.m * self.u.transpose()));
        let community = frobenius_sq(&(&self.h - &self.u * self.c.transpose()));
        let modularity = (self.h.transpose() * &self.b_mod * &self.h).trace();
        MnmfTerms {
            proximity,
            community,
            modularity,
            total: proximity + self.alpha * community - self.beta * modularity,
            trace_hth: (self.h.transpose() * &self.h).trace(),
        }
    }

    /// Community of each node: argmax of its row of `H`, ties to the
    /// smaller index.
    pub fn communities(&self) -> Vec<usize> {
        (0..self.h.nrows())
            .map(|i| {
                let row = self.h.row(i);
                let mut best = 0;
                for c in 1..row.len() {
                    if row[c] > row[best] {
                        best = c;
                    }
                }
                best
            })
            .collect()
    }

    pub fn embeddings_csv(&self) -> String {
        rows_with_id_csv(&self.u, "dim")
    }

    pub fn communities_csv(&self) -> String {
        let mut out = String::from("node,community\n");
        for (i, c) in self.communities().iter().enumerate() {
            out.push_str(&format!("{i},{c}\n"));
        }
        out
    }
}

const EPS: f64 = 1e-12;

fn uniform01(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = rng.random::<f64>();
        }
    }
    m
}

fn multiplicative(x: &mut DMatrix<f64>, num: &DMatrix<f64>, den: &DMatrix<f64>) {
    for ((v, n), d) in x.iter_mut().zip(num.iter()).zip(den.iter()) {
        *v *= n / (d + EPS);
    }
}

/// Unit rows, so `tr(H^T H) = m`. An all-zero row is reset to uniform.
fn normalize_rows(h: &mut DMatrix<f64>) {
    let l = h.ncols() as f64;
    for mut row in h.row_iter_mut() {
        let n = row.norm();
        if n > 0.0 {
            row /= n;
        } else {
            row.fill(1.0 / l.sqrt());
        }
    }
}

/// Multiplicative-update MNMF. Returns the model and one term record per
/// round (initial state first).
pub fn mnmf_fit(net: &FriendshipNetwork, cfg: &MnmfConfig) -> Result<(MnmfModel, Vec<MnmfTerms>), SocialError> {
    if cfg.k == 0 || cfg.communities == 0 {
        return Err(SocialError::ZeroDim);
    }
    let b_mod = modularity_matrix(net)?;
    let s = similarity_matrix(net, cfg.similarity_ratio);
    let n = net.users;
    let mut rng = seeded_rng(cfg.seed);
    let m = uniform01(&mut rng, n, cfg.k);
    let u = uniform01(&mut rng, n, cfg.k);
    let mut h = uniform01(&mut rng, n, cfg.communities);
    let c = uniform01(&mut rng, cfg.communities, cfg.k);
    normalize_rows(&mut h);
    let b_pos = b_mod.map(|x| x.max(0.0));
    let b_neg = b_mod.map(|x| (-x).max(0.0));
    let mut model = MnmfModel { s, m, u, h, c, b_mod, alpha: cfg.alpha, beta: cfg.beta };
    let mut trace = vec![model.terms()];
    let structural = cfg.alpha != 0.0 || cfg.beta != 0.0;
    for round in 1..=cfg.iters {
        let MnmfModel { s, m, u, h, c, .. } = &mut model;
        let num = &*s * &*u;
        let den = &*m * (u.transpose() * &*u);
        multiplicative(m, &num, &den);
        let (num, den) = if cfg.alpha != 0.0 {
            (s.transpose() * &*m + &*h * &*c * cfg.alpha, &*u * (m.transpose() * &*m + c.transpose() * &*c * cfg.alpha))
        } else {
            (s.transpose() * &*m, &*u * (m.transpose() * &*m))
        };
        multiplicative(u, &num, &den);
        if structural {
            let num = h.transpose() * &*u;
            let den = &*c * (u.transpose() * &*u);
            multiplicative(c, &num, &den);
            let num = &*u * c.transpose() * cfg.alpha + &b_pos * &*h * cfg.beta;
            let den = &*h * cfg.alpha + &b_neg * &*h * cfg.beta;
            multiplicative(h, &num, &den);
            normalize_rows(h);
        }
        let t = model.terms();
        if !t.total.is_finite() {
            return Err(SocialError::NonFinite(round));
        }
        trace.push(t);
    }
    Ok((model, trace))
}

/// Plain multiplicative NMF `S ~ M U^T` with the same seeding as
/// [`mnmf_fit`]. Returns `(M, U, proximity trace)`.
pub fn nmf_multiplicative(
    s: &DMatrix<f64>,
    k: usize,
    iters: usize,
    seed: u64,
) -> (DMatrix<f64>, DMatrix<f64>, Vec<f64>) {
    let n = s.nrows();
    let mut rng = seeded_rng(seed);
    let mut m = uniform01(&mut rng, n, k);
    let mut u = uniform01(&mut rng, n, k);
    let mut trace = vec![frobenius_sq(&(s - &m * u.transpose()))];
    for _ in 0..iters {
        let num = s * &u;
        let den = &m * (u.transpose() * &u);
        multiplicative(&mut m, &num, &den);
        let num = s.transpose() * &m;
        let den = &u * (m.transpose() * &m);
        multiplicative(&mut u, &num, &den);
        trace.push(frobenius_sq(&(s - &m * u.transpose())));
    }
    (m, u, trace)
}
