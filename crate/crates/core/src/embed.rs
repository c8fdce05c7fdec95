//! Joint nonnegative embedding of the interaction network.
//!
//! News `D`, words `V`, users `U`, user correlation `T` and the partisan
//! map `Q` minimize
//!
//! ```text
//! a_news ||X - D V^T||^2 + a_user ||Y o (A - U T U^T)||^2
//!   + a_eng sum_ij w_ij ||U_i - D_j||^2 + a_pub ||Bbar D Q - o||^2
//!   + ridge (||D||^2 + ||V||^2 + ||U||^2 + ||T||^2 + ||Q||^2)
//! ```
//!
//! by alternating projected-gradient block steps (D, V, U, T, Q) with
//! backtracking, so the objective never increases between rounds.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{adjacency, FriendshipNetwork, InteractionNetwork};
use crate::io::{format_f64, matrix_to_csv, seeded_rng, stream_rng, write_canonical_json};
use crate::linalg::{clip_nonnegative, frobenius_sq, solve};

#[derive(Debug, Error, PartialEq)]
pub enum EmbedError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("publisher {0} has no published news")]
    EmptyPublisher(usize),
    #[error("label entries must be -1, 0 or +1")]
    BadLabel,
    #[error("invalid config: {0}")]
    Config(String),
    #[error("training set needs at least one labeled example per class")]
    SingleClass,
}

fn dims(what: &str, got: (usize, usize), want: (usize, usize)) -> Result<(), EmbedError> {
    if got != want {
        return Err(EmbedError::Dimension(format!("{what} is {}x{}, expected {}x{}", got.0, got.1, want.0, want.1)));
    }
    Ok(())
}

/// `||X - D V^T||_F^2`.
pub fn eval_news_term(x: &DMatrix<f64>, d: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<f64, EmbedError> {
    dims("V", v.shape(), (x.ncols(), d.ncols()))?;
    dims("D", d.shape(), (x.nrows(), v.ncols()))?;
    Ok(frobenius_sq(&(x - d * v.transpose())))
}

/// `||Y o (A - U T U^T)||_F^2`.
pub fn eval_user_term(
    a: &DMatrix<f64>,
    u: &DMatrix<f64>,
    t: &DMatrix<f64>,
    y: &DMatrix<f64>,
) -> Result<f64, EmbedError> {
    let m = a.nrows();
    dims("A", a.shape(), (m, m))?;
    dims("Y", y.shape(), (m, m))?;
    dims("U", u.shape(), (m, t.nrows()))?;
    dims("T", t.shape(), (u.ncols(), u.ncols()))?;
    let r = (a - u * t * u.transpose()).component_mul(y);
    Ok(frobenius_sq(&r))
}

/// Per-engagement weights: `c_i` for true news, `1 - c_i` for fake news,
/// zero for unlabeled news.
pub fn engagement_coefficients(w: &DMatrix<f64>, c: &[f64], labels: &[i8]) -> Result<DMatrix<f64>, EmbedError> {
    if c.len() != w.nrows() || labels.len() != w.ncols() {
        return Err(EmbedError::Dimension(format!(
            "W is {}x{} but {} credibilities and {} labels",
            w.nrows(),
            w.ncols(),
            c.len(),
            labels.len()
        )));
    }
    if labels.iter().any(|y| !(-1..=1).contains(y)) {
        return Err(EmbedError::BadLabel);
    }
    Ok(DMatrix::from_fn(w.nrows(), w.ncols(), |i, j| {
        let y = labels[j];
        if y == 0 || w[(i, j)] == 0.0 {
            return 0.0;
        }
        let fake = (1.0 + y as f64) / 2.0;
        w[(i, j)] * (c[i] * (1.0 - fake) + (1.0 - c[i]) * fake)
    }))
}

fn weighted_distance(coeff: &DMatrix<f64>, u: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    let mut total = 0.0;
    for i in 0..coeff.nrows() {
        for j in 0..coeff.ncols() {
            let w = coeff[(i, j)];
            if w != 0.0 {
                total += w * (u.row(i) - d.row(j)).norm_squared();
            }
        }
    }
    total
}

/// Credibility-weighted user/news distance; unlabeled news contribute nothing.
pub fn eval_engagement_term(
    w: &DMatrix<f64>,
    c: &[f64],
    labels: &[i8],
    u: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> Result<f64, EmbedError> {
    dims("U", u.shape(), (w.nrows(), d.ncols()))?;
    dims("D", d.shape(), (w.ncols(), u.ncols()))?;
    let coeff = engagement_coefficients(w, c, labels)?;
    Ok(weighted_distance(&coeff, u, d))
}

/// Row-normalized publisher matrix; errors on a publisher with no news.
pub fn normalized_publishers(b: &DMatrix<f64>) -> Result<DMatrix<f64>, EmbedError> {
    let mut out = b.clone();
    for k in 0..b.nrows() {
        let s: f64 = b.row(k).sum();
        if s <= 0.0 {
            return Err(EmbedError::EmptyPublisher(k));
        }
        out.row_mut(k).scale_mut(1.0 / s);
    }
    Ok(out)
}

/// `||Bbar D Q - o||^2`.
pub fn eval_publisher_term(
    b: &DMatrix<f64>,
    d: &DMatrix<f64>,
    q: &DVector<f64>,
    o: &DVector<f64>,
) -> Result<f64, EmbedError> {
    dims("B", b.shape(), (o.len(), d.nrows()))?;
    if q.len() != d.ncols() {
        return Err(EmbedError::Dimension(format!("Q has {} rows, expected {}", q.len(), d.ncols())));
    }
    let bbar = normalized_publishers(b)?;
    Ok((bbar * d * q - o).norm_squared())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedConfig {
    pub dim: usize,
    pub alpha_news: f64,
    pub alpha_user: f64,
    pub alpha_eng: f64,
    pub alpha_pub: f64,
    pub ridge: f64,
    pub max_iters: usize,
    pub rel_tolerance: f64,
    pub seed: u64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            dim: 8,
            alpha_news: 1.0,
            alpha_user: 1.0,
            alpha_eng: 1.0,
            alpha_pub: 1.0,
            ridge: 0.01,
            max_iters: 500,
            rel_tolerance: 1e-6,
            seed: 0,
        }
    }
}

impl EmbedConfig {
    fn validate(&self) -> Result<(), EmbedError> {
        if self.dim == 0 {
            return Err(EmbedError::Config("dim must be >= 1".into()));
        }
        if !(self.rel_tolerance > 0.0) {
            return Err(EmbedError::Config("rel_tolerance must be > 0".into()));
        }
        for (name, v) in [
            ("alpha_news", self.alpha_news),
            ("alpha_user", self.alpha_user),
            ("alpha_eng", self.alpha_eng),
            ("alpha_pub", self.alpha_pub),
            ("ridge", self.ridge),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(EmbedError::Config(format!("{name} must be a nonnegative real")));
            }
        }
        Ok(())
    }
}

/// Latent factors of the joint model.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorBundle {
    /// `D`, n x d.
    pub news: DMatrix<f64>,
    /// `V`, t x d.
    pub words: DMatrix<f64>,
    /// `U`, m x d.
    pub users: DMatrix<f64>,
    /// `T`, d x d.
    pub correlation: DMatrix<f64>,
    /// `Q`, d.
    pub partisan: DVector<f64>,
    /// `Y`, m x m observation mask.
    pub mask: DMatrix<f64>,
}

impl FactorBundle {
    /// Writes `D.csv`, `V.csv`, `U.csv`, `T.csv`, `Q.csv`, `Y.csv` and a
    /// `manifest.json` listing their shapes.
    pub fn write_dir(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let q = DMatrix::from_column_slice(self.partisan.len(), 1, self.partisan.as_slice());
        let mats: [(&str, &DMatrix<f64>); 6] = [
            ("D", &self.news),
            ("V", &self.words),
            ("U", &self.users),
            ("T", &self.correlation),
            ("Q", &q),
            ("Y", &self.mask),
        ];
        let mut manifest = serde_json::Map::new();
        for (name, m) in mats {
            let file = format!("{name}.csv");
            fs::write(dir.join(&file), matrix_to_csv(m))?;
            manifest.insert(
                name.to_string(),
                serde_json::json!({ "file": file, "rows": m.nrows(), "cols": m.ncols() }),
            );
        }
        write_canonical_json(&manifest, &dir.join("manifest.json"))
    }
}

#[derive(Debug, Clone)]
pub struct FactorGradient {
    pub news: DMatrix<f64>,
    pub words: DMatrix<f64>,
    pub users: DMatrix<f64>,
    pub correlation: DMatrix<f64>,
    pub partisan: DVector<f64>,
}

/// Objective value split by term (weights applied).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveTerms {
    pub news: f64,
    pub user: f64,
    pub engagement: f64,
    pub publisher: f64,
    pub ridge: f64,
    pub total: f64,
}

/// The data side of the joint objective, with the negative-sampled mask
/// fixed at construction.
#[derive(Debug, Clone)]
pub struct JointObjective {
    pub x: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub mask: DMatrix<f64>,
    pub coeff: DMatrix<f64>,
    /// Normalized rows of publishers with at least one news item.
    pub bbar: DMatrix<f64>,
    pub partisan: DVector<f64>,
    pub cfg: EmbedConfig,
}

/// `Y = sign(A)` plus as many sampled unobserved off-diagonal pairs.
pub fn negative_sampled_mask(a: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = a.nrows();
    let mut mask = a.map(|x| if x != 0.0 { 1.0 } else { 0.0 });
    let positives = mask.iter().filter(|&&x| x != 0.0).count();
    let zeros: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && a[(i, j)] == 0.0)
        .collect();
    let k = positives.min(zeros.len());
    for idx in sample(rng, zeros.len(), k).into_iter() {
        let (i, j) = zeros[idx];
        mask[(i, j)] = 1.0;
    }
    mask
}

impl JointObjective {
    pub fn new(
        interaction: &InteractionNetwork,
        friendship: &FriendshipNetwork,
        cfg: &EmbedConfig,
    ) -> Result<Self, EmbedError> {
        cfg.validate()?;
        if interaction.users != friendship.users {
            return Err(EmbedError::Dimension(format!(
                "interaction has {} users, friendship {}",
                interaction.users, friendship.users
            )));
        }
        let a = adjacency(friendship);
        let mut rng = stream_rng(cfg.seed, 1);
        let mask = negative_sampled_mask(&a, &mut rng);
        let coeff = engagement_coefficients(
            &interaction.engagement_matrix(),
            &interaction.credibility,
            &interaction.labels,
        )?;
        let b = interaction.publisher_matrix();
        let keep: Vec<usize> = (0..b.nrows()).filter(|&k| b.row(k).sum() > 0.0).collect();
        let kept = DMatrix::from_fn(keep.len(), b.ncols(), |r, j| b[(keep[r], j)]);
        let bbar = normalized_publishers(&kept)?;
        let partisan = DVector::from_iterator(keep.len(), keep.iter().map(|&k| interaction.partisan[k]));
        Ok(Self { x: interaction.word_matrix(), a, mask, coeff, bbar, partisan, cfg: cfg.clone() })
    }

    fn has_publishers(&self) -> bool {
        self.bbar.nrows() > 0
    }

    /// Random nonnegative factors, uniform(0, 0.1), drawn in the order
    /// D, V, U, T, Q.
    pub fn initial_factors(&self, rng: &mut ChaCha8Rng) -> FactorBundle {
        let d = self.cfg.dim;
        let news = uniform_matrix(rng, self.x.nrows(), d);
        let words = uniform_matrix(rng, self.x.ncols(), d);
        let users = uniform_matrix(rng, self.a.nrows(), d);
        let correlation = uniform_matrix(rng, d, d);
        let partisan = DVector::from_fn(d, |_, _| 0.1 * rng.random::<f64>());
        FactorBundle { news, words, users, correlation, partisan, mask: self.mask.clone() }
    }

    fn user_residual(&self, u: &DMatrix<f64>, t: &DMatrix<f64>) -> DMatrix<f64> {
        (u * t * u.transpose() - &self.a).component_mul(&self.mask)
    }

    fn publisher_residual(&self, d: &DMatrix<f64>, q: &DVector<f64>) -> DVector<f64> {
        &self.bbar * d * q - &self.partisan
    }

    pub fn terms(&self, f: &FactorBundle) -> ObjectiveTerms {
        let c = &self.cfg;
        let news = if c.alpha_news != 0.0 { c.alpha_news * frobenius_sq(&(&f.news * f.words.transpose() - &self.x)) } else { 0.0 };
        let user = if c.alpha_user != 0.0 { c.alpha_user * frobenius_sq(&self.user_residual(&f.users, &f.correlation)) } else { 0.0 };
        let engagement = if c.alpha_eng != 0.0 { c.alpha_eng * weighted_distance(&self.coeff, &f.users, &f.news) } else { 0.0 };
        let publisher = if c.alpha_pub != 0.0 && self.has_publishers() {
            c.alpha_pub * self.publisher_residual(&f.news, &f.partisan).norm_squared()
        } else {
            0.0
        };
        let ridge = c.ridge
            * (frobenius_sq(&f.news)
                + frobenius_sq(&f.words)
                + frobenius_sq(&f.users)
                + frobenius_sq(&f.correlation)
                + f.partisan.norm_squared());
        ObjectiveTerms { news, user, engagement, publisher, ridge, total: news + user + engagement + publisher + ridge }
    }

    pub fn value(&self, f: &FactorBundle) -> f64 {
        self.terms(f).total
    }

    pub fn gradient(&self, f: &FactorBundle) -> FactorGradient {
        FactorGradient {
            news: self.grad_news(f),
            words: self.grad_words(f),
            users: self.grad_users(f),
            correlation: self.grad_correlation(f),
            partisan: self.grad_partisan(f),
        }
    }

    fn grad_news(&self, f: &FactorBundle) -> DMatrix<f64> {
        let c = &self.cfg;
        let mut g = news_grad_d(&self.x, &f.news, &f.words) * c.alpha_news;
        if c.alpha_eng != 0.0 {
            g += engagement_grad(&self.coeff.transpose(), &f.news, &f.users) * c.alpha_eng;
        }
        if c.alpha_pub != 0.0 && self.has_publishers() {
            let r = self.publisher_residual(&f.news, &f.partisan);
            g += (self.bbar.transpose() * r * f.partisan.transpose()) * (2.0 * c.alpha_pub);
        }
        g + &f.news * (2.0 * c.ridge)
    }

    fn grad_words(&self, f: &FactorBundle) -> DMatrix<f64> {
        news_grad_v(&self.x, &f.news, &f.words) * self.cfg.alpha_news + &f.words * (2.0 * self.cfg.ridge)
    }

    fn grad_users(&self, f: &FactorBundle) -> DMatrix<f64> {
        let c = &self.cfg;
        let mut g = DMatrix::zeros(f.users.nrows(), f.users.ncols());
        if c.alpha_user != 0.0 {
            let e = self.user_residual(&f.users, &f.correlation).component_mul(&self.mask) * 2.0;
            g += (&e * &f.users * f.correlation.transpose() + e.transpose() * &f.users * &f.correlation) * c.alpha_user;
        }
        if c.alpha_eng != 0.0 {
            g += engagement_grad(&self.coeff, &f.users, &f.news) * c.alpha_eng;
        }
        g + &f.users * (2.0 * c.ridge)
    }

    fn grad_correlation(&self, f: &FactorBundle) -> DMatrix<f64> {
        let c = &self.cfg;
        let mut g = DMatrix::zeros(f.correlation.nrows(), f.correlation.ncols());
        if c.alpha_user != 0.0 {
            let e = self.user_residual(&f.users, &f.correlation).component_mul(&self.mask) * 2.0;
            g += f.users.transpose() * e * &f.users * c.alpha_user;
        }
        g + &f.correlation * (2.0 * c.ridge)
    }

    fn grad_partisan(&self, f: &FactorBundle) -> DVector<f64> {
        let c = &self.cfg;
        let mut g = DVector::zeros(f.partisan.len());
        if c.alpha_pub != 0.0 && self.has_publishers() {
            let r = self.publisher_residual(&f.news, &f.partisan);
            g += f.news.transpose() * self.bbar.transpose() * r * (2.0 * c.alpha_pub);
        }
        g + &f.partisan * (2.0 * c.ridge)
    }

    // Objective restricted to the terms that depend on each block.
    fn block_news(&self, f: &FactorBundle) -> f64 {
        let c = &self.cfg;
        let mut v = 0.0;
        v += c.alpha_news * frobenius_sq(&(&f.news * f.words.transpose() - &self.x));
        if c.alpha_eng != 0.0 {
            v += c.alpha_eng * weighted_distance(&self.coeff, &f.users, &f.news);
        }
        if c.alpha_pub != 0.0 && self.has_publishers() {
            v += c.alpha_pub * self.publisher_residual(&f.news, &f.partisan).norm_squared();
        }
        v + c.ridge * frobenius_sq(&f.news)
    }

    fn block_words(&self, f: &FactorBundle) -> f64 {
        let c = &self.cfg;
        0.0 + c.alpha_news * frobenius_sq(&(&f.news * f.words.transpose() - &self.x)) + c.ridge * frobenius_sq(&f.words)
    }

    fn block_users(&self, f: &FactorBundle) -> f64 {
        let c = &self.cfg;
        let mut v = 0.0;
        if c.alpha_user != 0.0 {
            v += c.alpha_user * frobenius_sq(&self.user_residual(&f.users, &f.correlation));
        }
        if c.alpha_eng != 0.0 {
            v += c.alpha_eng * weighted_distance(&self.coeff, &f.users, &f.news);
        }
        v + c.ridge * frobenius_sq(&f.users)
    }

    fn block_correlation(&self, f: &FactorBundle) -> f64 {
        let c = &self.cfg;
        let mut v = 0.0;
        if c.alpha_user != 0.0 {
            v += c.alpha_user * frobenius_sq(&self.user_residual(&f.users, &f.correlation));
        }
        v + c.ridge * frobenius_sq(&f.correlation)
    }

    fn block_partisan(&self, f: &FactorBundle) -> f64 {
        let c = &self.cfg;
        let mut v = 0.0;
        if c.alpha_pub != 0.0 && self.has_publishers() {
            v += c.alpha_pub * self.publisher_residual(&f.news, &f.partisan).norm_squared();
        }
        v + c.ridge * f.partisan.norm_squared()
    }
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    // Row-major draw order so the sequence does not depend on storage.
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = 0.1 * rng.random::<f64>();
        }
    }
    m
}

fn news_grad_d(x: &DMatrix<f64>, d: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    (d * v.transpose() - x) * v * 2.0
}

fn news_grad_v(x: &DMatrix<f64>, d: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    (d * v.transpose() - x).transpose() * d * 2.0
}

// d/dP of sum_ij w_ij ||P_i - R_j||^2.
fn engagement_grad(w: &DMatrix<f64>, p: &DMatrix<f64>, r: &DMatrix<f64>) -> DMatrix<f64> {
    let row_w = DVector::from_fn(w.nrows(), |i, _| w.row(i).sum());
    let mut g = p.clone();
    for i in 0..p.nrows() {
        g.row_mut(i).scale_mut(row_w[i]);
    }
    (g - w * r) * 2.0
}

/// One projected-gradient step with Armijo backtracking. Returns the new
/// block and its block objective; leaves the block unchanged if no step
/// decreases the objective.
fn block_step(
    current: &DMatrix<f64>,
    grad: &DMatrix<f64>,
    f0: f64,
    step: &mut f64,
    nonneg: bool,
    mut eval: impl FnMut(&DMatrix<f64>) -> f64,
) -> (DMatrix<f64>, f64) {
    if grad.iter().all(|&g| g == 0.0) {
        return (current.clone(), f0);
    }
    let mut eta = (*step * 2.0).min(1e6);
    for _ in 0..80 {
        let mut cand = current - grad * eta;
        if nonneg {
            clip_nonnegative(&mut cand);
        }
        let f = eval(&cand);
        let decrease: f64 = grad.iter().zip(current.iter().zip(cand.iter())).map(|(g, (a, b))| g * (a - b)).sum();
        if f.is_finite() && f <= f0 - 1e-4 * decrease && f <= f0 {
            *step = eta;
            return (cand, f);
        }
        eta *= 0.5;
    }
    *step = eta;
    (current.clone(), f0)
}

#[derive(Debug, Clone, Copy, Default)]
struct StepSizes {
    news: f64,
    words: f64,
    users: f64,
    correlation: f64,
    partisan: f64,
}

impl StepSizes {
    fn unit() -> Self {
        Self { news: 1.0, words: 1.0, users: 1.0, correlation: 1.0, partisan: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct EmbedFit {
    pub factors: FactorBundle,
    /// Objective at initialization followed by one entry per round.
    pub trace: Vec<ObjectiveTerms>,
    pub converged: bool,
}

impl EmbedFit {
    /// Trace as CSV: `iter,news,user,engagement,publisher,ridge,total`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iter,news,user,engagement,publisher,ridge,total\n");
        for (i, t) in self.trace.iter().enumerate() {
            let vals = [t.news, t.user, t.engagement, t.publisher, t.ridge, t.total];
            let cols: Vec<String> = vals.iter().map(|&v| format_f64(v)).collect();
            out.push_str(&format!("{i},{}\n", cols.join(",")));
        }
        out
    }
}

fn converged(prev: f64, cur: f64, tol: f64) -> bool {
    cur == 0.0 || (prev - cur) <= tol * prev.abs()
}

/// Fits the joint model. A block that no data term touches (all of its
/// coupling weights are zero) is set to its exact minimizer, zero, when the
/// ridge is positive.
pub fn fit_joint(
    interaction: &InteractionNetwork,
    friendship: &FriendshipNetwork,
    cfg: &EmbedConfig,
) -> Result<EmbedFit, EmbedError> {
    let obj = JointObjective::new(interaction, friendship, cfg)?;
    let mut rng = seeded_rng(cfg.seed);
    let f = obj.initial_factors(&mut rng);
    Ok(fit_from(&obj, f))
}

/// Runs the alternating optimization from given factors.
pub fn fit_from(obj: &JointObjective, mut f: FactorBundle) -> EmbedFit {
    let c = obj.cfg.clone();
    let mut steps = StepSizes::unit();
    let decoupled = |coupled: bool| !coupled && c.ridge > 0.0;
    let pub_on = c.alpha_pub != 0.0 && obj.has_publishers();
    let news_free = decoupled(c.alpha_news != 0.0 || c.alpha_eng != 0.0 || pub_on);
    let words_free = decoupled(c.alpha_news != 0.0);
    let users_free = decoupled(c.alpha_user != 0.0 || c.alpha_eng != 0.0);
    let corr_free = decoupled(c.alpha_user != 0.0);
    let partisan_free = decoupled(pub_on);
    // Decoupled blocks start at their minimizer so the initial entry of the
    // trace already describes the reduced problem.
    if news_free {
        f.news.fill(0.0);
    }
    if words_free {
        f.words.fill(0.0);
    }
    if users_free {
        f.users.fill(0.0);
    }
    if corr_free {
        f.correlation.fill(0.0);
    }
    if partisan_free {
        f.partisan.fill(0.0);
    }
    let mut trace = vec![obj.terms(&f)];
    let mut done = false;
    for round in 1..=c.max_iters {
        // D
        if news_free {
            f.news.fill(0.0);
        } else {
            let g = obj.grad_news(&f);
            let f0 = obj.block_news(&f);
            let mut probe = f.clone();
            let (next, _) = block_step(&f.news, &g, f0, &mut steps.news, true, |cand| {
                probe.news.copy_from(cand);
                obj.block_news(&probe)
            });
            f.news = next;
        }
        // V
        if words_free {
            f.words.fill(0.0);
        } else {
            let g = obj.grad_words(&f);
            let f0 = obj.block_words(&f);
            let mut probe = f.clone();
            let (next, _) = block_step(&f.words, &g, f0, &mut steps.words, true, |cand| {
                probe.words.copy_from(cand);
                obj.block_words(&probe)
            });
            f.words = next;
        }
        // U
        if users_free {
            f.users.fill(0.0);
        } else {
            let g = obj.grad_users(&f);
            let f0 = obj.block_users(&f);
            let mut probe = f.clone();
            let (next, _) = block_step(&f.users, &g, f0, &mut steps.users, true, |cand| {
                probe.users.copy_from(cand);
                obj.block_users(&probe)
            });
            f.users = next;
        }
        // T
        if corr_free {
            f.correlation.fill(0.0);
        } else {
            let g = obj.grad_correlation(&f);
            let f0 = obj.block_correlation(&f);
            let mut probe = f.clone();
            let (next, _) = block_step(&f.correlation, &g, f0, &mut steps.correlation, true, |cand| {
                probe.correlation.copy_from(cand);
                obj.block_correlation(&probe)
            });
            f.correlation = next;
        }
        // Q (unconstrained)
        if partisan_free {
            f.partisan.fill(0.0);
        } else {
            let g = obj.grad_partisan(&f);
            let gm = DMatrix::from_column_slice(g.len(), 1, g.as_slice());
            let qm = DMatrix::from_column_slice(f.partisan.len(), 1, f.partisan.as_slice());
            let f0 = obj.block_partisan(&f);
            let mut probe = f.clone();
            let (next, _) = block_step(&qm, &gm, f0, &mut steps.partisan, false, |cand| {
                probe.partisan.copy_from(&cand.column(0));
                obj.block_partisan(&probe)
            });
            f.partisan = next.column(0).into_owned();
        }
        trace.push(obj.terms(&f));
        if round >= 2 && converged(trace[round - 1].total, trace[round].total, c.rel_tolerance) {
            done = true;
            break;
        }
    }
    EmbedFit { factors: f, trace, converged: done }
}

/// Result of [`nmf`].
#[derive(Debug, Clone)]
pub struct NmfFit {
    pub news: DMatrix<f64>,
    pub words: DMatrix<f64>,
    /// `||X - D V^T||^2 + ridge (||D||^2 + ||V||^2)` per round, initial first.
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// Plain ridge-regularized NMF of `X` by the same projected-gradient scheme.
pub fn nmf(x: &DMatrix<f64>, dim: usize, ridge: f64, max_iters: usize, rel_tolerance: f64, seed: u64) -> NmfFit {
    let mut rng = seeded_rng(seed);
    let mut d = uniform_matrix(&mut rng, x.nrows(), dim);
    let mut v = uniform_matrix(&mut rng, x.ncols(), dim);
    let objective = |d: &DMatrix<f64>, v: &DMatrix<f64>| {
        frobenius_sq(&(d * v.transpose() - x)) + ridge * (frobenius_sq(d) + frobenius_sq(v))
    };
    let mut step_d = 1.0;
    let mut step_v = 1.0;
    let mut trace = vec![objective(&d, &v)];
    let mut done = false;
    for round in 1..=max_iters {
        let g = news_grad_d(x, &d, &v) + &d * (2.0 * ridge);
        let f0 = frobenius_sq(&(&d * v.transpose() - x)) + ridge * frobenius_sq(&d);
        let (nd, _) = block_step(&d, &g, f0, &mut step_d, true, |cand| {
            frobenius_sq(&(cand * v.transpose() - x)) + ridge * frobenius_sq(cand)
        });
        d = nd;
        let g = news_grad_v(x, &d, &v) + &v * (2.0 * ridge);
        let f0 = frobenius_sq(&(&d * v.transpose() - x)) + ridge * frobenius_sq(&v);
        let (nv, _) = block_step(&v, &g, f0, &mut step_v, true, |cand| {
            frobenius_sq(&(&d * cand.transpose() - x)) + ridge * frobenius_sq(cand)
        });
        v = nv;
        trace.push(objective(&d, &v));
        if round >= 2 && converged(trace[round - 1], trace[round], rel_tolerance) {
            done = true;
            break;
        }
    }
    NmfFit { news: d, words: v, trace, converged: done }
}

/// Ridge least-squares separator with an unpenalized bias.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeClassifier {
    pub weights: DVector<f64>,
    pub bias: f64,
}

impl RidgeClassifier {
    pub fn score(&self, row: &[f64]) -> f64 {
        self.weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }
}

/// Trains on the rows of `features` whose label is nonzero.
pub fn train_classifier(features: &DMatrix<f64>, labels: &[i8], ridge: f64) -> Result<RidgeClassifier, EmbedError> {
    if labels.len() != features.nrows() {
        return Err(EmbedError::Dimension(format!("{} labels for {} rows", labels.len(), features.nrows())));
    }
    if labels.iter().any(|y| !(-1..=1).contains(y)) {
        return Err(EmbedError::BadLabel);
    }
    if !(labels.contains(&1) && labels.contains(&-1)) {
        return Err(EmbedError::SingleClass);
    }
    let rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] != 0).collect();
    let d = features.ncols();
    let design = DMatrix::from_fn(rows.len(), d + 1, |r, j| if j < d { features[(rows[r], j)] } else { 1.0 });
    let target = DVector::from_iterator(rows.len(), rows.iter().map(|&i| labels[i] as f64));
    let mut gram = design.transpose() * &design;
    for j in 0..d {
        gram[(j, j)] += ridge;
    }
    let sol = solve(&gram, &(design.transpose() * target));
    Ok(RidgeClassifier { weights: sol.rows(0, d).into_owned(), bias: sol[d] })
}

/// Sign of the score; ties go to `+1`.
pub fn predict(row: &[f64], model: &RidgeClassifier) -> i8 {
    if model.score(row) >= 0.0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn news_term_examples() {
        let z = DMatrix::zeros(2, 2);
        assert_eq!(eval_news_term(&z, &z, &z).unwrap(), 0.0);
        let i = DMatrix::identity(2, 2);
        assert_eq!(eval_news_term(&i, &i, &i).unwrap(), 0.0);
        assert_eq!(eval_news_term(&i, &i, &z).unwrap(), 2.0);
        assert!(eval_news_term(&i, &DMatrix::zeros(3, 2), &i).is_err());
    }

    #[test]
    fn exact_factorization_scores_zero() {
        let mut rng = seeded_rng(3);
        let d = uniform_matrix(&mut rng, 5, 2);
        let v = uniform_matrix(&mut rng, 4, 2);
        let x = &d * v.transpose();
        assert!(eval_news_term(&x, &d, &v).unwrap() < 1e-10);
    }

    #[test]
    fn user_term_examples() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let u = DMatrix::identity(2, 2);
        let t = DMatrix::zeros(2, 2);
        assert_eq!(eval_user_term(&a, &u, &t, &DMatrix::zeros(2, 2)).unwrap(), 0.0);
        assert_eq!(eval_user_term(&a, &u, &t, &DMatrix::from_element(2, 2, 1.0)).unwrap(), 2.0);
        let t = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(eval_user_term(&a, &u, &t, &DMatrix::from_element(2, 2, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn engagement_term_examples() {
        let w = DMatrix::from_element(1, 1, 1.0);
        let same = DMatrix::from_element(1, 2, 0.5);
        assert_eq!(eval_engagement_term(&DMatrix::zeros(1, 1), &[0.3], &[1], &same, &same).unwrap(), 0.0);
        assert_eq!(eval_engagement_term(&w, &[1.0], &[-1], &same, &same).unwrap(), 0.0);
        let far = DMatrix::from_row_slice(1, 2, &[2.0, 0.5]);
        assert_eq!(eval_engagement_term(&w, &[0.0], &[-1], &same, &far).unwrap(), 0.0);
        let u = DMatrix::from_row_slice(1, 2, &[0.0, 0.0]);
        let d = DMatrix::from_row_slice(1, 2, &[2.0, 0.0]);
        assert_eq!(eval_engagement_term(&w, &[0.25], &[1], &u, &d).unwrap(), 3.0);
        // Unlabeled news contribute nothing.
        assert_eq!(eval_engagement_term(&w, &[0.25], &[0], &u, &d).unwrap(), 0.0);
    }

    #[test]
    fn publisher_term_examples() {
        let b = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let d = DMatrix::from_row_slice(2, 1, &[1.0, 3.0]);
        let q = DVector::from_vec(vec![1.0]);
        assert_eq!(eval_publisher_term(&b, &d, &q, &DVector::from_vec(vec![2.0])).unwrap(), 0.0);
        assert_eq!(eval_publisher_term(&b, &d, &q, &DVector::from_vec(vec![0.0])).unwrap(), 4.0);
        let z = DVector::from_vec(vec![0.0]);
        assert_eq!(eval_publisher_term(&b, &d, &z, &z).unwrap(), 0.0);
        let empty = DMatrix::from_row_slice(1, 2, &[0.0, 0.0]);
        assert_eq!(eval_publisher_term(&empty, &d, &q, &z), Err(EmbedError::EmptyPublisher(0)));
    }

    #[test]
    fn negative_mask_balances_positives() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let mask = negative_sampled_mask(&a, &mut seeded_rng(1));
        assert_eq!(mask.sum(), 4.0);
        for i in 0..3 {
            assert_eq!(mask[(i, i)], 0.0);
        }
        assert_eq!(mask[(0, 1)], 1.0);
    }

    #[test]
    fn zero_data_drives_factors_to_zero() {
        let net = InteractionNetwork {
            publishers: 1,
            news: 3,
            users: 4,
            words: 2,
            news_words: vec![vec![0.0; 2]; 3],
            credibility: vec![0.5; 4],
            partisan: vec![0.0],
            labels: vec![0; 3],
            ..Default::default()
        };
        let fr = FriendshipNetwork::new(4, []).unwrap();
        let cfg = EmbedConfig { dim: 2, max_iters: 2000, rel_tolerance: 1e-12, ..Default::default() };
        let fit = fit_joint(&net, &fr, &cfg).unwrap();
        assert!(fit.trace.last().unwrap().total < 1e-12);
        assert!(fit.factors.news.amax() < 1e-6);
    }

    #[test]
    fn classifier_examples() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let clf = train_classifier(&x, &[1, -1], 0.01).unwrap();
        assert_eq!(predict(&[1.0, 0.0], &clf), 1);
        assert_eq!(predict(&[0.0, 1.0], &clf), -1);
        let dup = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let clf = train_classifier(&dup, &[1, -1], 0.01).unwrap();
        let p: Vec<i8> = (0..2).map(|i| predict(&[dup[(i, 0)], dup[(i, 1)]], &clf)).collect();
        assert_eq!(p[0], p[1]);
        assert_eq!(train_classifier(&x, &[1, 1], 0.01), Err(EmbedError::SingleClass));
    }

    #[test]
    fn tie_predicts_fake() {
        let clf = RidgeClassifier { weights: DVector::from_vec(vec![0.0]), bias: 0.0 };
        assert_eq!(predict(&[5.0], &clf), 1);
    }
}
