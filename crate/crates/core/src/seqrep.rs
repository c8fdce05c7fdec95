//! Temporal engagement features and a small recurrent encoder.
//!
//! Each news item becomes a time-ordered sequence of engagement features
//! `(eta, delta_t, x_u, x_s)`. The encoder embeds every step with a shared
//! affine layer, runs a tanh recurrence and maps the last hidden state to
//! `v = tanh(W_r h_m + b_r)`. Training uses a logistic readout on `v`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Engagement, NetworkBundle, PostTable};
use crate::io::{matrix_to_csv, seeded_rng, stream_rng, write_canonical_json};

#[derive(Debug, Error, PartialEq)]
pub enum SeqError {
    #[error("news {0} has no engagements")]
    NoEngagements(usize),
    #[error("empty sequence")]
    EmptySequence,
    #[error("feature dimension {got} does not match encoder input {want}")]
    Dimension { got: usize, want: usize },
    #[error("training set needs at least one example of each class")]
    SingleClass,
    #[error("non-finite loss at epoch {epoch}, example {example}")]
    NonFinite { epoch: usize, example: usize },
    #[error("invalid dataset line {line}: {message}")]
    Dataset { line: usize, message: String },
}

/// One step of an engagement sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngagementFeature {
    pub eta: u32,
    pub delta_t: f64,
    pub x_u: Vec<f64>,
    pub x_s: Vec<f64>,
}

impl EngagementFeature {
    pub fn dim(&self) -> usize {
        2 + self.x_u.len() + self.x_s.len()
    }

    /// Flattened input; `eta_scale` divides the count (1 keeps it raw).
    pub fn vector(&self, eta_scale: f64) -> DVector<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.push(self.eta as f64 / eta_scale);
        v.push(self.delta_t);
        v.extend_from_slice(&self.x_u);
        v.extend_from_slice(&self.x_s);
        DVector::from_vec(v)
    }
}

/// Flattens a sequence. With `normalize_eta` the count is divided by the
/// sequence length.
pub fn sequence_inputs(features: &[EngagementFeature], normalize_eta: bool) -> Vec<DVector<f64>> {
    let scale = if normalize_eta { features.len().max(1) as f64 } else { 1.0 };
    features.iter().map(|f| f.vector(scale)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub svd_rank: usize,
    pub vocab: usize,
    pub normalize_eta: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { svd_rank: 8, vocab: 64, normalize_eta: false }
    }
}

/// Precomputed user factors and vocabulary shared by all sequences.
#[derive(Debug, Clone)]
pub struct FeatureContext {
    /// Row `i` is `x_u` of user `i`.
    pub user_factors: DMatrix<f64>,
    /// Vocabulary word ids in rank order.
    pub vocab: Vec<usize>,
    post_terms: Vec<Vec<(usize, u32)>>,
}

/// Rows of `W V_r` for the top-`r` right singular vectors, zero-padded
/// when `r` exceeds the rank.
pub fn svd_user_factors(w: &DMatrix<f64>, r: usize) -> DMatrix<f64> {
    let (m, n) = w.shape();
    if m == 0 || n == 0 {
        return DMatrix::zeros(m, r);
    }
    let svd = w.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b))
    });
    let mut vr = DMatrix::zeros(n, r);
    for (c, &k) in order.iter().take(r).enumerate() {
        // Fix the sign so the largest-magnitude entry is positive.
        let row = vt.row(k);
        let pivot = row.iter().cloned().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        let s = if pivot < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            vr[(j, c)] = s * row[j];
        }
    }
    w * vr
}

/// The `k` most frequent corpus words, ties broken by smaller id.
pub fn top_vocabulary(posts: &PostTable, k: usize) -> Vec<usize> {
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for terms in &posts.terms {
        for &(w, c) in terms {
            *counts.entry(w).or_default() += c as u64;
        }
    }
    let mut ranked: Vec<(usize, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.into_iter().take(k).map(|(w, _)| w).collect()
}

impl FeatureContext {
    pub fn new(w_eng: &DMatrix<f64>, posts: &PostTable, cfg: &FeatureConfig) -> Self {
        let vocab = top_vocabulary(posts, cfg.vocab);
        Self { user_factors: svd_user_factors(w_eng, cfg.svd_rank), vocab, post_terms: posts.terms.clone() }
    }

    pub fn from_bundle(bundle: &NetworkBundle, cfg: &FeatureConfig) -> Self {
        Self::new(&bundle.interaction.engagement_matrix(), &bundle.posts, cfg)
    }

    /// Term frequencies of `post` over the vocabulary, normalized by the
    /// post length. Unknown posts give zeros.
    pub fn post_vector(&self, post: usize, k: usize) -> Vec<f64> {
        let mut x = vec![0.0; k];
        let Some(terms) = self.post_terms.get(post) else { return x };
        let total: u32 = terms.iter().map(|&(_, c)| c).sum();
        if total == 0 {
            return x;
        }
        for &(w, c) in terms {
            if let Some(pos) = self.vocab.iter().position(|&v| v == w) {
                x[pos] += c as f64 / total as f64;
            }
        }
        x
    }

    /// Features for engagements already sorted by time.
    pub fn features(&self, engagements: &[Engagement], k: usize) -> Vec<EngagementFeature> {
        let r = self.user_factors.ncols();
        let mut out = Vec::with_capacity(engagements.len());
        let mut prev = None;
        for (i, g) in engagements.iter().enumerate() {
            let x_u = if g.user < self.user_factors.nrows() {
                self.user_factors.row(g.user).iter().copied().collect()
            } else {
                vec![0.0; r]
            };
            let delta_t = prev.map_or(0.0, |p: f64| (g.time - p).max(0.0));
            prev = Some(g.time);
            out.push(EngagementFeature { eta: i as u32 + 1, delta_t, x_u, x_s: self.post_vector(g.post, k) });
        }
        out
    }
}

/// Feature sequence of one news item of the bundle.
pub fn build_features(
    bundle: &NetworkBundle,
    news: usize,
    cfg: &FeatureConfig,
) -> Result<Vec<EngagementFeature>, SeqError> {
    let ctx = FeatureContext::from_bundle(bundle, cfg);
    let mut eng = bundle.diffusion.engagements_of(news);
    if eng.is_empty() {
        return Err(SeqError::NoEngagements(news));
    }
    eng.sort_by(|a, b| a.time.partial_cmp(&b.time).unwrap_or(Ordering::Equal));
    Ok(ctx.features(&eng, cfg.vocab))
}

/// One line of the JSON-lines sequence dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub news_id: String,
    pub label: i8,
    /// `(user, time, post)`.
    pub engagements: Vec<(usize, f64, usize)>,
}

pub fn parse_dataset(text: &str) -> Result<Vec<SequenceRecord>, SeqError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: SequenceRecord =
            serde_json::from_str(line).map_err(|e| SeqError::Dataset { line: i + 1, message: e.to_string() })?;
        if rec.label != 1 && rec.label != -1 {
            return Err(SeqError::Dataset { line: i + 1, message: format!("label {} not in {{-1,+1}}", rec.label) });
        }
        out.push(rec);
    }
    Ok(out)
}

/// Recurrent encoder with a logistic readout used for training.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentEncoder {
    pub embed_w: DMatrix<f64>,
    pub embed_b: DMatrix<f64>,
    pub w_in: DMatrix<f64>,
    pub w_hh: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub w_r: DMatrix<f64>,
    pub b_r: DMatrix<f64>,
    pub readout_w: DMatrix<f64>,
    pub readout_b: DMatrix<f64>,
}

const TENSOR_NAMES: [&str; 9] = ["embed_w", "embed_b", "w_in", "w_hh", "b", "w_r", "b_r", "readout_w", "readout_b"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderShape {
    pub input: usize,
    pub embed: usize,
    pub hidden: usize,
    pub output: usize,
}

impl Default for EncoderShape {
    fn default() -> Self {
        Self { input: 2, embed: 16, hidden: 16, output: 8 }
    }
}

fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = scale * (2.0 * rng.random::<f64>() - 1.0);
        }
    }
    m
}

struct Trace {
    z: Vec<DVector<f64>>,
    h: Vec<DVector<f64>>,
    v: DVector<f64>,
    logit: f64,
}

impl RecurrentEncoder {
    pub fn zeros(shape: EncoderShape) -> Self {
        let EncoderShape { input, embed, hidden, output } = shape;
        Self {
            embed_w: DMatrix::zeros(embed, input),
            embed_b: DMatrix::zeros(embed, 1),
            w_in: DMatrix::zeros(hidden, embed),
            w_hh: DMatrix::zeros(hidden, hidden),
            b: DMatrix::zeros(hidden, 1),
            w_r: DMatrix::zeros(output, hidden),
            b_r: DMatrix::zeros(output, 1),
            readout_w: DMatrix::zeros(1, output),
            readout_b: DMatrix::zeros(1, 1),
        }
    }

    /// Uniform `(-1/sqrt(fan_in), 1/sqrt(fan_in))` weights, zero biases.
    pub fn random(shape: EncoderShape, seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let mut e = Self::zeros(shape);
        let s = |n: usize| 1.0 / (n.max(1) as f64).sqrt();
        e.embed_w = uniform(&mut rng, shape.embed, shape.input, s(shape.input));
        e.w_in = uniform(&mut rng, shape.hidden, shape.embed, s(shape.embed));
        e.w_hh = uniform(&mut rng, shape.hidden, shape.hidden, s(shape.hidden));
        e.w_r = uniform(&mut rng, shape.output, shape.hidden, s(shape.hidden));
        e.readout_w = uniform(&mut rng, 1, shape.output, s(shape.output));
        e
    }

    pub fn shape(&self) -> EncoderShape {
        EncoderShape {
            input: self.embed_w.ncols(),
            embed: self.embed_w.nrows(),
            hidden: self.w_hh.nrows(),
            output: self.w_r.nrows(),
        }
    }

    pub fn tensors(&self) -> [&DMatrix<f64>; 9] {
        [
            &self.embed_w,
            &self.embed_b,
            &self.w_in,
            &self.w_hh,
            &self.b,
            &self.w_r,
            &self.b_r,
            &self.readout_w,
            &self.readout_b,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut DMatrix<f64>; 9] {
        [
            &mut self.embed_w,
            &mut self.embed_b,
            &mut self.w_in,
            &mut self.w_hh,
            &mut self.b,
            &mut self.w_r,
            &mut self.b_r,
            &mut self.readout_w,
            &mut self.readout_b,
        ]
    }

    fn forward(&self, inputs: &[DVector<f64>]) -> Result<Trace, SeqError> {
        if inputs.is_empty() {
            return Err(SeqError::EmptySequence);
        }
        let want = self.embed_w.ncols();
        let mut z = Vec::with_capacity(inputs.len());
        let mut h = vec![DVector::zeros(self.w_hh.nrows())];
        for x in inputs {
            if x.len() != want {
                return Err(SeqError::Dimension { got: x.len(), want });
            }
            let zi = &self.embed_w * x + self.embed_b.column(0);
            let a = &self.w_in * &zi + &self.w_hh * h.last().unwrap() + self.b.column(0);
            h.push(a.map(f64::tanh));
            z.push(zi);
        }
        let v = (&self.w_r * h.last().unwrap() + self.b_r.column(0)).map(f64::tanh);
        let logit = (self.readout_w.row(0) * &v)[0] + self.readout_b[(0, 0)];
        Ok(Trace { z, h, v, logit })
    }

    /// News vector of a flattened sequence.
    pub fn encode_inputs(&self, inputs: &[DVector<f64>]) -> Result<DVector<f64>, SeqError> {
        Ok(self.forward(inputs)?.v)
    }

    /// News vector with raw engagement counts.
    pub fn encode(&self, features: &[EngagementFeature]) -> Result<DVector<f64>, SeqError> {
        self.encode_inputs(&sequence_inputs(features, false))
    }

    /// Readout logit; positive means fake.
    pub fn logit(&self, inputs: &[DVector<f64>]) -> Result<f64, SeqError> {
        Ok(self.forward(inputs)?.logit)
    }

    pub fn predict(&self, inputs: &[DVector<f64>]) -> Result<i8, SeqError> {
        Ok(if self.logit(inputs)? >= 0.0 { 1 } else { -1 })
    }

    /// Logistic loss with label `+1` fake / `-1` true.
    pub fn loss(&self, inputs: &[DVector<f64>], label: i8) -> Result<f64, SeqError> {
        let s = self.forward(inputs)?.logit;
        Ok(logistic_loss(s, label))
    }

    /// Loss and its gradient by backpropagation through time.
    pub fn loss_and_gradient(&self, inputs: &[DVector<f64>], label: i8) -> Result<(f64, RecurrentEncoder), SeqError> {
        let tr = self.forward(inputs)?;
        let target = if label > 0 { 1.0 } else { 0.0 };
        let dlogit = sigmoid(tr.logit) - target;
        let mut g = Self::zeros(self.shape());
        g.readout_w.row_mut(0).copy_from(&(tr.v.transpose() * dlogit));
        g.readout_b[(0, 0)] = dlogit;
        let dv = self.readout_w.row(0).transpose() * dlogit;
        let da_r = dv.component_mul(&tr.v.map(|x| 1.0 - x * x));
        let h_m = tr.h.last().unwrap();
        g.w_r = &da_r * h_m.transpose();
        g.b_r.column_mut(0).copy_from(&da_r);
        let mut dh = self.w_r.transpose() * &da_r;
        for i in (0..inputs.len()).rev() {
            let hi = &tr.h[i + 1];
            let da = dh.component_mul(&hi.map(|x| 1.0 - x * x));
            g.w_in += &da * tr.z[i].transpose();
            g.w_hh += &da * tr.h[i].transpose();
            g.b += &da;
            let dz = self.w_in.transpose() * &da;
            g.embed_w += &dz * inputs[i].transpose();
            g.embed_b += &dz;
            dh = self.w_hh.transpose() * &da;
        }
        Ok((logistic_loss(tr.logit, label), g))
    }

    /// Writes one CSV per tensor plus `manifest.json`.
    pub fn write_dir(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut manifest = serde_json::Map::new();
        for (name, m) in TENSOR_NAMES.iter().zip(self.tensors()) {
            let file = format!("{name}.csv");
            fs::write(dir.join(&file), matrix_to_csv(m))?;
            manifest.insert(name.to_string(), serde_json::json!({"file": file, "rows": m.nrows(), "cols": m.ncols()}));
        }
        write_canonical_json(&manifest, &dir.join("manifest.json"))
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

// log(1 + exp(s)) - t s, evaluated stably.
fn logistic_loss(s: f64, label: i8) -> f64 {
    let t = if label > 0 { 1.0 } else { 0.0 };
    s.max(0.0) + (-s.abs()).exp().ln_1p() - t * s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub clip: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 30, lr: 0.05, clip: 5.0, seed: 0 }
    }
}

/// Per-example SGD over a seeded shuffle, with the global gradient norm
/// clipped at `clip`. Returns the mean loss of each epoch.
pub fn train(
    encoder: &mut RecurrentEncoder,
    data: &[(Vec<DVector<f64>>, i8)],
    cfg: &TrainConfig,
) -> Result<Vec<f64>, SeqError> {
    if !(data.iter().any(|d| d.1 > 0) && data.iter().any(|d| d.1 < 0)) {
        return Err(SeqError::SingleClass);
    }
    let mut rng = stream_rng(cfg.seed, 2);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let (loss, mut g) = encoder.loss_and_gradient(&data[i].0, data[i].1)?;
            if !loss.is_finite() {
                return Err(SeqError::NonFinite { epoch, example: i });
            }
            total += loss;
            let norm = g.tensors().iter().map(|t| t.norm_squared()).sum::<f64>().sqrt();
            let scale = if norm > cfg.clip && norm > 0.0 { cfg.clip / norm } else { 1.0 };
            for (p, d) in encoder.tensors_mut().into_iter().zip(g.tensors_mut()) {
                *p -= &*d * (cfg.lr * scale);
            }
        }
        trace.push(total / data.len() as f64);
    }
    Ok(trace)
}

/// Fraction of correctly classified sequences.
pub fn accuracy(encoder: &RecurrentEncoder, data: &[(Vec<DVector<f64>>, i8)]) -> Result<f64, SeqError> {
    let mut ok = 0usize;
    for (x, y) in data {
        if encoder.predict(x)? == *y {
            ok += 1;
        }
    }
    Ok(ok as f64 / data.len().max(1) as f64)
}

/// Planted timing dataset: fake sequences arrive in bursts (mostly short
/// gaps with occasional long pauses), true sequences at a steady pace.
/// Content and user dimensions carry label-independent noise.
pub fn planted_timing_dataset(seed: u64, per_class: usize, noise_dims: usize) -> Vec<(Vec<EngagementFeature>, i8)> {
    let mut rng = seeded_rng(seed);
    let short = Exp::new(10.0).expect("rate");
    let long = Exp::new(0.2).expect("rate");
    let mut out = Vec::with_capacity(2 * per_class);
    for idx in 0..2 * per_class {
        let label: i8 = if idx % 2 == 0 { 1 } else { -1 };
        let len = rng.random_range(10..=20usize);
        let mut seq = Vec::with_capacity(len);
        for i in 0..len {
            let delta_t = if i == 0 {
                0.0
            } else if label > 0 {
                if rng.random::<f64>() < 0.8 {
                    short.sample(&mut rng)
                } else {
                    long.sample(&mut rng)
                }
            } else {
                rng.random_range(0.5..1.5)
            };
            let x_u = (0..noise_dims).map(|_| rng.random::<f64>()).collect();
            let x_s = (0..noise_dims).map(|_| rng.random::<f64>()).collect();
            seq.push(EngagementFeature { eta: i as u32 + 1, delta_t, x_u, x_s });
        }
        out.push((seq, label));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eng(user: usize, time: f64) -> Engagement {
        Engagement { user, news: 0, post: 0, time }
    }

    #[test]
    fn delta_t_from_timestamps() {
        let ctx = FeatureContext::new(&DMatrix::from_element(3, 1, 1.0), &PostTable::default(), &FeatureConfig::default());
        let f = ctx.features(&[eng(0, 1.0), eng(1, 4.0), eng(2, 9.0)], 4);
        let dt: Vec<f64> = f.iter().map(|x| x.delta_t).collect();
        assert_eq!(dt, vec![0.0, 3.0, 5.0]);
        assert_eq!(f.iter().map(|x| x.eta).collect::<Vec<_>>(), vec![1, 2, 3]);
        let single = ctx.features(&[eng(0, 2.5)], 4);
        assert_eq!((single[0].eta, single[0].delta_t), (1, 0.0));
    }

    #[test]
    fn identical_rows_share_user_features() {
        let w = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let x = svd_user_factors(&w, 3);
        assert_eq!(x.row(0), x.row(1));
        assert_eq!(x.row(1), x.row(2));
        assert_eq!(x.ncols(), 3);
    }

    #[test]
    fn vocabulary_ties_by_id() {
        let posts = PostTable { count: 2, names: vec![], terms: vec![vec![(5, 2), (3, 1)], vec![(3, 1), (7, 1)]] };
        assert_eq!(top_vocabulary(&posts, 2), vec![3, 5]);
    }

    #[test]
    fn zero_encoder_outputs_zero() {
        let shape = EncoderShape { input: 3, embed: 4, hidden: 5, output: 2 };
        let e = RecurrentEncoder::zeros(shape);
        let x = vec![DVector::from_vec(vec![1.0, 2.0, 3.0]); 3];
        assert_eq!(e.encode_inputs(&x).unwrap(), DVector::zeros(2));
        assert_eq!(e.encode_inputs(&[]), Err(SeqError::EmptySequence));
    }

    #[test]
    fn single_step_unrolled() {
        let shape = EncoderShape { input: 2, embed: 3, hidden: 3, output: 2 };
        let mut e = RecurrentEncoder::random(shape, 4);
        e.b = DMatrix::from_element(3, 1, 0.1);
        e.b_r = DMatrix::from_element(2, 1, -0.2);
        let x = DVector::from_vec(vec![0.5, -1.0]);
        let z = &e.embed_w * &x + e.embed_b.column(0);
        let h = (&e.w_in * z + e.b.column(0)).map(f64::tanh);
        let v = (&e.w_r * h + e.b_r.column(0)).map(f64::tanh);
        let got = e.encode_inputs(&[x]).unwrap();
        assert!((got - v).amax() < 1e-15);
    }

    #[test]
    fn order_matters() {
        let shape = EncoderShape { input: 2, embed: 4, hidden: 4, output: 3 };
        let e = RecurrentEncoder::random(shape, 9);
        let a = DVector::from_vec(vec![1.0, 0.0]);
        let b = DVector::from_vec(vec![0.0, 2.0]);
        let v1 = e.encode_inputs(&[a.clone(), b.clone()]).unwrap();
        let v2 = e.encode_inputs(&[b, a]).unwrap();
        assert!((v1 - v2).amax() > 1e-6);
    }

    #[test]
    fn memorizes_one_example() {
        let shape = EncoderShape { input: 2, embed: 4, hidden: 4, output: 3 };
        let mut e = RecurrentEncoder::random(shape, 1);
        let x = vec![DVector::from_vec(vec![1.0, 0.5]), DVector::from_vec(vec![2.0, 0.1])];
        let data = vec![(x.clone(), 1i8), (vec![DVector::from_vec(vec![1.0, 3.0])], -1i8)];
        let cfg = TrainConfig { epochs: 1500, lr: 0.1, clip: 5.0, seed: 0 };
        let trace = train(&mut e, &data, &cfg).unwrap();
        assert!(*trace.last().unwrap() < 0.01);
        assert!(e.loss(&x, 1).unwrap() < 0.01);
    }

    #[test]
    fn single_class_rejected() {
        let mut e = RecurrentEncoder::zeros(EncoderShape { input: 1, embed: 1, hidden: 1, output: 1 });
        let data = vec![(vec![DVector::from_vec(vec![1.0])], 1i8)];
        assert_eq!(train(&mut e, &data, &TrainConfig::default()), Err(SeqError::SingleClass));
    }

    #[test]
    fn dataset_lines_parse() {
        let text = "{\"news_id\":\"n1\",\"label\":1,\"engagements\":[[0,1.0,3]]}\n\n";
        let recs = parse_dataset(text).unwrap();
        assert_eq!(recs[0].engagements, vec![(0, 1.0, 3)]);
        assert!(matches!(parse_dataset("{\"news_id\":\"x\",\"label\":2,\"engagements\":[]}"), Err(SeqError::Dataset { line: 1, .. })));
    }
}
