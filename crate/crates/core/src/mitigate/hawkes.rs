//! Multivariate Hawkes processes for fake-news and mitigation activity,
//! and greedy allocation of a mitigation intensity budget.
//!
//! Each process has intensity
//! `lambda_i(t) = mu_i(t) + sum_k alpha[i][j_k] * omega * exp(-omega (t - t_k))`
//! over past events `(t_k, j_k)` of the same process. Exposures are `A F(t)`
//! and `A M(t)` with `A[i][j] = 1` when `i` follows `j`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::stream_rng;
use crate::linalg::spectral_radius;

#[derive(Debug, Error, PartialEq)]
pub enum HawkesError {
    #[error("unstable excitation: spectral radius {0} >= 1")]
    Unstable(f64),
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("stage {stage} beyond the {stages} stages of the horizon")]
    StageOutOfRange { stage: usize, stages: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HawkesCampaign {
    /// `A[i][j] = 1` when user `i` follows user `j`.
    pub adjacency: DMatrix<f64>,
    pub base_fake: DVector<f64>,
    pub base_mitigation: DVector<f64>,
    /// Excitation of user `i` by events of user `j`, shared by both processes.
    pub excitation: DMatrix<f64>,
    pub decay: f64,
    pub horizon: f64,
    pub stages: usize,
}

impl HawkesCampaign {
    pub fn users(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn validate(&self) -> Result<(), HawkesError> {
        let m = self.users();
        if self.adjacency.ncols() != m
            || self.excitation.shape() != (m, m)
            || self.base_fake.len() != m
            || self.base_mitigation.len() != m
        {
            return Err(HawkesError::Invalid("dimension mismatch".into()));
        }
        if !(self.decay > 0.0) || !(self.horizon > 0.0) || self.stages == 0 {
            return Err(HawkesError::Invalid("decay, horizon and stages must be positive".into()));
        }
        let bad = |x: &f64| !(*x >= 0.0 && x.is_finite());
        if self.base_fake.iter().any(bad) || self.base_mitigation.iter().any(bad) || self.excitation.iter().any(bad) {
            return Err(HawkesError::Invalid("intensities and excitations must be nonnegative".into()));
        }
        let rho = spectral_radius(&self.excitation);
        if rho >= 1.0 {
            return Err(HawkesError::Unstable(rho));
        }
        Ok(())
    }

    /// Stage boundaries `tau_0 = 0 < ... < tau_S = horizon`.
    pub fn boundaries(&self) -> Vec<f64> {
        (0..=self.stages).map(|s| self.horizon * s as f64 / self.stages as f64).collect()
    }
}

/// Events of one process in time order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventTrace {
    pub events: Vec<(f64, usize)>,
}

impl EventTrace {
    /// Per-user counts of events at times `<= t`.
    pub fn counts_at(&self, users: usize, t: f64) -> DVector<f64> {
        let mut c = DVector::zeros(users);
        for &(s, u) in &self.events {
            if s <= t {
                c[u] += 1.0;
            }
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignTrace {
    pub fake: EventTrace,
    pub mitigation: EventTrace,
}

/// Intensities of every dimension at time `t` given past events.
fn intensities(base: &[f64], alpha: &DMatrix<f64>, omega: f64, events: &[(f64, usize)], t: f64) -> Vec<f64> {
    let mut lam = base.to_vec();
    for &(s, j) in events {
        if s < t {
            let k = omega * (-omega * (t - s)).exp();
            for (i, l) in lam.iter_mut().enumerate() {
                *l += alpha[(i, j)] * k;
            }
        }
    }
    lam
}

/// Ogata thinning with piecewise-constant base rates. `base(stage)` gives
/// the base vector of each stage; the upper bound is refreshed at every
/// accepted event and stage boundary.
pub fn simulate_process(
    base: &dyn Fn(usize) -> Vec<f64>,
    alpha: &DMatrix<f64>,
    omega: f64,
    boundaries: &[f64],
    rng: &mut ChaCha8Rng,
) -> EventTrace {
    let mut events: Vec<(f64, usize)> = Vec::new();
    let horizon = *boundaries.last().unwrap();
    let mut t = 0.0;
    let mut stage = 0;
    // Decayed excitation per dimension, maintained incrementally.
    let m = alpha.nrows();
    let mut excite = vec![0.0; m];
    let mut last = 0.0;
    let mut mu = base(0);
    while t < horizon {
        let decay = (-omega * (t - last)).exp();
        for e in excite.iter_mut() {
            *e *= decay;
        }
        last = t;
        let bound: f64 = mu.iter().zip(&excite).map(|(a, b)| a + b).sum();
        let stage_end = boundaries[stage + 1];
        if bound <= 0.0 {
            t = stage_end;
        } else {
            let w = Exp::new(bound).expect("positive rate").sample(rng);
            if t + w >= stage_end {
                t = stage_end;
            } else {
                t += w;
                let decay = (-omega * (t - last)).exp();
                for e in excite.iter_mut() {
                    *e *= decay;
                }
                last = t;
                let lam: Vec<f64> = mu.iter().zip(&excite).map(|(a, b)| a + b).collect();
                let total: f64 = lam.iter().sum();
                let u: f64 = rng.random::<f64>() * bound;
                if u < total {
                    let mut acc = 0.0;
                    let mut who = m - 1;
                    for (i, &l) in lam.iter().enumerate() {
                        acc += l;
                        if u < acc {
                            who = i;
                            break;
                        }
                    }
                    events.push((t, who));
                    for (i, e) in excite.iter_mut().enumerate() {
                        *e += alpha[(i, who)] * omega;
                    }
                }
                continue;
            }
        }
        if t >= stage_end && stage + 1 < boundaries.len() - 1 {
            stage += 1;
            mu = base(stage);
        }
    }
    EventTrace { events }
}

/// Simulates both processes. `allocation[stage][user]` is added to the
/// mitigation base rate during that stage. The fake process draws from
/// stream `(seed, 0)`, the mitigation process from `(seed, 1)`.
pub fn hawkes_simulate(
    c: &HawkesCampaign,
    allocation: Option<&[Vec<f64>]>,
    seed: u64,
) -> Result<CampaignTrace, HawkesError> {
    c.validate()?;
    let bounds = c.boundaries();
    if let Some(a) = allocation {
        if a.len() != c.stages || a.iter().any(|s| s.len() != c.users() || s.iter().any(|x| !(*x >= 0.0))) {
            return Err(HawkesError::Invalid("allocation must be stages x users and nonnegative".into()));
        }
    }
    let fake_base: Vec<f64> = c.base_fake.iter().copied().collect();
    let mit_base: Vec<f64> = c.base_mitigation.iter().copied().collect();
    let fake = simulate_process(&|_| fake_base.clone(), &c.excitation, c.decay, &bounds, &mut stream_rng(seed, 0));
    let mitigation = simulate_process(
        &|s| match allocation {
            Some(a) => mit_base.iter().zip(&a[s]).map(|(b, x)| b + x).collect(),
            None => mit_base.clone(),
        },
        &c.excitation,
        c.decay,
        &bounds,
        &mut stream_rng(seed, 1),
    );
    Ok(CampaignTrace { fake, mitigation })
}

/// `(1/m) sum_i (A F)_i (A M)_i` for count vectors.
pub fn exposure_reward(adjacency: &DMatrix<f64>, f: &DVector<f64>, m: &DVector<f64>) -> f64 {
    let ef = adjacency * f;
    let em = adjacency * m;
    ef.component_mul(&em).sum() / adjacency.nrows() as f64
}

/// Reward of `stage`, evaluated at the end of that stage.
pub fn campaign_reward(c: &HawkesCampaign, trace: &CampaignTrace, stage: usize) -> Result<f64, HawkesError> {
    if stage >= c.stages {
        return Err(HawkesError::StageOutOfRange { stage, stages: c.stages });
    }
    let t = c.boundaries()[stage + 1];
    let m = c.users();
    Ok(exposure_reward(&c.adjacency, &trace.fake.counts_at(m, t), &trace.mitigation.counts_at(m, t)))
}

/// Sum of the stage rewards.
pub fn total_reward(c: &HawkesCampaign, trace: &CampaignTrace) -> f64 {
    (0..c.stages).map(|s| campaign_reward(c, trace, s).expect("stage in range")).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CampaignConfig {
    /// Intensity budget per stage.
    pub budget: f64,
    /// Budget pieces allocated one at a time.
    pub chunks: usize,
    pub rollouts: usize,
    pub seed: u64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self { budget: 1.0, chunks: 4, rollouts: 20, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignPlan {
    /// `allocation[stage][user]`.
    pub allocation: Vec<Vec<f64>>,
    /// Mean total reward over the rollouts.
    pub reward: f64,
    pub baseline: f64,
}

/// Mean total reward with rollout `r` seeded by `(seed, r)` streams.
pub fn mean_reward(c: &HawkesCampaign, allocation: Option<&[Vec<f64>]>, rollouts: usize, seed: u64) -> Result<f64, HawkesError> {
    c.validate()?;
    let rewards: Vec<f64> = (0..rollouts as u64)
        .into_par_iter()
        .map(|r| {
            let trace = hawkes_simulate(c, allocation, seed.wrapping_mul(1_000_003).wrapping_add(r)).expect("validated");
            total_reward(c, &trace)
        })
        .collect();
    Ok(rewards.iter().sum::<f64>() / rollouts.max(1) as f64)
}

/// Stage by stage, hands out `budget / chunks` pieces to the candidate
/// with the largest estimated marginal reward (ties to the smaller id).
pub fn greedy_campaign(c: &HawkesCampaign, candidates: &[usize], cfg: &CampaignConfig) -> Result<CampaignPlan, HawkesError> {
    c.validate()?;
    if !(cfg.budget >= 0.0) || cfg.chunks == 0 {
        return Err(HawkesError::Invalid("budget must be >= 0 and chunks >= 1".into()));
    }
    if let Some(&u) = candidates.iter().find(|&&u| u >= c.users()) {
        return Err(HawkesError::Invalid(format!("candidate {u} out of range")));
    }
    let mut alloc = vec![vec![0.0; c.users()]; c.stages];
    let baseline = mean_reward(c, None, cfg.rollouts, cfg.seed)?;
    let mut current = mean_reward(c, Some(&alloc), cfg.rollouts, cfg.seed)?;
    if cfg.budget > 0.0 && !candidates.is_empty() {
        let piece = cfg.budget / cfg.chunks as f64;
        let mut cands = candidates.to_vec();
        cands.sort_unstable();
        cands.dedup();
        for stage in 0..c.stages {
            for _ in 0..cfg.chunks {
                let mut best: Option<(f64, usize)> = None;
                for &u in &cands {
                    let mut trial = alloc.clone();
                    trial[stage][u] += piece;
                    let r = mean_reward(c, Some(&trial), cfg.rollouts, cfg.seed)?;
                    if best.is_none_or(|(b, _)| r > b) {
                        best = Some((r, u));
                    }
                }
                let (r, u) = best.expect("nonempty candidates");
                alloc[stage][u] += piece;
                current = r;
            }
        }
    }
    Ok(CampaignPlan { allocation: alloc, reward: current, baseline })
}

/// Time-rescaled inter-event compensator increments of one process,
/// pooled over users. Under a correct model they are Exp(1).
pub fn compensator_residuals(base: &[f64], alpha: &DMatrix<f64>, omega: f64, trace: &EventTrace) -> Vec<f64> {
    let m = base.len();
    let events = &trace.events;
    // Compensator of dimension i on [0, t].
    let comp = |i: usize, t: f64| -> f64 {
        let mut v = base[i] * t;
        for &(s, j) in events {
            if s < t {
                v += alpha[(i, j)] * (1.0 - (-omega * (t - s)).exp());
            } else {
                break;
            }
        }
        v
    };
    let mut out = Vec::new();
    for i in 0..m {
        let mut prev = 0.0;
        for &(t, j) in events {
            if j == i {
                let c = comp(i, t);
                out.push(c - prev);
                prev = c;
            }
        }
    }
    out
}

/// Kolmogorov-Smirnov distance between the sample and Exp(1).
pub fn ks_exponential(sample: &[f64]) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = 1.0 - (-x).exp();
            (f - k as f64 / n).abs().max(((k + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Largest intensity drop below zero observed at any event of the trace
/// (0 when every intensity is nonnegative).
pub fn min_intensity_at_events(base: &[f64], alpha: &DMatrix<f64>, omega: f64, trace: &EventTrace) -> f64 {
    trace
        .events
        .iter()
        .map(|&(t, _)| intensities(base, alpha, omega, &trace.events, t).into_iter().fold(f64::INFINITY, f64::min))
        .fold(f64::INFINITY, f64::min)
}
