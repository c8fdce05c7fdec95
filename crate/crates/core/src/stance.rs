//! Semi-supervised aggregation of like actions.
//!
//! Users and news carry Beta parameters. A user's score sums the scores of
//! the news it likes, a news item's score sums the scores of its likers,
//! and `q = (alpha - beta) / (alpha + beta)`. Positive news scores mean
//! true news. Labeled news stay pinned at `-1` (fake) or `+1` (true).

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::StanceNetwork;
use crate::io::seeded_rng;

#[derive(Debug, Error, PartialEq)]
pub enum StanceError {
    #[error("news {0} is labeled both fake and true")]
    OverlappingLabels(usize),
    #[error("news {0} out of range")]
    UnknownNews(usize),
    #[error("priors must be positive")]
    BadPrior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Priors {
    pub user_alpha: f64,
    pub user_beta: f64,
    pub news_alpha: f64,
    pub news_beta: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Self { user_alpha: 2.0, user_beta: 2.0, news_alpha: 2.0, news_beta: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
}

impl BetaParams {
    fn from_sums(prior_a: f64, prior_b: f64, pos: f64, neg: f64) -> Self {
        let alpha = prior_a + pos;
        let beta = prior_b + neg;
        Self { alpha, beta, q: (alpha - beta) / (alpha + beta) }
    }

    /// Mean of the Beta distribution.
    pub fn p(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaTable {
    pub users: Vec<BetaParams>,
    pub news: Vec<BetaParams>,
    /// `Some(+1)` true, `Some(-1)` fake, `None` unlabeled.
    pub pinned: Vec<Option<i8>>,
    pub priors: Priors,
    /// Per user: `(news, weight)` likes.
    pub user_likes: Vec<Vec<(usize, f64)>>,
    /// Per news: `(user, weight)` likers.
    pub news_likers: Vec<Vec<(usize, f64)>>,
}

/// Per-like multiplier from stance signs: the mean sign of the user's
/// posts about that news, or 1 when the user posted nothing about it.
pub fn stance_multipliers(net: &StanceNetwork) -> BTreeMap<(usize, usize), f64> {
    let mut author = BTreeMap::new();
    for &(u, p) in &net.posting {
        author.insert(p, u);
    }
    let mut acc: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    for s in &net.stance {
        if let Some(&u) = author.get(&s.post) {
            let e = acc.entry((u, s.news)).or_default();
            e.0 += s.sign as f64;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(k, (sum, n))| (k, sum / n as f64)).collect()
}

/// Builds the table. With `use_signs` each like is scaled by
/// [`stance_multipliers`].
pub fn init(
    net: &StanceNetwork,
    labeled_fake: &BTreeSet<usize>,
    labeled_true: &BTreeSet<usize>,
    priors: Priors,
    use_signs: bool,
) -> Result<BetaTable, StanceError> {
    if [priors.user_alpha, priors.user_beta, priors.news_alpha, priors.news_beta].iter().any(|&x| !(x > 0.0)) {
        return Err(StanceError::BadPrior);
    }
    if let Some(&j) = labeled_fake.intersection(labeled_true).next() {
        return Err(StanceError::OverlappingLabels(j));
    }
    if let Some(&j) = labeled_fake.iter().chain(labeled_true).find(|&&j| j >= net.news) {
        return Err(StanceError::UnknownNews(j));
    }
    let mult = if use_signs { stance_multipliers(net) } else { BTreeMap::new() };
    let mut user_likes = vec![Vec::new(); net.users];
    let mut news_likers = vec![Vec::new(); net.news];
    for &(u, j) in &net.likes {
        let w = mult.get(&(u, j)).copied().unwrap_or(1.0);
        user_likes[u].push((j, w));
        news_likers[j].push((u, w));
    }
    let prior_user = BetaParams::from_sums(priors.user_alpha, priors.user_beta, 0.0, 0.0);
    let pinned: Vec<Option<i8>> = (0..net.news)
        .map(|j| {
            if labeled_fake.contains(&j) {
                Some(-1)
            } else if labeled_true.contains(&j) {
                Some(1)
            } else {
                None
            }
        })
        .collect();
    let news = pinned
        .iter()
        .map(|p| match p {
            Some(s) => BetaParams { alpha: priors.news_alpha, beta: priors.news_beta, q: *s as f64 },
            None => BetaParams { alpha: priors.news_alpha, beta: priors.news_beta, q: 0.0 },
        })
        .collect();
    Ok(BetaTable { users: vec![prior_user; net.users], news, pinned, priors, user_likes, news_likers })
}

fn split_sum(terms: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut pos = 0.0;
    let mut neg = 0.0;
    for x in terms {
        if x > 0.0 {
            pos += x;
        } else if x < 0.0 {
            neg -= x;
        }
    }
    (pos, neg)
}

impl BetaTable {
    /// One synchronous round: every user from the current news scores,
    /// then every unlabeled news item from the new user scores. Returns the
    /// largest score change.
    pub fn step(&mut self) -> f64 {
        let pr = self.priors;
        let mut delta: f64 = 0.0;
        let users: Vec<BetaParams> = self
            .user_likes
            .iter()
            .map(|likes| {
                let (pos, neg) = split_sum(likes.iter().map(|&(j, w)| w * self.news[j].q));
                BetaParams::from_sums(pr.user_alpha, pr.user_beta, pos, neg)
            })
            .collect();
        for (old, new) in self.users.iter().zip(&users) {
            delta = delta.max((old.q - new.q).abs());
        }
        self.users = users;
        for j in 0..self.news.len() {
            if self.pinned[j].is_some() {
                continue;
            }
            let (pos, neg) = split_sum(self.news_likers[j].iter().map(|&(i, w)| w * self.users[i].q));
            let new = BetaParams::from_sums(pr.news_alpha, pr.news_beta, pos, neg);
            delta = delta.max((self.news[j].q - new.q).abs());
            self.news[j] = new;
        }
        delta
    }

    pub fn predict(&self, news: usize) -> Result<(NewsVerdict, f64), StanceError> {
        let q = self.news.get(news).ok_or(StanceError::UnknownNews(news))?.q;
        Ok((if q >= 0.0 { NewsVerdict::True } else { NewsVerdict::Fake }, q))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NewsVerdict {
    Fake,
    True,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterateOutcome {
    pub rounds: usize,
    pub converged: bool,
    pub last_delta: f64,
}

/// Rounds until the largest score change drops below `tol`.
pub fn iterate(table: &mut BetaTable, max_rounds: usize, tol: f64) -> IterateOutcome {
    let mut last_delta = f64::INFINITY;
    for round in 1..=max_rounds {
        last_delta = table.step();
        if last_delta < tol {
            return IterateOutcome { rounds: round, converged: true, last_delta };
        }
    }
    IterateOutcome { rounds: max_rounds, converged: false, last_delta }
}

/// Planted like graph with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedStance {
    pub network: StanceNetwork,
    /// `true` for fake news.
    pub fake: Vec<bool>,
    /// `true` for gullible users.
    pub gullible: Vec<bool>,
    pub labeled_fake: BTreeSet<usize>,
    pub labeled_true: BTreeSet<usize>,
}

/// Half the users are gullible and like fake news with probability
/// `p_like`, the rest like true news with that probability; any cross like
/// happens with probability `p_cross`. A `label_frac` share of each class
/// is labeled.
pub fn planted_stance(seed: u64, users: usize, news: usize, label_frac: f64, p_like: f64, p_cross: f64) -> PlantedStance {
    let mut rng = seeded_rng(seed);
    let mut order: Vec<usize> = (0..news).collect();
    order.shuffle(&mut rng);
    let mut fake = vec![false; news];
    for &j in order.iter().take(news / 2) {
        fake[j] = true;
    }
    let gullible: Vec<bool> = (0..users).map(|i| i < users / 2).collect();
    let mut likes = Vec::new();
    for i in 0..users {
        for j in 0..news {
            let p = if gullible[i] == fake[j] { p_like } else { p_cross };
            if rng.random::<f64>() < p {
                likes.push((i, j));
            }
        }
    }
    let per_class = ((news as f64 * label_frac) / 2.0).round().max(1.0) as usize;
    let mut fakes: Vec<usize> = (0..news).filter(|&j| fake[j]).collect();
    let mut trues: Vec<usize> = (0..news).filter(|&j| !fake[j]).collect();
    fakes.shuffle(&mut rng);
    trues.shuffle(&mut rng);
    PlantedStance {
        network: StanceNetwork { users, posts: 0, news, posting: Vec::new(), stance: Vec::new(), likes },
        fake,
        gullible,
        labeled_fake: fakes.into_iter().take(per_class).collect(),
        labeled_true: trues.into_iter().take(per_class).collect(),
    }
}
