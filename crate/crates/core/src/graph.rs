//! Typed data model for the six network types.
//!
//! Every entity kind uses dense ids `0..count`. Optional display names live
//! in side tables ([`EntityTable::names`]). A friendship edge `(a, b)` means
//! *`a` follows `b`*: `a` sees what `b` shares, so information travels
//! `b -> a` and a diffusion edge `b -> a` is admissible only when `a`
//! follows `b`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{format_f64, seeded_rng, to_canonical_json};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invariant violated in {network}: {invariant}")]
    Invariant {
        network: &'static str,
        invariant: String,
    },
    #[error("degenerate synthetic spec: {0}")]
    DegenerateSpec(String),
}

fn violation(network: &'static str, invariant: impl Into<String>) -> GraphError {
    GraphError::Invariant {
        network,
        invariant: invariant.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityKind {
    User,
    News,
    Post,
    Publisher,
    KnowledgeEntity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityId {
    pub kind: EntityKind,
    pub index: usize,
}

impl EntityId {
    pub fn user(index: usize) -> Self {
        Self { kind: EntityKind::User, index }
    }

    pub fn news(index: usize) -> Self {
        Self { kind: EntityKind::News, index }
    }
}

/// Count plus optional display names for one entity kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EntityTable {
    pub count: usize,
    #[serde(default)]
    pub names: Vec<String>,
}

impl EntityTable {
    pub fn anonymous(count: usize) -> Self {
        Self { count, names: Vec::new() }
    }

    fn validate(&self, network: &'static str) -> Result<(), GraphError> {
        if !self.names.is_empty() && self.names.len() != self.count {
            return Err(violation(network, format!("{} names for {} entities", self.names.len(), self.count)));
        }
        let distinct: BTreeSet<&String> = self.names.iter().collect();
        if distinct.len() != self.names.len() {
            return Err(violation(network, "duplicate entity name"));
        }
        Ok(())
    }
}

/// Posts with optional bag-of-words content over the interaction vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PostTable {
    pub count: usize,
    #[serde(default)]
    pub names: Vec<String>,
    /// Per post, `(word, count)` pairs sorted by word.
    #[serde(default)]
    pub terms: Vec<Vec<(usize, u32)>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FriendshipNetwork {
    pub users: usize,
    /// `(follower, followee)` pairs, sorted and unique.
    pub edges: Vec<(usize, usize)>,
}

impl FriendshipNetwork {
    pub fn new(users: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let set: BTreeSet<(usize, usize)> = edges.into_iter().collect();
        let net = Self { users, edges: set.into_iter().collect() };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        for w in self.edges.windows(2) {
            if w[0] >= w[1] {
                return Err(violation("friendship", "edges must be sorted and unique"));
            }
        }
        for &(a, b) in &self.edges {
            if a == b {
                return Err(violation("friendship", format!("self-loop ({a},{b})")));
            }
            if a >= self.users || b >= self.users {
                return Err(violation("friendship", format!("edge ({a},{b}) endpoint >= {}", self.users)));
            }
        }
        Ok(())
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a, b)).is_ok()
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.users];
        for &(a, _) in &self.edges {
            deg[a] += 1;
        }
        deg
    }
}

/// `A[i][j] = 1` iff `(i, j)` is a friendship edge.
pub fn adjacency(network: &FriendshipNetwork) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(network.users, network.users);
    for &(i, j) in &network.edges {
        a[(i, j)] = 1.0;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionEdge {
    pub src: usize,
    pub dst: usize,
    pub prob: f64,
}

/// One user engaging with a news item through a post at a point in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Engagement {
    pub user: usize,
    pub news: usize,
    pub post: usize,
    pub time: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiffusionNetwork {
    pub users: usize,
    pub edges: Vec<DiffusionEdge>,
    /// Sorted nondecreasing by time.
    pub engagements: Vec<Engagement>,
}

impl DiffusionNetwork {
    pub fn validate(&self) -> Result<(), GraphError> {
        let mut seen = BTreeSet::new();
        for e in &self.edges {
            if e.src == e.dst {
                return Err(violation("diffusion", format!("self-loop ({},{})", e.src, e.dst)));
            }
            if e.src >= self.users || e.dst >= self.users {
                return Err(violation("diffusion", format!("edge ({},{}) endpoint >= {}", e.src, e.dst, self.users)));
            }
            if !(0.0..=1.0).contains(&e.prob) {
                return Err(violation("diffusion", format!("probability {} outside [0,1]", e.prob)));
            }
            if !seen.insert((e.src, e.dst)) {
                return Err(violation("diffusion", format!("duplicate edge ({},{})", e.src, e.dst)));
            }
        }
        for w in self.engagements.windows(2) {
            if w[1].time < w[0].time {
                return Err(violation("diffusion", "engagements not sorted by time"));
            }
        }
        for g in &self.engagements {
            if g.user >= self.users {
                return Err(violation("diffusion", format!("engagement user {} >= {}", g.user, self.users)));
            }
            if !(g.time.is_finite() && g.time >= 0.0) {
                return Err(violation("diffusion", format!("engagement time {} is not a nonnegative real", g.time)));
            }
        }
        Ok(())
    }

    /// Outgoing `(dst, prob)` lists per user, in edge order.
    pub fn out_adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.users];
        for e in &self.edges {
            adj[e.src].push((e.dst, e.prob));
        }
        adj
    }

    /// Engagements of one news item, in time order.
    pub fn engagements_of(&self, news: usize) -> Vec<Engagement> {
        self.engagements.iter().filter(|g| g.news == news).copied().collect()
    }

    /// Admissible diffusion edges for `news`: `u -> v` where `v` follows `u`
    /// and `v` engaged strictly after `u`.
    pub fn admissible_pairs(friendship: &FriendshipNetwork, engagements: &[Engagement]) -> Vec<(usize, usize)> {
        let mut first: BTreeMap<usize, f64> = BTreeMap::new();
        for g in engagements {
            first.entry(g.user).or_insert(g.time);
        }
        let mut out = Vec::new();
        for (&u, &tu) in &first {
            for (&v, &tv) in &first {
                if u != v && tv > tu && friendship.contains(v, u) {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedLink {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Post-level credibility network with signed symmetric link weights,
/// stored once per unordered pair (`i < j`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CredibilityNetwork {
    pub posts: usize,
    pub credibility: Vec<f64>,
    pub links: Vec<SignedLink>,
    pub viewpoints: Vec<Vec<f64>>,
    pub major_component: Vec<usize>,
}

impl CredibilityNetwork {
    pub fn validate(&self) -> Result<(), GraphError> {
        let n = self.posts;
        if self.credibility.len() != n || self.viewpoints.len() != n || self.major_component.len() != n {
            return Err(violation("credibility", "per-post vectors must have one entry per post"));
        }
        for &c in &self.credibility {
            if !(-1.0..=1.0).contains(&c) {
                return Err(violation("credibility", format!("credibility {c} outside [-1,1]")));
            }
        }
        let mut seen = BTreeSet::new();
        for l in &self.links {
            if l.i >= l.j || l.j >= n {
                return Err(violation("credibility", format!("link ({},{}) must satisfy i < j < {n}", l.i, l.j)));
            }
            if !(l.weight.abs() <= 1.0) {
                return Err(violation("credibility", format!("|W_link| = {} exceeds 1", l.weight.abs())));
            }
            if !seen.insert((l.i, l.j)) {
                return Err(violation("credibility", format!("duplicate link ({},{})", l.i, l.j)));
            }
        }
        for (i, p) in self.viewpoints.iter().enumerate() {
            if p.iter().any(|&x| !(x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(violation("credibility", format!("viewpoint distribution of post {i} does not sum to 1")));
            }
            if self.major_component[i] >= p.len() {
                return Err(violation("credibility", format!("major component of post {i} out of range")));
            }
        }
        Ok(())
    }

    /// Dense symmetric `W_link`.
    pub fn weight_matrix(&self) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.posts, self.posts);
        for l in &self.links {
            w[(l.i, l.j)] = l.weight;
            w[(l.j, l.i)] = l.weight;
        }
        w
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub subject: usize,
    pub predicate: String,
    pub object: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeGraph {
    pub entities: usize,
    #[serde(default)]
    pub names: Vec<String>,
    pub triples: Vec<Triple>,
    /// Undirected degree of each entity in the triple graph.
    pub degree: Vec<usize>,
}

impl KnowledgeGraph {
    pub fn new(entities: usize, names: Vec<String>, triples: Vec<Triple>) -> Result<Self, GraphError> {
        let mut kg = Self { entities, names, triples, degree: Vec::new() };
        kg.degree = kg.compute_degrees();
        kg.validate()?;
        Ok(kg)
    }

    fn compute_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.entities];
        for t in &self.triples {
            if t.subject < self.entities && t.object < self.entities {
                deg[t.subject] += 1;
                deg[t.object] += 1;
            }
        }
        deg
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        if !self.names.is_empty() && self.names.len() != self.entities {
            return Err(violation("knowledge", "name table length differs from entity count"));
        }
        for t in &self.triples {
            if t.subject >= self.entities || t.object >= self.entities {
                return Err(violation("knowledge", format!("triple ({},{}) endpoint >= {}", t.subject, t.object, self.entities)));
            }
            if t.subject == t.object {
                return Err(violation("knowledge", format!("self-loop ({},{})", t.subject, t.object)));
            }
        }
        if self.degree != self.compute_degrees() {
            return Err(violation("knowledge", "degree must equal undirected triple degree"));
        }
        Ok(())
    }

    pub fn entity_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Builds a graph from `subject<TAB>predicate<TAB>object` lines.
    pub fn from_tsv(text: &str) -> Result<Self, GraphError> {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut names = Vec::new();
        let mut triples = Vec::new();
        let mut intern = |name: &str, names: &mut Vec<String>| -> usize {
            *index.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                names.len() - 1
            })
        };
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(GraphError::Parse {
                    line: lineno + 1,
                    column: fields.len().min(3) + 1,
                    message: format!("expected 3 tab-separated fields, found {}", fields.len()),
                });
            }
            let s = intern(fields[0], &mut names);
            let o = intern(fields[2], &mut names);
            triples.push(Triple { subject: s, predicate: fields[1].to_string(), object: o });
        }
        Self::new(names.len(), names, triples)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StanceEdge {
    pub post: usize,
    pub news: usize,
    pub sign: i8,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StanceNetwork {
    pub users: usize,
    pub posts: usize,
    pub news: usize,
    /// `user -> post`.
    pub posting: Vec<(usize, usize)>,
    pub stance: Vec<StanceEdge>,
    /// `user -> news` like actions.
    pub likes: Vec<(usize, usize)>,
}

impl StanceNetwork {
    pub fn validate(&self) -> Result<(), GraphError> {
        for &(u, p) in &self.posting {
            if u >= self.users || p >= self.posts {
                return Err(violation("stance", format!("posting edge ({u},{p}) out of range")));
            }
        }
        for s in &self.stance {
            if s.post >= self.posts || s.news >= self.news {
                return Err(violation("stance", format!("stance edge ({},{}) out of range", s.post, s.news)));
            }
            if s.sign != 1 && s.sign != -1 {
                return Err(violation("stance", format!("stance sign {} not in {{+1,-1}}", s.sign)));
            }
        }
        let mut seen = BTreeSet::new();
        for &(u, v) in &self.likes {
            if u >= self.users || v >= self.news {
                return Err(violation("stance", format!("like edge ({u},{v}) out of range")));
            }
            if !seen.insert((u, v)) {
                return Err(violation("stance", format!("duplicate like ({u},{v})")));
            }
        }
        Ok(())
    }

    /// Parses `user<TAB>news` like lines with names densified in order of
    /// first appearance. Returns the network and the user/news name tables.
    pub fn likes_from_tsv(text: &str) -> Result<(Self, Vec<String>, Vec<String>), GraphError> {
        let mut users: Vec<String> = Vec::new();
        let mut news: Vec<String> = Vec::new();
        let mut uidx: HashMap<String, usize> = HashMap::new();
        let mut nidx: HashMap<String, usize> = HashMap::new();
        let mut likes = BTreeSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 2 {
                return Err(GraphError::Parse {
                    line: lineno + 1,
                    column: fields.len().min(2) + 1,
                    message: format!("expected user<TAB>news, found {} fields", fields.len()),
                });
            }
            let u = *uidx.entry(fields[0].to_string()).or_insert_with(|| {
                users.push(fields[0].to_string());
                users.len() - 1
            });
            let v = *nidx.entry(fields[1].to_string()).or_insert_with(|| {
                news.push(fields[1].to_string());
                news.len() - 1
            });
            likes.insert((u, v));
        }
        let net = Self {
            users: users.len(),
            posts: 0,
            news: news.len(),
            posting: Vec::new(),
            stance: Vec::new(),
            likes: likes.into_iter().collect(),
        };
        Ok((net, users, news))
    }
}

/// Publisher/news/user interaction network with the matrices used by the
/// joint embedding.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InteractionNetwork {
    pub publishers: usize,
    pub news: usize,
    pub users: usize,
    pub words: usize,
    /// `publisher -> news`.
    pub publish: Vec<(usize, usize)>,
    /// `news -> user`.
    pub spread: Vec<(usize, usize)>,
    /// Row-major `news x words` counts.
    pub news_words: Vec<Vec<f64>>,
    /// User credibility in `[0,1]`.
    pub credibility: Vec<f64>,
    /// Publisher partisan scores.
    pub partisan: Vec<f64>,
    /// `+1` fake, `-1` true, `0` unlabeled.
    pub labels: Vec<i8>,
}

impl InteractionNetwork {
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.news_words.len() != self.news || self.news_words.iter().any(|r| r.len() != self.words) {
            return Err(violation("interaction", "news-word matrix must be news x words"));
        }
        if self.news_words.iter().flatten().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(violation("interaction", "news-word matrix X must be nonnegative"));
        }
        if self.credibility.len() != self.users {
            return Err(violation("interaction", "credibility vector length must equal user count"));
        }
        if self.credibility.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(violation("interaction", "user credibility outside [0,1]"));
        }
        if self.partisan.len() != self.publishers || self.partisan.iter().any(|x| !x.is_finite()) {
            return Err(violation("interaction", "partisan vector length must equal publisher count"));
        }
        if self.labels.len() != self.news || self.labels.iter().any(|&y| !(-1..=1).contains(&y)) {
            return Err(violation("interaction", "labels must be one of -1, 0, +1 per news"));
        }
        let mut seen = BTreeSet::new();
        for &(p, v) in &self.publish {
            if p >= self.publishers || v >= self.news {
                return Err(violation("interaction", format!("publish edge ({p},{v}) out of range")));
            }
            if !seen.insert((p, v)) {
                return Err(violation("interaction", format!("duplicate publish edge ({p},{v}): B must be binary")));
            }
        }
        let mut seen = BTreeSet::new();
        for &(v, u) in &self.spread {
            if v >= self.news || u >= self.users {
                return Err(violation("interaction", format!("spread edge ({v},{u}) out of range")));
            }
            if !seen.insert((v, u)) {
                return Err(violation("interaction", format!("duplicate spread edge ({v},{u}): W must be binary")));
            }
        }
        Ok(())
    }

    /// News-word matrix `X` (n x t).
    pub fn word_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.news, self.words, |i, j| self.news_words[i][j])
    }

    /// Binary engaging matrix `W` (m x n).
    pub fn engagement_matrix(&self) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.users, self.news);
        for &(v, u) in &self.spread {
            w[(u, v)] = 1.0;
        }
        w
    }

    /// Binary publisher matrix `B` (l x n).
    pub fn publisher_matrix(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.publishers, self.news);
        for &(p, v) in &self.publish {
            b[(p, v)] = 1.0;
        }
        b
    }
}

/// All six networks over shared entity id spaces.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NetworkBundle {
    pub users: EntityTable,
    pub news: EntityTable,
    pub posts: PostTable,
    pub publishers: EntityTable,
    pub friendship: FriendshipNetwork,
    pub diffusion: DiffusionNetwork,
    pub credibility: CredibilityNetwork,
    pub knowledge: KnowledgeGraph,
    pub stance: StanceNetwork,
    pub interaction: InteractionNetwork,
}

impl NetworkBundle {
    /// Checks every per-network invariant and the cross-network id spaces.
    pub fn validate(&self) -> Result<(), GraphError> {
        self.users.validate("users")?;
        self.news.validate("news")?;
        self.publishers.validate("publishers")?;
        if !self.posts.names.is_empty() && self.posts.names.len() != self.posts.count {
            return Err(violation("posts", "name table length differs from post count"));
        }
        if !self.posts.terms.is_empty() {
            if self.posts.terms.len() != self.posts.count {
                return Err(violation("posts", "term table length differs from post count"));
            }
            for row in &self.posts.terms {
                if row.iter().any(|&(w, _)| w >= self.interaction.words) {
                    return Err(violation("posts", "post term outside the interaction vocabulary"));
                }
            }
        }
        let m = self.users.count;
        self.friendship.validate()?;
        self.diffusion.validate()?;
        self.credibility.validate()?;
        self.knowledge.validate()?;
        self.stance.validate()?;
        self.interaction.validate()?;
        let counts = [
            ("friendship", self.friendship.users, m),
            ("diffusion", self.diffusion.users, m),
            ("stance", self.stance.users, m),
            ("interaction", self.interaction.users, m),
            ("stance", self.stance.news, self.news.count),
            ("interaction", self.interaction.news, self.news.count),
            ("stance", self.stance.posts, self.posts.count),
            ("credibility", self.credibility.posts, self.posts.count),
            ("interaction", self.interaction.publishers, self.publishers.count),
        ];
        for (net, got, want) in counts {
            if got != want {
                return Err(violation(net, format!("entity count {got} differs from bundle count {want}")));
            }
        }
        for g in &self.diffusion.engagements {
            if g.news >= self.news.count || g.post >= self.posts.count {
                return Err(violation("diffusion", "engagement references unknown news or post"));
            }
        }
        self.validate_diffusion_admissibility()
    }

    // u -> v needs v following u, and when both engaged with some common
    // news item, v must have engaged strictly later on at least one of them.
    fn validate_diffusion_admissibility(&self) -> Result<(), GraphError> {
        let mut first: HashMap<(usize, usize), f64> = HashMap::new();
        let mut by_user: HashMap<usize, BTreeSet<usize>> = HashMap::new();
        for g in &self.diffusion.engagements {
            first.entry((g.user, g.news)).or_insert(g.time);
            by_user.entry(g.user).or_default().insert(g.news);
        }
        for e in &self.diffusion.edges {
            if !self.friendship.contains(e.dst, e.src) {
                return Err(violation(
                    "diffusion",
                    format!("edge ({}->{}) requires {} to follow {}", e.src, e.dst, e.dst, e.src),
                ));
            }
            let (Some(nu), Some(nv)) = (by_user.get(&e.src), by_user.get(&e.dst)) else {
                continue;
            };
            let common: Vec<usize> = nu.intersection(nv).copied().collect();
            if common.is_empty() {
                continue;
            }
            let later = common.iter().any(|&j| first[&(e.dst, j)] > first[&(e.src, j)]);
            if !later {
                return Err(violation(
                    "diffusion",
                    format!("edge ({}->{}) has no strictly later engagement by {}", e.src, e.dst, e.dst),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BundleFormat {
    Json,
    EdgeTsv,
}

/// Loads and validates a bundle.
///
/// `EdgeTsv` lines are `src<TAB>dst[<TAB>weight]` with `#` comments; a
/// `# users=N` comment declares the user count. Unweighted lines are
/// friendship edges (`src` follows `dst`); weighted lines are diffusion
/// edges `src -> dst` and imply the follower edge `(dst, src)`. Numeric
/// tokens are used as ids directly, anything else is densified by first
/// appearance into the user name table.
pub fn load_networks(path: &Path, format: BundleFormat) -> Result<NetworkBundle, GraphError> {
    let text = fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })?;
    match format {
        BundleFormat::Json => bundle_from_json(&text),
        BundleFormat::EdgeTsv => bundle_from_edge_tsv(&text),
    }
}

pub fn bundle_from_json(text: &str) -> Result<NetworkBundle, GraphError> {
    let bundle: NetworkBundle = serde_json::from_str(text).map_err(|e| GraphError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    bundle.validate()?;
    Ok(bundle)
}

pub fn bundle_from_edge_tsv(text: &str) -> Result<NetworkBundle, GraphError> {
    struct Row<'a> {
        src: &'a str,
        dst: &'a str,
        weight: Option<f64>,
    }
    let mut declared = 0usize;
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("users=") {
                declared = v.trim().parse().map_err(|_| GraphError::Parse {
                    line: lineno + 1,
                    column: 1,
                    message: format!("bad user count {v:?}"),
                })?;
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(GraphError::Parse {
                line: lineno + 1,
                column: 1,
                message: format!("expected src<TAB>dst[<TAB>weight], found {} fields", fields.len()),
            });
        }
        let weight = match fields.get(2) {
            Some(w) => Some(w.trim().parse::<f64>().map_err(|_| GraphError::Parse {
                line: lineno + 1,
                column: 3,
                message: format!("weight {w:?} is not a number"),
            })?),
            None => None,
        };
        rows.push(Row { src: fields[0].trim(), dst: fields[1].trim(), weight });
    }
    let numeric = rows.iter().all(|r| r.src.parse::<usize>().is_ok() && r.dst.parse::<usize>().is_ok());
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut id = |tok: &str| -> usize {
        if numeric {
            tok.parse().unwrap()
        } else {
            let len = index.len();
            let i = *index.entry(tok.to_string()).or_insert(len);
            if i == names.len() {
                names.push(tok.to_string());
            }
            i
        }
    };
    let mut friendship = BTreeSet::new();
    let mut diffusion = Vec::new();
    let mut max_id = None::<usize>;
    for r in &rows {
        let (s, d) = (id(r.src), id(r.dst));
        max_id = max_id.max(Some(s.max(d)));
        if s == d {
            return Err(violation("friendship", format!("self-loop ({s},{d})")));
        }
        match r.weight {
            None => {
                friendship.insert((s, d));
            }
            Some(p) => {
                friendship.insert((d, s));
                diffusion.push(DiffusionEdge { src: s, dst: d, prob: p });
            }
        }
    }
    let users = declared.max(max_id.map_or(0, |x| x + 1)).max(names.len());
    let mut bundle = NetworkBundle {
        users: EntityTable { count: users, names: if numeric { Vec::new() } else { names } },
        ..Default::default()
    };
    if !bundle.users.names.is_empty() && bundle.users.names.len() != users {
        bundle.users.names.clear();
    }
    bundle.friendship = FriendshipNetwork { users, edges: friendship.into_iter().collect() };
    bundle.diffusion = DiffusionNetwork { users, edges: diffusion, engagements: Vec::new() };
    bundle.stance.users = users;
    bundle.interaction.users = users;
    bundle.interaction.credibility = vec![0.5; users];
    bundle.validate()?;
    Ok(bundle)
}

/// Writes a bundle. JSON output is canonical (sorted keys, 17 significant
/// digits) and therefore byte-stable. TSV output keeps the friendship and
/// diffusion edges; friendship edges implied by a diffusion edge are not
/// repeated.
pub fn save_networks(bundle: &NetworkBundle, path: &Path, format: BundleFormat) -> Result<(), GraphError> {
    let bytes = match format {
        BundleFormat::Json => to_canonical_json(bundle).map_err(|e| GraphError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e),
        })?,
        BundleFormat::EdgeTsv => {
            let mut out = format!("# users={}\n", bundle.users.count);
            let name = |i: usize| bundle.users.names.get(i).cloned().unwrap_or_else(|| i.to_string());
            let implied: BTreeSet<(usize, usize)> = bundle.diffusion.edges.iter().map(|e| (e.dst, e.src)).collect();
            for &(a, b) in bundle.friendship.edges.iter().filter(|e| !implied.contains(e)) {
                out.push_str(&format!("{}\t{}\n", name(a), name(b)));
            }
            for e in &bundle.diffusion.edges {
                out.push_str(&format!("{}\t{}\t{}\n", name(e.src), name(e.dst), format_f64(e.prob)));
            }
            out.into_bytes()
        }
    };
    fs::write(path, bytes).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parameters of the planted-partition synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub users: usize,
    pub news: usize,
    pub publishers: usize,
    pub words: usize,
    pub communities: usize,
    pub p_intra: f64,
    pub p_inter: f64,
    pub fake_ratio: f64,
    pub credibility_noise: f64,
    /// Scale of per-(user, news) engagement probabilities.
    pub engagement_rate: f64,
    pub knowledge_entities: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            users: 30,
            news: 20,
            publishers: 4,
            words: 16,
            communities: 2,
            p_intra: 0.3,
            p_inter: 0.02,
            fake_ratio: 0.5,
            credibility_noise: 0.1,
            engagement_rate: 0.3,
            knowledge_entities: 12,
        }
    }
}

impl SyntheticSpec {
    fn validate(&self) -> Result<(), GraphError> {
        if self.users == 0 {
            return Err(GraphError::DegenerateSpec("zero users".into()));
        }
        if self.news == 0 || self.publishers == 0 || self.words == 0 || self.communities == 0 {
            return Err(GraphError::DegenerateSpec("sizes must be at least 1".into()));
        }
        for (name, p) in [
            ("p_intra", self.p_intra),
            ("p_inter", self.p_inter),
            ("fake_ratio", self.fake_ratio),
            ("engagement_rate", self.engagement_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(GraphError::DegenerateSpec(format!("{name} = {p} outside [0,1]")));
            }
        }
        if !(self.credibility_noise >= 0.0 && self.credibility_noise.is_finite()) {
            return Err(GraphError::DegenerateSpec("credibility_noise must be >= 0".into()));
        }
        Ok(())
    }
}

/// Community of user `i` under the contiguous-block assignment.
pub fn planted_community(spec: &SyntheticSpec, user: usize) -> usize {
    user * spec.communities / spec.users
}

/// Deterministic planted-partition bundle. Fake news is preferentially
/// engaged by low-credibility users and uses words from the lower half of
/// the vocabulary; true news from the upper half.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<NetworkBundle, GraphError> {
    spec.validate()?;
    let mut rng = seeded_rng(spec.seed);
    let (m, n, l, t) = (spec.users, spec.news, spec.publishers, spec.words);

    let mut friendship = Vec::new();
    for a in 0..m {
        for b in 0..m {
            if a == b {
                continue;
            }
            let same = planted_community(spec, a) == planted_community(spec, b);
            let p = if same { spec.p_intra } else { spec.p_inter };
            if rng.random::<f64>() < p {
                friendship.push((a, b));
            }
        }
    }
    let friendship = FriendshipNetwork::new(m, friendship)?;

    let credibility: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    let n_fake = ((n as f64) * spec.fake_ratio).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut labels = vec![-1i8; n];
    for &j in order.iter().take(n_fake) {
        labels[j] = 1;
    }

    let half = t / 2;
    let word_range = |fake: bool| -> (usize, usize) {
        if half == 0 {
            (0, t)
        } else if fake {
            (0, half)
        } else {
            (half, t)
        }
    };
    let mut news_words = vec![vec![0.0; t]; n];
    for j in 0..n {
        let (lo, hi) = word_range(labels[j] == 1);
        for _ in 0..30 {
            let w = if rng.random::<f64>() < 0.7 { rng.random_range(lo..hi) } else { rng.random_range(0..t) };
            news_words[j][w] += 1.0;
        }
    }

    let noise = Normal::new(0.0, spec.credibility_noise.max(1e-300)).expect("finite sd");
    let mut engagements = Vec::new();
    let mut post_terms = Vec::new();
    let mut post_sign = Vec::new();
    for j in 0..n {
        let fake = labels[j] == 1;
        let mut engagers = Vec::new();
        for i in 0..m {
            let seen = (credibility[i] + if spec.credibility_noise > 0.0 { noise.sample(&mut rng) } else { 0.0 }).clamp(0.0, 1.0);
            let propensity = if fake { 1.0 - seen } else { seen };
            if rng.random::<f64>() < 2.0 * spec.engagement_rate * propensity {
                engagers.push(i);
            }
        }
        engagers.shuffle(&mut rng);
        let gap = Exp::new(if fake { 3.0 } else { 1.0 }).expect("positive rate");
        let mut time = 0.0;
        for (rank, &i) in engagers.iter().enumerate() {
            if rank > 0 {
                time += gap.sample(&mut rng);
            }
            let (lo, hi) = word_range(fake);
            let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
            for _ in 0..5 {
                let w = if rng.random::<f64>() < 0.7 { rng.random_range(lo..hi) } else { rng.random_range(0..t) };
                *counts.entry(w).or_default() += 1;
            }
            post_terms.push(counts.into_iter().collect::<Vec<_>>());
            // Posts on true news mostly support them; fake news draws denials.
            let support = rng.random::<f64>() < if fake { 0.3 } else { 0.8 };
            post_sign.push(if support { 1i8 } else { -1 });
            engagements.push(Engagement { user: i, news: j, post: engagements.len(), time });
        }
    }
    engagements.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.post.cmp(&b.post)));
    let n_posts = post_terms.len();

    let mut diffusion_edges: Vec<DiffusionEdge> = Vec::new();
    let mut have = BTreeSet::new();
    let mut by_news: Vec<Vec<Engagement>> = vec![Vec::new(); n];
    for g in &engagements {
        by_news[g.news].push(*g);
    }
    for list in &by_news {
        for (u, v) in DiffusionNetwork::admissible_pairs(&friendship, list) {
            if have.insert((u, v)) {
                diffusion_edges.push(DiffusionEdge { src: u, dst: v, prob: rng.random_range(0.05..0.5) });
            }
        }
    }

    let mut publish = Vec::new();
    for j in 0..n {
        let p = if j < l { j } else { rng.random_range(0..l) };
        publish.push((p, j));
    }
    publish.sort_unstable();
    let partisan: Vec<f64> = (0..l)
        .map(|p| {
            let ys: Vec<f64> = publish.iter().filter(|e| e.0 == p).map(|e| labels[e.1] as f64).collect();
            if ys.is_empty() {
                0.0
            } else {
                ys.iter().sum::<f64>() / ys.len() as f64
            }
        })
        .collect();
    let mut spread: Vec<(usize, usize)> = engagements.iter().map(|g| (g.news, g.user)).collect();
    spread.sort_unstable();
    spread.dedup();

    // Credibility network: supporting posts on true news and denying posts
    // on fake news are credible.
    let components = 4;
    let mut viewpoints = Vec::with_capacity(n_posts);
    let mut major = Vec::with_capacity(n_posts);
    let mut cred = vec![0.0; n_posts];
    let mut post_news = vec![0; n_posts];
    for g in &engagements {
        post_news[g.post] = g.news;
    }
    for post in 0..n_posts {
        let main = if post_sign[post] == 1 { 0 } else { 1 } + 2 * rng.random_range(0..2usize);
        let mut dist: Vec<f64> = (0..components).map(|_| 0.1 * rng.random::<f64>()).collect();
        dist[main] += 0.7;
        let s: f64 = dist.iter().sum();
        dist.iter_mut().for_each(|x| *x /= s);
        viewpoints.push(dist);
        major.push(main);
        let truthful = (post_sign[post] == 1) == (labels[post_news[post]] == -1);
        let base = if truthful { 0.5 } else { -0.5 };
        cred[post] = (base + 0.3 * (rng.random::<f64>() - 0.5)).clamp(-1.0, 1.0);
    }
    let mut links = Vec::new();
    for i in 0..n_posts {
        for j in (i + 1)..n_posts {
            if post_news[i] != post_news[j] {
                continue;
            }
            let same = major[i] % 2 == major[j] % 2;
            let w = crate::credprop::link_weight(&viewpoints[i], &viewpoints[j], same)
                .expect("generated distributions are valid");
            links.push(SignedLink { i, j, weight: w });
        }
    }

    let k = spec.knowledge_entities.max(2);
    let mut triples = Vec::new();
    let mut pairs = BTreeSet::new();
    for e in 0..k {
        let o = (e + 1) % k;
        if e != o && pairs.insert((e.min(o), e.max(o))) {
            triples.push(Triple { subject: e, predicate: format!("p{}", e % 4), object: o });
        }
    }
    for _ in 0..k {
        let s = rng.random_range(0..k);
        let o = rng.random_range(0..k);
        if s != o && pairs.insert((s.min(o), s.max(o))) {
            triples.push(Triple { subject: s, predicate: format!("p{}", rng.random_range(0..4)), object: o });
        }
    }
    let knowledge = KnowledgeGraph::new(k, (0..k).map(|e| format!("entity{e}")).collect(), triples)?;

    let mut posting: Vec<(usize, usize)> = engagements.iter().map(|g| (g.user, g.post)).collect();
    posting.sort_unstable();
    let stance_edges: Vec<StanceEdge> = (0..n_posts)
        .map(|p| StanceEdge { post: p, news: post_news[p], sign: post_sign[p] })
        .collect();
    let mut likes: Vec<(usize, usize)> = engagements.iter().map(|g| (g.user, g.news)).collect();
    likes.sort_unstable();
    likes.dedup();

    let bundle = NetworkBundle {
        users: EntityTable::anonymous(m),
        news: EntityTable::anonymous(n),
        posts: PostTable { count: n_posts, names: Vec::new(), terms: post_terms },
        publishers: EntityTable::anonymous(l),
        friendship,
        diffusion: DiffusionNetwork { users: m, edges: diffusion_edges, engagements },
        credibility: CredibilityNetwork {
            posts: n_posts,
            credibility: cred,
            links,
            viewpoints,
            major_component: major,
        },
        knowledge,
        stance: StanceNetwork {
            users: m,
            posts: n_posts,
            news: n,
            posting,
            stance: stance_edges,
            likes,
        },
        interaction: InteractionNetwork {
            publishers: l,
            news: n,
            users: m,
            words: t,
            publish,
            spread,
            news_words,
            credibility,
            partisan,
            labels,
        },
    };
    bundle.validate()?;
    Ok(bundle)
}
