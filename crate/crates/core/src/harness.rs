//! Command-line harness: configuration, task dispatch and metrics reports.
//!
//! Every task is a pure function of `(config, seed)`. Reports carry the
//! wall time, which is the only field allowed to differ between reruns.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::credprop::{self, PropagationProblem};
use crate::embed::{self, EmbedConfig};
use crate::graph::{self, adjacency, BundleFormat, KnowledgeGraph, NetworkBundle, SyntheticSpec};
use crate::io::{format_f64, matrix_to_csv, stream_rng, write_canonical_json};
use crate::kgcheck::{self, CapacityRule, Claim, PathConfig};
use crate::linalg::spectral_radius;
use crate::mitigate::audience::scale_up_estimate;
use crate::mitigate::hawkes::{greedy_campaign, CampaignConfig, HawkesCampaign};
use crate::mitigate::icm::{greedy_block, simulate, IcmInstance};
use crate::mitigate::leaders::{actions_from_diffusion, coverage, identify_leaders};
use crate::mitigate::provenance::{find_provenance_paths, PathMetric, ProvenanceConfig};
use crate::mitigate::Digraph;
use crate::seqrep::{self, EncoderShape, FeatureConfig, RecurrentEncoder, TrainConfig};
use crate::social::{self, LineConfig, MnmfConfig};
use crate::stance::{self, Priors};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const THREADS_ENV: &str = "MISINFO_NETKIT_THREADS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Internal(_) => 1,
            HarnessError::Validation(_) => 2,
            HarnessError::NonConvergence(_) => 3,
        }
    }
}

fn internal(e: impl fmt::Display) -> HarnessError {
    HarnessError::Internal(e.to_string())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |e| HarnessError::Internal(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Generate,
    DetectEmbed,
    DetectSequence,
    SocialEmbed,
    Credibility,
    Factcheck,
    Stance,
    Provenance,
    Leaders,
    EstimateAudience,
    Block,
    Campaign,
}

impl Task {
    pub const ALL: [Task; 12] = [
        Task::Generate,
        Task::DetectEmbed,
        Task::DetectSequence,
        Task::SocialEmbed,
        Task::Credibility,
        Task::Factcheck,
        Task::Stance,
        Task::Provenance,
        Task::Leaders,
        Task::EstimateAudience,
        Task::Block,
        Task::Campaign,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Generate => "generate",
            Task::DetectEmbed => "detect-embed",
            Task::DetectSequence => "detect-sequence",
            Task::SocialEmbed => "social-embed",
            Task::Credibility => "credibility",
            Task::Factcheck => "factcheck",
            Task::Stance => "stance",
            Task::Provenance => "provenance",
            Task::Leaders => "leaders",
            Task::EstimateAudience => "estimate-audience",
            Task::Block => "block",
            Task::Campaign => "campaign",
        }
    }

    /// Tasks that draw random numbers even on a fixed input bundle.
    pub fn is_stochastic(self) -> bool {
        !matches!(self, Task::Credibility | Task::Leaders)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FactcheckMode {
    #[default]
    Path,
    Flow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectEmbedConfig {
    pub model: EmbedConfig,
    /// Share of each class whose label is visible during training.
    pub label_fraction: f64,
    pub classifier_ridge: f64,
}

impl Default for DetectEmbedConfig {
    fn default() -> Self {
        Self { model: EmbedConfig::default(), label_fraction: 0.7, classifier_ridge: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectSequenceConfig {
    pub features: FeatureConfig,
    /// `input` is overwritten by the feature width.
    pub shape: EncoderShape,
    pub train: TrainConfig,
    pub train_fraction: f64,
}

impl Default for DetectSequenceConfig {
    fn default() -> Self {
        Self {
            features: FeatureConfig { svd_rank: 4, vocab: 8, normalize_eta: true },
            shape: EncoderShape { input: 0, embed: 8, hidden: 8, output: 4 },
            train: TrainConfig { epochs: 20, ..TrainConfig::default() },
            train_fraction: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SocialEmbedConfig {
    pub line: LineConfig,
    pub mnmf: MnmfConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CredibilityConfig {
    pub mu: f64,
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for CredibilityConfig {
    fn default() -> Self {
        Self { mu: 0.5, tolerance: 1e-10, max_iters: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactcheckConfig {
    pub mode: FactcheckMode,
    pub path: PathConfig,
    pub capacity: CapacityRule,
    /// JSON-lines claims; generated from the graph when absent.
    pub claims: Option<PathBuf>,
    /// Knowledge graph TSV; the bundle graph when absent.
    pub kg: Option<PathBuf>,
}

impl Default for FactcheckConfig {
    fn default() -> Self {
        Self {
            mode: FactcheckMode::Path,
            path: PathConfig::default(),
            capacity: CapacityRule::Specificity,
            claims: None,
            kg: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StanceConfig {
    pub priors: Priors,
    pub label_fraction: f64,
    pub use_signs: bool,
    pub max_rounds: usize,
    pub tolerance: f64,
}

impl Default for StanceConfig {
    fn default() -> Self {
        Self { priors: Priors::default(), label_fraction: 0.2, use_signs: true, max_rounds: 500, tolerance: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ProvenanceTaskConfig {
    pub search: ProvenanceConfig,
    /// Infected set; simulated from a random source when absent.
    pub recipients: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeadersConfig {
    pub k: usize,
}

impl Default for LeadersConfig {
    fn default() -> Self {
        Self { k: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockConfig {
    pub k: usize,
    /// Cascade seeds; the highest out-degree user when absent.
    pub seeds: Option<Vec<usize>>,
    pub reps: usize,
}

impl Default for BlockConfig {
    fn default() -> Self {
        Self { k: 2, seeds: None, reps: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignTaskConfig {
    pub plan: CampaignConfig,
    pub base_fake: f64,
    pub base_mitigation: f64,
    /// Target spectral radius of the excitation matrix.
    pub excitation_radius: f64,
    pub decay: f64,
    pub horizon: f64,
    pub stages: usize,
    /// Number of most-followed users eligible for mitigation.
    pub candidates: usize,
}

impl Default for CampaignTaskConfig {
    fn default() -> Self {
        Self {
            plan: CampaignConfig { rollouts: 10, ..CampaignConfig::default() },
            base_fake: 0.1,
            base_mitigation: 0.02,
            excitation_radius: 0.5,
            decay: 1.0,
            horizon: 10.0,
            stages: 2,
            candidates: 4,
        }
    }
}

/// Full experiment configuration. Every field has a default; unknown
/// fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// When present it must agree with the task given on the command line.
    pub task: Option<Task>,
    pub seed: Option<u64>,
    /// Network bundle; a synthetic bundle is generated when absent.
    pub input: Option<PathBuf>,
    pub input_format: Option<BundleFormat>,
    pub output: Option<PathBuf>,
    pub synthetic: SyntheticSpec,
    pub detect_embed: DetectEmbedConfig,
    pub detect_sequence: DetectSequenceConfig,
    pub social_embed: SocialEmbedConfig,
    pub credibility: CredibilityConfig,
    pub factcheck: FactcheckConfig,
    pub stance: StanceConfig,
    pub provenance: ProvenanceTaskConfig,
    pub leaders: LeadersConfig,
    pub block: BlockConfig,
    pub campaign: CampaignTaskConfig,
}

impl ExperimentConfig {
    /// Parses a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)
            .map_err(|e| HarnessError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Validation(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(q) = p {
                if q.is_relative() {
                    *q = base.join(&*q);
                }
            }
        };
        fix(&mut cfg.input);
        fix(&mut cfg.output);
        fix(&mut cfg.factcheck.claims);
        fix(&mut cfg.factcheck.kg);
        Ok(cfg)
    }

    /// Checks the launch invariants for `task` with the effective seed.
    pub fn validate(&self, task: Task, seed: Option<u64>) -> Result<(), HarnessError> {
        if let Some(t) = self.task {
            if t != task {
                return Err(HarnessError::Validation(format!("config field task = {t} but {task} was requested")));
            }
        }
        let mut files: Vec<(&str, &PathBuf)> = Vec::new();
        if let Some(p) = &self.input {
            files.push(("input", p));
        }
        if task == Task::Factcheck {
            if let Some(p) = &self.factcheck.claims {
                files.push(("factcheck.claims", p));
            }
            if let Some(p) = &self.factcheck.kg {
                files.push(("factcheck.kg", p));
            }
        }
        for (field, p) in files {
            if !p.is_file() {
                return Err(HarnessError::Validation(format!("{field}: file not found: {}", p.display())));
            }
        }
        let needs_seed = task.is_stochastic() || self.input.is_none();
        if needs_seed && seed.is_none() {
            return Err(HarnessError::Validation(format!("seed is required for task {task}")));
        }
        let unit = |field: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(HarnessError::Validation(format!("{field} = {v} outside [0,1]")))
            }
        };
        unit("detect_embed.label_fraction", self.detect_embed.label_fraction)?;
        unit("detect_sequence.train_fraction", self.detect_sequence.train_fraction)?;
        unit("stance.label_fraction", self.stance.label_fraction)?;
        if !(self.credibility.mu > 0.0 && self.credibility.mu < 1.0) {
            return Err(HarnessError::Validation(format!("credibility.mu = {} outside (0,1)", self.credibility.mu)));
        }
        if self.campaign.stages == 0 || !(self.campaign.horizon > 0.0) || !(self.campaign.decay > 0.0) {
            return Err(HarnessError::Validation("campaign.stages, campaign.horizon and campaign.decay must be positive".into()));
        }
        if !(self.campaign.excitation_radius >= 0.0 && self.campaign.excitation_radius < 1.0) {
            return Err(HarnessError::Validation("campaign.excitation_radius must lie in [0,1)".into()));
        }
        Ok(())
    }
}

/// Output of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub task: Task,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub wall_time_ms: f64,
    pub converged: bool,
    pub metrics: BTreeMap<String, f64>,
    /// Artifact file names relative to the output directory, sorted.
    pub artifacts: Vec<String>,
}

impl MetricsReport {
    /// `key,value` lines in a fixed order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        out.push_str(&format!("task,{}\n", self.task));
        out.push_str(&format!("seed,{}\n", self.seed.map_or(String::new(), |s| s.to_string())));
        out.push_str(&format!("tool_version,{}\n", self.tool_version));
        out.push_str(&format!("wall_time_ms,{}\n", format_f64(self.wall_time_ms)));
        out.push_str(&format!("converged,{}\n", self.converged));
        for (k, v) in &self.metrics {
            out.push_str(&format!("metrics.{k},{}\n", format_f64(*v)));
        }
        for a in &self.artifacts {
            out.push_str(&format!("artifact,{a}\n"));
        }
        out
    }
}

/// Standard binary detection metrics with fake (`+1`) as positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision and recall are 0 when their denominators are; F1 likewise.
pub fn evaluate(predictions: &[i8], labels: &[i8]) -> Result<DetectionMetrics, HarnessError> {
    if predictions.len() != labels.len() {
        return Err(HarnessError::Validation(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if let Some(y) = predictions.iter().chain(labels).find(|y| **y != 1 && **y != -1) {
        return Err(HarnessError::Validation(format!("label {y} not in {{-1,+1}}")));
    }
    let (mut tp, mut fp, mut fneg, mut tn) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &y) in predictions.iter().zip(labels) {
        match (p, y) {
            (1, 1) => tp += 1,
            (1, _) => fp += 1,
            (_, 1) => fneg += 1,
            _ => tn += 1,
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fneg);
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Ok(DetectionMetrics { accuracy: ratio(tp + tn, predictions.len()), precision, recall, f1 })
}

struct Outputs<'a> {
    dir: &'a Path,
    artifacts: Vec<String>,
    metrics: BTreeMap<String, f64>,
    converged: bool,
}

impl Outputs<'_> {
    fn write(&mut self, name: &str, body: &str) -> Result<(), HarnessError> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(io_err(&path))?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), HarnessError> {
        let path = self.dir.join(name);
        write_canonical_json(value, &path).map_err(io_err(&path))?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    /// Records every file a writer created under `sub`.
    fn dir_artifacts(&mut self, sub: &str) -> Result<(), HarnessError> {
        let path = self.dir.join(sub);
        let mut names: Vec<String> = fs::read_dir(&path)
            .map_err(io_err(&path))?
            .filter_map(|e| e.ok())
            .map(|e| format!("{sub}/{}", e.file_name().to_string_lossy()))
            .collect();
        names.sort();
        self.artifacts.extend(names);
        Ok(())
    }

    fn metric(&mut self, name: &str, v: f64) {
        self.metrics.insert(name.to_string(), v);
    }

    fn detection(&mut self, m: &DetectionMetrics) {
        self.metric("accuracy", m.accuracy);
        self.metric("precision", m.precision);
        self.metric("recall", m.recall);
        self.metric("f1", m.f1);
    }
}

fn load_bundle(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<NetworkBundle, HarnessError> {
    match &cfg.input {
        Some(p) => graph::load_networks(p, cfg.input_format.unwrap_or(BundleFormat::Json))
            .map_err(|e| HarnessError::Validation(format!("input {}: {e}", p.display()))),
        None => {
            let mut spec = cfg.synthetic.clone();
            spec.seed = seed.unwrap_or(spec.seed);
            graph::generate_synthetic(&spec).map_err(|e| HarnessError::Validation(format!("synthetic: {e}")))
        }
    }
}

/// Picks `round(frac * size)` members of each class, at least one when the
/// class is nonempty and `frac > 0`.
fn stratified_pick(labels: &[i8], frac: f64, rng: &mut impl Rng) -> BTreeSet<usize> {
    let mut picked = BTreeSet::new();
    for class in [1i8, -1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(rng);
        let mut take = (frac * idx.len() as f64).round() as usize;
        if frac > 0.0 && !idx.is_empty() {
            take = take.max(1);
        }
        picked.extend(idx.into_iter().take(take));
    }
    picked
}

/// Runs `task` and writes the report plus artifacts into `out`.
pub fn run(
    task: Task,
    cfg: &ExperimentConfig,
    seed: Option<u64>,
    out: &Path,
    format: ReportFormat,
) -> Result<MetricsReport, HarnessError> {
    let seed = seed.or(cfg.seed);
    cfg.validate(task, seed)?;
    let start = Instant::now();
    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut o = Outputs { dir: out, artifacts: Vec::new(), metrics: BTreeMap::new(), converged: true };
    let bundle = load_bundle(cfg, seed)?;
    let s = seed.unwrap_or(0);
    match task {
        Task::Generate => task_generate(&bundle, &mut o)?,
        Task::DetectEmbed => task_detect_embed(&bundle, cfg, s, &mut o)?,
        Task::DetectSequence => task_detect_sequence(&bundle, cfg, s, &mut o)?,
        Task::SocialEmbed => task_social_embed(&bundle, cfg, s, &mut o)?,
        Task::Credibility => task_credibility(&bundle, cfg, &mut o)?,
        Task::Factcheck => task_factcheck(&bundle, cfg, s, &mut o)?,
        Task::Stance => task_stance(&bundle, cfg, s, &mut o)?,
        Task::Provenance => task_provenance(&bundle, cfg, s, &mut o)?,
        Task::Leaders => task_leaders(&bundle, cfg, &mut o)?,
        Task::EstimateAudience => task_estimate_audience(&bundle, cfg, s, &mut o)?,
        Task::Block => task_block(&bundle, cfg, s, &mut o)?,
        Task::Campaign => task_campaign(&bundle, cfg, s, &mut o)?,
    }
    o.artifacts.sort();
    let mut report = MetricsReport {
        task,
        seed,
        tool_version: TOOL_VERSION.to_string(),
        wall_time_ms: 0.0,
        converged: o.converged,
        metrics: o.metrics,
        artifacts: o.artifacts,
    };
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    if let Some((k, _)) = report.metrics.iter().find(|(_, v)| !v.is_finite()) {
        return Err(HarnessError::Internal(format!("metric {k} is not finite")));
    }
    match format {
        ReportFormat::Json => {
            let path = out.join("report.json");
            write_canonical_json(&report, &path).map_err(io_err(&path))?;
        }
        ReportFormat::Csv => {
            let path = out.join("report.csv");
            fs::write(&path, report.to_csv()).map_err(io_err(&path))?;
        }
    }
    if !report.converged && matches!(task, Task::Credibility | Task::Stance) {
        return Err(HarnessError::NonConvergence(format!("{task} did not reach its tolerance")));
    }
    Ok(report)
}

fn task_generate(bundle: &NetworkBundle, o: &mut Outputs) -> Result<(), HarnessError> {
    let path = o.dir.join("bundle.json");
    graph::save_networks(bundle, &path, BundleFormat::Json).map_err(internal)?;
    o.artifacts.push("bundle.json".into());
    o.metric("users", bundle.users.count as f64);
    o.metric("news", bundle.news.count as f64);
    o.metric("posts", bundle.posts.count as f64);
    o.metric("friendship_edges", bundle.friendship.edges.len() as f64);
    o.metric("diffusion_edges", bundle.diffusion.edges.len() as f64);
    o.metric("engagements", bundle.diffusion.engagements.len() as f64);
    o.metric("triples", bundle.knowledge.triples.len() as f64);
    Ok(())
}

fn task_detect_embed(bundle: &NetworkBundle, cfg: &ExperimentConfig, seed: u64, o: &mut Outputs) -> Result<(), HarnessError> {
    let c = &cfg.detect_embed;
    let labels = &bundle.interaction.labels;
    let visible = stratified_pick(labels, c.label_fraction, &mut stream_rng(seed, 10));
    let mut masked = bundle.interaction.clone();
    for (j, y) in masked.labels.iter_mut().enumerate() {
        if !visible.contains(&j) {
            *y = 0;
        }
    }
    let mut model = c.model.clone();
    model.seed = seed;
    let fit = embed::fit_joint(&masked, &bundle.friendship, &model).map_err(|e| HarnessError::Validation(e.to_string()))?;
    let clf = embed::train_classifier(&fit.factors.news, &masked.labels, c.classifier_ridge)
        .map_err(|e| HarnessError::Validation(format!("classifier: {e}")))?;
    let held: Vec<usize> = (0..labels.len()).filter(|j| !visible.contains(j) && labels[*j] != 0).collect();
    let row = |j: usize| fit.factors.news.row(j).iter().copied().collect::<Vec<f64>>();
    let preds: Vec<i8> = held.iter().map(|&j| embed::predict(&row(j), &clf)).collect();
    let truth: Vec<i8> = held.iter().map(|&j| labels[j]).collect();
    if !held.is_empty() {
        o.detection(&evaluate(&preds, &truth)?);
    } else {
        o.detection(&DetectionMetrics { accuracy: 0.0, precision: 0.0, recall: 0.0, f1: 0.0 });
    }
    o.metric("held_out", held.len() as f64);
    o.metric("objective", fit.trace.last().map_or(0.0, |t| t.total));
    o.metric("rounds", (fit.trace.len() - 1) as f64);
    o.converged = fit.converged;
    fit.factors.write_dir(&o.dir.join("factors")).map_err(internal)?;
    o.dir_artifacts("factors")?;
    o.write("trace.csv", &fit.trace_csv())?;
    let mut pred_csv = String::from("news,label,prediction\n");
    for j in 0..labels.len() {
        pred_csv.push_str(&format!("{j},{},{}\n", labels[j], embed::predict(&row(j), &clf)));
    }
    o.write("predictions.csv", &pred_csv)
}

fn task_detect_sequence(bundle: &NetworkBundle, cfg: &ExperimentConfig, seed: u64, o: &mut Outputs) -> Result<(), HarnessError> {
    let c = &cfg.detect_sequence;
    let labels = &bundle.interaction.labels;
    let mut data = Vec::new();
    let mut ids = Vec::new();
    for (j, &y) in labels.iter().enumerate() {
        if y == 0 {
            continue;
        }
        match seqrep::build_features(bundle, j, &c.features) {
            Ok(f) => {
                data.push((seqrep::sequence_inputs(&f, c.features.normalize_eta), y));
                ids.push(j);
            }
            Err(seqrep::SeqError::NoEngagements(_)) => continue,
            Err(e) => return Err(internal(e)),
        }
    }
    if data.is_empty() {
        return Err(HarnessError::Validation("no labeled news with engagements".into()));
    }
    let item_labels: Vec<i8> = data.iter().map(|d| d.1).collect();
    let train_set = stratified_pick(&item_labels, c.train_fraction, &mut stream_rng(seed, 11));
    let (train, test): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|i| train_set.contains(i));
    let pick = |idx: &[usize]| idx.iter().map(|&i| data[i].clone()).collect::<Vec<_>>();
    let (train_data, test_data) = (pick(&train), pick(&test));
    let mut shape = c.shape;
    shape.input = data[0].0[0].len();
    let mut enc = RecurrentEncoder::random(shape, seed);
    let mut tc = c.train;
    tc.seed = seed;
    let losses = seqrep::train(&mut enc, &train_data, &tc).map_err(|e| HarnessError::Validation(e.to_string()))?;
    let eval_on = |d: &[(Vec<nalgebra::DVector<f64>>, i8)]| -> Result<Option<DetectionMetrics>, HarnessError> {
        if d.is_empty() {
            return Ok(None);
        }
        let mut preds = Vec::with_capacity(d.len());
        for (x, _) in d {
            preds.push(enc.predict(x).map_err(internal)?);
        }
        let truth: Vec<i8> = d.iter().map(|e| e.1).collect();
        evaluate(&preds, &truth).map(Some)
    };
    let held = eval_on(&test_data)?.unwrap_or(DetectionMetrics { accuracy: 0.0, precision: 0.0, recall: 0.0, f1: 0.0 });
    o.detection(&held);
    if let Some(tr) = eval_on(&train_data)? {
        o.metric("train_accuracy", tr.accuracy);
    }
    o.metric("held_out", test_data.len() as f64);
    o.metric("final_loss", losses.last().copied().unwrap_or(0.0));
    enc.write_dir(&o.dir.join("encoder")).map_err(internal)?;
    o.dir_artifacts("encoder")?;
    let mut trace = String::from("epoch,loss\n");
    for (e, l) in losses.iter().enumerate() {
        trace.push_str(&format!("{e},{}\n", format_f64(*l)));
    }
    o.write("loss.csv", &trace)?;
    let mut pred_csv = String::from("news,label,prediction\n");
    for (i, &j) in ids.iter().enumerate() {
        pred_csv.push_str(&format!("{j},{},{}\n", data[i].1, enc.predict(&data[i].0).map_err(internal)?));
    }
    o.write("predictions.csv", &pred_csv)
}

fn task_social_embed(bundle: &NetworkBundle, cfg: &ExperimentConfig, seed: u64, o: &mut Outputs) -> Result<(), HarnessError> {
    let c = &cfg.social_embed;
    let net = &bundle.friendship;
    let mut line = c.line;
    line.seed = seed;
    let (lm, ltrace) = social::line_fit(net, &line).map_err(|e| HarnessError::Validation(e.to_string()))?;
    let mut mc = c.mnmf;
    mc.seed = seed;
    let (mm, mtrace) = social::mnmf_fit(net, &mc).map_err(|e| HarnessError::Validation(e.to_string()))?;
    let labels = mm.communities();
    let b = social::modularity_matrix(net).map_err(internal)?;
    let two_e = social::symmetric_adjacency(net).sum();
    o.metric("line_loss", ltrace.last().copied().unwrap_or(0.0));
    let last = mtrace.last().copied().unwrap_or_else(|| mm.terms());
    o.metric("mnmf_objective", last.total);
    o.metric("modularity", social::modularity(&b, two_e, &labels));
    o.metric("communities", labels.iter().collect::<BTreeSet<_>>().len() as f64);
    if cfg.input.is_none() {
        let planted: Vec<usize> = (0..net.users).map(|u| graph::planted_community(&cfg.synthetic, u)).collect();
        o.metric("planted_modularity", social::modularity(&b, two_e, &planted));
    }
    o.write("line_embeddings.csv", &lm.embeddings_csv())?;
    o.write("mnmf_embeddings.csv", &mm.embeddings_csv())?;
    o.write("communities.csv", &mm.communities_csv())?;
    let mut trace = String::from("epoch,loss\n");
    for (e, l) in ltrace.iter().enumerate() {
        trace.push_str(&format!("{e},{}\n", format_f64(*l)));
    }
    o.write("line_trace.csv", &trace)
}

fn task_credibility(bundle: &NetworkBundle, cfg: &ExperimentConfig, o: &mut Outputs) -> Result<(), HarnessError> {
    let c = &cfg.credibility;
    let net = &bundle.credibility;
    if net.posts == 0 {
        return Err(HarnessError::Validation("credibility network has no posts".into()));
    }
    let problem = PropagationProblem::from_network(net, c.mu).map_err(|e| HarnessError::Validation(e.to_string()))?;
    let prop = credprop::propagate(&problem, c.tolerance, c.max_iters);
    o.converged = prop.converged;
    o.metric("iterations", prop.iterations as f64);
    if net.posts <= 500 {
        let exact = problem.closed_form();
        o.metric("closed_form_gap", (&prop.credibility - exact).amax());
    }
    // A denying post that is credible speaks against the news item.
    let mut by_news: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for e in &bundle.stance.stance {
        by_news.entry(e.news).or_default().push(e.sign as f64 * prop.credibility[e.post]);
    }
    let labels = &bundle.interaction.labels;
    let (mut preds, mut truth) = (Vec::new(), Vec::new());
    let mut verdicts = String::from("news,score,verdict\n");
    for (&j, creds) in &by_news {
        let v = credprop::news_verdict(creds).map_err(internal)?;
        verdicts.push_str(&format!("{j},{},{}\n", format_f64(v.score), if v.fake { "fake" } else { "true" }));
        if labels.get(j).is_some_and(|&y| y != 0) {
            preds.push(if v.fake { 1 } else { -1 });
            truth.push(labels[j]);
        }
    }
    if !preds.is_empty() {
        o.detection(&evaluate(&preds, &truth)?);
    }
    let mut csv = String::from("post,t0,credibility\n");
    for i in 0..net.posts {
        csv.push_str(&format!("{i},{},{}\n", format_f64(problem.initial[i]), format_f64(prop.credibility[i])));
    }
    o.write("credibility.csv", &csv)?;
    o.write("verdicts.csv", &verdicts)
}

/// Leave-one-out positives (each triple scored on the graph without it)
/// and an equal number of random unlinked pairs as negatives.
fn generated_claims(kg: &KnowledgeGraph, seed: u64) -> Vec<(Claim, bool)> {
    let name = |e: usize| kg.names.get(e).cloned().unwrap_or_else(|| e.to_string());
    let mut out: Vec<(Claim, bool)> = kg
        .triples
        .iter()
        .map(|t| (Claim { subject: name(t.subject), predicate: t.predicate.clone(), object: name(t.object) }, true))
        .collect();
    let linked: BTreeSet<(usize, usize)> =
        kg.triples.iter().flat_map(|t| [(t.subject, t.object), (t.object, t.subject)]).collect();
    let mut rng = stream_rng(seed, 12);
    let want = out.len();
    let mut seen = BTreeSet::new();
    let n = kg.entities;
    let budget = 50 * want.max(1);
    for _ in 0..budget {
        if seen.len() == want || n < 2 {
            break;
        }
        let s = rng.random_range(0..n);
        let t = rng.random_range(0..n);
        if s != t && !linked.contains(&(s, t)) && seen.insert((s, t)) {
            out.push((Claim { subject: name(s), predicate: "related".into(), object: name(t) }, false));
        }
    }
    out
}

fn without_triple(kg: &KnowledgeGraph, claim: &Claim) -> Result<KnowledgeGraph, HarnessError> {
    let s = kg.entity_index(&claim.subject);
    let o = kg.entity_index(&claim.object);
    let triples = kg
        .triples
        .iter()
        .filter(|t| !(Some(t.subject) == s && Some(t.object) == o && t.predicate == claim.predicate))
        .cloned()
        .collect();
    KnowledgeGraph::new(kg.entities, kg.names.clone(), triples).map_err(internal)
}

fn task_factcheck(bundle: &NetworkBundle, cfg: &ExperimentConfig, seed: u64, o: &mut Outputs) -> Result<(), HarnessError> {
    let c = &cfg.factcheck;
    let mut kg = match &c.kg {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            KnowledgeGraph::from_tsv(&text).map_err(|e| HarnessError::Validation(format!("kg {}: {e}", p.display())))?
        }
        None => bundle.knowledge.clone(),
    };
    if kg.names.is_empty() {
        kg.names = (0..kg.entities).map(|e| e.to_string()).collect();
    }
    let score = |g: &KnowledgeGraph, claim: &Claim| -> (f64, usize, Option<String>) {
        match c.mode {
            FactcheckMode::Path => {
                let t = kgcheck::truth_value_path(g, claim, &c.path);
                (t.tau, t.n_paths, t.warning)
            }
            FactcheckMode::Flow => {
                let f = kgcheck::knowledge_flow(g, claim, c.capacity, c.path.directed);
                (f.tau, f.paths.len(), f.warning)
            }
        }
    };
    let mut csv = String::from("subject,predicate,object,label,tau,n_paths,warning\n");
    let mut taus = Vec::new();
    let mut warnings = 0usize;
    match &c.claims {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            let claims =
                kgcheck::parse_claims(&text).map_err(|e| HarnessError::Validation(format!("claims {}: {e}", p.display())))?;
            for claim in &claims {
                let (tau, n_paths, warn) = score(&kg, claim);
                warnings += usize::from(warn.is_some());
                taus.push(tau);
                csv.push_str(&format!(
                    "{},{},{},,{},{},{}\n",
                    claim.subject,
                    claim.predicate,
                    claim.object,
                    format_f64(tau),
                    n_paths,
                    warn.unwrap_or_default()
                ));
            }
        }
        None => {
            let (mut pos, mut neg) = (Vec::new(), Vec::new());
            for (claim, truth) in generated_claims(&kg, seed) {
                let (tau, n_paths, warn) = if truth { score(&without_triple(&kg, &claim)?, &claim) } else { score(&kg, &claim) };
                warnings += usize::from(warn.is_some());
                taus.push(tau);
                if truth {
                    pos.push(tau);
                } else {
                    neg.push(tau);
                }
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    claim.subject,
                    claim.predicate,
                    claim.object,
                    if truth { 1 } else { 0 },
                    format_f64(tau),
                    n_paths,
                    warn.unwrap_or_default()
                ));
            }
            let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
            o.metric("mean_tau_true", mean(&pos));
            o.metric("mean_tau_false", mean(&neg));
            if !pos.is_empty() && !neg.is_empty() {
                let mut wins = 0.0;
                for a in &pos {
                    for b in &neg {
                        wins += if a > b { 1.0 } else if a == b { 0.5 } else { 0.0 };
                    }
                }
                o.metric("auc", wins / (pos.len() * neg.len()) as f64);
            }
        }
    }
    o.metric("claims", taus.len() as f64);
    o.metric("warnings", warnings as f64);
    o.metric("tau", if taus.is_empty() { 0.0 } else { taus.iter().sum::<f64>() / taus.len() as f64 });
    o.write("truth_values.csv", &csv)
}

fn task_stance(bundle: &NetworkBundle, cfg: &ExperimentConfig, seed: u64, o: &mut Outputs) -> Result<(), HarnessError> {
    let c = &cfg.stance;
    let labels = &bundle.interaction.labels;
    let shown = stratified_pick(labels, c.label_fraction, &mut stream_rng(seed, 13));
    let fake: BTreeSet<usize> = shown.iter().copied().filter(|&j| labels[j] == 1).collect();
    let truth: BTreeSet<usize> = shown.iter().copied().filter(|&j| labels[j] == -1).collect();
    let mut table = stance::init(&bundle.stance, &fake, &truth, c.priors, c.use_signs)
        .map_err(|e| HarnessError::Validation(e.to_string()))?;
    let outcome = stance::iterate(&mut table, c.max_rounds, c.tolerance);
    o.converged = outcome.converged;
    o.metric("rounds", outcome.rounds as f64);
    let (mut preds, mut ys) = (Vec::new(), Vec::new());
    let mut csv = String::from("news,q,verdict\n");
    for j in 0..bundle.stance.news {
        let (v, q) = table.predict(j).map_err(internal)?;
        let fake_pred = v == stance::NewsVerdict::Fake;
        csv.push_str(&format!("{j},{},{}\n", format_f64(q), if fake_pred { "fake" } else { "true" }));
        if !shown.contains(&j) && labels.get(j).is_some_and(|&y| y != 0) {
            preds.push(if fake_pred { 1 } else { -1 });
            ys.push(labels[j]);
        }
    }
    if !preds.is_empty() {
        o.detection(&evaluate(&preds, &ys)?);
    }
    o.write("news_scores.csv", &csv)
}

/// Simulated cascade from a random user with out-edges. Draws are retried
/// until one reaches at least three users; the largest draw wins otherwise.
fn simulated_recipients(g: &Digraph, seed: u64) -> Result<(usize, Vec<usize>), HarnessError> {
    let starts: Vec<usize> = (0..g.len()).filter(|&u| !g.out[u].is_empty()).collect();
    if starts.is_empty() {
        return Err(HarnessError::Validation("diffusion network has no edges".into()));
    }
    let mut rng = stream_rng(seed, 14);
    let mut best: Option<(usize, Vec<usize>)> = None;
    for _ in 0..32 {
        let src = starts[rng.random_range(0..starts.len())];
        let trace = simulate(g, &[src], &BTreeSet::new(), &mut rng);
        let mut p: Vec<usize> = trace.steps.into_iter().flatten().collect();
        p.sort_unstable();
        let enough = p.len() >= 3;
        if best.as_ref().is_none_or(|b| p.len() > b.1.len()) {
            best = Some((src, p));
        }
        if enough {
            break;
        }
    }
    Ok(best.expect("at least one draw"))
}

fn recipients(g: &Digraph, cfg: &ExperimentConfig, seed: u64) -> Result<(Option<usize>, Vec<usize>), HarnessError> {
    match &cfg.provenance.recipients {
        Some(p) => {
            if let Some(&v) = p.iter().find(|&&v| v >= g.len()) {
                return Err(HarnessError::Validation(format!("provenance.recipients: node {v} out of range")));
            }
            Ok((None, p.clone()))
        }
        None => simulated_recipients(g, seed).map(|(s, p)| (Some(s), p)),
    }
}

fn edges_csv(edges: &[(usize, usize, f64)]) -> String {
    let mut csv = String::from("src,dst,prob\n");
    for &(u, v, p) in edges {
        csv.push_str(&format!("{u},{v},{}\n", format_f64(p)));
    }
    csv
}

fn task_provenance(bundle: &NetworkBundle, cfg: &ExperimentConfig, seed: u64, o: &mut Outputs) -> Result<(), HarnessError> {
    let g = Digraph::from_diffusion(&bundle.diffusion);
    let (planted, p) = recipients(&g, cfg, seed)?;
    let res = find_provenance_paths(&g, &p, &cfg.provenance.search).map_err(|e| HarnessError::Validation(e.to_string()))?;
    o.metric("recipients", p.len() as f64);
    o.metric("sources", res.sources.len() as f64);
    o.metric("utility", res.utility);
    o.metric("path_edges", res.edges.len() as f64);
    if let Some(src) = planted {
        o.metric("source_recovered", if res.sources.contains(&src) { 1.0 } else { 0.0 });
    }
    o.json("provenance.json", &res)?;
    o.write("provenance_edges.csv", &edges_csv(&res.edges))
}

fn task_leaders(bundle: &NetworkBundle, cfg: &ExperimentConfig, o: &mut Outputs) -> Result<(), HarnessError> {
    let actions = actions_from_diffusion(&bundle.diffusion);
    let leaders = identify_leaders(bundle.users.count, &actions, cfg.leaders.k);
    let covered = coverage(&actions, &leaders);
    o.metric("leaders", leaders.len() as f64);
    o.metric("coverage", covered as f64);
    o.metric("actions", actions.len() as f64);
    o.metric("coverage_fraction", if actions.is_empty() { 0.0 } else { covered as f64 / actions.len() as f64 });
    let mut csv = String::from("rank,user\n");
    for (r, u) in leaders.iter().enumerate() {
        csv.push_str(&format!("{r},{u}\n"));
    }
    o.write("leaders.csv", &csv)
}

/// Audience size from the overlap of the provenance node sets found under
/// the two path metrics.
fn task_estimate_audience(bundle: &NetworkBundle, cfg: &ExperimentConfig, seed: u64, o: &mut Outputs) -> Result<(), HarnessError> {
    let g = Digraph::from_diffusion(&bundle.diffusion);
    let (_, p) = recipients(&g, cfg, seed)?;
    let mut sets = Vec::new();
    for metric in [PathMetric::Hops, PathMetric::Probability] {
        let search = ProvenanceConfig { metric, ..cfg.provenance.search };
        let res = find_provenance_paths(&g, &p, &search).map_err(|e| HarnessError::Validation(e.to_string()))?;
        sets.push(res.nodes());
    }
    let n = scale_up_estimate(&sets[0], &sets[1]).map_err(internal)?;
    o.metric("n_estimate", n);
    o.metric("r_a", sets[0].len() as f64);
    o.metric("r_b", sets[1].len() as f64);
    o.metric("overlap", sets[0].intersection(&sets[1]).count() as f64);
    o.metric("recipients", p.len() as f64);
    let mut csv = String::from("sample,node\n");
    for (name, set) in ["a", "b"].iter().zip(&sets) {
        for v in set {
            csv.push_str(&format!("{name},{v}\n"));
        }
    }
    o.write("samples.csv", &csv)
}

fn task_block(bundle: &NetworkBundle, cfg: &ExperimentConfig, seed: u64, o: &mut Outputs) -> Result<(), HarnessError> {
    let g = Digraph::from_diffusion(&bundle.diffusion);
    let seeds = match &cfg.block.seeds {
        Some(s) => s.clone(),
        None => {
            let best = (0..g.len()).max_by(|&a, &b| g.out[a].len().cmp(&g.out[b].len()).then(b.cmp(&a)));
            best.into_iter().collect()
        }
    };
    let mut inst = IcmInstance::new(g, seeds);
    inst.reps = cfg.block.reps;
    inst.seed = seed;
    let res = greedy_block(&inst, cfg.block.k).map_err(|e| HarnessError::Validation(e.to_string()))?;
    o.metric("baseline_influence", res.baseline.mean);
    o.metric("influence", res.influence.mean);
    o.metric("influence_std_error", res.influence.std_error);
    o.metric("reduction", res.baseline.mean - res.influence.mean);
    o.metric("blocked", res.blocked.len() as f64);
    o.json("block.json", &res)
}

fn task_campaign(bundle: &NetworkBundle, cfg: &ExperimentConfig, seed: u64, o: &mut Outputs) -> Result<(), HarnessError> {
    let c = &cfg.campaign;
    let a = adjacency(&bundle.friendship);
    let m = a.nrows();
    let rho = spectral_radius(&a);
    let excitation = if rho > 0.0 { &a * (c.excitation_radius / rho) } else { DMatrix::zeros(m, m) };
    let campaign = HawkesCampaign {
        adjacency: a.clone(),
        base_fake: nalgebra::DVector::from_element(m, c.base_fake),
        base_mitigation: nalgebra::DVector::from_element(m, c.base_mitigation),
        excitation,
        decay: c.decay,
        horizon: c.horizon,
        stages: c.stages,
    };
    // Most-followed users reach the largest audience.
    let followers: Vec<usize> = (0..m).map(|j| (0..m).filter(|&i| a[(i, j)] > 0.0).count()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| followers[y].cmp(&followers[x]).then(x.cmp(&y)));
    order.truncate(c.candidates);
    let mut plan_cfg = c.plan;
    plan_cfg.seed = seed;
    let plan = greedy_campaign(&campaign, &order, &plan_cfg).map_err(|e| HarnessError::Validation(e.to_string()))?;
    o.metric("reward", plan.reward);
    o.metric("baseline_reward", plan.baseline);
    o.metric("gain", plan.reward - plan.baseline);
    o.metric("candidates", order.len() as f64);
    let alloc = DMatrix::from_fn(c.stages, m, |s, u| plan.allocation[s][u]);
    o.write("allocation.csv", &matrix_to_csv(&alloc))?;
    o.json("campaign.json", &plan)
}

#[derive(Debug, Parser)]
#[command(name = "misinfo-netkit", version, about = "Misinformation detection and mitigation experiments")]
pub struct Cli {
    pub task: Task,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
    /// Fact-check claims (JSON lines); overrides the config.
    #[arg(long)]
    pub claims: Option<PathBuf>,
    /// Knowledge graph TSV; overrides the config.
    #[arg(long)]
    pub kg: Option<PathBuf>,
    /// Fact-check scoring mode; overrides the config.
    #[arg(long, value_enum)]
    pub mode: Option<FactcheckMode>,
}

fn configure_threads() -> Result<(), HarnessError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| HarnessError::Validation(format!("{THREADS_ENV} = {v:?} is not a positive integer")))?;
    // A second call in the same process is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parsed-CLI entry point; returns the process exit code.
pub fn run_cli(cli: Cli) -> i32 {
    let result = (|| {
        configure_threads()?;
        let mut cfg = match &cli.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if cli.claims.is_some() {
            cfg.factcheck.claims = cli.claims.clone();
        }
        if cli.kg.is_some() {
            cfg.factcheck.kg = cli.kg.clone();
        }
        if let Some(m) = cli.mode {
            cfg.factcheck.mode = m;
        }
        let out = cli.out.clone().or(cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
        run(cli.task, &cfg, cli.seed, &out, cli.format)
    })();
    match result {
        Ok(report) => {
            println!("{} finished in {:.1} ms", report.task, report.wall_time_ms);
            0
        }
        Err(e) => {
            eprintln!("misinfo-netkit: {e}");
            e.exit_code()
        }
    }
}

/// Parses `std::env::args` and runs; clap usage errors exit with 2.
pub fn main_from_env() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => run_cli(cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_examples() {
        let m = evaluate(&[1, -1, 1], &[1, -1, 1]).unwrap();
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, 1.0, 1.0, 1.0));
        assert_eq!(evaluate(&[1, -1], &[-1, 1]).unwrap().accuracy, 0.0);
        // TP=2, FP=1, FN=1, TN=6.
        let preds = [1, 1, 1, -1, -1, -1, -1, -1, -1, -1];
        let truth = [1, 1, -1, 1, -1, -1, -1, -1, -1, -1];
        let m = evaluate(&preds, &truth).unwrap();
        assert!((m.precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.accuracy - 0.8).abs() < 1e-15);
        assert!(matches!(evaluate(&[1], &[1, 1]), Err(HarnessError::Validation(_))));
    }

    #[test]
    fn no_positive_predictions_give_zero_precision() {
        let m = evaluate(&[-1, -1], &[1, -1]).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn unknown_config_field_is_named() {
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"bogus_field": 1}"#).unwrap_err();
        assert!(err.to_string().contains("bogus_field"));
    }

    #[test]
    fn seed_required_for_stochastic_tasks() {
        let cfg = ExperimentConfig::default();
        assert!(matches!(cfg.validate(Task::DetectEmbed, None), Err(HarnessError::Validation(_))));
        assert!(cfg.validate(Task::DetectEmbed, Some(1)).is_ok());
    }

    #[test]
    fn task_names_round_trip() {
        for t in Task::ALL {
            let v = serde_json::to_value(t).unwrap();
            assert_eq!(v.as_str().unwrap(), t.name());
            assert_eq!(<Task as ValueEnum>::from_str(t.name(), false).unwrap(), t);
        }
    }
}
