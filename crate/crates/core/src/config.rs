//! Flat `key=value` pipeline configuration with section prefixes
//! (`walk.length=80`). Blank lines and `#` comments are ignored.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::artifact::hash_hex;
use crate::embeddings::{SkipGramConfig, TrainMode, WalkConfig};
use crate::error::{Error, Result};
use crate::heuristics::HeuristicConfig;
use crate::model::{parse_widths, Activation, TrainConfig, DEFAULT_HEAD, DEFAULT_WIDTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    /// The 56 heuristics (block `H`).
    Heuristic,
    /// Hadamard edge embedding (block `R`).
    Embedding,
    /// Both, 56 + embedding dimension columns.
    Combined,
}

impl FeatureMode {
    pub fn name(self) -> &'static str {
        match self {
            FeatureMode::Heuristic => "heuristic",
            FeatureMode::Embedding => "embedding",
            FeatureMode::Combined => "combined",
        }
    }

    pub fn uses_heuristics(self) -> bool {
        self != FeatureMode::Embedding
    }

    pub fn uses_embeddings(self) -> bool {
        self != FeatureMode::Heuristic
    }
}

impl FromStr for FeatureMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heuristic" => Ok(FeatureMode::Heuristic),
            "embedding" => Ok(FeatureMode::Embedding),
            "combined" => Ok(FeatureMode::Combined),
            _ => Err(Error::Config(format!("unknown feature mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Network,
    Logistic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Architecture expression; when unset the feature mode's blocks are
    /// concatenated.
    pub arch: Option<String>,
    pub activation: Activation,
    pub width: usize,
    pub head: Vec<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            kind: ModelKind::Network,
            arch: None,
            activation: Activation::Relu,
            width: DEFAULT_WIDTH,
            head: DEFAULT_HEAD.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub dataset_path: Option<PathBuf>,
    pub directed: bool,
    /// `None`: skip a header line only for `.csv` files.
    pub skip_header: Option<bool>,
    pub test_fraction: f64,
    pub seed: u64,
    pub heuristics: HeuristicConfig,
    pub walk: WalkConfig,
    pub skipgram: SkipGramConfig,
    pub train: TrainConfig,
    pub feature_mode: FeatureMode,
    pub model: ModelConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let mut cfg = PipelineConfig {
            dataset_path: None,
            directed: true,
            skip_header: None,
            test_fraction: 0.1,
            seed: 0,
            heuristics: HeuristicConfig::default(),
            walk: WalkConfig::default(),
            skipgram: SkipGramConfig::default(),
            train: TrainConfig::default(),
            feature_mode: FeatureMode::Heuristic,
            model: ModelConfig::default(),
        };
        cfg.set_seed(0);
        cfg
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean `{value}` for `{key}`"))),
    }
}

fn kv(out: &mut Vec<(String, String)>, key: &str, value: impl Display) {
    out.push((key.to_string(), value.to_string()));
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        // relative dataset paths are resolved against the config file
        if let (Some(data), Some(dir)) = (&cfg.dataset_path, path.parent()) {
            if data.is_relative() {
                cfg.dataset_path = Some(dir.join(data));
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        // the global seed is applied first so explicit per-stage values win
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            entries.push((k.trim().to_string(), v.trim().to_string()));
        }
        if let Some((_, v)) = entries.iter().rev().find(|(k, _)| k == "seed") {
            cfg.set_seed(parse("seed", v)?);
        }
        for (k, v) in entries.iter().filter(|(k, _)| k != "seed") {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Global seed; every stage seed is derived from it.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.heuristics.svd_seed = seed.wrapping_add(1);
        self.walk.seed = seed.wrapping_add(2);
        self.skipgram.seed = seed.wrapping_add(3);
        self.train.seed = seed.wrapping_add(4);
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let h = &mut self.heuristics;
        match key {
            "seed" => self.set_seed(parse(key, value)?),
            "dataset.path" => self.dataset_path = Some(PathBuf::from(value)),
            "dataset.directed" => self.directed = parse_bool(key, value)?,
            "dataset.skip_header" => {
                self.skip_header = match value {
                    "auto" => None,
                    v => Some(parse_bool(key, v)?),
                }
            }
            "split.test_fraction" => self.test_fraction = parse(key, value)?,
            "heuristics.pagerank_damping" => h.pagerank_damping = parse(key, value)?,
            "heuristics.pagerank_tol" => h.pagerank_tol = parse(key, value)?,
            "heuristics.katz_alpha" => h.katz_alpha = parse(key, value)?,
            "heuristics.katz_beta" => h.katz_beta = parse(key, value)?,
            "heuristics.katz_tol" => h.katz_tol = parse(key, value)?,
            "heuristics.hits_tol" => h.hits_tol = parse(key, value)?,
            "heuristics.max_iters" => h.max_iters = parse(key, value)?,
            "heuristics.svd_rank" => h.svd_rank = parse(key, value)?,
            "heuristics.svd_seed" => h.svd_seed = parse(key, value)?,
            "heuristics.missing_path" => h.missing_path_sentinel = parse(key, value)?,
            "walk.walks_per_node" => self.walk.walks_per_node = parse(key, value)?,
            "walk.length" => self.walk.walk_length = parse(key, value)?,
            "walk.p" => self.walk.p = parse(key, value)?,
            "walk.q" => self.walk.q = parse(key, value)?,
            "walk.seed" => self.walk.seed = parse(key, value)?,
            "skipgram.dim" => self.skipgram.dim = parse(key, value)?,
            "skipgram.window" => self.skipgram.window = parse(key, value)?,
            "skipgram.negatives" => self.skipgram.negatives = parse(key, value)?,
            "skipgram.learning_rate" => self.skipgram.initial_lr = parse(key, value)?,
            "skipgram.epochs" => self.skipgram.epochs = parse(key, value)?,
            "skipgram.seed" => self.skipgram.seed = parse(key, value)?,
            "skipgram.mode" => {
                self.skipgram.mode = match value {
                    "deterministic" => TrainMode::Deterministic,
                    "parallel" => TrainMode::Parallel,
                    _ => return Err(Error::Config(format!("unknown skipgram.mode `{value}`"))),
                }
            }
            "train.learning_rate" => self.train.learning_rate = parse(key, value)?,
            "train.batch_size" => self.train.batch_size = parse(key, value)?,
            "train.epochs" => self.train.epochs = parse(key, value)?,
            "train.patience" => self.train.patience = parse(key, value)?,
            "train.seed" => self.train.seed = parse(key, value)?,
            "features.mode" => self.feature_mode = value.parse()?,
            "model.kind" => {
                self.model.kind = match value {
                    "network" | "nn" => ModelKind::Network,
                    "logistic" => ModelKind::Logistic,
                    _ => return Err(Error::Config(format!("unknown model.kind `{value}`"))),
                }
            }
            "model.arch" => self.model.arch = Some(value.to_string()).filter(|s| !s.is_empty()),
            "model.activation" => self.model.activation = Activation::parse(value)?,
            "model.width" => self.model.width = parse(key, value)?,
            "model.head" => self.model.head = parse_widths(value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config("split.test_fraction must be in (0, 1)".into()));
        }
        self.heuristics.validate()?;
        self.walk.validate()?;
        self.skipgram.validate()?;
        self.train.validate()?;
        if self.model.width == 0 {
            return Err(Error::Config("model.width must be positive".into()));
        }
        if let Some(arch) = &self.model.arch {
            for name in crate::model::Expr::parse(arch)?.inputs() {
                let ok = match name.as_str() {
                    "H" => self.feature_mode.uses_heuristics(),
                    "R" => self.feature_mode.uses_embeddings(),
                    "S" | "D" => true,
                    _ => false,
                };
                if !ok {
                    return Err(Error::Config(format!(
                        "model.arch reads block `{name}`, which features.mode={} does not produce",
                        self.feature_mode.name()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether the dataset file starts with a header line.
    pub fn header_skipped(&self) -> bool {
        self.skip_header.unwrap_or_else(|| {
            self.dataset_path
                .as_ref()
                .and_then(|p| p.extension())
                .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
        })
    }

    /// Every setting in canonical order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let h = &self.heuristics;
        kv(&mut out, "seed", self.seed);
        kv(
            &mut out,
            "dataset.path",
            self.dataset_path.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
        );
        kv(&mut out, "dataset.directed", self.directed);
        kv(&mut out, "dataset.skip_header", self.header_skipped());
        kv(&mut out, "split.test_fraction", self.test_fraction);
        kv(&mut out, "heuristics.pagerank_damping", h.pagerank_damping);
        kv(&mut out, "heuristics.pagerank_tol", h.pagerank_tol);
        kv(&mut out, "heuristics.katz_alpha", h.katz_alpha);
        kv(&mut out, "heuristics.katz_beta", h.katz_beta);
        kv(&mut out, "heuristics.katz_tol", h.katz_tol);
        kv(&mut out, "heuristics.hits_tol", h.hits_tol);
        kv(&mut out, "heuristics.max_iters", h.max_iters);
        kv(&mut out, "heuristics.svd_rank", h.svd_rank);
        kv(&mut out, "heuristics.svd_seed", h.svd_seed);
        kv(&mut out, "heuristics.missing_path", h.missing_path_sentinel);
        kv(&mut out, "walk.walks_per_node", self.walk.walks_per_node);
        kv(&mut out, "walk.length", self.walk.walk_length);
        kv(&mut out, "walk.p", self.walk.p);
        kv(&mut out, "walk.q", self.walk.q);
        kv(&mut out, "walk.seed", self.walk.seed);
        kv(&mut out, "skipgram.dim", self.skipgram.dim);
        kv(&mut out, "skipgram.window", self.skipgram.window);
        kv(&mut out, "skipgram.negatives", self.skipgram.negatives);
        kv(&mut out, "skipgram.learning_rate", self.skipgram.initial_lr);
        kv(&mut out, "skipgram.epochs", self.skipgram.epochs);
        kv(&mut out, "skipgram.seed", self.skipgram.seed);
        let mode = match self.skipgram.mode {
            TrainMode::Deterministic => "deterministic",
            TrainMode::Parallel => "parallel",
        };
        kv(&mut out, "skipgram.mode", mode);
        kv(&mut out, "train.learning_rate", self.train.learning_rate);
        kv(&mut out, "train.batch_size", self.train.batch_size);
        kv(&mut out, "train.epochs", self.train.epochs);
        kv(&mut out, "train.patience", self.train.patience);
        kv(&mut out, "train.seed", self.train.seed);
        kv(&mut out, "features.mode", self.feature_mode.name());
        let kind = match self.model.kind {
            ModelKind::Network => "network",
            ModelKind::Logistic => "logistic",
        };
        kv(&mut out, "model.kind", kind);
        kv(&mut out, "model.arch", self.model.arch.clone().unwrap_or_default());
        kv(&mut out, "model.activation", self.model.activation.name());
        kv(&mut out, "model.width", self.model.width);
        let head: Vec<String> = self.model.head.iter().map(|w| w.to_string()).collect();
        kv(&mut out, "model.head", head.join(","));
        out
    }

    pub fn to_text(&self) -> String {
        self.entries().iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    fn hash_of(&self, keys: &[&str], upstream: &[&str]) -> String {
        let mut parts: Vec<String> = upstream.iter().map(|s| s.to_string()).collect();
        for (k, v) in self.entries() {
            if keys.iter().any(|p| k == *p || k.starts_with(&format!("{p}."))) {
                parts.push(format!("{k}={v}"));
            }
        }
        let refs: Vec<&str> = parts.iter().map(String::as_str).collect();
        hash_hex(&refs)
    }

    pub fn graph_hash(&self) -> String {
        self.hash_of(&["dataset"], &[])
    }

    pub fn split_hash(&self) -> String {
        self.hash_of(&["seed", "split"], &[&self.graph_hash()])
    }

    pub fn embedding_hash(&self) -> String {
        self.hash_of(&["walk", "skipgram"], &[&self.split_hash()])
    }

    /// Covers only the feature families the mode uses.
    pub fn features_hash(&self) -> String {
        let mut upstream = vec![self.split_hash()];
        if self.feature_mode.uses_embeddings() || self.model_needs_endpoints() {
            upstream.push(self.embedding_hash());
        }
        let mut keys = vec!["features"];
        if self.feature_mode.uses_heuristics() {
            keys.push("heuristics");
        }
        let endpoints = if self.model_needs_endpoints() { "endpoints" } else { "" };
        upstream.push(endpoints.to_string());
        let refs: Vec<&str> = upstream.iter().map(String::as_str).collect();
        self.hash_of(&keys, &refs)
    }

    pub fn model_hash(&self) -> String {
        self.hash_of(&["train", "model"], &[&self.features_hash()])
    }

    /// Whether the architecture reads raw endpoint vectors `S` / `D`.
    pub fn model_needs_endpoints(&self) -> bool {
        self.model
            .arch
            .as_deref()
            .and_then(|a| crate::model::Expr::parse(a).ok())
            .is_some_and(|e| e.inputs().iter().any(|n| n == "S" || n == "D"))
    }
}
