//! End-to-end stages with persisted, hash-stamped artifacts.
//!
//! Each stage writes its output under the output directory with a
//! provenance line holding the seed and the hash of every setting that
//! influenced it. A stage run as part of [`Pipeline::run`] reuses an
//! existing artifact whose hash matches and refuses one whose hash differs
//! unless overwriting is allowed.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::artifact::ArtifactMeta;
use crate::config::{FeatureMode, ModelKind, PipelineConfig};
use crate::embeddings::{edge_embedding_table, embed_graph, endpoint_table, EmbeddingMatrix, TrainMode};
use crate::error::{Error, Result};
use crate::features::FeatureTable;
use crate::graph::{parse_edge_list, DiGraph, NodeId};
use crate::heuristics::{featurize_edges, HeuristicContext};
use crate::model::{Metrics, Model, TowerSpec};
use crate::sampling::{assemble_dataset, LabeledEdge, SplitDataset};

pub const GRAPH_FILE: &str = "graph.txt";
pub const SPLIT_TRAIN_FILE: &str = "split_train.txt";
pub const SPLIT_TEST_FILE: &str = "split_test.txt";
pub const EMBEDDINGS_FILE: &str = "embeddings.txt";
pub const FEATURES_TRAIN_FILE: &str = "features_train.csv";
pub const FEATURES_TEST_FILE: &str = "features_test.csv";
pub const MODEL_FILE: &str = "model.txt";
pub const METRICS_FILE: &str = "metrics.txt";
pub const TIMING_FILE: &str = "timing.txt";
pub const CONFIG_FILE: &str = "config.txt";

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(file)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))
}

fn first_meta(path: &Path, lines: &[String]) -> Result<ArtifactMeta> {
    let head = lines.first().ok_or_else(|| Error::artifact(path, "empty file"))?;
    ArtifactMeta::parse_line(path, head)
}

/// Read a node-labelled edge list from disk.
pub fn load_dataset_graph(path: &Path, directed: bool, skip_header: bool) -> Result<DiGraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let raw = parse_edge_list(BufReader::new(file), directed, skip_header).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })?;
    DiGraph::build(&raw)
}

/// Meta line, `nodes N edges E directed B`, raw ids in dense order, then
/// one dense `u v` pair per canonical edge.
pub fn write_graph(path: &Path, g: &DiGraph, meta: &ArtifactMeta) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", meta.to_line()).map_err(io)?;
    writeln!(w, "nodes {} edges {} directed {}", g.node_count(), g.edge_count(), g.is_directed()).map_err(io)?;
    let ids: Vec<String> = g.raw_ids().iter().map(|r| r.to_string()).collect();
    writeln!(w, "ids {}", ids.join(" ")).map_err(io)?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_graph(path: &Path) -> Result<(DiGraph, ArtifactMeta)> {
    let lines = read_lines(path)?;
    let meta = first_meta(path, &lines)?;
    let bad = |line: usize, m: &str| Error::artifact(path, format!("line {line}: {m}"));
    let header: Vec<&str> = lines.get(1).map(|l| l.split_whitespace().collect()).unwrap_or_default();
    if header.len() != 6 || header[0] != "nodes" || header[2] != "edges" || header[4] != "directed" {
        return Err(bad(2, "expected `nodes N edges E directed B`"));
    }
    let n: usize = header[1].parse().map_err(|_| bad(2, "bad node count"))?;
    let m: usize = header[3].parse().map_err(|_| bad(2, "bad edge count"))?;
    let directed: bool = header[5].parse().map_err(|_| bad(2, "bad directed flag"))?;
    let ids: Vec<u64> = lines
        .get(2)
        .and_then(|l| l.strip_prefix("ids"))
        .ok_or_else(|| bad(3, "expected `ids ...`"))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(3, "bad raw id")))
        .collect::<Result<_>>()?;
    let mut edges = Vec::with_capacity(m);
    for (i, l) in lines.iter().enumerate().skip(3) {
        let mut it = l.split_whitespace().map(|t| t.parse::<NodeId>());
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
            _ => return Err(bad(i + 1, "expected `u v`")),
        }
    }
    let g = DiGraph::from_dense_edges(n, &edges, directed)?.with_raw_ids(ids)?;
    if g.edge_count() != m {
        return Err(Error::artifact(path, format!("declares {m} edges, holds {}", g.edge_count())));
    }
    Ok((g, meta))
}

/// Meta line, then `src dst label` per candidate edge (dense ids).
pub fn write_edges(path: &Path, edges: &[LabeledEdge], meta: &ArtifactMeta) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", meta.to_line()).map_err(io)?;
    for e in edges {
        writeln!(w, "{} {} {}", e.src, e.dst, e.label).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_edges(path: &Path) -> Result<(Vec<LabeledEdge>, ArtifactMeta)> {
    let lines = read_lines(path)?;
    let meta = first_meta(path, &lines)?;
    let mut edges = Vec::with_capacity(lines.len());
    for (i, l) in lines.iter().enumerate().skip(1) {
        let t: Vec<&str> = l.split_whitespace().collect();
        let parsed = match t.as_slice() {
            [s, d, y] => s.parse().ok().zip(d.parse().ok()).zip(y.parse::<u8>().ok().filter(|&y| y <= 1)),
            _ => None,
        };
        let ((src, dst), label) = parsed.ok_or_else(|| Error::artifact(path, format!("line {}: expected `src dst label`", i + 1)))?;
        edges.push(LabeledEdge { src, dst, label });
    }
    Ok((edges, meta))
}

/// The persisted split: candidate edges plus the training graph over the
/// full node set.
#[derive(Debug, Clone)]
pub struct Split {
    pub train_graph: DiGraph,
    pub train: Vec<LabeledEdge>,
    pub test: Vec<LabeledEdge>,
    pub cross_component_negatives: usize,
}

impl Split {
    fn from_dataset(d: SplitDataset) -> Self {
        Split {
            train_graph: d.train_graph,
            train: d.train,
            test: d.test,
            cross_component_negatives: d.cross_component_negatives,
        }
    }

    fn rebuild(g: &DiGraph, train: Vec<LabeledEdge>, test: Vec<LabeledEdge>, cross: usize) -> Result<Self> {
        let positives: Vec<(NodeId, NodeId)> = train.iter().filter(|e| e.is_positive()).map(|e| (e.src, e.dst)).collect();
        Ok(Split {
            train_graph: g.with_edges(&positives)?,
            train,
            test,
            cross_component_negatives: cross,
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub metrics: Metrics,
    pub feature_mode: FeatureMode,
    pub feature_width: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub nodes: usize,
    pub edges: usize,
    pub stage_seconds: Vec<(&'static str, f64)>,
    pub runtime_seconds: f64,
}

impl RunReport {
    /// Deterministic `key=value` report; run time is kept out of it.
    pub fn report(&self) -> String {
        format!(
            "{}feature_mode={}\nfeature_width={}\ntrain_rows={}\ntest_rows={}\n",
            self.metrics.report(),
            self.feature_mode.name(),
            self.feature_width,
            self.train_rows,
            self.test_rows
        )
    }

    pub fn timing(&self) -> String {
        let mut s = format!("runtime_seconds={:.3}\n", self.runtime_seconds);
        for (stage, secs) in &self.stage_seconds {
            s.push_str(&format!("{stage}_seconds={secs:.3}\n"));
        }
        s
    }
}

/// Policy for an artifact that already exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Existing {
    /// Load it if its hash matches, fail otherwise (unless overwriting).
    Reuse,
    /// Always recompute.
    Replace,
}

pub struct Pipeline {
    pub config: PipelineConfig,
    pub out_dir: PathBuf,
    /// Replace artifacts whose config hash differs instead of failing.
    pub overwrite: bool,
    /// Worker cap; `Some(1)` forces every stage onto its reproducible path.
    pub threads: Option<usize>,
}

impl Pipeline {
    pub fn new(config: PipelineConfig, out_dir: impl Into<PathBuf>) -> Self {
        Pipeline {
            config,
            out_dir: out_dir.into(),
            overwrite: false,
            threads: None,
        }
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.out_dir.join(file)
    }

    fn meta(&self, kind: &str, hash: String) -> ArtifactMeta {
        ArtifactMeta::new(kind, self.config.seed, &hash)
    }

    fn ensure_out_dir(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out_dir).map_err(|e| Error::io(&self.out_dir, e))
    }

    /// Whether to load `file` (true) or compute it (false).
    fn reusable(&self, file: &str, kind: &str, hash: &str, policy: Existing) -> Result<bool> {
        let path = self.path(file);
        if policy == Existing::Replace || !path.exists() {
            return Ok(false);
        }
        let lines = {
            let f = File::open(&path).map_err(|e| Error::io(&path, e))?;
            let mut first = String::new();
            BufReader::new(f).read_line(&mut first).map_err(|e| Error::io(&path, e))?;
            first
        };
        let meta = ArtifactMeta::parse_line(&path, lines.trim_end())?;
        match meta.expect(&path, kind, hash) {
            Ok(()) => Ok(true),
            Err(_) if self.overwrite => {
                log::info!("replacing {} (config hash {} -> {hash})", path.display(), meta.config_hash());
                Ok(false)
            }
            Err(e) => Err(e),
        }
    }

    fn deterministic(&self) -> bool {
        self.threads == Some(1)
    }

    // ---- ingest ----

    fn compute_graph(&self) -> Result<DiGraph> {
        let cfg = &self.config;
        let path = cfg
            .dataset_path
            .as_ref()
            .ok_or_else(|| Error::Config("dataset.path is not set".into()))?;
        load_dataset_graph(path, cfg.directed, cfg.header_skipped())
    }

    fn graph_stage(&self, policy: Existing) -> Result<DiGraph> {
        let hash = self.config.graph_hash();
        if self.reusable(GRAPH_FILE, "graph", &hash, policy)? {
            log::info!("reusing {GRAPH_FILE}");
            return Ok(read_graph(&self.path(GRAPH_FILE))?.0);
        }
        let g = self.compute_graph()?;
        self.ensure_out_dir()?;
        let meta = self
            .meta("graph", hash)
            .with("nodes", g.node_count())
            .with("edges", g.edge_count())
            .with("directed", g.is_directed());
        write_graph(&self.path(GRAPH_FILE), &g, &meta)?;
        Ok(g)
    }

    /// Parse the dataset and persist the graph artifact.
    pub fn ingest(&self) -> Result<DiGraph> {
        self.graph_stage(Existing::Replace).map_err(|e| e.in_stage("ingest"))
    }

    /// Load the persisted graph, checking it belongs to this config.
    pub fn load_graph(&self) -> Result<DiGraph> {
        let path = self.path(GRAPH_FILE);
        let (g, meta) = read_graph(&path)?;
        meta.expect(&path, "graph", &self.config.graph_hash())?;
        Ok(g)
    }

    // ---- split ----

    fn split_stage(&self, g: &DiGraph, policy: Existing) -> Result<Split> {
        let hash = self.config.split_hash();
        if self.reusable(SPLIT_TRAIN_FILE, "split", &hash, policy)? && self.reusable(SPLIT_TEST_FILE, "split", &hash, policy)? {
            log::info!("reusing {SPLIT_TRAIN_FILE} and {SPLIT_TEST_FILE}");
            return self.load_split(g);
        }
        let d = assemble_dataset(g, self.config.test_fraction, self.config.seed)?;
        if d.positive_shortfall > 0 || d.negative_shortfall > 0 {
            log::warn!(
                "split fell short by {} positive and {} negative test edges",
                d.positive_shortfall,
                d.negative_shortfall
            );
        }
        self.ensure_out_dir()?;
        let meta = |part: &str, edges: &[LabeledEdge]| {
            let (pos, neg) = SplitDataset::count(edges);
            self.meta("split", hash.clone())
                .with("part", part)
                .with("test_fraction", d.test_fraction)
                .with("positives", pos)
                .with("negatives", neg)
                .with("positive_shortfall", d.positive_shortfall)
                .with("negative_shortfall", d.negative_shortfall)
                .with("cross_component", d.cross_component_negatives)
        };
        write_edges(&self.path(SPLIT_TRAIN_FILE), &d.train, &meta("train", &d.train))?;
        write_edges(&self.path(SPLIT_TEST_FILE), &d.test, &meta("test", &d.test))?;
        Ok(Split::from_dataset(d))
    }

    pub fn split(&self) -> Result<Split> {
        let g = self.load_graph().map_err(|e| e.in_stage("split"))?;
        self.split_stage(&g, Existing::Replace).map_err(|e| e.in_stage("split"))
    }

    pub fn load_split(&self, g: &DiGraph) -> Result<Split> {
        let hash = self.config.split_hash();
        let (train, mt) = read_edges(&self.path(SPLIT_TRAIN_FILE))?;
        mt.expect(&self.path(SPLIT_TRAIN_FILE), "split", &hash)?;
        let (test, ms) = read_edges(&self.path(SPLIT_TEST_FILE))?;
        ms.expect(&self.path(SPLIT_TEST_FILE), "split", &hash)?;
        let n = g.node_count();
        if let Some(e) = train.iter().chain(&test).find(|e| e.src >= n || e.dst >= n) {
            return Err(Error::InvalidNode(e.src.max(e.dst)));
        }
        let cross = mt.get("cross_component").and_then(|v| v.parse().ok()).unwrap_or(0);
        Split::rebuild(g, train, test, cross)
    }

    // ---- embed ----

    fn embed_stage(&self, split: &Split, policy: Existing) -> Result<EmbeddingMatrix> {
        let hash = self.config.embedding_hash();
        if self.reusable(EMBEDDINGS_FILE, "embeddings", &hash, policy)? {
            log::info!("reusing {EMBEDDINGS_FILE}");
            return self.load_embeddings();
        }
        let mut sg = self.config.skipgram.clone();
        if self.deterministic() && sg.mode == TrainMode::Parallel {
            log::info!("single thread requested; training embeddings deterministically");
            sg.mode = TrainMode::Deterministic;
        }
        let (emb, history) = embed_graph(&split.train_graph, &self.config.walk, &sg)?;
        if let Some(last) = history.epoch_loss.last() {
            log::info!("skip-gram final epoch loss {last:.5}");
        }
        self.ensure_out_dir()?;
        let meta = self.meta("embeddings", hash).with("dim", emb.dim);
        emb.write_text(&self.path(EMBEDDINGS_FILE), &meta)?;
        Ok(emb)
    }

    pub fn embed(&self) -> Result<EmbeddingMatrix> {
        let split = self.load_graph().and_then(|g| self.load_split(&g)).map_err(|e| e.in_stage("embed"))?;
        self.embed_stage(&split, Existing::Replace).map_err(|e| e.in_stage("embed"))
    }

    pub fn load_embeddings(&self) -> Result<EmbeddingMatrix> {
        let path = self.path(EMBEDDINGS_FILE);
        let (emb, meta) = EmbeddingMatrix::read_text(&path)?;
        let meta = meta.ok_or_else(|| Error::artifact(&path, "missing provenance line"))?;
        meta.expect(&path, "embeddings", &self.config.embedding_hash())?;
        Ok(emb)
    }

    // ---- features ----

    fn needs_embeddings(&self) -> bool {
        self.config.feature_mode.uses_embeddings() || self.config.model_needs_endpoints()
    }

    fn build_tables(&self, split: &Split, emb: Option<&EmbeddingMatrix>) -> Result<(FeatureTable, FeatureTable)> {
        let mode = self.config.feature_mode;
        let ctx = if mode.uses_heuristics() {
            Some(HeuristicContext::new(&split.train_graph, &self.config.heuristics)?)
        } else {
            None
        };
        let table = |edges: &[LabeledEdge]| -> Result<FeatureTable> {
            let mut parts = Vec::new();
            if let Some(ctx) = &ctx {
                parts.push(featurize_edges(ctx, edges)?);
            }
            if let Some(emb) = emb {
                if mode.uses_embeddings() {
                    parts.push(edge_embedding_table(emb, edges)?);
                }
                if self.config.model_needs_endpoints() {
                    parts.push(endpoint_table(emb, edges)?);
                }
            }
            let mut it = parts.into_iter();
            let mut acc = it.next().ok_or_else(|| Error::Config("no feature blocks selected".into()))?;
            for p in it {
                acc = acc.hconcat(&p)?;
            }
            Ok(acc)
        };
        let train = table(&split.train)?;
        let test = table(&split.test)?;
        log::info!("feature width {} ({} mode)", train.width(), mode.name());
        Ok((train, test))
    }

    fn features_stage(&self, split: &Split, emb: Option<&EmbeddingMatrix>, policy: Existing) -> Result<(FeatureTable, FeatureTable)> {
        let hash = self.config.features_hash();
        if self.reusable(FEATURES_TRAIN_FILE, "features", &hash, policy)?
            && self.reusable(FEATURES_TEST_FILE, "features", &hash, policy)?
        {
            log::info!("reusing {FEATURES_TRAIN_FILE} and {FEATURES_TEST_FILE}");
            return self.load_features();
        }
        let (train, test) = self.build_tables(split, emb)?;
        self.ensure_out_dir()?;
        let meta = |part: &str, t: &FeatureTable| {
            self.meta("features", hash.clone())
                .with("part", part)
                .with("mode", self.config.feature_mode.name())
                .with("width", t.width())
        };
        train.write_csv(&self.path(FEATURES_TRAIN_FILE), &meta("train", &train))?;
        test.write_csv(&self.path(FEATURES_TEST_FILE), &meta("test", &test))?;
        Ok((train, test))
    }

    pub fn features(&self) -> Result<(FeatureTable, FeatureTable)> {
        let stage = |e: Error| e.in_stage("features");
        let g = self.load_graph().map_err(stage)?;
        let split = self.load_split(&g).map_err(stage)?;
        let emb = if self.needs_embeddings() {
            Some(self.load_embeddings().map_err(stage)?)
        } else {
            None
        };
        self.features_stage(&split, emb.as_ref(), Existing::Replace).map_err(stage)
    }

    pub fn load_features(&self) -> Result<(FeatureTable, FeatureTable)> {
        let hash = self.config.features_hash();
        let mut out = Vec::new();
        for file in [FEATURES_TRAIN_FILE, FEATURES_TEST_FILE] {
            let path = self.path(file);
            let (t, meta) = FeatureTable::read_csv(&path)?;
            meta.expect(&path, "features", &hash)?;
            out.push(t);
        }
        let test = out.pop().expect("two tables");
        Ok((out.pop().expect("two tables"), test))
    }

    // ---- train ----

    /// Architecture bound to the widths of `table`.
    pub fn tower_spec(&self, table: &FeatureTable) -> Result<TowerSpec> {
        let m = &self.config.model;
        let mode_blocks: Vec<(&str, usize)> = table
            .blocks
            .iter()
            .filter(|b| b.name == "H" || b.name == "R")
            .map(|b| (b.name.as_str(), b.width))
            .collect();
        match m.kind {
            ModelKind::Logistic => TowerSpec::logistic(&mode_blocks),
            ModelKind::Network => {
                let default_arch: Vec<&str> = mode_blocks.iter().map(|(n, _)| *n).collect();
                let arch = m.arch.clone().unwrap_or_else(|| default_arch.join("|"));
                let names = crate::model::Expr::parse(&arch)?.inputs();
                let mut inputs = Vec::new();
                for name in &names {
                    let width = table
                        .block_range(name)
                        .ok_or_else(|| Error::MissingInput(name.clone()))?
                        .len();
                    inputs.push((name.as_str(), width));
                }
                TowerSpec::new(&arch, &inputs, m.activation, m.width, &m.head)
            }
        }
    }

    fn train_stage(&self, train: &FeatureTable, policy: Existing) -> Result<Model> {
        let hash = self.config.model_hash();
        if self.reusable(MODEL_FILE, "model", &hash, policy)? {
            log::info!("reusing {MODEL_FILE}");
            return self.load_model();
        }
        let spec = self.tower_spec(train)?;
        log::info!("training {}", spec.describe());
        let (model, history) = Model::fit(spec, train, &self.config.train)?;
        log::info!(
            "trained {} epochs, kept epoch {}{}",
            history.epochs.len(),
            history.best_epoch,
            if history.stopped_early { " (early stop)" } else { "" }
        );
        self.ensure_out_dir()?;
        let meta = self.meta("model", hash).with("epochs_run", history.epochs.len()).with("best_epoch", history.best_epoch);
        model.write_text(&self.path(MODEL_FILE), &meta)?;
        Ok(model)
    }

    pub fn train(&self) -> Result<Model> {
        let (train, _) = self.load_features().map_err(|e| e.in_stage("train"))?;
        self.train_stage(&train, Existing::Replace).map_err(|e| e.in_stage("train"))
    }

    pub fn load_model(&self) -> Result<Model> {
        let path = self.path(MODEL_FILE);
        let (model, meta) = Model::read_text(&path)?;
        meta.expect(&path, "model", &self.config.model_hash())?;
        Ok(model)
    }

    // ---- eval ----

    fn write_metrics(&self, report: &str) -> Result<()> {
        self.ensure_out_dir()?;
        let path = self.path(METRICS_FILE);
        let meta = self.meta("metrics", self.config.model_hash());
        std::fs::write(&path, format!("{}\n{report}", meta.to_line())).map_err(|e| Error::io(&path, e))
    }

    pub fn eval(&self) -> Result<Metrics> {
        let stage = |e: Error| e.in_stage("eval");
        let (_, test) = self.load_features().map_err(stage)?;
        let model = self.load_model().map_err(stage)?;
        let metrics = model.evaluate(&test).map_err(stage)?;
        self.write_metrics(&metrics.report()).map_err(stage)?;
        Ok(metrics)
    }

    // ---- run ----

    /// ingest, split, embed (when needed), features, train, eval.
    pub fn run(&self) -> Result<RunReport> {
        let start = Instant::now();
        let mut stages = Vec::new();
        let mut timed = |name: &'static str, t: Instant| stages.push((name, t.elapsed().as_secs_f64()));

        self.ensure_out_dir()?;
        let cfg_path = self.path(CONFIG_FILE);
        std::fs::write(&cfg_path, self.config.to_text()).map_err(|e| Error::io(&cfg_path, e))?;

        let t = Instant::now();
        let g = self.graph_stage(Existing::Reuse).map_err(|e| e.in_stage("ingest"))?;
        timed("ingest", t);
        log::info!("graph: {} nodes, {} edges", g.node_count(), g.edge_count());

        let t = Instant::now();
        let split = self.split_stage(&g, Existing::Reuse).map_err(|e| e.in_stage("split"))?;
        timed("split", t);

        let emb = if self.needs_embeddings() {
            let t = Instant::now();
            let emb = self.embed_stage(&split, Existing::Reuse).map_err(|e| e.in_stage("embed"))?;
            timed("embed", t);
            Some(emb)
        } else {
            None
        };

        let t = Instant::now();
        let (train, test) = self
            .features_stage(&split, emb.as_ref(), Existing::Reuse)
            .map_err(|e| e.in_stage("features"))?;
        timed("features", t);

        let t = Instant::now();
        let model = self.train_stage(&train, Existing::Reuse).map_err(|e| e.in_stage("train"))?;
        timed("train", t);

        let t = Instant::now();
        let metrics = model.evaluate(&test).map_err(|e| e.in_stage("eval"))?;
        timed("eval", t);

        let report = RunReport {
            metrics,
            feature_mode: self.config.feature_mode,
            feature_width: train.width(),
            train_rows: train.rows(),
            test_rows: test.rows(),
            nodes: g.node_count(),
            edges: g.edge_count(),
            stage_seconds: stages,
            runtime_seconds: start.elapsed().as_secs_f64(),
        };
        self.write_metrics(&report.report()).map_err(|e| e.in_stage("eval"))?;
        let timing = self.path(TIMING_FILE);
        std::fs::write(&timing, report.timing()).map_err(|e| Error::io(&timing, e))?;
        Ok(report)
    }
}
