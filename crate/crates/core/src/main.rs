use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use linkpred::config::PipelineConfig;
use linkpred::pipeline::{Pipeline, METRICS_FILE};
use linkpred::{Error, Result};

#[derive(Parser)]
#[command(name = "linkpred", version, about = "Link prediction on social network edge lists")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Flat key=value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Global seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 selects the fully reproducible path.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Artifact directory.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Replace artifacts produced under a different config.
    #[arg(long, global = true)]
    overwrite: bool,
    /// Extra `key=value` settings, applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an edge list, print node and edge counts, persist the graph.
    Ingest {
        /// Edge list; defaults to dataset.path.
        path: Option<PathBuf>,
        /// Treat edges as undirected.
        #[arg(long)]
        undirected: bool,
    },
    /// Split edges into train/test positives and sample negatives.
    Split,
    /// Train node embeddings on the training graph.
    Embed,
    /// Compute feature tables for the train and test edges.
    Features,
    /// Train the classifier on the training features.
    Train,
    /// Evaluate the trained classifier on the test features.
    Eval,
    /// Every stage, reusing artifacts that match the config.
    Run,
}

fn build_config(global: &Global) -> Result<PipelineConfig> {
    let mut cfg = match &global.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = global.seed {
        cfg.set_seed(seed);
    }
    for kv in &global.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects key=value, got `{kv}`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    let mut cfg = build_config(&cli.global)?;
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    if let Command::Ingest { path, undirected } = &cli.command {
        if let Some(p) = path {
            cfg.dataset_path = Some(p.clone());
        }
        if *undirected {
            cfg.directed = false;
        }
    }
    let mut pipeline = Pipeline::new(cfg, cli.global.out_dir.clone());
    pipeline.overwrite = cli.global.overwrite;
    pipeline.threads = cli.global.threads;

    match cli.command {
        Command::Ingest { .. } => {
            let g = pipeline.ingest()?;
            let symmetric = g.is_directed() || (0..g.node_count()).all(|u| g.out_neighbors(u).iter().all(|&v| g.has_edge(v as usize, u)));
            println!("nodes={}", g.node_count());
            println!("edges={}", g.edge_count());
            println!("directed={}", g.is_directed());
            if !g.is_directed() {
                println!("symmetric={symmetric}");
            }
        }
        Command::Split => {
            let s = pipeline.split()?;
            let count = |edges: &[linkpred::sampling::LabeledEdge]| linkpred::sampling::SplitDataset::count(edges);
            let (tp, tn) = count(&s.train);
            let (sp, sn) = count(&s.test);
            println!("train_positives={tp}\ntrain_negatives={tn}\ntest_positives={sp}\ntest_negatives={sn}");
            println!("cross_component_negatives={}", s.cross_component_negatives);
        }
        Command::Embed => {
            let e = pipeline.embed()?;
            println!("nodes={}\ndim={}", e.node_count(), e.dim);
        }
        Command::Features => {
            let (train, test) = pipeline.features()?;
            println!("feature_width={}\ntrain_rows={}\ntest_rows={}", train.width(), train.rows(), test.rows());
        }
        Command::Train => {
            let m = pipeline.train()?;
            println!("{}", m.spec.describe());
        }
        Command::Eval => {
            let m = pipeline.eval()?;
            print!("{}", m.report());
        }
        Command::Run => {
            let r = pipeline.run()?;
            print!("{}", r.report());
            println!("runtime_seconds={:.3}", r.runtime_seconds);
            log::info!("report written to {}", pipeline.path(METRICS_FILE).display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
