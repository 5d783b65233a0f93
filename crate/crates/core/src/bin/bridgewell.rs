use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bridgewell::config::{parse_metrics, PipelineConfig};
use bridgewell::pipeline;
use bridgewell::synth::{generate, write_outputs, GraphModel, SynthConfig};
use bridgewell::Error;

#[derive(Parser)]
#[command(name = "bridgewell", version, about = "Cascade bridging scores and well-being analysis for social event logs")]
struct Cli {
    /// Configuration file (default: ./bridgewell.conf, then data/bridgewell.conf).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

/// Settings that override the configuration file.
#[derive(Args)]
struct Overrides {
    /// Follow graph CSV (follower,followee).
    #[arg(long, global = true)]
    edges: Option<PathBuf>,
    /// Event log CSV.
    #[arg(long, global = true)]
    events: Option<PathBuf>,
    /// Labeled posts CSV.
    #[arg(long, global = true)]
    posts: Option<PathBuf>,
    /// Optional pairwise topic similarity CSV for TwitterRank.
    #[arg(long = "topic-sim", alias = "topic_sim", global = true)]
    topic_sim: Option<PathBuf>,
    /// Directory for all stage outputs.
    #[arg(long = "out-dir", alias = "out_dir", global = true)]
    out_dir: Option<PathBuf>,
    /// Seed for the cascade split, label propagation and simulation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Share of cascades used for scoring (default 0.8).
    #[arg(long = "train-fraction", alias = "train_fraction", global = true)]
    train_fraction: Option<String>,
    /// Share of users selected per metric (default 0.2).
    #[arg(long = "top-fraction", alias = "top_fraction", global = true)]
    top_fraction: Option<String>,
    /// A user-period needs more than this many posts for an SWB value.
    #[arg(long = "min-posts", alias = "min_posts", global = true)]
    min_posts: Option<String>,
    /// Timestamp where the second SWB period begins.
    #[arg(long, global = true, allow_hyphen_values = true)]
    boundary: Option<String>,
    /// PageRank damping factor.
    #[arg(long, global = true)]
    damping: Option<String>,
    #[arg(long = "pagerank-tol", alias = "pagerank_tol", global = true)]
    pagerank_tol: Option<String>,
    #[arg(long = "pagerank-max-iter", alias = "pagerank_max_iter", global = true)]
    pagerank_max_iter: Option<String>,
    /// Predictors above this VIF are dropped before regression.
    #[arg(long = "vif-threshold", alias = "vif_threshold", global = true)]
    vif_threshold: Option<String>,
    /// Regression response: swb_during or swb_change.
    #[arg(long, global = true)]
    response: Option<String>,
    /// Comma-separated metric names.
    #[arg(long, global = true)]
    metrics: Option<String>,
}

impl Overrides {
    fn apply(&self, cfg: &mut PipelineConfig) -> bridgewell::Result<()> {
        let cwd = Path::new("");
        let paths = [
            ("edges", &self.edges),
            ("events", &self.events),
            ("posts", &self.posts),
            ("topic_sim", &self.topic_sim),
            ("out_dir", &self.out_dir),
        ];
        for (key, v) in paths {
            if let Some(p) = v {
                cfg.set(key, &p.to_string_lossy(), cwd)?;
            }
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        let values = [
            ("train_fraction", &self.train_fraction),
            ("top_fraction", &self.top_fraction),
            ("min_posts", &self.min_posts),
            ("boundary", &self.boundary),
            ("damping", &self.damping),
            ("pagerank_tol", &self.pagerank_tol),
            ("pagerank_max_iter", &self.pagerank_max_iter),
            ("vif_threshold", &self.vif_threshold),
            ("response", &self.response),
        ];
        for (key, v) in values {
            if let Some(v) = v {
                cfg.set(key, v, cwd)?;
            }
        }
        if let Some(m) = &self.metrics {
            cfg.metrics = parse_metrics(m)?;
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct cascade trees from the follow graph and event log.
    BuildCascades,
    /// Split cascades and score users under each metric.
    Score,
    /// Compare realized diffusion of each metric's top users.
    Evaluate,
    /// Per-user SWB per period and top/bottom group summaries.
    Swb,
    /// VIF screening and hierarchical regression of SWB on the metrics.
    Regress,
    /// Generate a synthetic dataset and a matching configuration file.
    Simulate(SimulateArgs),
    /// Run build-cascades, score, evaluate, swb and regress in order.
    Pipeline,
}

#[derive(Args)]
struct SimulateArgs {
    /// Output directory.
    #[arg(long, default_value = "data")]
    out: PathBuf,
    #[arg(long = "n-users")]
    n_users: Option<usize>,
    #[arg(long = "n-messages")]
    n_messages: Option<usize>,
    /// preferential_attachment or uniform_random.
    #[arg(long = "graph-model")]
    graph_model: Option<GraphModel>,
    #[arg(long = "edge-param")]
    edge_param: Option<f64>,
    #[arg(long)]
    reciprocity: Option<f64>,
    #[arg(long = "base-prob")]
    base_prob: Option<f64>,
    #[arg(long = "bridge-users")]
    bridge_users: Option<usize>,
    #[arg(long = "bridge-boost")]
    bridge_boost: Option<f64>,
    #[arg(long = "bridge-follow-factor")]
    bridge_follow_factor: Option<f64>,
    #[arg(long = "swb-effect", allow_hyphen_values = true)]
    swb_effect: Option<f64>,
    #[arg(long = "posts-per-period")]
    posts_per_period: Option<usize>,
}

impl SimulateArgs {
    fn config(&self, seed: Option<u64>) -> SynthConfig {
        let d = SynthConfig::default();
        SynthConfig {
            n_users: self.n_users.unwrap_or(d.n_users),
            graph_model: self.graph_model.unwrap_or(d.graph_model),
            edge_param: self.edge_param.unwrap_or(d.edge_param),
            reciprocity: self.reciprocity.unwrap_or(d.reciprocity),
            n_messages: self.n_messages.unwrap_or(d.n_messages),
            base_activation_prob: self.base_prob.unwrap_or(d.base_activation_prob),
            bridge_users: self.bridge_users.unwrap_or(d.bridge_users),
            bridge_boost: self.bridge_boost.unwrap_or(d.bridge_boost),
            bridge_follow_factor: self.bridge_follow_factor.unwrap_or(d.bridge_follow_factor),
            swb_effect: self.swb_effect.unwrap_or(d.swb_effect),
            posts_per_period: self.posts_per_period.unwrap_or(d.posts_per_period),
            period_secs: d.period_secs,
            seed: seed.unwrap_or(d.seed),
        }
    }
}

fn run(cli: &Cli) -> bridgewell::Result<()> {
    if let Command::Simulate(args) = &cli.command {
        let cfg = args.config(cli.overrides.seed);
        let data = generate(&cfg)?;
        write_outputs(&data, &args.out)?;
        if let Some(w) = &data.report.warning {
            eprintln!("warning: {w}");
        }
        println!(
            "simulate: {} users, {} edges, {} messages ({} cascades), {} posts -> {}",
            cfg.n_users,
            data.report.edges,
            data.report.originals,
            data.report.cascades,
            data.report.posts,
            args.out.display()
        );
        return Ok(());
    }

    let mut cfg = PipelineConfig::discover(cli.config.as_deref())?;
    cli.overrides.apply(&mut cfg)?;
    cfg.validate()?;
    let lines = match cli.command {
        Command::BuildCascades => vec![pipeline::run_build_cascades(&cfg)?],
        Command::Score => vec![pipeline::run_score(&cfg)?],
        Command::Evaluate => vec![pipeline::run_evaluate(&cfg)?],
        Command::Swb => vec![pipeline::run_swb(&cfg)?],
        Command::Regress => vec![pipeline::run_regress(&cfg)?],
        Command::Pipeline => pipeline::run_pipeline(&cfg)?,
        Command::Simulate(_) => unreachable!(),
    };
    for l in lines {
        println!("{l}");
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::MissingInput(_) | Error::InvalidArgument { .. } => 2,
        Error::Invariant(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(0) => Err(Error::InvalidArgument {
            field: "threads".into(),
            message: "must be at least 1".into(),
        }),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(Error::Domain(format!("cannot start thread pool: {e}"))),
        },
        None => run(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
