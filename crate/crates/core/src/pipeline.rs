//! File-level stage runners shared by the command-line tool and tests.
//!
//! Every stage loads the follow graph first so user names map to the same
//! ids everywhere. Outputs go to `out_dir`:
//!
//! | stage          | reads                                 | writes |
//! |----------------|---------------------------------------|--------|
//! | build-cascades | edges, events                         | `cascades.jsonl` |
//! | score          | edges, events, `cascades.jsonl`       | `cascades_train.jsonl`, `cascades_test.jsonl`, `scores.csv` |
//! | evaluate       | edges, `scores.csv`, `cascades_test.jsonl` | `eval_report.csv` |
//! | swb            | edges, posts (`scores.csv` if present) | `swb.csv`, `group_report.json` |
//! | regress        | edges, `swb.csv`, `scores.csv`        | `regress_report.json` |

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::bridging::ubm;
use crate::cascade::{build_cascades, cascade_stats, load_events, read_cascades, write_cascades, CascadeTree, DiffusionEvent};
use crate::centrality::{
    activity, betweenness, community_centrality, in_degree, load_topic_sim, mix64, out_degree, pagerank, twitterrank,
    RankConfig,
};
use crate::config::{PipelineConfig, Response};
use crate::error::{Error, Result};
use crate::eval::{evaluate, split_cascades, top_fraction, EvalReport};
use crate::graph::{load_graph_named, IdMap, SocialGraph, UserId};
use crate::regression::{hierarchical_regression, vif_screen, DesignMatrix, StageResult, VifScreen};
use crate::scores::{read_scores, write_scores, CentralityVector, Metric, ScoreTable};
use crate::swb::{group_swb_change, load_posts, read_swb, user_swb, write_swb, FileLabels, Period};

pub const CASCADES: &str = "cascades.jsonl";
pub const TRAIN: &str = "cascades_train.jsonl";
pub const TEST: &str = "cascades_test.jsonl";
pub const SCORES: &str = "scores.csv";
pub const EVAL_REPORT: &str = "eval_report.csv";
pub const SWB: &str = "swb.csv";
pub const GROUP_REPORT: &str = "group_report.json";
pub const REGRESS_REPORT: &str = "regress_report.json";

const SPLIT_STREAM: u64 = 1;
const COMMUNITY_STREAM: u64 = 2;

/// Seed for one pipeline stage, derived from the top-level seed.
pub fn stage_seed(seed: u64, stream: u64) -> u64 {
    mix64(seed ^ mix64(stream))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingInput(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })
}

fn create(cfg: &PipelineConfig, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let path = cfg.out(name);
    File::create(&path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(cfg: &PipelineConfig, name: &str, value: &T) -> Result<()> {
    let mut w = create(cfg, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(cfg.out(name), e))
}

pub fn load_graph_file(path: &Path) -> Result<SocialGraph> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(load_graph_named(open(path)?, &name)?.0)
}

fn load_events_file(path: &Path, ids: &IdMap) -> Result<Vec<DiffusionEvent>> {
    Ok(load_events(open(path)?, ids)?.0)
}

fn load_cascade_file(path: &Path, ids: &IdMap) -> Result<Vec<CascadeTree>> {
    read_cascades(open(path)?, ids)
}

fn save_cascades(cfg: &PipelineConfig, name: &str, cs: &[CascadeTree], ids: &IdMap) -> Result<()> {
    let mut w = create(cfg, name)?;
    write_cascades(&mut w, cs, ids)?;
    w.flush().map_err(|e| Error::io(cfg.out(name), e))
}

/// Reconstructs cascades and checks every tree against the graph.
pub fn run_build_cascades(cfg: &PipelineConfig) -> Result<String> {
    let g = load_graph_file(&cfg.edges)?;
    let events = load_events_file(&cfg.events, g.ids())?;
    let set = build_cascades(&g, &events);
    for c in &set.cascades {
        c.validate(&g)
            .map_err(|e| Error::Invariant(format!("cascade {}: {e}", c.message_id())))?;
    }
    save_cascades(cfg, CASCADES, &set.cascades, g.ids())?;
    let stats = cascade_stats(&set.cascades);
    let r = set.report;
    Ok(format!(
        "build-cascades: {} cascades (mean size {:.2}) from {} originals and {} retweets; {} unattached, {} too small",
        stats.count,
        stats.mean_size.unwrap_or(0.0),
        r.originals,
        r.retweets,
        r.unattached_retweeters,
        r.small_cascades
    ))
}

fn compute_metric(
    cfg: &PipelineConfig,
    metric: Metric,
    g: &SocialGraph,
    events: &[DiffusionEvent],
    train: &[CascadeTree],
) -> Result<CentralityVector> {
    let rank = RankConfig {
        damping: cfg.damping,
        tol: cfg.pagerank_tol,
        max_iter: cfg.pagerank_max_iter,
    };
    Ok(match metric {
        Metric::InDegree => in_degree(g),
        Metric::OutDegree => out_degree(g),
        Metric::PageRank => pagerank(g, rank)?.scores,
        Metric::TwitterRank => {
            let sim = match &cfg.topic_sim {
                Some(p) => Some(load_topic_sim(open(p)?, g.ids())?),
                None => None,
            };
            let posts = activity(g.node_count(), events).values;
            twitterrank(g, sim.as_ref(), &posts, rank)?.scores
        }
        Metric::Betweenness => betweenness(g),
        Metric::Community => community_centrality(g, stage_seed(cfg.seed, COMMUNITY_STREAM)),
        Metric::Activity => activity(g.node_count(), events),
        Metric::Ubm => {
            let t = ubm(train)?;
            CentralityVector::new(Metric::Ubm, g.users().map(|u| t.ubm_of(u)).collect())
        }
    })
}

/// Splits cascades and scores every user who takes part in a training
/// cascade under each configured metric.
pub fn run_score(cfg: &PipelineConfig) -> Result<String> {
    let g = load_graph_file(&cfg.edges)?;
    let cascades = load_cascade_file(&cfg.out(CASCADES), g.ids())?;
    let events = load_events_file(&cfg.events, g.ids())?;
    let (train, test) = split_cascades(&cascades, cfg.train_fraction, stage_seed(cfg.seed, SPLIT_STREAM))?;
    save_cascades(cfg, TRAIN, &train, g.ids())?;
    save_cascades(cfg, TEST, &test, g.ids())?;

    let universe: BTreeSet<UserId> = train.iter().flat_map(|c| c.nodes().iter().copied()).collect();
    let tables = cfg
        .metrics
        .iter()
        .map(|&m| Ok(compute_metric(cfg, m, &g, &events, &train)?.restrict(universe.iter().copied())))
        .collect::<Result<Vec<ScoreTable>>>()?;
    let mut w = create(cfg, SCORES)?;
    write_scores(&mut w, &tables, g.ids())?;
    w.flush().map_err(|e| Error::io(cfg.out(SCORES), e))?;
    let names: Vec<&str> = cfg.metrics.iter().map(|m| m.as_str()).collect();
    Ok(format!(
        "score: {} train / {} test cascades; {} users scored on {}",
        train.len(),
        test.len(),
        universe.len(),
        names.join(",")
    ))
}

/// Evaluates the top fraction of each scored metric on the test cascades.
pub fn run_evaluate(cfg: &PipelineConfig) -> Result<String> {
    let g = load_graph_file(&cfg.edges)?;
    let tables = read_scores(open(&cfg.out(SCORES))?, g.ids())?;
    let test = load_cascade_file(&cfg.out(TEST), g.ids())?;
    let mut rows: Vec<(Metric, EvalReport)> = Vec::new();
    for t in &tables {
        rows.push((t.metric, evaluate(&top_fraction(t, cfg.top_fraction)?, &test)));
    }
    let mut w = csv::Writer::from_writer(create(cfg, EVAL_REPORT)?);
    let io = |e: csv::Error| Error::io(cfg.out(EVAL_REPORT), e.into());
    w.write_record([
        "metric",
        "avg_activated_per_minute",
        "avg_activated",
        "pct_impacted",
        "pairs",
        "impacted_users",
        "participants",
        "warning",
    ])
    .map_err(io)?;
    for (m, r) in &rows {
        w.write_record([
            m.as_str().to_string(),
            r.avg_activated_per_minute.to_string(),
            r.avg_activated.to_string(),
            r.pct_impacted.to_string(),
            r.pairs.to_string(),
            r.impacted_users.to_string(),
            r.participants.to_string(),
            r.warning.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(cfg.out(EVAL_REPORT), e))?;
    let best = rows
        .iter()
        .max_by(|a, b| a.1.avg_activated.total_cmp(&b.1.avg_activated))
        .map(|(m, r)| format!("{m} ({:.3})", r.avg_activated))
        .unwrap_or_default();
    Ok(format!(
        "evaluate: {} metrics on {} test cascades; highest avg_activated: {best}",
        rows.len(),
        test.len()
    ))
}

/// Per-user SWB per period, plus top/bottom UBM group summaries when scores
/// are available.
pub fn run_swb(cfg: &PipelineConfig) -> Result<String> {
    let boundary = cfg
        .boundary
        .ok_or_else(|| Error::invalid("boundary", "the period boundary timestamp must be set"))?;
    let g = load_graph_file(&cfg.edges)?;
    let mut ids = g.ids().clone();
    let posts = load_posts(open(&cfg.posts)?, &mut ids, &FileLabels)?;
    let records = user_swb(&posts, boundary, cfg.min_posts);
    let mut w = create(cfg, SWB)?;
    write_swb(&mut w, &records, &ids)?;
    w.flush().map_err(|e| Error::io(cfg.out(SWB), e))?;

    let mut summary = format!("swb: {} user-period records from {} posts", records.len(), posts.len());
    let scores_path = cfg.out(SCORES);
    if scores_path.is_file() {
        let tables = read_scores(open(&scores_path)?, &ids)?;
        if let Some(t) = tables.iter().find(|t| t.metric == Metric::Ubm) {
            let report = group_swb_change(&records, t, cfg.top_fraction)?;
            summary += &format!(
                "; SWB change top {:+.4}, bottom {:+.4}",
                report.top.change, report.bottom.change
            );
            write_json(cfg, GROUP_REPORT, &report)?;
        }
    }
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct RegressReport {
    pub response: String,
    pub n: usize,
    pub vif: VifScreen,
    /// Stage groups whose columns were all removed by screening.
    pub skipped_stages: Vec<Vec<String>>,
    pub stages: Vec<StageResult>,
}

pub const REGRESSION_STAGES: [&[Metric]; 3] = [
    &[Metric::InDegree, Metric::OutDegree, Metric::PageRank, Metric::Betweenness],
    &[Metric::Activity],
    &[Metric::Ubm],
];

/// Builds the per-user design matrix from scored users with an SWB
/// response. Columns follow the order of `tables`.
pub fn design_matrix(tables: &[ScoreTable], records: &[crate::swb::SwbRecord], response: Response) -> Result<DesignMatrix> {
    let mut by_user: BTreeMap<UserId, [Option<f64>; 2]> = BTreeMap::new();
    for r in records {
        let slot = match r.period {
            Period::Before => 0,
            Period::During => 1,
        };
        by_user.entry(r.user).or_default()[slot] = Some(r.swb);
    }
    let mut users = Vec::new();
    let mut y = Vec::new();
    for (&u, v) in &by_user {
        if !tables.iter().all(|t| t.get(u).is_some()) {
            continue;
        }
        let value = match (response, v) {
            (Response::SwbDuring, [_, Some(d)]) => *d,
            (Response::SwbChange, [Some(b), Some(d)]) => d - b,
            _ => continue,
        };
        users.push(u);
        y.push(value);
    }
    let mut x = DesignMatrix::new(response.as_str(), y)?;
    for t in tables {
        x.add_column(t.metric.as_str(), users.iter().map(|&u| t.get(u).unwrap()).collect())?;
    }
    Ok(x)
}

/// VIF screening over all scored metrics, then a three-stage hierarchical
/// regression: graph position, activity, UBM.
pub fn run_regress(cfg: &PipelineConfig) -> Result<String> {
    let g = load_graph_file(&cfg.edges)?;
    let mut ids = g.ids().clone();
    let records = read_swb(open(&cfg.out(SWB))?, &mut ids)?;
    let tables = read_scores(open(&cfg.out(SCORES))?, &ids)?;
    let x = design_matrix(&tables, &records, cfg.response)?;
    let report = regress(&x, cfg.vif_threshold)?;
    write_json(cfg, REGRESS_REPORT, &report)?;
    let last = report.stages.last();
    let ubm_t = last
        .and_then(|s| s.coefficients.iter().find(|c| c.name == Metric::Ubm.as_str()))
        .map(|c| format!("{:.3}", c.t))
        .unwrap_or_else(|| "n/a".into());
    Ok(format!(
        "regress: n = {}, {} stages, kept {}/{} predictors, final R² {:.4}, t(ubm) {ubm_t}",
        report.n,
        report.stages.len(),
        report.vif.kept.len(),
        x.names().len(),
        last.map_or(0.0, |s| s.r2)
    ))
}

/// Screening plus staged fits on an assembled design matrix.
pub fn regress(x: &DesignMatrix, vif_threshold: f64) -> Result<RegressReport> {
    let vif = vif_screen(x, vif_threshold)?;
    let mut stages: Vec<Vec<String>> = Vec::new();
    let mut skipped = Vec::new();
    for group in REGRESSION_STAGES {
        let names: Vec<String> = group.iter().map(|m| m.as_str().to_string()).collect();
        let kept: Vec<String> = names.iter().filter(|n| vif.kept.contains(n)).cloned().collect();
        if kept.is_empty() {
            skipped.push(names);
        } else {
            stages.push(kept);
        }
    }
    let results = if stages.is_empty() { Vec::new() } else { hierarchical_regression(x, &stages)? };
    Ok(RegressReport {
        response: x.response_name().to_string(),
        n: x.rows(),
        vif,
        skipped_stages: skipped,
        stages: results,
    })
}

/// All analysis stages in order.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Vec<String>> {
    Ok(vec![
        run_build_cascades(cfg)?,
        run_score(cfg)?,
        run_evaluate(cfg)?,
        run_swb(cfg)?,
        run_regress(cfg)?,
    ])
}
