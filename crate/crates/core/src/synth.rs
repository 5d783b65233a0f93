//! Synthetic benchmark data: a follow graph, independent-cascade diffusion
//! logs with planted bridge users, and sentiment-labeled posts whose
//! during-period positivity depends on bridge membership.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::cascade::{write_events, DiffusionEvent};
use crate::centrality::mix64;
use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, SocialGraph, UserId};
use crate::swb::{write_posts, LabeledPost, PostKind, Sentiment};

const ROUND_SECS: i64 = 60;
const MAX_JITTER_SECS: i64 = 30;
const MAX_ROUNDS: i64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphModel {
    PreferentialAttachment,
    UniformRandom,
}

impl FromStr for GraphModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "preferential_attachment" | "pa" => Ok(GraphModel::PreferentialAttachment),
            "uniform_random" | "uniform" => Ok(GraphModel::UniformRandom),
            other => Err(Error::invalid("graph_model", format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthConfig {
    pub n_users: usize,
    pub graph_model: GraphModel,
    /// Accounts followed by each new user (preferential attachment) or per
    /// user (uniform random).
    pub edge_param: f64,
    /// Chance that a follow is returned.
    pub reciprocity: f64,
    pub n_messages: usize,
    pub base_activation_prob: f64,
    pub bridge_users: usize,
    pub bridge_boost: f64,
    /// Planted bridges follow this many times as many accounts as others.
    pub bridge_follow_factor: f64,
    /// Shift in during-period positive share for planted bridges.
    pub swb_effect: f64,
    /// Mean posts per user per period.
    pub posts_per_period: usize,
    /// Length of each period in seconds; the second period starts here.
    pub period_secs: i64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_users: 2000,
            graph_model: GraphModel::UniformRandom,
            edge_param: 8.0,
            reciprocity: 0.1,
            n_messages: 3000,
            base_activation_prob: 0.05,
            bridge_users: 120,
            bridge_boost: 5.0,
            bridge_follow_factor: 2.25,
            swb_effect: -0.2,
            posts_per_period: 12,
            period_secs: 14 * 86_400,
            seed: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_users < 3 {
            return Err(Error::invalid("n_users", "must be at least 3"));
        }
        if !(self.edge_param >= 1.0) || self.edge_param.round() as usize >= self.n_users {
            return Err(Error::invalid("edge_param", "must be in [1, n_users)"));
        }
        if !(0.0..=1.0).contains(&self.reciprocity) {
            return Err(Error::invalid("reciprocity", "must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.base_activation_prob) {
            return Err(Error::invalid("base_activation_prob", "must lie in [0, 1)"));
        }
        if !(self.bridge_boost >= 1.0) || !self.bridge_boost.is_finite() {
            return Err(Error::invalid("bridge_boost", "must be at least 1"));
        }
        if !(self.bridge_follow_factor >= 1.0) || !self.bridge_follow_factor.is_finite() {
            return Err(Error::invalid("bridge_follow_factor", "must be at least 1"));
        }
        if self.bridge_users > self.n_users {
            return Err(Error::invalid("bridge_users", "exceeds n_users"));
        }
        if !self.swb_effect.is_finite() {
            return Err(Error::invalid("swb_effect", "must be finite"));
        }
        if self.period_secs <= 0 {
            return Err(Error::invalid("period_secs", "must be positive"));
        }
        Ok(())
    }

    /// Timestamp separating the two post periods.
    pub fn boundary(&self) -> i64 {
        self.period_secs
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SynthReport {
    pub edges: usize,
    pub originals: usize,
    pub retweets: usize,
    /// Messages that reached at least two retweeters.
    pub cascades: usize,
    pub posts: usize,
    pub warning: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub config: SynthConfig,
    pub graph: SocialGraph,
    pub events: Vec<DiffusionEvent>,
    pub posts: Vec<LabeledPost>,
    /// Planted bridge users, ascending.
    pub bridges: Vec<UserId>,
    pub report: SynthReport,
}

impl SynthData {
    pub fn is_bridge(&self, u: UserId) -> bool {
        self.bridges.binary_search(&u).is_ok()
    }
}

fn stream(seed: u64, tag: u64, k: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix64(seed ^ mix64(tag) ^ mix64(k.wrapping_add(0x5eed))))
}

fn user_name(i: usize) -> String {
    format!("u{i}")
}

fn build_graph(cfg: &SynthConfig, is_bridge: &[bool]) -> SocialGraph {
    let n = cfg.n_users;
    let m = cfg.edge_param.round() as usize;
    let mb = ((cfg.edge_param * cfg.bridge_follow_factor).round() as usize).min(n - 1);
    let quota = |i: usize| if is_bridge[i] { mb } else { m };
    let mut rng = stream(cfg.seed, 1, 0);
    let mut follows: Vec<(usize, usize)> = Vec::new();
    match cfg.graph_model {
        GraphModel::PreferentialAttachment => {
            // each user appears once plus once per follower gained
            let mut targets: Vec<usize> = Vec::new();
            for i in 0..n {
                if i <= quota(i) {
                    for j in 0..i {
                        follows.push((i, j));
                        targets.push(j);
                    }
                } else {
                    let k = quota(i);
                    let mut chosen: Vec<usize> = Vec::with_capacity(k);
                    while chosen.len() < k {
                        let t = targets[rng.random_range(0..targets.len())];
                        if !chosen.contains(&t) {
                            chosen.push(t);
                        }
                    }
                    for &j in &chosen {
                        follows.push((i, j));
                        targets.push(j);
                    }
                }
                targets.push(i);
            }
        }
        GraphModel::UniformRandom => {
            for i in 0..n {
                for j in sample(&mut rng, n - 1, quota(i)) {
                    let j = if j >= i { j + 1 } else { j };
                    follows.push((i, j));
                }
            }
        }
    }
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.add_user(&user_name(i));
    }
    for (a, c) in follows {
        b.add_follow(&user_name(a), &user_name(c));
        if rng.random::<f64>() < cfg.reciprocity {
            b.add_follow(&user_name(c), &user_name(a));
        }
    }
    b.build().0
}

fn simulate_message(
    cfg: &SynthConfig,
    g: &SocialGraph,
    is_bridge: &[bool],
    roots: &WeightedIndex<f64>,
    k: usize,
) -> Vec<DiffusionEvent> {
    let mut rng = stream(cfg.seed, 2, k as u64);
    let n = g.node_count();
    let root = UserId(roots.sample(&mut rng) as u32);
    let t0 = rng.random_range(0..2 * cfg.period_secs);
    let msg = format!("m{k}");
    let mut events = vec![DiffusionEvent::original(root, t0, msg.clone())];
    let mut active = vec![false; n];
    active[root.index()] = true;
    let mut frontier = vec![root];
    let mut round = 0;
    while !frontier.is_empty() && round < MAX_ROUNDS {
        round += 1;
        let mut next = Vec::new();
        for &u in &frontier {
            let mut p = cfg.base_activation_prob;
            if is_bridge[u.index()] {
                p = (p * cfg.bridge_boost).min(1.0);
            }
            for &v in g.followers(u) {
                if active[v.index()] || rng.random::<f64>() >= p {
                    continue;
                }
                active[v.index()] = true;
                let t = t0 + ROUND_SECS * round + rng.random_range(0..MAX_JITTER_SECS);
                events.push(DiffusionEvent::retweet(v, t, format!("{msg}r{}", events.len()), msg.clone()));
                next.push(v);
            }
        }
        frontier = next;
    }
    events
}

fn user_posts(cfg: &SynthConfig, u: UserId, bridge: bool) -> Vec<LabeledPost> {
    let mut rng = stream(cfg.seed, 3, u.0 as u64);
    let noise = Normal::new(0.0, 0.1).expect("valid normal");
    let mut out = Vec::new();
    for (period, lo) in [(0, 0), (1, cfg.period_secs)] {
        let shift = if period == 1 && bridge { cfg.swb_effect } else { 0.0 };
        let share = (0.5 + shift + noise.sample(&mut rng)).clamp(0.0, 1.0);
        let mean = cfg.posts_per_period.max(1);
        let count = rng.random_range(mean.div_ceil(2)..=mean + mean / 2);
        for _ in 0..count {
            let time = lo + rng.random_range(0..cfg.period_secs);
            let kind = match rng.random::<f64>() {
                x if x < 0.8 => PostKind::Original,
                x if x < 0.9 => PostKind::Quote,
                _ => PostKind::Retweet,
            };
            let sentiment = if rng.random::<f64>() < 0.3 {
                Sentiment::Neutral
            } else if rng.random::<f64>() < share {
                Sentiment::Positive
            } else {
                Sentiment::Negative
            };
            out.push(LabeledPost { user: u, time, sentiment, kind });
        }
    }
    out
}

/// Generates a full synthetic dataset. Identical configs yield identical
/// data regardless of the thread count.
pub fn generate(cfg: &SynthConfig) -> Result<SynthData> {
    cfg.validate()?;
    let n = cfg.n_users;
    let mut rng = stream(cfg.seed, 4, 0);
    let mut bridges: Vec<UserId> = sample(&mut rng, n, cfg.bridge_users)
        .into_iter()
        .map(|i| UserId(i as u32))
        .collect();
    bridges.sort_unstable();
    let mut is_bridge = vec![false; n];
    for b in &bridges {
        is_bridge[b.index()] = true;
    }
    let graph = build_graph(cfg, &is_bridge);

    // accounts with larger audiences post more
    let roots = WeightedIndex::new(graph.users().map(|u| (graph.in_degree(u) + 1) as f64)).expect("positive weights");
    let per_message: Vec<Vec<DiffusionEvent>> = (0..cfg.n_messages)
        .into_par_iter()
        .map(|k| simulate_message(cfg, &graph, &is_bridge, &roots, k))
        .collect();
    let cascades = per_message.iter().filter(|e| e.len() >= 3).count();
    let events: Vec<DiffusionEvent> = per_message.into_iter().flatten().collect();

    let posts: Vec<LabeledPost> = (0..n)
        .into_par_iter()
        .map(|i| user_posts(cfg, UserId(i as u32), is_bridge[i]))
        .flatten()
        .collect();

    let originals = cfg.n_messages;
    let report = SynthReport {
        edges: graph.edge_count(),
        originals,
        retweets: events.len() - originals,
        cascades,
        posts: posts.len(),
        warning: (cascades == 0).then(|| {
            format!("{cascades} cascades with two or more retweeters; activation probability may be too low")
        }),
    };
    Ok(SynthData {
        config: cfg.clone(),
        graph,
        events,
        posts,
        bridges,
        report,
    })
}

#[derive(Serialize)]
struct GroundTruth<'a> {
    config: &'a SynthConfig,
    boundary: i64,
    bridges: Vec<&'a str>,
    report: &'a SynthReport,
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<fs::File>> {
    let path = dir.join(name);
    fs::File::create(&path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes `edges.csv`, `events.csv`, `posts.csv`, `ground_truth.json` and a
/// `bridgewell.conf` pointing at them into `dir`.
pub fn write_outputs(data: &SynthData, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let ids = data.graph.ids();
    let io = |name: &'static str| move |e: std::io::Error| Error::io(dir.join(name), e);

    let mut w = csv::Writer::from_writer(create(dir, "edges.csv")?);
    w.write_record(["follower", "followee"]).map_err(|e| io("edges.csv")(e.into()))?;
    for (src, dst) in data.graph.edges() {
        w.write_record([ids.name(dst), ids.name(src)]).map_err(|e| io("edges.csv")(e.into()))?;
    }
    w.flush().map_err(io("edges.csv"))?;

    write_events(create(dir, "events.csv")?, &data.events, ids).map_err(io("events.csv"))?;
    write_posts(create(dir, "posts.csv")?, &data.posts, ids).map_err(io("posts.csv"))?;

    let truth = GroundTruth {
        config: &data.config,
        boundary: data.config.boundary(),
        bridges: data.bridges.iter().map(|&b| ids.name(b)).collect(),
        report: &data.report,
    };
    let mut w = create(dir, "ground_truth.json")?;
    serde_json::to_writer_pretty(&mut w, &truth)?;
    writeln!(w).map_err(io("ground_truth.json"))?;
    w.flush().map_err(io("ground_truth.json"))?;

    let mut w = create(dir, "bridgewell.conf")?;
    write!(
        w,
        "# written by `bridgewell simulate`; paths are relative to this file\n\
         edges = edges.csv\nevents = events.csv\nposts = posts.csv\nout_dir = out\n\
         seed = {}\nboundary = {}\n",
        data.config.seed,
        data.config.boundary()
    )
    .map_err(io("bridgewell.conf"))?;
    w.flush().map_err(io("bridgewell.conf"))?;
    Ok(())
}
