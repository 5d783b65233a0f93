//! Random-walk rankings: PageRank and a TwitterRank-style weighted variant.
//!
//! The walker moves from a follower to one of the accounts it follows, so
//! rank accumulates on widely followed users. Walkers at users who follow
//! nobody jump uniformly.

use std::collections::HashMap;
use std::io::Read;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{IdMap, SocialGraph, UserId};
use crate::scores::{CentralityVector, Metric};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RankConfig {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

impl RankConfig {
    fn check(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::invalid("damping", "must lie in (0, 1)"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("pagerank_tol", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankResult {
    pub scores: CentralityVector,
    pub iterations: usize,
    pub converged: bool,
}

/// Symmetric pairwise topic similarity. Pairs not listed use `default`.
#[derive(Debug, Clone)]
pub struct TopicSimilarity {
    pairs: HashMap<(UserId, UserId), f64>,
    default: f64,
}

impl Default for TopicSimilarity {
    fn default() -> Self {
        Self::uniform()
    }
}

impl TopicSimilarity {
    pub fn uniform() -> Self {
        Self {
            pairs: HashMap::new(),
            default: 1.0,
        }
    }

    pub fn set(&mut self, a: UserId, b: UserId, sim: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&sim) {
            return Err(Error::invalid("similarity", format!("{sim} outside [0, 1]")));
        }
        self.pairs.insert(key(a, b), sim);
        Ok(())
    }

    pub fn get(&self, a: UserId, b: UserId) -> f64 {
        self.pairs.get(&key(a, b)).copied().unwrap_or(self.default)
    }
}

fn key(a: UserId, b: UserId) -> (UserId, UserId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Reads `user_a,user_b,similarity` rows. Unknown users are skipped.
pub fn load_topic_sim<R: Read>(reader: R, ids: &IdMap) -> Result<TopicSimilarity> {
    const SRC: &str = "topic_sim.csv";
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::parse(SRC, 1, e.to_string()))?.clone();
    if headers.iter().ne(["user_a", "user_b", "similarity"]) {
        return Err(Error::parse(SRC, 1, "expected header `user_a,user_b,similarity`"));
    }
    let mut sim = TopicSimilarity::uniform();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(SRC, e.position().map(|p| p.line()).unwrap_or(0), e.to_string()))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let value: f64 = rec[2]
            .parse()
            .map_err(|_| Error::parse(SRC, line, format!("bad similarity `{}`", &rec[2])))?;
        if let (Some(a), Some(b)) = (ids.get(&rec[0]), ids.get(&rec[1])) {
            sim.set(a, b, value).map_err(|e| Error::parse(SRC, line, e.to_string()))?;
        }
    }
    Ok(sim)
}

/// Classic PageRank with uniform teleportation.
pub fn pagerank(g: &SocialGraph, config: RankConfig) -> Result<RankResult> {
    config.check()?;
    let probs = transition(g, |_, _| 1.0);
    Ok(power_iterate(g, &probs, config, Metric::PageRank))
}

/// PageRank whose step from follower `v` to followee `u` has weight
/// `post_counts[u] * sim(v, u)`, row-normalized. Rows whose weights are all
/// zero fall back to uniform over the followees.
pub fn twitterrank(
    g: &SocialGraph,
    topic_sim: Option<&TopicSimilarity>,
    post_counts: &[f64],
    config: RankConfig,
) -> Result<RankResult> {
    config.check()?;
    if post_counts.len() != g.node_count() {
        return Err(Error::invalid("post_counts", "length must equal the node count"));
    }
    if post_counts.iter().any(|&c| !(c >= 0.0)) {
        return Err(Error::invalid("post_counts", "counts must be non-negative"));
    }
    let uniform = TopicSimilarity::uniform();
    let sim = topic_sim.unwrap_or(&uniform);
    let probs = transition(g, |v, u| post_counts[u.index()] * sim.get(v, u));
    Ok(power_iterate(g, &probs, config, Metric::TwitterRank))
}

/// `probs[u][k]` is the probability of stepping from `followers(u)[k]` to `u`.
fn transition(g: &SocialGraph, weight: impl Fn(UserId, UserId) -> f64 + Sync) -> Vec<Vec<f64>> {
    // row totals per walker v over its followees
    let totals: Vec<f64> = g
        .users()
        .map(|v| g.followees(v).iter().map(|&u| weight(v, u)).sum())
        .collect();
    g.users()
        .map(|u| {
            g.followers(u)
                .iter()
                .map(|&v| {
                    let t = totals[v.index()];
                    if t > 0.0 {
                        weight(v, u) / t
                    } else {
                        1.0 / g.out_degree(v) as f64
                    }
                })
                .collect()
        })
        .collect()
}

fn power_iterate(g: &SocialGraph, probs: &[Vec<f64>], config: RankConfig, metric: Metric) -> RankResult {
    let n = g.node_count();
    if n == 0 {
        return RankResult {
            scores: CentralityVector::new(metric, Vec::new()),
            iterations: 0,
            converged: true,
        };
    }
    let nf = n as f64;
    let d = config.damping;
    let dangling: Vec<usize> = g.users().filter(|&v| g.out_degree(v) == 0).map(|v| v.index()).collect();
    let mut x = vec![1.0 / nf; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iter {
        iterations += 1;
        let dangling_mass: f64 = dangling.iter().map(|&v| x[v]).sum();
        let base = (1.0 - d) / nf + d * dangling_mass / nf;
        let next: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|u| {
                let inflow: f64 = g.followers(UserId(u as u32))
                    .iter()
                    .zip(&probs[u])
                    .map(|(v, p)| x[v.index()] * p)
                    .sum();
                base + d * inflow
            })
            .collect();
        let delta: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if delta < config.tol {
            converged = true;
            break;
        }
    }
    // remove accumulated rounding drift
    let total: f64 = x.iter().sum();
    for v in &mut x {
        *v /= total;
    }
    RankResult {
        scores: CentralityVector::new(metric, x),
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn build(follows: &[(&str, &str)], extra: &[&str]) -> SocialGraph {
        let mut b = GraphBuilder::new();
        for n in extra {
            b.add_user(n);
        }
        for &(f, e) in follows {
            b.add_follow(f, e);
        }
        b.build().0
    }

    #[test]
    fn single_node() {
        let g = build(&[], &["a"]);
        let r = pagerank(&g, RankConfig::default()).unwrap();
        assert_eq!(r.scores.values, vec![1.0]);
        assert!(r.converged);
    }

    #[test]
    fn mutual_pair_is_even() {
        let g = build(&[("a", "b"), ("b", "a")], &[]);
        let r = pagerank(&g, RankConfig::default()).unwrap();
        for v in r.scores.values {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn followed_user_ranks_higher() {
        let g = build(&[("a", "c"), ("b", "c"), ("c", "a")], &[]);
        let r = pagerank(&g, RankConfig::default()).unwrap();
        let c = g.user("c").unwrap();
        let b = g.user("b").unwrap();
        assert!(r.scores.get(c) > r.scores.get(b));
        assert!((r.scores.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(r.scores.values.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn non_convergence_is_flagged() {
        let g = build(&[("a", "b"), ("b", "c"), ("c", "a"), ("d", "a")], &[]);
        let r = pagerank(&g, RankConfig { max_iter: 2, ..Default::default() }).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 2);
    }

    #[test]
    fn bad_damping_rejected() {
        let g = build(&[("a", "b")], &[]);
        assert!(pagerank(&g, RankConfig { damping: 1.0, ..Default::default() }).is_err());
    }

    #[test]
    fn twitterrank_zero_rows_fall_back_to_uniform() {
        let g = build(&[("a", "b"), ("a", "c"), ("b", "a")], &[]);
        let zeros = vec![0.0; 3];
        let tr = twitterrank(&g, None, &zeros, RankConfig::default()).unwrap();
        let pr = pagerank(&g, RankConfig::default()).unwrap();
        for (a, b) in tr.scores.values.iter().zip(&pr.scores.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn similarity_is_symmetric_and_bounded() {
        let mut s = TopicSimilarity::uniform();
        s.set(UserId(3), UserId(1), 0.25).unwrap();
        assert_eq!(s.get(UserId(1), UserId(3)), 0.25);
        assert_eq!(s.get(UserId(1), UserId(2)), 1.0);
        assert!(s.set(UserId(0), UserId(1), 1.5).is_err());
    }
}
