//! Held-out evaluation of a user ranking on realized diffusion.
//!
//! Cascades are split into a scoring set and a test set. The top-ranked users
//! are then credited, in each test cascade where they appear as a non-root,
//! with their strict descendants in the tree: users reached after their
//! retweet.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cascade::CascadeTree;
use crate::error::{Error, Result};
use crate::graph::UserId;
use crate::scores::ScoreTable;

/// Seeded random partition. The training side holds
/// `round(train_fraction * n)` cascades, kept within `1..n`.
pub fn split_cascades(
    cascades: &[CascadeTree],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<CascadeTree>, Vec<CascadeTree>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid("train_fraction", "must lie in (0, 1)"));
    }
    let n = cascades.len();
    if n < 2 {
        return Err(Error::EmptyInput(format!("cannot split {n} cascade(s)")));
    }
    let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let mut train_idx = idx[..n_train].to_vec();
    let mut test_idx = idx[n_train..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((
        train_idx.iter().map(|&i| cascades[i].clone()).collect(),
        test_idx.iter().map(|&i| cascades[i].clone()).collect(),
    ))
}

/// The `ceil(fraction * |users|)` highest-scoring users; ties go to the
/// smaller id.
pub fn top_fraction(scores: &ScoreTable, fraction: f64) -> Result<Vec<UserId>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid("top_fraction", "must lie in (0, 1]"));
    }
    if scores.is_empty() {
        return Err(Error::EmptyInput(format!("score table `{}` is empty", scores.metric)));
    }
    let k = take_count(fraction, scores.len());
    let mut ranked: Vec<(UserId, f64)> = scores.values.iter().map(|(&u, &v)| (u, v)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked.into_iter().take(k).map(|(u, _)| u).collect())
}

/// The `ceil(fraction * |users|)` lowest-scoring users; ties go to the
/// smaller id.
pub fn bottom_fraction(scores: &ScoreTable, fraction: f64) -> Result<Vec<UserId>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid("fraction", "must lie in (0, 1]"));
    }
    if scores.is_empty() {
        return Err(Error::EmptyInput(format!("score table `{}` is empty", scores.metric)));
    }
    let k = take_count(fraction, scores.len());
    let mut ranked: Vec<(UserId, f64)> = scores.values.iter().map(|(&u, &v)| (u, v)).collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    Ok(ranked.into_iter().take(k).map(|(u, _)| u).collect())
}

fn take_count(fraction: f64, n: usize) -> usize {
    // guard against 0.2 * 10 landing a hair above 2
    ((fraction * n as f64 - 1e-9).ceil() as usize).clamp(1, n)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub avg_activated_per_minute: f64,
    pub avg_activated: f64,
    pub pct_impacted: f64,
    /// (user, cascade) pairs with at least one descendant.
    pub pairs: usize,
    pub impacted_users: usize,
    pub participants: usize,
    /// Set when no selected user activated anyone in the test cascades.
    pub warning: bool,
}

struct CascadeCredit {
    // (activated, duration_seconds) per selected non-root with descendants
    pairs: Vec<(usize, i64)>,
    impacted: Vec<UserId>,
}

fn credit(c: &CascadeTree, selected: &HashSet<UserId>) -> CascadeCredit {
    let mut out = CascadeCredit {
        pairs: Vec::new(),
        impacted: Vec::new(),
    };
    let nodes = c.nodes();
    if !nodes.iter().skip(1).any(|u| selected.contains(u)) {
        return out;
    }
    let children = c.children();
    let times = c.times();
    for (i, u) in nodes.iter().enumerate().skip(1) {
        if !selected.contains(u) {
            continue;
        }
        let mut stack = children[i].clone();
        let mut count = 0usize;
        let mut last = times[i];
        while let Some(d) = stack.pop() {
            count += 1;
            last = last.max(times[d]);
            out.impacted.push(nodes[d]);
            stack.extend_from_slice(&children[d]);
        }
        if count > 0 {
            out.pairs.push((count, (last - times[i]).max(1)));
        }
    }
    out
}

/// Realized-diffusion metrics for `selected` over `test` cascades.
pub fn evaluate(selected: &[UserId], test: &[CascadeTree]) -> EvalReport {
    let selected: HashSet<UserId> = selected.iter().copied().collect();
    let credits: Vec<CascadeCredit> = test.par_iter().map(|c| credit(c, &selected)).collect();

    let participants: BTreeSet<UserId> = test.iter().flat_map(|c| c.nodes().iter().copied()).collect();
    let mut impacted: HashSet<UserId> = HashSet::new();
    let (mut pairs, mut activated_sum, mut rate_sum) = (0usize, 0.0f64, 0.0f64);
    for cr in &credits {
        impacted.extend(cr.impacted.iter().copied());
        for &(count, secs) in &cr.pairs {
            pairs += 1;
            activated_sum += count as f64;
            rate_sum += count as f64 / (secs as f64 / 60.0);
        }
    }
    if pairs == 0 {
        return EvalReport {
            avg_activated_per_minute: 0.0,
            avg_activated: 0.0,
            pct_impacted: 0.0,
            pairs: 0,
            impacted_users: 0,
            participants: participants.len(),
            warning: true,
        };
    }
    EvalReport {
        avg_activated_per_minute: rate_sum / pairs as f64,
        avg_activated: activated_sum / pairs as f64,
        pct_impacted: 100.0 * impacted.len() as f64 / participants.len() as f64,
        pairs,
        impacted_users: impacted.len(),
        participants: participants.len(),
        warning: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scores::Metric;
    use std::collections::BTreeMap;

    fn tree(id: &str, edges: &[(u32, u32, i64)]) -> CascadeTree {
        let mut parent = BTreeMap::new();
        let mut times = BTreeMap::from([(UserId(0), 0)]);
        for &(p, c, t) in edges {
            parent.insert(UserId(c), UserId(p));
            times.insert(UserId(c), t);
        }
        CascadeTree::from_parent_map(id, UserId(0), &parent, &times).unwrap()
    }

    // worked example with u1..u8 -> 0..7; u3 at 60s, u4 at 120s, u6 at 180s
    fn example() -> CascadeTree {
        tree("m", &[(0, 1, 30), (0, 2, 60), (2, 3, 120), (2, 5, 180), (1, 6, 200), (6, 7, 260)])
    }

    #[test]
    fn hand_evaluated_rate() {
        let r = evaluate(&[UserId(2)], &[example()]);
        assert_eq!(r.pairs, 1);
        assert_eq!(r.avg_activated, 2.0);
        assert!((r.avg_activated_per_minute - 1.0).abs() < 1e-12);
        assert!((r.pct_impacted - 100.0 * 2.0 / 7.0).abs() < 1e-12);
        assert!(!r.warning);
    }

    #[test]
    fn leaf_only_selection_warns() {
        let r = evaluate(&[UserId(3), UserId(7)], &[example()]);
        assert!(r.warning);
        assert_eq!(r.pct_impacted, 0.0);
        let r = evaluate(&[UserId(42)], &[example()]);
        assert!(r.warning);
    }

    #[test]
    fn one_second_duration_rate() {
        let t = tree("c", &[(0, 1, 10), (1, 2, 11), (0, 3, 12)]);
        let r = evaluate(&[UserId(1)], &[t]);
        assert!((r.avg_activated_per_minute - 60.0).abs() < 1e-9);
    }

    #[test]
    fn split_sizes_and_determinism() {
        let cs: Vec<CascadeTree> = (0..10).map(|i| tree(&format!("m{i}"), &[(0, 1, 5), (0, 2, 6)])).collect();
        let (a, b) = split_cascades(&cs, 0.8, 7).unwrap();
        assert_eq!((a.len(), b.len()), (8, 2));
        let (a2, b2) = split_cascades(&cs, 0.8, 7).unwrap();
        assert_eq!(a, a2);
        assert_eq!(b, b2);
        assert!(split_cascades(&cs[..1], 0.8, 7).is_err());
        assert!(split_cascades(&cs, 1.0, 7).is_err());
    }

    #[test]
    fn top_fraction_counts_and_ties() {
        let mut t = ScoreTable::new(Metric::Ubm);
        for i in 0..10u32 {
            t.values.insert(UserId(i), i as f64);
        }
        assert_eq!(top_fraction(&t, 0.2).unwrap(), vec![UserId(9), UserId(8)]);
        for v in t.values.values_mut() {
            *v = 1.0;
        }
        assert_eq!(top_fraction(&t, 0.2).unwrap(), vec![UserId(0), UserId(1)]);
        assert_eq!(bottom_fraction(&t, 0.2).unwrap(), vec![UserId(0), UserId(1)]);
        assert!(top_fraction(&ScoreTable::new(Metric::Ubm), 0.2).is_err());
    }
}
