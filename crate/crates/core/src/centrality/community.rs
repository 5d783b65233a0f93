//! Label-propagation communities and a neighbor-community diversity score.
//!
//! The score of a user is the effective number of communities (inverse
//! Simpson index) in their closed neighborhood, ignoring edge direction,
//! divided by the total number of communities. It equals the distinct
//! community count over the total when neighbors are spread evenly.

use std::collections::HashMap;

use rayon::prelude::*;

use super::mix64;
use crate::graph::{SocialGraph, UserId};
use crate::scores::{CentralityVector, Metric};

const MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Communities {
    /// Dense community label per user, numbered by first appearance.
    pub labels: Vec<u32>,
    pub count: usize,
    pub iterations: usize,
    pub converged: bool,
}

fn undirected_neighbors(g: &SocialGraph, u: UserId) -> Vec<UserId> {
    let (a, b) = (g.followers(u), g.followees(u));
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next);
    }
    out
}

/// Synchronous label propagation on the undirected view. Each user adopts
/// the most frequent label in its closed neighborhood; ties are broken by a
/// hash of `(seed, iteration, user, label)`.
pub fn label_propagation(g: &SocialGraph, seed: u64) -> Communities {
    let n = g.node_count();
    let neighbors: Vec<Vec<UserId>> = g.users().map(|u| undirected_neighbors(g, u)).collect();
    let mut labels: Vec<u32> = (0..n as u32).collect();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < MAX_ITER {
        let iter_key = mix64(seed ^ mix64(iterations as u64));
        iterations += 1;
        let next: Vec<u32> = (0..n)
            .into_par_iter()
            .map(|u| {
                let mut counts: HashMap<u32, u32> = HashMap::new();
                *counts.entry(labels[u]).or_default() += 1;
                for v in &neighbors[u] {
                    *counts.entry(labels[v.index()]).or_default() += 1;
                }
                let best = counts.values().copied().max().unwrap_or(0);
                counts
                    .into_iter()
                    .filter(|&(_, c)| c == best)
                    .map(|(l, _)| l)
                    .min_by_key(|&l| (mix64(iter_key ^ mix64(((u as u64) << 32) | l as u64)), l))
                    .unwrap_or(labels[u])
            })
            .collect();
        let changed = next != labels;
        labels = next;
        if !changed {
            converged = true;
            break;
        }
    }

    let mut remap: HashMap<u32, u32> = HashMap::new();
    let dense: Vec<u32> = labels
        .iter()
        .map(|l| {
            let k = remap.len() as u32;
            *remap.entry(*l).or_insert(k)
        })
        .collect();
    Communities {
        count: remap.len(),
        labels: dense,
        iterations,
        converged,
    }
}

pub fn community_centrality(g: &SocialGraph, seed: u64) -> CentralityVector {
    let comms = label_propagation(g, seed);
    let total = comms.count.max(1) as f64;
    let values = g
        .users()
        .map(|u| {
            let mut counts: HashMap<u32, f64> = HashMap::new();
            *counts.entry(comms.labels[u.index()]).or_default() += 1.0;
            let nb = undirected_neighbors(g, u);
            for v in &nb {
                *counts.entry(comms.labels[v.index()]).or_default() += 1.0;
            }
            let size = (nb.len() + 1) as f64;
            let simpson: f64 = counts.values().map(|c| (c / size) * (c / size)).sum();
            (1.0 / simpson) / total
        })
        .collect();
    CentralityVector::new(Metric::Community, values)
}
