//! Cascade bridging value and user bridging magnitude (UBM).
//!
//! For a cascade `C` represented by its root-to-leaf paths, the bridging
//! value of a non-root user `u` is the mean over paths `S` of
//! `|S*(u)| / |S|`, where `S*(u)` is the suffix of `S` starting at `u` (empty
//! when `u` is not on `S`). UBM sums a user's bridging values over all
//! cascades and divides by the largest number of cascades any non-root
//! participant took part in.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::cascade::CascadeTree;
use crate::error::{Error, Result};
use crate::graph::UserId;

/// Bridging value of `u` in `c`, evaluated over the explicit path set.
///
/// Returns 0 when `u` is not in the cascade. The root has no bridging value.
pub fn cascade_bridging_value(c: &CascadeTree, u: UserId) -> Result<f64> {
    if u == c.root() {
        return Err(Error::Domain(format!(
            "bridging value is not applicable to the root user {u} of {}",
            c.message_id()
        )));
    }
    let paths = c.paths();
    let total: f64 = paths
        .iter()
        .map(|p| match p.nodes().iter().position(|&n| n == u) {
            Some(i) => (p.len() - i) as f64 / p.len() as f64,
            None => 0.0,
        })
        .sum();
    Ok(total / paths.len() as f64)
}

/// Bridging values of every non-root node of `c`, in activation order.
///
/// Uses subtree accumulation instead of enumerating paths: a leaf `l` at
/// depth `L_l` contributes `1 - (d_u - 1) / L_l` to each ancestor `u` at
/// depth `d_u`.
pub fn bridging_values(c: &CascadeTree) -> Vec<(UserId, f64)> {
    let n = c.size();
    let parents = c.parent_indices();
    let depth = c.depths();
    let mut is_leaf = vec![true; n];
    for p in parents.iter().flatten() {
        is_leaf[*p as usize] = false;
    }
    let mut leaves = vec![0.0f64; n];
    let mut inv_len = vec![0.0f64; n];
    for i in (0..n).rev() {
        if is_leaf[i] {
            leaves[i] += 1.0;
            inv_len[i] += 1.0 / depth[i] as f64;
        }
        if let Some(p) = parents[i] {
            leaves[p as usize] += leaves[i];
            inv_len[p as usize] += inv_len[i];
        }
    }
    let total_leaves = leaves[0];
    c.nodes()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &u)| {
            let alpha = (leaves[i] - (depth[i] - 1) as f64 * inv_len[i]) / total_leaves;
            (u, alpha)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgingScore {
    pub user: UserId,
    pub ubm: f64,
    pub alpha_sum: f64,
    pub cascades_participated: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UbmTable {
    /// One entry per non-root participant, sorted by user.
    pub scores: Vec<BridgingScore>,
    /// The normalizer: largest participation count over all users.
    pub max_participation: usize,
}

impl UbmTable {
    pub fn get(&self, u: UserId) -> Option<&BridgingScore> {
        self.scores
            .binary_search_by_key(&u, |s| s.user)
            .ok()
            .map(|i| &self.scores[i])
    }

    /// UBM of `u`, zero for users who never appear as a non-root.
    pub fn ubm_of(&self, u: UserId) -> f64 {
        self.get(u).map_or(0.0, |s| s.ubm)
    }
}

/// Computes UBM over a set of cascades. Roots neither contribute bridging
/// value nor count toward participation.
pub fn ubm(cascades: &[CascadeTree]) -> Result<UbmTable> {
    if cascades.is_empty() {
        return Err(Error::EmptyInput("UBM needs at least one cascade".into()));
    }
    let per_cascade: Vec<Vec<(UserId, f64)>> = cascades.par_iter().map(bridging_values).collect();

    // sequential fold keeps float summation order independent of threading
    let mut acc: BTreeMap<UserId, (f64, usize)> = BTreeMap::new();
    for values in &per_cascade {
        for &(u, alpha) in values {
            let e = acc.entry(u).or_insert((0.0, 0));
            e.0 += alpha;
            if alpha > 0.0 {
                e.1 += 1;
            }
        }
    }
    let max_participation = acc.values().map(|&(_, k)| k).max().unwrap_or(0);
    if max_participation == 0 {
        return Err(Error::Domain("no cascade has a non-root participant".into()));
    }
    let denom = max_participation as f64;
    let scores = acc
        .into_iter()
        .map(|(user, (alpha_sum, k))| BridgingScore {
            user,
            ubm: alpha_sum / denom,
            alpha_sum,
            cascades_participated: k,
        })
        .collect();
    Ok(UbmTable {
        scores,
        max_participation,
    })
}
