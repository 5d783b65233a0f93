//! Immutable directed social graph.
//!
//! Edges are stored in *transmission* orientation: an edge `u -> v` means
//! `v` follows `u`, so information posted by `u` can reach `v`. The on-disk
//! format lists `(follower, followee)` pairs and the loader reverses them.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense, zero-based handle for an interned external user id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UserId(pub u32);

impl UserId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Bijection between external string ids and [`UserId`]s.
#[derive(Debug, Clone, Default)]
pub struct IdMap {
    names: Vec<String>,
    lookup: HashMap<String, UserId>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the existing id for `name` or allocates the next one.
    pub fn intern(&mut self, name: &str) -> UserId {
        if let Some(&id) = self.lookup.get(name) {
            return id;
        }
        let id = UserId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.lookup.insert(name.to_string(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<UserId> {
        self.lookup.get(name).copied()
    }

    pub fn name(&self, id: UserId) -> &str {
        &self.names[id.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (UserId, &str)> {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| (UserId(i as u32), n.as_str()))
    }
}

/// Counts reported by [`load_graph`] and [`GraphBuilder::build`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub records: usize,
    pub edges: usize,
    pub duplicates: usize,
    pub self_loops: usize,
}

#[derive(Debug, Clone)]
pub struct SocialGraph {
    ids: IdMap,
    // followers[u]: users that follow u (transmission out-neighbors).
    followers: Vec<Vec<UserId>>,
    // followees[u]: users that u follows (transmission in-neighbors).
    followees: Vec<Vec<UserId>>,
    edge_count: usize,
}

impl SocialGraph {
    pub fn node_count(&self) -> usize {
        self.followers.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn ids(&self) -> &IdMap {
        &self.ids
    }

    pub fn user(&self, name: &str) -> Option<UserId> {
        self.ids.get(name)
    }

    pub fn name(&self, u: UserId) -> &str {
        self.ids.name(u)
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> {
        (0..self.node_count() as u32).map(UserId)
    }

    /// Users that follow `u`, sorted by id.
    pub fn followers(&self, u: UserId) -> &[UserId] {
        &self.followers[u.index()]
    }

    /// Users that `u` follows, sorted by id.
    pub fn followees(&self, u: UserId) -> &[UserId] {
        &self.followees[u.index()]
    }

    /// True if `follower` follows `followee`, i.e. the transmission edge
    /// `followee -> follower` exists.
    pub fn follows(&self, follower: UserId, followee: UserId) -> bool {
        self.followers[followee.index()]
            .binary_search(&follower)
            .is_ok()
    }

    /// Audience size: number of followers.
    pub fn in_degree(&self, u: UserId) -> usize {
        self.followers[u.index()].len()
    }

    /// Number of accounts `u` follows.
    pub fn out_degree(&self, u: UserId) -> usize {
        self.followees[u.index()].len()
    }

    /// Per-user `(in_degree, out_degree)` indexed by [`UserId`].
    pub fn degrees(&self) -> Vec<(usize, usize)> {
        self.users()
            .map(|u| (self.in_degree(u), self.out_degree(u)))
            .collect()
    }

    /// Transmission edges `(source, target)` in source-major sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (UserId, UserId)> + '_ {
        self.users()
            .flat_map(move |u| self.followers(u).iter().map(move |&v| (u, v)))
    }
}

/// Accumulates follow relations by external id.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    ids: IdMap,
    pairs: Vec<(UserId, UserId)>,
    self_loops: usize,
    records: usize,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a user with no edges yet.
    pub fn add_user(&mut self, name: &str) -> UserId {
        self.ids.intern(name)
    }

    /// Records that `follower` follows `followee`.
    pub fn add_follow(&mut self, follower: &str, followee: &str) {
        self.records += 1;
        let f = self.ids.intern(follower);
        let g = self.ids.intern(followee);
        if f == g {
            self.self_loops += 1;
        } else {
            // transmission orientation: followee -> follower
            self.pairs.push((g, f));
        }
    }

    pub fn build(mut self) -> (SocialGraph, LoadReport) {
        let n = self.ids.len();
        self.pairs.sort_unstable();
        let before = self.pairs.len();
        self.pairs.dedup();
        let duplicates = before - self.pairs.len();

        let mut followers = vec![Vec::new(); n];
        let mut followees = vec![Vec::new(); n];
        for &(src, dst) in &self.pairs {
            followers[src.index()].push(dst);
            followees[dst.index()].push(src);
        }
        // followers are pushed in sorted order already; followees need a sort
        for list in &mut followees {
            list.sort_unstable();
        }

        let report = LoadReport {
            records: self.records,
            edges: self.pairs.len(),
            duplicates,
            self_loops: self.self_loops,
        };
        let graph = SocialGraph {
            ids: self.ids,
            followers,
            followees,
            edge_count: self.pairs.len(),
        };
        (graph, report)
    }
}

/// Reads `follower,followee` CSV records and builds the transmission graph.
pub fn load_graph<R: Read>(reader: R) -> Result<(SocialGraph, LoadReport)> {
    load_graph_named(reader, "edges.csv")
}

pub(crate) fn load_graph_named<R: Read>(reader: R, source: &str) -> Result<(SocialGraph, LoadReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);

    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(source, 1, e.to_string()))?
        .clone();
    if headers.len() == 0 || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyGraph);
    }
    if headers.len() != 2 || &headers[0] != "follower" || &headers[1] != "followee" {
        return Err(Error::parse(
            source,
            1,
            format!("expected header `follower,followee`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        ));
    }

    let mut builder = GraphBuilder::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::parse(source, line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != 2 {
            return Err(Error::parse(source, line, format!("expected 2 fields, found {}", rec.len())));
        }
        if rec[0].is_empty() || rec[1].is_empty() {
            return Err(Error::parse(source, line, "empty user id"));
        }
        builder.add_follow(&rec[0], &rec[1]);
    }
    if builder.records == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(builder.build())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(csv: &str) -> (SocialGraph, LoadReport) {
        load_graph(csv.as_bytes()).unwrap()
    }

    #[test]
    fn triangle() {
        let (g, rep) = graph("follower,followee\na,b\nb,c\nc,a\n");
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(rep.duplicates, 0);
        let a = g.user("a").unwrap();
        let b = g.user("b").unwrap();
        assert!(g.follows(a, b));
        assert!(!g.follows(b, a));
        assert_eq!(g.followers(b), &[a]);
    }

    #[test]
    fn self_loop_dropped() {
        let (g, rep) = graph("follower,followee\na,a\na,b\n");
        assert_eq!(rep.self_loops, 1);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn duplicates_dropped_and_counted() {
        let (g, rep) = graph("follower,followee\na,b\na,b\nb,a\na,b\n");
        assert_eq!(g.edge_count(), 2);
        assert_eq!(rep.duplicates, 2);
        assert_eq!(rep.records, 4);
    }

    #[test]
    fn malformed_record_names_line() {
        let err = load_graph("follower,followee\na,b\nc\n".as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_header_rejected() {
        let err = load_graph("src,dst\na,b\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn empty_input() {
        assert!(matches!(load_graph("".as_bytes()), Err(Error::EmptyGraph)));
        assert!(matches!(
            load_graph("follower,followee\n".as_bytes()),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn single_node_has_zero_degrees() {
        let mut b = GraphBuilder::new();
        b.add_user("solo");
        let (g, _) = b.build();
        assert_eq!(g.degrees(), vec![(0, 0)]);
    }

    #[test]
    fn star_center_in_degree() {
        let mut b = GraphBuilder::new();
        for i in 0..7 {
            b.add_follow(&format!("leaf{i}"), "center");
        }
        let (g, _) = b.build();
        let c = g.user("center").unwrap();
        assert_eq!(g.in_degree(c), 7);
        assert_eq!(g.out_degree(c), 0);
    }

    #[test]
    fn id_round_trip() {
        let (g, _) = graph("follower,followee\nx,y\ny,z\n");
        for (id, name) in g.ids().iter() {
            assert_eq!(g.user(name), Some(id));
            assert_eq!(g.name(id), name);
        }
    }
}
