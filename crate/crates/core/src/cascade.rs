//! Cascade reconstruction from a follow graph and a timestamped event log.
//!
//! Each original message yields one tree. A retweeter is attached under the
//! followee who joined the same cascade most recently before them; equal
//! activation times are resolved toward the smaller [`UserId`]. Retweeters
//! who follow no earlier participant cannot be attached and are dropped.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{IdMap, SocialGraph, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Original,
    Retweet,
}

/// One post or retweet record. Quotes are carried as retweets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffusionEvent {
    pub user: UserId,
    pub time: i64,
    pub message_id: String,
    pub origin_id: Option<String>,
    pub kind: EventKind,
}

impl DiffusionEvent {
    pub fn original(user: UserId, time: i64, message_id: impl Into<String>) -> Self {
        Self {
            user,
            time,
            message_id: message_id.into(),
            origin_id: None,
            kind: EventKind::Original,
        }
    }

    pub fn retweet(user: UserId, time: i64, message_id: impl Into<String>, origin: impl Into<String>) -> Self {
        Self {
            user,
            time,
            message_id: message_id.into(),
            origin_id: Some(origin.into()),
            kind: EventKind::Retweet,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventLoadReport {
    pub records: usize,
    pub unknown_users: usize,
}

/// Reads `message_id,user,time,origin_id,kind` records. Events by users not
/// present in `ids` are skipped and counted.
pub fn load_events<R: Read>(reader: R, ids: &IdMap) -> Result<(Vec<DiffusionEvent>, EventLoadReport)> {
    const SRC: &str = "events.csv";
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::parse(SRC, 1, e.to_string()))?.clone();
    let expected = ["message_id", "user", "time", "origin_id", "kind"];
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::parse(SRC, 1, format!("expected header `{}`", expected.join(","))));
    }

    let mut out = Vec::new();
    let mut report = EventLoadReport::default();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(SRC, e.position().map(|p| p.line()).unwrap_or(0), e.to_string()))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != 5 {
            return Err(Error::parse(SRC, line, format!("expected 5 fields, found {}", rec.len())));
        }
        report.records += 1;
        let time: i64 = rec[2]
            .parse()
            .map_err(|_| Error::parse(SRC, line, format!("bad timestamp `{}`", &rec[2])))?;
        let kind = match &rec[4] {
            "original" => EventKind::Original,
            "retweet" | "quote" => EventKind::Retweet,
            other => return Err(Error::parse(SRC, line, format!("unknown kind `{other}`"))),
        };
        let origin = (!rec[3].is_empty()).then(|| rec[3].to_string());
        if (kind == EventKind::Retweet) != origin.is_some() {
            return Err(Error::parse(SRC, line, "origin_id must be present exactly for retweets"));
        }
        if rec[0].is_empty() {
            return Err(Error::parse(SRC, line, "empty message_id"));
        }
        let Some(user) = ids.get(&rec[1]) else {
            report.unknown_users += 1;
            continue;
        };
        out.push(DiffusionEvent {
            user,
            time,
            message_id: rec[0].to_string(),
            origin_id: origin,
            kind,
        });
    }
    Ok((out, report))
}

/// Writes events in the `events.csv` layout.
pub fn write_events<W: Write>(writer: W, events: &[DiffusionEvent], ids: &IdMap) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["message_id", "user", "time", "origin_id", "kind"])?;
    for e in events {
        let kind = match e.kind {
            EventKind::Original => "original",
            EventKind::Retweet => "retweet",
        };
        w.write_record([
            e.message_id.as_str(),
            ids.name(e.user),
            &e.time.to_string(),
            e.origin_id.as_deref().unwrap_or(""),
            kind,
        ])?;
    }
    w.flush()
}

/// Rooted activation tree for one original message.
///
/// Nodes are kept in activation order (root first), so every parent index is
/// smaller than its child's index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeTree {
    message_id: String,
    nodes: Vec<UserId>,
    times: Vec<i64>,
    parents: Vec<Option<u32>>,
}

/// Root-to-leaf node sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CascadePath(pub Vec<UserId>);

impl CascadePath {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn nodes(&self) -> &[UserId] {
        &self.0
    }
}

impl CascadeTree {
    /// Builds a tree from a parent map and activation times.
    ///
    /// Every user other than `root` must have a parent, and times must
    /// strictly increase along each edge.
    pub fn from_parent_map(
        message_id: impl Into<String>,
        root: UserId,
        parent: &BTreeMap<UserId, UserId>,
        times: &BTreeMap<UserId, i64>,
    ) -> Result<Self> {
        let message_id = message_id.into();
        if parent.contains_key(&root) {
            return Err(Error::Invariant(format!("{message_id}: root {root} has a parent")));
        }
        if times.len() != parent.len() + 1 || !times.contains_key(&root) {
            return Err(Error::Invariant(format!(
                "{message_id}: activation times must cover exactly the root and its descendants"
            )));
        }
        let mut order: Vec<(i64, UserId)> = times.iter().map(|(&u, &t)| (t, u)).collect();
        order.sort_unstable();
        if order[0].1 != root {
            return Err(Error::Invariant(format!("{message_id}: root must activate first")));
        }
        let index: HashMap<UserId, u32> = order.iter().enumerate().map(|(i, &(_, u))| (u, i as u32)).collect();
        let mut parents = Vec::with_capacity(order.len());
        for &(t, u) in &order {
            if u == root {
                parents.push(None);
                continue;
            }
            let p = parent
                .get(&u)
                .ok_or_else(|| Error::Invariant(format!("{message_id}: {u} has no parent")))?;
            let pi = *index
                .get(p)
                .ok_or_else(|| Error::Invariant(format!("{message_id}: parent {p} of {u} not in tree")))?;
            if times[p] >= t {
                return Err(Error::Invariant(format!(
                    "{message_id}: parent {p} does not activate before {u}"
                )));
            }
            parents.push(Some(pi));
        }
        Ok(Self {
            message_id,
            nodes: order.iter().map(|&(_, u)| u).collect(),
            times: order.iter().map(|&(t, _)| t).collect(),
            parents,
        })
    }

    pub fn message_id(&self) -> &str {
        &self.message_id
    }

    pub fn root(&self) -> UserId {
        self.nodes[0]
    }

    /// Node count, root included.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// Users in activation order.
    pub fn nodes(&self) -> &[UserId] {
        &self.nodes
    }

    pub fn times(&self) -> &[i64] {
        &self.times
    }

    /// Parent index per node (activation order); `None` for the root.
    pub fn parent_indices(&self) -> &[Option<u32>] {
        &self.parents
    }

    pub fn position(&self, u: UserId) -> Option<usize> {
        self.nodes.iter().position(|&n| n == u)
    }

    pub fn contains(&self, u: UserId) -> bool {
        self.position(u).is_some()
    }

    pub fn parent(&self, u: UserId) -> Option<UserId> {
        let i = self.position(u)?;
        self.parents[i].map(|p| self.nodes[p as usize])
    }

    pub fn activation_time(&self, u: UserId) -> Option<i64> {
        self.position(u).map(|i| self.times[i])
    }

    /// `(parent, child)` user pairs.
    pub fn edges(&self) -> impl Iterator<Item = (UserId, UserId)> + '_ {
        self.parents
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| (self.nodes[p as usize], self.nodes[i])))
    }

    /// Child index lists per node, each in activation order.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.nodes.len()];
        for (i, p) in self.parents.iter().enumerate() {
            if let Some(p) = p {
                children[*p as usize].push(i);
            }
        }
        children
    }

    /// Depth of each node counted in nodes (root = 1).
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![1usize; self.nodes.len()];
        for i in 1..self.nodes.len() {
            if let Some(p) = self.parents[i] {
                depth[i] = depth[p as usize] + 1;
            }
        }
        depth
    }

    /// One root-to-leaf path per leaf, in depth-first order.
    pub fn paths(&self) -> Vec<CascadePath> {
        let children = self.children();
        let mut out = Vec::new();
        let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
        let mut current: Vec<UserId> = Vec::new();
        while let Some((node, depth)) = stack.pop() {
            current.truncate(depth);
            current.push(self.nodes[node]);
            let kids = &children[node];
            if kids.is_empty() {
                out.push(CascadePath(current.clone()));
            } else {
                for &k in kids.iter().rev() {
                    stack.push((k, depth + 1));
                }
            }
        }
        out
    }

    /// Checks the structural invariants, and that every edge is a follow
    /// relation in `g`.
    pub fn validate(&self, g: &SocialGraph) -> Result<()> {
        let mut seen = HashSet::new();
        for (i, &u) in self.nodes.iter().enumerate() {
            if !seen.insert(u) {
                return Err(Error::Invariant(format!("{}: {u} appears twice", self.message_id)));
            }
            match (i, self.parents[i]) {
                (0, None) => {}
                (0, Some(_)) => return Err(Error::Invariant(format!("{}: root has a parent", self.message_id))),
                (_, None) => return Err(Error::Invariant(format!("{}: second root {u}", self.message_id))),
                (_, Some(p)) => {
                    let p = p as usize;
                    if p >= i || self.times[p] >= self.times[i] {
                        return Err(Error::Invariant(format!(
                            "{}: {u} activates before its parent",
                            self.message_id
                        )));
                    }
                    if u.index() >= g.node_count() || !g.follows(u, self.nodes[p]) {
                        return Err(Error::Invariant(format!(
                            "{}: {u} does not follow {}",
                            self.message_id, self.nodes[p]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub originals: usize,
    pub retweets: usize,
    pub duplicate_message_ids: usize,
    /// Retweets whose origin chain does not end at a known original.
    pub unresolved_retweets: usize,
    /// Events by users outside the graph.
    pub unknown_users: usize,
    /// Retweeters with no earlier followee in the cascade.
    pub unattached_retweeters: usize,
    /// Repeat retweets by a user already in the cascade (including the root).
    pub repeat_participations: usize,
    /// Messages dropped because fewer than two retweeters could be attached.
    pub small_cascades: usize,
}

#[derive(Debug, Clone)]
pub struct CascadeSet {
    pub cascades: Vec<CascadeTree>,
    pub report: BuildReport,
}

struct Group<'a> {
    root: &'a DiffusionEvent,
    retweets: Vec<(i64, UserId)>,
}

/// Reconstructs one tree per original message with at least two attached
/// retweeters. Output is ordered by original posting time, then message id.
pub fn build_cascades(g: &SocialGraph, events: &[DiffusionEvent]) -> CascadeSet {
    let mut report = BuildReport::default();
    let n = g.node_count();

    // first occurrence of each message id wins
    let mut first: HashMap<&str, usize> = HashMap::with_capacity(events.len());
    for (i, e) in events.iter().enumerate() {
        if first.insert(e.message_id.as_str(), i).is_some() {
            report.duplicate_message_ids += 1;
        }
    }
    for (i, e) in events.iter().enumerate().rev() {
        first.insert(e.message_id.as_str(), i);
    }

    let mut groups: Vec<Group> = Vec::new();
    let mut group_of: HashMap<usize, usize> = HashMap::new();
    for (i, e) in events.iter().enumerate() {
        if e.kind == EventKind::Original && first[e.message_id.as_str()] == i {
            report.originals += 1;
            if e.user.index() >= n {
                report.unknown_users += 1;
                continue;
            }
            group_of.insert(i, groups.len());
            groups.push(Group {
                root: e,
                retweets: Vec::new(),
            });
        }
    }

    for (i, e) in events.iter().enumerate() {
        if e.kind != EventKind::Retweet {
            continue;
        }
        report.retweets += 1;
        if first[e.message_id.as_str()] != i {
            continue;
        }
        let Some(root_idx) = resolve_origin(events, &first, i) else {
            report.unresolved_retweets += 1;
            continue;
        };
        let Some(&gi) = group_of.get(&root_idx) else {
            report.unresolved_retweets += 1;
            continue;
        };
        if e.user.index() >= n {
            report.unknown_users += 1;
            continue;
        }
        groups[gi].retweets.push((e.time, e.user));
    }

    groups.sort_by(|a, b| {
        (a.root.time, a.root.message_id.as_str()).cmp(&(b.root.time, b.root.message_id.as_str()))
    });

    let built: Vec<(Option<CascadeTree>, usize, usize)> =
        groups.into_par_iter().map(|grp| assemble(g, grp)).collect();

    let mut cascades = Vec::new();
    for (tree, unattached, repeats) in built {
        report.unattached_retweeters += unattached;
        report.repeat_participations += repeats;
        match tree {
            Some(t) => cascades.push(t),
            None => report.small_cascades += 1,
        }
    }
    CascadeSet { cascades, report }
}

fn resolve_origin(events: &[DiffusionEvent], first: &HashMap<&str, usize>, start: usize) -> Option<usize> {
    let mut cur = start;
    for _ in 0..=events.len() {
        let e = &events[cur];
        match e.kind {
            EventKind::Original => return Some(cur),
            EventKind::Retweet => {
                let origin = e.origin_id.as_deref()?;
                cur = *first.get(origin)?;
            }
        }
    }
    None
}

fn assemble(g: &SocialGraph, mut grp: Group) -> (Option<CascadeTree>, usize, usize) {
    grp.retweets.sort_unstable();
    let root = grp.root.user;
    let mut nodes = vec![root];
    let mut times = vec![grp.root.time];
    let mut parents: Vec<Option<u32>> = vec![None];
    let mut pos: HashMap<UserId, usize> = HashMap::new();
    pos.insert(root, 0);
    let mut unattached = 0;
    let mut repeats = 0;

    for &(t, c) in &grp.retweets {
        if pos.contains_key(&c) {
            repeats += 1;
            continue;
        }
        let followees = g.followees(c);
        let mut best: Option<(i64, UserId, usize)> = None;
        let mut consider = |idx: usize| {
            let (pt, pu) = (times[idx], nodes[idx]);
            if pt >= t {
                return;
            }
            let better = match best {
                None => true,
                Some((bt, bu, _)) => pt > bt || (pt == bt && pu < bu),
            };
            if better {
                best = Some((pt, pu, idx));
            }
        };
        if followees.len() <= nodes.len() {
            for f in followees {
                if let Some(&idx) = pos.get(f) {
                    consider(idx);
                }
            }
        } else {
            for idx in 0..nodes.len() {
                if g.follows(c, nodes[idx]) {
                    consider(idx);
                }
            }
        }
        match best {
            Some((_, _, idx)) => {
                pos.insert(c, nodes.len());
                nodes.push(c);
                times.push(t);
                parents.push(Some(idx as u32));
            }
            None => unattached += 1,
        }
    }

    let tree = (nodes.len() >= 3).then(|| CascadeTree {
        message_id: grp.root.message_id.clone(),
        nodes,
        times,
        parents,
    });
    (tree, unattached, repeats)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeStats {
    pub count: usize,
    /// Mean node count; `None` when there are no cascades.
    pub mean_size: Option<f64>,
}

pub fn cascade_stats(cascades: &[CascadeTree]) -> CascadeStats {
    let count = cascades.len();
    let mean_size = (count > 0).then(|| cascades.iter().map(|c| c.size() as f64).sum::<f64>() / count as f64);
    CascadeStats { count, mean_size }
}

#[derive(Serialize, Deserialize)]
struct CascadeRecord {
    message_id: String,
    root: String,
    parent: BTreeMap<String, String>,
    activation_time: BTreeMap<String, i64>,
}

/// Writes one JSON object per line: root, parent map and activation times.
pub fn write_cascades<W: Write>(mut writer: W, cascades: &[CascadeTree], ids: &IdMap) -> Result<()> {
    for c in cascades {
        let rec = CascadeRecord {
            message_id: c.message_id.clone(),
            root: ids.name(c.root()).to_string(),
            parent: c
                .edges()
                .map(|(p, ch)| (ids.name(ch).to_string(), ids.name(p).to_string()))
                .collect(),
            activation_time: c
                .nodes
                .iter()
                .zip(&c.times)
                .map(|(&u, &t)| (ids.name(u).to_string(), t))
                .collect(),
        };
        serde_json::to_writer(&mut writer, &rec)?;
        writer
            .write_all(b"\n")
            .map_err(|e| Error::io("cascades.jsonl", e))?;
    }
    Ok(())
}

pub fn read_cascades<R: BufRead>(reader: R, ids: &IdMap) -> Result<Vec<CascadeTree>> {
    const SRC: &str = "cascades.jsonl";
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i as u64 + 1;
        let line = line.map_err(|e| Error::io(SRC, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CascadeRecord = serde_json::from_str(&line).map_err(|e| Error::parse(SRC, lineno, e.to_string()))?;
        let lookup = |name: &str| ids.get(name).ok_or_else(|| Error::parse(SRC, lineno, format!("unknown user `{name}`")));
        let root = lookup(&rec.root)?;
        let mut parent = BTreeMap::new();
        for (c, p) in &rec.parent {
            parent.insert(lookup(c)?, lookup(p)?);
        }
        let mut times = BTreeMap::new();
        for (u, t) in &rec.activation_time {
            times.insert(lookup(u)?, *t);
        }
        let tree = CascadeTree::from_parent_map(rec.message_id, root, &parent, &times)
            .map_err(|e| Error::parse(SRC, lineno, e.to_string()))?;
        out.push(tree);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    /// Transmission edges as drawn in the worked example (`a -> b`: b follows a).
    pub(crate) fn example_graph() -> SocialGraph {
        let drawn = [
            (1, 2), (2, 1), (1, 3), (1, 4), (3, 5), (2, 5), (5, 2), (3, 4),
            (4, 5), (3, 6), (1, 6), (2, 7), (2, 8), (8, 2), (7, 8), (3, 2),
        ];
        let mut b = GraphBuilder::new();
        for i in 1..=8 {
            b.add_user(&format!("u{i}"));
        }
        for (src, dst) in drawn {
            b.add_follow(&format!("u{dst}"), &format!("u{src}"));
        }
        b.build().0
    }

    fn uid(g: &SocialGraph, i: u32) -> UserId {
        g.user(&format!("u{i}")).unwrap()
    }

    fn example_events(g: &SocialGraph) -> Vec<DiffusionEvent> {
        let mut ev = vec![DiffusionEvent::original(uid(g, 1), 0, "m")];
        for (k, u) in [2, 3, 4, 6, 7, 8].into_iter().enumerate() {
            ev.push(DiffusionEvent::retweet(uid(g, u), 60 * (k as i64 + 1), format!("r{u}"), "m"));
        }
        ev
    }

    fn named_paths(g: &SocialGraph, t: &CascadeTree) -> Vec<Vec<String>> {
        let mut p: Vec<Vec<String>> = t
            .paths()
            .into_iter()
            .map(|p| p.0.iter().map(|&u| g.name(u).to_string()).collect())
            .collect();
        p.sort();
        p
    }

    #[test]
    fn worked_example_path_set() {
        let g = example_graph();
        let set = build_cascades(&g, &example_events(&g));
        assert_eq!(set.cascades.len(), 1);
        let t = &set.cascades[0];
        t.validate(&g).unwrap();
        assert_eq!(
            named_paths(&g, t),
            vec![
                vec!["u1", "u2", "u7", "u8"],
                vec!["u1", "u3", "u4"],
                vec!["u1", "u3", "u6"],
            ]
        );
    }

    #[test]
    fn worked_example_degrees() {
        let g = example_graph();
        assert_eq!(g.in_degree(uid(&g, 2)), 4);
        // drawn arrowheads into u5 count the accounts u5 follows
        assert_eq!(g.out_degree(uid(&g, 5)), 3);
        assert_eq!(g.in_degree(uid(&g, 5)), 1);
    }

    #[test]
    fn single_retweeter_dropped() {
        let g = example_graph();
        let ev = vec![
            DiffusionEvent::original(uid(&g, 1), 0, "m"),
            DiffusionEvent::retweet(uid(&g, 2), 10, "r", "m"),
        ];
        let set = build_cascades(&g, &ev);
        assert!(set.cascades.is_empty());
        assert_eq!(set.report.small_cascades, 1);
    }

    #[test]
    fn unknown_origin_counted() {
        let g = example_graph();
        let mut ev = example_events(&g);
        ev.push(DiffusionEvent::retweet(uid(&g, 5), 999, "rx", "nope"));
        let set = build_cascades(&g, &ev);
        assert_eq!(set.report.unresolved_retweets, 1);
        assert_eq!(set.cascades.len(), 1);
    }

    #[test]
    fn retweet_of_retweet_resolves_to_original() {
        let g = example_graph();
        let ev = vec![
            DiffusionEvent::original(uid(&g, 1), 0, "m"),
            DiffusionEvent::retweet(uid(&g, 3), 60, "r3", "m"),
            DiffusionEvent::retweet(uid(&g, 4), 120, "r4", "r3"),
        ];
        let set = build_cascades(&g, &ev);
        assert_eq!(set.cascades.len(), 1);
        assert_eq!(set.cascades[0].parent(uid(&g, 4)), Some(uid(&g, 3)));
    }

    #[test]
    fn unattached_retweeter_excluded() {
        let g = example_graph();
        let mut ev = example_events(&g);
        // u5 follows u3, u2, u4: all earlier, so attach; u1 follows only u2.
        // Make u5 retweet before anyone it follows.
        ev.push(DiffusionEvent::retweet(uid(&g, 5), 30, "r5", "m"));
        let set = build_cascades(&g, &ev);
        assert_eq!(set.report.unattached_retweeters, 1);
        assert!(!set.cascades[0].contains(uid(&g, 5)));
    }

    #[test]
    fn equal_time_parents_break_toward_smaller_id() {
        let mut b = GraphBuilder::new();
        for n in ["r", "a", "b", "c"] {
            b.add_user(n);
        }
        b.add_follow("a", "r");
        b.add_follow("b", "r");
        b.add_follow("c", "b");
        b.add_follow("c", "a");
        let (g, _) = b.build();
        let u = |n: &str| g.user(n).unwrap();
        let ev = vec![
            DiffusionEvent::original(u("r"), 0, "m"),
            DiffusionEvent::retweet(u("b"), 10, "x1", "m"),
            DiffusionEvent::retweet(u("a"), 10, "x2", "m"),
            DiffusionEvent::retweet(u("c"), 20, "x3", "m"),
        ];
        let set = build_cascades(&g, &ev);
        assert_eq!(set.cascades[0].parent(u("c")), Some(u("a")));
    }

    #[test]
    fn root_retweeting_own_message_is_ignored() {
        let g = example_graph();
        let mut ev = example_events(&g);
        ev.push(DiffusionEvent::retweet(uid(&g, 1), 500, "again", "m"));
        let set = build_cascades(&g, &ev);
        assert_eq!(set.report.repeat_participations, 1);
        assert_eq!(set.cascades[0].size(), 7);
    }

    fn tree_from(edges: &[(u32, u32)]) -> CascadeTree {
        let mut parent = BTreeMap::new();
        let mut times = BTreeMap::new();
        times.insert(UserId(0), 0);
        for &(p, c) in edges {
            parent.insert(UserId(c), UserId(p));
            times.insert(UserId(c), times[&UserId(p)] + 60);
        }
        CascadeTree::from_parent_map("t", UserId(0), &parent, &times).unwrap()
    }

    #[test]
    fn star_paths() {
        let t = tree_from(&[(0, 1), (0, 2)]);
        let p = t.paths();
        assert_eq!(p.len(), 2);
        assert!(p.iter().all(|p| p.len() == 2));
    }

    #[test]
    fn chain_paths() {
        let t = tree_from(&[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(t.paths(), vec![CascadePath(vec![UserId(0), UserId(1), UserId(2), UserId(3)])]);
    }

    #[test]
    fn stats() {
        assert_eq!(cascade_stats(&[]), CascadeStats { count: 0, mean_size: None });
        let a = tree_from(&[(0, 1), (0, 2)]);
        let b = tree_from(&[(0, 1), (1, 2), (2, 3), (0, 4)]);
        assert_eq!(cascade_stats(&[a, b]), CascadeStats { count: 2, mean_size: Some(4.0) });
    }

    #[test]
    fn from_parent_map_rejects_time_inversion() {
        let parent = BTreeMap::from([(UserId(1), UserId(0))]);
        let times = BTreeMap::from([(UserId(0), 10), (UserId(1), 10)]);
        assert!(CascadeTree::from_parent_map("m", UserId(0), &parent, &times).is_err());
    }

    #[test]
    fn jsonl_round_trip() {
        let g = example_graph();
        let set = build_cascades(&g, &example_events(&g));
        let mut buf = Vec::new();
        write_cascades(&mut buf, &set.cascades, g.ids()).unwrap();
        let back = read_cascades(buf.as_slice(), g.ids()).unwrap();
        assert_eq!(back, set.cascades);
    }

    #[test]
    fn events_csv_validation() {
        let g = example_graph();
        let ok = "message_id,user,time,origin_id,kind\nm,u1,0,,original\nq,u2,5,m,quote\nz,ghost,6,m,retweet\n";
        let (ev, rep) = load_events(ok.as_bytes(), g.ids()).unwrap();
        assert_eq!(ev.len(), 2);
        assert_eq!(ev[1].kind, EventKind::Retweet);
        assert_eq!(rep.unknown_users, 1);

        let bad = "message_id,user,time,origin_id,kind\nm,u1,0,x,original\n";
        assert!(matches!(load_events(bad.as_bytes(), g.ids()), Err(Error::Parse { line: 2, .. })));
    }
}
