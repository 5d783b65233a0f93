//! Subjective well-being (SWB) from tri-polarity sentiment labels.
//!
//! `swb = (p - n) / (p + n) * sqrt((p + n) / (p + n + neu))` over a user's
//! own posts in a period: originals and quotes count, retweets do not.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{bottom_fraction, top_fraction};
use crate::graph::{IdMap, UserId};
use crate::scores::ScoreTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

impl Sentiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Positive => "pos",
            Sentiment::Negative => "neg",
            Sentiment::Neutral => "neu",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PostKind {
    Original,
    Quote,
    Retweet,
}

impl PostKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PostKind::Original => "original",
            PostKind::Quote => "quote",
            PostKind::Retweet => "retweet",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledPost {
    pub user: UserId,
    pub time: i64,
    pub sentiment: Sentiment,
    pub kind: PostKind,
}

/// A post as read from disk, before labeling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostRecord {
    pub user: String,
    pub time: i64,
    pub sentiment: Option<Sentiment>,
    pub kind: PostKind,
}

/// Source of sentiment labels. A classifier can be plugged in here; the
/// default implementation uses the label carried by the input file.
pub trait LabelProvider {
    fn label(&self, post: &PostRecord) -> Result<Sentiment>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FileLabels;

impl LabelProvider for FileLabels {
    fn label(&self, post: &PostRecord) -> Result<Sentiment> {
        post.sentiment
            .ok_or_else(|| Error::Domain(format!("post by `{}` at {} has no sentiment label", post.user, post.time)))
    }
}

/// Reads `user,time,sentiment,kind` rows. Users not yet in `ids` are
/// interned after the existing ones.
pub fn load_posts<R: Read>(reader: R, ids: &mut IdMap, labels: &dyn LabelProvider) -> Result<Vec<LabeledPost>> {
    const SRC: &str = "posts.csv";
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::parse(SRC, 1, e.to_string()))?.clone();
    if headers.iter().ne(["user", "time", "sentiment", "kind"]) {
        return Err(Error::parse(SRC, 1, "expected header `user,time,sentiment,kind`"));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(SRC, e.position().map(|p| p.line()).unwrap_or(0), e.to_string()))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let time: i64 = rec[1]
            .parse()
            .map_err(|_| Error::parse(SRC, line, format!("bad timestamp `{}`", &rec[1])))?;
        let sentiment = match &rec[2] {
            "pos" => Some(Sentiment::Positive),
            "neg" => Some(Sentiment::Negative),
            "neu" => Some(Sentiment::Neutral),
            "" => None,
            other => return Err(Error::parse(SRC, line, format!("unknown sentiment `{other}`"))),
        };
        let kind = match &rec[3] {
            "original" => PostKind::Original,
            "quote" => PostKind::Quote,
            "retweet" => PostKind::Retweet,
            other => return Err(Error::parse(SRC, line, format!("unknown kind `{other}`"))),
        };
        if rec[0].is_empty() {
            return Err(Error::parse(SRC, line, "empty user id"));
        }
        let raw = PostRecord {
            user: rec[0].to_string(),
            time,
            sentiment,
            kind,
        };
        let sentiment = labels.label(&raw).map_err(|e| Error::parse(SRC, line, e.to_string()))?;
        out.push(LabeledPost {
            user: ids.intern(&raw.user),
            time,
            sentiment,
            kind,
        });
    }
    Ok(out)
}

pub fn write_posts<W: Write>(writer: W, posts: &[LabeledPost], ids: &IdMap) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["user", "time", "sentiment", "kind"])?;
    for p in posts {
        w.write_record([ids.name(p.user), &p.time.to_string(), p.sentiment.as_str(), p.kind.as_str()])?;
    }
    w.flush()
}

/// SWB for the given label counts; zero when every post is neutral.
pub fn swb_value(n_pos: u64, n_neg: u64, n_neu: u64) -> Result<f64> {
    let polar = n_pos + n_neg;
    let total = polar + n_neu;
    if total == 0 {
        return Err(Error::EmptyInput("no posts to compute SWB from".into()));
    }
    if polar == 0 {
        return Ok(0.0);
    }
    let balance = (n_pos as f64 - n_neg as f64) / polar as f64;
    Ok(balance * (polar as f64 / total as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Period {
    Before,
    During,
}

impl Period {
    pub fn as_str(self) -> &'static str {
        match self {
            Period::Before => "before",
            Period::During => "during",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwbRecord {
    pub user: UserId,
    pub period: Period,
    pub n_pos: u64,
    pub n_neg: u64,
    pub n_neu: u64,
    pub swb: f64,
}

/// Per-user SWB in the periods before and from `boundary` on. A record is
/// produced only when the user has more than `min_posts` counted posts in
/// that period. Output is sorted by user, then period.
pub fn user_swb(posts: &[LabeledPost], boundary: i64, min_posts: u64) -> Vec<SwbRecord> {
    let mut counts: BTreeMap<(UserId, Period), [u64; 3]> = BTreeMap::new();
    for p in posts {
        if p.kind == PostKind::Retweet {
            continue;
        }
        let period = if p.time < boundary { Period::Before } else { Period::During };
        let c = counts.entry((p.user, period)).or_default();
        match p.sentiment {
            Sentiment::Positive => c[0] += 1,
            Sentiment::Negative => c[1] += 1,
            Sentiment::Neutral => c[2] += 1,
        }
    }
    counts
        .into_iter()
        .filter(|(_, c)| c.iter().sum::<u64>() > min_posts)
        .map(|((user, period), [n_pos, n_neg, n_neu])| SwbRecord {
            user,
            period,
            n_pos,
            n_neg,
            n_neu,
            swb: swb_value(n_pos, n_neg, n_neu).expect("non-empty counts"),
        })
        .collect()
}

pub fn write_swb<W: Write>(writer: W, records: &[SwbRecord], ids: &IdMap) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::io("swb.csv", e.into());
    w.write_record(["user", "period", "n_pos", "n_neg", "n_neu", "swb"]).map_err(io)?;
    for r in records {
        w.write_record([
            ids.name(r.user),
            r.period.as_str(),
            &r.n_pos.to_string(),
            &r.n_neg.to_string(),
            &r.n_neu.to_string(),
            &r.swb.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("swb.csv", e))
}

/// Reads `swb.csv`. Users not yet in `ids` are interned.
pub fn read_swb<R: Read>(reader: R, ids: &mut IdMap) -> Result<Vec<SwbRecord>> {
    const SRC: &str = "swb.csv";
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::parse(SRC, 1, e.to_string()))?.clone();
    if headers.iter().ne(["user", "period", "n_pos", "n_neg", "n_neu", "swb"]) {
        return Err(Error::parse(SRC, 1, "expected header `user,period,n_pos,n_neg,n_neu,swb`"));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(SRC, e.position().map(|p| p.line()).unwrap_or(0), e.to_string()))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let bad = |what: &str| Error::parse(SRC, line, format!("bad {what}"));
        if rec[0].is_empty() {
            return Err(Error::parse(SRC, line, "empty user id"));
        }
        let user = ids.intern(&rec[0]);
        let period = match &rec[1] {
            "before" => Period::Before,
            "during" => Period::During,
            _ => return Err(bad("period")),
        };
        out.push(SwbRecord {
            user,
            period,
            n_pos: rec[2].parse().map_err(|_| bad("n_pos"))?,
            n_neg: rec[3].parse().map_err(|_| bad("n_neg"))?,
            n_neu: rec[4].parse().map_err(|_| bad("n_neu"))?,
            swb: rec[5].parse().map_err(|_| bad("swb"))?,
        });
    }
    Ok(out)
}

/// Five-number summary plus mean. Quartiles interpolate linearly between
/// order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = p * (v.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(Summary {
            n: v.len(),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupStats {
    pub group: String,
    /// Users assigned to the group by rank.
    pub group_size: usize,
    /// Summaries cover only users with records in both periods.
    pub before: Summary,
    pub during: Summary,
    /// `mean(during) - mean(before)`.
    pub change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport {
    pub metric: String,
    pub fraction: f64,
    pub top: GroupStats,
    pub bottom: GroupStats,
}

/// Compares SWB before and during for the top and bottom `fraction` of
/// users ranked by `scores`.
pub fn group_swb_change(records: &[SwbRecord], scores: &ScoreTable, fraction: f64) -> Result<GroupReport> {
    if !(fraction > 0.0 && fraction <= 0.5) {
        return Err(Error::invalid("fraction", "must lie in (0, 0.5]"));
    }
    let mut by_user: HashMap<UserId, (Option<f64>, Option<f64>)> = HashMap::new();
    for r in records {
        let e = by_user.entry(r.user).or_default();
        match r.period {
            Period::Before => e.0 = Some(r.swb),
            Period::During => e.1 = Some(r.swb),
        }
    }
    let stats = |name: &str, users: Vec<UserId>| -> Result<GroupStats> {
        let (before, during): (Vec<f64>, Vec<f64>) = users
            .iter()
            .filter_map(|u| match by_user.get(u) {
                Some(&(Some(b), Some(d))) => Some((b, d)),
                _ => None,
            })
            .unzip();
        let (Some(b), Some(d)) = (Summary::of(&before), Summary::of(&during)) else {
            return Err(Error::EmptyGroup(name.to_string()));
        };
        Ok(GroupStats {
            group: name.to_string(),
            group_size: users.len(),
            change: d.mean - b.mean,
            before: b,
            during: d,
        })
    };
    Ok(GroupReport {
        metric: scores.metric.to_string(),
        fraction,
        top: stats("top", top_fraction(scores, fraction)?)?,
        bottom: stats("bottom", bottom_fraction(scores, fraction)?)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scores::Metric;

    #[test]
    fn formula_examples() {
        assert_eq!(swb_value(0, 0, 7).unwrap(), 0.0);
        assert_eq!(swb_value(5, 0, 0).unwrap(), 1.0);
        let v = swb_value(3, 1, 4).unwrap();
        assert!((v - 0.5 * 0.5f64.sqrt()).abs() < 1e-15);
        assert!(swb_value(0, 0, 0).is_err());
    }

    #[test]
    fn neutral_posts_shrink_magnitude() {
        let a = swb_value(4, 1, 0).unwrap();
        let b = swb_value(4, 1, 3).unwrap();
        assert!(b.abs() < a.abs());
    }

    fn post(user: u32, time: i64, s: Sentiment, kind: PostKind) -> LabeledPost {
        LabeledPost {
            user: UserId(user),
            time,
            sentiment: s,
            kind,
        }
    }

    #[test]
    fn threshold_keeps_only_busy_periods() {
        let mut posts = Vec::new();
        for t in 0..6 {
            posts.push(post(0, t, Sentiment::Positive, PostKind::Original));
        }
        for t in 0..2 {
            posts.push(post(0, 100 + t, Sentiment::Negative, PostKind::Original));
        }
        let recs = user_swb(&posts, 100, 5);
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].period, Period::Before);
        assert_eq!(recs[0].swb, 1.0);
    }

    #[test]
    fn retweets_excluded_quotes_counted() {
        let rts: Vec<LabeledPost> = (0..10).map(|t| post(0, t, Sentiment::Positive, PostKind::Retweet)).collect();
        assert!(user_swb(&rts, 100, 5).is_empty());
        let quotes: Vec<LabeledPost> = (0..6).map(|t| post(0, t, Sentiment::Negative, PostKind::Quote)).collect();
        let recs = user_swb(&quotes, 100, 5);
        assert_eq!(recs[0].swb, -1.0);
    }

    #[test]
    fn posts_csv_parsing() {
        let mut ids = IdMap::new();
        ids.intern("known");
        let text = "user,time,sentiment,kind\nknown,5,pos,original\nnew,6,neu,quote\n";
        let posts = load_posts(text.as_bytes(), &mut ids, &FileLabels).unwrap();
        assert_eq!(posts.len(), 2);
        assert_eq!(posts[1].user, UserId(1));
        let missing = "user,time,sentiment,kind\nknown,5,,original\n";
        assert!(matches!(
            load_posts(missing.as_bytes(), &mut ids, &FileLabels),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn summary_quartiles() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.median, 2.5);
        assert_eq!(s.q1, 1.75);
        assert_eq!(s.q3, 3.25);
        assert!(Summary::of(&[]).is_none());
    }

    #[test]
    fn empty_group_is_named() {
        let mut scores = ScoreTable::new(Metric::Ubm);
        for i in 0..10 {
            scores.values.insert(UserId(i), i as f64);
        }
        let recs = vec![SwbRecord {
            user: UserId(9),
            period: Period::Before,
            n_pos: 6,
            n_neg: 0,
            n_neu: 0,
            swb: 1.0,
        }];
        match group_swb_change(&recs, &scores, 0.2) {
            Err(Error::EmptyGroup(g)) => assert_eq!(g, "top"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
