//! Named per-user metric tables and the `scores.csv` layout.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{IdMap, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    InDegree,
    OutDegree,
    #[serde(rename = "pagerank")]
    PageRank,
    #[serde(rename = "twitterrank")]
    TwitterRank,
    Betweenness,
    Community,
    Activity,
    Ubm,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::InDegree,
        Metric::OutDegree,
        Metric::PageRank,
        Metric::TwitterRank,
        Metric::Betweenness,
        Metric::Community,
        Metric::Activity,
        Metric::Ubm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::InDegree => "in_degree",
            Metric::OutDegree => "out_degree",
            Metric::PageRank => "pagerank",
            Metric::TwitterRank => "twitterrank",
            Metric::Betweenness => "betweenness",
            Metric::Community => "community",
            Metric::Activity => "activity",
            Metric::Ubm => "ubm",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid("metrics", format!("unknown metric `{s}`")))
    }
}

/// Dense per-user values for one metric, indexed by [`UserId`].
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityVector {
    pub metric: Metric,
    pub values: Vec<f64>,
}

impl CentralityVector {
    pub fn new(metric: Metric, values: Vec<f64>) -> Self {
        Self { metric, values }
    }

    pub fn get(&self, u: UserId) -> f64 {
        self.values[u.index()]
    }

    /// Restricts to `users`, producing a sparse table.
    pub fn restrict(&self, users: impl IntoIterator<Item = UserId>) -> ScoreTable {
        ScoreTable {
            metric: self.metric,
            values: users.into_iter().map(|u| (u, self.get(u))).collect(),
        }
    }
}

/// Values of one metric over a chosen set of users.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub metric: Metric,
    pub values: BTreeMap<UserId, f64>,
}

impl ScoreTable {
    pub fn new(metric: Metric) -> Self {
        Self {
            metric,
            values: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, u: UserId) -> Option<f64> {
        self.values.get(&u).copied()
    }
}

/// Writes `user,metric,value` rows, metric-major in the given table order.
pub fn write_scores<W: Write>(writer: W, tables: &[ScoreTable], ids: &IdMap) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::io("scores.csv", e.into());
    w.write_record(["user", "metric", "value"]).map_err(io)?;
    for t in tables {
        for (&u, v) in &t.values {
            w.write_record([ids.name(u), t.metric.as_str(), &v.to_string()]).map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::io("scores.csv", e))
}

/// Reads `scores.csv`, preserving first-seen metric order.
pub fn read_scores<R: Read>(reader: R, ids: &IdMap) -> Result<Vec<ScoreTable>> {
    const SRC: &str = "scores.csv";
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::parse(SRC, 1, e.to_string()))?.clone();
    if headers.iter().ne(["user", "metric", "value"]) {
        return Err(Error::parse(SRC, 1, "expected header `user,metric,value`"));
    }
    let mut tables: Vec<ScoreTable> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(SRC, e.position().map(|p| p.line()).unwrap_or(0), e.to_string()))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let user = ids
            .get(&rec[0])
            .ok_or_else(|| Error::parse(SRC, line, format!("unknown user `{}`", &rec[0])))?;
        let metric: Metric = rec[1].parse().map_err(|e: Error| Error::parse(SRC, line, e.to_string()))?;
        let value: f64 = rec[2]
            .parse()
            .map_err(|_| Error::parse(SRC, line, format!("bad value `{}`", &rec[2])))?;
        let idx = match tables.iter().position(|t| t.metric == metric) {
            Some(i) => i,
            None => {
                tables.push(ScoreTable::new(metric));
                tables.len() - 1
            }
        };
        tables[idx].values.insert(user, value);
    }
    Ok(tables)
}
