//! Flat `key = value` pipeline configuration.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scores::Metric;

pub const CONFIG_FILE: &str = "bridgewell.conf";

/// Regression response variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Response {
    SwbDuring,
    SwbChange,
}

impl Response {
    pub fn as_str(self) -> &'static str {
        match self {
            Response::SwbDuring => "swb_during",
            Response::SwbChange => "swb_change",
        }
    }
}

impl FromStr for Response {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "swb_during" | "during" => Ok(Response::SwbDuring),
            "swb_change" | "change" => Ok(Response::SwbChange),
            other => Err(Error::invalid("response", format!("unknown response `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub edges: PathBuf,
    pub events: PathBuf,
    pub posts: PathBuf,
    pub topic_sim: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub train_fraction: f64,
    pub top_fraction: f64,
    pub min_posts: u64,
    pub boundary: Option<i64>,
    pub damping: f64,
    pub pagerank_tol: f64,
    pub pagerank_max_iter: usize,
    pub vif_threshold: f64,
    pub response: Response,
    pub metrics: Vec<Metric>,
}

impl PipelineConfig {
    /// Defaults with every path under `base`.
    pub fn with_base(base: &Path) -> Self {
        Self {
            edges: base.join("edges.csv"),
            events: base.join("events.csv"),
            posts: base.join("posts.csv"),
            topic_sim: None,
            out_dir: base.join("out"),
            seed: 7,
            train_fraction: 0.8,
            top_fraction: 0.2,
            min_posts: 5,
            boundary: None,
            damping: 0.85,
            pagerank_tol: 1e-10,
            pagerank_max_iter: 200,
            vif_threshold: 10.0,
            response: Response::SwbDuring,
            metrics: Metric::ALL.to_vec(),
        }
    }

    /// Reads `path`; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::MissingInput(path.to_path_buf())
            } else {
                Error::io(path, e)
            }
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = Self::with_base(base);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::invalid(&format!("{}:{}", path.display(), i + 1), "expected `key = value`")
            })?;
            cfg.set(key.trim(), value.trim(), base)?;
        }
        Ok(cfg)
    }

    /// Finds the config to use: an explicit path, else `./bridgewell.conf`,
    /// else `data/bridgewell.conf`, else built-in defaults under `data/`.
    pub fn discover(explicit: Option<&Path>) -> Result<Self> {
        if let Some(p) = explicit {
            return Self::load(p);
        }
        for candidate in [PathBuf::from(CONFIG_FILE), Path::new("data").join(CONFIG_FILE)] {
            if candidate.is_file() {
                return Self::load(&candidate);
            }
        }
        Ok(Self::with_base(Path::new("data")))
    }

    /// Applies one setting. Relative paths are joined onto `base`.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let path = || base.join(value);
        match key {
            "edges" => self.edges = path(),
            "events" => self.events = path(),
            "posts" => self.posts = path(),
            "topic_sim" => self.topic_sim = (!value.is_empty()).then(path),
            "out_dir" => self.out_dir = path(),
            "seed" => self.seed = parse(key, value)?,
            "train_fraction" => self.train_fraction = parse(key, value)?,
            "top_fraction" => self.top_fraction = parse(key, value)?,
            "min_posts" => self.min_posts = parse(key, value)?,
            "boundary" => self.boundary = Some(parse(key, value)?),
            "damping" => self.damping = parse(key, value)?,
            "pagerank_tol" => self.pagerank_tol = parse(key, value)?,
            "pagerank_max_iter" => self.pagerank_max_iter = parse(key, value)?,
            "vif_threshold" => self.vif_threshold = parse(key, value)?,
            "response" => self.response = value.parse()?,
            "metrics" => self.metrics = parse_metrics(value)?,
            other => return Err(Error::invalid(other, "unknown configuration key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::invalid("train_fraction", "must lie in (0, 1)"));
        }
        if !(self.top_fraction > 0.0 && self.top_fraction < 1.0) {
            return Err(Error::invalid("top_fraction", "must lie in (0, 1)"));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::invalid("damping", "must lie in (0, 1)"));
        }
        if !(self.pagerank_tol > 0.0) {
            return Err(Error::invalid("pagerank_tol", "must be positive"));
        }
        if self.pagerank_max_iter == 0 {
            return Err(Error::invalid("pagerank_max_iter", "must be positive"));
        }
        if !(self.vif_threshold >= 1.0) {
            return Err(Error::invalid("vif_threshold", "must be at least 1"));
        }
        if self.metrics.is_empty() {
            return Err(Error::invalid("metrics", "at least one metric is required"));
        }
        Ok(())
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::invalid(key, format!("cannot parse `{value}`")))
}

pub fn parse_metrics(value: &str) -> Result<Vec<Metric>> {
    let mut out: Vec<Metric> = Vec::new();
    for name in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let m: Metric = name.parse().map_err(|_| Error::invalid("metrics", format!("unknown metric `{name}`")))?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("metrics", "at least one metric is required"));
    }
    Ok(out)
}
