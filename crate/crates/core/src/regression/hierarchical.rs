use std::collections::HashSet;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::{ols_fit, DesignMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub name: String,
    /// Unstandardized coefficient.
    pub b: f64,
    pub se: f64,
    /// Standardized coefficient.
    pub beta: f64,
    pub t: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageResult {
    pub stage: usize,
    pub added: Vec<String>,
    pub coefficients: Vec<CoefficientRow>,
    pub intercept: f64,
    /// `sqrt(R²)` carrying the sign of the summed standardized coefficients.
    pub r_signed: f64,
    pub r: f64,
    pub r2: f64,
    pub delta_r2: f64,
    /// `None` when the model fits perfectly and the ratio is unbounded.
    pub f_change: Option<f64>,
    pub p_f_change: f64,
    pub df1: usize,
    pub df2: usize,
    pub n: usize,
}

/// Fits nested models, each stage adding the given columns to all earlier
/// ones, and reports the change in explained variance at each step.
pub fn hierarchical_regression<S: AsRef<str>>(x: &DesignMatrix, stages: &[Vec<S>]) -> Result<Vec<StageResult>> {
    if stages.is_empty() {
        return Err(Error::invalid("stages", "at least one stage is required"));
    }
    let mut seen = HashSet::new();
    for (i, st) in stages.iter().enumerate() {
        if st.is_empty() {
            return Err(Error::invalid("stages", format!("stage {} adds no columns", i + 1)));
        }
        for c in st {
            let c = c.as_ref();
            if x.column(c).is_none() {
                return Err(Error::invalid(c, "no such column"));
            }
            if !seen.insert(c.to_string()) {
                return Err(Error::invalid(c, "appears in more than one stage"));
            }
        }
    }

    let mut cols: Vec<String> = Vec::new();
    let mut prev_r2 = 0.0;
    let mut out = Vec::with_capacity(stages.len());
    for (i, st) in stages.iter().enumerate() {
        let added: Vec<String> = st.iter().map(|c| c.as_ref().to_string()).collect();
        cols.extend(added.iter().cloned());
        let fit = ols_fit(&x.select(&cols)?)?;
        let q = added.len();
        let df2 = fit.df_resid;
        let delta = fit.r2 - prev_r2;
        let unexplained = 1.0 - fit.r2;
        let (f_change, p_f) = if unexplained <= 1e-15 {
            (None, 0.0)
        } else {
            let f = (delta.max(0.0) / q as f64) / (unexplained / df2 as f64);
            let dist = FisherSnedecor::new(q as f64, df2 as f64).map_err(|e| Error::Domain(e.to_string()))?;
            (Some(f), dist.sf(f))
        };
        let r = fit.r2.sqrt();
        let sign = if fit.standardized.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        out.push(StageResult {
            stage: i + 1,
            added,
            coefficients: (0..fit.names.len())
                .map(|j| CoefficientRow {
                    name: fit.names[j].clone(),
                    b: fit.coefficients[j],
                    se: fit.std_errors[j],
                    beta: fit.standardized[j],
                    t: fit.t[j],
                    p: fit.p[j],
                })
                .collect(),
            intercept: fit.intercept,
            r_signed: sign * r,
            r,
            r2: fit.r2,
            delta_r2: delta,
            f_change,
            p_f_change: p_f,
            df1: q,
            df2,
            n: fit.n,
        });
        prev_r2 = fit.r2;
    }
    Ok(out)
}
