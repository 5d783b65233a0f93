use serde::Serialize;

use super::{mean, DesignMatrix};
use crate::error::{Error, Result};

// Values of 1 - R² below this are reported as infinite inflation.
const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VifScreen {
    pub threshold: f64,
    pub kept: Vec<String>,
    /// Dropped columns with the VIF they had when removed, in drop order.
    pub dropped: Vec<(String, f64)>,
    /// VIF of each kept column after screening.
    pub final_vif: Vec<(String, f64)>,
}

fn centered(v: &[f64]) -> Vec<f64> {
    let m = mean(v);
    v.iter().map(|x| x - m).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Squared norm of the part of `target` orthogonal to `others` (all centered).
/// Columns already in the span of earlier ones are skipped.
fn residual_sq(target: &[f64], others: &[&Vec<f64>]) -> f64 {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for col in others {
        let mut v = (*col).clone();
        let norm0 = dot(&v, &v).sqrt();
        if norm0 == 0.0 {
            continue;
        }
        for q in &basis {
            let c = dot(&v, q);
            v.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
        }
        let norm = dot(&v, &v).sqrt();
        if norm <= 1e-10 * norm0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    let mut r = target.to_vec();
    for q in &basis {
        let c = dot(&r, q);
        r.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
    }
    dot(&r, &r)
}

/// Variance inflation factor of every column against all the others.
pub fn vifs(x: &DesignMatrix) -> Result<Vec<(String, f64)>> {
    let k = x.names().len();
    if k < 2 {
        return Err(Error::invalid("columns", "VIF needs at least two predictors"));
    }
    if x.rows() <= k {
        return Err(Error::invalid("rows", format!("{} observations for {k} predictors", x.rows())));
    }
    let cols: Vec<Vec<f64>> = x.names().iter().map(|n| centered(x.column(n).unwrap())).collect();
    Ok((0..k)
        .map(|j| {
            let tss = dot(&cols[j], &cols[j]);
            let others: Vec<&Vec<f64>> = cols.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, c)| c).collect();
            let unexplained = if tss == 0.0 { 0.0 } else { residual_sq(&cols[j], &others) / tss };
            let v = if unexplained < SINGULAR_TOL { f64::INFINITY } else { 1.0 / unexplained };
            (x.names()[j].clone(), v)
        })
        .collect())
}

/// Repeatedly drops the column with the largest VIF while it exceeds
/// `threshold`. Ties drop the column listed later.
pub fn vif_screen(x: &DesignMatrix, threshold: f64) -> Result<VifScreen> {
    if !(threshold >= 1.0) {
        return Err(Error::invalid("vif_threshold", "must be at least 1"));
    }
    let mut current = x.clone();
    let mut dropped = Vec::new();
    let mut last = Vec::new();
    while current.names().len() >= 2 {
        let v = vifs(&current)?;
        let (worst, worst_v) = v
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, (_, val))| if *val >= acc.1 { (i, *val) } else { acc });
        if worst_v <= threshold {
            last = v;
            break;
        }
        let name = current.names()[worst].clone();
        dropped.push((name.clone(), worst_v));
        let keep: Vec<String> = current.names().iter().filter(|n| **n != name).cloned().collect();
        current = current.select(&keep)?;
    }
    if current.names().len() == 1 {
        last = vec![(current.names()[0].clone(), 1.0)];
    }
    Ok(VifScreen {
        threshold,
        kept: current.names().to_vec(),
        dropped,
        final_vif: last,
    })
}
