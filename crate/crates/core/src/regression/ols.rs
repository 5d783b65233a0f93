use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{mean, std_dev, DesignMatrix};
use crate::error::{Error, Result};

// A column whose QR pivot falls below this share of its own norm lies in the
// span of the columns before it.
const RANK_TOL: f64 = 1e-10;

/// Ordinary least squares with an intercept.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsFit {
    pub names: Vec<String>,
    pub intercept: f64,
    pub intercept_se: f64,
    /// Unstandardized coefficients, in column order.
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Coefficients rescaled by `sd(x) / sd(y)`.
    pub standardized: Vec<f64>,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub r2: f64,
    pub rss: f64,
    pub tss: f64,
    pub n: usize,
    pub df_resid: usize,
}

impl OlsFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.coefficients[i])
    }
}

pub fn ols_fit(x: &DesignMatrix) -> Result<OlsFit> {
    let n = x.rows();
    let k = x.names().len();
    if n <= k + 1 {
        return Err(Error::InvalidArgument {
            field: "rows".into(),
            message: format!("{n} observations cannot fit {k} predictors and an intercept"),
        });
    }
    let y = x.response();
    let ybar = mean(y);
    let tss: f64 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum();
    if tss == 0.0 {
        return Err(Error::Domain(format!("response `{}` is constant", x.response_name())));
    }

    // Unit-norm columns keep the pivots comparable across wildly scaled metrics.
    let p = k + 1;
    let mut a = DMatrix::<f64>::zeros(n, p);
    let mut scale = vec![0.0; p];
    let mut dependent = Vec::new();
    for j in 0..p {
        let col: Vec<f64> = if j == 0 {
            vec![1.0; n]
        } else {
            x.column(&x.names()[j - 1]).unwrap().to_vec()
        };
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            dependent.push(x.names()[j - 1].clone());
            continue;
        }
        scale[j] = norm;
        for (i, v) in col.iter().enumerate() {
            a[(i, j)] = v / norm;
        }
    }
    if !dependent.is_empty() {
        return Err(Error::RankDeficient { columns: dependent });
    }

    let qr = a.clone().qr();
    let r = qr.r();
    for j in 1..p {
        if r[(j, j)].abs() < RANK_TOL {
            dependent.push(x.names()[j - 1].clone());
        }
    }
    if !dependent.is_empty() {
        return Err(Error::RankDeficient { columns: dependent });
    }

    let yv = DVector::from_column_slice(y);
    let qty = qr.q().transpose() * &yv;
    let beta_s = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Domain("singular triangular factor".into()))?;
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Domain("singular triangular factor".into()))?;

    let resid = &yv - &a * &beta_s;
    let rss = resid.norm_squared();
    let df_resid = n - p;
    let sigma2 = rss / df_resid as f64;

    let mut beta = vec![0.0; p];
    let mut se = vec![0.0; p];
    for j in 0..p {
        beta[j] = beta_s[j] / scale[j];
        let row_sq: f64 = r_inv.row(j).iter().map(|v| v * v).sum();
        se[j] = (sigma2 * row_sq).sqrt() / scale[j];
    }

    let t_dist = StudentsT::new(0.0, 1.0, df_resid as f64).map_err(|e| Error::Domain(e.to_string()))?;
    let sd_y = std_dev(y);
    let mut t = Vec::with_capacity(k);
    let mut pv = Vec::with_capacity(k);
    let mut standardized = Vec::with_capacity(k);
    for j in 1..p {
        let tj = t_stat(beta[j], se[j]);
        t.push(tj);
        pv.push(if tj.is_finite() { 2.0 * t_dist.sf(tj.abs()) } else { 0.0 });
        standardized.push(beta[j] * std_dev(x.column(&x.names()[j - 1]).unwrap()) / sd_y);
    }

    Ok(OlsFit {
        names: x.names().to_vec(),
        intercept: beta[0],
        intercept_se: se[0],
        coefficients: beta[1..].to_vec(),
        std_errors: se[1..].to_vec(),
        standardized,
        t,
        p: pv,
        r2: (1.0 - rss / tss).clamp(0.0, 1.0),
        rss,
        tss,
        n,
        df_resid,
    })
}

fn t_stat(b: f64, se: f64) -> f64 {
    if se > 0.0 {
        b / se
    } else if b == 0.0 {
        0.0
    } else {
        b.signum() * f64::INFINITY
    }
}
