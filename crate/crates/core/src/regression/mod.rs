//! Hierarchical multiple regression: staged OLS fits with unstandardized and
//! standardized coefficients, t-tests, R² change and F-change, plus
//! variance-inflation screening of the candidate predictors.

mod hierarchical;
mod ols;
mod vif;

pub use hierarchical::{hierarchical_regression, CoefficientRow, StageResult};
pub use ols::{ols_fit, OlsFit};
pub use vif::{vif_screen, vifs, VifScreen};

use crate::error::{Error, Result};

/// Named predictor columns and one response, all of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    response_name: String,
    response: Vec<f64>,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl DesignMatrix {
    pub fn new(response_name: impl Into<String>, response: Vec<f64>) -> Result<Self> {
        if response.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("response", "contains a missing or non-finite value"));
        }
        Ok(Self {
            response_name: response_name.into(),
            response,
            names: Vec::new(),
            columns: Vec::new(),
        })
    }

    pub fn add_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if self.names.contains(&name) {
            return Err(Error::invalid(&name, "duplicate column name"));
        }
        if values.len() != self.response.len() {
            return Err(Error::invalid(
                &name,
                format!("has {} rows, response has {}", values.len(), self.response.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(&name, "contains a missing or non-finite value"));
        }
        self.names.push(name);
        self.columns.push(values);
        Ok(())
    }

    pub fn with_column(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        self.add_column(name, values)?;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.response.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.columns[i].as_slice())
    }

    /// A matrix with only the named columns, in the given order.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<DesignMatrix> {
        let mut out = DesignMatrix {
            response_name: self.response_name.clone(),
            response: self.response.clone(),
            names: Vec::new(),
            columns: Vec::new(),
        };
        for n in names {
            let n = n.as_ref();
            let col = self
                .column(n)
                .ok_or_else(|| Error::invalid(n, "no such column"))?;
            out.add_column(n, col.to_vec())?;
        }
        Ok(out)
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub(crate) fn std_dev(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)).sqrt()
}
