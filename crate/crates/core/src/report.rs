use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Tabulated experiment output plus an optional log–log slope fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub fitted_slope: Option<f64>,
    /// Half-width of the 95% interval on the slope.
    pub slope_ci: Option<f64>,
    pub expected_slope: Option<f64>,
    pub config: BTreeMap<String, String>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        ExperimentReport {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            fitted_slope: None,
            slope_ci: None,
            expected_slope: None,
            config: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn set_config(&mut self, key: &str, value: impl ToString) {
        self.config.insert(key.to_string(), value.to_string());
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// Ordinary least-squares fit `y = a + b x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
}

pub fn least_squares(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(LabError::InvalidParameter(
            "line fit needs at least two matching points".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(LabError::InvalidParameter("degenerate abscissae".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok(LineFit {
        intercept: my - slope * mx,
        slope,
    })
}

/// Slope of `log y` against `log x`, with a 95% interval propagated from
/// per-point standard errors of `log y` (`sigma`).
pub fn loglog_slope(x: &[f64], y: &[f64], sigma_log_y: &[f64]) -> Result<(f64, f64)> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(LabError::InvalidParameter("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let fit = least_squares(&lx, &ly)?;
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    // slope = Σ c_i y_i with c_i = (x_i − x̄)/Sxx
    let var: f64 = lx
        .iter()
        .zip(sigma_log_y)
        .map(|(a, s)| ((a - mx) / sxx).powi(2) * s * s)
        .sum();
    Ok((fit.slope, 1.96 * var.sqrt()))
}
