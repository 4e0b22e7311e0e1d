//! Log-log least-squares slope with a Student-t confidence interval.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thinflow::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% interval for the slope.
    pub ci95: [f64; 2],
    pub points: usize,
    /// Indices of rows dropped for a non-positive or non-finite value.
    pub excluded: Vec<usize>,
    pub warnings: Vec<String>,
}

impl SlopeFit {
    pub fn half_width(&self) -> f64 {
        (self.ci95[1] - self.ci95[0]) / 2.0
    }
}

/// Fits `log err = c + s log eps` over `(eps, err)` rows.
pub fn fit_slope(rows: &[(f64, f64)]) -> Result<SlopeFit> {
    let mut excluded = Vec::new();
    let mut warnings = Vec::new();
    let mut pts = Vec::with_capacity(rows.len());
    for (i, &(e, v)) in rows.iter().enumerate() {
        if e > 0.0 && v > 0.0 && e.is_finite() && v.is_finite() {
            pts.push((e.ln(), v.ln()));
        } else {
            excluded.push(i);
            warnings.push(format!("row {i} excluded: eps = {e}, value = {v}"));
        }
    }
    let n = pts.len();
    if n < 3 {
        return Err(Error::Contract(format!(
            "slope fit refused: {n} usable rows, need at least 3"
        )));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Contract("slope fit refused: all eps are equal".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let se = (ssr / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0)
        .map_err(|e| Error::Contract(format!("Student-t: {e}")))?
        .inverse_cdf(0.975);
    Ok(SlopeFit {
        slope,
        intercept,
        ci95: [slope - t * se, slope + t * se],
        points: n,
        excluded,
        warnings,
    })
}
