use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `cRMSE = a k^b`, fitted by least squares on `(ln k, ln cRMSE)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub a: f64,
    pub b: f64,
    /// Coefficient of determination in log space.
    pub r2: f64,
    pub points: usize,
}

impl PowerLawFit {
    pub fn predict(&self, k: f64) -> f64 {
        self.a * k.powf(self.b)
    }
}

/// Fits `(k, crmse)` pairs. Needs at least three distinct `k` and strictly
/// positive values throughout.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    for &(k, e) in points {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::FitRefused(format!("k = {k} is not positive")));
        }
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::FitRefused(format!("cRMSE = {e} at k = {k} is not positive")));
        }
    }
    let mut ks: Vec<f64> = points.iter().map(|p| p.0).collect();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    if ks.len() < 3 {
        return Err(Error::FitRefused(format!("{} distinct k values, need at least 3", ks.len())));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let intercept = my - b * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - b * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let scale = ys.iter().map(|y| y.abs()).fold(1.0, f64::max);
    let r2 = if ss_tot <= (1e-14 * scale).powi(2) * len { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(PowerLawFit { a: intercept.exp(), b, r2, points: points.len() })
}

/// Writes `k,crmse,fit` rows, sorted by `k`.
pub fn write_fit_csv(path: &Path, points: &[(f64, f64)], fit: &PowerLawFit) -> Result<()> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "crmse", "fit"])?;
    for (k, e) in sorted {
        w.write_record([k.to_string(), e.to_string(), fit.predict(k).to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    crate::io::write_atomic(path, &bytes)
}
