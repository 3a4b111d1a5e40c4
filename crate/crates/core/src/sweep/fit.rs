//! Least-squares scaling fits of lifespan against `1/ε`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points needed for a fit.
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// `ln T` against `ln(1/ε)`.
    PowerLaw,
    /// `ln ln T` against `ln(1/ε)`.
    DoubleLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub mode: FitMode,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Observed minus fitted ordinate, one per point.
    pub residuals: Vec<f64>,
    pub predicted_slope: Option<f64>,
    /// `slope ≤ predicted + UPPER_BOUND_SLACK`
    pub upper_bound_consistent: Option<bool>,
    /// `|slope - predicted| ≤ tolerance · predicted`
    pub slope_match: Option<bool>,
    pub slope_tolerance: Option<f64>,
}

/// Allowed excess of the fitted slope over the predicted one.
pub const UPPER_BOUND_SLACK: f64 = 0.15;

/// Ordinary least squares `y = slope·x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64, Vec<f64>) {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| b - (slope * a + intercept))
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, intercept, r2, residuals)
}

/// Fits `(ε, T)` points in the requested mode.
pub fn fit_scaling(points: &[(f64, f64)], mode: FitMode) -> Result<FitResult> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} points, at least {MIN_FIT_POINTS} required",
            points.len()
        )));
    }
    let mut x = Vec::with_capacity(points.len());
    let mut y = Vec::with_capacity(points.len());
    for &(eps, t) in points {
        if !(eps > 0.0) || !(t > 0.0) {
            return Err(Error::InvalidParameter {
                name: "point",
                value: if eps > 0.0 { t } else { eps },
                reason: "epsilon and lifespan must be positive",
            });
        }
        if mode == FitMode::DoubleLog && !(t > 1.0) {
            return Err(Error::InvalidParameter {
                name: "lifespan",
                value: t,
                reason: "double-log fits need T > 1",
            });
        }
        x.push((1.0 / eps).ln());
        y.push(match mode {
            FitMode::PowerLaw => t.ln(),
            FitMode::DoubleLog => t.ln().ln(),
        });
    }
    if x.iter().all(|v| (v - x[0]).abs() < 1e-15) {
        return Err(Error::InsufficientData(
            "all points share one epsilon".into(),
        ));
    }
    let (slope, intercept, r_squared, residuals) = linear_fit(&x, &y);
    Ok(FitResult {
        mode,
        slope,
        intercept,
        r_squared,
        residuals,
        predicted_slope: None,
        upper_bound_consistent: None,
        slope_match: None,
        slope_tolerance: None,
    })
}

impl FitResult {
    /// Fills the verdict fields against a predicted slope.
    pub fn with_prediction(mut self, predicted: f64, relative_tolerance: f64) -> Self {
        self.predicted_slope = Some(predicted);
        self.slope_tolerance = Some(relative_tolerance);
        self.upper_bound_consistent = Some(self.slope <= predicted + UPPER_BOUND_SLACK);
        self.slope_match =
            Some((self.slope - predicted).abs() <= relative_tolerance * predicted.abs());
        self
    }
}
