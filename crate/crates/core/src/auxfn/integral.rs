//! Weighted integrals over the light cone and the travelling mode `Φ = e^(-t) φ₁`.

use serde::{Deserialize, Serialize};

use super::profile::{CoefficientProfile, ProfileKind};
use super::radial::RadialTable;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Slope threshold of `ln ratio` against `ln t` above which the ratio counts as growing.
pub const TREND_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimateReport {
    pub alpha: f64,
    pub beta: f64,
    pub radius: f64,
    pub t: Vec<f64>,
    pub integral: Vec<f64>,
    /// `integral / (t+R)^α`
    pub ratio: Vec<f64>,
    pub sup_ratio: f64,
    /// Log-log slope of the ratio over the largest decade of `t`.
    pub trend: f64,
    pub bounded: bool,
}

/// `∫₀^(t+R) (1+r)^α e^(-β(t-r)) dr` by panelled Gauss–Legendre.
pub fn cone_integral(alpha: f64, beta: f64, radius: f64, t: f64) -> f64 {
    let gl = GaussLegendre::new(16);
    let end = t + radius;
    let panels = (end.ceil() as usize).max(1) * 2;
    let h = end / panels as f64;
    (0..panels)
        .map(|k| {
            gl.integrate(k as f64 * h, (k + 1) as f64 * h, |r| {
                (1.0 + r).powf(alpha) * (-beta * (t - r)).exp()
            })
        })
        .sum()
}

pub fn integral_estimate_check(
    alpha: f64,
    beta: f64,
    radius: f64,
    t_grid: &[f64],
) -> Result<IntegralEstimateReport> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "must be positive",
        });
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter {
            name: "R",
            value: radius,
            reason: "must be positive",
        });
    }
    if t_grid.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidGrid("t grid must be non-negative".into()));
    }
    let integral: Vec<f64> = t_grid
        .iter()
        .map(|&t| cone_integral(alpha, beta, radius, t))
        .collect();
    let ratio: Vec<f64> = t_grid
        .iter()
        .zip(&integral)
        .map(|(t, i)| i / (t + radius).powf(alpha))
        .collect();
    let sup_ratio = ratio.iter().copied().fold(0.0, f64::max);
    let trend = decade_trend(t_grid, &ratio);
    Ok(IntegralEstimateReport {
        alpha,
        beta,
        radius,
        t: t_grid.to_vec(),
        integral,
        bounded: sup_ratio.is_finite() && trend < TREND_THRESHOLD,
        ratio,
        sup_ratio,
        trend,
    })
}

/// Least-squares slope of `ln y` on `ln t` over `t ≥ t_max/10`, `t > 0`.
fn decade_trend(t: &[f64], y: &[f64]) -> f64 {
    let t_max = t.iter().copied().fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter(|(t, y)| **t > 0.0 && **t >= t_max / 10.0 && **y > 0.0)
        .map(|(t, y)| (t.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Discrete residual of `Φ_tt − ΔΦ − D Φ_t` for `Φ = e^(-t) φ₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TravellingResidual {
    pub dr: f64,
    pub dt: f64,
    /// `max |residual| / max |Φ|` over the sampled slab.
    pub relative: f64,
}

/// Centered differences in both `t` and `r` on `[t0, t0 + steps·dt] × {r ≥ R_min}`,
/// with `R_min` = [`super::RESIDUAL_R_MIN`].
pub fn travelling_residual(
    phi1: &RadialTable,
    damping: &CoefficientProfile,
    t0: f64,
    dt: f64,
    steps: usize,
) -> Result<TravellingResidual> {
    damping.require_kind(ProfileKind::Damping)?;
    if !(dt > 0.0) || phi1.len() < 3 {
        return Err(Error::InvalidGrid(
            "need dt > 0 and at least three nodes".into(),
        ));
    }
    let h = phi1.dr;
    let nm1 = phi1.n.as_f64() - 1.0;
    let big = |t: f64, j: usize| (-t).exp() * phi1.values[j];
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for s in 0..=steps {
        let t = t0 + s as f64 * dt;
        for j in phi1.first_residual_node()..phi1.len() - 1 {
            let r = phi1.r(j);
            let c = big(t, j);
            let tt = (big(t + dt, j) - 2.0 * c + big(t - dt, j)) / (dt * dt);
            let ts = (big(t + dt, j) - big(t - dt, j)) / (2.0 * dt);
            let (a, b) = (big(t, j - 1), big(t, j + 1));
            let lap = (b - 2.0 * c + a) / (h * h) + nm1 / r * (b - a) / (2.0 * h);
            worst = worst.max((tt - lap - damping.eval(r) * ts).abs());
            scale = scale.max(c.abs());
        }
    }
    Ok(TravellingResidual {
        dr: h,
        dt,
        relative: worst / scale,
    })
}
