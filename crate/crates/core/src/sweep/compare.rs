//! Verdicts on finished sweeps.

use serde::{Deserialize, Serialize};

use super::fit::{fit_scaling, FitMode, UPPER_BOUND_SLACK};
use super::SweepResult;
use crate::error::{Error, Result};
use crate::exponents::LifespanPrediction;

/// Bound on `max s / min s` for the compensated lifespan `s = T ε^k`.
pub const COMPENSATED_RATIO_LIMIT: f64 = 3.0;

/// Bound on the slope difference between damped and undamped sweeps.
pub const DAMPING_SLOPE_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundVerdict {
    pub power_exponent: f64,
    /// `(ε, T ε^k)`
    pub compensated: Vec<(f64, f64)>,
    pub ratio: f64,
    pub fitted_slope: f64,
    pub ratio_ok: bool,
    pub slope_ok: bool,
    pub passes: bool,
}

/// Compensated-lifespan and slope checks on raw `(ε, T)` points.
pub fn upper_bound_check_points(
    points: &[(f64, f64)],
    prediction: &LifespanPrediction,
) -> Result<UpperBoundVerdict> {
    let k = prediction.power_exponent().ok_or_else(|| {
        Error::UnsupportedRegime(format!(
            "upper-bound check needs a power-law prediction; got {}",
            prediction.case_label
        ))
    })?;
    let fit = fit_scaling(points, FitMode::PowerLaw)?;
    let compensated: Vec<(f64, f64)> = points.iter().map(|(e, t)| (*e, t * e.powf(k))).collect();
    let hi = compensated.iter().map(|c| c.1).fold(f64::MIN, f64::max);
    let lo = compensated.iter().map(|c| c.1).fold(f64::MAX, f64::min);
    let ratio = hi / lo;
    let ratio_ok = ratio <= COMPENSATED_RATIO_LIMIT;
    let slope_ok = fit.slope <= k + UPPER_BOUND_SLACK;
    Ok(UpperBoundVerdict {
        power_exponent: k,
        compensated,
        ratio,
        fitted_slope: fit.slope,
        ratio_ok,
        slope_ok,
        passes: ratio_ok && slope_ok,
    })
}

/// [`upper_bound_check_points`] on a sweep; any censored rung is an error.
pub fn upper_bound_check(
    sweep: &SweepResult,
    prediction: &LifespanPrediction,
) -> Result<UpperBoundVerdict> {
    let censored = sweep.censored_count();
    if censored > 0 {
        return Err(Error::InsufficientData(format!(
            "{censored} censored runs: the compensated lifespan is undefined there"
        )));
    }
    upper_bound_check_points(&sweep.points(), prediction)
}

/// Comparison of two sweeps that differ only in their coefficients.
///
/// The flag is a consistency check on the measured slopes, not a
/// verification of a theorem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampingEffectReport {
    pub slope_a: f64,
    pub slope_b: f64,
    pub slope_difference: f64,
    /// `(ε, T_b / T_a)` where both rungs blew up.
    pub lifespan_ratios: Vec<(f64, f64)>,
    pub consistent: bool,
    pub verdict_kind: String,
}

fn same_ladder(a: &SweepResult, b: &SweepResult) -> bool {
    let (ea, eb) = (a.epsilons(), b.epsilons());
    ea.len() == eb.len()
        && ea
            .iter()
            .zip(&eb)
            .all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(1.0))
}

pub fn damping_effect_report(a: &SweepResult, b: &SweepResult) -> Result<DampingEffectReport> {
    if !same_ladder(a, b) {
        return Err(Error::IncomparableSweeps("epsilon ladders differ".into()));
    }
    let (sa, sb) = (&a.spec.base, &b.spec.base);
    if sa.kind != sb.kind || sa.n != sb.n || sa.pq != sb.pq || a.spec.data != b.spec.data {
        return Err(Error::IncomparableSweeps(
            "sweeps differ in more than their coefficients".into(),
        ));
    }
    let slope_a = a.fit(FitMode::PowerLaw)?.slope;
    let slope_b = b.fit(FitMode::PowerLaw)?.slope;
    let lifespan_ratios = a
        .records
        .iter()
        .zip(&b.records)
        .filter_map(|(x, y)| match (x.t_blow, y.t_blow) {
            (Some(ta), Some(tb)) => Some((x.epsilon, tb / ta)),
            _ => None,
        })
        .collect();
    let slope_difference = slope_b - slope_a;
    Ok(DampingEffectReport {
        slope_a,
        slope_b,
        slope_difference,
        lifespan_ratios,
        consistent: slope_difference.abs() < DAMPING_SLOPE_LIMIT,
        verdict_kind: "consistency check".to_string(),
    })
}
