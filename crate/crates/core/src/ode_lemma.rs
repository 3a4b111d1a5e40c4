//! Extremal trajectory of the logarithmic differential-inequality blow-up
//! bound, and the averaged functional `Y(M) = ∫₁^M F(σ) σ⁻¹ dσ`.
//!
//! The trajectory solves
//!
//! ```text
//! φ'(t) = max( δ / (K1 t), φ^p1 / (K2 t (ln t)^(p2-1)) )
//! ```
//!
//! which in `τ = ln t` reads `dφ/dτ = max(δ/K1, φ^p1 / (K2 τ^(p2-1)))`.
//! Lifespans are of order `exp(K3 δ^(-e))`, so integration runs in `τ`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auxfn::{eta_unit, theta_unit};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::sweep::linear_fit;

/// `φ` above this value counts as diverged.
pub const DIVERGENCE_LEVEL: f64 = 1e12;

/// Steps are halved while `φ` would grow by more than this factor.
pub const MAX_STEP_GROWTH: f64 = 1.1;

/// Default step in `τ = ln t`.
pub const DEFAULT_TAU_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaParams {
    pub p1: f64,
    pub p2: f64,
    pub delta: f64,
    pub k1: f64,
    pub k2: f64,
    pub t0: f64,
    #[serde(default)]
    pub phi0_init: f64,
}

impl LemmaParams {
    pub fn new(p1: f64, p2: f64, delta: f64) -> Self {
        Self {
            p1,
            p2,
            delta,
            k1: 1.0,
            k2: 1.0,
            t0: 3.0,
            phi0_init: 0.0,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v, floor) in [("p1", self.p1, 1.0), ("p2", self.p2, 1.0)] {
            if !(v > floor) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must exceed 1",
                });
            }
        }
        for (name, v) in [("delta", self.delta), ("k1", self.k1), ("k2", self.k2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be positive",
                });
            }
        }
        if !(self.t0 > 2.0) {
            return Err(Error::InvalidParameter {
                name: "t0",
                value: self.t0,
                reason: "must exceed 2",
            });
        }
        if !(self.phi0_init >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "phi0_init",
                value: self.phi0_init,
                reason: "must be non-negative",
            });
        }
        if self.p2 >= self.p1 + 1.0 {
            return Err(Error::HypothesisViolated(format!(
                "p2 = {} must be below p1 + 1 = {}",
                self.p2,
                self.p1 + 1.0
            )));
        }
        Ok(())
    }

    /// `e = (p1 - 1) / (p1 - p2 + 1)`.
    pub fn scaling_exponent(&self) -> f64 {
        (self.p1 - 1.0) / (self.p1 - self.p2 + 1.0)
    }

    /// `dφ/dτ` and whether the nonlinear branch is the larger one.
    fn slope(&self, tau: f64, phi: f64) -> (f64, bool) {
        let linear = self.delta / self.k1;
        let nonlinear = phi.max(0.0).powf(self.p1) / (self.k2 * tau.powf(self.p2 - 1.0));
        if nonlinear > linear {
            (nonlinear, true)
        } else {
            (linear, false)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremalResult {
    /// `None` when `φ` stayed below the divergence level up to `t_cap`.
    pub t_blow: Option<f64>,
    pub ln_t_blow: Option<f64>,
    /// First time the nonlinear branch dominates.
    pub t_switch: Option<f64>,
    /// `φ` at the last accepted step.
    pub phi_final: f64,
    pub steps: usize,
}

impl ExtremalResult {
    pub fn censored(&self) -> bool {
        self.t_blow.is_none()
    }
}

/// RK4 in `τ = ln t` with base step `tau_step`.
pub fn integrate_extremal_with_step(
    params: &LemmaParams,
    t_cap: f64,
    tau_step: f64,
) -> Result<ExtremalResult> {
    params.validate()?;
    if !(t_cap > params.t0) {
        return Err(Error::InvalidParameter {
            name: "t_cap",
            value: t_cap,
            reason: "must exceed t0",
        });
    }
    if !(tau_step > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tau_step",
            value: tau_step,
            reason: "must be positive",
        });
    }
    let tau_cap = t_cap.ln();
    let mut tau = params.t0.ln();
    let mut phi = params.phi0_init;
    let mut switch = None;
    let mut steps = 0;
    let f = |tau: f64, phi: f64| params.slope(tau, phi).0;
    while tau < tau_cap {
        if switch.is_none() && params.slope(tau, phi).1 {
            switch = Some(tau);
        }
        let mut h = tau_step.min(tau_cap - tau);
        let next = loop {
            let k1 = f(tau, phi);
            let k2 = f(tau + 0.5 * h, phi + 0.5 * h * k1);
            let k3 = f(tau + 0.5 * h, phi + 0.5 * h * k2);
            let k4 = f(tau + h, phi + h * k3);
            let cand = phi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            let too_fast = phi > 0.0 && !(cand <= MAX_STEP_GROWTH * phi);
            if too_fast && h > 1e-15 * tau {
                h *= 0.5;
                continue;
            }
            break cand;
        };
        tau += h;
        phi = next;
        steps += 1;
        if !(phi < DIVERGENCE_LEVEL) {
            return Ok(ExtremalResult {
                t_blow: Some(tau.exp()),
                ln_t_blow: Some(tau),
                t_switch: switch.map(f64::exp),
                phi_final: phi,
                steps,
            });
        }
    }
    Ok(ExtremalResult {
        t_blow: None,
        ln_t_blow: None,
        t_switch: switch.map(f64::exp),
        phi_final: phi,
        steps,
    })
}

pub fn integrate_extremal(params: &LemmaParams, t_cap: f64) -> Result<ExtremalResult> {
    integrate_extremal_with_step(params, t_cap, DEFAULT_TAU_STEP)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaFit {
    pub exponent: f64,
    /// Slope of `ln t_blow` against `δ^(-exponent)`.
    pub k3: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(δ, ln t_blow)`
    pub points: Vec<(f64, f64)>,
}

/// Fits `ln T` against `δ^(-exponent)` for given points `(δ, ln T)`.
pub fn fit_with_exponent(points: &[(f64, f64)], exponent: f64) -> Result<LemmaFit> {
    if points.len() < 2 {
        return Err(Error::InsufficientData("need at least two points".into()));
    }
    let x: Vec<f64> = points.iter().map(|(d, _)| d.powf(-exponent)).collect();
    let y: Vec<f64> = points.iter().map(|(_, l)| *l).collect();
    let (k3, intercept, r_squared, _) = linear_fit(&x, &y);
    Ok(LemmaFit {
        exponent,
        k3,
        intercept,
        r_squared,
        points: points.to_vec(),
    })
}

/// Integrates every δ (in parallel) and fits with the theoretical exponent.
pub fn fit_lemma_scaling(deltas: &[f64], base: &LemmaParams, t_cap: f64) -> Result<LemmaFit> {
    run_delta_ladder(deltas, base, t_cap).map(|(_, fit)| fit)
}

/// Per-δ results together with the fit.
pub fn run_delta_ladder(
    deltas: &[f64],
    base: &LemmaParams,
    t_cap: f64,
) -> Result<(Vec<(f64, ExtremalResult)>, LemmaFit)> {
    if deltas.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} delta values, at least 5 required",
            deltas.len()
        )));
    }
    let lo = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = deltas.iter().copied().fold(0.0, f64::max);
    if !(hi >= 10.0 * lo * (1.0 - 1e-12)) {
        return Err(Error::InsufficientData(format!(
            "delta values span [{lo}, {hi}], less than one decade"
        )));
    }
    let results: Vec<Result<ExtremalResult>> = deltas
        .par_iter()
        .map(|&d| integrate_extremal(&base.with_delta(d), t_cap))
        .collect();
    let mut ladder = Vec::with_capacity(deltas.len());
    let mut points = Vec::with_capacity(deltas.len());
    for (d, r) in deltas.iter().zip(results) {
        let r = r?;
        let l = r.ln_t_blow.ok_or_else(|| {
            Error::InsufficientData(format!("delta = {d} did not diverge before t_cap"))
        })?;
        points.push((*d, l));
        ladder.push((*d, r));
    }
    let fit = fit_with_exponent(&points, base.scaling_exponent())?;
    Ok((ladder, fit))
}

/// Columns `delta, t_blow, t_switch`.
pub fn write_delta_ladder_csv<W: Write>(ladder: &[(f64, ExtremalResult)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["delta", "t_blow", "t_switch"])?;
    for (d, r) in ladder {
        w.serialize((d, r.t_blow, r.t_switch))?;
    }
    w.flush()?;
    Ok(())
}

/// `Y` sampled on an increasing grid of `M > 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YTable {
    pub m: Vec<f64>,
    pub y: Vec<f64>,
    /// Power `2p'` of the cutoff used to build `F`, when known.
    pub power: f64,
}

fn check_m_grid(m_grid: &[f64]) -> Result<()> {
    if m_grid.is_empty() || !(m_grid[0] >= 1.0) {
        return Err(Error::InvalidGrid("M grid must start at or above 1".into()));
    }
    if m_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("M grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `∫_a^b F(σ)/σ dσ` on panels of width at most `a/4`, geometric in σ.
fn log_integral(f: &dyn Fn(f64) -> f64, a: f64, b: f64, gl: &GaussLegendre) -> f64 {
    if b <= a {
        return 0.0;
    }
    // σ = e^u: ∫ F(e^u) du on a uniform u-grid
    let (ua, ub) = (a.ln(), b.ln());
    let panels = ((ub - ua) / 0.05).ceil().max(1.0) as usize;
    let h = (ub - ua) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = ua + k as f64 * h;
            gl.integrate(lo, lo + h, |u| f(u.exp()))
        })
        .sum()
}

/// `Y(M) = ∫₁^M F(σ) σ⁻¹ dσ` on every grid point.
pub fn y_functional(f: &dyn Fn(f64) -> f64, m_grid: &[f64], power: f64) -> Result<YTable> {
    check_m_grid(m_grid)?;
    let gl = GaussLegendre::new(12);
    let mut y = Vec::with_capacity(m_grid.len());
    let mut acc = 0.0;
    let mut prev = 1.0;
    for &m in m_grid {
        acc += log_integral(f, prev, m, &gl);
        prev = m;
        y.push(acc);
    }
    Ok(YTable {
        m: m_grid.to_vec(),
        y,
        power,
    })
}

impl YTable {
    pub fn is_non_decreasing(&self) -> bool {
        self.y.windows(2).all(|w| w[1] >= w[0])
    }
}

/// `max |M Y'(M) - F(M)| / max |F|`, with `Y'` by centered differences of the
/// quadrature at step `1e-3 M`.
pub fn derivative_identity_error(f: &dyn Fn(f64) -> f64, table: &YTable) -> f64 {
    let gl = GaussLegendre::new(12);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for &m in &table.m {
        let h = 1e-5 * m;
        if m - h < 1.0 {
            continue;
        }
        let up = log_integral(f, m, m + h, &gl);
        let down = log_integral(f, m - h, m, &gl);
        let dy = (up + down) / (2.0 * h);
        let fm = f(m);
        worst = worst.max((m * dy - fm).abs());
        scale = scale.max(fm.abs());
    }
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

/// `∫₀^T W(t) θ_σ^k(t) dt` where `W(t)` is the space integral of the payload.
pub fn theta_weighted(w: &dyn Fn(f64) -> f64, t_end: f64, sigma: f64, power: f64) -> f64 {
    let gl = GaussLegendre::new(16);
    let (a, b) = (0.5 * sigma, sigma.min(t_end));
    if b <= a {
        return 0.0;
    }
    let panels = 16;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * h;
            gl.integrate(lo, lo + h, |t| w(t) * theta_unit(t / sigma).0.powf(power))
        })
        .sum()
}

/// `∫₀^T W(t) η_M^k(t) dt`.
pub fn eta_weighted(w: &dyn Fn(f64) -> f64, t_end: f64, m: f64, power: f64) -> f64 {
    let gl = GaussLegendre::new(16);
    let mut total = 0.0;
    let flat_end = (0.5 * m).min(t_end);
    let panels = 16;
    let h = flat_end / panels as f64;
    for k in 0..panels {
        let lo = k as f64 * h;
        total += gl.integrate(lo, lo + h, w);
    }
    let (a, b) = (0.5 * m, m.min(t_end));
    if b > a {
        let h = (b - a) / panels as f64;
        for k in 0..panels {
            let lo = a + k as f64 * h;
            total += gl.integrate(lo, lo + h, |t| w(t) * eta_unit(t / m).0.powf(power));
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YReport {
    pub table: YTable,
    /// Relative error of `M Y'(M) = F(M)`.
    pub identity_error: f64,
    /// `Y(M) / ∫∫ ω η_M^k` per grid point.
    pub bound_ratio: Vec<f64>,
    pub max_bound_ratio: f64,
    /// `max_bound_ratio ≤ ln 2 · (1 + tolerance)`
    pub bound_holds: bool,
}

/// Builds `F` from θ-cutoffs of a payload with space integral `w(t)` supported
/// in `[0, t_end]`, then checks the derivative identity and the `ln 2` bound.
pub fn y_cutoff_report(
    w: &dyn Fn(f64) -> f64,
    t_end: f64,
    m_grid: &[f64],
    power: f64,
    tolerance: f64,
) -> Result<YReport> {
    if !(power >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "power",
            value: power,
            reason: "must be at least 1",
        });
    }
    let f = |sigma: f64| theta_weighted(w, t_end, sigma, power);
    let table = y_functional(&f, m_grid, power)?;
    let identity_error = derivative_identity_error(&f, &table);
    let bound_ratio: Vec<f64> = table
        .m
        .iter()
        .zip(&table.y)
        .map(|(m, y)| {
            let rhs = eta_weighted(w, t_end, *m, power);
            if rhs > 0.0 {
                y / rhs
            } else {
                0.0
            }
        })
        .collect();
    let max_bound_ratio = bound_ratio.iter().copied().fold(0.0, f64::max);
    Ok(YReport {
        table,
        identity_error,
        bound_holds: max_bound_ratio <= std::f64::consts::LN_2 * (1.0 + tolerance),
        bound_ratio,
        max_bound_ratio,
    })
}
