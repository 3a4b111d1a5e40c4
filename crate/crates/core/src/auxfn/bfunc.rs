//! The family `b_a(t, r) = ∫₀¹ e^(-λt) φ_λ(r) λ^(a-1) dλ`.
//!
//! The λ-integral is split into geometric panels refining toward `λ = 0`,
//! where `e^(-λt)` concentrates for large `t`. For `a < 1` the endpoint
//! singularity `λ^(a-1)` is removed by `λ = s^(1/a)`, which turns the
//! integral into `(1/a) ∫₀¹ e^(-λ(s)t) φ_λ(s)(r) ds`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use super::profile::{CoefficientProfile, ProfileKind};
use super::radial::{solve_mode, ModeKind, RadialTable};
use crate::error::{Error, Result};
use crate::exponents::Dimension;
use crate::quadrature::{geometric_breaks, GaussLegendre};

/// Smallest panel is `2^-PANEL_LEVELS`.
pub const PANEL_LEVELS: u32 = 40;

/// Default Gauss points per panel.
pub const DEFAULT_QUAD_NODES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    lambda: u64,
    n: u32,
    dr: u64,
    r_max: u64,
}

/// `φ_λ` tables shared by every quadrature node with the same λ.
///
/// Readers proceed concurrently; inserts take the write lock.
#[derive(Debug, Default)]
pub struct PhiLambdaCache {
    tables: RwLock<HashMap<CacheKey, Arc<RadialTable>>>,
}

impl PhiLambdaCache {
    pub fn len(&self) -> usize {
        self.tables.read().map(|t| t.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Evaluator for `b_a` built on one damping profile.
#[derive(Debug)]
pub struct BFunction {
    damping: CoefficientProfile,
    n: Dimension,
    r_max: f64,
    dr: f64,
    cache: PhiLambdaCache,
}

/// Quadrature of one `b_a` evaluation: nodes `λ_i` and weights already
/// including `λ^(a-1)` (or the `1/a` Jacobian).
#[derive(Debug, Clone)]
struct LambdaRule {
    lambdas: Vec<f64>,
    weights: Vec<f64>,
}

fn lambda_rule(a: f64, quad_nodes: usize) -> LambdaRule {
    let gl = GaussLegendre::new(quad_nodes);
    let breaks = geometric_breaks(PANEL_LEVELS);
    let mut lambdas = Vec::new();
    let mut weights = Vec::new();
    for w in breaks.windows(2) {
        for (x, wx) in gl.on(w[0], w[1]) {
            if a < 1.0 {
                lambdas.push(x.powf(1.0 / a));
                weights.push(wx / a);
            } else {
                lambdas.push(x);
                weights.push(wx * x.powf(a - 1.0));
            }
        }
    }
    LambdaRule { lambdas, weights }
}

fn check_args(a: f64, quad_nodes: usize) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameter {
            name: "a",
            value: a,
            reason: "must be positive",
        });
    }
    if quad_nodes < 4 {
        return Err(Error::InvalidQuadrature(format!(
            "{quad_nodes} nodes per panel; at least 4 are required"
        )));
    }
    Ok(())
}

impl BFunction {
    /// `r_max` bounds the radii at which `b_a` can be evaluated.
    pub fn new(damping: CoefficientProfile, n: Dimension, r_max: f64, dr: f64) -> Result<Self> {
        damping.require_kind(ProfileKind::Damping)?;
        if !(dr > 0.0) || !(r_max > 0.0) {
            return Err(Error::InvalidGrid(format!("r_max = {r_max}, dr = {dr}")));
        }
        Ok(Self {
            damping,
            n,
            r_max,
            dr,
            cache: PhiLambdaCache::default(),
        })
    }

    pub fn damping(&self) -> &CoefficientProfile {
        &self.damping
    }

    pub fn dimension(&self) -> Dimension {
        self.n
    }

    pub fn cache(&self) -> &PhiLambdaCache {
        &self.cache
    }

    /// `φ_λ` table, solved once per λ.
    pub fn table(&self, lambda: f64) -> Result<Arc<RadialTable>> {
        let key = CacheKey {
            lambda: lambda.to_bits(),
            n: self.n.get(),
            dr: self.dr.to_bits(),
            r_max: self.r_max.to_bits(),
        };
        if let Some(t) = self.cache.tables.read().expect("cache poisoned").get(&key) {
            return Ok(Arc::clone(t));
        }
        let table = Arc::new(solve_mode(
            ModeKind::PhiLambda,
            &self.damping,
            None,
            lambda,
            self.n,
            self.r_max,
            self.dr,
        )?);
        let mut w = self.cache.tables.write().expect("cache poisoned");
        Ok(Arc::clone(w.entry(key).or_insert(table)))
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if !(r >= 0.0) || r > self.r_max {
            return Err(Error::InvalidParameter {
                name: "r",
                value: r,
                reason: "outside the tabulated range [0, r_max]",
            });
        }
        Ok(())
    }

    /// `b_a(t, r)`.
    pub fn eval(&self, a: f64, t: f64, r: f64, quad_nodes: usize) -> Result<f64> {
        Ok(self.eval_with_radial_derivative(a, t, r, quad_nodes)?.0)
    }

    /// `(b_a(t, r), ∂_r b_a(t, r))`.
    pub fn eval_with_radial_derivative(
        &self,
        a: f64,
        t: f64,
        r: f64,
        quad_nodes: usize,
    ) -> Result<(f64, f64)> {
        check_args(a, quad_nodes)?;
        self.check_radius(r)?;
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "t",
                value: t,
                reason: "must be non-negative",
            });
        }
        let rule = lambda_rule(a, quad_nodes);
        let mut value = 0.0;
        let mut deriv = 0.0;
        for (lambda, w) in rule.lambdas.iter().zip(&rule.weights) {
            let decay = (-lambda * t).exp();
            if decay == 0.0 || *w == 0.0 {
                continue;
            }
            let (phi, dphi) = self.table(*lambda)?.interpolate(r);
            value += w * decay * phi;
            deriv += w * decay * dphi;
        }
        Ok((value, deriv))
    }

    /// `b_a` sampled on `radii` at every time in `times`; rows follow `times`.
    pub fn sample(
        &self,
        a: f64,
        times: &[f64],
        radii: &[f64],
        quad_nodes: usize,
    ) -> Result<BSamples> {
        check_args(a, quad_nodes)?;
        for r in radii {
            self.check_radius(*r)?;
        }
        let rule = lambda_rule(a, quad_nodes);
        let mut profiles = Vec::with_capacity(rule.lambdas.len());
        for lambda in &rule.lambdas {
            let table = self.table(*lambda)?;
            let (vals, ders): (Vec<f64>, Vec<f64>) =
                radii.iter().map(|r| table.interpolate(*r)).unzip();
            profiles.push((vals, ders));
        }
        let mut value = vec![vec![0.0; radii.len()]; times.len()];
        let mut deriv = vec![vec![0.0; radii.len()]; times.len()];
        for (i, t) in times.iter().enumerate() {
            for (k, lambda) in rule.lambdas.iter().enumerate() {
                let c = rule.weights[k] * (-lambda * t).exp();
                if c == 0.0 {
                    continue;
                }
                let (vals, ders) = &profiles[k];
                for j in 0..radii.len() {
                    value[i][j] += c * vals[j];
                    deriv[i][j] += c * ders[j];
                }
            }
        }
        Ok(BSamples { value, deriv })
    }
}

/// `b_a` and `∂_r b_a` on a time × radius grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BSamples {
    pub value: Vec<Vec<f64>>,
    pub deriv: Vec<Vec<f64>>,
}

/// Empirical constants of the `b_a` bounds on the cone `r ≤ t + R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBoundReport {
    pub a: f64,
    /// `min b_a (t+R)^a`
    pub lower_constant: f64,
    /// `max b_a / envelope` with envelope `(t+R)^(-a)` for `a < (n-1)/2`
    /// and `(t+R)^(-(n-1)/2) (t+R+1-r)^((n-1)/2-a)` for `a > (n-1)/2`.
    pub upper_constant: f64,
    pub holds: bool,
}

/// Checks both `b_a` bounds on `t_grid × {r_k = k/(samples-1) · (t+R)}`.
pub fn b_bounds(
    b: &BFunction,
    a: f64,
    data_radius: f64,
    t_grid: &[f64],
    radial_samples: usize,
    quad_nodes: usize,
) -> Result<BBoundReport> {
    let h = b.n.half_excess();
    if (a - h).abs() < 1e-12 {
        return Err(Error::InvalidParameter {
            name: "a",
            value: a,
            reason: "the upper bound is not stated at a = (n-1)/2",
        });
    }
    let samples = radial_samples.max(2);
    let mut lower = f64::INFINITY;
    let mut upper = 0.0f64;
    for &t in t_grid {
        let reach = t + data_radius;
        for k in 0..samples {
            let r = reach * k as f64 / (samples - 1) as f64;
            let value = b.eval(a, t, r, quad_nodes)?;
            lower = lower.min(value * reach.powf(a));
            let envelope = if a < h {
                reach.powf(-a)
            } else {
                reach.powf(-h) * (reach + 1.0 - r).powf(h - a)
            };
            upper = upper.max(value / envelope);
        }
    }
    Ok(BBoundReport {
        a,
        lower_constant: lower,
        upper_constant: upper,
        holds: lower > 0.0 && upper.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b_free(r_max: f64) -> BFunction {
        BFunction::new(
            CoefficientProfile::no_damping(),
            Dimension::new(3).unwrap(),
            r_max,
            0.01,
        )
        .unwrap()
    }

    #[test]
    fn closed_form_at_origin() {
        let b = b_free(1.0);
        let got = b.eval(1.0, 2.0, 0.0, 8).unwrap();
        let expect = (1.0 - (-2.0f64).exp()) / 2.0;
        assert!((got - expect).abs() < 1e-12 * expect, "{got} vs {expect}");
    }

    #[test]
    fn argument_errors() {
        let b = b_free(1.0);
        assert!(matches!(
            b.eval(0.0, 1.0, 0.0, 8),
            Err(Error::InvalidParameter { name: "a", .. })
        ));
        assert!(matches!(
            b.eval(1.0, 1.0, 0.0, 3),
            Err(Error::InvalidQuadrature(_))
        ));
        assert!(b.eval(1.0, 1.0, 5.0, 8).is_err());
    }

    #[test]
    fn node_doubling_agrees() {
        let d = CoefficientProfile::damping(1.0, 2.0).unwrap();
        let b = BFunction::new(d, Dimension::new(3).unwrap(), 6.0, 0.02).unwrap();
        for &(a, t, r) in &[(0.5, 3.0, 2.0), (1.5, 5.0, 5.0), (2.7, 1.0, 0.5)] {
            let coarse = b.eval(a, t, r, 8).unwrap();
            let fine = b.eval(a, t, r, 16).unwrap();
            assert!(((coarse - fine) / fine).abs() < 1e-6, "a={a} t={t} r={r}");
        }
    }

    #[test]
    fn ladder_and_decay() {
        let d = CoefficientProfile::damping(2.0, 1.5).unwrap();
        let b = BFunction::new(d, Dimension::new(3).unwrap(), 4.0, 0.02).unwrap();
        let mut previous = f64::INFINITY;
        for k in 0..8 {
            let t = k as f64 * 0.5;
            let v = b.eval(1.2, t, 3.0, 8).unwrap();
            assert!(v < previous);
            previous = v;
            assert!(b.eval(2.2, t, 3.0, 8).unwrap() <= v);
        }
    }

    #[test]
    fn cache_reuses_tables() {
        let b = b_free(2.0);
        b.eval(1.5, 1.0, 1.0, 4).unwrap();
        let after_first = b.cache().len();
        b.eval(1.5, 2.0, 0.5, 4).unwrap();
        assert_eq!(b.cache().len(), after_first);
    }

    #[test]
    fn sampled_grid_matches_pointwise() {
        let d = CoefficientProfile::damping(1.0, 2.0).unwrap();
        let b = BFunction::new(d, Dimension::new(3).unwrap(), 3.0, 0.02).unwrap();
        let s = b.sample(0.7, &[0.0, 1.5], &[0.0, 1.0, 2.5], 6).unwrap();
        let (v, dv) = b.eval_with_radial_derivative(0.7, 1.5, 2.5, 6).unwrap();
        assert!((s.value[1][2] - v).abs() < 1e-13 * v);
        assert!((s.deriv[1][2] - dv).abs() < 1e-12 * dv.abs().max(1.0));
    }
}
