//! Smooth time cutoffs `η_M(t) = η(t/M)` and `θ_M(t)`, raised to a power.
//!
//! `η` is 1 on `[0, 1/2]`, 0 on `[1, ∞)` and moves between them through the
//! C^∞ transition `g(1-s) / (g(1-s) + g(s-1/2))` with `g(x) = e^(-1/x)`.
//! `θ` vanishes on `[0, 1/2)` and equals `η` afterwards.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffKind {
    Eta,
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub kind: CutoffKind,
    /// Scale `M > 1`.
    pub scale: f64,
    /// Exponent applied to the cutoff, typically `2p'`.
    pub power: f64,
    pub smoothness_order: u8,
}

/// `(g, g', g'')` for `g(x) = e^(-1/x)`, zero for `x ≤ 0`.
fn bump_primitive(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let g = (-1.0 / x).exp();
    let x2 = x * x;
    (g, g / x2, g * (1.0 / (x2 * x2) - 2.0 / (x2 * x)))
}

/// `(η, η', η'')` on the unit scale.
pub fn eta_unit(s: f64) -> (f64, f64, f64) {
    if s <= 0.5 {
        return (1.0, 0.0, 0.0);
    }
    if s >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    // a(s) = g(1 - s), b(s) = g(s - 1/2)
    let (ga, ga1, ga2) = bump_primitive(1.0 - s);
    let (a, a1, a2) = (ga, -ga1, ga2);
    let (b, b1, b2) = bump_primitive(s - 0.5);
    let den = a + b;
    let den1 = a1 + b1;
    let den2 = a2 + b2;
    let eta = a / den;
    let eta1 = (a1 * den - a * den1) / (den * den);
    // (a/den)'' = a''/den - 2a'den'/den² - a den''/den² + 2a den'²/den³
    let eta2 = a2 / den - 2.0 * a1 * den1 / (den * den) - a * den2 / (den * den)
        + 2.0 * a * den1 * den1 / (den * den * den);
    (eta, eta1, eta2)
}

/// `(θ, θ', θ'')` on the unit scale.
pub fn theta_unit(s: f64) -> (f64, f64, f64) {
    if s < 0.5 {
        (0.0, 0.0, 0.0)
    } else {
        eta_unit(s)
    }
}

impl CutoffSpec {
    pub fn new(kind: CutoffKind, scale: f64, power: f64) -> Result<Self> {
        let spec = Self {
            kind,
            scale,
            power,
            smoothness_order: 2,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Cutoff powered by `2p'`, `p' = p/(p-1)`.
    pub fn conjugate(kind: CutoffKind, scale: f64, p: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::InvalidExponent {
                name: "p",
                value: p,
            });
        }
        Self::new(kind, scale, 2.0 * p / (p - 1.0))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 1.0) || !self.scale.is_finite() {
            return Err(Error::InvalidParameter {
                name: "scale",
                value: self.scale,
                reason: "cutoff scale M must exceed 1",
            });
        }
        if !(self.power >= 1.0) || !self.power.is_finite() {
            return Err(Error::InvalidParameter {
                name: "power",
                value: self.power,
                reason: "must be at least 1",
            });
        }
        if self.smoothness_order < 2 {
            return Err(Error::InvalidParameter {
                name: "smoothness_order",
                value: self.smoothness_order as f64,
                reason: "must be at least 2",
            });
        }
        Ok(())
    }

    /// Highest t-derivative available for this power.
    ///
    /// `η^k` with `1 < k < 2` has an unbounded second derivative where `η → 0`.
    pub fn max_derivative(&self) -> u8 {
        let capable = if self.power >= 2.0 || self.power == 1.0 {
            2
        } else {
            1
        };
        capable.min(self.smoothness_order)
    }

    fn unit(&self, s: f64) -> (f64, f64, f64) {
        match self.kind {
            CutoffKind::Eta => eta_unit(s),
            CutoffKind::Theta => theta_unit(s),
        }
    }

    /// `d^order/dt^order (cutoff(t/M))^power`.
    pub fn eval(&self, t: f64, derivative_order: u8) -> Result<f64> {
        if derivative_order > self.max_derivative() {
            return Err(Error::UnsupportedOrder {
                requested: derivative_order,
                supported: self.max_derivative(),
            });
        }
        let (value, d1, d2) = self.eval_all(t);
        Ok(match derivative_order {
            0 => value,
            1 => d1,
            _ => d2,
        })
    }

    /// Value with first and second t-derivatives.
    pub fn eval_all(&self, t: f64) -> (f64, f64, f64) {
        let m = self.scale;
        let k = self.power;
        let (c, c1, c2) = self.unit(t / m);
        if c == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let value = c.powf(k);
        let d1 = k * c.powf(k - 1.0) * c1 / m;
        let d2 = if c1 == 0.0 && c2 == 0.0 {
            0.0
        } else {
            (k * (k - 1.0) * c.powf(k - 2.0) * c1 * c1 + k * c.powf(k - 1.0) * c2) / (m * m)
        };
        (value, d1, d2)
    }

    /// Last time at which the cutoff can be nonzero.
    pub fn support_end(&self) -> f64 {
        self.scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_tail() {
        let eta = CutoffSpec::new(CutoffKind::Eta, 10.0, 4.0).unwrap();
        assert_eq!(eta.eval(3.0, 0).unwrap(), 1.0);
        assert_eq!(eta.eval(3.0, 1).unwrap(), 0.0);
        assert_eq!(eta.eval(3.0, 2).unwrap(), 0.0);
        assert_eq!(eta.eval(12.0, 0).unwrap(), 0.0);
        let theta = CutoffSpec::new(CutoffKind::Theta, 10.0, 4.0).unwrap();
        assert_eq!(theta.eval(3.0, 0).unwrap(), 0.0);
        assert_eq!(theta.eval(7.5, 0).unwrap(), eta.eval(7.5, 0).unwrap());
    }

    #[test]
    fn derivatives_match_differences() {
        let eta = CutoffSpec::new(CutoffKind::Eta, 3.0, 4.5).unwrap();
        let h = 1e-5;
        for i in 1..40 {
            let t = 1.5 + 1.5 * i as f64 / 40.0;
            let (v, d1, d2) = eta.eval_all(t);
            let (vp, d1p, _) = eta.eval_all(t + h);
            let (vm, d1m, _) = eta.eval_all(t - h);
            assert!((d1 - (vp - vm) / (2.0 * h)).abs() < 1e-7, "t={t}");
            assert!((d2 - (d1p - d1m) / (2.0 * h)).abs() < 1e-6, "t={t}");
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn powered_eta_non_increasing() {
        let eta = CutoffSpec::new(CutoffKind::Eta, 8.0, 3.0).unwrap();
        let mut prev = 1.0;
        for i in 0..=400 {
            let t = 4.0 + 4.0 * i as f64 / 400.0;
            let v = eta.eval(t, 0).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn derivative_scaling_with_m() {
        // sup |∂_t| M and sup |∂_t²| M² do not depend on M
        let sup = |m: f64, order: u8| {
            let c = CutoffSpec::new(CutoffKind::Eta, m, 4.0).unwrap();
            (0..2000)
                .map(|i| {
                    c.eval(m * (0.5 + 0.5 * i as f64 / 2000.0), order)
                        .unwrap()
                        .abs()
                })
                .fold(0.0, f64::max)
        };
        for order in [1u8, 2] {
            let a = sup(10.0, order) * 10f64.powi(order as i32);
            let b = sup(1000.0, order) * 1000f64.powi(order as i32);
            assert!(((a - b) / a).abs() < 1e-9);
        }
    }

    #[test]
    fn unsupported_order() {
        let c = CutoffSpec::new(CutoffKind::Eta, 4.0, 1.5).unwrap();
        assert_eq!(c.max_derivative(), 1);
        assert_eq!(
            c.eval(3.0, 2),
            Err(Error::UnsupportedOrder {
                requested: 2,
                supported: 1
            })
        );
        let c = CutoffSpec::new(CutoffKind::Eta, 4.0, 3.0).unwrap();
        assert!(c.eval(3.0, 3).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(CutoffSpec::new(CutoffKind::Eta, 1.0, 4.0).is_err());
        assert!(CutoffSpec::new(CutoffKind::Eta, 5.0, 0.5).is_err());
        let c = CutoffSpec::conjugate(CutoffKind::Theta, 5.0, 2.0).unwrap();
        assert_eq!(c.power, 4.0);
    }
}
