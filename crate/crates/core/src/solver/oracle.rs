//! Exact free-wave solution in three dimensions.
//!
//! With `w = r·u` the radial wave equation becomes `w_tt = w_rr` on the line,
//! with the odd extension through `r = 0`. For bump data the velocity
//! integral has the closed antiderivative `H(s) = -A R²/(2(m+1)) (1 - s²/R²)^(m+1)`.

use super::system::{Component, InitialData};
use crate::error::{Error, Result};

/// Fields `u(t, r)`, `v(t, r)` of the free system.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleField {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

/// Below this radius the `r → 0` limit is used instead of the quotient form.
const AXIS_RADIUS: f64 = 1e-6;

struct Profile<'a> {
    data: &'a InitialData,
    position: Component,
    velocity: Component,
}

impl Profile<'_> {
    /// Odd extension `s·u0(|s|)`.
    fn displacement(&self, s: f64) -> f64 {
        s * self.data.eval(self.position, s.abs())
    }

    /// Derivative of [`Profile::displacement`].
    fn displacement_deriv(&self, s: f64) -> f64 {
        let a = s.abs();
        self.data.eval(self.position, a) + a * self.data.eval_deriv(self.position, a)
    }

    /// Even antiderivative of `s·u1(|s|)`, vanishing outside the support.
    fn velocity_primitive(&self, s: f64) -> f64 {
        let d = self.data;
        let x = s / d.radius;
        if x.abs() >= 1.0 {
            return 0.0;
        }
        let m = d.order as i32;
        -d.weight(self.velocity) * d.amplitude * d.radius * d.radius / (2.0 * (m + 1) as f64)
            * (1.0 - x * x).powi(m + 1)
    }

    fn velocity_density(&self, s: f64) -> f64 {
        s * self.data.eval(self.velocity, s.abs())
    }

    fn eval(&self, t: f64, r: f64) -> f64 {
        if r < AXIS_RADIUS {
            return self.displacement_deriv(t) + self.velocity_density(t);
        }
        let wave = self.displacement(r + t) + self.displacement(r - t);
        let pushed = self.velocity_primitive(r + t) - self.velocity_primitive(r - t);
        (wave + pushed) / (2.0 * r)
    }
}

/// Free solution of both equations at time `t`, scaled by `epsilon`.
pub fn linear_oracle(
    n: u32,
    data: &InitialData,
    epsilon: f64,
    t: f64,
    radii: &[f64],
) -> Result<OracleField> {
    if n != 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    let u = Profile {
        data,
        position: Component::U0,
        velocity: Component::U1,
    };
    let v = Profile {
        data,
        position: Component::V0,
        velocity: Component::V1,
    };
    Ok(OracleField {
        u: radii.iter().map(|&r| epsilon * u.eval(t, r)).collect(),
        v: radii.iter().map(|&r| epsilon * v.eval(t, r)).collect(),
    })
}
