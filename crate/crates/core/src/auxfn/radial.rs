//! Radial solutions of `φ'' + (n-1)/r φ' = W(r) φ` with `φ(0) = 1`, `φ'(0) = 0`.
//!
//! The three auxiliary problems only differ in the weight `W`:
//!
//! * `φ₀`: `W = V`
//! * `φ_λ`: `W = λ² + λD`
//! * `ψ`:  `W = 1 + D + V`

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::profile::{CoefficientProfile, ProfileKind};
use crate::error::{Error, Result};
use crate::exponents::Dimension;

/// Which auxiliary problem a table solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TableMeta {
    Phi0,
    PhiLambda {
        lambda: f64,
    },
    /// `λ₀ = 1` and `d_∞ = 0`.
    Psi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    PhiLambda,
    Psi,
}

/// Samples `values[j] = φ(j·dr)`, `derivs[j] = φ'(j·dr)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialTable {
    pub dr: f64,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    pub n: Dimension,
    pub meta: TableMeta,
}

/// Right-hand side weight of the radial ODE.
/// Residuals are measured from this radius outward.
pub const RESIDUAL_R_MIN: f64 = 1.0;

pub(crate) type Weight<'a> = dyn Fn(f64) -> f64 + Sync + 'a;

fn check_grid(r_max: f64, dr: f64) -> Result<usize> {
    if !(dr > 0.0) || !(r_max > 0.0) || !dr.is_finite() || !r_max.is_finite() {
        return Err(Error::InvalidGrid(format!(
            "r_max = {r_max} and dr = {dr} must be positive"
        )));
    }
    Ok((r_max / dr).ceil() as usize)
}

/// Classical RK4 on `(φ, φ')`; the `(n-1)/r` term uses its axis limit at `r = 0`.
pub(crate) fn integrate(
    n: Dimension,
    weight: &Weight<'_>,
    steps: usize,
    dr: f64,
) -> (Vec<f64>, Vec<f64>) {
    let nm1 = n.as_f64() - 1.0;
    let rhs = |r: f64, y: f64, dy: f64| -> f64 {
        if r == 0.0 {
            // n φ''(0) = W(0) φ(0)
            weight(0.0) * y / n.as_f64()
        } else {
            weight(r) * y - nm1 / r * dy
        }
    };
    let mut values = Vec::with_capacity(steps + 1);
    let mut derivs = Vec::with_capacity(steps + 1);
    let (mut y, mut dy) = (1.0, 0.0);
    values.push(y);
    derivs.push(dy);
    for j in 0..steps {
        let r = j as f64 * dr;
        let h = dr;
        let k1y = dy;
        let k1d = rhs(r, y, dy);
        let k2y = dy + 0.5 * h * k1d;
        let k2d = rhs(r + 0.5 * h, y + 0.5 * h * k1y, k2y);
        let k3y = dy + 0.5 * h * k2d;
        let k3d = rhs(r + 0.5 * h, y + 0.5 * h * k2y, k3y);
        let k4y = dy + h * k3d;
        let k4d = rhs(r + h, y + h * k3y, k4y);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        dy += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        values.push(y);
        derivs.push(dy);
    }
    (values, derivs)
}

/// Solves `Δφ₀ = V φ₀`.
pub fn solve_phi0(
    v: &CoefficientProfile,
    n: Dimension,
    r_max: f64,
    dr: f64,
) -> Result<RadialTable> {
    v.require_kind(ProfileKind::Potential)?;
    let steps = check_grid(r_max, dr)?;
    let (values, derivs) = if v.is_zero() {
        (vec![1.0; steps + 1], vec![0.0; steps + 1])
    } else {
        integrate(n, &|r| v.eval(r), steps, dr)
    };
    Ok(RadialTable {
        dr,
        values,
        derivs,
        n,
        meta: TableMeta::Phi0,
    })
}

/// Solves `Δφ = (λ² + λD + V)φ`.
///
/// `PhiLambda` ignores `v` and accepts `0 < λ ≤ 1`; `Psi` fixes `λ = 1`.
pub fn solve_mode(
    kind: ModeKind,
    d: &CoefficientProfile,
    v: Option<&CoefficientProfile>,
    lambda: f64,
    n: Dimension,
    r_max: f64,
    dr: f64,
) -> Result<RadialTable> {
    d.require_kind(ProfileKind::Damping)?;
    if let Some(v) = v {
        v.require_kind(ProfileKind::Potential)?;
    }
    let steps = check_grid(r_max, dr)?;
    let (lambda, meta, v) = match kind {
        ModeKind::PhiLambda => {
            if !(lambda > 0.0 && lambda <= 1.0) {
                return Err(Error::InvalidParameter {
                    name: "lambda",
                    value: lambda,
                    reason: "must lie in (0, 1]",
                });
            }
            (lambda, TableMeta::PhiLambda { lambda }, None)
        }
        ModeKind::Psi => (1.0, TableMeta::Psi, v),
    };
    let weight = |r: f64| lambda * lambda + lambda * d.eval(r) + v.map_or(0.0, |v| v.eval(r));
    let (values, derivs) = integrate(n, &weight, steps, dr);
    Ok(RadialTable {
        dr,
        values,
        derivs,
        n,
        meta,
    })
}

/// `⟨r⟩ = sqrt(1 + r²)`
pub fn japanese(r: f64) -> f64 {
    (1.0 + r * r).sqrt()
}

/// Empirical constants of the two-sided bound
/// `c₁⟨λr⟩^(-(n-1)/2) < φ_λ < c₁⁻¹⟨λr⟩^(-(n-1)/2) e^(λr)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSidedBound {
    /// `min φ / ⟨λr⟩^(-(n-1)/2)`
    pub lower_min: f64,
    /// `max φ / (⟨λr⟩^(-(n-1)/2) e^(λr))`
    pub upper_max: f64,
    /// Largest `c₁ < 1` for which both strict inequalities hold on the grid.
    pub c1: f64,
    /// Relative change of the upper ratio over the last tenth of the grid.
    pub upper_tail_variation: f64,
    pub holds: bool,
}

/// Samples of `φ(r) / ⟨r⟩^(-(n-1)/2) e^r`, the `ψ` asymptotic ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRatio {
    pub tail_value: f64,
    /// Relative spread of the ratio over the last tenth of the grid.
    pub tail_variation: f64,
}

impl RadialTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn r(&self, j: usize) -> f64 {
        j as f64 * self.dr
    }

    pub fn r_max(&self) -> f64 {
        self.r(self.len() - 1)
    }

    /// Cubic Hermite interpolation `(φ(r), φ'(r))`; clamps beyond the last node.
    pub fn interpolate(&self, r: f64) -> (f64, f64) {
        let last = self.len() - 1;
        let x = (r / self.dr).max(0.0);
        let j = (x.floor() as usize).min(last.saturating_sub(1));
        if last == 0 || x >= last as f64 {
            return (self.values[last], self.derivs[last]);
        }
        let s = x - j as f64;
        let h = self.dr;
        let (y0, y1) = (self.values[j], self.values[j + 1]);
        let (d0, d1) = (self.derivs[j] * h, self.derivs[j + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1;
        let deriv = ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * d0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * d1)
            / h;
        (value, deriv)
    }

    /// `max_j |Δ_h φ_j - W(r_j) φ_j|` over interior nodes with `r_j ≥ RESIDUAL_R_MIN`,
    /// with the centered radial Laplacian `δ²φ/dr² + (n-1)/r δφ/(2dr)`.
    ///
    /// Profiles like `(1+r)^-β` have odd Taylor terms at the axis, so the
    /// centered stencil is only first order in the first few cells.
    pub fn residual(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let h = self.dr;
        let nm1 = self.n.as_f64() - 1.0;
        (self.first_residual_node()..self.len() - 1)
            .map(|j| {
                let r = self.r(j);
                let (a, b, c) = (self.values[j - 1], self.values[j], self.values[j + 1]);
                let lap = (c - 2.0 * b + a) / (h * h) + nm1 / r * (c - a) / (2.0 * h);
                (lap - weight(r) * b).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Same as [`RadialTable::residual`], divided by `φ_j` (for growing modes).
    pub fn relative_residual(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let h = self.dr;
        let nm1 = self.n.as_f64() - 1.0;
        (self.first_residual_node()..self.len() - 1)
            .map(|j| {
                let r = self.r(j);
                let (a, b, c) = (self.values[j - 1], self.values[j], self.values[j + 1]);
                let lap = (c - 2.0 * b + a) / (h * h) + nm1 / r * (c - a) / (2.0 * h);
                ((lap - weight(r) * b) / b).abs()
            })
            .fold(0.0, f64::max)
    }

    pub(crate) fn first_residual_node(&self) -> usize {
        ((RESIDUAL_R_MIN / self.dr).ceil() as usize).max(1)
    }

    pub fn all_positive(&self) -> bool {
        self.values.iter().all(|v| *v > 0.0)
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }

    /// Two-sided bound report for a `φ_λ` table.
    pub fn two_sided_bound(&self) -> TwoSidedBound {
        let lambda = match self.meta {
            TableMeta::PhiLambda { lambda } => lambda,
            _ => 1.0,
        };
        let h = self.n.half_excess();
        let mut lower_min = f64::INFINITY;
        let mut upper_max = 0.0f64;
        let mut upper: Vec<f64> = Vec::with_capacity(self.len());
        for (j, v) in self.values.iter().enumerate() {
            let lr = lambda * self.r(j);
            let base = japanese(lr).powf(-h);
            lower_min = lower_min.min(v / base);
            // e^(-λr) keeps the ratio finite for large r
            let u = v * (-lr).exp() / base;
            upper_max = upper_max.max(u);
            upper.push(u);
        }
        let c1 = 0.5 * lower_min.min(1.0 / upper_max);
        let holds = lower_min > 0.0 && upper_max.is_finite() && c1 > 0.0 && c1 < 1.0;
        TwoSidedBound {
            lower_min,
            upper_max,
            c1,
            upper_tail_variation: tail_variation(&upper),
            holds,
        }
    }

    /// Ratio `φ(r) / (⟨r⟩^(-(n-1)/2) e^r)` near the end of the table.
    pub fn psi_ratio(&self) -> AsymptoticRatio {
        let h = self.n.half_excess();
        let ratio: Vec<f64> = (0..self.len())
            .map(|j| {
                let r = self.r(j);
                self.values[j] * (-r).exp() / japanese(r).powf(-h)
            })
            .collect();
        AsymptoticRatio {
            tail_value: *ratio.last().unwrap(),
            tail_variation: tail_variation(&ratio),
        }
    }

    /// Ratio `φ₀(r) / ln(r + 2)`, the two-dimensional growth profile.
    pub fn log_ratio(&self) -> AsymptoticRatio {
        let ratio: Vec<f64> = (0..self.len())
            .map(|j| self.values[j] / (self.r(j) + 2.0).ln())
            .collect();
        AsymptoticRatio {
            tail_value: *ratio.last().unwrap(),
            tail_variation: tail_variation(&ratio),
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["r", "value", "deriv"])?;
        for j in 0..self.len() {
            w.write_record([
                format!("{}", self.r(j)),
                format!("{}", self.values[j]),
                format!("{}", self.derivs[j]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Reads a `r,value,deriv` table; the grid step is recovered from the first two rows.
    pub fn read_csv<R: Read>(reader: R, n: Dimension, meta: TableMeta) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["r", "value", "deriv"] {
            return Err(Error::Io(format!(
                "unexpected radial table header {headers:?}"
            )));
        }
        let mut radii = Vec::new();
        let mut values = Vec::new();
        let mut derivs = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let parse = |i: usize| -> Result<f64> {
                row[i]
                    .parse::<f64>()
                    .map_err(|e| Error::Io(format!("bad number `{}`: {e}", &row[i])))
            };
            radii.push(parse(0)?);
            values.push(parse(1)?);
            derivs.push(parse(2)?);
        }
        if radii.len() < 2 {
            return Err(Error::Io("radial table needs at least two rows".into()));
        }
        let dr = radii[1] - radii[0];
        Ok(Self {
            dr,
            values,
            derivs,
            n,
            meta,
        })
    }
}

/// `(max - min) / |last|` over the final tenth of `xs`.
fn tail_variation(xs: &[f64]) -> f64 {
    let start = xs.len() - (xs.len() / 10).max(2).min(xs.len());
    let tail = &xs[start..];
    let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / tail.last().unwrap().abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n3() -> Dimension {
        Dimension::new(3).unwrap()
    }

    #[test]
    fn phi0_trivial_potential() {
        let t = solve_phi0(&CoefficientProfile::no_potential(), n3(), 10.0, 0.1).unwrap();
        assert!(t.values.iter().all(|v| *v == 1.0));
        assert!(t.derivs.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn phi0_rejects_damping_and_bad_grid() {
        let d = CoefficientProfile::damping(1.0, 2.0).unwrap();
        assert!(matches!(
            solve_phi0(&d, n3(), 10.0, 0.1),
            Err(Error::InvalidProfile(_))
        ));
        let v = CoefficientProfile::potential(1.0, 3.0).unwrap();
        assert!(matches!(
            solve_phi0(&v, n3(), 10.0, 0.0),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            solve_phi0(&v, n3(), -1.0, 0.1),
            Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn phi0_residual_is_second_order() {
        let v = CoefficientProfile::potential(1.0, 3.0).unwrap();
        let w = |r: f64| v.eval(r);
        let coarse = solve_phi0(&v, n3(), 20.0, 0.1).unwrap().residual(w);
        let fine = solve_phi0(&v, n3(), 20.0, 0.05).unwrap().residual(w);
        assert!(coarse < 0.01 * 0.1 * 0.1 * 100.0);
        let ratio = coarse / fine;
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn lambda_range() {
        let d = CoefficientProfile::no_damping();
        for bad in [0.0, -0.5, 1.5] {
            assert!(matches!(
                solve_mode(ModeKind::PhiLambda, &d, None, bad, n3(), 5.0, 0.1),
                Err(Error::InvalidParameter { name: "lambda", .. })
            ));
        }
    }

    #[test]
    fn psi_equals_phi1_without_coefficients() {
        let d = CoefficientProfile::no_damping();
        let v = CoefficientProfile::no_potential();
        let a = solve_mode(ModeKind::PhiLambda, &d, None, 1.0, n3(), 10.0, 0.05).unwrap();
        let b = solve_mode(ModeKind::Psi, &d, Some(&v), 0.3, n3(), 10.0, 0.05).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.derivs, b.derivs);
    }

    #[test]
    fn hermite_interpolation_is_accurate() {
        let d = CoefficientProfile::no_damping();
        let t = solve_mode(ModeKind::PhiLambda, &d, None, 1.0, n3(), 10.0, 0.01).unwrap();
        for &r in &[0.005, 1.2345, 7.777] {
            let (v, dv) = t.interpolate(r);
            let exact = r.sinh() / r;
            let exact_d = (r * r.cosh() - r.sinh()) / (r * r);
            assert!(((v - exact) / exact).abs() < 1e-8, "r={r}");
            assert!((dv - exact_d).abs() < 1e-5 * exact.max(1.0), "r={r}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let d = CoefficientProfile::damping(1.0, 2.0).unwrap();
        let t = solve_mode(ModeKind::PhiLambda, &d, None, 0.5, n3(), 2.0, 0.25).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = RadialTable::read_csv(buf.as_slice(), n3(), t.meta).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn log_ratio_in_two_dimensions() {
        let n2 = Dimension::new(2).unwrap();
        let v = CoefficientProfile::potential(1.0, 3.0).unwrap();
        let t = solve_phi0(&v, n2, 400.0, 0.05).unwrap();
        let ratio = t.log_ratio();
        assert!(ratio.tail_value > 0.0 && ratio.tail_value.is_finite());
        assert!(ratio.tail_variation < 0.05, "{ratio:?}");
    }
}
