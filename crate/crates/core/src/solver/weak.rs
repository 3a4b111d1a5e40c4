//! Both sides of the weak identity tested against `Ψ(t, r) = c(t) g(t, r)`.
//!
//! For `w_tt - Δw + D w_t + V w = N` and Ψ vanishing at late times,
//!
//! ```text
//! ε∫w₁Ψ(0) + ε∫w₀DΨ(0) + ∬NΨ = -∬w_tΨ_t + ∬∇w·∇Ψ - ∬wDΨ_t + ∬VwΨ
//! ```
//!
//! Space integrals use the cell measures and face gradients of the solver's
//! radial operator; time integrals use the trapezoid rule over the stored
//! snapshots.

use serde::{Deserialize, Serialize};

use super::scheme::{RadialOperator, RunResult, Snapshot};
use super::system::{Component, Field, InitialData, Source, SystemSpec};
use crate::auxfn::{BFunction, CoefficientProfile, CutoffSpec, RadialTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeakEquation {
    /// The `u` equation.
    First,
    /// The `v` equation.
    Second,
}

/// Spatial factor of the test function.
#[derive(Debug, Clone, Copy)]
pub enum SpatialFactor<'a> {
    Constant,
    /// Time-independent `φ₀(r)`.
    Phi0(&'a RadialTable),
    /// `e^(-t) φ₁(r)`.
    Travelling(&'a RadialTable),
    /// `b_a(t, r)`.
    B {
        b: &'a BFunction,
        a: f64,
        quad_nodes: usize,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct TestFunction<'a> {
    pub cutoff: CutoffSpec,
    pub spatial: SpatialFactor<'a>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakResidual {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs|`
    pub residual: f64,
    /// `ε∫w₁Ψ(0) + ε∫w₀DΨ(0)`
    pub data_term: f64,
    pub source_term: f64,
}

/// `|S^(n-1)| = 2π^(n/2) / Γ(n/2)`.
pub fn sphere_area(n: u32) -> f64 {
    let half = n as f64 / 2.0;
    // Γ(n/2) by recurrence from Γ(1) or Γ(1/2)
    let mut gamma = if n % 2 == 0 {
        1.0
    } else {
        std::f64::consts::PI.sqrt()
    };
    let mut x = if n % 2 == 0 { 1.0 } else { 0.5 };
    while x < half - 1e-9 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * std::f64::consts::PI.powf(half) / gamma
}

/// `g` and `g_t` on all nodes at one time.
struct Sampled {
    g: Vec<f64>,
    gt: Vec<f64>,
}

struct Sampler<'a> {
    spatial: SpatialFactor<'a>,
    radii: Vec<f64>,
    /// Per-time rows for `b_a` and `b_{a+1}`.
    b_rows: Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)>,
}

impl<'a> Sampler<'a> {
    fn new(spatial: SpatialFactor<'a>, radii: Vec<f64>, times: &[f64]) -> Result<Self> {
        let b_rows = match spatial {
            SpatialFactor::B { b, a, quad_nodes } => {
                let base = b.sample(a, times, &radii, quad_nodes)?;
                let next = b.sample(a + 1.0, times, &radii, quad_nodes)?;
                Some((base.value, next.value))
            }
            _ => None,
        };
        Ok(Self {
            spatial,
            radii,
            b_rows,
        })
    }

    fn table_values(table: &RadialTable, radii: &[f64]) -> Result<Vec<f64>> {
        if table.r_max() + 1e-9 < *radii.last().unwrap_or(&0.0) {
            return Err(Error::Support(format!(
                "test-function table reaches r = {} but the run needs r = {}",
                table.r_max(),
                radii.last().copied().unwrap_or(0.0)
            )));
        }
        Ok(radii.iter().map(|r| table.interpolate(*r).0).collect())
    }

    fn at(&self, index: usize, t: f64) -> Result<Sampled> {
        let len = self.radii.len();
        Ok(match self.spatial {
            SpatialFactor::Constant => Sampled {
                g: vec![1.0; len],
                gt: vec![0.0; len],
            },
            SpatialFactor::Phi0(table) => Sampled {
                g: Self::table_values(table, &self.radii)?,
                gt: vec![0.0; len],
            },
            SpatialFactor::Travelling(table) => {
                let decay = (-t).exp();
                let g: Vec<f64> = Self::table_values(table, &self.radii)?
                    .into_iter()
                    .map(|x| decay * x)
                    .collect();
                let gt = g.iter().map(|x| -x).collect();
                Sampled { g, gt }
            }
            SpatialFactor::B { .. } => {
                let (base, next) = self.b_rows.as_ref().expect("sampled at construction");
                Sampled {
                    g: base[index].clone(),
                    gt: next[index].iter().map(|x| -x).collect(),
                }
            }
        })
    }
}

fn source_density(source: &Source, snap: &Snapshot, out: &mut [f64]) {
    let field = match (source.field, source.time_derivative) {
        (Field::U, false) => &snap.u,
        (Field::U, true) => &snap.ut,
        (Field::V, false) => &snap.v,
        (Field::V, true) => &snap.vt,
    };
    for (o, x) in out.iter_mut().zip(field) {
        *o = x.abs().powf(source.power);
    }
}

fn sample(profile: Option<&CoefficientProfile>, radii: &[f64]) -> Vec<f64> {
    match profile {
        Some(p) if !p.is_zero() => radii.iter().map(|r| p.eval(*r)).collect(),
        _ => vec![0.0; radii.len()],
    }
}

/// Evaluates both sides of the chosen weak identity on a stored run.
///
/// Snapshots should be dense in time (stride 1 for convergence studies).
pub fn weak_form_residual(
    run: &RunResult,
    spec: &SystemSpec,
    data: &InitialData,
    test: &TestFunction<'_>,
    equation: WeakEquation,
) -> Result<WeakResidual> {
    test.cutoff.validate()?;
    let horizon = test.cutoff.support_end();
    if run.final_time() < horizon {
        return Err(Error::Support(format!(
            "test function is supported up to t = {horizon} but the run stops at t = {}",
            run.final_time()
        )));
    }
    if run.blowup.detected {
        return Err(Error::Support(
            "weak identity requires a run without blow-up on the test support".into(),
        ));
    }
    let used: Vec<&Snapshot> = run
        .snapshots
        .iter()
        .take_while(|s| s.t <= horizon + 1e-12)
        .collect();
    let mut times: Vec<f64> = used.iter().map(|s| s.t).collect();
    // the cutoff vanishes from `horizon` on; close the last interval there
    let close = times.last().is_some_and(|t| *t < horizon);
    if close {
        times.push(horizon);
    }

    let dr = run.grid.dr;
    let radii = run.radii();
    let nodes = radii.len();
    let op = RadialOperator::new(spec.n.get(), dr, nodes);
    let area = sphere_area(spec.n.get());
    let (source, damping, potential, pos, vel) = match equation {
        WeakEquation::First => (
            spec.sources().0,
            &spec.damping1,
            spec.potential1.as_ref(),
            Component::U0,
            Component::U1,
        ),
        WeakEquation::Second => (
            spec.sources().1,
            &spec.damping2,
            spec.potential2.as_ref(),
            Component::V0,
            Component::V1,
        ),
    };
    let d = sample(Some(damping), &radii);
    let v = sample(potential, &radii);
    let sampler = Sampler::new(test.spatial, radii.clone(), &times)?;

    // Ψ(0) terms
    let (c0, _, _) = test.cutoff.eval_all(0.0);
    let g0 = sampler.at(0, 0.0)?;
    let eps = spec.epsilon;
    let mut data_term = 0.0;
    for j in 0..nodes {
        let w0 = data.eval(pos, radii[j]);
        let w1 = data.eval(vel, radii[j]);
        data_term += op.weight[j] * (w1 + w0 * d[j]) * c0 * g0.g[j];
    }
    data_term *= eps * area;

    let mut source_term = 0.0;
    let mut rhs = 0.0;
    let mut density = vec![0.0; nodes];
    let mut psi = vec![0.0; nodes];
    for (k, snap) in used.iter().enumerate() {
        let tau = trapezoid_weight(&times, k);
        if tau == 0.0 {
            continue;
        }
        let (c, c1, _) = test.cutoff.eval_all(snap.t);
        if c == 0.0 && c1 == 0.0 {
            continue;
        }
        let (field, field_t) = match equation {
            WeakEquation::First => (&snap.u, &snap.ut),
            WeakEquation::Second => (&snap.v, &snap.vt),
        };
        let g = sampler.at(k, snap.t)?;
        let mut slice_src = 0.0;
        let mut slice_rhs = 0.0;
        if !spec.linear {
            source_density(&source, snap, &mut density);
        }
        for j in 0..nodes {
            let p = c * g.g[j];
            let pt = c1 * g.g[j] + c * g.gt[j];
            psi[j] = p;
            let w = op.weight[j];
            if !spec.linear {
                slice_src += w * density[j] * p;
            }
            slice_rhs += w * (-field_t[j] * pt - field[j] * d[j] * pt + v[j] * field[j] * p);
        }
        slice_rhs += op.stiffness(field, &psi);
        source_term += tau * slice_src;
        rhs += tau * slice_rhs;
    }
    source_term *= area;
    rhs *= area;
    let lhs = data_term + source_term;
    Ok(WeakResidual {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        data_term,
        source_term,
    })
}

fn trapezoid_weight(times: &[f64], k: usize) -> f64 {
    let left = if k > 0 { times[k] - times[k - 1] } else { 0.0 };
    let right = if k + 1 < times.len() {
        times[k + 1] - times[k]
    } else {
        0.0
    };
    0.5 * (left + right)
}
