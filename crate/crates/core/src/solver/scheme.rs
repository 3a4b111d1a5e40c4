//! Explicit centered scheme for the radial system.
//!
//! The radial Laplacian uses the conservative (finite-volume) form
//!
//! ```text
//! Δu_j ≈ [a_{j+1/2}(u_{j+1} - u_j) - a_{j-1/2}(u_j - u_{j-1})] / w_j
//! ```
//!
//! with face weights `a_f = r_f^(n-1) / dr` and cell measures
//! `w_j = (r_{j+1/2}^n - r_{j-1/2}^n) / n`, which reduces to `2n(u_1 - u_0)/dr^2`
//! at the axis. Damping enters through the centered average
//! `(u^(k+1) - u^(k-1)) / (2 dt)`, so each node update is a scalar linear solve.

use serde::{Deserialize, Serialize};

use super::system::{
    Component, Field, GridSpec, InitialData, Source, SourceDerivative, SystemSpec,
};
use crate::auxfn::CoefficientProfile;
use crate::error::{Error, Result};

/// Default blow-up threshold.
pub const DEFAULT_THRESHOLD: f64 = 1e6;

/// Fields below this magnitude count as zero for the support diagnostic.
pub const SUPPORT_FLOOR: f64 = 1e-12;

/// Factor between the primary threshold and the secondary (sharpness) threshold.
pub const SECONDARY_THRESHOLD_RATIO: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub threshold: f64,
    /// Store every `snapshot_stride`-th level; 0 keeps only the first and last.
    pub snapshot_stride: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            snapshot_stride: 0,
        }
    }
}

/// Fields at one time level. Velocities are centered where both neighbours exist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub ut: Vec<f64>,
    pub vt: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    Threshold,
    Nonfinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupRecord {
    pub detected: bool,
    pub t_blow: Option<f64>,
    pub trigger: Option<Trigger>,
    pub threshold: f64,
    /// First time the field maximum reached `threshold · 1e-3`.
    pub t_secondary: Option<f64>,
}

/// Staggered discrete energy between levels `k` and `k + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySample {
    pub t: f64,
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub energy: Vec<EnergySample>,
    /// `(t, largest r with |u| + |v| > SUPPORT_FLOOR)` per snapshot.
    pub support: Vec<(f64, f64)>,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub grid: GridSpec,
    pub snapshots: Vec<Snapshot>,
    pub blowup: BlowupRecord,
    pub diagnostics: Diagnostics,
}

impl RunResult {
    pub fn radii(&self) -> Vec<f64> {
        (0..=self.grid.outer_index())
            .map(|j| j as f64 * self.grid.dr)
            .collect()
    }

    pub fn final_time(&self) -> f64 {
        self.snapshots.last().map_or(0.0, |s| s.t)
    }

    /// Snapshot whose time is closest to `t`.
    pub fn snapshot_near(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }
}

/// Precomputed radial operator on `nodes` nodes (last node is the Dirichlet boundary).
#[derive(Debug, Clone)]
pub(crate) struct RadialOperator {
    /// `a_{j+1/2}` for faces between node j and j+1.
    pub face: Vec<f64>,
    /// Cell measure `w_j`.
    pub weight: Vec<f64>,
}

impl RadialOperator {
    pub fn new(n: u32, dr: f64, nodes: usize) -> Self {
        let nf = n as f64;
        let face = (0..nodes - 1)
            .map(|j| ((j as f64 + 0.5) * dr).powi(n as i32 - 1) / dr)
            .collect();
        let weight = (0..nodes)
            .map(|j| {
                let hi = (j as f64 + 0.5) * dr;
                let lo = if j == 0 { 0.0 } else { (j as f64 - 0.5) * dr };
                (hi.powi(n as i32) - lo.powi(n as i32)) / nf
            })
            .collect();
        Self { face, weight }
    }

    #[inline]
    pub fn laplacian(&self, u: &[f64], j: usize) -> f64 {
        let right = self.face[j] * (u[j + 1] - u[j]);
        let left = if j == 0 {
            0.0
        } else {
            self.face[j - 1] * (u[j] - u[j - 1])
        };
        (right - left) / self.weight[j]
    }

    /// `Σ_f a_f (a_{j+1} - a_j)(b_{j+1} - b_j)`
    pub fn stiffness(&self, a: &[f64], b: &[f64]) -> f64 {
        self.face
            .iter()
            .enumerate()
            .map(|(j, f)| f * (a[j + 1] - a[j]) * (b[j + 1] - b[j]))
            .sum()
    }
}

fn sample(profile: Option<&CoefficientProfile>, dr: f64, nodes: usize) -> Vec<f64> {
    match profile {
        Some(p) if !p.is_zero() => (0..nodes).map(|j| p.eval(j as f64 * dr)).collect(),
        _ => vec![0.0; nodes],
    }
}

/// Per-equation coefficients sampled on the grid.
struct Coefficients {
    damping: Vec<f64>,
    potential: Vec<f64>,
}

struct State {
    old: Vec<f64>,
    cur: Vec<f64>,
    new: Vec<f64>,
}

impl State {
    fn zeros(nodes: usize) -> Self {
        Self {
            old: vec![0.0; nodes],
            cur: vec![0.0; nodes],
            new: vec![0.0; nodes],
        }
    }

    fn rotate(&mut self) {
        std::mem::swap(&mut self.old, &mut self.cur);
        std::mem::swap(&mut self.cur, &mut self.new);
    }
}

fn energy(op: &RadialOperator, coef: &Coefficients, next: &[f64], cur: &[f64], dt: f64) -> f64 {
    let mut kinetic = 0.0;
    let mut potential = 0.0;
    for j in 0..op.weight.len() {
        let d = (next[j] - cur[j]) / dt;
        kinetic += op.weight[j] * d * d;
        potential += op.weight[j] * coef.potential[j] * next[j] * cur[j];
    }
    0.5 * (kinetic + op.stiffness(next, cur) + potential)
}

fn support_radius(u: &[f64], v: &[f64], dr: f64) -> f64 {
    u.iter()
        .zip(v)
        .rposition(|(a, b)| a.abs() + b.abs() > SUPPORT_FLOOR)
        .map_or(0.0, |j| j as f64 * dr)
}

fn field_max(u: &[f64], v: &[f64]) -> f64 {
    let mut m = 0.0f64;
    for x in u.iter().chain(v) {
        if !x.is_finite() {
            return f64::INFINITY;
        }
        m = m.max(x.abs());
    }
    m
}

/// Time at which `ln(max)` crosses `ln(level)` between two steps.
fn crossing_time(t0: f64, dt: f64, m0: f64, m1: f64, level: f64) -> f64 {
    if !m1.is_finite() || m0 <= 0.0 || m1 <= m0 {
        return t0 + dt;
    }
    let frac = (level.ln() - m0.ln()) / (m1.ln() - m0.ln());
    t0 + dt * frac.clamp(0.0, 1.0)
}

/// Source values `|w|^p` or `|w_t|^p` at level k.
fn fill_source(
    out: &mut [f64],
    src: Source,
    u: &State,
    v: &State,
    dt: f64,
    derivative: DerivativeStencil,
    active: usize,
) {
    let w = match src.field {
        Field::U => u,
        Field::V => v,
    };
    let p = src.power;
    if !src.time_derivative {
        for j in 0..active {
            out[j] = w.cur[j].abs().powf(p);
        }
        return;
    }
    match derivative {
        DerivativeStencil::Backward => {
            for j in 0..active {
                out[j] = ((w.cur[j] - w.old[j]) / dt).abs().powf(p);
            }
        }
        DerivativeStencil::Centered => {
            for j in 0..active {
                out[j] = ((w.new[j] - w.old[j]) / (2.0 * dt)).abs().powf(p);
            }
        }
    }
}

#[derive(Clone, Copy)]
enum DerivativeStencil {
    Backward,
    Centered,
}

/// One leapfrog update of `w` into `w.new` on nodes `0..active`.
fn update(
    op: &RadialOperator,
    coef: &Coefficients,
    w: &mut State,
    source: &[f64],
    dt: f64,
    active: usize,
) {
    let dt2 = dt * dt;
    for j in 0..active {
        let c = 0.5 * dt * coef.damping[j];
        let rhs = 2.0 * w.cur[j] - (1.0 - c) * w.old[j]
            + dt2 * (op.laplacian(&w.cur, j) - coef.potential[j] * w.cur[j] + source[j]);
        w.new[j] = rhs / (1.0 + c);
    }
}

/// First step from the Taylor expansion `w(dt) ≈ w0 + dt w1 + dt²/2 w_tt(0)`.
fn first_step(
    op: &RadialOperator,
    coef: &Coefficients,
    w0: &[f64],
    w1: &[f64],
    source: &[f64],
    dt: f64,
    out: &mut [f64],
) {
    for j in 0..out.len() - 1 {
        let acc =
            op.laplacian(w0, j) - coef.damping[j] * w1[j] - coef.potential[j] * w0[j] + source[j];
        out[j] = w0[j] + dt * w1[j] + 0.5 * dt * dt * acc;
    }
    *out.last_mut().unwrap() = 0.0;
}

fn initial_source(src: Source, u0: &[f64], u1: &[f64], v0: &[f64], v1: &[f64]) -> Vec<f64> {
    let w = match (src.field, src.time_derivative) {
        (Field::U, false) => u0,
        (Field::U, true) => u1,
        (Field::V, false) => v0,
        (Field::V, true) => v1,
    };
    w.iter().map(|x| x.abs().powf(src.power)).collect()
}

pub fn evolve(
    spec: &SystemSpec,
    data: &InitialData,
    grid: &GridSpec,
    options: &EvolveOptions,
) -> Result<RunResult> {
    spec.validate()?;
    grid.validate(spec.data_radius)?;
    if data.radius > spec.data_radius * (1.0 + 1e-12) {
        return Err(Error::Configuration(format!(
            "data radius {} exceeds the system support radius {}",
            data.radius, spec.data_radius
        )));
    }

    let dr = grid.dr;
    let dt = grid.dt;
    let nodes = grid.outer_index() + 1;
    let op = RadialOperator::new(spec.n.get(), dr, nodes);
    let coef_u = Coefficients {
        damping: sample(Some(&spec.damping1), dr, nodes),
        potential: sample(spec.potential1.as_ref(), dr, nodes),
    };
    let coef_v = Coefficients {
        damping: sample(Some(&spec.damping2), dr, nodes),
        potential: sample(spec.potential2.as_ref(), dr, nodes),
    };

    let eps = spec.epsilon;
    let init = |c: Component| -> Vec<f64> {
        let mut w: Vec<f64> = (0..nodes)
            .map(|j| eps * data.eval(c, j as f64 * dr))
            .collect();
        w[nodes - 1] = 0.0;
        w
    };
    let (u0, u1, v0, v1) = (
        init(Component::U0),
        init(Component::U1),
        init(Component::V0),
        init(Component::V1),
    );

    let threshold = options.threshold;
    let initial_max = field_max(&u0, &v0);
    if !(threshold > initial_max) {
        return Err(Error::Configuration(format!(
            "threshold {threshold} must exceed the initial field maximum {initial_max}"
        )));
    }
    let secondary = threshold * SECONDARY_THRESHOLD_RATIO;

    let (src_u, src_v) = spec.sources();
    let zero = vec![0.0; nodes];
    let (mut nl_u, mut nl_v) = if spec.linear {
        (zero.clone(), zero.clone())
    } else {
        (
            initial_source(src_u, &u0, &u1, &v0, &v1),
            initial_source(src_v, &u0, &u1, &v0, &v1),
        )
    };

    let mut u = State::zeros(nodes);
    let mut v = State::zeros(nodes);
    u.cur.copy_from_slice(&u0);
    v.cur.copy_from_slice(&v0);
    first_step(&op, &coef_u, &u0, &u1, &nl_u, dt, &mut u.new);
    first_step(&op, &coef_v, &v0, &v1, &nl_v, dt, &mut v.new);

    let steps = grid.steps();
    let stride = options.snapshot_stride;
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        u: u0.clone(),
        v: v0.clone(),
        ut: u1.clone(),
        vt: v1.clone(),
    }];
    let mut support = vec![(0.0, support_radius(&u0, &v0, dr))];
    let mut energy_trace = Vec::new();

    let mut blowup = BlowupRecord {
        detected: false,
        t_blow: None,
        trigger: None,
        threshold,
        t_secondary: if initial_max >= secondary {
            Some(0.0)
        } else {
            None
        },
    };
    let mut prev_max = initial_max;
    // Nodes that can be nonzero: the stencil widens the support by one node per step.
    let data_nodes = ((data.radius / dr).ceil() as usize + 2).min(nodes - 1);
    let mut completed = 0;
    let mut active = data_nodes;

    // Level k = 0 is stored; the loop produces level k + 1 from k and k - 1.
    for k in 0..steps {
        if k > 0 {
            active = (data_nodes + k + 1).min(nodes - 1);
            if !spec.linear {
                fill_source(
                    &mut nl_u,
                    src_u,
                    &u,
                    &v,
                    dt,
                    DerivativeStencil::Backward,
                    active,
                );
                fill_source(
                    &mut nl_v,
                    src_v,
                    &u,
                    &v,
                    dt,
                    DerivativeStencil::Backward,
                    active,
                );
            }
            update(&op, &coef_u, &mut u, &nl_u, dt, active);
            update(&op, &coef_v, &mut v, &nl_v, dt, active);
            let needs_correction = !spec.linear
                && spec.source_derivative == SourceDerivative::PredictorCorrector
                && (src_u.time_derivative || src_v.time_derivative);
            if needs_correction {
                fill_source(
                    &mut nl_u,
                    src_u,
                    &u,
                    &v,
                    dt,
                    DerivativeStencil::Centered,
                    active,
                );
                fill_source(
                    &mut nl_v,
                    src_v,
                    &u,
                    &v,
                    dt,
                    DerivativeStencil::Centered,
                    active,
                );
                update(&op, &coef_u, &mut u, &nl_u, dt, active);
                update(&op, &coef_v, &mut v, &nl_v, dt, active);
            }
        }
        completed = k + 1;
        let t_cur = k as f64 * dt;
        let t_new = (k + 1) as f64 * dt;

        if stride > 0 {
            energy_trace.push(EnergySample {
                t: t_cur + 0.5 * dt,
                u: energy(&op, &coef_u, &u.new, &u.cur, dt),
                v: energy(&op, &coef_v, &v.new, &v.cur, dt),
            });
        }
        // Store level k once its centered velocity is available.
        if k > 0 && stride > 0 && k % stride == 0 {
            snapshots.push(centered_snapshot(t_cur, &u, &v, dt));
            support.push((t_cur, support_radius(&u.cur, &v.cur, dr)));
        }

        let m = field_max(&u.new[..=active], &v.new[..=active]);
        if blowup.t_secondary.is_none() && m >= secondary {
            blowup.t_secondary = Some(crossing_time(t_cur, dt, prev_max, m, secondary));
        }
        if !m.is_finite() {
            blowup.detected = true;
            blowup.trigger = Some(Trigger::Nonfinite);
            blowup.t_blow = Some(t_new);
            if blowup.t_secondary.is_none() {
                blowup.t_secondary = Some(t_new);
            }
            break;
        }
        if m >= threshold {
            blowup.detected = true;
            blowup.trigger = Some(Trigger::Threshold);
            blowup.t_blow = Some(crossing_time(t_cur, dt, prev_max, m, threshold));
            break;
        }
        prev_max = m;
        u.rotate();
        v.rotate();
    }

    // Final level: the last computed one, with backward velocities.
    let last = if blowup.detected {
        Snapshot {
            t: completed as f64 * dt,
            u: u.new.clone(),
            v: v.new.clone(),
            ut: backward(&u.new, &u.cur, dt),
            vt: backward(&v.new, &v.cur, dt),
        }
    } else {
        // after rotate(), `cur` holds the newest level
        Snapshot {
            t: completed as f64 * dt,
            u: u.cur.clone(),
            v: v.cur.clone(),
            ut: backward(&u.cur, &u.old, dt),
            vt: backward(&v.cur, &v.old, dt),
        }
    };
    if completed > 0 && snapshots.last().map_or(true, |s| s.t < last.t - 0.5 * dt) {
        support.push((last.t, support_radius(&last.u, &last.v, dr)));
        snapshots.push(last);
    }

    Ok(RunResult {
        grid: *grid,
        snapshots,
        blowup,
        diagnostics: Diagnostics {
            energy: energy_trace,
            support,
            steps: completed,
        },
    })
}

fn backward(new: &[f64], cur: &[f64], dt: f64) -> Vec<f64> {
    new.iter().zip(cur).map(|(a, b)| (a - b) / dt).collect()
}

fn centered_snapshot(t: f64, u: &State, v: &State, dt: f64) -> Snapshot {
    let c = |w: &State| -> Vec<f64> {
        w.new
            .iter()
            .zip(&w.old)
            .map(|(a, b)| (a - b) / (2.0 * dt))
            .collect()
    };
    Snapshot {
        t,
        u: u.cur.clone(),
        v: v.cur.clone(),
        ut: c(u),
        vt: c(v),
    }
}
