//! Per-command parameter records. Every optional key has a default that is
//! written back out when a plan is serialized.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use wavelab::auxfn::{CoefficientProfile, DEFAULT_QUAD_NODES};
use wavelab::exponents::{
    lifespan_prediction, CouplingKind, Dimension, ExponentPair, LifespanPrediction,
    DEFAULT_TIE_TOLERANCE,
};
use wavelab::ode_lemma::LemmaParams;
use wavelab::solver::{
    make_initial_data, ComponentWeights, EvolveOptions, GridSpec, InitialData, SystemSpec,
    DEFAULT_CFL, DEFAULT_THRESHOLD,
};
use wavelab::sweep::{EpsilonLadder, FitMode, GridPolicy, SweepSpec};
use wavelab::{Error, Result};

fn tie_tolerance() -> f64 {
    DEFAULT_TIE_TOLERANCE
}
fn three() -> u32 {
    3
}
fn one() -> f64 {
    1.0
}
fn damping_decay() -> f64 {
    2.0
}
fn potential_decay() -> f64 {
    3.0
}
fn bump_order() -> u32 {
    4
}
fn cfl() -> f64 {
    DEFAULT_CFL
}
fn threshold() -> f64 {
    DEFAULT_THRESHOLD
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsConfig {
    pub kind: CouplingKind,
    pub n: u32,
    pub p: f64,
    pub q: f64,
    #[serde(default = "tie_tolerance")]
    pub tie_tolerance: f64,
}

impl ExponentsConfig {
    pub fn resolve(&self) -> Result<(Dimension, ExponentPair, LifespanPrediction)> {
        let n = Dimension::new(self.n)?;
        let pq = ExponentPair::new(self.p, self.q)?;
        let pred = lifespan_prediction(self.kind, n, pq, self.tie_tolerance)?;
        Ok((n, pq, pred))
    }
}

/// Coefficients shared by `aux`, `solve` and `sweep`. Zero amplitude means absent.
fn damping(amplitude: f64, decay: f64) -> Result<CoefficientProfile> {
    if amplitude == 0.0 {
        Ok(CoefficientProfile::no_damping())
    } else {
        CoefficientProfile::damping(amplitude, decay)
    }
}

fn potential(amplitude: f64, decay: f64) -> Result<Option<CoefficientProfile>> {
    if amplitude == 0.0 {
        Ok(None)
    } else {
        CoefficientProfile::potential(amplitude, decay).map(Some)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuxConfig {
    #[serde(default = "three")]
    pub n: u32,
    #[serde(default)]
    pub damping_amplitude: f64,
    #[serde(default = "damping_decay")]
    pub damping_decay: f64,
    #[serde(default)]
    pub potential_amplitude: f64,
    #[serde(default = "potential_decay")]
    pub potential_decay: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default = "AuxConfig::r_max")]
    pub r_max: f64,
    #[serde(default = "AuxConfig::dr")]
    pub dr: f64,
    /// Index `a` of `b_a`.
    #[serde(default = "AuxConfig::a")]
    pub a: f64,
    #[serde(default = "one")]
    pub data_radius: f64,
    #[serde(default = "one")]
    pub t_min: f64,
    #[serde(default = "AuxConfig::t_max")]
    pub t_max: f64,
    #[serde(default = "AuxConfig::t_points")]
    pub t_points: usize,
    #[serde(default = "AuxConfig::radial_samples")]
    pub radial_samples: usize,
    /// Radial step of the `φ_λ` tables behind `b_a`.
    #[serde(default = "AuxConfig::b_dr")]
    pub b_dr: f64,
    #[serde(default = "AuxConfig::quad_nodes")]
    pub quad_nodes: usize,
}

impl AuxConfig {
    fn r_max() -> f64 {
        20.0
    }
    fn dr() -> f64 {
        0.01
    }
    fn a() -> f64 {
        0.5
    }
    fn t_max() -> f64 {
        100.0
    }
    fn t_points() -> usize {
        12
    }
    fn radial_samples() -> usize {
        16
    }
    fn b_dr() -> f64 {
        0.05
    }
    fn quad_nodes() -> usize {
        DEFAULT_QUAD_NODES
    }

    pub fn dimension(&self) -> Result<Dimension> {
        Dimension::new(self.n)
    }

    pub fn damping(&self) -> Result<CoefficientProfile> {
        damping(self.damping_amplitude, self.damping_decay)
    }

    pub fn potential(&self) -> Result<CoefficientProfile> {
        Ok(potential(self.potential_amplitude, self.potential_decay)?
            .unwrap_or_else(CoefficientProfile::no_potential))
    }

    /// Geometric grid on `[t_min, t_max]`.
    pub fn t_grid(&self) -> Vec<f64> {
        let k = self.t_points.max(2) - 1;
        (0..=k)
            .map(|i| self.t_min * (self.t_max / self.t_min).powf(i as f64 / k as f64))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.dimension()?;
        self.damping()?;
        self.potential()?;
        for (name, v) in [
            ("r_max", self.r_max),
            ("dr", self.dr),
            ("b_dr", self.b_dr),
            ("data_radius", self.data_radius),
            ("t_min", self.t_min),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be positive",
                });
            }
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: self.lambda,
                reason: "must lie in (0, 1]",
            });
        }
        if !(self.a > 0.0) {
            return Err(Error::InvalidParameter {
                name: "a",
                value: self.a,
                reason: "must be positive",
            });
        }
        if !(self.t_max > self.t_min) {
            return Err(Error::InvalidParameter {
                name: "t_max",
                value: self.t_max,
                reason: "must exceed t_min",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub kind: CouplingKind,
    #[serde(default = "three")]
    pub n: u32,
    pub p: f64,
    pub q: f64,
    pub epsilon: f64,
    pub t_max: f64,
    #[serde(default)]
    pub damping_amplitude: f64,
    #[serde(default = "damping_decay")]
    pub damping_decay: f64,
    #[serde(default)]
    pub potential_amplitude: f64,
    #[serde(default = "potential_decay")]
    pub potential_decay: f64,
    #[serde(default = "one")]
    pub data_radius: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "bump_order")]
    pub bump_order: u32,
    #[serde(default)]
    pub weights: ComponentWeights,
    #[serde(default)]
    pub linear: bool,
    #[serde(default = "SolveConfig::dr")]
    pub dr: f64,
    #[serde(default = "cfl")]
    pub cfl: f64,
    #[serde(default = "threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub snapshot_stride: usize,
}

impl SolveConfig {
    fn dr() -> f64 {
        0.05
    }

    pub fn resolve(&self) -> Result<(SystemSpec, InitialData, GridSpec, EvolveOptions)> {
        let n = Dimension::new(self.n)?;
        let pq = ExponentPair::new(self.p, self.q)?;
        let mut spec = SystemSpec::free(self.kind, n, pq, self.epsilon).with_coefficients(
            damping(self.damping_amplitude, self.damping_decay)?,
            potential(self.potential_amplitude, self.potential_decay)?,
        );
        spec.data_radius = self.data_radius;
        spec.linear = self.linear;
        spec.validate()?;
        let data = make_initial_data(
            self.amplitude,
            self.data_radius,
            self.bump_order,
            self.weights,
        )?;
        let grid = GridSpec::covering(self.dr, self.cfl, self.t_max, self.data_radius);
        grid.validate(self.data_radius)?;
        let options = EvolveOptions {
            threshold: self.threshold,
            snapshot_stride: self.snapshot_stride,
        };
        if !(self.threshold > 0.0) {
            return Err(Error::Configuration("threshold must be positive".into()));
        }
        Ok((spec, data, grid, options))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: CouplingKind,
    #[serde(default = "three")]
    pub n: u32,
    pub p: f64,
    pub q: f64,
    #[serde(default)]
    pub damping_amplitude: f64,
    #[serde(default = "damping_decay")]
    pub damping_decay: f64,
    #[serde(default)]
    pub potential_amplitude: f64,
    #[serde(default = "potential_decay")]
    pub potential_decay: f64,
    #[serde(default = "one")]
    pub data_radius: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "bump_order")]
    pub bump_order: u32,
    #[serde(default = "SweepConfig::eps_min")]
    pub eps_min: f64,
    #[serde(default = "one")]
    pub eps_max: f64,
    #[serde(default = "SweepConfig::eps_count")]
    pub eps_count: usize,
    #[serde(default = "SweepConfig::dr")]
    pub dr: f64,
    #[serde(default = "cfl")]
    pub cfl: f64,
    #[serde(default = "SweepConfig::safety_factor")]
    pub safety_factor: f64,
    #[serde(default = "SweepConfig::initial_cap")]
    pub initial_cap: f64,
    #[serde(default = "threshold")]
    pub threshold: f64,
    #[serde(default = "yes")]
    pub refinement_guard: bool,
    #[serde(default = "SweepConfig::fit_mode")]
    pub fit_mode: FitMode,
}

impl SweepConfig {
    fn eps_min() -> f64 {
        0.4
    }
    fn eps_count() -> usize {
        8
    }
    fn dr() -> f64 {
        GridPolicy::default().dr
    }
    fn safety_factor() -> f64 {
        GridPolicy::default().safety_factor
    }
    fn initial_cap() -> f64 {
        GridPolicy::default().initial_cap
    }
    fn fit_mode() -> FitMode {
        FitMode::PowerLaw
    }

    /// Sweep spec with `width` workers; rejects non-power-law regimes.
    pub fn resolve(&self, width: usize) -> Result<SweepSpec> {
        let n = Dimension::new(self.n)?;
        let pq = ExponentPair::new(self.p, self.q)?;
        let mut base = SystemSpec::free(self.kind, n, pq, self.eps_max).with_coefficients(
            damping(self.damping_amplitude, self.damping_decay)?,
            potential(self.potential_amplitude, self.potential_decay)?,
        );
        base.data_radius = self.data_radius;
        let ladder = EpsilonLadder {
            min: self.eps_min,
            max: self.eps_max,
            count: self.eps_count,
        };
        let mut spec = SweepSpec::new(base, ladder)?;
        spec.data = make_initial_data(
            self.amplitude,
            self.data_radius,
            self.bump_order,
            ComponentWeights::ALL,
        )?;
        spec.grid = GridPolicy {
            dr: self.dr,
            cfl: self.cfl,
            safety_factor: self.safety_factor,
            initial_cap: self.initial_cap,
        };
        spec.threshold = self.threshold;
        spec.width = width.max(1);
        spec.refinement_guard = self.refinement_guard;
        spec.validate()?;
        let pred = spec.prediction()?;
        if !pred.is_power_law() {
            return Err(Error::UnsupportedRegime(pred.case_label));
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaConfig {
    pub p1: f64,
    pub p2: f64,
    #[serde(default = "one")]
    pub k1: f64,
    #[serde(default = "one")]
    pub k2: f64,
    #[serde(default = "LemmaConfig::t0")]
    pub t0: f64,
    #[serde(default)]
    pub phi0_init: f64,
    #[serde(default = "LemmaConfig::delta_min")]
    pub delta_min: f64,
    #[serde(default = "LemmaConfig::delta_max")]
    pub delta_max: f64,
    #[serde(default = "LemmaConfig::delta_count")]
    pub delta_count: usize,
    #[serde(default = "LemmaConfig::t_cap")]
    pub t_cap: f64,
    /// Cutoff power `2p'` of the `Y` check.
    #[serde(default = "LemmaConfig::y_power")]
    pub y_power: f64,
    /// Payload `ω = 1` on `[0, y_box_end] × B_1`.
    #[serde(default = "LemmaConfig::y_box_end")]
    pub y_box_end: f64,
    #[serde(default = "LemmaConfig::y_m_max")]
    pub y_m_max: f64,
    #[serde(default = "LemmaConfig::y_m_points")]
    pub y_m_points: usize,
    #[serde(default = "LemmaConfig::y_tolerance")]
    pub y_tolerance: f64,
}

impl LemmaConfig {
    fn t0() -> f64 {
        3.0
    }
    fn delta_min() -> f64 {
        0.05
    }
    fn delta_max() -> f64 {
        0.5
    }
    fn delta_count() -> usize {
        8
    }
    fn t_cap() -> f64 {
        1e300
    }
    fn y_power() -> f64 {
        4.0
    }
    fn y_box_end() -> f64 {
        50.0
    }
    fn y_m_max() -> f64 {
        100.0
    }
    fn y_m_points() -> usize {
        40
    }
    fn y_tolerance() -> f64 {
        1e-6
    }

    pub fn params(&self) -> Result<LemmaParams> {
        let p = LemmaParams {
            p1: self.p1,
            p2: self.p2,
            delta: self.delta_max,
            k1: self.k1,
            k2: self.k2,
            t0: self.t0,
            phi0_init: self.phi0_init,
        };
        p.validate()?;
        Ok(p)
    }

    /// Geometric δ ladder from `delta_min` to `delta_max`.
    pub fn deltas(&self) -> Vec<f64> {
        let k = self.delta_count.max(2) - 1;
        (0..=k)
            .map(|i| self.delta_min * (self.delta_max / self.delta_min).powf(i as f64 / k as f64))
            .collect()
    }

    /// Uniform grid on `(1, y_m_max]`.
    pub fn m_grid(&self) -> Vec<f64> {
        let k = self.y_m_points.max(1);
        (1..=k)
            .map(|i| 1.0 + (self.y_m_max - 1.0) * i as f64 / k as f64)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        if !(self.delta_min > 0.0 && self.delta_max > self.delta_min) {
            return Err(Error::InvalidParameter {
                name: "delta_min",
                value: self.delta_min,
                reason: "need 0 < delta_min < delta_max",
            });
        }
        if !(self.y_m_max > 1.0) {
            return Err(Error::InvalidParameter {
                name: "y_m_max",
                value: self.y_m_max,
                reason: "must exceed 1",
            });
        }
        if !(self.y_box_end > 0.0) {
            return Err(Error::InvalidParameter {
                name: "y_box_end",
                value: self.y_box_end,
                reason: "must be positive",
            });
        }
        if !(self.y_power >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "y_power",
                value: self.y_power,
                reason: "must be at least 1",
            });
        }
        Ok(())
    }
}

/// Post-processing of sweep artifacts written by `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    /// `sweep.json` to summarize.
    pub sweep: PathBuf,
    /// Optional second `sweep.json` (same ladder and exponents, other coefficients).
    #[serde(default)]
    pub compare: Option<PathBuf>,
}
