//! ε-ladders of solver runs and scaling fits of the measured lifespans.

mod compare;
mod fit;
mod output;

pub use compare::{
    damping_effect_report, upper_bound_check, upper_bound_check_points, DampingEffectReport,
    UpperBoundVerdict, COMPENSATED_RATIO_LIMIT, DAMPING_SLOPE_LIMIT,
};
pub use fit::{fit_scaling, linear_fit, FitMode, FitResult, MIN_FIT_POINTS, UPPER_BOUND_SLACK};
pub use output::{write_aggregate_csv, write_svg_plot};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{lifespan_prediction, LifespanPrediction, DEFAULT_TIE_TOLERANCE};
use crate::solver::{
    evolve, make_initial_data, ComponentWeights, EvolveOptions, GridSpec, InitialData, RunManifest,
    SystemSpec, DEFAULT_THRESHOLD,
};

/// Relative shift of the smallest-ε lifespan at `dr/2` that flags a sweep unresolved.
pub const REFINEMENT_SHIFT_LIMIT: f64 = 0.05;

/// Geometric sequence from `max` down to `min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonLadder {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl EpsilonLadder {
    pub fn validate(&self) -> Result<()> {
        if !(self.min > 0.0) || !(self.max >= self.min) || !self.max.is_finite() {
            return Err(Error::Configuration(format!(
                "epsilon ladder needs 0 < min <= max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.count < 5 {
            return Err(Error::Configuration(format!(
                "epsilon ladder needs at least 5 points, got {}",
                self.count
            )));
        }
        Ok(())
    }

    /// Values in decreasing order, endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        let last = self.count - 1;
        (0..self.count)
            .map(|i| match i {
                0 => self.max,
                i if i == last => self.min,
                i => self.max * (self.min / self.max).powf(i as f64 / last as f64),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPolicy {
    pub dr: f64,
    pub cfl: f64,
    /// `t_max = safety_factor · C · ε^(-k)`.
    pub safety_factor: f64,
    /// `t_max` of the bootstrap run at the largest ε.
    pub initial_cap: f64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self {
            dr: 0.05,
            cfl: 0.5,
            safety_factor: 4.0,
            initial_cap: 400.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Its ε is replaced by the ladder values.
    pub base: SystemSpec,
    pub data: InitialData,
    pub ladder: EpsilonLadder,
    pub grid: GridPolicy,
    pub threshold: f64,
    /// Worker threads. Not serialized, so artifacts do not depend on it.
    #[serde(skip, default = "one")]
    pub width: usize,
    /// Rerun the smallest uncensored ε at `dr/2`.
    pub refinement_guard: bool,
}

fn one() -> usize {
    1
}

impl SweepSpec {
    /// Unit bump data on `B_R` in every component, default grid policy.
    pub fn new(base: SystemSpec, ladder: EpsilonLadder) -> Result<Self> {
        let data = make_initial_data(1.0, base.data_radius, 4, ComponentWeights::ALL)?;
        Ok(Self {
            base,
            data,
            ladder,
            grid: GridPolicy::default(),
            threshold: DEFAULT_THRESHOLD,
            width: 1,
            refinement_guard: true,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.ladder.validate()?;
        let g = &self.grid;
        if !(g.safety_factor >= 2.0) {
            return Err(Error::Configuration(format!(
                "safety factor {} must be at least 2",
                g.safety_factor
            )));
        }
        self.validate_runtime()
    }

    /// Checks that do not involve the safety-factor floor.
    fn validate_runtime(&self) -> Result<()> {
        let g = &self.grid;
        for (name, v) in [("dr", g.dr), ("cfl", g.cfl), ("initial_cap", g.initial_cap)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Configuration(format!(
                    "{name} = {v} must be positive"
                )));
            }
        }
        if !(self.threshold > 0.0) {
            return Err(Error::Configuration("threshold must be positive".into()));
        }
        if self.width == 0 {
            return Err(Error::Configuration("width must be at least 1".into()));
        }
        Ok(())
    }

    pub fn prediction(&self) -> Result<LifespanPrediction> {
        lifespan_prediction(
            self.base.kind,
            self.base.n,
            self.base.pq,
            DEFAULT_TIE_TOLERANCE,
        )
    }
}

/// One rung of the ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRecord {
    pub epsilon: f64,
    pub t_max: f64,
    pub t_blow: Option<f64>,
    pub t_secondary: Option<f64>,
    pub censored: bool,
    pub manifest: RunManifest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementCheck {
    pub epsilon: f64,
    pub t_blow_coarse: f64,
    /// `None` when the refined run did not blow up before its `t_max`.
    pub t_blow_fine: Option<f64>,
    pub relative_shift: f64,
    pub unresolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub prediction: LifespanPrediction,
    /// `T ≈ constant · ε^(-k)` from the bootstrap run.
    pub bootstrap_constant: f64,
    /// In ladder order (decreasing ε).
    pub records: Vec<EpsilonRecord>,
    pub refinement: Option<RefinementCheck>,
}

impl SweepResult {
    /// `(ε, t_blow)` of the uncensored records.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .filter_map(|r| r.t_blow.map(|t| (r.epsilon, t)))
            .collect()
    }

    pub fn censored_count(&self) -> usize {
        self.records.iter().filter(|r| r.censored).count()
    }

    pub fn fit(&self, mode: FitMode) -> Result<FitResult> {
        fit_scaling(&self.points(), mode)
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.epsilon).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn run_one(spec: &SweepSpec, epsilon: f64, t_max: f64, dr: f64) -> Result<EpsilonRecord> {
    let system = spec.base.clone().with_epsilon(epsilon);
    let grid = GridSpec::covering(dr, spec.grid.cfl, t_max, spec.base.data_radius);
    let options = EvolveOptions {
        threshold: spec.threshold,
        snapshot_stride: 0,
    };
    let run = evolve(&system, &spec.data, &grid, &options)?;
    let manifest = RunManifest::new(&system, &spec.data, &options, &run)?;
    Ok(EpsilonRecord {
        epsilon,
        t_max,
        t_blow: run.blowup.t_blow,
        t_secondary: run.blowup.t_secondary,
        censored: !run.blowup.detected,
        manifest,
    })
}

/// Runs the whole ladder.
///
/// The largest ε runs first with `initial_cap`; its lifespan fixes the
/// constant of the `t_max` rule for the remaining rungs, which run on a
/// pool of `width` threads.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.base.validate()?;
    spec.ladder.validate()?;
    spec.validate_runtime()?;
    let prediction = spec.prediction()?;
    let k = prediction.power_exponent().ok_or_else(|| {
        Error::UnsupportedRegime(format!(
            "sweeps need a power-law lifespan prediction; got {}",
            prediction.case_label
        ))
    })?;
    if !(spec.grid.safety_factor >= 2.0) {
        warn!(
            "safety factor {} below 2: censoring is likely",
            spec.grid.safety_factor
        );
    }

    let eps = spec.ladder.values();
    let dr = spec.grid.dr;
    let first = run_one(spec, eps[0], spec.grid.initial_cap, dr)?;
    let t0 = first.t_blow.ok_or_else(|| {
        Error::SweepFailed(format!(
            "bootstrap run at epsilon = {} did not blow up before t = {}",
            eps[0], spec.grid.initial_cap
        ))
    })?;
    let constant = t0 * eps[0].powf(k);
    let t_max_of = |e: f64| spec.grid.safety_factor * constant * e.powf(-k);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.width)
        .build()
        .map_err(|e| Error::Configuration(format!("thread pool: {e}")))?;
    let rest: Vec<Result<EpsilonRecord>> = pool.install(|| {
        eps[1..]
            .par_iter()
            .map(|&e| run_one(spec, e, t_max_of(e), dr))
            .collect()
    });
    let mut records = vec![first];
    for r in rest {
        records.push(r?);
    }

    let censored = records.iter().filter(|r| r.censored).count();
    for r in records.iter().filter(|r| r.censored) {
        warn!(
            "epsilon = {} censored at t_max = {}; excluded from fits",
            r.epsilon, r.t_max
        );
    }
    if 2 * censored > records.len() {
        return Err(Error::SweepFailed(format!(
            "{censored} of {} runs censored",
            records.len()
        )));
    }

    let refinement = if spec.refinement_guard {
        let target = records
            .iter()
            .rev()
            .find(|r| !r.censored)
            .expect("at least half the ladder is uncensored");
        let coarse = target.t_blow.expect("uncensored");
        let fine = run_one(spec, target.epsilon, target.t_max, 0.5 * dr)?;
        let shift = match fine.t_blow {
            Some(t) => (t - coarse).abs() / coarse,
            None => f64::INFINITY,
        };
        if shift > REFINEMENT_SHIFT_LIMIT {
            warn!(
                "lifespan at epsilon = {} moves by {:.1}% at dr/2; sweep unresolved",
                target.epsilon,
                100.0 * shift
            );
        }
        Some(RefinementCheck {
            epsilon: target.epsilon,
            t_blow_coarse: coarse,
            t_blow_fine: fine.t_blow,
            relative_shift: shift,
            unresolved: shift > REFINEMENT_SHIFT_LIMIT,
        })
    } else {
        None
    };

    Ok(SweepResult {
        spec: spec.clone(),
        prediction,
        bootstrap_constant: constant,
        records,
        refinement,
    })
}
