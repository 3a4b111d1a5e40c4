use serde::{Deserialize, Serialize};

use crate::auxfn::{CoefficientProfile, ProfileKind};
use crate::error::{Error, Result};
use crate::exponents::{CouplingKind, Dimension, ExponentPair};

/// Largest admissible `dt / dr`.
pub const MAX_CFL: f64 = 0.5;

/// Default `dt / dr`.
pub const DEFAULT_CFL: f64 = 0.5;

/// Evaluation of `u_t`, `v_t` inside derivative sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceDerivative {
    /// `(u^k - u^(k-1)) / dt`
    #[default]
    Backward,
    /// Backward predictor, then a second pass with `(u^(k+1) - u^(k-1)) / (2 dt)`.
    PredictorCorrector,
}

/// The unknown feeding a source term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    U,
    V,
}

/// One nonlinear source `|w|^power` or `|w_t|^power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source {
    pub field: Field,
    pub time_derivative: bool,
    pub power: f64,
}

/// Coupled radial system `w_tt - Δw + D w_t + V w = N` for `w = u, v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub kind: CouplingKind,
    pub n: Dimension,
    pub pq: ExponentPair,
    pub damping1: CoefficientProfile,
    pub damping2: CoefficientProfile,
    pub potential1: Option<CoefficientProfile>,
    pub potential2: Option<CoefficientProfile>,
    pub epsilon: f64,
    pub data_radius: f64,
    /// Drops both sources (free damped waves); used for verification runs.
    #[serde(default)]
    pub linear: bool,
    #[serde(default)]
    pub source_derivative: SourceDerivative,
}

impl SystemSpec {
    /// Undamped system without potentials.
    pub fn free(kind: CouplingKind, n: Dimension, pq: ExponentPair, epsilon: f64) -> Self {
        Self {
            kind,
            n,
            pq,
            damping1: CoefficientProfile::no_damping(),
            damping2: CoefficientProfile::no_damping(),
            potential1: None,
            potential2: None,
            epsilon,
            data_radius: 1.0,
            linear: false,
            source_derivative: SourceDerivative::Backward,
        }
    }

    /// Same damping on both equations; the potential goes on every equation allowed to carry one.
    pub fn with_coefficients(
        mut self,
        damping: CoefficientProfile,
        potential: Option<CoefficientProfile>,
    ) -> Self {
        self.damping1 = damping.clone();
        self.damping2 = damping;
        self.potential1 = match self.kind {
            CouplingKind::SG => None,
            _ => potential.clone(),
        };
        self.potential2 = potential;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.get() < 3 {
            return Err(Error::UnsupportedDimension(self.n.get()));
        }
        ExponentPair::new(self.pq.p(), self.pq.q())?;
        self.damping1.require_kind(ProfileKind::Damping)?;
        self.damping2.require_kind(ProfileKind::Damping)?;
        if let Some(v) = &self.potential1 {
            v.require_kind(ProfileKind::Potential)?;
        }
        if let Some(v) = &self.potential2 {
            v.require_kind(ProfileKind::Potential)?;
        }
        if self.kind == CouplingKind::SG && self.potential1.as_ref().is_some_and(|v| !v.is_zero()) {
            return Err(Error::Configuration(
                "SG coupling requires the first equation to carry no potential".into(),
            ));
        }
        // epsilon = 0 is kept as a degenerate hook: the zero state is exact.
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: self.epsilon,
                reason: "must be finite and non-negative",
            });
        }
        if !(self.data_radius > 0.0) {
            return Err(Error::InvalidParameter {
                name: "data_radius",
                value: self.data_radius,
                reason: "must be positive",
            });
        }
        Ok(())
    }

    /// Sources of the u- and v-equations.
    pub fn sources(&self) -> (Source, Source) {
        let (p, q) = (self.pq.p(), self.pq.q());
        let src = |field, time_derivative, power| Source {
            field,
            time_derivative,
            power,
        };
        match self.kind {
            CouplingKind::SS => (src(Field::V, false, p), src(Field::U, false, q)),
            CouplingKind::GG => (src(Field::V, true, p), src(Field::U, true, q)),
            CouplingKind::SG => (src(Field::V, false, q), src(Field::U, true, p)),
        }
    }
}

/// Nonnegative multipliers of the four data components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentWeights {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl ComponentWeights {
    pub const ALL: Self = Self {
        u0: 1.0,
        u1: 1.0,
        v0: 1.0,
        v1: 1.0,
    };

    fn as_array(&self) -> [f64; 4] {
        [self.u0, self.u1, self.v0, self.v1]
    }
}

impl Default for ComponentWeights {
    fn default() -> Self {
        Self::ALL
    }
}

/// Data component selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    U0,
    U1,
    V0,
    V1,
}

/// Compactly supported polynomial bumps `A·(1 - (r/R)^2)^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub amplitude: f64,
    pub radius: f64,
    pub order: u32,
    pub weights: ComponentWeights,
}

pub fn make_initial_data(
    amplitude: f64,
    radius: f64,
    order: u32,
    weights: ComponentWeights,
) -> Result<InitialData> {
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        return Err(Error::InvalidParameter {
            name: "amplitude",
            value: amplitude,
            reason: "must be positive",
        });
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter {
            name: "radius",
            value: radius,
            reason: "must be positive",
        });
    }
    if order < 4 {
        return Err(Error::InvalidParameter {
            name: "order",
            value: order as f64,
            reason: "bump order must be at least 4",
        });
    }
    let w = weights.as_array();
    if w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::Configuration(
            "component weights must be finite and non-negative".into(),
        ));
    }
    if w.iter().all(|x| *x == 0.0) {
        return Err(Error::TrivialData);
    }
    Ok(InitialData {
        amplitude,
        radius,
        order,
        weights,
    })
}

impl InitialData {
    /// Unit-amplitude bump `(1 - (r/R)^2)^m`.
    pub fn bump(&self, r: f64) -> f64 {
        let s = r / self.radius;
        if s.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - s * s).powi(self.order as i32)
        }
    }

    /// Radial derivative of [`InitialData::bump`].
    pub fn bump_deriv(&self, r: f64) -> f64 {
        let s = r / self.radius;
        if s.abs() >= 1.0 {
            0.0
        } else {
            let m = self.order as i32;
            -2.0 * m as f64 * s / self.radius * (1.0 - s * s).powi(m - 1)
        }
    }

    pub fn weight(&self, c: Component) -> f64 {
        match c {
            Component::U0 => self.weights.u0,
            Component::U1 => self.weights.u1,
            Component::V0 => self.weights.v0,
            Component::V1 => self.weights.v1,
        }
    }

    /// Value of a component before the ε scaling.
    pub fn eval(&self, c: Component, r: f64) -> f64 {
        self.weight(c) * self.amplitude * self.bump(r)
    }

    pub fn eval_deriv(&self, c: Component, r: f64) -> f64 {
        self.weight(c) * self.amplitude * self.bump_deriv(r)
    }
}

/// Uniform space-time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dr: f64,
    pub dt: f64,
    pub r_max: f64,
    pub t_max: f64,
}

impl GridSpec {
    /// Grid whose radial extent just covers the cone `r <= t_max + R`.
    pub fn covering(dr: f64, cfl: f64, t_max: f64, data_radius: f64) -> Self {
        let nodes = ((t_max + data_radius) / dr).ceil() + 5.0;
        Self {
            dr,
            dt: cfl * dr,
            r_max: nodes * dr,
            t_max,
        }
    }

    pub fn cfl(&self) -> f64 {
        self.dt / self.dr
    }

    /// Index of the Dirichlet node at `r_max`.
    pub fn outer_index(&self) -> usize {
        (self.r_max / self.dr).round() as usize
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    pub fn validate(&self, data_radius: f64) -> Result<()> {
        for (name, v) in [("dr", self.dr), ("dt", self.dt), ("t_max", self.t_max)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Configuration(format!(
                    "grid {name} = {v} must be positive"
                )));
            }
        }
        if self.cfl() > MAX_CFL * (1.0 + 1e-12) {
            return Err(Error::Configuration(format!(
                "cfl = dt/dr = {} exceeds {MAX_CFL}",
                self.cfl()
            )));
        }
        let needed = self.t_max + data_radius + 4.0 * self.dr;
        if self.r_max < needed * (1.0 - 1e-12) {
            return Err(Error::Configuration(format!(
                "r_max = {} does not cover the propagation cone (needs {needed})",
                self.r_max
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_values() {
        let d = make_initial_data(1.0, 1.0, 4, ComponentWeights::ALL).unwrap();
        assert_eq!(d.eval(Component::U0, 0.0), 1.0);
        assert_eq!(d.eval(Component::U0, 1.0), 0.0);
        assert_eq!(d.eval(Component::U0, 1.5), 0.0);
        let d2 = make_initial_data(2.0, 1.0, 4, ComponentWeights::ALL).unwrap();
        assert!((d2.eval(Component::V1, 0.5) - 0.6328125).abs() < 1e-15);
    }

    #[test]
    fn bump_edge_is_flat() {
        // factor (1 - s^2)^4 vanishes to fourth order at s = 1
        let d = make_initial_data(1.0, 1.0, 4, ComponentWeights::ALL).unwrap();
        let h = 1e-3;
        let r = 1.0 - h;
        assert!(d.bump(r) < 1e-10);
        assert!(d.bump_deriv(r).abs() < 1e-7);
        assert_eq!(d.bump_deriv(1.0 + h), 0.0);
    }

    #[test]
    fn bump_derivative_matches_difference() {
        let d = make_initial_data(1.3, 2.0, 5, ComponentWeights::ALL).unwrap();
        for &r in &[0.1, 0.7, 1.3, 1.9] {
            let h = 1e-6;
            let fd = (d.bump(r + h) - d.bump(r - h)) / (2.0 * h);
            assert!((fd - d.bump_deriv(r)).abs() < 1e-8);
        }
    }

    #[test]
    fn data_errors() {
        let zero = ComponentWeights {
            u0: 0.0,
            u1: 0.0,
            v0: 0.0,
            v1: 0.0,
        };
        assert_eq!(
            make_initial_data(1.0, 1.0, 4, zero),
            Err(Error::TrivialData)
        );
        assert!(make_initial_data(1.0, 1.0, 3, ComponentWeights::ALL).is_err());
        assert!(make_initial_data(0.0, 1.0, 4, ComponentWeights::ALL).is_err());
        let neg = ComponentWeights {
            u0: -1.0,
            ..ComponentWeights::ALL
        };
        assert!(make_initial_data(1.0, 1.0, 4, neg).is_err());
    }

    #[test]
    fn grid_checks() {
        let g = GridSpec::covering(0.05, 0.5, 10.0, 1.0);
        assert!(g.validate(1.0).is_ok());
        let fast = GridSpec { dt: 0.1, ..g };
        assert!(matches!(fast.validate(1.0), Err(Error::Configuration(_))));
        let short = GridSpec { r_max: 10.0, ..g };
        assert!(short.validate(1.0).is_err());
    }

    #[test]
    fn source_wiring() {
        let n = Dimension::new(3).unwrap();
        let pq = ExponentPair::new(1.5, 2.0).unwrap();
        let (a, b) = SystemSpec::free(CouplingKind::SG, n, pq, 1.0).sources();
        assert_eq!(
            (a.field, a.time_derivative, a.power),
            (Field::V, false, 2.0)
        );
        assert_eq!((b.field, b.time_derivative, b.power), (Field::U, true, 1.5));
        let (a, b) = SystemSpec::free(CouplingKind::GG, n, pq, 1.0).sources();
        assert!(a.time_derivative && b.time_derivative);
        assert_eq!((a.power, b.power), (1.5, 2.0));
    }

    #[test]
    fn sg_rejects_first_potential() {
        let n = Dimension::new(3).unwrap();
        let pq = ExponentPair::new(1.5, 2.0).unwrap();
        let mut s = SystemSpec::free(CouplingKind::SG, n, pq, 1.0);
        s.potential1 = Some(CoefficientProfile::potential(1.0, 3.0).unwrap());
        assert!(s.validate().is_err());
        let s = SystemSpec::free(CouplingKind::SG, n, pq, 1.0).with_coefficients(
            CoefficientProfile::damping(1.0, 2.0).unwrap(),
            Some(CoefficientProfile::potential(1.0, 3.0).unwrap()),
        );
        assert!(s.potential1.is_none());
        assert!(s.validate().is_ok());
    }

    #[test]
    fn two_dimensional_runs_rejected() {
        let n = Dimension::new(2).unwrap();
        let pq = ExponentPair::new(2.0, 2.0).unwrap();
        let s = SystemSpec::free(CouplingKind::SS, n, pq, 1.0);
        assert_eq!(s.validate(), Err(Error::UnsupportedDimension(2)));
    }
}
