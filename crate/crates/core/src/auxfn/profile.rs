use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether a profile multiplies `u_t` or `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Damping,
    Potential,
}

impl ProfileKind {
    /// Smallest admissible (exclusive) decay rate.
    pub fn min_decay(&self) -> f64 {
        match self {
            ProfileKind::Damping => 1.0,
            ProfileKind::Potential => 2.0,
        }
    }
}

/// User-supplied radial sampler replacing the default `amplitude·(1+r)^(-decay)`.
#[derive(Clone)]
pub struct RadialSampler {
    /// Stable identifier; part of cache keys and manifests.
    pub label: String,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for RadialSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialSampler")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

/// Radial damping `D(r)` or potential `V(r)` bounded by `amplitude·(1+r)^(-decay)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientProfile {
    pub kind: ProfileKind,
    pub amplitude: f64,
    pub decay: f64,
    #[serde(skip)]
    pub sampler: Option<RadialSampler>,
}

impl PartialEq for CoefficientProfile {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.amplitude.to_bits() == other.amplitude.to_bits()
            && self.decay.to_bits() == other.decay.to_bits()
            && self.sampler.as_ref().map(|s| &s.label) == other.sampler.as_ref().map(|s| &s.label)
    }
}

impl Hash for CoefficientProfile {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.kind.hash(state);
        self.amplitude.to_bits().hash(state);
        self.decay.to_bits().hash(state);
        self.sampler.as_ref().map(|s| s.label.as_str()).hash(state);
    }
}

/// Spacing and extent used by [`CoefficientProfile::validate`] to spot-check the bound.
const SPOT_CHECK_STEP: f64 = 0.25;
const SPOT_CHECK_EXTENT: f64 = 200.0;

impl CoefficientProfile {
    pub fn damping(amplitude: f64, decay: f64) -> Result<Self> {
        Self::power_decay(ProfileKind::Damping, amplitude, decay)
    }

    pub fn potential(amplitude: f64, decay: f64) -> Result<Self> {
        Self::power_decay(ProfileKind::Potential, amplitude, decay)
    }

    /// Identically zero damping.
    pub fn no_damping() -> Self {
        Self {
            kind: ProfileKind::Damping,
            amplitude: 0.0,
            decay: 2.0,
            sampler: None,
        }
    }

    /// Identically zero potential.
    pub fn no_potential() -> Self {
        Self {
            kind: ProfileKind::Potential,
            amplitude: 0.0,
            decay: 3.0,
            sampler: None,
        }
    }

    fn power_decay(kind: ProfileKind, amplitude: f64, decay: f64) -> Result<Self> {
        let profile = Self {
            kind,
            amplitude,
            decay,
            sampler: None,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Replaces the default evaluator with `f`, which must respect the decay bound.
    pub fn with_sampler(
        mut self,
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        self.sampler = Some(RadialSampler {
            label: label.into(),
            f: Arc::new(f),
        });
        self.validate()?;
        Ok(self)
    }

    /// Upper envelope `amplitude·(1+r)^(-decay)`.
    pub fn envelope(&self, r: f64) -> f64 {
        self.amplitude * (1.0 + r).powf(-self.decay)
    }

    pub fn eval(&self, r: f64) -> f64 {
        match &self.sampler {
            Some(s) => (s.f)(r),
            None => self.envelope(r),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "{:?} amplitude {} must be finite and non-negative",
                self.kind, self.amplitude
            )));
        }
        if !(self.decay > self.kind.min_decay()) || !self.decay.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "{:?} decay {} must exceed {}",
                self.kind,
                self.decay,
                self.kind.min_decay()
            )));
        }
        if self.sampler.is_some() {
            let steps = (SPOT_CHECK_EXTENT / SPOT_CHECK_STEP) as usize;
            for j in 0..=steps {
                let r = j as f64 * SPOT_CHECK_STEP;
                let value = self.eval(r);
                let bound = self.envelope(r);
                if !(value >= 0.0) || value > bound * (1.0 + 1e-12) {
                    return Err(Error::InvalidProfile(format!(
                        "{:?} sampler value {value} at r = {r} violates 0 <= D <= {bound}",
                        self.kind
                    )));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn require_kind(&self, kind: ProfileKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::InvalidProfile(format!(
                "expected a {kind:?} profile, got {:?}",
                self.kind
            )));
        }
        self.validate()
    }
}
