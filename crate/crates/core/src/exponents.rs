//! Critical exponents, critical gaps and lifespan-regime prediction.
//!
//! Three couplings of the weakly coupled system are covered:
//!
//! * `SS`: sources `|v|^p`, `|u|^q`
//! * `GG`: sources `|v_t|^p`, `|u_t|^q`
//! * `SG`: sources `|v|^q`, `|u_t|^p`
//!
//! Each has a critical gap Γ(n, p, q). A positive gap predicts a power-law
//! lifespan `T ~ ε^(-1/Γ)`, a vanishing gap predicts `T ~ exp(ε^(-rate))`,
//! and a negative gap lies outside the proven blow-up region.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default band around Γ = 0 that is classified as critical.
pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-9;

/// Tolerance used to decide `p = q` when selecting the critical sub-case.
pub const EQUAL_EXPONENT_TOLERANCE: f64 = 1e-12;

/// Tolerance used to label two branch values of a gap as tied.
const BRANCH_TIE_TOLERANCE: f64 = 1e-12;

/// Pair of nonlinearity powers, both strictly above one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    p: f64,
    q: f64,
}

impl ExponentPair {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        // NaN fails both comparisons
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidExponent {
                name: "p",
                value: p,
            });
        }
        if !(q > 1.0) || !q.is_finite() {
            return Err(Error::InvalidExponent {
                name: "q",
                value: q,
            });
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `pq - 1`, strictly positive by construction.
    pub fn excess(&self) -> f64 {
        self.p * self.q - 1.0
    }

    pub fn swapped(&self) -> Self {
        Self {
            p: self.q,
            q: self.p,
        }
    }
}

/// Spatial dimension, at least two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        Ok(Self(n))
    }

    pub fn get(&self) -> u32 {
        self.0
    }

    pub fn as_f64(&self) -> f64 {
        self.0 as f64
    }

    /// `(n - 1) / 2`, the decay rate of free waves.
    pub fn half_excess(&self) -> f64 {
        (self.0 as f64 - 1.0) / 2.0
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        Dimension::new(n)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

/// Coupling of the two nonlinear sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CouplingKind {
    SS,
    GG,
    SG,
}

impl fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CouplingKind::SS => "SS",
            CouplingKind::GG => "GG",
            CouplingKind::SG => "SG",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for CouplingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SS" => Ok(CouplingKind::SS),
            "GG" => Ok(CouplingKind::GG),
            "SG" => Ok(CouplingKind::SG),
            _ => Err(Error::Configuration(format!("unknown coupling kind `{s}`"))),
        }
    }
}

/// Which argument of the max defining the gap is attained.
///
/// For SS/GG `First` is the `p`-led term (`p + 2 + 1/q`, resp. `p + 1`);
/// for SG `First` is `F_SG,1` and `Second` is `F_SG,2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    First,
    Second,
    Tie,
}

/// Value of the critical gap together with both branch values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalGap {
    pub kind: CouplingKind,
    pub value: f64,
    pub branch: Branch,
    pub f1: f64,
    pub f2: f64,
}

/// Strauss exponent: positive root of `2 + (n+1)p - (n-1)p^2 = 0`.
pub fn strauss_exponent(n: Dimension) -> f64 {
    let a = n.as_f64() - 1.0;
    let b = n.as_f64() + 1.0;
    // (n-1)p^2 - (n+1)p - 2 = 0
    (b + (b * b + 8.0 * a).sqrt()) / (2.0 * a)
}

/// Glassey exponent `1 + 2/(n-1)`.
pub fn glassey_exponent(n: Dimension) -> f64 {
    1.0 + 2.0 / (n.as_f64() - 1.0)
}

fn branch_of(f1: f64, f2: f64) -> Branch {
    if (f1 - f2).abs() <= BRANCH_TIE_TOLERANCE * (1.0 + f1.abs().max(f2.abs())) {
        Branch::Tie
    } else if f1 > f2 {
        Branch::First
    } else {
        Branch::Second
    }
}

pub fn critical_gap(kind: CouplingKind, n: Dimension, pq: ExponentPair) -> CriticalGap {
    let (p, q) = (pq.p, pq.q);
    let excess = pq.excess();
    let h = n.half_excess();
    let (f1, f2) = match kind {
        CouplingKind::SS => (
            (p + 2.0 + 1.0 / q) / excess - h,
            (q + 2.0 + 1.0 / p) / excess - h,
        ),
        CouplingKind::GG => ((p + 1.0) / excess - h, (q + 1.0) / excess - h),
        CouplingKind::SG => (
            (1.0 / p + 1.0 + q) / excess - h,
            (1.0 / q + 2.0) / excess - h,
        ),
    };
    CriticalGap {
        kind,
        value: f1.max(f2),
        branch: branch_of(f1, f2),
        f1,
        f2,
    }
}

/// Qualitative lifespan behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    /// `T ~ ε^(-exponent)`
    PowerLaw {
        exponent: f64,
    },
    /// `T ~ exp(ε^(-rate))`
    Exponential {
        rate: f64,
    },
    OutsideBlowupRegion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanPrediction {
    pub gap: CriticalGap,
    pub regime: Regime,
    pub case_label: String,
}

impl LifespanPrediction {
    pub fn power_exponent(&self) -> Option<f64> {
        match self.regime {
            Regime::PowerLaw { exponent } => Some(exponent),
            _ => None,
        }
    }

    pub fn exp_rate(&self) -> Option<f64> {
        match self.regime {
            Regime::Exponential { rate } => Some(rate),
            _ => None,
        }
    }

    pub fn is_power_law(&self) -> bool {
        matches!(self.regime, Regime::PowerLaw { .. })
    }

    /// Predicted lifespan `constant · ε^(-exponent)` or `constant · exp(ε^(-rate))`.
    ///
    /// `None` outside the blow-up region.
    pub fn lifespan(&self, epsilon: f64, constant: f64) -> Option<f64> {
        match self.regime {
            Regime::PowerLaw { exponent } => Some(constant * epsilon.powf(-exponent)),
            Regime::Exponential { rate } => Some(constant * epsilon.powf(-rate).exp()),
            Regime::OutsideBlowupRegion => None,
        }
    }
}

pub fn lifespan_prediction(
    kind: CouplingKind,
    n: Dimension,
    pq: ExponentPair,
    tie_tolerance: f64,
) -> Result<LifespanPrediction> {
    if !(tie_tolerance >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "tie_tolerance",
            value: tie_tolerance,
            reason: "must be non-negative",
        });
    }
    let gap = critical_gap(kind, n, pq);
    let (p, q) = (pq.p, pq.q);
    let excess = pq.excess();

    let (regime, case_label) = if gap.value > tie_tolerance {
        (
            Regime::PowerLaw {
                exponent: 1.0 / gap.value,
            },
            format!("{kind}: gap > 0, T ~ eps^(-1/gap)"),
        )
    } else if gap.value < -tie_tolerance {
        (
            Regime::OutsideBlowupRegion,
            format!("{kind}: gap < 0, outside the blow-up region"),
        )
    } else {
        let same = (p - q).abs() <= EQUAL_EXPONENT_TOLERANCE;
        match kind {
            CouplingKind::SS if same => (
                Regime::Exponential {
                    rate: p * (p - 1.0),
                },
                "SS: gap = 0, p = q = p_S(n), T ~ exp(eps^(-p(p-1)))".to_string(),
            ),
            CouplingKind::SS => (
                Regime::Exponential {
                    rate: p.min(q) * excess,
                },
                "SS: gap = 0, p != q, T ~ exp(eps^(-min{p,q}(pq-1)))".to_string(),
            ),
            CouplingKind::GG if same => (
                Regime::Exponential { rate: p - 1.0 },
                "GG: gap = 0, p = q, T ~ exp(eps^(-(p-1)))".to_string(),
            ),
            CouplingKind::GG => (
                Regime::Exponential { rate: excess },
                "GG: gap = 0, p != q, T ~ exp(eps^(-(pq-1)))".to_string(),
            ),
            CouplingKind::SG => {
                let f1_zero = gap.f1.abs() <= tie_tolerance;
                let f2_zero = gap.f2.abs() <= tie_tolerance;
                if f1_zero && f2_zero {
                    (
                        Regime::Exponential { rate: excess },
                        "SG: F1 = F2 = 0, T ~ exp(eps^(-(pq-1)))".to_string(),
                    )
                } else if f1_zero {
                    (
                        Regime::Exponential { rate: p * excess },
                        "SG: F1 = 0 > F2, T ~ exp(eps^(-p(pq-1))) (derived rate; tabulated display lists q(pq-1))"
                            .to_string(),
                    )
                } else {
                    (
                        Regime::Exponential { rate: q * excess },
                        "SG: F2 = 0 > F1, T ~ exp(eps^(-q(pq-1)))".to_string(),
                    )
                }
            }
        }
    };
    Ok(LifespanPrediction {
        gap,
        regime,
        case_label,
    })
}
