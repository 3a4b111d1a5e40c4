//! Numerical laboratory for blow-up and lifespan of weakly coupled semilinear
//! wave systems with scattering damping and potentials.
//!
//! * [`exponents`]: Strauss/Glassey exponents, critical gaps, lifespan regimes.
//! * [`auxfn`]: auxiliary radial solutions, the `b_a` family and smooth cutoffs.
//! * [`solver`]: radial finite-difference integrator with blow-up detection.
//! * [`sweep`]: ε-ladders of solver runs and scaling fits.
//! * [`ode_lemma`]: differential-inequality blow-up bound and the `Y` functional.

pub mod auxfn;
pub mod digest;
pub mod error;
pub mod exponents;
pub mod ode_lemma;
pub mod quadrature;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
