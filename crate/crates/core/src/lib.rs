//! Geometric model of infinitely satellite renormalizable dynamics.
//!
//! Given a constant `C > 1` and reduced fractions `p_n/q_n`, each level is
//! `φ_n(z) = ((1 - t_n/z)/(1 - t_n))^{q_n}` with `t_n = C·p_n/q_n`. The
//! nested sets `K_n = {z ∈ D̄ : φ_n ∘ … ∘ φ_0(z) ∈ D̄}` shrink to a compact
//! set whose components are labelled by an odometer.
//!
//! * [`numerics`]: extended-range reals and log-polar complex values.
//! * [`model`]: parameters, level maps and escape depths.
//! * [`combinatorics`]: addresses, the adding map and component labels.
//! * [`criterion`]: centers, class-membership margins and bound validators.
//! * [`raster`]: escape-depth images and connected-component counts.

pub mod combinatorics;
pub mod criterion;
pub mod model;
pub mod numerics;
pub mod raster;

pub use model::{Constant, Depth, Model, ModelParams, RotationNumber};
pub use numerics::{ExtReal, LogPolar, Rect};

/// Library version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Any failure from the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Numeric(#[from] numerics::NumericError),
    #[error(transparent)]
    Address(#[from] combinatorics::AddressError),
    #[error(transparent)]
    Criterion(#[from] criterion::CriterionError),
    #[error(transparent)]
    Raster(#[from] raster::RasterError),
}
