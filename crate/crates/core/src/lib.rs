//! Discretized planar geometry for radial projection experiments.
//!
//! The crate works with finite families of dyadic cubes in the unit square
//! and provides:
//!
//! * exact dyadic arithmetic, cubes, box counting and ball counting ([`grid`]);
//! * Frostman certificates, branching profiles and uniform subset
//!   extraction ([`frostman`]);
//! * point-line duality, δ-tubes and an exact tube-cube predicate
//!   ([`duality`]);
//! * tube-cube incidence counting and an incidence-exponent harness
//!   ([`incidence`]);
//! * generators for sets with known dimension ([`generators`]);
//! * radial and orthogonal projections with box-dimension estimates
//!   ([`projection`]);
//! * closed-form projection bounds and their dominance relations
//!   ([`bounds`]);
//! * the `DSET1` / `TSET1` text formats ([`io`]).
//!
//! Geometry predicates never touch floating point. Closed-form bounds are
//! generic over [`Scalar`] and run in `f32`, `f64` or exact [`Rational`].

pub mod bounds;
pub mod duality;
pub mod dyadic;
pub mod error;
pub mod frostman;
pub mod generators;
pub mod grid;
pub mod incidence;
pub mod io;
pub mod projection;
pub mod scalar;

pub use dyadic::{Dyadic, Point2};
pub use error::{Error, Result};
pub use grid::{CubeSet, DyadicCube};
pub use scalar::{FloatScalar, Scalar};

/// Version of this crate, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exact rational used for exponents, constants and exact bound evaluation.
pub type Rational = num_rational::Ratio<i64>;

pub type Direction64 = duality::Direction<f64>;
pub type Direction32 = duality::Direction<f32>;
pub type DimensionEstimate64 = projection::DimensionEstimate<f64>;
pub type DimensionEstimate32 = projection::DimensionEstimate<f32>;
pub type DominanceReport64 = bounds::DominanceReport<f64>;
pub type DominanceReportExact = bounds::DominanceReport<Rational>;
