//! Recurrence quantification for interval maps.
//!
//! Finite-time correlation sums, recurrence determinism and recurrence plots
//! for trajectories of piecewise linear maps of `[0, 1]`, together with exact
//! symbolic backends for the asymptotic values:
//!
//! - [`interval_config`]: ordered interval configurations and the ε-pair set
//!   whose cardinality is bounded by `4(n-1)`.
//! - [`dynamics`]: piecewise linear maps, trajectories, eventual periodicity.
//! - [`rqa`]: Bowen distances, `C_m`, `rdet_m`, `DET_m`, recurrence matrices.
//! - [`solenoidal`]: odometer words, admissible interval systems and the
//!   `N_m` / `N_m°` pair counts that pin down asymptotic correlation sums.
//! - [`finite_omega`]: closed forms for points attracted to a periodic orbit.
//! - [`constructions`]: the zero-entropy map whose correlation sums oscillate,
//!   and the Delahaye-type system whose determinism tends to 2/3.
//! - [`report`]: CSV, JSON and PGM writers used by the command-line tool.
//!
//! Every computation is available in exact rational arithmetic
//! ([`num_rational::BigRational`]) and in `f64`; see [`Scalar`].

pub mod constructions;
pub mod dynamics;
mod error;
pub mod exec;
pub mod finite_omega;
pub mod interval_config;
pub mod report;
pub mod rqa;
mod scalar;
pub mod solenoidal;

pub use error::{Error, Result};
pub use exec::Strategy;
pub use scalar::{format_rational, parse_rational, Scalar};
