//! The two counterexample constructions, as exact objects.
//!
//! - [`oscillating`]: a zero-entropy map with a point attracted to the
//!   2-cycle `{1/4, 3/4}` whose correlation sums at `ε = 1/2` oscillate
//!   between limits 7/10 and 8/10, so no asymptotic correlation sum exists.
//! - [`delahaye`]: an admissible system whose Cantor set has recurrence
//!   determinism `2/3` at every threshold `ε_k = r^{-k}`, although the map is
//!   not Li-Yorke chaotic.

pub mod delahaye;
pub mod oscillating;

pub use delahaye::{build_delahaye, DelahayeInstance};
pub use oscillating::{build_oscillating, schedule_len, OscillatingInstance};
