//! Piecewise linear self-maps of `[0, 1]`, their trajectories, and detection
//! of eventual periodicity.

use std::io::Write;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Scalar};

/// A continuous map of `[0, 1]` given by its values at increasing breakpoints
/// `0 = b_0 < b_1 < … < b_k = 1`, linear in between.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearMap<T> {
    breakpoints: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> PiecewiseLinearMap<T> {
    pub fn new(breakpoints: Vec<T>, values: Vec<T>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidMap("need at least two breakpoints".into()));
        }
        if breakpoints.len() != values.len() {
            return Err(Error::InvalidMap(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != T::zero() || breakpoints[breakpoints.len() - 1] != T::one() {
            return Err(Error::InvalidMap("breakpoints must start at 0 and end at 1".into()));
        }
        if let Some(i) = breakpoints.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMap(format!(
                "breakpoints not strictly increasing at index {}",
                i + 1
            )));
        }
        if let Some(v) = values.iter().find(|v| **v < T::zero() || **v > T::one()) {
            return Err(Error::InvalidMap(format!("value {v} outside [0, 1]")));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn identity() -> Self {
        Self {
            breakpoints: vec![T::zero(), T::one()],
            values: vec![T::zero(), T::one()],
        }
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `f(x)` by linear interpolation on the cell containing `x`.
    pub fn evaluate(&self, x: &T) -> Result<T> {
        if *x < T::zero() || *x > T::one() {
            return Err(Error::Domain(x.to_string()));
        }
        // first breakpoint strictly greater than x; x = 1 lands in the last cell
        let upper = self.breakpoints.partition_point(|b| b <= x);
        let cell = upper.clamp(1, self.breakpoints.len() - 1) - 1;
        let (x0, x1) = (&self.breakpoints[cell], &self.breakpoints[cell + 1]);
        let (y0, y1) = (&self.values[cell], &self.values[cell + 1]);
        if x == x0 {
            return Ok(y0.clone());
        }
        if x == x1 {
            return Ok(y1.clone());
        }
        let t = (x.clone() - x0.clone()) / (x1.clone() - x0.clone());
        Ok(y0.clone() + t * (y1.clone() - y0.clone()))
    }

    /// The first `n` points `x, f(x), …, f^{n-1}(x)`.
    pub fn iterate(&self, x: &T, n: usize) -> Result<Trajectory<T>> {
        if n == 0 {
            return Err(Error::InvalidParameter("trajectory length must be positive".into()));
        }
        if *x < T::zero() || *x > T::one() {
            return Err(Error::Domain(x.to_string()));
        }
        let mut trajectory = Trajectory {
            points: Vec::with_capacity(n),
        };
        trajectory.points.push(x.clone());
        self.extend(&mut trajectory, n - 1)?;
        Ok(trajectory)
    }

    /// Appends `extra` further iterates to `trajectory`.
    pub fn extend(&self, trajectory: &mut Trajectory<T>, extra: usize) -> Result<()> {
        trajectory.points.reserve(extra);
        for _ in 0..extra {
            let next = self.evaluate(trajectory.points.last().expect("nonempty"))?;
            trajectory.points.push(next);
        }
        Ok(())
    }
}

impl PiecewiseLinearMap<BigRational> {
    /// Rounds every breakpoint and value to `f64`.
    pub fn to_f64(&self) -> Result<PiecewiseLinearMap<f64>> {
        PiecewiseLinearMap::new(
            self.breakpoints.iter().map(Scalar::to_f64).collect(),
            self.values.iter().map(Scalar::to_f64).collect(),
        )
    }
}

/// JSON form `{"breakpoints": [...], "values": [...]}` with exact rational strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapJson {
    pub breakpoints: Vec<String>,
    pub values: Vec<String>,
}

impl MapJson {
    pub fn from_map(map: &PiecewiseLinearMap<BigRational>) -> Self {
        Self {
            breakpoints: map.breakpoints.iter().map(format_rational).collect(),
            values: map.values.iter().map(format_rational).collect(),
        }
    }

    pub fn to_map(&self) -> Result<PiecewiseLinearMap<BigRational>> {
        let parse = |v: &Vec<String>| v.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>();
        PiecewiseLinearMap::new(parse(&self.breakpoints)?, parse(&self.values)?)
    }
}

/// A finite orbit segment `points[i] = f^i(base)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    points: Vec<T>,
}

impl<T: Scalar> Trajectory<T> {
    /// Wraps precomputed points; the caller vouches that consecutive points
    /// are related by the map.
    pub fn from_points(points: Vec<T>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("empty trajectory".into()));
        }
        Ok(Self { points })
    }

    pub fn base(&self) -> &T {
        &self.points[0]
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The trajectory of `f^h(base)`, reusing the stored points.
    pub fn shifted(&self, h: usize) -> Result<Self> {
        if h >= self.points.len() {
            return Err(Error::InsufficientTrajectory {
                need: h + 1,
                have: self.points.len(),
            });
        }
        Ok(Self {
            points: self.points[h..].to_vec(),
        })
    }

    /// `index,value` CSV with a header row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["index", "value"])?;
        for (i, p) in self.points.iter().enumerate() {
            writer.write_record([i.to_string(), p.to_string()])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// An eventually periodic tail: `points[i + period] ≈ points[i]` for all `i ≥ preperiod`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicStructure<T> {
    pub preperiod: usize,
    pub period: usize,
    /// `points[preperiod .. preperiod + period]`, in trajectory order.
    pub orbit: Vec<T>,
}

/// Finds the smallest period `p`, and for it the smallest preperiod `k`, such
/// that every residual `|points[i + p] - points[i]|` with `i ≥ k` inside the
/// trajectory is at most `tol`, and the tail from `k` spans at least two full
/// cycles.
///
/// With `tol = 0` and exact arithmetic this certifies eventual periodicity of
/// the observed window. For floating trajectories it is a heuristic: nothing
/// is claimed beyond the points actually seen.
pub fn detect_periodic<T: Scalar>(trajectory: &Trajectory<T>, tol: &T) -> Option<PeriodicStructure<T>> {
    let points = trajectory.points();
    let len = points.len();
    for period in 1..=len / 2 {
        // the preperiod is one past the last residual that exceeds tol
        let preperiod = (0..len - period)
            .rev()
            .find(|&i| &points[i + period].dist(&points[i]) > tol)
            .map_or(0, |i| i + 1);
        if len - preperiod >= 2 * period {
            return Some(PeriodicStructure {
                preperiod,
                period,
                orbit: points[preperiod..preperiod + period].to_vec(),
            });
        }
    }
    None
}

/// Shipped example maps, built from exact fractions in any scalar type.
///
/// - `three-cycle`: slope 1/2 around the attracting cycle `1/5 → 1/2 → 4/5`.
/// - `two-cycle`: slope -1/2 outside `[1/4, 3/4]`, attracting `{1/4, 3/4}`.
/// - `tent`: the full tent map.
pub fn preset<T: Scalar>(name: &str) -> Option<PiecewiseLinearMap<T>> {
    let frac = |v: &[(i64, i64)]| -> Vec<T> { v.iter().map(|&(n, d)| T::from_int(n) / T::from_int(d)).collect() };
    let (breakpoints, values) = match name {
        "three-cycle" => (
            frac(&[(0, 1), (1, 10), (3, 10), (2, 5), (3, 5), (7, 10), (9, 10), (1, 1)]),
            frac(&[(9, 20), (9, 20), (11, 20), (3, 4), (17, 20), (3, 20), (1, 4), (1, 4)]),
        ),
        "two-cycle" => (
            frac(&[(0, 1), (1, 4), (3, 4), (1, 1)]),
            frac(&[(7, 8), (3, 4), (1, 4), (1, 8)]),
        ),
        "tent" => (frac(&[(0, 1), (1, 2), (1, 1)]), frac(&[(0, 1), (1, 1), (0, 1)])),
        _ => return None,
    };
    Some(PiecewiseLinearMap::new(breakpoints, values).expect("preset maps are valid"))
}

pub const PRESETS: [&str; 3] = ["three-cycle", "two-cycle", "tent"];
