//! Bowen distances, correlation sums, recurrence determinism and recurrence plots.
//!
//! For a trajectory `x_i = f^i(x)`:
//!
//! ```text
//! ϱ_m(x_i, x_j) = max_{0 ≤ s < m} |x_{i+s} - x_{j+s}|
//! C_m(x, n, ε)  = #{(i, j) ∈ [0, n)² : ϱ_m(x_i, x_j) ≤ ε} / n²
//! rdet_m        = C_m / C_1
//! DET_m         = m · rdet_m - (m - 1) · rdet_{m+1}
//! ```
//!
//! Counts are exact integers whatever the scalar type, so every ratio here is
//! an exact rational and parallel reduction order never matters.

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::dynamics::{PiecewiseLinearMap, Trajectory};
use crate::error::{Error, Result};
use crate::exec::{self, Strategy};
use crate::scalar::{format_rational, Scalar};

/// Window length `m`, threshold `ε` and segment length `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct RqaParams<T> {
    pub m: usize,
    pub epsilon: T,
    pub n: usize,
}

impl<T: Scalar> RqaParams<T> {
    pub fn new(m: usize, epsilon: T, n: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("window m must be at least 1".into()));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("segment length n must be at least 1".into()));
        }
        if epsilon <= T::zero() {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { m, epsilon, n })
    }

    /// Same parameters with window `m`.
    pub fn with_m(&self, m: usize) -> Result<Self> {
        Self::new(m, self.epsilon.clone(), self.n)
    }

    /// Trajectory points needed: `n + m - 1`.
    pub fn required_len(&self) -> usize {
        self.n + self.m - 1
    }
}

/// `ϱ_m(f^i(x), f^j(x))` read off the trajectory.
pub fn bowen_distance<T: Scalar>(t: &Trajectory<T>, i: usize, j: usize, m: usize) -> Result<T> {
    if m == 0 {
        return Err(Error::InvalidParameter("window m must be at least 1".into()));
    }
    let pts = t.points();
    let last = i.max(j);
    if last + m > pts.len() {
        return Err(Error::WindowOverflow {
            index: last,
            window: m,
            len: pts.len(),
        });
    }
    let mut best = T::zero();
    for s in 0..m {
        let d = pts[i + s].dist(&pts[j + s]);
        if d > best {
            best = d;
        }
    }
    Ok(best)
}

#[inline]
fn recurs<T: Scalar>(pts: &[T], i: usize, j: usize, m: usize, epsilon: &T) -> bool {
    (0..m).all(|s| &pts[i + s].dist(&pts[j + s]) <= epsilon)
}

fn check_len<T: Scalar>(t: &Trajectory<T>, p: &RqaParams<T>) -> Result<()> {
    if t.len() < p.required_len() {
        return Err(Error::InsufficientTrajectory {
            need: p.required_len(),
            have: t.len(),
        });
    }
    Ok(())
}

/// `n²·C_m(x, n, ε)`: the number of recurrent index pairs.
pub fn correlation_count_with<T: Scalar>(t: &Trajectory<T>, p: &RqaParams<T>, strategy: Strategy) -> Result<u64> {
    check_len(t, p)?;
    let pts = t.points();
    let (n, m, eps) = (p.n, p.m, &p.epsilon);
    // diagonal pairs always recur; the rest is counted once per unordered pair
    let upper = exec::sum_rows(n, strategy, |i| {
        (i + 1..n).filter(|&j| recurs(pts, i, j, m, eps)).count() as u64
    });
    Ok(n as u64 + 2 * upper)
}

/// Exact correlation sum `count / n²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorrelationSum {
    pub count: u64,
    pub n: u64,
}

impl CorrelationSum {
    pub fn pairs(&self) -> u64 {
        self.n * self.n
    }

    pub fn ratio(&self) -> BigRational {
        BigRational::new(BigInt::from(self.count), BigInt::from(self.pairs()))
    }

    pub fn to_f64(&self) -> f64 {
        self.count as f64 / self.pairs() as f64
    }
}

impl PartialOrd for CorrelationSum {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        // count/n² against count'/n'², cross-multiplied in u128
        let lhs = self.count as u128 * other.pairs() as u128;
        let rhs = other.count as u128 * self.pairs() as u128;
        Some(lhs.cmp(&rhs))
    }
}

pub fn correlation_sum<T: Scalar>(t: &Trajectory<T>, p: &RqaParams<T>) -> Result<CorrelationSum> {
    correlation_sum_with(t, p, Strategy::default())
}

pub fn correlation_sum_with<T: Scalar>(
    t: &Trajectory<T>,
    p: &RqaParams<T>,
    strategy: Strategy,
) -> Result<CorrelationSum> {
    Ok(CorrelationSum {
        count: correlation_count_with(t, p, strategy)?,
        n: p.n as u64,
    })
}

/// `rdet_m = C_m / C_1` as the ratio of the two pair counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Determinism {
    pub count_m: u64,
    pub count_1: u64,
}

impl Determinism {
    pub fn ratio(&self) -> BigRational {
        BigRational::new(BigInt::from(self.count_m), BigInt::from(self.count_1))
    }

    pub fn to_f64(&self) -> f64 {
        self.count_m as f64 / self.count_1 as f64
    }
}

pub fn recurrence_determinism<T: Scalar>(t: &Trajectory<T>, p: &RqaParams<T>) -> Result<Determinism> {
    let count_m = correlation_count_with(t, p, Strategy::default())?;
    let count_1 = if p.m == 1 {
        count_m
    } else {
        correlation_count_with(t, &p.with_m(1)?, Strategy::default())?
    };
    Ok(Determinism { count_m, count_1 })
}

/// `DET_m = m·rdet_m - (m-1)·rdet_{m+1}`, exactly. Needs `n + m` points.
pub fn rqa_det<T: Scalar>(t: &Trajectory<T>, p: &RqaParams<T>) -> Result<BigRational> {
    let next = p.with_m(p.m + 1)?;
    check_len(t, &next)?;
    let rdet_m = recurrence_determinism(t, p)?.ratio();
    if p.m == 1 {
        return Ok(rdet_m);
    }
    let rdet_next = recurrence_determinism(t, &next)?.ratio();
    let m = BigRational::from_integer(BigInt::from(p.m));
    let m_less = BigRational::from_integer(BigInt::from(p.m - 1));
    Ok(m * rdet_m - m_less * rdet_next)
}

/// The recurrence plot: `bits[i][j] ⟺ ϱ_m(x_i, x_j) ≤ ε`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrenceMatrix {
    n: usize,
    bits: Vec<bool>,
}

impl RecurrenceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.bits[i * self.n..(i + 1) * self.n]
    }

    pub fn popcount(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Plain PBM (`P1`): header `P1\n<n> <n>\n`, then one line per trajectory
    /// index with space-separated `0`/`1`, `1` marking a recurrence.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "P1\n{} {}\n", self.n, self.n)?;
        let mut line = String::with_capacity(2 * self.n);
        for i in 0..self.n {
            line.clear();
            for (j, &bit) in self.row(i).iter().enumerate() {
                if j > 0 {
                    line.push(' ');
                }
                line.push(if bit { '1' } else { '0' });
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn recurrence_matrix<T: Scalar>(t: &Trajectory<T>, p: &RqaParams<T>) -> Result<RecurrenceMatrix> {
    recurrence_matrix_with(t, p, Strategy::default())
}

pub fn recurrence_matrix_with<T: Scalar>(
    t: &Trajectory<T>,
    p: &RqaParams<T>,
    strategy: Strategy,
) -> Result<RecurrenceMatrix> {
    check_len(t, p)?;
    let pts = t.points();
    let (n, m, eps) = (p.n, p.m, &p.epsilon);
    let rows = exec::map_rows(n, strategy, |i| {
        (0..n).map(|j| recurs(pts, i, j, m, eps)).collect::<Vec<bool>>()
    });
    Ok(RecurrenceMatrix {
        n,
        bits: rows.concat(),
    })
}

/// Anything that can report `C_m(x, n, ε)` for a fixed base point.
pub trait CorrelationSource {
    type Scalar: Scalar;

    fn correlation_sum(&self, m: usize, epsilon: &Self::Scalar, n: usize) -> Result<CorrelationSum>;
}

impl<T: Scalar> CorrelationSource for Trajectory<T> {
    type Scalar = T;

    fn correlation_sum(&self, m: usize, epsilon: &T, n: usize) -> Result<CorrelationSum> {
        correlation_sum(self, &RqaParams::new(m, epsilon.clone(), n)?)
    }
}

/// A map and base point; the trajectory is generated to the length each query needs.
#[derive(Clone, Debug)]
pub struct MapSource<T> {
    pub map: PiecewiseLinearMap<T>,
    pub base: T,
}

impl<T: Scalar> CorrelationSource for MapSource<T> {
    type Scalar = T;

    fn correlation_sum(&self, m: usize, epsilon: &T, n: usize) -> Result<CorrelationSum> {
        let p = RqaParams::new(m, epsilon.clone(), n)?;
        let t = self.map.iterate(&self.base, p.required_len())?;
        correlation_sum(&t, &p)
    }
}

/// `C_m` along a schedule of `n`, with the extremes of its tail as finite
/// stand-ins for the lower and upper asymptotic correlation sums.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesEstimate {
    pub values: Vec<(usize, CorrelationSum)>,
    pub liminf_est: CorrelationSum,
    pub limsup_est: CorrelationSum,
}

impl SeriesEstimate {
    /// `n, C_m_exact_num, C_m_exact_den, C_m_float`, fraction in lowest terms.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["n", "C_m_exact_num", "C_m_exact_den", "C_m_float"])?;
        for (n, c) in &self.values {
            let r = c.ratio();
            writer.write_record([
                n.to_string(),
                r.numer().to_string(),
                r.denom().to_string(),
                c.to_f64().to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Share of the schedule used for the tail extremes unless told otherwise.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;

/// Evaluates `C_m` at every scheduled `n` and takes min/max over the last
/// `tail_fraction` of the schedule (at least one entry).
///
/// This is a finite-data heuristic. For the shipped constructions the closed
/// forms elsewhere in the crate are authoritative.
pub fn estimate_asymptotics<S: CorrelationSource>(
    source: &S,
    m: usize,
    epsilon: &S::Scalar,
    schedule: &[usize],
    tail_fraction: f64,
) -> Result<SeriesEstimate> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameter("empty schedule".into()));
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("schedule must be strictly increasing".into()));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("tail fraction {tail_fraction} not in (0, 1]")));
    }
    let values = schedule
        .iter()
        .map(|&n| Ok((n, source.correlation_sum(m, epsilon, n)?)))
        .collect::<Result<Vec<_>>>()?;
    let tail_len = ((values.len() as f64 * tail_fraction).ceil() as usize).clamp(1, values.len());
    let tail = &values[values.len() - tail_len..];
    let pick = |better: fn(&CorrelationSum, &CorrelationSum) -> bool| {
        tail.iter()
            .map(|(_, c)| *c)
            .reduce(|acc, c| if better(&c, &acc) { c } else { acc })
            .expect("nonempty tail")
    };
    Ok(SeriesEstimate {
        liminf_est: pick(|a, b| a < b),
        limsup_est: pick(|a, b| a > b),
        values,
    })
}

/// Exact rational rendering for reports.
pub fn ratio_string(c: &CorrelationSum) -> String {
    format_rational(&c.ratio())
}

impl std::fmt::Display for CorrelationSum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", ratio_string(self))
    }
}

/// Rounds a `BigRational` for display; `NaN` if it does not fit.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    Scalar::to_f64(r)
}
