//! A zero-entropy map of type 2 whose correlation sums at `ε = 1/2` do not
//! converge along the orbit of `x_0`.
//!
//! Two interval families `I_n ⊂ (0, 1/4)` and `J_n ⊂ (1/4, 3/4)` accumulate
//! on the 2-cycle `y_0 = 1/4`, `y_1 = 3/4`. Depth `k` holds `2^k` orbit
//! points in each of `I_k` and `J_k`: `x_{2i} ∈ I_k` and `x_{2i+1} ∈ J_k` for
//! `i ∈ [2^k - 1, 2(2^k - 1)]`. The scheme is
//!
//! ```text
//! δ_n = 16^{-(n+2)}
//! n even:  I_n = [1/4 - 8δ_n, 1/4 - 7δ_n],  J_n = [3/4 - 2δ_n, 3/4 - δ_n]
//! n odd:   I_n = [1/4 - 2δ_n, 1/4 - δ_n],   J_n = [3/4 - 8δ_n, 3/4 - 7δ_n]
//! ```
//!
//! so `I_n` and `J_n` are more than `1/2` apart for even `n` and within `1/2`
//! for odd `n`. Whether `|x_i - x_j| ≤ 1/2` then depends only on which
//! intervals hold the two points, and the counts have a closed form along
//! `n_k = 2(2^{k+1} - 1)` whose even-`k` values tend to 7/10 and odd-`k`
//! values to 8/10.
//!
//! The symbolic positions are authoritative. The piecewise linear map from
//! [`OscillatingInstance::numeric_map`] interpolates them to a finite depth
//! and only reproduces orbit prefixes within that depth.

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::dynamics::PiecewiseLinearMap;
use crate::error::{Error, Result};
use crate::exec::{self, Strategy};
use crate::interval_config::{interval_dist, union_diam, CompactInterval};
use crate::rqa::{estimate_asymptotics, rational_to_f64, CorrelationSource, CorrelationSum, DEFAULT_TAIL_FRACTION};
use crate::scalar::format_rational;

/// Largest supported depth; index arithmetic stays in `u64`.
pub const MAX_DEPTH: usize = 30;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn pow2(k: usize) -> u64 {
    1u64 << k
}

/// `n_k = 2(2^{k+1} - 1)`: the orbit length that completes depth `k`.
pub fn schedule_len(k: usize) -> usize {
    (2 * (pow2(k + 1) - 1)) as usize
}

/// Which family holds a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `I_k`, even indices.
    Left,
    /// `J_k`, odd indices.
    Right,
}

/// Family and depth of the interval holding `x_index`.
pub fn locate(index: usize) -> (Side, usize) {
    let side = if index % 2 == 0 { Side::Left } else { Side::Right };
    let j = (index / 2) as u64 + 1;
    (side, (63 - j.leading_zeros()) as usize)
}

/// `|x_i - x_j| ≤ 1/2` decided from the interval memberships alone:
/// same parity, or `I_s`/`J_s` with `s` odd, or `I_s`/`J_t` with `s > t`.
fn rule_by_location(a: (Side, usize), b: (Side, usize)) -> bool {
    if a.0 == b.0 {
        return true;
    }
    let (s, t) = if a.0 == Side::Left { (a.1, b.1) } else { (b.1, a.1) };
    if s == t {
        s % 2 == 1
    } else {
        s > t
    }
}

/// Class id `2·level + side`, used by the pair scans.
fn class_of(index: usize) -> u8 {
    let (side, level) = locate(index);
    (2 * level + (side == Side::Right) as usize) as u8
}

const CLASSES: usize = 2 * (MAX_DEPTH + 2);

/// `table[c]` has bit `c'` set iff points of classes `c` and `c'` recur.
fn rule_table() -> [u64; CLASSES] {
    let mut table = [0u64; CLASSES];
    for (c, row) in table.iter_mut().enumerate() {
        for c2 in 0..CLASSES {
            let loc = |c: usize| (if c % 2 == 0 { Side::Left } else { Side::Right }, c / 2);
            if rule_by_location(loc(c), loc(c2)) {
                *row |= 1 << c2;
            }
        }
    }
    table
}

/// The interval families to a fixed depth, with every construction
/// condition checked when built.
#[derive(Clone, Debug)]
pub struct OscillatingInstance {
    depth: usize,
}

impl OscillatingInstance {
    pub fn y0() -> BigRational {
        q(1, 4)
    }

    pub fn y1() -> BigRational {
        q(3, 4)
    }

    pub fn epsilon() -> BigRational {
        q(1, 2)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of orbit points through depth `T`: `2(2^{T+1} - 1)`.
    pub fn capacity(&self) -> usize {
        schedule_len(self.depth)
    }

    fn delta(n: usize) -> BigRational {
        BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(16), n + 2))
    }

    fn family(n: usize, near: BigRational, wide: bool) -> CompactInterval<BigRational> {
        let d = Self::delta(n);
        let (far, close) = if wide { (8, 7) } else { (2, 1) };
        let lo = near.clone() - d.clone() * BigInt::from(far);
        let hi = near - d * BigInt::from(close);
        CompactInterval::new(lo, hi).expect("ordered endpoints")
    }

    /// `I_n = [a_n, b_n]`.
    pub fn interval_i(n: usize) -> CompactInterval<BigRational> {
        Self::family(n, Self::y0(), n % 2 == 0)
    }

    /// `J_n = [c_n, d_n]`.
    pub fn interval_j(n: usize) -> CompactInterval<BigRational> {
        Self::family(n, Self::y1(), n % 2 == 1)
    }

    /// Checks every construction condition for all depths up to `self.depth`.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Construction(msg));
        let (y0, y1, eps) = (Self::y0(), Self::y1(), Self::epsilon());
        let zero = BigRational::zero();
        let is: Vec<_> = (0..=self.depth).map(Self::interval_i).collect();
        let js: Vec<_> = (0..=self.depth).map(Self::interval_j).collect();
        for n in 0..=self.depth {
            let (i, j) = (&is[n], &js[n]);
            if !(i.lo() > &zero && i.hi() < &y0 && j.lo() > &y0 && j.hi() < &y1) {
                return fail(format!("I_{n} or J_{n} leaves its half-open range"));
            }
            if n % 2 == 0 && interval_dist(i, j) <= eps {
                return fail(format!("I_{n} and J_{n} are within 1/2"));
            }
            if n % 2 == 1 && union_diam(i, j) >= eps {
                return fail(format!("I_{n} ∪ J_{n} is at least 1/2 wide"));
            }
            if n > 0 && !(is[n - 1].precedes(i) && js[n - 1].precedes(j)) {
                return fail(format!("depth {n} does not lie right of depth {}", n - 1));
            }
            // geometric approach to the cycle
            let bound = Self::delta(n) * BigInt::from(8);
            if &y0 - i.lo() > bound || &y1 - j.lo() > bound {
                return fail(format!("depth {n} is too far from the 2-cycle"));
            }
        }
        for s in 0..=self.depth {
            for t in 0..=self.depth {
                if s < t && interval_dist(&is[s], &js[t]) <= eps {
                    return fail(format!("I_{s} and J_{t} are within 1/2"));
                }
                if s > t && union_diam(&is[s], &js[t]) >= eps {
                    return fail(format!("I_{s} ∪ J_{t} is at least 1/2 wide"));
                }
            }
        }
        Ok(())
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n > self.capacity() {
            let (_, level) = locate(n - 1);
            return Err(Error::DepthOverflow {
                depth: level,
                cap: self.depth,
            });
        }
        Ok(())
    }

    /// `x_index`: the points of a depth are equally spaced strictly inside
    /// their interval, left to right in index order.
    pub fn position(index: usize) -> BigRational {
        let (side, level) = locate(index);
        let interval = match side {
            Side::Left => Self::interval_i(level),
            Side::Right => Self::interval_j(level),
        };
        let offset = (index / 2) as u64 + 1 - pow2(level);
        let step = interval.diam() / BigInt::from(pow2(level) + 1);
        interval.lo().clone() + step * BigInt::from(offset + 1)
    }

    /// `x_0, …, x_{n-1}`.
    pub fn positions(&self, n: usize) -> Result<Vec<BigRational>> {
        self.check_len(n)?;
        Ok((0..n).map(Self::position).collect())
    }

    /// Whether `|x_i - x_j| ≤ 1/2`, from interval memberships only.
    pub fn recurrence_rule(&self, i: usize, j: usize) -> Result<bool> {
        self.check_len(i.max(j) + 1)?;
        Ok(rule_by_location(locate(i), locate(j)))
    }

    /// `n² C_m(x_0, n, 1/2)` by scanning all index pairs through the
    /// membership rule. Needs `n + m - 1` points within depth.
    pub fn pair_count_scan(&self, n: usize, m: usize, strategy: Strategy) -> Result<u64> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter("n and m must be positive".into()));
        }
        self.check_len(n + m - 1)?;
        let classes: Vec<u8> = (0..n + m - 1).map(class_of).collect();
        let table = rule_table();
        let upper = exec::sum_rows(n, strategy, |i| {
            let mut count = 0u64;
            if m == 1 {
                let mask = table[classes[i] as usize];
                for &c in &classes[i + 1..n] {
                    count += (mask >> c) & 1;
                }
            } else {
                for j in i + 1..n {
                    let recur = (0..m).all(|s| (table[classes[i + s] as usize] >> classes[j + s]) & 1 == 1);
                    count += recur as u64;
                }
            }
            count
        });
        Ok(n as u64 + 2 * upper)
    }

    /// `n² C_1(x_0, n, 1/2)` from the number of points in each interval.
    pub fn pair_count(&self, n: usize) -> Result<u64> {
        self.check_len(n)?;
        let mut sizes = [0u64; CLASSES];
        for idx in 0..n {
            sizes[class_of(idx) as usize] += 1;
        }
        let table = rule_table();
        let mut count = 0u64;
        for (c, &sc) in sizes.iter().enumerate() {
            for (c2, &sc2) in sizes.iter().enumerate() {
                if (table[c] >> c2) & 1 == 1 {
                    count += sc * sc2;
                }
            }
        }
        Ok(count)
    }

    /// `C_1(x_0, n, 1/2)` by scanning all pairs.
    pub fn c1_scan(&self, n: usize, strategy: Strategy) -> Result<CorrelationSum> {
        Ok(CorrelationSum {
            count: self.pair_count_scan(n, 1, strategy)?,
            n: n as u64,
        })
    }

    /// `C_1(x_0, n, 1/2)` from interval occupancies.
    pub fn c1(&self, n: usize) -> Result<CorrelationSum> {
        Ok(CorrelationSum {
            count: self.pair_count(n)?,
            n: n as u64,
        })
    }

    /// The piecewise linear map through `f(x_n) = x_{n+1}` for the orbit
    /// points of depth `≤ d`, with `f(y_0) = y_1`, `f(y_1) = y_0`, constant
    /// `x_1` left of `x_0`, constant `y_0` right of `y_1`, and a decreasing
    /// linear piece on `[y_0, x_1]`. Iterating from `x_0` reproduces
    /// `x_0, …, x_{n_d}` exactly.
    pub fn numeric_map(&self, d: usize) -> Result<OscillatingMap> {
        if d > self.depth {
            return Err(Error::DepthOverflow { depth: d, cap: self.depth });
        }
        let n = schedule_len(d);
        let x: Vec<_> = (0..=n).map(Self::position).collect();
        let (y0, y1) = (Self::y0(), Self::y1());
        let mut breakpoints = vec![BigRational::zero()];
        let mut values = vec![x[1].clone()];
        for i in (0..n).step_by(2) {
            breakpoints.push(x[i].clone());
            values.push(x[i + 1].clone());
        }
        breakpoints.push(y0.clone());
        values.push(y1.clone());
        for i in (1..n).step_by(2) {
            breakpoints.push(x[i].clone());
            values.push(x[i + 1].clone());
        }
        breakpoints.push(y1.clone());
        values.push(y0.clone());
        breakpoints.push(BigRational::one());
        values.push(y0.clone());
        let map = PiecewiseLinearMap::new(breakpoints, values)?;
        let slope = (&y1 - &x[2]) / (&y0 - &x[1]);
        // f(t) = y1 + slope (t - y0) = t on [y0, x1]
        let fixed_point = (&y1 - &slope * &y0) / (BigRational::one() - &slope);
        Ok(OscillatingMap {
            map,
            slope,
            fixed_point,
            depth: d,
        })
    }

    /// `C_1` along `n_1, …, n_T` with tail extremes, and the exact values.
    pub fn report(&self) -> Result<OscillatingReport> {
        let ks: Vec<usize> = (1..=self.depth).collect();
        let schedule: Vec<usize> = ks.iter().map(|&k| schedule_len(k)).collect();
        let estimate = estimate_asymptotics(self, 1, &Self::epsilon(), &schedule, DEFAULT_TAIL_FRACTION)?;
        let rows = ks
            .iter()
            .zip(&estimate.values)
            .map(|(&k, (_, c))| C1Row::new(k, &c.ratio()))
            .collect();
        Ok(OscillatingReport {
            depth: self.depth,
            epsilon: format_rational(&Self::epsilon()),
            rows,
            liminf_est: format_rational(&estimate.liminf_est.ratio()),
            limsup_est: format_rational(&estimate.limsup_est.ratio()),
            liminf_below_limsup: estimate.liminf_est < estimate.limsup_est,
            even_limit: "7/10".into(),
            odd_limit: "4/5".into(),
        })
    }
}

/// Builds and validates the families through depth `T ≥ 1`.
pub fn build_oscillating(depth: usize) -> Result<OscillatingInstance> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    if depth > MAX_DEPTH {
        return Err(Error::DepthOverflow { depth, cap: MAX_DEPTH });
    }
    let inst = OscillatingInstance { depth };
    inst.validate()?;
    Ok(inst)
}

/// `C_1(x_0, n_k, 1/2)` in closed form:
/// `2/n² [(2^{k+1} - 1)² + (4/15)(16^{⌈k/2⌉} - 1) + (4^{k+1} - 3·2^{k+1} + 2)/3]`.
pub fn c1_closed_form(k: usize) -> BigRational {
    let n = BigInt::from(schedule_len(k) as u64);
    let two_k1 = num_traits::pow(BigInt::from(2), k + 1);
    let same = (&two_k1 - 1) * (&two_k1 - 1);
    let odd_diag = BigRational::new(
        BigInt::from(4) * (num_traits::pow(BigInt::from(16), k.div_ceil(2)) - 1),
        BigInt::from(15),
    );
    let cross = BigRational::new(&two_k1 * &two_k1 - BigInt::from(3) * &two_k1 + 2, BigInt::from(3));
    (BigRational::from_integer(same) + odd_diag + cross) * BigRational::new(BigInt::from(2), &n * &n)
}

impl CorrelationSource for OscillatingInstance {
    type Scalar = BigRational;

    /// Only `ε = 1/2` is supported: the membership rule is specific to it.
    fn correlation_sum(&self, m: usize, epsilon: &BigRational, n: usize) -> Result<CorrelationSum> {
        if epsilon != &Self::epsilon() {
            return Err(Error::Unsupported("the membership rule only decides ε = 1/2".into()));
        }
        if m == 1 {
            self.c1(n)
        } else {
            Ok(CorrelationSum {
                count: self.pair_count_scan(n, m, Strategy::default())?,
                n: n as u64,
            })
        }
    }
}

/// The interpolating map with its repelling fixed point.
#[derive(Clone, Debug)]
pub struct OscillatingMap {
    pub map: PiecewiseLinearMap<BigRational>,
    /// Slope `γ < -1` on `[y_0, x_1]`.
    pub slope: BigRational,
    /// `z ∈ (y_0, x_1)` with `f(z) = z`.
    pub fixed_point: BigRational,
    pub depth: usize,
}

/// One row of the `C_1` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C1Row {
    pub k: usize,
    pub n: usize,
    pub c1_num: String,
    pub c1_den: String,
    pub c1_float: f64,
    pub parity: String,
}

impl C1Row {
    pub fn new(k: usize, value: &BigRational) -> Self {
        Self {
            k,
            n: schedule_len(k),
            c1_num: value.numer().to_string(),
            c1_den: value.denom().to_string(),
            c1_float: rational_to_f64(value),
            parity: if k % 2 == 0 { "even" } else { "odd" }.into(),
        }
    }
}

/// Closed-form rows for `k = 1..=depth`.
pub fn c1_table(depth: usize) -> Vec<C1Row> {
    (1..=depth).map(|k| C1Row::new(k, &c1_closed_form(k))).collect()
}

/// `k, n, c1_num, c1_den, c1_float, parity`.
pub fn write_c1_csv<W: Write>(rows: &[C1Row], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["k", "n", "c1_num", "c1_den", "c1_float", "parity"])?;
    for row in rows {
        writer.write_record([
            row.k.to_string(),
            row.n.to_string(),
            row.c1_num.clone(),
            row.c1_den.clone(),
            row.c1_float.to_string(),
            row.parity.clone(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillatingReport {
    pub depth: usize,
    pub epsilon: String,
    pub rows: Vec<C1Row>,
    pub liminf_est: String,
    pub limsup_est: String,
    pub liminf_below_limsup: bool,
    pub even_limit: String,
    pub odd_limit: String,
}
