//! Ordered configurations `J_1 < J_2 < … < J_n` of compact real intervals.
//!
//! The central object is the ε-pair set
//!
//! ```text
//! I_n(ε) = {(a, b) : dist(J_a, J_b) < ε < diam(J_a ∪ J_b)}
//! ```
//!
//! with strict comparisons on both sides. For `n ≥ 2` its cardinality never
//! exceeds `4(n - 1)`, and [`extremal_configuration`] attains that bound.
//! This bound is what caps the gap between the two pair counts in
//! [`crate::solenoidal`].

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Scalar};
use num_rational::BigRational;

/// An order-preserving metric on the real line: for `x < y < z` the outer
/// distance strictly dominates both inner ones.
///
/// For such metrics `dist` and `diam` of intervals are attained at endpoints.
pub trait Metric<T> {
    fn distance(&self, x: &T, y: &T) -> T;
}

/// `|x - y|`, the only metric shipped.
#[derive(Clone, Copy, Debug, Default)]
pub struct Euclidean;

impl<T: Scalar> Metric<T> for Euclidean {
    fn distance(&self, x: &T, y: &T) -> T {
        x.dist(y)
    }
}

/// A closed interval `[lo, hi]`; points (`lo == hi`) are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactInterval<T> {
    lo: T,
    hi: T,
}

impl<T: Scalar> CompactInterval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidConfiguration(format!(
                "interval [{lo}, {hi}] has lo > hi"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: T) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn lo(&self) -> &T {
        &self.lo
    }

    pub fn hi(&self) -> &T {
        &self.hi
    }

    pub fn diam(&self) -> T {
        self.hi.clone() - self.lo.clone()
    }

    pub fn contains(&self, x: &T) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// The order relation `J < K`, i.e. `max J < min K`.
    pub fn precedes(&self, other: &Self) -> bool {
        self.hi < other.lo
    }

    /// Midpoint, used when a representative point of the interval is needed.
    pub fn midpoint(&self) -> T {
        (self.lo.clone() + self.hi.clone()) / T::from_int(2)
    }
}

/// `dist(J, K) = min ϱ(x, y)` over `x ∈ J`, `y ∈ K`.
pub fn interval_dist<T: Scalar>(j: &CompactInterval<T>, k: &CompactInterval<T>) -> T {
    interval_dist_in(&Euclidean, j, k)
}

/// `diam(J ∪ K) = max ϱ(x, y)` over `x, y ∈ J ∪ K`.
pub fn union_diam<T: Scalar>(j: &CompactInterval<T>, k: &CompactInterval<T>) -> T {
    union_diam_in(&Euclidean, j, k)
}

pub fn interval_dist_in<T: Scalar, M: Metric<T>>(
    metric: &M,
    j: &CompactInterval<T>,
    k: &CompactInterval<T>,
) -> T {
    if j.hi < k.lo {
        metric.distance(&j.hi, &k.lo)
    } else if k.hi < j.lo {
        metric.distance(&k.hi, &j.lo)
    } else {
        T::zero()
    }
}

pub fn union_diam_in<T: Scalar, M: Metric<T>>(
    metric: &M,
    j: &CompactInterval<T>,
    k: &CompactInterval<T>,
) -> T {
    let lo = if j.lo <= k.lo { &j.lo } else { &k.lo };
    let hi = if j.hi >= k.hi { &j.hi } else { &k.hi };
    metric.distance(lo, hi)
}

/// A strictly ordered, nonempty family of intervals. Indices are 1-based in
/// the public API to match the usual `J_1 … J_n` notation.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration<T> {
    intervals: Vec<CompactInterval<T>>,
}

impl<T: Scalar> Configuration<T> {
    pub fn new(intervals: Vec<CompactInterval<T>>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidConfiguration("no intervals".into()));
        }
        if let Some(a) = intervals.windows(2).position(|w| !w[0].precedes(&w[1])) {
            return Err(Error::InvalidConfiguration(format!(
                "J_{} does not precede J_{}",
                a + 1,
                a + 2
            )));
        }
        Ok(Self { intervals })
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// `J_a` for `1 ≤ a ≤ n`.
    pub fn get(&self, a: usize) -> &CompactInterval<T> {
        &self.intervals[a - 1]
    }

    pub fn intervals(&self) -> &[CompactInterval<T>] {
        &self.intervals
    }
}

/// `I_n(ε)` as a sorted set of 1-based index pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonPairSet<T> {
    pub n: usize,
    pub epsilon: T,
    pub pairs: BTreeSet<(usize, usize)>,
}

impl<T> EpsilonPairSet<T> {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.pairs.contains(&(a, b))
    }

    /// `4(n - 1)` for `n ≥ 2`; for a single interval the set has at most one pair.
    pub fn cardinality_bound(&self) -> usize {
        if self.n >= 2 {
            4 * (self.n - 1)
        } else {
            1
        }
    }

    /// Pairs whose swap is missing.
    pub fn symmetry_violations(&self) -> Vec<(usize, usize)> {
        self.pairs
            .iter()
            .copied()
            .filter(|&(a, b)| !self.contains(b, a))
            .collect()
    }

    /// Triples breaking betweenness closure: `(a,b), (a,d)` present with
    /// `a ≤ b < c < d` but `(a,c)` absent, or the mirrored statement on the
    /// first index. Returned as `(a, c)` for the missing pair.
    pub fn betweenness_violations(&self) -> Vec<(usize, usize)> {
        let mut missing = Vec::new();
        for a in 1..=self.n {
            // Right index: for a fixed left index a, partners ≥ a must be contiguous.
            let right: Vec<usize> = (a..=self.n).filter(|&b| self.contains(a, b)).collect();
            if let (Some(&first), Some(&last)) = (right.first(), right.last()) {
                missing.extend((first..=last).filter(|&c| !self.contains(a, c)).map(|c| (a, c)));
            }
            // Left index: for a fixed right index d = a, partners ≤ d must be contiguous.
            let d = a;
            let left: Vec<usize> = (1..=d).filter(|&b| self.contains(b, d)).collect();
            if let (Some(&first), Some(&last)) = (left.first(), left.last()) {
                missing.extend((first..=last).filter(|&b| !self.contains(b, d)).map(|b| (b, d)));
            }
        }
        missing.sort_unstable();
        missing.dedup();
        missing
    }

    /// Pairs `(b, c)` present although some `(a, d)` with `a < b ≤ c < d` is present.
    pub fn exclusion_violations(&self) -> Vec<(usize, usize)> {
        self.pairs
            .iter()
            .copied()
            .filter(|&(b, c)| b <= c)
            .filter(|&(b, c)| {
                self.pairs
                    .iter()
                    .any(|&(a, d)| a < b && c < d)
            })
            .collect()
    }
}

/// Computes `I_n(ε)` by scanning every index pair.
pub fn epsilon_pairs<T: Scalar>(config: &Configuration<T>, epsilon: &T) -> Result<EpsilonPairSet<T>> {
    if epsilon <= &T::zero() {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let n = config.len();
    let mut pairs = BTreeSet::new();
    for a in 1..=n {
        for b in a..=n {
            let (ja, jb) = (config.get(a), config.get(b));
            if &interval_dist(ja, jb) < epsilon && epsilon < &union_diam(ja, jb) {
                pairs.insert((a, b));
                pairs.insert((b, a));
            }
        }
    }
    Ok(EpsilonPairSet {
        n,
        epsilon: epsilon.clone(),
        pairs,
    })
}

/// A configuration with exactly `4(n - 1)` ε-pairs.
///
/// `J_1 = [0, ε+δ]`, `J_n = [2ε, 3ε+δ]` with `δ = ε/10`, so the outer gap is
/// `ε - δ`; the `n - 2` interior intervals sit in that gap as equal slabs
/// separated by equal spaces.
pub fn extremal_configuration<T: Scalar>(n: usize, epsilon: &T) -> Result<Configuration<T>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "extremal configuration needs n >= 2, got {n}"
        )));
    }
    if epsilon <= &T::zero() {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let eps = epsilon.clone();
    let delta = eps.clone() / T::from_int(10);
    let first_hi = eps.clone() + delta.clone();
    let last_lo = eps.clone() * T::from_int(2);
    let last_hi = eps.clone() * T::from_int(3) + delta.clone();

    let interior = (n - 2) as i64;
    let slab = (eps - delta) / T::from_int(2 * interior + 1);
    let mut intervals = vec![CompactInterval::new(T::zero(), first_hi.clone())?];
    for k in 1..=interior {
        let lo = first_hi.clone() + slab.clone() * T::from_int(2 * k - 1);
        let hi = first_hi.clone() + slab.clone() * T::from_int(2 * k);
        intervals.push(CompactInterval::new(lo, hi)?);
    }
    intervals.push(CompactInterval::new(last_lo, last_hi)?);
    Configuration::new(intervals)
}

/// A configuration with no ε-pairs: `J_k = [3(k-1)ε, 3(k-1)ε + ε/2]`.
///
/// Diameters are `ε/2` and gaps `5ε/2`, far from both thresholds so the
/// result is empty in floating point as well.
pub fn zero_configuration<T: Scalar>(n: usize, epsilon: &T) -> Result<Configuration<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("zero configuration needs n >= 1".into()));
    }
    if epsilon <= &T::zero() {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let half = epsilon.clone() / T::from_int(2);
    let intervals = (0..n as i64)
        .map(|k| {
            let lo = epsilon.clone() * T::from_int(3 * k);
            CompactInterval::new(lo.clone(), lo + half.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    Configuration::new(intervals)
}

/// JSON form of a configuration: `[["lo", "hi"], …]` with exact rational strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConfigurationJson(pub Vec<[String; 2]>);

impl ConfigurationJson {
    pub fn from_config(config: &Configuration<BigRational>) -> Self {
        Self(
            config
                .intervals()
                .iter()
                .map(|j| [format_rational(j.lo()), format_rational(j.hi())])
                .collect(),
        )
    }

    pub fn to_config(&self) -> Result<Configuration<BigRational>> {
        let intervals = self
            .0
            .iter()
            .map(|[lo, hi]| CompactInterval::new(parse_rational(lo)?, parse_rational(hi)?))
            .collect::<Result<Vec<_>>>()?;
        Configuration::new(intervals)
    }
}
