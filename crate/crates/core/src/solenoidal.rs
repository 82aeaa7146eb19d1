//! Odometer words, admissible interval systems and the pair counts that
//! determine asymptotic correlation sums on solenoidal sets.
//!
//! A word `a = a_0 a_1 … a_{t-1}` over radices `q_0 … q_{t-1}` is added to
//! with carry travelling left to right, so `a_0` is the least significant
//! digit and `10…0` is the integer 1. The words of length `t` form the cyclic
//! group `Z_{p_t}`, `p_t = q_0 ⋯ q_{t-1}`, and [`Word::index`] is that
//! identification.
//!
//! An admissible system assigns nested intervals `K_a` to binary words; the
//! dynamics is `f(K_a) = K_{a+1}`. At depth `t` the two pair sets
//!
//! ```text
//! N_m  = {(a, b) : dist_m(K_a, K_b) < ε}
//! N_m° = {(a, b) : diam_m(K_a, K_b) ≤ ε}
//! ```
//!
//! sandwich the asymptotic correlation sum between `#N_m°/p_t²` and
//! `#N_m/p_t²`, and the gap is at most `4m(p_t - 1)/p_t²`. The orbit point
//! usually written into `N_m(x, t, ε)` does not affect either set, so it is
//! not a parameter here.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::exec::{self, Strategy};
use crate::interval_config::{interval_dist, union_diam, CompactInterval};

/// A word of `A^t` together with the radices it lives over.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    digits: Vec<u32>,
    radices: Vec<u32>,
}

impl Word {
    pub fn new(digits: Vec<u32>, radices: Vec<u32>) -> Result<Self> {
        if digits.len() != radices.len() {
            return Err(Error::InvalidParameter(format!(
                "{} digits but {} radices",
                digits.len(),
                radices.len()
            )));
        }
        if let Some(q) = radices.iter().find(|&&q| q < 2) {
            return Err(Error::InvalidParameter(format!("radix {q} is below 2")));
        }
        if let Some(i) = (0..digits.len()).find(|&i| digits[i] >= radices[i]) {
            return Err(Error::InvalidParameter(format!(
                "digit {} at position {i} exceeds radix {}",
                digits[i], radices[i]
            )));
        }
        Ok(Self { digits, radices })
    }

    /// A binary word from a string such as `"0110"`.
    pub fn binary(text: &str) -> Result<Self> {
        let digits = text
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidParameter(format!("{text:?} is not a binary word"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let radices = vec![2; digits.len()];
        Self::new(digits, radices)
    }

    /// `0^t` over binary radices.
    pub fn zeros(t: usize) -> Self {
        Self {
            digits: vec![0; t],
            radices: vec![2; t],
        }
    }

    /// The word identified with `index` in `Z_{p_t}`.
    pub fn from_index(mut index: u64, radices: &[u32]) -> Self {
        let digits = radices
            .iter()
            .map(|&q| {
                let d = (index % q as u64) as u32;
                index /= q as u64;
                d
            })
            .collect();
        Self {
            digits,
            radices: radices.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn radices(&self) -> &[u32] {
        &self.radices
    }

    pub fn is_binary(&self) -> bool {
        self.radices.iter().all(|&q| q == 2)
    }

    /// `p_t`, the number of words of this length.
    pub fn cycle_len(&self) -> u64 {
        self.radices.iter().map(|&q| q as u64).product()
    }

    /// Position in `Z_{p_t}`; `a_0` is the least significant digit.
    pub fn index(&self) -> u64 {
        self.digits
            .iter()
            .zip(&self.radices)
            .rev()
            .fold(0u64, |acc, (&d, &q)| acc * q as u64 + d as u64)
    }

    /// The prefix `a_0 … a_{len-1}`.
    pub fn prefix(&self, len: usize) -> Self {
        Self {
            digits: self.digits[..len].to_vec(),
            radices: self.radices[..len].to_vec(),
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.radices.iter().all(|&q| q <= 10) {
            for d in &self.digits {
                write!(f, "{d}")?;
            }
            Ok(())
        } else {
            let parts: Vec<_> = self.digits.iter().map(u32::to_string).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

/// Odometer addition `a + k`, carrying from left to right and wrapping
/// modulo `p_t`.
pub fn word_add(a: &Word, k: u64) -> Word {
    let mut digits = a.digits.clone();
    let mut carry = k;
    for (d, &q) in digits.iter_mut().zip(&a.radices) {
        if carry == 0 {
            break;
        }
        let total = *d as u64 + carry;
        *d = (total % q as u64) as u32;
        carry = total / q as u64;
    }
    Word {
        digits,
        radices: a.radices.clone(),
    }
}

/// The itinerary `a, a+1, …, a+(n-1)`: the depth-`|a|` words visited by the
/// orbit of a point of `K_a`.
pub fn symbolic_trajectory(prefix: &Word, n: usize) -> Vec<Word> {
    let mut out = Vec::with_capacity(n);
    let mut current = prefix.clone();
    for _ in 0..n {
        let next = word_add(&current, 1);
        out.push(std::mem::replace(&mut current, next));
    }
    out
}

/// Interval lengths of an admissible system, as a function of the word.
pub trait DiamRule: fmt::Debug + Send + Sync {
    /// `diam(K_a)` for a nonempty binary word `a`.
    fn diam(&self, word: &Word) -> BigRational;

    /// JSON description, if the rule is one of the serializable kinds.
    fn to_json(&self) -> Option<SystemKind> {
        None
    }
}

/// `diam(K_a) = r^{-t}` if `a_0 = 0`, `2 r^{-t}` if `a_0 = 1`, where `t = |a|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DelahayeRule {
    pub r: u32,
}

impl DiamRule for DelahayeRule {
    fn diam(&self, word: &Word) -> BigRational {
        let base = BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(self.r), word.len()));
        if word.digits()[0] == 0 {
            base
        } else {
            base * BigInt::from(2)
        }
    }

    fn to_json(&self) -> Option<SystemKind> {
        Some(SystemKind::Delahaye { r: self.r })
    }
}

/// Serializable system kinds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SystemKind {
    Delahaye { r: u32 },
}

/// `{"kind": "delahaye", "r": 5, "depth_cap": 13}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemJson {
    #[serde(flatten)]
    pub kind: SystemKind,
    pub depth_cap: usize,
}

/// Binary nested intervals `K_a ⊂ [0, 1]`: `K_0` starts at 0, `K_1` ends at 1,
/// a left child keeps its parent's left end, a right child its right end,
/// and the lengths come from the rule.
#[derive(Clone, Debug)]
pub struct AdmissibleSystem {
    rule: Arc<dyn DiamRule>,
    depth_cap: usize,
}

/// All intervals of one depth, indexed by [`Word::index`].
#[derive(Clone, Debug)]
pub struct Level {
    pub t: usize,
    pub intervals: Vec<CompactInterval<BigRational>>,
}

impl AdmissibleSystem {
    pub fn new(rule: Arc<dyn DiamRule>, depth_cap: usize) -> Self {
        Self { rule, depth_cap }
    }

    pub fn delahaye(r: u32, depth_cap: usize) -> Self {
        Self::new(Arc::new(DelahayeRule { r }), depth_cap)
    }

    pub fn from_json(json: &SystemJson) -> Self {
        match json.kind {
            SystemKind::Delahaye { r } => Self::delahaye(r, json.depth_cap),
        }
    }

    pub fn to_json(&self) -> Option<SystemJson> {
        Some(SystemJson {
            kind: self.rule.to_json()?,
            depth_cap: self.depth_cap,
        })
    }

    pub fn depth_cap(&self) -> usize {
        self.depth_cap
    }

    pub fn rule(&self) -> &dyn DiamRule {
        self.rule.as_ref()
    }

    fn check_depth(&self, depth: usize) -> Result<()> {
        if depth > self.depth_cap {
            return Err(Error::DepthOverflow {
                depth,
                cap: self.depth_cap,
            });
        }
        Ok(())
    }

    fn child(parent: &CompactInterval<BigRational>, digit: u32, diam: BigRational) -> Result<CompactInterval<BigRational>> {
        if digit == 0 {
            let lo = parent.lo().clone();
            CompactInterval::new(lo.clone(), lo + diam)
        } else {
            let hi = parent.hi().clone();
            CompactInterval::new(hi.clone() - diam, hi)
        }
    }

    /// `K_a` by descent from `[0, 1]`.
    pub fn interval_of_word(&self, word: &Word) -> Result<CompactInterval<BigRational>> {
        self.check_depth(word.len())?;
        if !word.is_binary() {
            return Err(Error::Unsupported("admissible systems are binary".into()));
        }
        let mut current = CompactInterval::new(BigRational::zero(), BigRational::one())?;
        for len in 1..=word.len() {
            let prefix = word.prefix(len);
            current = Self::child(&current, word.digits()[len - 1], self.rule.diam(&prefix))?;
        }
        Ok(current)
    }

    /// Every `K_a` with `|a| = t`, in index order.
    pub fn level(&self, t: usize) -> Result<Level> {
        self.check_depth(t)?;
        if t == 0 {
            return Ok(Level {
                t,
                intervals: vec![CompactInterval::new(BigRational::zero(), BigRational::one())?],
            });
        }
        let mut intervals = vec![CompactInterval::new(BigRational::zero(), BigRational::one())?];
        for depth in 1..=t {
            let half = intervals.len() as u64;
            let radices = vec![2u32; depth];
            let next = (0..2 * half)
                .map(|idx| {
                    let word = Word::from_index(idx, &radices);
                    let parent = &intervals[(idx % half) as usize];
                    Self::child(parent, word.digits()[depth - 1], self.rule.diam(&word))
                })
                .collect::<Result<Vec<_>>>()?;
            intervals = next;
        }
        Ok(Level { t, intervals })
    }

    /// `ν_t = max diam K_a` over words of length `t`.
    pub fn max_diam(&self, t: usize) -> Result<BigRational> {
        let level = self.level(t)?;
        Ok(level
            .intervals
            .iter()
            .map(CompactInterval::diam)
            .max()
            .expect("nonempty level"))
    }

    /// Checks the admissibility conditions down to `depth`: every interval is
    /// nondegenerate, siblings satisfy `K_{a0} < K_{a1}` inside their parent,
    /// and `ν_t` strictly decreases.
    pub fn check_admissible(&self, depth: usize) -> Result<()> {
        let mut previous_nu: Option<BigRational> = None;
        for t in 1..=depth {
            let level = self.level(t)?;
            let half = level.intervals.len() / 2;
            for (idx, k) in level.intervals.iter().enumerate() {
                if !k.diam().is_positive() {
                    return Err(Error::Construction(format!("degenerate interval at depth {t}, index {idx}")));
                }
            }
            for idx in 0..half {
                let (left, right) = (&level.intervals[idx], &level.intervals[idx + half]);
                if !left.precedes(right) {
                    return Err(Error::Construction(format!(
                        "children of index {idx} at depth {t} overlap"
                    )));
                }
            }
            let nu = level.intervals.iter().map(CompactInterval::diam).max().expect("nonempty");
            if let Some(prev) = &previous_nu {
                if &nu >= prev {
                    return Err(Error::Construction(format!("ν_{t} does not decrease")));
                }
            }
            previous_nu = Some(nu);
        }
        Ok(())
    }

    /// A point of the Cantor set `Q` and its first `n` iterates: the orbit of
    /// `0`, whose `i`-th point is the left end of `K_{0^depth + i}`.
    /// Requires `n ≤ 2^depth`.
    pub fn orbit_of_zero(&self, depth: usize, n: usize) -> Result<Trajectory<BigRational>> {
        let level = self.level(depth)?;
        if n > level.intervals.len() {
            return Err(Error::InvalidParameter(format!(
                "orbit length {n} exceeds 2^{depth}; refine the depth"
            )));
        }
        Trajectory::from_points(level.intervals[..n].iter().map(|k| k.lo().clone()).collect())
    }
}

/// Reads `RQA_MAX_PAIRS`, defaulting to `2^26`.
pub fn max_pairs() -> u128 {
    std::env::var("RQA_MAX_PAIRS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_PAIRS)
}

pub const DEFAULT_MAX_PAIRS: u128 = 1 << 26;

fn shifted(a: &Word, i: u64) -> Word {
    word_add(a, i)
}

fn check_pair(a: &Word, b: &Word, m: usize) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter("words of different lengths".into()));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("window m must be at least 1".into()));
    }
    Ok(())
}

/// `dist_m(K_a, K_b) = max_{i < m} dist(K_{a+i}, K_{b+i})`.
pub fn dist_m_words(s: &AdmissibleSystem, a: &Word, b: &Word, m: usize) -> Result<BigRational> {
    check_pair(a, b, m)?;
    let window = (m as u64).min(a.cycle_len());
    let mut best = BigRational::zero();
    for i in 0..window {
        let d = interval_dist(&s.interval_of_word(&shifted(a, i))?, &s.interval_of_word(&shifted(b, i))?);
        best = best.max(d);
    }
    Ok(best)
}

/// `diam_m(K_a, K_b) = max_{i < m} diam(K_{a+i} ∪ K_{b+i})`.
pub fn diam_m_words(s: &AdmissibleSystem, a: &Word, b: &Word, m: usize) -> Result<BigRational> {
    check_pair(a, b, m)?;
    let window = (m as u64).min(a.cycle_len());
    let mut best = BigRational::zero();
    for i in 0..window {
        let d = union_diam(&s.interval_of_word(&shifted(a, i))?, &s.interval_of_word(&shifted(b, i))?);
        best = best.max(d);
    }
    Ok(best)
}

/// `#N_m` and `#N_m°` at depth `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolenoidalCounts {
    pub t: usize,
    pub p_t: u64,
    pub m: usize,
    pub epsilon: BigRational,
    /// `#{(a, b) : dist_m < ε}`.
    pub n_strict: u64,
    /// `#{(a, b) : diam_m ≤ ε}`.
    pub n_closed: u64,
}

impl SolenoidalCounts {
    fn pairs(&self) -> BigInt {
        BigInt::from(self.p_t) * BigInt::from(self.p_t)
    }

    /// `#N_m° / p_t²`, a lower bound for the asymptotic correlation sum.
    pub fn lower(&self) -> BigRational {
        BigRational::new(BigInt::from(self.n_closed), self.pairs())
    }

    /// `#N_m / p_t²`, an upper bound.
    pub fn upper(&self) -> BigRational {
        BigRational::new(BigInt::from(self.n_strict), self.pairs())
    }

    pub fn width(&self) -> BigRational {
        self.upper() - self.lower()
    }

    /// `4m(p_t - 1) / p_t²`.
    pub fn width_bound(&self) -> BigRational {
        BigRational::new(
            BigInt::from(4 * self.m as u64) * BigInt::from(self.p_t - 1),
            self.pairs(),
        )
    }
}

/// Endpoints of one level as integers over a common denominator.
struct ScaledLevel {
    lo: Vec<i128>,
    hi: Vec<i128>,
    /// largest scaled length strictly below ε
    strict_max: i128,
    /// largest scaled length at most ε
    closed_max: i128,
}

impl ScaledLevel {
    fn new(level: &Level, epsilon: &BigRational) -> Result<Self> {
        let scale = level
            .intervals
            .iter()
            .flat_map(|k| [k.lo().denom(), k.hi().denom()])
            .fold(BigInt::one(), |acc, d| acc.lcm(d));
        let to_i128 = |r: &BigRational| -> Result<i128> {
            (r * &scale)
                .to_integer()
                .to_i128()
                .ok_or_else(|| Error::Unsupported("interval endpoints exceed 128-bit scaling".into()))
        };
        let lo = level.intervals.iter().map(|k| to_i128(k.lo())).collect::<Result<Vec<_>>>()?;
        let hi = level.intervals.iter().map(|k| to_i128(k.hi())).collect::<Result<Vec<_>>>()?;
        // lengths live in [0, scale]; clamp the thresholds into that range
        let scaled_eps = epsilon * &scale;
        let cap = scale.clone() + BigInt::one();
        let clamp = |v: BigInt| v.min(cap.clone()).max(-BigInt::one()).to_i128().expect("clamped");
        let strict_max = clamp(scaled_eps.ceil().to_integer() - BigInt::one());
        let closed_max = clamp(scaled_eps.floor().to_integer());
        Ok(Self {
            lo,
            hi,
            strict_max,
            closed_max,
        })
    }

    /// `(dist_m < ε, diam_m ≤ ε)` for the pair `(a, b)`.
    #[inline]
    fn classify(&self, a: usize, b: usize, window: usize) -> (bool, bool) {
        let p = self.lo.len();
        let (mut strict, mut closed) = (true, true);
        for i in 0..window {
            let (x, y) = ((a + i) % p, (b + i) % p);
            let (lo_x, hi_x, lo_y, hi_y) = (self.lo[x], self.hi[x], self.lo[y], self.hi[y]);
            if strict {
                let gap = if hi_x < lo_y {
                    lo_y - hi_x
                } else if hi_y < lo_x {
                    lo_x - hi_y
                } else {
                    0
                };
                strict = gap <= self.strict_max;
            }
            if closed {
                closed = hi_x.max(hi_y) - lo_x.min(lo_y) <= self.closed_max;
            }
            if !strict && !closed {
                break;
            }
        }
        (strict, closed)
    }
}

/// Exhaustive scan of `A^t × A^t`, guarded by [`max_pairs`].
pub fn count_pairs(s: &AdmissibleSystem, t: usize, m: usize, epsilon: &BigRational) -> Result<SolenoidalCounts> {
    count_pairs_with(s, t, m, epsilon, Strategy::default(), max_pairs())
}

pub fn count_pairs_with(
    s: &AdmissibleSystem,
    t: usize,
    m: usize,
    epsilon: &BigRational,
    strategy: Strategy,
    limit: u128,
) -> Result<SolenoidalCounts> {
    if m == 0 {
        return Err(Error::InvalidParameter("window m must be at least 1".into()));
    }
    if !epsilon.is_positive() {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    s.check_depth(t)?;
    let p_t = 1u64 << t;
    let pairs = (p_t as u128) * (p_t as u128);
    if pairs > limit {
        return Err(Error::ResourceGuard { pairs, limit });
    }
    let level = s.level(t)?;
    let scaled = ScaledLevel::new(&level, epsilon)?;
    let p = p_t as usize;
    let window = m.min(p);
    // both relations are symmetric: scan b > a and double
    let (upper_strict, upper_closed) = exec::sum_rows2(p, strategy, |a| {
        (a + 1..p).fold((0, 0), |(s_acc, c_acc), b| {
            let (strict, closed) = scaled.classify(a, b, window);
            (s_acc + strict as u64, c_acc + closed as u64)
        })
    });
    let diag_closed = (0..p).filter(|&a| scaled.classify(a, a, window).1).count() as u64;
    Ok(SolenoidalCounts {
        t,
        p_t,
        m,
        epsilon: epsilon.clone(),
        n_strict: p_t + 2 * upper_strict,
        n_closed: diag_closed + 2 * upper_closed,
    })
}

/// The enclosures `[#N_m°/p_t², #N_m/p_t²]` along a depth schedule. Their
/// lower ends converge to the asymptotic correlation sum.
pub fn asymptotic_corr_sum(
    s: &AdmissibleSystem,
    m: usize,
    epsilon: &BigRational,
    depths: &[usize],
) -> Result<Vec<SolenoidalCounts>> {
    depths.iter().map(|&t| count_pairs(s, t, m, epsilon)).collect()
}

/// `t, p_t, m, epsilon_num, epsilon_den, N_strict, N_closed, lower, upper`;
/// `lower`/`upper` as exact fractions.
pub fn write_counts_csv<W: Write>(rows: &[SolenoidalCounts], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "t", "p_t", "m", "epsilon_num", "epsilon_den", "N_strict", "N_closed", "lower", "upper",
    ])?;
    for c in rows {
        writer.write_record([
            c.t.to_string(),
            c.p_t.to_string(),
            c.m.to_string(),
            c.epsilon.numer().to_string(),
            c.epsilon.denom().to_string(),
            c.n_strict.to_string(),
            c.n_closed.to_string(),
            crate::format_rational(&c.lower()),
            crate::format_rational(&c.upper()),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
