//! The admissible system with `diam(K_a) = r^{-t}` when `a_0 = 0` and
//! `2r^{-t}` when `a_0 = 1`, for an integer `r ≥ 5`.
//!
//! At `ε_k = r^{-k}` and depth `t = k + 1` exactly `3·2^k` word pairs have
//! union diameter at most `ε_k`, and `2^{k+1}` of them stay that close for
//! two or more steps. Refining to depth `t` multiplies both counts by
//! `4^{t-(k+1)}`, so the recurrence determinism is `2/3` for every `k` and
//! every `m ≥ 2`, and so is `DET_m`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Strategy;
use crate::interval_config::interval_dist;
use crate::scalar::format_rational;
use crate::solenoidal::{self, count_pairs_with, AdmissibleSystem, Word};

/// Depth to which [`build_delahaye`] checks the sibling gap formula.
pub const VALIDATION_DEPTH: usize = 8;

#[derive(Clone, Debug)]
pub struct DelahayeInstance {
    r: u32,
    system: AdmissibleSystem,
}

/// Builds the system for `r ≥ 5` and checks `dist(K_0, K_1) = 1 - 3/r` and
/// `dist(K_{a0}, K_{a1}) = (r-2) r^{-(t+1)}` (`a_0 = 0`) or
/// `2(r-2) r^{-(t+1)}` (`a_0 = 1`) for all `|a| = t` up to a fixed depth.
pub fn build_delahaye(r: u32, depth_cap: usize) -> Result<DelahayeInstance> {
    if r < 5 {
        return Err(Error::InvalidParameter(format!("r must be at least 5, got {r}")));
    }
    let inst = DelahayeInstance {
        r,
        system: AdmissibleSystem::delahaye(r, depth_cap),
    };
    inst.validate(VALIDATION_DEPTH.min(depth_cap))?;
    Ok(inst)
}

/// `(#N_1°, #N_m°)` at `ε_k`, depth `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelahayeCounts {
    pub k: usize,
    pub m: usize,
    pub t: usize,
    pub n1_closed: u64,
    pub nm_closed: u64,
    /// `false` when the counts were scaled up from depth `k + 1`.
    pub enumerated: bool,
}

impl DelahayeInstance {
    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn system(&self) -> &AdmissibleSystem {
        &self.system
    }

    /// `ε_k = r^{-k}`.
    pub fn epsilon(&self, k: usize) -> BigRational {
        BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(self.r), k))
    }

    fn r_pow(&self, e: usize) -> BigRational {
        self.epsilon(e)
    }

    pub fn validate(&self, depth: usize) -> Result<()> {
        let r = BigRational::from_integer(BigInt::from(self.r));
        self.system.check_admissible(depth.max(1))?;
        let k0 = self.system.interval_of_word(&Word::binary("0")?)?;
        let k1 = self.system.interval_of_word(&Word::binary("1")?)?;
        if interval_dist(&k0, &k1) != BigRational::one() - BigRational::from_integer(3.into()) / &r {
            return Err(Error::Construction("dist(K_0, K_1) is not 1 - 3/r".into()));
        }
        let gap = &r - BigRational::from_integer(2.into());
        for t in 1..depth {
            let children = self.system.level(t + 1)?;
            let half = children.intervals.len() / 2;
            for idx in 0..half {
                let a = Word::from_index(idx as u64, &vec![2; t]);
                let expected = &gap * self.r_pow(t + 1) * BigInt::from(if a.digits()[0] == 0 { 1 } else { 2 });
                if interval_dist(&children.intervals[idx], &children.intervals[idx + half]) != expected {
                    return Err(Error::Construction(format!("sibling gap below K_{a} is off")));
                }
            }
        }
        Ok(())
    }

    fn check_km(&self, k: usize, m: usize, t: usize) -> Result<()> {
        if k == 0 || m == 0 {
            return Err(Error::InvalidParameter("k and m must be at least 1".into()));
        }
        if t < k + 1 {
            return Err(Error::InvalidParameter(format!("depth {t} is below k + 1 = {}", k + 1)));
        }
        Ok(())
    }

    /// Exhaustive `(#N_1°, #N_m°)` at `ε_k`, depth `t`.
    pub fn enumerated_counts(&self, k: usize, m: usize, t: usize, strategy: Strategy, limit: u128) -> Result<DelahayeCounts> {
        self.check_km(k, m, t)?;
        let eps = self.epsilon(k);
        let n1 = count_pairs_with(&self.system, t, 1, &eps, strategy, limit)?.n_closed;
        let nm = if m == 1 {
            n1
        } else {
            count_pairs_with(&self.system, t, m, &eps, strategy, limit)?.n_closed
        };
        Ok(DelahayeCounts {
            k,
            m,
            t,
            n1_closed: n1,
            nm_closed: nm,
            enumerated: true,
        })
    }

    /// Counts at depth `k + 1`, multiplied by `4^{t-(k+1)}`.
    pub fn scaled_counts(&self, k: usize, m: usize, t: usize) -> Result<DelahayeCounts> {
        self.check_km(k, m, t)?;
        let base = self.enumerated_counts(k, m, k + 1, Strategy::default(), solenoidal::max_pairs())?;
        let factor = 4u64
            .checked_pow((t - k - 1) as u32)
            .ok_or_else(|| Error::Unsupported(format!("counts at depth {t} overflow 64 bits")))?;
        let scale = |c: u64| {
            c.checked_mul(factor)
                .ok_or_else(|| Error::Unsupported(format!("counts at depth {t} overflow 64 bits")))
        };
        Ok(DelahayeCounts {
            k,
            m,
            t,
            n1_closed: scale(base.n1_closed)?,
            nm_closed: scale(base.nm_closed)?,
            enumerated: false,
        })
    }

    /// Enumerates when depth and the pair guard allow it, scales otherwise.
    pub fn counts(&self, k: usize, m: usize, t: usize) -> Result<DelahayeCounts> {
        self.check_km(k, m, t)?;
        let pairs = 1u128 << (2 * t.min(63));
        if t <= self.system.depth_cap() && pairs <= solenoidal::max_pairs() {
            self.enumerated_counts(k, m, t, Strategy::default(), solenoidal::max_pairs())
        } else {
            self.scaled_counts(k, m, t)
        }
    }

    /// `rdet_m(x, ε_k) = lim_t #N_m° / #N_1°`; the ratio is the same at every
    /// depth `t ≥ k + 1`, so it is read off at `t = k + 1`.
    pub fn rdet(&self, k: usize, m: usize) -> Result<BigRational> {
        let c = self.counts(k, m, k + 1)?;
        Ok(BigRational::new(BigInt::from(c.nm_closed), BigInt::from(c.n1_closed)))
    }

    /// `m·rdet_m - (m-1)·rdet_{m+1}` at `ε_k`.
    pub fn det(&self, k: usize, m: usize) -> Result<BigRational> {
        let mm = BigRational::from_integer(BigInt::from(m));
        let m_less = BigRational::from_integer(BigInt::from(m as u64 - 1));
        Ok(mm * self.rdet(k, m)? - m_less * self.rdet(k, m + 1)?)
    }

    pub fn report(&self, k: usize, m: usize, t: Option<usize>) -> Result<DelahayeReport> {
        let t = t.unwrap_or(k + 1);
        let counts = self.counts(k, m, t)?;
        Ok(DelahayeReport {
            r: self.r,
            k,
            m,
            t,
            epsilon: format_rational(&self.epsilon(k)),
            p_t: 1u64 << t,
            n1_closed: counts.n1_closed,
            nm_closed: counts.nm_closed,
            method: if counts.enumerated { "enumerated" } else { "scaled" }.into(),
            rdet: format_rational(&self.rdet(k, m)?),
            det: format_rational(&self.det(k, m)?),
        })
    }
}

/// `rdet`/`det` are the limits in `t`, as exact fractions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelahayeReport {
    pub r: u32,
    pub k: usize,
    pub m: usize,
    pub t: usize,
    pub epsilon: String,
    pub p_t: u64,
    pub n1_closed: u64,
    pub nm_closed: u64,
    pub method: String,
    pub rdet: String,
    pub det: String,
}
