//! Asymptotic correlation sums for points attracted to a periodic orbit.
//!
//! If `f^{pn+i}(x) → y_i` for a cycle `y_0, …, y_{p-1}`, then for every
//! `ε > 0` outside the finite set of Bowen distances between cycle points
//!
//! ```text
//! c_m(x, ε) = #{(i, j) ∈ Z_p × Z_p : ϱ_m(y_i, y_j) ≤ ε} / p²
//! ```
//!
//! At the excluded thresholds the limit need not exist, so results computed
//! there carry a flag instead of being presented as asymptotic values.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::dynamics::PeriodicStructure;
use crate::error::{Error, Result};
use crate::scalar::{format_rational, Scalar};

/// A cycle `y_0, …, y_{p-1}` in dynamical order (`y_{i+1} = f(y_i)`).
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicOrbitData<T> {
    points: Vec<T>,
}

impl<T: Scalar> PeriodicOrbitData<T> {
    pub fn new(points: Vec<T>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("a periodic orbit needs at least one point".into()));
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(Error::InvalidParameter(format!(
                        "orbit points {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(Self { points })
    }

    /// Adapts a detected cycle so that `y_i` is the limit of `f^{pn+i}(x)`:
    /// the cycle starts at trajectory index `preperiod`, so it is rotated by
    /// `preperiod mod p`. Counts do not depend on the rotation.
    pub fn from_detected(detected: &PeriodicStructure<T>) -> Result<Self> {
        let p = detected.period;
        let k = detected.preperiod % p;
        let points = (0..p).map(|i| detected.orbit[(i + p - k) % p].clone()).collect();
        Self::new(points)
    }

    pub fn period(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    /// Smallest distance between distinct cycle points; `None` for a fixed point.
    pub fn min_gap(&self) -> Option<T> {
        let p = self.period();
        (0..p)
            .flat_map(|i| (i + 1..p).map(move |j| (i, j)))
            .map(|(i, j)| self.points[i].dist(&self.points[j]))
            .reduce(|a, b| if b < a { b } else { a })
    }
}

/// `ϱ_m(y_i, y_j) = max_{s < m} |y_{i+s} - y_{j+s}|`, indices mod `p`.
pub fn bowen_orbit_distance<T: Scalar>(o: &PeriodicOrbitData<T>, i: usize, j: usize, m: usize) -> Result<T> {
    let p = o.period();
    if i >= p || j >= p {
        return Err(Error::InvalidParameter(format!("orbit index out of range 0..{p}")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("window m must be at least 1".into()));
    }
    // the window repeats after p steps
    let mut best = T::zero();
    for s in 0..m.min(p) {
        let d = o.points[(i + s) % p].dist(&o.points[(j + s) % p]);
        if d > best {
            best = d;
        }
    }
    Ok(best)
}

/// The asymptotic correlation sum as `count / p²`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitCorrelation<T> {
    pub count: u64,
    pub p: usize,
    pub m: usize,
    pub epsilon: T,
    /// True when ε is one of the excluded Bowen distances; the limit is then
    /// not guaranteed to exist and `value` is only the orbit pair density.
    pub excluded: bool,
}

impl<T: Scalar> OrbitCorrelation<T> {
    pub fn value(&self) -> BigRational {
        BigRational::new(BigInt::from(self.count), BigInt::from(self.p as u64 * self.p as u64))
    }

    pub fn to_f64(&self) -> f64 {
        self.count as f64 / (self.p as f64 * self.p as f64)
    }
}

/// Counts `ϱ_m(y_i, y_j) ≤ ε` over all `p²` index pairs.
pub fn closed_form_corr_sum<T: Scalar>(o: &PeriodicOrbitData<T>, m: usize, epsilon: &T) -> Result<OrbitCorrelation<T>> {
    if epsilon <= &T::zero() {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let p = o.period();
    let mut count = 0;
    let mut excluded = false;
    for i in 0..p {
        for j in 0..p {
            let d = bowen_orbit_distance(o, i, j, m)?;
            if &d <= epsilon {
                count += 1;
            }
            excluded |= &d == epsilon;
        }
    }
    Ok(OrbitCorrelation {
        count,
        p,
        m,
        epsilon: epsilon.clone(),
        excluded,
    })
}

/// The nonzero Bowen distances between cycle points, sorted and deduplicated.
pub fn excluded_epsilons<T: Scalar>(o: &PeriodicOrbitData<T>, m: usize) -> Result<Vec<T>> {
    let p = o.period();
    let mut out: Vec<T> = Vec::new();
    for i in 0..p {
        for j in 0..p {
            let d = bowen_orbit_distance(o, i, j, m)?;
            if !d.is_zero() {
                out.push(d);
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).expect("comparable distances"));
    out.dedup();
    Ok(out)
}

/// `c_m / c_1` from the closed form, with the flag set if either count sits
/// on an excluded threshold. Below the smallest spatial gap both counts are
/// exactly `p` and the ratio is 1.
pub fn asymptotic_rdet_finite<T: Scalar>(o: &PeriodicOrbitData<T>, m: usize, epsilon: &T) -> Result<(BigRational, bool)> {
    let c_m = closed_form_corr_sum(o, m, epsilon)?;
    let c_1 = closed_form_corr_sum(o, 1, epsilon)?;
    if o.min_gap().is_none_or(|gap| epsilon < &gap) {
        assert_eq!(c_1.count, o.period() as u64, "only diagonal pairs are close below the gap");
        assert_eq!(c_m.count, o.period() as u64, "only diagonal pairs are close below the gap");
    }
    let ratio = BigRational::new(BigInt::from(c_m.count), BigInt::from(c_1.count));
    Ok((ratio, c_m.excluded || c_1.excluded))
}

/// `{p, orbit, m, epsilon, c_m_num, c_m_den, excluded}`; numbers as exact strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub p: usize,
    pub orbit: Vec<String>,
    pub m: usize,
    pub epsilon: String,
    pub c_m_num: String,
    pub c_m_den: String,
    /// Excluded thresholds for this `m`.
    pub excluded: Vec<String>,
}

impl OrbitReport {
    pub fn new(o: &PeriodicOrbitData<BigRational>, m: usize, epsilon: &BigRational) -> Result<Self> {
        let c = closed_form_corr_sum(o, m, epsilon)?;
        let value = c.value();
        Ok(Self {
            p: o.period(),
            orbit: o.points().iter().map(format_rational).collect(),
            m,
            epsilon: format_rational(epsilon),
            c_m_num: value.numer().to_string(),
            c_m_den: value.denom().to_string(),
            excluded: excluded_epsilons(o, m)?.iter().map(format_rational).collect(),
        })
    }
}

/// Rational copy of a floating orbit, for reports. Each point is the exact
/// binary value of the `f64`.
pub fn orbit_to_rational(o: &PeriodicOrbitData<f64>) -> Result<PeriodicOrbitData<BigRational>> {
    let points = o
        .points()
        .iter()
        .map(|&x| BigRational::from_float(x).ok_or_else(|| Error::InvalidParameter(format!("{x} is not finite"))))
        .collect::<Result<Vec<_>>>()?;
    PeriodicOrbitData::new(points)
}

/// Distinct Bowen distances as a set, for membership checks.
pub fn excluded_set(o: &PeriodicOrbitData<BigRational>, m: usize) -> Result<BTreeSet<BigRational>> {
    Ok(excluded_epsilons(o, m)?.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{detect_periodic, PiecewiseLinearMap};
    use crate::rqa::{correlation_sum, RqaParams};
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn two_cycle() -> PeriodicOrbitData<BigRational> {
        PeriodicOrbitData::new(vec![q(1, 4), q(3, 4)]).unwrap()
    }

    fn three_cycle() -> PeriodicOrbitData<BigRational> {
        PeriodicOrbitData::new(vec![q(1, 5), q(1, 2), q(4, 5)]).unwrap()
    }

    #[test]
    fn orbit_validation() {
        assert!(PeriodicOrbitData::<f64>::new(vec![]).is_err());
        assert!(PeriodicOrbitData::new(vec![0.5, 0.5]).is_err());
        assert_eq!(three_cycle().min_gap(), Some(q(3, 10)));
        assert_eq!(PeriodicOrbitData::new(vec![q(1, 3)]).unwrap().min_gap(), None);
    }

    #[test]
    fn bowen_examples() {
        let o = two_cycle();
        assert_eq!(bowen_orbit_distance(&o, 1, 1, 4).unwrap(), q(0, 1));
        assert_eq!(bowen_orbit_distance(&o, 0, 1, 1).unwrap(), q(1, 2));
        assert_eq!(bowen_orbit_distance(&three_cycle(), 0, 1, 2).unwrap(), q(3, 10));
        assert_eq!(bowen_orbit_distance(&three_cycle(), 0, 1, 3).unwrap(), q(3, 5));
        assert!(bowen_orbit_distance(&o, 2, 0, 1).is_err());
        assert!(bowen_orbit_distance(&o, 0, 0, 0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let fixed = PeriodicOrbitData::new(vec![q(1, 3)]).unwrap();
        for eps in [q(1, 1000), q(1, 2), q(2, 1)] {
            assert_eq!(closed_form_corr_sum(&fixed, 3, &eps).unwrap().value(), BigRational::one());
        }
        let o = two_cycle();
        assert_eq!(closed_form_corr_sum(&o, 1, &q(3, 10)).unwrap().value(), q(1, 2));
        assert_eq!(closed_form_corr_sum(&o, 1, &q(3, 5)).unwrap().value(), q(1, 1));
        let tie = closed_form_corr_sum(&o, 1, &q(1, 2)).unwrap();
        assert!(tie.excluded);
        assert!(!closed_form_corr_sum(&o, 1, &q(3, 5)).unwrap().excluded);
        assert!(closed_form_corr_sum(&o, 1, &q(0, 1)).is_err());

        let o3 = three_cycle();
        let c = |m, eps| closed_form_corr_sum(&o3, m, &eps).unwrap().value();
        assert_eq!(c(1, q(1, 4)), q(1, 3));
        assert_eq!(c(1, q(9, 20)), q(7, 9));
        assert_eq!(c(2, q(9, 20)), q(5, 9));
        assert_eq!(c(3, q(9, 20)), q(1, 3));
        assert_eq!(c(2, q(7, 10)), q(1, 1));
    }

    #[test]
    fn excluded_examples() {
        let fixed = PeriodicOrbitData::new(vec![q(1, 3)]).unwrap();
        assert!(excluded_epsilons(&fixed, 2).unwrap().is_empty());
        assert_eq!(excluded_epsilons(&two_cycle(), 1).unwrap(), vec![q(1, 2)]);
        assert_eq!(excluded_epsilons(&three_cycle(), 1).unwrap(), vec![q(3, 10), q(3, 5)]);
        assert_eq!(excluded_epsilons(&three_cycle(), 2).unwrap(), vec![q(3, 10), q(3, 5)]);
        assert!(excluded_set(&three_cycle(), 1).unwrap().contains(&q(3, 5)));
    }

    #[test]
    fn rdet_examples() {
        for o in [two_cycle(), three_cycle()] {
            for m in 1..6 {
                assert_eq!(asymptotic_rdet_finite(&o, m, &q(1, 10)).unwrap(), (BigRational::one(), false));
            }
        }
        assert_eq!(asymptotic_rdet_finite(&two_cycle(), 2, &q(3, 5)).unwrap().0, BigRational::one());
        assert_eq!(asymptotic_rdet_finite(&three_cycle(), 2, &q(9, 20)).unwrap().0, q(5, 7));
        assert!(asymptotic_rdet_finite(&two_cycle(), 1, &q(1, 2)).unwrap().1);
    }

    #[test]
    fn rotation_of_detected_cycle() {
        let detected = PeriodicStructure {
            preperiod: 4,
            period: 3,
            orbit: vec![q(1, 2), q(4, 5), q(1, 5)],
        };
        // trajectory index 4 ≡ 1 (mod 3) holds 1/2, so y_1 = 1/2
        let o = PeriodicOrbitData::from_detected(&detected).unwrap();
        assert_eq!(o.points(), three_cycle().points());
        let shifted = PeriodicOrbitData::new(detected.orbit.clone()).unwrap();
        for m in 1..4 {
            for eps in [q(1, 4), q(9, 20), q(7, 10)] {
                assert_eq!(
                    closed_form_corr_sum(&o, m, &eps).unwrap().count,
                    closed_form_corr_sum(&shifted, m, &eps).unwrap().count
                );
            }
        }
    }

    #[test]
    fn report_json() {
        let report = OrbitReport::new(&three_cycle(), 2, &q(9, 20)).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert_eq!(
            json,
            r#"{"p":3,"orbit":["1/5","1/2","4/5"],"m":2,"epsilon":"9/20","c_m_num":"5","c_m_den":"9","excluded":["3/10","3/5"]}"#
        );
    }

    /// Slope 1/2 toward the cycle 0.2 → 0.5 → 0.8 on its three pieces.
    fn three_cycle_map() -> PiecewiseLinearMap<f64> {
        PiecewiseLinearMap::new(
            vec![0.0, 0.1, 0.3, 0.4, 0.6, 0.7, 0.9, 1.0],
            vec![0.45, 0.45, 0.55, 0.75, 0.85, 0.15, 0.25, 0.25],
        )
        .unwrap()
    }

    #[test]
    fn finite_sums_approach_closed_form() {
        let map = three_cycle_map();
        let t = map.iterate(&0.21, 2000).unwrap();
        let detected = detect_periodic(&t, &1e-12).unwrap();
        assert_eq!(detected.period, 3);
        let o = PeriodicOrbitData::from_detected(&detected).unwrap();
        for h in [0, 5, 17] {
            let shifted = t.shifted(h).unwrap();
            for m in 1..=3 {
                for eps in [0.25, 0.45, 0.7] {
                    let finite = correlation_sum(&shifted, &RqaParams::new(m, eps, 1500).unwrap()).unwrap();
                    let closed = closed_form_corr_sum(&o, m, &eps).unwrap();
                    assert!(!closed.excluded);
                    assert!((finite.to_f64() - closed.to_f64()).abs() <= 0.01, "h={h} m={m} eps={eps}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn monotone_in_m_and_epsilon(
            pts in proptest::collection::btree_set(0i64..200, 1..7),
            seed in 0usize..720,
            e1 in 1i64..200,
            e2 in 1i64..200,
            m in 1usize..6,
        ) {
            let mut points: Vec<BigRational> = pts.into_iter().map(|v| q(v, 200)).collect();
            // scramble the dynamical order deterministically
            let len = points.len();
            points.rotate_left(seed % len);
            if len > 2 {
                points.swap(0, seed % (len - 1) + 1);
            }
            let o = PeriodicOrbitData::new(points).unwrap();
            let (lo, hi) = (q(e1.min(e2), 200), q(e1.max(e2), 200));
            let c = |m, e: &BigRational| closed_form_corr_sum(&o, m, e).unwrap().value();
            prop_assert!(c(m, &lo) <= c(m, &hi));
            prop_assert!(c(m + 1, &lo) <= c(m, &lo));
            prop_assert!(c(m, &lo) >= BigRational::new(1.into(), BigInt::from(o.period() as u64)));
            let ex = excluded_epsilons(&o, m).unwrap();
            prop_assert!(!ex.iter().any(|e| e.is_zero()));
            prop_assert_eq!(closed_form_corr_sum(&o, m, &lo).unwrap().excluded, ex.contains(&lo));
        }
    }
}
