//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.
//!
//! Golden files live in `tests/golden`; regenerate them with
//! `RQA_BLESS_GOLDEN=1 cargo test -p rqa-core --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestRunner};

use rqa_core::constructions::{build_delahaye, build_oscillating, schedule_len};
use rqa_core::constructions::oscillating::{c1_table, write_c1_csv};
use rqa_core::dynamics::{preset, PiecewiseLinearMap, Trajectory};
use rqa_core::finite_omega::{asymptotic_rdet_finite, closed_form_corr_sum, excluded_epsilons, PeriodicOrbitData};
use rqa_core::interval_config::{epsilon_pairs, extremal_configuration, CompactInterval, Configuration};
use rqa_core::report::{write_correlation_csv, write_json, write_ratio_csv, ConfigReport, CorrelationRow, RatioRow};
use rqa_core::rqa::{
    correlation_sum, recurrence_determinism, recurrence_matrix, rqa_det, RqaParams,
};
use rqa_core::solenoidal::{asymptotic_corr_sum, write_counts_csv, AdmissibleSystem};
use rqa_core::rqa::rational_to_f64;
use rqa_core::Strategy as Scan;

type Outcome = std::result::Result<String, String>;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// interval configurations

#[derive(Debug)]
struct RandomConfig {
    config: Configuration<Rational64>,
    epsilon: Rational64,
}

/// Endpoints on a grid of 1/16 so that gaps and diameters often tie with ε.
fn random_corpus(size: usize) -> Vec<RandomConfig> {
    let strategy = (2usize..=50)
        .prop_flat_map(|n| (prop::collection::vec((1i64..=40, 0i64..=40), n), 1i64..=400))
        .prop_map(|(shape, eps)| {
            let mut lo = 0;
            let intervals = shape
                .iter()
                .map(|&(gap, len)| {
                    lo += gap;
                    let iv = CompactInterval::new(Rational64::new(lo, 16), Rational64::new(lo + len, 16)).unwrap();
                    lo += len;
                    iv
                })
                .collect();
            RandomConfig {
                config: Configuration::new(intervals).unwrap(),
                epsilon: Rational64::new(eps, 16),
            }
        });
    let mut runner = TestRunner::deterministic();
    (0..size)
        .map(|_| strategy.new_tree(&mut runner).unwrap().current())
        .collect()
}

/// `I_n(ε)` straight from the endpoints, 0-based.
fn oracle_pairs(config: &Configuration<Rational64>, eps: Rational64) -> Vec<(usize, usize)> {
    let iv = config.intervals();
    let mut out = Vec::new();
    for a in 0..iv.len() {
        for b in 0..iv.len() {
            let (l, r) = if a <= b { (&iv[a], &iv[b]) } else { (&iv[b], &iv[a]) };
            let gap = if a == b { Rational64::zero() } else { *r.lo() - *l.hi() };
            let hull = *r.hi() - *l.lo();
            if gap < eps && eps < hull {
                out.push((a + 1, b + 1));
            }
        }
    }
    out.sort_unstable();
    out
}

fn criterion_1(corpus: &[RandomConfig]) -> Outcome {
    let mut largest = 0;
    for (idx, rc) in corpus.iter().enumerate() {
        let set = epsilon_pairs(&rc.config, &rc.epsilon).map_err(|e| e.to_string())?;
        let n = rc.config.len();
        let got: Vec<_> = set.pairs.iter().copied().collect();
        ensure(got == oracle_pairs(&rc.config, rc.epsilon), || format!("config {idx}: pair set differs from oracle"))?;
        ensure(set.len() <= 4 * (n - 1), || format!("config {idx}: {} pairs > 4(n-1) = {}", set.len(), 4 * (n - 1)))?;
        largest = largest.max(set.len() * 1000 / (4 * (n - 1)));
    }
    for n in 2..=50 {
        for eps in [Rational64::one(), Rational64::new(3, 7)] {
            let config = extremal_configuration(n, &eps).map_err(|e| e.to_string())?;
            let set = epsilon_pairs(&config, &eps).map_err(|e| e.to_string())?;
            ensure(set.len() == 4 * (n - 1), || format!("extremal n={n}: {} pairs", set.len()))?;
        }
    }
    Ok(format!(
        "{} random configs within 4(n-1) (max fill {:.3}), extremal attains 4(n-1) for n in 2..=50",
        corpus.len(),
        largest as f64 / 1000.0
    ))
}

fn criterion_2(corpus: &[RandomConfig]) -> Outcome {
    let mut nonempty = 0;
    for (idx, rc) in corpus.iter().enumerate() {
        let set = epsilon_pairs(&rc.config, &rc.epsilon).map_err(|e| e.to_string())?;
        let (s, b, x) = (
            set.symmetry_violations().len(),
            set.betweenness_violations().len(),
            set.exclusion_violations().len(),
        );
        ensure(s + b + x == 0, || format!("config {idx}: symmetry {s}, betweenness {b}, exclusion {x}"))?;
        nonempty += usize::from(!set.is_empty());
    }
    Ok(format!("0 violations over {} configs ({nonempty} with nonempty I_n)", corpus.len()))
}

// ---------------------------------------------------------------------------
// finite ω-limit sets

fn three_cycle_trajectory(len: usize) -> Trajectory<f64> {
    let map: PiecewiseLinearMap<f64> = preset("three-cycle").unwrap();
    map.iterate(&0.21, len).unwrap()
}

fn exact_three_cycle() -> PeriodicOrbitData<BigRational> {
    PeriodicOrbitData::new(vec![ratio(1, 5), ratio(1, 2), ratio(4, 5)]).unwrap()
}

fn criterion_3() -> Outcome {
    let t = three_cycle_trajectory(5003);
    let orbit = exact_three_cycle();
    // (ε, C_m for m = 1, 2, 3) worked out by hand from the cycle
    type Row = ((i64, i64), [(i64, i64); 3]);
    let expected: [Row; 3] = [
        ((1, 4), [(3, 9), (3, 9), (3, 9)]),
        ((9, 20), [(7, 9), (5, 9), (3, 9)]),
        ((7, 10), [(9, 9), (9, 9), (9, 9)]),
    ];
    let mut worst: f64 = 0.0;
    for ((en, ed), values) in expected {
        let eps = ratio(en, ed);
        for m in 1..=3 {
            let excluded = excluded_epsilons(&orbit, m).map_err(|e| e.to_string())?;
            ensure(!excluded.contains(&eps), || format!("ε={eps} is excluded for m={m}"))?;
            let closed = closed_form_corr_sum(&orbit, m, &eps).map_err(|e| e.to_string())?;
            let (vn, vd) = values[m - 1];
            ensure(closed.value() == ratio(vn, vd), || format!("closed form {} at ε={eps}, m={m}", closed.value()))?;
            let p = RqaParams::new(m, en as f64 / ed as f64, 5000).unwrap();
            let c = correlation_sum(&t, &p).map_err(|e| e.to_string())?.to_f64();
            let err = (c - closed.to_f64()).abs();
            ensure(err <= 0.01, || format!("|C_{m} - closed| = {err} at ε={eps}"))?;
            worst = worst.max(err);
        }
    }
    Ok(format!("max |C_m - closed form| = {worst:.2e} over ε in {{0.25, 0.45, 0.7}}, m in 1..=3"))
}

fn criterion_4() -> Outcome {
    let t = three_cycle_trajectory(5006);
    let orbit = exact_three_cycle();
    ensure(orbit.min_gap() == Some(ratio(3, 10)), || "min gap is not 3/10".into())?;
    let eps = ratio(1, 10);
    let mut lowest: f64 = 1.0;
    for m in 1..=5 {
        let (exact, excluded) = asymptotic_rdet_finite(&orbit, m, &eps).map_err(|e| e.to_string())?;
        ensure(exact.is_one() && !excluded, || format!("closed-form rdet_{m} = {exact}"))?;
        let p = RqaParams::new(m, 0.1, 5000).unwrap();
        let r = recurrence_determinism(&t, &p).map_err(|e| e.to_string())?.to_f64();
        ensure(r >= 0.99, || format!("rdet_{m} = {r}"))?;
        lowest = lowest.min(r);
    }
    Ok(format!("min rdet_m = {lowest:.6} for m in 1..=5, closed form exactly 1"))
}

// ---------------------------------------------------------------------------
// oscillating construction

/// `C_1` at `n_k` recomputed from the closed form with plain integers.
fn c1_oracle(k: u32) -> BigRational {
    let two = BigInt::from(2).pow(k + 1);
    let n = BigInt::from(2) * (&two - 1);
    let sixteen = BigInt::from(16).pow(k.div_ceil(2));
    // 15·3 clears both denominators
    let numer = BigInt::from(45) * (&two - 1) * (&two - 1)
        + BigInt::from(12) * (sixteen - 1)
        + BigInt::from(15) * (&two * &two - BigInt::from(3) * &two + 2);
    BigRational::new(BigInt::from(2) * numer, BigInt::from(45) * &n * &n)
}

fn criterion_5() -> Outcome {
    let inst = build_oscillating(14).map_err(|e| e.to_string())?;
    ensure(c1_oracle(1) == ratio(5, 6), || format!("oracle at k=1 is {}", c1_oracle(1)))?;
    for k in 1..=14 {
        let n = schedule_len(k);
        let scanned = inst.c1_scan(n, Scan::Parallel).map_err(|e| e.to_string())?;
        ensure(scanned.ratio() == c1_oracle(k as u32), || {
            format!("k={k}: scan {} vs closed form {}", scanned.ratio(), c1_oracle(k as u32))
        })?;
    }
    let k1 = inst.c1_scan(schedule_len(1), Scan::Sequential).map_err(|e| e.to_string())?;
    ensure(k1.ratio() == ratio(5, 6), || format!("k=1 gives {}", k1.ratio()))?;
    Ok("pair scan equals the closed form exactly for k in 1..=14, C_1 = 5/6 at k=1".into())
}

fn criterion_6() -> Outcome {
    let even = c1_oracle(14);
    let odd = c1_oracle(13);
    let tol = ratio(1, 1000);
    ensure((&even - ratio(7, 10)).abs() <= tol, || format!("k=14 gives {even}"))?;
    ensure((&odd - ratio(4, 5)).abs() <= tol, || format!("k=13 gives {odd}"))?;
    let report = build_oscillating(14).and_then(|i| i.report()).map_err(|e| e.to_string())?;
    ensure(report.liminf_below_limsup, || {
        format!("liminf_est {} not below limsup_est {}", report.liminf_est, report.limsup_est)
    })?;
    Ok(format!(
        "C_1(k=14) = {:.6}, C_1(k=13) = {:.6}, liminf_est {} < limsup_est {}",
        rational_to_f64(&even),
        rational_to_f64(&odd),
        report.liminf_est,
        report.limsup_est
    ))
}

// ---------------------------------------------------------------------------
// admissible systems

fn criterion_7() -> Outcome {
    let inst = build_delahaye(5, 10).map_err(|e| e.to_string())?;
    let two_thirds = ratio(2, 3);
    let mut checked = 0;
    for k in 1..=8usize {
        for m in 2..=4 {
            for t in k + 1..=8 {
                let c = inst
                    .enumerated_counts(k, m, t, Scan::Parallel, u128::MAX)
                    .map_err(|e| e.to_string())?;
                let scale = 4u64.pow((t - k - 1) as u32);
                let want = (3 << k) * scale;
                let want_m = (2 << k) * scale;
                ensure(c.n1_closed == want && c.nm_closed == want_m, || {
                    format!("k={k} m={m} t={t}: ({}, {}) vs ({want}, {want_m})", c.n1_closed, c.nm_closed)
                })?;
                checked += 1;
            }
            ensure(inst.rdet(k, m).map_err(|e| e.to_string())? == two_thirds, || format!("rdet k={k} m={m}"))?;
            ensure(inst.det(k, m).map_err(|e| e.to_string())? == two_thirds, || format!("DET k={k} m={m}"))?;
        }
    }
    Ok(format!("{checked} enumerated depth counts match (3·2^k, 2^(k+1))·4^(t-k-1); rdet = DET = 2/3"))
}

fn criterion_8() -> Outcome {
    let system = AdmissibleSystem::delahaye(5, 10);
    let depths: Vec<usize> = (1..=10).collect();
    let mut rows = 0;
    for k in 1..=4usize {
        let eps = ratio(1, 5i64.pow(k as u32));
        for m in 1..=4 {
            let counts = asymptotic_corr_sum(&system, m, &eps, &depths).map_err(|e| e.to_string())?;
            for c in &counts {
                ensure(c.n_closed <= c.n_strict, || format!("k={k} m={m} t={}: N° > N", c.t))?;
                let p2 = BigInt::from(c.p_t) * BigInt::from(c.p_t);
                let width = BigRational::new(BigInt::from(c.n_strict - c.n_closed), p2.clone());
                let bound = BigRational::new(BigInt::from(4 * m as u64 * (c.p_t - 1)), p2);
                ensure(width <= bound, || format!("k={k} m={m} t={}: width {width} > {bound}", c.t))?;
                rows += 1;
            }
            let stable: Vec<_> = counts.iter().filter(|c| c.t > k).map(|c| c.lower()).collect();
            ensure(stable.windows(2).all(|w| w[0] == w[1]), || format!("k={k} m={m}: lower end moves with t"))?;
        }
    }
    Ok(format!("{rows} enclosures within 4m(p_t-1)/p_t^2, lower ends constant for t > k"))
}

// ---------------------------------------------------------------------------
// RQA properties

#[derive(Clone, Debug)]
struct Case {
    map: PiecewiseLinearMap<f64>,
    x: f64,
    n: usize,
    m: usize,
    eps: (f64, f64),
    h: usize,
}

fn case_strategy() -> impl Strategy<Value = Case> {
    let map = prop::collection::btree_set(1u32..64, 0..5).prop_flat_map(|interior| {
        let mut bps: Vec<f64> = vec![0.0];
        bps.extend(interior.iter().map(|&b| b as f64 / 64.0));
        bps.push(1.0);
        let len = bps.len();
        prop::collection::vec(0u32..=64, len).prop_map(move |vals| {
            let values = vals.iter().map(|&v| v as f64 / 64.0).collect();
            PiecewiseLinearMap::new(bps.clone(), values).unwrap()
        })
    });
    (map, 0u32..=1000, 1usize..60, 1usize..5, 1u32..=64, 1u32..=64, 0usize..6).prop_map(
        |(map, x, n, m, e1, e2, h)| Case {
            map,
            x: x as f64 / 1000.0,
            n,
            m,
            eps: (e1.min(e2) as f64 / 64.0, e1.max(e2) as f64 / 64.0),
            h,
        },
    )
}

fn brute_count(t: &Trajectory<f64>, n: usize, m: usize, eps: f64) -> u64 {
    let pts = t.points();
    let mut count = 0;
    for i in 0..n {
        for j in 0..n {
            if (0..m).all(|s| (pts[i + s] - pts[j + s]).abs() <= eps) {
                count += 1;
            }
        }
    }
    count
}

fn check_case(c: &Case) -> std::result::Result<(), String> {
    let t = c.map.iterate(&c.x, c.n + c.m + c.h + 1).map_err(|e| e.to_string())?;
    let err = |e: rqa_core::Error| e.to_string();
    let (lo, hi) = c.eps;
    let p = RqaParams::new(c.m, lo, c.n).map_err(err)?;
    let p_hi = RqaParams::new(c.m, hi, c.n).map_err(err)?;
    let p_next = p.with_m(c.m + 1).map_err(err)?;
    let base = correlation_sum(&t, &p).map_err(err)?;
    let n2 = (c.n * c.n) as u64;

    ensure(base.count == brute_count(&t, c.n, c.m, lo), || "count differs from brute force".into())?;
    ensure(base <= correlation_sum(&t, &p_hi).map_err(err)?, || "not monotone in ε".into())?;
    ensure(correlation_sum(&t, &p_next).map_err(err)? <= base, || "not monotone in m".into())?;
    ensure(base.count <= n2, || "C_m above 1".into())?;
    ensure(base.count >= c.n as u64, || "C_m below 1/n".into())?;
    let matrix = recurrence_matrix(&t, &p).map_err(err)?;
    ensure(matrix.popcount() == base.count && matrix.is_symmetric(), || "matrix disagrees with count".into())?;

    let c1 = brute_count(&t, c.n, 1, lo);
    let cm = brute_count(&t, c.n, c.m, lo);
    let cm1 = brute_count(&t, c.n, c.m + 1, lo);
    let det_oracle = BigRational::new(BigInt::from(c.m as u64 * cm) - BigInt::from((c.m as u64 - 1) * cm1), BigInt::from(c1));
    ensure(rqa_det(&t, &p).map_err(err)? == det_oracle, || "DET identity fails".into())?;

    let shifted = correlation_sum(&t.shifted(c.h).map_err(err)?, &p).map_err(err)?;
    let diff = BigRational::new(BigInt::from(shifted.count) - BigInt::from(base.count), BigInt::from(n2));
    ensure(diff.abs() <= ratio(4 * c.h as i64, c.n as i64), || format!("shift h={} moves C_m by {diff}", c.h))?;
    Ok(())
}

fn criterion_9() -> Outcome {
    let cases = 1000;
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&case_strategy(), |case| {
            check_case(&case).map_err(TestCaseError::fail)?;
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{cases} random cases: ε/m monotonicity, range, 1/n floor, matrix, DET identity, shift bound"))
}

// ---------------------------------------------------------------------------
// golden files

fn golden_outputs(strategy: Scan) -> Vec<(&'static str, Vec<u8>)> {
    let mut out = Vec::new();
    let t = three_cycle_trajectory(300);

    let p = RqaParams::new(2, 0.45, 200).unwrap();
    let mut pgm = Vec::new();
    rqa_core::rqa::recurrence_matrix_with(&t, &p, strategy).unwrap().write_pgm(&mut pgm).unwrap();
    out.push(("three_cycle_rplot.pgm", pgm));

    let mut rows = Vec::new();
    let mut rdet_rows = Vec::new();
    for m in 1..=3 {
        for n in [50, 100, 200] {
            let p = RqaParams::new(m, 0.45, n).unwrap();
            let value = rqa_core::rqa::correlation_sum_with(&t, &p, strategy).unwrap();
            rows.push(CorrelationRow { m, n, epsilon: "0.45".into(), value });
            rdet_rows.push(RatioRow {
                m,
                n,
                epsilon: "0.45".into(),
                value: recurrence_determinism(&t, &p).unwrap().ratio(),
            });
        }
    }
    let mut csv = Vec::new();
    write_correlation_csv(&rows, &mut csv).unwrap();
    out.push(("three_cycle_corrsum.csv", csv));
    let mut csv = Vec::new();
    write_ratio_csv("rdet", &rdet_rows, &mut csv).unwrap();
    out.push(("three_cycle_rdet.csv", csv));

    let system = AdmissibleSystem::delahaye(5, 8);
    let eps = ratio(1, 25);
    let counts: Vec<_> = (1..=7)
        .map(|t| rqa_core::solenoidal::count_pairs_with(&system, t, 3, &eps, strategy, u128::MAX).unwrap())
        .collect();
    let mut csv = Vec::new();
    write_counts_csv(&counts, &mut csv).unwrap();
    out.push(("delahaye_counts.csv", csv));

    let mut csv = Vec::new();
    write_c1_csv(&c1_table(14), &mut csv).unwrap();
    out.push(("oscillating_c1.csv", csv));

    let eps = BigRational::one();
    let config = extremal_configuration(6, &eps).unwrap();
    let set = epsilon_pairs(&config, &eps).unwrap();
    let mut json = Vec::new();
    write_json(&ConfigReport::new(&config, &set), &mut json).unwrap();
    out.push(("extremal_config.json", json));

    let report = build_delahaye(5, 8).unwrap().report(2, 3, None).unwrap();
    let mut json = Vec::new();
    write_json(&report, &mut json).unwrap();
    out.push(("delahaye_report.json", json));
    out
}

fn in_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

fn criterion_10() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let reference = in_pool(1, || golden_outputs(Scan::Sequential));
    if std::env::var_os("RQA_BLESS_GOLDEN").is_some() {
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        for (name, bytes) in &reference {
            std::fs::write(dir.join(name), bytes).map_err(|e| e.to_string())?;
        }
    }
    let runs = [
        in_pool(1, || golden_outputs(Scan::Parallel)),
        in_pool(4, || golden_outputs(Scan::Parallel)),
        in_pool(4, || golden_outputs(Scan::Parallel)),
    ];
    for run in &runs {
        ensure(run == &reference, || "outputs depend on the run or the thread count".into())?;
    }
    for (name, bytes) in &reference {
        let stored = std::fs::read(dir.join(name)).map_err(|e| format!("{name}: {e}"))?;
        ensure(&stored == bytes, || format!("{name} differs from the stored golden file"))?;
    }
    Ok(format!("{} golden files byte-identical across runs and 1/4-thread pools", reference.len()))
}

// ---------------------------------------------------------------------------

fn run(id: usize, title: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    let outcome = match (outcome, limit) {
        (Ok(detail), Some(limit)) if elapsed > limit => Err(format!("{detail}; took longer than {limit:?}")),
        (other, _) => other,
    };
    let ok = outcome.is_ok();
    let (status, detail) = match outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("criterion {id:>2} [{status}] {title}: {detail} ({:.2}s)", elapsed.as_secs_f64());
    ok
}

fn main() {
    let corpus = random_corpus(10_000);
    let secs = |s| Some(Duration::from_secs(s));
    let results = [
        run(1, "ε-pair cardinality bound", secs(60), || criterion_1(&corpus)),
        run(2, "betweenness and exclusion", None, || criterion_2(&corpus)),
        run(3, "finite ω-limit correlation sums", secs(30), criterion_3),
        run(4, "recurrence determinism below the gap", None, criterion_4),
        run(5, "oscillating C_1 exactness", None, criterion_5),
        run(6, "oscillating C_1 non-convergence", None, criterion_6),
        run(7, "Delahaye counts and determinism", secs(60), criterion_7),
        run(8, "solenoidal enclosure", None, criterion_8),
        run(9, "RQA properties", None, criterion_9),
        run(10, "golden outputs", None, criterion_10),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
