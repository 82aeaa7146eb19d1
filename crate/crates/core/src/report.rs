//! Tabular and JSON outputs shared by the command-line tool.
//!
//! All writers are deterministic: rows follow the input order, numbers are
//! rendered exactly, and nothing depends on the clock or the thread count.

use std::io::Write;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::interval_config::{ConfigurationJson, Configuration, EpsilonPairSet};
use crate::rqa::{rational_to_f64, CorrelationSum};
use crate::scalar::format_rational;

/// Pretty JSON followed by a newline.
pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// `C_m(x, n, ε)` at one `(m, n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationRow {
    pub m: usize,
    pub n: usize,
    pub epsilon: String,
    pub value: CorrelationSum,
}

/// `m, n, epsilon, count, c_num, c_den, c_float`.
pub fn write_correlation_csv<W: Write>(rows: &[CorrelationRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["m", "n", "epsilon", "count", "c_num", "c_den", "c_float"])?;
    for row in rows {
        let r = row.value.ratio();
        writer.write_record([
            row.m.to_string(),
            row.n.to_string(),
            row.epsilon.clone(),
            row.value.count.to_string(),
            r.numer().to_string(),
            r.denom().to_string(),
            row.value.to_f64().to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// One exact ratio, such as `rdet_m` or `DET_m`, at `(m, n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub m: usize,
    pub n: usize,
    pub epsilon: String,
    pub value: BigRational,
}

/// `m, n, epsilon, <name>_num, <name>_den, <name>_float`.
pub fn write_ratio_csv<W: Write>(name: &str, rows: &[RatioRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "m".to_string(),
        "n".to_string(),
        "epsilon".to_string(),
        format!("{name}_num"),
        format!("{name}_den"),
        format!("{name}_float"),
    ])?;
    for row in rows {
        writer.write_record([
            row.m.to_string(),
            row.n.to_string(),
            row.epsilon.clone(),
            row.value.numer().to_string(),
            row.value.denom().to_string(),
            rational_to_f64(&row.value).to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// `I_n(ε)` of a configuration, with the bound and the structural checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigReport {
    pub n: usize,
    pub epsilon: String,
    pub intervals: ConfigurationJson,
    pub pairs: Vec<[usize; 2]>,
    pub cardinality: usize,
    pub bound: usize,
    pub within_bound: bool,
    pub symmetry_violations: usize,
    pub betweenness_violations: usize,
    pub exclusion_violations: usize,
}

impl ConfigReport {
    pub fn new(config: &Configuration<BigRational>, set: &EpsilonPairSet<BigRational>) -> Self {
        Self {
            n: set.n,
            epsilon: format_rational(&set.epsilon),
            intervals: ConfigurationJson::from_config(config),
            pairs: set.pairs.iter().map(|&(a, b)| [a, b]).collect(),
            cardinality: set.len(),
            bound: set.cardinality_bound(),
            within_bound: set.len() <= set.cardinality_bound(),
            symmetry_violations: set.symmetry_violations().len(),
            betweenness_violations: set.betweenness_violations().len(),
            exclusion_violations: set.exclusion_violations().len(),
        }
    }
}
