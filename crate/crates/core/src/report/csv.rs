//! CSV persistence for sweep results.
//!
//! Metrics are written with 6 significant digits. Parameter echo columns use
//! the shortest representation that parses back to the same `f64`, so a
//! cell's parameters survive the round trip exactly. Efficiency of `+inf`
//! is written as an empty field.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiments::{ResultTable, RunRow};
use crate::metrics::MetricsFrame;
use crate::model::{ModelParams, PopulationMix};

pub const RUNS_HEADER: &str =
    "cell_id,pC,pR,pF,rivalry,heterogeneity,N,G,T,W,seed,performance,efficiency,gini,top20_share";
pub const SUMMARY_HEADER: &str = "cell_id,pC,pR,pF,rivalry,heterogeneity,N,G,T,W,mean,ci_lo,ci_hi,n";

/// `x` with 6 significant digits, `%g` style: trailing zeros dropped,
/// exponent form outside `[1e-4, 1e6)`.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn quantize(x: f64) -> f64 {
    if x.is_finite() {
        fmt_sig6(x).parse().expect("formatted float parses")
    } else {
        x
    }
}

/// Metrics as they read back from a runs file.
pub fn quantize_metrics(m: &MetricsFrame) -> MetricsFrame {
    MetricsFrame {
        performance: quantize(m.performance),
        efficiency: quantize(m.efficiency),
        gini: quantize(m.gini),
        top20_share: quantize(m.top20_share),
    }
}

fn write_cell_echo(out: &mut String, cell_id: u32, mix: &PopulationMix, p: &ModelParams) {
    let _ = write!(
        out,
        "{cell_id},{},{},{},{},{},{},{},{},{}",
        mix.cooperators,
        mix.reciprocators,
        mix.free_riders,
        p.rivalry,
        p.heterogeneity,
        p.n_agents,
        p.n_good_types,
        p.horizon,
        p.warmup
    );
}

pub fn runs_csv(table: &ResultTable) -> String {
    let mut out = String::with_capacity(96 * (table.rows.len() + 1));
    out.push_str(RUNS_HEADER);
    out.push('\n');
    for row in &table.rows {
        write_cell_echo(&mut out, row.cell_id, &row.mix, &row.params);
        let m = &row.metrics;
        let efficiency = if m.efficiency.is_infinite() {
            String::new()
        } else {
            fmt_sig6(m.efficiency)
        };
        let _ = writeln!(
            out,
            ",{},{},{},{},{}",
            row.seed,
            fmt_sig6(m.performance),
            efficiency,
            fmt_sig6(m.gini),
            fmt_sig6(m.top20_share)
        );
    }
    out
}

pub fn summary_csv(table: &ResultTable) -> String {
    let mut out = String::new();
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for s in &table.summaries {
        write_cell_echo(&mut out, s.cell_id, &s.mix, &s.params);
        let _ = writeln!(
            out,
            ",{},{},{},{}",
            fmt_sig6(s.mean),
            fmt_sig6(s.ci_lo),
            fmt_sig6(s.ci_hi),
            s.n
        );
    }
    out
}

pub fn runs_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}_runs.csv"))
}

pub fn summary_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}_summary.csv"))
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `<name>_runs.csv` and `<name>_summary.csv` into `dir`.
pub fn write_csv(table: &ResultTable, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let runs = runs_path(dir, &table.name);
    let summary = summary_path(dir, &table.name);
    write_file(&runs, &runs_csv(table))?;
    write_file(&summary, &summary_csv(table))?;
    Ok((runs, summary))
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, name: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Data {
        path: path.to_path_buf(),
        message: format!("line {line}: cannot parse {name} from {raw:?}"),
    })
}

/// Parses a runs file. Parameters that are not echoed in the file are taken
/// from `base`.
pub fn parse_runs_csv(path: &Path, text: &str, name: &str, base: &ModelParams) -> Result<ResultTable> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == RUNS_HEADER => {}
        other => {
            return Err(Error::Data {
                path: path.to_path_buf(),
                message: format!("unexpected header {other:?}"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 15 {
            return Err(Error::Data {
                path: path.to_path_buf(),
                message: format!("line {lineno}: expected 15 fields, found {}", f.len()),
            });
        }
        let mix = PopulationMix {
            cooperators: field(path, lineno, "pC", f[1])?,
            reciprocators: field(path, lineno, "pR", f[2])?,
            free_riders: field(path, lineno, "pF", f[3])?,
        };
        let params = ModelParams {
            rivalry: field(path, lineno, "rivalry", f[4])?,
            heterogeneity: field(path, lineno, "heterogeneity", f[5])?,
            n_agents: field(path, lineno, "N", f[6])?,
            n_good_types: field(path, lineno, "G", f[7])?,
            horizon: field(path, lineno, "T", f[8])?,
            warmup: field(path, lineno, "W", f[9])?,
            ..*base
        };
        let efficiency = if f[12].is_empty() {
            f64::INFINITY
        } else {
            field(path, lineno, "efficiency", f[12])?
        };
        rows.push(RunRow {
            cell_id: field(path, lineno, "cell_id", f[0])?,
            mix,
            params,
            seed: field(path, lineno, "seed", f[10])?,
            metrics: MetricsFrame {
                performance: field(path, lineno, "performance", f[11])?,
                efficiency,
                gini: field(path, lineno, "gini", f[13])?,
                top20_share: field(path, lineno, "top20_share", f[14])?,
            },
        });
    }
    ResultTable::from_rows(name, rows)
}

/// Loads `<name>_runs.csv` from `dir`.
pub fn read_runs_csv(dir: &Path, name: &str, base: &ModelParams) -> Result<ResultTable> {
    let path = runs_path(dir, name);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    parse_runs_csv(&path, &text, name, base)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_formatting() {
        assert_eq!(fmt_sig6(0.0), "0");
        assert_eq!(fmt_sig6(1.0), "1");
        assert_eq!(fmt_sig6(0.5), "0.5");
        assert_eq!(fmt_sig6(1.0 / 3.0), "0.333333");
        assert_eq!(fmt_sig6(10.0 / 3.0), "3.33333");
        assert_eq!(fmt_sig6(5.0), "5");
        assert_eq!(fmt_sig6(0.999_999_7), "1");
        assert_eq!(fmt_sig6(123_456.7), "123457");
        assert_eq!(fmt_sig6(1_234_567.0), "1.23457e+06");
        assert_eq!(fmt_sig6(0.000_012_345_67), "1.23457e-05");
        assert_eq!(fmt_sig6(-0.052_631_578), "-0.0526316");
    }

    #[test]
    fn quantize_is_idempotent() {
        for x in [0.123_456_789, 5.0, 1e-7 / 3.0, 0.999_999_95, 2.0 / 3.0] {
            let q = quantize(x);
            assert_eq!(quantize(q), q);
            assert!((q - x).abs() <= 5e-6 * x.abs());
        }
    }
}
