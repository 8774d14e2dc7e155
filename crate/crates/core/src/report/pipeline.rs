//! Sweep, persist, render: the work behind each figure command, and the
//! simulation-free `report` path that rebuilds outputs from runs files.
//!
//! Tables are quantized to their CSV form before anything is summarized or
//! drawn, so rendering from a fresh sweep and from a reread runs file gives
//! the same bytes.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiments::{
    fig3_corners, run_sweep, sweep_fig1, sweep_fig1_callout, sweep_fig2, sweep_fig3, ResultTable, SweepSpec,
};
use crate::report::config::AppConfig;
use crate::report::csv::{read_runs_csv, write_csv, write_file};
use crate::report::figures::{render_fig1, render_fig2, render_fig3};
use crate::stats::{tukey_hsd, GroupSample, PairwiseResult};

/// Significance level for the corner comparisons drawn on Figure 3.
pub const FIG3_ALPHA: f64 = 0.001;

pub fn svg_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.svg"))
}

/// Runs a sweep and returns its table in persisted precision.
pub fn sweep_table(spec: &SweepSpec, parallelism: usize) -> Result<ResultTable> {
    run_sweep(spec, parallelism)?.quantized()
}

/// Tukey HSD over the four Figure 3 corners, tragedy corner first.
pub fn fig3_tukey(table: &ResultTable) -> Result<Vec<PairwiseResult>> {
    let corners = fig3_corners();
    table.require(&corners.map(|(_, id)| id))?;
    let groups: Vec<GroupSample> = corners
        .iter()
        .map(|&(label, id)| GroupSample::new(label, table.performances(id)))
        .collect();
    tukey_hsd(&groups, FIG3_ALPHA)
}

fn write_svg(dir: &Path, name: &str, doc: &str) -> Result<PathBuf> {
    let path = svg_path(dir, name);
    write_file(&path, doc)?;
    Ok(path)
}

pub fn fig1_tables(cfg: &AppConfig) -> Result<(ResultTable, ResultTable)> {
    let base = cfg.figure_params("fig1");
    let main = sweep_table(&sweep_fig1(&base, cfg.reps, cfg.seed), cfg.parallelism)?;
    let callout = sweep_table(&sweep_fig1_callout(&base, cfg.reps, cfg.seed), cfg.parallelism)?;
    Ok((main, callout))
}

pub fn fig2_table(cfg: &AppConfig) -> Result<ResultTable> {
    sweep_table(&sweep_fig2(&cfg.figure_params("fig2"), cfg.reps, cfg.seed), cfg.parallelism)
}

pub fn fig3_table(cfg: &AppConfig) -> Result<ResultTable> {
    sweep_table(&sweep_fig3(&cfg.figure_params("fig3"), cfg.reps, cfg.seed), cfg.parallelism)
}

pub fn emit_fig1(main: &ResultTable, callout: &ResultTable, dir: &Path) -> Result<Vec<PathBuf>> {
    let doc = render_fig1(main, callout)?;
    let (a, b) = write_csv(main, dir)?;
    let (c, d) = write_csv(callout, dir)?;
    Ok(vec![a, b, c, d, write_svg(dir, "fig1", &doc)?])
}

pub fn emit_fig2(table: &ResultTable, dir: &Path) -> Result<Vec<PathBuf>> {
    let doc = render_fig2(table)?;
    let (a, b) = write_csv(table, dir)?;
    Ok(vec![a, b, write_svg(dir, "fig2", &doc)?])
}

pub fn emit_fig3(table: &ResultTable, dir: &Path) -> Result<Vec<PathBuf>> {
    let tukey = fig3_tukey(table)?;
    for pair in &tukey {
        log::info!(
            "fig3 Tukey {} vs {}: diff {:.4} q {:.3} p {:.3e}",
            pair.labels.0,
            pair.labels.1,
            pair.mean_diff,
            pair.q,
            pair.p
        );
    }
    let doc = render_fig3(table, &tukey)?;
    let (a, b) = write_csv(table, dir)?;
    Ok(vec![a, b, write_svg(dir, "fig3", &doc)?])
}

/// Names `<name>` of every `<name>_runs.csv` in `dir`, sorted.
pub fn runs_files(dir: &Path) -> Result<Vec<String>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut names = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if let Some(name) = entry.file_name().to_str().and_then(|f| f.strip_suffix("_runs.csv")) {
            names.push(name.to_string());
        }
    }
    names.sort();
    Ok(names)
}

/// Rebuilds summaries and figures from the runs files in `dir` without
/// simulating. Errors with exit code 4 when there is nothing to rebuild.
pub fn regenerate(cfg: &AppConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let names = if dir.is_dir() { runs_files(dir)? } else { Vec::new() };
    if names.is_empty() {
        return Err(Error::Data {
            path: dir.to_path_buf(),
            message: "no *_runs.csv files to report on".into(),
        });
    }
    let base = cfg.params;
    let mut written = Vec::new();
    for name in &names {
        let table = read_runs_csv(dir, name, &base)?;
        match name.as_str() {
            "fig1" => {
                let callout = match read_runs_csv(dir, "fig1_callout", &base) {
                    Ok(t) => t,
                    Err(Error::Io { .. }) => {
                        return Err(Error::MissingCells {
                            table: "fig1_callout".into(),
                            ids: (0..5).collect(),
                        })
                    }
                    Err(e) => return Err(e),
                };
                written.extend(emit_fig1(&table, &callout, dir)?);
            }
            "fig1_callout" => {}
            "fig2" => written.extend(emit_fig2(&table, dir)?),
            "fig3" => written.extend(emit_fig3(&table, dir)?),
            _ => {
                let (a, b) = write_csv(&table, dir)?;
                written.extend([a, b]);
            }
        }
    }
    Ok(written)
}
