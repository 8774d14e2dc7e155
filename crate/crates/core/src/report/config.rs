//! Run configuration: built-in defaults, an optional JSON file, and
//! command-line overrides, applied in that order.
//!
//! The JSON file is a single object. Top-level keys are the model parameters
//! (`n_agents`, `n_good_types`, `rivalry`, `heterogeneity`, `horizon`,
//! `warmup`, `benefit`, `production_cost`, `contribution_cost`, `memory`,
//! `exploration`, `priming`) plus `reps`, `seed`, `out`, `parallelism`,
//! per-figure parameter overrides under `fig1`, `fig2`, `fig3`, and an
//! optional `sweep` block:
//!
//! ```json
//! {
//!   "reps": 10,
//!   "rivalry": 0.5,
//!   "fig3": { "horizon": 400, "warmup": 200 },
//!   "sweep": {
//!     "name": "mine",
//!     "cells": [
//!       { "cell_id": 0, "mix": "general", "params": { "rivalry": 1.0 } },
//!       { "cell_id": 1, "mix": { "pC": 0.2, "pR": 0.8, "pF": 0.0 } }
//!     ]
//!   }
//! }
//! ```
//!
//! Unknown keys anywhere are rejected by name.

use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::error::{Error, Result, Violation};
use crate::experiments::{Cell, Population, SweepSpec};
use crate::model::{ModelParams, PopulationMix};

pub const OUT_ENV: &str = "OC_LAB_OUT";
pub const DEFAULT_REPS: u32 = 30;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_OUT: &str = "out";

/// Partial parameter set; `None` leaves the underlying value alone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamOverrides {
    pub n_agents: Option<u32>,
    pub n_good_types: Option<u32>,
    pub rivalry: Option<f64>,
    pub heterogeneity: Option<f64>,
    pub horizon: Option<u32>,
    pub warmup: Option<u32>,
    pub benefit: Option<f64>,
    pub production_cost: Option<f64>,
    pub contribution_cost: Option<f64>,
    pub memory: Option<u32>,
    pub exploration: Option<f64>,
    pub priming: Option<u32>,
}

impl ParamOverrides {
    pub fn apply(&self, base: &ModelParams) -> ModelParams {
        ModelParams {
            n_agents: self.n_agents.unwrap_or(base.n_agents),
            n_good_types: self.n_good_types.unwrap_or(base.n_good_types),
            rivalry: self.rivalry.unwrap_or(base.rivalry),
            heterogeneity: self.heterogeneity.unwrap_or(base.heterogeneity),
            horizon: self.horizon.unwrap_or(base.horizon),
            warmup: self.warmup.unwrap_or(base.warmup),
            benefit: self.benefit.unwrap_or(base.benefit),
            production_cost: self.production_cost.unwrap_or(base.production_cost),
            contribution_cost: self.contribution_cost.unwrap_or(base.contribution_cost),
            memory: self.memory.unwrap_or(base.memory),
            exploration: self.exploration.unwrap_or(base.exploration),
            priming: self.priming.unwrap_or(base.priming),
        }
    }

    /// Sets `key` from a JSON value. Returns `Ok(false)` for keys that are
    /// not model parameters.
    fn set(&mut self, key: &str, value: &Value) -> Result<bool> {
        match key {
            "n_agents" => self.n_agents = Some(as_u32(key, value)?),
            "n_good_types" => self.n_good_types = Some(as_u32(key, value)?),
            "rivalry" => self.rivalry = Some(as_f64(key, value)?),
            "heterogeneity" => self.heterogeneity = Some(as_f64(key, value)?),
            "horizon" => self.horizon = Some(as_u32(key, value)?),
            "warmup" => self.warmup = Some(as_u32(key, value)?),
            "benefit" => self.benefit = Some(as_f64(key, value)?),
            "production_cost" => self.production_cost = Some(as_f64(key, value)?),
            "contribution_cost" => self.contribution_cost = Some(as_f64(key, value)?),
            "memory" => self.memory = Some(as_u32(key, value)?),
            "exploration" => self.exploration = Some(as_f64(key, value)?),
            "priming" => self.priming = Some(as_u32(key, value)?),
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn from_object(prefix: &str, value: &Value) -> Result<Self> {
        let obj = as_object(prefix, value)?;
        let mut out = Self::default();
        for (key, v) in obj {
            let qualified = format!("{prefix}.{key}");
            if !out.set(key, v).map_err(|_| type_error(&qualified, v))? {
                return Err(Error::config(qualified, "unknown key"));
            }
        }
        Ok(out)
    }

    fn merge(&mut self, other: &ParamOverrides) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            n_agents,
            n_good_types,
            rivalry,
            heterogeneity,
            horizon,
            warmup,
            benefit,
            production_cost,
            contribution_cost,
            memory,
            exploration,
            priming
        );
    }
}

/// Values supplied on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CliOverrides {
    pub params: ParamOverrides,
    pub reps: Option<u32>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub parallelism: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCellConfig {
    pub cell_id: u32,
    pub label: Option<String>,
    pub mix: PopulationMix,
    pub params: ParamOverrides,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub name: String,
    pub cells: Vec<SweepCellConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppConfig {
    pub params: ModelParams,
    pub reps: u32,
    pub seed: u64,
    pub out: PathBuf,
    pub parallelism: usize,
    pub fig1: ParamOverrides,
    pub fig2: ParamOverrides,
    pub fig3: ParamOverrides,
    pub sweep: Option<SweepConfig>,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            reps: DEFAULT_REPS,
            seed: DEFAULT_SEED,
            out: PathBuf::from(DEFAULT_OUT),
            parallelism: default_parallelism(),
            fig1: ParamOverrides::default(),
            fig2: ParamOverrides::default(),
            fig3: ParamOverrides::default(),
            sweep: None,
        }
    }
}

fn default_parallelism() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl AppConfig {
    pub fn validate(&self) -> Result<()> {
        let mut violations = match self.params.validate() {
            Ok(()) => Vec::new(),
            Err(Error::Config(v)) => v,
            Err(e) => return Err(e),
        };
        if self.reps < 2 {
            violations.push(Violation::new("reps", format!("{} must be at least 2", self.reps)));
        }
        if self.parallelism < 1 {
            violations.push(Violation::new("parallelism", "must be at least 1"));
        }
        // figure overrides are only checked on a valid base, so a bad base
        // value is reported once
        let figures = if violations.is_empty() {
            vec![("fig1", &self.fig1), ("fig2", &self.fig2), ("fig3", &self.fig3)]
        } else {
            Vec::new()
        };
        for (name, o) in figures {
            if let Err(Error::Config(v)) = o.apply(&self.params).validate() {
                violations.extend(
                    v.into_iter()
                        .map(|v| Violation::new(format!("{name}.{}", v.key), v.message)),
                );
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(violations))
        }
    }

    pub fn figure_params(&self, figure: &str) -> ModelParams {
        match figure {
            "fig1" => self.fig1.apply(&self.params),
            "fig2" => self.fig2.apply(&self.params),
            "fig3" => self.fig3.apply(&self.params),
            _ => self.params,
        }
    }

    /// The `sweep` block as a runnable spec.
    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::config("sweep", "configuration has no sweep block"))?;
        let cells = sweep
            .cells
            .iter()
            .map(|c| Cell {
                id: c.cell_id,
                label: c.label.clone().unwrap_or_else(|| format!("cell {}", c.cell_id)),
                mix: c.mix,
                params: c.params.apply(&self.params),
            })
            .collect();
        let spec = SweepSpec {
            name: sweep.name.clone(),
            cells,
            reps: self.reps,
            base_seed: self.seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn type_error(key: &str, value: &Value) -> Error {
    Error::config(key, format!("unexpected value {value}"))
}

fn as_object<'a>(key: &str, value: &'a Value) -> Result<&'a Map<String, Value>> {
    value
        .as_object()
        .ok_or_else(|| Error::config(key, "expected a JSON object"))
}

fn as_f64(key: &str, value: &Value) -> Result<f64> {
    value
        .as_f64()
        .ok_or_else(|| Error::config(key, format!("expected a number, found {value}")))
}

fn as_u64(key: &str, value: &Value) -> Result<u64> {
    value
        .as_u64()
        .ok_or_else(|| Error::config(key, format!("expected a non-negative integer, found {value}")))
}

fn as_u32(key: &str, value: &Value) -> Result<u32> {
    u32::try_from(as_u64(key, value)?).map_err(|_| Error::config(key, "integer too large"))
}

fn parse_mix(key: &str, value: &Value) -> Result<PopulationMix> {
    if let Some(name) = value.as_str() {
        return Population::ALL
            .into_iter()
            .find(|p| p.label() == name)
            .map(Population::mix)
            .ok_or_else(|| Error::config(key, format!("unknown population {name:?}")));
    }
    let obj = as_object(key, value)?;
    let mut fractions = [None; 3];
    for (k, v) in obj {
        let slot = match k.as_str() {
            "pC" => 0,
            "pR" => 1,
            "pF" => 2,
            _ => return Err(Error::config(format!("{key}.{k}"), "unknown key")),
        };
        fractions[slot] = Some(as_f64(&format!("{key}.{k}"), v)?);
    }
    let [c, r, f] = fractions.map(|x| x.unwrap_or(0.0));
    PopulationMix::new(c, r, f).map_err(|e| match e {
        Error::Config(v) => Error::Config(
            v.into_iter()
                .map(|v| Violation::new(format!("{key}.{}", v.key), v.message))
                .collect(),
        ),
        other => other,
    })
}

fn parse_sweep(value: &Value) -> Result<SweepConfig> {
    let obj = as_object("sweep", value)?;
    let mut name = None;
    let mut cells = None;
    for (k, v) in obj {
        match k.as_str() {
            "name" => {
                name = Some(
                    v.as_str()
                        .ok_or_else(|| Error::config("sweep.name", "expected a string"))?
                        .to_string(),
                )
            }
            "cells" => {
                let list = v
                    .as_array()
                    .ok_or_else(|| Error::config("sweep.cells", "expected an array"))?;
                cells = Some(
                    list.iter()
                        .enumerate()
                        .map(|(i, c)| parse_sweep_cell(i, c))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            _ => return Err(Error::config(format!("sweep.{k}"), "unknown key")),
        }
    }
    Ok(SweepConfig {
        name: name.unwrap_or_else(|| "sweep".into()),
        cells: cells.ok_or_else(|| Error::config("sweep.cells", "missing"))?,
    })
}

fn parse_sweep_cell(index: usize, value: &Value) -> Result<SweepCellConfig> {
    let prefix = format!("sweep.cells[{index}]");
    let obj = as_object(&prefix, value)?;
    let mut cell_id = None;
    let mut label = None;
    let mut mix = None;
    let mut params = ParamOverrides::default();
    for (k, v) in obj {
        let key = format!("{prefix}.{k}");
        match k.as_str() {
            "cell_id" => cell_id = Some(as_u32(&key, v)?),
            "label" => label = v.as_str().map(str::to_string),
            "mix" => mix = Some(parse_mix(&key, v)?),
            "params" => params = ParamOverrides::from_object(&key, v)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
    }
    Ok(SweepCellConfig {
        cell_id: cell_id.ok_or_else(|| Error::config(format!("{prefix}.cell_id"), "missing"))?,
        label,
        mix: mix.ok_or_else(|| Error::config(format!("{prefix}.mix"), "missing"))?,
        params,
    })
}

/// Parses configuration JSON text into file-level settings.
fn parse_file(text: &str) -> Result<(ParamOverrides, CliOverrides, [ParamOverrides; 3], Option<SweepConfig>)> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| Error::config("config", format!("malformed JSON: {e}")))?;
    let obj = as_object("config", &root)?;
    let mut params = ParamOverrides::default();
    let mut general = CliOverrides::default();
    let mut figures: [ParamOverrides; 3] = Default::default();
    let mut sweep = None;
    for (key, v) in obj {
        if params.set(key, v)? {
            continue;
        }
        match key.as_str() {
            "reps" => general.reps = Some(as_u32(key, v)?),
            "seed" => general.seed = Some(as_u64(key, v)?),
            "out" => {
                general.out = Some(PathBuf::from(
                    v.as_str().ok_or_else(|| Error::config("out", "expected a string"))?,
                ))
            }
            "parallelism" => general.parallelism = Some(as_u64(key, v)? as usize),
            "fig1" => figures[0] = ParamOverrides::from_object("fig1", v)?,
            "fig2" => figures[1] = ParamOverrides::from_object("fig2", v)?,
            "fig3" => figures[2] = ParamOverrides::from_object("fig3", v)?,
            "sweep" => sweep = Some(parse_sweep(v)?),
            _ => return Err(Error::config(key.as_str(), "unknown key")),
        }
    }
    Ok((params, general, figures, sweep))
}

/// Resolves the configuration: command-line flag > file value > default.
/// The output directory falls back to `$OC_LAB_OUT` before the built-in
/// default.
pub fn load_config(path: Option<&Path>, cli: &CliOverrides) -> Result<AppConfig> {
    let env_out = std::env::var_os(OUT_ENV).map(PathBuf::from);
    let text = match path {
        Some(p) => Some(
            std::fs::read_to_string(p)
                .map_err(|e| Error::config("config", format!("cannot read {}: {e}", p.display())))?,
        ),
        None => None,
    };
    resolve(text.as_deref(), cli, env_out)
}

/// [`load_config`] with the file text and environment supplied directly.
pub fn resolve(text: Option<&str>, cli: &CliOverrides, env_out: Option<PathBuf>) -> Result<AppConfig> {
    let mut cfg = AppConfig::default();
    let mut params = ParamOverrides::default();
    if let Some(text) = text {
        let (file_params, file, [f1, f2, f3], sweep) = parse_file(text)?;
        params.merge(&file_params);
        cfg.reps = file.reps.unwrap_or(cfg.reps);
        cfg.seed = file.seed.unwrap_or(cfg.seed);
        cfg.out = file.out.or(env_out).unwrap_or(cfg.out);
        cfg.parallelism = file.parallelism.unwrap_or(cfg.parallelism);
        cfg.fig1 = f1;
        cfg.fig2 = f2;
        cfg.fig3 = f3;
        cfg.sweep = sweep;
    } else if let Some(env) = env_out {
        cfg.out = env;
    }
    params.merge(&cli.params);
    cfg.params = params.apply(&cfg.params);
    cfg.reps = cli.reps.unwrap_or(cfg.reps);
    cfg.seed = cli.seed.unwrap_or(cfg.seed);
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    cfg.parallelism = cli.parallelism.unwrap_or(cfg.parallelism);
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_without_file_or_flags() {
        let cfg = resolve(None, &CliOverrides::default(), None).unwrap();
        let p = cfg.params;
        assert_eq!((p.n_agents, p.n_good_types, p.horizon, p.warmup), (100, 20, 1000, 500));
        assert_eq!(cfg.reps, 30);
        assert_eq!(cfg.out, PathBuf::from("out"));
    }

    #[test]
    fn flag_beats_file() {
        let cli = CliOverrides {
            reps: Some(50),
            ..Default::default()
        };
        let cfg = resolve(Some(r#"{"reps": 10, "horizon": 300, "warmup": 100}"#), &cli, None).unwrap();
        assert_eq!(cfg.reps, 50);
        assert_eq!(cfg.params.horizon, 300);
        let cfg = resolve(Some(r#"{"reps": 10}"#), &CliOverrides::default(), None).unwrap();
        assert_eq!(cfg.reps, 10);
    }

    #[test]
    fn out_directory_precedence() {
        let env = Some(PathBuf::from("from-env"));
        assert_eq!(resolve(None, &CliOverrides::default(), env.clone()).unwrap().out, PathBuf::from("from-env"));
        let cfg = resolve(Some(r#"{"out": "from-file"}"#), &CliOverrides::default(), env.clone()).unwrap();
        assert_eq!(cfg.out, PathBuf::from("from-file"));
        let cli = CliOverrides {
            out: Some("from-flag".into()),
            ..Default::default()
        };
        assert_eq!(resolve(Some(r#"{"out": "x"}"#), &cli, env).unwrap().out, PathBuf::from("from-flag"));
    }

    #[test]
    fn out_of_bounds_value_names_key() {
        let err = resolve(Some(r#"{"rivalry": 1.5}"#), &CliOverrides::default(), None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert_eq!(err.violated_keys(), vec!["rivalry"]);
        assert!(err.to_string().contains("rivalry"));
    }

    #[test]
    fn unknown_and_malformed_rejected() {
        let err = resolve(Some(r#"{"rivalri": 0.5}"#), &CliOverrides::default(), None).unwrap_err();
        assert_eq!(err.violated_keys(), vec!["rivalri"]);
        let err = resolve(Some(r#"{"fig3": {"colour": 1}}"#), &CliOverrides::default(), None).unwrap_err();
        assert_eq!(err.violated_keys(), vec!["fig3.colour"]);
        let err = resolve(Some("{not json"), &CliOverrides::default(), None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = resolve(Some(r#"{"horizon": "long"}"#), &CliOverrides::default(), None).unwrap_err();
        assert_eq!(err.violated_keys(), vec!["horizon"]);
        let err = resolve(Some(r#"{"reps": 1}"#), &CliOverrides::default(), None).unwrap_err();
        assert_eq!(err.violated_keys(), vec!["reps"]);
    }

    #[test]
    fn figure_overrides_validated_with_prefix() {
        let err = resolve(Some(r#"{"fig2": {"warmup": 5000}}"#), &CliOverrides::default(), None).unwrap_err();
        assert_eq!(err.violated_keys(), vec!["fig2.warmup"]);
        let cfg = resolve(Some(r#"{"fig3": {"horizon": 400, "warmup": 100}}"#), &CliOverrides::default(), None).unwrap();
        assert_eq!(cfg.figure_params("fig3").horizon, 400);
        assert_eq!(cfg.figure_params("fig1").horizon, 1000);
    }

    #[test]
    fn sweep_block() {
        let text = r#"{
            "reps": 3,
            "sweep": {"name": "mine", "cells": [
                {"cell_id": 4, "mix": "general", "params": {"rivalry": 1.0}},
                {"cell_id": 9, "label": "half", "mix": {"pC": 0.5, "pR": 0.5}}
            ]}
        }"#;
        let cfg = resolve(Some(text), &CliOverrides::default(), None).unwrap();
        let spec = cfg.sweep_spec().unwrap();
        assert_eq!(spec.name, "mine");
        assert_eq!(spec.cell_ids(), vec![4, 9]);
        assert_eq!(spec.cells[0].params.rivalry, 1.0);
        assert_eq!(spec.cells[1].mix.free_riders, 0.0);
        assert_eq!(spec.reps, 3);

        let bad = r#"{"sweep": {"cells": [{"cell_id": 0, "mix": {"pC": 0.5}}]}}"#;
        let err = resolve(Some(bad), &CliOverrides::default(), None).unwrap_err();
        assert_eq!(err.violated_keys(), vec!["sweep.cells[0].mix.mix"]);
        assert!(resolve(None, &CliOverrides::default(), None).unwrap().sweep_spec().is_err());
    }
}
