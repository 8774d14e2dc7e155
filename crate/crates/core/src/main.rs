use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use oc_lab::error::{Error, Result};
use oc_lab::experiments::Population;
use oc_lab::report::config::{load_config, AppConfig, CliOverrides, ParamOverrides};
use oc_lab::report::csv::write_csv;
use oc_lab::report::pipeline;
use oc_lab::{run, PopulationMix};

/// Agent-based simulation of open collaboration: single runs, figure
/// sweeps, and report regeneration.
#[derive(Parser, Debug)]
#[command(name = "oc-lab", version)]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replications per cell.
    #[arg(long, global = true)]
    reps: Option<u32>,
    /// Output directory (default: $OC_LAB_OUT, then ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    parallelism: Option<usize>,
    #[command(flatten)]
    params: ParamArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct ParamArgs {
    #[arg(long = "agents", global = true)]
    n_agents: Option<u32>,
    #[arg(long = "good-types", global = true)]
    n_good_types: Option<u32>,
    #[arg(long, global = true)]
    rivalry: Option<f64>,
    #[arg(long, global = true)]
    heterogeneity: Option<f64>,
    #[arg(long, global = true)]
    horizon: Option<u32>,
    #[arg(long, global = true)]
    warmup: Option<u32>,
    #[arg(long, global = true)]
    benefit: Option<f64>,
    #[arg(long, global = true)]
    production_cost: Option<f64>,
    #[arg(long, global = true)]
    contribution_cost: Option<f64>,
    #[arg(long, global = true)]
    memory: Option<u32>,
    #[arg(long, global = true)]
    exploration: Option<f64>,
    #[arg(long, global = true)]
    priming: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One run; prints its metrics as JSON on stdout.
    Run {
        /// cooperators, general, reciprocators, or free-riders.
        #[arg(long, default_value = "general", conflicts_with = "mix")]
        population: String,
        /// Explicit fractions "pC,pR,pF".
        #[arg(long)]
        mix: Option<String>,
    },
    /// Cooperator sweep and 5%-cooperator callout.
    Fig1,
    /// Populations crossed with rivalry and heterogeneity levels.
    Fig2,
    /// Rivalry x heterogeneity grid for the general population.
    Fig3,
    /// The sweep described in the configuration file.
    Sweep,
    /// Rebuild summaries and figures from existing runs files.
    Report,
}

impl Cli {
    fn overrides(&self) -> CliOverrides {
        let p = &self.params;
        CliOverrides {
            params: ParamOverrides {
                n_agents: p.n_agents,
                n_good_types: p.n_good_types,
                rivalry: p.rivalry,
                heterogeneity: p.heterogeneity,
                horizon: p.horizon,
                warmup: p.warmup,
                benefit: p.benefit,
                production_cost: p.production_cost,
                contribution_cost: p.contribution_cost,
                memory: p.memory,
                exploration: p.exploration,
                priming: p.priming,
            },
            reps: self.reps,
            seed: self.seed,
            out: self.out.clone(),
            parallelism: self.parallelism,
        }
    }
}

fn parse_mix(population: &str, mix: Option<&str>) -> Result<PopulationMix> {
    if let Some(text) = mix {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        let values: Option<Vec<f64>> = parts.iter().map(|s| s.parse().ok()).collect();
        return match values.as_deref() {
            Some(&[c, r, f]) => PopulationMix::new(c, r, f),
            _ => Err(Error::config("mix", format!("expected three comma-separated fractions, found {text:?}"))),
        };
    }
    Population::ALL
        .into_iter()
        .find(|p| p.label() == population)
        .map(Population::mix)
        .ok_or_else(|| Error::config("population", format!("unknown population {population:?}")))
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        log::info!("wrote {}", p.display());
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg: AppConfig = load_config(cli.config.as_deref(), &cli.overrides())?;
    match &cli.command {
        Command::Run { population, mix } => {
            let mix = parse_mix(population, mix.as_deref())?;
            let result = run(&cfg.params, &mix, cfg.seed)?;
            let json = serde_json::to_string_pretty(&result.metrics)
                .map_err(|e| Error::Domain(format!("serializing metrics: {e}")))?;
            println!("{json}");
        }
        Command::Fig1 => {
            let (main, callout) = pipeline::fig1_tables(&cfg)?;
            report_written(&pipeline::emit_fig1(&main, &callout, &cfg.out)?);
        }
        Command::Fig2 => {
            let table = pipeline::fig2_table(&cfg)?;
            report_written(&pipeline::emit_fig2(&table, &cfg.out)?);
        }
        Command::Fig3 => {
            let table = pipeline::fig3_table(&cfg)?;
            report_written(&pipeline::emit_fig3(&table, &cfg.out)?);
        }
        Command::Sweep => {
            let spec = cfg.sweep_spec()?;
            let table = pipeline::sweep_table(&spec, cfg.parallelism)?;
            let (a, b) = write_csv(&table, &cfg.out)?;
            report_written(&[a, b]);
        }
        Command::Report => report_written(&pipeline::regenerate(&cfg, &cfg.out)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| execute(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(1),
    }
}
