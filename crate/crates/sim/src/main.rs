use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use fedalloc::scenario_file::write_scenario_file;
use fedalloc::{emit, read_scenario, run_sweep, Format, GeneratorConfig, ScenarioFile, SweepParam, SweepSpec};
use fedalloc_core::{solve, Scheme, SolveResult64, SolverOptions64};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fedalloc", version, about = "Resource allocation for edge-assisted federated learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario file with one scheme and write the result as JSON.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "proposed")]
        scheme: Scheme,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a Monte Carlo sweep over one parameter.
    Sweep {
        #[arg(long)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "proposed")]
        schemes: Vec<Scheme>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Generator configuration (JSON); defaults apply to missing fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// `.json` writes JSON, anything else CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a scenario file.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: Option<&Path>) -> Result<GeneratorConfig> {
    let Some(path) = path else { return Ok(GeneratorConfig::default()) };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config: GeneratorConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    config.validate()?;
    Ok(config)
}

#[derive(Serialize)]
struct OrgReport {
    subcarrier: usize,
    frequency: f64,
    power: f64,
    sensor_bandwidths: Vec<f64>,
    receive_time: f64,
    compute_time: f64,
    upload_time: f64,
    compute_energy: f64,
    upload_energy: f64,
    error_rate: f64,
}

#[derive(Serialize)]
struct SolveReport {
    scheme: String,
    c_total: f64,
    c_system: f64,
    c_learn: f64,
    t_one: f64,
    e_one: f64,
    latency_bound: f64,
    iterations: usize,
    wall_time_s: f64,
    trace: Vec<f64>,
    orgs: Vec<OrgReport>,
}

impl From<&SolveResult64> for SolveReport {
    fn from(r: &SolveResult64) -> Self {
        let a = &r.allocation;
        let orgs = r
            .cost
            .per_org
            .iter()
            .enumerate()
            .map(|(j, c)| OrgReport {
                subcarrier: a.assignment[j],
                frequency: a.frequencies[j],
                power: a.powers[j],
                sensor_bandwidths: a.sensor_bandwidths[j].clone(),
                receive_time: c.receive_time,
                compute_time: c.compute_time,
                upload_time: c.upload_time,
                compute_energy: c.compute_energy,
                upload_energy: c.upload_energy,
                error_rate: c.error_rate,
            })
            .collect();
        Self {
            scheme: r.scheme.name().to_string(),
            c_total: r.cost.c_total,
            c_system: r.cost.c_system,
            c_learn: r.cost.c_learn,
            t_one: r.cost.t_one,
            e_one: r.cost.e_one,
            latency_bound: a.latency_bound,
            iterations: r.iterations,
            wall_time_s: r.wall_time.as_secs_f64(),
            trace: r.trace.clone(),
            orgs,
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve { scenario, scheme, out } => {
            let s = read_scenario(&scenario)?;
            let result = solve(scheme, &s, &SolverOptions64::default())
                .with_context(|| format!("solving {} with {scheme}", scenario.display()))?;
            let text = serde_json::to_string_pretty(&SolveReport::from(&result))? + "\n";
            fs::write(&out, text).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Sweep { param, values, trials, schemes, seed, config, out } => {
            let config = load_config(config.as_deref())?;
            let spec = SweepSpec { parameter: param, values, trials, schemes };
            let records = run_sweep(&spec, &config, seed, &SolverOptions64::default())?;
            let infeasible = records.iter().filter(|r| !r.is_feasible()).count();
            if infeasible > 0 {
                eprintln!("warning: {infeasible} of {} solves were infeasible", records.len());
            }
            emit(&records, Format::from_path(&out), &out)?;
        }
        Command::Gen { seed, config, out } => {
            let config = load_config(config.as_deref())?;
            write_scenario_file(&ScenarioFile::generated(&config, seed)?, &out)?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
