//! CLI harness for the VBCA swarm simulator.
//!
//! Subcommands mirror the experiment tables: `run` (single scenario),
//! `sweep-distance`, `sweep-coverage`, `baseline`, and `stability`.
//! Settings resolve as defaults < config file < flags.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 connectivity loss,
//! 3 non-convergence (run subcommand; sweeps record failures in-table).

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use vbca::harness::{self, ParamOverrides, ScenarioConfig, SweepConfig};
use vbca::swarm::SwarmParams;
use vbca::Error;

#[derive(Parser)]
#[command(name = "vbca", version, about = "Virtual-forces drone clustering simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario; writes trajectory.csv and report.json.
    Run(CommonArgs),
    /// Average hub distance over the (cp, k) grid; writes sweep_distance.csv.
    SweepDistance(CommonArgs),
    /// Union coverage over the (cp, k) grid; writes sweep_coverage.csv.
    SweepCoverage(CommonArgs),
    /// Coverage against the exact-placement reference; writes baseline.csv.
    Baseline(CommonArgs),
    /// Per-step hub-distance variation of one run; writes stability.csv.
    Stability(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML config file; flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Number of peripheral drones.
    #[arg(long)]
    k: Option<usize>,
    /// Compactness parameter.
    #[arg(long)]
    cp: Option<f64>,
    /// Simulation seed (sweeps: base seed, row seeds are base + row index).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Monte Carlo samples for coverage estimates.
    #[arg(long)]
    samples: Option<u64>,
    /// Simulation step budget.
    #[arg(long)]
    max_steps: Option<u32>,
    /// Leave the central drone's sensing sphere out of coverage.
    #[arg(long)]
    exclude_central_coverage: bool,
}

/// Flat key-value config file, field names matching the scenario fields.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    k_peripheral: Option<usize>,
    cp: Option<f64>,
    output_dir: Option<PathBuf>,
    coverage_samples: Option<u64>,
    coverage_seed: Option<u64>,
    exclude_central_coverage: Option<bool>,
    a: Option<f64>,
    r_gain: Option<f64>,
    r_t: Option<f64>,
    r_c: Option<f64>,
    c_obs: Option<f64>,
    epsilon: Option<f64>,
    v_max: Option<f64>,
    jitter_radius: Option<f64>,
    seed: Option<u64>,
    ss_threshold: Option<f64>,
    ss_window: Option<u32>,
    max_steps: Option<u32>,
}

/// Fully resolved settings for one invocation.
struct Resolved {
    scenario: ScenarioConfig,
    sweep: SweepConfig,
    out_dir: PathBuf,
    k: usize,
}

fn load_file(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("invalid config file {}: {e}", path.display()))
}

fn resolve(args: &CommonArgs) -> Result<Resolved, String> {
    let file = match &args.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };

    let defaults = ScenarioConfig::default();
    let k = args.k.or(file.k_peripheral).unwrap_or(defaults.k_peripheral);
    let cp = args.cp.or(file.cp).unwrap_or(defaults.cp);
    let overrides = ParamOverrides {
        a: file.a,
        r_gain: file.r_gain,
        r_t: file.r_t,
        r_c: file.r_c,
        c_obs: file.c_obs,
        epsilon: file.epsilon,
        v_max: file.v_max,
        jitter_radius: file.jitter_radius,
        seed: args.seed.or(file.seed),
        ss_threshold: file.ss_threshold,
        ss_window: file.ss_window,
        max_steps: args.max_steps.or(file.max_steps),
    };
    let coverage_samples = args
        .samples
        .or(file.coverage_samples)
        .unwrap_or(defaults.coverage_samples);
    let include_central =
        !(args.exclude_central_coverage || file.exclude_central_coverage.unwrap_or(false));

    let scenario = ScenarioConfig {
        k_peripheral: k,
        cp,
        overrides,
        coverage_samples,
        coverage_seed: file.coverage_seed.unwrap_or(defaults.coverage_seed),
        include_central_coverage: include_central,
    };
    // Validate early so every subcommand reports bad settings the same way.
    scenario.resolve().map_err(|e| e.to_string())?;

    let sweep = SweepConfig {
        base_seed: args.seed.or(file.seed).unwrap_or(1),
        coverage_samples,
        coverage_seed: scenario.coverage_seed,
        max_steps: args.max_steps.or(file.max_steps).unwrap_or(2000),
        include_central_coverage: include_central,
    };
    let out_dir = args
        .out
        .clone()
        .or(file.output_dir)
        .unwrap_or_else(|| PathBuf::from("out"));

    Ok(Resolved {
        scenario,
        sweep,
        out_dir,
        k,
    })
}

fn write_table(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::Run(a)
        | Command::SweepDistance(a)
        | Command::SweepCoverage(a)
        | Command::Baseline(a)
        | Command::Stability(a) => a,
    };

    let resolved = match resolve(args) {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };

    let result = match &cli.command {
        Command::Run(_) => cmd_run(&resolved),
        Command::SweepDistance(_) => cmd_sweep_distance(&resolved),
        Command::SweepCoverage(_) => cmd_sweep_coverage(&resolved),
        Command::Baseline(_) => cmd_baseline(&resolved),
        Command::Stability(_) => cmd_stability(&resolved),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn cmd_run(resolved: &Resolved) -> Result<ExitCode, String> {
    match harness::run_scenario(&resolved.scenario) {
        Ok(outcome) => {
            let (trajectory, report) = harness::write_run_outputs(&outcome, &resolved.out_dir)
                .map_err(|e| format!("cannot write outputs: {e}"))?;
            let r = &outcome.report;
            println!(
                "converged={} steps={} avg_central_distance={:.3} m coverage={:.1} m^3 efficiency={:.4}",
                r.converged,
                r.steps_to_steady_state,
                r.final_avg_central_distance,
                r.coverage.volume,
                r.coverage_efficiency
            );
            if let Some(c) = &r.classification {
                println!("geometry={} rms={:.2} deg", c.best_match, c.rms_angle_error);
            }
            println!("wrote {}", trajectory.display());
            println!("wrote {}", report.display());
            if r.converged {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("non-convergence: step budget exhausted");
                Ok(ExitCode::from(3))
            }
        }
        Err(Error::ConnectivityLoss { drone, step }) => {
            eprintln!(
                "connectivity loss: drone {drone} lost the central drone{}",
                step.map(|s| format!(" at step {s}")).unwrap_or_default()
            );
            Ok(ExitCode::from(2))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn cmd_sweep_distance(resolved: &Resolved) -> Result<ExitCode, String> {
    let rows = harness::sweep_cp_vs_distance(&resolved.sweep);
    let path = write_table(
        &resolved.out_dir,
        "sweep_distance.csv",
        &harness::distance_csv(&rows),
    )?;
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    println!("wrote {} ({} cells, {} failures)", path.display(), rows.len(), failures);
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep_coverage(resolved: &Resolved) -> Result<ExitCode, String> {
    let sweep = harness::sweep_coverage_vs_k(&resolved.sweep);
    let path = write_table(
        &resolved.out_dir,
        "sweep_coverage.csv",
        &harness::coverage_csv(&sweep),
    )?;
    let failures = sweep.rows.iter().filter(|r| r.error.is_some()).count();
    println!(
        "wrote {} ({} cells, {} failures)",
        path.display(),
        sweep.rows.len(),
        failures
    );
    for fit in &sweep.fits {
        println!("cp={}: r_squared={:.4}", fit.cp, fit.r_squared);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_baseline(resolved: &Resolved) -> Result<ExitCode, String> {
    let rows = harness::baseline_comparison(&resolved.sweep);
    let path = write_table(&resolved.out_dir, "baseline.csv", &harness::baseline_csv(&rows))?;
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    println!("wrote {} ({} cells, {} failures)", path.display(), rows.len(), failures);
    Ok(ExitCode::SUCCESS)
}

fn cmd_stability(resolved: &Resolved) -> Result<ExitCode, String> {
    let params: SwarmParams = resolved
        .scenario
        .resolve()
        .map_err(|e| e.to_string())?;
    match harness::stability_trace(resolved.k, &params, None) {
        Ok(trace) => {
            let path = write_table(
                &resolved.out_dir,
                "stability.csv",
                &harness::stability_csv(&trace),
            )?;
            println!("wrote {} ({} rows)", path.display(), trace.rows.len());
            Ok(ExitCode::SUCCESS)
        }
        Err(Error::ConnectivityLoss { drone, step }) => {
            eprintln!(
                "connectivity loss: drone {drone} lost the central drone{}",
                step.map(|s| format!(" at step {s}")).unwrap_or_default()
            );
            Ok(ExitCode::from(2))
        }
        Err(e) => Err(e.to_string()),
    }
}
