use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kdv_tunnel::harness::{self, render, run_scenario, sweep, ComparisonReport, Mode, Scenario, ScenarioConfig};
use kdv_tunnel::Error;

/// Soliton tunnelling through a KdV well: predictions, simulations and comparisons.
#[derive(Parser, Debug)]
#[command(name = "kdv-tunnel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analytic predictions only.
    Predict(RunArgs),
    /// Simulation and measurements only.
    Simulate(RunArgs),
    /// Predictions against simulation; exit status reflects the tolerances.
    Compare(RunArgs),
    /// Outcome classification over several amplitudes.
    Sweep(SweepArgs),
    /// Fast built-in consistency checks.
    Selftest,
    /// List the built-in scenarios.
    List,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Catalog label (FIG1, FIG5, ...) or path to a JSON config.
    scenario: String,
    /// Output directory (default: the config's output_dir or out/<label>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the horizon.
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Comma-separated amplitudes.
    #[arg(long, value_delimiter = ',', required = true)]
    amps: Vec<f64>,
    /// Template scenario (catalog label or JSON config).
    #[arg(long, default_value = "FIG8")]
    template: String,
    /// Skip the simulations.
    #[arg(long)]
    analytics_only: bool,
    /// Write the table as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(spec: &str) -> Result<Scenario, Error> {
    if let Some(s) = harness::scenario(spec) {
        return Ok(s);
    }
    let path = Path::new(spec);
    if path.exists() {
        return Scenario::from_config(&ScenarioConfig::load(path)?);
    }
    Err(Error::Config(format!("`{spec}` is neither a catalog label nor a readable config file")))
}

fn out_dir(s: &Scenario, out: Option<PathBuf>) -> PathBuf {
    out.or_else(|| s.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(&s.label))
}

fn summarize(r: &ComparisonReport) {
    if let Some(p) = &r.prediction {
        match p.outcome {
            Some(k) => println!("predicted outcome: {k}"),
            None => println!("bare well, t* = {}", p.t_star),
        }
        if let Some(a) = p.a_final {
            println!("predicted final amplitude: {a}");
        }
    }
    if let Some(m) = &r.measurement {
        if let Some(k) = m.outcome {
            println!("measured outcome: {k}");
        }
        if let Some(a) = m.a_final {
            println!("measured final amplitude: {a}");
        }
        println!("steps: {}, dt: {}", m.steps, m.dt);
    }
    for c in &r.checks {
        println!("[{}] {} = {} (tolerance {})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.tolerance);
    }
    for c in &r.health {
        println!("[{}] {} = {} (diagnostic, tolerance {})", if c.passed { "ok" } else { "high" }, c.name, c.value, c.tolerance);
    }
    for d in &r.diagnostics {
        println!("note: {d}");
    }
}

fn run(args: RunArgs, mode: Mode) -> Result<bool, Error> {
    let mut s = load(&args.scenario)?;
    if let Some(t) = args.t_end {
        s = s.with_t_end(t)?;
    }
    let dir = out_dir(&s, args.out);
    let report = run_scenario(&s, mode)?;
    summarize(&report);
    for p in render(&report, &dir)? {
        println!("wrote {}", p.display());
    }
    Ok(report.passed)
}

fn run_sweep(args: SweepArgs) -> Result<bool, Error> {
    let template = load(&args.template)?;
    let mode = if args.analytics_only { Mode::AnalyticsOnly } else { Mode::Compare };
    let table = sweep(&args.amps, &template, mode)?;
    println!("{:>8}  {:>14}  {:>14}  match", "a0", "predicted", "measured");
    let label = |k: Option<kdv_tunnel::soliton::OutcomeKind>| k.map(|k| k.label()).unwrap_or("-");
    for r in &table.rows {
        let m = match r.class_match {
            Some(true) => "yes",
            Some(false) => "no",
            None => "-",
        };
        println!("{:>8}  {:>14}  {:>14}  {m}", r.a0, label(r.predicted), label(r.measured));
        if let Some(e) = &r.error {
            println!("          error: {e}");
        }
    }
    println!("eps (predicted): {}", table.eps_predicted);
    if let Some((lo, hi)) = table.eps_bracket {
        println!("eps (measured): between {lo} and {hi}");
    }
    if let Some(path) = args.out {
        let json = harness::sweep_json(&table);
        std::fs::write(&path, json).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
        println!("wrote {}", path.display());
    }
    Ok(table.rows.iter().all(|r| r.error.is_none() && r.class_match != Some(false)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Predict(a) => run(a, Mode::AnalyticsOnly),
        Command::Simulate(a) => run(a, Mode::SimulationOnly),
        Command::Compare(a) => run(a, Mode::Compare),
        Command::Sweep(a) => run_sweep(a),
        Command::Selftest => {
            let checks = kdv_tunnel::selftest::run();
            for c in &checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(checks.iter().all(|c| c.passed))
        }
        Command::List => {
            for s in harness::catalog() {
                println!(
                    "{:<6} U0={} l={} a0={} x0={} t_end={}{}",
                    s.label,
                    s.well.u0,
                    s.well.l,
                    s.a0,
                    s.x0,
                    s.t_end,
                    s.note.as_ref().map(|n| format!("  ({n})")).unwrap_or_default()
                );
            }
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
