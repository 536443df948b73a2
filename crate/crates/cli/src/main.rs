//! `thinobs`: runs scenario files and the verification suite.
//!
//! Exit status: 0 when every check passes, 1 on a numerical failure, 2 on usage or
//! configuration errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thinobs::scenario::{run_scenario, to_json_string, ScenarioConfig, SolveConfig};
use thinobs::verify::{verify_suite, Level};
use thinobs::Error;

#[derive(Parser)]
#[command(name = "thinobs", version, about = "Thin obstacle problem laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the obstacle problem with the configured field as boundary data.
    Solve(ScenarioArgs),
    /// Run the frequency analyses of a scenario.
    Frequency(ScenarioArgs),
    /// Run the blow-up analyses of a scenario.
    Blowup(ScenarioArgs),
    /// Run the geometry analyses of a scenario.
    Geometry(ScenarioArgs),
    /// Run the acceptance suite.
    Verify {
        #[arg(long, default_value = "fast")]
        level: Level,
        /// Also write `verify.json` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_for(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    match err {
        Error::Config(_) | Error::Json(_) | Error::InvalidGrid(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn scenario(args: &ScenarioArgs, kind: &str) -> Result<ExitCode, Error> {
    let mut cfg = ScenarioConfig::load(&args.config)?;
    if let Some(out) = &args.out {
        cfg.output_dir = Some(out.clone());
    }
    if kind == "solve" {
        cfg.analyses.clear();
        cfg.solve.get_or_insert_with(SolveConfig::default);
    } else {
        cfg.analyses.retain(|a| a.kind() == kind);
        if cfg.analyses.is_empty() {
            return Err(Error::Config(format!("the config declares no {kind} analysis")));
        }
    }
    let outcome = run_scenario(&cfg)?;
    if let Some(solve) = &outcome.summary.solve {
        println!(
            "solve: {} sweeps, final update {:e}, converged {}",
            solve.report.sweeps_used, solve.report.final_update, solve.report.converged
        );
    }
    for c in &outcome.summary.checks {
        let v = c.value.map_or_else(String::new, |v| format!(" = {v:e}"));
        println!("[{}] {}{} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, v, c.bound);
    }
    println!("reports in {}", outcome.output_dir.display());
    if outcome.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        for c in outcome.failing_checks() {
            eprintln!("failed check: {}", c.name);
        }
        Ok(ExitCode::from(1))
    }
}

fn verify(level: Level, out: Option<&PathBuf>) -> Result<ExitCode, Error> {
    let summary = verify_suite(level);
    print!("{}", summary.table());
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("verify.json"), to_json_string(&summary)?)?;
    }
    Ok(if summary.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => scenario(a, "solve"),
        Command::Frequency(a) => scenario(a, "frequency"),
        Command::Blowup(a) => scenario(a, "blowup"),
        Command::Geometry(a) => scenario(a, "geometry"),
        Command::Verify { level, out } => verify(*level, out.as_ref()),
    };
    result.unwrap_or_else(|e| exit_for(&e))
}
