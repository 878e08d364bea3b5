//! The `greenlink` command line.
//!
//! Exit status: 0 success, 1 infeasible design or violated bound, 2 bad
//! configuration or arguments, 3 numerical failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::montecarlo::{verify_bounds, VerifyGrid, MIN_SAMPLES};
use crate::report::{
    energy_text, table_two_comparison, to_json, verify_text, write_comparison_csv, write_csv,
    ReportRow, VerifyRecord,
};
use crate::scenario::{Scenario, PRESETS};
use crate::schemes::max_constellation;
use crate::solver::{evaluate_cell, sweep};

#[derive(Debug, Parser)]
#[command(name = "greenlink", version, about = "Per-frame energy of sensor-node modulation schemes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy breakdown of the scenario's single scheme, M and distance.
    Energy(ScenarioArgs),
    /// Evaluate the scenario's [sweep] grid and write CSV.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Also write the published-table comparison for matching cells.
        #[arg(long, value_name = "PATH")]
        compare: Option<PathBuf>,
    },
    /// Largest constellation whose frame fits the period.
    Mmax(ScenarioArgs),
    /// Check every closed-form and MGF bound against exact and Monte Carlo
    /// averages.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long)]
        json: bool,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Scales every bound before comparison; for exercising failures.
        #[arg(long, hide = true, default_value_t = 1.0)]
        inject_bound_scale: f64,
    },
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario file (TOML).
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    pub scenario: Option<PathBuf>,
    /// Built-in scenario: fig5, fig6a, fig6b, fig7, fig8 or table2.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub json: bool,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// A failed run: the message for standard error and the exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            _ if e.is_numerical() => 3,
            Error::InfeasibleTarget { .. } | Error::NoFeasibleM | Error::AllInfeasible => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("greenlink: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Runs one command, returning the exit status on success paths.
pub fn run(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Energy(args) => energy(args),
        Command::Sweep { scenario, compare } => sweep_cmd(scenario, compare.as_deref()),
        Command::Mmax(args) => mmax(args),
        Command::Verify {
            seed,
            samples,
            json,
            out,
            inject_bound_scale,
        } => verify(*seed, *samples, *json, out.as_deref(), *inject_bound_scale),
    }
}

fn load(args: &ScenarioArgs) -> Result<Scenario, Failure> {
    let (source, loaded) = match (&args.preset, &args.scenario) {
        (Some(name), _) => {
            if !PRESETS.iter().any(|(n, _)| n == name) {
                let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
                return Err(Failure::config(format!(
                    "unknown preset `{name}` (have {})",
                    names.join(", ")
                )));
            }
            (format!("preset {name}"), Scenario::preset(name))
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            (path.display().to_string(), Scenario::parse(&text))
        }
        (None, None) => return Err(Failure::config("no scenario given")),
    };
    loaded.map_err(|e| Failure {
        message: format!("{source}: {e}"),
        ..Failure::from(e)
    })
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| Failure::config(format!("{}: {e}", path.display()))),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::config(format!("stdout: {e}"))),
    }
}

fn energy(args: &ScenarioArgs) -> Result<u8, Failure> {
    let sc = load(args)?;
    let m = sc.m.ok_or_else(|| Failure::config(format!("scheme.m is required for {}", sc.scheme)))?;
    let row = evaluate_cell(&sc.baseline, sc.scheme, m, sc.baseline.link.distance_m, None);
    if let Err(e) = &row.outcome {
        return Err(e.clone().into());
    }
    let report = ReportRow::from(&row);
    let text = if args.json { to_json(&report) + "\n" } else { energy_text(&report) };
    emit(args.out.as_deref(), text.as_bytes())?;
    Ok(if report.feasible { 0 } else { 1 })
}

fn sweep_cmd(args: &ScenarioArgs, compare: Option<&Path>) -> Result<u8, Failure> {
    let sc = load(args)?;
    let spec = sc
        .sweep
        .as_ref()
        .ok_or_else(|| Failure::config("scenario has no [sweep] section"))?;
    let rows = sweep(spec)?;
    let report: Vec<ReportRow> = rows.iter().map(ReportRow::from).collect();
    let bytes = if args.json {
        (to_json(&report) + "\n").into_bytes()
    } else {
        let mut buf = Vec::new();
        write_csv(&mut buf, &report)?;
        buf
    };
    emit(args.out.as_deref(), &bytes)?;
    if let Some(path) = compare {
        let mut buf = Vec::new();
        write_comparison_csv(&mut buf, &table_two_comparison(&rows))?;
        emit(Some(path), &buf)?;
    }
    Ok(0)
}

fn mmax(args: &ScenarioArgs) -> Result<u8, Failure> {
    let sc = load(args)?;
    let m = sc.m.unwrap_or(sc.scheme.min_m());
    let cfg = sc.baseline.config_for(sc.scheme, m);
    let (b_max, m_max) = max_constellation(&cfg)?;
    let text = if args.json {
        format!(
            "{}\n",
            serde_json::json!({ "scheme": sc.scheme, "b_max": b_max, "m_max": m_max })
        )
    } else {
        format!("b_max {b_max}\nM_max {m_max}\n")
    };
    emit(args.out.as_deref(), text.as_bytes())?;
    Ok(0)
}

fn verify(seed: u64, samples: usize, json: bool, out: Option<&Path>, scale: f64) -> Result<u8, Failure> {
    if samples < MIN_SAMPLES {
        return Err(Failure::config(format!(
            "--samples {samples} is below the floor of {MIN_SAMPLES}"
        )));
    }
    let mut grid = VerifyGrid::standard(seed, samples);
    grid.bound_scale = scale;
    let rows = verify_bounds(&grid)?;
    let records: Vec<VerifyRecord> = rows.iter().map(VerifyRecord::from).collect();
    let text = if json { to_json(&records) + "\n" } else { verify_text(&records) };
    emit(out, text.as_bytes())?;
    let code = if rows.iter().any(|r| r.error.is_some()) {
        3
    } else if rows.iter().all(|r| r.pass) {
        0
    } else {
        1
    };
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_code_classes() {
        assert_eq!(Failure::from(Error::NoFeasibleM).code, 1);
        assert_eq!(Failure::from(Error::InfeasibleTarget { target: 0.9, ceiling: 0.5 }).code, 1);
        assert_eq!(Failure::from(Error::MaxIterations(5)).code, 3);
        assert_eq!(Failure::from(Error::Series("x".into())).code, 3);
        assert_eq!(Failure::from(Error::domain("m", "bad")).code, 2);
    }

    #[test]
    fn verify_rejects_small_sample_counts() {
        let f = verify(1, 999, false, None, 1.0).unwrap_err();
        assert_eq!(f.code, 2);
    }

    #[test]
    fn hidden_flag_parses() {
        let cli = Cli::try_parse_from(["greenlink", "verify", "--inject-bound-scale", "0.5"]).unwrap();
        assert!(matches!(cli.command, Command::Verify { inject_bound_scale, .. } if inject_bound_scale == 0.5));
        let help = Cli::command().find_subcommand_mut("verify").unwrap().render_long_help().to_string();
        assert!(!help.contains("inject"));
    }
}
