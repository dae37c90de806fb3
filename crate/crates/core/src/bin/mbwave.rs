use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mbwave::app::{self, BareParams, Overrides};
use mbwave::error::{Error, Result};
use mbwave::scenario::{Range, Scenario};

/// Wave equation on the expanding interval 0 < x < 1 + k t.
#[derive(Parser)]
#[command(name = "mbwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Absolute quadrature tolerance.
    #[arg(long = "quad-tol")]
    quad_tol: Option<f64>,
    /// Oracle grid, e.g. `ny=512,tmax=1`.
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write field samples t,x,u,u_t,u_x.
    Solve(Common),
    /// Write the energy trace.
    Energy(Common),
    /// Print the regime record as JSON.
    Classify {
        #[arg(long, conflicts_with_all = ["k", "a", "mu1", "mu2", "xi", "tau"])]
        scenario: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        mu1: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        mu2: Option<f64>,
        #[arg(long)]
        xi: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Classify and integrate over a parameter grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Range for a as start:stop:step, replacing the scenario's sweep.a.
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
    },
    /// Compare with the finite-difference oracle.
    Verify(Common),
}

fn load(common: &Common) -> Result<Scenario> {
    load_with(common, |_| ())
}

fn load_with(common: &Common, edit: impl FnOnce(&mut Scenario)) -> Result<Scenario> {
    let mut scenario = Scenario::load_with(&common.scenario, edit)?;
    let mut overrides = Overrides { quad_tol: common.quad_tol, ..Overrides::default() };
    if let Some(g) = &common.grid {
        overrides.parse_grid(g)?;
    }
    overrides.apply(&mut scenario)?;
    Ok(scenario)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(c) => emit(c.out.as_deref(), &app::run_solve(&load(&c)?)?),
        Command::Energy(c) => emit(c.out.as_deref(), &app::run_energy(&load(&c)?)?),
        Command::Classify { scenario, out, k, a, mu1, mu2, xi, tau } => {
            let record = match scenario {
                Some(path) => app::classify_scenario(&Scenario::load(path)?)?,
                None => app::classify_bare(&BareParams { k, a, mu1, mu2, xi, tau })?,
            };
            emit(out.as_deref(), &(record.to_json() + "\n"))
        }
        Command::Sweep { common, a } => {
            let range = a.as_deref().map(Range::parse).transpose()?;
            let scenario = load_with(&common, |s| {
                if let Some(r) = range {
                    s.sweep.get_or_insert_with(Default::default).a = Some(r);
                }
            })?;
            emit(common.out.as_deref(), &app::run_sweep(&scenario)?)
        }
        Command::Verify(c) => {
            let report = app::run_verify(&load(&c)?)?;
            emit(c.out.as_deref(), &report.to_text())?;
            if report.passed {
                Ok(())
            } else {
                Err(Error::Verification(format!(
                    "field error {:.3e}, energy error {:.3e}, orders {:?}",
                    report.field_error.last().copied().unwrap_or(f64::NAN),
                    report.energy_error,
                    report.orders
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
