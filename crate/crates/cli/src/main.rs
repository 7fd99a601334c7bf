use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use demandtier_cli::commands::{self, Table, DEFAULT_E};
use demandtier_cli::{CliError, Scenario};

#[derive(Parser)]
#[command(
    name = "demandtier",
    version,
    about = "Demand-hierarchy price dynamics"
)]
struct Cli {
    /// Scenario file (TOML). Omitted sections take their defaults.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Education level. Overrides the simulated education path where one is used.
    #[arg(long = "E", global = true, allow_negative_numbers = true)]
    e: Option<f64>,

    /// Write CSV here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Print the effective scenario as TOML and exit.
    #[arg(long, global = true)]
    dump_defaults: bool,

    /// Exit with code 3 if a fold transition could not be refined.
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed points of the price map at one education level.
    FixedPoints,
    /// Root locus over the education grid and refined fold thresholds.
    Bifurcation,
    /// Time path of prices, productivities and household demand.
    Simulate,
    /// Budget shares and income elasticities across an income grid.
    Statics,
    /// Planner first-order-condition decomposition.
    PlannerFoc,
}

fn emit(table: &Table, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => table.write(BufWriter::new(File::create(p)?)),
        None => table.write(io::stdout().lock()),
    }
}

fn thresholds_path(p: &Path) -> PathBuf {
    let stem = p.file_stem().unwrap_or_default().to_string_lossy();
    let name = match p.extension() {
        Some(ext) => format!("{stem}_thresholds.{}", ext.to_string_lossy()),
        None => format!("{stem}_thresholds"),
    };
    p.with_file_name(name)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let sc = match &cli.scenario {
        Some(p) => Scenario::load(p)?,
        None => Scenario::default(),
    };
    if cli.dump_defaults {
        let text = sc.to_toml();
        match &cli.out {
            Some(p) => std::fs::write(p, text)?,
            None => io::stdout().lock().write_all(text.as_bytes())?,
        }
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(CliError::Config(
            "no subcommand given (try `demandtier --help`)".into(),
        ));
    };
    let out = cli.out.as_deref();
    match command {
        Command::FixedPoints => emit(
            &commands::fixed_points(&sc, cli.e.unwrap_or(DEFAULT_E))?,
            out,
        ),
        Command::Statics => emit(&commands::statics(&sc, cli.e.unwrap_or(DEFAULT_E))?, out),
        Command::Simulate => emit(&commands::simulate(&sc, cli.e)?, out),
        Command::PlannerFoc => emit(&commands::planner_foc(&sc, cli.e)?, out),
        Command::Bifurcation => {
            let b = commands::bifurcation(&sc)?;
            match out {
                Some(p) => {
                    emit(&b.locus, Some(p))?;
                    emit(&b.thresholds, Some(&thresholds_path(p)))?;
                }
                None => {
                    let mut w = io::stdout().lock();
                    b.locus.write(&mut w)?;
                    writeln!(w)?;
                    b.thresholds.write(&mut w)?;
                }
            }
            for n in &b.notes {
                eprintln!("{n}");
            }
            if cli.strict && b.unrefined > 0 {
                return Err(CliError::Numerical(format!(
                    "{} transition(s) could not be refined",
                    b.unrefined
                )));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
