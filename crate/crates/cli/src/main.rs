//! `nonfree`: compute the nonfreeness of finite many-fermion states from
//! state files, restrict states to mode subsets, generate named example
//! states, and run randomized verification suites.
//!
//! Exit codes: 0 success, 2 parse/validation failure, 3 numerical failure
//! (including verification-suite violations), 4 capacity exceeded.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nonfree_core::{
    double_slater, heisenberg_ground_fermionic, nonfreeness, nonfreeness_pure_report,
    Bipartition, DensityOperator, Geometry, LatticeSpec, ModeCount, NonfreenessOptions,
};

use nonfree_cli::error::CliError;
use nonfree_cli::report::{sha256_hex, LogBase, ReportFile};
use nonfree_cli::statefile::{self, ParsedState};
use nonfree_cli::verify;

#[derive(Parser)]
#[command(
    name = "nonfree",
    version,
    about = "Nonfreeness (free-state relative entropy) of finite many-fermion states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum LogBaseArg {
    /// Bits (base-2 logarithms).
    #[default]
    #[value(name = "2")]
    Two,
    /// Nats (natural logarithms).
    #[value(name = "e")]
    E,
}

impl From<LogBaseArg> for LogBase {
    fn from(value: LogBaseArg) -> Self {
        match value {
            LogBaseArg::Two => LogBase::Two,
            LogBaseArg::E => LogBase::E,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the nonfreeness report of a state file.
    Compute {
        /// Input state file.
        input: PathBuf,
        /// Also evaluate the direct relative-entropy route against the
        /// assembled free state (expensive; dense-capacity limited).
        #[arg(long)]
        cross_check: bool,
        /// Also evaluate the fidelity-based measure.
        #[arg(long)]
        corr: bool,
        /// Logarithm base for all entropies in the report.
        #[arg(long, value_enum, default_value_t)]
        log_base: LogBaseArg,
        /// Write the report to this file as well as stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Restrict a state to a subset of modes (fermionic partial trace)
    /// and report on the restriction.
    Restrict {
        /// Input state file.
        input: PathBuf,
        /// Kept modes, 1-based, comma separated (e.g. --modes 1,2).
        #[arg(long, value_delimiter = ',', required = true)]
        modes: Vec<usize>,
        #[arg(long, value_enum, default_value_t)]
        log_base: LogBaseArg,
        /// Write the restricted state (blocks form) here.
        #[arg(long)]
        out: PathBuf,
        /// Write the restriction's report here as well as stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generate a named example state file.
    Model {
        #[command(subcommand)]
        model: ModelCommand,
    },
    /// Run a randomized verification suite; emits one CSV row per trial.
    Verify {
        /// Suite name.
        #[arg(long, value_enum)]
        suite: verify::Suite,
        /// Number of trials (fixed-size suites ignore this).
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Base seed; trial k derives its stream from (seed, k).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest mode count drawn for random states (capped at 12).
        #[arg(long, default_value_t = 6)]
        max_modes: usize,
        /// Write the CSV here (summary then goes to stdout); without this
        /// the CSV goes to stdout and the summary to stderr.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ModelCommand {
    /// Antiferromagnetic Heisenberg ground state embedded as fermions.
    Heisenberg {
        /// Number of lattice sites (even, at least 2, at most 8).
        #[arg(long)]
        sites: usize,
        #[arg(long, value_enum, default_value_t = GeometryArg::Ring)]
        geometry: GeometryArg,
        /// Output state file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Even superposition of two Slater determinants on disjoint modes.
    DoubleSlater {
        /// Number of orbitals per determinant (total modes = 2m).
        #[arg(long)]
        m: usize,
        /// Output state file.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GeometryArg {
    Ring,
    Chain,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compute {
            input,
            cross_check,
            corr,
            log_base,
            out,
        } => {
            let bytes = read_file(&input)?;
            let state = statefile::parse_state(&bytes)?;
            let options = NonfreenessOptions { cross_check, corr };
            let report = compute_report(&state, options, log_base.into(), &bytes)?;
            let text = report.serialize();
            print!("{text}");
            if let Some(path) = out {
                write_file(&path, &text)?;
            }
            Ok(())
        }
        Command::Restrict {
            input,
            modes,
            log_base,
            out,
            report,
        } => {
            let bytes = read_file(&input)?;
            let state = statefile::parse_state(&bytes)?;
            let restricted = restrict_state(&state, &modes)?;
            write_file(&out, &statefile::serialize_blocks(&restricted))?;
            let options = NonfreenessOptions::default();
            let rep = ReportFile::from_report(
                &nonfreeness(&restricted, options)?,
                restricted.mode_count().get(),
                log_base.into(),
                options,
                Some(sha256_hex(&bytes)),
            );
            let text = rep.serialize();
            print!("{text}");
            if let Some(path) = report {
                write_file(&path, &text)?;
            }
            Ok(())
        }
        Command::Model { model } => {
            let (psi, out) = match model {
                ModelCommand::Heisenberg {
                    sites,
                    geometry,
                    out,
                } => {
                    let geometry = match geometry {
                        GeometryArg::Ring => Geometry::Ring,
                        GeometryArg::Chain => Geometry::Chain,
                    };
                    (
                        heisenberg_ground_fermionic(LatticeSpec::new(sites, geometry)?)?,
                        out,
                    )
                }
                ModelCommand::DoubleSlater { m, out } => (double_slater(m)?, out),
            };
            write_file(&out, &statefile::serialize_pure(&psi))?;
            Ok(())
        }
        Command::Verify {
            suite,
            trials,
            seed,
            max_modes,
            csv,
        } => verify::run(suite, trials, seed, max_modes, csv.as_deref()),
    }
}

fn read_file(path: &PathBuf) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn write_file(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn compute_report(
    state: &ParsedState,
    options: NonfreenessOptions,
    base: LogBase,
    input_bytes: &[u8],
) -> Result<ReportFile, CliError> {
    let (report, modes) = match state {
        ParsedState::Pure(psi) => (
            nonfreeness_pure_report(psi, options)?,
            psi.mode_count().get(),
        ),
        ParsedState::Density(op) => (nonfreeness(op, options)?, op.mode_count().get()),
    };
    Ok(ReportFile::from_report(
        &report,
        modes,
        base,
        options,
        Some(sha256_hex(input_bytes)),
    ))
}

/// Restriction over a 1-based kept-mode list. Keeping every mode converts
/// the state to its dense blocks form unchanged.
fn restrict_state(state: &ParsedState, modes: &[usize]) -> Result<DensityOperator, CliError> {
    let d = match state {
        ParsedState::Pure(psi) => psi.mode_count(),
        ParsedState::Density(op) => op.mode_count(),
    };
    let mut part1 = Vec::with_capacity(modes.len());
    for &m in modes {
        if m == 0 || m > d.get() {
            return Err(CliError::Validation(format!(
                "mode {m} out of range; modes are numbered 1..={}",
                d.get()
            )));
        }
        part1.push(m - 1);
    }
    part1.sort_unstable();
    part1.dedup();
    if part1.len() != modes.len() {
        return Err(CliError::Validation("mode list has duplicates".into()));
    }
    if part1.len() == d.get() {
        return Ok(match state {
            ParsedState::Pure(psi) => DensityOperator::from_pure(psi)?,
            ParsedState::Density(op) => op.clone(),
        });
    }
    let b = Bipartition::new(ModeCount::new(d.get())?, &part1)?;
    Ok(match state {
        ParsedState::Pure(psi) => psi.restrict(&b)?,
        ParsedState::Density(op) => op.restrict(&b)?,
    })
}
