//! Command-line interface: propagate states, locate death coordinates,
//! tabulate sweeps, and run the built-in cross-checks.
//!
//! Exit codes: 0 on success, 1 on domain or self-check failures, 2 on usage
//! errors (argument parsing, malformed grids, misapplied flags).

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use esdlab::dynamics::{analytic_coefficients, DynamicsError};
use esdlab::entanglement::{concurrence_x, EntanglementError};
use esdlab::esd::{closed_form_roots_wzero, esd_report, EsdError};
use esdlab::families::{parse_family_spec, FamilyError};
use esdlab::state::{BathParams, StateError, XState};
use esdlab::sweep::{
    boundary_function, parse_grid, sweep_ye, write_boundary_csv, write_json, write_ye_csv,
    SweepError, YeSweepSpec,
};
use esdlab::verify::{run_verify, VerifyConfig};

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Entanglement(#[from] EntanglementError),
    #[error(transparent)]
    Esd(#[from] EsdError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error("{0}")]
    Message(String),
}

fn parse_finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("value must be finite".into())
    }
}

fn parse_nonneg(s: &str) -> Result<f64, String> {
    let v = parse_finite(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err("value must be nonnegative".into())
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_finite(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err("value must be positive".into())
    }
}

/// Inclusive start:stop:step grid, parsed at the command line boundary.
#[derive(Debug, Clone)]
struct Grid(Vec<f64>);

fn parse_grid_arg(s: &str) -> Result<Grid, String> {
    parse_grid(s).map(Grid).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "esdlab",
    version,
    about = "Entanglement decay of two qubits in independent thermal reservoirs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate a state and tabulate populations, coherences, and concurrence
    Evolve {
        /// Initial state: family spec ("bell-psi-plus", "ye:0.3", "werner:0.8",
        /// "mems:0.5") or path to a JSON state file
        #[arg(long)]
        state: String,
        /// Mean thermal occupation of both baths
        #[arg(long, value_parser = parse_nonneg)]
        nbar: f64,
        /// Decay rate
        #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
        gamma: f64,
        /// Final time
        #[arg(long, value_parser = parse_nonneg)]
        t_max: f64,
        /// Output sampling step [default: 1e-3 / gamma]
        #[arg(long, value_parser = parse_positive)]
        dt: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write here instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Locate where and when a state disentangles
    Death {
        /// Initial state: family spec or path to a JSON state file
        #[arg(long)]
        state: String,
        #[arg(long, value_parser = parse_nonneg)]
        nbar: f64,
        #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
        gamma: f64,
        /// Cross-check the root set against the closed form (requires w = 0)
        #[arg(long)]
        closed_form: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Concurrence of the uniform-middle family over occupation, parameter,
    /// and decay coordinate
    Sweep {
        /// Comma-separated occupations
        #[arg(long, value_delimiter = ',', value_parser = parse_nonneg, required = true)]
        nbars: Vec<f64>,
        /// Family parameter grid start:stop:step
        #[arg(long, value_parser = parse_grid_arg)]
        alpha_grid: Grid,
        /// Decay coordinate grid start:stop:step
        #[arg(long, value_parser = parse_grid_arg)]
        x_grid: Grid,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Death-boundary function of a three-parameter state (columns X, F)
    Fig2 {
        #[arg(long, default_value_t = 0.1, value_parser = parse_nonneg)]
        a0: f64,
        #[arg(long, default_value_t = 0.05, value_parser = parse_nonneg)]
        d0: f64,
        /// Real inner coherence
        #[arg(long, default_value_t = 0.3, value_parser = parse_finite)]
        z: f64,
        #[arg(long, default_value_t = 0.8, value_parser = parse_nonneg)]
        nbar: f64,
        #[arg(long, value_parser = parse_grid_arg, default_value = "0:1:0.005")]
        x_grid: Grid,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Concurrence surface of the uniform-middle family on the pinned
    /// reference grids (occupations 0, 0.2, 1, 100)
    Fig3 {
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Cross-validate the independent computation paths against each other
    Verify {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Deliberately corrupt the propagator by this relative amount; any
        /// value at or above ~1e-7 must make the run fail
        #[arg(long, default_value_t = 0.0, value_parser = parse_nonneg)]
        perturb_propagator: f64,
        /// Occupation for the finite-death check (0 renders it inapplicable)
        #[arg(long, value_parser = parse_nonneg)]
        nbar: Option<f64>,
    },
}

fn load_state(spec: &str) -> Result<XState, CliError> {
    let path = Path::new(spec);
    if path.exists() {
        return Ok(XState::from_json_str(&fs::read_to_string(path)?)?);
    }
    parse_family_spec(spec).map_err(|e| {
        CliError::Message(format!(
            "cannot interpret \"{spec}\" as a state: {e}; pass a family spec or a path to a JSON state file"
        ))
    })
}

fn open_output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Serialize)]
struct EvolveRow {
    t: f64,
    x: f64,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    z_re: f64,
    z_im: f64,
    w_re: f64,
    w_im: f64,
    concurrence: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_evolve(
    state: &str,
    nbar: f64,
    gamma: f64,
    t_max: f64,
    dt: Option<f64>,
    format: Format,
    output: &Option<PathBuf>,
) -> Result<(), CliError> {
    let initial = load_state(state)?;
    let bath = BathParams::new(gamma, nbar)?;
    let dt = dt.unwrap_or(1e-3 / gamma);
    let coeffs = analytic_coefficients(&initial, nbar)?;
    let mut times: Vec<f64> = Vec::new();
    let mut i = 0u64;
    loop {
        let t = i as f64 * dt;
        if t > t_max * (1.0 + 1e-12) {
            break;
        }
        times.push(t);
        i += 1;
    }
    if times.last().copied().unwrap_or(f64::NEG_INFINITY) < t_max * (1.0 - 1e-12) {
        times.push(t_max);
    }
    let rows: Vec<EvolveRow> = times
        .iter()
        .map(|&t| -> Result<EvolveRow, CliError> {
            let x = (-bath.gamma() * bath.nu() * t).exp();
            let s = coeffs.evaluate(x);
            let concurrence = concurrence_x(&s)?.value();
            Ok(EvolveRow {
                t,
                x,
                a: s.a,
                b: s.b,
                c: s.c,
                d: s.d,
                z_re: s.z.re,
                z_im: s.z.im,
                w_re: s.w.re,
                w_im: s.w.im,
                concurrence,
            })
        })
        .collect::<Result<_, _>>()?;
    let mut out = open_output(output)?;
    match format {
        Format::Csv => {
            writeln!(out, "t,X,a,b,c,d,z_re,z_im,w_re,w_im,C")?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    fmt17(r.t),
                    fmt17(r.x),
                    fmt17(r.a),
                    fmt17(r.b),
                    fmt17(r.c),
                    fmt17(r.d),
                    fmt17(r.z_re),
                    fmt17(r.z_im),
                    fmt17(r.w_re),
                    fmt17(r.w_im),
                    fmt17(r.concurrence)
                )?;
            }
        }
        Format::Json => write_json(&mut out, &rows)?,
    }
    out.flush()?;
    Ok(())
}

fn run_death(
    state: &str,
    nbar: f64,
    gamma: f64,
    closed_form: bool,
    output: &Option<PathBuf>,
) -> Result<ExitCode, CliError> {
    let initial = load_state(state)?;
    let bath = BathParams::new(gamma, nbar)?;
    let report = esd_report(&initial, &bath)?;
    if closed_form {
        match closed_form_roots_wzero(&initial, nbar) {
            Ok(cf) => {
                for root in &report.roots_inner {
                    let matched = cf
                        .roots
                        .iter()
                        .any(|r| (r - root).abs() <= 1e-9 * root.abs().max(1.0));
                    if !matched {
                        return Err(CliError::Message(format!(
                            "closed form disagrees with the quartic solver at root {root}"
                        )));
                    }
                }
            }
            Err(EsdError::WCoherencePresent { w_abs }) => {
                eprintln!(
                    "error: --closed-form applies only to states with zero outer coherence (|w| = {w_abs})"
                );
                return Ok(ExitCode::from(2));
            }
            Err(EsdError::DegenerateDenominator { denominator }) => {
                eprintln!(
                    "note: closed form degenerate (4E = {denominator}); reporting quartic-solver roots only"
                );
            }
            Err(e) => return Err(e.into()),
        }
    }
    let mut out = open_output(output)?;
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    )?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn run_sweep(spec: &YeSweepSpec, format: Format, output: &Option<PathBuf>) -> Result<(), CliError> {
    let rows = sweep_ye(spec)?;
    let mut out = open_output(output)?;
    match format {
        Format::Csv => write_ye_csv(&mut out, &rows)?,
        Format::Json => write_json(&mut out, &rows)?,
    }
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Evolve {
            state,
            nbar,
            gamma,
            t_max,
            dt,
            format,
            output,
        } => {
            run_evolve(&state, nbar, gamma, t_max, dt, format, &output)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Death {
            state,
            nbar,
            gamma,
            closed_form,
            output,
        } => run_death(&state, nbar, gamma, closed_form, &output),
        Command::Sweep {
            nbars,
            alpha_grid,
            x_grid,
            format,
            output,
        } => {
            let spec = YeSweepSpec {
                nbars,
                alphas: alpha_grid.0,
                xs: x_grid.0,
            };
            run_sweep(&spec, format, &output)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Fig2 {
            a0,
            d0,
            z,
            nbar,
            x_grid,
            format,
            output,
        } => {
            let rows = boundary_function(a0, d0, z, nbar, &x_grid.0)?;
            let mut out = open_output(&output)?;
            match format {
                Format::Csv => write_boundary_csv(&mut out, &rows)?,
                Format::Json => write_json(&mut out, &rows)?,
            }
            out.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Fig3 { format, output } => {
            let spec = YeSweepSpec {
                nbars: vec![0.0, 0.2, 1.0, 100.0],
                alphas: parse_grid("0:1:0.01")?,
                xs: parse_grid("0:1:0.005")?,
            };
            run_sweep(&spec, format, &output)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            seed,
            perturb_propagator,
            nbar,
        } => {
            let config = VerifyConfig {
                seed,
                propagator_perturbation: perturb_propagator,
                nbar,
            };
            let report = run_verify(&config);
            println!("{report}");
            Ok(if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
