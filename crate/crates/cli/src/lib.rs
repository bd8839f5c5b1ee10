//! The `coherence-bench` command line.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use coherence_core::config::parse_sweep_config;
use coherence_core::figures::{run_figure, write_figure, write_file, FigureName, FigureOptions};
use coherence_core::harness::format_sig;
use coherence_core::measurement::{bell_basis, outcome_probs, two_qutrit_cms_basis};
use coherence_core::plot::sweep_svg;
use coherence_core::{run_sweep, BlochVector, DensityMatrix, Error, Measure, StateFamily};

const EXIT_USAGE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "coherence-bench",
    version,
    about = "Coherence estimation benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep described by a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Print exact two-copy outcome probabilities and coherences of a state.
    Probs {
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        /// Qubit angle in radians (accepts forms like `pi/6`).
        #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
        theta: Option<f64>,
        /// Qutrit angle in radians (accepts forms like `pi/4`).
        #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
        alpha: Option<f64>,
        /// Explicit qubit Bloch vector `x,y,z`.
        #[arg(long, allow_hyphen_values = true)]
        bloch: Option<String>,
    },
    /// Reproduce one of the canonical figures.
    Figure {
        /// fig1a, fig1b, fig2, fig3 or figS1
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<u32>,
        #[arg(long)]
        shots: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Qubit,
    Qutrit,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::UnknownFigure(_)
            | Error::BadBudget { .. }
            | Error::UnsupportedMeasure { .. }
            | Error::OutOfRange { .. }
            | Error::InvalidState(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().replace(' ', "");
    let bad = || format!("cannot parse angle `{s}`");
    let Some(idx) = t.find("pi") else {
        return t.parse().map_err(|_| bad());
    };
    let coeff = t[..idx].trim_end_matches('*');
    let coeff: f64 = match coeff {
        "" => 1.0,
        "-" => -1.0,
        c => c.parse().map_err(|_| bad())?,
    };
    let rest = &t[idx + 2..];
    let denom: f64 = match rest.strip_prefix('/') {
        Some(d) => d.parse().map_err(|_| bad())?,
        None if rest.is_empty() => 1.0,
        None => return Err(bad()),
    };
    Ok(coeff * PI / denom)
}

fn show(x: f64) -> String {
    format_sig(if x.abs() < 1e-15 { 0.0 } else { x }, 9)
}

fn tuple(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| show(x)).collect();
    format!("({})", parts.join(", "))
}

fn cmd_sweep(config: PathBuf, csv: PathBuf, svg: Option<PathBuf>) -> Result<(), Failure> {
    let text = fs::read_to_string(&config)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", config.display())))?;
    let cfg = parse_sweep_config(&text)?;
    let result = run_sweep(&cfg).map_err(|e| Failure::Runtime(e.to_string()))?;
    write_file(&csv, &result.to_csv()).map_err(|e| Failure::Runtime(e.to_string()))?;
    if let Some(path) = svg {
        write_file(&path, &sweep_svg(&result, "mean error"))
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    Ok(())
}

fn cmd_probs(
    family: Option<FamilyArg>,
    theta: Option<f64>,
    alpha: Option<f64>,
    bloch: Option<String>,
) -> Result<(), Failure> {
    let usage = |m: &str| Failure::Usage(m.to_string());
    let (rho, header): (DensityMatrix, String) = match (family, theta, alpha, bloch) {
        (None | Some(FamilyArg::Qubit), None, None, Some(b)) => {
            let xs: Vec<f64> = b
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| usage("--bloch expects three comma-separated numbers"))?;
            let [x, y, z] = xs[..] else {
                return Err(usage("--bloch expects three comma-separated numbers"));
            };
            let v = BlochVector::new(x, y, z)?;
            (v.to_density(), format!("bloch = {}", tuple(&[x, y, z])))
        }
        (Some(FamilyArg::Qubit), Some(t), None, None) => {
            (StateFamily::QubitTheta.state(t)?, format!("family = qubit\ntheta = {}", show(t)))
        }
        (Some(FamilyArg::Qutrit), None, Some(a), None) => {
            (StateFamily::QutritAlpha.state(a)?, format!("family = qutrit\nalpha = {}", show(a)))
        }
        _ => {
            return Err(usage(
                "expected `--family qubit --theta <rad>`, `--bloch x,y,z` or `--family qutrit --alpha <rad>`",
            ))
        }
    };
    let basis = if rho.dim() == 2 {
        bell_basis()
    } else {
        two_qutrit_cms_basis()
    };
    let dist = outcome_probs(&rho.two_copies(), &basis)?;
    println!("{header}");
    println!("outcomes = ({})", basis.labels().join(", "));
    println!("P = {}", tuple(dist.probabilities()));
    println!("C_l1 = {}", show(Measure::L1.evaluate(&rho)?));
    println!("C_r = {}", show(Measure::RelEnt.evaluate(&rho)?));
    if rho.dim() == 2 {
        println!("C_f = {}", show(Measure::Formation.evaluate(&rho)?));
    }
    Ok(())
}

fn cmd_figure(
    name: &str,
    out: PathBuf,
    seed: Option<u64>,
    reps: Option<u32>,
    shots: Option<u64>,
) -> Result<(), Failure> {
    let name: FigureName = name.parse()?;
    let defaults = FigureOptions::default();
    let opts = FigureOptions {
        seed: seed.unwrap_or(defaults.seed),
        repetitions: reps.unwrap_or(defaults.repetitions),
        budget: shots.unwrap_or(defaults.budget),
    };
    let fig = run_figure(name, &opts)?;
    let files = write_figure(&fig, &out).map_err(|e| Failure::Runtime(e.to_string()))?;
    for (spec, avg) in &fig.averages {
        eprintln!("{}:{} grid average {}", spec.kind, spec.measure, show(*avg));
    }
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code: 0 success, 2 usage or configuration error, 3 runtime
/// error.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    let outcome = match cli.command {
        Command::Sweep { config, csv, svg } => cmd_sweep(config, csv, svg),
        Command::Probs {
            family,
            theta,
            alpha,
            bloch,
        } => cmd_probs(family, theta, alpha, bloch),
        Command::Figure {
            name,
            out,
            seed,
            reps,
            shots,
        } => cmd_figure(&name, out, seed, reps, shots),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            EXIT_RUNTIME
        }
    }
}
