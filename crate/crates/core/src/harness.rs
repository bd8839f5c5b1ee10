//! Monte Carlo sweeps over a state family.
//!
//! A sweep evaluates every (grid point, scheme) cell `T` times. Each task owns
//! a [`RandomStream`] seeded by [`task_seed`] from the master seed and the
//! cell's *canonical* indices: the rank of the parameter in the sorted grid and
//! a fixed ordinal per (scheme kind, measure). Reordering the grid or the
//! scheme list therefore leaves every cell's statistics unchanged, and results
//! are written into pre-indexed slots so parallel and sequential execution
//! produce identical output.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{estimate, Estimate, EstimatorSettings, ExactCounts, SchemeSpec};
use crate::measures::Measure;
use crate::rng::{task_seed, RandomStream, RNG_ALGO};
use crate::states::{DensityMatrix, StateFamily};

/// Number of points in the default parameter grid.
pub const DEFAULT_GRID_POINTS: usize = 13;

/// `k π/24` for `k = 0..=12`.
pub fn default_grid() -> Vec<f64> {
    uniform_grid(DEFAULT_GRID_POINTS)
}

/// `n` evenly spaced points covering `[0, π/2]`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|k| k as f64 * FRAC_PI_2 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub family: StateFamily,
    /// Radians in `[0, π/2]`.
    pub grid: Vec<f64>,
    pub schemes: Vec<SchemeSpec>,
    pub repetitions: u32,
    pub budget: u64,
    pub master_seed: u64,
    /// Replace sampling by exact expected counts.
    pub oracle: bool,
    pub settings: EstimatorSettings,
}

impl SweepConfig {
    pub fn new(
        family: StateFamily,
        grid: Vec<f64>,
        schemes: Vec<SchemeSpec>,
        repetitions: u32,
        budget: u64,
        master_seed: u64,
    ) -> Result<Self> {
        let cfg = Self {
            family,
            grid,
            schemes,
            repetitions,
            budget,
            master_seed,
            oracle: false,
            settings: EstimatorSettings::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Config("parameter grid is empty".into()));
        }
        if let Some(p) = self.grid.iter().find(|p| !(0.0..=FRAC_PI_2).contains(*p)) {
            return Err(Error::Config(format!("grid point {p} outside [0, pi/2]")));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no schemes selected".into()));
        }
        for s in &self.schemes {
            if s.kind.dim() != self.family.dim() {
                return Err(Error::Config(format!(
                    "scheme {} acts on dimension {}, family {} has dimension {}",
                    s.kind,
                    s.kind.dim(),
                    self.family,
                    self.family.dim()
                )));
            }
            if s.budget != self.budget {
                return Err(Error::Config(format!(
                    "scheme {} has budget {} but the sweep budget is {}",
                    s.kind, s.budget, self.budget
                )));
            }
            // re-run the scheme invariants
            SchemeSpec::new(s.kind, s.measure, s.budget)?;
        }
        Ok(())
    }

    /// Rank of each grid point in ascending order (equal values share a rank).
    fn canonical_grid_indices(&self) -> Vec<u64> {
        let mut sorted = self.grid.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        self.grid
            .iter()
            .map(|p| sorted.partition_point(|q| q.total_cmp(p).is_lt()) as u64)
            .collect()
    }
}

/// Stable ordinal of a (scheme kind, measure) pair, independent of list order.
pub fn canonical_scheme_index(spec: &SchemeSpec) -> u64 {
    let kind = spec.kind as u64;
    let measure = Measure::ALL
        .iter()
        .position(|m| *m == spec.measure)
        .unwrap() as u64;
    kind * Measure::ALL.len() as u64 + measure
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    /// Position in the configured grid.
    pub grid_index: usize,
    pub parameter: f64,
    pub scheme: SchemeSpec,
    /// Exact coherence of the state.
    pub truth: f64,
    pub mean_estimate: f64,
    /// `(1/T) Σ |C_est - C|`.
    pub mean_error: f64,
    /// Population standard deviation of the per-repetition errors.
    pub std_error: f64,
    pub repetitions: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub rng_algo: &'static str,
    /// Grid-major, schemes in configured order.
    pub cells: Vec<CellResult>,
}

pub const CSV_HEADER: &str =
    "family,parameter_rad,scheme,measure,budget_N,repetitions,mean_error,std_error,master_seed,rng_algo";

impl SweepResult {
    pub fn cells_for<'a>(
        &'a self,
        scheme: &'a SchemeSpec,
    ) -> impl Iterator<Item = &'a CellResult> + 'a {
        self.cells.iter().filter(move |c| c.scheme == *scheme)
    }

    /// Mean errors of one scheme in grid order.
    pub fn error_curve(&self, scheme: &SchemeSpec) -> Vec<f64> {
        self.cells_for(scheme).map(|c| c.mean_error).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(128 * (self.cells.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                self.config.family.tag(),
                format_sig(c.parameter, 9),
                c.scheme.kind.tag(),
                c.scheme.measure.tag(),
                c.scheme.budget,
                c.repetitions,
                format_sig(c.mean_error, 9),
                format_sig(c.std_error, 9),
                self.config.master_seed,
                self.rng_algo,
            );
        }
        out
    }
}

/// Formats like C's `%.{digits}g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled, otherwise
    /// falls back to sequential execution.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    run_sweep_with(cfg, Execution::default())
}

struct Cell {
    grid_index: usize,
    canonical_grid: u64,
    scheme_index: usize,
    canonical_scheme: u64,
    state: DensityMatrix,
    truth: f64,
}

pub fn run_sweep_with(cfg: &SweepConfig, exec: Execution) -> Result<SweepResult> {
    cfg.validate()?;
    let grid_keys = cfg.canonical_grid_indices();
    let mut cells = Vec::with_capacity(cfg.grid.len() * cfg.schemes.len());
    for (gi, &param) in cfg.grid.iter().enumerate() {
        let state = cfg.family.state(param)?;
        for (si, scheme) in cfg.schemes.iter().enumerate() {
            cells.push(Cell {
                grid_index: gi,
                canonical_grid: grid_keys[gi],
                scheme_index: si,
                canonical_scheme: canonical_scheme_index(scheme),
                truth: scheme.measure.evaluate(&state)?,
                state: state.clone(),
            });
        }
    }

    let reps = cfg.repetitions as usize;
    let run_task = |task: usize| -> Result<f64> {
        let cell = &cells[task / reps];
        let rep = (task % reps) as u64;
        let scheme = &cfg.schemes[cell.scheme_index];
        let est = run_one(
            cfg,
            scheme,
            &cell.state,
            cell.canonical_grid,
            cell.canonical_scheme,
            rep,
        )
        .map_err(|e| Error::Task {
            grid_index: cell.grid_index,
            scheme: format!("{}:{}", scheme.kind, scheme.measure),
            repetition: rep as u32,
            source: Box::new(e),
        })?;
        Ok(est.value)
    };

    let n_tasks = cells.len() * reps;
    let estimates: Vec<f64> = match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n_tasks)
            .into_par_iter()
            .map(run_task)
            .collect::<Result<_>>()?,
        _ => (0..n_tasks).map(run_task).collect::<Result<_>>()?,
    };

    let results = cells
        .iter()
        .zip(estimates.chunks(reps))
        .map(|(cell, values)| {
            let errors: Vec<f64> = values.iter().map(|v| (v - cell.truth).abs()).collect();
            let (mean_error, std_error) = mean_and_population_std(&errors);
            CellResult {
                grid_index: cell.grid_index,
                parameter: cfg.grid[cell.grid_index],
                scheme: cfg.schemes[cell.scheme_index],
                truth: cell.truth,
                mean_estimate: values.iter().sum::<f64>() / values.len() as f64,
                mean_error,
                std_error,
                repetitions: cfg.repetitions,
            }
        })
        .collect();

    Ok(SweepResult {
        config: cfg.clone(),
        rng_algo: RNG_ALGO,
        cells: results,
    })
}

fn run_one(
    cfg: &SweepConfig,
    scheme: &SchemeSpec,
    state: &DensityMatrix,
    grid_key: u64,
    scheme_key: u64,
    rep: u64,
) -> Result<Estimate> {
    if cfg.oracle {
        estimate(scheme, state, &cfg.settings, &mut ExactCounts)
    } else {
        let mut rng = RandomStream::new(task_seed(cfg.master_seed, grid_key, scheme_key, rep));
        estimate(scheme, state, &cfg.settings, &mut rng)
    }
}

fn mean_and_population_std(xs: &[f64]) -> (f64, f64) {
    // shifted by the first sample
    let n = xs.len() as f64;
    let shift = xs[0];
    let mean_d = xs.iter().map(|x| x - shift).sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - shift - mean_d).powi(2)).sum::<f64>() / n;
    ((shift + mean_d).max(0.0), var.max(0.0).sqrt())
}

/// Unweighted mean of `mean_error` over the grid for one scheme.
pub fn average_over_grid(result: &SweepResult, scheme: &SchemeSpec) -> Result<f64> {
    let curve = result.error_curve(scheme);
    if curve.is_empty() {
        return Err(Error::UnknownScheme(format!(
            "{}:{}",
            scheme.kind, scheme.measure
        )));
    }
    Ok(curve.iter().sum::<f64>() / curve.len() as f64)
}

/// Runs a scheme on exact expected counts.
pub fn oracle_mode(scheme: &SchemeSpec, rho: &DensityMatrix) -> Result<Estimate> {
    estimate(scheme, rho, &EstimatorSettings::default(), &mut ExactCounts)
}
