//! Canonical sweeps behind each reproduced figure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::{SchemeKind, SchemeSpec};
use crate::harness::{
    average_over_grid, default_grid, format_sig, run_sweep, SweepConfig, SweepResult,
};
use crate::measures::Measure;
use crate::plot::sweep_svg;
use crate::states::StateFamily;

pub const FIGURE_SEED: u64 = 20200101;
pub const FIGURE_REPETITIONS: u32 = 1000;
pub const FIGURE_BUDGET: u64 = 1200;

/// Reference grid averages for the l1-norm comparison, left to right.
pub const FIG2_REFERENCE: [f64; 5] = [0.0263, 0.0234, 0.0156, 0.0176, 0.0187];
/// Reference grid averages for the coherence of formation, left to right.
pub const FIGS1_REFERENCE: [f64; 5] = [0.0211, 0.0194, 0.0168, 0.0204, 0.0205];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FigureName {
    Fig1a,
    Fig1b,
    Fig2,
    Fig3,
    FigS1,
}

impl FigureName {
    pub const ALL: [FigureName; 5] = [
        FigureName::Fig1a,
        FigureName::Fig1b,
        FigureName::Fig2,
        FigureName::Fig3,
        FigureName::FigS1,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            FigureName::Fig1a => "fig1a",
            FigureName::Fig1b => "fig1b",
            FigureName::Fig2 => "fig2",
            FigureName::Fig3 => "fig3",
            FigureName::FigS1 => "figS1",
        }
    }

    fn title(self) -> &'static str {
        match self {
            FigureName::Fig1a | FigureName::Fig2 => "l1-norm coherence, qubit family",
            FigureName::Fig1b => "relative entropy of coherence, qubit family",
            FigureName::Fig3 => "l1-norm coherence, qutrit family",
            FigureName::FigS1 => "coherence of formation, qubit family",
        }
    }

    pub fn family(self) -> StateFamily {
        match self {
            FigureName::Fig3 => StateFamily::QutritAlpha,
            _ => StateFamily::QubitTheta,
        }
    }

    pub fn measure(self) -> Measure {
        match self {
            FigureName::Fig1b => Measure::RelEnt,
            FigureName::FigS1 => Measure::Formation,
            _ => Measure::L1,
        }
    }

    pub fn schemes(self) -> &'static [SchemeKind] {
        const QUBIT_ALL: &[SchemeKind] = &[
            SchemeKind::CmsQubit,
            SchemeKind::DirectPauli,
            SchemeKind::Adaptive2Step,
            SchemeKind::TomoQubit,
        ];
        match self {
            FigureName::Fig1a | FigureName::Fig2 | FigureName::FigS1 => QUBIT_ALL,
            FigureName::Fig1b => &[SchemeKind::CmsQubit, SchemeKind::TomoQubit],
            FigureName::Fig3 => &[SchemeKind::CmsQutrit, SchemeKind::TomoQutrit],
        }
    }

    /// Reference grid averages, if the figure has them.
    pub fn reference_averages(self) -> Option<&'static [f64]> {
        match self {
            FigureName::Fig2 => Some(&FIG2_REFERENCE),
            FigureName::FigS1 => Some(&FIGS1_REFERENCE),
            _ => None,
        }
    }
}

impl FromStr for FigureName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.tag() == s)
            .ok_or_else(|| Error::UnknownFigure(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FigureOptions {
    pub seed: u64,
    pub repetitions: u32,
    pub budget: u64,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self {
            seed: FIGURE_SEED,
            repetitions: FIGURE_REPETITIONS,
            budget: FIGURE_BUDGET,
        }
    }
}

pub fn figure_config(name: FigureName, opts: &FigureOptions) -> Result<SweepConfig> {
    let schemes = name
        .schemes()
        .iter()
        .map(|&k| SchemeSpec::new(k, name.measure(), opts.budget))
        .collect::<Result<Vec<_>>>()?;
    SweepConfig::new(
        name.family(),
        default_grid(),
        schemes,
        opts.repetitions,
        opts.budget,
        opts.seed,
    )
}

#[derive(Clone, Debug)]
pub struct FigureOutput {
    pub name: FigureName,
    pub result: SweepResult,
    /// Grid average per scheme, in configuration order.
    pub averages: Vec<(SchemeSpec, f64)>,
}

impl FigureOutput {
    pub fn average(&self, kind: SchemeKind) -> Option<f64> {
        self.averages
            .iter()
            .find(|(s, _)| s.kind == kind)
            .map(|(_, v)| *v)
    }

    pub fn svg(&self) -> String {
        sweep_svg(&self.result, self.name.title())
    }

    /// Simulated grid averages followed by the reference values.
    pub fn averages_csv(&self) -> String {
        let mut s = String::from("source,label,grid_average\n");
        for (spec, v) in &self.averages {
            let _ = writeln!(
                s,
                "simulated,{}:{},{}",
                spec.kind,
                spec.measure,
                format_sig(*v, 9)
            );
        }
        for (i, v) in self
            .name
            .reference_averages()
            .unwrap_or(&[])
            .iter()
            .enumerate()
        {
            let _ = writeln!(s, "reference,bar{},{}", i + 1, format_sig(*v, 9));
        }
        s
    }
}

pub fn run_figure(name: FigureName, opts: &FigureOptions) -> Result<FigureOutput> {
    let result = run_sweep(&figure_config(name, opts)?)?;
    let averages = result
        .config
        .schemes
        .iter()
        .map(|s| Ok((*s, average_over_grid(&result, s)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FigureOutput {
        name,
        result,
        averages,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Writes `<name>.csv`, `<name>.svg` and, for figures with reference
/// averages, `<name>_averages.csv` into `dir`.
pub fn write_figure(out: &FigureOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let tag = out.name.tag();
    let mut files = vec![
        (dir.join(format!("{tag}.csv")), out.result.to_csv()),
        (dir.join(format!("{tag}.svg")), out.svg()),
    ];
    if out.name.reference_averages().is_some() {
        files.push((dir.join(format!("{tag}_averages.csv")), out.averages_csv()));
    }
    for (path, contents) in &files {
        write_file(path, contents)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}
