//! Coherence estimation pipelines.
//!
//! Every scheme is split into a data-collection step, which spends the copy
//! budget through a [`CountSource`], and a pure `*_from_counts` estimator.
//! Drawing from a [`RandomStream`] gives finite-shot statistics; drawing from
//! [`ExactCounts`] feeds the expected counts (`shots * p`) and turns every
//! scheme into its infinite-sample limit.

use std::fmt;

use crate::error::{Error, Result};
use crate::measurement::{
    bell_basis, equatorial_basis, pauli_basis, qutrit_mub_bases, sample_counts,
    two_qutrit_cms_basis, OutcomeDistribution, PauliAxis, ProjectiveBasis, QUTRIT_PAIRS,
};
use crate::measures::{binary_entropy, c_formation_from_offdiag, Measure};
use crate::mle::{mle_from_weights, MleOptions};
use crate::rng::RandomStream;
use crate::states::{bloch_of, DensityMatrix};

/// Supplies outcome counts for `shots` measurements of a distribution.
pub trait CountSource {
    fn draw(&mut self, dist: &OutcomeDistribution, shots: u64) -> Vec<f64>;
}

impl CountSource for RandomStream {
    fn draw(&mut self, dist: &OutcomeDistribution, shots: u64) -> Vec<f64> {
        sample_counts(dist, shots, self)
            .counts
            .into_iter()
            .map(|n| n as f64)
            .collect()
    }
}

/// Infinite-sample oracle: counts equal their expectations.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactCounts;

impl CountSource for ExactCounts {
    fn draw(&mut self, dist: &OutcomeDistribution, shots: u64) -> Vec<f64> {
        dist.probabilities()
            .iter()
            .map(|p| p * shots as f64)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    CmsQubit,
    DirectPauli,
    Adaptive2Step,
    TomoQubit,
    CmsQutrit,
    TomoQutrit,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 6] = [
        SchemeKind::CmsQubit,
        SchemeKind::DirectPauli,
        SchemeKind::Adaptive2Step,
        SchemeKind::TomoQubit,
        SchemeKind::CmsQutrit,
        SchemeKind::TomoQutrit,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            SchemeKind::CmsQubit => "cms_qubit",
            SchemeKind::DirectPauli => "direct_pauli",
            SchemeKind::Adaptive2Step => "adaptive_2step",
            SchemeKind::TomoQubit => "tomo_qubit",
            SchemeKind::CmsQutrit => "cms_qutrit",
            SchemeKind::TomoQutrit => "tomo_qutrit",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    pub fn dim(self) -> usize {
        match self {
            SchemeKind::CmsQutrit | SchemeKind::TomoQutrit => 3,
            _ => 2,
        }
    }

    pub fn supports(self, measure: Measure) -> bool {
        match self {
            SchemeKind::CmsQubit | SchemeKind::TomoQubit => true,
            SchemeKind::DirectPauli | SchemeKind::Adaptive2Step => measure != Measure::RelEnt,
            SchemeKind::CmsQutrit | SchemeKind::TomoQutrit => measure == Measure::L1,
        }
    }

    fn check_budget(self, budget: u64) -> Result<()> {
        let bad = |reason| {
            Err(Error::BadBudget {
                scheme: self.tag(),
                budget,
                reason,
            })
        };
        match self {
            SchemeKind::CmsQubit | SchemeKind::CmsQutrit
                if budget == 0 || !budget.is_multiple_of(2) =>
            {
                bad("collective schemes consume copies in pairs; budget must be even and positive")
            }
            SchemeKind::DirectPauli if budget < 2 => bad("needs at least one copy per Pauli axis"),
            SchemeKind::Adaptive2Step if budget < 4 => bad("needs at least 4 copies"),
            SchemeKind::TomoQubit if budget < 3 => bad("needs at least one copy per Pauli basis"),
            SchemeKind::TomoQutrit if budget < 4 => bad("needs at least one copy per MUB"),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    pub measure: Measure,
    /// Total copies of the state available.
    pub budget: u64,
}

impl SchemeSpec {
    pub fn new(kind: SchemeKind, measure: Measure, budget: u64) -> Result<Self> {
        if !kind.supports(measure) {
            return Err(Error::UnsupportedMeasure {
                scheme: kind.tag(),
                measure: measure.tag(),
            });
        }
        kind.check_budget(budget)?;
        Ok(Self {
            kind,
            measure,
            budget,
        })
    }
}

/// Tunables that are not fixed by the scheme definitions themselves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorSettings {
    /// Share of the budget spent on the σx/σy step of the adaptive scheme.
    pub adaptive_step1_fraction: f64,
    pub mle: MleOptions,
}

/// Default share of the adaptive budget spent on step one.
pub const DEFAULT_ADAPTIVE_STEP1_FRACTION: f64 = 0.5;

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            adaptive_step1_fraction: DEFAULT_ADAPTIVE_STEP1_FRACTION,
            mle: MleOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub intermediate: Vec<(&'static str, f64)>,
    pub copies_used: u64,
}

impl Estimate {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.intermediate
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, v)| *v)
    }
}

/// Runs `spec` on `rho`, drawing all data from `source`.
pub fn estimate<S: CountSource + ?Sized>(
    spec: &SchemeSpec,
    rho: &DensityMatrix,
    settings: &EstimatorSettings,
    source: &mut S,
) -> Result<Estimate> {
    let n = spec.budget;
    match spec.kind {
        SchemeKind::CmsQubit => estimate_cms_qubit(rho, n, spec.measure, source),
        SchemeKind::DirectPauli => estimate_direct_pauli(rho, n, spec.measure, source),
        SchemeKind::Adaptive2Step => estimate_adaptive_with(
            rho,
            n,
            spec.measure,
            settings.adaptive_step1_fraction,
            source,
        ),
        SchemeKind::TomoQubit => {
            estimate_tomo_qubit_with(rho, n, spec.measure, &settings.mle, source)
        }
        SchemeKind::CmsQutrit => {
            check_measure(SchemeKind::CmsQutrit, spec.measure)?;
            estimate_cms_qutrit(rho, n, source)
        }
        SchemeKind::TomoQutrit => {
            check_measure(SchemeKind::TomoQutrit, spec.measure)?;
            estimate_tomo_qutrit_with(rho, n, &settings.mle, source)
        }
    }
}

fn check_dim(rho: &DensityMatrix, expected: usize) -> Result<()> {
    if rho.dim() != expected {
        return Err(Error::WrongDimension {
            expected,
            actual: rho.dim(),
        });
    }
    Ok(())
}

fn check_measure(kind: SchemeKind, measure: Measure) -> Result<()> {
    if kind.supports(measure) {
        Ok(())
    } else {
        Err(Error::UnsupportedMeasure {
            scheme: kind.tag(),
            measure: measure.tag(),
        })
    }
}

fn expectation(counts: &[f64]) -> f64 {
    let total = counts[0] + counts[1];
    if total > 0.0 {
        ((counts[0] - counts[1]) / total).clamp(-1.0, 1.0)
    } else {
        0.0
    }
}

fn qubit_value_from_l1(l1: f64, measure: Measure) -> f64 {
    let l1 = l1.clamp(0.0, 1.0);
    match measure {
        Measure::Formation => c_formation_from_offdiag(l1 / 2.0),
        _ => l1,
    }
}

// --- collective measurement, qubit -------------------------------------------

/// Estimator on Bell-basis counts ordered `psi+, psi-, phi+, phi-`.
pub fn cms_qubit_from_counts(counts: &[f64], measure: Measure) -> Estimate {
    let total: f64 = counts.iter().sum();
    let p: Vec<f64> = if total > 0.0 {
        counts.iter().map(|n| n / total).collect()
    } else {
        vec![0.25; 4]
    };
    let l1 = (2.0 * (p[0] - p[1])).max(0.0).sqrt().min(1.0);
    let r = (1.0 - 4.0 * p[1]).max(0.0).sqrt().min(1.0);
    let rz = (2.0 * (p[2] + p[3]) - 1.0).max(0.0).sqrt().min(r);
    let value = match measure {
        Measure::L1 => l1,
        Measure::RelEnt => {
            (binary_entropy((1.0 + rz) / 2.0) - binary_entropy((1.0 + r) / 2.0)).clamp(0.0, 1.0)
        }
        Measure::Formation => c_formation_from_offdiag(l1 / 2.0),
    };
    Estimate {
        value,
        intermediate: vec![
            ("P1", p[0]),
            ("P2", p[1]),
            ("P3", p[2]),
            ("P4", p[3]),
            ("r", r),
            ("abs_rz", rz),
        ],
        copies_used: 2 * total.round() as u64,
    }
}

/// `N/2` Bell-basis measurements on `rho ⊗ rho`.
pub fn estimate_cms_qubit<S: CountSource + ?Sized>(
    rho: &DensityMatrix,
    budget: u64,
    measure: Measure,
    source: &mut S,
) -> Result<Estimate> {
    check_dim(rho, 2)?;
    SchemeKind::CmsQubit.check_budget(budget)?;
    let pairs = budget / 2;
    let dist = bell_basis().probabilities_unchecked(&rho.two_copies());
    let counts = source.draw(&dist, pairs);
    let mut est = cms_qubit_from_counts(&counts, measure);
    est.copies_used = 2 * pairs;
    Ok(est)
}

// --- direct σx / σy ----------------------------------------------------------

pub fn direct_pauli_from_counts(x_counts: &[f64], y_counts: &[f64], measure: Measure) -> Estimate {
    let rx = expectation(x_counts);
    let ry = expectation(y_counts);
    let l1 = rx.hypot(ry).min(1.0);
    Estimate {
        value: qubit_value_from_l1(l1, measure),
        intermediate: vec![("rx", rx), ("ry", ry)],
        copies_used: (x_counts.iter().sum::<f64>() + y_counts.iter().sum::<f64>()).round() as u64,
    }
}

/// Splits the budget between σx and σy (odd copy to σx).
pub fn estimate_direct_pauli<S: CountSource + ?Sized>(
    rho: &DensityMatrix,
    budget: u64,
    measure: Measure,
    source: &mut S,
) -> Result<Estimate> {
    check_dim(rho, 2)?;
    check_measure(SchemeKind::DirectPauli, measure)?;
    SchemeKind::DirectPauli.check_budget(budget)?;
    let ny = budget / 2;
    let nx = budget - ny;
    let x = source.draw(
        &pauli_basis(PauliAxis::X).probabilities_unchecked(rho.matrix()),
        nx,
    );
    let y = source.draw(
        &pauli_basis(PauliAxis::Y).probabilities_unchecked(rho.matrix()),
        ny,
    );
    let mut est = direct_pauli_from_counts(&x, &y, measure);
    est.copies_used = nx + ny;
    Ok(est)
}

// --- two-step adaptive -------------------------------------------------------

/// Step-two estimator: measuring along the equatorial axis at angle `phi`
/// gives `|<0|rho|1>| = |<cos φ σx + sin φ σy>| / 2`.
pub fn adaptive_from_counts(step2_counts: &[f64], measure: Measure) -> Estimate {
    let e = expectation(step2_counts);
    let offdiag = e.abs() / 2.0;
    Estimate {
        value: qubit_value_from_l1(2.0 * offdiag, measure),
        intermediate: vec![("step2_expectation", e), ("abs_rho01", offdiag)],
        copies_used: step2_counts.iter().sum::<f64>().round() as u64,
    }
}

/// Step angle from step-one estimates; `0` when both vanish.
pub fn adaptive_angle(rx: f64, ry: f64) -> f64 {
    if rx == 0.0 && ry == 0.0 {
        0.0
    } else {
        ry.atan2(rx)
    }
}

pub fn estimate_adaptive<S: CountSource + ?Sized>(
    rho: &DensityMatrix,
    budget: u64,
    measure: Measure,
    source: &mut S,
) -> Result<Estimate> {
    estimate_adaptive_with(
        rho,
        budget,
        measure,
        DEFAULT_ADAPTIVE_STEP1_FRACTION,
        source,
    )
}

pub fn estimate_adaptive_with<S: CountSource + ?Sized>(
    rho: &DensityMatrix,
    budget: u64,
    measure: Measure,
    step1_fraction: f64,
    source: &mut S,
) -> Result<Estimate> {
    check_dim(rho, 2)?;
    check_measure(SchemeKind::Adaptive2Step, measure)?;
    SchemeKind::Adaptive2Step.check_budget(budget)?;
    if !(step1_fraction > 0.0 && step1_fraction < 1.0) {
        return Err(Error::Config(format!(
            "adaptive step-one fraction {step1_fraction} must lie in (0, 1)"
        )));
    }
    let step1 = ((budget as f64 * step1_fraction).floor() as u64).clamp(2, budget - 1);
    let ny = step1 / 2;
    let nx = step1 - ny;
    let step2 = budget - step1;

    let x = source.draw(
        &pauli_basis(PauliAxis::X).probabilities_unchecked(rho.matrix()),
        nx,
    );
    let y = source.draw(
        &pauli_basis(PauliAxis::Y).probabilities_unchecked(rho.matrix()),
        ny,
    );
    let (rx, ry) = (expectation(&x), expectation(&y));
    let phi = adaptive_angle(rx, ry);
    let second = source.draw(
        &equatorial_basis(phi).probabilities_unchecked(rho.matrix()),
        step2,
    );

    let mut est = adaptive_from_counts(&second, measure);
    est.intermediate
        .extend([("rx_step1", rx), ("ry_step1", ry), ("phi", phi)]);
    est.copies_used = step1 + step2;
    Ok(est)
}

// --- qubit tomography --------------------------------------------------------

fn pauli_tomography_bases() -> Vec<ProjectiveBasis> {
    [PauliAxis::X, PauliAxis::Y, PauliAxis::Z]
        .into_iter()
        .map(pauli_basis)
        .collect()
}

/// MLE on σx, σy, σz counts, then the exact measure of the reconstruction.
pub fn tomo_qubit_from_counts(
    counts: &[Vec<f64>],
    measure: Measure,
    mle: &MleOptions,
) -> Result<Estimate> {
    let out = mle_from_weights(&pauli_tomography_bases(), counts, 2, *mle)?;
    let value = measure.evaluate(&out.state)?.clamp(0.0, 1.0);
    let b = bloch_of(&out.state)?;
    Ok(Estimate {
        value,
        intermediate: vec![
            ("rx", b.x),
            ("ry", b.y),
            ("rz", b.z),
            ("mle_iterations", out.iterations as f64),
            ("mle_converged", if out.converged { 1.0 } else { 0.0 }),
        ],
        copies_used: counts.iter().flatten().sum::<f64>().round() as u64,
    })
}

pub fn estimate_tomo_qubit<S: CountSource + ?Sized>(
    rho: &DensityMatrix,
    budget: u64,
    measure: Measure,
    source: &mut S,
) -> Result<Estimate> {
    estimate_tomo_qubit_with(rho, budget, measure, &MleOptions::default(), source)
}

/// `N/3` copies per Pauli basis, remainder to σz.
pub fn estimate_tomo_qubit_with<S: CountSource + ?Sized>(
    rho: &DensityMatrix,
    budget: u64,
    measure: Measure,
    mle: &MleOptions,
    source: &mut S,
) -> Result<Estimate> {
    check_dim(rho, 2)?;
    SchemeKind::TomoQubit.check_budget(budget)?;
    let share = budget / 3;
    let shots = [share, share, budget - 2 * share];
    let counts: Vec<Vec<f64>> = pauli_tomography_bases()
        .iter()
        .zip(shots)
        .map(|(b, n)| source.draw(&b.probabilities_unchecked(rho.matrix()), n))
        .collect();
    let mut est = tomo_qubit_from_counts(&counts, measure, mle)?;
    est.copies_used = budget;
    Ok(est)
}

// --- collective measurement, qutrit ------------------------------------------

/// Estimator on counts from [`two_qutrit_cms_basis`].
pub fn cms_qutrit_from_counts(counts: &[f64]) -> Estimate {
    let total: f64 = counts.iter().sum();
    let p: Vec<f64> = if total > 0.0 {
        counts.iter().map(|n| n / total).collect()
    } else {
        vec![0.0; 9]
    };
    const LABELS: [&str; 3] = ["abs_rho01", "abs_rho02", "abs_rho12"];
    let mut intermediate = Vec::with_capacity(3);
    let mut sum = 0.0;
    for (k, _) in QUTRIT_PAIRS.iter().enumerate() {
        let plus = p[3 + 2 * k];
        let minus = p[4 + 2 * k];
        // |rho_ij| <= 1/2 for any state
        let mag = ((plus - minus) / 2.0).max(0.0).sqrt().min(0.5);
        intermediate.push((LABELS[k], mag));
        sum += mag;
    }
    Estimate {
        value: (2.0 * sum).clamp(0.0, 2.0),
        intermediate,
        copies_used: 2 * total.round() as u64,
    }
}

pub fn estimate_cms_qutrit<S: CountSource + ?Sized>(
    rho: &DensityMatrix,
    budget: u64,
    source: &mut S,
) -> Result<Estimate> {
    check_dim(rho, 3)?;
    SchemeKind::CmsQutrit.check_budget(budget)?;
    let pairs = budget / 2;
    let dist = two_qutrit_cms_basis().probabilities_unchecked(&rho.two_copies());
    let counts = source.draw(&dist, pairs);
    let mut est = cms_qutrit_from_counts(&counts);
    est.copies_used = 2 * pairs;
    Ok(est)
}

// --- qutrit tomography -------------------------------------------------------

pub fn tomo_qutrit_from_counts(counts: &[Vec<f64>], mle: &MleOptions) -> Result<Estimate> {
    let out = mle_from_weights(&qutrit_mub_bases(), counts, 3, *mle)?;
    let value = Measure::L1.evaluate(&out.state)?.clamp(0.0, 2.0);
    Ok(Estimate {
        value,
        intermediate: vec![
            ("mle_iterations", out.iterations as f64),
            ("mle_converged", if out.converged { 1.0 } else { 0.0 }),
        ],
        copies_used: counts.iter().flatten().sum::<f64>().round() as u64,
    })
}

pub fn estimate_tomo_qutrit<S: CountSource + ?Sized>(
    rho: &DensityMatrix,
    budget: u64,
    source: &mut S,
) -> Result<Estimate> {
    estimate_tomo_qutrit_with(rho, budget, &MleOptions::default(), source)
}

/// `N/4` copies per MUB, remainder to the computational basis.
pub fn estimate_tomo_qutrit_with<S: CountSource + ?Sized>(
    rho: &DensityMatrix,
    budget: u64,
    mle: &MleOptions,
    source: &mut S,
) -> Result<Estimate> {
    check_dim(rho, 3)?;
    SchemeKind::TomoQutrit.check_budget(budget)?;
    let share = budget / 4;
    let shots = [budget - 3 * share, share, share, share];
    let counts: Vec<Vec<f64>> = qutrit_mub_bases()
        .iter()
        .zip(shots)
        .map(|(b, n)| source.draw(&b.probabilities_unchecked(rho.matrix()), n))
        .collect();
    let mut est = tomo_qutrit_from_counts(&counts, mle)?;
    est.copies_used = budget;
    Ok(est)
}
