//! Projective measurements, exact outcome statistics and finite-shot sampling.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::linalg::{c, validate_density, ComplexMatrix, C64, HERMITICITY_TOL, TRACE_TOL};
use crate::rng::RandomStream;

const BASIS_TOL: f64 = 1e-10;
/// Probabilities within this distance of 0 are treated as exact zeros.
pub const PROB_DUST: f64 = 1e-12;

/// An ordered set of orthogonal projectors summing to the identity.
#[derive(Clone, Debug)]
pub struct ProjectiveBasis {
    dim: usize,
    projectors: Vec<ComplexMatrix>,
    labels: Vec<String>,
}

impl ProjectiveBasis {
    /// Builds a basis of rank-one projectors from orthonormal kets.
    pub fn from_kets(kets: &[Vec<C64>], labels: &[&str]) -> Result<Self> {
        let projectors = kets.iter().map(|k| ComplexMatrix::projector(k)).collect();
        Self::new(projectors, labels.iter().map(|s| s.to_string()).collect())
    }

    pub fn new(projectors: Vec<ComplexMatrix>, labels: Vec<String>) -> Result<Self> {
        if projectors.is_empty() || projectors.len() != labels.len() {
            return Err(Error::InvalidState(
                "basis needs one label per projector".into(),
            ));
        }
        let dim = projectors[0].rows();
        let basis = Self {
            dim,
            projectors,
            labels,
        };
        basis.check()?;
        Ok(basis)
    }

    fn check(&self) -> Result<()> {
        let n = self.dim;
        let mut sum = ComplexMatrix::zeros(n, n);
        for (a, pa) in self.projectors.iter().enumerate() {
            if pa.rows() != n || !pa.is_square() {
                return Err(Error::DimensionMismatch {
                    state: n,
                    basis: pa.rows(),
                });
            }
            if !pa.is_hermitian(BASIS_TOL) || (pa * pa).max_abs_diff(pa) > BASIS_TOL {
                return Err(Error::InvalidState(format!(
                    "projector {} is not a Hermitian idempotent",
                    self.labels[a]
                )));
            }
            for pb in &self.projectors[a + 1..] {
                if (pa * pb).max_abs_diff(&ComplexMatrix::zeros(n, n)) > BASIS_TOL {
                    return Err(Error::InvalidState(format!(
                        "projector {} is not orthogonal to the rest",
                        self.labels[a]
                    )));
                }
            }
            sum = &sum + pa;
        }
        if sum.max_abs_diff(&ComplexMatrix::identity(n)) > BASIS_TOL {
            return Err(Error::InvalidState(
                "projectors do not sum to identity".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// `Tr[M_i rho]` without validating `rho`.
    pub(crate) fn probabilities_unchecked(&self, rho: &ComplexMatrix) -> OutcomeDistribution {
        let raw: Vec<f64> = self
            .projectors
            .iter()
            .map(|p| p.trace_of_product(rho).re)
            .collect();
        OutcomeDistribution::from_raw(raw)
    }
}

/// Exact outcome probabilities, aligned with a basis' labels.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    /// Clips rounding dust to `[0, 1]` and renormalizes.
    pub fn from_raw(raw: Vec<f64>) -> Self {
        let mut p: Vec<f64> = raw
            .into_iter()
            .map(|x| {
                if x.abs() < PROB_DUST {
                    0.0
                } else {
                    x.clamp(0.0, 1.0)
                }
            })
            .collect();
        let total: f64 = p.iter().sum();
        if total > 0.0 && (total - 1.0).abs() <= TRACE_TOL {
            p.iter_mut().for_each(|x| *x /= total);
        }
        Self { probabilities: p }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

/// Integer outcome counts from one finite-shot run.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CountRecord {
    pub counts: Vec<u64>,
    pub shots: u64,
    pub seed_tag: u64,
}

impl CountRecord {
    pub fn frequencies(&self) -> Vec<f64> {
        if self.shots == 0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts
            .iter()
            .map(|&n| n as f64 / self.shots as f64)
            .collect()
    }
}

fn ket(entries: &[C64]) -> Vec<C64> {
    entries.to_vec()
}

/// Bell basis, in order `psi+, psi-, phi+, phi-` (M1..M4).
pub fn bell_basis() -> ProjectiveBasis {
    let s = c(FRAC_1_SQRT_2, 0.0);
    let z = c(0.0, 0.0);
    let kets = [
        ket(&[z, s, s, z]),
        ket(&[z, s, -s, z]),
        ket(&[s, z, z, s]),
        ket(&[s, z, z, -s]),
    ];
    ProjectiveBasis::from_kets(&kets, &["psi+", "psi-", "phi+", "phi-"])
        .expect("Bell basis is valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// Eigenprojectors of a Pauli operator, `+1` outcome first.
pub fn pauli_basis(axis: PauliAxis) -> ProjectiveBasis {
    let s = FRAC_1_SQRT_2;
    let (plus, minus, labels) = match axis {
        PauliAxis::X => (
            vec![c(s, 0.0), c(s, 0.0)],
            vec![c(s, 0.0), c(-s, 0.0)],
            ["x+", "x-"],
        ),
        PauliAxis::Y => (
            vec![c(s, 0.0), c(0.0, s)],
            vec![c(s, 0.0), c(0.0, -s)],
            ["y+", "y-"],
        ),
        PauliAxis::Z => (
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            ["z+", "z-"],
        ),
    };
    ProjectiveBasis::from_kets(&[plus, minus], &labels).expect("Pauli basis is valid")
}

/// Eigenprojectors of `cos(phi) σx + sin(phi) σy`, `+1` outcome first.
pub fn equatorial_basis(phi: f64) -> ProjectiveBasis {
    let s = FRAC_1_SQRT_2;
    let e = C64::from_polar(s, phi);
    ProjectiveBasis::from_kets(
        &[vec![c(s, 0.0), e], vec![c(s, 0.0), -e]],
        &["phi+", "phi-"],
    )
    .expect("equatorial basis is valid")
}

/// The four mutually unbiased qutrit bases `xi_{ij}`, `i = 0..3`.
pub fn qutrit_mub_bases() -> Vec<ProjectiveBasis> {
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let wb = w.conj();
    let n = 1.0 / 3f64.sqrt();
    let scaled = |v: [C64; 3]| v.iter().map(|z| z * n).collect::<Vec<_>>();

    let rows: [[[C64; 3]; 3]; 4] = [
        [[one, zero, zero], [zero, one, zero], [zero, zero, one]],
        [[one, one, one], [one, w, wb], [one, wb, w]],
        [[w, one, one], [one, w, one], [one, one, w]],
        [[wb, one, one], [one, wb, one], [one, one, wb]],
    ];
    rows.iter()
        .enumerate()
        .map(|(i, basis)| {
            let kets: Vec<Vec<C64>> = if i == 0 {
                basis.iter().map(|v| v.to_vec()).collect()
            } else {
                basis.iter().map(|v| scaled(*v)).collect()
            };
            let labels: Vec<String> = (0..3).map(|j| format!("xi{i}{j}")).collect();
            let labels: Vec<&str> = labels.iter().map(String::as_str).collect();
            ProjectiveBasis::from_kets(&kets, &labels).expect("MUB is orthonormal")
        })
        .collect()
}

/// Pairs `(i, j)` with `i < j` in the outcome order of [`two_qutrit_cms_basis`].
pub const QUTRIT_PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Nine-outcome basis on two qutrits: `|00>, |11>, |22>`, then
/// `psi_ij^+`, `psi_ij^-` for `(i, j) = (0,1), (0,2), (1,2)`.
pub fn two_qutrit_cms_basis() -> ProjectiveBasis {
    let basis_ket = |a: usize, b: usize, sign: f64, norm: f64| {
        let mut v = vec![c(0.0, 0.0); 9];
        v[3 * a + b] += c(norm, 0.0);
        v[3 * b + a] += c(sign * norm, 0.0);
        v
    };
    let mut kets = Vec::with_capacity(9);
    let mut labels = Vec::with_capacity(9);
    for i in 0..3 {
        let mut v = vec![c(0.0, 0.0); 9];
        v[4 * i] = c(1.0, 0.0);
        kets.push(v);
        labels.push(format!("{i}{i}"));
    }
    for (i, j) in QUTRIT_PAIRS {
        kets.push(basis_ket(i, j, 1.0, FRAC_1_SQRT_2));
        labels.push(format!("psi{i}{j}+"));
        kets.push(basis_ket(i, j, -1.0, FRAC_1_SQRT_2));
        labels.push(format!("psi{i}{j}-"));
    }
    let labels: Vec<&str> = labels.iter().map(String::as_str).collect();
    ProjectiveBasis::from_kets(&kets, &labels).expect("two-qutrit basis is valid")
}

/// Exact outcome probabilities `Tr[M_i rho_total]`.
pub fn outcome_probs(
    rho_total: &ComplexMatrix,
    basis: &ProjectiveBasis,
) -> Result<OutcomeDistribution> {
    if rho_total.rows() != basis.dim() || !rho_total.is_square() {
        return Err(Error::DimensionMismatch {
            state: rho_total.rows(),
            basis: basis.dim(),
        });
    }
    if !rho_total.is_hermitian(HERMITICITY_TOL) {
        return Err(Error::InvalidState("state is not Hermitian".into()));
    }
    validate_density(rho_total)?;
    Ok(basis.probabilities_unchecked(rho_total))
}

/// `shots` independent categorical draws by inverse CDF.
///
/// Each draw takes one uniform `u` from `rng` and returns the lowest index `i`
/// with `u < cdf[i]`, so zero-probability outcomes are never selected.
pub fn sample_counts(
    dist: &OutcomeDistribution,
    shots: u64,
    rng: &mut RandomStream,
) -> CountRecord {
    let p = dist.probabilities();
    let mut counts = vec![0u64; p.len()];
    if shots == 0 || p.is_empty() {
        return CountRecord {
            counts,
            shots,
            seed_tag: rng.seed(),
        };
    }
    let mut cdf = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    for &x in p {
        acc += if x < PROB_DUST { 0.0 } else { x };
        cdf.push(acc);
    }
    // Close the CDF at the last outcome with support.
    if let Some(last) = p.iter().rposition(|&x| x >= PROB_DUST) {
        for v in &mut cdf[last..] {
            *v = 1.0;
        }
    } else {
        // No support at all: nothing sensible to draw.
        let n = cdf.len();
        cdf[n - 1] = 1.0;
    }
    for _ in 0..shots {
        let u = rng.uniform();
        let k = cdf
            .iter()
            .position(|&edge| u < edge)
            .unwrap_or(cdf.len() - 1);
        counts[k] += 1;
    }
    CountRecord {
        counts,
        shots,
        seed_tag: rng.seed(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;
    use crate::states::{qubit_family, qutrit_family, random_pure_state, DensityMatrix};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn inner(a: &[C64], b: &[C64]) -> C64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn all_bases_are_valid() {
        // constructors run the full invariant check; re-run it explicitly
        bell_basis().check().unwrap();
        for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
            pauli_basis(axis).check().unwrap();
        }
        for k in 0..16 {
            equatorial_basis(k as f64 * 0.4 - 3.0).check().unwrap();
        }
        for b in qutrit_mub_bases() {
            b.check().unwrap();
        }
        two_qutrit_cms_basis().check().unwrap();
    }

    #[test]
    fn bell_basis_examples() {
        let b = bell_basis();
        let sum = b
            .projectors()
            .iter()
            .fold(ComplexMatrix::zeros(4, 4), |acc, p| &acc + p);
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        assert!(
            b.projectors()[0]
                .trace_of_product(&b.projectors()[1])
                .norm()
                < 1e-15
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let rho = random_pure_state(2, &mut rng);
            assert!(b.projectors()[1].trace_of_product(&rho.two_copies()).norm() < 1e-12);
        }
    }

    #[test]
    fn pauli_basis_examples() {
        let z = pauli_basis(PauliAxis::Z);
        assert_eq!(
            z.projectors()[0],
            ComplexMatrix::from_real_diagonal(&[1.0, 0.0])
        );
        assert_eq!(
            z.projectors()[1],
            ComplexMatrix::from_real_diagonal(&[0.0, 1.0])
        );

        let plus = qubit_family(FRAC_PI_4).unwrap();
        let p = outcome_probs(plus.matrix(), &pauli_basis(PauliAxis::X)).unwrap();
        assert_abs_diff_eq!(p.probabilities()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.probabilities()[1], 0.0, epsilon = 1e-15);

        let rho = qubit_family(PI / 6.0).unwrap();
        let p = outcome_probs(rho.matrix(), &pauli_basis(PauliAxis::X)).unwrap();
        let s = 3f64.sqrt() / 2.0;
        assert_abs_diff_eq!(p.probabilities()[0], (1.0 + s) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.probabilities()[1], (1.0 - s) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn equatorial_basis_examples() {
        let close = |a: &ProjectiveBasis, b: &ProjectiveBasis| {
            a.projectors()
                .iter()
                .zip(b.projectors())
                .all(|(x, y)| x.max_abs_diff(y) < 1e-15)
        };
        assert!(close(&equatorial_basis(0.0), &pauli_basis(PauliAxis::X)));
        assert!(close(
            &equatorial_basis(FRAC_PI_2),
            &pauli_basis(PauliAxis::Y)
        ));
        for k in 0..=12 {
            let theta = k as f64 * FRAC_PI_2 / 12.0;
            let rho = qubit_family(theta).unwrap();
            for phi in [0.0, 0.3, 1.2, 2.5, -1.0] {
                let p = outcome_probs(rho.matrix(), &equatorial_basis(phi)).unwrap();
                let expectation = p.probabilities()[0] - p.probabilities()[1];
                assert_abs_diff_eq!(
                    expectation,
                    phi.cos() * (2.0 * theta).sin(),
                    epsilon = 1e-14
                );
            }
        }
    }

    fn mub_ket(i: usize, j: usize) -> Vec<C64> {
        // column j of the rank-one projector, normalized, recovers the ket up to phase
        let p = qutrit_mub_bases()[i].projectors()[j].clone();
        let col = (0..3)
            .max_by(|&a, &b| p[(a, a)].re.total_cmp(&p[(b, b)].re))
            .unwrap();
        let norm = p[(col, col)].re.sqrt();
        (0..3).map(|r| p[(r, col)] / norm).collect()
    }

    #[test]
    fn qutrit_mubs_are_mutually_unbiased() {
        for i in 0..4 {
            for k in 0..4 {
                for j in 0..3 {
                    for l in 0..3 {
                        let ov = inner(&mub_ket(i, j), &mub_ket(k, l)).norm_sqr();
                        let expected = if i != k {
                            1.0 / 3.0
                        } else if j == l {
                            1.0
                        } else {
                            0.0
                        };
                        assert_abs_diff_eq!(ov, expected, epsilon = 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn qutrit_mub_listed_vector() {
        let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
        let n = 1.0 / 3f64.sqrt();
        let expected = ComplexMatrix::projector(&[c(n, 0.0), w * n, w.conj() * n]);
        assert!(qutrit_mub_bases()[1].projectors()[1].max_abs_diff(&expected) < 1e-15);
        let expected20 = ComplexMatrix::projector(&[w * n, c(n, 0.0), c(n, 0.0)]);
        assert!(qutrit_mub_bases()[2].projectors()[0].max_abs_diff(&expected20) < 1e-15);
    }

    #[test]
    fn two_qutrit_basis_examples() {
        let b = two_qutrit_cms_basis();
        assert_eq!(b.len(), 9);
        assert_eq!(b.labels()[3], "psi01+");
        assert_eq!(b.labels()[4], "psi01-");

        let rho = qutrit_family(FRAC_PI_4).unwrap();
        let p = outcome_probs(&rho.two_copies(), &b).unwrap();
        assert_abs_diff_eq!(
            p.probabilities()[b.index_of("psi01-").unwrap()],
            0.0,
            epsilon = 1e-15
        );
        // P(psi01+) = 2 |rho_01|^2 for a pure state
        assert_abs_diff_eq!(p.probabilities()[3], 2.0 / 16.0, epsilon = 1e-14);

        let mixed = DensityMatrix::maximally_mixed(3).unwrap();
        let p = outcome_probs(&mixed.two_copies(), &b).unwrap();
        for &x in p.probabilities() {
            assert_abs_diff_eq!(x, 1.0 / 9.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn bell_probabilities_examples() {
        let b = bell_basis();
        let check = |rho: &DensityMatrix, expected: [f64; 4]| {
            let p = outcome_probs(&kron(rho.matrix(), rho.matrix()), &b).unwrap();
            for (x, e) in p.probabilities().iter().zip(expected) {
                assert_abs_diff_eq!(*x, e, epsilon = 1e-15);
            }
        };
        check(&qubit_family(FRAC_PI_4).unwrap(), [0.5, 0.0, 0.5, 0.0]);
        check(&qubit_family(PI / 6.0).unwrap(), [0.375, 0.0, 0.5, 0.125]);
        check(&DensityMatrix::maximally_mixed(2).unwrap(), [0.25; 4]);
    }

    #[test]
    fn outcome_probs_errors() {
        let rho = qubit_family(0.3).unwrap();
        assert!(matches!(
            outcome_probs(rho.matrix(), &bell_basis()),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(
            outcome_probs(&bad, &pauli_basis(PauliAxis::Z)),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn sampling_examples() {
        let mut rng = RandomStream::new(3);
        let d = OutcomeDistribution::from_raw(vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(sample_counts(&d, 100, &mut rng).counts, vec![100, 0, 0, 0]);
        assert_eq!(sample_counts(&d, 0, &mut rng).counts, vec![0, 0, 0, 0]);

        let d = OutcomeDistribution::from_raw(vec![0.5, 0.0, 0.5, 0.0]);
        let r = sample_counts(&d, 600, &mut RandomStream::new(2020));
        assert_eq!(r.counts[1], 0);
        assert_eq!(r.counts[3], 0);
        assert_eq!(r.counts[0] + r.counts[2], 600);
        assert_eq!(r.seed_tag, 2020);
    }

    #[test]
    fn sampling_is_reproducible() {
        let d = OutcomeDistribution::from_raw(vec![0.375, 0.0, 0.5, 0.125]);
        let a = sample_counts(&d, 1000, &mut RandomStream::new(99));
        let b = sample_counts(&d, 1000, &mut RandomStream::new(99));
        assert_eq!(a, b);
        assert_eq!(a.counts.iter().sum::<u64>(), 1000);
    }

    #[test]
    fn dust_is_clipped() {
        let d = OutcomeDistribution::from_raw(vec![-1e-13, 0.5, 0.5 + 1e-13]);
        assert_eq!(d.probabilities()[0], 0.0);
        assert!((d.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frequencies_converge_for_family_states() {
        let b = bell_basis();
        for k in [0usize, 2, 3, 6, 9] {
            let theta = k as f64 * FRAC_PI_2 / 12.0;
            let rho = qubit_family(theta).unwrap();
            let dist = outcome_probs(&rho.two_copies(), &b).unwrap();
            for seed in [1u64, 2] {
                let rec = sample_counts(&dist, 1_000_000, &mut RandomStream::new(seed));
                for (f, p) in rec.frequencies().iter().zip(dist.probabilities()) {
                    assert!((f - p).abs() <= 5e-3);
                }
            }
        }
    }
}
