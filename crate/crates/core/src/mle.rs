//! Maximum-likelihood state reconstruction by the iterative `R rho R` map.
//!
//! Given outcome weights `n_k` over projectors `Π_k` (pooled across bases),
//! each step forms `R = Σ_k (f_k / p_k) Π_k` with `f_k = n_k / Σ n` and
//! `p_k = Tr[Π_k rho]`, then sets `rho <- R rho R / Tr[R rho R]`. Iteration
//! starts from the maximally mixed state. A plain step that fails to raise
//! the likelihood is replaced by the diluted update `G rho G / Tr[G rho G]`
//! with `G = I + eps R`, trying `eps = 1, 1/2, 1/4, ...`.
//!
//! When the data admit an exact linear inversion (every basis' frequencies
//! reproduced) and the inverted operator is positive semidefinite, that
//! operator maximizes the likelihood and is returned without iterating.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{c, eig_hermitian, ComplexMatrix, PSD_TOL};
use crate::measurement::{CountRecord, ProjectiveBasis, PROB_DUST};
use crate::states::DensityMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MleOptions {
    /// Stop once successive iterates differ by at most this in max-norm.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Record the log-likelihood after every iteration.
    pub track_likelihood: bool,
    /// Return the linear-inversion estimate when it is a valid state.
    pub linear_inversion_first: bool,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 10_000,
            track_likelihood: false,
            linear_inversion_first: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MleOutcome {
    pub state: DensityMatrix,
    pub iterations: usize,
    /// `false` when the iteration cap was hit; `state` is then the last iterate.
    pub converged: bool,
    /// `Σ_k f_k ln p_k` at the returned state.
    pub log_likelihood: f64,
    /// Log-likelihood of the starting point followed by one entry per iteration.
    pub likelihood_trace: Vec<f64>,
}

/// Reconstructs a `dim`-dimensional state from integer counts, one record per basis.
pub fn mle_rhor(
    bases: &[ProjectiveBasis],
    counts: &[CountRecord],
    dim: usize,
) -> Result<MleOutcome> {
    let weights: Vec<Vec<f64>> = counts
        .iter()
        .map(|r| r.counts.iter().map(|&n| n as f64).collect())
        .collect();
    mle_from_weights(bases, &weights, dim, MleOptions::default())
}

/// As [`mle_rhor`] but accepts real-valued outcome weights, so exact expected
/// counts can be fed in directly.
pub fn mle_from_weights(
    bases: &[ProjectiveBasis],
    weights: &[Vec<f64>],
    dim: usize,
    opts: MleOptions,
) -> Result<MleOutcome> {
    if bases.len() != weights.len() {
        return Err(Error::NoData(format!(
            "{} bases but {} count records",
            bases.len(),
            weights.len()
        )));
    }
    let mut projectors = Vec::new();
    let mut raw = Vec::new();
    for (basis, w) in bases.iter().zip(weights) {
        if basis.dim() != dim {
            return Err(Error::DimensionMismatch {
                state: dim,
                basis: basis.dim(),
            });
        }
        if basis.len() != w.len() {
            return Err(Error::NoData(format!(
                "basis has {} outcomes but record has {}",
                basis.len(),
                w.len()
            )));
        }
        for (p, &n) in basis.projectors().iter().zip(w) {
            if !(n >= 0.0 && n.is_finite()) {
                return Err(Error::NoData(format!("invalid outcome weight {n}")));
            }
            projectors.push(p);
            raw.push(n);
        }
    }
    let total: f64 = raw.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::NoData("total shot count is zero".into()));
    }
    let freqs: Vec<f64> = raw.iter().map(|n| n / total).collect();

    let mut probs = vec![0.0; projectors.len()];
    let mut trace = Vec::new();

    let predict = |rho: &ComplexMatrix, probs: &mut [f64]| {
        for (p, proj) in probs.iter_mut().zip(&projectors) {
            *p = proj.trace_of_product(rho).re;
        }
    };
    let log_likelihood = |probs: &[f64]| -> f64 {
        freqs
            .iter()
            .zip(probs)
            .filter(|(f, _)| **f > 0.0)
            .map(|(f, p)| f * p.max(f64::MIN_POSITIVE).ln())
            .sum()
    };

    if opts.linear_inversion_first {
        if let Some(rho) = physical_linear_inversion(bases, weights, dim) {
            predict(&rho, &mut probs);
            let ll = log_likelihood(&probs);
            if opts.track_likelihood {
                trace.push(ll);
            }
            return Ok(MleOutcome {
                state: DensityMatrix::new_unchecked(rho),
                iterations: 0,
                converged: true,
                log_likelihood: ll,
                likelihood_trace: trace,
            });
        }
    }

    let mut rho = ComplexMatrix::identity(dim).scale(1.0 / dim as f64);
    predict(&rho, &mut probs);
    let mut ll = log_likelihood(&probs);
    if opts.track_likelihood {
        trace.push(ll);
    }

    let identity = ComplexMatrix::identity(dim);
    let mut trial = vec![0.0; projectors.len()];
    let mut scratch = vec![0.0; projectors.len()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        let mut r = ComplexMatrix::zeros(dim, dim);
        for ((proj, &f), &p) in projectors.iter().zip(&freqs).zip(&probs) {
            if f == 0.0 {
                continue;
            }
            let ratio = f / p.max(PROB_DUST * PROB_DUST);
            r = &r + &proj.scale(ratio);
        }
        let mut next = sandwich(&r, &rho);
        predict(&next, &mut trial);
        let mut next_ll = log_likelihood(&trial);
        let floor = ll - LL_SLACK * ll.abs().max(1.0);
        if next_ll <= ll {
            let mut eps = 1.0;
            while eps >= MIN_DILUTION {
                let cand = sandwich(&(&identity + &r.scale(eps)), &rho);
                predict(&cand, &mut scratch);
                let cand_ll = log_likelihood(&scratch);
                if cand_ll > next_ll {
                    next = cand;
                    next_ll = cand_ll;
                    std::mem::swap(&mut trial, &mut scratch);
                }
                if cand_ll >= ll {
                    break;
                }
                eps *= 0.5;
            }
        }
        if next_ll < floor {
            converged = true;
            break;
        }
        let step = next.max_abs_diff(&rho);
        rho = next;
        ll = next_ll;
        std::mem::swap(&mut probs, &mut trial);
        iterations += 1;
        if opts.track_likelihood {
            trace.push(ll);
        }
        if step <= opts.tolerance {
            converged = true;
            break;
        }
    }

    Ok(MleOutcome {
        log_likelihood: ll,
        state: DensityMatrix::new_unchecked(rho),
        iterations,
        converged,
        likelihood_trace: trace,
    })
}

const MIN_DILUTION: f64 = 1e-8;
/// Relative likelihood change treated as rounding noise.
const LL_SLACK: f64 = 1e-14;

/// `g rho g† / Tr`, with exact Hermitian symmetry restored.
fn sandwich(g: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let out = &(g * rho) * &g.adjoint();
    let norm = out.trace().re;
    let mut next = out.scale(1.0 / norm);
    let dim = next.rows();
    for i in 0..dim {
        next[(i, i)] = c(next[(i, i)].re, 0.0);
        for j in (i + 1)..dim {
            let avg = (next[(i, j)] + next[(j, i)].conj()) * 0.5;
            next[(i, j)] = avg;
            next[(j, i)] = avg.conj();
        }
    }
    next
}

/// Hermitian operator basis: `E_ii`, then `E_ij + E_ji` and `i(E_ji - E_ij)`.
fn hermitian_generators(dim: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        let mut g = ComplexMatrix::zeros(dim, dim);
        g[(i, i)] = c(1.0, 0.0);
        out.push(g);
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            let mut re = ComplexMatrix::zeros(dim, dim);
            re[(i, j)] = c(1.0, 0.0);
            re[(j, i)] = c(1.0, 0.0);
            out.push(re);
            let mut im = ComplexMatrix::zeros(dim, dim);
            im[(i, j)] = c(0.0, -1.0);
            im[(j, i)] = c(0.0, 1.0);
            out.push(im);
        }
    }
    out
}

/// Least-squares inversion of per-basis frequencies. Returns the operator only
/// if it reproduces every frequency and is positive semidefinite.
fn physical_linear_inversion(
    bases: &[ProjectiveBasis],
    weights: &[Vec<f64>],
    dim: usize,
) -> Option<ComplexMatrix> {
    let generators = hermitian_generators(dim);
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for (basis, w) in bases.iter().zip(weights) {
        let shots: f64 = w.iter().sum();
        if shots <= 0.0 {
            continue;
        }
        for (proj, &n) in basis.projectors().iter().zip(w) {
            rows.push(
                generators
                    .iter()
                    .map(|g| proj.trace_of_product(g).re)
                    .collect::<Vec<_>>(),
            );
            targets.push(n / shots);
        }
    }
    let m = generators.len();
    if rows.len() < m {
        return None;
    }
    let a = DMatrix::from_fn(rows.len(), m, |i, j| rows[i][j]);
    let b = DVector::from_vec(targets);
    let x = a.clone().svd(true, true).solve(&b, 1e-12).ok()?;
    let residual = (&a * &x - &b).amax();
    if residual > 1e-10 {
        return None;
    }
    let mut rho = ComplexMatrix::zeros(dim, dim);
    for (g, coef) in generators.iter().zip(x.iter()) {
        rho = &rho + &g.scale(*coef);
    }
    let eig = eig_hermitian(&rho).ok()?;
    if eig.eigenvalues[0] < -PSD_TOL {
        return None;
    }
    if eig.eigenvalues[0] < 0.0 {
        // clip rounding dust and renormalize
        let clipped = crate::linalg::HermitianEigenSystem {
            eigenvalues: eig.eigenvalues.iter().map(|l| l.max(0.0)).collect(),
            eigenvectors: eig.eigenvectors,
        };
        rho = clipped.reconstruct();
    }
    let tr = rho.trace().re;
    Some(rho.scale(1.0 / tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{outcome_probs, pauli_basis, qutrit_mub_bases, PauliAxis};
    use crate::states::{qubit_family, StateFamily};
    use std::f64::consts::PI;

    fn record(counts: &[u64]) -> CountRecord {
        CountRecord {
            counts: counts.to_vec(),
            shots: counts.iter().sum(),
            seed_tag: 0,
        }
    }

    fn paulis() -> Vec<ProjectiveBasis> {
        [PauliAxis::X, PauliAxis::Y, PauliAxis::Z]
            .into_iter()
            .map(pauli_basis)
            .collect()
    }

    #[test]
    fn single_z_basis_boundary_solution() {
        let out = mle_rhor(&[pauli_basis(PauliAxis::Z)], &[record(&[100, 0])], 2).unwrap();
        let expected = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(out.state.matrix().max_abs_diff(&expected) < 1e-8);
    }

    #[test]
    fn maximally_mixed_statistics_are_a_fixed_point() {
        let weights = vec![vec![50.0, 50.0]; 3];
        let mixed = ComplexMatrix::identity(2).scale(0.5);
        for shortcut in [true, false] {
            let opts = MleOptions {
                linear_inversion_first: shortcut,
                ..MleOptions::default()
            };
            let out = mle_from_weights(&paulis(), &weights, 2, opts).unwrap();
            assert!(out.converged);
            assert_eq!(out.iterations, if shortcut { 0 } else { 1 });
            assert!(out.state.matrix().max_abs_diff(&mixed) < 1e-15);
        }

        let mubs = qutrit_mub_bases();
        let recs: Vec<_> = (0..4).map(|_| record(&[10, 10, 10])).collect();
        let out = mle_rhor(&mubs, &recs, 3).unwrap();
        assert!(
            out.state
                .matrix()
                .max_abs_diff(&ComplexMatrix::identity(3).scale(1.0 / 3.0))
                < 1e-15
        );
    }

    #[test]
    fn exact_pauli_data_recovers_pure_state() {
        let theta = PI / 6.0;
        let rho = qubit_family(theta).unwrap();
        let bases = paulis();
        let weights: Vec<Vec<f64>> = bases
            .iter()
            .map(|b| {
                outcome_probs(rho.matrix(), b)
                    .unwrap()
                    .probabilities()
                    .iter()
                    .map(|p| 400.0 * p)
                    .collect()
            })
            .collect();
        let out = mle_from_weights(&bases, &weights, 2, MleOptions::default()).unwrap();
        assert!(out.converged);
        let ket = StateFamily::QubitTheta.ket(theta).unwrap();
        assert!(out.state.fidelity_with_pure(&ket) >= 1.0 - 1e-8);
    }

    #[test]
    fn likelihood_trace_is_monotone_on_sample_data() {
        let opts = MleOptions {
            track_likelihood: true,
            linear_inversion_first: false,
            ..MleOptions::default()
        };
        let weights = vec![vec![380.0, 20.0], vec![190.0, 210.0], vec![120.0, 280.0]];
        let out = mle_from_weights(&paulis(), &weights, 2, opts).unwrap();
        assert_eq!(out.likelihood_trace.len(), out.iterations + 1);
        for w in out.likelihood_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12 * w[0].abs());
        }
        assert!(DensityMatrix::new(out.state.into_matrix()).is_ok());
    }

    #[test]
    fn shortcut_agrees_with_iteration_on_interior_data() {
        let weights = vec![vec![260.0, 140.0], vec![230.0, 170.0], vec![150.0, 250.0]];
        let fast = mle_from_weights(&paulis(), &weights, 2, MleOptions::default()).unwrap();
        let slow = mle_from_weights(
            &paulis(),
            &weights,
            2,
            MleOptions {
                linear_inversion_first: false,
                ..MleOptions::default()
            },
        )
        .unwrap();
        assert_eq!(fast.iterations, 0);
        assert!(slow.converged);
        assert!(fast.state.matrix().max_abs_diff(slow.state.matrix()) < 1e-8);
    }

    #[test]
    fn unphysical_inversion_falls_back_to_iteration() {
        // Linear inversion gives |r| > 1.
        let weights = vec![vec![390.0, 10.0], vec![390.0, 10.0], vec![200.0, 200.0]];
        let out = mle_from_weights(&paulis(), &weights, 2, MleOptions::default()).unwrap();
        assert!(out.iterations > 0);
        assert!(DensityMatrix::new(out.state.into_matrix()).is_ok());
    }

    #[test]
    fn single_basis_data_does_not_cycle() {
        let z = vec![pauli_basis(PauliAxis::Z)];
        let opts = MleOptions {
            track_likelihood: true,
            linear_inversion_first: false,
            ..MleOptions::default()
        };
        let out = mle_from_weights(&z, &[vec![145.0, 29.0]], 2, opts).unwrap();
        assert!(out.converged);
        let m = out.state.matrix();
        assert!((m[(0, 0)].re - 145.0 / 174.0).abs() < 1e-8);
        for w in out.likelihood_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12 * w[0].abs());
        }
    }

    #[test]
    fn error_paths() {
        let b = paulis();
        assert!(matches!(
            mle_rhor(&b, &[record(&[0, 0]), record(&[0, 0]), record(&[0, 0])], 2),
            Err(Error::NoData(_))
        ));
        assert!(matches!(
            mle_rhor(&b, &[record(&[1, 0])], 2),
            Err(Error::NoData(_))
        ));
        assert!(matches!(
            mle_rhor(&b[..1], &[record(&[1, 0])], 3),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn iteration_cap_flags_non_convergence() {
        let opts = MleOptions {
            max_iterations: 2,
            tolerance: 0.0,
            linear_inversion_first: false,
            ..MleOptions::default()
        };
        let weights = vec![vec![390.0, 10.0], vec![200.0, 200.0], vec![200.0, 200.0]];
        let out = mle_from_weights(&paulis(), &weights, 2, opts).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 2);
    }
}
