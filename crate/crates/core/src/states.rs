//! Qubit and qutrit states: validated density matrices, Bloch vectors and the
//! two one-parameter pure-state families swept by the figures.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{c, kron, validate_density, ComplexMatrix, C64};

/// A Hermitian, unit-trace, positive semidefinite qubit or qutrit state.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let d = matrix.rows();
        if !(2..=3).contains(&d) {
            return Err(Error::WrongDimension {
                expected: if d < 2 { 2 } else { 3 },
                actual: d,
            });
        }
        validate_density(&matrix)?;
        Ok(Self { matrix })
    }

    /// Wraps a matrix the caller has already proven valid.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn from_pure(ket: &[C64]) -> Result<Self> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let normalized: Vec<C64> = ket.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::projector(&normalized))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(ComplexMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// The two-copy state `rho ⊗ rho`.
    pub fn two_copies(&self) -> ComplexMatrix {
        kron(&self.matrix, &self.matrix)
    }

    /// Populations in the computational basis.
    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal_real()
    }

    pub fn fidelity_with_pure(&self, ket: &[C64]) -> f64 {
        let mut acc = c(0.0, 0.0);
        for i in 0..ket.len() {
            for j in 0..ket.len() {
                acc += ket[i].conj() * self.matrix[(i, j)] * ket[j];
            }
        }
        acc.re
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let b = Self { x, y, z };
        if !(x.is_finite() && y.is_finite() && z.is_finite()) || b.length() > 1.0 + 1e-9 {
            return Err(Error::InvalidState(format!(
                "Bloch vector ({x}, {y}, {z}) lies outside the unit ball"
            )));
        }
        Ok(b)
    }

    pub fn length(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// `(I + r·σ) / 2`.
    pub fn to_density(&self) -> DensityMatrix {
        let m = ComplexMatrix::from_row_major(
            2,
            2,
            &[
                c((1.0 + self.z) / 2.0, 0.0),
                c(self.x / 2.0, -self.y / 2.0),
                c(self.x / 2.0, self.y / 2.0),
                c((1.0 - self.z) / 2.0, 0.0),
            ],
        );
        DensityMatrix::new_unchecked(m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateFamily {
    /// `sin θ|0> + cos θ|1>`.
    QubitTheta,
    /// `(sin α|0> + cos α|1> + |2>)/√2`.
    QutritAlpha,
}

impl StateFamily {
    pub fn dim(self) -> usize {
        match self {
            StateFamily::QubitTheta => 2,
            StateFamily::QutritAlpha => 3,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            StateFamily::QubitTheta => "qubit",
            StateFamily::QutritAlpha => "qutrit",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "qubit" => Some(StateFamily::QubitTheta),
            "qutrit" => Some(StateFamily::QutritAlpha),
            _ => None,
        }
    }

    pub fn state(self, parameter: f64) -> Result<DensityMatrix> {
        match self {
            StateFamily::QubitTheta => qubit_family(parameter),
            StateFamily::QutritAlpha => qutrit_family(parameter),
        }
    }

    pub fn ket(self, parameter: f64) -> Result<Vec<C64>> {
        check_parameter(parameter)?;
        Ok(match self {
            StateFamily::QubitTheta => vec![c(parameter.sin(), 0.0), c(parameter.cos(), 0.0)],
            StateFamily::QutritAlpha => vec![
                c(parameter.sin() * FRAC_1_SQRT_2, 0.0),
                c(parameter.cos() * FRAC_1_SQRT_2, 0.0),
                c(FRAC_1_SQRT_2, 0.0),
            ],
        })
    }
}

impl fmt::Display for StateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A member of one of the state families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateFamilyPoint {
    pub family: StateFamily,
    pub parameter: f64,
}

impl StateFamilyPoint {
    pub fn new(family: StateFamily, parameter: f64) -> Result<Self> {
        check_parameter(parameter)?;
        Ok(Self { family, parameter })
    }

    pub fn state(&self) -> DensityMatrix {
        self.family
            .state(self.parameter)
            .expect("parameter checked at construction")
    }
}

fn check_parameter(p: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&p) {
        return Err(Error::OutOfRange {
            value: p,
            lo: 0.0,
            hi: FRAC_PI_2,
        });
    }
    Ok(())
}

pub fn qubit_family(theta: f64) -> Result<DensityMatrix> {
    let ket = StateFamily::QubitTheta.ket(theta)?;
    Ok(DensityMatrix::new_unchecked(ComplexMatrix::projector(&ket)))
}

pub fn qutrit_family(alpha: f64) -> Result<DensityMatrix> {
    let ket = StateFamily::QutritAlpha.ket(alpha)?;
    Ok(DensityMatrix::new_unchecked(ComplexMatrix::projector(&ket)))
}

/// `r_i = Tr[rho σ_i]`.
pub fn bloch_of(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::WrongDimension {
            expected: 2,
            actual: rho.dim(),
        });
    }
    let m = rho.matrix();
    let off = m[(1, 0)];
    Ok(BlochVector {
        x: 2.0 * off.re,
        y: 2.0 * off.im,
        z: m[(0, 0)].re - m[(1, 1)].re,
    })
}

/// `A A^dagger / Tr(A A^dagger)` with `A` a complex Ginibre matrix.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    loop {
        let a = ComplexMatrix::from_fn(dim, dim, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let gram = &a * &a.adjoint();
        let tr = gram.trace().re;
        if tr > 1e-12 {
            let mut rho = gram.scale(1.0 / tr);
            // Exact Hermitian symmetry on the diagonal.
            for i in 0..dim {
                rho[(i, i)] = c(rho[(i, i)].re, 0.0);
            }
            return DensityMatrix::new_unchecked(rho);
        }
    }
}

/// Haar-ish random pure state from a normalized complex Gaussian vector.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    loop {
        let v: Vec<C64> = (0..dim)
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-9 {
            let v: Vec<C64> = v.iter().map(|z| z / norm).collect();
            return DensityMatrix::new_unchecked(ComplexMatrix::projector(&v));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn qubit_family_examples() {
        let r0 = qubit_family(0.0).unwrap();
        assert!(
            r0.matrix()
                .max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.0, 1.0]))
                < 1e-15
        );

        let r = qubit_family(FRAC_PI_4).unwrap();
        for z in r.matrix().entries() {
            assert_abs_diff_eq!(z.re, 0.5, epsilon = 1e-15);
        }

        let r = qubit_family(PI / 6.0).unwrap();
        assert_abs_diff_eq!(r.matrix()[(0, 1)].re, 3f64.sqrt() / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn qutrit_family_examples() {
        let k = StateFamily::QutritAlpha.ket(0.0).unwrap();
        assert_abs_diff_eq!(k[0].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k[1].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(k[2].re, FRAC_1_SQRT_2, epsilon = 1e-15);

        let k = StateFamily::QutritAlpha.ket(FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(k[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(k[1].re, 0.0, epsilon = 1e-15);

        let r = qutrit_family(FRAC_PI_4).unwrap();
        assert_abs_diff_eq!(r.matrix()[(0, 1)].re, 0.25, epsilon = 1e-15);
        assert!(DensityMatrix::new(r.into_matrix()).is_ok());
    }

    #[test]
    fn family_parameter_range() {
        assert!(matches!(qubit_family(-0.01), Err(Error::OutOfRange { .. })));
        assert!(matches!(
            qutrit_family(FRAC_PI_2 + 1e-9),
            Err(Error::OutOfRange { .. })
        ));
        assert!(qubit_family(FRAC_PI_2).is_ok());
    }

    #[test]
    fn bloch_examples() {
        let b = bloch_of(&DensityMatrix::maximally_mixed(2).unwrap()).unwrap();
        assert_eq!((b.x, b.y, b.z), (0.0, 0.0, 0.0));

        let b = bloch_of(&qubit_family(FRAC_PI_4).unwrap()).unwrap();
        assert_abs_diff_eq!(b.x, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.z, 0.0, epsilon = 1e-15);

        let b = bloch_of(&qubit_family(PI / 6.0).unwrap()).unwrap();
        assert_abs_diff_eq!(b.x, 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.z, -0.5, epsilon = 1e-15);

        assert!(matches!(
            bloch_of(&qutrit_family(0.3).unwrap()),
            Err(Error::WrongDimension { .. })
        ));
    }

    #[test]
    fn bloch_round_trip_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let rho = random_density_matrix(2, &mut rng);
            let back = bloch_of(&rho).unwrap().to_density();
            assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-14);
        }
    }

    #[test]
    fn random_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2, 3] {
            for _ in 0..100 {
                assert!(
                    DensityMatrix::new(random_density_matrix(d, &mut rng).into_matrix()).is_ok()
                );
                assert!(DensityMatrix::new(random_pure_state(d, &mut rng).into_matrix()).is_ok());
            }
        }
    }

    #[test]
    fn density_constructor_rejects_bad_input() {
        assert!(DensityMatrix::new(ComplexMatrix::identity(2)).is_err());
        assert!(matches!(
            DensityMatrix::new(ComplexMatrix::identity(4).scale(0.25)),
            Err(Error::WrongDimension { .. })
        ));
        assert!(BlochVector::new(1.0, 1.0, 0.0).is_err());
    }
}
