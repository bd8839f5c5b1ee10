//! Coherence quantifiers with respect to the computational basis.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{shannon_entropy_bits, validate_density};
use crate::states::{BlochVector, DensityMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    /// l1-norm of coherence.
    L1,
    /// Relative entropy of coherence.
    RelEnt,
    /// Coherence of formation (qubits only).
    Formation,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::L1, Measure::RelEnt, Measure::Formation];

    pub fn tag(self) -> &'static str {
        match self {
            Measure::L1 => "l1",
            Measure::RelEnt => "rel_ent",
            Measure::Formation => "formation",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.tag() == tag)
    }

    /// Largest value the measure takes in dimension `dim`.
    pub fn max_value(self, dim: usize) -> f64 {
        match self {
            Measure::L1 => (dim - 1) as f64,
            Measure::RelEnt | Measure::Formation => (dim as f64).log2(),
        }
    }

    /// Exact value on `rho`.
    pub fn evaluate(self, rho: &DensityMatrix) -> Result<f64> {
        match self {
            Measure::L1 => Ok(c_l1(rho)),
            Measure::RelEnt => Ok(c_rel_ent(rho)),
            Measure::Formation => c_formation_qubit(rho),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Binary entropy in bits, `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Sum of the moduli of all off-diagonal entries.
pub fn c_l1(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let d = rho.dim();
    let mut sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                sum += m[(i, j)].norm();
            }
        }
    }
    sum.clamp(0.0, (d - 1) as f64)
}

/// `S(diag rho) - S(rho)` in bits.
pub fn c_rel_ent(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let spectrum = validate_density(rho.matrix()).expect("DensityMatrix invariant");
    let clipped: Vec<f64> = spectrum.iter().map(|&l| l.clamp(0.0, 1.0)).collect();
    let s_rho = shannon_entropy_bits(&clipped);
    let s_diag = shannon_entropy_bits(&rho.diagonal());
    (s_diag - s_rho).clamp(0.0, (d as f64).log2())
}

/// `sqrt(r_x^2 + r_y^2)`.
pub fn c_l1_qubit_bloch(b: &BlochVector) -> f64 {
    b.x.hypot(b.y)
}

/// `h((1 + |r_z|)/2) - h((1 + r)/2)`.
pub fn c_rel_ent_qubit_bloch(b: &BlochVector) -> f64 {
    let r = b.length().min(1.0);
    let rz = b.z.abs().min(r);
    (binary_entropy((1.0 + rz) / 2.0) - binary_entropy((1.0 + r) / 2.0)).clamp(0.0, 1.0)
}

/// Coherence of formation of a qubit from the modulus of its off-diagonal entry.
pub fn c_formation_from_offdiag(offdiag_abs: f64) -> f64 {
    let c = offdiag_abs.clamp(0.0, 0.5);
    let root = (1.0 - 4.0 * c * c).max(0.0).sqrt();
    binary_entropy((1.0 + root) / 2.0).clamp(0.0, 1.0)
}

/// `h((1 + sqrt(1 - 4|rho_01|^2))/2)`.
pub fn c_formation_qubit(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(Error::WrongDimension {
            expected: 2,
            actual: rho.dim(),
        });
    }
    Ok(c_formation_from_offdiag(rho.matrix()[(0, 1)].norm()))
}
