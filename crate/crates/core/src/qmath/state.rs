use serde::{Deserialize, Serialize};

use super::eigen::{hermitian_eigensolve, Eigen};
use super::matrix::{Mat, Mat2, Mat4, Vector, C64};
use crate::error::{Error, Result};

pub const STATE_HERMITIAN_TOL: f64 = 1e-12;
pub const STATE_TRACE_TOL: f64 = 1e-10;
/// Eigenvalues in `[-EIGEN_FLOOR, 0)` are float noise; below that is an error.
pub const EIGEN_FLOOR: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix<const N: usize> {
    mat: Mat<N>,
}

pub type Qubit = DensityMatrix<2>;
pub type TwoQubit = DensityMatrix<4>;

impl<const N: usize> DensityMatrix<N> {
    /// Validates the density-matrix invariants and wraps `mat`.
    pub fn new(mat: Mat<N>) -> Result<Self> {
        let asym = mat.hermitian_defect();
        if asym > STATE_HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (asymmetry {asym:.3e})"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > STATE_TRACE_TOL || tr.im.abs() > STATE_TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let e = hermitian_eigensolve(&mat)?;
        let min = e.values[N - 1];
        if min < -EIGEN_FLOOR {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(DensityMatrix {
            mat: mat.hermitian_part(),
        })
    }

    pub fn from_pure(ket: &Vector<N>) -> Result<Self> {
        let n: f64 = ket.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(Error::InvalidState("zero ket".into()));
        }
        let k = ket.map(|x| x / n);
        Ok(DensityMatrix {
            mat: Mat::projector(&k),
        })
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix {
            mat: Mat::<N>::identity().scale(1.0 / N as f64),
        }
    }

    /// Convex combination `Σ w_k ρ_k`. Weights must be non-negative and sum to 1.
    pub fn mixture(parts: &[(f64, DensityMatrix<N>)]) -> Result<Self> {
        let mut m = Mat::<N>::zeros();
        for (w, rho) in parts {
            if *w < 0.0 {
                return Err(Error::InvalidState(format!("negative weight {w}")));
            }
            m = m + rho.mat.scale(*w);
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &Mat<N> {
        &self.mat
    }

    pub fn into_matrix(self) -> Mat<N> {
        self.mat
    }

    pub fn eigen(&self) -> Eigen<N> {
        hermitian_eigensolve(&self.mat).expect("density matrices are Hermitian")
    }

    pub fn purity(&self) -> f64 {
        (self.mat * self.mat).trace().re
    }

    pub fn population(&self, k: usize) -> f64 {
        self.mat.data[k][k].re
    }
}

/// `−Tr ρ log₂ ρ` in bits.
pub fn von_neumann_entropy<const N: usize>(rho: &DensityMatrix<N>) -> f64 {
    entropy_of_spectrum(&rho.eigen().values)
}

/// Validating entry point for raw matrices.
pub fn von_neumann_entropy_of<const N: usize>(m: &Mat<N>) -> Result<f64> {
    Ok(von_neumann_entropy(&DensityMatrix::new(*m)?))
}

/// Shannon entropy (bits) of a probability vector, with `0·log 0 = 0` and
/// values above `-EIGEN_FLOOR` clamped at zero.
pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .map(|&x| if x <= 0.0 { 0.0 } else { -x * x.log2() })
        .sum::<f64>()
        .max(0.0)
}

/// `h(x) = −x log₂ x − (1−x) log₂(1−x)`
pub fn binary_entropy(x: f64) -> f64 {
    entropy_of_spectrum(&[x, 1.0 - x])
}

/// `½ Σ |λ_k(a − b)|`. Works on any Hermitian pair, including sub-normalized
/// operators.
pub fn trace_distance<const N: usize>(a: &Mat<N>, b: &Mat<N>) -> Result<f64> {
    let e = hermitian_eigensolve(&(*a - *b))?;
    Ok(0.5 * e.values.iter().map(|x| x.abs()).sum::<f64>())
}

/// Like [`trace_distance`] but for operands already known to be Hermitian.
/// Skips validation; used in optimizer inner loops.
pub fn trace_distance2(a: &Mat2, b: &Mat2) -> f64 {
    let d = *a - *b;
    let x = d.data[0][0].re;
    let w = d.data[1][1].re;
    let off = 0.5 * (d.data[0][1] + d.data[1][0].conj());
    let mean = 0.5 * (x + w);
    let half_gap = (0.25 * (x - w) * (x - w) + off.norm_sqr()).sqrt();
    0.5 * ((mean + half_gap).abs() + (mean - half_gap).abs())
}

/// Which qubit of a memory ⊗ ancilla pair to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Memory,
    Ancilla,
}

/// Partial trace of a two-qubit operator (memory ⊗ ancilla ordering),
/// removing `traced`.
pub fn partial_trace_matrix(m: &Mat4, traced: Subsystem) -> Mat2 {
    let mut out = Mat2::zeros();
    for r in 0..2 {
        for c in 0..2 {
            out.data[r][c] = match traced {
                Subsystem::Ancilla => (0..2).map(|k| m.data[2 * r + k][2 * c + k]).sum(),
                Subsystem::Memory => (0..2).map(|k| m.data[2 * k + r][2 * k + c]).sum(),
            };
        }
    }
    out
}

pub fn partial_trace_ancilla(rho: &TwoQubit, traced: Subsystem) -> Qubit {
    DensityMatrix {
        mat: partial_trace_matrix(rho.matrix(), traced).hermitian_part(),
    }
}

impl DensityMatrix<2> {
    pub fn tensor(&self, other: &Qubit) -> TwoQubit {
        DensityMatrix {
            mat: self.mat.kron(&other.mat),
        }
    }

    pub fn bloch(&self) -> BlochVector {
        density_to_bloch(self)
    }
}

/// Real Bloch coordinates of a qubit state, `|b| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const BLOCH_TOL: f64 = 1e-10;

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let b = BlochVector { x, y, z };
        let norm = b.norm();
        if !(norm <= 1.0 + BLOCH_TOL) {
            return Err(Error::OutOfBall { norm });
        }
        Ok(b)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Radial projection into the closed unit ball.
    pub fn clipped(x: f64, y: f64, z: f64) -> Self {
        let b = BlochVector { x, y, z };
        let n = b.norm();
        if n > 1.0 {
            BlochVector {
                x: x / n,
                y: y / n,
                z: z / n,
            }
        } else {
            b
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// `(I + xX + yY + zZ)/2` without validation.
    pub fn to_matrix(&self) -> Mat2 {
        let h = 0.5;
        Mat2::from_rows([
            [
                C64::new(h * (1.0 + self.z), 0.0),
                C64::new(h * self.x, -h * self.y),
            ],
            [
                C64::new(h * self.x, h * self.y),
                C64::new(h * (1.0 - self.z), 0.0),
            ],
        ])
    }
}

/// `ρ = (I + x·X + y·Y + z·Z)/2`
pub fn bloch_to_density(b: &BlochVector) -> Result<Qubit> {
    let norm = b.norm();
    if !(norm <= 1.0 + BLOCH_TOL) {
        return Err(Error::OutOfBall { norm });
    }
    Ok(DensityMatrix { mat: b.to_matrix() })
}

pub fn density_to_bloch(rho: &Qubit) -> BlochVector {
    let m = rho.matrix();
    BlochVector {
        x: 2.0 * m.data[0][1].re,
        y: -2.0 * m.data[0][1].im,
        z: (m.data[0][0] - m.data[1][1]).re,
    }
}
