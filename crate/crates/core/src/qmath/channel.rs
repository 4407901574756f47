use super::eigen::hermitian_eigensolve;
use super::matrix::{Mat2, Mat4, C64, ZERO};
use super::state::{DensityMatrix, Qubit, TwoQubit};
use crate::error::{Error, Result};

/// Eigenvalue floor below which a Choi matrix is rejected as not CP.
pub const CP_TOL: f64 = 1e-8;

/// Completely positive single-qubit map, possibly trace-decreasing, kept in
/// both Kraus and Choi form.
///
/// Choi convention: `C = Σ_ab |a⟩⟨b| ⊗ 𝓔(|a⟩⟨b|)`, input factor first.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    kraus: Vec<Mat2>,
    choi: Mat4,
}

impl QuantumChannel {
    pub fn from_kraus(kraus: Vec<Mat2>) -> Self {
        let choi = choi_from_kraus(&kraus);
        QuantumChannel { kraus, choi }
    }

    pub fn from_choi(choi: Mat4) -> Result<Self> {
        let kraus = kraus_from_choi(&choi)?;
        Ok(QuantumChannel {
            kraus,
            choi: choi.hermitian_part(),
        })
    }

    pub fn identity() -> Self {
        Self::from_kraus(vec![Mat2::identity()])
    }

    /// `ρ ↦ (1 − p) ρ + p I/2`
    pub fn depolarizing(p: f64) -> Self {
        let w0 = (1.0 - 0.75 * p).sqrt();
        let w = (p / 4.0).sqrt();
        Self::from_kraus(vec![
            Mat2::identity().scale(w0),
            Mat2::pauli_x().scale(w),
            Mat2::pauli_y().scale(w),
            Mat2::pauli_z().scale(w),
        ])
    }

    pub fn amplitude_damping(gamma: f64) -> Self {
        Self::from_kraus(vec![
            Mat2::from_real([[1.0, 0.0], [0.0, (1.0 - gamma).sqrt()]]),
            Mat2::from_real([[0.0, gamma.sqrt()], [0.0, 0.0]]),
        ])
    }

    pub fn unitary(u: Mat2) -> Self {
        Self::from_kraus(vec![u])
    }

    pub fn kraus(&self) -> &[Mat2] {
        &self.kraus
    }

    pub fn choi(&self) -> &Mat4 {
        &self.choi
    }

    /// `Σ K ρ K†`
    pub fn apply_matrix(&self, rho: &Mat2) -> Mat2 {
        self.kraus
            .iter()
            .fold(Mat2::zeros(), |acc, k| acc + k.conjugate(rho))
    }

    /// Same action evaluated from the Choi matrix: `𝓔(ρ)_cd = Σ_ab ρ_ab C_(a,c),(b,d)`.
    pub fn apply_via_choi(&self, rho: &Mat2) -> Mat2 {
        let mut out = Mat2::zeros();
        for c in 0..2 {
            for d in 0..2 {
                let mut s = ZERO;
                for a in 0..2 {
                    for b in 0..2 {
                        s += rho.data[a][b] * self.choi.data[2 * a + c][2 * b + d];
                    }
                }
                out.data[c][d] = s;
            }
        }
        out
    }

    /// `Σ K†K`; equals the identity for trace-preserving maps.
    pub fn effect(&self) -> Mat2 {
        self.kraus
            .iter()
            .fold(Mat2::zeros(), |acc, k| acc + k.adjoint() * *k)
    }

    pub fn trace_preservation_defect(&self) -> f64 {
        self.effect().max_abs_diff(&Mat2::identity())
    }

    /// Sum of two branches, e.g. `𝓔₀ + 𝓔₁`.
    pub fn sum(&self, other: &QuantumChannel) -> QuantumChannel {
        let mut kraus = self.kraus.clone();
        kraus.extend_from_slice(&other.kraus);
        QuantumChannel {
            kraus,
            choi: self.choi + other.choi,
        }
    }

    pub fn min_choi_eigenvalue(&self) -> f64 {
        hermitian_eigensolve(&self.choi)
            .map(|e| e.values[3])
            .unwrap_or(f64::NEG_INFINITY)
    }
}

/// Applies `ch` to a state. The output may be sub-normalized.
pub fn apply_channel(ch: &QuantumChannel, rho: &Qubit) -> Mat2 {
    ch.apply_matrix(rho.matrix())
}

pub fn choi_from_kraus(kraus: &[Mat2]) -> Mat4 {
    let mut choi = Mat4::zeros();
    for k in kraus {
        // |v⟩ = Σ_a |a⟩ ⊗ K|a⟩
        let mut v = [ZERO; 4];
        for a in 0..2 {
            for c in 0..2 {
                v[2 * a + c] = k.data[c][a];
            }
        }
        choi = choi + Mat4::projector(&v);
    }
    choi
}

/// Canonical Kraus operators from the eigen-decomposition of a Choi matrix.
pub fn kraus_from_choi(choi: &Mat4) -> Result<Vec<Mat2>> {
    let e = hermitian_eigensolve(choi)?;
    if e.values[3] < -CP_TOL {
        return Err(Error::NotCp {
            min_eigenvalue: e.values[3],
        });
    }
    let mut kraus = Vec::new();
    for k in 0..4 {
        let lambda = e.values[k];
        if lambda <= 1e-15 {
            continue;
        }
        let s = lambda.sqrt();
        let v = e.vectors.column(k);
        let mut m = Mat2::zeros();
        for a in 0..2 {
            for c in 0..2 {
                m.data[c][a] = v[2 * a + c] * s;
            }
        }
        kraus.push(m);
    }
    if kraus.is_empty() {
        kraus.push(Mat2::zeros());
    }
    Ok(kraus)
}

/// Two-qubit map (memory ⊗ ancilla) held as a Kraus list.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitChannel {
    kraus: Vec<Mat4>,
}

impl TwoQubitChannel {
    pub fn from_kraus(kraus: Vec<Mat4>) -> Self {
        TwoQubitChannel { kraus }
    }

    pub fn unitary(u: Mat4) -> Self {
        TwoQubitChannel { kraus: vec![u] }
    }

    pub fn kraus(&self) -> &[Mat4] {
        &self.kraus
    }

    /// Follows this channel with the unitary `u`.
    pub fn then_unitary(&self, u: &Mat4) -> Self {
        TwoQubitChannel {
            kraus: self.kraus.iter().map(|k| *u * *k).collect(),
        }
    }

    /// Follows this channel with `ρ ↦ (1 − p) ρ + p I/4`.
    pub fn then_depolarizing(&self, p: f64) -> Self {
        if p == 0.0 {
            return self.clone();
        }
        let paulis = [
            Mat2::identity(),
            Mat2::pauli_x(),
            Mat2::pauli_y(),
            Mat2::pauli_z(),
        ];
        let mut kraus = Vec::with_capacity(self.kraus.len() * 16);
        for (a, pa) in paulis.iter().enumerate() {
            for (b, pb) in paulis.iter().enumerate() {
                let w = if a == 0 && b == 0 {
                    1.0 - 15.0 * p / 16.0
                } else {
                    p / 16.0
                };
                if w == 0.0 {
                    continue;
                }
                let op = pa.kron(pb).scale(w.sqrt());
                kraus.extend(self.kraus.iter().map(|k| op * *k));
            }
        }
        TwoQubitChannel { kraus }
    }

    pub fn apply_matrix(&self, rho: &Mat4) -> Mat4 {
        self.kraus
            .iter()
            .fold(Mat4::zeros(), |acc, k| acc + k.conjugate(rho))
    }

    pub fn apply(&self, rho: &TwoQubit) -> Mat4 {
        self.apply_matrix(rho.matrix())
    }

    pub fn trace_preservation_defect(&self) -> f64 {
        self.kraus
            .iter()
            .fold(Mat4::zeros(), |acc, k| acc + k.adjoint() * *k)
            .max_abs_diff(&Mat4::identity())
    }

    /// Largest entrywise output deviation from `other` over the 16 product
    /// inputs built from [`standard_inputs`].
    pub fn action_distance(&self, other: &TwoQubitChannel) -> f64 {
        let mut worst = 0.0f64;
        for input in product_basis_inputs() {
            let a = self.apply_matrix(&input);
            let b = other.apply_matrix(&input);
            worst = worst.max(a.max_abs_diff(&b));
        }
        worst
    }
}

/// Tomographically complete single-qubit inputs `|0⟩, |1⟩, |+⟩, |+i⟩`.
pub fn standard_inputs() -> [Qubit; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        [C64::new(1.0, 0.0), ZERO],
        [ZERO, C64::new(1.0, 0.0)],
        [C64::new(h, 0.0), C64::new(h, 0.0)],
        [C64::new(h, 0.0), C64::new(0.0, h)],
    ]
    .map(|k| DensityMatrix::from_pure(&k).expect("unit kets"))
}

fn product_basis_inputs() -> Vec<Mat4> {
    let ins = standard_inputs();
    let mut out = Vec::with_capacity(16);
    for a in &ins {
        for b in &ins {
            out.push(a.matrix().kron(b.matrix()));
        }
    }
    out
}
