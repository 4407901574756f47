//! Dense complex linear algebra for qubit and two-qubit operators.
//!
//! Two-qubit operators are always ordered memory ⊗ ancilla: basis index
//! `2·m + a`.

mod channel;
mod eigen;
mod matrix;
mod state;
#[cfg(test)]
pub(crate) mod testutil;

pub use channel::{
    apply_channel, choi_from_kraus, kraus_from_choi, standard_inputs, QuantumChannel,
    TwoQubitChannel, CP_TOL,
};
pub use eigen::{eigh2, hermitian_eigensolve, Eigen, HERMITIAN_TOL};
pub use matrix::{inner, kron_ket, norm, real_ket, Mat, Mat2, Mat4, Vector, C64, I, ONE, ZERO};
pub use state::{
    binary_entropy, bloch_to_density, density_to_bloch, entropy_of_spectrum, partial_trace_ancilla,
    partial_trace_matrix, trace_distance, trace_distance2, von_neumann_entropy,
    von_neumann_entropy_of, BlochVector, DensityMatrix, Qubit, Subsystem, TwoQubit, EIGEN_FLOOR,
};
