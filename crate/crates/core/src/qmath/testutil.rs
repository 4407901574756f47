use rand::Rng;

use super::channel::QuantumChannel;
use super::eigen::hermitian_eigensolve;
use super::matrix::{Mat2, C64};
use super::state::{bloch_to_density, BlochVector, Qubit};

fn gaussian_ish<R: Rng>(rng: &mut R) -> f64 {
    rng.random_range(-1.0..1.0)
}

pub fn random_mat2<R: Rng>(rng: &mut R) -> Mat2 {
    let mut m = Mat2::zeros();
    for r in 0..2 {
        for c in 0..2 {
            m.data[r][c] = C64::new(gaussian_ish(rng), gaussian_ish(rng));
        }
    }
    m
}

pub fn random_unitary2<R: Rng>(rng: &mut R) -> Mat2 {
    let (a, b, c, d): (f64, f64, f64, f64) = (
        rng.random_range(0.0..6.3),
        rng.random_range(0.0..6.3),
        rng.random_range(0.0..6.3),
        rng.random_range(0.0..6.3),
    );
    let phase = |t: f64| C64::from_polar(1.0, t);
    let rz = |t: f64| {
        Mat2::from_rows([
            [phase(-t / 2.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), phase(t / 2.0)],
        ])
    };
    rz(a) * Mat2::ry(b) * rz(c).scale_c(phase(d))
}

/// Random point in the Bloch ball.
pub fn random_qubit<R: Rng>(rng: &mut R) -> Qubit {
    loop {
        let (x, y, z) = (gaussian_ish(rng), gaussian_ish(rng), gaussian_ish(rng));
        if let Ok(b) = BlochVector::new(x, y, z) {
            return bloch_to_density(&b).unwrap();
        }
    }
}

/// Random CPTP map from a normalized pair of random Kraus operators.
pub fn random_cptp<R: Rng>(rng: &mut R) -> QuantumChannel {
    let ks = [random_mat2(rng), random_mat2(rng)];
    let s = ks[0].adjoint() * ks[0] + ks[1].adjoint() * ks[1];
    let inv_sqrt = hermitian_eigensolve(&s)
        .unwrap()
        .reconstruct_with(|x| 1.0 / x.sqrt());
    QuantumChannel::from_kraus(ks.iter().map(|k| *k * inv_sqrt).collect())
}
