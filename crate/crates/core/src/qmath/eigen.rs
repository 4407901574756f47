use super::matrix::{Mat, Mat2, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Hermiticity tolerance accepted on input.
pub const HERMITIAN_TOL: f64 = 1e-10;
const JACOBI_OFF_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a Hermitian matrix.
///
/// `values` are sorted in descending order and column `k` of `vectors` is
/// the unit eigenvector belonging to `values[k]`.
#[derive(Debug, Clone, Copy)]
pub struct Eigen<const N: usize> {
    pub values: [f64; N],
    pub vectors: Mat<N>,
}

impl<const N: usize> Eigen<N> {
    /// `Σ_k f(λ_k) v_k v_k†`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Mat<N> {
        let mut m = Mat::<N>::zeros();
        for k in 0..N {
            let v = self.vectors.column(k);
            m = m + Mat::projector(&v).scale(f(self.values[k]));
        }
        m
    }

    pub fn reconstruct(&self) -> Mat<N> {
        self.reconstruct_with(|x| x)
    }
}

/// Eigenvalues (descending) and orthonormal eigenvectors of a Hermitian
/// matrix. Uses the closed form for qubits and cyclic Jacobi otherwise.
pub fn hermitian_eigensolve<const N: usize>(m: &Mat<N>) -> Result<Eigen<N>> {
    let asymmetry = m.hermitian_defect();
    if !(asymmetry <= HERMITIAN_TOL) {
        return Err(Error::NotHermitian { asymmetry });
    }
    let h = m.hermitian_part();
    if N == 2 {
        let mut h2 = Mat2::zeros();
        for r in 0..2 {
            for c in 0..2 {
                h2.data[r][c] = h.data[r][c];
            }
        }
        let e = eigh2(&h2);
        let mut out = Eigen {
            values: [0.0; N],
            vectors: Mat::<N>::zeros(),
        };
        for k in 0..2 {
            out.values[k] = e.values[k];
            for r in 0..2 {
                out.vectors.data[r][k] = e.vectors.data[r][k];
            }
        }
        return Ok(out);
    }
    jacobi(&h)
}

/// Closed-form qubit solver: `λ = (tr ± √((a−d)² + 4|b|²))/2`.
pub fn eigh2(m: &Mat2) -> Eigen<2> {
    let a = m.data[0][0].re;
    let d = m.data[1][1].re;
    let b = m.data[0][1];
    let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    let mean = 0.5 * (a + d);
    let (l1, l2) = (mean + half_gap, mean - half_gap);

    let v1 = if b.norm() <= 1e-300 {
        if a >= d {
            [ONE, ZERO]
        } else {
            [ZERO, ONE]
        }
    } else {
        // pick the better-conditioned row of (M − λ1) v = 0
        let cand = if a >= d {
            [C64::new(l1 - d, 0.0), b.conj()]
        } else {
            [b, C64::new(l1 - a, 0.0)]
        };
        let n = (cand[0].norm_sqr() + cand[1].norm_sqr()).sqrt();
        [cand[0] / n, cand[1] / n]
    };
    let v2 = [-v1[1].conj(), v1[0].conj()];
    let mut vectors = Mat2::zeros();
    vectors.set_column(0, &v1);
    vectors.set_column(1, &v2);
    Eigen {
        values: [l1, l2],
        vectors,
    }
}

fn off_diagonal_norm<const N: usize>(a: &Mat<N>) -> f64 {
    let mut s = 0.0;
    for r in 0..N {
        for c in 0..N {
            if r != c {
                s += a.data[r][c].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi<const N: usize>(m: &Mat<N>) -> Result<Eigen<N>> {
    let mut a = *m;
    let mut v = Mat::<N>::identity();
    let scale = m.frobenius_norm().max(1.0);
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= JACOBI_OFF_TOL * scale {
            converged = true;
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a.data[p][q];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let theta = (a.data[q][q].re - a.data[p][p].re) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = diag(1, e^{-iφ}) on (p, q) followed by the real rotation
                let mut g = Mat::<N>::identity();
                g.data[p][p] = C64::new(c, 0.0);
                g.data[p][q] = C64::new(s, 0.0);
                g.data[q][p] = -phase.conj() * s;
                g.data[q][q] = phase.conj() * c;
                a = g.adjoint() * a * g;
                a.data[p][q] = ZERO;
                a.data[q][p] = ZERO;
                v = v * g;
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > JACOBI_OFF_TOL * scale {
        return Err(Error::NoConvergence(format!(
            "Jacobi eigensolver after {JACOBI_MAX_SWEEPS} sweeps"
        )));
    }
    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&x, &y| a.data[y][y].re.total_cmp(&a.data[x][x].re));
    let mut out = Eigen {
        values: [0.0; N],
        vectors: Mat::<N>::zeros(),
    };
    for (k, &src) in order.iter().enumerate() {
        out.values[k] = a.data[src][src].re;
        out.vectors.set_column(k, &v.column(src));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::matrix::{inner, Mat4};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check<const N: usize>(m: &Mat<N>, e: &Eigen<N>, tol: f64) {
        for k in 0..N {
            let v = e.vectors.column(k);
            let mv = m.apply(&v);
            for r in 0..N {
                assert!((mv[r] - v[r] * e.values[k]).norm() < tol);
            }
            for l in 0..N {
                let ip = inner(&v, &e.vectors.column(l));
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((ip - C64::new(want, 0.0)).norm() < 1e-10);
            }
        }
        for k in 1..N {
            assert!(e.values[k - 1] >= e.values[k]);
        }
    }

    #[test]
    fn identity_and_diagonal() {
        let e = hermitian_eigensolve(&Mat2::identity()).unwrap();
        assert_eq!(e.values, [1.0, 1.0]);
        let d = Mat2::diag([3.0, -1.0]);
        let e = hermitian_eigensolve(&d).unwrap();
        assert_eq!(e.values, [3.0, -1.0]);
        assert!(e.vectors.max_abs_diff(&Mat2::identity()) < 1e-15);
        let d4 = Mat4::diag([0.1, 0.7, -0.2, 0.4]);
        let e4 = hermitian_eigensolve(&d4).unwrap();
        assert_eq!(e4.values, [0.7, 0.4, 0.1, -0.2]);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = Mat2::identity();
        m.data[0][1] = C64::new(0.5, 0.0);
        assert!(matches!(
            hermitian_eigensolve(&m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn degenerate_4x4() {
        let e = hermitian_eigensolve(&Mat4::identity().scale(0.25)).unwrap();
        assert!(e.values.iter().all(|&x| (x - 0.25).abs() < 1e-15));
    }

    fn random_hermitian<const N: usize>(rng: &mut ChaCha8Rng) -> Mat<N> {
        let mut m = Mat::<N>::zeros();
        for r in 0..N {
            for c in 0..N {
                m.data[r][c] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        m.hermitian_part()
    }

    #[test]
    fn reconstruction_over_seeded_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let h: Mat4 = random_hermitian(&mut rng);
            let e = hermitian_eigensolve(&h).unwrap();
            assert!(e.reconstruct().max_abs_diff(&h) < 1e-9);
            check(&h, &e, 1e-9);
            let h2: Mat2 = random_hermitian(&mut rng);
            let e2 = hermitian_eigensolve(&h2).unwrap();
            assert!(e2.reconstruct().max_abs_diff(&h2) < 1e-12);
            check(&h2, &e2, 1e-12);
        }
    }

    proptest! {
        #[test]
        fn jacobi_matches_trace_and_spectrum(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h: Mat4 = random_hermitian(&mut rng);
            let e = hermitian_eigensolve(&h).unwrap();
            let sum: f64 = e.values.iter().sum();
            prop_assert!((sum - h.trace().re).abs() < 1e-10);
            check(&h, &e, 1e-9);
        }
    }
}
