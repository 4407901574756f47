use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Dense square complex matrix with a compile-time dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat<const N: usize> {
    pub data: [[C64; N]; N],
}

pub type Mat2 = Mat<2>;
pub type Mat4 = Mat<4>;

/// Column vector of length `N`.
pub type Vector<const N: usize> = [C64; N];

impl<const N: usize> Default for Mat<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> Mat<N> {
    pub const DIM: usize = N;

    pub fn zeros() -> Self {
        Mat {
            data: [[ZERO; N]; N],
        }
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for k in 0..N {
            m.data[k][k] = ONE;
        }
        m
    }

    pub fn from_rows(data: [[C64; N]; N]) -> Self {
        Mat { data }
    }

    pub fn from_real(rows: [[f64; N]; N]) -> Self {
        let mut m = Self::zeros();
        for r in 0..N {
            for c in 0..N {
                m.data[r][c] = C64::new(rows[r][c], 0.0);
            }
        }
        m
    }

    pub fn diag(values: [f64; N]) -> Self {
        let mut m = Self::zeros();
        for k in 0..N {
            m.data[k][k] = C64::new(values[k], 0.0);
        }
        m
    }

    /// `|v⟩⟨w|`
    pub fn outer(v: &Vector<N>, w: &Vector<N>) -> Self {
        let mut m = Self::zeros();
        for r in 0..N {
            for c in 0..N {
                m.data[r][c] = v[r] * w[c].conj();
            }
        }
        m
    }

    /// `|v⟩⟨v|`
    pub fn projector(v: &Vector<N>) -> Self {
        Self::outer(v, v)
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for r in 0..N {
            for c in 0..N {
                m.data[r][c] = self.data[c][r].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros();
        for r in 0..N {
            for c in 0..N {
                m.data[r][c] = self.data[c][r];
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|k| self.data[k][k]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        self.scale_c(C64::new(s, 0.0))
    }

    pub fn scale_c(&self, s: C64) -> Self {
        let mut m = *self;
        for row in m.data.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        m
    }

    pub fn apply(&self, v: &Vector<N>) -> Vector<N> {
        let mut out = [ZERO; N];
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..N).map(|c| self.data[r][c] * v[c]).sum();
        }
        out
    }

    /// `self · rho · self†`
    pub fn conjugate(&self, rho: &Self) -> Self {
        *self * *rho * self.adjoint()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..N {
            for c in r..N {
                worst = worst.max((self.data[r][c] - self.data[c][r].conj()).norm());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .flat_map(|row| row.iter())
            .map(|x| x.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..N {
            for c in 0..N {
                worst = worst.max((self.data[r][c] - other.data[r][c]).norm());
            }
        }
        worst
    }

    /// Projects onto the Hermitian part, `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale(0.5)
    }

    pub fn column(&self, c: usize) -> Vector<N> {
        let mut v = [ZERO; N];
        for (r, x) in v.iter_mut().enumerate() {
            *x = self.data[r][c];
        }
        v
    }

    pub fn set_column(&mut self, c: usize, v: &Vector<N>) {
        for (r, x) in v.iter().enumerate() {
            self.data[r][c] = *x;
        }
    }

    /// Deviation of `M†M` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::identity())
    }
}

impl Mat2 {
    pub fn kron(&self, other: &Mat2) -> Mat4 {
        let mut m = Mat4::zeros();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        m.data[2 * a + c][2 * b + d] = self.data[a][b] * other.data[c][d];
                    }
                }
            }
        }
        m
    }

    pub fn pauli_x() -> Self {
        Mat2::from_real([[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn pauli_y() -> Self {
        Mat2::from_rows([[ZERO, -I], [I, ZERO]])
    }

    pub fn pauli_z() -> Self {
        Mat2::from_real([[1.0, 0.0], [0.0, -1.0]])
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Mat2::from_real([[h, h], [h, -h]])
    }

    /// `exp(-i θ Y / 2)`: a real rotation in the X–Z plane of the Bloch sphere.
    pub fn ry(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Mat2::from_real([[c, -s], [s, c]])
    }
}

impl Mat4 {
    pub fn cz() -> Self {
        Mat4::diag([1.0, 1.0, 1.0, -1.0])
    }

    pub fn swap() -> Self {
        Mat4::from_real([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ])
    }
}

impl<const N: usize> Index<(usize, usize)> for Mat<N> {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r][c]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for Mat<N> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r][c]
    }
}

impl<const N: usize> Add for Mat<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for r in 0..N {
            for c in 0..N {
                self.data[r][c] += rhs.data[r][c];
            }
        }
        self
    }
}

impl<const N: usize> Sub for Mat<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for r in 0..N {
            for c in 0..N {
                self.data[r][c] -= rhs.data[r][c];
            }
        }
        self
    }
}

impl<const N: usize> Neg for Mat<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> Mul for Mat<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zeros();
        for r in 0..N {
            for k in 0..N {
                let a = self.data[r][k];
                if a == ZERO {
                    continue;
                }
                for c in 0..N {
                    m.data[r][c] += a * rhs.data[k][c];
                }
            }
        }
        m
    }
}

/// `⟨v|w⟩`
pub fn inner<const N: usize>(v: &Vector<N>, w: &Vector<N>) -> C64 {
    v.iter().zip(w).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm<const N: usize>(v: &Vector<N>) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `v ⊗ w` for two qubit kets, memory first.
pub fn kron_ket(v: &Vector<2>, w: &Vector<2>) -> Vector<4> {
    [v[0] * w[0], v[0] * w[1], v[1] * w[0], v[1] * w[1]]
}

pub fn real_ket<const N: usize>(amps: [f64; N]) -> Vector<N> {
    amps.map(|a| C64::new(a, 0.0))
}
