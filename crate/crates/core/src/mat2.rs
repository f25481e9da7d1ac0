//! Minimal 2×2 complex linear algebra.
//!
//! Every vector and matrix lives in the fixed diabatic basis with index 0 = |e⟩
//! and index 1 = |g⟩.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Index of the excited diabatic state.
pub const E: usize = 0;
/// Index of the ground diabatic state.
pub const G: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ket(pub [C64; 2]);

impl Ket {
    pub const fn new(e: C64, g: C64) -> Self {
        Ket([e, g])
    }

    pub const fn excited() -> Self {
        Ket([ONE, ZERO])
    }

    pub const fn ground() -> Self {
        Ket([ZERO, ONE])
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Ket) -> C64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn scale(&self, s: C64) -> Ket {
        Ket([self.0[0] * s, self.0[1] * s])
    }

    pub fn normalized(&self) -> Ket {
        let inv = 1.0 / self.norm_sqr().sqrt();
        Ket([self.0[0] * inv, self.0[1] * inv])
    }

    /// |self⟩⟨other|
    pub fn outer(&self, other: &Ket) -> Mat2 {
        let mut m = [[ZERO; 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.0[r] * other.0[c].conj();
            }
        }
        Mat2(m)
    }
}

impl Add for Ket {
    type Output = Ket;
    fn add(self, rhs: Ket) -> Ket {
        Ket([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1]])
    }
}

impl Sub for Ket {
    type Output = Ket;
    fn sub(self, rhs: Ket) -> Ket {
        Ket([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn zero() -> Self {
        Mat2([[ZERO; 2]; 2])
    }

    pub const fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn diag(a: C64, b: C64) -> Self {
        Mat2([[a, ZERO], [ZERO, b]])
    }

    /// Matrix whose columns are the given kets.
    pub fn from_columns(c0: &Ket, c1: &Ket) -> Self {
        Mat2([[c0.0[0], c1.0[0]], [c0.0[1], c1.0[1]]])
    }

    pub fn column(&self, c: usize) -> Ket {
        Ket([self.0[0][c], self.0[1][c]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn apply(&self, k: &Ket) -> Ket {
        let m = &self.0;
        Ket([
            m[0][0] * k.0[0] + m[0][1] * k.0[1],
            m[1][0] * k.0[0] + m[1][1] * k.0[1],
        ])
    }

    /// ⟨a|self|b⟩
    pub fn element(&self, a: &Ket, b: &Ket) -> C64 {
        a.inner(&self.apply(b))
    }

    /// Frobenius norm of (self − self†).
    pub fn hermiticity_residual(&self) -> f64 {
        (*self - self.adjoint()).frobenius_norm()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut m: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                m = m.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        m
    }

    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Mat2) -> Mat2 {
        *self * *other + *other * *self
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale_re(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}
