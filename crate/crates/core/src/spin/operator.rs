use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::{SpinError, Spinor};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A 2×2 complex matrix acting on spinors in the `{|+z⟩, |−z⟩}` basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Operator2 {
    m: [[Complex64; 2]; 2],
}

impl Operator2 {
    pub const IDENTITY: Operator2 = Operator2 {
        m: [[ONE, ZERO], [ZERO, ONE]],
    };
    pub const SIGMA_X: Operator2 = Operator2 {
        m: [[ZERO, ONE], [ONE, ZERO]],
    };
    pub const SIGMA_Y: Operator2 = Operator2 {
        m: [[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]],
    };
    pub const SIGMA_Z: Operator2 = Operator2 {
        m: [[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]],
    };

    /// The Pauli vector `(σx, σy, σz)`.
    pub const PAULI: [Operator2; 3] = [Self::SIGMA_X, Self::SIGMA_Y, Self::SIGMA_Z];

    pub const fn new(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let m = &self.m;
        Self::new([[c * m[0][0], c * m[0][1]], [c * m[1][0], c * m[1][1]]])
    }

    /// `n·σ` for a real 3-vector `n`.
    pub fn pauli_dot(n: [f64; 3]) -> Self {
        Self::new([
            [Complex64::new(n[2], 0.0), Complex64::new(n[0], -n[1])],
            [Complex64::new(n[0], n[1]), Complex64::new(-n[2], 0.0)],
        ])
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Operator2) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.adjoint() * *self).max_abs_diff(&Self::IDENTITY) <= tol
    }

    pub fn is_special(&self, tol: f64) -> bool {
        (self.det() - ONE).norm() <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Checks `U†U = 1` and `det U = 1` within `tol`.
    pub fn ensure_special_unitary(&self, tol: f64) -> Result<(), SpinError> {
        if self.is_unitary(tol) && self.is_special(tol) {
            Ok(())
        } else {
            Err(SpinError::NotSpecialUnitary {
                unitarity_defect: (self.adjoint() * *self).max_abs_diff(&Self::IDENTITY),
                det_defect: (self.det() - ONE).norm(),
            })
        }
    }

    /// Matrix–vector product. The result is not renormalized, so this is only
    /// norm-preserving for unitary operators.
    pub fn apply(&self, s: &Spinor) -> Spinor {
        let [a, b] = s.components();
        Spinor::from_raw(self.m[0][0] * a + self.m[0][1] * b, self.m[1][0] * a + self.m[1][1] * b)
    }
}

impl Mul for Operator2 {
    type Output = Operator2;

    fn mul(self, rhs: Operator2) -> Operator2 {
        let (a, b) = (&self.m, &rhs.m);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Operator2::new(out)
    }
}

impl Add for Operator2 {
    type Output = Operator2;

    fn add(self, rhs: Operator2) -> Operator2 {
        let (a, b) = (&self.m, &rhs.m);
        Operator2::new([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Operator2 {
    type Output = Operator2;

    fn sub(self, rhs: Operator2) -> Operator2 {
        self + (-rhs)
    }
}

impl Neg for Operator2 {
    type Output = Operator2;

    fn neg(self) -> Operator2 {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}
