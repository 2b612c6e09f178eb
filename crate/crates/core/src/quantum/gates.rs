use std::ops::{Add, Mul, Sub};

use super::{PauliAxis, C64, I, ONE, ZERO};
use crate::{Error, Result};

/// A 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn dagger(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    /// `self · x · self†`
    pub fn conjugate(&self, x: &Mat2) -> Mat2 {
        *self * *x * self.dagger()
    }

    /// Lie bracket `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other - *other * *self
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    /// Max entrywise deviation of `self† self` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        (self.dagger() * *self).max_abs_diff(&Mat2::IDENTITY)
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self.0;
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] += rhs.0[r][c];
            }
        }
        Mat2(out)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let mut out = self.0;
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] -= rhs.0[r][c];
            }
        }
        Mat2(out)
    }
}

/// `exp(−i·angle·σ_k/2) = cos(angle/2)·I − i·sin(angle/2)·σ_k`.
pub fn rotation_gate(axis: PauliAxis, angle: f64) -> Result<Mat2> {
    if axis == PauliAxis::I {
        return Err(Error::IdentityRotation);
    }
    let (s, c) = (angle / 2.0).sin_cos();
    Ok(Mat2::IDENTITY.scale(C64::new(c, 0.0)) - axis.matrix().scale(I * s))
}

pub fn hadamard() -> Mat2 {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Mat2::new(h, h, h, -h)
}
