use num_complex::Complex64;

/// A 2x2 complex matrix, the working object of the transfer-matrix cascade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2c {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl Matrix2c {
    pub fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        Matrix2c { m11, m12, m21, m22 }
    }

    pub fn identity() -> Self {
        Matrix2c {
            m11: Complex64::new(1.0, 0.0),
            m12: Complex64::new(0.0, 0.0),
            m21: Complex64::new(0.0, 0.0),
            m22: Complex64::new(1.0, 0.0),
        }
    }

    pub fn diagonal(a: Complex64, d: Complex64) -> Self {
        Matrix2c {
            m11: a,
            m12: Complex64::new(0.0, 0.0),
            m21: Complex64::new(0.0, 0.0),
            m22: d,
        }
    }

    pub fn mul(&self, rhs: &Matrix2c) -> Matrix2c {
        Matrix2c {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn is_finite(&self) -> bool {
        [self.m11, self.m12, self.m21, self.m22]
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Max absolute entrywise difference.
    pub fn distance(&self, other: &Matrix2c) -> f64 {
        [
            self.m11 - other.m11,
            self.m12 - other.m12,
            self.m21 - other.m21,
            self.m22 - other.m22,
        ]
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
    }
}

impl std::ops::Mul for Matrix2c {
    type Output = Matrix2c;
    fn mul(self, rhs: Matrix2c) -> Matrix2c {
        Matrix2c::mul(&self, &rhs)
    }
}
