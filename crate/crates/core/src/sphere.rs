//! Points of the Riemann sphere and the two involutions used throughout.

use num_complex::Complex64;

/// A point of the Riemann sphere: either a finite complex number or the
/// point at infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn finite(re: f64, im: f64) -> Self {
        SpherePoint::Finite(Complex64::new(re, im))
    }

    pub fn zero() -> Self {
        SpherePoint::Finite(Complex64::new(0.0, 0.0))
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn as_finite(&self) -> Option<Complex64> {
        match self {
            SpherePoint::Finite(z) => Some(*z),
            SpherePoint::Infinity => None,
        }
    }

    /// The holomorphic involution `z -> -z`. Its fixed points are 0 and
    /// infinity.
    pub fn negated(&self) -> Self {
        match self {
            SpherePoint::Finite(z) => SpherePoint::Finite(-z),
            SpherePoint::Infinity => SpherePoint::Infinity,
        }
    }

    /// The antiholomorphic involution `z -> C^2 / conj(z)` exchanging 0 and
    /// infinity. Points with `|z| = C` are fixed.
    pub fn tau(&self, modulus: f64) -> Self {
        match self {
            SpherePoint::Finite(z) if z.norm_sqr() == 0.0 => SpherePoint::Infinity,
            SpherePoint::Finite(z) => SpherePoint::Finite(modulus * modulus / z.conj()),
            SpherePoint::Infinity => SpherePoint::Finite(Complex64::new(0.0, 0.0)),
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::Finite(z)
    }
}
