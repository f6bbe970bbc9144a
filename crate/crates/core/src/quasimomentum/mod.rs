//! Quasimomenta on the sphere: the single-valued imaginary parts
//! `Im p_j(z) = ln |(z - alpha_j) / (z + alpha_j)|`, real linear
//! combinations, the associated differential density, level-set contour
//! extraction, contour quadrature and winding numbers.

mod contour;
mod integrate;

pub use contour::{trace_level_contour, Contour, ContourPoint};
pub use integrate::{contour_integral, winding_number, winding_numbers};

use crate::spectral::SpectralData;
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum ContourError {
    #[error("level through lambda passes within grid tolerance of a critical point at {0}")]
    SaddleLevel(Complex64),
    #[error("contour components failed to close or stitch at resolution {0}")]
    ResolutionTooCoarse(usize),
    #[error("lambda is within tolerance of the marked point {0}")]
    LambdaNearPole(Complex64),
    #[error("density evaluation is not finite at {0}")]
    NonFiniteDensity(Complex64),
    #[error("evaluation point is within tolerance of a pole at {0}")]
    PoleEvaluation(Complex64),
    #[error("query point lies on (or within tolerance of) the contour")]
    PointOnContour,
    #[error("momentum vector must be nonzero")]
    ZeroMomentum,
    #[error("level through lambda is not finite")]
    NonFiniteLevel,
}

/// A nonzero real combination vector `k` for `dp_k = sum_j k_j dp_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumVector(Vec<f64>);

impl MomentumVector {
    pub fn new(k: Vec<f64>) -> Result<Self, ContourError> {
        if k.iter().all(|c| *c == 0.0) || k.iter().any(|c| !c.is_finite()) {
            return Err(ContourError::ZeroMomentum);
        }
        Ok(MomentumVector(k))
    }

    /// The `j`-th coordinate basis vector in dimension `d`.
    pub fn axis(d: usize, j: usize) -> Self {
        let mut k = vec![0.0; d];
        k[j] = 1.0;
        MomentumVector(k)
    }

    /// Integer displacement vectors are the combos used by Green fields.
    pub fn from_integer(dn: &[i64]) -> Result<Self, ContourError> {
        MomentumVector::new(dn.iter().map(|&c| c as f64).collect())
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }
}

/// `Im p_j(z) = ln |(z - alpha_j) / (z + alpha_j)|`, single-valued on the
/// sphere, `0` at infinity, `-inf` at `alpha_j` and `+inf` at `-alpha_j`.
pub fn im_quasimomentum(sd: &SpectralData, j: usize, z: SpherePoint) -> f64 {
    match z {
        SpherePoint::Infinity => 0.0,
        SpherePoint::Finite(z) => {
            let a = sd.alpha(j);
            ((z - a).norm() / (z + a).norm()).ln()
        }
    }
}

/// `Im p_k(z) = sum_j k_j Im p_j(z)`.
pub fn im_p_combo(sd: &SpectralData, k: &MomentumVector, z: SpherePoint) -> f64 {
    k.components()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(j, &c)| c * im_quasimomentum(sd, j, z))
        .sum()
}

/// The density of `dp_k` against `dz`:
/// `sum_j k_j (i / (z - alpha_j) - i / (z + alpha_j))`. Simple poles with
/// residues `+i k_j` at `alpha_j` and `-i k_j` at `-alpha_j`; decays like
/// `1/z^2` at infinity.
pub fn dp_combo_value(
    sd: &SpectralData,
    k: &MomentumVector,
    z: Complex64,
) -> Result<Complex64, ContourError> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, &c) in k.components().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let a = sd.alpha(j);
        for pole in [a, -a] {
            if (z - pole).norm() < 1e-13 * a.norm() {
                return Err(ContourError::PoleEvaluation(pole));
            }
        }
        // 1/(z-a) - 1/(z+a) = 2a / (z^2 - a^2)
        acc += Complex64::i() * c * 2.0 * a / (z * z - a * a);
    }
    Ok(acc)
}

/// Roots of `dp_k` (critical points of `Im p_k`), excluding removable
/// cancellations at marked points whose combo coefficient vanishes.
pub(crate) fn critical_points(sd: &SpectralData, k: &MomentumVector) -> Vec<Complex64> {
    // dp_k = i * N(zeta) / prod_j (zeta - alpha_j^2) with zeta = z^2 and
    // N(zeta) = sum_j 2 k_j alpha_j prod_{m != j} (zeta - alpha_m^2).
    let active: Vec<usize> = k
        .components()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(j, _)| j)
        .collect();
    let squares: Vec<Complex64> = active.iter().map(|&j| {
        let a = sd.alpha(j);
        a * a
    }).collect();
    let mut numerator = vec![Complex64::new(0.0, 0.0); active.len()];
    for (idx, &j) in active.iter().enumerate() {
        let coeff = 2.0 * k.components()[j] * sd.alpha(j);
        // Product over the other active squares.
        let mut poly = vec![Complex64::new(1.0, 0.0)];
        for (m, &sq) in squares.iter().enumerate() {
            if m == idx {
                continue;
            }
            poly = poly_mul_linear(&poly, -sq);
        }
        for (deg, c) in poly.iter().enumerate() {
            numerator[deg] += coeff * c;
        }
    }
    while numerator.len() > 1 && numerator.last().unwrap().norm() < 1e-300 {
        numerator.pop();
    }
    if numerator.len() < 2 {
        return Vec::new();
    }
    let zetas = durand_kerner(&numerator);
    let mut out = Vec::new();
    for zeta in zetas {
        let root = zeta.sqrt();
        for z in [root, -root] {
            // Drop removable cancellations at inactive marked points.
            let near_pole = sd.alphas().iter().any(|&a| {
                ((z - a).norm() < 1e-8 * a.norm()) || ((z + a).norm() < 1e-8 * a.norm())
            });
            if !near_pole {
                out.push(z);
            }
        }
    }
    out
}

/// Multiply a polynomial (ascending coefficients) by `(x + shift)`.
fn poly_mul_linear(poly: &[Complex64], shift: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
    for (deg, &c) in poly.iter().enumerate() {
        out[deg] += c * shift;
        out[deg + 1] += c;
    }
    out
}

/// All roots of a complex polynomial (ascending coefficients) by
/// Durand-Kerner iteration. Degrees here are tiny (at most d - 1 in zeta).
fn durand_kerner(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in monic.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    let scale = 1.0
        + monic
            .iter()
            .take(n)
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|i| seed.powu(i as u32 + 1) * scale).collect();
    for _ in 0..200 {
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() < 1e-300 {
                continue;
            }
            let delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            moved = moved.max(delta.norm());
        }
        if moved < 1e-13 * scale {
            break;
        }
    }
    roots
}
