//! Genus-0 spectral data on the Riemann sphere and everything derived from
//! it in closed form: the discrete-exponential wave function, its dual, the
//! four-point coefficients of a face, and the edge weight function.
//!
//! The spectral data is a list of nonzero, pairwise non-parallel complex
//! directions `alpha_1 .. alpha_d`. The marked point pairs are `(+alpha_j,
//! -alpha_j)`, the normalization point is infinity, its involution partner
//! is 0, and the distinguished differential is `-dz / 2z`.

use crate::quadgraph::{FaceFrame, Part, QuadGraph, VertexId};
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum SpectralError {
    #[error("invalid spectral data: {0}")]
    InvalidData(String),
    #[error("evaluation point is within tolerance of the pole at {pole}")]
    PoleEvaluation { pole: Complex64 },
    #[error("degenerate direction pair: |alpha_x {op} alpha_y| is below tolerance")]
    DegenerateDirections { op: char },
    #[error("sign calibration failed: no sign choice satisfies the residual tests")]
    CalibrationFailed,
    #[error("graph is not valid: {0}")]
    InvalidGraph(String),
}

/// Genus-0 spectral data: the directions `alpha_j` and an optional common
/// modulus that asserts `|alpha_j| = C` for all `j` (the reality case).
#[derive(Clone, Debug)]
pub struct SpectralData {
    alphas: Vec<Complex64>,
    reality_modulus: Option<f64>,
}

impl SpectralData {
    pub fn new(alphas: Vec<Complex64>) -> Result<Self, SpectralError> {
        if alphas.len() < 2 {
            return Err(SpectralError::InvalidData(
                "need at least two directions".into(),
            ));
        }
        for (j, a) in alphas.iter().enumerate() {
            if a.norm() == 0.0 {
                return Err(SpectralError::InvalidData(format!("alpha_{j} is zero")));
            }
            for (k, b) in alphas.iter().enumerate().skip(j + 1) {
                // alpha_j / alpha_k must not be real.
                if (a.conj() * b).im.abs() < 1e-12 * a.norm() * b.norm() {
                    return Err(SpectralError::InvalidData(format!(
                        "alpha_{j} and alpha_{k} are linearly dependent over the reals"
                    )));
                }
            }
        }
        Ok(SpectralData {
            alphas,
            reality_modulus: None,
        })
    }

    /// Assert that all directions have the common modulus `c` (within
    /// `1e-12 * c`), enabling the reality symmetry checks.
    pub fn with_reality_modulus(mut self, c: f64) -> Result<Self, SpectralError> {
        if !(c > 0.0) {
            return Err(SpectralError::InvalidData("modulus must be positive".into()));
        }
        for (j, a) in self.alphas.iter().enumerate() {
            if (a.norm() - c).abs() > 1e-12 * c {
                return Err(SpectralError::InvalidData(format!(
                    "|alpha_{j}| = {} differs from the declared modulus {c}",
                    a.norm()
                )));
            }
        }
        self.reality_modulus = Some(c);
        Ok(self)
    }

    pub fn dimension(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[Complex64] {
        &self.alphas
    }

    pub fn alpha(&self, j: usize) -> Complex64 {
        self.alphas[j]
    }

    pub fn reality_modulus(&self) -> Option<f64> {
        self.reality_modulus
    }

    /// Largest direction modulus; the natural length scale of the data.
    pub fn scale(&self) -> f64 {
        self.alphas.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        let alphas: Vec<[f64; 2]> = self.alphas.iter().map(|a| [a.re, a.im]).collect();
        let mut doc = serde_json::Map::new();
        doc.insert("alphas".into(), serde_json::json!(alphas));
        if let Some(c) = self.reality_modulus {
            doc.insert("reality_modulus".into(), serde_json::json!(c));
        }
        serde_json::to_string_pretty(&serde_json::Value::Object(doc)).unwrap()
    }

    pub fn from_json(text: &str) -> Result<Self, SpectralError> {
        #[derive(serde::Deserialize)]
        struct Doc {
            alphas: Vec<[f64; 2]>,
            reality_modulus: Option<f64>,
        }
        let doc: Doc = serde_json::from_str(text)
            .map_err(|e| SpectralError::InvalidData(e.to_string()))?;
        let sd = SpectralData::new(
            doc.alphas
                .iter()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect(),
        )?;
        match doc.reality_modulus {
            Some(c) => sd.with_reality_modulus(c),
            None => Ok(sd),
        }
    }
}

/// Parity sign `(-1)^(n_1 + ... + n_d)`.
pub fn parity_sign(n: &[i64]) -> f64 {
    if n.iter().sum::<i64>().rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The wave function on the sphere: the discrete exponential
/// `prod_j ((z + alpha_j) / (z - alpha_j))^(n_j)`, normalized to 1 at
/// infinity.
pub fn wave_function(
    sd: &SpectralData,
    n: &[i64],
    z: SpherePoint,
) -> Result<Complex64, SpectralError> {
    let z = match z {
        SpherePoint::Infinity => return Ok(Complex64::new(1.0, 0.0)),
        SpherePoint::Finite(z) => z,
    };
    let mut value = Complex64::new(1.0, 0.0);
    for (j, &a) in sd.alphas.iter().enumerate() {
        let nj = *n.get(j).unwrap_or(&0);
        if nj == 0 {
            continue;
        }
        // The pole of this factor sits at +alpha_j for positive exponents
        // and at -alpha_j for negative ones.
        let pole = if nj > 0 { a } else { -a };
        if (z - pole).norm() < 1e-13 * a.norm() {
            return Err(SpectralError::PoleEvaluation { pole });
        }
        let ratio = (z + a) / (z - a);
        value *= ratio.powi(nj as i32);
    }
    Ok(value)
}

/// The dual wave function: the wave function composed with the involution
/// `z -> -z`.
pub fn dual_wave_function(
    sd: &SpectralData,
    n: &[i64],
    z: SpherePoint,
) -> Result<Complex64, SpectralError> {
    wave_function(sd, n, z.negated())
}

/// The coefficients `(a1, a2, a3)` for which `psi(p4) + a1 psi(p2) +
/// a2 psi(p3) + a3 psi(p1) = 0` on every face with frame directions
/// `(x, y)`, for all spectral parameters.
pub fn four_point_coefficients(
    sd: &SpectralData,
    frame: &FaceFrame,
) -> Result<(Complex64, Complex64, Complex64), SpectralError> {
    let ax = sd.alpha(frame.dir_x);
    let ay = sd.alpha(frame.dir_y);
    if (ax - ay).norm() < 1e-13 * (ax.norm() + ay.norm()) {
        return Err(SpectralError::DegenerateDirections { op: '-' });
    }
    let a1 = -(ax + ay) / (ax - ay);
    Ok((a1, -a1, Complex64::new(-1.0, 0.0)))
}

/// Weights carried by the two diagonals of one face.
#[derive(Clone, Copy, Debug)]
pub struct FaceWeights {
    pub primal_pair: (VertexId, VertexId),
    pub dual_pair: (VertexId, VertexId),
    pub primal_value: Complex64,
    pub dual_value: Complex64,
}

/// The base weight on the `(p1, p4)` diagonal before sign calibration:
/// `i (alpha_x - alpha_y) / (alpha_x + alpha_y)`, the reciprocal of
/// `i * a1`. The weight is invariant under common rescaling of the
/// directions.
fn base_diag_weight(ax: Complex64, ay: Complex64) -> Result<Complex64, SpectralError> {
    if (ax + ay).norm() < 1e-13 * (ax.norm() + ay.norm()) {
        return Err(SpectralError::DegenerateDirections { op: '+' });
    }
    if (ax - ay).norm() < 1e-13 * (ax.norm() + ay.norm()) {
        return Err(SpectralError::DegenerateDirections { op: '-' });
    }
    Ok(Complex64::i() * (ax - ay) / (ax + ay))
}

/// Decide the global sign of the weight function by testing both choices
/// against the discrete Cauchy-Riemann identity for the wave function on a
/// synthetic face spanned by the first two directions. The residual test is
/// unambiguous where printed sign conventions are not.
pub fn calibrate_weight_sign(sd: &SpectralData) -> Result<f64, SpectralError> {
    let (ax, ay) = (sd.alpha(0), sd.alpha(1));
    let nu = base_diag_weight(ax, ay)?;
    let scale = sd.scale();
    let mut n1 = vec![0i64; sd.dimension()];
    let mut n2 = n1.clone();
    let mut n3 = n1.clone();
    let mut n4 = n1.clone();
    n2[0] = 1;
    n3[1] = 1;
    n4[0] = 1;
    n4[1] = 1;
    let _ = &mut n1;

    let mut best: Option<(f64, f64)> = None;
    for sign in [1.0, -1.0] {
        let mut worst: f64 = 0.0;
        let mut z = Complex64::new(1.7, 0.3) * scale;
        let mut samples = 0;
        while samples < 3 {
            let evals = (
                wave_function(sd, &n1, z.into()),
                wave_function(sd, &n2, z.into()),
                wave_function(sd, &n3, z.into()),
                wave_function(sd, &n4, z.into()),
            );
            if let (Ok(f1), Ok(f2), Ok(f3), Ok(f4)) = evals {
                // Stored orientation (p1, p2, p4, p3): the CR identity reads
                // (psi(p3) - psi(p2)) = i nu(p1,p4) (psi(p4) - psi(p1)).
                let lhs = f3 - f2;
                let rhs = Complex64::i() * sign * nu * (f4 - f1);
                let denom = lhs.norm().max(rhs.norm()).max(1e-300);
                worst = worst.max((lhs - rhs).norm() / denom);
                samples += 1;
            }
            z *= Complex64::new(0.31, 1.23);
        }
        match best {
            None => best = Some((sign, worst)),
            Some((_, w)) if worst < w => best = Some((sign, worst)),
            _ => {}
        }
    }
    let (sign, residual) = best.unwrap();
    if residual > 1e-8 {
        return Err(SpectralError::CalibrationFailed);
    }
    Ok(sign)
}

/// Weights for one face. The `(p1, p4)` diagonal of the frame carries
/// `sign * i (alpha_x - alpha_y) / (alpha_x + alpha_y)` with the calibrated
/// sign; the other diagonal carries the reciprocal; which of the two is the
/// primal edge follows the part of `p1`.
pub fn weight_of_face(
    sd: &SpectralData,
    g: &QuadGraph,
    frame: &FaceFrame,
) -> Result<FaceWeights, SpectralError> {
    let sign = calibrate_weight_sign(sd)?;
    weight_of_face_with_sign(sd, g, frame, sign)
}

fn weight_of_face_with_sign(
    sd: &SpectralData,
    g: &QuadGraph,
    frame: &FaceFrame,
    sign: f64,
) -> Result<FaceWeights, SpectralError> {
    let nu14 = base_diag_weight(sd.alpha(frame.dir_x), sd.alpha(frame.dir_y))? * sign;
    let nu23 = 1.0 / nu14;
    let (primal_pair, dual_pair, primal_value, dual_value) = if g.part(frame.p1) == Part::Primal {
        ((frame.p1, frame.p4), (frame.p2, frame.p3), nu14, nu23)
    } else {
        ((frame.p2, frame.p3), (frame.p1, frame.p4), nu23, nu14)
    };
    Ok(FaceWeights {
        primal_pair,
        dual_pair,
        primal_value,
        dual_value,
    })
}

/// The weight function on all primal and dual edges of a graph, extended by
/// reciprocals across each face.
#[derive(Clone, Debug)]
pub struct WeightFunction {
    by_pair: BTreeMap<(VertexId, VertexId), Complex64>,
    face_weights: Vec<FaceWeights>,
    sign: f64,
}

impl WeightFunction {
    /// Weight on the diagonal edge joining `u` and `v`, if there is one.
    pub fn between(&self, u: VertexId, v: VertexId) -> Option<Complex64> {
        self.by_pair.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn face_weights(&self) -> &[FaceWeights] {
        &self.face_weights
    }

    /// The calibrated global sign applied to the base diagonal formula.
    pub fn calibrated_sign(&self) -> f64 {
        self.sign
    }
}

/// Build the weight function of a whole graph: one calibration, then
/// per-face evaluation.
pub fn build_weights(sd: &SpectralData, g: &QuadGraph) -> Result<WeightFunction, SpectralError> {
    let violations = g.validate();
    if !violations.is_empty() {
        return Err(SpectralError::InvalidGraph(violations[0].to_string()));
    }
    let sign = calibrate_weight_sign(sd)?;
    let mut by_pair = BTreeMap::new();
    let mut face_weights = Vec::with_capacity(g.face_count());
    for f in 0..g.face_count() {
        let frame = g
            .face_frame(f)
            .map_err(|e| SpectralError::InvalidGraph(e.to_string()))?;
        let fw = weight_of_face_with_sign(sd, g, &frame, sign)?;
        for (pair, value) in [(fw.primal_pair, fw.primal_value), (fw.dual_pair, fw.dual_value)] {
            let key = (pair.0.min(pair.1), pair.0.max(pair.1));
            by_pair.insert(key, value);
        }
        face_weights.push(fw);
    }
    Ok(WeightFunction {
        by_pair,
        face_weights,
        sign,
    })
}
