//! The H function and the Green's function of the weighted Laplacian as
//! contour integrals of the spectral density
//! `psi(x, z) psi_dual(xt, z) * (-1 / 2z)` over the level-set contour
//! `C_{n(x) - n(xt)}(lambda)`, an independent residue-based oracle for the
//! same integrals, the delta-property verification with diagonal
//! calibration, and growth reports.

use crate::operators::{vertex_weight_sum, FieldDomain, OperatorError, VertexField};
use crate::quadgraph::{Part, QuadGraph, VertexId};
use crate::quasimomentum::{
    contour_integral, im_p_combo, im_quasimomentum, trace_level_contour, winding_number, Contour,
    ContourError, MomentumVector,
};
use crate::spectral::{wave_function, SpectralData, SpectralError, WeightFunction};
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum GreenError {
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("vertices {0} and {1} are distinct but carry the same coordinates")]
    DegenerateDifference(VertexId, VertexId),
    #[error("vertex weight sum is numerically zero at {0}")]
    ZeroWeightSum(VertexId),
    #[error("residue circle around {0} intersects the contour")]
    PoleTooCloseToContour(Complex64),
    #[error("patch does not contain all vertices within radius {radius} of vertex {center}")]
    PatchTooSmall { center: VertexId, radius: i64 },
}

/// The spectral density integrated over Green contours. Evaluates
/// `psi(n_x, z) * psi(n_xt, -z) * (-1 / 2z)`; since the dual wave function
/// is the reciprocal of the wave function on the sphere, this equals
/// `psi(n_x - n_xt, z) * (-1 / 2z)`, the numerically robust form used for
/// evaluation.
#[derive(Clone, Debug)]
pub struct GreenIntegrand {
    sd: SpectralData,
    delta_n: Vec<i64>,
}

impl GreenIntegrand {
    pub fn new(sd: &SpectralData, n_x: &[i64], n_xt: &[i64]) -> Self {
        let delta_n = n_x.iter().zip(n_xt.iter()).map(|(a, b)| a - b).collect();
        GreenIntegrand {
            sd: sd.clone(),
            delta_n,
        }
    }

    pub fn delta_n(&self) -> &[i64] {
        &self.delta_n
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64, ContourError> {
        if z.norm_sqr() == 0.0 {
            return Err(ContourError::PoleEvaluation(z));
        }
        let psi = wave_function(&self.sd, &self.delta_n, SpherePoint::Finite(z))
            .map_err(|_| ContourError::PoleEvaluation(z))?;
        Ok(psi * (-0.5) / z)
    }

    /// Density written on the far chart: the pullback under `z = 1/w`
    /// including the Jacobian `dz = -dw / w^2`.
    pub fn eval_w(&self, w: Complex64) -> Result<Complex64, ContourError> {
        if w.norm_sqr() == 0.0 {
            return Err(ContourError::PoleEvaluation(w));
        }
        let z = 1.0 / w;
        let psi = wave_function(&self.sd, &self.delta_n, SpherePoint::Finite(z))
            .map_err(|_| ContourError::PoleEvaluation(w))?;
        // (-1/2z) * dz = (-1/2z)(-1/w^2) dw = dw / 2w
        Ok(psi * 0.5 / w)
    }

    /// Poles among the marked points, as `(location, order)` with positive
    /// order. The poles at 0 and infinity are always simple and handled
    /// separately.
    pub fn marked_poles(&self) -> Vec<(Complex64, i64)> {
        let mut out = Vec::new();
        for (j, &dn) in self.delta_n.iter().enumerate() {
            if dn > 0 {
                out.push((self.sd.alpha(j), dn));
            } else if dn < 0 {
                out.push((-self.sd.alpha(j), -dn));
            }
        }
        out
    }
}

/// Construct the spectral density for a pair of vertices.
pub fn green_integrand(
    sd: &SpectralData,
    g: &QuadGraph,
    x: VertexId,
    xt: VertexId,
) -> GreenIntegrand {
    GreenIntegrand::new(sd, g.coords(x), g.coords(xt))
}

/// Cache of traced contours keyed by the primitive integer direction of
/// `delta n`: the level set through a fixed lambda is invariant under
/// positive rescaling of the combination vector.
pub struct ContourCache<'a> {
    sd: &'a SpectralData,
    lambda: Complex64,
    resolution: usize,
    map: BTreeMap<Vec<i64>, Contour>,
}

impl<'a> ContourCache<'a> {
    pub fn new(sd: &'a SpectralData, lambda: Complex64, resolution: usize) -> Self {
        ContourCache {
            sd,
            lambda,
            resolution,
            map: BTreeMap::new(),
        }
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    fn primitive(dn: &[i64]) -> Vec<i64> {
        let mut g = 0i64;
        for &c in dn {
            g = gcd(g, c.abs());
        }
        if g <= 1 {
            dn.to_vec()
        } else {
            dn.iter().map(|&c| c / g).collect()
        }
    }

    pub fn contour(&mut self, dn: &[i64]) -> Result<&Contour, ContourError> {
        let key = Self::primitive(dn);
        if !self.map.contains_key(&key) {
            let k = MomentumVector::from_integer(&key)?;
            let contour = trace_level_contour(self.sd, &k, self.lambda, self.resolution)?;
            self.map.insert(key.clone(), contour);
        }
        Ok(self.map.get(&key).unwrap())
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `H(x, xt, lambda)`: the integral of the spectral density over
/// `C_{n(x) - n(xt)}(lambda)`, and 0 by definition when `x = xt`.
pub fn h_function(
    sd: &SpectralData,
    g: &QuadGraph,
    x: VertexId,
    xt: VertexId,
    lambda: Complex64,
    resolution: usize,
) -> Result<Complex64, GreenError> {
    let mut cache = ContourCache::new(sd, lambda, resolution);
    h_function_cached(sd, g, x, xt, &mut cache)
}

pub fn h_function_cached(
    sd: &SpectralData,
    g: &QuadGraph,
    x: VertexId,
    xt: VertexId,
    cache: &mut ContourCache,
) -> Result<Complex64, GreenError> {
    if x == xt {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let integrand = green_integrand(sd, g, x, xt);
    if integrand.delta_n().iter().all(|&c| c == 0) {
        return Err(GreenError::DegenerateDifference(x, xt));
    }
    let contour = cache.contour(integrand.delta_n())?;
    Ok(contour_integral(contour, |z| integrand.eval(z))?)
}

/// Independent verification path for the same integral: sum over the poles
/// of `winding * 2 pi i * residue`, with residues obtained by small-circle
/// quadrature around each pole (on the far chart for the pole at infinity)
/// and windings measured on the traced contour. No long-contour quadrature
/// enters this path.
pub fn residue_oracle(
    sd: &SpectralData,
    g: &QuadGraph,
    x: VertexId,
    xt: VertexId,
    lambda: Complex64,
    resolution: usize,
) -> Result<Complex64, GreenError> {
    let mut cache = ContourCache::new(sd, lambda, resolution);
    residue_oracle_cached(sd, g, x, xt, &mut cache)
}

pub fn residue_oracle_cached(
    sd: &SpectralData,
    g: &QuadGraph,
    x: VertexId,
    xt: VertexId,
    cache: &mut ContourCache,
) -> Result<Complex64, GreenError> {
    if x == xt {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let integrand = green_integrand(sd, g, x, xt);
    let contour = cache.contour(integrand.delta_n())?.clone();
    residue_sum(sd, &integrand, &contour)
}

/// Evaluate `2 pi i * sum_p wind(C, p) Res_p` over the poles of the density.
pub fn residue_sum(
    sd: &SpectralData,
    integrand: &GreenIntegrand,
    contour: &Contour,
) -> Result<Complex64, GreenError> {
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let mut total = Complex64::new(0.0, 0.0);

    for (pole, order) in integrand.marked_poles() {
        let wind = winding_number(contour, SpherePoint::Finite(pole))?;
        if wind == 0 {
            continue;
        }
        let radius = residue_radius(pole.norm(), order);
        check_separation(contour, pole, radius)?;
        let res = circle_residue(|z| integrand.eval(z), pole, radius)?;
        total += two_pi_i * wind as f64 * res;
    }

    // Simple pole at 0.
    let scale0 = sd
        .alphas()
        .iter()
        .map(|a| a.norm())
        .fold(f64::INFINITY, f64::min);
    let wind0 = winding_number(contour, SpherePoint::zero())?;
    if wind0 != 0 {
        let radius = residue_radius(scale0, 1);
        check_separation(contour, Complex64::new(0.0, 0.0), radius)?;
        let res = circle_residue(|z| integrand.eval(z), Complex64::new(0.0, 0.0), radius)?;
        total += two_pi_i * wind0 as f64 * res;
    }

    // Simple pole at infinity, handled on the far chart.
    let wind_inf = winding_number(contour, SpherePoint::Infinity)?;
    if wind_inf != 0 {
        let radius = residue_radius(1.0 / sd.scale(), 1);
        let res = circle_residue(|w| integrand.eval_w(w), Complex64::new(0.0, 0.0), radius)?;
        total += two_pi_i * wind_inf as f64 * res;
    }

    Ok(total)
}

/// Residue circle radius: `1e-3 * scale` for simple poles, widened for
/// higher orders where the float cancellation of the large Laurent modes
/// would otherwise exceed the oracle tolerance.
fn residue_radius(scale: f64, order: i64) -> f64 {
    let base = if order <= 1 {
        1e-3
    } else {
        // eps * r^(1 - order) <= 1e-11 requires r >= (eps / 1e-11)^(1/(order-1)).
        let needed = (f64::EPSILON / 1e-11).powf(1.0 / (order as f64 - 1.0));
        (1.5 * needed).max(1e-3)
    };
    base * scale
}

fn check_separation(contour: &Contour, pole: Complex64, radius: f64) -> Result<(), GreenError> {
    let mut min_dist = f64::INFINITY;
    for comp in &contour.components {
        for p in comp {
            min_dist = min_dist.min((p.z() - pole).norm());
        }
    }
    if min_dist < 2.0 * radius {
        return Err(GreenError::PoleTooCloseToContour(pole));
    }
    Ok(())
}

/// Residue by trapezoid quadrature over a small circle; spectrally accurate
/// for meromorphic densities.
pub fn circle_residue(
    density: impl Fn(Complex64) -> Result<Complex64, ContourError>,
    center: Complex64,
    radius: f64,
) -> Result<Complex64, GreenError> {
    const POINTS: usize = 128;
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..POINTS {
        let theta = 2.0 * std::f64::consts::PI * l as f64 / POINTS as f64;
        let offset = Complex64::from_polar(radius, theta);
        acc += density(center + offset)? * offset;
    }
    Ok(acc / POINTS as f64)
}

/// Which computation produced a Green value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreenMethod {
    Quadrature,
    ResidueOracle,
    CalibratedDiagonal,
}

impl GreenMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            GreenMethod::Quadrature => "quadrature",
            GreenMethod::ResidueOracle => "residue-oracle",
            GreenMethod::CalibratedDiagonal => "calibrated-diagonal",
        }
    }
}

#[derive(Clone, Debug)]
pub struct GreenValue {
    pub value: Complex64,
    pub method: GreenMethod,
    /// Contour parameters behind this value.
    pub delta_n: Vec<i64>,
    pub level: f64,
}

/// Green's function values on a patch around the source vertex.
#[derive(Clone, Debug)]
pub struct GreenField {
    pub source: VertexId,
    pub domain: FieldDomain,
    pub lambda: Complex64,
    pub values: BTreeMap<VertexId, GreenValue>,
    /// Diagonal value forced by the delta property at the source.
    pub gamma0: Complex64,
    /// The stated diagonal value, recorded alongside the calibrated one.
    pub stated_diagonal: Complex64,
    pub weight_sum: Complex64,
}

impl GreenField {
    pub fn value(&self, v: VertexId) -> Option<Complex64> {
        self.values.get(&v).map(|g| g.value)
    }

    pub fn as_vertex_field(&self) -> VertexField {
        let mut f = VertexField::new(self.domain);
        for (&v, gv) in &self.values {
            f.values.insert(v, gv.value);
        }
        f
    }

    /// CSV rows `vertex_id, dn_1..dn_d, re, im, method, ratio` where the
    /// ratio column is `|G| / exp(Im p_dn(lambda))`.
    pub fn to_csv(&self, g: &QuadGraph, sd: &SpectralData) -> String {
        let d = g.dimension();
        let mut out = String::from("vertex_id,");
        for j in 1..=d {
            out.push_str(&format!("dn_{j},"));
        }
        out.push_str("re,im,method,ratio\n");
        for (&v, gv) in &self.values {
            out.push_str(&format!("{v},"));
            for &c in &gv.delta_n {
                out.push_str(&format!("{c},"));
            }
            let ratio = growth_ratio(sd, &gv.delta_n, self.lambda, gv.value).unwrap_or(f64::NAN);
            out.push_str(&format!(
                "{:.17e},{:.17e},{},{:.17e}\n",
                gv.value.re,
                gv.value.im,
                gv.method.as_str(),
                ratio
            ));
        }
        out
    }
}

/// All vertices of the source's part within the given 1-norm coordinate
/// distance, with their distances.
fn same_part_patch(g: &QuadGraph, source: VertexId, radius: i64) -> Vec<(VertexId, i64)> {
    let part = g.part(source);
    let n0 = g.coords(source).to_vec();
    let mut out = Vec::new();
    for v in g.vertex_ids() {
        if g.part(v) != part {
            continue;
        }
        let dist: i64 = g
            .coords(v)
            .iter()
            .zip(&n0)
            .map(|(a, b)| (a - b).abs())
            .sum();
        if dist <= radius {
            out.push((v, dist));
        }
    }
    out
}

fn coord_distance(g: &QuadGraph, a: VertexId, n0: &[i64]) -> i64 {
    g.coords(a)
        .iter()
        .zip(n0)
        .map(|(x, y)| (x - y).abs())
        .sum()
}

/// Compute the Green field on the patch `|n(x) - n(xt)|_1 <= radius`:
/// off-diagonal values `H(x, xt, lambda) / k(xt)` and the diagonal value
/// calibrated so that `(L G)(xt) = 1` exactly. The construction is
/// symmetric under swapping parts, so a dual source yields the dual-graph
/// operator's field.
pub fn green_field(
    sd: &SpectralData,
    g: &QuadGraph,
    nu: &WeightFunction,
    xt: VertexId,
    lambda: Complex64,
    radius: i64,
    resolution: usize,
) -> Result<GreenField, GreenError> {
    let k_sum = vertex_weight_sum(g, nu, xt)?;
    if k_sum.norm() < 1e-13 {
        return Err(GreenError::ZeroWeightSum(xt));
    }
    let patch = same_part_patch(g, xt, radius);
    // Vertices strictly inside the radius must be interior so the Laplacian
    // can be formed there.
    for &(v, dist) in &patch {
        if dist < radius && !g.is_interior(v) {
            return Err(GreenError::PatchTooSmall { center: xt, radius });
        }
    }

    let mut cache = ContourCache::new(sd, lambda, resolution);
    let mut values = BTreeMap::new();
    for &(v, _) in &patch {
        if v == xt {
            continue;
        }
        let h = h_function_cached(sd, g, v, xt, &mut cache)?;
        let integrand = green_integrand(sd, g, v, xt);
        let dn = integrand.delta_n().to_vec();
        let level = im_p_combo(
            sd,
            &MomentumVector::from_integer(&dn)?,
            SpherePoint::Finite(lambda),
        );
        values.insert(
            v,
            GreenValue {
                value: h / k_sum,
                method: GreenMethod::Quadrature,
                delta_n: dn,
                level,
            },
        );
    }

    // Diagonal calibration: gamma0 = (sum_nb nu G(nb) - 1) / k makes
    // (L G)(xt) = sum_nb nu (G(nb) - gamma0) = 1 exact.
    let mut neighbor_sum = Complex64::new(0.0, 0.0);
    for &(nb, _) in g.diagonal_neighbors(xt) {
        let w = nu.between(xt, nb).expect("weights exist on all diagonals");
        let gnb = values
            .get(&nb)
            .map(|gv| gv.value)
            .expect("neighbors lie inside the patch");
        neighbor_sum += w * gnb;
    }
    let gamma0 = (neighbor_sum - 1.0) / k_sum;
    values.insert(
        xt,
        GreenValue {
            value: gamma0,
            method: GreenMethod::CalibratedDiagonal,
            delta_n: vec![0; g.dimension()],
            level: f64::NAN,
        },
    );

    Ok(GreenField {
        source: xt,
        domain: match g.part(xt) {
            Part::Primal => FieldDomain::Primal,
            Part::Dual => FieldDomain::Dual,
        },
        lambda,
        values,
        gamma0,
        stated_diagonal: Complex64::new(1.0, 0.0),
        weight_sum: k_sum,
    })
}

/// Delta-property measurements of a Green field: `(L G)(xt)` and the
/// largest off-diagonal `|(L G)(x)|` split by distance class.
#[derive(Clone, Debug)]
pub struct DeltaReport {
    pub at_source: Complex64,
    pub max_neighbor: f64,
    pub max_far: f64,
    pub argmax: Option<VertexId>,
}

/// Laplacian at one vertex over a partial field; `None` when a neighbor
/// value is missing (the vertex sits too close to the patch boundary).
fn patch_laplacian(
    g: &QuadGraph,
    nu: &WeightFunction,
    values: &BTreeMap<VertexId, Complex64>,
    v: VertexId,
) -> Option<Complex64> {
    if !g.is_interior(v) {
        return None;
    }
    let fv = *values.get(&v)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for &(nb, _) in g.diagonal_neighbors(v) {
        let w = nu.between(v, nb)?;
        acc += w * (*values.get(&nb)? - fv);
    }
    Some(acc)
}

pub fn delta_report(
    g: &QuadGraph,
    nu: &WeightFunction,
    field: &GreenField,
    radius: i64,
) -> Result<DeltaReport, GreenError> {
    let values: BTreeMap<VertexId, Complex64> = field
        .values
        .iter()
        .map(|(&v, gv)| (v, gv.value))
        .collect();
    let neighbors: Vec<VertexId> = g
        .diagonal_neighbors(field.source)
        .iter()
        .map(|&(n, _)| n)
        .collect();
    let n0 = g.coords(field.source).to_vec();
    let mut report = DeltaReport {
        at_source: Complex64::new(0.0, 0.0),
        max_neighbor: 0.0,
        max_far: 0.0,
        argmax: None,
    };
    let mut worst = 0.0;
    for &v in values.keys() {
        if coord_distance(g, v, &n0) > radius - 1 {
            continue;
        }
        let Some(lv) = patch_laplacian(g, nu, &values, v) else {
            continue;
        };
        if v == field.source {
            report.at_source = lv;
        } else {
            let mag = lv.norm();
            if neighbors.contains(&v) {
                report.max_neighbor = report.max_neighbor.max(mag);
            } else {
                report.max_far = report.max_far.max(mag);
            }
            if mag > worst {
                worst = mag;
                report.argmax = Some(v);
            }
        }
    }
    Ok(report)
}

/// Rows of the `L H` verification, split by the distance classes the
/// cancellation argument treats differently.
#[derive(Clone, Debug)]
pub struct LhReport {
    pub at_source: f64,
    pub max_at_neighbors: f64,
    pub max_far: f64,
    pub argmax_far: Option<VertexId>,
    /// Largest deviation of any corner integral from its value over the
    /// face's common contour (the corner with lexicographically maximal
    /// absolute coordinate difference).
    pub contour_replacement_max: f64,
    /// Same maximum restricted to sign-uniform faces, those whose nonzero
    /// corner levels `Im p_dn(lambda)` share one sign. Around any source
    /// both signs occur among faces, so the unrestricted maximum carries
    /// residue-sized contributions while this one stays at the quadrature
    /// floor.
    pub contour_replacement_uniform_max: f64,
    pub faces_checked: usize,
    pub sign_uniform_faces: usize,
}

/// Compute `H` on the patch, apply the Laplacian, and measure the
/// common-contour replacement on every face of the patch.
pub fn verify_lh_zero(
    sd: &SpectralData,
    g: &QuadGraph,
    nu: &WeightFunction,
    xt: VertexId,
    lambda: Complex64,
    radius: i64,
    resolution: usize,
) -> Result<LhReport, GreenError> {
    let patch = same_part_patch(g, xt, radius);
    let mut cache = ContourCache::new(sd, lambda, resolution);
    let mut h: BTreeMap<VertexId, Complex64> = BTreeMap::new();
    for &(v, _) in &patch {
        let value = h_function_cached(sd, g, v, xt, &mut cache)?;
        h.insert(v, value);
    }
    let neighbors: Vec<VertexId> = g
        .diagonal_neighbors(xt)
        .iter()
        .map(|&(n, _)| n)
        .collect();
    let n0 = g.coords(xt).to_vec();

    let mut report = LhReport {
        at_source: 0.0,
        max_at_neighbors: 0.0,
        max_far: 0.0,
        argmax_far: None,
        contour_replacement_max: 0.0,
        contour_replacement_uniform_max: 0.0,
        faces_checked: 0,
        sign_uniform_faces: 0,
    };
    for &v in h.keys() {
        if coord_distance(g, v, &n0) > radius - 1 {
            continue;
        }
        let Some(lv) = patch_laplacian(g, nu, &h, v) else {
            continue;
        };
        if v == xt {
            report.at_source = lv.norm();
        } else if neighbors.contains(&v) {
            report.max_at_neighbors = report.max_at_neighbors.max(lv.norm());
        } else if lv.norm() > report.max_far {
            report.max_far = lv.norm();
            report.argmax_far = Some(v);
        }
    }

    // Common-contour replacement per face: integrating each corner density
    // over the contour of the lexicographically maximal corner difference
    // must reproduce the corner's own integral.
    for f in 0..g.face_count() {
        let corners = g.face(f);
        if corners
            .iter()
            .any(|&c| coord_distance(g, c, &n0) > radius)
        {
            continue;
        }
        report.faces_checked += 1;
        let abs_key = |c: VertexId| -> Vec<i64> {
            g.coords(c)
                .iter()
                .zip(&n0)
                .map(|(a, b)| (a - b).abs())
                .collect()
        };
        let top = *corners.iter().max_by_key(|&&c| abs_key(c)).unwrap();
        let top_dn: Vec<i64> = g.coords(top).iter().zip(&n0).map(|(a, b)| a - b).collect();
        if top_dn.iter().all(|&c| c == 0) {
            continue;
        }
        // Sign-uniform face: every nonzero corner level shares one sign.
        let corner_levels: Vec<f64> = corners
            .iter()
            .filter_map(|&c| {
                let dn: Vec<i64> = g.coords(c).iter().zip(&n0).map(|(a, b)| a - b).collect();
                if dn.iter().all(|&d| d == 0) {
                    None
                } else {
                    let k = MomentumVector::from_integer(&dn).ok()?;
                    Some(im_p_combo(sd, &k, SpherePoint::Finite(lambda)))
                }
            })
            .collect();
        let uniform = corner_levels.iter().all(|&c| c > 0.0)
            || corner_levels.iter().all(|&c| c < 0.0);
        if uniform {
            report.sign_uniform_faces += 1;
        }

        let common = cache.contour(&top_dn)?.clone();
        for &c in &corners {
            let integrand = GreenIntegrand::new(sd, g.coords(c), &n0);
            let over_common = contour_integral(&common, |z| integrand.eval(z))?;
            let own = if integrand.delta_n().iter().all(|&d| d == 0) {
                Complex64::new(0.0, 0.0)
            } else {
                let own_contour = cache.contour(integrand.delta_n())?.clone();
                contour_integral(&own_contour, |z| integrand.eval(z))?
            };
            let dev = (over_common - own).norm();
            report.contour_replacement_max = report.contour_replacement_max.max(dev);
            if uniform {
                report.contour_replacement_uniform_max =
                    report.contour_replacement_uniform_max.max(dev);
            }
        }
    }
    Ok(report)
}

fn growth_ratio(
    sd: &SpectralData,
    dn: &[i64],
    lambda: Complex64,
    value: Complex64,
) -> Option<f64> {
    if dn.iter().all(|&c| c == 0) {
        return None;
    }
    let k = MomentumVector::from_integer(dn).ok()?;
    let exponent = im_p_combo(sd, &k, SpherePoint::Finite(lambda));
    Some(value.norm() / exponent.exp())
}

/// One row of the Green growth report.
#[derive(Clone, Debug)]
pub struct GrowthRow {
    pub vertex: VertexId,
    pub distance: i64,
    pub ratio: f64,
}

/// Growth diagnostics: Green ratios `|G| / exp(Im p_dn(lambda))` over the
/// patch, plus the wave-function modulus against the quasimomentum
/// exponential with both exponent signs. On the sphere the modulus equals
/// the exponential with the negative sign exactly; both deviations are
/// reported so the sign question is settled by measurement.
#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    pub max_ratio: f64,
    /// max over samples of | |psi| - exp(+<n, Im p>) | / exp(+<n, Im p>)
    pub psi_dev_plus: f64,
    /// max over samples of | |psi| - exp(-<n, Im p>) | / exp(-<n, Im p>)
    pub psi_dev_minus: f64,
}

pub fn growth_report(
    field: &GreenField,
    sd: &SpectralData,
    psi_samples: &[(Vec<i64>, Complex64)],
) -> GrowthReport {
    let mut rows = Vec::new();
    let mut max_ratio = 0.0f64;
    for (&v, gv) in &field.values {
        if v == field.source {
            continue;
        }
        let Some(ratio) = growth_ratio(sd, &gv.delta_n, field.lambda, gv.value) else {
            continue;
        };
        let distance: i64 = gv.delta_n.iter().map(|c| c.abs()).sum();
        max_ratio = max_ratio.max(ratio);
        rows.push(GrowthRow {
            vertex: v,
            distance,
            ratio,
        });
    }

    let mut psi_dev_plus = 0.0f64;
    let mut psi_dev_minus = 0.0f64;
    for (n, z) in psi_samples {
        let Ok(psi) = wave_function(sd, n, SpherePoint::Finite(*z)) else {
            continue;
        };
        let exponent: f64 = n
            .iter()
            .enumerate()
            .map(|(j, &nj)| nj as f64 * im_quasimomentum(sd, j, SpherePoint::Finite(*z)))
            .sum();
        if !exponent.is_finite() {
            continue;
        }
        let plus = exponent.exp();
        let minus = (-exponent).exp();
        psi_dev_plus = psi_dev_plus.max((psi.norm() - plus).abs() / plus);
        psi_dev_minus = psi_dev_minus.max((psi.norm() - minus).abs() / minus);
    }
    GrowthReport {
        rows,
        max_ratio,
        psi_dev_plus,
        psi_dev_minus,
    }
}

/// JSON summary of a Green-field run.
pub fn green_summary_json(field: &GreenField, delta: &DeltaReport, oracle_max_dev: f64) -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "lambda": [field.lambda.re, field.lambda.im],
        "k_xtilde": [field.weight_sum.re, field.weight_sum.im],
        "gamma0": [field.gamma0.re, field.gamma0.im],
        "stated_diagonal": [field.stated_diagonal.re, field.stated_diagonal.im],
        "lg_at_source": [delta.at_source.re, delta.at_source.im],
        "max_LG_offdiag": delta.max_neighbor.max(delta.max_far),
        "max_LG_neighbor": delta.max_neighbor,
        "max_LG_far": delta.max_far,
        "oracle_max_dev": oracle_max_dev,
    }))
    .unwrap()
}

/// Largest relative deviation between quadrature and residue-oracle values
/// over the off-diagonal patch.
pub fn oracle_deviation(
    sd: &SpectralData,
    g: &QuadGraph,
    field: &GreenField,
    resolution: usize,
) -> Result<f64, GreenError> {
    let mut cache = ContourCache::new(sd, field.lambda, resolution);
    let mut max_dev = 0.0f64;
    for (&v, gv) in &field.values {
        if v == field.source {
            continue;
        }
        let oracle = residue_oracle_cached(sd, g, v, field.source, &mut cache)?;
        let h = gv.value * field.weight_sum;
        let dev = (h - oracle).norm() / (1.0 + oracle.norm());
        max_dev = max_dev.max(dev);
    }
    Ok(max_dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadgraph::build_square_lattice_patch;
    use crate::spectral::{build_weights, dual_wave_function, parity_sign};

    fn setup() -> (QuadGraph, SpectralData, WeightFunction) {
        let g = build_square_lattice_patch(10, 10);
        let sd =
            SpectralData::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]).unwrap();
        let nu = build_weights(&sd, &g).unwrap();
        (g, sd, nu)
    }

    #[test]
    fn integrand_matches_wave_function_product() {
        let (g, sd, _nu) = setup();
        let x = g.vertex_at(&[7, 5]).unwrap();
        let xt = g.vertex_at(&[5, 5]).unwrap();
        let integrand = green_integrand(&sd, &g, x, xt);
        for z in [
            Complex64::new(1.9, 0.4),
            Complex64::new(-0.3, 2.2),
            Complex64::new(0.5, -1.4),
        ] {
            let direct = integrand.eval(z).unwrap();
            let psi_x = wave_function(&sd, g.coords(x), z.into()).unwrap();
            let psi_dual_xt = dual_wave_function(&sd, g.coords(xt), z.into()).unwrap();
            let product = psi_x * psi_dual_xt * (-0.5) / z;
            assert!(
                (direct - product).norm() <= 1e-12 * product.norm().max(1.0),
                "z = {z}"
            );
        }
    }

    #[test]
    fn integrand_residues_at_origin_and_infinity() {
        let (g, sd, _nu) = setup();
        // x = xt: the density reduces to -1/(2z).
        let xt = g.vertex_at(&[5, 5]).unwrap();
        let integrand = green_integrand(&sd, &g, xt, xt);
        let res0 = circle_residue(|z| integrand.eval(z), Complex64::new(0.0, 0.0), 1e-3).unwrap();
        assert!((res0 - Complex64::new(-0.5, 0.0)).norm() < 1e-10, "res0 = {res0}");
        let res_inf =
            circle_residue(|w| integrand.eval_w(w), Complex64::new(0.0, 0.0), 1e-3).unwrap();
        assert!((res_inf - Complex64::new(0.5, 0.0)).norm() < 1e-10, "res_inf = {res_inf}");

        // Parity-odd displacement flips the residue at 0 but not at infinity.
        let y = g.vertex_at(&[6, 5]).unwrap();
        let odd = GreenIntegrand::new(&sd, g.coords(y), g.coords(xt));
        let res0 = circle_residue(|z| odd.eval(z), Complex64::new(0.0, 0.0), 1e-3).unwrap();
        let s = parity_sign(odd.delta_n());
        assert!((res0 - Complex64::new(-0.5 * s, 0.0)).norm() < 1e-10);
        let res_inf = circle_residue(|w| odd.eval_w(w), Complex64::new(0.0, 0.0), 1e-3).unwrap();
        assert!((res_inf - Complex64::new(0.5, 0.0)).norm() < 1e-10);

        // Single-step displacement: only the matching marked point is a pole.
        assert_eq!(odd.marked_poles(), vec![(sd.alpha(0), 1)]);
    }

    #[test]
    fn doubling_residue_radius_is_stable() {
        let (g, sd, _nu) = setup();
        let x = g.vertex_at(&[6, 6]).unwrap();
        let xt = g.vertex_at(&[5, 5]).unwrap();
        let integrand = green_integrand(&sd, &g, x, xt);
        let pole = sd.alpha(0);
        let r1 = circle_residue(|z| integrand.eval(z), pole, 1e-3).unwrap();
        let r2 = circle_residue(|z| integrand.eval(z), pole, 2e-3).unwrap();
        assert!(
            (r1 - r2).norm() < 1e-9,
            "residue radius sensitivity {}",
            (r1 - r2).norm()
        );
    }

    #[test]
    fn h_vanishes_at_coincident_vertices() {
        let (g, sd, _nu) = setup();
        let xt = g.vertex_at(&[5, 5]).unwrap();
        let v = h_function(&sd, &g, xt, xt, Complex64::new(3.0, 0.5), 256).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn single_pole_synthetic_h_value() {
        // Displacement e_1 encloses only alpha_1 for a level below zero; the
        // traced orientation gives winding -1 and residue -1, so the
        // integral is 2 pi i.
        let (g, sd, _nu) = setup();
        let lambda = Complex64::new(3.0, 0.0);
        let x = g.vertex_at(&[6, 5]).unwrap();
        let xt = g.vertex_at(&[5, 5]).unwrap();
        let quad = h_function(&sd, &g, x, xt, lambda, 512).unwrap();
        let oracle = residue_oracle(&sd, &g, x, xt, lambda, 512).unwrap();
        let expect = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        assert!((quad - expect).norm() < 1e-7, "quadrature {quad}");
        assert!((oracle - expect).norm() < 1e-9, "oracle {oracle}");
    }

    #[test]
    fn oracle_matches_quadrature_on_primal_pairs() {
        let (g, sd, _nu) = setup();
        let lambda = Complex64::new(3.0, 0.5);
        let xt = g.vertex_at(&[5, 5]).unwrap();
        let mut cache = ContourCache::new(&sd, lambda, 512);
        for target in [[6i64, 6], [7, 5], [4, 4], [3, 5], [6, 4]] {
            let x = g.vertex_at(&target).unwrap();
            let quad = h_function_cached(&sd, &g, x, xt, &mut cache).unwrap();
            let oracle = residue_oracle_cached(&sd, &g, x, xt, &mut cache).unwrap();
            assert!(
                (quad - oracle).norm() <= 1e-8 * (1.0 + oracle.norm()),
                "target {target:?}: quadrature {quad} vs oracle {oracle}"
            );
        }
    }

    #[test]
    fn green_field_calibration_and_provenance() {
        let (g, sd, nu) = setup();
        let xt = g.vertex_at(&[5, 5]).unwrap();
        let lambda = Complex64::new(3.0, 0.5);
        let field = green_field(&sd, &g, &nu, xt, lambda, 4, 256).unwrap();
        // The diagonal is the calibrated value and carries its own tag.
        let diag = &field.values[&xt];
        assert_eq!(diag.method, GreenMethod::CalibratedDiagonal);
        assert_eq!(diag.value, field.gamma0);
        // Calibration makes (L G)(xt) = 1 exactly up to rounding.
        let delta = delta_report(&g, &nu, &field, 4).unwrap();
        assert!(
            (delta.at_source - Complex64::new(1.0, 0.0)).norm() < 1e-12,
            "LG at source {}",
            delta.at_source
        );
        // Off-diagonal values carry their contour metadata.
        for (&v, gv) in &field.values {
            if v == xt {
                continue;
            }
            assert_eq!(gv.method, GreenMethod::Quadrature);
            assert!(gv.level.is_finite());
            assert!(gv.delta_n.iter().any(|&c| c != 0));
        }
        // Away from the source and its neighbors the delta property holds.
        assert!(delta.max_far <= 1e-6, "far LG residual {}", delta.max_far);
        // CSV export includes header and one row per vertex.
        let csv = field.to_csv(&g, &sd);
        assert_eq!(csv.lines().count(), 1 + field.values.len());
        assert!(csv.starts_with("vertex_id,dn_1,dn_2,re,im,method,ratio"));
        // The JSON summary is well formed and carries the declared keys.
        let summary = green_summary_json(&field, &delta, 0.0);
        let parsed: serde_json::Value = serde_json::from_str(&summary).unwrap();
        for key in ["lambda", "k_xtilde", "gamma0", "max_LG_offdiag", "oracle_max_dev"] {
            assert!(parsed.get(key).is_some(), "summary missing {key}");
        }
    }

    #[test]
    fn boundary_source_is_rejected() {
        let (g, sd, nu) = setup();
        let corner = g.vertex_at(&[0, 0]).unwrap();
        let err = green_field(&sd, &g, &nu, corner, Complex64::new(3.0, 0.5), 4, 128);
        assert!(err.is_err());
    }

    #[test]
    fn contour_replacement_splits_by_level_signs() {
        // Negating a displacement negates its level, so around any source
        // both signs occur among the patch faces: the replacement holds to
        // quadrature accuracy exactly on the sign-uniform faces, while the
        // mixed faces contribute residue-sized deviations.
        let (g, sd, nu) = setup();
        let xt = g.vertex_at(&[5, 5]).unwrap();
        let report = verify_lh_zero(&sd, &g, &nu, xt, Complex64::new(3.0, 0.5), 2, 512).unwrap();
        assert!(report.faces_checked > 0);
        assert!(
            report.sign_uniform_faces > 0 && report.sign_uniform_faces < report.faces_checked,
            "expected both face classes, got {}/{}",
            report.sign_uniform_faces,
            report.faces_checked
        );
        assert!(
            report.contour_replacement_uniform_max <= 1e-8,
            "replacement deviation {:.3e} on a sign-uniform face",
            report.contour_replacement_uniform_max
        );
        assert!(
            report.contour_replacement_max > 1.0,
            "expected a residue-sized deviation on a mixed face, got {:.3e}",
            report.contour_replacement_max
        );
        // The Laplacian rows vanish regardless.
        assert!(report.at_source <= 1e-9);
        assert!(report.max_at_neighbors <= 1e-9);
        assert!(report.max_far <= 1e-9);
    }

    #[test]
    fn h_conjugation_symmetry_under_tau() {
        // |alpha_j| = 1: levels are tau invariant, so |H| is too.
        let g = build_square_lattice_patch(10, 10);
        let sd = SpectralData::new(vec![
            Complex64::from_polar(1.0, 0.45),
            Complex64::from_polar(1.0, 2.03),
        ])
        .unwrap()
        .with_reality_modulus(1.0)
        .unwrap();
        let lambda = Complex64::new(2.0, 0.7);
        let tau_lambda = 1.0 / lambda.conj();
        let x = g.vertex_at(&[6, 6]).unwrap();
        let xt = g.vertex_at(&[5, 5]).unwrap();
        let a = h_function(&sd, &g, x, xt, lambda, 512).unwrap();
        let b = h_function(&sd, &g, x, xt, tau_lambda, 512).unwrap();
        assert!(
            (a.norm() - b.norm()).abs() <= 1e-7 * (1.0 + a.norm()),
            "|H| changed under tau: {} vs {}",
            a.norm(),
            b.norm()
        );
    }
}
