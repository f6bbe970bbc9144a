//! Quadrature along traced contours and winding numbers of contours around
//! sphere points.
//!
//! Densities are functions of the z coordinate; on far-chart segments the
//! substitution `z = 1/w`, `dz = -dw / w^2` is applied. Each polyline
//! segment is refined by midpoint doubling until two successive estimates
//! agree to `1e-10` relative or twelve refinement levels are reached.

use super::{Contour, ContourError, ContourPoint};
use crate::sphere::SpherePoint;
use num_complex::Complex64;

const SEGMENT_RELATIVE_TOL: f64 = 1e-11;
const MAX_REFINEMENT_LEVELS: usize = 12;

/// Integrate `density(z) dz` along the oriented contour.
pub fn contour_integral(
    contour: &Contour,
    density: impl Fn(Complex64) -> Result<Complex64, ContourError>,
) -> Result<Complex64, ContourError> {
    let mut total = Complex64::new(0.0, 0.0);
    for comp in &contour.components {
        let n = comp.len();
        for i in 0..n {
            let a = &comp[i];
            let b = &comp[(i + 1) % n];
            total += integrate_segment(a, b, &density)?;
        }
    }
    Ok(total)
}

fn integrate_segment(
    a: &ContourPoint,
    b: &ContourPoint,
    density: &impl Fn(Complex64) -> Result<Complex64, ContourError>,
) -> Result<Complex64, ContourError> {
    if a.w_chart && b.w_chart {
        let (wa, wb) = (a.coord, b.coord);
        adaptive_line(wa, wb, &|w: Complex64| {
            if w.norm_sqr() == 0.0 {
                return Err(ContourError::NonFiniteDensity(Complex64::new(
                    f64::INFINITY,
                    0.0,
                )));
            }
            let z = 1.0 / w;
            let f = density(z)?;
            Ok(f * (-1.0) / (w * w))
        })
    } else {
        // Mixed seam segments sit at moderate |z|, so the z chart is safe.
        adaptive_line(a.z(), b.z(), density)
    }
}

/// Adaptive trapezoid refinement with Simpson extrapolation along the
/// straight segment from `a` to `b`.
fn adaptive_line(
    a: Complex64,
    b: Complex64,
    integrand: &impl Fn(Complex64) -> Result<Complex64, ContourError>,
) -> Result<Complex64, ContourError> {
    let delta = b - a;
    if delta.norm_sqr() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let eval = |t: f64| -> Result<Complex64, ContourError> {
        let z = a + delta * t;
        let v = integrand(z)?;
        if !v.is_finite() {
            return Err(ContourError::NonFiniteDensity(z));
        }
        Ok(v)
    };

    let mut n = 1usize;
    let mut trapezoid = 0.5 * (eval(0.0)? + eval(1.0)?);
    let mut previous_simpson: Option<Complex64> = None;
    for _ in 0..=MAX_REFINEMENT_LEVELS {
        // Midpoint refinement: add the new interior samples.
        let mut mid_sum = Complex64::new(0.0, 0.0);
        for i in 0..n {
            mid_sum += eval((i as f64 + 0.5) / n as f64)?;
        }
        let finer = 0.5 * trapezoid + 0.5 * mid_sum / n as f64;
        let simpson = (4.0 * finer - trapezoid) / 3.0;
        if let Some(prev) = previous_simpson {
            let diff = (simpson - prev).norm();
            if diff <= SEGMENT_RELATIVE_TOL * simpson.norm().max(1e-300)
                || diff <= 1e-15 * (1.0 + prev.norm())
            {
                return Ok(simpson * delta);
            }
        }
        previous_simpson = Some(simpson);
        trapezoid = finer;
        n *= 2;
    }
    Ok(previous_simpson.unwrap() * delta)
}

/// Winding number of the contour around one point of the sphere.
///
/// Finite points are measured in the z chart; the point at infinity is
/// measured in the `w = 1/z` chart, i.e. as the winding of the image curve
/// around `w = 0`. Segments whose angular factor passes through the origin
/// make the winding ill-defined and are reported as [`ContourError::PointOnContour`].
pub fn winding_number(contour: &Contour, point: SpherePoint) -> Result<i64, ContourError> {
    let mut total = 0.0f64;
    for comp in &contour.components {
        let n = comp.len();
        for i in 0..n {
            let a = &comp[i];
            let b = &comp[(i + 1) % n];
            total += segment_angle(a, b, point)?;
        }
    }
    let turns = total / (2.0 * std::f64::consts::PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.25 {
        return Err(ContourError::PointOnContour);
    }
    Ok(rounded as i64)
}

/// Winding numbers around a list of points.
pub fn winding_numbers(
    contour: &Contour,
    points: &[SpherePoint],
) -> Result<Vec<i64>, ContourError> {
    points.iter().map(|&p| winding_number(contour, p)).collect()
}

/// Signed angle advance of the segment as seen from `point`.
fn segment_angle(
    a: &ContourPoint,
    b: &ContourPoint,
    point: SpherePoint,
) -> Result<f64, ContourError> {
    match point {
        SpherePoint::Finite(p) => {
            if a.w_chart && b.w_chart {
                // z - p = (1 - p w) / w: the angle splits into two affine
                // factors of w along the straight w segment.
                let (wa, wb) = (a.coord, b.coord);
                let num = affine_angle(1.0 - p * wa, 1.0 - p * wb)?;
                let den = affine_angle(wa, wb)?;
                Ok(num - den)
            } else {
                affine_angle(a.z() - p, b.z() - p)
            }
        }
        SpherePoint::Infinity => {
            if a.w_chart && b.w_chart {
                affine_angle(a.coord, b.coord)
            } else {
                // w = 1/z: arg w = -arg z along the straight z segment.
                Ok(-affine_angle(a.z(), b.z())?)
            }
        }
    }
}

/// Angle advance `arg(fb) - arg(fa)` in `(-pi, pi]` for a value moving on
/// the straight segment from `fa` to `fb`, erroring when the segment passes
/// through (or too close to) the origin.
fn affine_angle(fa: Complex64, fb: Complex64) -> Result<f64, ContourError> {
    let scale = fa.norm().max(fb.norm());
    if scale == 0.0 {
        return Err(ContourError::PointOnContour);
    }
    // Distance from the origin to the segment, relative to its size.
    let d = fb - fa;
    let dist = if d.norm_sqr() == 0.0 {
        fa.norm()
    } else {
        let t = (-(fa.re * d.re + fa.im * d.im) / d.norm_sqr()).clamp(0.0, 1.0);
        (fa + d * t).norm()
    };
    if dist < 1e-12 * scale {
        return Err(ContourError::PointOnContour);
    }
    Ok((fb / fa).arg())
}
