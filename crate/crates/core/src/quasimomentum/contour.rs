//! Level-set contour extraction on the sphere.
//!
//! The level set `{Im p_k = Im p_k(lambda)}` is extracted by
//! marching-squares cell crossing on two charts: the z-chart square of
//! half-width `1.1 * rho` and the `w = 1/z` chart square of half-width
//! `1/(0.9 * rho)`, where `rho = 1.5 * max_j |alpha_j|`. The charts overlap
//! in the annulus `0.9 <= |z|/rho <= 1.1`; every polyline is cut at the
//! seam circle `|z| = rho` and the z-side pieces (`|z| <= rho`) are stitched
//! to the w-side pieces (`|z| > rho`) by matching seam endpoints. Each
//! closed component is oriented so that `Re(dp_k * tangent) > 0`.

use super::{critical_points, dp_combo_value, im_p_combo, ContourError, MomentumVector};
use crate::spectral::SpectralData;
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use std::collections::HashMap;

/// One polyline point, in the coordinates of the chart it was extracted on.
#[derive(Clone, Copy, Debug)]
pub struct ContourPoint {
    pub coord: Complex64,
    /// True when `coord` is a `w = 1/z` chart coordinate.
    pub w_chart: bool,
}

impl ContourPoint {
    pub fn z(&self) -> Complex64 {
        if self.w_chart {
            1.0 / self.coord
        } else {
            self.coord
        }
    }
}

/// An oriented union of closed polylines approximating one level set of
/// `Im p_k`, each component implicitly closed (last point joins the first).
#[derive(Clone, Debug)]
pub struct Contour {
    pub components: Vec<Vec<ContourPoint>>,
    pub k: Vec<f64>,
    pub level: f64,
    /// Seam radius `rho` separating the two charts.
    pub chart_radius: f64,
    /// Grid cells per chart side used for the extraction.
    pub grid_cells: usize,
}

impl Contour {
    /// Grid spacing of the z-chart.
    pub fn cell_size(&self) -> f64 {
        2.0 * 1.1 * self.chart_radius / self.grid_cells as f64
    }

    pub fn total_points(&self) -> usize {
        self.components.iter().map(|c| c.len()).sum()
    }

    /// Reverse the orientation of every component.
    pub fn reversed(&self) -> Contour {
        let mut out = self.clone();
        for comp in &mut out.components {
            comp.reverse();
        }
        out
    }

    /// Export as `{"k": [...], "level": c, "components": [[[re, im], ...]]}`
    /// with points projected to the z-chart.
    pub fn to_json(&self) -> String {
        let components: Vec<Vec<[f64; 2]>> = self
            .components
            .iter()
            .map(|comp| comp.iter().map(|p| [p.z().re, p.z().im]).collect())
            .collect();
        serde_json::to_string_pretty(&serde_json::json!({
            "k": self.k,
            "level": self.level,
            "components": components,
        }))
        .unwrap()
    }

    /// SVG path data (`M ... L ... Z` per component) in z-chart coordinates.
    pub fn to_svg_path(&self) -> String {
        let mut out = String::new();
        for comp in &self.components {
            for (i, p) in comp.iter().enumerate() {
                let z = p.z();
                out.push_str(if i == 0 { "M " } else { "L " });
                out.push_str(&format!("{:.6} {:.6} ", z.re, -z.im));
            }
            out.push_str("Z ");
        }
        out
    }
}

/// Trace the oriented level-set contour of `Im p_k` through `lambda`.
pub fn trace_level_contour(
    sd: &SpectralData,
    k: &MomentumVector,
    lambda: Complex64,
    resolution: usize,
) -> Result<Contour, ContourError> {
    assert!(resolution >= 16, "resolution too small to be meaningful");
    for &a in sd.alphas() {
        for pole in [a, -a] {
            if (lambda - pole).norm() < 1e-9 * a.norm() {
                return Err(ContourError::LambdaNearPole(pole));
            }
        }
    }
    let level = im_p_combo(sd, k, SpherePoint::Finite(lambda));
    if !level.is_finite() {
        return Err(ContourError::NonFiniteLevel);
    }

    let rho = 1.5 * sd.scale();
    let half_z = 1.1 * rho;
    let half_w = 1.0 / (0.9 * rho);

    // Extract raw polylines per chart.
    let f_z = |z: Complex64| im_p_combo(sd, k, SpherePoint::Finite(z));
    let f_w = |w: Complex64| {
        if w.norm_sqr() == 0.0 {
            im_p_combo(sd, k, SpherePoint::Infinity)
        } else {
            im_p_combo(sd, k, SpherePoint::Finite(1.0 / w))
        }
    };
    let raw_z = marching_squares(half_z, resolution, level, f_z);
    let raw_w = marching_squares(half_w, resolution, level, f_w);

    // Cut at the seam and keep each chart's own side.
    let mut closed: Vec<Vec<ContourPoint>> = Vec::new();
    let mut arcs: Vec<Vec<ContourPoint>> = Vec::new();
    split_at_seam(raw_z, rho, false, &mut closed, &mut arcs);
    split_at_seam(raw_w, 1.0 / rho, true, &mut closed, &mut arcs);

    // Stitch arcs across the seam by matching endpoint angles.
    let cell = 2.0 * half_z / resolution as f64;
    let angle_tol = 4.0 * cell / rho;
    let stitched = stitch_arcs(arcs, angle_tol, resolution)?;
    closed.extend(stitched);
    closed.retain(|c| c.len() >= 3);
    if closed.is_empty() {
        return Err(ContourError::ResolutionTooCoarse(resolution));
    }

    let mut contour = Contour {
        components: closed,
        k: k.components().to_vec(),
        level,
        chart_radius: rho,
        grid_cells: resolution,
    };

    orient_by_dp(sd, k, &mut contour)?;
    reject_saddles(sd, k, &contour)?;
    Ok(contour)
}

// ---------------------------------------------------------------------------
// Marching squares
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum EdgeKind {
    Horizontal,
    Vertical,
}

type EdgeKey = (usize, usize, EdgeKind);

/// Raw polyline with an `open` flag: open chains end on the chart square
/// boundary.
struct RawPolyline {
    points: Vec<Complex64>,
    closed: bool,
}

/// Extract the level set of `f` at `level` on the square `[-half, half]^2`
/// with `n x n` cells. Returns closed loops and open chains ending on the
/// square boundary.
fn marching_squares(
    half: f64,
    n: usize,
    level: f64,
    f: impl Fn(Complex64) -> f64,
) -> Vec<RawPolyline> {
    let h = 2.0 * half / n as f64;
    let coord = |i: usize, j: usize| Complex64::new(-half + i as f64 * h, -half + j as f64 * h);

    // Sample the grid once.
    let mut values = vec![0.0f64; (n + 1) * (n + 1)];
    for j in 0..=n {
        for i in 0..=n {
            values[j * (n + 1) + i] = f(coord(i, j));
        }
    }
    // Nudge exact ties off the level.
    let level = {
        let eps = 1e-14 * (1.0 + level.abs());
        if values.iter().any(|&v| v == level) {
            level + eps
        } else {
            level
        }
    };
    let val = |i: usize, j: usize| values[j * (n + 1) + i];

    // Crossing points keyed by the grid edge they sit on.
    let mut point_index: HashMap<EdgeKey, usize> = HashMap::new();
    let mut points: Vec<Complex64> = Vec::new();
    let mut boundary_point: Vec<bool> = Vec::new();
    let mut links: Vec<Vec<usize>> = Vec::new();

    let mut crossing = |key: EdgeKey,
                        points: &mut Vec<Complex64>,
                        boundary_point: &mut Vec<bool>,
                        links: &mut Vec<Vec<usize>>|
     -> usize {
        if let Some(&idx) = point_index.get(&key) {
            return idx;
        }
        let (i, j, kind) = key;
        let (a, b, fa, fb) = match kind {
            EdgeKind::Horizontal => (coord(i, j), coord(i + 1, j), val(i, j), val(i + 1, j)),
            EdgeKind::Vertical => (coord(i, j), coord(i, j + 1), val(i, j), val(i, j + 1)),
        };
        let t = if (fb - fa).abs() < 1e-300 || !fa.is_finite() || !fb.is_finite() {
            0.5
        } else {
            ((level - fa) / (fb - fa)).clamp(0.0, 1.0)
        };
        let p = a + (b - a) * t;
        let on_boundary = match kind {
            EdgeKind::Horizontal => j == 0 || j == n,
            EdgeKind::Vertical => i == 0 || i == n,
        };
        let idx = points.len();
        points.push(p);
        boundary_point.push(on_boundary);
        links.push(Vec::new());
        point_index.insert(key, idx);
        idx
    };

    for j in 0..n {
        for i in 0..n {
            let f00 = val(i, j);
            let f10 = val(i + 1, j);
            let f11 = val(i + 1, j + 1);
            let f01 = val(i, j + 1);
            let mask = (f00 > level) as usize
                | (((f10 > level) as usize) << 1)
                | (((f11 > level) as usize) << 2)
                | (((f01 > level) as usize) << 3);
            if mask == 0 || mask == 15 {
                continue;
            }
            // Cell edges: 0 bottom, 1 right, 2 top, 3 left.
            let edge_key = |e: usize| -> EdgeKey {
                match e {
                    0 => (i, j, EdgeKind::Horizontal),
                    1 => (i + 1, j, EdgeKind::Vertical),
                    2 => (i, j + 1, EdgeKind::Horizontal),
                    _ => (i, j, EdgeKind::Vertical),
                }
            };
            let segments: &[(usize, usize)] = match mask {
                1 => &[(3, 0)],
                2 => &[(0, 1)],
                3 => &[(3, 1)],
                4 => &[(1, 2)],
                6 => &[(0, 2)],
                7 => &[(3, 2)],
                8 => &[(2, 3)],
                9 => &[(0, 2)],
                11 => &[(1, 2)],
                12 => &[(1, 3)],
                13 => &[(0, 1)],
                14 => &[(3, 0)],
                5 | 10 => {
                    let center = 0.25 * (f00 + f10 + f11 + f01);
                    let diag_band = (center > level) == (mask == 5);
                    if diag_band {
                        &[(3, 2), (1, 0)]
                    } else {
                        &[(3, 0), (1, 2)]
                    }
                }
                _ => unreachable!(),
            };
            for &(ea, eb) in segments {
                let pa = crossing(edge_key(ea), &mut points, &mut boundary_point, &mut links);
                let pb = crossing(edge_key(eb), &mut points, &mut boundary_point, &mut links);
                links[pa].push(pb);
                links[pb].push(pa);
            }
        }
    }

    // Walk the segment graph into chains and loops.
    let mut visited = vec![false; points.len()];
    let mut polylines = Vec::new();
    let walk = |start: usize, visited: &mut Vec<bool>| -> Vec<usize> {
        let mut chain = vec![start];
        visited[start] = true;
        let mut current = start;
        loop {
            let next = links[current]
                .iter()
                .copied()
                .find(|&nb| !visited[nb]);
            match next {
                Some(nb) => {
                    visited[nb] = true;
                    chain.push(nb);
                    current = nb;
                }
                None => break,
            }
        }
        chain
    };
    // Open chains first, seeded at degree-1 or boundary points.
    for start in 0..points.len() {
        if visited[start] || !(links[start].len() == 1 || boundary_point[start]) {
            continue;
        }
        let chain = walk(start, &mut visited);
        if chain.len() >= 2 {
            polylines.push(RawPolyline {
                points: chain.iter().map(|&i| points[i]).collect(),
                closed: false,
            });
        }
    }
    // Remaining components are loops.
    for start in 0..points.len() {
        if visited[start] {
            continue;
        }
        let chain = walk(start, &mut visited);
        if chain.len() >= 3 {
            polylines.push(RawPolyline {
                points: chain.iter().map(|&i| points[i]).collect(),
                closed: true,
            });
        }
    }
    polylines
}

// ---------------------------------------------------------------------------
// Seam split and stitching
// ---------------------------------------------------------------------------

/// Cut raw polylines at the seam circle of the given chart radius, keep the
/// inside portions, and classify them as closed components or open arcs with
/// endpoints on the seam.
fn split_at_seam(
    raw: Vec<RawPolyline>,
    keep_radius: f64,
    w_chart: bool,
    closed: &mut Vec<Vec<ContourPoint>>,
    arcs: &mut Vec<Vec<ContourPoint>>,
) {
    let r2 = keep_radius * keep_radius;
    let inside = |p: Complex64| p.norm_sqr() <= r2;
    let mk = |p: Complex64| ContourPoint { coord: p, w_chart };

    for poly in raw {
        let pts = &poly.points;
        if pts.iter().all(|&p| inside(p)) {
            if poly.closed {
                closed.push(pts.iter().map(|&p| mk(p)).collect());
            }
            // An open chain fully inside the keep region would mean the
            // level line terminates inside the chart; chains only end on
            // the chart square boundary, which lies outside the seam, so
            // this does not occur for well-formed extractions.
            continue;
        }
        if pts.iter().all(|&p| !inside(p)) {
            continue;
        }
        // Walk segments, emitting inside runs cut at the seam.
        let seg_count = if poly.closed { pts.len() } else { pts.len() - 1 };
        let mut current: Vec<ContourPoint> = Vec::new();
        // For closed polylines start the walk at an outside point so the
        // first run is not split across the wrap.
        let start = if poly.closed {
            pts.iter().position(|&p| !inside(p)).unwrap()
        } else {
            0
        };
        if !poly.closed && inside(pts[0]) {
            current.push(mk(pts[0]));
        }
        for s in 0..seg_count {
            let a = pts[(start + s) % pts.len()];
            let b = pts[(start + s + 1) % pts.len()];
            match (inside(a), inside(b)) {
                (true, true) => current.push(mk(b)),
                (true, false) => {
                    current.push(mk(seam_crossing(a, b, keep_radius)));
                    if current.len() >= 2 {
                        arcs.push(std::mem::take(&mut current));
                    } else {
                        current.clear();
                    }
                }
                (false, true) => {
                    current.push(mk(seam_crossing(b, a, keep_radius)));
                    current.push(mk(b));
                }
                (false, false) => {}
            }
        }
        if current.len() >= 2 {
            arcs.push(current);
        }
    }
}

/// Point on segment `a -> b` at distance `radius` from the origin, assuming
/// `|a| <= radius < |b|`.
fn seam_crossing(a: Complex64, b: Complex64, radius: f64) -> Complex64 {
    let g = |t: f64| (a + (b - a) * t).norm() - radius;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    a + (b - a) * (0.5 * (lo + hi))
}

/// Join seam-ended arcs from the two charts into closed components by
/// matching endpoint angles on the seam circle.
fn stitch_arcs(
    arcs: Vec<Vec<ContourPoint>>,
    angle_tol: f64,
    resolution: usize,
) -> Result<Vec<Vec<ContourPoint>>, ContourError> {
    if arcs.is_empty() {
        return Ok(Vec::new());
    }
    // Endpoint table: (arc, which end) -> seam angle in z coordinates.
    let angle_of = |p: &ContourPoint| -> f64 { p.z().arg() };
    let ends: Vec<[f64; 2]> = arcs
        .iter()
        .map(|arc| [angle_of(arc.first().unwrap()), angle_of(arc.last().unwrap())])
        .collect();

    let circ_dist = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(2.0 * std::f64::consts::PI);
        d.min(2.0 * std::f64::consts::PI - d)
    };

    let n = arcs.len();
    let mut used = vec![false; n];
    let mut components = Vec::new();
    for first in 0..n {
        if used[first] {
            continue;
        }
        let mut component: Vec<ContourPoint> = Vec::new();
        let mut current = first;
        let mut enter_at_start = true;
        loop {
            used[current] = true;
            let arc = &arcs[current];
            if enter_at_start {
                component.extend(arc.iter().copied());
            } else {
                component.extend(arc.iter().rev().copied());
            }
            let exit_angle = if enter_at_start {
                ends[current][1]
            } else {
                ends[current][0]
            };
            // Find the nearest unused endpoint from the other chart; the
            // continuation beyond the seam always lives on the other side.
            let from_w = arcs[current][0].w_chart;
            let mut best: Option<(f64, usize, bool)> = None;
            for cand in 0..n {
                if arcs[cand][0].w_chart == from_w {
                    continue;
                }
                for (end_idx, &ang) in ends[cand].iter().enumerate() {
                    if used[cand] && !(cand == first && end_idx == 0) {
                        continue;
                    }
                    let d = circ_dist(exit_angle, ang);
                    if best.map_or(true, |(bd, _, _)| d < bd) {
                        best = Some((d, cand, end_idx == 0));
                    }
                }
            }
            let Some((d, next, next_enter_start)) = best else {
                return Err(ContourError::ResolutionTooCoarse(resolution));
            };
            if d > angle_tol {
                return Err(ContourError::ResolutionTooCoarse(resolution));
            }
            if next == first && next_enter_start {
                break; // component closed
            }
            if used[next] {
                return Err(ContourError::ResolutionTooCoarse(resolution));
            }
            current = next;
            enter_at_start = next_enter_start;
        }
        components.push(component);
    }
    Ok(components)
}

// ---------------------------------------------------------------------------
// Orientation and saddle rejection
// ---------------------------------------------------------------------------

/// Tangent pairing of the dp density with one polyline segment, evaluated at
/// the segment midpoint on the segment's own chart.
fn dp_segment_pairing(
    sd: &SpectralData,
    k: &MomentumVector,
    a: &ContourPoint,
    b: &ContourPoint,
) -> Option<f64> {
    let value = if a.w_chart && b.w_chart {
        let mid = 0.5 * (a.coord + b.coord);
        if mid.norm_sqr() == 0.0 {
            return None;
        }
        let dp = dp_combo_value(sd, k, 1.0 / mid).ok()?;
        let dp_w = dp * (-1.0) / (mid * mid);
        (dp_w * (b.coord - a.coord)).re
    } else {
        let (za, zb) = (a.z(), b.z());
        let mid = 0.5 * (za + zb);
        let dp = dp_combo_value(sd, k, mid).ok()?;
        (dp * (zb - za)).re
    };
    value.is_finite().then_some(value)
}

/// Orient every component so that `Re(dp_k tangent) > 0`, and reject levels
/// whose tangent pairing is not of one consistent sign.
fn orient_by_dp(
    sd: &SpectralData,
    k: &MomentumVector,
    contour: &mut Contour,
) -> Result<(), ContourError> {
    for comp in &mut contour.components {
        let n = comp.len();
        let mut pairings: Vec<f64> = Vec::with_capacity(n);
        let mut total = 0.0;
        for i in 0..n {
            if let Some(v) = dp_segment_pairing(sd, k, &comp[i], &comp[(i + 1) % n]) {
                total += v;
                pairings.push(v);
            }
        }
        let sign = if total < 0.0 { -1.0 } else { 1.0 };
        if sign < 0.0 {
            comp.reverse();
        }
        // A handful of tiny-magnitude sign flips is interpolation noise;
        // systematic disagreement means the level runs through a saddle.
        let max_mag = pairings.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let disagree = pairings
            .iter()
            .filter(|&&v| sign * v < 0.0 && v.abs() > 1e-6 * max_mag)
            .count();
        if disagree as f64 > 0.02 * pairings.len().max(1) as f64 + 2.0 {
            let bad = comp[0].z();
            return Err(ContourError::SaddleLevel(bad));
        }
    }
    Ok(())
}

/// Reject the trace when a critical point of `Im p_k` lies within grid
/// tolerance of the extracted curve.
fn reject_saddles(
    sd: &SpectralData,
    k: &MomentumVector,
    contour: &Contour,
) -> Result<(), ContourError> {
    let crits = critical_points(sd, k);
    if crits.is_empty() {
        return Ok(());
    }
    let cell = contour.cell_size();
    let rho = contour.chart_radius;
    for zc in crits {
        for comp in &contour.components {
            for p in comp {
                // w-chart cells map to z lengths scaled by (|z| / rho)^2.
                let z = p.z();
                let local_cell = if p.w_chart {
                    cell * (z.norm_sqr() / (rho * rho)).min(1e12)
                } else {
                    cell
                };
                if (z - zc).norm() < 3.0 * local_cell {
                    return Err(ContourError::SaddleLevel(zc));
                }
            }
        }
    }
    Ok(())
}
