//! The weighted discrete Laplacian on the primal and dual graphs, the
//! discrete Cauchy-Riemann residual on faces, and vertex weight sums.
//!
//! `(L f)(x0) = sum_{x ~ x0} nu(x0, x) (f(x) - f(x0))`, where the sum runs
//! over the same-part neighbors of `x0` through face diagonals. Operator
//! identities are only evaluated at interior vertices; boundary truncation
//! would otherwise produce spurious residuals.

use crate::quadgraph::{FaceId, Part, QuadGraph, VertexId};
use crate::spectral::WeightFunction;
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum OperatorError {
    #[error("field lacks a value at vertex {missing}, needed as a neighbor of {center}")]
    MissingNeighbor { center: VertexId, missing: VertexId },
    #[error("field lacks a value at vertex {0}")]
    MissingVertexValue(VertexId),
    #[error("vertex {0} is on the patch boundary")]
    BoundaryVertex(VertexId),
    #[error("no weight stored for edge {0}-{1}")]
    MissingWeight(VertexId, VertexId),
    #[error("malformed field CSV row: {0}")]
    MalformedCsv(String),
}

/// Where a field lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldDomain {
    Primal,
    Dual,
    /// All vertices of the quad-graph.
    Quad,
}

/// A complex-valued function on a vertex subset.
#[derive(Clone, Debug)]
pub struct VertexField {
    pub domain: FieldDomain,
    pub values: BTreeMap<VertexId, Complex64>,
}

impl VertexField {
    pub fn new(domain: FieldDomain) -> Self {
        VertexField {
            domain,
            values: BTreeMap::new(),
        }
    }

    /// Sample a function over all vertices of the given part (or all
    /// vertices for [`FieldDomain::Quad`]).
    pub fn sample(
        g: &QuadGraph,
        domain: FieldDomain,
        mut f: impl FnMut(VertexId) -> Complex64,
    ) -> Self {
        let mut field = VertexField::new(domain);
        for v in g.vertex_ids() {
            let keep = match domain {
                FieldDomain::Primal => g.part(v) == Part::Primal,
                FieldDomain::Dual => g.part(v) == Part::Dual,
                FieldDomain::Quad => true,
            };
            if keep {
                field.values.insert(v, f(v));
            }
        }
        field
    }

    pub fn get(&self, v: VertexId) -> Option<Complex64> {
        self.values.get(&v).copied()
    }

    /// Write as CSV lines `vertex_id,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex_id,re,im\n");
        for (&v, z) in &self.values {
            out.push_str(&format!("{v},{:.17e},{:.17e}\n", z.re, z.im));
        }
        out
    }

    /// Parse the CSV written by [`VertexField::to_csv`].
    pub fn from_csv(domain: FieldDomain, text: &str) -> Result<Self, OperatorError> {
        let mut field = VertexField::new(domain);
        for line in text.lines().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let bad = || OperatorError::MalformedCsv(line.to_string());
            let v: VertexId = cols.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            let re: f64 = cols.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            let im: f64 = cols.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            field.values.insert(v, Complex64::new(re, im));
        }
        Ok(field)
    }
}

fn part_of_domain(domain: FieldDomain) -> Option<Part> {
    match domain {
        FieldDomain::Primal => Some(Part::Primal),
        FieldDomain::Dual => Some(Part::Dual),
        FieldDomain::Quad => None,
    }
}

/// Apply the weighted Laplacian to `f` on the requested part. The result is
/// defined on the interior vertices of that part which carry a value of `f`;
/// every needed neighbor value must be present.
pub fn laplacian_apply(
    g: &QuadGraph,
    nu: &WeightFunction,
    f: &VertexField,
    part: Part,
) -> Result<VertexField, OperatorError> {
    if let Some(p) = part_of_domain(f.domain) {
        debug_assert_eq!(p, part, "field domain disagrees with requested part");
    }
    let mut out = VertexField::new(match part {
        Part::Primal => FieldDomain::Primal,
        Part::Dual => FieldDomain::Dual,
    });
    for (&v, &fv) in &f.values {
        if g.part(v) != part || !g.is_interior(v) {
            continue;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for &(nb, _face) in g.diagonal_neighbors(v) {
            let w = nu
                .between(v, nb)
                .ok_or(OperatorError::MissingWeight(v, nb))?;
            let fnb = f
                .get(nb)
                .ok_or(OperatorError::MissingNeighbor { center: v, missing: nb })?;
            acc += w * (fnb - fv);
        }
        out.values.insert(v, acc);
    }
    Ok(out)
}

/// Per-face discrete Cauchy-Riemann residual of a field on the quad-graph:
/// `(f(y1) - f(y0)) - i nu(x0, x1) (f(x1) - f(x0))` for the stored face
/// quadruple `(x0, y0, x1, y1)`.
pub fn cauchy_riemann_residual(
    g: &QuadGraph,
    nu: &WeightFunction,
    f: &VertexField,
) -> Result<BTreeMap<FaceId, Complex64>, OperatorError> {
    let mut out = BTreeMap::new();
    for (fi, &[x0, y0, x1, y1]) in g.faces().iter().enumerate() {
        let val = |v: VertexId| f.get(v).ok_or(OperatorError::MissingVertexValue(v));
        let (fx0, fy0, fx1, fy1) = (val(x0)?, val(y0)?, val(x1)?, val(y1)?);
        let w = nu
            .between(x0, x1)
            .ok_or(OperatorError::MissingWeight(x0, x1))?;
        out.insert(fi, (fy1 - fy0) - Complex64::i() * w * (fx1 - fx0));
    }
    Ok(out)
}

/// The vertex weight sum `k(x) = sum_{x1 ~ x} nu(x, x1)` over same-part
/// neighbors, defined for interior vertices.
pub fn vertex_weight_sum(
    g: &QuadGraph,
    nu: &WeightFunction,
    v: VertexId,
) -> Result<Complex64, OperatorError> {
    if !g.is_interior(v) {
        return Err(OperatorError::BoundaryVertex(v));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for &(nb, _) in g.diagonal_neighbors(v) {
        acc += nu
            .between(v, nb)
            .ok_or(OperatorError::MissingWeight(v, nb))?;
    }
    Ok(acc)
}

/// Scalar harmonicity summary: the largest Laplacian residual over interior
/// vertices, normalized by the local scale of the field.
#[derive(Clone, Debug, serde::Serialize)]
pub struct HarmonicityReport {
    pub max_residual: f64,
    pub argmax_vertex: Option<VertexId>,
}

impl HarmonicityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap()
    }
}

/// Apply the Laplacian and report the largest relative residual.
pub fn harmonicity_report(
    g: &QuadGraph,
    nu: &WeightFunction,
    f: &VertexField,
    part: Part,
) -> Result<HarmonicityReport, OperatorError> {
    let lap = laplacian_apply(g, nu, f, part)?;
    let mut max_residual = 0.0;
    let mut argmax_vertex = None;
    for (&v, &lv) in &lap.values {
        // Normalize by the size of the terms entering the sum.
        let mut scale = 0.0f64;
        let fv = f.get(v).unwrap();
        for &(nb, _) in g.diagonal_neighbors(v) {
            let w = nu.between(v, nb).unwrap();
            scale += w.norm() * (f.get(nb).unwrap().norm() + fv.norm());
        }
        let rel = lv.norm() / scale.max(1e-300);
        if rel > max_residual {
            max_residual = rel;
            argmax_vertex = Some(v);
        }
    }
    Ok(HarmonicityReport {
        max_residual,
        argmax_vertex,
    })
}
