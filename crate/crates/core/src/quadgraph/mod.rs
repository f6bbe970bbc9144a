//! Quad-graphs: bipartite planar quad-meshes whose vertices carry integer
//! coordinates in `Z^d` and whose faces are unit squares spanned by two
//! coordinate directions.
//!
//! The two bipartition classes carry the primal graph `G` and the dual graph
//! `G*`; both are obtained by joining the two same-part corners of every
//! face along the face diagonal.

mod generators;
mod json;

pub use generators::{build_multigrid_quadgraph, build_square_lattice_patch};

use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

pub type VertexId = usize;
pub type FaceId = usize;
pub type EdgeId = usize;

/// Which bipartition class a vertex belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Primal,
    Dual,
}

impl Part {
    pub fn other(self) -> Part {
        match self {
            Part::Primal => Part::Dual,
            Part::Dual => Part::Primal,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VertexData {
    pub part: Part,
    pub coords: Vec<i64>,
    /// Planar position, advisory metadata for plots only.
    pub position: Option<Complex64>,
}

/// A quad-graph edge, oriented so that `n(v) - n(u) = sign * e_direction`.
#[derive(Clone, Copy, Debug)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    /// 0-based coordinate direction (serialized 1-based).
    pub direction: usize,
    pub sign: i8,
}

#[derive(Error, Debug)]
pub enum GraphError {
    #[error("degenerate offsets: families {family_a}, {family_b} and {family_c} meet within tolerance at ({x}, {y})")]
    DegenerateOffsets {
        family_a: usize,
        family_b: usize,
        family_c: usize,
        x: f64,
        y: f64,
    },
    #[error("malformed face {face}: {reason}")]
    MalformedFace { face: FaceId, reason: String },
    #[error("face index {0} out of range")]
    NoSuchFace(FaceId),
    #[error("invalid construction input: {0}")]
    InvalidInput(String),
    #[error("graph JSON error: {0}")]
    Json(String),
}

/// One violation found by [`QuadGraph::validate`].
#[derive(Clone, Debug)]
pub struct Violation {
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

/// The canonical frame of a face: `p1` is the corner whose coordinates are
/// minimal in both active directions, `p2 = p1 + e_x`, `p3 = p1 + e_y`,
/// `p4 = p1 + e_x + e_y`. The labels are chosen so that walking
/// `p1 -> p2 -> p4 -> p3` follows the stored face orientation.
#[derive(Clone, Copy, Debug)]
pub struct FaceFrame {
    pub p1: VertexId,
    pub p2: VertexId,
    pub p3: VertexId,
    pub p4: VertexId,
    /// 0-based direction of the edge `p1 -> p2`.
    pub dir_x: usize,
    /// 0-based direction of the edge `p1 -> p3`.
    pub dir_y: usize,
}

/// Immutable quad-graph patch. Faces are stored as positively oriented
/// quadruples `(x0, y0, x1, y1)` with `x0, x1` primal and `y0, y1` dual.
#[derive(Clone, Debug)]
pub struct QuadGraph {
    dimension: usize,
    vertices: Vec<VertexData>,
    faces: Vec<[VertexId; 4]>,
    edges: Vec<Edge>,
    /// For each vertex, incident faces (sorted).
    vertex_faces: Vec<Vec<FaceId>>,
    /// For each vertex, same-part neighbors through face diagonals, as
    /// `(neighbor, face)` pairs.
    diagonal_neighbors: Vec<Vec<(VertexId, FaceId)>>,
    /// True when the vertex link closes up: every incident quad-graph edge
    /// is shared by exactly two incident faces.
    interior: Vec<bool>,
}

impl QuadGraph {
    /// Assemble a graph from raw vertex and face data, deriving edges,
    /// incidence structures and interior flags.
    pub fn from_parts(
        dimension: usize,
        vertices: Vec<VertexData>,
        faces: Vec<[VertexId; 4]>,
    ) -> Result<Self, GraphError> {
        let nv = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            for &c in f {
                if c >= nv {
                    return Err(GraphError::MalformedFace {
                        face: fi,
                        reason: format!("corner id {c} out of range"),
                    });
                }
            }
        }

        // Derive the edge set from face boundaries.
        let mut edge_ids: BTreeMap<(VertexId, VertexId), EdgeId> = BTreeMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        for (fi, f) in faces.iter().enumerate() {
            for s in 0..4 {
                let a = f[s];
                let b = f[(s + 1) % 4];
                let key = (a.min(b), a.max(b));
                if edge_ids.contains_key(&key) {
                    continue;
                }
                let (dir, sign) = edge_step(&vertices[a].coords, &vertices[b].coords).ok_or(
                    GraphError::MalformedFace {
                        face: fi,
                        reason: format!("side {a}-{b} is not a unit coordinate step"),
                    },
                )?;
                // Store with sign +1 by putting the lower-coordinate endpoint first.
                let (u, v, direction) = if sign > 0 { (a, b, dir) } else { (b, a, dir) };
                edge_ids.insert(key, edges.len());
                edges.push(Edge {
                    u,
                    v,
                    direction,
                    sign: 1,
                });
            }
        }

        let mut vertex_faces = vec![Vec::new(); nv];
        for (fi, f) in faces.iter().enumerate() {
            for &c in f {
                vertex_faces[c].push(fi);
            }
        }

        let mut diagonal_neighbors = vec![Vec::new(); nv];
        for (fi, f) in faces.iter().enumerate() {
            // Diagonals join opposite corners.
            for (a, b) in [(f[0], f[2]), (f[1], f[3])] {
                diagonal_neighbors[a].push((b, fi));
                diagonal_neighbors[b].push((a, fi));
            }
        }
        for list in &mut diagonal_neighbors {
            list.sort_unstable();
        }

        // Interior test: around an interior vertex the incident faces close
        // into a ring, i.e. every quad-graph edge at the vertex is used by
        // exactly two of its incident faces.
        let mut interior = vec![false; nv];
        for v in 0..nv {
            if vertex_faces[v].is_empty() {
                continue;
            }
            let mut counts: BTreeMap<(VertexId, VertexId), usize> = BTreeMap::new();
            for &fi in &vertex_faces[v] {
                let f = &faces[fi];
                let pos = f.iter().position(|&c| c == v).unwrap();
                let prev = f[(pos + 3) % 4];
                let next = f[(pos + 1) % 4];
                for o in [prev, next] {
                    *counts.entry((v.min(o), v.max(o))).or_insert(0) += 1;
                }
            }
            interior[v] = counts.values().all(|&c| c == 2);
        }

        Ok(QuadGraph {
            dimension,
            vertices,
            faces,
            edges,
            vertex_faces,
            diagonal_neighbors,
            interior,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn vertex(&self, v: VertexId) -> &VertexData {
        &self.vertices[v]
    }

    pub fn part(&self, v: VertexId) -> Part {
        self.vertices[v].part
    }

    pub fn coords(&self, v: VertexId) -> &[i64] {
        &self.vertices[v].coords
    }

    pub fn position(&self, v: VertexId) -> Option<Complex64> {
        self.vertices[v].position
    }

    pub fn is_interior(&self, v: VertexId) -> bool {
        self.interior[v]
    }

    pub fn face(&self, f: FaceId) -> [VertexId; 4] {
        self.faces[f]
    }

    pub fn faces(&self) -> &[[VertexId; 4]] {
        &self.faces
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        0..self.vertices.len()
    }

    pub fn incident_faces(&self, v: VertexId) -> &[FaceId] {
        &self.vertex_faces[v]
    }

    /// Same-part neighbors of `v` (neighbors in `G` for a primal vertex, in
    /// `G*` for a dual one), each with the face whose diagonal joins them.
    pub fn diagonal_neighbors(&self, v: VertexId) -> &[(VertexId, FaceId)] {
        &self.diagonal_neighbors[v]
    }

    /// Look up a vertex by its integer coordinates.
    pub fn vertex_at(&self, coords: &[i64]) -> Option<VertexId> {
        self.vertices.iter().position(|v| v.coords == coords)
    }

    /// Derive the canonical [`FaceFrame`] of a face by the minimal-corner
    /// rule, with labels oriented along the stored quadruple.
    pub fn face_frame(&self, f: FaceId) -> Result<FaceFrame, GraphError> {
        let corners = *self
            .faces
            .get(f)
            .ok_or(GraphError::NoSuchFace(f))?;
        let malformed = |reason: &str| GraphError::MalformedFace {
            face: f,
            reason: reason.to_string(),
        };

        // Active directions: the two coordinates that vary over the corners.
        let mut dirs = Vec::new();
        let base = self.coords(corners[0]);
        for d in 0..self.dimension {
            if corners.iter().any(|&c| self.coords(c)[d] != base[d]) {
                dirs.push(d);
            }
        }
        if dirs.len() != 2 {
            return Err(malformed("face does not span exactly two directions"));
        }
        let (da, db) = (dirs[0], dirs[1]);

        let la = corners.iter().map(|&c| self.coords(c)[da]).min().unwrap();
        let lb = corners.iter().map(|&c| self.coords(c)[db]).min().unwrap();
        let find = |oa: i64, ob: i64| -> Result<VertexId, GraphError> {
            corners
                .iter()
                .copied()
                .find(|&c| self.coords(c)[da] == la + oa && self.coords(c)[db] == lb + ob)
                .ok_or_else(|| GraphError::MalformedFace {
                    face: f,
                    reason: "corners do not span a unit square".to_string(),
                })
        };
        let p1 = find(0, 0)?;
        let ca = find(1, 0)?;
        let cb = find(0, 1)?;
        let p4 = find(1, 1)?;

        // Labels follow stored orientation: the cyclic successor of p1 in the
        // quadruple is p2 = p1 + e_x.
        let pos = corners.iter().position(|&c| c == p1).unwrap();
        let succ = corners[(pos + 1) % 4];
        let (p2, p3, dir_x, dir_y) = if succ == ca {
            (ca, cb, da, db)
        } else if succ == cb {
            (cb, ca, db, da)
        } else {
            return Err(malformed("stored quadruple does not walk the face boundary"));
        };

        Ok(FaceFrame {
            p1,
            p2,
            p3,
            p4,
            dir_x,
            dir_y,
        })
    }

    /// Check every structural invariant and return the list of violations
    /// (empty iff the graph is valid).
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |m: String| out.push(Violation { message: m });

        // Global parity convention: part must equal the parity of the
        // coordinate sum, consistently over the whole graph.
        let mut parity_of_primal: Option<i64> = None;
        for v in self.vertex_ids() {
            let s: i64 = self.coords(v).iter().sum::<i64>().rem_euclid(2);
            let expect = match self.part(v) {
                Part::Primal => s,
                Part::Dual => 1 - s,
            };
            match parity_of_primal {
                None => parity_of_primal = Some(expect),
                Some(p) if p != expect => {
                    push(format!("vertex {v}: part is inconsistent with coordinate parity"));
                }
                _ => {}
            }
        }

        for (ei, e) in self.edges.iter().enumerate() {
            if self.part(e.u) == self.part(e.v) {
                push(format!("edge {ei} ({}-{}) joins two same-part vertices", e.u, e.v));
            }
            let du = self.coords(e.u);
            let dv = self.coords(e.v);
            match edge_step(du, dv) {
                Some((dir, sign)) => {
                    if dir != e.direction || sign != e.sign {
                        push(format!("edge {ei} ({}-{}): stored label disagrees with coordinates", e.u, e.v));
                    }
                }
                None => push(format!("edge {ei} ({}-{}): not a unit coordinate step", e.u, e.v)),
            }
        }

        for (fi, f) in self.faces.iter().enumerate() {
            // Parts must alternate primal, dual, primal, dual.
            if !(self.part(f[0]) == Part::Primal
                && self.part(f[1]) == Part::Dual
                && self.part(f[2]) == Part::Primal
                && self.part(f[3]) == Part::Dual)
            {
                push(format!("face {fi}: corners do not alternate primal/dual starting primal"));
            }
            match self.face_frame(fi) {
                Ok(frame) => {
                    if frame.dir_x == frame.dir_y {
                        push(format!("face {fi}: direction labels coincide"));
                    }
                }
                Err(e) => push(format!("face {fi}: {e}")),
            }
            // Opposite sides carry the same direction.
            for (s, t) in [(0usize, 2usize), (1, 3)] {
                let step_a = edge_step(self.coords(f[s]), self.coords(f[(s + 1) % 4]));
                let step_b = edge_step(self.coords(f[(t + 1) % 4]), self.coords(f[t]));
                match (step_a, step_b) {
                    (Some(a), Some(b)) if a == b => {}
                    _ => push(format!("face {fi}: opposite sides are not parallel unit steps")),
                }
            }
            // Positive orientation, checked only when positions are present.
            let pos: Option<Vec<Complex64>> =
                f.iter().map(|&c| self.position(c)).collect();
            if let Some(p) = pos {
                let mut area = 0.0;
                for s in 0..4 {
                    let a = p[s];
                    let b = p[(s + 1) % 4];
                    area += a.re * b.im - b.re * a.im;
                }
                if area <= 0.0 {
                    push(format!("face {fi}: stored quadruple is not positively oriented"));
                }
            }
        }

        // Planar duality on the patch: around every interior vertex the
        // diagonal neighbors are pairwise distinct and exactly one per
        // incident face.
        for v in self.vertex_ids() {
            if !self.is_interior(v) {
                continue;
            }
            let nbs = self.diagonal_neighbors(v);
            if nbs.len() != self.incident_faces(v).len() {
                push(format!("vertex {v}: diagonal degree disagrees with incident face count"));
            }
            let mut seen: Vec<VertexId> = nbs.iter().map(|&(n, _)| n).collect();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != nbs.len() {
                push(format!("vertex {v}: repeated diagonal neighbor"));
            }
        }

        out
    }
}

/// If `b - a` is exactly a signed unit coordinate step, return
/// `(direction, sign)`.
fn edge_step(a: &[i64], b: &[i64]) -> Option<(usize, i8)> {
    let mut found: Option<(usize, i8)> = None;
    for (d, (&x, &y)) in a.iter().zip(b.iter()).enumerate() {
        match y - x {
            0 => {}
            1 => {
                if found.is_some() {
                    return None;
                }
                found = Some((d, 1));
            }
            -1 => {
                if found.is_some() {
                    return None;
                }
                found = Some((d, -1));
            }
            _ => return None,
        }
    }
    found
}
