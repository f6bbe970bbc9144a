//! JSON serialization of quad-graphs.
//!
//! Format:
//! ```json
//! {
//!   "dimension": 2,
//!   "vertices": [{"id": 0, "part": "primal", "n": [0, 0], "pos": [0.0, 0.0]}],
//!   "faces": [[0, 1, 2, 3]],
//!   "edges": [{"u": 0, "v": 1, "label": 1, "sign": 1}]
//! }
//! ```
//! Edge labels are 1-based direction indices. Parsing followed by
//! serialization reproduces the document.

use super::{GraphError, Part, QuadGraph, VertexData};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct VertexJson {
    id: usize,
    part: Part,
    n: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pos: Option<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    u: usize,
    v: usize,
    label: usize,
    sign: i8,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    dimension: usize,
    vertices: Vec<VertexJson>,
    faces: Vec<[usize; 4]>,
    edges: Vec<EdgeJson>,
}

impl QuadGraph {
    pub fn to_json(&self) -> String {
        let doc = GraphJson {
            dimension: self.dimension(),
            vertices: self
                .vertex_ids()
                .map(|v| VertexJson {
                    id: v,
                    part: self.part(v),
                    n: self.coords(v).to_vec(),
                    pos: self.position(v).map(|p| [p.re, p.im]),
                })
                .collect(),
            faces: self.faces().to_vec(),
            edges: self
                .edges()
                .iter()
                .map(|e| EdgeJson {
                    u: e.u,
                    v: e.v,
                    label: e.direction + 1,
                    sign: e.sign,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphJson =
            serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
        let n = doc.vertices.len();
        let mut vertices: Vec<Option<VertexData>> = vec![None; n];
        for v in doc.vertices {
            if v.id >= n || vertices[v.id].is_some() {
                return Err(GraphError::Json(format!(
                    "vertex ids must be 0..{} without repeats (got {})",
                    n - 1,
                    v.id
                )));
            }
            if v.n.len() != doc.dimension {
                return Err(GraphError::Json(format!(
                    "vertex {}: coordinate length {} != dimension {}",
                    v.id,
                    v.n.len(),
                    doc.dimension
                )));
            }
            vertices[v.id] = Some(VertexData {
                part: v.part,
                coords: v.n,
                position: v.pos.map(|[re, im]| Complex64::new(re, im)),
            });
        }
        let vertices: Vec<VertexData> = vertices.into_iter().map(Option::unwrap).collect();
        let graph = QuadGraph::from_parts(doc.dimension, vertices, doc.faces)
            .map_err(|e| GraphError::Json(e.to_string()))?;
        // The edge list is derived data; reject documents that disagree.
        for e in doc.edges {
            let found = graph.edges().iter().any(|g| {
                (g.u == e.u && g.v == e.v && g.direction + 1 == e.label && g.sign == e.sign)
                    || (g.u == e.v && g.v == e.u && g.direction + 1 == e.label && g.sign == -e.sign)
            });
            if !found {
                return Err(GraphError::Json(format!(
                    "edge {}-{} (label {}) does not match the face structure",
                    e.u, e.v, e.label
                )));
            }
        }
        Ok(graph)
    }
}

#[cfg(test)]
mod tests {
    use crate::quadgraph::{build_multigrid_quadgraph, build_square_lattice_patch, QuadGraph};
    use num_complex::Complex64;

    #[test]
    fn json_round_trip_is_identity() {
        let g = build_square_lattice_patch(3, 2);
        let text = g.to_json();
        let back = QuadGraph::from_json(&text).unwrap();
        assert_eq!(text, back.to_json());
    }

    #[test]
    fn multigrid_round_trip() {
        let dirs: Vec<Complex64> = (0..5)
            .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / 5.0))
            .collect();
        let g = build_multigrid_quadgraph(&dirs, &[0.17, 0.23, 0.31, 0.13, 0.19], 3.0).unwrap();
        let back = QuadGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(g.vertex_count(), back.vertex_count());
        assert_eq!(g.faces(), back.faces());
        assert_eq!(g.to_json(), back.to_json());
    }

    #[test]
    fn malformed_json_is_rejected() {
        assert!(QuadGraph::from_json("{}").is_err());
        let g = build_square_lattice_patch(1, 1);
        // Coordinate length no longer matches the declared dimension.
        let text = g.to_json().replace("\"dimension\": 2", "\"dimension\": 3");
        assert!(QuadGraph::from_json(&text).is_err());
    }
}
