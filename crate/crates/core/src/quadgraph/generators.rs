//! Patch generators: square-lattice fixtures and de Bruijn multigrid
//! (quasicrystalline) patches.

use super::{FaceId, GraphError, Part, QuadGraph, VertexData, VertexId};
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Degeneracy tolerance for the multigrid triple-intersection test, relative
/// to the unit line spacing.
const TRIPLE_INTERSECTION_TOL: f64 = 1e-9;

fn part_of(coords: &[i64]) -> Part {
    if coords.iter().sum::<i64>().rem_euclid(2) == 0 {
        Part::Primal
    } else {
        Part::Dual
    }
}

/// Rotate a positively oriented 4-cycle so it starts at a primal corner.
fn primal_first(cycle: [(Vec<i64>, Complex64); 4]) -> [(Vec<i64>, Complex64); 4] {
    if part_of(&cycle[0].0) == Part::Primal {
        cycle
    } else {
        let [a, b, c, d] = cycle;
        [b, c, d, a]
    }
}

struct PatchBuilder {
    dimension: usize,
    ids: BTreeMap<Vec<i64>, VertexId>,
    vertices: Vec<VertexData>,
    faces: Vec<[VertexId; 4]>,
}

impl PatchBuilder {
    fn new(dimension: usize) -> Self {
        PatchBuilder {
            dimension,
            ids: BTreeMap::new(),
            vertices: Vec::new(),
            faces: Vec::new(),
        }
    }

    fn vertex(&mut self, coords: Vec<i64>, pos: Complex64) -> VertexId {
        if let Some(&id) = self.ids.get(&coords) {
            return id;
        }
        let id = self.vertices.len();
        self.vertices.push(VertexData {
            part: part_of(&coords),
            coords: coords.clone(),
            position: Some(pos),
        });
        self.ids.insert(coords, id);
        id
    }

    fn face(&mut self, cycle: [(Vec<i64>, Complex64); 4]) -> FaceId {
        let cycle = primal_first(cycle);
        let ids = cycle.map(|(c, p)| self.vertex(c, p));
        self.faces.push(ids);
        self.faces.len() - 1
    }

    fn finish(self) -> Result<QuadGraph, GraphError> {
        QuadGraph::from_parts(self.dimension, self.vertices, self.faces)
    }
}

/// Build a `width x height` patch of the `Z^2` square lattice. The
/// coordinate map is the identity and parts are assigned by coordinate
/// parity.
pub fn build_square_lattice_patch(width: usize, height: usize) -> QuadGraph {
    assert!(width >= 1 && height >= 1, "patch must have at least one cell");
    let mut b = PatchBuilder::new(2);
    for i in 0..width as i64 {
        for j in 0..height as i64 {
            let corner = |x: i64, y: i64| {
                (vec![x, y], Complex64::new(x as f64, y as f64))
            };
            // Counterclockwise walk around the cell.
            b.face([
                corner(i, j),
                corner(i + 1, j),
                corner(i + 1, j + 1),
                corner(i, j + 1),
            ]);
        }
    }
    b.finish().expect("square lattice construction is always well formed")
}

/// Build a quasicrystalline patch by the de Bruijn multigrid construction.
///
/// Family `j` consists of the lines `Re(z * conj(u_j)) = s + offsets[j]`,
/// `s` integer, where `u_j = directions[j] / |directions[j]|`. Every pairwise
/// intersection of lines from two distinct families inside the disc of the
/// given radius becomes a face; the integer coordinates of the four
/// surrounding grid cells are the face corners and the planar position of a
/// vertex `n` is the rhombic embedding `sum_j n_j * directions[j]`.
pub fn build_multigrid_quadgraph(
    directions: &[Complex64],
    offsets: &[f64],
    radius: f64,
) -> Result<QuadGraph, GraphError> {
    let d = directions.len();
    if d < 2 {
        return Err(GraphError::InvalidInput("need at least two line families".into()));
    }
    if offsets.len() != d {
        return Err(GraphError::InvalidInput("offsets length must match directions".into()));
    }
    if !(radius > 0.0) {
        return Err(GraphError::InvalidInput("radius must be positive".into()));
    }
    for (j, a) in directions.iter().enumerate() {
        if a.norm() == 0.0 {
            return Err(GraphError::InvalidInput(format!("direction {j} is zero")));
        }
        for (k, b) in directions.iter().enumerate().skip(j + 1) {
            if (a.conj() * b).im.abs() < 1e-12 * a.norm() * b.norm() {
                return Err(GraphError::InvalidInput(format!(
                    "directions {j} and {k} are parallel over the reals"
                )));
            }
        }
    }

    let units: Vec<Complex64> = directions.iter().map(|a| a / a.norm()).collect();
    let grid_coord = |z: Complex64, m: usize| z.re * units[m].re + z.im * units[m].im;

    // Enumerate intersections of line (j, s) with line (k, t).
    let mut specs: Vec<(usize, usize, i64, i64, Complex64)> = Vec::new();
    for j in 0..d {
        for k in (j + 1)..d {
            let det = units[j].re * units[k].im - units[j].im * units[k].re;
            let s_lo = (-radius - offsets[j]).floor() as i64 - 1;
            let s_hi = (radius - offsets[j]).ceil() as i64 + 1;
            let t_lo = (-radius - offsets[k]).floor() as i64 - 1;
            let t_hi = (radius - offsets[k]).ceil() as i64 + 1;
            for s in s_lo..=s_hi {
                let a = s as f64 + offsets[j];
                for t in t_lo..=t_hi {
                    let bq = t as f64 + offsets[k];
                    // Solve Re(z conj(u_j)) = a, Re(z conj(u_k)) = bq.
                    let x = (a * units[k].im - bq * units[j].im) / det;
                    let y = (bq * units[j].re - a * units[k].re) / det;
                    let z0 = Complex64::new(x, y);
                    if z0.norm() > radius {
                        continue;
                    }
                    for m in 0..d {
                        if m == j || m == k {
                            continue;
                        }
                        let gm = grid_coord(z0, m) - offsets[m];
                        if (gm - gm.round()).abs() < TRIPLE_INTERSECTION_TOL {
                            return Err(GraphError::DegenerateOffsets {
                                family_a: j,
                                family_b: k,
                                family_c: m,
                                x: z0.re,
                                y: z0.im,
                            });
                        }
                    }
                    specs.push((j, k, s, t, z0));
                }
            }
        }
    }
    specs.sort_by(|a, b| (a.0, a.1, a.2, a.3).cmp(&(b.0, b.1, b.2, b.3)));

    let mut b = PatchBuilder::new(d);
    for (j, k, s, t, z0) in specs {
        // Cell index vector away from the two crossing families.
        let mut base = vec![0i64; d];
        for m in 0..d {
            if m != j && m != k {
                base[m] = (grid_coord(z0, m) - offsets[m]).ceil() as i64;
            }
        }
        let corner = |dj: i64, dk: i64| -> (Vec<i64>, Complex64) {
            let mut n = base.clone();
            n[j] = s + dj;
            n[k] = t + dk;
            let pos = n
                .iter()
                .zip(directions)
                .map(|(&ni, a)| a * ni as f64)
                .sum::<Complex64>();
            (n, pos)
        };
        // Counterclockwise order in the rhombic embedding.
        let ccw = (directions[j].conj() * directions[k]).im > 0.0;
        let cycle = if ccw {
            [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)]
        } else {
            [corner(0, 0), corner(0, 1), corner(1, 1), corner(1, 0)]
        };
        b.face(cycle);
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_bigrid_is_a_square_lattice() {
        let g = build_multigrid_quadgraph(
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)],
            &[0.5, 0.5],
            3.0,
        )
        .unwrap();
        assert!(g.validate().is_empty());
        assert!(g.face_count() > 0);
        // Every face spans both directions and the embedding is the identity
        // on cell indices, so faces are unit squares in the plane.
        for f in 0..g.face_count() {
            let fr = g.face_frame(f).unwrap();
            assert_ne!(fr.dir_x, fr.dir_y);
            let p1 = g.position(fr.p1).unwrap();
            let p4 = g.position(fr.p4).unwrap();
            assert!(((p4 - p1).norm() - 2.0_f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn penrose_patch_has_two_labels_per_face() {
        let dirs: Vec<Complex64> = (0..5)
            .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / 5.0))
            .collect();
        let offsets = [0.17, 0.23, 0.31, 0.13, 0.19];
        let g = build_multigrid_quadgraph(&dirs, &offsets, 5.0).unwrap();
        assert!(g.face_count() > 50, "patch too small: {}", g.face_count());
        assert!(g.validate().is_empty());
        for f in 0..g.face_count() {
            let fr = g.face_frame(f).unwrap();
            assert_ne!(fr.dir_x, fr.dir_y);
        }
        // Frame rule: p1 minimizes both active coordinates over the face.
        for f in 0..g.face_count() {
            let fr = g.face_frame(f).unwrap();
            let corners = g.face(f);
            for d in [fr.dir_x, fr.dir_y] {
                let min = corners.iter().map(|&c| g.coords(c)[d]).min().unwrap();
                assert_eq!(g.coords(fr.p1)[d], min);
            }
        }
    }

    #[test]
    fn triple_intersection_is_rejected() {
        // Three families at 120 degrees with zero offsets all pass through
        // the origin.
        let dirs: Vec<Complex64> = (0..3)
            .map(|j| Complex64::from_polar(1.0, std::f64::consts::PI * j as f64 / 3.0))
            .collect();
        let err = build_multigrid_quadgraph(&dirs, &[0.0, 0.0, 0.0], 2.0).unwrap_err();
        assert!(matches!(err, GraphError::DegenerateOffsets { .. }), "{err}");
    }
}
