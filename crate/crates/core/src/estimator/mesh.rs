use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{affine_coords, quad_is_twisted, Point2, Quad, Triangle, TOL};
use crate::maps::PlanarMap;

/// The `2t × 2t` partition of `[-1,1]^2` into squares of side `1/t`.
///
/// Vertices are indexed `(a, b) ∈ {0..=2t}²` with coordinates
/// `((a - t)/t, (b - t)/t)`; squares `(i, j) ∈ {0..2t}²` have lower-left
/// vertex `(i, j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SquareGrid {
    t: usize,
}

impl SquareGrid {
    pub fn new(t: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidInput("grid resolution t must be at least 1".into()));
        }
        Ok(SquareGrid { t })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Squares per axis, `2t`.
    pub fn cells_per_axis(&self) -> usize {
        2 * self.t
    }

    pub fn vertices_per_axis(&self) -> usize {
        2 * self.t + 1
    }

    pub fn vertex(&self, a: usize, b: usize) -> Point2 {
        let t = self.t as f64;
        Point2::new((a as f64 - t) / t, (b as f64 - t) / t)
    }

    pub fn vertex_index(&self, a: usize, b: usize) -> usize {
        a * self.vertices_per_axis() + b
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        i * self.cells_per_axis() + j
    }

    /// Vertex ids of square `(i, j)` starting nearest `(1,1)` and going
    /// clockwise.
    pub fn cell_vertices(&self, i: usize, j: usize) -> [(usize, usize); 4] {
        [(i + 1, j + 1), (i + 1, j), (i, j), (i, j + 1)]
    }

    pub fn center(&self, i: usize, j: usize) -> Point2 {
        let v = self.cell_vertices(i, j).map(|(a, b)| self.vertex(a, b));
        (v[0] + v[1] + v[2] + v[3]) * 0.25
    }

    /// Square containing `x` (upper/right square on shared edges).
    pub fn locate(&self, x: Point2) -> (usize, usize) {
        let n = self.cells_per_axis();
        let idx = |v: f64| (((v + 1.0) * self.t as f64).floor().max(0.0) as usize).min(n - 1);
        (idx(x.x1), idx(x.x2))
    }
}

/// Per-square flags.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CellFlags {
    /// The image quadrilateral's boundary crosses itself.
    pub twisted: bool,
    /// The four image fan triangles are not all non-degenerate with one
    /// common orientation.
    pub folded: bool,
}

/// Images of the grid vertices and square centers under `ĝ`, with per-square
/// twist flags.
#[derive(Clone, Debug)]
pub struct QuadMesh {
    grid: SquareGrid,
    vertex_images: Vec<Point2>,
    center_images: Vec<Point2>,
    flags: Vec<CellFlags>,
}

impl QuadMesh {
    /// Evaluates `g` on every vertex and square center.
    pub fn build(g: &dyn PlanarMap, t: usize) -> Result<Self> {
        let grid = SquareGrid::new(t)?;
        let nv = grid.vertices_per_axis();
        let nc = grid.cells_per_axis();
        let vertex_images: Vec<Point2> = (0..nv * nv)
            .into_par_iter()
            .map(|k| g.eval(grid.vertex(k / nv, k % nv)))
            .collect();
        let center_images: Vec<Point2> = (0..nc * nc)
            .into_par_iter()
            .map(|k| g.eval(grid.center(k / nc, k % nc)))
            .collect();
        Self::from_images(t, vertex_images, center_images)
    }

    /// Mesh from precomputed images, indexed as [`SquareGrid::vertex_index`]
    /// and [`SquareGrid::cell_index`].
    pub fn from_images(t: usize, vertex_images: Vec<Point2>, center_images: Vec<Point2>) -> Result<Self> {
        let grid = SquareGrid::new(t)?;
        let nv = grid.vertices_per_axis();
        let nc = grid.cells_per_axis();
        if vertex_images.len() != nv * nv || center_images.len() != nc * nc {
            return Err(Error::InvalidInput(format!(
                "expected {} vertex and {} center images, got {} and {}",
                nv * nv,
                nc * nc,
                vertex_images.len(),
                center_images.len()
            )));
        }
        if vertex_images.iter().chain(&center_images).any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("mesh images must be finite".into()));
        }
        let mut mesh = QuadMesh { grid, vertex_images, center_images, flags: vec![CellFlags::default(); nc * nc] };
        for i in 0..nc {
            for j in 0..nc {
                let twisted = quad_is_twisted(&mesh.quad(i, j));
                let areas: Vec<f64> = (0..4).map(|k| mesh.fan_image(i, j, k).signed_area()).collect();
                let consistent = areas.iter().all(|&a| a > TOL) || areas.iter().all(|&a| a < -TOL);
                mesh.flags[grid.cell_index(i, j)] = CellFlags { twisted, folded: !consistent };
            }
        }
        Ok(mesh)
    }

    pub fn grid(&self) -> &SquareGrid {
        &self.grid
    }

    pub fn t(&self) -> usize {
        self.grid.t
    }

    pub fn vertex_image(&self, a: usize, b: usize) -> Point2 {
        self.vertex_images[self.grid.vertex_index(a, b)]
    }

    pub fn center_image(&self, i: usize, j: usize) -> Point2 {
        self.center_images[self.grid.cell_index(i, j)]
    }

    pub fn flags(&self, i: usize, j: usize) -> CellFlags {
        self.flags[self.grid.cell_index(i, j)]
    }

    pub fn twisted_count(&self) -> usize {
        self.flags.iter().filter(|f| f.twisted).count()
    }

    pub fn folded_count(&self) -> usize {
        self.flags.iter().filter(|f| f.folded).count()
    }

    /// Image quadrilateral of square `(i, j)` in path order.
    pub fn quad(&self, i: usize, j: usize) -> Quad {
        let v = self.grid.cell_vertices(i, j).map(|(a, b)| self.vertex_image(a, b));
        Quad { v }
    }

    /// Fan triangle `k` of square `(i, j)`: vertices `k`, `k+1` and the
    /// center as apex.
    pub fn fan_domain(&self, i: usize, j: usize, k: usize) -> Triangle {
        let v = self.grid.cell_vertices(i, j);
        let (a, b) = v[k];
        let (c, d) = v[(k + 1) % 4];
        Triangle::new(self.grid.vertex(a, b), self.grid.vertex(c, d), self.grid.center(i, j))
    }

    /// Image of [`QuadMesh::fan_domain`] under the vertex and center images.
    pub fn fan_image(&self, i: usize, j: usize, k: usize) -> Triangle {
        let v = self.grid.cell_vertices(i, j);
        let (a, b) = v[k];
        let (c, d) = v[(k + 1) % 4];
        Triangle::new(self.vertex_image(a, b), self.vertex_image(c, d), self.center_image(i, j))
    }

    /// Piecewise-affine interpolation `ĝ†(x)`.
    pub fn g_dagger(&self, x: Point2) -> Result<Point2> {
        if !(x.is_finite() && x.in_square()) {
            return Err(Error::OutsideDomain { x1: x.x1, x2: x.x2 });
        }
        let (i, j) = self.grid.locate(x);
        let ids = self.grid.cell_vertices(i, j);
        // the two nearest vertices, ties broken by vertex id
        let mut order: Vec<(f64, (usize, usize), usize)> = ids
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| ((self.grid.vertex(a, b) - x).norm2_sq(), (a, b), k))
            .collect();
        order.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
        let (ka, kb) = (order[0].2, order[1].2);
        if self.flags(i, j).twisted {
            return Ok(self.vertex_image(ids[ka].0, ids[ka].1));
        }
        // fan triangle whose outer edge joins the two nearest vertices
        let k = if (ka + 1) % 4 == kb { ka } else { kb };
        let dom = self.fan_domain(i, j, k);
        let img = self.fan_image(i, j, k);
        let (a1, a2) = affine_coords(x, &dom)?;
        Ok(if a1 == 1.0 && a2 == 0.0 {
            img.a
        } else if a1 == 0.0 && a2 == 1.0 {
            img.b
        } else if a1 == 0.0 && a2 == 0.0 {
            img.c
        } else {
            img.point_at(a1, a2)
        })
    }

    /// CSV dump of vertex images and square flags.
    pub fn dump_csv(&self, comments: &[String]) -> String {
        let mut s = String::new();
        for c in comments {
            let _ = writeln!(s, "# {c}");
        }
        s.push_str("kind,i,j,x1,x2,g1,g2,twisted,folded\n");
        let nv = self.grid.vertices_per_axis();
        for a in 0..nv {
            for b in 0..nv {
                let x = self.grid.vertex(a, b);
                let g = self.vertex_image(a, b);
                let _ = writeln!(s, "vertex,{a},{b},{:.17e},{:.17e},{:.17e},{:.17e},,", x.x1, x.x2, g.x1, g.x2);
            }
        }
        let nc = self.grid.cells_per_axis();
        for i in 0..nc {
            for j in 0..nc {
                let x = self.grid.center(i, j);
                let g = self.center_image(i, j);
                let f = self.flags(i, j);
                let _ = writeln!(
                    s,
                    "center,{i},{j},{:.17e},{:.17e},{:.17e},{:.17e},{},{}",
                    x.x1, x.x2, g.x1, g.x2, f.twisted as u8, f.folded as u8
                );
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::Identity;

    #[test]
    fn grid_layout() {
        let g = SquareGrid::new(1).unwrap();
        assert_eq!(g.cells_per_axis(), 2);
        assert_eq!(g.vertex(0, 0), Point2::new(-1.0, -1.0));
        assert_eq!(g.vertex(2, 2), Point2::new(1.0, 1.0));
        let v = g.cell_vertices(1, 1).map(|(a, b)| g.vertex(a, b));
        assert_eq!(v, [Point2::new(1.0, 1.0), Point2::new(1.0, 0.0), Point2::new(0.0, 0.0), Point2::new(0.0, 1.0)]);
        assert_eq!(g.locate(Point2::new(1.0, -1.0)), (1, 0));
    }

    #[test]
    fn identity_mesh() {
        let m = QuadMesh::build(&Identity, 3).unwrap();
        assert_eq!(m.twisted_count(), 0);
        assert_eq!(m.folded_count(), 0);
        let area: f64 = (0..6).flat_map(|i| (0..6).map(move |j| (i, j))).map(|(i, j)| m.quad(i, j).shoelace_area()).sum();
        assert!((area - 4.0).abs() < 1e-12);
        for &(a, b) in &[(0.3, -0.2), (1.0, 1.0), (-1.0, 0.5), (0.0, 0.0)] {
            let x = Point2::new(a, b);
            assert!((m.g_dagger(x).unwrap() - x).norm2() < 1e-15);
        }
        assert!(m.g_dagger(Point2::new(1.5, 0.0)).is_err());
    }

    #[test]
    fn swapped_vertex_twists() {
        let g = SquareGrid::new(1).unwrap();
        let mut verts: Vec<Point2> = (0..9).map(|k| g.vertex(k / 3, k % 3)).collect();
        let centers: Vec<Point2> = (0..4).map(|k| g.center(k / 2, k % 2)).collect();
        verts.swap(g.vertex_index(2, 2), g.vertex_index(2, 1));
        let m = QuadMesh::from_images(1, verts, centers).unwrap();
        assert!(m.flags(1, 1).twisted);
        assert!(!m.flags(0, 0).twisted);
    }
}
