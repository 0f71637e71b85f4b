//! Planar primitives: points, orientation, segment intersection, barycentric
//! coordinates, point location, polygon area and Hausdorff distance.
//!
//! All predicates use one absolute tolerance, [`TOL`], which is adequate for
//! coordinates of order one.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Orientation and degeneracy tolerance.
pub const TOL: f64 = 1e-12;

/// A point (or vector) in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub const ZERO: Point2 = Point2 { x1: 0.0, x2: 0.0 };

    pub const fn new(x1: f64, x2: f64) -> Self {
        Point2 { x1, x2 }
    }

    pub fn norm2(self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn norm2_sq(self) -> f64 {
        self.x1 * self.x1 + self.x2 * self.x2
    }

    pub fn norm_inf(self) -> f64 {
        self.x1.abs().max(self.x2.abs())
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x1 * o.x1 + self.x2 * o.x2
    }

    /// z-component of the 3d cross product.
    pub fn cross(self, o: Point2) -> f64 {
        self.x1 * o.x2 - self.x2 * o.x1
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm2()
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    /// Membership in the closed square `[-1,1]^2`.
    pub fn in_square(self) -> bool {
        self.x1.abs() <= 1.0 && self.x2.abs() <= 1.0
    }

    /// Coordinate `j` in `{1, 2}`.
    pub fn coord(self, j: usize) -> f64 {
        match j {
            1 => self.x1,
            2 => self.x2,
            _ => panic!("component index must be 1 or 2, got {j}"),
        }
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x1 + o.x1, self.x2 + o.x2)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x1 - o.x1, self.x2 - o.x2)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x1 * s, self.x2 * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x1, -self.x2)
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x1, x2): (f64, f64)) -> Self {
        Point2::new(x1, x2)
    }
}

/// Signed area of the parallelogram spanned by `b - a` and `c - a`.
pub fn cross3(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

/// Sign of `(b-a) x (c-a)`: `+1` counterclockwise, `-1` clockwise, `0` collinear.
pub fn orient(a: Point2, b: Point2, c: Point2) -> i8 {
    let v = cross3(a, b, c);
    if v > TOL {
        1
    } else if v < -TOL {
        -1
    } else {
        0
    }
}

fn on_segment(p: Point2, q: Point2, r: Point2) -> bool {
    // r collinear with p-q; test bounding box
    r.x1 >= p.x1.min(q.x1) - TOL
        && r.x1 <= p.x1.max(q.x1) + TOL
        && r.x2 >= p.x2.min(q.x2) - TOL
        && r.x2 <= p.x2.max(q.x2) + TOL
}

/// Whether the closed segments `p1p2` and `q1q2` share a point.
pub fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_segment(q1, q2, p1))
        || (d2 == 0 && on_segment(q1, q2, p2))
        || (d3 == 0 && on_segment(p1, p2, q1))
        || (d4 == 0 && on_segment(p1, p2, q2))
}

/// Whether the segments cross at a single point interior to both.
pub fn segments_cross_properly(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    d1 * d2 < 0 && d3 * d4 < 0
}

/// A triangle; for barycentric purposes `c` is the apex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triangle {
    pub a: Point2,
    pub b: Point2,
    pub c: Point2,
}

impl Triangle {
    pub fn new(a: Point2, b: Point2, c: Point2) -> Self {
        Triangle { a, b, c }
    }

    pub fn signed_area(&self) -> f64 {
        0.5 * cross3(self.a, self.b, self.c)
    }

    pub fn is_degenerate(&self) -> bool {
        self.signed_area().abs() <= TOL
    }

    /// Closed containment test; degenerate triangles contain the points of
    /// their hull segments.
    pub fn contains(&self, p: Point2) -> bool {
        let s = cross3(self.a, self.b, self.c);
        if s.abs() <= TOL {
            return segments_intersect(self.a, self.b, p, p)
                || segments_intersect(self.b, self.c, p, p)
                || segments_intersect(self.c, self.a, p, p);
        }
        let sg = s.signum();
        let e1 = cross3(self.a, self.b, p) * sg;
        let e2 = cross3(self.b, self.c, p) * sg;
        let e3 = cross3(self.c, self.a, p) * sg;
        e1 >= -TOL && e2 >= -TOL && e3 >= -TOL
    }

    /// Point with coordinates `(a1, a2)` relative to apex `c`.
    pub fn point_at(&self, a1: f64, a2: f64) -> Point2 {
        self.c + (self.a - self.c) * a1 + (self.b - self.c) * a2
    }
}

/// Unconstrained coordinates `(a1, a2)` with `p = s + a1 (x' - s) + a2 (x'' - s)`,
/// where `x' = t.a`, `x'' = t.b` and `s = t.c`.
pub fn affine_coords(p: Point2, t: &Triangle) -> Result<(f64, f64)> {
    let s = t.c;
    let u = t.a - s;
    let v = t.b - s;
    let det = u.cross(v);
    if det.abs() <= TOL {
        return Err(Error::Degenerate("triangle has zero area".into()));
    }
    let w = p - s;
    Ok((w.cross(v) / det, u.cross(w) / det))
}

/// As [`affine_coords`], but `None` when `p` is outside the closed triangle.
pub fn barycentric_in_triangle(p: Point2, t: &Triangle) -> Result<Option<(f64, f64)>> {
    let (a1, a2) = affine_coords(p, t)?;
    let eps = 1e-12;
    if a1 < -eps || a2 < -eps || a1 + a2 > 1.0 + eps {
        return Ok(None);
    }
    Ok(Some((a1.max(0.0), a2.max(0.0))))
}

/// A quadrilateral whose vertices follow a boundary path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quad {
    pub v: [Point2; 4],
}

impl Quad {
    pub fn new(v1: Point2, v2: Point2, v3: Point2, v4: Point2) -> Self {
        Quad { v: [v1, v2, v3, v4] }
    }

    /// Some vertex repeats.
    pub fn is_degenerate(&self) -> bool {
        for i in 0..4 {
            for j in i + 1..4 {
                if self.v[i].dist(self.v[j]) <= TOL {
                    return true;
                }
            }
        }
        false
    }

    pub fn shoelace_area(&self) -> f64 {
        polygon_area(&self.v).expect("four vertices")
    }

    /// Two triangles covering the quad, split along whichever diagonal lies
    /// inside it (`v1-v3` unless that diagonal is exterior).
    pub fn split(&self) -> [Triangle; 2] {
        let [a, b, c, d] = self.v;
        let s_b = orient(a, c, b);
        let s_d = orient(a, c, d);
        if s_b * s_d <= 0 {
            [Triangle::new(a, b, c), Triangle::new(a, c, d)]
        } else {
            [Triangle::new(b, c, d), Triangle::new(b, d, a)]
        }
    }
}

/// Whether the boundary path of `q` crosses itself.
pub fn quad_is_twisted(q: &Quad) -> bool {
    if q.is_degenerate() {
        return false;
    }
    let [a, b, c, d] = q.v;
    segments_cross_properly(a, b, c, d) || segments_cross_properly(b, c, d, a)
}

/// Closed containment in a non-twisted quadrilateral.
pub fn point_in_quad(p: Point2, q: &Quad) -> Result<bool> {
    if quad_is_twisted(q) {
        return Err(Error::Twisted);
    }
    let [t1, t2] = q.split();
    Ok(t1.contains(p) || t2.contains(p))
}

/// Absolute shoelace area of a polygon.
pub fn polygon_area(vertices: &[Point2]) -> Result<f64> {
    if vertices.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "polygon needs at least 3 vertices, got {}",
            vertices.len()
        )));
    }
    let n = vertices.len();
    let s: f64 = (0..n).map(|i| vertices[i].cross(vertices[(i + 1) % n])).sum();
    Ok(s.abs() / 2.0)
}

/// `max_{a in A} min_{b in B} |a - b|`.
pub fn directed_hausdorff(a: &[Point2], b: &[Point2]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("Hausdorff distance of an empty set".into()));
    }
    let mut worst = 0.0f64;
    for &p in a {
        let mut best = f64::INFINITY;
        for &q in b {
            let d = (p - q).norm2_sq();
            if d < best {
                best = d;
                if best <= worst {
                    break;
                }
            }
        }
        worst = worst.max(best);
    }
    Ok(worst.sqrt())
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Point2], b: &[Point2]) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x1: f64, x2: f64) -> Point2 {
        Point2::new(x1, x2)
    }

    #[test]
    fn orient_cases() {
        assert_eq!(orient(p(0., 0.), p(1., 0.), p(0., 1.)), 1);
        assert_eq!(orient(p(0., 0.), p(1., 0.), p(2., 0.)), 0);
        assert_eq!(orient(p(0., 0.), p(0., 1.), p(1., 0.)), -1);
    }

    #[test]
    fn segment_cases() {
        assert!(segments_intersect(p(0., 0.), p(1., 1.), p(0., 1.), p(1., 0.)));
        assert!(!segments_intersect(p(0., 0.), p(1., 0.), p(0., 1.), p(1., 1.)));
        assert!(segments_intersect(p(0., 0.), p(1., 0.), p(1., 0.), p(2., 0.)));
        assert!(!segments_cross_properly(p(0., 0.), p(1., 0.), p(1., 0.), p(2., 0.)));
    }

    #[test]
    fn twist_cases() {
        let sq = Quad::new(p(1., 1.), p(1., 0.), p(0., 0.), p(0., 1.));
        assert!(!quad_is_twisted(&sq));
        let bow = Quad::new(p(0., 0.), p(1., 0.), p(0., 1.), p(1., 1.));
        assert!(quad_is_twisted(&bow));
        // exhaustive oracle: any pair of opposite edges intersecting
        assert!(segments_intersect(p(1., 0.), p(0., 1.), p(1., 1.), p(0., 0.)));
        let rep = Quad::new(p(0., 0.), p(0., 0.), p(1., 1.), p(0., 1.));
        assert!(rep.is_degenerate());
        assert!(!quad_is_twisted(&rep));
    }

    #[test]
    fn barycentric_cases() {
        let t = Triangle::new(p(1., 0.), p(0., 1.), p(0., 0.));
        assert_eq!(barycentric_in_triangle(p(0.25, 0.25), &t).unwrap(), Some((0.25, 0.25)));
        assert_eq!(barycentric_in_triangle(p(0., 0.), &t).unwrap(), Some((0., 0.)));
        assert_eq!(barycentric_in_triangle(p(1., 0.), &t).unwrap(), Some((1., 0.)));
        assert_eq!(barycentric_in_triangle(p(1., 1.), &t).unwrap(), None);
        let flat = Triangle::new(p(1., 0.), p(2., 0.), p(0., 0.));
        assert!(barycentric_in_triangle(p(0.5, 0.), &flat).is_err());
    }

    #[test]
    fn quad_containment() {
        let sq = Quad::new(p(1., 1.), p(1., 0.), p(0., 0.), p(0., 1.));
        assert!(point_in_quad(p(0.5, 0.5), &sq).unwrap());
        assert!(!point_in_quad(p(5., 5.), &sq).unwrap());
        assert!(point_in_quad(p(1., 0.3), &sq).unwrap());
        let bow = Quad::new(p(0., 0.), p(1., 0.), p(0., 1.), p(1., 1.));
        assert!(point_in_quad(p(0.5, 0.5), &bow).is_err());
    }

    #[test]
    fn nonconvex_quad_uses_interior_diagonal() {
        // dart with reflex vertex at v1
        let q = Quad::new(p(0., 0.3), p(1., 1.), p(0., -1.), p(-1., 1.));
        assert!(!quad_is_twisted(&q));
        assert!(!point_in_quad(p(0., 0.8), &q).unwrap());
        assert!(point_in_quad(p(0., 0.), &q).unwrap());
        // arrowhead with reflex vertex at v2: the v1-v3 diagonal is exterior
        let r = Quad::new(p(1., 1.), p(0.3, 0.), p(1., -1.), p(-1., 0.));
        assert!(!point_in_quad(p(0.8, 0.), &r).unwrap());
        assert!(point_in_quad(p(0., 0.), &r).unwrap());
        for q in [q, r] {
            let [a, b] = q.split();
            let s = a.signed_area().abs() + b.signed_area().abs();
            assert!((s - q.shoelace_area()).abs() < 1e-12);
        }
    }

    #[test]
    fn area_cases() {
        let sq = [p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.)];
        assert_eq!(polygon_area(&sq).unwrap(), 1.0);
        let big = [p(1., 1.), p(1., -1.), p(-1., -1.), p(-1., 1.)];
        assert_eq!(polygon_area(&big).unwrap(), 4.0);
        assert_eq!(polygon_area(&[p(0., 0.), p(1., 1.), p(2., 2.)]).unwrap(), 0.0);
        assert!(polygon_area(&[p(0., 0.), p(1., 1.)]).is_err());
    }

    #[test]
    fn hausdorff_cases() {
        assert_eq!(hausdorff(&[p(0., 0.)], &[p(3., 4.)]).unwrap(), 5.0);
        let a = [p(0., 0.), p(1., 0.)];
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff(&a, &[p(0., 0.)]).unwrap(), 1.0);
        assert!(hausdorff(&[], &a).is_err());
    }
}
