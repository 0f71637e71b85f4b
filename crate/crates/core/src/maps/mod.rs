//! Planar maps on `[-1,1]^2`, the bump family used for lower bounds, level
//! sets and grid-based diagnostics.

mod analysis;
mod bump;
mod polar;
mod swirl;

use std::sync::Arc;

pub use analysis::{
    check_invertible_on_grid, check_invertible_on_outputs, level_set, lipschitz_estimate,
    random_pairs, InvertibilityReport, LevelSet,
};
pub use bump::{chi_theta, family_map, pyramid_phi, xi_theta, BumpParams, FamilyMap};
pub use polar::{omega, omega_inv, polar_v, theta_angle, wrap};
pub use swirl::{swirl_truth, AngularShift, SmoothWarp, Swirl};

use crate::geom::Point2;

/// The four corners `x̃₁..x̃₄` of `[-1,1]^2`, clockwise from `(1,1)`.
pub const CORNERS: [Point2; 4] = [
    Point2::new(1.0, 1.0),
    Point2::new(1.0, -1.0),
    Point2::new(-1.0, -1.0),
    Point2::new(-1.0, 1.0),
];

/// A map from `[-1,1]^2` into the plane.
pub trait PlanarMap: Send + Sync {
    fn eval(&self, x: Point2) -> Point2;

    /// Exact inverse, when the map carries one.
    fn inverse(&self, _y: Point2) -> Option<Point2> {
        None
    }

    fn has_inverse(&self) -> bool {
        false
    }

    /// Known upper bound on the forward Lipschitz constant.
    fn lipschitz_bound(&self) -> Option<f64> {
        None
    }

    /// Component `j ∈ {1, 2}` of `eval(x)`.
    fn component(&self, x: Point2, j: usize) -> f64 {
        self.eval(x).coord(j)
    }
}

impl<T: PlanarMap + ?Sized> PlanarMap for &T {
    fn eval(&self, x: Point2) -> Point2 {
        (**self).eval(x)
    }
    fn inverse(&self, y: Point2) -> Option<Point2> {
        (**self).inverse(y)
    }
    fn has_inverse(&self) -> bool {
        (**self).has_inverse()
    }
    fn lipschitz_bound(&self) -> Option<f64> {
        (**self).lipschitz_bound()
    }
}

impl<T: PlanarMap + ?Sized> PlanarMap for Box<T> {
    fn eval(&self, x: Point2) -> Point2 {
        (**self).eval(x)
    }
    fn inverse(&self, y: Point2) -> Option<Point2> {
        (**self).inverse(y)
    }
    fn has_inverse(&self) -> bool {
        (**self).has_inverse()
    }
    fn lipschitz_bound(&self) -> Option<f64> {
        (**self).lipschitz_bound()
    }
}

impl<T: PlanarMap + ?Sized> PlanarMap for Arc<T> {
    fn eval(&self, x: Point2) -> Point2 {
        (**self).eval(x)
    }
    fn inverse(&self, y: Point2) -> Option<Point2> {
        (**self).inverse(y)
    }
    fn has_inverse(&self) -> bool {
        (**self).has_inverse()
    }
    fn lipschitz_bound(&self) -> Option<f64> {
        (**self).lipschitz_bound()
    }
}

type PointFn = Arc<dyn Fn(Point2) -> Point2 + Send + Sync>;

/// A map assembled from closures.
#[derive(Clone)]
pub struct FnMap {
    eval: PointFn,
    inverse: Option<PointFn>,
    lipschitz: Option<f64>,
}

impl FnMap {
    pub fn new(f: impl Fn(Point2) -> Point2 + Send + Sync + 'static) -> Self {
        FnMap { eval: Arc::new(f), inverse: None, lipschitz: None }
    }

    pub fn with_inverse(mut self, g: impl Fn(Point2) -> Point2 + Send + Sync + 'static) -> Self {
        self.inverse = Some(Arc::new(g));
        self
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }
}

impl PlanarMap for FnMap {
    fn eval(&self, x: Point2) -> Point2 {
        (self.eval)(x)
    }
    fn inverse(&self, y: Point2) -> Option<Point2> {
        self.inverse.as_ref().map(|g| g(y))
    }
    fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }
    fn lipschitz_bound(&self) -> Option<f64> {
        self.lipschitz
    }
}

/// The identity on `[-1,1]^2`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl PlanarMap for Identity {
    fn eval(&self, x: Point2) -> Point2 {
        x
    }
    fn inverse(&self, y: Point2) -> Option<Point2> {
        Some(y)
    }
    fn has_inverse(&self) -> bool {
        true
    }
    fn lipschitz_bound(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// `x ↦ A x` for a 2×2 matrix `A` (rows).
#[derive(Clone, Copy, Debug)]
pub struct Linear {
    pub a: [[f64; 2]; 2],
}

impl Linear {
    pub fn new(a: [[f64; 2]; 2]) -> Self {
        Linear { a }
    }

    pub fn scale(s: f64) -> Self {
        Linear { a: [[s, 0.0], [0.0, s]] }
    }

    fn det(&self) -> f64 {
        self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0]
    }
}

impl PlanarMap for Linear {
    fn eval(&self, x: Point2) -> Point2 {
        Point2::new(
            self.a[0][0] * x.x1 + self.a[0][1] * x.x2,
            self.a[1][0] * x.x1 + self.a[1][1] * x.x2,
        )
    }
    fn inverse(&self, y: Point2) -> Option<Point2> {
        let d = self.det();
        if d == 0.0 {
            return None;
        }
        Some(Point2::new(
            (self.a[1][1] * y.x1 - self.a[0][1] * y.x2) / d,
            (-self.a[1][0] * y.x1 + self.a[0][0] * y.x2) / d,
        ))
    }
    fn has_inverse(&self) -> bool {
        self.det() != 0.0
    }
    fn lipschitz_bound(&self) -> Option<f64> {
        let f = self.a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        Some(f)
    }
}

/// `x ↦ outer(inner(x))`.
#[derive(Clone, Debug)]
pub struct Compose<A, B> {
    pub inner: A,
    pub outer: B,
}

impl<A: PlanarMap, B: PlanarMap> Compose<A, B> {
    pub fn new(inner: A, outer: B) -> Self {
        Compose { inner, outer }
    }
}

impl<A: PlanarMap, B: PlanarMap> PlanarMap for Compose<A, B> {
    fn eval(&self, x: Point2) -> Point2 {
        self.outer.eval(self.inner.eval(x))
    }
    fn inverse(&self, y: Point2) -> Option<Point2> {
        self.inner.inverse(self.outer.inverse(y)?)
    }
    fn has_inverse(&self) -> bool {
        self.inner.has_inverse() && self.outer.has_inverse()
    }
    fn lipschitz_bound(&self) -> Option<f64> {
        Some(self.inner.lipschitz_bound()? * self.outer.lipschitz_bound()?)
    }
}
