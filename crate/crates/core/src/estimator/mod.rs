//! The invertible estimator `f̂ = ρ̂⁻¹ ∘ ĝ†`.
//!
//! A pilot fit is pushed through the estimated coherent rotation and the
//! boundary projection to give `ĝ`, which is sampled on a square grid and
//! interpolated by four affine pieces per square (`ĝ†`). Inversion solves
//! the affine pieces exactly and reports the constant [`FALLBACK`] wherever
//! the preimage is missing or not unique.

mod mesh;

pub use mesh::{CellFlags, QuadMesh, SquareGrid};

use crate::error::{Error, Result};
use crate::geom::{barycentric_in_triangle, Point2, Triangle};
use crate::maps::PlanarMap;
use crate::pilot::knn_fit;
use crate::rng::{par_batches, uniform_square, MC_BATCH};
use crate::rotation::{estimate_rotation, CoherentRotation};
use crate::synth::Dataset;

/// Value reported by [`InvertibleEstimator::invert`] when the preimage is
/// not unique.
pub const FALLBACK: Point2 = Point2::new(2.0, 2.0);

/// Preimages closer than this are the same point.
pub const SAME_POINT_TOL: f64 = 1e-9;

/// Largest power of two `t ≤ n^{1/2} (ln n)^{-(α+β)}`, at least 1.
pub fn grid_resolution(n: usize, alpha_plus_beta: f64) -> usize {
    if n < 2 {
        return 1;
    }
    let nf = n as f64;
    let bound = nf.sqrt() * nf.ln().powf(-alpha_plus_beta);
    let mut t = 1usize;
    while ((2 * t) as f64) <= bound {
        t *= 2;
    }
    t
}

/// Pins `ỹ₁` to `±1` when `x₁ = ±1` and `ỹ₂` to `±1` when `x₂ = ±1`.
pub fn boundary_project(x: Point2, ytilde: Point2) -> Point2 {
    let pin = |xc: f64, yc: f64| if xc == 1.0 || xc == -1.0 { xc } else { yc };
    Point2::new(pin(x.x1, ytilde.x1), pin(x.x2, ytilde.x2))
}

/// `ĝ(x) = 𝔓 ρ̂(pilot(x))`.
#[derive(Clone, Debug)]
pub struct GHat<P> {
    pub pilot: P,
    pub rotation: CoherentRotation,
}

impl<P: PlanarMap> PlanarMap for GHat<P> {
    fn eval(&self, x: Point2) -> Point2 {
        boundary_project(x, self.rotation.forward(self.pilot.eval(x)))
    }
}

/// Fitting options.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    pub k: usize,
    pub alpha_plus_beta: f64,
    /// Fixed grid resolution instead of the sample-size rule.
    pub t: Option<usize>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { k: 10, alpha_plus_beta: 1.0, t: None }
    }
}

impl FitOptions {
    pub fn resolution(&self, n: usize) -> usize {
        self.t.unwrap_or_else(|| grid_resolution(n, self.alpha_plus_beta))
    }
}

/// Bucket grid over `[-1,1]^2` listing fan triangles by image bounding box.
#[derive(Clone, Debug)]
struct TriangleIndex {
    side: usize,
    buckets: Vec<Vec<u32>>,
}

impl TriangleIndex {
    fn bucket(&self, v: f64) -> usize {
        (((v + 1.0) / 2.0 * self.side as f64).floor().max(0.0) as usize).min(self.side - 1)
    }

    fn build(mesh: &QuadMesh) -> Self {
        let nc = mesh.grid().cells_per_axis();
        let side = (2 * nc).max(4);
        let mut idx = TriangleIndex { side, buckets: vec![Vec::new(); side * side] };
        for i in 0..nc {
            for j in 0..nc {
                for k in 0..4 {
                    let t = mesh.fan_image(i, j, k);
                    let (lo1, hi1) = (t.a.x1.min(t.b.x1).min(t.c.x1), t.a.x1.max(t.b.x1).max(t.c.x1));
                    let (lo2, hi2) = (t.a.x2.min(t.b.x2).min(t.c.x2), t.a.x2.max(t.b.x2).max(t.c.x2));
                    let id = (mesh.grid().cell_index(i, j) * 4 + k) as u32;
                    for b1 in idx.bucket(lo1 - 1e-9)..=idx.bucket(hi1 + 1e-9) {
                        for b2 in idx.bucket(lo2 - 1e-9)..=idx.bucket(hi2 + 1e-9) {
                            idx.buckets[b1 * side + b2].push(id);
                        }
                    }
                }
            }
        }
        idx
    }

    fn candidates(&self, z: Point2) -> &[u32] {
        &self.buckets[self.bucket(z.x1) * self.side + self.bucket(z.x2)]
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Mesh { mesh: QuadMesh, index: TriangleIndex },
    /// Degenerate rotation: `f̂ ≡ 0`.
    Zero,
}

/// Monte Carlo area estimate with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AreaEstimate {
    pub area: f64,
    pub std_error: f64,
    pub samples: usize,
    pub hits: usize,
}

/// `f̂ = ρ̂⁻¹ ∘ ĝ†` with exact piecewise-affine inversion.
#[derive(Clone, Debug)]
pub struct InvertibleEstimator {
    rotation: CoherentRotation,
    kind: Kind,
}

impl InvertibleEstimator {
    /// Estimator from a rotation and a prebuilt mesh of `ĝ`.
    pub fn from_parts(rotation: CoherentRotation, mesh: QuadMesh) -> Self {
        if rotation.is_degenerate() {
            return InvertibleEstimator { rotation, kind: Kind::Zero };
        }
        let index = TriangleIndex::build(&mesh);
        InvertibleEstimator { rotation, kind: Kind::Mesh { mesh, index } }
    }

    /// The constant-zero estimator used when the rotation cannot be built.
    pub fn zero(rotation: CoherentRotation) -> Self {
        InvertibleEstimator { rotation, kind: Kind::Zero }
    }

    /// Rotation estimated from the pilot's corners, then `ĝ` meshed at `t`.
    pub fn from_pilot(pilot: &dyn PlanarMap, t: usize) -> Result<Self> {
        let rotation = estimate_rotation(pilot);
        Self::from_pilot_with_rotation(pilot, rotation, t)
    }

    pub fn from_pilot_with_rotation(pilot: &dyn PlanarMap, rotation: CoherentRotation, t: usize) -> Result<Self> {
        if rotation.is_degenerate() {
            return Ok(Self::zero(rotation));
        }
        let g = GHat { pilot, rotation };
        Ok(Self::from_parts(rotation, QuadMesh::build(&g, t)?))
    }

    /// k-NN pilot, estimated rotation, mesh.
    pub fn fit(d: &Dataset, opts: &FitOptions) -> Result<Self> {
        let pilot = knn_fit(d, opts.k)?;
        Self::from_pilot(&pilot, opts.resolution(d.n()))
    }

    pub fn rotation(&self) -> &CoherentRotation {
        &self.rotation
    }

    pub fn mesh(&self) -> Option<&QuadMesh> {
        match &self.kind {
            Kind::Mesh { mesh, .. } => Some(mesh),
            Kind::Zero => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero)
    }

    fn check_domain(x: Point2) -> Result<()> {
        if x.is_finite() && x.in_square() {
            Ok(())
        } else {
            Err(Error::OutsideDomain { x1: x.x1, x2: x.x2 })
        }
    }

    /// `ĝ†(x)`; zero for the degenerate estimator.
    pub fn g_dagger(&self, x: Point2) -> Result<Point2> {
        Self::check_domain(x)?;
        match &self.kind {
            Kind::Mesh { mesh, .. } => mesh.g_dagger(x),
            Kind::Zero => Ok(Point2::ZERO),
        }
    }

    /// `f̂(x) = ρ̂⁻¹(ĝ†(x))`.
    pub fn evaluate(&self, x: Point2) -> Result<Point2> {
        match &self.kind {
            Kind::Mesh { mesh, .. } => {
                Self::check_domain(x)?;
                Ok(self.rotation.inverse(mesh.g_dagger(x)?))
            }
            Kind::Zero => {
                Self::check_domain(x)?;
                Ok(Point2::ZERO)
            }
        }
    }

    /// All preimages of `y` under `f̂` found in non-twisted squares, or
    /// `None` when some twisted or degenerate piece covers `ρ̂(y)`.
    pub fn preimages(&self, y: Point2) -> Result<Option<Vec<Point2>>> {
        Self::check_domain(y)?;
        let (mesh, index) = match &self.kind {
            Kind::Mesh { mesh, index } => (mesh, index),
            Kind::Zero => return Ok(None),
        };
        let z = self.rotation.forward(y);
        let nc = mesh.grid().cells_per_axis();
        let mut found: Vec<Point2> = Vec::new();
        for &id in index.candidates(z) {
            let (cell, k) = (id as usize / 4, id as usize % 4);
            let (i, j) = (cell / nc, cell % nc);
            let img = mesh.fan_image(i, j, k);
            if mesh.flags(i, j).twisted || img.is_degenerate() {
                if img.contains(z) {
                    return Ok(None);
                }
                continue;
            }
            if let Some((a1, a2)) = barycentric_in_triangle(z, &img)? {
                let dom: Triangle = mesh.fan_domain(i, j, k);
                let x = dom.point_at(a1, a2);
                if !found.iter().any(|p| p.dist(x) <= SAME_POINT_TOL) {
                    found.push(x);
                }
            }
        }
        Ok(Some(found))
    }

    /// The unique preimage of `y`, or [`FALLBACK`].
    pub fn invert(&self, y: Point2) -> Result<Point2> {
        Ok(match self.preimages(y)? {
            Some(p) if p.len() == 1 => p[0],
            _ => FALLBACK,
        })
    }

    /// Monte Carlo estimate of the area of `{y ∈ [-1,1]^2 : invert(y) = c}`.
    pub fn non_invertible_measure(&self, samples: usize, seed: u64) -> AreaEstimate {
        let hits: usize = par_batches(samples, MC_BATCH, seed, |rng, size| {
            (0..size)
                .filter(|_| {
                    let y = uniform_square(rng);
                    self.invert(y).map(|x| x == FALLBACK).unwrap_or(true)
                })
                .count()
        })
        .into_iter()
        .sum();
        let p = if samples == 0 { 0.0 } else { hits as f64 / samples as f64 };
        let se = if samples == 0 { 0.0 } else { (p * (1.0 - p) / samples as f64).sqrt() };
        AreaEstimate { area: 4.0 * p, std_error: 4.0 * se, samples, hits }
    }
}

impl PlanarMap for InvertibleEstimator {
    fn eval(&self, x: Point2) -> Point2 {
        let x = Point2::new(x.x1.clamp(-1.0, 1.0), x.x2.clamp(-1.0, 1.0));
        self.evaluate(x).expect("clamped input lies in the domain")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::Identity;

    #[test]
    fn resolution_rule() {
        assert_eq!(grid_resolution(20, 1.0), 1);
        assert_eq!(grid_resolution(10, 1.0), 1);
        let ts: Vec<usize> = [512, 1024, 2048, 4096, 8192, 16384].iter().map(|&n| grid_resolution(n, 1.0)).collect();
        assert_eq!(ts, vec![2, 4, 4, 4, 8, 8]);
        let mut last = 1;
        for n in (2..200_000).step_by(997) {
            let t = grid_resolution(n, 0.5);
            assert!(t.is_power_of_two() && t >= last);
            last = t;
        }
    }

    #[test]
    fn projection_examples() {
        assert_eq!(boundary_project(Point2::new(1.0, 0.3), Point2::new(0.9, 0.2)), Point2::new(1.0, 0.2));
        assert_eq!(boundary_project(Point2::new(-1.0, 1.0), Point2::new(0.5, 0.5)), Point2::new(-1.0, 1.0));
        assert_eq!(boundary_project(Point2::new(0.2, 0.3), Point2::new(0.9, 0.2)), Point2::new(0.9, 0.2));
    }

    #[test]
    fn identity_pipeline() {
        let e = InvertibleEstimator::from_pilot(&Identity, 4).unwrap();
        for &(a, b) in &[(0.31, -0.72), (1.0, 1.0), (-1.0, 0.25), (0.0, 0.0), (0.125, 0.5)] {
            let x = Point2::new(a, b);
            assert!((e.evaluate(x).unwrap() - x).norm2() < 1e-9);
            assert!((e.invert(x).unwrap() - x).norm2() < 1e-9);
        }
        assert!(e.invert(Point2::new(1.2, 0.0)).is_err());
    }

    #[test]
    fn degenerate_pilot_gives_zero() {
        let pilot = crate::maps::FnMap::new(|_| Point2::new(0.1, 0.1));
        let e = InvertibleEstimator::from_pilot(&pilot, 2).unwrap();
        assert!(e.is_zero());
        assert_eq!(e.evaluate(Point2::new(0.4, -0.3)).unwrap(), Point2::ZERO);
        assert_eq!(e.invert(Point2::new(0.4, -0.3)).unwrap(), FALLBACK);
    }
}
