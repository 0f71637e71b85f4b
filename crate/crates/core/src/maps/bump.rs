use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::Point2;

use super::PlanarMap;

/// Pyramid `Φ(u) = 1 - ‖u‖∞` on `[-1,1]^2`, zero outside.
pub fn pyramid_phi(u: Point2) -> f64 {
    let n = u.norm_inf();
    if n >= 1.0 {
        0.0
    } else {
        1.0 - n
    }
}

/// Parameters of the bump family: an `m × m` binary matrix (row-major, row
/// index along `x₁`) and an amplitude divisor `M > 2m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BumpParams {
    m: usize,
    amp: usize,
    theta: Vec<bool>,
}

impl BumpParams {
    pub fn new(m: usize, amp: usize, theta: Vec<bool>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("bump grid count m must be positive".into()));
        }
        if amp <= 2 * m {
            return Err(Error::InvalidInput(format!(
                "amplitude divisor M = {amp} must exceed 2m = {}",
                2 * m
            )));
        }
        if theta.len() != m * m {
            return Err(Error::InvalidInput(format!(
                "theta has {} entries, expected m^2 = {}",
                theta.len(),
                m * m
            )));
        }
        Ok(BumpParams { m, amp, theta })
    }

    pub fn zeros(m: usize, amp: usize) -> Result<Self> {
        Self::new(m, amp, vec![false; m * m])
    }

    /// The default divisor `M = 2m + 1`.
    pub fn default_amplitude(m: usize) -> usize {
        2 * m + 1
    }

    pub fn random<R: Rng + ?Sized>(m: usize, amp: usize, rng: &mut R) -> Result<Self> {
        let theta = (0..m * m).map(|_| rng.random::<bool>()).collect();
        Self::new(m, amp, theta)
    }

    /// Entries `(j1, j2)` (0-based) set to one.
    pub fn from_active(m: usize, amp: usize, active: &[(usize, usize)]) -> Result<Self> {
        let mut theta = vec![false; m * m];
        for &(j1, j2) in active {
            if j1 >= m || j2 >= m {
                return Err(Error::InvalidInput(format!("cell ({j1},{j2}) out of range")));
            }
            theta[j1 * m + j2] = true;
        }
        Self::new(m, amp, theta)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn amplitude(&self) -> usize {
        self.amp
    }

    pub fn theta(&self) -> &[bool] {
        &self.theta
    }

    pub fn get(&self, j1: usize, j2: usize) -> bool {
        self.theta[j1 * self.m + j2]
    }

    /// Grid point `t_j = -1 + (2j - 1)/m` for 1-based `j`.
    pub fn grid_point(&self, j: usize) -> f64 {
        -1.0 + (2 * j - 1) as f64 / self.m as f64
    }

    pub fn hamming(&self, other: &BumpParams) -> usize {
        self.theta.iter().zip(&other.theta).filter(|(a, b)| a != b).count()
    }

    pub fn same_shape(&self, other: &BumpParams) -> bool {
        self.m == other.m && self.amp == other.amp
    }

    fn cell_index(&self, v: f64) -> usize {
        let j = ((v + 1.0) * self.m as f64 / 2.0).floor();
        (j.max(0.0) as usize).min(self.m - 1)
    }
}

/// `χ_θ(x) = Σ θ_{j₁j₂}/M · Φ(m(x₁ - t_{j₁}), m(x₂ - t_{j₂}))`.
///
/// The rescaled pyramids have disjoint supports, so only the cell containing
/// `x` contributes.
pub fn chi_theta(x: Point2, p: &BumpParams) -> f64 {
    if !x.in_square() {
        return 0.0;
    }
    let j1 = p.cell_index(x.x1);
    let j2 = p.cell_index(x.x2);
    if !p.get(j1, j2) {
        return 0.0;
    }
    let m = p.m as f64;
    let c = Point2::new(p.grid_point(j1 + 1), p.grid_point(j2 + 1));
    pyramid_phi((x - c) * m) / p.amp as f64
}

/// `ξ_θ(x) = x_k + χ_θ(x)` for `k ∈ {1, 2}`.
pub fn xi_theta(k: usize, p: &BumpParams) -> impl Fn(Point2) -> f64 + '_ {
    assert!(k == 1 || k == 2, "component index must be 1 or 2");
    move |x| x.coord(k) + chi_theta(x, p)
}

/// `f(x) = (x₁ + χ_{θ₁}(x), x₂ + χ_{θ₂}(x))`.
#[derive(Clone, Debug)]
pub struct FamilyMap {
    pub p1: BumpParams,
    pub p2: BumpParams,
}

pub fn family_map(p1: BumpParams, p2: BumpParams) -> Result<FamilyMap> {
    if !p1.same_shape(&p2) {
        return Err(Error::InvalidInput("bump parameters must share m and M".into()));
    }
    Ok(FamilyMap { p1, p2 })
}

impl FamilyMap {
    fn chi(&self, x: Point2) -> Point2 {
        Point2::new(chi_theta(x, &self.p1), chi_theta(x, &self.p2))
    }
}

impl PlanarMap for FamilyMap {
    fn eval(&self, x: Point2) -> Point2 {
        x + self.chi(x)
    }

    /// Fixed-point iteration `x ← y - χ(x)`, a sup-norm contraction with
    /// factor `m/M < 1/2`.
    fn inverse(&self, y: Point2) -> Option<Point2> {
        let mut x = y;
        for _ in 0..200 {
            let nx = y - self.chi(x);
            let done = nx == x;
            x = nx;
            if done {
                break;
            }
        }
        Some(x)
    }

    fn has_inverse(&self) -> bool {
        true
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        Some(1.0 + std::f64::consts::SQRT_2 * self.p1.m as f64 / self.p1.amp as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_chi(x: Point2, p: &BumpParams) -> f64 {
        if !x.in_square() {
            return 0.0;
        }
        let m = p.m() as f64;
        let mut s = 0.0;
        for j1 in 1..=p.m() {
            for j2 in 1..=p.m() {
                if p.get(j1 - 1, j2 - 1) {
                    let u = Point2::new(m * (x.x1 - p.grid_point(j1)), m * (x.x2 - p.grid_point(j2)));
                    s += pyramid_phi(u) / p.amplitude() as f64;
                }
            }
        }
        s
    }

    #[test]
    fn phi_examples() {
        assert_eq!(pyramid_phi(Point2::ZERO), 1.0);
        assert_eq!(pyramid_phi(Point2::new(1.0, 1.0)), 0.0);
        assert_eq!(pyramid_phi(Point2::new(2.0, 0.0)), 0.0);
    }

    #[test]
    fn construction_rejects_small_amplitude() {
        assert!(BumpParams::zeros(3, 6).is_err());
        assert!(BumpParams::zeros(3, 7).is_ok());
        assert!(BumpParams::new(3, 7, vec![true; 8]).is_err());
    }

    #[test]
    fn chi_examples() {
        let z = BumpParams::zeros(3, 7).unwrap();
        assert_eq!(chi_theta(Point2::new(0.1, 0.4), &z), 0.0);
        let p = BumpParams::from_active(3, 7, &[(0, 2)]).unwrap();
        let c = Point2::new(p.grid_point(1), p.grid_point(3));
        assert!((chi_theta(c, &p) - 1.0 / 7.0).abs() < 1e-15);
        let all = BumpParams::new(3, 7, vec![true; 9]).unwrap();
        for i in 0..=20 {
            let s = -1.0 + i as f64 * 0.1;
            for b in [Point2::new(s, 1.0), Point2::new(s, -1.0), Point2::new(1.0, s), Point2::new(-1.0, s)] {
                assert!(chi_theta(b, &all).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn chi_matches_full_sum() {
        let p = BumpParams::new(4, 9, (0..16).map(|i| i % 3 != 1).collect()).unwrap();
        for i in 0..=80 {
            for j in 0..=80 {
                let x = Point2::new(-1.0 + i as f64 / 40.0, -1.0 + j as f64 / 40.0);
                assert!((chi_theta(x, &p) - brute_chi(x, &p)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn xi_examples() {
        let p = BumpParams::new(3, 7, vec![true; 9]).unwrap();
        let xi1 = xi_theta(1, &p);
        assert_eq!(xi1(Point2::new(-1.0, 0.3)), -1.0);
        assert_eq!(xi1(Point2::new(1.0, -0.2)), 1.0);
        let z = BumpParams::zeros(3, 7).unwrap();
        assert_eq!(xi_theta(2, &z)(Point2::new(0.1, 0.4)), 0.4);
    }

    #[test]
    fn family_inverse_round_trip() {
        let p1 = BumpParams::new(3, 7, vec![true, false, true, false, true, true, false, false, true]).unwrap();
        let p2 = BumpParams::new(3, 7, vec![false, true, true, true, false, false, true, false, true]).unwrap();
        let f = family_map(p1, p2).unwrap();
        for i in 0..=30 {
            for j in 0..=30 {
                let x = Point2::new(-1.0 + i as f64 / 15.0, -1.0 + j as f64 / 15.0);
                let back = f.inverse(f.eval(x)).unwrap();
                assert!((back - x).norm2() < 1e-12);
            }
        }
    }
}
