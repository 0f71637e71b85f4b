use crate::geom::Point2;

use super::polar::{omega, omega_inv, polar_v, theta_angle, wrap};
use super::PlanarMap;

/// The swirl truth: keeps the angle of `x` and sends the sup-norm radius `r`
/// to `r^{|sin ϑ(x)|}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Swirl;

/// The swirl truth as a map.
pub fn swirl_truth() -> Swirl {
    Swirl
}

impl PlanarMap for Swirl {
    fn eval(&self, x: Point2) -> Point2 {
        let z = omega(x);
        let Ok(th) = theta_angle(z) else {
            return Point2::ZERO;
        };
        let r = z.norm2();
        omega_inv(polar_v(r.powf(th.sin().abs()), th))
    }

    fn inverse(&self, y: Point2) -> Option<Point2> {
        let q = y.norm_inf();
        if q == 0.0 {
            return Some(Point2::ZERO);
        }
        let th = theta_angle(y).ok()?;
        let p = th.sin().abs();
        // on the vertical axis p = 0 and q^(1/p) degenerates to 0 or 1
        let r = q.powf(1.0 / p);
        Some(y * (r / q))
    }

    fn has_inverse(&self) -> bool {
        true
    }
}

/// Rigid angular shift of the square: `x ↦ ω⁻¹(v(‖ω(x)‖, ϑ(x) + φ))`.
/// Moves the corners, so the coherent rotation of maps built from it is
/// non-trivial.
#[derive(Clone, Copy, Debug)]
pub struct AngularShift {
    pub phi: f64,
}

impl AngularShift {
    pub fn new(phi: f64) -> Self {
        AngularShift { phi }
    }

    fn shift(x: Point2, phi: f64) -> Point2 {
        let z = omega(x);
        match theta_angle(z) {
            Ok(th) => omega_inv(polar_v(z.norm2(), wrap(th + phi))),
            Err(_) => Point2::ZERO,
        }
    }
}

impl PlanarMap for AngularShift {
    fn eval(&self, x: Point2) -> Point2 {
        Self::shift(x, self.phi)
    }
    fn inverse(&self, y: Point2) -> Option<Point2> {
        Some(Self::shift(y, -self.phi))
    }
    fn has_inverse(&self) -> bool {
        true
    }
}

/// Smooth edge-preserving warp `f_k(x) = x_k + a sin(π x_k) cos(π x_l / 2)`.
/// Bi-Lipschitz for `a < 1/π`.
#[derive(Clone, Copy, Debug)]
pub struct SmoothWarp {
    pub a: f64,
}

impl Default for SmoothWarp {
    fn default() -> Self {
        SmoothWarp { a: 0.15 }
    }
}

impl SmoothWarp {
    pub fn new(a: f64) -> Self {
        SmoothWarp { a }
    }

    fn bump(&self, x: Point2) -> Point2 {
        use std::f64::consts::{FRAC_PI_2, PI};
        Point2::new(
            self.a * (PI * x.x1).sin() * (FRAC_PI_2 * x.x2).cos(),
            self.a * (PI * x.x2).sin() * (FRAC_PI_2 * x.x1).cos(),
        )
    }
}

impl PlanarMap for SmoothWarp {
    fn eval(&self, x: Point2) -> Point2 {
        x + self.bump(x)
    }

    fn inverse(&self, y: Point2) -> Option<Point2> {
        let mut x = y;
        for _ in 0..500 {
            let nx = y - self.bump(x);
            let done = (nx - x).norm_inf() <= 1e-16;
            x = nx;
            if done {
                break;
            }
        }
        Some(x)
    }

    fn has_inverse(&self) -> bool {
        self.a.abs() * std::f64::consts::PI * 1.5 < 1.0
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        use std::f64::consts::PI;
        Some(1.0 + self.a.abs() * PI * 1.25f64.sqrt() * 2f64.sqrt())
    }
}
