//! Square-to-disk transform and polar helpers.
//!
//! Angles are measured clockwise from `e = (0, 1)`, so `polar_v(r, θ) =
//! (r sin θ, r cos θ)`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geom::Point2;

/// `ω(x) = (‖x‖∞ / ‖x‖₂) x`, with `ω(0) = 0`.
pub fn omega(x: Point2) -> Point2 {
    let n2 = x.norm2();
    if n2 == 0.0 {
        return Point2::ZERO;
    }
    x * (x.norm_inf() / n2)
}

/// `ω⁻¹(y) = (‖y‖₂ / ‖y‖∞) y`, with `ω⁻¹(0) = 0`.
pub fn omega_inv(y: Point2) -> Point2 {
    let ninf = y.norm_inf();
    if ninf == 0.0 {
        return Point2::ZERO;
    }
    y * (y.norm2() / ninf)
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap(z: f64) -> f64 {
    let w = z.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// The angle `θ ∈ [0, 2π)` with `(sin θ, cos θ) = z / ‖z‖₂`.
pub fn theta_angle(z: Point2) -> Result<f64> {
    if z.x1 == 0.0 && z.x2 == 0.0 {
        return Err(Error::ZeroAngle);
    }
    Ok(wrap(z.x1.atan2(z.x2)))
}

/// `v(r, θ) = (r sin θ, r cos θ)`.
pub fn polar_v(r: f64, theta: f64) -> Point2 {
    let (s, c) = theta.sin_cos();
    Point2::new(r * s, r * c)
}
