//! Coherent rotation `ρ = ω⁻¹ ∘ R ∘ ω`.
//!
//! `R` keeps the radius and warps the angle with a piecewise-linear `τ` so
//! that the images of the four corners under the map being corrected land
//! back on the corners of the square.

use std::f64::consts::{FRAC_PI_4, TAU};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::maps::{omega, omega_inv, polar_v, theta_angle, wrap, PlanarMap, CORNERS};

/// `θ†` and the corner angles `θ₁..θ₄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationParams {
    pub theta_dagger: f64,
    pub theta: [f64; 4],
    pub valid: bool,
}

impl RotationParams {
    pub fn identity() -> Self {
        RotationParams {
            theta_dagger: 0.0,
            theta: [FRAC_PI_4, 3.0 * FRAC_PI_4, 5.0 * FRAC_PI_4, 7.0 * FRAC_PI_4],
            valid: true,
        }
    }

    /// Parameters from the images of `(1,1), (1,-1), (-1,-1), (-1,1)`.
    pub fn from_corner_images(images: [Point2; 4]) -> Result<Self> {
        let mut vt = [0.0; 4];
        for (slot, &img) in vt.iter_mut().zip(&images) {
            *slot = theta_angle(omega(img))?;
        }
        let theta_dagger = wrap(wrap(TAU - vt[0]) + 0.5 * wrap(vt[0] - vt[3]));
        let theta = vt.map(|v| wrap(v + theta_dagger));
        let valid = 0.0 < theta[0] && theta[0] < theta[1] && theta[1] < theta[2] && theta[2] < theta[3] && theta[3] < TAU;
        Ok(RotationParams { theta_dagger, theta, valid })
    }

    /// Knots `(0,0), (θⱼ, (2j-1)π/4), (2π, 2π)` of `τ`.
    fn knots(&self) -> ([f64; 6], [f64; 6]) {
        let t = self.theta;
        (
            [0.0, t[0], t[1], t[2], t[3], TAU],
            [0.0, FRAC_PI_4, 3.0 * FRAC_PI_4, 5.0 * FRAC_PI_4, 7.0 * FRAC_PI_4, TAU],
        )
    }

    pub fn tau(&self, theta: f64) -> Result<f64> {
        if !self.valid {
            return Err(Error::InvalidRotation);
        }
        let (k, v) = self.knots();
        Ok(interpolate(&k, &v, theta))
    }

    pub fn tau_inv(&self, theta: f64) -> Result<f64> {
        if !self.valid {
            return Err(Error::InvalidRotation);
        }
        let (k, v) = self.knots();
        Ok(interpolate(&v, &k, theta))
    }

    /// Flat `key=value` dump.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "theta_dagger={:.17e}", self.theta_dagger);
        for (j, t) in self.theta.iter().enumerate() {
            let _ = writeln!(s, "theta{}={:.17e}", j + 1, t);
        }
        let _ = writeln!(s, "valid={}", self.valid);
        s
    }
}

fn interpolate(xs: &[f64; 6], ys: &[f64; 6], x: f64) -> f64 {
    let x = x.clamp(0.0, TAU);
    let i = match xs[1..].iter().position(|&k| x < k) {
        Some(i) => i,
        None => return ys[5],
    };
    ys[i] + (x - xs[i]) * (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
}

/// `R(ζ) = v(‖ζ‖, τ(⟦ϑ(ζ) + θ†⟧))`, `R(0) = 0`.
pub fn rotation_r(z: Point2, p: &RotationParams) -> Result<Point2> {
    if !p.valid {
        return Err(Error::InvalidRotation);
    }
    let Ok(a) = theta_angle(z) else {
        return Ok(Point2::ZERO);
    };
    Ok(polar_v(z.norm2(), p.tau(wrap(a + p.theta_dagger))?))
}

/// `R⁻¹(ζ) = v(‖ζ‖, ⟦τ⁻¹(ϑ(ζ)) - θ†⟧)`, `R⁻¹(0) = 0`.
pub fn rotation_r_inv(z: Point2, p: &RotationParams) -> Result<Point2> {
    if !p.valid {
        return Err(Error::InvalidRotation);
    }
    let Ok(a) = theta_angle(z) else {
        return Ok(Point2::ZERO);
    };
    Ok(polar_v(z.norm2(), wrap(p.tau_inv(a)? - p.theta_dagger)))
}

pub fn rho(x: Point2, p: &RotationParams) -> Result<Point2> {
    Ok(omega_inv(rotation_r(omega(x), p)?))
}

pub fn rho_inv(y: Point2, p: &RotationParams) -> Result<Point2> {
    Ok(omega_inv(rotation_r_inv(omega(y), p)?))
}

/// A coherent rotation, or the degenerate fallback whose inverse is
/// identically zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoherentRotation {
    Proper(RotationParams),
    Degenerate(RotationParams),
}

impl CoherentRotation {
    pub fn identity() -> Self {
        CoherentRotation::Proper(RotationParams::identity())
    }

    pub fn from_params(p: RotationParams) -> Self {
        if p.valid {
            CoherentRotation::Proper(p)
        } else {
            CoherentRotation::Degenerate(p)
        }
    }

    /// Exact rotation from a map's corner images.
    pub fn from_map(f: &dyn PlanarMap) -> Result<Self> {
        let p = RotationParams::from_corner_images(CORNERS.map(|c| f.eval(c)))?;
        Ok(Self::from_params(p))
    }

    pub fn params(&self) -> &RotationParams {
        match self {
            CoherentRotation::Proper(p) | CoherentRotation::Degenerate(p) => p,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, CoherentRotation::Degenerate(_))
    }

    /// `ρ(x)`; the degenerate rotation maps everything to 0.
    pub fn forward(&self, x: Point2) -> Point2 {
        match self {
            CoherentRotation::Proper(p) => rho(x, p).expect("valid params"),
            CoherentRotation::Degenerate(_) => Point2::ZERO,
        }
    }

    /// `ρ⁻¹(y)`; identically 0 when degenerate.
    pub fn inverse(&self, y: Point2) -> Point2 {
        match self {
            CoherentRotation::Proper(p) => rho_inv(y, p).expect("valid params"),
            CoherentRotation::Degenerate(_) => Point2::ZERO,
        }
    }

    pub fn dump(&self) -> String {
        format!("degenerate={}\n{}", self.is_degenerate(), self.params().dump())
    }
}

/// Rotation from a pilot's corner predictions; any failure (a zero corner
/// image or broken ordering) yields the degenerate rotation.
pub fn estimate_rotation(pilot: &dyn PlanarMap) -> CoherentRotation {
    let images = CORNERS.map(|c| pilot.eval(c));
    match RotationParams::from_corner_images(images) {
        Ok(p) => CoherentRotation::from_params(p),
        Err(_) => CoherentRotation::Degenerate(RotationParams { theta_dagger: 0.0, theta: [0.0; 4], valid: false }),
    }
}

impl PlanarMap for CoherentRotation {
    fn eval(&self, x: Point2) -> Point2 {
        self.forward(x)
    }
    fn inverse(&self, y: Point2) -> Option<Point2> {
        (!self.is_degenerate()).then(|| CoherentRotation::inverse(self, y))
    }
    fn has_inverse(&self) -> bool {
        !self.is_degenerate()
    }
}
