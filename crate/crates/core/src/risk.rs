//! Risk functionals: forward L² risk, inverse risk with `ψ(z) = z⁴`,
//! sup-norm error and the level-set Hausdorff diagnostic.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::estimator::{InvertibleEstimator, FALLBACK};
use crate::geom::{hausdorff, Point2};
use crate::maps::{level_set, PlanarMap};
use crate::pilot::SawtoothEstimator;
use crate::rng::{par_batches, substream_seed, MC_BATCH};
use crate::synth::CovariateLaw;

/// A map with a pointwise inverse that reports [`FALLBACK`] wherever the
/// preimage is missing or not unique.
pub trait UniqueInverse: PlanarMap {
    fn unique_inverse(&self, y: Point2) -> Point2;
}

impl UniqueInverse for InvertibleEstimator {
    fn unique_inverse(&self, y: Point2) -> Point2 {
        self.invert(y).unwrap_or(FALLBACK)
    }
}

impl UniqueInverse for SawtoothEstimator {
    fn unique_inverse(&self, y: Point2) -> Point2 {
        match self.preimages_x2(y.x2).as_slice() {
            [x2] => Point2::new(y.x1, *x2),
            _ => FALLBACK,
        }
    }
}

/// Adapter giving any map with an exact inverse the [`UniqueInverse`]
/// interface.
#[derive(Clone, Debug)]
pub struct ExactInverse<M>(pub M);

impl<M: PlanarMap> PlanarMap for ExactInverse<M> {
    fn eval(&self, x: Point2) -> Point2 {
        self.0.eval(x)
    }
    fn inverse(&self, y: Point2) -> Option<Point2> {
        self.0.inverse(y)
    }
    fn has_inverse(&self) -> bool {
        self.0.has_inverse()
    }
}

impl<M: PlanarMap> UniqueInverse for ExactInverse<M> {
    fn unique_inverse(&self, y: Point2) -> Point2 {
        self.0.inverse(y).unwrap_or(FALLBACK)
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, Default)]
struct Stats {
    sum: f64,
    sumsq: f64,
    count: usize,
    flagged: usize,
}

impl Stats {
    fn push(&mut self, v: f64) {
        self.sum += v;
        self.sumsq += v * v;
        self.count += 1;
    }

    fn merge(parts: Vec<Result<Stats>>) -> Result<Stats> {
        let mut out = Stats::default();
        for p in parts {
            let p = p?;
            out.sum += p.sum;
            out.sumsq += p.sumsq;
            out.count += p.count;
            out.flagged += p.flagged;
        }
        Ok(out)
    }

    fn estimate(&self) -> McEstimate {
        let n = self.count.max(1) as f64;
        let mean = self.sum / n;
        let var = (self.sumsq / n - mean * mean).max(0.0);
        let se = if self.count > 1 { (var / (n - 1.0)).sqrt() } else { 0.0 };
        McEstimate { mean, std_error: se, samples: self.count }
    }
}

fn check_samples(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("Monte Carlo sample count must be positive".into()));
    }
    Ok(())
}

/// `E ‖f̂(X) - f*(X)‖²` for `X ~ law`.
pub fn forward_l2_risk(
    est: &dyn PlanarMap,
    truth: &dyn PlanarMap,
    law: &CovariateLaw,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_samples(samples)?;
    law.validate()?;
    let parts = par_batches(samples, MC_BATCH, seed, |rng, size| {
        let mut s = Stats::default();
        for _ in 0..size {
            let x = law.sample(rng)?;
            s.push((est.eval(x) - truth.eval(x)).norm2_sq());
        }
        Ok(s)
    });
    Ok(Stats::merge(parts)?.estimate())
}

/// Law of the integration variable of the inverse term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InverseSampling {
    /// `y ~ P_X`.
    #[default]
    Covariate,
    /// `y = f*(X)` with `X ~ P_X`.
    Pushforward,
}

#[derive(Clone, Debug)]
pub struct RiskOptions {
    pub mc_samples: usize,
    pub seed: u64,
    pub law: CovariateLaw,
    pub inverse_sampling: InverseSampling,
    /// Side of the grid used for the sup-norm error.
    pub sup_grid: usize,
}

impl Default for RiskOptions {
    fn default() -> Self {
        RiskOptions {
            mc_samples: 100_000,
            seed: 0,
            law: CovariateLaw::Uniform,
            inverse_sampling: InverseSampling::Covariate,
            sup_grid: 101,
        }
    }
}

/// Forward and inverse risk of one estimate.
///
/// `inverse_l2` is the squared norm `|||f̂⁻¹ - f*⁻¹|||²`, `inverse_norm` its
/// square root, and `psi_term = inverse_norm⁴ = inverse_l2²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiskReport {
    pub forward_l2: f64,
    pub forward_std_error: f64,
    pub inverse_l2: f64,
    pub inverse_norm: f64,
    pub inverse_std_error: f64,
    pub psi_term: f64,
    pub total_inverse_risk: f64,
    pub sup_error: f64,
    pub nonminv_area: f64,
    pub mc_samples: usize,
    pub mc_std_error: f64,
    pub seed: u64,
}

impl RiskReport {
    pub const CSV_HEADER: &'static str = "forward_l2,inverse_l2,inverse_norm,psi_term,total_inverse_risk,sup_error,nonminv_area,mc_samples,mc_std_error,seed";

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "forward_l2={:.17e}", self.forward_l2);
        let _ = writeln!(s, "forward_std_error={:.17e}", self.forward_std_error);
        let _ = writeln!(s, "inverse_l2={:.17e}", self.inverse_l2);
        let _ = writeln!(s, "inverse_norm={:.17e}", self.inverse_norm);
        let _ = writeln!(s, "inverse_std_error={:.17e}", self.inverse_std_error);
        let _ = writeln!(s, "psi_term={:.17e}", self.psi_term);
        let _ = writeln!(s, "total_inverse_risk={:.17e}", self.total_inverse_risk);
        let _ = writeln!(s, "sup_error={:.17e}", self.sup_error);
        let _ = writeln!(s, "nonminv_area={:.17e}", self.nonminv_area);
        let _ = writeln!(s, "mc_samples={}", self.mc_samples);
        let _ = writeln!(s, "mc_std_error={:.17e}", self.mc_std_error);
        let _ = writeln!(s, "seed={}", self.seed);
        s
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{:.17e},{}",
            self.forward_l2,
            self.inverse_l2,
            self.inverse_norm,
            self.psi_term,
            self.total_inverse_risk,
            self.sup_error,
            self.nonminv_area,
            self.mc_samples,
            self.mc_std_error,
            self.seed
        )
    }
}

/// Forward risk, inverse risk (non-unique preimages charged at
/// [`FALLBACK`]), `ψ`-penalised total, sup-norm error and the fraction of
/// inverse queries that hit the fallback, scaled to area.
pub fn inverse_risk(est: &dyn UniqueInverse, truth: &dyn PlanarMap, opts: &RiskOptions) -> Result<RiskReport> {
    if !truth.has_inverse() {
        return Err(Error::NoInverse);
    }
    check_samples(opts.mc_samples)?;
    let fwd = forward_l2_risk(est, truth, &opts.law, opts.mc_samples, opts.seed)?;
    let law = &opts.law;
    let parts = par_batches(opts.mc_samples, MC_BATCH, substream_seed(opts.seed, u64::MAX), |rng, size| {
        let mut s = Stats::default();
        for _ in 0..size {
            let x = law.sample(rng)?;
            let (y, target) = match opts.inverse_sampling {
                InverseSampling::Covariate => (x, truth.inverse(x).ok_or(Error::NoInverse)?),
                InverseSampling::Pushforward => (truth.eval(x), x),
            };
            let got = est.unique_inverse(y);
            if got == FALLBACK {
                s.flagged += 1;
            }
            s.push((got - target).norm2_sq());
        }
        Ok(s)
    });
    let inv_stats = Stats::merge(parts)?;
    let inv = inv_stats.estimate();
    let psi = inv.mean * inv.mean;
    let sup = sup_norm_error(est, truth, opts.sup_grid)?;
    let nonminv = 4.0 * inv_stats.flagged as f64 / inv_stats.count as f64;
    Ok(RiskReport {
        forward_l2: fwd.mean,
        forward_std_error: fwd.std_error,
        inverse_l2: inv.mean,
        inverse_norm: inv.mean.sqrt(),
        inverse_std_error: inv.std_error,
        psi_term: psi,
        total_inverse_risk: fwd.mean + psi,
        sup_error: sup,
        nonminv_area: nonminv,
        mc_samples: opts.mc_samples,
        mc_std_error: (fwd.std_error.powi(2) + (2.0 * inv.mean * inv.std_error).powi(2)).sqrt(),
        seed: opts.seed,
    })
}

/// `max_j max_x |f̂_j(x) - f*_j(x)|` over an `r × r` grid on `[-1,1]^2`.
pub fn sup_norm_error(est: &dyn PlanarMap, truth: &dyn PlanarMap, r: usize) -> Result<f64> {
    use rayon::prelude::*;
    if r < 2 {
        return Err(Error::InvalidInput("sup-norm grid must have at least 2 points per side".into()));
    }
    let h = 2.0 / (r - 1) as f64;
    Ok((0..r * r)
        .into_par_iter()
        .map(|k| {
            let x = Point2::new(-1.0 + (k % r) as f64 * h, -1.0 + (k / r) as f64 * h);
            (est.eval(x) - truth.eval(x)).norm_inf()
        })
        .reduce(|| 0.0, f64::max))
}

/// `max hausdorff(L(y), L(y')) / |y - y'|` over level pairs.
pub fn levelset_lipschitz_diag(f: &dyn PlanarMap, j: usize, pairs: &[(f64, f64)], res: usize) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("need at least one level pair".into()));
    }
    let mut worst = 0.0f64;
    for &(y, yp) in pairs {
        if (y - yp).abs() < 0.05 {
            return Err(Error::InvalidInput(format!("levels {y} and {yp} are closer than 0.05")));
        }
        let a = level_set(f, j, y, res)?;
        let b = level_set(f, j, yp, res)?;
        for (l, s) in [(y, &a), (yp, &b)] {
            if s.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "empty level set at level {l} of component {j}: certification inconsistency"
                )));
            }
        }
        worst = worst.max(hausdorff(&a.points(), &b.points())? / (y - yp).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{FnMap, Identity, Linear};

    #[test]
    fn forward_examples() {
        let law = CovariateLaw::Uniform;
        assert_eq!(forward_l2_risk(&Identity, &Identity, &law, 1000, 1).unwrap().mean, 0.0);
        let shift = FnMap::new(|x| x + Point2::new(0.1, 0.0));
        let r = forward_l2_risk(&shift, &Identity, &law, 1000, 1).unwrap();
        assert!((r.mean - 0.01).abs() < 1e-15);
        let half = Linear::scale(0.5);
        let r = forward_l2_risk(&half, &Identity, &law, 200_000, 2).unwrap();
        assert!((r.mean - 1.0 / 6.0).abs() < 3.0 * r.std_error, "{r:?}");
    }

    #[test]
    fn inverse_examples() {
        let opts = RiskOptions { mc_samples: 20_000, ..Default::default() };
        let rep = inverse_risk(&ExactInverse(Identity), &Identity, &opts).unwrap();
        assert_eq!(rep.total_inverse_risk, 0.0);
        assert_eq!(rep.nonminv_area, 0.0);

        let shifted = ExactInverse(FnMap::new(|x| x).with_inverse(|y| y + Point2::new(0.1, 0.0)));
        let rep = inverse_risk(&shifted, &Identity, &opts).unwrap();
        assert!((rep.psi_term - 1e-4).abs() < 1e-12);

        let saw = crate::pilot::sawtooth_estimator(100).unwrap();
        let rep = inverse_risk(&saw, &Identity, &opts).unwrap();
        assert!(rep.inverse_l2 >= 2.0 && rep.psi_term >= 4.0 && rep.total_inverse_risk >= 4.0);
        assert!(rep.sup_error <= 0.02 + 1e-12);

        let no_inv = FnMap::new(|x| x);
        assert!(matches!(inverse_risk(&ExactInverse(Identity), &no_inv, &opts), Err(Error::NoInverse)));
    }

    #[test]
    fn sup_examples() {
        assert_eq!(sup_norm_error(&Identity, &Identity, 11).unwrap(), 0.0);
        let shift = FnMap::new(|x| x + Point2::new(0.1, 0.0));
        assert!((sup_norm_error(&shift, &Identity, 11).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn levelset_diag() {
        let pairs = [(-0.5, 0.2), (0.1, 0.6)];
        let r = levelset_lipschitz_diag(&Identity, 1, &pairs, 201).unwrap();
        assert!((r - 1.0).abs() < 1e-9);
        let lin = Linear::new([[0.5, 0.0], [0.0, 1.0]]);
        let pairs = [(-0.3, 0.2), (0.0, 0.45)];
        let r = levelset_lipschitz_diag(&lin, 1, &pairs, 201).unwrap();
        assert!((r - 2.0).abs() < 1e-9);
        assert!(levelset_lipschitz_diag(&Identity, 1, &[(0.0, 0.01)], 51).is_err());
    }
}
