//! Stage-one estimators: clipped k-nearest-neighbour regression and the
//! sawtooth estimator whose second component is uniformly close to `x₂` but
//! nowhere injective.

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::maps::PlanarMap;
use crate::synth::Dataset;

/// Componentwise clamp to `[-1, 1]`.
pub fn clip_to_square(y: Point2) -> Point2 {
    Point2::new(y.x1.clamp(-1.0, 1.0), y.x2.clamp(-1.0, 1.0))
}

/// Brute-force k-NN regression; ties in distance go to the lower index.
#[derive(Clone, Debug)]
pub struct KnnEstimator {
    x: Vec<Point2>,
    y: Vec<Point2>,
    k: usize,
}

pub fn knn_fit(d: &Dataset, k: usize) -> Result<KnnEstimator> {
    if d.n() == 0 {
        return Err(Error::InvalidInput("k-NN needs a non-empty dataset".into()));
    }
    if k == 0 || k > d.n() {
        return Err(Error::InvalidInput(format!("k = {k} must lie in 1..={}", d.n())));
    }
    Ok(KnnEstimator { x: d.x.clone(), y: d.y.clone(), k })
}

impl KnnEstimator {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Indices of the `k` nearest samples, nearest first.
    pub fn neighbours(&self, q: Point2) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> =
            self.x.iter().enumerate().map(|(i, &p)| ((p - q).norm2_sq(), i)).collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, cmp);
            d.truncate(self.k);
        }
        d.sort_unstable_by(cmp);
        d.into_iter().map(|(_, i)| i).collect()
    }

    /// Unclipped neighbour average.
    pub fn raw_predict(&self, q: Point2) -> Point2 {
        let idx = self.neighbours(q);
        let s = idx.iter().fold(Point2::ZERO, |acc, &i| acc + self.y[i]);
        s * (1.0 / self.k as f64)
    }
}

impl PlanarMap for KnnEstimator {
    fn eval(&self, x: Point2) -> Point2 {
        clip_to_square(self.raw_predict(x))
    }
}

/// First component `x₁`; second component a sawtooth with `D` teeth of
/// slopes `3, -3, 3` in `x₂`.
#[derive(Clone, Copy, Debug)]
pub struct SawtoothEstimator {
    teeth: usize,
}

pub fn sawtooth_estimator(teeth: usize) -> Result<SawtoothEstimator> {
    if teeth == 0 {
        return Err(Error::InvalidInput("tooth count must be positive".into()));
    }
    Ok(SawtoothEstimator { teeth })
}

impl SawtoothEstimator {
    pub fn teeth(&self) -> usize {
        self.teeth
    }

    /// Tooth width `Δ = 2/D`.
    pub fn delta(&self) -> f64 {
        2.0 / self.teeth as f64
    }

    /// Left end `d_m = -1 + mΔ` of tooth `m`.
    pub fn tooth_start(&self, m: usize) -> f64 {
        -1.0 + m as f64 * self.delta()
    }

    pub fn second(&self, x2: f64) -> f64 {
        if x2 >= 1.0 {
            return 1.0;
        }
        let dl = self.delta();
        let m = (((x2 + 1.0) / dl).floor().max(0.0) as usize).min(self.teeth - 1);
        let d = self.tooth_start(m);
        let u = x2 - d;
        if u < dl / 3.0 {
            d + 3.0 * u
        } else if u < 2.0 * dl / 3.0 {
            d + 2.0 * dl - 3.0 * u
        } else {
            d + 3.0 * u - 2.0 * dl
        }
    }

    /// All `x₂ ∈ [-1, 1]` with `second(x₂) = y₂`, sorted.
    pub fn preimages_x2(&self, y2: f64) -> Vec<f64> {
        let dl = self.delta();
        let eps = 1e-12;
        let mut out: Vec<f64> = Vec::new();
        for m in 0..self.teeth {
            let d = self.tooth_start(m);
            let v = y2 - d;
            // branches d + 3u, d + 2Δ - 3u, d + 3u - 2Δ on consecutive thirds
            let cands = [(v / 3.0, 0.0), ((2.0 * dl - v) / 3.0, 1.0), ((v + 2.0 * dl) / 3.0, 2.0)];
            for (u, third) in cands {
                let (lo, hi) = (third * dl / 3.0, (third + 1.0) * dl / 3.0);
                if u >= lo - eps && u <= hi + eps {
                    out.push((d + u).clamp(-1.0, 1.0));
                }
            }
        }
        out.retain(|&x| (self.second(x) - y2).abs() <= 1e-9);
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
        out
    }
}

impl PlanarMap for SawtoothEstimator {
    fn eval(&self, x: Point2) -> Point2 {
        Point2::new(x.x1, self.second(x.x2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        Dataset {
            x: vec![Point2::new(0.0, 0.0), Point2::new(0.5, 0.0), Point2::new(-0.5, 0.0), Point2::new(0.25, 0.0)],
            y: vec![Point2::new(2.0, 0.1), Point2::new(0.3, -0.2), Point2::new(-0.1, 0.4), Point2::new(0.2, 0.2)],
            sigma2: 0.0,
            seed: 0,
        }
    }

    #[test]
    fn clip_examples() {
        assert_eq!(clip_to_square(Point2::new(2.0, 0.5)), Point2::new(1.0, 0.5));
        assert_eq!(clip_to_square(Point2::new(-3.0, -3.0)), Point2::new(-1.0, -1.0));
        assert_eq!(clip_to_square(Point2::new(0.2, -0.7)), Point2::new(0.2, -0.7));
    }

    #[test]
    fn knn_examples() {
        let d = toy();
        let k1 = knn_fit(&d, 1).unwrap();
        assert_eq!(k1.eval(Point2::new(0.0, 0.0)), Point2::new(1.0, 0.1));
        let kn = knn_fit(&d, 4).unwrap();
        let mean = Point2::new(2.4 / 4.0, 0.5 / 4.0);
        let v = kn.eval(Point2::new(0.9, -0.9));
        assert!((v - mean).norm2() < 1e-15);
        // equidistant from samples 0 and 3: 0.125 each; lower index wins
        assert_eq!(k1.neighbours(Point2::new(0.125, 0.0)), vec![0]);
        assert!(knn_fit(&d, 0).is_err() && knn_fit(&d, 5).is_err());
    }

    #[test]
    fn sawtooth_examples() {
        let s = sawtooth_estimator(100).unwrap();
        let mut sup = 0.0f64;
        for i in 0..=20_000 {
            let x2 = -1.0 + i as f64 * 1e-4;
            sup = sup.max((s.second(x2) - x2).abs());
        }
        assert!(sup <= 0.02 + 1e-12);
        let d = s.tooth_start(37);
        assert_eq!(s.eval(Point2::new(0.3, d)), Point2::new(0.3, d));
        for &y2 in &[-0.73, 0.0, 0.4111, 0.99] {
            let pre = s.preimages_x2(y2);
            assert!(pre.len() >= 3, "{y2}: {pre:?}");
            for p in pre {
                assert!((s.second(p) - y2).abs() < 1e-12);
            }
        }
    }
}
