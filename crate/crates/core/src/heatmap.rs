//! Scalar fields sampled on a square grid, written as CSV matrices and
//! binary PGM images.
//!
//! Row 0 is the top of the square (`x₂ = +1`), column 0 its left edge
//! (`x₁ = -1`). Gray levels map `[-1, 1]` linearly onto `0..=255`, clamped.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::Point2;

#[derive(Clone, Debug, PartialEq)]
pub struct Heatmap {
    pub res: usize,
    /// Row-major values, `values[row * res + col]`.
    pub values: Vec<f64>,
}

impl Heatmap {
    /// Grid coordinate of cell `(row, col)`.
    pub fn point(res: usize, row: usize, col: usize) -> Point2 {
        let h = 2.0 / (res - 1) as f64;
        Point2::new(-1.0 + col as f64 * h, 1.0 - row as f64 * h)
    }

    pub fn sample(res: usize, f: impl Fn(Point2) -> f64 + Sync) -> Result<Heatmap> {
        if res < 2 {
            return Err(Error::InvalidInput("heatmap resolution must be at least 2".into()));
        }
        let values = (0..res * res)
            .into_par_iter()
            .map(|k| f(Self::point(res, k / res, k % res)))
            .collect();
        Ok(Heatmap { res, values })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.res + col]
    }

    pub fn max_abs_diff(&self, other: &Heatmap) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn gray(v: f64) -> u8 {
        if v.is_nan() {
            return 0;
        }
        ((v.clamp(-1.0, 1.0) + 1.0) / 2.0 * 255.0).round() as u8
    }

    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut s = String::new();
        for c in comments {
            let _ = writeln!(s, "# {c}");
        }
        let _ = writeln!(s, "# rows: x2 from +1 down to -1; columns: x1 from -1 to +1");
        s.push_str("x2\\x1");
        for col in 0..self.res {
            let _ = write!(s, ",{:.6}", Self::point(self.res, 0, col).x1);
        }
        s.push('\n');
        for row in 0..self.res {
            let _ = write!(s, "{:.6}", Self::point(self.res, row, 0).x2);
            for col in 0..self.res {
                let _ = write!(s, ",{:.9e}", self.get(row, col));
            }
            s.push('\n');
        }
        s
    }

    pub fn to_pgm(&self, comments: &[String]) -> Vec<u8> {
        let mut head = String::from("P5\n");
        for c in comments {
            let _ = writeln!(head, "# {}", c.replace('\n', " "));
        }
        let _ = writeln!(head, "# gray = 255 * (clamp(v, -1, 1) + 1) / 2");
        let _ = write!(head, "{} {}\n255\n", self.res, self.res);
        let mut out = head.into_bytes();
        out.extend(self.values.iter().map(|&v| Self::gray(v)));
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, comments: &[String]) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv(comments)).map_err(|e| Error::io(path, e))
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>, comments: &[String]) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_pgm(comments)).map_err(|e| Error::io(path, e))
    }
}
