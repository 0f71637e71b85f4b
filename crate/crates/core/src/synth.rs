//! Regression datasets `Yᵢ = f*(Xᵢ) + εᵢ` with `εᵢ ~ N(0, σ² I₂)`.

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::maps::PlanarMap;
use crate::rng::{normal_pair, stream, uniform_square};

type Density = Arc<dyn Fn(Point2) -> f64 + Send + Sync>;

/// Law of the covariates on `[-1,1]^2`.
#[derive(Clone, Default)]
pub enum CovariateLaw {
    #[default]
    Uniform,
    /// Rejection sampling from an unnormalized density bounded by `bound`.
    Rejection { density: Density, bound: f64 },
}

impl fmt::Debug for CovariateLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CovariateLaw::Uniform => write!(f, "Uniform"),
            CovariateLaw::Rejection { bound, .. } => write!(f, "Rejection {{ bound: {bound} }}"),
        }
    }
}

const MAX_REJECTIONS: usize = 1_000_000;

impl CovariateLaw {
    pub fn rejection(density: impl Fn(Point2) -> f64 + Send + Sync + 'static, bound: f64) -> Self {
        CovariateLaw::Rejection { density: Arc::new(density), bound }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CovariateLaw::Uniform => Ok(()),
            CovariateLaw::Rejection { bound, .. } if !(bound.is_finite() && *bound > 0.0) => {
                Err(Error::InvalidInput(format!("density bound must be positive and finite, got {bound}")))
            }
            CovariateLaw::Rejection { .. } => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Point2> {
        match self {
            CovariateLaw::Uniform => Ok(uniform_square(rng)),
            CovariateLaw::Rejection { density, bound } => {
                for _ in 0..MAX_REJECTIONS {
                    let x = uniform_square(rng);
                    let d = density(x);
                    if !(d >= 0.0 && d <= *bound) {
                        return Err(Error::InvalidInput(format!(
                            "density value {d} at ({}, {}) outside [0, {bound}]",
                            x.x1, x.x2
                        )));
                    }
                    if rng.random::<f64>() * bound < d {
                        return Ok(x);
                    }
                }
                Err(Error::InvalidInput("rejection sampler exhausted its attempt budget".into()))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: Vec<Point2>,
    pub y: Vec<Point2>,
    pub sigma2: f64,
    pub seed: u64,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.x.len()
    }
}

/// Draws `n` covariates and noisy responses from one seeded stream: for each
/// sample the covariate first, then one Box–Muller pair for the noise.
pub fn sample_dataset(
    truth: &dyn PlanarMap,
    n: usize,
    sigma2: f64,
    seed: u64,
    law: &CovariateLaw,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidInput("dataset size must be positive".into()));
    }
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidInput(format!("noise variance must be non-negative, got {sigma2}")));
    }
    law.validate()?;
    let sd = sigma2.sqrt();
    let mut rng = stream(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let xi = law.sample(&mut rng)?;
        let (e1, e2) = normal_pair(&mut rng);
        let fx = truth.eval(xi);
        let yi = if sigma2 == 0.0 { fx } else { fx + Point2::new(sd * e1, sd * e2) };
        x.push(xi);
        y.push(yi);
    }
    Ok(Dataset { x, y, sigma2, seed })
}

pub const CSV_HEADER: &str = "x1,x2,y1,y2";

/// Writes the dataset; leading `#` lines carry metadata.
pub fn write_csv_to<W: Write>(d: &Dataset, w: &mut W, extra_comments: &[String]) -> std::io::Result<()> {
    writeln!(w, "# sigma2={:e}", d.sigma2)?;
    writeln!(w, "# seed={}", d.seed)?;
    writeln!(w, "# n={}", d.n())?;
    for c in extra_comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "{CSV_HEADER}")?;
    for (x, y) in d.x.iter().zip(&d.y) {
        writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", x.x1, x.x2, y.x1, y.x2)?;
    }
    Ok(())
}

pub fn write_csv(d: &Dataset, path: impl AsRef<Path>, extra_comments: &[String]) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_csv_to(d, &mut buf, extra_comments).map_err(|e| Error::io(path, e))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_from(BufReader::new(file), path)
}

pub fn read_csv_from<R: BufRead>(reader: R, path: &Path) -> Result<Dataset> {
    let perr = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut sigma2 = 0.0;
    let mut seed = 0u64;
    let mut header_seen = false;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if let Some(c) = line.strip_prefix('#') {
            if let Some((k, v)) = c.trim().split_once('=') {
                match k.trim() {
                    "sigma2" => sigma2 = v.trim().parse().map_err(|_| perr(lineno, format!("bad sigma2 '{v}'")))?,
                    "seed" => seed = v.trim().parse().map_err(|_| perr(lineno, format!("bad seed '{v}'")))?,
                    _ => {}
                }
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        if !header_seen {
            if line != CSV_HEADER {
                return Err(perr(lineno, format!("expected header '{CSV_HEADER}', found '{line}'")));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(perr(lineno, format!("expected 4 columns, found {}", fields.len())));
        }
        let mut v = [0.0f64; 4];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f.trim().parse().map_err(|_| perr(lineno, format!("not a number: '{f}'")))?;
            if !slot.is_finite() {
                return Err(perr(lineno, format!("non-finite value '{f}'")));
            }
        }
        let xi = Point2::new(v[0], v[1]);
        if !xi.in_square() {
            return Err(perr(lineno, "covariate outside [-1,1]^2".into()));
        }
        x.push(xi);
        y.push(Point2::new(v[2], v[3]));
    }
    if !header_seen {
        return Err(perr(0, "missing header row".into()));
    }
    if x.is_empty() {
        return Err(perr(0, "dataset has no rows".into()));
    }
    Ok(Dataset { x, y, sigma2, seed })
}
