//! Experiment runner behind the `invreg` binary.
//!
//! Configuration comes from an optional `key=value` file and per-key flags;
//! flags win. Every artifact starts with a `config:` line carrying the
//! serialized configuration.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::error::Error;
use crate::estimator::{grid_resolution, AreaEstimate, GHat, InvertibleEstimator};
use crate::geom::Point2;
use crate::heatmap::Heatmap;
use crate::maps::{family_map, swirl_truth, BumpParams, Identity, PlanarMap};
use crate::minimax::{lower_bound_report, BoundReport};
use crate::pilot::{knn_fit, sawtooth_estimator};
use crate::risk::{inverse_risk, RiskOptions, RiskReport};
use crate::rng::{stream, substream_seed};
use crate::rotation::estimate_rotation;
use crate::synth::{read_csv, sample_dataset, write_csv, CovariateLaw, Dataset};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

/// Failure of a command, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[source] Error),
    #[error("run failed: {0}")]
    Failed(#[source] Error),
    #[error("partial failure: {0}")]
    Partial(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Failed(_) | CliError::Partial(_) => EXIT_PARTIAL,
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(Error::InvalidInput(msg.into()))
}

/// Regression truth used by the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    Identity,
    Swirl,
    /// Random bump-family map with `m = 3`, `M = 7` drawn from this seed.
    Family(u64),
}

impl Truth {
    pub fn build(&self) -> crate::Result<Arc<dyn PlanarMap>> {
        Ok(match *self {
            Truth::Identity => Arc::new(Identity),
            Truth::Swirl => Arc::new(swirl_truth()),
            Truth::Family(seed) => {
                let mut rng = stream(seed);
                let p1 = BumpParams::random(3, 7, &mut rng)?;
                let p2 = BumpParams::random(3, 7, &mut rng)?;
                Arc::new(family_map(p1, p2)?)
            }
        })
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truth::Identity => write!(f, "identity"),
            Truth::Swirl => write!(f, "swirl"),
            Truth::Family(s) => write!(f, "family:{s}"),
        }
    }
}

impl FromStr for Truth {
    type Err = Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "identity" => Ok(Truth::Identity),
            "swirl" => Ok(Truth::Swirl),
            _ => match s.strip_prefix("family:") {
                Some(seed) => seed
                    .parse()
                    .map(Truth::Family)
                    .map_err(|_| Error::InvalidInput(format!("bad family seed in `{s}`"))),
                None => Err(Error::InvalidInput(format!("unknown truth `{s}`; expected identity, swirl or family:<seed>"))),
            },
        }
    }
}

/// Stage-one estimator used by `fit` and `sweep`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PilotKind {
    Knn,
    /// The truth itself, for noiseless exactness checks.
    Oracle,
}

impl fmt::Display for PilotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PilotKind::Knn => "knn",
            PilotKind::Oracle => "oracle",
        })
    }
}

impl FromStr for PilotKind {
    type Err = Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "knn" => Ok(PilotKind::Knn),
            "oracle" => Ok(PilotKind::Oracle),
            _ => Err(Error::InvalidInput(format!("unknown pilot `{s}`; expected knn or oracle"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub truth: Truth,
    pub n: usize,
    pub sigma2: f64,
    pub k: usize,
    pub alpha_plus_beta: f64,
    pub t_override: Option<usize>,
    pub t_list: Vec<usize>,
    pub mc_samples: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub pilot: PilotKind,
    pub heatmap_res: usize,
    pub sup_grid: usize,
    pub replicates: usize,
    pub n_list: Vec<usize>,
    pub d_list: Vec<usize>,
    pub data: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            truth: Truth::Swirl,
            n: 10_000,
            sigma2: 1e-3,
            k: 10,
            alpha_plus_beta: 1.0,
            t_override: None,
            t_list: vec![1, 3, 5],
            mc_samples: 100_000,
            seed: 0,
            output_dir: PathBuf::from("out"),
            pilot: PilotKind::Knn,
            heatmap_res: 201,
            sup_grid: 101,
            replicates: 5,
            n_list: vec![512, 1024, 2048, 4096, 8192, 16384],
            d_list: vec![10, 100, 1000],
            data: None,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> crate::Result<T> {
    v.trim().parse().map_err(|_| Error::InvalidInput(format!("bad value `{v}` for `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> crate::Result<Vec<T>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_num(key, s)).collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub const KEYS: [&'static str; 17] = [
        "truth",
        "n",
        "sigma2",
        "k",
        "alpha_plus_beta",
        "t",
        "t_list",
        "mc_samples",
        "seed",
        "output_dir",
        "pilot",
        "heatmap_res",
        "sup_grid",
        "replicates",
        "n_list",
        "d_list",
        "data",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> crate::Result<()> {
        let v = value.trim();
        match key.trim() {
            "truth" => self.truth = v.parse()?,
            "n" => self.n = parse_num(key, v)?,
            "sigma2" => self.sigma2 = parse_num(key, v)?,
            "k" => self.k = parse_num(key, v)?,
            "alpha_plus_beta" => self.alpha_plus_beta = parse_num(key, v)?,
            "t" => self.t_override = if v == "auto" || v.is_empty() { None } else { Some(parse_num(key, v)?) },
            "t_list" => self.t_list = parse_list(key, v)?,
            "mc_samples" => self.mc_samples = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "pilot" => self.pilot = v.parse()?,
            "heatmap_res" => self.heatmap_res = parse_num(key, v)?,
            "sup_grid" => self.sup_grid = parse_num(key, v)?,
            "replicates" => self.replicates = parse_num(key, v)?,
            "n_list" => self.n_list = parse_list(key, v)?,
            "d_list" => self.d_list = parse_list(key, v)?,
            "data" => self.data = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
            other => return Err(Error::InvalidInput(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str, origin: &Path) -> crate::Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                msg: format!("expected key=value, got `{line}`"),
            })?;
            self.set(k, v).map_err(|e| Error::Parse { path: origin.to_path_buf(), line: i + 1, msg: e.to_string() })?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> crate::Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text, path)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> crate::Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        if self.n == 0 {
            return bad("n must be positive");
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return bad("sigma2 must be finite and non-negative");
        }
        if self.k == 0 {
            return bad("k must be positive");
        }
        if !(self.alpha_plus_beta >= 0.0 && self.alpha_plus_beta.is_finite()) {
            return bad("alpha_plus_beta must be finite and non-negative");
        }
        if self.t_override == Some(0) || self.t_list.is_empty() || self.t_list.contains(&0) {
            return bad("grid resolutions must be positive and t_list non-empty");
        }
        if self.mc_samples == 0 || self.replicates == 0 {
            return bad("mc_samples and replicates must be positive");
        }
        if self.heatmap_res < 2 || self.sup_grid < 2 {
            return bad("heatmap_res and sup_grid must be at least 2");
        }
        if self.n_list.is_empty() || self.n_list.windows(2).any(|w| w[0] >= w[1]) || self.n_list[0] == 0 {
            return bad("n_list must be non-empty, positive and strictly ascending");
        }
        if self.d_list.is_empty() || self.d_list.contains(&0) {
            return bad("d_list must be non-empty and positive");
        }
        Ok(())
    }

    /// One-line `key=value` serialization. The output directory and dataset
    /// path are left out so artifacts do not depend on where they are written.
    pub fn serialize(&self) -> String {
        format!(
            "truth={} n={} sigma2={:e} k={} alpha_plus_beta={} t={} t_list={} mc_samples={} seed={} pilot={} heatmap_res={} sup_grid={} replicates={} n_list={} d_list={}",
            self.truth,
            self.n,
            self.sigma2,
            self.k,
            self.alpha_plus_beta,
            self.t_override.map_or("auto".to_string(), |t| t.to_string()),
            join(&self.t_list),
            self.mc_samples,
            self.seed,
            self.pilot,
            self.heatmap_res,
            self.sup_grid,
            self.replicates,
            join(&self.n_list),
            join(&self.d_list),
        )
    }

    pub fn header(&self) -> String {
        format!("config: {}", self.serialize())
    }

    pub fn resolution(&self, n: usize) -> usize {
        self.t_override.unwrap_or_else(|| grid_resolution(n, self.alpha_plus_beta))
    }

    fn risk_options(&self, seed: u64) -> RiskOptions {
        RiskOptions { mc_samples: self.mc_samples, seed, sup_grid: self.sup_grid, ..Default::default() }
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Failed(Error::io(dir, e)))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Failed(Error::io(path, e)))
}

fn runtime(e: Error) -> CliError {
    match e {
        Error::InvalidInput(_) | Error::Parse { .. } => CliError::Config(e),
        other => CliError::Failed(other),
    }
}

/// Draws a dataset from the configured truth into `output_dir/dataset.csv`.
pub fn cmd_gen(cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    cfg.validate().map_err(CliError::Config)?;
    let truth = cfg.truth.build().map_err(CliError::Config)?;
    let d = sample_dataset(&truth, cfg.n, cfg.sigma2, cfg.seed, &CovariateLaw::Uniform).map_err(CliError::Config)?;
    ensure_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join("dataset.csv");
    write_csv(&d, &path, &[cfg.header()]).map_err(runtime)?;
    Ok(path)
}

/// Paths and summaries produced by [`cmd_fit`].
#[derive(Clone, Debug)]
pub struct FitArtifacts {
    pub t: usize,
    pub files: Vec<PathBuf>,
    pub risk: RiskReport,
    pub measure: AreaEstimate,
    pub degenerate_rotation: bool,
}

/// The five panels, in display order.
pub const PANELS: [&str; 5] = ["f_star", "pilot", "g_hat", "g_dagger", "f_hat"];

fn sample_points(res: usize, f: impl Fn(Point2) -> Point2 + Sync) -> [Heatmap; 2] {
    let pts: Vec<Point2> = (0..res * res).into_par_iter().map(|k| f(Heatmap::point(res, k / res, k % res))).collect();
    [
        Heatmap { res, values: pts.iter().map(|p| p.x1).collect() },
        Heatmap { res, values: pts.iter().map(|p| p.x2).collect() },
    ]
}

fn build_pilot(cfg: &ExperimentConfig, d: &Dataset, truth: &Arc<dyn PlanarMap>) -> crate::Result<Arc<dyn PlanarMap>> {
    Ok(match cfg.pilot {
        PilotKind::Knn => Arc::new(knn_fit(d, cfg.k)?),
        PilotKind::Oracle => truth.clone(),
    })
}

/// Fits the estimator to a dataset and writes panel heatmaps for both
/// components, the `t_list` triptych of `f̂₁`, the mesh, the rotation
/// parameters and the risk report.
pub fn cmd_fit(cfg: &ExperimentConfig, dataset: &Path) -> Result<FitArtifacts, CliError> {
    cfg.validate().map_err(CliError::Config)?;
    let d = read_csv(dataset).map_err(CliError::Config)?;
    let truth = cfg.truth.build().map_err(CliError::Config)?;
    let pilot = build_pilot(cfg, &d, &truth).map_err(CliError::Config)?;
    let t = cfg.resolution(d.n());
    let rotation = estimate_rotation(&pilot);
    let est = InvertibleEstimator::from_pilot_with_rotation(&pilot, rotation, t).map_err(runtime)?;
    let ghat = GHat { pilot: pilot.clone(), rotation };

    ensure_dir(&cfg.output_dir)?;
    let dir = &cfg.output_dir;
    let mut comments = vec![
        cfg.header(),
        format!("dataset: n={} sigma2={:e} seed={}", d.n(), d.sigma2, d.seed),
        format!("t={t}"),
    ];
    let mut files = Vec::new();
    let res = cfg.heatmap_res;
    let mut emit = |name: &str, maps: [Heatmap; 2], comments: &[String]| -> Result<(), CliError> {
        for (c, h) in maps.iter().enumerate() {
            let stem = format!("{name}_{}", c + 1);
            let csv = dir.join(format!("{stem}.csv"));
            let pgm = dir.join(format!("{stem}.pgm"));
            let mut cm = comments.to_vec();
            cm.push(format!("panel: {stem}"));
            h.write_csv(&csv, &cm).map_err(runtime)?;
            h.write_pgm(&pgm, &cm).map_err(runtime)?;
            files.push(csv);
            files.push(pgm);
        }
        Ok(())
    };
    for name in PANELS {
        let maps = match name {
            "f_star" => sample_points(res, |x| truth.eval(x)),
            "pilot" => sample_points(res, |x| pilot.eval(x)),
            "g_hat" => sample_points(res, |x| ghat.eval(x)),
            "g_dagger" => sample_points(res, |x| est.g_dagger(x).expect("grid points lie in the domain")),
            _ => sample_points(res, |x| est.eval(x)),
        };
        emit(&format!("panel_{name}"), maps, &comments)?;
    }
    for &tt in &cfg.t_list {
        let e = InvertibleEstimator::from_pilot_with_rotation(&pilot, rotation, tt).map_err(runtime)?;
        let [h1, _] = sample_points(res, |x| e.eval(x));
        let stem = format!("triptych_t{tt}_1");
        let mut cm = comments.clone();
        cm.push(format!("panel: {stem}"));
        let csv = dir.join(format!("{stem}.csv"));
        let pgm = dir.join(format!("{stem}.pgm"));
        h1.write_csv(&csv, &cm).map_err(runtime)?;
        h1.write_pgm(&pgm, &cm).map_err(runtime)?;
        files.push(csv);
        files.push(pgm);
    }

    let header = format!("# {}\n", comments[0]);
    let mesh_path = dir.join("mesh.csv");
    let mesh_text = match est.mesh() {
        Some(m) => m.dump_csv(&comments),
        None => format!("{header}# degenerate rotation: estimator is identically zero\n"),
    };
    write_file(&mesh_path, mesh_text)?;
    files.push(mesh_path);
    let rot_path = dir.join("rotation.txt");
    write_file(&rot_path, format!("{header}{}", est.rotation().dump()))?;
    files.push(rot_path);

    let risk_seed = substream_seed(cfg.seed, 1);
    let risk = inverse_risk(&est, &truth, &cfg.risk_options(risk_seed)).map_err(runtime)?;
    let measure = est.non_invertible_measure(cfg.mc_samples, substream_seed(cfg.seed, 2));
    comments.push(format!("risk_seed={risk_seed}"));
    let mut kv = comments.iter().map(|c| format!("# {c}\n")).collect::<String>();
    kv.push_str(&risk.to_kv());
    kv.push_str(&format!(
        "non_invertible_measure={:.17e}\nnon_invertible_std_error={:.17e}\ntwisted_cells={}\nfolded_cells={}\n",
        measure.area,
        measure.std_error,
        est.mesh().map_or(0, |m| m.twisted_count()),
        est.mesh().map_or(0, |m| m.folded_count()),
    ));
    let risk_path = dir.join("risk.txt");
    write_file(&risk_path, kv)?;
    files.push(risk_path);
    Ok(FitArtifacts { t, files, risk, measure, degenerate_rotation: est.is_zero() })
}

/// One `(n, replicate)` row of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub t_used: usize,
    pub forward_l2: f64,
    pub inverse_l2: f64,
    pub total_inverse_risk: f64,
    pub sup_error: f64,
    pub nonminv_area: f64,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str =
        "n,replicate,seed,t_used,forward_l2,inverse_l2,total_inverse_risk,sup_error,nonminv_area";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            self.n,
            self.replicate,
            self.seed,
            self.t_used,
            self.forward_l2,
            self.inverse_l2,
            self.total_inverse_risk,
            self.sup_error,
            self.nonminv_area
        )
    }
}

/// Ordinary least squares fit `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
}

pub fn ols(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let k = x.len();
    if k < 2 || y.len() != k {
        return None;
    }
    let mx = x.iter().sum::<f64>() / k as f64;
    let my = y.iter().sum::<f64>() / k as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let se = if k > 2 {
        let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (ssr / (k - 2) as f64 / sxx).sqrt()
    } else {
        f64::NAN
    };
    Some(LineFit { slope, intercept, slope_std_error: se })
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// `(n, mean total inverse risk)` over completed replicates.
    pub means: Vec<(usize, f64)>,
    /// `None` when the log-log fit is degenerate.
    pub fit: Option<LineFit>,
    pub failures: Vec<String>,
}

/// Mean risks at or below this are treated as zero.
const RISK_FLOOR: f64 = 1e-12;

fn sweep_one(cfg: &ExperimentConfig, truth: &Arc<dyn PlanarMap>, n: usize, r: usize) -> crate::Result<SweepRow> {
    let seed = substream_seed(cfg.seed, ((n as u64) << 20) | r as u64);
    let d = sample_dataset(truth, n, cfg.sigma2, seed, &CovariateLaw::Uniform)?;
    let pilot = build_pilot(cfg, &d, truth)?;
    let t = cfg.resolution(n);
    let est = InvertibleEstimator::from_pilot(&pilot, t)?;
    let rep = inverse_risk(&est, truth, &cfg.risk_options(substream_seed(seed, 1)))?;
    Ok(SweepRow {
        n,
        replicate: r,
        seed,
        t_used: t,
        forward_l2: rep.forward_l2,
        inverse_l2: rep.inverse_l2,
        total_inverse_risk: rep.total_inverse_risk,
        sup_error: rep.sup_error,
        nonminv_area: rep.nonminv_area,
    })
}

/// Runs every `(n, replicate)` pair, writes `sweep.csv` and
/// `sweep_summary.txt`, and fits the log-log slope of the replicate-mean
/// total inverse risk against `n`.
pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<SweepResult, CliError> {
    cfg.validate().map_err(CliError::Config)?;
    let truth = cfg.truth.build().map_err(CliError::Config)?;
    ensure_dir(&cfg.output_dir)?;
    let jobs: Vec<(usize, usize)> =
        cfg.n_list.iter().flat_map(|&n| (0..cfg.replicates).map(move |r| (n, r))).collect();
    let outcomes: Vec<crate::Result<SweepRow>> = jobs.par_iter().map(|&(n, r)| sweep_one(cfg, &truth, n, r)).collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for ((n, r), o) in jobs.iter().zip(outcomes) {
        match o {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(format!("n={n} replicate={r}: {e}")),
        }
    }
    let means: Vec<(usize, f64)> = cfg
        .n_list
        .iter()
        .filter_map(|&n| {
            let v: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.total_inverse_risk).collect();
            (!v.is_empty()).then(|| (n, v.iter().sum::<f64>() / v.len() as f64))
        })
        .collect();
    let usable = means.iter().all(|&(_, m)| m.is_finite() && m > RISK_FLOOR);
    let fit = if usable {
        let x: Vec<f64> = means.iter().map(|&(n, _)| (n as f64).ln()).collect();
        let y: Vec<f64> = means.iter().map(|&(_, m)| m.ln()).collect();
        ols(&x, &y)
    } else {
        None
    };

    let header = format!("# {}\n", cfg.header());
    let mut csv = header.clone();
    csv.push_str(SweepRow::CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.to_csv_row());
        csv.push('\n');
    }
    write_file(&cfg.output_dir.join("sweep.csv"), csv)?;

    let mut summary = header;
    summary.push_str("n,mean_total_inverse_risk\n");
    for (n, m) in &means {
        summary.push_str(&format!("{n},{m:.17e}\n"));
    }
    match fit {
        Some(f) => summary.push_str(&format!(
            "# slope={:.6} intercept={:.6} slope_std_error={:.6} reference_slope=-0.5\n",
            f.slope, f.intercept, f.slope_std_error
        )),
        None => summary.push_str("# slope fit degenerate: risks are zero or too few sizes; reference_slope=-0.5\n"),
    }
    for f in &failures {
        summary.push_str(&format!("# failed: {f}\n"));
    }
    write_file(&cfg.output_dir.join("sweep_summary.txt"), summary)?;

    let result = SweepResult { rows, means, fit, failures };
    if !result.failures.is_empty() {
        return Err(CliError::Partial(result.failures.join("; ")));
    }
    Ok(result)
}

/// Writes `lowerbound.csv` and the packing code as hex lines.
pub fn cmd_lowerbound(cfg: &ExperimentConfig) -> Result<BoundReport, CliError> {
    cfg.validate().map_err(CliError::Config)?;
    let (report, code) = lower_bound_report(cfg.n, cfg.sigma2, cfg.seed).map_err(CliError::Config)?;
    ensure_dir(&cfg.output_dir)?;
    let header = format!("# {}\n# m = round(n^(1/4)) = {}\n", cfg.header(), report.m);
    write_file(
        &cfg.output_dir.join("lowerbound.csv"),
        format!("{header}{}\n{}\n", BoundReport::CSV_HEADER, report.to_csv_row()),
    )?;
    write_file(&cfg.output_dir.join("lowerbound_code.hex"), format!("{header}{}", code.hex_dump()))?;
    Ok(report)
}

/// One row of the sawtooth demonstration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SawtoothRow {
    pub teeth: usize,
    pub sup_error: f64,
    pub sup_bound: f64,
    pub forward_l2: f64,
    pub inverse_l2: f64,
    pub total_inverse_risk: f64,
    pub nonminv_area: f64,
}

impl SawtoothRow {
    pub const CSV_HEADER: &'static str =
        "teeth,sup_error,sup_bound,sup_ok,forward_l2,inverse_l2,total_inverse_risk,risk_ge_4,nonminv_area";

    pub fn sup_ok(&self) -> bool {
        self.sup_error <= self.sup_bound
    }

    pub fn risk_ok(&self) -> bool {
        self.total_inverse_risk >= 4.0
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{:.17e},{:.17e},{},{:.17e},{:.17e},{:.17e},{},{:.17e}",
            self.teeth,
            self.sup_error,
            self.sup_bound,
            self.sup_ok(),
            self.forward_l2,
            self.inverse_l2,
            self.total_inverse_risk,
            self.risk_ok(),
            self.nonminv_area
        )
    }
}

/// Sup-norm error and inverse risk of the sawtooth estimator against the
/// identity truth for each tooth count in `d_list`.
pub fn cmd_sawtooth(cfg: &ExperimentConfig) -> Result<Vec<SawtoothRow>, CliError> {
    cfg.validate().map_err(CliError::Config)?;
    let truth = Identity;
    let mut rows = Vec::new();
    for &teeth in &cfg.d_list {
        let est = sawtooth_estimator(teeth).map_err(CliError::Config)?;
        let rep = inverse_risk(&est, &truth, &cfg.risk_options(substream_seed(cfg.seed, teeth as u64)))
            .map_err(runtime)?;
        rows.push(SawtoothRow {
            teeth,
            sup_error: rep.sup_error,
            sup_bound: 2.0 / teeth as f64,
            forward_l2: rep.forward_l2,
            inverse_l2: rep.inverse_l2,
            total_inverse_risk: rep.total_inverse_risk,
            nonminv_area: rep.nonminv_area,
        });
    }
    ensure_dir(&cfg.output_dir)?;
    let mut csv = format!("# {}\n{}\n", cfg.header(), SawtoothRow::CSV_HEADER);
    for r in &rows {
        csv.push_str(&r.to_csv_row());
        csv.push('\n');
    }
    write_file(&cfg.output_dir.join("sawtooth.csv"), csv)?;
    Ok(rows)
}

/// Per-key overrides shared by all subcommands.
#[derive(Args, Debug, Default, Clone)]
pub struct ConfigArgs {
    /// `key=value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// identity, swirl or family:<seed>
    #[arg(long)]
    pub truth: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub sigma2: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long = "alpha-plus-beta")]
    pub alpha_plus_beta: Option<String>,
    /// Grid resolution, or `auto` for the sample-size rule.
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long = "t-list")]
    pub t_list: Option<String>,
    #[arg(long = "mc-samples")]
    pub mc_samples: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long = "output-dir")]
    pub output_dir: Option<String>,
    /// knn or oracle
    #[arg(long)]
    pub pilot: Option<String>,
    #[arg(long = "heatmap-res")]
    pub heatmap_res: Option<String>,
    #[arg(long = "sup-grid")]
    pub sup_grid: Option<String>,
    #[arg(long)]
    pub replicates: Option<String>,
    #[arg(long = "n-list")]
    pub n_list: Option<String>,
    #[arg(long = "d-list")]
    pub d_list: Option<String>,
    /// Dataset CSV for `fit`.
    #[arg(long)]
    pub data: Option<String>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> crate::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("truth", &self.truth),
            ("n", &self.n),
            ("sigma2", &self.sigma2),
            ("k", &self.k),
            ("alpha_plus_beta", &self.alpha_plus_beta),
            ("t", &self.t),
            ("t_list", &self.t_list),
            ("mc_samples", &self.mc_samples),
            ("seed", &self.seed),
            ("output_dir", &self.output_dir),
            ("pilot", &self.pilot),
            ("heatmap_res", &self.heatmap_res),
            ("sup_grid", &self.sup_grid),
            ("replicates", &self.replicates),
            ("n_list", &self.n_list),
            ("d_list", &self.d_list),
            ("data", &self.data),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Parser, Debug)]
#[command(name = "invreg", about = "Invertible planar regression experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw a dataset from the configured truth.
    Gen(ConfigArgs),
    /// Fit the invertible estimator and emit heatmaps and risks.
    Fit(ConfigArgs),
    /// Risk sweep over sample sizes with a log-log slope fit.
    Sweep(ConfigArgs),
    /// Packing-based lower-bound report.
    Lowerbound(ConfigArgs),
    /// Sup-norm versus inverse-risk demonstration for the sawtooth estimator.
    Sawtooth(ConfigArgs),
}

fn dispatch(cmd: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    let (Command::Gen(a) | Command::Fit(a) | Command::Sweep(a) | Command::Lowerbound(a) | Command::Sawtooth(a)) = cmd;
    let cfg = a.resolve().map_err(CliError::Config)?;
    let mut say = |s: String| {
        let _ = writeln!(out, "{s}");
    };
    match cmd {
        Command::Gen(_) => {
            let p = cmd_gen(&cfg)?;
            say(format!("wrote {}", p.display()));
        }
        Command::Fit(_) => {
            let data = cfg.data.clone().ok_or_else(|| config_err("fit needs a dataset (--data or data=)"))?;
            let r = cmd_fit(&cfg, &data)?;
            say(format!("t={} files={} total_inverse_risk={:e}", r.t, r.files.len(), r.risk.total_inverse_risk));
        }
        Command::Sweep(_) => {
            let r = cmd_sweep(&cfg)?;
            match r.fit {
                Some(f) => say(format!("slope={:.4} (se {:.4}), reference -0.5", f.slope, f.slope_std_error)),
                None => say("slope fit degenerate".into()),
            }
        }
        Command::Lowerbound(_) => {
            let r = cmd_lowerbound(&cfg)?;
            say(format!("m={} alpha_sep={:e} beta={:e} bound={:e} beta_ok={}", r.m, r.alpha_sep, r.beta_kl, r.bound_value, r.beta_ok));
        }
        Command::Sawtooth(_) => {
            for r in cmd_sawtooth(&cfg)? {
                say(format!("D={} sup={:e} total_inverse_risk={:e}", r.teeth, r.sup_error, r.total_inverse_risk));
            }
        }
    }
    Ok(())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_CONFIG;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match dispatch(&cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
