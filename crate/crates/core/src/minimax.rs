//! Lower-bound laboratory: Varshamov–Gilbert packings of bump matrices, L²
//! separation, Gaussian KL divergences and the resulting bound report.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::maps::{chi_theta, family_map, BumpParams, FamilyMap, PlanarMap};
use crate::rng::stream;
use crate::risk::{forward_l2_risk, McEstimate};
use crate::synth::CovariateLaw;

/// A binary word of fixed length stored in 64-bit blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    bits: usize,
    blocks: Vec<u64>,
}

impl Word {
    pub fn zeros(bits: usize) -> Self {
        Word { bits, blocks: vec![0; bits.div_ceil(64)] }
    }

    pub fn random<R: Rng + ?Sized>(bits: usize, rng: &mut R) -> Self {
        let mut w = Word { bits, blocks: (0..bits.div_ceil(64)).map(|_| rng.random()).collect() };
        let tail = bits % 64;
        if tail != 0 {
            *w.blocks.last_mut().unwrap() &= (1u64 << tail) - 1;
        }
        w
    }

    pub fn len(&self) -> usize {
        self.bits
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.blocks[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn hamming(&self, other: &Word) -> usize {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.bits).map(|i| self.get(i)).collect()
    }

    /// Most significant block first.
    pub fn to_hex(&self) -> String {
        self.blocks.iter().rev().map(|b| format!("{b:016x}")).collect()
    }
}

/// Hamming distance by byte table, independent of [`Word::hamming`].
fn hamming_bytes(a: &Word, b: &Word) -> usize {
    static TABLE: std::sync::OnceLock<[u8; 256]> = std::sync::OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [0u8; 256];
        for (i, slot) in t.iter_mut().enumerate() {
            let mut v = i;
            while v > 0 {
                *slot += (v & 1) as u8;
                v >>= 1;
            }
        }
        t
    });
    a.blocks
        .iter()
        .zip(&b.blocks)
        .flat_map(|(x, y)| (x ^ y).to_le_bytes())
        .map(|byte| table[byte as usize] as usize)
        .sum()
}

/// Limits of the greedy construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VgConfig {
    pub max_attempts: usize,
    pub max_words: usize,
}

impl Default for VgConfig {
    fn default() -> Self {
        VgConfig { max_attempts: 1_000_000, max_words: 4096 }
    }
}

#[derive(Clone, Debug)]
pub struct PackingCode {
    pub n_bits: usize,
    pub words: Vec<Word>,
    /// Required pairwise distance `⌈N/8⌉`.
    pub required_distance: usize,
    /// Smallest pairwise distance in the code.
    pub min_hamming: usize,
    /// Requested size `2^⌈N/8⌉`, saturating.
    pub target: u128,
    /// Every pair re-checked by an independent count.
    pub verified: bool,
    pub shortfall: bool,
    pub attempts: usize,
}

impl PackingCode {
    pub fn hex_dump(&self) -> String {
        let mut s = String::new();
        for w in &self.words {
            let _ = writeln!(s, "{}", w.to_hex());
        }
        s
    }
}

pub fn vg_code(n_bits: usize, seed: u64) -> Result<PackingCode> {
    vg_code_with(n_bits, seed, VgConfig::default())
}

/// Randomised greedy packing containing the zero word: random words are kept
/// when they are at distance `≥ ⌈N/8⌉` from every kept word.
pub fn vg_code_with(n_bits: usize, seed: u64, cfg: VgConfig) -> Result<PackingCode> {
    if n_bits < 8 {
        return Err(Error::InvalidInput(format!("code length must be at least 8, got {n_bits}")));
    }
    Ok(greedy_code(n_bits, seed, cfg))
}

fn greedy_code(n_bits: usize, seed: u64, cfg: VgConfig) -> PackingCode {
    let d = n_bits.div_ceil(8);
    let exp = n_bits.div_ceil(8);
    let target: u128 = if exp >= 127 { u128::MAX } else { 1u128 << exp };
    let quota = target.min(cfg.max_words as u128) as usize;
    let mut rng = stream(seed);
    let mut words = vec![Word::zeros(n_bits)];
    let mut attempts = 0;
    while words.len() < quota && attempts < cfg.max_attempts {
        attempts += 1;
        let w = Word::random(n_bits, &mut rng);
        if words.iter().all(|v| v.hamming(&w) >= d) {
            words.push(w);
        }
    }
    let pairs: Vec<(usize, usize)> = (0..words.len()).flat_map(|i| (i + 1..words.len()).map(move |j| (i, j))).collect();
    let dists: Vec<usize> = pairs.par_iter().map(|&(i, j)| hamming_bytes(&words[i], &words[j])).collect();
    let min_hamming = dists.iter().copied().min().unwrap_or(n_bits);
    let verified = dists.iter().all(|&h| h >= d);
    let shortfall = (words.len() as u128) < target;
    PackingCode { n_bits, words, required_distance: d, min_hamming, target, verified, shortfall, attempts }
}

/// `∫ (χ_θ - χ_θ')²` over `[-1,1]^2` by the midpoint rule with `per_cell`
/// points per bump cell and axis.
pub fn separation_l2_with(p: &BumpParams, q: &BumpParams, per_cell: usize) -> Result<f64> {
    if !p.same_shape(q) {
        return Err(Error::InvalidInput("separation needs parameters with equal m and M".into()));
    }
    let r = per_cell.max(1) * p.m();
    let h = 2.0 / r as f64;
    let rows: Vec<f64> = (0..r)
        .into_par_iter()
        .map(|a| {
            let x1 = -1.0 + (a as f64 + 0.5) * h;
            (0..r)
                .map(|b| {
                    let x = Point2::new(x1, -1.0 + (b as f64 + 0.5) * h);
                    let d = chi_theta(x, p) - chi_theta(x, q);
                    d * d
                })
                .sum::<f64>()
        })
        .collect();
    Ok(rows.iter().sum::<f64>() * h * h)
}

/// [`separation_l2_with`] at 100 points per cell and axis.
pub fn separation_l2(p: &BumpParams, q: &BumpParams) -> Result<f64> {
    separation_l2_with(p, q, 100)
}

/// `n / (2σ²) · E ‖f(X) - f'(X)‖²` by Monte Carlo.
pub fn kl_gaussian_model(
    f: &dyn PlanarMap,
    g: &dyn PlanarMap,
    n: usize,
    sigma2: f64,
    law: &CovariateLaw,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if sigma2.is_nan() || sigma2 <= 0.0 {
        return Err(Error::InvalidInput("KL divergence needs a positive noise variance".into()));
    }
    let r = forward_l2_risk(f, g, law, samples, seed)?;
    let s = n as f64 / (2.0 * sigma2);
    Ok(McEstimate { mean: s * r.mean, std_error: s * r.std_error, samples: r.samples })
}

/// Exact KL between two family maps under uniform covariates, from the L²
/// separations of their components.
pub fn kl_family_uniform(f: &FamilyMap, g: &FamilyMap, n: usize, sigma2: f64) -> Result<f64> {
    if sigma2.is_nan() || sigma2 <= 0.0 {
        return Err(Error::InvalidInput("KL divergence needs a positive noise variance".into()));
    }
    let l2 = separation_l2(&f.p1, &g.p1)? + separation_l2(&f.p2, &g.p2)?;
    Ok(n as f64 / (2.0 * sigma2) * l2 / 4.0)
}

/// Output of [`lower_bound_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub sigma2: f64,
    pub seed: u64,
    pub m: usize,
    pub amplitude: usize,
    pub n_bits: usize,
    pub hypotheses: usize,
    pub required_distance: usize,
    pub min_hamming: usize,
    pub single_bump_l2: f64,
    pub alpha_sep: f64,
    pub beta_kl: f64,
    pub bound_value: f64,
    pub rate_reference: f64,
    pub alpha_over_rate: f64,
    pub beta_ok: bool,
    pub code_verified: bool,
    pub code_shortfall: bool,
    pub degenerate: bool,
}

impl BoundReport {
    pub const CSV_HEADER: &'static str = "n,sigma2,seed,m,amplitude,n_bits,hypotheses,required_distance,min_hamming,single_bump_l2,alpha_sep,beta_kl,bound_value,rate_reference,alpha_over_rate,beta_ok,code_verified,code_shortfall,degenerate";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{:e},{},{},{},{},{},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{},{},{}",
            self.n,
            self.sigma2,
            self.seed,
            self.m,
            self.amplitude,
            self.n_bits,
            self.hypotheses,
            self.required_distance,
            self.min_hamming,
            self.single_bump_l2,
            self.alpha_sep,
            self.beta_kl,
            self.bound_value,
            self.rate_reference,
            self.alpha_over_rate,
            self.beta_ok,
            self.code_verified,
            self.code_shortfall,
            self.degenerate
        )
    }
}

/// Packing of `m = round(n^{1/4})`, `M = 2m + 1` bump maps
/// `f_j = (ξ_{θ_j}, ξ_{θ_j})` indexed by a VG code over `m²` bits.
///
/// `alpha_sep` is the half-separation `min ‖f_j - f_k‖²/2` certified by the
/// code's required distance; `beta_kl = Σ_j KL(P_j, P_0) / (M' ln M')` with
/// `M'` the number of non-zero codewords.
pub fn lower_bound_report(n: usize, sigma2: f64, seed: u64) -> Result<(BoundReport, PackingCode)> {
    if sigma2.is_nan() || sigma2 <= 0.0 {
        return Err(Error::InvalidInput("lower bound needs a positive noise variance".into()));
    }
    let m = (n as f64).powf(0.25).round() as usize;
    if m < 2 {
        return Err(Error::InvalidInput(format!("n = {n} gives m = {m}; need m ≥ 2")));
    }
    let amp = BumpParams::default_amplitude(m);
    // below 8 bits the code is too small for the bound and the report is flagged
    let code = greedy_code(m * m, seed, VgConfig::default());
    let zero = BumpParams::zeros(m, amp)?;
    let one = BumpParams::from_active(m, amp, &[(0, 0)])?;
    let bump = separation_l2(&zero, &one)?;

    let hyps = code.words.len();
    let alpha_sep = code.required_distance as f64 * bump;
    let kl_scale = n as f64 / (2.0 * sigma2);
    // components differ on the same cells: ‖f_j - f_0‖² = 2 H(θ_j, 0) · bump
    let kl_sum: f64 = code.words[1..]
        .iter()
        .map(|w| {
            let h = w.hamming(&code.words[0]) as f64;
            kl_scale * 2.0 * h * bump / 4.0
        })
        .sum();
    let big_m = hyps.saturating_sub(1) as f64;
    let degenerate = hyps < 3;
    let beta = if degenerate { f64::NAN } else { kl_sum / (big_m * big_m.ln()) };
    let bound = if degenerate {
        f64::NAN
    } else {
        let sm = big_m.sqrt();
        sm / (1.0 + sm) * (1.0 - 2.0 * beta - (2.0 * beta / big_m.ln()).sqrt())
    };
    let rate = (n as f64).powf(-0.5);
    let report = BoundReport {
        n,
        sigma2,
        seed,
        m,
        amplitude: amp,
        n_bits: m * m,
        hypotheses: hyps,
        required_distance: code.required_distance,
        min_hamming: code.min_hamming,
        single_bump_l2: bump,
        alpha_sep,
        beta_kl: beta,
        bound_value: bound,
        rate_reference: rate,
        alpha_over_rate: alpha_sep / rate,
        beta_ok: beta > 0.0 && beta < 0.125,
        code_verified: code.verified,
        code_shortfall: code.shortfall,
        degenerate,
    };
    Ok((report, code))
}

/// The family map `(ξ_θ, ξ_θ)` for a codeword viewed as an `m × m` matrix.
pub fn hypothesis(word: &Word, m: usize, amp: usize) -> Result<FamilyMap> {
    let p = BumpParams::new(m, amp, word.to_bools())?;
    family_map(p.clone(), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::pyramid_phi;

    #[test]
    fn small_codes() {
        let c8 = vg_code(8, 1).unwrap();
        assert!(c8.words.len() >= 2 && c8.verified && c8.min_hamming >= 1);
        assert!(c8.words[0].blocks.iter().all(|&b| b == 0));
        let c16 = vg_code(16, 2).unwrap();
        assert!(c16.words.len() >= 4 && c16.verified);
        for i in 0..c16.words.len() {
            for j in i + 1..c16.words.len() {
                let brute = (0..16).filter(|&k| c16.words[i].get(k) != c16.words[j].get(k)).count();
                assert!(brute >= 2);
            }
        }
        assert!(vg_code(7, 0).is_err());
    }

    #[test]
    fn single_bump_mass() {
        // ∫Φ² over the square by fine midpoint quadrature
        let r = 2000;
        let h = 2.0 / r as f64;
        let mut phi2 = 0.0;
        for a in 0..r {
            for b in 0..r {
                let u = Point2::new(-1.0 + (a as f64 + 0.5) * h, -1.0 + (b as f64 + 0.5) * h);
                phi2 += pyramid_phi(u).powi(2) * h * h;
            }
        }
        assert!((phi2 - 2.0 / 3.0).abs() < 1e-6);
        let z = BumpParams::zeros(3, 7).unwrap();
        let o = BumpParams::from_active(3, 7, &[(1, 2)]).unwrap();
        let s = separation_l2(&z, &o).unwrap();
        assert!((s - phi2 / (49.0 * 9.0)).abs() < 1e-6);
        assert_eq!(separation_l2(&o, &o).unwrap(), 0.0);
        assert!(separation_l2(&z, &BumpParams::zeros(3, 8).unwrap()).is_err());
    }

    #[test]
    fn kl_examples() {
        let law = CovariateLaw::Uniform;
        let id = crate::maps::Identity;
        assert_eq!(kl_gaussian_model(&id, &id, 100, 0.1, &law, 1000, 1).unwrap().mean, 0.0);
        let shift = crate::maps::FnMap::new(|x| x + Point2::new(0.2, 0.0));
        let k = kl_gaussian_model(&shift, &id, 100, 0.1, &law, 1000, 1).unwrap();
        assert!((k.mean - 100.0 * 0.04 / 0.2).abs() < 1e-9);
        assert!(kl_gaussian_model(&shift, &id, 100, 0.0, &law, 10, 1).is_err());
    }
}
