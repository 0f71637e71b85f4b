//! Varshamov–Gilbert packing and the resulting lower-bound report.

use invreg::minimax::{lower_bound_report, vg_code};

fn main() -> invreg::Result<()> {
    let code = vg_code(64, 1)?;
    println!(
        "N = 64: {} words, min Hamming {} (required {}), verified {}",
        code.words.len(),
        code.min_hamming,
        code.required_distance,
        code.verified
    );
    for n in [256, 4096, 65536] {
        let (r, _) = lower_bound_report(n, 1.0, 0)?;
        println!(
            "n = {n:6}: m = {:2}, alpha_sep = {:.3e}, alpha/n^-1/2 = {:.4}, beta = {:.3e} (ok {}), bound = {:.3}",
            r.m, r.alpha_sep, r.alpha_over_rate, r.beta_kl, r.beta_ok, r.bound_value
        );
    }
    Ok(())
}
