//! Heatmaps of the truth and of the fitted estimator, written as CSV and PGM.

use invreg::estimator::{FitOptions, InvertibleEstimator};
use invreg::heatmap::Heatmap;
use invreg::maps::{swirl_truth, PlanarMap};
use invreg::synth::{sample_dataset, CovariateLaw};

fn main() -> invreg::Result<()> {
    let dir = std::env::temp_dir().join("invreg_heatmaps");
    std::fs::create_dir_all(&dir).map_err(|e| invreg::Error::InvalidInput(e.to_string()))?;
    let truth = swirl_truth();
    let data = sample_dataset(&truth, 10_000, 1e-3, 1, &CovariateLaw::Uniform)?;
    let est = InvertibleEstimator::fit(&data, &FitOptions { t: Some(5), ..Default::default() })?;
    let f_star = Heatmap::sample(101, |x| truth.eval(x).x1)?;
    let f_hat = Heatmap::sample(101, |x| est.eval(x).x1)?;
    f_star.write_pgm(dir.join("f_star_1.pgm"), &["truth, component 1".into()])?;
    f_hat.write_pgm(dir.join("f_hat_1.pgm"), &["estimate, t = 5, component 1".into()])?;
    f_hat.write_csv(dir.join("f_hat_1.csv"), &[])?;
    println!("max cell difference {:.3}; files in {}", f_star.max_abs_diff(&f_hat), dir.display());
    Ok(())
}
