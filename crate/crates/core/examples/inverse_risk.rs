//! Forward and inverse risk of a fitted estimator.

use invreg::estimator::{FitOptions, InvertibleEstimator};
use invreg::maps::SmoothWarp;
use invreg::risk::{inverse_risk, RiskOptions};
use invreg::synth::{sample_dataset, CovariateLaw};

fn main() -> invreg::Result<()> {
    let truth = SmoothWarp::default();
    let data = sample_dataset(&truth, 4000, 1e-3, 3, &CovariateLaw::Uniform)?;
    let est = InvertibleEstimator::fit(&data, &FitOptions::default())?;
    let rep = inverse_risk(&est, &truth, &RiskOptions { mc_samples: 20_000, seed: 9, ..Default::default() })?;
    print!("{}", rep.to_kv());
    Ok(())
}
