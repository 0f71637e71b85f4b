//! Fit the invertible estimator to a noisy swirl sample, then evaluate and invert it.

use invreg::estimator::{FitOptions, InvertibleEstimator};
use invreg::maps::{swirl_truth, PlanarMap};
use invreg::synth::{sample_dataset, CovariateLaw};
use invreg::Point2;

fn main() -> invreg::Result<()> {
    let truth = swirl_truth();
    let data = sample_dataset(&truth, 4000, 1e-3, 7, &CovariateLaw::Uniform)?;
    let est = InvertibleEstimator::fit(&data, &FitOptions { t: Some(4), ..Default::default() })?;
    let mesh = est.mesh().expect("rotation is proper");
    println!("t = {}, twisted cells = {}, folded cells = {}", mesh.t(), mesh.twisted_count(), mesh.folded_count());
    for x in [Point2::new(0.5, 0.5), Point2::new(-0.3, 0.7), Point2::new(0.8, -0.6)] {
        let y = est.evaluate(x)?;
        let back = est.invert(y)?;
        println!("x = {:?}  f*(x) = {:?}  f^(x) = {:?}  f^-1(f^(x)) = {:?}", (x.x1, x.x2), truth.eval(x), (y.x1, y.x2), (back.x1, back.x2));
    }
    let area = est.non_invertible_measure(20_000, 1);
    println!("non-invertible area ~ {:.4} +- {:.4}", area.area, area.std_error);
    Ok(())
}
