//! A uniformly accurate but non-injective estimator has inverse risk at least 4.

use invreg::maps::Identity;
use invreg::pilot::sawtooth_estimator;
use invreg::risk::{inverse_risk, RiskOptions};

fn main() -> invreg::Result<()> {
    for teeth in [10, 100, 1000] {
        let est = sawtooth_estimator(teeth)?;
        let rep = inverse_risk(&est, &Identity, &RiskOptions { mc_samples: 10_000, ..Default::default() })?;
        println!(
            "D = {teeth:4}: sup error {:.5} (bound {:.5}), total inverse risk {:.3}",
            rep.sup_error,
            2.0 / teeth as f64,
            rep.total_inverse_risk
        );
    }
    Ok(())
}
