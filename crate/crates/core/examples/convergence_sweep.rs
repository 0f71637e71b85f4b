//! A small risk sweep over sample sizes with a log-log slope fit.

use invreg::cli::{cmd_sweep, ExperimentConfig, Truth};

fn main() {
    let dir = std::env::temp_dir().join("invreg_convergence_sweep");
    let cfg = ExperimentConfig {
        truth: Truth::Swirl,
        n_list: vec![256, 1024, 4096],
        replicates: 2,
        mc_samples: 10_000,
        output_dir: dir.clone(),
        ..Default::default()
    };
    match cmd_sweep(&cfg) {
        Ok(res) => {
            for (n, m) in &res.means {
                println!("n = {n:5}: mean total inverse risk {m:.4e}");
            }
            match res.fit {
                Some(f) => println!("slope {:.3} +- {:.3} (reference -0.5)", f.slope, f.slope_std_error),
                None => println!("slope fit degenerate"),
            }
            println!("rows written to {}", dir.join("sweep.csv").display());
        }
        Err(e) => eprintln!("sweep failed: {e}"),
    }
}
