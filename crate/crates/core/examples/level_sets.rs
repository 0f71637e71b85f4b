//! Level sets of the swirl truth and their Hausdorff drift between levels.

use invreg::maps::{level_set, swirl_truth};
use invreg::risk::levelset_lipschitz_diag;

fn main() -> invreg::Result<()> {
    let f = swirl_truth();
    for level in [-0.5, 0.0, 0.5] {
        let ls = level_set(&f, 1, level, 201)?;
        let pts: usize = ls.polylines.iter().map(Vec::len).sum();
        println!("component 1 at {level:+.1}: {} polylines, {pts} points", ls.polylines.len());
    }
    let pairs = [(-0.5, -0.3), (0.1, 0.3), (0.4, 0.6)];
    let ratio = levelset_lipschitz_diag(&f, 1, &pairs, 201)?;
    println!("max Hausdorff distance per unit level change: {ratio:.3}");
    Ok(())
}
