//! Grid certification of invertibility for random bump-family maps.

use invreg::maps::{check_invertible_on_grid, family_map, BumpParams};
use invreg::rng::stream;

fn main() -> invreg::Result<()> {
    let mut rng = stream(42);
    for i in 0..3 {
        let p1 = BumpParams::random(3, 7, &mut rng)?;
        let p2 = BumpParams::random(3, 7, &mut rng)?;
        let f = family_map(p1, p2)?;
        let rep = check_invertible_on_grid(&f, 201, 100)?;
        println!(
            "map {i}: unique {}/{} missing {} multiple {}",
            rep.unique_count, rep.tested_outputs, rep.missing_count, rep.multiple_count
        );
    }
    Ok(())
}
