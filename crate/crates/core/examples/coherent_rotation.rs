//! Coherent rotation estimated from corner images.

use invreg::maps::{swirl_truth, AngularShift, PlanarMap, CORNERS};
use invreg::rotation::CoherentRotation;

fn main() -> invreg::Result<()> {
    for (name, f) in [("swirl", Box::new(swirl_truth()) as Box<dyn PlanarMap>), ("shift", Box::new(AngularShift::new(0.4)))] {
        let rot = CoherentRotation::from_map(&f)?;
        println!("{name}:\n{}", rot.dump());
        for c in CORNERS {
            let back = rot.forward(f.eval(c));
            println!("  corner {:?} -> {:?}", (c.x1, c.x2), (back.x1, back.x2));
        }
    }
    Ok(())
}
