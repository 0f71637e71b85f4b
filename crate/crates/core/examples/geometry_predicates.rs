//! Orientation, segment crossing, twisted quadrilaterals and point location.

use invreg::geom::{orient, point_in_quad, polygon_area, quad_is_twisted, segments_intersect, Quad, Triangle};
use invreg::Point2;

fn main() -> invreg::Result<()> {
    let p = |a, b| Point2::new(a, b);
    println!("orient((0,0),(1,0),(0,1)) = {}", orient(p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)));
    println!(
        "diagonals of the unit square intersect: {}",
        segments_intersect(p(0.0, 0.0), p(1.0, 1.0), p(1.0, 0.0), p(0.0, 1.0))
    );

    let square = Quad::new(p(1.0, 1.0), p(1.0, -1.0), p(-1.0, -1.0), p(-1.0, 1.0));
    let bowtie = Quad::new(p(1.0, 1.0), p(-1.0, -1.0), p(1.0, -1.0), p(-1.0, 1.0));
    println!("square twisted: {}, bowtie twisted: {}", quad_is_twisted(&square), quad_is_twisted(&bowtie));
    println!("origin in square: {}", point_in_quad(p(0.0, 0.0), &square)?);
    println!("bowtie point location: {:?}", point_in_quad(p(0.0, 0.0), &bowtie).err());

    let t = Triangle::new(p(0.0, 0.0), p(2.0, 0.0), p(0.0, 2.0));
    println!("triangle area {} contains (0.5,0.5): {}", t.signed_area().abs(), t.contains(p(0.5, 0.5)));
    println!("polygon area of the square: {}", polygon_area(&square.v)?);
    Ok(())
}
