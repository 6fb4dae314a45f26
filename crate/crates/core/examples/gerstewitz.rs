//! The Gerstewitz functional in closed form against the bisection oracle,
//! including a direction on the boundary of the cone where values can be
//! infinite.

use evpkit::geometry::{PolyhedralCone, Point};
use evpkit::scalarization::{default_bracket, gz_bisect_oracle, GerstewitzFn};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = 1e-9;
    for k0 in [[1.0, 1.0], [1.0, 0.0]] {
        let g = GerstewitzFn::new(PolyhedralCone::orthant(2), Point::from(k0), tol)?;
        let orthogonal: Vec<usize> = (0..2).filter(|&i| g.cone().rows()[i].iter().zip(k0).map(|(a, b)| a * b).sum::<f64>() == 0.0).collect();
        // y with a_i·y > 0 on such a row is never below any t·k0
        println!("k0 = {k0:?}, rows orthogonal to k0: {orthogonal:?}");
        for y in [[0.0, 0.0], [1.0, 2.0], [-3.0, 0.5], [2.0, -1.0]] {
            let y = Point::from(y);
            let (lo, hi) = default_bracket(&g, &y);
            let oracle = gz_bisect_oracle(&g, &y, lo, hi, tol);
            println!("  ξ({:?}) = {:?}, bisection {:?}", y.coords(), g.value(&y), oracle.value);
        }
    }
    Ok(())
}
