//! Pareto minima of an image set and the product-space solvers on its graph.

use evpkit::io::builtin::pareto_demo;
use evpkit::io::validate;
use evpkit::product::{domination_check, pareto_min, solve_minimal_point, solve_pareto_evp, solve_strict_minimal, strict_pareto_min};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let b = validate(&pareto_demo(), None)?;
    let inst = &b.instance;
    let image = inst.map.image();
    let min = pareto_min(&image, &inst.cone, inst.tol);
    let smin = strict_pareto_min(&image, &inst.cone, inst.tol);
    println!("image: {:?}", image.iter().map(|p| p.coords().to_vec()).collect::<Vec<_>>());
    println!("Min indices {min:?}, SMin indices {smin:?}");
    println!("every point dominated by a minimum: {}", domination_check(&image, &inst.cone, true, inst.tol).holds);

    let pi = b.product.as_ref().expect("product section");
    let fm = b.fmap.as_ref().expect("f map");
    for (name, cert) in [
        ("5.1", solve_minimal_point(pi, fm)),
        ("5.2", solve_strict_minimal(pi, fm)),
        ("5.6", solve_pareto_evp(pi, &b.ray().expect("ray"), 0.75, 3.0)),
    ] {
        match cert {
            Ok(c) => println!("{name}: ({}, {:?}) -> ({}, {:?}), certified {}", c.start, c.y0.coords(), c.xhat, c.yhat.coords(), c.certified()),
            Err(e) => println!("{name}: {e}"),
        }
    }
    Ok(())
}
