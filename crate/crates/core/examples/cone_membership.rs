//! Cone tests and Minkowski-sum membership in a wedge of the plane.

use evpkit::geometry::{minkowski_witness, strictly_positive_functional, PolyhedralCone, Point, Polytope};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = 1e-9;
    // y1 >= 0 and y2 >= y1 / 2
    let cone = PolyhedralCone::new(vec![vec![1.0, 0.0], vec![-0.5, 1.0]], tol)?;
    for y in [[1.0, 1.0], [2.0, 0.5], [0.0, 0.0], [-1.0, 3.0]] {
        println!("{y:?} in D: {}", cone.contains(&Point::from(y), tol));
    }
    println!("pointed: {}", cone.is_pointed());

    let h = Polytope::new(vec![Point::from([1.0, 1.0]), Point::from([2.0, 1.5])])?;
    let base = [Point::from([0.0, 0.0]), Point::from([3.0, 0.0])];
    let y = Point::from([3.5, 2.0]);
    match minkowski_witness(&y, &base, 0.5, Some(&h), &cone, tol)? {
        Some(w) => println!("{y:?} = base[{}] + 0.5·Σ λ_j h_j + d with λ = {:?}", w.base_index, w.weights),
        None => println!("{y:?} outside base + 0.5·H + D"),
    }

    let w = strictly_positive_functional(&h, &cone, tol)?.expect("0 is not in H + D");
    println!("w = {:?} lies in D⁺ and has min over H equal to 1", w.weights);
    Ok(())
}
