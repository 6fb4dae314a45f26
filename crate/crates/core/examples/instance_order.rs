//! Builds a finite instance, its perturbed preorder and the triangle check.

use evpkit::geometry::{PolyhedralCone, Point, Polytope};
use evpkit::model::{relation_matrix, s_set, ti_check, FiniteInstance, MetricSpace, PerturbationFamily, SetValuedMap};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = 1e-9;
    let labels: Vec<String> = ["a", "b", "c", "d"].map(String::from).to_vec();
    let space = MetricSpace::from_coordinates(labels, &[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![3.0, 0.0]], tol)?;
    let f = SetValuedMap::new(vec![
        vec![Point::from([3.0, 3.0])],
        vec![Point::from([2.0, 2.5]), Point::from([3.0, 1.0])],
        vec![Point::from([1.0, 1.0])],
        vec![Point::from([0.5, 2.5])],
    ]);
    let inst = FiniteInstance::new(PolyhedralCone::orthant(2), space, f, tol)?;
    let fam = PerturbationFamily::PolytopeDirection {
        h: Polytope::new(vec![Point::from([1.0, 0.5]), Point::from([0.5, 1.0])])?,
        gamma: 0.5,
    };
    let rel = relation_matrix(&inst, &fam)?;
    for x in 0..inst.len() {
        let below: Vec<&str> = s_set(&inst, &fam, x)?.into_iter().map(|z| inst.label(z)).collect();
        println!("S({}) = {below:?}", inst.label(x));
    }
    println!("related pairs: {}", rel.count());
    let ti = ti_check(&inst, &fam)?;
    println!("triangle condition holds: {}", ti.holds);
    println!("transitivity violation: {:?}", rel.transitivity_violation());
    Ok(())
}
