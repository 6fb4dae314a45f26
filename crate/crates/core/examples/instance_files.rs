//! Generates an instance, writes it as JSON, reads it back, and runs the
//! lower-monotonicity and epigraph probes on the shipped counterexample.

use evpkit::geometry::Point;
use evpkit::io::builtin::example41;
use evpkit::io::generate::{generate, Profile, Variant};
use evpkit::io::{emit, load_validate, validate};
use evpkit::model::probes::{epi_closed_probe, slm_probe};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("evpkit-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("generated.json");
    let file = generate(42, &Profile::new(6, 2, 2, Variant::Extensional));
    std::fs::write(&path, serde_json::to_string_pretty(&file)?)?;
    let bundle = load_validate(&path)?;
    println!("{}: {} points in dimension {}, tolerance {}", path.display(), bundle.instance.len(), bundle.instance.dim(), bundle.tol());
    assert_eq!(validate(&emit(&bundle), None)?, bundle);
    println!("emit/validate round trip is exact");

    for n in [4, 16] {
        let b = validate(&example41(n)?, None)?;
        let probes = b.probes.as_ref().expect("probes");
        let pts = |raw: &[Vec<f64>]| raw.iter().cloned().map(Point::new).collect::<Vec<_>>();
        let slm = probes.slm.as_ref().expect("slm");
        let chain: Vec<Vec<Point>> = slm.chain.iter().map(|v| pts(v)).collect();
        let lower = slm_probe(&chain, &pts(&slm.limit), &b.instance.cone, b.instance.tol)?;
        let epi = probes.epi.as_ref().expect("epi");
        let echain: Vec<(Vec<Point>, Point)> = epi.chain.iter().map(|(v, y)| (pts(v), Point::new(y.clone()))).collect();
        let closed = epi_closed_probe(&echain, &pts(&epi.limit_values), &Point::new(epi.limit_y.clone()), &b.instance.cone, b.instance.tol)?;
        println!("example41({n}): lower monotone {lower}, closed epigraph {closed}");
    }
    Ok(())
}
