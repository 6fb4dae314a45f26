//! Every single-valued-direction solver on one instance, with its
//! certificate verdicts.

use evpkit::evp::{solve_evp_approx, solve_evp_general, solve_evp_ha, solve_evp_setdir, EvpCertificate, HaPremise};
use evpkit::geometry::{strictly_positive_functional, Point, Polytope};
use evpkit::io::builtin::chain;
use evpkit::io::validate;
use evpkit::scalarization::Scalarizer;

fn show(name: &str, cert: Result<EvpCertificate, evpkit::evp::SolverError>) {
    match cert {
        Ok(c) => {
            let verdicts: Vec<String> = c.conclusions.iter().map(|k| format!("{}={:?}", k.name, k.verdict)).collect();
            println!("{name}: {} -> {} at distance {} [{}]", c.x0, c.xhat, c.distance, verdicts.join(", "));
        }
        Err(e) => println!("{name}: {e}"),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let b = validate(&chain(), None)?;
    let inst = &b.instance;
    let fam = b.family.as_ref().expect("chain has a family");
    let x0 = b.params.x0;
    let (eps, lambda, gamma) = (3.0, 6.0, 0.5);
    let k0 = Point::from([1.0]);
    let h = Polytope::singleton(k0.clone());
    let xi = Scalarizer::Linear(strictly_positive_functional(&h, &inst.cone, inst.tol)?.expect("positive"));
    show("3.1", solve_evp_general(inst, fam, &xi, x0));
    show("3.5", solve_evp_ha(inst, &k0, eps, lambda, x0, HaPremise::Pointwise));
    show("3.6", solve_evp_ha(inst, &k0, eps, lambda, x0, HaPremise::AgainstImage));
    show("4.1", solve_evp_setdir(inst, &h, gamma, x0, true));
    show("4.2", solve_evp_setdir(inst, &h, gamma, x0, false));
    show("4.5", solve_evp_approx(inst, &h, eps, gamma, x0, false));
    show("4.6", solve_evp_approx(inst, &h, eps, gamma, x0, true));
    // with the smaller ε, b already lies below a by more than ε·k0
    show("3.5 from a with ε = 0.5", solve_evp_ha(inst, &k0, 0.5, 1.0, 0, HaPremise::Pointwise));
    Ok(())
}
