//! Invariants that must hold on every input, checked by proptest.

use proptest::prelude::*;

use evpkit::engine::{audit_trace, solve_theorem21, verify_conclusions, EngineMode, PreorderOracle};
use evpkit::geometry::{minkowski_witness, strictly_positive_functional, PolyhedralCone, Point, Polytope};
use evpkit::io::generate::{generate, Profile, Variant};
use evpkit::io::{emit, parse, validate};
use evpkit::model::{relation_matrix, ti_check};
use evpkit::product::{pareto_min, product_relation, strict_pareto_min, FMap, ProductInstance};
use evpkit::scalarization::{ExtReal, GerstewitzFn};

const TAU: f64 = 1e-9;

fn grid_point(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-16i32..=16).prop_map(|k| f64::from(k) * 0.25), m)
}

fn variant() -> impl Strategy<Value = Variant> {
    prop::sample::select(Variant::ALL.to_vec())
}

fn profile() -> impl Strategy<Value = Profile> {
    (1usize..=7, 1usize..=3, 1usize..=3, variant(), any::<bool>()).prop_map(|(n, m, v, var, product)| {
        let mut p = Profile::new(n, m, v, var);
        p.product = product;
        p
    })
}

fn orthant_or_wedge(m: usize, wedge: bool) -> PolyhedralCone {
    if wedge && m == 2 {
        PolyhedralCone::new(vec![vec![1.0, 0.0], vec![-0.5, 1.0]], TAU).unwrap()
    } else {
        PolyhedralCone::orthant(m)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// A reported witness reconstructs the membership it claims.
    #[test]
    fn minkowski_witness_reconstructs(
        y in grid_point(2),
        base in prop::collection::vec(grid_point(2), 1..4),
        h in prop::collection::vec((0i32..=8, 0i32..=8), 1..4),
        scale in 0.0f64..2.0,
        wedge in any::<bool>(),
    ) {
        let cone = orthant_or_wedge(2, wedge);
        let verts: Vec<Point> = h.iter().map(|&(a, b)| Point::from([f64::from(a) * 0.25, f64::from(b) * 0.25])).collect();
        let poly = Polytope::new(verts).unwrap();
        let base: Vec<Point> = base.into_iter().map(Point::new).collect();
        let y = Point::new(y);
        if let Some(w) = minkowski_witness(&y, &base, scale, Some(&poly), &cone, TAU).unwrap() {
            prop_assert!((w.weights.iter().sum::<f64>() - 1.0).abs() < 1e-7);
            prop_assert!(w.weights.iter().all(|&l| l >= -1e-9));
            let mut z = y.coords().to_vec();
            for (c, b) in z.iter_mut().zip(base[w.base_index].coords()) {
                *c -= b;
            }
            for (l, v) in w.weights.iter().zip(poly.vertices()) {
                for (c, vv) in z.iter_mut().zip(v.coords()) {
                    *c -= scale * l * vv;
                }
            }
            prop_assert!(cone.contains(&Point::new(z), 1e-7));
        }
        // shifting y up by a cone element preserves membership
        let witnessed = minkowski_witness(&y, &base, scale, Some(&poly), &cone, TAU).unwrap().is_some();
        let up = Point::new(y.coords().iter().zip([1.0, 1.0]).map(|(a, b)| a + b).collect());
        if witnessed {
            prop_assert!(minkowski_witness(&up, &base, scale, Some(&poly), &cone, TAU).unwrap().is_some());
        }
    }

    /// The dual functional is nonnegative on the cone and at least one on `H`.
    #[test]
    fn positive_functional_separates(h in prop::collection::vec((0i32..=8, 0i32..=8), 1..4), wedge in any::<bool>()) {
        let cone = orthant_or_wedge(2, wedge);
        let verts: Vec<Point> = h
            .iter()
            .map(|&(a, b)| Point::from([f64::from(a) * 0.25, f64::from(b) * 0.25]))
            .filter(|v| cone.contains(v, TAU) && v.norm_inf() > 0.0)
            .collect();
        prop_assume!(!verts.is_empty());
        let poly = Polytope::new(verts).unwrap();
        let w = strictly_positive_functional(&poly, &cone, TAU).unwrap().expect("0 ∉ H + D here");
        prop_assert!(w.in_dual_cone(&cone, 1e-9).unwrap());
        let min = poly.vertices().iter().map(|v| w.value(v)).fold(f64::INFINITY, f64::min);
        prop_assert!((min - 1.0).abs() < 1e-9);
    }

    /// Translation along `k0` and monotonicity along the cone.
    #[test]
    fn gerstewitz_translation_and_monotonicity(
        y in grid_point(2),
        d in (0i32..=8, 0i32..=8),
        t in -4.0f64..4.0,
        wedge in any::<bool>(),
    ) {
        let cone = orthant_or_wedge(2, wedge);
        let g = GerstewitzFn::new(cone.clone(), Point::from([1.0, 1.0]), TAU).unwrap();
        let y = Point::new(y);
        let v = g.value(&y).finite().unwrap();
        let moved = Point::new(y.coords().iter().map(|c| c + t).collect());
        prop_assert!((g.value(&moved).finite().unwrap() - v - t).abs() < 1e-9);
        let d = Point::from([f64::from(d.0) * 0.25, f64::from(d.1) * 0.25]);
        prop_assume!(cone.contains(&d, 0.0));
        let up = Point::new(y.coords().iter().zip(d.coords()).map(|(a, b)| a + b).collect());
        prop_assert!(v <= g.value(&up).finite().unwrap() + 1e-9);
        prop_assert_eq!(g.value(&Point::zeros(2)), ExtReal::Finite(0.0));
    }

    /// validate(emit(b)) == b, and the text form parses back.
    #[test]
    fn instance_round_trip(seed in 0u64..10_000, p in profile()) {
        let b = validate(&generate(seed, &p), None).unwrap();
        let file = emit(&b);
        let text = serde_json::to_string(&file).unwrap();
        let back = validate(&parse(&text).unwrap(), None).unwrap();
        prop_assert_eq!(back, b);
    }

    /// `⪯` is reflexive; where the triangle hypothesis holds it is transitive.
    #[test]
    fn relation_reflexive_and_transitive_under_ti(seed in 0u64..10_000, p in profile()) {
        let b = validate(&generate(seed, &p), None).unwrap();
        let fam = b.family.as_ref().unwrap();
        let rel = relation_matrix(&b.instance, fam).unwrap();
        for x in 0..b.instance.len() {
            prop_assert!(rel.holds(x, x));
        }
        if ti_check(&b.instance, fam).unwrap().holds {
            prop_assert_eq!(rel.transitivity_violation(), None);
        }
    }

    /// Every engine run on a transitive relation ends in a strongly minimal
    /// point of its start's section, with an auditable trace.
    #[test]
    fn engine_conclusions(rel in prop::collection::vec(any::<bool>(), 36), eta in prop::collection::vec(0i32..8, 6), x0 in 0usize..6) {
        let n = 6;
        // transitive closure of a random reflexive relation that only steps
        // down in eta, so eta is monotone on it
        let mut r: Vec<Vec<bool>> = (0..n).map(|a| (0..n).map(|c| a == c || (rel[a * n + c] && eta[a] < eta[c])).collect()).collect();
        for k in 0..n {
            for a in 0..n {
                for c in 0..n {
                    if r[a][k] && r[k][c] {
                        r[a][c] = true;
                    }
                }
            }
        }
        let succ = (0..n).map(|x| (0..n).filter(|&z| r[z][x]).collect()).collect();
        let labels = (0..n).map(|i| format!("p{i}")).collect();
        let o = PreorderOracle::new(labels, succ, eta.iter().map(|&e| ExtReal::Finite(f64::from(e))).collect()).unwrap();
        let (xhat, trace) = solve_theorem21(&o, x0, EngineMode::Faithful).unwrap();
        prop_assert!(verify_conclusions(&o, x0, xhat).holds());
        prop_assert!(audit_trace(&o, &trace).is_ok());
        prop_assert!(r[xhat][x0]);
    }

    /// `SMin ⊆ Min`, and the two coincide under a pointed cone.
    #[test]
    fn pareto_minima_nest(pts in prop::collection::vec(grid_point(2), 1..10), flat in any::<bool>()) {
        let cone = if flat {
            PolyhedralCone::new(vec![vec![1.0, 0.0]], TAU).unwrap()
        } else {
            PolyhedralCone::orthant(2)
        };
        let pts: Vec<Point> = pts.into_iter().map(Point::new).collect();
        let min = pareto_min(&pts, &cone, TAU);
        let smin = strict_pareto_min(&pts, &cone, TAU);
        prop_assert!(smin.iter().all(|i| min.contains(i)));
        if !flat {
            prop_assert_eq!(smin, min);
        }
        prop_assert!(!pareto_min(&pts, &PolyhedralCone::orthant(2), TAU).is_empty());
    }

    /// `⪯_F` is a preorder and `⪯_F*` is antisymmetric on graph products.
    #[test]
    fn product_orders(seed in 0u64..10_000, n in 1usize..=5, m in 1usize..=2, rate in 1u32..=4) {
        let b = validate(&generate(seed, &Profile::new(n, m, 3, Variant::Singleton)), None).unwrap();
        let pi = ProductInstance::graph_of(&b.instance, 0, 0).unwrap();
        let fm = FMap::ray(&b.instance.cone, b.ray().unwrap(), f64::from(rate) * 0.25, TAU).unwrap();
        let f = product_relation(&pi, &fm, false).unwrap();
        let fs = product_relation(&pi, &fm, true).unwrap();
        let np = pi.len();
        for p in 0..np {
            prop_assert!(f[p][p] && fs[p][p]);
            for q in 0..np {
                prop_assert!(!fs[p][q] || f[p][q]);
                prop_assert!(p == q || !(fs[p][q] && fs[q][p]));
                for r in 0..np {
                    prop_assert!(!(f[p][q] && f[q][r]) || f[p][r]);
                }
            }
        }
    }
}
