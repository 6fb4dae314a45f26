//! Hypothesis checkers for the general principle and its linear-potential
//! corollaries, evaluated by enumeration over `S(x0)` and polytope vertices.

use serde::{Deserialize, Serialize};

use crate::scalarization::{ExtReal, Scalarizer};

use super::order::RelationMatrix;
use super::{FiniteInstance, ModelError, PerturbationFamily, Verdict};

/// Positivity thresholds on perturbation infima are `factor · τ`, so a
/// certified positive infimum stays positive after LP slack is absorbed.
pub const POSITIVITY_MARGIN_FACTOR: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub verdict: Verdict,
    /// The infimum or gap the verdict was decided on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<ExtReal>,
    /// Offending (or certifying) points, as indices.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<usize>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl AssumptionCheck {
    fn new(verdict: Verdict) -> Self {
        Self {
            verdict,
            value: None,
            witness: Vec::new(),
            lambda: None,
            note: String::new(),
        }
    }

    fn value(mut self, v: ExtReal) -> Self {
        self.value = Some(v);
        self
    }

    fn witness(mut self, w: Vec<usize>) -> Self {
        self.witness = w;
        self
    }

    fn lambda(mut self, l: usize) -> Self {
        self.lambda = Some(l);
        self
    }

    fn note(mut self, n: &str) -> Self {
        self.note = n.to_string();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub x0: usize,
    pub s_x0: Vec<usize>,
    /// `η(x) = inf ξ∘f(x)` per point.
    pub eta: Vec<ExtReal>,
    /// `ξ` is `D`-monotone (dual-cone membership for a linear `ξ`).
    pub xi_monotone: AssumptionCheck,
    pub d: AssumptionCheck,
    pub e: AssumptionCheck,
    pub e1: AssumptionCheck,
    pub e2: AssumptionCheck,
    pub e3: AssumptionCheck,
    pub f: AssumptionCheck,
}

impl AssumptionReport {
    /// (D) together with some variant of (E).
    pub fn usable(&self) -> bool {
        self.xi_monotone.verdict.accepted()
            && self.d.verdict.holds()
            && [&self.e, &self.e1, &self.e2, &self.e3].iter().any(|c| c.verdict.holds())
    }

    pub fn verdicts(&self) -> [(&'static str, Verdict); 7] {
        [
            ("xi-monotone", self.xi_monotone.verdict),
            ("D", self.d.verdict),
            ("E", self.e.verdict),
            ("E1", self.e1.verdict),
            ("E2", self.e2.verdict),
            ("E3", self.e3.verdict),
            ("F", self.f.verdict),
        ]
    }

    /// Name of the first failing requirement, for diagnostics.
    pub fn first_failure(&self) -> Option<&'static str> {
        if !self.xi_monotone.verdict.accepted() {
            return Some("xi-monotone");
        }
        if !self.d.verdict.holds() {
            return Some("D");
        }
        if !self.usable() {
            return Some("E");
        }
        None
    }
}

/// Smallest increment `ξ` gains along `F_λ(a, b)`, or `None` when no exact
/// bound is available.
fn increment(inst: &FiniteInstance, fam: &PerturbationFamily, xi: &Scalarizer, l: usize, a: usize, b: usize) -> Option<ExtReal> {
    let s = fam.set(&inst.space, l, a, b);
    xi.increment_bound(s.scale, &s.poly)
}

enum PairOutcome {
    Positive(ExtReal),
    NonPositive(ExtReal),
    Unknown,
}

/// Some `λ0` with an increment above `margin` on `F_λ0(a, b)`.
fn positive_lambda(
    inst: &FiniteInstance,
    fam: &PerturbationFamily,
    xi: &Scalarizer,
    margin: f64,
    a: usize,
    b: usize,
) -> PairOutcome {
    let mut best = None::<ExtReal>;
    let mut unknown = false;
    for l in 0..fam.lambda_count() {
        match increment(inst, fam, xi, l, a, b) {
            Some(v) if ExtReal::Finite(margin).strictly_below(v, 0.0) => return PairOutcome::Positive(v),
            Some(v) => best = Some(best.map_or(v, |b| b.max(v))),
            None => unknown = true,
        }
    }
    if unknown {
        PairOutcome::Unknown
    } else {
        PairOutcome::NonPositive(best.unwrap_or(ExtReal::Finite(0.0)))
    }
}

/// Evaluates (D), (E), (E₁), (E₂), (E₃) and records (F) as structural.
///
/// (E₁) and (E₂) coincide on finite polytopes because infima over vertices
/// are attained. (E₃) over a finite space quantifies over all distinct
/// pairs, since every positive `δ` below the minimum separation selects
/// them all.
pub fn check_assumptions(
    inst: &FiniteInstance,
    fam: &PerturbationFamily,
    rel: &RelationMatrix,
    xi: &Scalarizer,
    x0: usize,
) -> Result<AssumptionReport, ModelError> {
    let tol = inst.tol;
    let margin = POSITIVITY_MARGIN_FACTOR * tol;
    let n = inst.len();
    let s_x0 = rel.lower_section(x0);
    let eta: Vec<ExtReal> = (0..n).map(|x| xi.inf_over(inst.f(x))).collect();

    let xi_monotone = match xi {
        Scalarizer::Linear(l) => {
            let nonzero = l.weights_norm_inf() > tol;
            let dual = l.in_dual_cone(&inst.cone, tol)?;
            AssumptionCheck::new(Verdict::from_bool(nonzero && dual))
                .note(if nonzero { "dual-cone membership by LP" } else { "zero functional" })
        }
        Scalarizer::Gerstewitz { .. } => AssumptionCheck::new(Verdict::Structural).note("Gerstewitz functionals are D-monotone"),
    };

    let inf_s = ExtReal::infimum(s_x0.iter().map(|&x| eta[x]));
    let d = if s_x0.is_empty() {
        AssumptionCheck::new(Verdict::Fails).note("S(x0) is empty")
    } else {
        let argmin = s_x0.iter().copied().find(|&x| eta[x] == inf_s);
        AssumptionCheck::new(Verdict::from_bool(inf_s.is_finite()))
            .value(inf_s)
            .witness(argmin.into_iter().collect())
    };

    let mut e = AssumptionCheck::new(Verdict::Holds);
    let mut min_gap = ExtReal::PosInfinity;
    'outer: for &x in &s_x0 {
        let Some(ex) = eta[x].finite() else { continue };
        for xp in rel.lower_section(x) {
            if xp == x {
                continue;
            }
            let gap = match eta[xp] {
                ExtReal::Finite(v) => ExtReal::Finite(ex - v),
                ExtReal::PosInfinity => ExtReal::Finite(f64::NEG_INFINITY),
            };
            min_gap = min_gap.min(gap);
            if !eta[xp].strictly_below(eta[x], tol) {
                e = AssumptionCheck::new(Verdict::Fails).value(gap).witness(vec![x, xp]);
                break 'outer;
            }
        }
    }
    if e.verdict.holds() {
        e = e.value(min_gap);
    }

    let pairs_s: Vec<(usize, usize)> = s_x0
        .iter()
        .flat_map(|&x| s_x0.iter().map(move |&xp| (x, xp)))
        .filter(|(x, xp)| x != xp)
        .collect();
    let mut e1 = AssumptionCheck::new(Verdict::Holds);
    let mut e1_min = ExtReal::PosInfinity;
    for &(x, xp) in &pairs_s {
        match positive_lambda(inst, fam, xi, margin, xp, x) {
            PairOutcome::Positive(v) => e1_min = e1_min.min(v),
            PairOutcome::NonPositive(v) => {
                e1 = AssumptionCheck::new(Verdict::Fails).value(v).witness(vec![x, xp]);
                break;
            }
            PairOutcome::Unknown => {
                e1 = AssumptionCheck::new(Verdict::NotEvaluated)
                    .witness(vec![x, xp])
                    .note("no exact infimum of a nonlinear functional over this polytope");
            }
        }
    }
    if e1.verdict.holds() {
        e1 = e1.value(e1_min);
    }
    let e2 = AssumptionCheck {
        note: "vertex infima are attained, so this coincides with (E1)".to_string(),
        ..e1.clone()
    };

    let mut e3 = AssumptionCheck::new(Verdict::Fails);
    let mut e3_unknown = false;
    let mut best_lambda_value = None::<(usize, ExtReal)>;
    for l in 0..fam.lambda_count() {
        let mut inf = ExtReal::PosInfinity;
        let mut known = true;
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                match increment(inst, fam, xi, l, a, b) {
                    Some(v) => inf = inf.min(v),
                    None => known = false,
                }
            }
        }
        if !known {
            e3_unknown = true;
            continue;
        }
        if ExtReal::Finite(margin).strictly_below(inf, 0.0) {
            e3 = AssumptionCheck::new(Verdict::Holds).value(inf).lambda(l);
            break;
        }
        if best_lambda_value.is_none_or(|(_, v)| inf > v) {
            best_lambda_value = Some((l, inf));
        }
    }
    if !e3.verdict.holds() {
        if e3_unknown {
            e3 = AssumptionCheck::new(Verdict::NotEvaluated)
                .note("no exact infimum of a nonlinear functional over some member");
        } else if let Some((l, v)) = best_lambda_value {
            e3 = e3.value(v).lambda(l);
        } else {
            // a singleton space: no pair at positive distance, the infimum is +∞
            e3 = AssumptionCheck::new(Verdict::Holds).value(ExtReal::PosInfinity).lambda(0);
        }
    }

    let f = AssumptionCheck::new(Verdict::Structural).note("finite instance: decreasing chains of sections stabilize");

    Ok(AssumptionReport {
        x0,
        s_x0,
        eta,
        xi_monotone,
        d,
        e,
        e1,
        e2,
        e3,
        f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{LinearFunctional, Point, PolyhedralCone, DEFAULT_TOLERANCE as TAU};
    use crate::model::fixtures::*;
    use crate::model::relation_matrix;
    use crate::scalarization::GerstewitzFn;

    fn identity() -> Scalarizer {
        Scalarizer::Linear(LinearFunctional::new(vec![1.0]))
    }

    fn ray(gamma: f64) -> PerturbationFamily {
        PerturbationFamily::SingletonDirection {
            k0: Point::from([1.0]),
            gamma,
        }
    }

    #[test]
    fn two_point_report() {
        let inst = two_point();
        let fam = ray(1.0);
        let rel = relation_matrix(&inst, &fam).unwrap();
        let r = check_assumptions(&inst, &fam, &rel, &identity(), 0).unwrap();
        assert_eq!(r.s_x0, vec![0, 1]);
        assert_eq!(r.d.verdict, Verdict::Holds);
        assert_eq!(r.d.value, Some(ExtReal::Finite(0.0)));
        assert_eq!(r.e.verdict, Verdict::Holds);
        assert_eq!(r.e1.verdict, Verdict::Holds);
        assert_eq!(r.e3.verdict, Verdict::Holds);
        assert_eq!(r.f.verdict, Verdict::Structural);
        assert!(r.usable());
    }

    #[test]
    fn e3_closed_form_for_a_ray() {
        // ξ(k0) = 1, so the infimum over pairs at distance >= δ is γ·δ_min
        let inst = scalar_instance(&[2.0, 1.0, 0.0], &[0.0, 0.5, 2.0]);
        let fam = ray(0.4);
        let rel = relation_matrix(&inst, &fam).unwrap();
        let r = check_assumptions(&inst, &fam, &rel, &identity(), 0).unwrap();
        assert_eq!(r.e3.verdict, Verdict::Holds);
        let v = r.e3.value.unwrap().finite().unwrap();
        assert!((v - 0.4 * 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_effective_domain() {
        // ξ_{k0} with k0 = (1, 0) is +∞ on every value with a positive second coordinate
        let cone = PolyhedralCone::orthant(2);
        let space = crate::model::MetricSpace::new(labels(&["a"]), vec![vec![0.0]], TAU).unwrap();
        let map = crate::model::SetValuedMap::new(vec![vec![Point::from([0.0, 1.0])]]);
        let inst = FiniteInstance::new(cone.clone(), space, map, TAU).unwrap();
        let fam = PerturbationFamily::SingletonDirection {
            k0: Point::from([1.0, 0.0]),
            gamma: 1.0,
        };
        let rel = relation_matrix(&inst, &fam).unwrap();
        let xi = Scalarizer::gerstewitz(GerstewitzFn::new(cone, Point::from([1.0, 0.0]), TAU).unwrap());
        let r = check_assumptions(&inst, &fam, &rel, &xi, 0).unwrap();
        assert_eq!(r.d.verdict, Verdict::Fails);
        assert_eq!(r.d.value, Some(ExtReal::PosInfinity));
    }

    #[test]
    fn non_monotone_functional_is_flagged() {
        let inst = two_point();
        let fam = ray(1.0);
        let rel = relation_matrix(&inst, &fam).unwrap();
        let xi = Scalarizer::Linear(LinearFunctional::new(vec![-1.0]));
        let r = check_assumptions(&inst, &fam, &rel, &xi, 0).unwrap();
        assert_eq!(r.xi_monotone.verdict, Verdict::Fails);
        assert_eq!(r.first_failure(), Some("xi-monotone"));
    }

    #[test]
    fn e_fails_on_equal_potentials() {
        // equal values related through a zero-rate-like family: F(x, x') = {0}
        let inst = scalar_instance(&[1.0, 1.0], &[0.0, 1.0]);
        let fam = PerturbationFamily::ExtensionalFamily {
            lambdas: vec!["0".into()],
            sets: vec![vec![vec![crate::geometry::Polytope::singleton(Point::from([0.0])); 2]; 2]],
        };
        let rel = relation_matrix(&inst, &fam).unwrap();
        let r = check_assumptions(&inst, &fam, &rel, &identity(), 0).unwrap();
        assert_eq!(r.e.verdict, Verdict::Fails);
        assert_eq!(r.e1.verdict, Verdict::Fails);
        assert_eq!(r.e3.verdict, Verdict::Fails);
        assert!(!r.usable());
    }
}
