//! Variational-principle front-ends. Each solver checks the hypotheses it
//! can decide, builds the order and the potential, runs the engine, and then
//! re-derives every named conclusion with fresh membership LPs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{solve_theorem21, EngineError, EngineMode, EngineTrace, PreorderOracle};
use crate::geometry::{minkowski_member, strictly_positive_functional, Point, Polytope};
use crate::model::{
    check_assumptions, eps_h_efficient, relation_matrix, set_included, ti_check, AssumptionReport, FiniteInstance,
    ModelError, PerturbationFamily, ProbeError, QuasiMetric, TiReport, Verdict,
};
use crate::scalarization::{GerstewitzFn, ScalarizationError, Scalarizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremTag {
    #[serde(rename = "3.1")]
    T3_1,
    #[serde(rename = "3.5")]
    T3_5,
    #[serde(rename = "3.6")]
    T3_6,
    #[serde(rename = "4.1")]
    T4_1,
    #[serde(rename = "4.2")]
    T4_2,
    #[serde(rename = "4.4")]
    T4_4,
    #[serde(rename = "4.5")]
    T4_5,
    #[serde(rename = "4.6")]
    T4_6,
    #[serde(rename = "5.1")]
    T5_1,
    #[serde(rename = "5.2")]
    T5_2,
    #[serde(rename = "5.6")]
    T5_6,
}

impl TheoremTag {
    pub const ALL: [TheoremTag; 11] = [
        TheoremTag::T3_1,
        TheoremTag::T3_5,
        TheoremTag::T3_6,
        TheoremTag::T4_1,
        TheoremTag::T4_2,
        TheoremTag::T4_4,
        TheoremTag::T4_5,
        TheoremTag::T4_6,
        TheoremTag::T5_1,
        TheoremTag::T5_2,
        TheoremTag::T5_6,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremTag::T3_1 => "3.1",
            TheoremTag::T3_5 => "3.5",
            TheoremTag::T3_6 => "3.6",
            TheoremTag::T4_1 => "4.1",
            TheoremTag::T4_2 => "4.2",
            TheoremTag::T4_4 => "4.4",
            TheoremTag::T4_5 => "4.5",
            TheoremTag::T4_6 => "4.6",
            TheoremTag::T5_1 => "5.1",
            TheoremTag::T5_2 => "5.2",
            TheoremTag::T5_6 => "5.6",
        }
    }

    /// Tags handled on the product space rather than on `X`.
    pub fn is_product(self) -> bool {
        matches!(self, TheoremTag::T5_1 | TheoremTag::T5_2 | TheoremTag::T5_6)
    }
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown theorem tag {0:?}")]
pub struct UnknownTheorem(pub String);

impl FromStr for TheoremTag {
    type Err = UnknownTheorem;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TheoremTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| UnknownTheorem(s.to_string()))
    }
}

/// Why `x` fails to precede `x̂`: value `value` of `f(x̂)` escapes
/// `f(x) + F_λ(x, x̂) + D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub x: String,
    pub lambda: usize,
    pub value: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Number of membership LPs that were solved and held.
    Inclusion { memberships: usize },
    /// A value of `at` outside the required set for index `lambda`.
    Uncovered { at: String, lambda: usize, value: usize },
    Separations { entries: Vec<Separation> },
    /// A point other than `x̂` that still precedes it.
    Related { x: String },
    /// An offending pair of a product graph.
    Pair { index: usize, x: String },
    /// `contradiction` is evaluated only when `d` exceeds the bound; it is the
    /// inclusion the premise forbids.
    Distance {
        d: f64,
        bound: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        contradiction: Option<bool>,
    },
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conclusion {
    pub name: String,
    pub statement: String,
    pub verdict: Verdict,
    pub witness: Witness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PremiseForm {
    /// `f(x0) ⊄ f(x) + εk0 + D` for every `x`.
    Pointwise,
    /// `f(x0) ⊄ f(X) + εk0 + D`.
    AgainstImage,
    /// Some `y0 ∈ f(x0)` outside `f(X) + εH + D`.
    EpsHEfficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PremiseRecord {
    pub form: PremiseForm,
    pub epsilon: f64,
    /// Index into `f(x0)` of the retained witness `y0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvpCertificate {
    pub theorem: TheoremTag,
    pub x0: String,
    pub xhat: String,
    pub xhat_index: usize,
    pub distance: f64,
    pub conclusions: Vec<Conclusion>,
    pub assumptions: AssumptionReport,
    pub ti: TiReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub premise: Option<PremiseRecord>,
    pub family: PerturbationFamily,
    pub scalarizer: Scalarizer,
    pub trace: EngineTrace,
    pub structural: Vec<String>,
}

impl EvpCertificate {
    /// Every conclusion holds outright.
    pub fn certified(&self) -> bool {
        self.conclusions.iter().all(|c| c.verdict.holds())
    }

    pub fn conclusion(&self, name: &str) -> Option<&Conclusion> {
        self.conclusions.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("hypothesis {name} fails: {detail}")]
    Hypothesis { name: String, detail: String },
    #[error("premise fails: {detail}")]
    Premise {
        detail: String,
        #[source]
        counterexample: Option<Counterexample>,
    },
    #[error(transparent)]
    Input(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("counterexample at {0:?}")]
pub struct Counterexample(pub String);

impl SolverError {
    /// Hypothesis and premise failures, as opposed to malformed input.
    pub fn is_hypothesis(&self) -> bool {
        !matches!(self, SolverError::Input(_))
    }

    fn hypothesis(name: &str, detail: impl Into<String>) -> Self {
        SolverError::Hypothesis {
            name: name.to_string(),
            detail: detail.into(),
        }
    }
}

impl From<EngineError> for SolverError {
    fn from(e: EngineError) -> Self {
        let name = match e {
            EngineError::HypothesisA(_) => "A",
            EngineError::HypothesisB { .. } => "B",
            EngineError::EmptyStart => "S(x0) nonempty",
            _ => "engine input",
        };
        SolverError::hypothesis(name, e.to_string())
    }
}

impl From<ScalarizationError> for SolverError {
    fn from(e: ScalarizationError) -> Self {
        SolverError::hypothesis("k0", e.to_string())
    }
}

impl From<ProbeError> for SolverError {
    fn from(e: ProbeError) -> Self {
        match e {
            ProbeError::Model(m) => SolverError::Input(m),
            other => SolverError::hypothesis("premise input", other.to_string()),
        }
    }
}

impl From<crate::geometry::GeometryError> for SolverError {
    fn from(e: crate::geometry::GeometryError) -> Self {
        SolverError::Input(e.into())
    }
}

const STRUCTURAL_NOTES: [&str; 2] = [
    "value sets are finite and D is polyhedral, so lower monotonicity and closedness of values hold",
    "f(X) lies in M + D with M the finite image",
];

fn check_x0(inst: &FiniteInstance, x0: usize) -> Result<(), SolverError> {
    if x0 >= inst.len() {
        return Err(ModelError::UnknownLabel(format!("#{x0}")).into());
    }
    Ok(())
}

/// `f(x0) ⊂ f(x̂) + F_λ(x̂, x0) + D` for every `λ`, by LP.
pub fn verify_inclusion_a(
    inst: &FiniteInstance,
    fam: &PerturbationFamily,
    x0: usize,
    xhat: usize,
) -> Result<Conclusion, SolverError> {
    let mut memberships = 0;
    for l in 0..fam.lambda_count() {
        let s = fam.set(&inst.space, l, xhat, x0);
        for (k, y) in inst.f(x0).iter().enumerate() {
            if !minkowski_member(y, inst.f(xhat), s.scale, Some(&s.poly), &inst.cone, inst.tol)? {
                return Ok(Conclusion {
                    name: "a".into(),
                    statement: "f(x0) ⊂ f(x̂) + F(x̂, x0) + D".into(),
                    verdict: Verdict::Fails,
                    witness: Witness::Uncovered {
                        at: inst.label(x0).to_string(),
                        lambda: l,
                        value: k,
                    },
                });
            }
            memberships += 1;
        }
    }
    Ok(Conclusion {
        name: "a".into(),
        statement: "f(x0) ⊂ f(x̂) + F(x̂, x0) + D".into(),
        verdict: Verdict::Holds,
        witness: Witness::Inclusion { memberships },
    })
}

/// For each `x ≠ x̂`, some `λ` and some value of `f(x̂)` outside
/// `f(x) + F_λ(x, x̂) + D`.
pub fn verify_separation_b(inst: &FiniteInstance, fam: &PerturbationFamily, xhat: usize) -> Result<Conclusion, SolverError> {
    let statement = "f(x̂) ⊄ f(x) + F(x, x̂) + D for every x ≠ x̂".to_string();
    let mut entries = Vec::new();
    for x in (0..inst.len()).filter(|&x| x != xhat) {
        let mut found = None;
        'search: for l in 0..fam.lambda_count() {
            let s = fam.set(&inst.space, l, x, xhat);
            for (k, y) in inst.f(xhat).iter().enumerate() {
                if !minkowski_member(y, inst.f(x), s.scale, Some(&s.poly), &inst.cone, inst.tol)? {
                    found = Some(Separation {
                        x: inst.label(x).to_string(),
                        lambda: l,
                        value: k,
                    });
                    break 'search;
                }
            }
        }
        match found {
            Some(sep) => entries.push(sep),
            None => {
                return Ok(Conclusion {
                    name: "b".into(),
                    statement,
                    verdict: Verdict::Fails,
                    witness: Witness::Related {
                        x: inst.label(x).to_string(),
                    },
                })
            }
        }
    }
    let witness = if entries.is_empty() {
        Witness::Vacuous
    } else {
        Witness::Separations { entries }
    };
    Ok(Conclusion {
        name: "b".into(),
        statement,
        verdict: Verdict::Holds,
        witness,
    })
}

/// `d <= bound` (non-strict) or `d < bound` (strict, with a `Boundary`
/// band of width `tol` around the bound).
pub fn distance_verdict(d: f64, bound: f64, strict: bool, tol: f64) -> Verdict {
    if strict {
        if d < bound - tol {
            Verdict::Holds
        } else if d <= bound + tol {
            Verdict::Boundary
        } else {
            Verdict::Fails
        }
    } else {
        Verdict::from_bool(d <= bound + tol)
    }
}

struct Solved {
    xhat: usize,
    report: AssumptionReport,
    ti: TiReport,
    trace: EngineTrace,
}

/// Order, hypotheses and engine for a validated family and potential.
fn run_principle(
    inst: &FiniteInstance,
    fam: &PerturbationFamily,
    xi: &Scalarizer,
    x0: usize,
) -> Result<Solved, SolverError> {
    check_x0(inst, x0)?;
    fam.validate(inst)?;
    if xi.dim() != inst.dim() {
        return Err(ModelError::Geometry(crate::geometry::GeometryError::DimensionMismatch {
            expected: inst.dim(),
            found: xi.dim(),
        })
        .into());
    }
    let ti = ti_check(inst, fam)?;
    if let Some((a, b, c, l)) = ti.violation {
        return Err(SolverError::hypothesis(
            "TI",
            format!(
                "F[{l}]({}, {}) is not covered through {}",
                inst.label(a),
                inst.label(c),
                inst.label(b)
            ),
        ));
    }
    let rel = relation_matrix(inst, fam)?;
    let report = check_assumptions(inst, fam, &rel, xi, x0)?;
    if let Some(name) = report.first_failure() {
        let check = match name {
            "xi-monotone" => &report.xi_monotone,
            "D" => &report.d,
            _ => &report.e,
        };
        return Err(SolverError::hypothesis(
            name,
            format!("verdict {:?}, witness {:?}", check.verdict, check.witness),
        ));
    }
    let oracle = PreorderOracle::new(inst.space.labels().to_vec(), rel.sections(), report.eta.clone())?;
    let (xhat, trace) = solve_theorem21(&oracle, x0, EngineMode::Faithful)?;
    Ok(Solved { xhat, report, ti, trace })
}

fn certificate(
    theorem: TheoremTag,
    inst: &FiniteInstance,
    fam: PerturbationFamily,
    xi: Scalarizer,
    x0: usize,
    solved: Solved,
    premise: Option<PremiseRecord>,
    extra: Vec<Conclusion>,
) -> Result<EvpCertificate, SolverError> {
    let xhat = solved.xhat;
    let mut conclusions = vec![verify_inclusion_a(inst, &fam, x0, xhat)?, verify_separation_b(inst, &fam, xhat)?];
    conclusions.extend(extra);
    Ok(EvpCertificate {
        theorem,
        x0: inst.label(x0).to_string(),
        xhat: inst.label(xhat).to_string(),
        xhat_index: xhat,
        distance: inst.space.d(x0, xhat),
        conclusions,
        assumptions: solved.report,
        ti: solved.ti,
        premise,
        family: fam,
        scalarizer: xi,
        trace: solved.trace,
        structural: STRUCTURAL_NOTES.iter().map(|s| s.to_string()).collect(),
    })
}

/// The general principle for an arbitrary family and a `D`-monotone `ξ`,
/// with `η(x) = inf ξ∘f(x)`.
pub fn solve_evp_general(
    inst: &FiniteInstance,
    fam: &PerturbationFamily,
    xi: &Scalarizer,
    x0: usize,
) -> Result<EvpCertificate, SolverError> {
    let solved = run_principle(inst, fam, xi, x0)?;
    certificate(TheoremTag::T3_1, inst, fam.clone(), xi.clone(), x0, solved, None, Vec::new())
}

/// How the premise of the ray solver is quantified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaPremise {
    Pointwise,
    AgainstImage,
}

/// Distance bound after the contradiction step: when `d > bound`, `(a)` and
/// `bound·rate = ε` put `y0` into `f(x̂) + εH + D`, which the premise forbids.
fn bound_conclusion(
    inst: &FiniteInstance,
    x0: usize,
    xhat: usize,
    bound: f64,
    strict: bool,
    epsilon: f64,
    h: &Polytope,
    y0: Option<usize>,
) -> Result<Conclusion, SolverError> {
    let d = inst.space.d(x0, xhat);
    let verdict = distance_verdict(d, bound, strict, inst.tol);
    let contradiction = if verdict == Verdict::Fails {
        let values: Vec<Point> = match y0 {
            Some(k) => vec![inst.f(x0)[k].clone()],
            None => inst.f(x0).to_vec(),
        };
        Some(set_included(&values, inst.f(xhat), epsilon, Some(h), &inst.cone, inst.tol)?)
    } else {
        None
    };
    let statement = if strict { "d(x̂, x0) < ε / γ" } else { "d(x̂, x0) <= bound" };
    Ok(Conclusion {
        name: "c".into(),
        statement: statement.into(),
        verdict,
        witness: Witness::Distance { d, bound, contradiction },
    })
}

/// The ray corollaries: `F(x, x') = (ε/λ) d(x, x') {k0}`.
///
/// With a pointwise premise `ξ` is a linear functional in `D⁺` with
/// `ξ(k0) = 1`; against the image, `ξ(y) = ξ_k0(y - y0)` for the premise
/// witness `y0`.
pub fn solve_evp_ha(
    inst: &FiniteInstance,
    k0: &Point,
    epsilon: f64,
    lambda: f64,
    x0: usize,
    premise: HaPremise,
) -> Result<EvpCertificate, SolverError> {
    check_x0(inst, x0)?;
    for (what, v) in [("epsilon", epsilon), ("lambda", lambda)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(ModelError::NonPositive { what, value: v }.into());
        }
    }
    let fam = PerturbationFamily::SingletonDirection {
        k0: k0.clone(),
        gamma: epsilon / lambda,
    };
    fam.validate(inst)?;
    let h = Polytope::singleton(k0.clone());
    let (theorem, record, xi) = match premise {
        HaPremise::Pointwise => {
            for x in 0..inst.len() {
                if set_included(inst.f(x0), inst.f(x), epsilon, Some(&h), &inst.cone, inst.tol)? {
                    return Err(SolverError::Premise {
                        detail: format!("f(x0) ⊂ f({}) + εk0 + D", inst.label(x)),
                        counterexample: Some(Counterexample(inst.label(x).to_string())),
                    });
                }
            }
            let xi = strictly_positive_functional(&h, &inst.cone, inst.tol)?
                .ok_or_else(|| SolverError::hypothesis("k0", "no functional in the dual cone is positive on k0"))?;
            let record = PremiseRecord {
                form: PremiseForm::Pointwise,
                epsilon,
                y0_index: None,
            };
            (TheoremTag::T3_5, record, Scalarizer::Linear(xi))
        }
        HaPremise::AgainstImage => {
            let k = image_premise(inst, x0, epsilon, &h)?;
            let g = GerstewitzFn::new(inst.cone.clone(), k0.clone(), inst.tol)?;
            let record = PremiseRecord {
                form: PremiseForm::AgainstImage,
                epsilon,
                y0_index: Some(k),
            };
            (TheoremTag::T3_6, record, Scalarizer::gerstewitz_at(g, inst.f(x0)[k].clone()))
        }
    };
    let solved = run_principle(inst, &fam, &xi, x0)?;
    let xhat = solved.xhat;
    let c = bound_conclusion(inst, x0, xhat, lambda, false, epsilon, &h, record.y0_index)?;
    certificate(theorem, inst, fam, xi, x0, solved, Some(record), vec![c])
}

/// Some `y0 ∈ f(x0)` outside `f(X) + εH + D`, as an index into `f(x0)`.
fn image_premise(inst: &FiniteInstance, x0: usize, epsilon: f64, h: &Polytope) -> Result<usize, SolverError> {
    let out = eps_h_efficient(inst, x0, epsilon, h)?;
    match out.witness {
        Some(k) if out.efficient => Ok(k),
        _ => {
            let blocker = out.blockers.first().map(|&(x, _)| inst.label(x).to_string());
            Err(SolverError::Premise {
                detail: "every value of f(x0) lies in f(X) + εH + D".into(),
                counterexample: blocker.map(Counterexample),
            })
        }
    }
}

/// A linear `ξ ∈ D⁺` with `ξ >= 1` on `H`, or the separation failure.
fn positive_on(inst: &FiniteInstance, h: &Polytope) -> Result<Scalarizer, SolverError> {
    h.validate_direction_set(&inst.cone, inst.tol)?;
    strictly_positive_functional(h, &inst.cone, inst.tol)?
        .map(Scalarizer::Linear)
        .ok_or_else(|| SolverError::hypothesis("B1", "no functional in the dual cone is positive on H, so 0 ∈ H + D"))
}

/// `F(x, x') = γ d(x, x') H`, closed, or open over `γ' ∈ (0, γ)`.
///
/// For the open family every inclusion at rate `γ` implies the same
/// inclusion at each smaller rate (`(γ - γ')dH ⊂ D`), and a failure at `γ`
/// leaves an interval of failing rates below it, so both conclusions are
/// certified at the endpoint.
pub fn solve_evp_setdir(
    inst: &FiniteInstance,
    h: &Polytope,
    gamma: f64,
    x0: usize,
    open_family: bool,
) -> Result<EvpCertificate, SolverError> {
    let xi = positive_on(inst, h)?;
    let (fam, theorem) = if open_family {
        (PerturbationFamily::OpenPolytopeFamily { h: h.clone(), gamma }, TheoremTag::T4_1)
    } else {
        (PerturbationFamily::PolytopeDirection { h: h.clone(), gamma }, TheoremTag::T4_2)
    };
    let solved = run_principle(inst, &fam, &xi, x0)?;
    certificate(theorem, inst, fam, xi, x0, solved, None, Vec::new())
}

/// `F(x, x') = p(x', x) H` for a quasi-metric `p`.
pub fn solve_evp_quasimetric(
    inst: &FiniteInstance,
    h: &Polytope,
    p: &QuasiMetric,
    x0: usize,
) -> Result<EvpCertificate, SolverError> {
    let xi = positive_on(inst, h)?;
    let fam = PerturbationFamily::QuasiMetricDirection { h: h.clone(), p: p.clone() };
    let solved = run_principle(inst, &fam, &xi, x0)?;
    certificate(TheoremTag::T4_4, inst, fam, xi, x0, solved, None, Vec::new())
}

/// Approximate solutions from an `(ε, H)`-efficient start.
///
/// `strict = false` runs the open family and bounds `d(x̂, x0) <= ε/γ`;
/// `strict = true` runs the closed family and bounds `d(x̂, x0) < ε/γ`.
pub fn solve_evp_approx(
    inst: &FiniteInstance,
    h: &Polytope,
    epsilon: f64,
    gamma: f64,
    x0: usize,
    strict: bool,
) -> Result<EvpCertificate, SolverError> {
    check_x0(inst, x0)?;
    for (what, v) in [("epsilon", epsilon), ("gamma", gamma)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(ModelError::NonPositive { what, value: v }.into());
        }
    }
    h.validate_direction_set(&inst.cone, inst.tol)?;
    let k = image_premise(inst, x0, epsilon, h)?;
    let mut cert = solve_evp_setdir(inst, h, gamma, x0, !strict)?;
    cert.theorem = if strict { TheoremTag::T4_6 } else { TheoremTag::T4_5 };
    cert.premise = Some(PremiseRecord {
        form: PremiseForm::EpsHEfficient,
        epsilon,
        y0_index: Some(k),
    });
    let c = bound_conclusion(inst, x0, cert.xhat_index, epsilon / gamma, strict, epsilon, h, Some(k))?;
    cert.conclusions.push(c);
    Ok(cert)
}
