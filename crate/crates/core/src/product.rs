//! Minimal points on a finite graph `A ⊂ X × Y`: Pareto and strict Pareto
//! minima, the orders `⪯_F` and `⪯_{F*}`, and the solvers built on them.

use serde::{Deserialize, Serialize};

use crate::engine::{solve_theorem21, EngineMode, EngineTrace, PreorderOracle};
use crate::evp::{distance_verdict, Conclusion, Counterexample, PremiseForm, PremiseRecord, SolverError, TheoremTag, Witness};
use crate::geometry::{minkowski_member, strictly_positive_functional, GeometryError, PolyhedralCone, Point, Polytope};
use crate::model::{set_included, FamilySet, FiniteInstance, MetricSpace, ModelError, Verdict, POSITIVITY_MARGIN_FACTOR};
use crate::scalarization::{ExtReal, GerstewitzFn, Scalarizer};

/// `a ≤_D b`.
pub fn leq(a: &Point, b: &Point, cone: &PolyhedralCone, tol: f64) -> bool {
    cone.contains(&(b - a), tol)
}

/// Indices of the Pareto minima of `b`: `ȳ` such that `y ≤_D ȳ` forces
/// `ȳ ≤_D y` for every `y ∈ b`.
pub fn pareto_min(b: &[Point], cone: &PolyhedralCone, tol: f64) -> Vec<usize> {
    (0..b.len())
        .filter(|&i| b.iter().all(|y| !leq(y, &b[i], cone, tol) || leq(&b[i], y, cone, tol)))
        .collect()
}

/// Indices of the strict Pareto minima: no `y ∈ b` with a different value
/// satisfies `y ≤_D ȳ`. Equal values do not exclude each other, so both
/// copies of a repeated minimum are reported.
pub fn strict_pareto_min(b: &[Point], cone: &PolyhedralCone, tol: f64) -> Vec<usize> {
    (0..b.len())
        .filter(|&i| b.iter().all(|y| y.approx_eq(&b[i], tol) || !leq(y, &b[i], cone, tol)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominationOutcome {
    pub holds: bool,
    pub minima: Vec<usize>,
    /// First point with no minimum below it.
    pub uncovered: Option<usize>,
}

/// Every `y ∈ b` lies above some (strict) Pareto minimum of `b`.
pub fn domination_check(b: &[Point], cone: &PolyhedralCone, strict: bool, tol: f64) -> DominationOutcome {
    let minima = if strict {
        strict_pareto_min(b, cone, tol)
    } else {
        pareto_min(b, cone, tol)
    };
    let uncovered = (0..b.len()).find(|&i| !minima.iter().any(|&m| leq(&b[m], &b[i], cone, tol)));
    DominationOutcome {
        holds: uncovered.is_none(),
        minima,
        uncovered,
    }
}

/// A finite `A ⊂ X × Y` with a distinguished start pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductInstance {
    pub space: MetricSpace,
    pub cone: PolyhedralCone,
    /// `(x, y)` pairs with `x` an index into `space`.
    pub graph: Vec<(usize, Point)>,
    pub start: usize,
    pub tol: f64,
}

impl ProductInstance {
    pub fn new(
        space: MetricSpace,
        cone: PolyhedralCone,
        graph: Vec<(usize, Point)>,
        start: usize,
        tol: f64,
    ) -> Result<Self, ModelError> {
        if graph.is_empty() {
            return Err(ModelError::Empty("graph"));
        }
        for (index, (x, y)) in graph.iter().enumerate() {
            if *x >= space.len() {
                return Err(ModelError::UnknownLabel(format!("#{x}")));
            }
            if y.dim() != cone.dim() {
                return Err(GeometryError::DimensionMismatch {
                    expected: cone.dim(),
                    found: y.dim(),
                }
                .into());
            }
            if !y.is_finite() {
                return Err(GeometryError::NonFinite("graph value").into());
            }
            if graph[..index].iter().any(|(xp, yp)| xp == x && yp.approx_eq(y, tol)) {
                return Err(ModelError::DuplicatePair {
                    x: space.label(*x).to_string(),
                    index,
                });
            }
        }
        if start >= graph.len() {
            return Err(ModelError::BadStart(start));
        }
        Ok(Self {
            space,
            cone,
            graph,
            start,
            tol,
        })
    }

    /// `gr f` with start `(x0, f(x0)[k])`. Repeated values of one `f(x)` are
    /// merged.
    pub fn graph_of(inst: &FiniteInstance, x0: usize, k: usize) -> Result<Self, ModelError> {
        let y0 = inst
            .f(x0)
            .get(k)
            .ok_or(ModelError::BadStart(k))?
            .clone();
        let mut graph: Vec<(usize, Point)> = Vec::new();
        for x in 0..inst.len() {
            for y in inst.f(x) {
                if !graph.iter().any(|(xp, yp)| *xp == x && yp.approx_eq(y, inst.tol)) {
                    graph.push((x, y.clone()));
                }
            }
        }
        let start = graph
            .iter()
            .position(|(x, y)| *x == x0 && y.approx_eq(&y0, inst.tol))
            .expect("the start value was inserted");
        Self::new(inst.space.clone(), inst.cone.clone(), graph, start, inst.tol)
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn x(&self, p: usize) -> usize {
        self.graph[p].0
    }

    pub fn y(&self, p: usize) -> &Point {
        &self.graph[p].1
    }

    pub fn y0(&self) -> &Point {
        self.y(self.start)
    }

    /// Pair indices with first coordinate `x`.
    pub fn slice(&self, x: usize) -> Vec<usize> {
        (0..self.len()).filter(|&p| self.x(p) == x).collect()
    }

    pub fn slice_values(&self, x: usize) -> Vec<Point> {
        self.slice(x).into_iter().map(|p| self.y(p).clone()).collect()
    }

    /// `"x/j"` with `j` the position inside the slice of `x`.
    pub fn pair_label(&self, p: usize) -> String {
        let x = self.x(p);
        let j = self.graph[..p].iter().filter(|(xp, _)| *xp == x).count();
        format!("{}/{}", self.space.label(x), j)
    }

    pub fn image(&self) -> Vec<Point> {
        self.graph.iter().map(|(_, y)| y.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FKind {
    /// `F(x, x') = rate · d(x, x') {k0}`.
    Ray { k0: Point, rate: f64 },
    /// `F(x, x') = rate · d(x, x') H`.
    Scaled { h: Polytope, rate: f64 },
    /// `sets[x][x']` given explicitly.
    Table { sets: Vec<Vec<Polytope>> },
}

/// A perturbation map on `X × X` with its additive potential `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FMap {
    pub kind: FKind,
    pub xi: Scalarizer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FMapReport {
    pub inside_cone: Verdict,
    pub f1: Verdict,
    pub f2: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2_violation: Option<(usize, usize, usize)>,
    pub xi_monotone: Verdict,
    /// `ξ(y + z) = ξ(y) + ξ(z)` on `F(X × X)`.
    pub additive: Verdict,
    /// `ζ` below the minimum separation, which is `ζ` at every `δ > 0` that
    /// selects any pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<ExtReal>,
    pub zeta_positive: Verdict,
}

impl FMapReport {
    pub fn first_failure(&self) -> Option<&'static str> {
        [
            ("F inside D", self.inside_cone),
            ("F1", self.f1),
            ("F2", self.f2),
            ("xi-monotone", self.xi_monotone),
            ("F3 additivity", self.additive),
            ("F3 zeta", self.zeta_positive),
        ]
        .into_iter()
        .find(|(_, v)| !v.accepted())
        .map(|(n, _)| n)
    }
}

impl FMap {
    /// Ray map with the Gerstewitz functional of the same `k0`.
    pub fn ray(cone: &PolyhedralCone, k0: Point, rate: f64, tol: f64) -> Result<Self, SolverError> {
        let g = GerstewitzFn::new(cone.clone(), k0.clone(), tol)?;
        Ok(Self {
            kind: FKind::Ray { k0, rate },
            xi: Scalarizer::gerstewitz(g),
        })
    }

    /// Scaled map with a linear `ξ ∈ D⁺` that is at least one on `H`.
    pub fn scaled(cone: &PolyhedralCone, h: Polytope, rate: f64, tol: f64) -> Result<Self, SolverError> {
        let xi = strictly_positive_functional(&h, cone, tol)?.ok_or_else(|| SolverError::Hypothesis {
            name: "F3".into(),
            detail: "no functional in the dual cone is positive on H".into(),
        })?;
        Ok(Self {
            kind: FKind::Scaled { h, rate },
            xi: Scalarizer::Linear(xi),
        })
    }

    pub fn set<'a>(&'a self, space: &MetricSpace, x: usize, xp: usize) -> FamilySet<'a> {
        use std::borrow::Cow;
        match &self.kind {
            FKind::Ray { k0, rate } => FamilySet {
                scale: rate * space.d(x, xp),
                poly: Cow::Owned(Polytope::singleton(k0.clone())),
            },
            FKind::Scaled { h, rate } => FamilySet {
                scale: rate * space.d(x, xp),
                poly: Cow::Borrowed(h),
            },
            FKind::Table { sets } => FamilySet {
                scale: 1.0,
                poly: Cow::Borrowed(&sets[x][xp]),
            },
        }
    }

    /// `ξ(y - y0)`, the potential of the product solvers.
    pub fn eta(&self, y: &Point, y0: &Point) -> ExtReal {
        self.xi.value(&(y - y0))
    }

    fn check_shape(&self, pi: &ProductInstance) -> Result<(), ModelError> {
        let m = pi.cone.dim();
        let n = pi.space.len();
        let dim_ok = |d: usize| {
            if d == m {
                Ok(())
            } else {
                Err(ModelError::Geometry(GeometryError::DimensionMismatch { expected: m, found: d }))
            }
        };
        dim_ok(self.xi.dim())?;
        if let FKind::Ray { rate, .. } | FKind::Scaled { rate, .. } = &self.kind {
            if !(rate.is_finite() && *rate > 0.0) {
                return Err(ModelError::NonPositive {
                    what: "rate",
                    value: *rate,
                });
            }
        }
        match &self.kind {
            FKind::Ray { k0, .. } => dim_ok(k0.dim()),
            FKind::Scaled { h, .. } => dim_ok(h.dim()),
            FKind::Table { sets } => {
                if sets.len() != n || sets.iter().any(|r| r.len() != n) {
                    return Err(ModelError::WrongSize {
                        what: "F table",
                        expected: n,
                        found: sets.len(),
                    });
                }
                sets.iter().flatten().try_for_each(|p| dim_ok(p.dim()))
            }
        }
    }

    /// Checks `F ⊂ D`, (F1), (F2) and (F3) on the instance.
    pub fn validate(&self, pi: &ProductInstance) -> Result<FMapReport, SolverError> {
        self.check_shape(pi)?;
        let space = &pi.space;
        let cone = &pi.cone;
        let tol = pi.tol;
        let n = space.len();
        let zero = [Point::zeros(cone.dim())];

        let inside_cone = Verdict::from_bool((0..n).all(|a| (0..n).all(|b| self.set(space, a, b).poly.lies_in(cone, tol))));

        let f1 = match &self.kind {
            FKind::Table { sets } => {
                let mut ok = true;
                for (x, row) in sets.iter().enumerate() {
                    ok &= row[x].contains(&zero[0], tol)?;
                }
                Verdict::from_bool(ok)
            }
            _ => Verdict::Holds,
        };

        let mut f2_violation = None;
        match &self.kind {
            FKind::Table { .. } => {
                'outer: for a in 0..n {
                    for b in 0..n {
                        let s1 = self.set(space, a, b);
                        for c in 0..n {
                            let s2 = self.set(space, b, c);
                            let target = self.set(space, a, c);
                            let sums: Vec<Point> = s1
                                .poly
                                .vertices()
                                .iter()
                                .flat_map(|u| s2.poly.vertices().iter().map(move |v| (u, v)))
                                .map(|(u, v)| &u.scaled(s1.scale) + &v.scaled(s2.scale))
                                .collect();
                            if !set_included(&sums, &zero, target.scale, Some(&target.poly), cone, tol)? {
                                f2_violation = Some((a, b, c));
                                break 'outer;
                            }
                        }
                    }
                }
            }
            // rates times a metric: the triangle inequality plus convexity of H
            _ => {}
        }
        let f2 = Verdict::from_bool(f2_violation.is_none());

        let xi_monotone = match &self.xi {
            Scalarizer::Linear(l) => Verdict::from_bool(l.weights_norm_inf() > tol && l.in_dual_cone(cone, tol)?),
            Scalarizer::Gerstewitz { .. } => Verdict::Structural,
        };

        let additive = match &self.xi {
            Scalarizer::Linear(_) => Verdict::Holds,
            Scalarizer::Gerstewitz { g, .. } => {
                let on_ray = (0..n).all(|a| (0..n).all(|b| self.set(space, a, b).poly.on_ray(g.k0(), tol)));
                if on_ray {
                    Verdict::Holds
                } else {
                    Verdict::NotEvaluated
                }
            }
        };

        let zeta_value = space.min_separation().map_or(Some(ExtReal::PosInfinity), |delta| zeta(self, space, delta));
        let margin = POSITIVITY_MARGIN_FACTOR * tol;
        let zeta_positive = match zeta_value {
            Some(z) => Verdict::from_bool(ExtReal::Finite(margin).strictly_below(z, 0.0)),
            None => Verdict::NotEvaluated,
        };
        Ok(FMapReport {
            inside_cone,
            f1,
            f2,
            f2_violation,
            xi_monotone,
            additive,
            zeta: zeta_value,
            zeta_positive,
        })
    }
}

/// `ζ(δ) = inf ξ` over the vertices of every `F(x, x')` with `d(x, x') >= δ`;
/// `+∞` when no pair is that far apart, `None` when the infimum has no exact
/// vertex reduction.
pub fn zeta(fm: &FMap, space: &MetricSpace, delta: f64) -> Option<ExtReal> {
    let n = space.len();
    let mut out = ExtReal::PosInfinity;
    for a in 0..n {
        for b in 0..n {
            if space.d(a, b) < delta {
                continue;
            }
            let s = fm.set(space, a, b);
            out = out.min(fm.xi.increment_bound(s.scale, &s.poly)?);
        }
    }
    Some(out)
}

/// `(x2, y2) ⪯_F (x1, y1)`, that is `y1 ∈ y2 + F(x2, x1) + D`.
pub fn prec_f(pi: &ProductInstance, fm: &FMap, p2: usize, p1: usize) -> Result<bool, ModelError> {
    let s = fm.set(&pi.space, pi.x(p2), pi.x(p1));
    Ok(minkowski_member(
        pi.y(p1),
        std::slice::from_ref(pi.y(p2)),
        s.scale,
        Some(&s.poly),
        &pi.cone,
        pi.tol,
    )?)
}

/// `(x2, y2) ⪯_{F*} (x1, y1)`: the same pair, or `⪯_F` with
/// `ξ(y2 - y0)` below `ξ(y1 - y0)` by more than `τ`.
pub fn prec_fstar(pi: &ProductInstance, fm: &FMap, p2: usize, p1: usize) -> Result<bool, ModelError> {
    if p2 == p1 {
        return Ok(true);
    }
    let y0 = pi.y0();
    let below = fm.eta(pi.y(p2), y0).strictly_below(fm.eta(pi.y(p1), y0), pi.tol);
    Ok(below && prec_f(pi, fm, p2, p1)?)
}

/// `rel[p2][p1]` for one of the two orders.
pub fn product_relation(pi: &ProductInstance, fm: &FMap, star: bool) -> Result<Vec<Vec<bool>>, ModelError> {
    let n = pi.len();
    let mut rel = vec![vec![false; n]; n];
    for (p2, row) in rel.iter_mut().enumerate() {
        for (p1, cell) in row.iter_mut().enumerate() {
            *cell = if star {
                prec_fstar(pi, fm, p2, p1)?
            } else {
                prec_f(pi, fm, p2, p1)?
            };
        }
    }
    Ok(rel)
}

/// `⪯_{F*}`-minimal pairs below the start, by enumeration.
pub fn brute_force_product_minimals(pi: &ProductInstance, fm: &FMap) -> Result<Vec<usize>, ModelError> {
    let rel = product_relation(pi, fm, true)?;
    Ok((0..pi.len())
        .filter(|&p| rel[p][pi.start] && (0..pi.len()).all(|q| q == p || !rel[q][p]))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductCertificate {
    pub theorem: TheoremTag,
    pub start: String,
    pub y0: Point,
    pub xhat: String,
    pub yhat: Point,
    /// Graph index of `(x̂, ŷ)`.
    pub pair: usize,
    /// Graph index the engine returned, before any post-processing.
    pub engine_pair: usize,
    pub distance: f64,
    pub conclusions: Vec<Conclusion>,
    pub fmap: FMapReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub premise: Option<PremiseRecord>,
    pub trace: EngineTrace,
    pub structural: Vec<String>,
}

impl ProductCertificate {
    pub fn certified(&self) -> bool {
        self.conclusions.iter().all(|c| c.verdict.holds())
    }

    pub fn conclusion(&self, name: &str) -> Option<&Conclusion> {
        self.conclusions.iter().find(|c| c.name == name)
    }
}

const PRODUCT_STRUCTURAL: [&str; 2] = [
    "finite graph: decreasing chains are eventually constant, so completeness and limit conditions hold",
    "lower semicontinuity conditions and closedness of D hold for finite data and polyhedral D",
];

fn conclusion(name: &str, statement: &str, failure: Option<usize>, pi: &ProductInstance, checked: usize) -> Conclusion {
    match failure {
        None => Conclusion {
            name: name.into(),
            statement: statement.into(),
            verdict: Verdict::Holds,
            witness: if checked == 0 {
                Witness::Vacuous
            } else {
                Witness::Inclusion { memberships: checked }
            },
        },
        Some(index) => Conclusion {
            name: name.into(),
            statement: statement.into(),
            verdict: Verdict::Fails,
            witness: Witness::Pair {
                index,
                x: pi.pair_label(index),
            },
        },
    }
}

/// `y0 ∈ ŷ + F(x̂, x0) + D`.
fn check_a_prime(pi: &ProductInstance, fm: &FMap, p: usize, name: &str) -> Result<Conclusion, SolverError> {
    let ok = prec_f(pi, fm, p, pi.start)?;
    Ok(conclusion(name, "y0 ∈ ŷ + F(x̂, x0) + D", (!ok).then_some(pi.start), pi, 1))
}

/// `ŷ ∉ y + F(x, x̂) + D` over pairs selected by `filter`.
fn check_b_prime(
    pi: &ProductInstance,
    fm: &FMap,
    p: usize,
    name: &str,
    statement: &str,
    filter: impl Fn(usize) -> bool,
) -> Result<Conclusion, SolverError> {
    let mut checked = 0;
    for q in (0..pi.len()).filter(|&q| filter(q)) {
        if prec_f(pi, fm, q, p)? {
            return Ok(conclusion(name, statement, Some(q), pi, checked));
        }
        checked += 1;
    }
    Ok(conclusion(name, statement, None, pi, checked))
}

fn check_smin(pi: &ProductInstance, p: usize) -> Conclusion {
    let slice = pi.slice(pi.x(p));
    let blocker = slice
        .iter()
        .copied()
        .find(|&q| !pi.y(q).approx_eq(pi.y(p), pi.tol) && leq(pi.y(q), pi.y(p), &pi.cone, pi.tol));
    conclusion("a_smin", "ŷ ∈ SMin f(x̂)", blocker, pi, slice.len())
}

struct Engine {
    pair: usize,
    fmap: FMapReport,
    trace: EngineTrace,
}

fn run_product_engine(pi: &ProductInstance, fm: &FMap) -> Result<Engine, SolverError> {
    let fmap = fm.validate(pi)?;
    if let Some(name) = fmap.first_failure() {
        let detail = match (name, fmap.f2_violation) {
            ("F2", Some((a, b, c))) => format!(
                "F({}, {}) + F({}, {}) leaves F({}, {}) + D",
                pi.space.label(a),
                pi.space.label(b),
                pi.space.label(b),
                pi.space.label(c),
                pi.space.label(a),
                pi.space.label(c)
            ),
            _ => format!("{fmap:?}"),
        };
        return Err(SolverError::Hypothesis {
            name: name.into(),
            detail,
        });
    }
    let rel = product_relation(pi, fm, true)?;
    let n = pi.len();
    let sections = (0..n).map(|p| (0..n).filter(|&q| rel[q][p]).collect()).collect();
    let eta = (0..n).map(|p| fm.eta(pi.y(p), pi.y0())).collect();
    let labels = (0..n).map(|p| pi.pair_label(p)).collect();
    let oracle = PreorderOracle::new(labels, sections, eta)?;
    let (pair, trace) = solve_theorem21(&oracle, pi.start, EngineMode::Faithful)?;
    Ok(Engine { pair, fmap, trace })
}

fn product_certificate(
    theorem: TheoremTag,
    pi: &ProductInstance,
    engine: Engine,
    pair: usize,
    conclusions: Vec<Conclusion>,
    premise: Option<PremiseRecord>,
) -> ProductCertificate {
    ProductCertificate {
        theorem,
        start: pi.pair_label(pi.start),
        y0: pi.y0().clone(),
        xhat: pi.space.label(pi.x(pair)).to_string(),
        yhat: pi.y(pair).clone(),
        pair,
        engine_pair: engine.pair,
        distance: pi.space.d(pi.x(pi.start), pi.x(pair)),
        conclusions,
        fmap: engine.fmap,
        premise,
        trace: engine.trace,
        structural: PRODUCT_STRUCTURAL.iter().map(|s| s.to_string()).collect(),
    }
}

/// The minimal-point theorem on `(A, ⪯_{F*})` with `η(x, y) = ξ(y - y0)`.
pub fn solve_minimal_point(pi: &ProductInstance, fm: &FMap) -> Result<ProductCertificate, SolverError> {
    let engine = run_product_engine(pi, fm)?;
    let p = engine.pair;
    let a_ok = prec_fstar(pi, fm, p, pi.start)?;
    let a = conclusion("a", "(x̂, ŷ) ⪯_F* (x0, y0)", (!a_ok).then_some(p), pi, 1);
    let mut b_fail = None;
    let mut checked = 0;
    for q in (0..pi.len()).filter(|&q| q != p) {
        if prec_fstar(pi, fm, q, p)? {
            b_fail = Some(q);
            break;
        }
        checked += 1;
    }
    let b = conclusion("b", "(x, y) ⪯_F* (x̂, ŷ) only for (x̂, ŷ)", b_fail, pi, checked);
    let a_prime = check_a_prime(pi, fm, p, "a_prime")?;
    let xhat = pi.x(p);
    let b_prime = check_b_prime(pi, fm, p, "b_prime", "ŷ ∉ y + F(x, x̂) + D for x ≠ x̂", |q| pi.x(q) != xhat)?;
    Ok(product_certificate(TheoremTag::T5_1, pi, engine, p, vec![a, b, a_prime, b_prime], None))
}

/// Strict domination of every slice `{y : (x, y) ∈ A}` for `x` in `xs`.
fn check_slices(pi: &ProductInstance, xs: impl IntoIterator<Item = usize>) -> Result<(), SolverError> {
    for x in xs {
        let values = pi.slice_values(x);
        let out = domination_check(&values, &pi.cone, true, pi.tol);
        if let Some(u) = out.uncovered {
            return Err(SolverError::Hypothesis {
                name: "strict domination".into(),
                detail: format!("value {} of the slice at {} has no strict minimum below it", u, pi.space.label(x)),
            });
        }
    }
    Ok(())
}

/// Replaces `ỹ` by the strict minimum of the `x̂`-slice below it with the
/// smallest potential (first in graph order on ties).
fn post_process(pi: &ProductInstance, fm: &FMap, p: usize) -> usize {
    let slice = pi.slice(pi.x(p));
    let values: Vec<Point> = slice.iter().map(|&q| pi.y(q).clone()).collect();
    let mut best: Option<(usize, ExtReal)> = None;
    for i in strict_pareto_min(&values, &pi.cone, pi.tol) {
        let q = slice[i];
        if !leq(pi.y(q), pi.y(p), &pi.cone, pi.tol) {
            continue;
        }
        let e = fm.eta(pi.y(q), pi.y0());
        if best.map_or(true, |(_, b)| e < b) {
            best = Some((q, e));
        }
    }
    best.map_or(p, |(q, _)| q)
}

fn strict_conclusions(pi: &ProductInstance, fm: &FMap, p: usize) -> Result<Vec<Conclusion>, SolverError> {
    Ok(vec![
        check_a_prime(pi, fm, p, "a")?,
        check_smin(pi, p),
        check_b_prime(pi, fm, p, "b", "ŷ ∉ y + F(x, x̂) + D for (x, y) ≠ (x̂, ŷ)", |q| q != p)?,
    ])
}

/// `P_X(S_F(x0, y0))`.
fn section_xs(pi: &ProductInstance, fm: &FMap) -> Result<Vec<usize>, SolverError> {
    let mut xs = Vec::new();
    for q in 0..pi.len() {
        if prec_f(pi, fm, q, pi.start)? && !xs.contains(&pi.x(q)) {
            xs.push(pi.x(q));
        }
    }
    Ok(xs)
}

/// Strict minimal points: the minimal-point theorem followed by moving `ỹ`
/// to a strict minimum of its slice.
pub fn solve_strict_minimal(pi: &ProductInstance, fm: &FMap) -> Result<ProductCertificate, SolverError> {
    check_slices(pi, section_xs(pi, fm)?)?;
    let engine = run_product_engine(pi, fm)?;
    let p = post_process(pi, fm, engine.pair);
    let conclusions = strict_conclusions(pi, fm, p)?;
    Ok(product_certificate(TheoremTag::T5_2, pi, engine, p, conclusions, None))
}

/// The Pareto form on `A = gr f` with `F = (ε/λ) d {k0}` and `ξ = ξ_k0`,
/// from a start `y0 ∉ f(X) + εk0 + D`.
pub fn solve_pareto_evp(pi: &ProductInstance, k0: &Point, epsilon: f64, lambda: f64) -> Result<ProductCertificate, SolverError> {
    for (what, v) in [("epsilon", epsilon), ("lambda", lambda)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(ModelError::NonPositive { what, value: v }.into());
        }
    }
    let fm = FMap::ray(&pi.cone, k0.clone(), epsilon / lambda, pi.tol)?;
    let h = Polytope::singleton(k0.clone());
    let image = pi.image();
    if let Some(w) = crate::geometry::minkowski_witness(pi.y0(), &image, epsilon, Some(&h), &pi.cone, pi.tol)? {
        return Err(SolverError::Premise {
            detail: "y0 ∈ f(X) + εk0 + D".into(),
            counterexample: Some(Counterexample(pi.pair_label(w.base_index))),
        });
    }
    check_slices(pi, 0..pi.space.len())?;
    let engine = run_product_engine(pi, &fm)?;
    let p = post_process(pi, &fm, engine.pair);
    let mut conclusions = strict_conclusions(pi, &fm, p)?;
    let d = pi.space.d(pi.x(pi.start), pi.x(p));
    let verdict = distance_verdict(d, lambda, false, pi.tol);
    let contradiction = if verdict == Verdict::Fails {
        Some(minkowski_member(pi.y0(), std::slice::from_ref(pi.y(p)), epsilon, Some(&h), &pi.cone, pi.tol)?)
    } else {
        None
    };
    conclusions.push(Conclusion {
        name: "c".into(),
        statement: "d(x0, x̂) <= λ".into(),
        verdict,
        witness: Witness::Distance {
            d,
            bound: lambda,
            contradiction,
        },
    });
    let premise = PremiseRecord {
        form: PremiseForm::AgainstImage,
        epsilon,
        y0_index: Some(pi.start),
    };
    Ok(product_certificate(TheoremTag::T5_6, pi, engine, p, conclusions, Some(premise)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DEFAULT_TOLERANCE as TAU;
    use crate::model::fixtures::labels;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec())
    }

    fn pts(v: &[&[f64]]) -> Vec<Point> {
        v.iter().map(|c| p(c)).collect()
    }

    /// `R × [0, ∞)`: contains the line `R × {0}`.
    fn upper_halfplane() -> PolyhedralCone {
        PolyhedralCone::new(vec![vec![0.0, 1.0]], TAU).unwrap()
    }

    #[test]
    fn pareto_examples() {
        let o = PolyhedralCone::orthant(2);
        let b = pts(&[&[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]]);
        assert_eq!(pareto_min(&b, &o, TAU), vec![0, 1]);
        assert_eq!(strict_pareto_min(&b, &o, TAU), vec![0, 1]);
        assert_eq!(pareto_min(&b[..1], &o, TAU), vec![0]);
        // the single-row cone {y : y1 + y2 >= 0} orders more pairs
        let coarse = PolyhedralCone::new(vec![vec![1.0, 1.0]], TAU).unwrap();
        let b = pts(&[&[0.0, 1.0], &[1.0, 0.0], &[2.0, 0.0]]);
        assert_eq!(pareto_min(&b, &coarse, TAU), vec![0, 1]);
    }

    #[test]
    fn duplicates_are_both_strict_minima() {
        let o = PolyhedralCone::orthant(2);
        let b = pts(&[&[0.0, 0.0], &[0.0, 0.0], &[1.0, 1.0]]);
        assert_eq!(strict_pareto_min(&b, &o, TAU), vec![0, 1]);
    }

    #[test]
    fn non_pointed_cone_separates_strict_minima() {
        let c = upper_halfplane();
        let b = pts(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(pareto_min(&b, &c, TAU), vec![0, 1]);
        assert!(strict_pareto_min(&b, &c, TAU).is_empty());
        let out = domination_check(&b, &c, true, TAU);
        assert!(!out.holds);
        assert_eq!(out.uncovered, Some(0));
        assert!(domination_check(&b, &c, false, TAU).holds);
    }

    fn line_instance(positions: &[f64], graph: Vec<(usize, f64)>, start: usize) -> ProductInstance {
        let names: Vec<String> = (0..positions.len()).map(|i| format!("x{i}")).collect();
        let space = MetricSpace::on_line(names, positions, TAU).unwrap();
        let graph = graph.into_iter().map(|(x, y)| (x, p(&[y]))).collect();
        ProductInstance::new(space, PolyhedralCone::orthant(1), graph, start, TAU).unwrap()
    }

    fn ray_map(rate: f64) -> FMap {
        FMap::ray(&PolyhedralCone::orthant(1), p(&[1.0]), rate, TAU).unwrap()
    }

    #[test]
    fn prec_examples() {
        let pi = line_instance(&[0.0, 1.0], vec![(0, 2.0), (1, 0.5)], 0);
        let fm = ray_map(1.0);
        assert!(prec_f(&pi, &fm, 0, 0).unwrap());
        assert!(prec_f(&pi, &fm, 1, 0).unwrap());
        assert!(!prec_f(&pi, &fm, 0, 1).unwrap());
        assert!(prec_fstar(&pi, &fm, 1, 0).unwrap());
        assert!(prec_fstar(&pi, &fm, 1, 1).unwrap());
    }

    #[test]
    fn fstar_needs_a_strict_potential_drop() {
        // one slice, two values with different ξ-potential along a cone where
        // the D-comparison holds but ξ ties; ξ(y) = y1 on R^2 with D = R x [0,∞)
        let space = MetricSpace::new(labels(&["a"]), vec![vec![0.0]], TAU).unwrap();
        let cone = upper_halfplane();
        let graph = vec![(0, p(&[0.0, 1.0])), (0, p(&[0.0, 0.0]))];
        let pi = ProductInstance::new(space, cone, graph, 0, TAU).unwrap();
        let fm = FMap {
            kind: FKind::Table {
                sets: vec![vec![Polytope::singleton(p(&[0.0, 0.0]))]],
            },
            xi: Scalarizer::Linear(crate::geometry::LinearFunctional::new(vec![1.0, 0.0])),
        };
        assert!(prec_f(&pi, &fm, 1, 0).unwrap());
        assert!(!prec_fstar(&pi, &fm, 1, 0).unwrap());
    }

    #[test]
    fn zeta_examples() {
        let pi = line_instance(&[0.0, 1.0, 3.0], vec![(0, 0.0), (1, 0.0), (2, 0.0)], 0);
        let fm = ray_map(0.5);
        assert_eq!(zeta(&fm, &pi.space, 1.0), Some(ExtReal::Finite(0.5)));
        assert_eq!(zeta(&fm, &pi.space, 2.5), Some(ExtReal::Finite(1.5)));
        assert_eq!(zeta(&fm, &pi.space, 10.0), Some(ExtReal::PosInfinity));
        let h = Polytope::new(vec![p(&[1.0]), p(&[2.0])]).unwrap();
        let fm = FMap::scaled(&PolyhedralCone::orthant(1), h, 1.0, TAU).unwrap();
        assert_eq!(zeta(&fm, &pi.space, 2.0), Some(ExtReal::Finite(2.0)));
    }

    #[test]
    fn minimal_point_matches_enumeration() {
        let pi = line_instance(&[0.0, 1.0, 2.0], vec![(0, 3.0), (1, 1.5), (1, 2.5), (2, 0.2)], 0);
        let fm = ray_map(0.5);
        let cert = solve_minimal_point(&pi, &fm).unwrap();
        assert!(cert.certified(), "{:?}", cert.conclusions);
        assert!(brute_force_product_minimals(&pi, &fm).unwrap().contains(&cert.pair));
        let single = line_instance(&[0.0], vec![(0, 1.0)], 0);
        let cert = solve_minimal_point(&single, &fm).unwrap();
        assert_eq!(cert.pair, 0);
    }

    #[test]
    fn shared_x_with_different_values() {
        // x̂ = x1 carries two values; b' only looks at other points
        let pi = line_instance(&[0.0, 1.0], vec![(0, 3.0), (1, 1.0), (1, 0.5)], 0);
        let cert = solve_minimal_point(&pi, &ray_map(0.5)).unwrap();
        assert_eq!(cert.xhat, "x1");
        assert!(cert.certified());
    }

    #[test]
    fn strict_post_processing_moves_down() {
        // ξ_k0 ties on (1, 2) and (0, 2) relative to y0 = (3, 3), so the
        // engine stops at (1, 2), which the slice strictly dominates
        let space = MetricSpace::new(labels(&["a", "b"]), vec![vec![0.0, 1.0], vec![1.0, 0.0]], TAU).unwrap();
        let cone = PolyhedralCone::orthant(2);
        let graph = vec![(0, p(&[3.0, 3.0])), (1, p(&[1.0, 2.0])), (1, p(&[0.0, 2.0]))];
        let pi = ProductInstance::new(space, cone.clone(), graph, 0, TAU).unwrap();
        let fm = FMap::ray(&cone, p(&[1.0, 1.0]), 0.5, TAU).unwrap();
        let cert = solve_strict_minimal(&pi, &fm).unwrap();
        assert_eq!(cert.engine_pair, 1);
        assert_eq!(cert.pair, 2);
        assert_eq!(cert.yhat, p(&[0.0, 2.0]));
        assert!(cert.certified(), "{:?}", cert.conclusions);
    }

    #[test]
    fn pareto_evp_examples() {
        let pi = line_instance(&[0.0, 1.0], vec![(0, 1.0), (1, 0.6)], 0);
        let cert = solve_pareto_evp(&pi, &p(&[1.0]), 0.5, 2.0).unwrap();
        assert_eq!(cert.xhat, "x1");
        assert!(cert.certified());
        // λ below the separation forces x̂ = x0
        let cert = solve_pareto_evp(&pi, &p(&[1.0]), 0.5, 0.5).unwrap();
        assert_eq!(cert.xhat, "x0");
        assert!(cert.certified());
        let bad = line_instance(&[0.0, 1.0], vec![(0, 1.0), (1, 0.0)], 0);
        assert!(matches!(
            solve_pareto_evp(&bad, &p(&[1.0]), 0.5, 2.0),
            Err(SolverError::Premise { .. })
        ));
    }

    #[test]
    fn graph_rejects_duplicates() {
        let space = MetricSpace::new(labels(&["a"]), vec![vec![0.0]], TAU).unwrap();
        let graph = vec![(0, p(&[1.0])), (0, p(&[1.0]))];
        assert!(matches!(
            ProductInstance::new(space, PolyhedralCone::orthant(1), graph, 0, TAU),
            Err(ModelError::DuplicatePair { index: 1, .. })
        ));
    }
}
