//! Finite vector-optimization instances: a finite metric space, a set-valued
//! objective with finite value sets, and the perturbation families that
//! define the order on the space.
//!
//! Points of the space are addressed by their index; labels exist for I/O.

pub mod assumptions;
pub mod order;
pub mod probes;

use std::borrow::Cow;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, LpError, PolyhedralCone, Point, Polytope};

pub use assumptions::{check_assumptions, AssumptionCheck, AssumptionReport, POSITIVITY_MARGIN_FACTOR};
pub use order::{preceq, relation_matrix, s_set, set_included, ti_check, RelationMatrix, TiMethod, TiReport};
pub use probes::{
    d_bounded_certificate, dyn_closed_probe, epi_closed_probe, eps_h_efficient, slm_probe, EfficiencyOutcome,
    ProbeError,
};

/// Outcome of a checked statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    /// Within tolerance of the threshold; neither side can be certified.
    Boundary,
    /// Automatic on finite instances with polyhedral cones.
    Structural,
    /// No exact finite procedure is available for this input.
    NotEvaluated,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }

    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }

    /// `Holds`, or automatic on the instance class at hand.
    pub fn accepted(self) -> bool {
        matches!(self, Verdict::Holds | Verdict::Structural)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{0} is empty")]
    Empty(&'static str),
    #[error("{what} must be {expected}x{expected}, row {row} has {found} entries")]
    NotSquare {
        what: &'static str,
        expected: usize,
        row: usize,
        found: usize,
    },
    #[error("{what} has {found} rows, expected {expected}")]
    WrongSize {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("{what} entry ({a}, {b}) is not a finite nonnegative number")]
    BadEntry { what: &'static str, a: String, b: String },
    #[error("{what} has nonzero diagonal at {label:?}")]
    NonzeroDiagonal { what: &'static str, label: String },
    #[error("distance is not symmetric between {a:?} and {b:?}")]
    Asymmetric { a: String, b: String },
    #[error("{what} vanishes between distinct points {a:?} and {b:?}")]
    ZeroSeparation { what: &'static str, a: String, b: String },
    #[error("{what} violates the triangle inequality on ({a:?}, {b:?}, {c:?}): {lhs} > {rhs}")]
    Triangle {
        what: &'static str,
        a: String,
        b: String,
        c: String,
        lhs: f64,
        rhs: f64,
    },
    #[error("point {0:?} has an empty value set")]
    EmptyValues(String),
    #[error("{what} must be a finite positive number, found {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("perturbation set F[{lambda}]({a:?}, {b:?}) leaves the cone")]
    FamilyOutsideCone { lambda: usize, a: String, b: String },
    #[error("graph pair {index} repeats an earlier pair at {x:?}")]
    DuplicatePair { x: String, index: usize },
    #[error("start pair {0} is not in the graph")]
    BadStart(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<LpError> for ModelError {
    fn from(e: LpError) -> Self {
        ModelError::Geometry(GeometryError::Lp(e))
    }
}

fn check_square(what: &'static str, m: &[Vec<f64>], n: usize) -> Result<(), ModelError> {
    if m.len() != n {
        return Err(ModelError::WrongSize {
            what,
            expected: n,
            found: m.len(),
        });
    }
    for (row, r) in m.iter().enumerate() {
        if r.len() != n {
            return Err(ModelError::NotSquare {
                what,
                expected: n,
                row,
                found: r.len(),
            });
        }
    }
    Ok(())
}

/// A finite metric space. Completeness is automatic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpace {
    labels: Vec<String>,
    dist: Vec<Vec<f64>>,
}

impl MetricSpace {
    pub fn new(labels: Vec<String>, dist: Vec<Vec<f64>>, tol: f64) -> Result<Self, ModelError> {
        if labels.is_empty() {
            return Err(ModelError::Empty("space"));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(ModelError::DuplicateLabel(l.clone()));
            }
        }
        let n = labels.len();
        check_square("distance matrix", &dist, n)?;
        let lab = |i: usize| labels[i].clone();
        for i in 0..n {
            for j in 0..n {
                let v = dist[i][j];
                if !v.is_finite() || v < 0.0 {
                    return Err(ModelError::BadEntry {
                        what: "distance matrix",
                        a: lab(i),
                        b: lab(j),
                    });
                }
            }
            if dist[i][i] != 0.0 {
                return Err(ModelError::NonzeroDiagonal {
                    what: "distance matrix",
                    label: lab(i),
                });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (dist[i][j] - dist[j][i]).abs() > tol {
                    return Err(ModelError::Asymmetric { a: lab(i), b: lab(j) });
                }
                if dist[i][j] <= tol {
                    return Err(ModelError::ZeroSeparation {
                        what: "distance",
                        a: lab(i),
                        b: lab(j),
                    });
                }
            }
        }
        triangle_check("distance matrix", &labels, &dist, tol)?;
        Ok(Self { labels, dist })
    }

    /// Euclidean distances between embedded coordinates.
    pub fn from_coordinates(labels: Vec<String>, coords: &[Vec<f64>], tol: f64) -> Result<Self, ModelError> {
        if coords.len() != labels.len() {
            return Err(ModelError::WrongSize {
                what: "coordinates",
                expected: labels.len(),
                found: coords.len(),
            });
        }
        if let Some(c) = coords.iter().find(|c| c.len() != coords[0].len()) {
            return Err(GeometryError::DimensionMismatch {
                expected: coords[0].len(),
                found: c.len(),
            }
            .into());
        }
        let dist = coords
            .iter()
            .map(|a| {
                coords
                    .iter()
                    .map(|b| {
                        a.iter()
                            .zip(b)
                            .map(|(u, v)| (u - v) * (u - v))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .collect()
            })
            .collect();
        Self::new(labels, dist, tol)
    }

    /// `d(i, j) = |i - j|` on labels placed on a line.
    pub fn on_line(labels: Vec<String>, positions: &[f64], tol: f64) -> Result<Self, ModelError> {
        let coords: Vec<Vec<f64>> = positions.iter().map(|&p| vec![p]).collect();
        Self::from_coordinates(labels, &coords, tol)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, ModelError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| ModelError::UnknownLabel(label.to_string()))
    }

    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.dist
    }

    /// Smallest distance between distinct points; `None` for a singleton.
    pub fn min_separation(&self) -> Option<f64> {
        let n = self.len();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| self.dist[i][j])
            .reduce(f64::min)
    }
}

fn triangle_check(what: &'static str, labels: &[String], m: &[Vec<f64>], tol: f64) -> Result<(), ModelError> {
    let n = labels.len();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let lhs = m[a][c];
                let rhs = m[a][b] + m[b][c];
                if lhs > rhs + tol {
                    return Err(ModelError::Triangle {
                        what,
                        a: labels[a].clone(),
                        b: labels[b].clone(),
                        c: labels[c].clone(),
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    Ok(())
}

/// An asymmetric distance `p` with the triangle inequality, zero diagonal,
/// and positive off-diagonal entries. The Cauchy-type axiom is vacuous on a
/// finite space and is not represented.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuasiMetric {
    p: Vec<Vec<f64>>,
}

impl QuasiMetric {
    pub fn new(p: Vec<Vec<f64>>, labels: &[String], tol: f64) -> Result<Self, ModelError> {
        let n = labels.len();
        check_square("quasi-metric", &p, n)?;
        for i in 0..n {
            for j in 0..n {
                if !p[i][j].is_finite() || p[i][j] < 0.0 {
                    return Err(ModelError::BadEntry {
                        what: "quasi-metric",
                        a: labels[i].clone(),
                        b: labels[j].clone(),
                    });
                }
                if i == j && p[i][j] != 0.0 {
                    return Err(ModelError::NonzeroDiagonal {
                        what: "quasi-metric",
                        label: labels[i].clone(),
                    });
                }
                if i != j && p[i][j] <= tol {
                    return Err(ModelError::ZeroSeparation {
                        what: "quasi-metric",
                        a: labels[i].clone(),
                        b: labels[j].clone(),
                    });
                }
            }
        }
        triangle_check("quasi-metric", labels, &p, tol)?;
        Ok(Self { p })
    }

    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.p[i][j]
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// `x ↦ f(x)`, a nonempty finite subset of `R^m` per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SetValuedMap {
    values: Vec<Vec<Point>>,
}

impl SetValuedMap {
    pub fn new(values: Vec<Vec<Point>>) -> Self {
        Self { values }
    }

    pub fn values(&self, i: usize) -> &[Point] {
        &self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `f(X)` in point order.
    pub fn image(&self) -> Vec<Point> {
        self.values.iter().flatten().cloned().collect()
    }

    pub fn total_values(&self) -> usize {
        self.values.iter().map(Vec::len).sum()
    }
}

/// A validated metric space, objective and ordering cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteInstance {
    pub cone: PolyhedralCone,
    pub space: MetricSpace,
    pub map: SetValuedMap,
    pub tol: f64,
}

impl FiniteInstance {
    pub fn new(cone: PolyhedralCone, space: MetricSpace, map: SetValuedMap, tol: f64) -> Result<Self, ModelError> {
        if map.len() != space.len() {
            return Err(ModelError::WrongSize {
                what: "value sets",
                expected: space.len(),
                found: map.len(),
            });
        }
        for i in 0..map.len() {
            let vs = map.values(i);
            if vs.is_empty() {
                return Err(ModelError::EmptyValues(space.label(i).to_string()));
            }
            for v in vs {
                v.check_dim(cone.dim())?;
                if !v.is_finite() {
                    return Err(GeometryError::NonFinite("value").into());
                }
            }
        }
        Ok(Self { cone, space, map, tol })
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.cone.dim()
    }

    pub fn f(&self, i: usize) -> &[Point] {
        self.map.values(i)
    }

    pub fn label(&self, i: usize) -> &str {
        self.space.label(i)
    }

    pub fn index_of(&self, label: &str) -> Result<usize, ModelError> {
        self.space.index_of(label)
    }
}

/// One member `F_λ(x, x') = scale · conv(vertices)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySet<'a> {
    pub scale: f64,
    pub poly: Cow<'a, Polytope>,
}

/// The maps `F_λ : X × X → 2^D`, indexed by `λ ∈ Λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum PerturbationFamily {
    /// `F(x, x') = γ d(x, x') {k0}`.
    SingletonDirection { k0: Point, gamma: f64 },
    /// `F(x, x') = γ d(x, x') H`.
    PolytopeDirection { h: Polytope, gamma: f64 },
    /// `F_γ'(x, x') = γ' d(x, x') H` for every `γ' ∈ (0, γ)`. Every membership
    /// query has a closed interval `[0, γ*]` of feasible rates, so the family
    /// is evaluated at its endpoint `γ`.
    OpenPolytopeFamily { h: Polytope, gamma: f64 },
    /// `F(x, x') = p(x', x) H`.
    QuasiMetricDirection { h: Polytope, p: QuasiMetric },
    /// `sets[λ][x][x']` given explicitly.
    ExtensionalFamily {
        lambdas: Vec<String>,
        sets: Vec<Vec<Vec<Polytope>>>,
    },
}

impl PerturbationFamily {
    pub fn lambda_count(&self) -> usize {
        match self {
            PerturbationFamily::ExtensionalFamily { lambdas, .. } => lambdas.len(),
            _ => 1,
        }
    }

    /// `F_λ(x, x')`.
    pub fn set(&self, space: &MetricSpace, lambda: usize, x: usize, xp: usize) -> FamilySet<'_> {
        match self {
            PerturbationFamily::SingletonDirection { k0, gamma } => FamilySet {
                scale: gamma * space.d(x, xp),
                poly: Cow::Owned(Polytope::singleton(k0.clone())),
            },
            PerturbationFamily::PolytopeDirection { h, gamma }
            | PerturbationFamily::OpenPolytopeFamily { h, gamma } => FamilySet {
                scale: gamma * space.d(x, xp),
                poly: Cow::Borrowed(h),
            },
            PerturbationFamily::QuasiMetricDirection { h, p } => FamilySet {
                scale: p.p(xp, x),
                poly: Cow::Borrowed(h),
            },
            PerturbationFamily::ExtensionalFamily { sets, .. } => FamilySet {
                scale: 1.0,
                poly: Cow::Borrowed(&sets[lambda][x][xp]),
            },
        }
    }

    /// The direction set when the family is distance-scaled.
    pub fn directions(&self) -> Option<Cow<'_, Polytope>> {
        match self {
            PerturbationFamily::SingletonDirection { k0, .. } => Some(Cow::Owned(Polytope::singleton(k0.clone()))),
            PerturbationFamily::PolytopeDirection { h, .. }
            | PerturbationFamily::OpenPolytopeFamily { h, .. }
            | PerturbationFamily::QuasiMetricDirection { h, .. } => Some(Cow::Borrowed(h)),
            PerturbationFamily::ExtensionalFamily { .. } => None,
        }
    }

    /// Nonzero vertices of every emitted set, deduplicated.
    pub fn nonzero_vertices(&self, tol: f64) -> Vec<Point> {
        let mut out: Vec<Point> = Vec::new();
        let mut push = |v: &Point| {
            if v.norm_inf() > tol && !out.iter().any(|u| u.approx_eq(v, tol)) {
                out.push(v.clone());
            }
        };
        match self {
            PerturbationFamily::ExtensionalFamily { sets, .. } => {
                sets.iter().flatten().flatten().flat_map(|p| p.vertices()).for_each(&mut push)
            }
            _ => {
                if let Some(h) = self.directions() {
                    h.vertices().iter().for_each(&mut push)
                }
            }
        }
        out
    }

    /// Checks rates, dimensions, the quasi-metric size, and that every
    /// emitted set lies in the cone.
    pub fn validate(&self, inst: &FiniteInstance) -> Result<(), ModelError> {
        let cone = &inst.cone;
        let tol = inst.tol;
        let n = inst.len();
        let positive = |what, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ModelError::NonPositive { what, value: v })
            }
        };
        match self {
            PerturbationFamily::SingletonDirection { k0, gamma } => {
                positive("gamma", *gamma)?;
                Polytope::new(vec![k0.clone()])?.validate_direction_set(cone, tol)?;
            }
            PerturbationFamily::PolytopeDirection { h, gamma }
            | PerturbationFamily::OpenPolytopeFamily { h, gamma } => {
                positive("gamma", *gamma)?;
                h.validate_direction_set(cone, tol)?;
            }
            PerturbationFamily::QuasiMetricDirection { h, p } => {
                h.validate_direction_set(cone, tol)?;
                if p.len() != n {
                    return Err(ModelError::WrongSize {
                        what: "quasi-metric",
                        expected: n,
                        found: p.len(),
                    });
                }
            }
            PerturbationFamily::ExtensionalFamily { lambdas, sets } => {
                if lambdas.is_empty() {
                    return Err(ModelError::Empty("lambda index set"));
                }
                if sets.len() != lambdas.len() {
                    return Err(ModelError::WrongSize {
                        what: "family tables",
                        expected: lambdas.len(),
                        found: sets.len(),
                    });
                }
                for (l, table) in sets.iter().enumerate() {
                    if table.len() != n || table.iter().any(|r| r.len() != n) {
                        return Err(ModelError::WrongSize {
                            what: "family table",
                            expected: n,
                            found: table.len(),
                        });
                    }
                    for (a, row) in table.iter().enumerate() {
                        for (b, poly) in row.iter().enumerate() {
                            if poly.dim() != cone.dim() {
                                return Err(GeometryError::DimensionMismatch {
                                    expected: cone.dim(),
                                    found: poly.dim(),
                                }
                                .into());
                            }
                            if !poly.lies_in(cone, tol) {
                                return Err(ModelError::FamilyOutsideCone {
                                    lambda: l,
                                    a: inst.label(a).to_string(),
                                    b: inst.label(b).to_string(),
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The same family written out as explicit tables.
    pub fn materialize(&self, space: &MetricSpace) -> PerturbationFamily {
        if let PerturbationFamily::ExtensionalFamily { .. } = self {
            return self.clone();
        }
        let n = space.len();
        let table = (0..n)
            .map(|x| {
                (0..n)
                    .map(|xp| {
                        let s = self.set(space, 0, x, xp);
                        s.poly.scaled(s.scale)
                    })
                    .collect()
            })
            .collect();
        PerturbationFamily::ExtensionalFamily {
            lambdas: vec!["0".to_string()],
            sets: vec![table],
        }
    }

    /// Whether `F(x, x) = {0}` for every `x`, which makes the order reflexive.
    pub fn is_distance_scaled(&self) -> bool {
        !matches!(self, PerturbationFamily::ExtensionalFamily { .. })
    }
}

/// Scalars supplied to the solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvpParams {
    pub x0: usize,
    pub epsilon: Option<f64>,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub tol: f64,
}

impl EvpParams {
    pub fn new(x0: usize, tol: f64) -> Self {
        Self {
            x0,
            epsilon: None,
            lambda: None,
            gamma: None,
            tol,
        }
    }

    fn require(what: &'static str, v: Option<f64>) -> Result<f64, ModelError> {
        match v {
            Some(v) if v.is_finite() && v > 0.0 => Ok(v),
            Some(v) => Err(ModelError::NonPositive { what, value: v }),
            None => Err(ModelError::NonPositive {
                what,
                value: f64::NAN,
            }),
        }
    }

    pub fn epsilon(&self) -> Result<f64, ModelError> {
        Self::require("epsilon", self.epsilon)
    }

    pub fn lambda(&self) -> Result<f64, ModelError> {
        Self::require("lambda", self.lambda)
    }

    pub fn gamma(&self) -> Result<f64, ModelError> {
        Self::require("gamma", self.gamma)
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::geometry::DEFAULT_TOLERANCE as TAU;

    #[test]
    fn metric_validation() {
        let l = labels(&["a", "b", "c"]);
        let bad = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        match MetricSpace::new(l.clone(), bad, TAU) {
            Err(ModelError::Triangle { a, b, c, .. }) => assert_eq!((a.as_str(), b.as_str(), c.as_str()), ("a", "b", "c")),
            other => panic!("unexpected {other:?}"),
        }
        let asym = vec![vec![0.0, 1.0, 1.0], vec![2.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]];
        assert!(matches!(MetricSpace::new(l.clone(), asym, TAU), Err(ModelError::Asymmetric { .. })));
        let zero = vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]];
        assert!(matches!(MetricSpace::new(l.clone(), zero, TAU), Err(ModelError::ZeroSeparation { .. })));
        assert!(matches!(
            MetricSpace::new(labels(&["a", "a"]), vec![vec![0.0, 1.0], vec![1.0, 0.0]], TAU),
            Err(ModelError::DuplicateLabel(_))
        ));
        let s = MetricSpace::from_coordinates(l, &[vec![0.0, 0.0], vec![3.0, 4.0], vec![0.0, 4.0]], TAU).unwrap();
        assert_eq!(s.d(0, 1), 5.0);
        assert_eq!(s.min_separation(), Some(3.0));
    }

    #[test]
    fn quasi_metric_validation() {
        let l = labels(&["a", "b"]);
        assert!(QuasiMetric::new(vec![vec![0.0, 1.0], vec![5.0, 0.0]], &l, TAU).is_ok());
        assert!(matches!(
            QuasiMetric::new(vec![vec![0.0, 0.0], vec![5.0, 0.0]], &l, TAU),
            Err(ModelError::ZeroSeparation { .. })
        ));
        assert!(matches!(
            QuasiMetric::new(vec![vec![1.0, 1.0], vec![5.0, 0.0]], &l, TAU),
            Err(ModelError::NonzeroDiagonal { .. })
        ));
        let l3 = labels(&["a", "b", "c"]);
        let p = vec![vec![0.0, 1.0, 9.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]];
        assert!(matches!(QuasiMetric::new(p, &l3, TAU), Err(ModelError::Triangle { .. })));
    }

    #[test]
    fn instance_validation() {
        let space = MetricSpace::new(labels(&["a"]), vec![vec![0.0]], TAU).unwrap();
        let empty = SetValuedMap::new(vec![vec![]]);
        assert!(matches!(
            FiniteInstance::new(halfline(), space.clone(), empty, TAU),
            Err(ModelError::EmptyValues(_))
        ));
        let wrong_dim = SetValuedMap::new(vec![vec![Point::from([1.0, 2.0])]]);
        assert!(matches!(
            FiniteInstance::new(halfline(), space, wrong_dim, TAU),
            Err(ModelError::Geometry(GeometryError::DimensionMismatch { .. }))
        ));
    }

    #[test]
    fn family_sets_and_validation() {
        let inst = two_point();
        let fam = PerturbationFamily::SingletonDirection {
            k0: Point::from([1.0]),
            gamma: 2.0,
        };
        fam.validate(&inst).unwrap();
        let s = fam.set(&inst.space, 0, 1, 0);
        assert_eq!(s.scale, 2.0);
        assert_eq!(s.poly.vertices(), &[Point::from([1.0])]);
        let bad = PerturbationFamily::SingletonDirection {
            k0: Point::from([-1.0]),
            gamma: 2.0,
        };
        assert!(bad.validate(&inst).is_err());
        let zero_rate = PerturbationFamily::SingletonDirection {
            k0: Point::from([1.0]),
            gamma: 0.0,
        };
        assert!(matches!(zero_rate.validate(&inst), Err(ModelError::NonPositive { .. })));
        let m = fam.materialize(&inst.space);
        m.validate(&inst).unwrap();
        let s = m.set(&inst.space, 0, 1, 0);
        assert_eq!((s.scale, s.poly.vertices()[0].coords()[0]), (1.0, 2.0));
    }

    #[test]
    fn quasi_metric_family_argument_order() {
        let inst = two_point();
        let p = QuasiMetric::new(vec![vec![0.0, 1.0], vec![5.0, 0.0]], inst.space.labels(), TAU).unwrap();
        let fam = PerturbationFamily::QuasiMetricDirection {
            h: Polytope::singleton(Point::from([1.0])),
            p,
        };
        // F(b, a) = p(a, b) H
        assert_eq!(fam.set(&inst.space, 0, 1, 0).scale, 1.0);
        assert_eq!(fam.set(&inst.space, 0, 0, 1).scale, 5.0);
    }
}
