//! Polyhedral geometry in `R^m`: points, ordering cones in halfspace form,
//! finite direction sets and the membership tests every order relation in
//! the crate reduces to.
//!
//! Cones are closed polyhedra `{y : A y >= 0}`, so the vectorial closure of
//! the cone coincides with the cone itself and no separate closure operation
//! exists here.

pub mod lp;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lp::{lp_feasible, Feasibility, LinearConstraint, LinearSystem, LpError, Relation};

/// Membership tolerance used throughout unless a caller overrides it.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),
    #[error("cone is trivial: {0}")]
    TrivialCone(&'static str),
    #[error("generator {index} lies outside the halfspace description")]
    GeneratorOutsideCone { index: usize },
    #[error("direction vertex {index} lies outside the ordering cone")]
    DirectionOutsideCone { index: usize },
    #[error("direction vertex {index} is the zero vector")]
    ZeroDirection { index: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// A point of `R^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Coordinatewise equality within `tol`.
    pub fn approx_eq(&self, other: &Point, tol: f64) -> bool {
        self.dim() == other.dim()
            && self.0.iter().zip(&other.0).all(|(a, b)| (a - b).abs() <= tol)
    }

    pub fn scaled(&self, s: f64) -> Point {
        Point(self.0.iter().map(|v| v * s).collect())
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<(), GeometryError> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(GeometryError::DimensionMismatch {
                expected,
                found: self.dim(),
            })
        }
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(v: [f64; N]) -> Self {
        Self(v.to_vec())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl Add for &Point {
    type Output = Point;
    fn add(self, rhs: &Point) -> Point {
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Point {
    type Output = Point;
    fn sub(self, rhs: &Point) -> Point {
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point(self.0.iter().map(|v| -v).collect())
    }
}

impl Mul<&Point> for f64 {
    type Output = Point;
    fn mul(self, rhs: &Point) -> Point {
        rhs.scaled(self)
    }
}

/// Closed convex cone `{y : a_i · y >= 0 for every row a_i}`.
///
/// The generator list is optional; when present it is cross-checked against
/// the halfspace rows at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyhedralCone {
    rows: Vec<Vec<f64>>,
    generators: Option<Vec<Point>>,
}

impl PolyhedralCone {
    pub fn new(rows: Vec<Vec<f64>>, tol: f64) -> Result<Self, GeometryError> {
        Self::with_generators(rows, None, tol)
    }

    pub fn with_generators(
        rows: Vec<Vec<f64>>,
        generators: Option<Vec<Point>>,
        tol: f64,
    ) -> Result<Self, GeometryError> {
        let Some(first) = rows.first() else {
            return Err(GeometryError::Empty("cone halfspace rows"));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(GeometryError::Empty("cone dimension"));
        }
        for r in &rows {
            if r.len() != dim {
                return Err(GeometryError::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(GeometryError::NonFinite("cone rows"));
            }
        }
        if rows.iter().all(|r| r.iter().all(|v| *v == 0.0)) {
            return Err(GeometryError::TrivialCone("every row is zero, the cone is the whole space"));
        }
        let cone = Self { rows, generators };
        if !cone.has_nonzero_member()? {
            return Err(GeometryError::TrivialCone("the cone reduces to the origin"));
        }
        if let Some(gens) = &cone.generators {
            for (index, g) in gens.iter().enumerate() {
                g.check_dim(dim)?;
                if !cone.contains(g, tol) {
                    return Err(GeometryError::GeneratorOutsideCone { index });
                }
            }
        }
        Ok(cone)
    }

    /// The nonnegative orthant `R^m_+`, with the unit vectors as generators.
    pub fn orthant(dim: usize) -> Self {
        let rows: Vec<Vec<f64>> = (0..dim)
            .map(|i| {
                let mut r = vec![0.0; dim];
                r[i] = 1.0;
                r
            })
            .collect();
        let gens = rows.iter().cloned().map(Point::new).collect();
        Self {
            rows,
            generators: Some(gens),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn generators(&self) -> Option<&[Point]> {
        self.generators.as_deref()
    }

    /// `a_i · y >= -tol` for every row.
    pub fn contains(&self, y: &Point, tol: f64) -> bool {
        self.rows.iter().all(|r| y.dot(r) >= -tol)
    }

    /// `D ∩ -D = {0}`, i.e. the rows have full column rank.
    pub fn is_pointed(&self) -> bool {
        matrix_rank(&self.rows, 1e-10) == self.dim()
    }

    fn has_nonzero_member(&self) -> Result<bool, GeometryError> {
        let m = self.dim();
        for j in 0..m {
            for sign in [1.0, -1.0] {
                let mut sys = LinearSystem::free(m);
                for r in &self.rows {
                    sys.push(LinearConstraint::ge(r.clone(), 0.0));
                }
                let mut e = vec![0.0; m];
                e[j] = sign;
                sys.push(LinearConstraint::ge(e, 1.0));
                if lp_feasible(&sys)?.is_feasible() {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

/// Checked form of [`PolyhedralCone::contains`].
pub fn cone_contains(cone: &PolyhedralCone, y: &Point, tol: f64) -> Result<bool, GeometryError> {
    y.check_dim(cone.dim())?;
    Ok(cone.contains(y, tol))
}

/// Convex hull of finitely many vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    vertices: Vec<Point>,
}

impl Polytope {
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        let Some(first) = vertices.first() else {
            return Err(GeometryError::Empty("polytope vertices"));
        };
        let dim = first.dim();
        for v in &vertices {
            v.check_dim(dim)?;
            if !v.is_finite() {
                return Err(GeometryError::NonFinite("polytope vertices"));
            }
        }
        Ok(Self { vertices })
    }

    pub fn singleton(p: Point) -> Self {
        Self { vertices: vec![p] }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn scaled(&self, s: f64) -> Polytope {
        Polytope {
            vertices: self.vertices.iter().map(|v| v.scaled(s)).collect(),
        }
    }

    /// Check the polytope is usable as a perturbation direction set:
    /// every vertex in the cone and none equal to zero.
    pub fn validate_direction_set(&self, cone: &PolyhedralCone, tol: f64) -> Result<(), GeometryError> {
        for (index, v) in self.vertices.iter().enumerate() {
            v.check_dim(cone.dim())?;
            if v.norm_inf() <= tol {
                return Err(GeometryError::ZeroDirection { index });
            }
            if !cone.contains(v, tol) {
                return Err(GeometryError::DirectionOutsideCone { index });
            }
        }
        Ok(())
    }

    /// Every vertex in the cone (zero allowed).
    pub fn lies_in(&self, cone: &PolyhedralCone, tol: f64) -> bool {
        self.vertices.iter().all(|v| cone.contains(v, tol))
    }

    /// Membership of `y` in the hull itself, each coordinate within `tol`.
    pub fn contains(&self, y: &Point, tol: f64) -> Result<bool, GeometryError> {
        y.check_dim(self.dim())?;
        let k = self.vertices.len();
        let mut sys = LinearSystem::nonnegative(k);
        sys.push(LinearConstraint::eq(vec![1.0; k], 1.0));
        for c in 0..self.dim() {
            let row: Vec<f64> = self.vertices.iter().map(|v| v.coords()[c]).collect();
            sys.push(LinearConstraint::le(row.clone(), y.coords()[c] + tol));
            sys.push(LinearConstraint::ge(row, y.coords()[c] - tol));
        }
        Ok(lp_feasible(&sys)?.is_feasible())
    }

    /// Every vertex is a nonnegative multiple of `ray` within `tol`.
    pub fn on_ray(&self, ray: &Point, tol: f64) -> bool {
        let nn = ray.dot(ray.coords());
        if nn == 0.0 {
            return false;
        }
        self.vertices.iter().all(|v| {
            let c = v.dot(ray.coords()) / nn;
            c >= -tol && v.approx_eq(&ray.scaled(c), tol.max(1e-12) * 10.0)
        })
    }
}

/// `y ↦ weights · y`; `alpha` records a certified lower bound over a
/// direction set when the functional came out of a separation argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFunctional {
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl LinearFunctional {
    pub fn new(weights: Vec<f64>) -> Self {
        Self {
            weights,
            alpha: None,
        }
    }

    pub fn value(&self, y: &Point) -> f64 {
        y.dot(&self.weights)
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights_norm_inf(&self) -> f64 {
        self.weights.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// Is the functional in the dual cone `D^+`? Decided exactly: `D^+` is
    /// generated by the halfspace rows, so this asks for `mu >= 0` with
    /// `A^T mu = weights` (each coordinate within `tol`). Stored generators,
    /// if any, are checked directly as well.
    pub fn in_dual_cone(&self, cone: &PolyhedralCone, tol: f64) -> Result<bool, GeometryError> {
        if self.dim() != cone.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: cone.dim(),
                found: self.dim(),
            });
        }
        if let Some(gens) = cone.generators() {
            if gens.iter().any(|g| g.dot(&self.weights) < -tol) {
                return Ok(false);
            }
        }
        let k = cone.rows().len();
        let mut sys = LinearSystem::nonnegative(k);
        for c in 0..cone.dim() {
            let col: Vec<f64> = cone.rows().iter().map(|r| r[c]).collect();
            sys.push(LinearConstraint::le(col.clone(), self.weights[c] + tol));
            sys.push(LinearConstraint::ge(col, self.weights[c] - tol));
        }
        Ok(lp_feasible(&sys)?.is_feasible())
    }
}

/// How a Minkowski membership was realized: which base point and which
/// convex weights over the direction vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipWitness {
    pub base_index: usize,
    pub weights: Vec<f64>,
}

/// Decide `y ∈ base + scale·conv(H) + C` and return how, if so.
///
/// `directions = None` tests `y ∈ base + C`. Single-vertex direction sets and
/// `scale == 0` are decided by direct cone tests; everything else goes
/// through one LP feasibility check per base point.
pub fn minkowski_witness(
    y: &Point,
    base: &[Point],
    scale: f64,
    directions: Option<&Polytope>,
    cone: &PolyhedralCone,
    tol: f64,
) -> Result<Option<MembershipWitness>, GeometryError> {
    if base.is_empty() {
        return Err(GeometryError::Empty("minkowski base set"));
    }
    let m = cone.dim();
    y.check_dim(m)?;
    for b in base {
        b.check_dim(m)?;
    }
    let dirs = match directions {
        Some(h) => {
            h.vertices()[0].check_dim(m)?;
            Some(h)
        }
        None => None,
    };

    for (base_index, b) in base.iter().enumerate() {
        let diff = y - b;
        match dirs {
            None => {
                if cone.contains(&diff, tol) {
                    return Ok(Some(MembershipWitness {
                        base_index,
                        weights: Vec::new(),
                    }));
                }
            }
            Some(h) if h.vertices().len() == 1 || scale == 0.0 => {
                let k = h.vertices().len();
                let shifted = &diff - &h.vertices()[0].scaled(scale);
                if cone.contains(&shifted, tol) {
                    let mut weights = vec![0.0; k];
                    weights[0] = 1.0;
                    return Ok(Some(MembershipWitness {
                        base_index,
                        weights,
                    }));
                }
            }
            Some(h) => {
                // sum_j lambda_j = 1, lambda >= 0,
                // a_i·(diff - scale·sum_j lambda_j h_j) >= -tol
                let k = h.vertices().len();
                let mut sys = LinearSystem::nonnegative(k);
                sys.push(LinearConstraint::eq(vec![1.0; k], 1.0));
                for row in cone.rows() {
                    let coeffs = h.vertices().iter().map(|v| scale * v.dot(row)).collect();
                    sys.push(LinearConstraint::le(coeffs, diff.dot(row) + tol));
                }
                if let Feasibility::Feasible(weights) = lp_feasible(&sys)? {
                    return Ok(Some(MembershipWitness {
                        base_index,
                        weights,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Boolean form of [`minkowski_witness`].
pub fn minkowski_member(
    y: &Point,
    base: &[Point],
    scale: f64,
    directions: Option<&Polytope>,
    cone: &PolyhedralCone,
    tol: f64,
) -> Result<bool, GeometryError> {
    Ok(minkowski_witness(y, base, scale, directions, cone, tol)?.is_some())
}

/// Find `w ∈ D^+` with `w · h >= 1` on every vertex of `H`, normalized so the
/// minimum over the vertices is exactly one.
///
/// `Ok(None)` means the LP is infeasible, which in the polyhedral setting
/// certifies `0 ∈ H + D`. The search runs over `w = A^T mu`, `mu >= 0`, which
/// parametrizes the dual cone exactly.
pub fn strictly_positive_functional(
    directions: &Polytope,
    cone: &PolyhedralCone,
    tol: f64,
) -> Result<Option<LinearFunctional>, GeometryError> {
    directions.validate_direction_set(cone, tol)?;
    let rows = cone.rows();
    let k = rows.len();
    let mut sys = LinearSystem::nonnegative(k);
    for h in directions.vertices() {
        let coeffs = rows.iter().map(|r| h.dot(r)).collect();
        sys.push(LinearConstraint::ge(coeffs, 1.0));
    }
    let Feasibility::Feasible(mu) = lp_feasible(&sys)? else {
        return Ok(None);
    };
    let m = cone.dim();
    let mut weights = vec![0.0; m];
    for (mu_i, row) in mu.iter().zip(rows) {
        for c in 0..m {
            weights[c] += mu_i * row[c];
        }
    }
    let alpha = directions
        .vertices()
        .iter()
        .map(|h| h.dot(&weights))
        .fold(f64::INFINITY, f64::min);
    if !(alpha > 0.0) {
        return Ok(None);
    }
    let weights: Vec<f64> = weights.iter().map(|w| w / alpha).collect();
    let alpha = directions
        .vertices()
        .iter()
        .map(|h| h.dot(&weights))
        .fold(f64::INFINITY, f64::min);
    Ok(Some(LinearFunctional {
        weights,
        alpha: Some(alpha),
    }))
}

fn matrix_rank(rows: &[Vec<f64>], eps: f64) -> usize {
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let n_rows = a.len();
    let n_cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..n_cols {
        let Some(p) = (rank..n_rows).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
        else {
            break;
        };
        if a[p][col].abs() <= eps {
            continue;
        }
        a.swap(rank, p);
        let pivot = a[rank].clone();
        for r in a.iter_mut().skip(rank + 1) {
            let f = r[col] / pivot[col];
            for (v, pv) in r.iter_mut().zip(&pivot) {
                *v -= f * pv;
            }
        }
        rank += 1;
    }
    rank
}
