//! Gerstewitz nonlinear scalarization over a polyhedral cone.
//!
//! For `D = {y : A y >= 0}` and a direction `k0 ∈ D \ -D`,
//! `y ∈ t·k0 - D` is the system `t·(a_i·k0) >= a_i·y`, so the infimum over `t`
//! has a closed form: the largest ratio over rows with `a_i·k0 > 0`, or `+∞`
//! when a row orthogonal to `k0` is violated.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::geometry::{GeometryError, LinearFunctional, PolyhedralCone, Point, Polytope};

/// An element of `R ∪ {+∞}`. There is no `-∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInfinity,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInfinity => None,
        }
    }

    /// `self + c` for a finite shift.
    pub fn shifted(self, c: f64) -> ExtReal {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v + c),
            ExtReal::PosInfinity => ExtReal::PosInfinity,
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other > self {
            other
        } else {
            self
        }
    }

    /// `self < other - gap`, with `+∞` never strictly below anything.
    pub fn strictly_below(self, other: ExtReal, gap: f64) -> bool {
        match (self, other) {
            (ExtReal::PosInfinity, _) => false,
            (ExtReal::Finite(_), ExtReal::PosInfinity) => true,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a < b - gap,
        }
    }

    /// Infimum of an iterator; `+∞` for an empty one.
    pub fn infimum<I: IntoIterator<Item = ExtReal>>(it: I) -> ExtReal {
        it.into_iter().fold(ExtReal::PosInfinity, ExtReal::min)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::PosInfinity, ExtReal::PosInfinity) => Some(Ordering::Equal),
            (ExtReal::PosInfinity, _) => Some(Ordering::Greater),
            (_, ExtReal::PosInfinity) => Some(Ordering::Less),
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtReal::PosInfinity
        } else {
            ExtReal::Finite(v)
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInfinity => write!(f, "+inf"),
        }
    }
}

// finite values serialize as numbers, +∞ as the string "+inf"
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::PosInfinity => s.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(ExtReal::Finite(v)),
            Repr::Str(s) if s == "+inf" || s == "inf" => Ok(ExtReal::PosInfinity),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"+inf\", found {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalarizationError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("k0 is not in the ordering cone")]
    DirectionOutsideCone,
    #[error("-k0 lies in the ordering cone (every row has a_i·k0 <= tol)")]
    DirectionInNegativeCone,
}

/// Where `y` sits relative to the level `r`, to tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelClass {
    Below,
    Boundary,
    Above,
}

/// `y ↦ inf{t : y ∈ t·k0 - D}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GerstewitzFn {
    cone: PolyhedralCone,
    k0: Point,
    /// `a_i · k0` per row
    row_rates: Vec<f64>,
    tol: f64,
}

impl GerstewitzFn {
    pub fn new(cone: PolyhedralCone, k0: Point, tol: f64) -> Result<Self, ScalarizationError> {
        k0.check_dim(cone.dim())?;
        if !cone.contains(&k0, tol) {
            return Err(ScalarizationError::DirectionOutsideCone);
        }
        let row_rates: Vec<f64> = cone.rows().iter().map(|r| k0.dot(r)).collect();
        if row_rates.iter().all(|&r| r <= tol) {
            return Err(ScalarizationError::DirectionInNegativeCone);
        }
        Ok(Self {
            cone,
            k0,
            row_rates,
            tol,
        })
    }

    pub fn cone(&self) -> &PolyhedralCone {
        &self.cone
    }

    pub fn k0(&self) -> &Point {
        &self.k0
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Rows with `0 < a_i·k0 <= tol`. They are handled like rows orthogonal
    /// to `k0`; a nonempty list suggests rescaling `k0`.
    pub fn flagged_rows(&self) -> Vec<usize> {
        self.row_rates
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > 0.0 && r <= self.tol)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn value(&self, y: &Point) -> ExtReal {
        let mut best = f64::NEG_INFINITY;
        for (row, &rate) in self.cone.rows().iter().zip(&self.row_rates) {
            let ay = y.dot(row);
            if rate > self.tol {
                best = best.max(ay / rate);
            } else if ay > self.tol {
                return ExtReal::PosInfinity;
            }
        }
        ExtReal::Finite(best)
    }

    /// Checked form of [`GerstewitzFn::value`].
    pub fn gz_value(&self, y: &Point) -> Result<ExtReal, GeometryError> {
        y.check_dim(self.cone.dim())?;
        Ok(self.value(y))
    }

    /// Classify `value(y)` against `r`; within `tol` of `r` is `Boundary`.
    pub fn level_class(&self, y: &Point, r: f64) -> LevelClass {
        match self.value(y) {
            ExtReal::PosInfinity => LevelClass::Above,
            ExtReal::Finite(v) if (v - r).abs() <= self.tol => LevelClass::Boundary,
            ExtReal::Finite(v) if v < r => LevelClass::Below,
            ExtReal::Finite(_) => LevelClass::Above,
        }
    }
}

/// Result of the bisection oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectOutcome {
    pub value: ExtReal,
    /// Set when the upper bracket could not be made feasible.
    pub expansion_capped: bool,
}

const BRACKET_DOUBLINGS: usize = 60;

/// Independent oracle for the Gerstewitz value: bisection on the predicate
/// `t·k0 - y ∈ D`, which is monotone in `t`.
///
/// The bracket `[lo, hi]` is widened by doubling until `lo` is infeasible and
/// `hi` feasible; if `hi` never becomes feasible the verdict is `+∞`. The
/// membership slack inside the search is `tol / 100` so the bracket width,
/// not the slack, dominates the error.
pub fn gz_bisect_oracle(g: &GerstewitzFn, y: &Point, lo: f64, hi: f64, tol: f64) -> BisectOutcome {
    let slack = tol * 1e-2;
    let feasible = |t: f64| g.cone().contains(&(&g.k0().scaled(t) - y), slack);
    let (mut lo, mut hi) = (lo.min(hi), lo.max(hi));
    let mut width = (hi - lo).max(1.0);
    let mut doublings = 0;
    while !feasible(hi) {
        if doublings == BRACKET_DOUBLINGS {
            return BisectOutcome {
                value: ExtReal::PosInfinity,
                expansion_capped: true,
            };
        }
        lo = hi;
        hi += width;
        width *= 2.0;
        doublings += 1;
    }
    let mut width = (hi - lo).max(1.0);
    while feasible(lo) {
        hi = lo;
        lo -= width;
        width *= 2.0;
    }
    while hi - lo > tol * 1e-2 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    BisectOutcome {
        value: ExtReal::Finite(hi),
        expansion_capped: false,
    }
}

/// Bracket for [`gz_bisect_oracle`] built from coordinate magnitudes.
pub fn default_bracket(g: &GerstewitzFn, y: &Point) -> (f64, f64) {
    let scale = 1.0 + y.norm_inf() / g.k0().norm_inf().max(f64::MIN_POSITIVE);
    (-scale, scale)
}

/// A `D`-monotone potential: either a dual-cone linear functional or a
/// Gerstewitz functional evaluated at `y - origin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scalarizer {
    Linear(LinearFunctional),
    Gerstewitz {
        g: GerstewitzFn,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        origin: Option<Point>,
    },
}

impl Scalarizer {
    pub fn gerstewitz(g: GerstewitzFn) -> Self {
        Scalarizer::Gerstewitz { g, origin: None }
    }

    pub fn gerstewitz_at(g: GerstewitzFn, origin: Point) -> Self {
        Scalarizer::Gerstewitz {
            g,
            origin: Some(origin),
        }
    }

    pub fn value(&self, y: &Point) -> ExtReal {
        match self {
            Scalarizer::Linear(l) => ExtReal::Finite(l.value(y)),
            Scalarizer::Gerstewitz { g, origin: None } => g.value(y),
            Scalarizer::Gerstewitz { g, origin: Some(o) } => g.value(&(y - o)),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Scalarizer::Linear(_))
    }

    pub fn dim(&self) -> usize {
        match self {
            Scalarizer::Linear(l) => l.dim(),
            Scalarizer::Gerstewitz { g, .. } => g.cone().dim(),
        }
    }

    /// `inf ξ` over a finite set; `+∞` when empty.
    pub fn inf_over<'a, I: IntoIterator<Item = &'a Point>>(&self, pts: I) -> ExtReal {
        ExtReal::infimum(pts.into_iter().map(|p| self.value(p)))
    }

    /// The largest `c` with `ξ(y + q) >= ξ(y) + c` for every `y` and every
    /// `q ∈ scale·conv(H)`, when it is known exactly.
    ///
    /// Linear `ξ` gives the vertex minimum of `w·q`. The Gerstewitz functional
    /// is only additive along `k0`, so the bound exists when every scaled
    /// vertex lies on that ray, where it equals the smallest ray coordinate.
    pub fn increment_bound(&self, scale: f64, h: &Polytope) -> Option<ExtReal> {
        match self {
            Scalarizer::Linear(l) => Some(ExtReal::infimum(
                h.vertices().iter().map(|v| ExtReal::Finite(scale * l.value(v))),
            )),
            Scalarizer::Gerstewitz { g, .. } => {
                if scale == 0.0 {
                    return Some(ExtReal::Finite(0.0));
                }
                if !h.on_ray(g.k0(), g.tolerance()) {
                    return None;
                }
                Some(ExtReal::infimum(
                    h.vertices().iter().map(|v| g.value(&v.scaled(scale))),
                ))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DEFAULT_TOLERANCE as TAU;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec())
    }

    fn orthant_gz(k0: &[f64]) -> GerstewitzFn {
        GerstewitzFn::new(PolyhedralCone::orthant(k0.len()), p(k0), TAU).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let g = orthant_gz(&[1.0, 1.0]);
        assert_eq!(g.value(&p(&[2.0, 3.0])), ExtReal::Finite(3.0));
        assert_eq!(g.value(&p(&[1.0, 1.0])), ExtReal::Finite(1.0));
        assert_eq!(g.value(&p(&[0.0, 0.0])), ExtReal::Finite(0.0));
        let g = orthant_gz(&[1.0, 0.0]);
        assert_eq!(g.value(&p(&[0.0, 1.0])), ExtReal::PosInfinity);
    }

    #[test]
    fn bisection_examples() {
        let g = orthant_gz(&[1.0, 1.0]);
        let y = p(&[2.0, 3.0]);
        let (lo, hi) = default_bracket(&g, &y);
        let out = gz_bisect_oracle(&g, &y, lo, hi, TAU);
        assert!((out.value.finite().unwrap() - 3.0).abs() < 1e-8);
        let y = p(&[5.0, 5.0]);
        let out = gz_bisect_oracle(&g, &y, -1.0, 1.0, TAU);
        assert!((out.value.finite().unwrap() - 5.0).abs() < 1e-8);
        let g = orthant_gz(&[1.0, 0.0]);
        let out = gz_bisect_oracle(&g, &p(&[0.0, 1.0]), -1.0, 1.0, TAU);
        assert_eq!(out.value, ExtReal::PosInfinity);
        assert!(out.expansion_capped);
    }

    #[test]
    fn negative_cone_points_are_nonpositive() {
        let g = orthant_gz(&[1.0, 2.0]);
        for y in [p(&[-1.0, -3.0]), p(&[0.0, -0.5]), p(&[-2.0, 0.0])] {
            assert!(g.value(&y) <= ExtReal::Finite(0.0));
            let out = gz_bisect_oracle(&g, &y, -1.0, 1.0, TAU);
            assert!(out.value.finite().unwrap() <= 1e-8);
        }
    }

    #[test]
    fn invalid_directions() {
        let c = PolyhedralCone::orthant(2);
        assert_eq!(
            GerstewitzFn::new(c.clone(), p(&[-1.0, 1.0]), TAU),
            Err(ScalarizationError::DirectionOutsideCone)
        );
        assert_eq!(
            GerstewitzFn::new(c.clone(), p(&[0.0, 0.0]), TAU),
            Err(ScalarizationError::DirectionInNegativeCone)
        );
        // a halfplane whose boundary line contains k0
        let half = PolyhedralCone::new(vec![vec![0.0, 1.0]], TAU).unwrap();
        assert_eq!(
            GerstewitzFn::new(half, p(&[1.0, 0.0]), TAU),
            Err(ScalarizationError::DirectionInNegativeCone)
        );
    }

    #[test]
    fn tiny_rates_are_flagged() {
        let c = PolyhedralCone::new(vec![vec![1.0, 0.0], vec![1e-12, 1.0]], TAU).unwrap();
        let g = GerstewitzFn::new(c, p(&[1.0, 0.0]), TAU).unwrap();
        assert_eq!(g.flagged_rows(), vec![1]);
        assert_eq!(g.value(&p(&[0.0, 1.0])), ExtReal::PosInfinity);
    }

    #[test]
    fn level_classes() {
        let g = orthant_gz(&[1.0, 1.0]);
        assert_eq!(g.level_class(&p(&[2.0, 3.0]), 3.0), LevelClass::Boundary);
        assert_eq!(g.level_class(&p(&[2.0, 3.0]), 4.0), LevelClass::Below);
        assert_eq!(g.level_class(&p(&[2.0, 3.0]), 2.0), LevelClass::Above);
    }

    #[test]
    fn ext_real_ordering_and_serde() {
        assert!(ExtReal::Finite(1e300) < ExtReal::PosInfinity);
        assert!(ExtReal::Finite(0.0).strictly_below(ExtReal::PosInfinity, 1.0));
        assert!(!ExtReal::PosInfinity.strictly_below(ExtReal::PosInfinity, 0.0));
        assert_eq!(ExtReal::infimum([]), ExtReal::PosInfinity);
        let s = serde_json::to_string(&[ExtReal::Finite(1.5), ExtReal::PosInfinity]).unwrap();
        assert_eq!(s, "[1.5,\"+inf\"]");
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![ExtReal::Finite(1.5), ExtReal::PosInfinity]);
    }

    #[test]
    fn increment_bounds() {
        let g = Scalarizer::gerstewitz(orthant_gz(&[1.0, 1.0]));
        let ray = Polytope::new(vec![p(&[1.0, 1.0]), p(&[2.0, 2.0])]).unwrap();
        assert_eq!(g.increment_bound(0.5, &ray), Some(ExtReal::Finite(0.5)));
        let off = Polytope::new(vec![p(&[1.0, 0.0]), p(&[0.0, 1.0])]).unwrap();
        assert_eq!(g.increment_bound(1.0, &off), None);
        let lin = Scalarizer::Linear(LinearFunctional::new(vec![0.5, 0.5]));
        assert_eq!(lin.increment_bound(2.0, &off), Some(ExtReal::Finite(1.0)));
    }

    #[test]
    fn shifted_gerstewitz() {
        let s = Scalarizer::gerstewitz_at(orthant_gz(&[1.0, 1.0]), p(&[1.0, 2.0]));
        assert_eq!(s.value(&p(&[1.0, 2.0])), ExtReal::Finite(0.0));
        assert_eq!(s.value(&p(&[3.0, 2.0])), ExtReal::Finite(2.0));
        let back: Scalarizer = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
