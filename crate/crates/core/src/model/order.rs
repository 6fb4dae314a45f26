//! The order `x2 ⪯ x1 ⟺ f(x1) ⊂ f(x2) + F_λ(x2, x1) + D` for every `λ`,
//! its lower sections, and the triangle-inclusion property of families.

use serde::{Deserialize, Serialize};

use crate::geometry::{minkowski_member, PolyhedralCone, Point, Polytope};

use super::{FiniteInstance, ModelError, PerturbationFamily};

/// `A ⊂ B + scale·conv(H) + D`, one LP per element of `A`.
pub fn set_included(
    a: &[Point],
    b: &[Point],
    scale: f64,
    h: Option<&Polytope>,
    cone: &PolyhedralCone,
    tol: f64,
) -> Result<bool, ModelError> {
    for y in a {
        if !minkowski_member(y, b, scale, h, cone, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `x2 ⪯ x1`.
pub fn preceq(inst: &FiniteInstance, fam: &PerturbationFamily, x2: usize, x1: usize) -> Result<bool, ModelError> {
    for lambda in 0..fam.lambda_count() {
        let s = fam.set(&inst.space, lambda, x2, x1);
        if !set_included(inst.f(x1), inst.f(x2), s.scale, Some(&s.poly), &inst.cone, inst.tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `rel[x2][x1] = (x2 ⪯ x1)` for every pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationMatrix {
    rel: Vec<Vec<bool>>,
}

impl RelationMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        Self {
            rel: (0..n).map(|a| (0..n).map(|b| f(a, b)).collect()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rel.is_empty()
    }

    /// `x2 ⪯ x1`.
    pub fn holds(&self, x2: usize, x1: usize) -> bool {
        self.rel[x2][x1]
    }

    /// `S(x) = {x' : x' ⪯ x}` in index order.
    pub fn lower_section(&self, x: usize) -> Vec<usize> {
        (0..self.len()).filter(|&xp| self.rel[xp][x]).collect()
    }

    pub fn sections(&self) -> Vec<Vec<usize>> {
        (0..self.len()).map(|x| self.lower_section(x)).collect()
    }

    /// First triple with `c ⪯ b ⪯ a` but not `c ⪯ a`.
    pub fn transitivity_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.len();
        for a in 0..n {
            for b in 0..n {
                if !self.rel[b][a] {
                    continue;
                }
                for c in 0..n {
                    if self.rel[c][b] && !self.rel[c][a] {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }

    /// Every pair related here is related in `other`.
    pub fn is_subrelation_of(&self, other: &RelationMatrix) -> bool {
        self.rel
            .iter()
            .zip(&other.rel)
            .all(|(r, o)| r.iter().zip(o).all(|(&a, &b)| !a || b))
    }

    pub fn count(&self) -> usize {
        self.rel.iter().flatten().filter(|&&b| b).count()
    }
}

pub fn relation_matrix(inst: &FiniteInstance, fam: &PerturbationFamily) -> Result<RelationMatrix, ModelError> {
    let n = inst.len();
    let mut rel = vec![vec![false; n]; n];
    for (x2, row) in rel.iter_mut().enumerate() {
        for (x1, cell) in row.iter_mut().enumerate() {
            *cell = preceq(inst, fam, x2, x1)?;
        }
    }
    Ok(RelationMatrix { rel })
}

/// `S(x)` evaluated directly.
pub fn s_set(inst: &FiniteInstance, fam: &PerturbationFamily, x: usize) -> Result<Vec<usize>, ModelError> {
    let mut out = Vec::new();
    for xp in 0..inst.len() {
        if preceq(inst, fam, xp, x)? {
            out.push(xp);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiMethod {
    /// Reduced to the triangle inequality of the distance.
    Algebraic,
    /// Every `(x1, x2, x3, λ)` searched over `(μ, ν)` with LP inclusions.
    Enumerated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiReport {
    pub holds: bool,
    pub method: TiMethod,
    /// `(x1, x2, x3, λ)` with no admissible `(μ, ν)`.
    pub violation: Option<(usize, usize, usize, usize)>,
}

/// Triangle inclusion `F_μ(x1, x2) + F_ν(x2, x3) ⊂ F_λ(x1, x3) + D`.
///
/// For distance-scaled families with `H ⊂ D`, convexity gives
/// `aH + bH = (a + b)H`, and `(a + b)H ⊂ cH + D` whenever `c <= a + b`;
/// so the property is the triangle inequality of the scaling distance.
pub fn ti_check(inst: &FiniteInstance, fam: &PerturbationFamily) -> Result<TiReport, ModelError> {
    let n = inst.len();
    let tol = inst.tol;
    if fam.is_distance_scaled() {
        let scale = |a: usize, b: usize| fam.set(&inst.space, 0, a, b).scale;
        for x1 in 0..n {
            for x2 in 0..n {
                for x3 in 0..n {
                    if scale(x1, x3) > scale(x1, x2) + scale(x2, x3) + tol {
                        return Ok(TiReport {
                            holds: false,
                            method: TiMethod::Algebraic,
                            violation: Some((x1, x2, x3, 0)),
                        });
                    }
                }
            }
        }
        return Ok(TiReport {
            holds: true,
            method: TiMethod::Algebraic,
            violation: None,
        });
    }
    let lambdas = fam.lambda_count();
    let zero = [Point::zeros(inst.dim())];
    for x1 in 0..n {
        for x2 in 0..n {
            for x3 in 0..n {
                for l in 0..lambdas {
                    let target = fam.set(&inst.space, l, x1, x3);
                    let mut found = false;
                    'search: for mu in 0..lambdas {
                        let a = fam.set(&inst.space, mu, x1, x2);
                        for nu in 0..lambdas {
                            let b = fam.set(&inst.space, nu, x2, x3);
                            let mut sums = Vec::new();
                            for u in a.poly.vertices() {
                                for v in b.poly.vertices() {
                                    sums.push(&u.scaled(a.scale) + &v.scaled(b.scale));
                                }
                            }
                            if set_included(&sums, &zero, target.scale, Some(&target.poly), &inst.cone, tol)? {
                                found = true;
                                break 'search;
                            }
                        }
                    }
                    if !found {
                        return Ok(TiReport {
                            holds: false,
                            method: TiMethod::Enumerated,
                            violation: Some((x1, x2, x3, l)),
                        });
                    }
                }
            }
        }
    }
    Ok(TiReport {
        holds: true,
        method: TiMethod::Enumerated,
        violation: None,
    })
}
