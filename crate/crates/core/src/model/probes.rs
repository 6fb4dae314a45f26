//! Probes over explicit chains for sequential lower monotonicity, closedness
//! of the epigraph and dynamic closedness, plus approximate efficiency and
//! `D`-boundedness certificates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{minkowski_member, minkowski_witness, PolyhedralCone, Point, Polytope};

use super::order::{set_included, RelationMatrix};
use super::{FiniteInstance, ModelError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbeError {
    #[error("a chain probe needs at least two elements, found {0}")]
    ChainTooShort(usize),
    #[error("chain pair {index} has y outside f(x) + D")]
    NotInEpigraph { index: usize },
    #[error("epsilon must be a finite positive number, found {0}")]
    BadEpsilon(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn included(a: &[Point], b: &[Point], cone: &PolyhedralCone, tol: f64) -> Result<bool, ProbeError> {
    Ok(set_included(a, b, 0.0, None, cone, tol)?)
}

/// Sequential lower monotonicity along one chain.
///
/// True when the chain is not decreasing (`f(x_n) ⊂ f(x_{n+1}) + D` fails
/// somewhere), otherwise true iff `f(x_n) ⊂ f(limit) + D` for every `n`.
pub fn slm_probe(chain: &[Vec<Point>], limit: &[Point], cone: &PolyhedralCone, tol: f64) -> Result<bool, ProbeError> {
    if chain.len() < 2 {
        return Err(ProbeError::ChainTooShort(chain.len()));
    }
    for w in chain.windows(2) {
        if !included(&w[0], &w[1], cone, tol)? {
            return Ok(true);
        }
    }
    for v in chain {
        if !included(v, limit, cone, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `ȳ ∈ f(x̄) + D` for the limit of a chain of epigraph pairs.
///
/// Each chain entry is `(f(x_n), y_n)`; entries with `y_n ∉ f(x_n) + D` are
/// rejected.
pub fn epi_closed_probe(
    chain: &[(Vec<Point>, Point)],
    limit_values: &[Point],
    limit_y: &Point,
    cone: &PolyhedralCone,
    tol: f64,
) -> Result<bool, ProbeError> {
    for (index, (fx, y)) in chain.iter().enumerate() {
        if !minkowski_member(y, fx, 0.0, None, cone, tol).map_err(ModelError::from)? {
            return Err(ProbeError::NotInEpigraph { index });
        }
    }
    Ok(minkowski_member(limit_y, limit_values, 0.0, None, cone, tol).map_err(ModelError::from)?)
}

/// Dynamic closedness of `S(x)` along one chain of indices.
///
/// Vacuously true unless the chain lies in `S(x)` with nested sections;
/// then true iff `limit ∈ S(x)`.
pub fn dyn_closed_probe(rel: &RelationMatrix, x: usize, chain: &[usize], limit: usize) -> Result<bool, ProbeError> {
    if chain.len() < 2 {
        return Err(ProbeError::ChainTooShort(chain.len()));
    }
    let section = |z: usize| rel.lower_section(z);
    let s_x = section(x);
    let nested = chain.iter().all(|c| s_x.contains(c))
        && chain.windows(2).all(|w| {
            let outer = section(w[0]);
            section(w[1]).iter().all(|z| outer.contains(z)) && outer.iter().all(|z| s_x.contains(z))
        });
    Ok(!nested || s_x.contains(&limit))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyOutcome {
    pub efficient: bool,
    /// Index into `f(x0)` of a value `y0` with `(y0 - εH - D) ∩ f(X) = ∅`.
    pub witness: Option<usize>,
    /// For each value of `f(x0)`, the first `(x, value index)` that blocks it.
    pub blockers: Vec<(usize, usize)>,
}

/// `(ε, H)`-efficiency of `x0`: some `y0 ∈ f(x0)` outside `f(X) + εH + D`.
pub fn eps_h_efficient(inst: &FiniteInstance, x0: usize, epsilon: f64, h: &Polytope) -> Result<EfficiencyOutcome, ProbeError> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(ProbeError::BadEpsilon(epsilon));
    }
    let image = inst.map.image();
    let owners: Vec<(usize, usize)> = (0..inst.len())
        .flat_map(|x| (0..inst.f(x).len()).map(move |k| (x, k)))
        .collect();
    let mut blockers = Vec::new();
    for (k, y0) in inst.f(x0).iter().enumerate() {
        match minkowski_witness(y0, &image, epsilon, Some(h), &inst.cone, inst.tol).map_err(ModelError::from)? {
            None => {
                return Ok(EfficiencyOutcome {
                    efficient: true,
                    witness: Some(k),
                    blockers,
                })
            }
            Some(w) => blockers.push(owners[w.base_index]),
        }
    }
    Ok(EfficiencyOutcome {
        efficient: false,
        witness: None,
        blockers,
    })
}

/// A bounded `M` with `f(X) ⊂ M + D`: the union of all value sets.
pub fn d_bounded_certificate(inst: &FiniteInstance) -> Polytope {
    Polytope::new(inst.map.image()).expect("validated instances have nonempty value sets")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DEFAULT_TOLERANCE as TAU;
    use crate::model::fixtures::*;
    use crate::model::{relation_matrix, PerturbationFamily};

    fn p1(v: f64) -> Point {
        Point::from([v])
    }

    #[test]
    fn slm_examples() {
        let d = halfline();
        // x_n = -1/n with f(x) = {x}: the chain is not decreasing
        let chain: Vec<Vec<Point>> = (1..=6).map(|n| vec![p1(-1.0 / n as f64)]).collect();
        assert!(slm_probe(&chain, &[p1(1.0)], &d, TAU).unwrap());
        let constant = vec![vec![p1(2.0)]; 4];
        assert!(slm_probe(&constant, &[p1(2.0)], &d, TAU).unwrap());
        let down: Vec<Vec<Point>> = (1..=6).map(|n| vec![p1(1.0 / n as f64)]).collect();
        assert!(!slm_probe(&down, &[p1(1.0)], &d, TAU).unwrap());
        assert_eq!(slm_probe(&constant[..1], &[p1(2.0)], &d, TAU), Err(ProbeError::ChainTooShort(1)));
    }

    #[test]
    fn epi_examples() {
        let d = halfline();
        let chain: Vec<(Vec<Point>, Point)> = (1..=6)
            .map(|n| {
                let x = -1.0 / n as f64;
                (vec![p1(x)], p1(x))
            })
            .collect();
        assert!(!epi_closed_probe(&chain, &[p1(1.0)], &p1(0.0), &d, TAU).unwrap());
        let last = chain.last().unwrap().clone();
        assert!(epi_closed_probe(&chain, &last.0, &last.1, &d, TAU).unwrap());
        let zero_map: Vec<(Vec<Point>, Point)> = (1..=5).map(|n| (vec![p1(0.0)], p1(1.0 / n as f64))).collect();
        assert!(epi_closed_probe(&zero_map, &[p1(0.0)], &p1(0.0), &d, TAU).unwrap());
        let bad = vec![(vec![p1(1.0)], p1(0.0))];
        assert_eq!(
            epi_closed_probe(&bad, &[p1(0.0)], &p1(0.0), &d, TAU),
            Err(ProbeError::NotInEpigraph { index: 0 })
        );
    }

    #[test]
    fn efficiency_examples() {
        let h = Polytope::singleton(p1(1.0));
        let flat = scalar_instance(&[0.0, 0.0], &[0.0, 1.0]);
        let out = eps_h_efficient(&flat, 0, 0.5, &h).unwrap();
        assert!(out.efficient);
        assert_eq!(out.witness, Some(0));
        let inst = two_point();
        let out = eps_h_efficient(&inst, 0, 0.5, &h).unwrap();
        assert!(!out.efficient);
        assert_eq!(out.blockers, vec![(1, 0)]);
    }

    #[test]
    fn bounded_certificate_counts() {
        let inst = scalar_instance(&[1.0, 2.0, 3.0], &[0.0, 1.0, 2.0]);
        assert_eq!(d_bounded_certificate(&inst).vertices().len(), 3);
    }

    #[test]
    fn dyn_closed_on_a_ray_order() {
        let inst = scalar_instance(&[3.0, 2.0, 1.0], &[0.0, 1.0, 2.0]);
        let fam = PerturbationFamily::SingletonDirection { k0: p1(1.0), gamma: 0.5 };
        let rel = relation_matrix(&inst, &fam).unwrap();
        assert!(dyn_closed_probe(&rel, 0, &[1, 2], 2).unwrap());
    }
}
