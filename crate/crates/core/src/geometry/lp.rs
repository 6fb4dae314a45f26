//! Dense phase-one simplex for small feasibility problems.
//!
//! Every order test in the crate reduces to "does this tiny system of linear
//! inequalities have a solution". Systems have at most a few dozen rows, so a
//! dense tableau with Bland's anti-cycling rule is plenty.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Pivot tolerance for the tableau.
const PIVOT_EPS: f64 = 1e-12;
/// Phase-one objective below which the system is declared feasible.
/// Rows are normalized to unit max-coefficient before solving.
const FEASIBILITY_EPS: f64 = 1e-11;
/// Hard cap on pivots. Bland's rule cannot cycle, so hitting this means the
/// input is numerically hostile.
const MAX_PIVOTS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    /// `coeffs · x <= rhs`
    Le,
    /// `coeffs · x >= rhs`
    Ge,
    /// `coeffs · x == rhs`
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }

    pub fn ge(coeffs: Vec<f64>, rhs: f64) -> Self {
        Self::new(coeffs, Relation::Ge, rhs)
    }

    pub fn le(coeffs: Vec<f64>, rhs: f64) -> Self {
        Self::new(coeffs, Relation::Le, rhs)
    }

    pub fn eq(coeffs: Vec<f64>, rhs: f64) -> Self {
        Self::new(coeffs, Relation::Eq, rhs)
    }

    /// Signed violation at `x`: zero when satisfied, positive otherwise.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs: f64 = self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A conjunction of linear constraints over `n_vars` variables, each either
/// free or sign-constrained to be nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSystem {
    n_vars: usize,
    nonneg: Vec<bool>,
    constraints: Vec<LinearConstraint>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("linear system needs at least one variable")]
    NoVariables,
    #[error("constraint {index} has {found} coefficients, expected {expected}")]
    Arity {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("constraint {index} has a non-finite coefficient")]
    NonFinite { index: usize },
    #[error("simplex exceeded {0} pivots without terminating")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(Vec<f64>),
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn witness(&self) -> Option<&[f64]> {
        match self {
            Feasibility::Feasible(x) => Some(x),
            Feasibility::Infeasible => None,
        }
    }
}

impl LinearSystem {
    /// All variables free.
    pub fn free(n_vars: usize) -> Self {
        Self {
            n_vars,
            nonneg: vec![false; n_vars],
            constraints: Vec::new(),
        }
    }

    /// All variables nonnegative.
    pub fn nonnegative(n_vars: usize) -> Self {
        Self {
            n_vars,
            nonneg: vec![true; n_vars],
            constraints: Vec::new(),
        }
    }

    pub fn with_sign_constraints(nonneg: Vec<bool>) -> Self {
        Self {
            n_vars: nonneg.len(),
            nonneg,
            constraints: Vec::new(),
        }
    }

    pub fn push(&mut self, c: LinearConstraint) -> &mut Self {
        self.constraints.push(c);
        self
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn is_nonneg(&self, var: usize) -> bool {
        self.nonneg[var]
    }

    /// Largest violation of any constraint or sign restriction at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let sign = x
            .iter()
            .zip(&self.nonneg)
            .filter(|(_, &nn)| nn)
            .map(|(v, _)| (-v).max(0.0))
            .fold(0.0, f64::max);
        self.constraints
            .iter()
            .map(|c| c.violation(x))
            .fold(sign, f64::max)
    }

    fn validate(&self) -> Result<(), LpError> {
        if self.n_vars == 0 {
            return Err(LpError::NoVariables);
        }
        for (index, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.n_vars {
                return Err(LpError::Arity {
                    index,
                    expected: self.n_vars,
                    found: c.coeffs.len(),
                });
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(LpError::NonFinite { index });
            }
        }
        Ok(())
    }
}

/// Decide feasibility of `sys`, returning a witness when one exists.
///
/// Deterministic for a fixed input. Free variables are split into a
/// nonnegative difference; each row is scaled so its largest magnitude
/// (coefficient or right-hand side) is one.
pub fn lp_feasible(sys: &LinearSystem) -> Result<Feasibility, LpError> {
    sys.validate()?;
    if sys.constraints.is_empty() {
        return Ok(Feasibility::Feasible(vec![0.0; sys.n_vars]));
    }

    // column layout: structural columns, then slack/surplus, then artificials
    let mut col_of_var = Vec::with_capacity(sys.n_vars);
    let mut n_struct = 0;
    for &nn in &sys.nonneg {
        col_of_var.push(n_struct);
        n_struct += if nn { 1 } else { 2 };
    }

    struct Row {
        coeffs: Vec<f64>,
        relation: Relation,
        rhs: f64,
    }
    let rows: Vec<Row> = sys
        .constraints
        .iter()
        .map(|c| {
            let mut coeffs = vec![0.0; n_struct];
            for (v, &a) in c.coeffs.iter().enumerate() {
                let col = col_of_var[v];
                coeffs[col] = a;
                if !sys.nonneg[v] {
                    coeffs[col + 1] = -a;
                }
            }
            let scale = coeffs
                .iter()
                .chain(std::iter::once(&c.rhs))
                .fold(0.0_f64, |m, v| m.max(v.abs()));
            let (mut coeffs, mut rhs, mut relation) = if scale > 0.0 {
                (
                    coeffs.iter().map(|v| v / scale).collect::<Vec<_>>(),
                    c.rhs / scale,
                    c.relation,
                )
            } else {
                (coeffs, 0.0, c.relation)
            };
            if rhs < 0.0 {
                coeffs.iter_mut().for_each(|v| *v = -*v);
                rhs = -rhs;
                relation = match relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            Row {
                coeffs,
                relation,
                rhs,
            }
        })
        .collect();

    let m = rows.len();
    let n_slack = rows
        .iter()
        .filter(|r| r.relation != Relation::Eq)
        .count();
    let n_art = rows
        .iter()
        .filter(|r| r.relation != Relation::Le)
        .count();
    let n_cols = n_struct + n_slack + n_art;
    let rhs_col = n_cols;

    let mut tab = vec![vec![0.0; n_cols + 1]; m];
    let mut basis = vec![0usize; m];
    let mut is_art = vec![false; n_cols];
    let mut next_slack = n_struct;
    let mut next_art = n_struct + n_slack;
    for (i, r) in rows.iter().enumerate() {
        tab[i][..n_struct].copy_from_slice(&r.coeffs);
        tab[i][rhs_col] = r.rhs;
        match r.relation {
            Relation::Le => {
                tab[i][next_slack] = 1.0;
                basis[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                tab[i][next_slack] = -1.0;
                next_slack += 1;
                tab[i][next_art] = 1.0;
                is_art[next_art] = true;
                basis[i] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                tab[i][next_art] = 1.0;
                is_art[next_art] = true;
                basis[i] = next_art;
                next_art += 1;
            }
        }
    }

    // reduced costs of "minimize sum of artificials"
    let mut cost = vec![0.0; n_cols + 1];
    for j in 0..n_cols {
        if is_art[j] {
            cost[j] = 1.0;
        }
    }
    for i in 0..m {
        if is_art[basis[i]] {
            for j in 0..=n_cols {
                cost[j] -= tab[i][j];
            }
        }
    }

    let mut pivots = 0;
    loop {
        // Bland: lowest-index improving column
        let Some(enter) = (0..n_cols).find(|&j| cost[j] < -PIVOT_EPS) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let a = tab[i][enter];
            if a > PIVOT_EPS {
                let ratio = tab[i][rhs_col] / a;
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best - PIVOT_EPS
                            || (ratio <= best + PIVOT_EPS && basis[i] < basis[l])
                    }
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        // phase one is bounded below by zero, so an improving column always
        // has a positive entry; treat the degenerate alternative as optimal
        let Some(row) = leave else { break };
        pivot(&mut tab, &mut cost, row, enter);
        basis[row] = enter;
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(LpError::IterationLimit(MAX_PIVOTS));
        }
    }

    let infeasibility = -cost[rhs_col];
    if infeasibility > FEASIBILITY_EPS {
        return Ok(Feasibility::Infeasible);
    }

    let mut columns = vec![0.0; n_struct];
    for i in 0..m {
        if basis[i] < n_struct {
            columns[basis[i]] = tab[i][rhs_col].max(0.0);
        }
    }
    let x = (0..sys.n_vars)
        .map(|v| {
            let col = col_of_var[v];
            if sys.nonneg[v] {
                columns[col]
            } else {
                columns[col] - columns[col + 1]
            }
        })
        .collect();
    Ok(Feasibility::Feasible(x))
}

fn pivot(tab: &mut [Vec<f64>], cost: &mut [f64], row: usize, col: usize) {
    let p = tab[row][col];
    for v in tab[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = tab[row].clone();
    for (i, r) in tab.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let f = r[col];
        if f != 0.0 {
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
    }
    let f = cost[col];
    if f != 0.0 {
        for (v, pv) in cost.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
    }
}
