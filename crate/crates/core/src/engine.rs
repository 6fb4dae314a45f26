//! The pre-order principle made constructive: from `x0`, repeatedly pick a
//! near-infimal point of the current lower section until the section is
//! contained in the singleton of the current point.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalarization::ExtReal;

/// Lower sections `S(x)` over indices `0..n` and a potential `η`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreorderOracle {
    labels: Vec<String>,
    successors: Vec<Vec<usize>>,
    eta: Vec<ExtReal>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("oracle has {labels} labels, {successors} sections and {eta} potential values")]
    Shape {
        labels: usize,
        successors: usize,
        eta: usize,
    },
    #[error("section of {0:?} names an index outside the label set")]
    BadSuccessor(String),
    #[error("start index {0} is out of range")]
    BadStart(usize),
    #[error("S(x0) is empty")]
    EmptyStart,
    #[error("hypothesis (A) fails: inf of eta over S(x0) is {0}")]
    HypothesisA(ExtReal),
    #[error("hypothesis (B) fails: no termination after {steps} steps, cycle {cycle:?}")]
    HypothesisB { steps: usize, cycle: Vec<String> },
}

impl PreorderOracle {
    pub fn new(labels: Vec<String>, mut successors: Vec<Vec<usize>>, eta: Vec<ExtReal>) -> Result<Self, EngineError> {
        let n = labels.len();
        if successors.len() != n || eta.len() != n {
            return Err(EngineError::Shape {
                labels: n,
                successors: successors.len(),
                eta: eta.len(),
            });
        }
        for (x, s) in successors.iter_mut().enumerate() {
            if s.iter().any(|&z| z >= n) {
                return Err(EngineError::BadSuccessor(labels[x].clone()));
            }
            s.sort_unstable();
            s.dedup();
        }
        Ok(Self { labels, successors, eta })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// `S(x)`, sorted.
    pub fn successors(&self, x: usize) -> &[usize] {
        &self.successors[x]
    }

    pub fn eta(&self, x: usize) -> ExtReal {
        self.eta[x]
    }

    pub fn inf_eta(&self, xs: &[usize]) -> ExtReal {
        ExtReal::infimum(xs.iter().map(|&x| self.eta[x]))
    }

    /// First `(x, x')` with `x' ∈ S(x)` and `η(x') > η(x) + tol`.
    pub fn monotonicity_violation(&self, tol: f64) -> Option<(usize, usize)> {
        (0..self.len()).find_map(|x| {
            self.successors[x]
                .iter()
                .find(|&&xp| self.eta[x].strictly_below(self.eta[xp], tol))
                .map(|&xp| (x, xp))
        })
    }

    /// First `(x, x', x'')` with `x' ∈ S(x)`, `x'' ∈ S(x')` but `x'' ∉ S(x)`.
    pub fn transitivity_violation(&self) -> Option<(usize, usize, usize)> {
        for x in 0..self.len() {
            for &xp in &self.successors[x] {
                for &xpp in &self.successors[xp] {
                    if self.successors[x].binary_search(&xpp).is_err() {
                        return Some((x, xp, xpp));
                    }
                }
            }
        }
        None
    }

    fn is_terminal(&self, x: usize) -> bool {
        self.successors[x].iter().all(|&z| z == x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineMode {
    /// Any point within `2^-n` of the section infimum.
    Faithful,
    /// The exact minimizer of `η` over the section.
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iterate {
    pub step: usize,
    pub x: usize,
    pub eta: ExtReal,
    /// `inf η` over the section the point was picked from.
    pub section_inf: ExtReal,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineTrace {
    pub mode: EngineMode,
    pub start: usize,
    pub iterates: Vec<Iterate>,
    pub terminal: usize,
}

/// Runs the construction from `x0`.
///
/// Step `n` picks `x_n ∈ S(x_{n-1})` with `η(x_n) < inf η∘S(x_{n-1}) + 2^-n`
/// (faithful) or `η(x_n) = inf η∘S(x_{n-1})` (greedy). Among admissible
/// points one different from `x_{n-1}` is preferred, then the lowest index;
/// under (B) every step then strictly lowers `η`, so at most `|X|` steps are
/// taken. Reaching `|X| + 1` steps reports a (B) violation with the cycle.
pub fn solve_theorem21(oracle: &PreorderOracle, x0: usize, mode: EngineMode) -> Result<(usize, EngineTrace), EngineError> {
    if x0 >= oracle.len() {
        return Err(EngineError::BadStart(x0));
    }
    let s0 = oracle.successors(x0);
    if s0.is_empty() {
        return Err(EngineError::EmptyStart);
    }
    let inf0 = oracle.inf_eta(s0);
    if !inf0.is_finite() {
        return Err(EngineError::HypothesisA(inf0));
    }
    let mut iterates = Vec::new();
    let mut prev = x0;
    let limit = oracle.len() + 1;
    for step in 1..=limit {
        let section = oracle.successors(prev);
        let inf = oracle.inf_eta(section);
        let slack = match mode {
            EngineMode::Faithful => 0.5f64.powi(step as i32),
            EngineMode::Greedy => 0.0,
        };
        let admissible = |&x: &usize| match (oracle.eta(x), inf) {
            (ExtReal::Finite(v), ExtReal::Finite(i)) => match mode {
                EngineMode::Faithful => v < i + slack,
                EngineMode::Greedy => v <= i,
            },
            _ => false,
        };
        let pick = section
            .iter()
            .copied()
            .filter(admissible)
            .find(|&x| x != prev)
            .or_else(|| section.iter().copied().find(admissible));
        let Some(x) = pick else {
            // only reachable when η is not monotone along the sections
            return Err(EngineError::HypothesisA(inf));
        };
        iterates.push(Iterate {
            step,
            x,
            eta: oracle.eta(x),
            section_inf: inf,
            slack,
        });
        if oracle.is_terminal(x) {
            return Ok((
                x,
                EngineTrace {
                    mode,
                    start: x0,
                    iterates,
                    terminal: x,
                },
            ));
        }
        prev = x;
    }
    let xs: Vec<usize> = iterates.iter().map(|it| it.x).collect();
    let last = *xs.last().expect("at least one step was taken");
    let first = xs.iter().position(|&x| x == last).unwrap_or(0);
    let cycle = xs[first..].iter().map(|&x| oracle.label(x).to_string()).collect();
    Err(EngineError::HypothesisB { steps: limit, cycle })
}

/// `{x ∈ S(x0) : S(x) ⊂ {x}}` by enumeration.
pub fn brute_force_minimals(oracle: &PreorderOracle, x0: usize) -> Vec<usize> {
    oracle
        .successors(x0)
        .iter()
        .copied()
        .filter(|&x| oracle.is_terminal(x))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theorem21Check {
    /// `x̂ ∈ S(x0)`.
    pub in_section: bool,
    /// `S(x̂) ⊂ {x̂}`.
    pub strong_minimal: bool,
    /// Points of `S(x̂)` other than `x̂`.
    pub offending: Vec<usize>,
}

impl Theorem21Check {
    pub fn holds(&self) -> bool {
        self.in_section && self.strong_minimal
    }
}

/// Re-derives both conclusions from the sections alone.
pub fn verify_conclusions(oracle: &PreorderOracle, x0: usize, xhat: usize) -> Theorem21Check {
    let offending: Vec<usize> = oracle.successors(xhat).iter().copied().filter(|&z| z != xhat).collect();
    Theorem21Check {
        in_section: oracle.successors(x0).contains(&xhat),
        strong_minimal: offending.is_empty(),
        offending,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceAuditError {
    #[error("step {step}: x_n is not in the previous section")]
    NotInSection { step: usize },
    #[error("step {step}: recorded infimum differs from the section infimum")]
    WrongInfimum { step: usize },
    #[error("step {step}: eta(x_n) misses the slack bound")]
    SlackViolated { step: usize },
    #[error("step {step}: eta increased along the chain")]
    NotMonotone { step: usize },
    #[error("terminal point is not the last iterate or is not minimal")]
    BadTerminal,
}

/// Re-checks a trace against the oracle: membership in the previous section,
/// the recorded infimum, `η(x_n) < inf + slack` (or `<=` at zero slack), and
/// monotonicity of `η` between consecutive iterates.
pub fn audit_trace(oracle: &PreorderOracle, trace: &EngineTrace) -> Result<(), TraceAuditError> {
    let mut prev = trace.start;
    let mut prev_eta: Option<ExtReal> = None;
    for it in &trace.iterates {
        let section = oracle.successors(prev);
        if !section.contains(&it.x) {
            return Err(TraceAuditError::NotInSection { step: it.step });
        }
        if oracle.inf_eta(section) != it.section_inf {
            return Err(TraceAuditError::WrongInfimum { step: it.step });
        }
        let ok = match (it.eta, it.section_inf) {
            (ExtReal::Finite(v), ExtReal::Finite(i)) if it.slack > 0.0 => v < i + it.slack,
            (ExtReal::Finite(v), ExtReal::Finite(i)) => v <= i,
            _ => false,
        };
        if !ok || it.eta != oracle.eta(it.x) {
            return Err(TraceAuditError::SlackViolated { step: it.step });
        }
        if let Some(pe) = prev_eta {
            if it.eta > pe {
                return Err(TraceAuditError::NotMonotone { step: it.step });
            }
        }
        prev_eta = Some(it.eta);
        prev = it.x;
    }
    if trace.iterates.last().map(|it| it.x) != Some(trace.terminal)
        || !verify_conclusions(oracle, trace.start, trace.terminal).strong_minimal
    {
        return Err(TraceAuditError::BadTerminal);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle(succ: Vec<Vec<usize>>, eta: &[f64]) -> PreorderOracle {
        let labels = (0..succ.len()).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
        PreorderOracle::new(labels, succ, eta.iter().map(|&v| ExtReal::Finite(v)).collect()).unwrap()
    }

    /// `a` above `b` above `c`, reflexive and transitive.
    fn chain() -> PreorderOracle {
        oracle(vec![vec![0, 1, 2], vec![1, 2], vec![2]], &[2.0, 1.0, 0.0])
    }

    #[test]
    fn chain_bottom_in_both_modes() {
        let o = chain();
        for mode in [EngineMode::Faithful, EngineMode::Greedy] {
            let (x, trace) = solve_theorem21(&o, 0, mode).unwrap();
            assert_eq!(x, 2);
            assert!(verify_conclusions(&o, 0, x).holds());
            audit_trace(&o, &trace).unwrap();
        }
        assert_eq!(brute_force_minimals(&o, 0), vec![2]);
    }

    #[test]
    fn faithful_slack_admits_a_non_minimizer() {
        // 2^-1 admits b (eta 0.3 < 0 + 0.5); b then leads to c
        let o = oracle(vec![vec![0, 1, 2], vec![1, 2], vec![2]], &[1.0, 0.3, 0.0]);
        let (x, trace) = solve_theorem21(&o, 0, EngineMode::Faithful).unwrap();
        assert_eq!(x, 2);
        assert_eq!(trace.iterates.iter().map(|i| i.x).collect::<Vec<_>>(), vec![1, 2]);
        let (_, greedy) = solve_theorem21(&o, 0, EngineMode::Greedy).unwrap();
        assert_eq!(greedy.iterates.len(), 1);
    }

    #[test]
    fn singleton_section_exits_immediately() {
        let o = oracle(vec![vec![0], vec![0, 1]], &[1.0, 2.0]);
        let (x, trace) = solve_theorem21(&o, 0, EngineMode::Faithful).unwrap();
        assert_eq!(x, 0);
        assert_eq!(trace.iterates.len(), 1);
    }

    #[test]
    fn antichain_minimals() {
        let o = oracle(vec![vec![0], vec![1], vec![2]], &[0.0, 0.0, 0.0]);
        assert_eq!(brute_force_minimals(&o, 1), vec![1]);
        assert_eq!(solve_theorem21(&o, 1, EngineMode::Greedy).unwrap().0, 1);
    }

    #[test]
    fn two_unrelated_minimals() {
        let o = oracle(vec![vec![0, 1, 2], vec![1], vec![2]], &[5.0, 1.0, 2.0]);
        assert_eq!(brute_force_minimals(&o, 0), vec![1, 2]);
        assert_eq!(solve_theorem21(&o, 0, EngineMode::Greedy).unwrap().0, 1);
    }

    #[test]
    fn hypothesis_a_and_empty_start() {
        let o = PreorderOracle::new(
            vec!["a".into(), "b".into()],
            vec![vec![0, 1], vec![1]],
            vec![ExtReal::PosInfinity, ExtReal::PosInfinity],
        )
        .unwrap();
        assert!(matches!(solve_theorem21(&o, 0, EngineMode::Faithful), Err(EngineError::HypothesisA(_))));
        let o = oracle(vec![vec![], vec![1]], &[0.0, 0.0]);
        assert_eq!(solve_theorem21(&o, 0, EngineMode::Faithful), Err(EngineError::EmptyStart));
    }

    #[test]
    fn mutual_relation_is_a_b_violation() {
        let o = oracle(vec![vec![0, 1], vec![0, 1]], &[1.0, 1.0]);
        match solve_theorem21(&o, 0, EngineMode::Greedy) {
            Err(EngineError::HypothesisB { cycle, .. }) => assert!(cycle.len() >= 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn oracle_sweeps() {
        let o = chain();
        assert_eq!(o.monotonicity_violation(1e-9), None);
        assert_eq!(o.transitivity_violation(), None);
        let bad = oracle(vec![vec![0, 1], vec![1, 2], vec![2]], &[0.0, 1.0, 0.0]);
        assert_eq!(bad.monotonicity_violation(1e-9), Some((0, 1)));
        assert_eq!(bad.transitivity_violation(), Some((0, 1, 2)));
    }

    #[test]
    fn deterministic_traces() {
        let o = oracle(vec![vec![0, 1, 2, 3], vec![1, 3], vec![2, 3], vec![3]], &[3.0, 1.0, 1.0, 0.0]);
        let a = solve_theorem21(&o, 0, EngineMode::Faithful).unwrap();
        let b = solve_theorem21(&o, 0, EngineMode::Faithful).unwrap();
        assert_eq!(a, b);
    }
}
