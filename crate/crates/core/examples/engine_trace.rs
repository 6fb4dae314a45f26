//! Runs the minimal-point construction on an explicit preorder and audits
//! its trace.

use evpkit::engine::{audit_trace, brute_force_minimals, solve_theorem21, verify_conclusions, EngineMode, PreorderOracle};
use evpkit::scalarization::ExtReal;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // a chain p0 > p1 > p2 > p3 plus a side branch p4 below p1
    let labels: Vec<String> = (0..5).map(|i| format!("p{i}")).collect();
    let below = |x: usize| -> Vec<usize> {
        match x {
            0 => vec![0, 1, 2, 3, 4],
            1 => vec![1, 2, 3, 4],
            2 => vec![2, 3],
            3 => vec![3],
            _ => vec![4],
        }
    };
    let eta = [4.0, 3.0, 1.0, 0.5, 0.75].map(ExtReal::Finite).to_vec();
    let oracle = PreorderOracle::new(labels, (0..5).map(below).collect(), eta)?;
    for mode in [EngineMode::Faithful, EngineMode::Greedy] {
        let (xhat, trace) = solve_theorem21(&oracle, 0, mode)?;
        println!("{mode:?}: x̂ = {}", oracle.label(xhat));
        for it in &trace.iterates {
            println!("  step {}: {} with η = {:?} (section inf {:?}, slack {})", it.step, oracle.label(it.x), it.eta, it.section_inf, it.slack);
        }
        println!("  conclusions hold: {}, audit: {:?}", verify_conclusions(&oracle, 0, xhat).holds(), audit_trace(&oracle, &trace));
    }
    let minimal: Vec<&str> = brute_force_minimals(&oracle, 0).into_iter().map(|x| oracle.label(x)).collect();
    println!("strongly minimal points below p0: {minimal:?}");
    Ok(())
}
