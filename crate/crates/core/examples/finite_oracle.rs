//! Brute-force analysis of `F(x, y) = ⌊(x + 3 − y)/4⌋` on `{0, 1, 2, 3}`.
//!
//! The map is mixed monotone but not a local contraction, and it has three
//! coupled fixed points.

use coupled_fixpoint::oracle::{oracle_report, ExactContraction};
use coupled_fixpoint::{assess, CoupledMap, FiniteSpace, Point, SamplingPlan};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 4;
    let d = (0..n)
        .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
        .collect();
    let pairs: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    let space = FiniteSpace::from_pairs((0..n).map(|i| i.to_string()).collect(), d, &pairs)?;
    let map = CoupledMap::tabulate(space, |x, y| (x + 3 - y) / 4)?;

    let oracle = oracle_report(&map, 1.5)?;
    println!("coupled fixed points: {:?}", oracle.fixed_points);
    match &oracle.contraction {
        ExactContraction::Violated { ratio, witness } => {
            println!("contraction violated: ratio {ratio} at (x, y, u, v) = {witness:?}")
        }
        ExactContraction::Bounded { lambda, witness } => println!("exact lambda {lambda} at {witness:?}"),
        ExactContraction::Vacuous => println!("no admissible quadruple"),
    }
    println!("largest minimal chain: {:?}", oracle.max_chain_n());
    println!("mixed monotone: {}", oracle.mixed_monotone.is_none());
    println!("condition (H) counterexample: {:?}", oracle.condition_h);

    // The fast checks agree with the oracle.
    let a = assess(&map, &Point::Index(0), &Point::Index(3), 1.5, &SamplingPlan::exhaustive())?;
    println!(
        "\nassess: contraction {:?}, witness {:?}",
        a.contraction.to_report().verdict,
        a.contraction.witness.as_ref().map(|q| q.points())
    );
    println!("\nreport as JSON:\n{}", serde_json::to_string(&oracle)?);
    Ok(())
}
