//! Generates seeded finite instances, compares the solver with the oracle,
//! and prints a CSV trace.

use coupled_fixpoint::cli::{check_instance, solve_instance};
use coupled_fixpoint::generate::{generate_finite_instance, GenParams};
use coupled_fixpoint::instance::build_instance;
use coupled_fixpoint::oracle::oracle_report;
use coupled_fixpoint::trace::{emit_trace, TraceFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = GenParams::default();
    println!("{:>4} {:>4} {:>6} {:>9} {:>7} {:>10}", "seed", "size", "eps", "certified", "fixed", "solver");
    let mut shown = None;
    for seed in 0..12u64 {
        let size = 3 + (seed as usize % 6);
        let inst = build_instance(generate_finite_instance(seed, size, &params)?)?;
        let oracle = oracle_report(&inst.map, inst.epsilon)?;
        let (check, _) = check_instance(&inst)?;
        let (_, result) = solve_instance(&inst)?;
        let found = [
            result.fixed_pair.first.index().unwrap(),
            result.fixed_pair.second.index().unwrap(),
        ];
        println!(
            "{seed:>4} {size:>4} {:>6} {:>9} {:>7} {:>10}",
            inst.epsilon,
            check.uniqueness_certified,
            oracle.fixed_points.len(),
            if oracle.fixed_points.contains(&found) { format!("{found:?}") } else { "missed".into() },
        );
        if check.existence_certified && shown.is_none() {
            shown = Some(result);
        }
    }
    if let Some(result) = shown {
        println!("\ntrace of the first certified instance:");
        print!("{}", String::from_utf8(emit_trace(&result, TraceFormat::Csv))?);
    }
    Ok(())
}
