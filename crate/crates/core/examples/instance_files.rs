//! Loads a JSON instance, checks and solves it, and writes it back out.
//!
//! Run from the crate directory, optionally with a path:
//! `cargo run --example instance_files -- instances/plane.json`.

use std::path::PathBuf;

use coupled_fixpoint::cli::{check_instance, load_instance, solve_instance};
use coupled_fixpoint::instance::parse_instance;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("instances/clipped.json"));
    let inst = load_instance(&path)?;
    println!("{} ({})", path.display(), inst.name.as_deref().unwrap_or("unnamed"));

    let (check, _) = check_instance(&inst)?;
    for r in &check.reports {
        println!("  {:<26} {:?}", r.hypothesis.to_string(), r.verdict);
    }
    println!("  lambda {:?}, chain n {:?}", check.lambda, check.chain_n);

    let (summary, _) = solve_instance(&inst)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);

    // Writing the instance back gives a file that parses to the same instance.
    let json = inst.to_json();
    assert_eq!(parse_instance(json.as_bytes())?, inst);
    println!("round trip: {} bytes, identical after reparse", json.len());

    let broken = br#"{"schema_version": 1, "space": {"kind": "finite", "points": ["a"],
        "distance_matrix": [[1]], "order_pairs": []}, "map": {"kind": "table", "table": [[0]]},
        "seeds": {"x0": 0, "y0": 0}, "parameters": {"epsilon": 1}}"#;
    match parse_instance(broken) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
