//! Coupled Picard iteration for `F(x, y) = (2x − y + 3)/8` on `[0, 1]`.
//!
//! The coupled fixed point solves `x = (2x − x + 3)/8`, so `x = y = 3/7`.

use coupled_fixpoint::{picard_solve, BoxSpace, CoupledMap, Point, SolveConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let map = CoupledMap::expression(BoxSpace::unit(1), vec!["(2*x - y + 3)/8".into()])?;
    let cfg = SolveConfig {
        lambda: 0.6,
        epsilon: 0.3,
        chain_n: 4,
        ..SolveConfig::default()
    };
    let result = picard_solve(&map, &Point::scalar(0.0), &Point::scalar(1.0), &cfg)?;

    println!("{:>3}  {:>20}  {:>20}  {:>12}", "m", "x_m", "y_m", "residual");
    for row in result.trace.iter().take(8) {
        println!("{:>3}  {:>20}  {:>20}  {:>12.3e}", row.m, row.x.to_string(), row.y.to_string(), row.residual);
    }
    println!("...");
    println!(
        "{:?} after {} iterations: {}",
        result.status, result.iterations_used, result.fixed_pair
    );
    let exact = 3.0 / 7.0;
    let x = result.fixed_pair.first.coords().unwrap()[0];
    let y = result.fixed_pair.second.coords().unwrap()[0];
    println!("|x - 3/7| = {:.2e}, |y - 3/7| = {:.2e}", (x - exact).abs(), (y - exact).abs());
    println!("decay bound held on every step: {}", result.bound_holds);
    Ok(())
}
