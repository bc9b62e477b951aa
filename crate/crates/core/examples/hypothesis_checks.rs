//! Runs every hypothesis check on two maps over a 1-D box and prints the
//! verdicts with their witnesses.

use coupled_fixpoint::{assess, BoxSpace, CoupledMap, Point, SamplingPlan};

fn show(label: &str, src: &str) -> Result<(), Box<dyn std::error::Error>> {
    let map = CoupledMap::expression(BoxSpace::unit(1), vec![src.into()])?;
    let plan = SamplingPlan::grid(0.125).with_random(16, 2000, 7);
    let a = assess(&map, &Point::scalar(0.0), &Point::scalar(1.0), 0.3, &plan)?;
    println!("{label}: F(x, y) = {src}");
    for r in a.reports() {
        let witness = r
            .witness
            .as_ref()
            .map(|w| w.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
            .unwrap_or_default();
        println!("  {:<26} {:<22} {}", r.hypothesis.to_string(), format!("{:?}", r.verdict), witness);
    }
    match a.contraction.lambda_hat {
        Some(l) => println!("  sampled contraction modulus {l:.4}"),
        None => println!("  contraction ratio reached {:.4}", a.contraction.max_ratio),
    }
    println!("  existence hypotheses certified with claimed 0.6: {}", a.existence_certified(Some(0.6)));
    println!();
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    show("contractive", "(2*x - y + 3)/8")?;
    // Increasing in y breaks mixed monotonicity.
    show("wrong direction", "(x + y)/4")?;
    // Slope 2 in x breaks the contraction.
    show("expanding", "min(1, max(0, 2*x - y))")?;
    Ok(())
}
