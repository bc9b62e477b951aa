//! Two solves from different seeds reach the same coupled fixed point, and
//! the fixed point collapses to the diagonal `x = y`.

use coupled_fixpoint::solver::{collapse_check, uniqueness_probe, CollapseMode};
use coupled_fixpoint::{assess, picard_solve, BoxSpace, CoupledMap, Point, ProductPair, SamplingPlan, SolveConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let map = CoupledMap::expression(BoxSpace::unit(1), vec!["(2*x - y + 3)/8".into()])?;
    let cfg = SolveConfig {
        lambda: 0.6,
        epsilon: 0.3,
        chain_n: 4,
        record_trace: false,
        ..SolveConfig::default()
    };
    let plan = SamplingPlan::grid(0.125).with_random(16, 2000, 3);

    let seeds = [(0.0, 1.0), (0.2, 0.9)];
    let mut fixed = Vec::new();
    for (x0, y0) in seeds {
        let (x0, y0) = (Point::scalar(x0), Point::scalar(y0));
        let a = assess(&map, &x0, &y0, cfg.epsilon, &plan)?;
        let r = picard_solve(&map, &x0, &y0, &cfg)?;
        println!("seeds ({x0}, {y0}) -> {} in {} iterations", r.fixed_pair, r.iterations_used);

        let existence = a.existence_certified(Some(cfg.lambda));
        let pair_bounds = collapse_check(
            &r,
            CollapseMode::PairBounds {
                certified: existence && a.pair_bounds.passes(),
            },
            map.space(),
        )?;
        let comparable = collapse_check(
            &r,
            CollapseMode::ComparableSeeds {
                existence_certified: existence,
            },
            map.space(),
        )?;
        println!("  collapse via pair bounds: {pair_bounds:?}");
        println!("  collapse via comparable seeds: {comparable:?}");
        fixed.push(r.fixed_pair);
    }

    // (0, 1) lies below both fixed pairs; it is only iterated when the two
    // fixed pairs are incomparable.
    let witness = ProductPair::new(Point::scalar(0.0), Point::scalar(1.0));
    let report = uniqueness_probe(&map, &fixed[0], &fixed[1], Some(&witness), &cfg, 60)?;
    println!("\nuniqueness: {:?} ({:?} route), eta between fixed pairs {:.2e}", report.verdict, report.case, report.eta_fixed);
    Ok(())
}
