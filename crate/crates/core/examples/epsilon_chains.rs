//! Minimal ε-chains on a finite poset and on a grid of the unit square.

use coupled_fixpoint::hypothesis::{chain_length_table, find_epsilon_chain, grid_points};
use coupled_fixpoint::{BoxSpace, FiniteSpace, OrderedMetricSpace, Point};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Five points on a line at unit spacing, totally ordered.
    let n = 5;
    let labels = (0..n).map(|i| format!("t{i}")).collect();
    let d = (0..n)
        .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
        .collect();
    let pairs: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    let line: OrderedMetricSpace = FiniteSpace::from_pairs(labels, d, &pairs)?.into();
    let points: Vec<Point> = (0..n).map(Point::Index).collect();

    for eps in [1.5, 2.5, 0.5] {
        let chain = find_epsilon_chain(&line, &Point::Index(0), &Point::Index(4), eps, &points)?;
        match chain {
            Some(c) => {
                let path: Vec<String> = c.points.iter().map(ToString::to_string).collect();
                println!("eps {eps}: n = {} via {}", c.n(), path.join(" <= "));
            }
            None => println!("eps {eps}: no chain from p0 to p4"),
        }
    }

    println!("\nminimal chain lengths at eps 1.5 (row <= column):");
    for row in chain_length_table(&line, 1.5, &points)? {
        let cells: Vec<String> = row
            .iter()
            .map(|h| h.map_or("-".to_string(), |h| h.to_string()))
            .collect();
        println!("  {}", cells.join(" "));
    }

    let square: OrderedMetricSpace = BoxSpace::unit(2).into();
    let grid = grid_points(square.as_box().unwrap(), 0.25);
    let a = Point::Coords(vec![0.0, 0.0]);
    let b = Point::Coords(vec![1.0, 1.0]);
    let chain = find_epsilon_chain(&square, &a, &b, 0.6, &grid)?.expect("grid is connected");
    println!("\nunit square, eps 0.6, grid 0.25: n = {}", chain.n());
    for p in &chain.points {
        println!("  {p}");
    }
    println!("padded to 10 links: {} points", chain.padded(10).points.len());
    Ok(())
}
