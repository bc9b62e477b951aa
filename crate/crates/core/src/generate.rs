//! Seeded random finite instances.
//!
//! The order is the transitive closure of a random DAG on `0..size` with edges
//! only from lower to higher index, optionally with a global bottom and top.
//! Distances are shortest paths over random integer edge weights, so every
//! metric axiom holds and all distances are integers. The table map sends
//! `(x, y)` through the height difference `h(x) − h(y)` and a nondecreasing
//! step function onto a chain, which makes it mixed monotone by construction.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{
    DeclaredFlags, InstanceFile, MapSpec, Parameters, PointRef, PointSpec, Real, Seeds, SpaceSpec, SCHEMA_VERSION,
};
use crate::oracle::MAX_ORACLE_POINTS;
use crate::space::transitive_closure;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("size {size} is outside 2..={MAX_ORACLE_POINTS}")]
    SizeOutOfRange { size: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    /// Probability of each DAG edge `i → j`, `i < j`.
    pub edge_probability: f64,
    /// Probability of adding a global bottom, and separately a global top.
    pub bound_probability: f64,
    /// Most levels the image chain of the map may use.
    pub max_levels: usize,
    pub epsilon_choices: Vec<f64>,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            edge_probability: 0.35,
            bound_probability: 0.7,
            max_levels: 3,
            epsilon_choices: vec![1.5, 2.5, 3.5],
            tolerance: 1e-10,
            max_iterations: 200,
        }
    }
}

/// Builds a random finite instance; equal `(seed, size, params)` give equal
/// files.
pub fn generate_finite_instance(seed: u64, size: usize, params: &GenParams) -> Result<InstanceFile, GenerateError> {
    if !(2..=MAX_ORACLE_POINTS).contains(&size) {
        return Err(GenerateError::SizeOutOfRange { size });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = size;

    let mut edges = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            edges[i][j] = rng.gen_bool(params.edge_probability);
        }
    }
    if rng.gen_bool(params.bound_probability) {
        for j in 1..n {
            edges[0][j] = true;
        }
    }
    if rng.gen_bool(params.bound_probability) {
        for row in edges.iter_mut().take(n - 1) {
            row[n - 1] = true;
        }
    }
    let mut le = edges.clone();
    for (i, row) in le.iter_mut().enumerate() {
        row[i] = true;
    }
    transitive_closure(&mut le);

    let mut dist = vec![vec![u64::MAX; n]; n];
    for i in 0..n {
        dist[i][i] = 0;
        for j in i + 1..n {
            let w = if le[i][j] { rng.gen_range(1..=2) } else { rng.gen_range(2..=4) };
            dist[i][j] = w;
            dist[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = dist[i][k] + dist[k][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }

    // Length of the longest strict chain ending at each point. Indices
    // respect the order, so one ascending pass suffices.
    let mut height = vec![0i64; n];
    for j in 0..n {
        for i in 0..j {
            if le[i][j] {
                height[j] = height[j].max(height[i] + 1);
            }
        }
    }
    let max_height = *height.iter().max().unwrap_or(&0);

    let chain = random_maximal_chain(&le, &mut rng);
    let levels = rng.gen_range(1..=params.max_levels.min(chain.len()).max(1));
    let mut picks: Vec<usize> = (0..chain.len()).collect();
    picks.shuffle(&mut rng);
    let mut picks: Vec<usize> = picks.into_iter().take(levels).collect();
    picks.sort_unstable();
    let targets: Vec<usize> = picks.iter().map(|&k| chain[k]).collect();
    let mut thresholds: Vec<i64> = (1..levels).map(|_| rng.gen_range(-max_height..=max_height)).collect();
    thresholds.sort_unstable();

    let table: Vec<Vec<usize>> = (0..n)
        .map(|x| {
            (0..n)
                .map(|y| {
                    let score = height[x] - height[y];
                    targets[thresholds.iter().filter(|&&t| t <= score).count()]
                })
                .collect()
        })
        .collect();

    let mut comparable_seeds = Vec::new();
    let mut other_seeds = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if le[x][table[x][y]] && le[table[y][x]][y] {
                if le[x][y] || le[y][x] {
                    comparable_seeds.push((x, y));
                } else {
                    other_seeds.push((x, y));
                }
            }
        }
    }
    let (x0, y0) = comparable_seeds
        .choose(&mut rng)
        .or_else(|| other_seeds.choose(&mut rng))
        .copied()
        .unwrap_or_else(|| (rng.gen_range(0..n), rng.gen_range(0..n)));
    let epsilon = *params.epsilon_choices.choose(&mut rng).unwrap_or(&1.5);

    let order_pairs = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && edges[i][j])
        .map(|(i, j)| [PointRef::Index(i), PointRef::Index(j)])
        .collect();

    Ok(InstanceFile {
        schema_version: SCHEMA_VERSION,
        name: Some(format!("generated-s{seed}-n{size}")),
        space: SpaceSpec::Finite {
            points: (0..n).map(|i| format!("p{i}")).collect(),
            distance_matrix: dist
                .iter()
                .map(|row| row.iter().map(|&d| Real(d as f64)).collect())
                .collect(),
            order_pairs,
        },
        map: MapSpec::Table {
            table: table
                .into_iter()
                .map(|row| row.into_iter().map(PointRef::Index).collect())
                .collect(),
        },
        seeds: Seeds {
            x0: PointSpec::Index(x0),
            y0: PointSpec::Index(y0),
        },
        parameters: Parameters {
            epsilon: Real(epsilon),
            lambda_claimed: None,
            tolerance: Real(params.tolerance),
            max_iterations: params.max_iterations,
        },
        declared_flags: DeclaredFlags {
            order_limit_closure: true,
        },
        sampling: None,
    })
}

/// A maximal chain: starts at a random minimal point and climbs through
/// random immediate successors.
fn random_maximal_chain(le: &[Vec<bool>], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = le.len();
    let strictly_below = |p: usize, q: usize| p != q && le[p][q];
    let minimal: Vec<usize> = (0..n).filter(|&q| !(0..n).any(|p| strictly_below(p, q))).collect();
    let mut chain = vec![*minimal.choose(rng).expect("a finite poset has a minimal point")];
    loop {
        let top = *chain.last().unwrap();
        let covers: Vec<usize> = (0..n)
            .filter(|&q| strictly_below(top, q) && !(0..n).any(|r| strictly_below(top, r) && strictly_below(r, q)))
            .collect();
        match covers.choose(rng) {
            Some(&q) => chain.push(q),
            None => return chain,
        }
    }
}
