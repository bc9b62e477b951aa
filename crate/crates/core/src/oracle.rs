//! Brute-force ground truth on finite instances.
//!
//! Everything here works directly from the distance and order tables by plain
//! enumeration, independently of the search and bitset shortcuts used in
//! [`crate::hypothesis`]. Enumeration is row-major over point indices.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::map::{CoupledMap, MapRule};
use crate::space::{FiniteSpace, OrderedMetricSpace};

/// Largest finite space the oracle accepts.
pub const MAX_ORACLE_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("the oracle needs a finite space")]
    NotFinite,
    #[error("the oracle needs a table map")]
    NotTable,
    #[error("space has {0} points; the oracle handles at most {MAX_ORACLE_POINTS}")]
    TooLarge(usize),
}

fn finite(space: &OrderedMetricSpace) -> Result<&FiniteSpace, OracleError> {
    let s = space.as_finite().ok_or(OracleError::NotFinite)?;
    if s.len() > MAX_ORACLE_POINTS {
        return Err(OracleError::TooLarge(s.len()));
    }
    Ok(s)
}

fn table(map: &CoupledMap) -> Result<(&FiniteSpace, &[Vec<usize>]), OracleError> {
    let s = finite(map.space())?;
    match map.rule() {
        MapRule::Table(t) => Ok((s, t)),
        MapRule::Expression(_) => Err(OracleError::NotTable),
    }
}

/// Every `(x, y)` with `F(x, y) = x` and `F(y, x) = y`, sorted.
pub fn brute_force_cfp(map: &CoupledMap) -> Result<Vec<[usize; 2]>, OracleError> {
    let (s, t) = table(map)?;
    let n = s.len();
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if t[x][y] == x && t[y][x] == y {
                out.push([x, y]);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ExactContraction {
    /// Exact supremum of the ratio and the first quadruple `[x, u, y, v]`
    /// attaining it.
    Bounded { lambda: f64, witness: [usize; 4] },
    /// First quadruple with ratio at least 1.
    Violated { ratio: f64, witness: [usize; 4] },
    /// No admissible quadruple; holds with `λ = 0` by convention.
    Vacuous,
}

impl ExactContraction {
    pub fn lambda(&self) -> Option<f64> {
        match self {
            ExactContraction::Bounded { lambda, .. } => Some(*lambda),
            ExactContraction::Vacuous => Some(0.0),
            ExactContraction::Violated { .. } => None,
        }
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, ExactContraction::Violated { .. })
    }
}

/// Exact contraction modulus over all admissible quadruples.
pub fn exhaustive_contraction_check(map: &CoupledMap, epsilon: f64) -> Result<ExactContraction, OracleError> {
    let (s, t) = table(map)?;
    let n = s.len();
    let mut best: Option<(f64, [usize; 4])> = None;
    for x in 0..n {
        for u in 0..n {
            for y in 0..n {
                for v in 0..n {
                    if !(s.le(u, x) && s.le(y, v)) {
                        continue;
                    }
                    let spread = s.d(x, u) + s.d(y, v);
                    if spread == 0.0 || spread >= 2.0 * epsilon {
                        continue;
                    }
                    let ratio = 2.0 * s.d(t[x][y], t[u][v]) / spread;
                    if ratio >= 1.0 {
                        return Ok(ExactContraction::Violated {
                            ratio,
                            witness: [x, u, y, v],
                        });
                    }
                    if best.is_none_or(|(b, _)| ratio > b) {
                        best = Some((ratio, [x, u, y, v]));
                    }
                }
            }
        }
    }
    Ok(match best {
        Some((lambda, witness)) => ExactContraction::Bounded { lambda, witness },
        None => ExactContraction::Vacuous,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLength {
    pub from: usize,
    pub to: usize,
    /// Minimal number of links, or `None` when unreachable.
    pub n: Option<usize>,
}

/// Minimal chain length for every comparable pair, by Floyd–Warshall on the
/// unit-weight graph `p → q ⇔ p ≤ q ∧ d(p, q) < ε`.
pub fn exhaustive_chain_check(space: &OrderedMetricSpace, epsilon: f64) -> Result<Vec<ChainLength>, OracleError> {
    let s = finite(space)?;
    let n = s.len();
    let mut hops = vec![vec![usize::MAX; n]; n];
    for p in 0..n {
        for q in 0..n {
            if p == q {
                hops[p][q] = 0;
            } else if s.le(p, q) && s.d(p, q) < epsilon {
                hops[p][q] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = hops[i][k].saturating_add(hops[k][j]);
                if via < hops[i][j] {
                    hops[i][j] = via;
                }
            }
        }
    }
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if s.le(a, b) {
                out.push(ChainLength {
                    from: a,
                    to: b,
                    n: (hops[a][b] != usize::MAX).then_some(hops[a][b]),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "argument", rename_all = "snake_case")]
pub enum MonotoneFailure {
    /// `[x1, x2, y]`.
    First { witness: [usize; 3] },
    /// `[x, y1, y2]`.
    Second { witness: [usize; 3] },
}

/// First failure of the mixed monotone property, first-argument triples
/// `(y, x1, x2)` before second-argument triples `(x, y1, y2)`.
pub fn exhaustive_mixed_monotone(map: &CoupledMap) -> Result<Option<MonotoneFailure>, OracleError> {
    let (s, t) = table(map)?;
    let n = s.len();
    for y in 0..n {
        for x1 in 0..n {
            for x2 in 0..n {
                if s.le(x1, x2) && !s.le(t[x1][y], t[x2][y]) {
                    return Ok(Some(MonotoneFailure::First { witness: [x1, x2, y] }));
                }
            }
        }
    }
    for x in 0..n {
        for y1 in 0..n {
            for y2 in 0..n {
                if s.le(y1, y2) && !s.le(t[x][y2], t[x][y1]) {
                    return Ok(Some(MonotoneFailure::Second { witness: [x, y1, y2] }));
                }
            }
        }
    }
    Ok(None)
}

/// First pair of product points `[x, y, x*, y*]` with no product point
/// comparable to both, searching every `(z1, z2)`.
pub fn exhaustive_condition_h(space: &OrderedMetricSpace) -> Result<Option<[usize; 4]>, OracleError> {
    let s = finite(space)?;
    let n = s.len();
    // (u, v) ≤ (x, y) in the product order.
    let below = |u: usize, v: usize, x: usize, y: usize| s.le(u, x) && s.le(y, v);
    let comparable = |a: (usize, usize), b: (usize, usize)| below(a.0, a.1, b.0, b.1) || below(b.0, b.1, a.0, a.1);
    for x in 0..n {
        for y in 0..n {
            for xs in 0..n {
                for ys in 0..n {
                    let found = (0..n).any(|z1| {
                        (0..n).any(|z2| comparable((z1, z2), (x, y)) && comparable((z1, z2), (xs, ys)))
                    });
                    if !found {
                        return Ok(Some([x, y, xs, ys]));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// First pair `[p, q]` with neither a common upper nor a common lower bound.
pub fn exhaustive_pair_bounds(space: &OrderedMetricSpace) -> Result<Option<[usize; 2]>, OracleError> {
    let s = finite(space)?;
    let n = s.len();
    for p in 0..n {
        for q in 0..n {
            let bounded = (0..n).any(|z| (s.le(p, z) && s.le(q, z)) || (s.le(z, p) && s.le(z, q)));
            if !bounded {
                return Ok(Some([p, q]));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub fixed_points: Vec<[usize; 2]>,
    pub exact_lambda: Option<f64>,
    pub contraction: ExactContraction,
    pub min_chain_n: Vec<ChainLength>,
    pub mixed_monotone: Option<MonotoneFailure>,
    pub condition_h: Option<[usize; 4]>,
    pub pair_bounds: Option<[usize; 2]>,
}

impl OracleReport {
    /// Largest minimal chain length over comparable pairs, or `None` if some
    /// comparable pair is unreachable.
    pub fn max_chain_n(&self) -> Option<usize> {
        self.min_chain_n
            .iter()
            .try_fold(0, |acc, c| c.n.map(|n| acc.max(n)))
    }

    pub fn chainable(&self) -> bool {
        self.max_chain_n().is_some()
    }
}

/// All oracle results for one finite instance.
pub fn oracle_report(map: &CoupledMap, epsilon: f64) -> Result<OracleReport, OracleError> {
    let contraction = exhaustive_contraction_check(map, epsilon)?;
    Ok(OracleReport {
        fixed_points: brute_force_cfp(map)?,
        exact_lambda: contraction.lambda(),
        contraction,
        min_chain_n: exhaustive_chain_check(map.space(), epsilon)?,
        mixed_monotone: exhaustive_mixed_monotone(map)?,
        condition_h: exhaustive_condition_h(map.space())?,
        pair_bounds: exhaustive_pair_bounds(map.space())?,
    })
}
