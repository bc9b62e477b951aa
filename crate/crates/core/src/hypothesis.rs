//! Decision procedures and estimators for the hypotheses of the existence,
//! uniqueness and collapse theorems.
//!
//! On finite spaces every check is exhaustive over all points and its verdict
//! is exact. On boxes the checks run over a deterministic sample (a grid
//! plus seeded random points) and a clean run is reported as
//! [`Verdict::UndeterminedSampled`], except where the box structure itself
//! settles the question (chains, pairwise bounds and condition (H) all hold on
//! a box because it is a lattice under the componentwise order).
//!
//! Witnesses are always the first offender in row-major enumeration order over
//! the candidate list, so results are reproducible across runs.

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::BitRows;
use crate::map::{CoupledMap, MapError};
use crate::space::{BoxSpace, OrderedMetricSpace, Point, SpaceError};

/// Fraction of the gap `1 - λ̂` added to an exact contraction modulus to turn
/// it into a certified `λ` satisfying the strict inequality.
pub const CERTIFIED_LAMBDA_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HypothesisError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("sample is empty")]
    EmptySample,
    #[error("box sampling needs a positive grid step")]
    MissingGrid,
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("no admissible quadruple for epsilon = {epsilon}; epsilon is below the sample resolution")]
    NoAdmissibleQuadruple { epsilon: f64 },
    #[error("chain endpoints are not ordered: {a} is not below {b}")]
    NotOrdered { a: Point, b: Point },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisId {
    MixedMonotone,
    EpsilonChainable,
    UniformLocalContraction,
    SeedCondition,
    ConditionH,
    PairBounds,
}

impl fmt::Display for HypothesisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            HypothesisId::MixedMonotone => "mixed_monotone",
            HypothesisId::EpsilonChainable => "epsilon_chainable",
            HypothesisId::UniformLocalContraction => "uniform_local_contraction",
            HypothesisId::SeedCondition => "seed_condition",
            HypothesisId::ConditionH => "condition_h",
            HypothesisId::PairBounds => "pair_bounds",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "holds")]
    Holds,
    #[serde(rename = "violated")]
    Violated,
    #[serde(rename = "undetermined-sampled")]
    UndeterminedSampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub hypothesis: HypothesisId,
    pub verdict: Verdict,
    pub witness: Option<Vec<Point>>,
    pub sample_seed: Option<u64>,
    pub sample_size: usize,
    pub lambda_hat: Option<f64>,
    pub epsilon: Option<f64>,
    pub max_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl HypothesisReport {
    fn new(hypothesis: HypothesisId, verdict: Verdict, sample: &Sample) -> Self {
        Self {
            hypothesis,
            verdict,
            witness: None,
            sample_seed: sample.seed(),
            sample_size: sample.points.len(),
            lambda_hat: None,
            epsilon: None,
            max_n: None,
            note: None,
        }
    }

    /// Holds exactly, or no violation turned up in a sampled check.
    pub fn passes(&self) -> bool {
        self.verdict != Verdict::Violated
    }

    pub fn is_violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }
}

/// A deterministic recipe for the points a check runs over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    /// Grid spacing per coordinate on boxes (ignored on finite spaces).
    pub grid_step: Option<f64>,
    /// Seeded uniform points appended after the grid.
    pub random_points: usize,
    /// Seeded admissible quadruples tried after the grid enumeration in
    /// contraction estimates.
    pub random_quadruples: usize,
    pub seed: u64,
    /// Grid quadruple enumeration is skipped above this many quadruples.
    pub max_enumerated_quadruples: usize,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            grid_step: None,
            random_points: 0,
            random_quadruples: 0,
            seed: 0,
            max_enumerated_quadruples: 2_000_000,
        }
    }
}

impl SamplingPlan {
    /// The plan for finite spaces: every point, no randomness.
    pub fn exhaustive() -> Self {
        Self::default()
    }

    pub fn grid(step: f64) -> Self {
        Self {
            grid_step: Some(step),
            ..Self::default()
        }
    }

    pub fn with_random(mut self, points: usize, quadruples: usize, seed: u64) -> Self {
        self.random_points = points;
        self.random_quadruples = quadruples;
        self.seed = seed;
        self
    }

    /// Materializes the candidate points for `space`.
    pub fn sample(&self, space: &OrderedMetricSpace) -> Result<Sample, HypothesisError> {
        match space {
            OrderedMetricSpace::Finite(s) => {
                if s.is_empty() {
                    return Err(HypothesisError::EmptySample);
                }
                Ok(Sample {
                    points: (0..s.len()).map(Point::Index).collect(),
                    mode: Mode::Exhaustive,
                    plan: self.clone(),
                })
            }
            OrderedMetricSpace::Box(b) => {
                let step = self.grid_step.filter(|s| *s > 0.0).ok_or(HypothesisError::MissingGrid)?;
                let mut points = grid_points(b, step);
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                for _ in 0..self.random_points {
                    points.push(Point::Coords(random_in_box(b, &mut rng)));
                }
                Ok(Sample {
                    points,
                    mode: Mode::Sampled,
                    plan: self.clone(),
                })
            }
        }
    }
}

/// Grid points of a box, first coordinate varying slowest. Each axis is split
/// into the fewest equal cells no wider than `step`.
pub fn grid_points(b: &BoxSpace, step: f64) -> Vec<Point> {
    let axes: Vec<Vec<f64>> = b
        .lower()
        .iter()
        .zip(b.upper())
        .map(|(&l, &u)| {
            let width = u - l;
            if width == 0.0 {
                return vec![l];
            }
            let cells = ((width / step) - 1e-9).ceil().max(1.0) as usize;
            (0..=cells)
                .map(|i| if i == cells { u } else { l + width * i as f64 / cells as f64 })
                .collect()
        })
        .collect();
    let mut out = vec![Vec::with_capacity(axes.len())];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(Point::Coords).collect()
}

fn random_in_box(b: &BoxSpace, rng: &mut ChaCha8Rng) -> Vec<f64> {
    b.lower()
        .iter()
        .zip(b.upper())
        .map(|(&l, &u)| if l == u { l } else { rng.gen_range(l..=u) })
        .collect()
}

/// Candidate points plus how they were produced.
#[derive(Debug, Clone)]
pub struct Sample {
    pub points: Vec<Point>,
    pub mode: Mode,
    pub plan: SamplingPlan,
}

impl Sample {
    fn seed(&self) -> Option<u64> {
        match self.mode {
            Mode::Exhaustive => None,
            Mode::Sampled => Some(self.plan.seed),
        }
    }

    fn clean_verdict(&self) -> Verdict {
        match self.mode {
            Mode::Exhaustive => Verdict::Holds,
            Mode::Sampled => Verdict::UndeterminedSampled,
        }
    }
}

/// Order and distance tables over a candidate list.
struct Tabulated<'a> {
    points: &'a [Point],
    le: Vec<Vec<bool>>,
    dist: Vec<Vec<f64>>,
}

impl<'a> Tabulated<'a> {
    fn new(space: &'a OrderedMetricSpace, points: &'a [Point]) -> Result<Self, HypothesisError> {
        if points.is_empty() {
            return Err(HypothesisError::EmptySample);
        }
        for p in points {
            space.validate(p)?;
        }
        let le = points
            .iter()
            .map(|p| points.iter().map(|q| space.leq_unchecked(p, q)).collect())
            .collect();
        let dist = points
            .iter()
            .map(|p| points.iter().map(|q| space.distance_unchecked(p, q)).collect())
            .collect();
        Ok(Self {
            points,
            le,
            dist,
        })
    }

    fn len(&self) -> usize {
        self.points.len()
    }

    fn up_down_sets(&self) -> (BitRows, BitRows) {
        let n = self.len();
        let mut up = BitRows::new(n, n);
        let mut down = BitRows::new(n, n);
        for p in 0..n {
            for q in 0..n {
                if self.le[p][q] {
                    up.set(p, q);
                    down.set(q, p);
                }
            }
        }
        (up, down)
    }

    /// `images[i][j] = F(points[i], points[j])`.
    fn images(&self, map: &CoupledMap) -> Result<Vec<Vec<Point>>, HypothesisError> {
        self.points
            .iter()
            .map(|x| {
                self.points
                    .iter()
                    .map(|y| map.apply_valid(x, y).map_err(HypothesisError::from))
                    .collect()
            })
            .collect()
    }
}

/// Which implication of the mixed monotone property failed.
#[derive(Debug, Clone, PartialEq)]
pub enum MonotoneViolation {
    /// `x1 ≤ x2` but `F(x1, y) ≰ F(x2, y)`.
    FirstArgument { x1: Point, x2: Point, y: Point },
    /// `y1 ≤ y2` but `F(x, y1) ≱ F(x, y2)`.
    SecondArgument { x: Point, y1: Point, y2: Point },
}

impl MonotoneViolation {
    pub fn points(&self) -> Vec<Point> {
        match self {
            MonotoneViolation::FirstArgument { x1, x2, y } => vec![x1.clone(), x2.clone(), y.clone()],
            MonotoneViolation::SecondArgument { x, y1, y2 } => vec![x.clone(), y1.clone(), y2.clone()],
        }
    }

    /// Re-evaluates the witness: true iff it is a genuine violation.
    pub fn recheck(&self, map: &CoupledMap) -> Result<bool, MapError> {
        let space = map.space();
        Ok(match self {
            MonotoneViolation::FirstArgument { x1, x2, y } => {
                space.leq(x1, x2)? && !space.leq(&map.apply(x1, y)?, &map.apply(x2, y)?)?
            }
            MonotoneViolation::SecondArgument { x, y1, y2 } => {
                space.leq(y1, y2)? && !space.leq(&map.apply(x, y2)?, &map.apply(x, y1)?)?
            }
        })
    }

    fn note(&self) -> &'static str {
        match self {
            MonotoneViolation::FirstArgument { .. } => {
                "witness [x1, x2, y]: x1 <= x2 but F(x1, y) is not below F(x2, y)"
            }
            MonotoneViolation::SecondArgument { .. } => {
                "witness [x, y1, y2]: y1 <= y2 but F(x, y1) is not above F(x, y2)"
            }
        }
    }
}

/// First violation of the mixed monotone property over `points`.
///
/// All first-argument triples `(y, x1, x2)` are scanned before the
/// second-argument triples `(x, y1, y2)`, each in row-major order.
pub fn find_monotone_violation(
    map: &CoupledMap,
    points: &[Point],
) -> Result<Option<MonotoneViolation>, HypothesisError> {
    let tab = Tabulated::new(map.space(), points)?;
    let images = tab.images(map)?;
    let n = tab.len();
    let space = map.space();
    for y in 0..n {
        for x1 in 0..n {
            for x2 in 0..n {
                if tab.le[x1][x2] && !space.leq_unchecked(&images[x1][y], &images[x2][y]) {
                    return Ok(Some(MonotoneViolation::FirstArgument {
                        x1: points[x1].clone(),
                        x2: points[x2].clone(),
                        y: points[y].clone(),
                    }));
                }
            }
        }
    }
    for x in 0..n {
        for y1 in 0..n {
            for y2 in 0..n {
                if tab.le[y1][y2] && !space.leq_unchecked(&images[x][y2], &images[x][y1]) {
                    return Ok(Some(MonotoneViolation::SecondArgument {
                        x: points[x].clone(),
                        y1: points[y1].clone(),
                        y2: points[y2].clone(),
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Checks that `F` is nondecreasing in its first argument and nonincreasing
/// in its second.
pub fn check_mixed_monotone(map: &CoupledMap, plan: &SamplingPlan) -> Result<HypothesisReport, HypothesisError> {
    let sample = plan.sample(map.space())?;
    let violation = find_monotone_violation(map, &sample.points)?;
    Ok(match violation {
        Some(v) => HypothesisReport {
            witness: Some(v.points()),
            note: Some(v.note().into()),
            ..HypothesisReport::new(HypothesisId::MixedMonotone, Verdict::Violated, &sample)
        },
        None => HypothesisReport::new(HypothesisId::MixedMonotone, sample.clean_verdict(), &sample),
    })
}

/// A quadruple `(x, u, y, v)` with `x ≥ u` and `y ≤ v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadruple {
    pub x: Point,
    pub u: Point,
    pub y: Point,
    pub v: Point,
}

impl Quadruple {
    pub fn points(&self) -> Vec<Point> {
        vec![self.x.clone(), self.u.clone(), self.y.clone(), self.v.clone()]
    }
}

/// `2·d(F(x,y), F(u,v)) / (d(x,u) + d(y,v))` from its three distances.
#[inline]
pub fn contraction_ratio(image_distance: f64, dxu: f64, dyv: f64) -> f64 {
    2.0 * image_distance / (dxu + dyv)
}

/// Whether `(x, u, y, v)` with the given distances is admissible for `epsilon`:
/// its mean distance is below `epsilon` and not zero.
#[inline]
pub fn admissible(dxu: f64, dyv: f64, epsilon: f64) -> bool {
    let total = dxu + dyv;
    total > 0.0 && total / 2.0 < epsilon
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractivityReport {
    pub epsilon: f64,
    /// Supremum of the contraction ratio over tested admissible quadruples;
    /// absent when a ratio reached 1.
    pub lambda_hat: Option<f64>,
    /// Largest ratio seen, up to and including the first violation.
    pub max_ratio: f64,
    pub violated: bool,
    /// The first violating quadruple, or the first quadruple attaining the
    /// supremum.
    pub witness: Option<Quadruple>,
    pub pairs_tested: usize,
    pub mode: Mode,
    pub sample_seed: Option<u64>,
    pub sample_size: usize,
}

impl ContractivityReport {
    /// A `λ < 1` for which the strict contraction inequality is certified.
    /// Only exhaustive, non-violated reports certify anything.
    pub fn certified_lambda(&self) -> Option<f64> {
        match (self.mode, self.lambda_hat) {
            (Mode::Exhaustive, Some(l)) => Some(l + (1.0 - l) * CERTIFIED_LAMBDA_MARGIN),
            _ => None,
        }
    }

    /// Whether `lambda` strictly dominates every tested ratio.
    pub fn supports_lambda(&self, lambda: f64) -> bool {
        !self.violated && lambda < 1.0 && self.lambda_hat.is_some_and(|l| l < lambda)
    }

    pub fn to_report(&self) -> HypothesisReport {
        let verdict = if self.violated {
            Verdict::Violated
        } else if self.mode == Mode::Exhaustive {
            Verdict::Holds
        } else {
            Verdict::UndeterminedSampled
        };
        HypothesisReport {
            hypothesis: HypothesisId::UniformLocalContraction,
            verdict,
            witness: self.witness.as_ref().map(Quadruple::points),
            sample_seed: self.sample_seed,
            sample_size: self.sample_size,
            lambda_hat: self.lambda_hat,
            epsilon: Some(self.epsilon),
            max_n: None,
            note: self
                .violated
                .then(|| format!("witness [x, u, y, v] has ratio {} >= 1", self.max_ratio)),
        }
    }
}

struct RatioScan {
    max_ratio: f64,
    witness: Option<Quadruple>,
    tested: usize,
    violated: bool,
}

impl RatioScan {
    fn new() -> Self {
        Self {
            max_ratio: 0.0,
            witness: None,
            tested: 0,
            violated: false,
        }
    }

    /// Records one admissible quadruple; returns true when scanning should stop.
    fn record(&mut self, ratio: f64, quad: impl FnOnce() -> Quadruple) -> bool {
        self.tested += 1;
        if self.witness.is_none() || ratio > self.max_ratio {
            self.max_ratio = ratio;
            self.witness = Some(quad());
        }
        // A ratio >= 1 always exceeds the running maximum, so the violating
        // quadruple is the stored witness.
        if ratio >= 1.0 {
            self.violated = true;
            return true;
        }
        false
    }
}

/// Estimates the contraction modulus `λ̂` of `F` on `epsilon`-close comparable
/// quadruples. Exhaustive on finite spaces.
pub fn estimate_contraction(
    map: &CoupledMap,
    epsilon: f64,
    plan: &SamplingPlan,
) -> Result<ContractivityReport, HypothesisError> {
    if !(epsilon > 0.0) {
        return Err(HypothesisError::BadEpsilon(epsilon));
    }
    let space = map.space();
    let sample = plan.sample(space)?;
    let points = &sample.points;
    let tab = Tabulated::new(space, points)?;
    let n = tab.len();
    let mut scan = RatioScan::new();

    let enumerate = sample.mode == Mode::Exhaustive
        || (n as u128).pow(4) <= plan.max_enumerated_quadruples as u128;
    if enumerate {
        let images = tab.images(map)?;
        'outer: for x in 0..n {
            for u in 0..n {
                if !tab.le[u][x] {
                    continue;
                }
                let dxu = tab.dist[x][u];
                if dxu / 2.0 >= epsilon {
                    continue;
                }
                for y in 0..n {
                    for v in 0..n {
                        if !tab.le[y][v] {
                            continue;
                        }
                        let dyv = tab.dist[y][v];
                        if !admissible(dxu, dyv, epsilon) {
                            continue;
                        }
                        let image = space.distance_unchecked(&images[x][y], &images[u][v]);
                        let ratio = contraction_ratio(image, dxu, dyv);
                        let stop = scan.record(ratio, || Quadruple {
                            x: points[x].clone(),
                            u: points[u].clone(),
                            y: points[y].clone(),
                            v: points[v].clone(),
                        });
                        if stop {
                            break 'outer;
                        }
                    }
                }
            }
        }
    }

    if let (false, Some(b)) = (scan.violated, space.as_box()) {
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed ^ 0x9e37_79b9_7f4a_7c15);
        for _ in 0..plan.random_quadruples {
            let q = random_admissible(b, epsilon, &mut rng);
            let dxu = space.distance_unchecked(&q.x, &q.u);
            let dyv = space.distance_unchecked(&q.y, &q.v);
            if !admissible(dxu, dyv, epsilon) {
                continue;
            }
            let fx = map.apply_valid(&q.x, &q.y)?;
            let fu = map.apply_valid(&q.u, &q.v)?;
            let ratio = contraction_ratio(space.distance_unchecked(&fx, &fu), dxu, dyv);
            if scan.record(ratio, || q.clone()) {
                break;
            }
        }
    }

    if scan.tested == 0 {
        return Err(HypothesisError::NoAdmissibleQuadruple { epsilon });
    }
    Ok(ContractivityReport {
        epsilon,
        lambda_hat: (!scan.violated).then_some(scan.max_ratio),
        max_ratio: scan.max_ratio,
        violated: scan.violated,
        witness: scan.witness,
        pairs_tested: scan.tested,
        mode: sample.mode,
        sample_seed: sample.seed(),
        sample_size: points.len(),
    })
}

/// A random comparable quadruple whose total displacement is below `2ε`.
/// A quarter of the draws move only `x`, another quarter only `v`, since the
/// extreme ratios of many maps sit on those faces.
fn random_admissible(b: &BoxSpace, epsilon: f64, rng: &mut ChaCha8Rng) -> Quadruple {
    let k = b.dimension();
    let u = random_in_box(b, rng);
    let y = random_in_box(b, rng);
    let face = rng.gen_range(0..4u8);
    let mut weights: Vec<f64> = (0..2 * k).map(|_| rng.gen::<f64>()).collect();
    match face {
        0 => weights[k..].iter_mut().for_each(|w| *w = 0.0),
        1 => weights[..k].iter_mut().for_each(|w| *w = 0.0),
        _ => {}
    }
    let total: f64 = weights.iter().sum();
    let budget = rng.gen::<f64>() * 2.0 * epsilon * 0.999;
    let scale = if total > 0.0 { budget / total } else { 0.0 };
    let x: Vec<f64> = (0..k)
        .map(|i| (u[i] + weights[i] * scale).min(b.upper()[i]))
        .collect();
    let v: Vec<f64> = (0..k)
        .map(|i| (y[i] + weights[k + i] * scale).min(b.upper()[i]))
        .collect();
    Quadruple {
        x: Point::Coords(x),
        u: Point::Coords(u),
        y: Point::Coords(y),
        v: Point::Coords(v),
    }
}

/// An order-ascending chain `α_0 ≤ α_1 ≤ … ≤ α_n` with consecutive gaps `< ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub points: Vec<Point>,
    pub epsilon: f64,
}

impl Chain {
    pub fn n(&self) -> usize {
        self.points.len() - 1
    }

    /// Re-checks the chain invariants against `space` and the endpoints.
    pub fn is_valid(&self, space: &OrderedMetricSpace, a: &Point, b: &Point) -> Result<bool, SpaceError> {
        if self.points.first() != Some(a) || self.points.last() != Some(b) {
            return Ok(false);
        }
        for w in self.points.windows(2) {
            if !space.leq(&w[0], &w[1])? || space.distance(&w[0], &w[1])? >= self.epsilon {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The chain extended to `n` links by repeating its last point.
    pub fn padded(&self, n: usize) -> Chain {
        let mut points = self.points.clone();
        let last = points.last().cloned().expect("chains are nonempty");
        while points.len() < n + 1 {
            points.push(last.clone());
        }
        Chain {
            points,
            epsilon: self.epsilon,
        }
    }
}

/// Directed graph on candidates: `p → q` iff `p ≤ q` and `d(p, q) < ε`.
fn epsilon_graph(tab: &Tabulated<'_>, epsilon: f64) -> Vec<Vec<usize>> {
    let n = tab.len();
    (0..n)
        .map(|p| {
            (0..n)
                .filter(|&q| q != p && tab.le[p][q] && tab.dist[p][q] < epsilon)
                .collect()
        })
        .collect()
}

/// BFS from `source`; returns hop counts and parents.
fn bfs(adj: &[Vec<usize>], source: usize) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    let mut hops = vec![None; adj.len()];
    let mut parent = vec![None; adj.len()];
    let mut queue = VecDeque::new();
    hops[source] = Some(0);
    queue.push_back(source);
    while let Some(p) = queue.pop_front() {
        let next = hops[p].map(|h| h + 1);
        for &q in &adj[p] {
            if hops[q].is_none() {
                hops[q] = next;
                parent[q] = Some(p);
                queue.push_back(q);
            }
        }
    }
    (hops, parent)
}

/// A minimum-length ε-chain from `a` to `b` through `candidates` (with `a`
/// and `b` added when absent), or `None` if `b` is unreachable.
pub fn find_epsilon_chain(
    space: &OrderedMetricSpace,
    a: &Point,
    b: &Point,
    epsilon: f64,
    candidates: &[Point],
) -> Result<Option<Chain>, HypothesisError> {
    if !(epsilon > 0.0) {
        return Err(HypothesisError::BadEpsilon(epsilon));
    }
    if !space.leq(a, b)? {
        return Err(HypothesisError::NotOrdered {
            a: a.clone(),
            b: b.clone(),
        });
    }
    let mut points = candidates.to_vec();
    let source = position_or_push(&mut points, a);
    let target = position_or_push(&mut points, b);
    let tab = Tabulated::new(space, &points)?;
    let adj = epsilon_graph(&tab, epsilon);
    let (hops, parent) = bfs(&adj, source);
    if hops[target].is_none() {
        return Ok(None);
    }
    let mut path = vec![target];
    let mut at = target;
    while let Some(p) = parent[at] {
        path.push(p);
        at = p;
    }
    path.reverse();
    Ok(Some(Chain {
        points: path.into_iter().map(|i| points[i].clone()).collect(),
        epsilon,
    }))
}

fn position_or_push(points: &mut Vec<Point>, p: &Point) -> usize {
    match points.iter().position(|q| q == p) {
        Some(i) => i,
        None => {
            points.push(p.clone());
            points.len() - 1
        }
    }
}

/// Minimal chain length between every ordered pair of candidates
/// (`None` where the pair is incomparable or unreachable).
pub fn chain_length_table(
    space: &OrderedMetricSpace,
    epsilon: f64,
    candidates: &[Point],
) -> Result<Vec<Vec<Option<usize>>>, HypothesisError> {
    if !(epsilon > 0.0) {
        return Err(HypothesisError::BadEpsilon(epsilon));
    }
    let tab = Tabulated::new(space, candidates)?;
    let adj = epsilon_graph(&tab, epsilon);
    Ok((0..tab.len())
        .map(|a| {
            let (hops, _) = bfs(&adj, a);
            hops.into_iter()
                .enumerate()
                .map(|(b, h)| if tab.le[a][b] { h } else { None })
                .collect()
        })
        .collect())
}

/// Checks that every comparable candidate pair is joined by an ε-chain and
/// reports the largest minimal chain length. On boxes only the grid is used:
/// random points rarely have grid points between them and add only gaps.
pub fn check_epsilon_chainable(
    space: &OrderedMetricSpace,
    epsilon: f64,
    plan: &SamplingPlan,
) -> Result<HypothesisReport, HypothesisError> {
    let grid_only = SamplingPlan {
        random_points: 0,
        ..plan.clone()
    };
    let sample = grid_only.sample(space)?;
    let table = chain_length_table(space, epsilon, &sample.points)?;
    let n = sample.points.len();
    let mut max_n = 0;
    let mut gap = None;
    'scan: for a in 0..n {
        for b in 0..n {
            if !space.leq_unchecked(&sample.points[a], &sample.points[b]) {
                continue;
            }
            match table[a][b] {
                Some(h) => max_n = max_n.max(h),
                None => {
                    gap = Some((a, b));
                    break 'scan;
                }
            }
        }
    }
    let mut report = match (gap, sample.mode) {
        (None, _) => HypothesisReport {
            max_n: Some(max_n),
            ..HypothesisReport::new(HypothesisId::EpsilonChainable, Verdict::Holds, &sample)
        },
        (Some((a, b)), Mode::Exhaustive) => HypothesisReport {
            witness: Some(vec![sample.points[a].clone(), sample.points[b].clone()]),
            note: Some("witness [a, b]: a <= b with no epsilon-chain".into()),
            ..HypothesisReport::new(HypothesisId::EpsilonChainable, Verdict::Violated, &sample)
        },
        // Boxes are always chainable; a gap means the grid is too coarse.
        (Some((a, b)), Mode::Sampled) => HypothesisReport {
            witness: Some(vec![sample.points[a].clone(), sample.points[b].clone()]),
            note: Some("grid too coarse for epsilon: no chain between witness points".into()),
            ..HypothesisReport::new(HypothesisId::EpsilonChainable, Verdict::UndeterminedSampled, &sample)
        },
    };
    report.epsilon = Some(epsilon);
    Ok(report)
}

/// `x0 ≤ F(x0, y0)` and `y0 ≥ F(y0, x0)`.
pub fn check_seed(map: &CoupledMap, x0: &Point, y0: &Point) -> Result<HypothesisReport, HypothesisError> {
    let space = map.space();
    let fx = map.apply(x0, y0)?;
    let fy = map.apply(y0, x0)?;
    let holds = space.leq(x0, &fx)? && space.leq(&fy, y0)?;
    Ok(HypothesisReport {
        hypothesis: HypothesisId::SeedCondition,
        verdict: if holds { Verdict::Holds } else { Verdict::Violated },
        witness: (!holds).then(|| vec![x0.clone(), y0.clone()]),
        sample_seed: None,
        sample_size: 2,
        lambda_hat: None,
        epsilon: None,
        max_n: None,
        note: None,
    })
}

/// Condition (H): every two product points have a product point comparable
/// to both.
///
/// A pair `P = (x, y)`, `Q = (x*, y*)` satisfies it iff `P` and `Q` are
/// comparable, or `{x, x*}` has an upper bound and `{y, y*}` a lower bound,
/// or `{x, x*}` has a lower bound and `{y, y*}` an upper bound.
pub fn check_condition_h(space: &OrderedMetricSpace, plan: &SamplingPlan) -> Result<HypothesisReport, HypothesisError> {
    let sample = plan.sample(space)?;
    let tab = Tabulated::new(space, &sample.points)?;
    let (up, down) = tab.up_down_sets();
    let n = tab.len();
    let le = &tab.le;
    let mut witness = None;
    'scan: for x in 0..n {
        for y in 0..n {
            for xs in 0..n {
                let has_ub_x = up.intersects(x, xs);
                let has_lb_x = down.intersects(x, xs);
                for ys in 0..n {
                    let comparable = (le[x][xs] && le[ys][y]) || (le[xs][x] && le[y][ys]);
                    if comparable
                        || (has_ub_x && down.intersects(y, ys))
                        || (has_lb_x && up.intersects(y, ys))
                    {
                        continue;
                    }
                    witness = Some([x, y, xs, ys]);
                    break 'scan;
                }
            }
        }
    }
    Ok(lattice_report(HypothesisId::ConditionH, &sample, witness.map(|w| w.to_vec()),
        "witness [x, y, x*, y*]: no product point is comparable to both (x, y) and (x*, y*)"))
}

/// Every pair of points has a common upper bound or a common lower bound.
pub fn check_pair_bounds(space: &OrderedMetricSpace, plan: &SamplingPlan) -> Result<HypothesisReport, HypothesisError> {
    let sample = plan.sample(space)?;
    let tab = Tabulated::new(space, &sample.points)?;
    let (up, down) = tab.up_down_sets();
    let n = tab.len();
    let mut witness = None;
    'scan: for p in 0..n {
        for q in 0..n {
            if !up.intersects(p, q) && !down.intersects(p, q) {
                witness = Some(vec![p, q]);
                break 'scan;
            }
        }
    }
    Ok(lattice_report(HypothesisId::PairBounds, &sample, witness,
        "witness [p, q]: no common upper or lower bound"))
}

// Grid-restricted checks of lattice properties. Boxes are lattices, so a clean
// grid run is reported as holding; a grid witness can only be a sampling
// artifact there.
fn lattice_report(
    id: HypothesisId,
    sample: &Sample,
    witness: Option<Vec<usize>>,
    note: &str,
) -> HypothesisReport {
    let to_points = |w: Vec<usize>| w.into_iter().map(|i| sample.points[i].clone()).collect();
    match (witness, sample.mode) {
        (None, _) => HypothesisReport::new(id, Verdict::Holds, sample),
        (Some(w), Mode::Exhaustive) => HypothesisReport {
            witness: Some(to_points(w)),
            note: Some(note.into()),
            ..HypothesisReport::new(id, Verdict::Violated, sample)
        },
        (Some(w), Mode::Sampled) => HypothesisReport {
            witness: Some(to_points(w)),
            note: Some(format!("grid artifact: {note}")),
            ..HypothesisReport::new(id, Verdict::UndeterminedSampled, sample)
        },
    }
}

/// Every hypothesis report for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub mixed_monotone: HypothesisReport,
    pub epsilon_chainable: HypothesisReport,
    pub contraction: ContractivityReport,
    pub seed_condition: HypothesisReport,
    pub condition_h: HypothesisReport,
    pub pair_bounds: HypothesisReport,
    /// The contraction estimate found no admissible quadruple; the
    /// contraction condition then holds vacuously.
    pub contraction_vacuous: bool,
}

/// Runs every check for `map` with the seeds `(x0, y0)`.
pub fn assess(
    map: &CoupledMap,
    x0: &Point,
    y0: &Point,
    epsilon: f64,
    plan: &SamplingPlan,
) -> Result<Assessment, HypothesisError> {
    let space = map.space();
    let (contraction, contraction_vacuous) = match estimate_contraction(map, epsilon, plan) {
        Ok(r) => (r, false),
        Err(HypothesisError::NoAdmissibleQuadruple { .. }) => {
            let sample = plan.sample(space)?;
            (
                ContractivityReport {
                    epsilon,
                    lambda_hat: Some(0.0),
                    max_ratio: 0.0,
                    violated: false,
                    witness: None,
                    pairs_tested: 0,
                    mode: sample.mode,
                    sample_seed: sample.seed(),
                    sample_size: sample.points.len(),
                },
                true,
            )
        }
        Err(e) => return Err(e),
    };
    Ok(Assessment {
        mixed_monotone: check_mixed_monotone(map, plan)?,
        epsilon_chainable: check_epsilon_chainable(space, epsilon, plan)?,
        contraction,
        seed_condition: check_seed(map, x0, y0)?,
        condition_h: check_condition_h(space, plan)?,
        pair_bounds: check_pair_bounds(space, plan)?,
        contraction_vacuous,
    })
}

impl Assessment {
    pub fn reports(&self) -> Vec<HypothesisReport> {
        vec![
            self.mixed_monotone.clone(),
            self.epsilon_chainable.clone(),
            self.contraction.to_report(),
            self.seed_condition.clone(),
            self.condition_h.clone(),
            self.pair_bounds.clone(),
        ]
    }

    pub fn any_violated(&self) -> bool {
        self.reports().iter().any(HypothesisReport::is_violated)
    }

    /// The `λ` to use in bounds: the certified modulus on exhaustive runs,
    /// otherwise a claimed value that strictly dominates every sampled ratio.
    pub fn lambda(&self, claimed: Option<f64>) -> Option<f64> {
        if self.contraction.mode == Mode::Exhaustive {
            return self.contraction.certified_lambda();
        }
        claimed.filter(|l| *l > 0.0 && self.contraction.supports_lambda(*l))
    }

    /// Hypotheses 1–3 of the decay lemma (chains, mixed monotonicity,
    /// contraction with a usable `λ`).
    pub fn lemma_certified(&self, claimed: Option<f64>) -> bool {
        self.mixed_monotone.passes()
            && self.epsilon_chainable.verdict == Verdict::Holds
            && self.lambda(claimed).is_some()
    }

    /// Every hypothesis of the existence theorem checkable here.
    pub fn existence_certified(&self, claimed: Option<f64>) -> bool {
        self.lemma_certified(claimed) && self.seed_condition.verdict == Verdict::Holds
    }

    /// The existence hypotheses together with condition (H).
    pub fn uniqueness_certified(&self, claimed: Option<f64>) -> bool {
        self.existence_certified(claimed) && self.condition_h.verdict == Verdict::Holds
    }

    /// The largest minimal chain length, at least 1.
    pub fn chain_n(&self) -> Option<usize> {
        self.epsilon_chainable.max_n.map(|n| n.max(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::FiniteSpace;

    fn s(v: f64) -> Point {
        Point::scalar(v)
    }

    fn unit_map(src: &str) -> CoupledMap {
        CoupledMap::expression(BoxSpace::unit(1), vec![src.into()]).unwrap()
    }

    fn line(n: usize) -> FiniteSpace {
        let d = (0..n)
            .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
            .collect();
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        FiniteSpace::from_pairs((0..n).map(|i| i.to_string()).collect(), d, &pairs).unwrap()
    }

    fn antichain(n: usize) -> FiniteSpace {
        let d = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect();
        FiniteSpace::from_pairs((0..n).map(|i| i.to_string()).collect(), d, &[]).unwrap()
    }

    #[test]
    fn grid_is_exact_on_quarter_steps() {
        let g = grid_points(&BoxSpace::unit(1), 0.25);
        assert_eq!(g, vec![s(0.0), s(0.25), s(0.5), s(0.75), s(1.0)]);
        let g2 = grid_points(&BoxSpace::unit(2), 0.5);
        assert_eq!(g2.len(), 9);
        assert_eq!(g2[1], Point::Coords(vec![0.0, 0.5]));
        assert_eq!(grid_points(&BoxSpace::unit(1), 0.1).len(), 11);
    }

    #[test]
    fn mixed_monotone_linear_map_passes_sampled() {
        let r = check_mixed_monotone(&unit_map("(2*x - y + 3)/8"), &SamplingPlan::grid(0.1)).unwrap();
        assert_eq!(r.verdict, Verdict::UndeterminedSampled);
        assert!(r.witness.is_none());
        assert_eq!(r.sample_size, 11);
    }

    #[test]
    fn mixed_monotone_product_map_is_violated() {
        let f = unit_map("x * y");
        let r = check_mixed_monotone(&f, &SamplingPlan::grid(0.1)).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        let v = find_monotone_violation(&f, &grid_points(&BoxSpace::unit(1), 0.1))
            .unwrap()
            .unwrap();
        assert!(v.recheck(&f).unwrap());
        // The hand-derived witness x = 1, y1 = 0, y2 = 1 is also a violation.
        let hand = MonotoneViolation::SecondArgument {
            x: s(1.0),
            y1: s(0.0),
            y2: s(1.0),
        };
        assert!(hand.recheck(&f).unwrap());
    }

    #[test]
    fn mixed_monotone_constant_holds() {
        let f = CoupledMap::constant(line(4), Point::Index(2)).unwrap();
        let r = check_mixed_monotone(&f, &SamplingPlan::exhaustive()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
    }

    #[test]
    fn contraction_linear_map_approaches_half() {
        let plan = SamplingPlan::grid(0.05).with_random(0, 5000, 7);
        let r = estimate_contraction(&unit_map("(2*x - y + 3)/8"), 1.0, &plan).unwrap();
        let l = r.lambda_hat.unwrap();
        assert!((l - 0.5).abs() < 1e-9, "{l}");
        assert!(!r.violated);
        assert_eq!(r.mode, Mode::Sampled);
        assert!(r.supports_lambda(0.6));
        assert!(!r.supports_lambda(0.4));
    }

    #[test]
    fn contraction_constant_is_zero() {
        let f = CoupledMap::constant(line(5), Point::Index(1)).unwrap();
        let r = estimate_contraction(&f, 1.5, &SamplingPlan::exhaustive()).unwrap();
        assert_eq!(r.lambda_hat, Some(0.0));
        assert!(r.certified_lambda().unwrap() > 0.0);
    }

    #[test]
    fn contraction_identity_in_x_violates() {
        let r = estimate_contraction(&unit_map("x"), 1.0, &SamplingPlan::grid(0.25)).unwrap();
        assert!(r.violated);
        assert!(r.lambda_hat.is_none());
        let w = r.witness.unwrap();
        // First violation in (x, u, y, v) order: x = 0.25, u = 0, y = v = 0.
        assert_eq!(w, Quadruple { x: s(0.25), u: s(0.0), y: s(0.0), v: s(0.0) });
        assert_eq!(r.max_ratio, 2.0);
    }

    #[test]
    fn contraction_needs_admissible_quadruple() {
        let f = CoupledMap::constant(antichain(3), Point::Index(0)).unwrap();
        assert_eq!(
            estimate_contraction(&f, 1.0, &SamplingPlan::exhaustive()),
            Err(HypothesisError::NoAdmissibleQuadruple { epsilon: 1.0 })
        );
    }

    #[test]
    fn chain_on_unit_interval() {
        let space: OrderedMetricSpace = BoxSpace::unit(1).into();
        let grid = grid_points(space.as_box().unwrap(), 0.25);
        let c = find_epsilon_chain(&space, &s(0.0), &s(1.0), 0.3, &grid).unwrap().unwrap();
        assert_eq!(c.points, grid);
        assert_eq!(c.n(), 4);
        assert!(c.is_valid(&space, &s(0.0), &s(1.0)).unwrap());

        let same = find_epsilon_chain(&space, &s(0.4), &s(0.4), 0.3, &grid).unwrap().unwrap();
        assert_eq!(same.n(), 0);
    }

    #[test]
    fn chain_through_off_grid_endpoints() {
        let space: OrderedMetricSpace = BoxSpace::unit(1).into();
        let grid = grid_points(space.as_box().unwrap(), 0.25);
        let c = find_epsilon_chain(&space, &s(0.625), &s(1.0), 0.3, &grid).unwrap().unwrap();
        assert_eq!(c.n(), 2);
        assert!(c.is_valid(&space, &s(0.625), &s(1.0)).unwrap());
    }

    #[test]
    fn chain_unreachable_and_unordered() {
        let space: OrderedMetricSpace = FiniteSpace::from_pairs(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 5.0], vec![5.0, 0.0]],
            &[(0, 1)],
        )
        .unwrap()
        .into();
        let pts = space.finite_points().unwrap();
        assert_eq!(find_epsilon_chain(&space, &pts[0], &pts[1], 1.0, &pts).unwrap(), None);
        assert!(matches!(
            find_epsilon_chain(&space, &pts[1], &pts[0], 1.0, &pts),
            Err(HypothesisError::NotOrdered { .. })
        ));
    }

    #[test]
    fn chainable_examples() {
        let unit: OrderedMetricSpace = BoxSpace::unit(1).into();
        let r = check_epsilon_chainable(&unit, 0.3, &SamplingPlan::grid(0.25)).unwrap();
        assert_eq!((r.verdict, r.max_n), (Verdict::Holds, Some(4)));

        let l: OrderedMetricSpace = line(5).into();
        let r = check_epsilon_chainable(&l, 10.0, &SamplingPlan::exhaustive()).unwrap();
        assert_eq!((r.verdict, r.max_n), (Verdict::Holds, Some(1)));

        let gap: OrderedMetricSpace = FiniteSpace::from_pairs(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![0.0, 0.5, 5.5],
                vec![0.5, 0.0, 5.0],
                vec![5.5, 5.0, 0.0],
            ],
            &[(0, 1), (1, 2)],
        )
        .unwrap()
        .into();
        let r = check_epsilon_chainable(&gap, 1.0, &SamplingPlan::exhaustive()).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert_eq!(r.witness, Some(vec![Point::Index(0), Point::Index(2)]));
    }

    #[test]
    fn padded_chain_stays_valid() {
        let space: OrderedMetricSpace = line(3).into();
        let pts = space.finite_points().unwrap();
        let c = find_epsilon_chain(&space, &pts[0], &pts[1], 1.5, &pts).unwrap().unwrap();
        let p = c.padded(3);
        assert_eq!(p.n(), 3);
        assert!(p.is_valid(&space, &pts[0], &pts[1]).unwrap());
    }

    #[test]
    fn seed_examples() {
        let f = unit_map("(2*x - y + 3)/8");
        assert_eq!(check_seed(&f, &s(0.0), &s(1.0)).unwrap().verdict, Verdict::Holds);
        let r = check_seed(&f, &s(1.0), &s(0.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert_eq!(r.witness, Some(vec![s(1.0), s(0.0)]));
        let c = CoupledMap::constant(line(3), Point::Index(1)).unwrap();
        assert_eq!(check_seed(&c, &Point::Index(1), &Point::Index(1)).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn condition_h_examples() {
        let plane: OrderedMetricSpace = BoxSpace::unit(2).into();
        assert_eq!(check_condition_h(&plane, &SamplingPlan::grid(0.5)).unwrap().verdict, Verdict::Holds);

        let pq: OrderedMetricSpace = antichain(2).into();
        let r = check_condition_h(&pq, &SamplingPlan::exhaustive()).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert_eq!(
            r.witness,
            Some(vec![Point::Index(0), Point::Index(0), Point::Index(0), Point::Index(1)])
        );

        let single: OrderedMetricSpace = line(1).into();
        assert_eq!(check_condition_h(&single, &SamplingPlan::exhaustive()).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn pair_bounds_examples() {
        let l: OrderedMetricSpace = line(5).into();
        assert_eq!(check_pair_bounds(&l, &SamplingPlan::exhaustive()).unwrap().verdict, Verdict::Holds);
        let pq: OrderedMetricSpace = antichain(2).into();
        let r = check_pair_bounds(&pq, &SamplingPlan::exhaustive()).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert_eq!(r.witness, Some(vec![Point::Index(0), Point::Index(1)]));
        let plane: OrderedMetricSpace = BoxSpace::unit(2).into();
        assert_eq!(check_pair_bounds(&plane, &SamplingPlan::grid(0.25)).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn report_serializes_with_contract_field_names() {
        let r = check_seed(&unit_map("(2*x - y + 3)/8"), &s(1.0), &s(0.0)).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["hypothesis", "verdict", "witness", "sample_seed", "sample_size", "lambda_hat", "epsilon", "max_n"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["verdict"], "violated");
        assert_eq!(v["hypothesis"], "seed_condition");
    }
}
