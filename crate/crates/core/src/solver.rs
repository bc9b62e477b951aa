//! Coupled Picard iteration, the decay bound `2·n·λ^m·ε`, and the uniqueness
//! and component-collapse checks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypothesis::{find_epsilon_chain, Assessment, Chain, HypothesisError, SamplingPlan, Verdict};
use crate::map::{CoupledMap, MapError};
use crate::space::{OrderedMetricSpace, Point, ProductPair, SpaceError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Hypothesis(#[from] HypothesisError),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("{pair} is not a coupled fixed point: residual {residual} exceeds {tolerance}")]
    NotFixedPoint {
        pair: ProductPair,
        residual: f64,
        tolerance: f64,
    },
    #[error("witness {witness} is not comparable to both fixed pairs")]
    WitnessNotComparable { witness: ProductPair },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub max_iterations: usize,
    pub residual_tolerance: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub chain_n: usize,
    pub record_trace: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            residual_tolerance: 1e-10,
            lambda: 0.5,
            epsilon: 1.0,
            chain_n: 1,
            record_trace: true,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.max_iterations < 1 {
            return Err(SolverError::Parameter("max_iterations must be at least 1".into()));
        }
        if !(self.residual_tolerance > 0.0) {
            return Err(SolverError::Parameter("residual_tolerance must be positive".into()));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(SolverError::Parameter(format!("lambda {} is not in (0, 1)", self.lambda)));
        }
        if !(self.epsilon > 0.0) {
            return Err(SolverError::Parameter("epsilon must be positive".into()));
        }
        Ok(())
    }

    /// The residual at which iteration stops: `residual_tolerance` scaled by
    /// `min(1, 2(1 − λ))`. Under contraction the remaining distance to the
    /// limit is at most `residual / (1 − λ)`, so both components then sit
    /// within the collapse tolerance of it.
    pub fn stopping_threshold(&self) -> f64 {
        self.residual_tolerance * (2.0 * (1.0 - self.lambda)).min(1.0)
    }

    /// Collapse and uniqueness tolerance: twice the residual tolerance.
    pub fn collapse_tolerance(&self) -> f64 {
        2.0 * self.residual_tolerance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    #[serde(rename = "converged")]
    Converged,
    #[serde(rename = "max-iterations")]
    MaxIterations,
    #[serde(rename = "diverged-from-box")]
    DivergedFromBox,
}

/// One iterate of the solve. `residual` equals `η` from this iterate to the
/// next, and `eta_step` is `η` from the previous iterate to this one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub m: usize,
    pub x: Point,
    pub y: Point,
    pub residual: f64,
    pub eta_step: Option<f64>,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub m: usize,
    pub observed: f64,
    pub bound: Option<f64>,
}

impl BoundRow {
    pub fn below(&self) -> bool {
        self.bound.is_some_and(|b| self.observed < b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collapse {
    pub gap: f64,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub seeds: ProductPair,
    pub fixed_pair: ProductPair,
    pub residual: f64,
    pub residual_tolerance: f64,
    pub iterations_used: usize,
    pub trace: Vec<TraceRow>,
    pub bound_check: Vec<BoundRow>,
    pub bound_holds: bool,
    pub collapse: Collapse,
}

impl SolveResult {
    /// `x_m` nondecreasing and `y_m` nonincreasing over the recorded trace.
    pub fn monotone_trajectories(&self, space: &OrderedMetricSpace) -> Result<bool, SpaceError> {
        for w in self.trace.windows(2) {
            if !space.leq(&w[0].x, &w[1].x)? || !space.leq(&w[1].y, &w[0].y)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `d(x, F(x, y)) + d(y, F(y, x))`.
pub fn residual(map: &CoupledMap, x: &Point, y: &Point) -> Result<f64, SolverError> {
    let space = map.space();
    let fx = map.apply(x, y)?;
    let fy = map.apply(y, x)?;
    Ok(space.distance(x, &fx)? + space.distance(y, &fy)?)
}

/// `2·n·λ^m·ε`.
pub fn lemma_bound(n: usize, lambda: f64, epsilon: f64, m: usize) -> Result<f64, SolverError> {
    if n < 1 {
        return Err(SolverError::Parameter("chain length n must be at least 1".into()));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(SolverError::Parameter(format!("lambda {lambda} is not in (0, 1)")));
    }
    if !(epsilon > 0.0) {
        return Err(SolverError::Parameter("epsilon must be positive".into()));
    }
    Ok(2.0 * n as f64 * lambda.powi(m.min(i32::MAX as usize) as i32) * epsilon)
}

/// Runs `x_{m+1} = F(x_m, y_m)`, `y_{m+1} = F(y_m, x_m)` from `(x0, y0)`
/// until the residual drops to the tolerance or the iteration budget runs out.
pub fn picard_solve(map: &CoupledMap, x0: &Point, y0: &Point, cfg: &SolveConfig) -> Result<SolveResult, SolverError> {
    cfg.validate()?;
    let space = map.space();
    space.validate(x0)?;
    space.validate(y0)?;
    let n = cfg.chain_n.max(1);

    let mut x = x0.clone();
    let mut y = y0.clone();
    let mut trace = Vec::new();
    let mut bound_check = Vec::new();
    let mut eta_prev = None;
    let mut m = 0;
    let mut last_residual = f64::NAN;
    let status = loop {
        let (fx, fy) = match map.step(&x, &y) {
            Ok(next) => next,
            Err(MapError::EscapedBox { .. }) => break SolveStatus::DivergedFromBox,
            Err(e) => return Err(e.into()),
        };
        let res = space.distance_unchecked(&x, &fx) + space.distance_unchecked(&y, &fy);
        last_residual = res;
        let bound = lemma_bound(n, cfg.lambda, cfg.epsilon, m)?;
        bound_check.push(BoundRow {
            m,
            observed: res,
            bound: Some(bound),
        });
        if cfg.record_trace {
            trace.push(TraceRow {
                m,
                x: x.clone(),
                y: y.clone(),
                residual: res,
                eta_step: eta_prev,
                bound,
            });
        }
        if res <= cfg.stopping_threshold() {
            break SolveStatus::Converged;
        }
        if m == cfg.max_iterations {
            break SolveStatus::MaxIterations;
        }
        eta_prev = Some(res);
        x = fx;
        y = fy;
        m += 1;
    };

    let gap = space.distance_unchecked(&x, &y);
    Ok(SolveResult {
        status,
        seeds: ProductPair::new(x0.clone(), y0.clone()),
        residual: last_residual,
        residual_tolerance: cfg.residual_tolerance,
        iterations_used: m,
        bound_holds: bound_check.iter().all(BoundRow::below),
        trace,
        bound_check,
        collapse: Collapse {
            gap,
            equal: gap <= cfg.collapse_tolerance(),
        },
        fixed_pair: ProductPair::new(x, y),
    })
}

/// Which hypotheses of the decay lemma have been established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LemmaCertificate {
    pub epsilon_chainable: bool,
    pub mixed_monotone: bool,
    pub contraction: bool,
}

impl LemmaCertificate {
    pub fn all() -> Self {
        Self {
            epsilon_chainable: true,
            mixed_monotone: true,
            contraction: true,
        }
    }

    /// Reads the certificate off an assessment; `lambda` must be supported by
    /// the contraction report.
    pub fn from_assessment(a: &Assessment, lambda: f64) -> Self {
        let contraction = if a.contraction_vacuous {
            true
        } else {
            match a.contraction.certified_lambda() {
                Some(l) => lambda >= l && lambda < 1.0,
                None => a.contraction.supports_lambda(lambda),
            }
        };
        Self {
            epsilon_chainable: a.epsilon_chainable.verdict == Verdict::Holds,
            mixed_monotone: a.mixed_monotone.passes(),
            contraction,
        }
    }

    fn missing(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.epsilon_chainable {
            out.push("epsilon_chainable".to_string());
        }
        if !self.mixed_monotone {
            out.push("mixed_monotone".to_string());
        }
        if !self.contraction {
            out.push("uniform_local_contraction".to_string());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaParams {
    pub lambda: f64,
    pub epsilon: f64,
    pub horizon: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    /// Common chain length used in the bound (at least 1).
    pub n: Option<usize>,
    pub chain_lower: Option<Chain>,
    pub chain_upper: Option<Chain>,
    pub rows: Vec<BoundRow>,
    /// Every row satisfies `observed < bound`.
    pub all_below_bound: bool,
    /// The observed distance at the horizon is zero or below its start.
    pub decays: bool,
    /// Hypotheses that were not established (reported, not raised).
    pub uncertified: Vec<String>,
}

impl LemmaReport {
    pub fn certified(&self) -> bool {
        self.uncertified.is_empty()
    }

    pub fn observed_at(&self, m: usize) -> Option<f64> {
        self.rows.get(m).map(|r| r.observed)
    }
}

/// Tracks `η((F^m(a, a*), F^m(a*, a)), (F^m(b, b*), F^m(b*, b)))` for
/// `m = 0..=horizon` against `2·n·λ^m·ε`, where `n` is the longer of the
/// minimal ε-chains from `a` to `b` and from `b*` to `a*`.
pub fn verify_lemma_decay(
    map: &CoupledMap,
    lower: &ProductPair,
    upper: &ProductPair,
    params: &LemmaParams,
    plan: &SamplingPlan,
    certificate: LemmaCertificate,
) -> Result<LemmaReport, SolverError> {
    let space = map.space();
    let (a, b) = (&lower.first, &lower.second);
    let (a_star, b_star) = (&upper.first, &upper.second);
    let mut uncertified = certificate.missing();
    let ordered = space.leq(a, b)? && space.leq(b_star, a_star)?;
    if !ordered {
        uncertified.push("seed_pairs_ordered".into());
    }

    let (chain_lower, chain_upper) = if ordered {
        let sample = plan.sample(space)?;
        (
            find_epsilon_chain(space, a, b, params.epsilon, &sample.points)?,
            find_epsilon_chain(space, b_star, a_star, params.epsilon, &sample.points)?,
        )
    } else {
        (None, None)
    };
    let n = match (&chain_lower, &chain_upper) {
        (Some(c1), Some(c2)) => Some(c1.n().max(c2.n()).max(1)),
        _ => {
            if ordered {
                uncertified.push("chain_found".into());
            }
            None
        }
    };
    let bound_ok = params.lambda > 0.0 && params.lambda < 1.0 && params.epsilon > 0.0;
    if !bound_ok {
        uncertified.push("lambda_epsilon_range".into());
    }

    let mut first = map.orbit(a, a_star)?;
    let mut second = map.orbit(b, b_star)?;
    let mut rows = Vec::with_capacity(params.horizon + 1);
    for m in 0..=params.horizon {
        if m > 0 {
            first.advance()?;
            second.advance()?;
        }
        let observed = space.distance_unchecked(first.forward(), second.forward())
            + space.distance_unchecked(first.backward(), second.backward());
        let bound = match n {
            Some(n) if bound_ok => Some(lemma_bound(n, params.lambda, params.epsilon, m)?),
            _ => None,
        };
        rows.push(BoundRow { m, observed, bound });
    }
    let start = rows[0].observed;
    let end = rows[rows.len() - 1].observed;
    Ok(LemmaReport {
        n,
        chain_lower,
        chain_upper,
        all_below_bound: rows.iter().all(BoundRow::below),
        decays: end == 0.0 || end < start,
        rows,
        uncertified,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniquenessVerdict {
    Same,
    Distinct,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniquenessCase {
    /// The fixed pairs are comparable in the product order.
    Direct,
    /// A witness comparable to both was iterated.
    Witness,
    /// Neither route applies.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub verdict: UniquenessVerdict,
    pub case: UniquenessCase,
    /// `η` between the two fixed pairs after `horizon` steps.
    pub eta_fixed: f64,
    /// `η` from the iterated witness to each fixed pair at the horizon.
    pub witness_gaps: Option<(f64, f64)>,
}

/// Decides whether two approximate coupled fixed points are the same by the
/// two routes of the uniqueness argument. Direct comparability takes
/// precedence over a supplied witness.
pub fn uniqueness_probe(
    map: &CoupledMap,
    fp1: &ProductPair,
    fp2: &ProductPair,
    witness: Option<&ProductPair>,
    cfg: &SolveConfig,
    horizon: usize,
) -> Result<UniquenessReport, SolverError> {
    let space = map.space();
    for fp in [fp1, fp2] {
        let r = residual(map, &fp.first, &fp.second)?;
        if r > cfg.residual_tolerance {
            return Err(SolverError::NotFixedPoint {
                pair: fp.clone(),
                residual: r,
                tolerance: cfg.residual_tolerance,
            });
        }
    }
    let tol = cfg.collapse_tolerance();
    let image1 = map.iterate_m(&fp1.first, &fp1.second, horizon)?;
    let image2 = map.iterate_m(&fp2.first, &fp2.second, horizon)?;
    let eta_fixed = space.distance_unchecked(&image1.forward, &image2.forward)
        + space.distance_unchecked(&image1.backward, &image2.backward);

    if space.product_comparable(fp1, fp2)? {
        return Ok(UniquenessReport {
            verdict: if eta_fixed <= tol {
                UniquenessVerdict::Same
            } else {
                UniquenessVerdict::Distinct
            },
            case: UniquenessCase::Direct,
            eta_fixed,
            witness_gaps: None,
        });
    }
    let Some(w) = witness else {
        return Ok(UniquenessReport {
            verdict: UniquenessVerdict::Inconclusive,
            case: UniquenessCase::None,
            eta_fixed,
            witness_gaps: None,
        });
    };
    if !(space.product_comparable(w, fp1)? && space.product_comparable(w, fp2)?) {
        return Err(SolverError::WitnessNotComparable { witness: w.clone() });
    }
    let wm = map.iterate_m(&w.first, &w.second, horizon)?;
    let gap = |img: &crate::map::IteratePair| {
        space.distance_unchecked(&wm.forward, &img.forward)
            + space.distance_unchecked(&wm.backward, &img.backward)
    };
    let gaps = (gap(&image1), gap(&image2));
    Ok(UniquenessReport {
        verdict: if gaps.0 <= tol && gaps.1 <= tol {
            UniquenessVerdict::Same
        } else {
            UniquenessVerdict::Distinct
        },
        case: UniquenessCase::Witness,
        eta_fixed,
        witness_gaps: Some(gaps),
    })
}

/// The hypothesis under which the components of the fixed pair must agree.
#[derive(Debug, Clone, Copy)]
pub enum CollapseMode {
    /// Every pair of points has an upper or a lower bound. `certified` means
    /// that check and the existence hypotheses both hold.
    PairBounds { certified: bool },
    /// The seeds `x0`, `y0` are comparable (checked here) and the existence
    /// hypotheses hold.
    ComparableSeeds { existence_certified: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CollapseVerdict {
    Holds { gap: f64 },
    Fails { gap: f64 },
    NotApplicable { reason: String },
}

/// Checks `d(x, y) ≤ 2·residual_tolerance` for a converged solve whose
/// collapse hypothesis is established.
pub fn collapse_check(
    result: &SolveResult,
    mode: CollapseMode,
    space: &OrderedMetricSpace,
) -> Result<CollapseVerdict, SolverError> {
    if result.status != SolveStatus::Converged {
        return Ok(CollapseVerdict::NotApplicable {
            reason: "solve did not converge".into(),
        });
    }
    let applicable = match mode {
        CollapseMode::PairBounds { certified } => certified,
        CollapseMode::ComparableSeeds { existence_certified } => {
            existence_certified && space.comparable(&result.seeds.first, &result.seeds.second)?
        }
    };
    if !applicable {
        return Ok(CollapseVerdict::NotApplicable {
            reason: match mode {
                CollapseMode::PairBounds { .. } => "pair bounds not certified".into(),
                CollapseMode::ComparableSeeds { existence_certified: false } => {
                    "existence hypotheses not certified".into()
                }
                CollapseMode::ComparableSeeds { .. } => "seeds are not comparable".into(),
            },
        });
    }
    let gap = space.distance(&result.fixed_pair.first, &result.fixed_pair.second)?;
    Ok(if gap <= 2.0 * result.residual_tolerance {
        CollapseVerdict::Holds { gap }
    } else {
        CollapseVerdict::Fails { gap }
    })
}
