//! Coupled fixed points of mixed monotone maps on ordered ε-chainable metric
//! spaces: hypothesis checks, Picard iteration with an a-priori decay bound,
//! and a brute-force oracle for finite instances.

mod bitset;
pub mod cli;
pub mod expr;
pub mod generate;
pub mod hypothesis;
pub mod instance;
pub mod map;
pub mod oracle;
pub mod solver;
pub mod space;
pub mod trace;

pub use hypothesis::{assess, Assessment, HypothesisId, HypothesisReport, SamplingPlan, Verdict};
pub use map::CoupledMap;
pub use solver::{picard_solve, verify_lemma_decay, SolveConfig, SolveResult, SolveStatus};
pub use space::{BoxSpace, FiniteSpace, OrderedMetricSpace, Point, ProductPair};
