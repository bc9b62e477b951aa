//! Partially ordered metric spaces and the product space `X × X`.
//!
//! Two concrete shapes are supported:
//!
//! * [`FiniteSpace`]: a tabulated point set with an explicit distance matrix
//!   and an explicit order relation. All metric and order axioms are checked
//!   when the space is built.
//! * [`BoxSpace`]: an axis-aligned box in `R^k` with the sum-of-absolute
//!   differences metric and the componentwise order.
//!
//! The product space carries the order `(u, v) ≤ (x, y) ⇔ u ≤ x ∧ y ≤ v` and
//! the metric `η((x, y), (u, v)) = d(x, u) + d(y, v)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An element of a space: an index into a finite space, or coordinates in a box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Index(usize),
    Coords(Vec<f64>),
}

impl Point {
    pub fn scalar(value: f64) -> Self {
        Point::Coords(vec![value])
    }

    pub fn index(&self) -> Option<usize> {
        match self {
            Point::Index(i) => Some(*i),
            Point::Coords(_) => None,
        }
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Index(_) => None,
            Point::Coords(c) => Some(c),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Index(i) => write!(f, "p{i}"),
            Point::Coords(c) if c.len() == 1 => write!(f, "{}", c[0]),
            Point::Coords(c) => {
                write!(f, "(")?;
                for (k, v) in c.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// An element `(first, second)` of `X × X`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductPair {
    pub first: Point,
    pub second: Point,
}

impl ProductPair {
    pub fn new(first: Point, second: Point) -> Self {
        Self { first, second }
    }

    /// The pair with its components exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            first: self.second.clone(),
            second: self.first.clone(),
        }
    }
}

impl fmt::Display for ProductPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.first, self.second)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("point index {index} out of range for a space of {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("point has dimension {got}, space has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point {point} lies outside the box")]
    OutsideBox { point: Point },
    #[error("expected a {expected} point, got {point}")]
    WrongKind { expected: &'static str, point: Point },
    #[error("metric axiom `{axiom}` violated at {witness:?}")]
    MetricAxiom {
        axiom: &'static str,
        witness: Vec<usize>,
    },
    #[error("order axiom `{axiom}` violated at {witness:?}")]
    OrderAxiom {
        axiom: &'static str,
        witness: Vec<usize>,
    },
    #[error("malformed space: {0}")]
    Malformed(String),
}

/// A tabulated partially ordered metric space.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSpace {
    labels: Vec<String>,
    distances: Vec<Vec<f64>>,
    order: Vec<Vec<bool>>,
}

impl FiniteSpace {
    /// Builds a space from a full order matrix (`order[p][q]` is `p ≤ q`).
    /// Every metric and order axiom is checked over all point triples.
    pub fn new(
        labels: Vec<String>,
        distances: Vec<Vec<f64>>,
        order: Vec<Vec<bool>>,
    ) -> Result<Self, SpaceError> {
        let n = labels.len();
        if n == 0 {
            return Err(SpaceError::Malformed("a finite space needs at least one point".into()));
        }
        if distances.len() != n || distances.iter().any(|row| row.len() != n) {
            return Err(SpaceError::Malformed(format!(
                "distance matrix must be {n}x{n}"
            )));
        }
        if order.len() != n || order.iter().any(|row| row.len() != n) {
            return Err(SpaceError::Malformed(format!("order matrix must be {n}x{n}")));
        }
        validate_metric(&distances)?;
        validate_order(&order)?;
        Ok(Self {
            labels,
            distances,
            order,
        })
    }

    /// Builds a space from generating pairs `p ≤ q`. The reflexive transitive
    /// closure is taken before the order axioms are checked, so a 2-cycle
    /// `p ≤ q, q ≤ p` is rejected as an antisymmetry violation.
    pub fn from_pairs(
        labels: Vec<String>,
        distances: Vec<Vec<f64>>,
        pairs: &[(usize, usize)],
    ) -> Result<Self, SpaceError> {
        let n = labels.len();
        let mut order = vec![vec![false; n]; n];
        for (i, row) in order.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(p, q) in pairs {
            for index in [p, q] {
                if index >= n {
                    return Err(SpaceError::IndexOutOfRange { index, len: n });
                }
            }
            order[p][q] = true;
        }
        transitive_closure(&mut order);
        Self::new(labels, distances, order)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn distance_matrix(&self) -> &[Vec<f64>] {
        &self.distances
    }

    pub fn order_matrix(&self) -> &[Vec<bool>] {
        &self.order
    }

    /// Distance between two indices. Panics on out-of-range indices.
    #[inline]
    pub fn d(&self, p: usize, q: usize) -> f64 {
        self.distances[p][q]
    }

    /// `p ≤ q`. Panics on out-of-range indices.
    #[inline]
    pub fn le(&self, p: usize, q: usize) -> bool {
        self.order[p][q]
    }

    /// The strict covering pairs of the order (its Hasse diagram).
    pub fn covering_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut pairs = Vec::new();
        for p in 0..n {
            for q in 0..n {
                if p == q || !self.order[p][q] {
                    continue;
                }
                let covered = (0..n)
                    .any(|r| r != p && r != q && self.order[p][r] && self.order[r][q]);
                if !covered {
                    pairs.push((p, q));
                }
            }
        }
        pairs
    }

    pub fn diameter(&self) -> f64 {
        self.distances
            .iter()
            .flat_map(|row| row.iter().copied())
            .fold(0.0, f64::max)
    }
}

/// Reflexive transitive closure in place (Warshall).
pub fn transitive_closure(rel: &mut [Vec<bool>]) {
    let n = rel.len();
    for k in 0..n {
        for i in 0..n {
            if !rel[i][k] {
                continue;
            }
            for j in 0..n {
                if rel[k][j] {
                    rel[i][j] = true;
                }
            }
        }
    }
}

fn validate_metric(d: &[Vec<f64>]) -> Result<(), SpaceError> {
    let n = d.len();
    for p in 0..n {
        for q in 0..n {
            let v = d[p][q];
            if !v.is_finite() || v < 0.0 {
                return Err(SpaceError::MetricAxiom {
                    axiom: "nonnegativity",
                    witness: vec![p, q],
                });
            }
        }
    }
    for p in 0..n {
        if d[p][p] != 0.0 {
            return Err(SpaceError::MetricAxiom {
                axiom: "identity",
                witness: vec![p],
            });
        }
    }
    for p in 0..n {
        for q in 0..n {
            if d[p][q] != d[q][p] {
                return Err(SpaceError::MetricAxiom {
                    axiom: "symmetry",
                    witness: vec![p, q],
                });
            }
            if p != q && d[p][q] <= 0.0 {
                return Err(SpaceError::MetricAxiom {
                    axiom: "separation",
                    witness: vec![p, q],
                });
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                if d[p][q] > d[p][r] + d[r][q] {
                    return Err(SpaceError::MetricAxiom {
                        axiom: "triangle inequality",
                        witness: vec![p, q, r],
                    });
                }
            }
        }
    }
    Ok(())
}

fn validate_order(le: &[Vec<bool>]) -> Result<(), SpaceError> {
    let n = le.len();
    for p in 0..n {
        if !le[p][p] {
            return Err(SpaceError::OrderAxiom {
                axiom: "reflexivity",
                witness: vec![p],
            });
        }
    }
    for p in 0..n {
        for q in 0..n {
            if p != q && le[p][q] && le[q][p] {
                return Err(SpaceError::OrderAxiom {
                    axiom: "antisymmetry",
                    witness: vec![p, q],
                });
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            if !le[p][q] {
                continue;
            }
            for r in 0..n {
                if le[q][r] && !le[p][r] {
                    return Err(SpaceError::OrderAxiom {
                        axiom: "transitivity",
                        witness: vec![p, q, r],
                    });
                }
            }
        }
    }
    Ok(())
}

/// An axis-aligned box `[lower, upper] ⊂ R^k` with the L1 metric and the
/// componentwise order.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, SpaceError> {
        if lower.is_empty() {
            return Err(SpaceError::Malformed("box dimension must be at least 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(SpaceError::Malformed(format!(
                "lower has {} coordinates, upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        for (k, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.is_finite() || l > u {
                return Err(SpaceError::Malformed(format!(
                    "coordinate {k}: bounds [{l}, {u}] are not a finite interval"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unit(dimension: usize) -> Self {
        Self {
            lower: vec![0.0; dimension],
            upper: vec![1.0; dimension],
        }
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, coords: &[f64]) -> bool {
        coords.len() == self.dimension()
            && coords
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(c, (l, u))| *l <= *c && *c <= *u)
    }

    /// Sum of coordinate extents; the diameter under the L1 metric.
    pub fn diameter(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).sum()
    }
}

#[inline]
pub(crate) fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

#[inline]
pub(crate) fn componentwise_le(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// A partially ordered metric space.
#[derive(Clone, Debug, PartialEq)]
pub enum OrderedMetricSpace {
    Finite(FiniteSpace),
    Box(BoxSpace),
}

impl From<FiniteSpace> for OrderedMetricSpace {
    fn from(space: FiniteSpace) -> Self {
        OrderedMetricSpace::Finite(space)
    }
}

impl From<BoxSpace> for OrderedMetricSpace {
    fn from(space: BoxSpace) -> Self {
        OrderedMetricSpace::Box(space)
    }
}

impl From<FiniteSpace> for Arc<OrderedMetricSpace> {
    fn from(space: FiniteSpace) -> Self {
        Arc::new(space.into())
    }
}

impl From<BoxSpace> for Arc<OrderedMetricSpace> {
    fn from(space: BoxSpace) -> Self {
        Arc::new(space.into())
    }
}

impl OrderedMetricSpace {
    pub fn is_finite(&self) -> bool {
        matches!(self, OrderedMetricSpace::Finite(_))
    }

    pub fn as_finite(&self) -> Option<&FiniteSpace> {
        match self {
            OrderedMetricSpace::Finite(s) => Some(s),
            OrderedMetricSpace::Box(_) => None,
        }
    }

    pub fn as_box(&self) -> Option<&BoxSpace> {
        match self {
            OrderedMetricSpace::Box(b) => Some(b),
            OrderedMetricSpace::Finite(_) => None,
        }
    }

    /// Checks that `p` is a member of this space.
    pub fn validate(&self, p: &Point) -> Result<(), SpaceError> {
        match (self, p) {
            (OrderedMetricSpace::Finite(s), Point::Index(i)) => {
                if *i < s.len() {
                    Ok(())
                } else {
                    Err(SpaceError::IndexOutOfRange {
                        index: *i,
                        len: s.len(),
                    })
                }
            }
            (OrderedMetricSpace::Box(b), Point::Coords(c)) => {
                if c.len() != b.dimension() {
                    Err(SpaceError::DimensionMismatch {
                        expected: b.dimension(),
                        got: c.len(),
                    })
                } else if !b.contains(c) {
                    Err(SpaceError::OutsideBox { point: p.clone() })
                } else {
                    Ok(())
                }
            }
            (OrderedMetricSpace::Finite(_), _) => Err(SpaceError::WrongKind {
                expected: "finite",
                point: p.clone(),
            }),
            (OrderedMetricSpace::Box(_), _) => Err(SpaceError::WrongKind {
                expected: "box",
                point: p.clone(),
            }),
        }
    }

    /// `d(p, q)`.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64, SpaceError> {
        self.validate(p)?;
        self.validate(q)?;
        Ok(self.distance_unchecked(p, q))
    }

    /// `p ≤ q`.
    pub fn leq(&self, p: &Point, q: &Point) -> Result<bool, SpaceError> {
        self.validate(p)?;
        self.validate(q)?;
        Ok(self.leq_unchecked(p, q))
    }

    /// Either `p ≤ q` or `q ≤ p`.
    pub fn comparable(&self, p: &Point, q: &Point) -> Result<bool, SpaceError> {
        Ok(self.leq(p, q)? || self.leq(q, p)?)
    }

    /// Product order: `(u, v) ≤ (x, y)` iff `u ≤ x` and `y ≤ v`.
    pub fn product_leq(&self, lower: &ProductPair, upper: &ProductPair) -> Result<bool, SpaceError> {
        Ok(self.leq(&lower.first, &upper.first)? && self.leq(&upper.second, &lower.second)?)
    }

    pub fn product_comparable(&self, a: &ProductPair, b: &ProductPair) -> Result<bool, SpaceError> {
        Ok(self.product_leq(a, b)? || self.product_leq(b, a)?)
    }

    /// `η((x, y), (u, v)) = d(x, u) + d(y, v)`.
    pub fn product_eta(&self, a: &ProductPair, b: &ProductPair) -> Result<f64, SpaceError> {
        Ok(self.distance(&a.first, &b.first)? + self.distance(&a.second, &b.second)?)
    }

    pub(crate) fn distance_unchecked(&self, p: &Point, q: &Point) -> f64 {
        match (self, p, q) {
            (OrderedMetricSpace::Finite(s), Point::Index(a), Point::Index(b)) => s.d(*a, *b),
            (OrderedMetricSpace::Box(_), Point::Coords(a), Point::Coords(b)) => l1(a, b),
            _ => unreachable!("points validated against the space"),
        }
    }

    pub(crate) fn leq_unchecked(&self, p: &Point, q: &Point) -> bool {
        match (self, p, q) {
            (OrderedMetricSpace::Finite(s), Point::Index(a), Point::Index(b)) => s.le(*a, *b),
            (OrderedMetricSpace::Box(_), Point::Coords(a), Point::Coords(b)) => {
                componentwise_le(a, b)
            }
            _ => unreachable!("points validated against the space"),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            OrderedMetricSpace::Finite(s) => s.diameter(),
            OrderedMetricSpace::Box(b) => b.diameter(),
        }
    }

    /// Every point of a finite space, in index order.
    pub fn finite_points(&self) -> Option<Vec<Point>> {
        self.as_finite()
            .map(|s| (0..s.len()).map(Point::Index).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> FiniteSpace {
        FiniteSpace::from_pairs(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![0.0, 1.0, 2.0],
                vec![1.0, 0.0, 1.0],
                vec![2.0, 1.0, 0.0],
            ],
            &[(0, 1), (1, 2)],
        )
        .unwrap()
    }

    #[test]
    fn distance_examples() {
        let unit: OrderedMetricSpace = BoxSpace::unit(1).into();
        let d = unit
            .distance(&Point::scalar(0.25), &Point::scalar(0.625))
            .unwrap();
        assert_eq!(d, 0.375);
        assert_eq!(unit.distance(&Point::scalar(0.3), &Point::scalar(0.3)).unwrap(), 0.0);

        let finite: OrderedMetricSpace = chain3().into();
        assert_eq!(finite.distance(&Point::Index(0), &Point::Index(2)).unwrap(), 2.0);
        assert_eq!(finite.distance(&Point::Index(1), &Point::Index(1)).unwrap(), 0.0);
    }

    #[test]
    fn distance_errors() {
        let finite: OrderedMetricSpace = chain3().into();
        assert_eq!(
            finite.distance(&Point::Index(0), &Point::Index(3)),
            Err(SpaceError::IndexOutOfRange { index: 3, len: 3 })
        );
        let plane: OrderedMetricSpace = BoxSpace::unit(2).into();
        assert_eq!(
            plane.distance(&Point::scalar(0.1), &Point::Coords(vec![0.1, 0.2])),
            Err(SpaceError::DimensionMismatch {
                expected: 2,
                got: 1
            })
        );
        assert!(matches!(
            plane.distance(&Point::Coords(vec![1.5, 0.0]), &Point::Coords(vec![0.1, 0.2])),
            Err(SpaceError::OutsideBox { .. })
        ));
    }

    #[test]
    fn leq_examples() {
        let line: OrderedMetricSpace = BoxSpace::new(vec![-1.0], vec![1.0]).unwrap().into();
        assert!(line.leq(&Point::scalar(0.3), &Point::scalar(0.7)).unwrap());
        assert!(line.leq(&Point::scalar(0.3), &Point::scalar(0.3)).unwrap());

        let plane: OrderedMetricSpace = BoxSpace::unit(2).into();
        let a = Point::Coords(vec![0.0, 1.0]);
        let b = Point::Coords(vec![1.0, 0.0]);
        assert!(!plane.leq(&a, &b).unwrap());
        assert!(!plane.leq(&b, &a).unwrap());
        assert!(!plane.comparable(&a, &b).unwrap());
    }

    #[test]
    fn product_order_and_eta_examples() {
        let unit: OrderedMetricSpace = BoxSpace::unit(1).into();
        let pair = |a: f64, b: f64| ProductPair::new(Point::scalar(a), Point::scalar(b));
        assert!(unit.product_leq(&pair(0.0, 1.0), &pair(0.25, 0.625)).unwrap());
        assert!(unit.product_leq(&pair(0.3, 0.4), &pair(0.3, 0.4)).unwrap());
        assert!(!unit.product_leq(&pair(0.5, 0.5), &pair(0.4, 0.6)).unwrap());
        assert_eq!(unit.product_eta(&pair(0.0, 1.0), &pair(0.25, 0.625)).unwrap(), 0.625);
        assert_eq!(unit.product_eta(&pair(0.2, 0.9), &pair(0.2, 0.9)).unwrap(), 0.0);

        let finite: OrderedMetricSpace = chain3().into();
        let a = ProductPair::new(Point::Index(0), Point::Index(1));
        let b = ProductPair::new(Point::Index(2), Point::Index(2));
        assert_eq!(finite.product_eta(&a, &b).unwrap(), 3.0);
    }

    #[test]
    fn closure_is_taken_from_pairs() {
        let s = chain3();
        assert!(s.le(0, 2));
        assert!(!s.le(2, 0));
        assert_eq!(s.covering_pairs(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn rejects_asymmetric_metric() {
        let err = FiniteSpace::from_pairs(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 1.0], vec![2.0, 0.0]],
            &[],
        )
        .unwrap_err();
        assert_eq!(
            err,
            SpaceError::MetricAxiom {
                axiom: "symmetry",
                witness: vec![0, 1]
            }
        );
    }

    #[test]
    fn rejects_triangle_violation() {
        let err = FiniteSpace::from_pairs(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![0.0, 1.0, 5.0],
                vec![1.0, 0.0, 1.0],
                vec![5.0, 1.0, 0.0],
            ],
            &[],
        )
        .unwrap_err();
        assert_eq!(
            err,
            SpaceError::MetricAxiom {
                axiom: "triangle inequality",
                witness: vec![0, 2, 1]
            }
        );
    }

    #[test]
    fn rejects_two_cycle() {
        let err = FiniteSpace::from_pairs(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            &[(0, 1), (1, 0)],
        )
        .unwrap_err();
        assert_eq!(
            err,
            SpaceError::OrderAxiom {
                axiom: "antisymmetry",
                witness: vec![0, 1]
            }
        );
    }

    #[test]
    fn rejects_non_transitive_matrix() {
        let t = true;
        let f = false;
        let err = FiniteSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![0.0, 1.0, 1.0],
                vec![1.0, 0.0, 1.0],
                vec![1.0, 1.0, 0.0],
            ],
            vec![vec![t, t, f], vec![f, t, t], vec![f, f, t]],
        )
        .unwrap_err();
        assert_eq!(
            err,
            SpaceError::OrderAxiom {
                axiom: "transitivity",
                witness: vec![0, 1, 2]
            }
        );
    }

    #[test]
    fn rejects_inverted_box() {
        assert!(BoxSpace::new(vec![1.0], vec![0.0]).is_err());
        assert!(BoxSpace::new(vec![], vec![]).is_err());
    }
}
