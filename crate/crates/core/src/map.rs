//! The mapping `F : X × X → X` and its iterates.

use std::sync::Arc;

use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::space::{OrderedMetricSpace, Point, SpaceError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("F({x}, {y}) = {value} escapes the box")]
    EscapedBox { x: Point, y: Point, value: Point },
    #[error("table map needs a finite space")]
    TableOnBox,
    #[error("expression map needs a box space")]
    ExpressionOnFinite,
    #[error("table must be {expected}x{expected}")]
    TableShape { expected: usize },
    #[error("table entry F({x}, {y}) = {value} is not a point index (space has {len} points)")]
    TableEntry {
        x: usize,
        y: usize,
        value: usize,
        len: usize,
    },
    #[error("expected {expected} component expressions, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("component {component}: {source}")]
    Expression {
        component: usize,
        #[source]
        source: ExprError,
    },
}

/// How `F` is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum MapRule {
    /// `table[x][y]` is the index of `F(x, y)`.
    Table(Vec<Vec<usize>>),
    /// One expression per box coordinate.
    Expression(ExpressionMap),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionMap {
    sources: Vec<String>,
    components: Vec<Expr>,
}

impl ExpressionMap {
    pub fn sources(&self) -> &[String] {
        &self.sources
    }
}

/// A mapping `F : X × X → X` together with the space it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledMap {
    space: Arc<OrderedMetricSpace>,
    rule: MapRule,
}

/// `(F^m(x, y), F^m(y, x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct IteratePair {
    pub m: usize,
    pub forward: Point,
    pub backward: Point,
}

impl CoupledMap {
    pub fn table(
        space: impl Into<Arc<OrderedMetricSpace>>,
        table: Vec<Vec<usize>>,
    ) -> Result<Self, MapError> {
        let space = space.into();
        let n = space.as_finite().ok_or(MapError::TableOnBox)?.len();
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(MapError::TableShape { expected: n });
        }
        for (x, row) in table.iter().enumerate() {
            for (y, &value) in row.iter().enumerate() {
                if value >= n {
                    return Err(MapError::TableEntry { x, y, value, len: n });
                }
            }
        }
        Ok(Self {
            space,
            rule: MapRule::Table(table),
        })
    }

    /// Tabulates `f` over every index pair of a finite space.
    pub fn tabulate(
        space: impl Into<Arc<OrderedMetricSpace>>,
        f: impl Fn(usize, usize) -> usize,
    ) -> Result<Self, MapError> {
        let space = space.into();
        let n = space.as_finite().ok_or(MapError::TableOnBox)?.len();
        let table = (0..n).map(|x| (0..n).map(|y| f(x, y)).collect()).collect();
        Self::table(space, table)
    }

    /// A constant map onto `value`.
    pub fn constant(space: impl Into<Arc<OrderedMetricSpace>>, value: Point) -> Result<Self, MapError> {
        let space: Arc<OrderedMetricSpace> = space.into();
        space.validate(&value)?;
        match (&*space, value) {
            (OrderedMetricSpace::Finite(_), Point::Index(c)) => Self::tabulate(space, |_, _| c),
            (OrderedMetricSpace::Box(_), Point::Coords(c)) => {
                let sources = c.iter().map(|v| format!("{v:?}")).collect();
                Self::expression(space, sources)
            }
            _ => unreachable!("validated above"),
        }
    }

    /// Parses one expression per coordinate of a box space.
    pub fn expression(
        space: impl Into<Arc<OrderedMetricSpace>>,
        sources: Vec<String>,
    ) -> Result<Self, MapError> {
        let space = space.into();
        let dimension = space.as_box().ok_or(MapError::ExpressionOnFinite)?.dimension();
        if sources.len() != dimension {
            return Err(MapError::ComponentCount {
                expected: dimension,
                got: sources.len(),
            });
        }
        let components = sources
            .iter()
            .enumerate()
            .map(|(component, src)| {
                Expr::parse(src, dimension).map_err(|source| MapError::Expression { component, source })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            space,
            rule: MapRule::Expression(ExpressionMap { sources, components }),
        })
    }

    pub fn space(&self) -> &OrderedMetricSpace {
        &self.space
    }

    pub fn shared_space(&self) -> Arc<OrderedMetricSpace> {
        Arc::clone(&self.space)
    }

    pub fn rule(&self) -> &MapRule {
        &self.rule
    }

    /// Index of `F(x, y)` for table maps. Panics on out-of-range indices or
    /// when called on an expression map.
    #[inline]
    pub fn table_apply(&self, x: usize, y: usize) -> usize {
        match &self.rule {
            MapRule::Table(t) => t[x][y],
            MapRule::Expression(_) => panic!("table_apply on an expression map"),
        }
    }

    /// `F(x, y)`.
    pub fn apply(&self, x: &Point, y: &Point) -> Result<Point, MapError> {
        self.space.validate(x)?;
        self.space.validate(y)?;
        self.apply_valid(x, y)
    }

    /// `F(x, y)` for points already known to lie in the space.
    pub(crate) fn apply_valid(&self, x: &Point, y: &Point) -> Result<Point, MapError> {
        match (&self.rule, x, y) {
            (MapRule::Table(t), Point::Index(a), Point::Index(b)) => Ok(Point::Index(t[*a][*b])),
            (MapRule::Expression(e), Point::Coords(a), Point::Coords(b)) => {
                let value: Vec<f64> = e.components.iter().map(|c| c.eval(a, b)).collect();
                let inside = self.space.as_box().is_some_and(|bx| bx.contains(&value));
                if inside {
                    Ok(Point::Coords(value))
                } else {
                    Err(MapError::EscapedBox {
                        x: x.clone(),
                        y: y.clone(),
                        value: Point::Coords(value),
                    })
                }
            }
            _ => unreachable!("points validated against the space"),
        }
    }

    /// Evaluates `F` on every ordered pair of `points`; the first pair whose
    /// image leaves the space is reported.
    pub fn check_closure(&self, points: &[Point]) -> Result<(), MapError> {
        for x in points {
            self.space.validate(x)?;
        }
        for x in points {
            for y in points {
                self.apply_valid(x, y)?;
            }
        }
        Ok(())
    }

    /// One step of the coupled recursion:
    /// `(F(a, b), F(b, a))`.
    pub fn step(&self, forward: &Point, backward: &Point) -> Result<(Point, Point), MapError> {
        Ok((self.apply_valid(forward, backward)?, self.apply_valid(backward, forward)?))
    }

    /// `(F^m(x, y), F^m(y, x))` via the running recursion
    /// `F^{m+1}(x, y) = F(F^m(x, y), F^m(y, x))`.
    pub fn iterate_m(&self, x: &Point, y: &Point, m: usize) -> Result<IteratePair, MapError> {
        let mut orbit = self.orbit(x, y)?;
        let mut last = orbit.current();
        for _ in 0..m {
            last = orbit.advance()?;
        }
        Ok(last)
    }

    /// A running iterate pair starting at `(x, y)`.
    pub fn orbit(&self, x: &Point, y: &Point) -> Result<Orbit<'_>, MapError> {
        self.space.validate(x)?;
        self.space.validate(y)?;
        Ok(Orbit {
            map: self,
            m: 0,
            forward: x.clone(),
            backward: y.clone(),
        })
    }
}

/// The sequence `(F^m(x, y), F^m(y, x))` for `m = 0, 1, ...`, advanced in place.
#[derive(Debug, Clone)]
pub struct Orbit<'a> {
    map: &'a CoupledMap,
    m: usize,
    forward: Point,
    backward: Point,
}

impl Orbit<'_> {
    pub fn current(&self) -> IteratePair {
        IteratePair {
            m: self.m,
            forward: self.forward.clone(),
            backward: self.backward.clone(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn forward(&self) -> &Point {
        &self.forward
    }

    pub fn backward(&self) -> &Point {
        &self.backward
    }

    pub fn advance(&mut self) -> Result<IteratePair, MapError> {
        let (f, b) = self.map.step(&self.forward, &self.backward)?;
        self.forward = f;
        self.backward = b;
        self.m += 1;
        Ok(self.current())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{BoxSpace, FiniteSpace};

    fn linear() -> CoupledMap {
        CoupledMap::expression(BoxSpace::unit(1), vec!["(2*x - y + 3)/8".into()]).unwrap()
    }

    fn total_order(n: usize) -> FiniteSpace {
        let d = (0..n)
            .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
            .collect();
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        FiniteSpace::from_pairs((0..n).map(|i| i.to_string()).collect(), d, &pairs).unwrap()
    }

    fn s(v: f64) -> Point {
        Point::scalar(v)
    }

    #[test]
    fn apply_examples() {
        let f = linear();
        assert_eq!(f.apply(&s(0.0), &s(1.0)).unwrap(), s(0.25));
        let c = CoupledMap::constant(total_order(3), Point::Index(1)).unwrap();
        assert_eq!(c.apply(&Point::Index(0), &Point::Index(2)).unwrap(), Point::Index(1));
    }

    #[test]
    fn apply_at_linear_fixed_point() {
        // 6x + y = 3 and x + 6y = 3 give x = y = 3/7.
        let third = 3.0 / 7.0;
        let out = linear().apply(&s(third), &s(third)).unwrap();
        let v = out.coords().unwrap()[0];
        assert!((v - third).abs() <= 1e-15, "{v}");
    }

    #[test]
    fn iterate_examples() {
        let f = linear();
        let one = f.iterate_m(&s(0.0), &s(1.0), 1).unwrap();
        assert_eq!((one.forward, one.backward), (s(0.25), s(0.625)));
        let two = f.iterate_m(&s(0.0), &s(1.0), 2).unwrap();
        assert_eq!((two.forward, two.backward), (s(0.359375), s(0.5)));
        let zero = f.iterate_m(&s(0.2), &s(0.7), 0).unwrap();
        assert_eq!((zero.m, zero.forward, zero.backward), (0, s(0.2), s(0.7)));
    }

    #[test]
    fn escaping_expression_is_reported() {
        let f = CoupledMap::expression(BoxSpace::unit(1), vec!["x + y".into()]).unwrap();
        assert!(matches!(
            f.apply(&s(0.75), &s(0.5)),
            Err(MapError::EscapedBox { .. })
        ));
        let grid: Vec<Point> = (0..=4).map(|i| s(i as f64 / 4.0)).collect();
        assert!(f.check_closure(&grid).is_err());
        assert!(linear().check_closure(&grid).is_ok());
    }

    #[test]
    fn table_validation() {
        let space = total_order(2);
        assert_eq!(
            CoupledMap::table(space.clone(), vec![vec![0, 2], vec![0, 0]]),
            Err(MapError::TableEntry {
                x: 0,
                y: 1,
                value: 2,
                len: 2
            })
        );
        assert_eq!(
            CoupledMap::table(space, vec![vec![0, 0]]),
            Err(MapError::TableShape { expected: 2 })
        );
        assert_eq!(
            CoupledMap::table(BoxSpace::unit(1), vec![]),
            Err(MapError::TableOnBox)
        );
    }

    #[test]
    fn expression_component_count() {
        assert_eq!(
            CoupledMap::expression(BoxSpace::unit(2), vec!["x1".into()]),
            Err(MapError::ComponentCount {
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn swap_symmetry_on_table() {
        let f = CoupledMap::tabulate(total_order(4), |x, y| (x + 3 - y.min(x + 3)) / 4).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                for m in 0..6 {
                    let a = f.iterate_m(&Point::Index(x), &Point::Index(y), m).unwrap();
                    let b = f.iterate_m(&Point::Index(y), &Point::Index(x), m).unwrap();
                    assert_eq!(a.backward, b.forward);
                }
            }
        }
    }
}
