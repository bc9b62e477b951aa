//! JSON instance files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "space": { "kind": "box", "dimension": 1, "lower": [0], "upper": [1], "grid_step": 0.25 },
//!   "map": { "kind": "expression", "expression": "(2*x - y + 3)/8" },
//!   "seeds": { "x0": 0, "y0": 1 },
//!   "parameters": { "epsilon": 0.3, "tolerance": 1e-10, "max_iterations": 200 }
//! }
//! ```
//!
//! Reals may be JSON numbers or decimal strings. Finite spaces list point
//! labels, a distance matrix and generating order pairs (indices or labels);
//! the order is the reflexive transitive closure of those pairs.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::hypothesis::SamplingPlan;
use crate::map::{CoupledMap, MapError, MapRule};
use crate::space::{BoxSpace, FiniteSpace, OrderedMetricSpace, Point, SpaceError};

pub const SCHEMA_VERSION: u32 = 1;

/// A real read from a number or a decimal string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        let v = match Repr::deserialize(d)? {
            Repr::Num(v) => v,
            Repr::Text(t) => t
                .trim()
                .parse::<f64>()
                .map_err(|_| serde::de::Error::custom(format!("`{t}` is not a decimal number")))?,
        };
        if !v.is_finite() {
            return Err(serde::de::Error::custom("reals must be finite"));
        }
        Ok(Real(v))
    }
}

/// A reference to a point of a finite space, by index or by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointRef {
    Index(usize),
    Label(String),
}

/// A point as written in a file: an index or label on finite spaces, a
/// scalar or coordinate list on boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Index(usize),
    Label(String),
    Scalar(Real),
    Coords(Vec<Real>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    Finite {
        points: Vec<String>,
        distance_matrix: Vec<Vec<Real>>,
        #[serde(default)]
        order_pairs: Vec<[PointRef; 2]>,
    },
    Box {
        dimension: usize,
        lower: Vec<Real>,
        upper: Vec<Real>,
        grid_step: Real,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExpressionSpec {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Table { table: Vec<Vec<PointRef>> },
    Expression { expression: ExpressionSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub x0: PointSpec,
    pub y0: PointSpec,
}

fn default_tolerance() -> Real {
    Real(1e-10)
}

fn default_max_iterations() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    pub epsilon: Real,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_claimed: Option<Real>,
    #[serde(default = "default_tolerance")]
    pub tolerance: Real,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredFlags {
    /// Limits of monotone iterate sequences stay comparable with the
    /// sequence terms. Always true on finite spaces.
    #[serde(default)]
    pub order_limit_closure: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub random_points: usize,
    #[serde(default)]
    pub random_quadruples: usize,
}

/// The on-disk shape of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub space: SpaceSpec,
    pub map: MapSpec,
    pub seeds: Seeds,
    pub parameters: Parameters,
    #[serde(default)]
    pub declared_flags: DeclaredFlags,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingSpec>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("space: {0}")]
    Space(#[from] SpaceError),
    #[error("map: {0}")]
    Map(#[from] MapError),
}

fn field(field: &str, message: impl Into<String>) -> InstanceError {
    InstanceError::Field {
        field: field.into(),
        message: message.into(),
    }
}

/// A fully validated instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: Option<String>,
    pub map: CoupledMap,
    pub x0: Point,
    pub y0: Point,
    pub epsilon: f64,
    pub lambda_claimed: Option<f64>,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub order_limit_closure: bool,
    pub plan: SamplingPlan,
}

impl Instance {
    pub fn space(&self) -> &OrderedMetricSpace {
        self.map.space()
    }

    /// The file that reproduces this instance.
    pub fn to_file(&self) -> InstanceFile {
        let space = match self.space() {
            OrderedMetricSpace::Finite(s) => SpaceSpec::Finite {
                points: s.labels().to_vec(),
                distance_matrix: s
                    .distance_matrix()
                    .iter()
                    .map(|row| row.iter().map(|&d| Real(d)).collect())
                    .collect(),
                order_pairs: s
                    .covering_pairs()
                    .into_iter()
                    .map(|(p, q)| [PointRef::Index(p), PointRef::Index(q)])
                    .collect(),
            },
            OrderedMetricSpace::Box(b) => SpaceSpec::Box {
                dimension: b.dimension(),
                lower: b.lower().iter().map(|&v| Real(v)).collect(),
                upper: b.upper().iter().map(|&v| Real(v)).collect(),
                grid_step: Real(self.plan.grid_step.unwrap_or(1.0)),
            },
        };
        let map = match self.map.rule() {
            MapRule::Table(t) => MapSpec::Table {
                table: t
                    .iter()
                    .map(|row| row.iter().map(|&i| PointRef::Index(i)).collect())
                    .collect(),
            },
            MapRule::Expression(e) => MapSpec::Expression {
                expression: match e.sources() {
                    [one] => ExpressionSpec::One(one.clone()),
                    many => ExpressionSpec::Many(many.to_vec()),
                },
            },
        };
        let sampling = (self.plan.random_points > 0 || self.plan.random_quadruples > 0 || self.plan.seed != 0)
            .then(|| SamplingSpec {
                seed: self.plan.seed,
                random_points: self.plan.random_points,
                random_quadruples: self.plan.random_quadruples,
            });
        InstanceFile {
            schema_version: SCHEMA_VERSION,
            name: self.name.clone(),
            space,
            map,
            seeds: Seeds {
                x0: point_spec(&self.x0),
                y0: point_spec(&self.y0),
            },
            parameters: Parameters {
                epsilon: Real(self.epsilon),
                lambda_claimed: self.lambda_claimed.map(Real),
                tolerance: Real(self.tolerance),
                max_iterations: self.max_iterations,
            },
            declared_flags: DeclaredFlags {
                order_limit_closure: self.order_limit_closure,
            },
            sampling,
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        self.to_file().to_json()
    }
}

impl InstanceFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance files always serialize");
        s.push('\n');
        s
    }
}

fn point_spec(p: &Point) -> PointSpec {
    match p {
        Point::Index(i) => PointSpec::Index(*i),
        Point::Coords(c) if c.len() == 1 => PointSpec::Scalar(Real(c[0])),
        Point::Coords(c) => PointSpec::Coords(c.iter().map(|&v| Real(v)).collect()),
    }
}

/// Parses and validates an instance from UTF-8 JSON.
pub fn parse_instance(bytes: &[u8]) -> Result<Instance, InstanceError> {
    let file: InstanceFile = serde_json::from_slice(bytes).map_err(|e| InstanceError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    build_instance(file)
}

/// Validates an already decoded file.
pub fn build_instance(file: InstanceFile) -> Result<Instance, InstanceError> {
    if file.schema_version != SCHEMA_VERSION {
        return Err(field(
            "schema_version",
            format!("unsupported version {} (expected {SCHEMA_VERSION})", file.schema_version),
        ));
    }
    let sampling = file.sampling.unwrap_or(SamplingSpec {
        seed: 0,
        random_points: 0,
        random_quadruples: 0,
    });
    let (space, grid_step): (OrderedMetricSpace, Option<f64>) = match &file.space {
        SpaceSpec::Finite {
            points,
            distance_matrix,
            order_pairs,
        } => {
            if points.is_empty() {
                return Err(field("space.points", "a finite space needs at least one point"));
            }
            let distances: Vec<Vec<f64>> = distance_matrix
                .iter()
                .map(|row| row.iter().map(|r| r.0).collect())
                .collect();
            if distances.len() != points.len() || distances.iter().any(|r| r.len() != points.len()) {
                return Err(field(
                    "space.distance_matrix",
                    format!("must be {0}x{0} to match space.points", points.len()),
                ));
            }
            let pairs = order_pairs
                .iter()
                .enumerate()
                .map(|(k, [p, q])| {
                    let f = format!("space.order_pairs[{k}]");
                    Ok((resolve_ref(p, points, &f)?, resolve_ref(q, points, &f)?))
                })
                .collect::<Result<Vec<_>, InstanceError>>()?;
            (FiniteSpace::from_pairs(points.clone(), distances, &pairs)?.into(), None)
        }
        SpaceSpec::Box {
            dimension,
            lower,
            upper,
            grid_step,
        } => {
            if *dimension == 0 {
                return Err(field("space.dimension", "must be at least 1"));
            }
            for (name, v) in [("space.lower", lower), ("space.upper", upper)] {
                if v.len() != *dimension {
                    return Err(field(name, format!("must have {dimension} entries")));
                }
            }
            if !(grid_step.0 > 0.0) {
                return Err(field("space.grid_step", "must be positive"));
            }
            let b = BoxSpace::new(lower.iter().map(|r| r.0).collect(), upper.iter().map(|r| r.0).collect())?;
            (b.into(), Some(grid_step.0))
        }
    };

    let labels = space.as_finite().map(|s| s.labels().to_vec());
    let map = match (&file.map, &space) {
        (MapSpec::Table { table }, OrderedMetricSpace::Finite(_)) => {
            let labels = labels.as_deref().unwrap_or_default();
            let table = table
                .iter()
                .enumerate()
                .map(|(x, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(y, r)| resolve_ref(r, labels, &format!("map.table[{x}][{y}]")))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            CoupledMap::table(space, table)?
        }
        (MapSpec::Expression { expression }, OrderedMetricSpace::Box(_)) => {
            let sources = match expression {
                ExpressionSpec::One(s) => vec![s.clone()],
                ExpressionSpec::Many(v) => v.clone(),
            };
            CoupledMap::expression(space, sources)?
        }
        (MapSpec::Table { .. }, _) => return Err(field("map.kind", "a table map needs a finite space")),
        (MapSpec::Expression { .. }, _) => {
            return Err(field("map.kind", "an expression map needs a box space"))
        }
    };

    let x0 = resolve_point(&file.seeds.x0, map.space(), "seeds.x0")?;
    let y0 = resolve_point(&file.seeds.y0, map.space(), "seeds.y0")?;

    let p = &file.parameters;
    if !(p.epsilon.0 > 0.0) {
        return Err(field("parameters.epsilon", "must be positive"));
    }
    if let Some(l) = p.lambda_claimed {
        if !(l.0 > 0.0 && l.0 < 1.0) {
            return Err(field("parameters.lambda_claimed", "must lie in (0, 1)"));
        }
    }
    if !(p.tolerance.0 > 0.0) {
        return Err(field("parameters.tolerance", "must be positive"));
    }
    if p.max_iterations == 0 {
        return Err(field("parameters.max_iterations", "must be at least 1"));
    }

    let plan = SamplingPlan {
        grid_step,
        random_points: sampling.random_points,
        random_quadruples: sampling.random_quadruples,
        seed: sampling.seed,
        ..SamplingPlan::default()
    };
    if map.space().as_box().is_some() {
        let sample = plan
            .sample(map.space())
            .map_err(|e| field("space.grid_step", e.to_string()))?;
        map.check_closure(&sample.points)?;
    }

    Ok(Instance {
        name: file.name,
        order_limit_closure: map.space().is_finite() || file.declared_flags.order_limit_closure,
        map,
        x0,
        y0,
        epsilon: p.epsilon.0,
        lambda_claimed: p.lambda_claimed.map(|l| l.0),
        tolerance: p.tolerance.0,
        max_iterations: p.max_iterations,
        plan,
    })
}

fn resolve_ref(r: &PointRef, labels: &[String], at: &str) -> Result<usize, InstanceError> {
    match r {
        PointRef::Index(i) if *i < labels.len() => Ok(*i),
        PointRef::Index(i) => Err(field(at, format!("index {i} out of range ({} points)", labels.len()))),
        PointRef::Label(l) => labels
            .iter()
            .position(|x| x == l)
            .ok_or_else(|| field(at, format!("unknown point label `{l}`"))),
    }
}

fn resolve_point(spec: &PointSpec, space: &OrderedMetricSpace, at: &str) -> Result<Point, InstanceError> {
    let point = match (space, spec) {
        (OrderedMetricSpace::Finite(s), PointSpec::Index(i)) => Point::Index(resolve_ref(&PointRef::Index(*i), s.labels(), at)?),
        (OrderedMetricSpace::Finite(s), PointSpec::Label(l)) => {
            Point::Index(resolve_ref(&PointRef::Label(l.clone()), s.labels(), at)?)
        }
        (OrderedMetricSpace::Finite(_), _) => return Err(field(at, "expected a point index or label")),
        (OrderedMetricSpace::Box(_), PointSpec::Index(i)) => Point::scalar(*i as f64),
        (OrderedMetricSpace::Box(_), PointSpec::Scalar(r)) => Point::scalar(r.0),
        (OrderedMetricSpace::Box(_), PointSpec::Coords(c)) => Point::Coords(c.iter().map(|r| r.0).collect()),
        (OrderedMetricSpace::Box(_), PointSpec::Label(t)) => {
            let v = t
                .trim()
                .parse::<f64>()
                .map_err(|_| field(at, format!("`{t}` is not a decimal number")))?;
            Point::scalar(v)
        }
    };
    space.validate(&point).map_err(|e| field(at, e.to_string()))?;
    Ok(point)
}

#[cfg(test)]
mod tests {
    use super::*;

    const L1: &str = r#"{
        "schema_version": 1,
        "space": { "kind": "box", "dimension": 1, "lower": [0], "upper": [1], "grid_step": "0.25" },
        "map": { "kind": "expression", "expression": "(2*x - y + 3)/8" },
        "seeds": { "x0": 0, "y0": 1 },
        "parameters": { "epsilon": "0.3", "tolerance": 1e-10, "max_iterations": 200 }
    }"#;

    fn finite(distances: &str, pairs: &str) -> String {
        format!(
            r#"{{
            "schema_version": 1,
            "space": {{ "kind": "finite", "points": ["a", "b", "c"],
                       "distance_matrix": {distances}, "order_pairs": {pairs} }},
            "map": {{ "kind": "table", "table": [[0,0,0],[0,0,0],[0,0,0]] }},
            "seeds": {{ "x0": "a", "y0": 0 }},
            "parameters": {{ "epsilon": 1.5 }}
        }}"#
        )
    }

    #[test]
    fn parses_linear_box_instance() {
        let inst = parse_instance(L1.as_bytes()).unwrap();
        assert_eq!(inst.x0, Point::scalar(0.0));
        assert_eq!(inst.y0, Point::scalar(1.0));
        assert_eq!(inst.epsilon, 0.3);
        assert_eq!(inst.plan.grid_step, Some(0.25));
        assert!(!inst.order_limit_closure);
    }

    #[test]
    fn rejects_asymmetric_metric() {
        let src = finite("[[0,1,2],[1,0,1],[3,1,0]]", "[[0,1],[1,2]]");
        match parse_instance(src.as_bytes()) {
            Err(InstanceError::Space(SpaceError::MetricAxiom { axiom, witness })) => {
                assert_eq!(axiom, "symmetry");
                assert_eq!(witness, vec![0, 2]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_order_cycle() {
        let src = finite("[[0,1,2],[1,0,1],[2,1,0]]", r#"[["a","b"],["b","a"]]"#);
        assert!(matches!(
            parse_instance(src.as_bytes()),
            Err(InstanceError::Space(SpaceError::OrderAxiom { axiom: "antisymmetry", .. }))
        ));
    }

    #[test]
    fn finite_spaces_declare_limit_closure() {
        let src = finite("[[0,1,2],[1,0,1],[2,1,0]]", "[[0,1],[1,2]]");
        assert!(parse_instance(src.as_bytes()).unwrap().order_limit_closure);
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_instance(b"{\n  \"schema_version\": 1,\n  oops\n}") {
            Err(InstanceError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn field_errors_name_the_field() {
        let bad = L1.replace("\"0.3\"", "-1");
        assert!(matches!(
            parse_instance(bad.as_bytes()),
            Err(InstanceError::Field { field, .. }) if field == "parameters.epsilon"
        ));
        let escaped = L1.replace("(2*x - y + 3)/8", "x + 0.5");
        assert!(matches!(
            parse_instance(escaped.as_bytes()),
            Err(InstanceError::Map(MapError::EscapedBox { .. }))
        ));
        let unknown = L1.replace("\"grid_step\"", "\"grid\"");
        assert!(matches!(parse_instance(unknown.as_bytes()), Err(InstanceError::Syntax { .. })));
    }

    #[test]
    fn round_trip() {
        for src in [L1.to_string(), finite("[[0,1,2],[1,0,1],[2,1,0]]", "[[0,1],[1,2],[0,2]]")] {
            let a = parse_instance(src.as_bytes()).unwrap();
            let b = parse_instance(a.to_json().as_bytes()).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.to_json(), b.to_json());
        }
    }
}
