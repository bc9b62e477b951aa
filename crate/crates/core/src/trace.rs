//! Trace rows as JSON lines or CSV.
//!
//! Reals use the shortest decimal that reads back to the same `f64`, so equal
//! runs give equal bytes. One-dimensional box points are written as plain
//! numbers; higher-dimensional points as coordinate lists (`;`-joined in CSV).

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::solver::{SolveResult, TraceRow};
use crate::space::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Jsonl,
    Csv,
}

pub const CSV_HEADER: &str = "m,x,y,residual,eta_step,bound";

/// JSON form of a point: an index, a number, or a coordinate list.
pub fn point_value(p: &Point) -> Value {
    match p {
        Point::Index(i) => json!(i),
        Point::Coords(c) if c.len() == 1 => json!(c[0]),
        Point::Coords(c) => json!(c),
    }
}

fn point_csv(p: &Point) -> String {
    match p {
        Point::Index(i) => i.to_string(),
        Point::Coords(c) => c.iter().map(f64::to_string).collect::<Vec<_>>().join(";"),
    }
}

fn row_json(r: &TraceRow) -> Value {
    json!({
        "m": r.m,
        "x": point_value(&r.x),
        "y": point_value(&r.y),
        "residual": r.residual,
        "eta_step": r.eta_step,
        "bound": r.bound,
    })
}

/// One row per recorded iterate. A solve run without trace recording gives
/// an empty JSONL body or a bare CSV header.
pub fn emit_trace(result: &SolveResult, format: TraceFormat) -> Vec<u8> {
    let mut out = String::new();
    match format {
        TraceFormat::Jsonl => {
            for r in &result.trace {
                out.push_str(&row_json(r).to_string());
                out.push('\n');
            }
        }
        TraceFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in &result.trace {
                let eta = r.eta_step.map(|e| e.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.m,
                    point_csv(&r.x),
                    point_csv(&r.y),
                    r.residual,
                    eta,
                    r.bound
                );
            }
        }
    }
    out.into_bytes()
}
