//! CSV form of a trace.
//!
//! * attempts: `time,edge_i,edge_j,outcome,D,u_new,clock_new`
//! * samples: `time,x_0,...,x_{n-1}`
//!
//! Numbers are written in shortest round-trip form, so reading a file back
//! reproduces the recorded values bit for bit.

use std::io::{Read, Write};

use thiserror::Error;

use super::{Attempt, Outcome, Sample, Trace};
use crate::topology::{Edge, Graph};
use crate::Scalar;

pub const ATTEMPT_HEADER: [&str; 7] = ["time", "edge_i", "edge_j", "outcome", "D", "u_new", "clock_new"];

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: bad header, expected {expected}")]
    Header { line: u64, expected: String },
    #[error("line {line}: field `{field}`: {message}")]
    Field { line: u64, field: String, message: String },
}

pub fn write_attempts<T: Scalar, W: Write>(trace: &Trace<T>, w: W) -> Result<(), ExportError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(ATTEMPT_HEADER)?;
    for a in &trace.attempts {
        let outcome = match a.outcome {
            Outcome::Success => "success",
            Outcome::Jammed => "jammed",
        };
        out.write_record([
            a.time.to_string(),
            a.i.to_string(),
            a.j.to_string(),
            outcome.to_string(),
            a.disagreement.to_string(),
            a.control.to_string(),
            a.clock.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_samples<T: Scalar, W: Write>(trace: &Trace<T>, w: W) -> Result<(), ExportError> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["time".to_string()];
    header.extend((0..trace.node_count).map(|v| format!("x_{v}")));
    out.write_record(&header)?;
    for s in &trace.samples {
        let mut row = Vec::with_capacity(s.x.len() + 1);
        row.push(s.time.to_string());
        row.extend(s.x.iter().map(T::to_string));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn field<'r>(rec: &'r csv::StringRecord, idx: usize, name: &str) -> Result<&'r str, ExportError> {
    rec.get(idx).ok_or_else(|| ExportError::Field {
        line: line_of(rec),
        field: name.to_string(),
        message: "missing".into(),
    })
}

fn parse<V: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, name: &str) -> Result<V, ExportError>
where
    V::Err: std::fmt::Display,
{
    field(rec, idx, name)?.parse::<V>().map_err(|e| ExportError::Field {
        line: line_of(rec),
        field: name.to_string(),
        message: e.to_string(),
    })
}

/// Reads an attempts CSV, resolving `(edge_i, edge_j)` against `g`.
pub fn read_attempts<R: Read>(r: R, g: &Graph) -> Result<Vec<Attempt<f64>>, ExportError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(ATTEMPT_HEADER.iter().copied()) {
        return Err(ExportError::Header { line: 1, expected: ATTEMPT_HEADER.join(",") });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let i: usize = parse(&rec, 1, "edge_i")?;
        let j: usize = parse(&rec, 2, "edge_j")?;
        let edge = Edge::new(i, j).and_then(|e| g.edge_id(e)).ok_or_else(|| ExportError::Field {
            line: line_of(&rec),
            field: "edge_i,edge_j".into(),
            message: format!("{{{i}, {j}}} is not an edge of the configured graph"),
        })?;
        let outcome = match field(&rec, 3, "outcome")? {
            "success" => Outcome::Success,
            "jammed" => Outcome::Jammed,
            other => {
                return Err(ExportError::Field {
                    line: line_of(&rec),
                    field: "outcome".into(),
                    message: format!("expected success or jammed, got {other:?}"),
                })
            }
        };
        let control: i8 = parse(&rec, 5, "u_new")?;
        if !(-1..=1).contains(&control) {
            return Err(ExportError::Field {
                line: line_of(&rec),
                field: "u_new".into(),
                message: format!("{control} is not ternary"),
            });
        }
        out.push(Attempt {
            time: parse(&rec, 0, "time")?,
            edge,
            i: i.min(j),
            j: i.max(j),
            outcome,
            disagreement: parse(&rec, 4, "D")?,
            control,
            clock: parse(&rec, 6, "clock_new")?,
        });
    }
    Ok(out)
}

/// Reads a samples CSV with `n` node columns.
pub fn read_samples<R: Read>(r: R, n: usize) -> Result<Vec<Sample<f64>>, ExportError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.len() != n + 1 || headers.get(0) != Some("time") {
        return Err(ExportError::Header { line: 1, expected: format!("time,x_0,...,x_{}", n.saturating_sub(1)) });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let time = parse(&rec, 0, "time")?;
        let x = (0..n).map(|v| parse(&rec, v + 1, &format!("x_{v}"))).collect::<Result<Vec<f64>, _>>()?;
        out.push(Sample { time, x });
    }
    Ok(out)
}
