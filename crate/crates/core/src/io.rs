//! Plain-text output: comma-separated, one header row, every float written
//! with 17 significant digits so files round-trip bit for bit.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::flow::{FlowRecord, FlowRow, GraphState, RECORD_HEADER};
use crate::surface::{GeometrySnapshot, GridMode, SphericalGrid};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("empty record: no data rows")]
    Empty,
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_row<W: Write>(out: &mut W, values: impl IntoIterator<Item = f64>) -> io::Result<()> {
    let line: Vec<String> = values.into_iter().map(fmt_f64).collect();
    writeln!(out, "{}", line.join(","))
}

pub fn write_record_csv<W: Write>(record: &FlowRecord, out: &mut W) -> io::Result<()> {
    writeln!(out, "{}", RECORD_HEADER.join(","))?;
    for row in &record.rows {
        write_row(out, row.values())?;
    }
    Ok(())
}

/// Parses a record written by [`write_record_csv`]. A header without data
/// rows is an error.
pub fn read_record_csv<R: BufRead>(input: R) -> Result<Vec<FlowRow>, ParseError> {
    let mut lines = input.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(ParseError::Malformed { line: 1, message: "missing header".into() }),
    };
    let cols: Vec<&str> = header.trim().split(',').map(str::trim).collect();
    if cols != RECORD_HEADER {
        return Err(ParseError::Malformed { line: 1, message: format!("unexpected header '{}'", header.trim()) });
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut values = [0.0; 13];
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != values.len() {
            return Err(ParseError::Malformed {
                line: idx + 1,
                message: format!("expected {} fields, found {}", values.len(), fields.len()),
            });
        }
        for (slot, field) in values.iter_mut().zip(&fields) {
            *slot = field.trim().parse().map_err(|_| ParseError::Malformed {
                line: idx + 1,
                message: format!("not a number: '{}'", field.trim()),
            })?;
        }
        rows.push(FlowRow::from_values(&values));
    }
    if rows.is_empty() {
        return Err(ParseError::Empty);
    }
    Ok(rows)
}

/// Per-node dump: `theta[,azimuth],rho,v,kappa_1..kappa_n,F,u`.
pub fn write_snapshot_csv<W: Write>(snapshot: &GeometrySnapshot, grid: &SphericalGrid, out: &mut W) -> io::Result<()> {
    let with_az = grid.mode() == GridMode::LatLong;
    let mut header = vec!["theta".to_string()];
    if with_az {
        header.push("azimuth".into());
    }
    header.extend(["rho".to_string(), "v".to_string()]);
    header.extend((1..=grid.n()).map(|i| format!("kappa_{i}")));
    header.extend(["F".to_string(), "u".to_string()]);
    writeln!(out, "{}", header.join(","))?;
    for (i, g) in snapshot.nodes.iter().enumerate() {
        let mut vals = vec![grid.theta()[i]];
        if with_az {
            vals.push(grid.azimuth()[i]);
        }
        vals.extend([g.rho, g.v]);
        vals.extend(g.kappa.iter().copied());
        vals.extend([g.speed, g.u]);
        write_row(out, vals)?;
    }
    Ok(())
}

/// Raw state dump: `t` on the first line, then `theta[,azimuth],rho` rows.
pub fn write_state_csv<W: Write>(state: &GraphState, grid: &SphericalGrid, out: &mut W) -> io::Result<()> {
    writeln!(out, "# t = {}", fmt_f64(state.t))?;
    let with_az = grid.mode() == GridMode::LatLong;
    writeln!(out, "{}", if with_az { "theta,azimuth,rho" } else { "theta,rho" })?;
    for (i, &rho) in state.rho.iter().enumerate() {
        if with_az {
            write_row(out, [grid.theta()[i], grid.azimuth()[i], rho])?;
        } else {
            write_row(out, [grid.theta()[i], rho])?;
        }
    }
    Ok(())
}
