//! Text encodings: signals and grid functions as CSV, plots as SVG polylines.
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! reproduces the in-memory values bit for bit.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cascade::GridFunction;
use crate::error::{Error, Result};
use crate::operators::Signal;

#[derive(Serialize, Deserialize)]
struct SignalRow {
    index: i64,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct GridRow {
    x: f64,
    value_re: f64,
    value_im: f64,
}

fn parse_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { line, message: e.to_string() }
}

/// Deserialized rows paired with their 1-based line numbers.
fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(input: R) -> Result<Vec<(T, usize)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers().map_err(parse_error)?.clone();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(parse_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let row = rec.deserialize(Some(&headers)).map_err(|e| Error::Parse { line, message: e.to_string() })?;
        rows.push((row, line));
    }
    Ok(rows)
}

fn write_error(e: csv::Error) -> Error {
    Error::Io(e.into())
}

/// Columns `index, re, im`, one row per stored sample.
pub fn write_signal_csv<W: Write>(out: W, signal: &Signal) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["index", "re", "im"]).map_err(write_error)?;
    for (i, v) in signal.samples().iter().enumerate() {
        w.serialize(SignalRow { index: signal.offset() + i as i64, re: v.re, im: v.im })
            .map_err(write_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Rows may come in any order; absent indices are zero, repeated ones are an error.
pub fn read_signal_csv<R: Read>(input: R) -> Result<Signal> {
    let rows: Vec<(i64, Complex64, usize)> = read_rows::<_, SignalRow>(input)?
        .into_iter()
        .map(|(r, line)| (r.index, Complex64::new(r.re, r.im), line))
        .collect();
    if rows.is_empty() {
        return Ok(Signal::zero());
    }
    let lo = rows.iter().map(|r| r.0).min().unwrap();
    let hi = rows.iter().map(|r| r.0).max().unwrap();
    let len = usize::try_from(hi - lo + 1)
        .ok()
        .filter(|&n| n <= 1 << 28)
        .ok_or_else(|| Error::Parse { line: 0, message: format!("index range {lo}..={hi} too wide") })?;
    let mut samples = vec![Complex64::new(0.0, 0.0); len];
    let mut seen = vec![false; len];
    for (index, v, line) in rows {
        let slot = (index - lo) as usize;
        if seen[slot] {
            return Err(Error::Parse { line, message: format!("index {index} appears twice") });
        }
        seen[slot] = true;
        samples[slot] = v;
    }
    Ok(Signal::new(lo, samples))
}

/// Columns `x, value_re, value_im` with `x` the left edge of each cell.
pub fn write_grid_csv<W: Write>(out: W, g: &GridFunction) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["x", "value_re", "value_im"]).map_err(write_error)?;
    for (x, v) in g.xs().zip(g.values()) {
        w.serialize(GridRow { x, value_re: v.re, value_im: v.im }).map_err(write_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads consecutive cells at spacing `2^{−j_level}`.
pub fn read_grid_csv<R: Read>(input: R, j_level: u32) -> Result<GridFunction> {
    let scale = j_level as f64;
    let mut lo = None;
    let mut values = Vec::new();
    for (row, line) in read_rows::<_, GridRow>(input)? {
        let p = row.x * scale.exp2();
        if (p - p.round()).abs() > 1e-9 {
            return Err(Error::Parse { line, message: format!("x = {} is not on the grid 2^-{j_level}", row.x) });
        }
        let p = p.round() as i64;
        let start = *lo.get_or_insert(p);
        if p != start + values.len() as i64 {
            return Err(Error::Parse { line, message: format!("x = {} breaks the consecutive grid", row.x) });
        }
        values.push(Complex64::new(row.value_re, row.value_im));
    }
    Ok(GridFunction::new(j_level, lo.unwrap_or(0), values))
}

/// Minimal static SVG with one polyline through `points`, y axis pointing up.
pub fn write_svg_polyline<W: Write>(mut out: W, points: &[(f64, f64)], width: f64, height: f64) -> Result<()> {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let sx = if x1 > x0 { width / (x1 - x0) } else { 1.0 };
    let sy = if y1 > y0 { height / (y1 - y0) } else { 1.0 };
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )?;
    write!(out, r#"<polyline fill="none" stroke="black" stroke-width="1" points=""#)?;
    for (i, &(x, y)) in points.iter().enumerate() {
        let sep = if i == 0 { "" } else { " " };
        write!(out, "{sep}{:.3},{:.3}", (x - x0) * sx, height - (y - y0) * sy)?;
    }
    writeln!(out, r#""/>"#)?;
    writeln!(out, "</svg>")?;
    Ok(())
}

/// Plots the real part of `g` at cell left edges.
pub fn write_grid_svg<W: Write>(out: W, g: &GridFunction) -> Result<()> {
    let points: Vec<(f64, f64)> = g.xs().zip(g.values()).map(|(x, v)| (x, v.re)).collect();
    write_svg_polyline(out, &points, 800.0, 400.0)
}
