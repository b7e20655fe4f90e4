//! Plain-text interchange: nodal fields, exponent tables, and norm histories
//! as CSV. Numbers are written with Rust's shortest round-trip formatting, so
//! writing and re-reading a field reproduces it bit for bit and repeated runs
//! produce byte-identical files.

use crate::error::{Error, Result};
use crate::exponent::ExponentTable;
use crate::mesh::{Grid, GridField, MAX_DIM};
use crate::norms::NormRecord;
use crate::scalar::{cast, Scalar};
use std::io::{BufRead, BufReader, Read, Write};

fn parse_number<T: Scalar>(token: &str, context: &str) -> Result<T> {
    let v: f64 = token
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{context}: cannot parse number from {token:?}")))?;
    T::from_f64(v).ok_or_else(|| Error::Parse(format!("{context}: {v} does not fit the scalar type")))
}

fn field_header(dim: usize, components: usize) -> String {
    let mut cols: Vec<String> = (0..dim).map(|a| format!("x{}", a + 1)).collect();
    cols.extend((0..components).map(|c| format!("comp_{}", c + 1)));
    cols.join(",")
}

/// Writes one row per node: coordinates first, then all components.
pub fn write_field_csv<T: Scalar, W: Write>(
    out: &mut W,
    grid: &Grid<T>,
    field: &GridField<T>,
) -> Result<()> {
    if !field.matches(grid) {
        return Err(Error::Grid("field shape does not match grid".into()));
    }
    let dim = grid.dim();
    let nc = grid.components();
    writeln!(out, "{}", field_header(dim, nc)).map_err(|e| Error::Parse(e.to_string()))?;
    let mut line = String::new();
    for node in 0..grid.num_nodes() {
        line.clear();
        let pos = grid.node_position(node);
        for axis in 0..dim {
            if axis > 0 {
                line.push(',');
            }
            line.push_str(&format!("{}", pos[axis]));
        }
        for comp in 0..nc {
            line.push(',');
            line.push_str(&format!("{}", field.data[node * nc + comp]));
        }
        writeln!(out, "{line}").map_err(|e| Error::Parse(e.to_string()))?;
    }
    Ok(())
}

/// Reads a field written by [`write_field_csv`] back onto the given grid.
/// Row order, row count, and node coordinates must all match the grid;
/// coordinates are compared with a small relative slack so files produced by
/// other tools remain loadable.
pub fn read_field_csv<T: Scalar, R: Read>(input: R, grid: &Grid<T>) -> Result<GridField<T>> {
    let dim = grid.dim();
    let nc = grid.components();
    let expected_cols = dim + nc;
    let mut lines = BufReader::new(input).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty field file".into()))?
        .map_err(|e| Error::Parse(e.to_string()))?;
    let expected_header = field_header(dim, nc);
    if header.trim() != expected_header {
        return Err(Error::Parse(format!(
            "field header {header:?} does not match expected {expected_header:?}"
        )));
    }
    let mut field = GridField::zeros(grid, T::zero());
    let slack = cast::<T>(1e-9);
    let mut node = 0usize;
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        if node >= grid.num_nodes() {
            return Err(Error::Parse(format!(
                "too many rows: grid has {} nodes",
                grid.num_nodes()
            )));
        }
        let context = format!("row {}", lineno + 2);
        let tokens: Vec<&str> = line.split(',').collect();
        if tokens.len() != expected_cols {
            return Err(Error::Parse(format!(
                "{context}: expected {expected_cols} columns, found {}",
                tokens.len()
            )));
        }
        let pos = grid.node_position(node);
        for axis in 0..dim {
            let x: T = parse_number(tokens[axis], &context)?;
            let scale = T::one().max(pos[axis].abs());
            if (x - pos[axis]).abs() > slack * scale {
                return Err(Error::Parse(format!(
                    "{context}: coordinate {x} does not match grid node at {}",
                    pos[axis]
                )));
            }
        }
        for comp in 0..nc {
            let v: T = parse_number(tokens[dim + comp], &context)?;
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("{context}: component {}", comp + 1)));
            }
            field.data[node * nc + comp] = v;
        }
        node += 1;
    }
    if node != grid.num_nodes() {
        return Err(Error::Parse(format!(
            "file has {node} rows, grid has {} nodes",
            grid.num_nodes()
        )));
    }
    Ok(field)
}

/// Reads scattered exponent samples `t,x1[,x2],p` into a tensor table. The
/// rows may arrive in any order but must fill a full tensor grid of the
/// coordinates they mention.
pub fn read_exponent_table_csv<T: Scalar, R: Read>(
    input: R,
    dim: usize,
) -> Result<ExponentTable<T>> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidArgument(format!("dimension must be 1 or 2, got {dim}")));
    }
    let mut lines = BufReader::new(input).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty exponent table".into()))?
        .map_err(|e| Error::Parse(e.to_string()))?;
    let expected_header =
        if dim == 1 { "t,x1,p".to_string() } else { "t,x1,x2,p".to_string() };
    if header.trim() != expected_header {
        return Err(Error::Parse(format!(
            "table header {header:?} does not match expected {expected_header:?}"
        )));
    }
    let mut rows: Vec<(T, [T; MAX_DIM], T)> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let context = format!("row {}", lineno + 2);
        let tokens: Vec<&str> = line.split(',').collect();
        if tokens.len() != dim + 2 {
            return Err(Error::Parse(format!(
                "{context}: expected {} columns, found {}",
                dim + 2,
                tokens.len()
            )));
        }
        let t: T = parse_number(tokens[0], &context)?;
        let mut x = [T::zero(); MAX_DIM];
        for axis in 0..dim {
            x[axis] = parse_number(tokens[1 + axis], &context)?;
        }
        let p: T = parse_number(tokens[dim + 1], &context)?;
        rows.push((t, x, p));
    }
    ExponentTable::from_scattered(dim, &rows)
}

/// Writes a norm history as `t,r,norm`; the sup norm is spelled `inf`.
pub fn write_norm_records_csv<T: Scalar, W: Write>(
    out: &mut W,
    records: &[NormRecord<T>],
) -> Result<()> {
    writeln!(out, "t,r,norm").map_err(|e| Error::Parse(e.to_string()))?;
    for rec in records {
        writeln!(out, "{},{},{}", rec.t, rec.r, rec.value)
            .map_err(|e| Error::Parse(e.to_string()))?;
    }
    Ok(())
}
