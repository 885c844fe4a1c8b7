//! Plain-text raster layout for simulated fields.
//!
//! ```text
//! # model={"model":"tube","r_b":1.0}
//! # seed=42
//! # replicate=0
//! # nx=7
//! # ny=7
//! # x0=-0.42857142857142855
//! # y0=-0.42857142857142855
//! # dx=0.14285714285714285
//! # truncation=exact
//! # truncation_bound=0
//! row,col,x,y,value
//! 0,0,-0.42857142857142855,-0.42857142857142855,1.3254
//! ...
//! ```
//!
//! Rows are listed row-major (`row` indexes `y`); cells outside the region
//! are omitted. Numbers are written with Rust's shortest round-trip formatting.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::engine::TruncationKind;
use super::FieldSample;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterCell {
    pub row: usize,
    pub col: usize,
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub header: BTreeMap<String, String>,
    pub cells: Vec<RasterCell>,
}

pub fn write_raster<W: Write>(field: &FieldSample, mut w: W) -> Result<()> {
    let lattice = field.grid.lattice()?;
    if lattice.len() != field.values.len() {
        return Err(Error::InvalidParameter("field values do not match its grid".into()));
    }
    let model = serde_json::to_string(&field.model).map_err(|e| Error::Io(e.to_string()))?;
    let kind = match field.truncation.kind {
        TruncationKind::Exact => "exact",
        TruncationKind::Truncated => "truncated",
    };
    writeln!(w, "# model={model}")?;
    writeln!(w, "# seed={}", field.seed)?;
    writeln!(w, "# replicate={}", field.replicate)?;
    writeln!(w, "# nx={}", lattice.nx)?;
    writeln!(w, "# ny={}", lattice.ny)?;
    writeln!(w, "# x0={:?}", lattice.x0)?;
    writeln!(w, "# y0={:?}", lattice.y0)?;
    writeln!(w, "# dx={:?}", lattice.dx)?;
    writeln!(w, "# truncation={kind}")?;
    writeln!(w, "# truncation_bound={:?}", field.truncation.bound)?;
    writeln!(w, "row,col,x,y,value")?;
    for ((&(row, col), p), v) in lattice.cells.iter().zip(&lattice.sites).zip(&field.values) {
        writeln!(w, "{row},{col},{:?},{:?},{v:?}", p.x, p.y)?;
    }
    Ok(())
}

pub fn read_raster<R: BufRead>(r: R) -> Result<Raster> {
    let mut header = BTreeMap::new();
    let mut cells = Vec::new();
    let mut seen_columns = false;
    let bad = |line: &str| Error::Config(format!("malformed raster line: {line}"));
    for line in r.lines() {
        let line = line?;
        if let Some(h) = line.strip_prefix("# ") {
            let (k, v) = h.split_once('=').ok_or_else(|| bad(&line))?;
            header.insert(k.to_string(), v.to_string());
        } else if !seen_columns {
            if line != "row,col,x,y,value" {
                return Err(bad(&line));
            }
            seen_columns = true;
        } else {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad(&line));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&line));
            let idx = |s: &str| s.parse::<usize>().map_err(|_| bad(&line));
            cells.push(RasterCell { row: idx(f[0])?, col: idx(f[1])?, x: num(f[2])?, y: num(f[3])?, value: num(f[4])? });
        }
    }
    if !seen_columns {
        return Err(Error::Config("raster has no column header".into()));
    }
    Ok(Raster { header, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Region;
    use crate::models::ExtremalModel;
    use crate::simulation::{simulate_field, GridSpec};

    #[test]
    fn round_trip() {
        let grid = GridSpec::new(Region::disk(1.0), 1.0, 7).unwrap();
        let f = simulate_field(&ExtremalModel::tube(1.0), &grid, 42).unwrap();
        let mut buf = Vec::new();
        write_raster(&f, &mut buf).unwrap();
        let r = read_raster(buf.as_slice()).unwrap();
        assert_eq!(r.header["seed"], "42");
        assert_eq!(r.header["truncation"], "exact");
        assert_eq!(r.header["nx"], "7");
        let model: ExtremalModel = serde_json::from_str(&r.header["model"]).unwrap();
        assert_eq!(model, ExtremalModel::tube(1.0));
        assert_eq!(r.cells.len(), f.values.len());
        assert!(r.cells.iter().zip(&f.values).all(|(c, v)| c.value == *v));
        assert!(r.cells.windows(2).all(|w| (w[0].row, w[0].col) < (w[1].row, w[1].col)));
        assert!(read_raster("row,col\n".as_bytes()).is_err());
    }
}
