use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Region};

/// Regular lattice of cell centers over `lambda A`.
///
/// The bounding square of `lambda A` is split into `n x n` cells with
/// `n = round(lambda * m_per_unit)`, where `m_per_unit` is the number of
/// cells along the side (square) or diameter (disk) of the base region `A`.
/// Sites are the cell centers that fall inside `lambda A`; a unit square with
/// `m_per_unit = 7` gives the usual 49-site grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub region: Region,
    pub lambda: f64,
    pub m_per_unit: usize,
}

impl GridSpec {
    pub fn new(region: Region, lambda: f64, m_per_unit: usize) -> Result<Self> {
        let g = Self { region, lambda, m_per_unit };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        self.region.validate()?;
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.m_per_unit == 0 {
            return Err(Error::InvalidParameter("grid needs at least one site per side".into()));
        }
        if self.cells_per_side() > 20_000 {
            return Err(Error::InvalidParameter(format!(
                "grid of {} cells per side is too large",
                self.cells_per_side()
            )));
        }
        Ok(())
    }

    pub fn cells_per_side(&self) -> usize {
        ((self.lambda * self.m_per_unit as f64).round() as usize).max(1)
    }

    pub fn lattice(&self) -> Result<Lattice> {
        self.validate()?;
        let scaled = self.region.scaled(self.lambda);
        let n = self.cells_per_side();
        let side = scaled.bounding_side();
        let dx = side / n as f64;
        let x0 = scaled.center.x - 0.5 * side + 0.5 * dx;
        let y0 = scaled.center.y - 0.5 * side + 0.5 * dx;
        let mut inside = vec![false; n * n];
        let mut sites = Vec::new();
        let mut cells = Vec::new();
        for row in 0..n {
            for col in 0..n {
                let p = Point::new(x0 + col as f64 * dx, y0 + row as f64 * dx);
                if scaled.contains(p) {
                    inside[row * n + col] = true;
                    sites.push(p);
                    cells.push((row, col));
                }
            }
        }
        if sites.is_empty() {
            return Err(Error::InvalidParameter("grid has no site inside the region".into()));
        }
        Ok(Lattice { nx: n, ny: n, x0, y0, dx, inside, sites, cells })
    }
}

/// Materialized lattice: row-major cells (`row` indexes `y`), with the
/// in-region subset listed in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub nx: usize,
    pub ny: usize,
    /// Center of cell `(0, 0)`.
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub inside: Vec<bool>,
    pub sites: Vec<Point>,
    pub cells: Vec<(usize, usize)>,
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.sites.len() == self.nx * self.ny
    }

    /// Inclusive column range of cells whose centers lie in `[a, b]`.
    pub(crate) fn col_range(&self, a: f64, b: f64) -> Option<(usize, usize)> {
        axis_range(self.x0, self.dx, self.nx, a, b)
    }

    pub(crate) fn row_range(&self, a: f64, b: f64) -> Option<(usize, usize)> {
        axis_range(self.y0, self.dx, self.ny, a, b)
    }
}

fn axis_range(origin: f64, step: f64, n: usize, a: f64, b: f64) -> Option<(usize, usize)> {
    let lo = ((a - origin) / step).ceil().max(0.0);
    let hi = ((b - origin) / step).floor().min(n as f64 - 1.0);
    if lo > hi || !lo.is_finite() || !hi.is_finite() {
        None
    } else {
        Some((lo as usize, hi as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_has_49_sites() {
        let l = GridSpec::new(Region::square(1.0), 1.0, 7).unwrap().lattice().unwrap();
        assert_eq!(l.len(), 49);
        assert!(l.is_full());
        assert!((l.x0 + 0.5 - 0.5 / 7.0).abs() < 1e-15);
        assert!((l.dx - 1.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn sites_scale_with_lambda_squared() {
        for lambda in [2.0, 3.0, 10.0] {
            let l = GridSpec::new(Region::square(1.0), lambda, 7).unwrap().lattice().unwrap();
            assert_eq!(l.len() as f64, lambda * lambda * 49.0);
        }
        let l = GridSpec::new(Region::disk(1.0), 10.0, 14).unwrap().lattice().unwrap();
        let expect = std::f64::consts::PI * 100.0 * 49.0;
        assert!((l.len() as f64 / expect - 1.0).abs() < 0.01, "{}", l.len());
    }

    #[test]
    fn sites_lie_inside() {
        let r = Region::disk(1.0).with_center(Point::new(3.0, -2.0));
        let g = GridSpec::new(r, 2.5, 9).unwrap();
        let l = g.lattice().unwrap();
        assert!(l.sites.iter().all(|&p| r.scaled(2.5).contains(p)));
        assert_eq!(l.inside.iter().filter(|&&b| b).count(), l.len());
    }

    #[test]
    fn ranges() {
        let l = GridSpec::new(Region::square(1.0), 1.0, 10).unwrap().lattice().unwrap();
        assert_eq!(l.col_range(-0.5, 0.5), Some((0, 9)));
        assert_eq!(l.col_range(-0.01, 0.01), None);
        assert_eq!(l.col_range(0.0, 0.1), Some((5, 5)));
        assert_eq!(l.row_range(2.0, 3.0), None);
    }
}
