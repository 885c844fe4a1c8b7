//! Regions, homotheties and the distance densities of uniform point pairs.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::disc_intersection_area;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn translate(self, v: Point) -> Self {
        Point::new(self.x + v.x, self.y + v.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Disk,
    Square,
}

/// A disk (radius `r`) or an axis-aligned square (side `r`) centered at its barycenter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub shape: Shape,
    pub r: f64,
    #[serde(default)]
    pub center: Point,
}

impl Region {
    pub fn disk(r: f64) -> Self {
        Self { shape: Shape::Disk, r, center: Point::ORIGIN }
    }

    pub fn square(r: f64) -> Self {
        Self { shape: Shape::Square, r, center: Point::ORIGIN }
    }

    pub fn with_center(mut self, center: Point) -> Self {
        self.center = center;
        self
    }

    pub fn translated(self, v: Point) -> Self {
        self.with_center(self.center.translate(v))
    }

    pub fn validate(&self) -> Result<()> {
        if self.r > 0.0 && self.r.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("region size must be positive, got {}", self.r)))
        }
    }

    pub fn area(&self) -> f64 {
        match self.shape {
            Shape::Disk => PI * self.r * self.r,
            Shape::Square => self.r * self.r,
        }
    }

    /// Largest distance between two points of the region.
    pub fn max_distance(&self) -> f64 {
        match self.shape {
            Shape::Disk => 2.0 * self.r,
            Shape::Square => SQRT_2 * self.r,
        }
    }

    /// Side of the axis-aligned bounding square.
    pub fn bounding_side(&self) -> f64 {
        match self.shape {
            Shape::Disk => 2.0 * self.r,
            Shape::Square => self.r,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match self.shape {
            Shape::Disk => p.distance(self.center) <= self.r,
            Shape::Square => {
                let half = 0.5 * self.r;
                (p.x - self.center.x).abs() <= half && (p.y - self.center.y).abs() <= half
            }
        }
    }

    /// Image under the homothety of ratio `lambda` centered at the barycenter.
    pub fn scaled(&self, lambda: f64) -> Region {
        Region { shape: self.shape, r: self.r * lambda, center: self.center }
    }

    /// Area of `A ∩ (A + v)` (the set covariogram), computed from the actual
    /// coordinates of both copies.
    pub fn covariogram(&self, v: Point) -> f64 {
        let moved = self.center.translate(v);
        match self.shape {
            Shape::Disk => disc_intersection_area(self.center.distance(moved), self.r),
            Shape::Square => {
                let half = 0.5 * self.r;
                let overlap = |c0: f64, c1: f64| ((c0 + half).min(c1 + half) - (c0 - half).max(c1 - half)).max(0.0);
                overlap(self.center.x, moved.x) * overlap(self.center.y, moved.y)
            }
        }
    }

    pub fn to_polygon(&self) -> Option<ConvexPolygon> {
        match self.shape {
            Shape::Disk => None,
            Shape::Square => {
                let h = 0.5 * self.r;
                let c = self.center;
                Some(ConvexPolygon {
                    vertices: vec![
                        Point::new(c.x - h, c.y - h),
                        Point::new(c.x + h, c.y - h),
                        Point::new(c.x + h, c.y + h),
                        Point::new(c.x - h, c.y + h),
                    ],
                })
            }
        }
    }
}

/// `lambda A`: a base region scaled about its barycenter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Homothety {
    pub base: Region,
    pub lambda: f64,
}

impl Homothety {
    pub fn new(base: Region, lambda: f64) -> Result<Self> {
        base.validate()?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("homothety ratio must be positive, got {lambda}")));
        }
        Ok(Self { base, lambda })
    }

    pub fn region(&self) -> Region {
        self.base.scaled(self.lambda)
    }

    pub fn area(&self) -> f64 {
        self.lambda * self.lambda * self.base.area()
    }
}

/// `lambda^2 |A|`.
pub fn region_area(region: &Region, lambda: f64) -> f64 {
    lambda * lambda * region.area()
}

/// Density of `|U - V|` for `U`, `V` independent and uniform on the region.
/// Zero outside `[0, max_distance]`.
pub fn distance_density(region: &Region, h: f64) -> f64 {
    let r = region.r;
    if !(h >= 0.0) || h > region.max_distance() {
        return 0.0;
    }
    match region.shape {
        Shape::Disk => {
            let t = h / (2.0 * r);
            2.0 * h / (r * r) * (2.0 / PI * t.min(1.0).acos() - h / (PI * r) * (1.0 - t * t).max(0.0).sqrt())
        }
        Shape::Square => {
            if h <= r {
                2.0 * PI * h / (r * r) - 8.0 * h * h / (r * r * r) + 2.0 * h * h * h / (r * r * r * r)
            } else {
                let b = h * h / (r * r);
                // (b+1)/sqrt(b-1) - 4/(b sqrt(1-(2-b)^2/b^2)) reduces to sqrt(b-1) exactly,
                // which removes the cancellation of the two divergent terms at b = 1.
                let s = (b - 1.0).max(0.0).sqrt();
                let arg = ((2.0 - b) / b).clamp(-1.0, 1.0);
                ((-2.0 - b + 4.0 * s + 2.0 * arg.asin()) * 2.0 * h / (r * r)).max(0.0)
            }
        }
    }
}

/// Density of the pair distance on `lambda A`, from the base-region density
/// via `f(h, lambda R) = f(h / lambda, R) / lambda`.
pub fn distance_density_scaled(region: &Region, lambda: f64, h: f64) -> f64 {
    distance_density(region, h / lambda) / lambda
}

/// A convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    pub vertices: Vec<Point>,
}

impl ConvexPolygon {
    /// Builds a polygon, reordering clockwise input. Convexity is checked.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidParameter("a polygon needs at least three vertices".into()));
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if cross(a, b, c) < -1e-12 {
                return Err(Error::InvalidParameter("polygon is not convex".into()));
            }
        }
        let poly = Self { vertices };
        if !(poly.area() > 0.0) {
            return Err(Error::InvalidParameter("polygon has zero area".into()));
        }
        Ok(poly)
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).abs()
    }

    pub fn translated(&self, v: Point) -> Self {
        Self { vertices: self.vertices.iter().map(|p| p.translate(v)).collect() }
    }

    /// Homothety about the vertex centroid.
    pub fn scaled(&self, lambda: f64) -> Self {
        let n = self.vertices.len() as f64;
        let cx = self.vertices.iter().map(|p| p.x).sum::<f64>() / n;
        let cy = self.vertices.iter().map(|p| p.y).sum::<f64>() / n;
        Self {
            vertices: self
                .vertices
                .iter()
                .map(|p| Point::new(cx + lambda * (p.x - cx), cy + lambda * (p.y - cy)))
                .collect(),
        }
    }

    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Area of `self ∩ other` by Sutherland-Hodgman clipping.
    pub fn intersection_area(&self, other: &ConvexPolygon) -> f64 {
        let mut out = self.vertices.clone();
        let m = other.vertices.len();
        for i in 0..m {
            if out.is_empty() {
                return 0.0;
            }
            let (a, b) = (other.vertices[i], other.vertices[(i + 1) % m]);
            let input = std::mem::take(&mut out);
            let k = input.len();
            for j in 0..k {
                let cur = input[j];
                let prev = input[(j + k - 1) % k];
                let cur_in = cross(a, b, cur) >= 0.0;
                let prev_in = cross(a, b, prev) >= 0.0;
                if cur_in {
                    if !prev_in {
                        out.push(segment_line(prev, cur, a, b));
                    }
                    out.push(cur);
                } else if prev_in {
                    out.push(segment_line(prev, cur, a, b));
                }
            }
        }
        if out.len() < 3 {
            0.0
        } else {
            signed_area(&out).abs()
        }
    }

    /// Area of `self ∩ (other + v)`.
    pub fn cross_covariogram(&self, other: &ConvexPolygon, v: Point) -> f64 {
        self.intersection_area(&other.translated(v))
    }
}

fn cross(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].x * v[(i + 1) % n].y - v[(i + 1) % n].x * v[i].y).sum::<f64>()
}

fn segment_line(p: Point, q: Point, a: Point, b: Point) -> Point {
    let dp = cross(a, b, p);
    let dq = cross(a, b, q);
    let t = dp / (dp - dq);
    Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
}
