//! Per-replicate simulators.
//!
//! Moving-maxima models (tube, Smith) use storms `(s_i, zeta_i)` of a Poisson
//! process on a box around the sites, `zeta_i = |B| / Gamma_i` decreasing, and
//! stop once `zeta_i * max f` cannot raise the pointwise minimum. Gaussian-based
//! models use `zeta_i = 1 / Gamma_i` with spectral functions `V_i` and stop once
//! `zeta_i * C` falls below the minimum, `C` being an envelope above which
//! values of `V` are neglected.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::gaussian::{CirculantEmbedding, CirculantScratch, Cholesky};
use super::grid::Lattice;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::models::{mahalanobis, ExtremalModel};
use crate::special::{normal_quantile, normal_sf};

/// Mahalanobis radius at which the Smith storm profile is cut.
const SMITH_CUTOFF: f64 = 6.0;
/// Largest site count sampled through a dense Cholesky factor.
pub const CHOLESKY_MAX_SITES: usize = 2500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Spectral envelope `C`; chosen from `bias_budget` when absent.
    pub envelope: Option<f64>,
    /// Allowed bias on `P(Z(x) <= z)` for `z >= 0.5`.
    pub bias_budget: f64,
    /// Largest number of storms or spectral terms per replicate.
    pub max_terms: usize,
    /// Turn truncation warnings (bias above budget, term budget reached) into errors.
    pub strict: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self { envelope: None, bias_budget: 1e-3, max_terms: 1_000_000, strict: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationKind {
    Exact,
    Truncated,
}

/// How far a simulated field may be from the target process.
///
/// `bound` bounds the error on `P(Z(x) <= z)` for `z >= 0.5` from the
/// truncated storm profile or spectral envelope. `budget_hits` counts
/// replicates that stopped on `max_terms` rather than on the stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub kind: TruncationKind,
    pub bound: f64,
    pub envelope: Option<f64>,
    pub budget_hits: usize,
}

impl TruncationReport {
    pub(crate) fn merge(&mut self, other: &TruncationReport) {
        self.budget_hits += other.budget_hits;
    }
}

pub(crate) enum Sites {
    Lattice(Lattice),
    Points(Vec<Point>),
}

impl Sites {
    fn points(&self) -> &[Point] {
        match self {
            Sites::Lattice(l) => &l.sites,
            Sites::Points(p) => p,
        }
    }

    fn len(&self) -> usize {
        self.points().len()
    }
}

#[derive(Debug, Clone, Copy)]
enum StormShape {
    Disk { r: f64 },
    Gaussian { inv: [[f64; 2]; 2], sigma: [[f64; 2]; 2] },
}

struct StormEngine {
    shape: StormShape,
    lo: Point,
    hi: Point,
    area: f64,
    f_max: f64,
}

enum Spectral {
    Schlather,
    Geometric { sigma: f64 },
    BrownResnick { drift: Vec<f64> },
}

enum Sampler {
    Cholesky(Cholesky),
    Circulant { ce: CirculantEmbedding, cells: Vec<usize> },
}

struct SpectralEngine {
    kind: Spectral,
    sampler: Sampler,
    envelope: f64,
}

enum Engine {
    Storm(StormEngine),
    Spectral(SpectralEngine),
    Complete,
    Independent,
}

pub(crate) struct FieldSimulator {
    sites: Sites,
    engine: Engine,
    config: SimulationConfig,
    report: TruncationReport,
}

/// Per-replicate working memory.
#[derive(Default)]
pub(crate) struct Scratch {
    gauss: Vec<f64>,
    normals: Vec<f64>,
    circ: CirculantScratch,
    cells: Vec<f64>,
    bits: Vec<u64>,
    inside_bits: Vec<u64>,
}

pub(crate) fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

fn frechet(rng: &mut ChaCha8Rng) -> f64 {
    let e: f64 = rng.sample(Exp1);
    1.0 / e
}

/// `E[V 1{V > C}]` for `V = sqrt(2 pi) max(eps, 0)`.
fn schlather_tail(c: f64) -> f64 {
    let t = c / (2.0 * std::f64::consts::PI).sqrt();
    (-0.5 * t * t).exp()
}

/// `E[V 1{V > C}]` for `V = exp(s eps - s^2 / 2)`.
fn lognormal_tail(c: f64, s: f64) -> f64 {
    if s == 0.0 {
        return if c < 1.0 { 1.0 } else { 0.0 };
    }
    normal_sf((c.ln() - 0.5 * s * s) / s)
}

impl FieldSimulator {
    pub(crate) fn new(model: &ExtremalModel, sites: Sites, config: SimulationConfig) -> Result<Self> {
        model.validate()?;
        if sites.len() == 0 {
            return Err(Error::InvalidParameter("no sites to simulate".into()));
        }
        if !(config.bias_budget > 0.0) || config.max_terms == 0 {
            return Err(Error::InvalidParameter("bias budget and term budget must be positive".into()));
        }
        let exact = TruncationReport { kind: TruncationKind::Exact, bound: 0.0, envelope: None, budget_hits: 0 };
        let (engine, report) = match *model {
            ExtremalModel::Tube { r_b } => (Engine::Storm(storm_engine(&sites, StormShape::Disk { r: r_b })), exact),
            ExtremalModel::Smith { sigma } => {
                let det = sigma[0][0] * sigma[1][1] - sigma[0][1] * sigma[1][0];
                let inv = [[sigma[1][1] / det, -sigma[0][1] / det], [-sigma[1][0] / det, sigma[0][0] / det]];
                let report = TruncationReport {
                    kind: TruncationKind::Truncated,
                    // Probability mass of the bivariate Gaussian beyond Mahalanobis radius r.
                    bound: (-0.5 * SMITH_CUTOFF * SMITH_CUTOFF).exp() / 0.5,
                    envelope: None,
                    budget_hits: 0,
                };
                (Engine::Storm(storm_engine(&sites, StormShape::Gaussian { inv, sigma })), report)
            }
            ExtremalModel::CompleteDependence => (Engine::Complete, exact),
            ExtremalModel::Independence => (Engine::Independent, exact),
            ExtremalModel::Schlather { .. } | ExtremalModel::GeometricGaussian { .. } | ExtremalModel::BrownResnick { .. } => {
                let (spec, report) = spectral_engine(model, &sites, &config)?;
                (Engine::Spectral(spec), report)
            }
        };
        Ok(Self { sites, engine, config, report })
    }

    pub(crate) fn report(&self) -> TruncationReport {
        self.report
    }

    fn budget_exceeded(&self) -> Result<usize> {
        if self.config.strict {
            Err(Error::TruncationBudgetExceeded { bound: self.config.max_terms as f64, budget: self.config.max_terms as f64 })
        } else {
            Ok(1)
        }
    }

    /// One realization at every site, in site order.
    pub(crate) fn sample(&self, seed: u64, replicate: u64, scratch: &mut Scratch) -> Result<(Vec<f64>, TruncationReport)> {
        let mut rng = replicate_rng(seed, replicate);
        let n = self.sites.len();
        let mut report = self.report;
        let values = match &self.engine {
            Engine::Complete => vec![frechet(&mut rng); n],
            Engine::Independent => (0..n).map(|_| frechet(&mut rng)).collect(),
            Engine::Storm(storm) => {
                let (v, hit) = self.storm_field(storm, &mut rng, scratch)?;
                report.budget_hits = hit;
                v
            }
            Engine::Spectral(spec) => {
                let (v, hit) = self.spectral_field(spec, &mut rng, scratch)?;
                report.budget_hits = hit;
                v
            }
        };
        Ok((values, report))
    }

    /// Fraction of sites with `Z > u`, simulating only what can exceed `u`.
    pub(crate) fn exceedance_fraction(
        &self,
        u: f64,
        seed: u64,
        replicate: u64,
        scratch: &mut Scratch,
    ) -> Result<(f64, TruncationReport)> {
        let mut rng = replicate_rng(seed, replicate);
        let n = self.sites.len();
        let mut report = self.report;
        let count = match &self.engine {
            Engine::Complete => {
                if frechet(&mut rng) > u {
                    n
                } else {
                    0
                }
            }
            Engine::Independent => (0..n).filter(|_| frechet(&mut rng) > u).count(),
            Engine::Storm(storm) => {
                let (c, hit) = self.storm_exceedances(storm, u, &mut rng, scratch)?;
                report.budget_hits = hit;
                c
            }
            Engine::Spectral(spec) => {
                let (c, hit) = self.spectral_exceedances(spec, u, &mut rng, scratch)?;
                report.budget_hits = hit;
                c
            }
        };
        Ok((count as f64 / n as f64, report))
    }

    fn storm_center(storm: &StormEngine, rng: &mut ChaCha8Rng) -> Point {
        let x = storm.lo.x + (storm.hi.x - storm.lo.x) * rng.random::<f64>();
        let y = storm.lo.y + (storm.hi.y - storm.lo.y) * rng.random::<f64>();
        Point::new(x, y)
    }

    fn storm_field(&self, storm: &StormEngine, rng: &mut ChaCha8Rng, scratch: &mut Scratch) -> Result<(Vec<f64>, usize)> {
        let n = self.sites.len();
        let mut gamma = 0.0;
        let mut min_bound = 0.0;
        let mut checkpoint = 1.0;
        let mut hits = 0;
        let values: &mut Vec<f64> = match &self.sites {
            Sites::Lattice(l) => {
                scratch.cells.clear();
                scratch.cells.resize(l.nx * l.ny, 0.0);
                &mut scratch.cells
            }
            Sites::Points(_) => {
                scratch.cells.clear();
                scratch.cells.resize(n, 0.0);
                &mut scratch.cells
            }
        };
        let mut terms = 0;
        loop {
            gamma += rng.sample::<f64, _>(Exp1);
            let zeta = storm.area / gamma;
            if zeta * storm.f_max <= min_bound {
                break;
            }
            if terms == self.config.max_terms {
                hits = self.budget_exceeded()?;
                break;
            }
            terms += 1;
            let s = Self::storm_center(storm, rng);
            match &self.sites {
                Sites::Lattice(l) => for_each_cell_within(l, &storm.shape, s, support_radius(&storm.shape), |idx, d| {
                    let v = zeta * profile(&storm.shape, d);
                    if v > values[idx] {
                        values[idx] = v;
                    }
                }),
                Sites::Points(pts) => {
                    for (i, p) in pts.iter().enumerate() {
                        let v = zeta * profile(&storm.shape, Point::new(p.x - s.x, p.y - s.y));
                        if v > values[i] {
                            values[i] = v;
                        }
                    }
                }
            }
            if gamma >= checkpoint {
                min_bound = match &self.sites {
                    Sites::Lattice(l) => l.cells.iter().map(|&(r, c)| values[r * l.nx + c]).fold(f64::INFINITY, f64::min),
                    Sites::Points(_) => values.iter().copied().fold(f64::INFINITY, f64::min),
                };
                checkpoint = gamma * 1.25;
            }
        }
        let out = match &self.sites {
            Sites::Lattice(l) => l.cells.iter().map(|&(r, c)| values[r * l.nx + c]).collect(),
            Sites::Points(_) => values.clone(),
        };
        Ok((out, hits))
    }

    fn storm_exceedances(
        &self,
        storm: &StormEngine,
        u: f64,
        rng: &mut ChaCha8Rng,
        scratch: &mut Scratch,
    ) -> Result<(usize, usize)> {
        let mut gamma = 0.0;
        let mut terms = 0;
        let mut hits = 0;
        let n = self.sites.len();
        match &self.sites {
            Sites::Lattice(l) => {
                let words = l.nx.div_ceil(64);
                scratch.bits.clear();
                scratch.bits.resize(words * l.ny, 0);
                if scratch.inside_bits.len() != words * l.ny {
                    scratch.inside_bits = inside_bitmap(l);
                }
            }
            Sites::Points(_) => {
                scratch.bits.clear();
                scratch.bits.resize(n, 0);
            }
        }
        loop {
            gamma += rng.sample::<f64, _>(Exp1);
            let zeta = storm.area / gamma;
            if zeta * storm.f_max <= u {
                break;
            }
            if terms == self.config.max_terms {
                hits = self.budget_exceeded()?;
                break;
            }
            terms += 1;
            let s = Self::storm_center(storm, rng);
            // Region where zeta f(x - s) > u.
            let radius = match storm.shape {
                StormShape::Disk { r } => r,
                StormShape::Gaussian { .. } => (2.0 * (zeta * storm.f_max / u).ln()).sqrt().min(SMITH_CUTOFF),
            };
            match &self.sites {
                Sites::Lattice(l) => mark_rows(l, &storm.shape, s, radius, &mut scratch.bits),
                Sites::Points(pts) => {
                    for (i, p) in pts.iter().enumerate() {
                        if zeta * profile(&storm.shape, Point::new(p.x - s.x, p.y - s.y)) > u {
                            scratch.bits[i] = 1;
                        }
                    }
                }
            }
        }
        let count = match &self.sites {
            Sites::Lattice(_) => {
                scratch.bits.iter().zip(&scratch.inside_bits).map(|(a, b)| (a & b).count_ones() as usize).sum()
            }
            Sites::Points(_) => scratch.bits.iter().filter(|&&b| b != 0).count(),
        };
        Ok((count, hits))
    }

    fn gaussian_draw(&self, spec: &SpectralEngine, rng: &mut ChaCha8Rng, scratch: &mut Scratch) {
        let n = self.sites.len();
        scratch.gauss.resize(n, 0.0);
        match &spec.sampler {
            Sampler::Cholesky(c) => c.sample(rng, &mut scratch.normals, &mut scratch.gauss),
            Sampler::Circulant { ce, cells } => {
                scratch.cells.resize(ce.len(), 0.0);
                ce.sample(rng, &mut scratch.circ, &mut scratch.cells);
                for (g, &c) in scratch.gauss.iter_mut().zip(cells) {
                    *g = scratch.cells[c];
                }
            }
        }
    }

    fn spectral_value(kind: &Spectral, i: usize, g: f64) -> f64 {
        match kind {
            Spectral::Schlather => (2.0 * std::f64::consts::PI).sqrt() * g.max(0.0),
            Spectral::Geometric { sigma } => (sigma * g - 0.5 * sigma * sigma).exp(),
            Spectral::BrownResnick { drift } => (g - drift[i]).exp(),
        }
    }

    fn spectral_field(&self, spec: &SpectralEngine, rng: &mut ChaCha8Rng, scratch: &mut Scratch) -> Result<(Vec<f64>, usize)> {
        let n = self.sites.len();
        let mut z = vec![0.0; n];
        let mut gamma = 0.0;
        let mut terms = 0;
        let mut hits = 0;
        loop {
            gamma += rng.sample::<f64, _>(Exp1);
            let zeta = 1.0 / gamma;
            let min = z.iter().copied().fold(f64::INFINITY, f64::min);
            if zeta * spec.envelope <= min {
                break;
            }
            if terms == self.config.max_terms {
                hits = self.budget_exceeded()?;
                break;
            }
            terms += 1;
            self.gaussian_draw(spec, rng, scratch);
            for (i, zi) in z.iter_mut().enumerate() {
                let v = zeta * Self::spectral_value(&spec.kind, i, scratch.gauss[i]);
                if v > *zi {
                    *zi = v;
                }
            }
        }
        Ok((z, hits))
    }

    fn spectral_exceedances(
        &self,
        spec: &SpectralEngine,
        u: f64,
        rng: &mut ChaCha8Rng,
        scratch: &mut Scratch,
    ) -> Result<(usize, usize)> {
        let n = self.sites.len();
        scratch.bits.clear();
        scratch.bits.resize(n, 0);
        let mut count = 0;
        let mut gamma = 0.0;
        let mut terms = 0;
        let mut hits = 0;
        loop {
            gamma += rng.sample::<f64, _>(Exp1);
            let zeta = 1.0 / gamma;
            if zeta * spec.envelope <= u || count == n {
                break;
            }
            if terms == self.config.max_terms {
                hits = self.budget_exceeded()?;
                break;
            }
            terms += 1;
            self.gaussian_draw(spec, rng, scratch);
            for i in 0..n {
                if scratch.bits[i] == 0 && zeta * Self::spectral_value(&spec.kind, i, scratch.gauss[i]) > u {
                    scratch.bits[i] = 1;
                    count += 1;
                }
            }
        }
        Ok((count, hits))
    }
}

fn storm_engine(sites: &Sites, shape: StormShape) -> StormEngine {
    let pts = sites.points();
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    let (mx, my, f_max) = match shape {
        StormShape::Disk { r } => (r, r, 1.0 / (std::f64::consts::PI * r * r)),
        StormShape::Gaussian { sigma, .. } => {
            let det = sigma[0][0] * sigma[1][1] - sigma[0][1] * sigma[1][0];
            (
                SMITH_CUTOFF * sigma[0][0].sqrt(),
                SMITH_CUTOFF * sigma[1][1].sqrt(),
                1.0 / (2.0 * std::f64::consts::PI * det.sqrt()),
            )
        }
    };
    let lo = Point::new(lo.x - mx, lo.y - my);
    let hi = Point::new(hi.x + mx, hi.y + my);
    StormEngine { shape, lo, hi, area: (hi.x - lo.x) * (hi.y - lo.y), f_max }
}

fn support_radius(shape: &StormShape) -> f64 {
    match shape {
        StormShape::Disk { r } => *r,
        StormShape::Gaussian { .. } => SMITH_CUTOFF,
    }
}

/// Storm profile `f(d)`, zero outside its (truncated) support.
fn profile(shape: &StormShape, d: Point) -> f64 {
    match *shape {
        StormShape::Disk { r } => {
            if d.x * d.x + d.y * d.y <= r * r {
                1.0 / (std::f64::consts::PI * r * r)
            } else {
                0.0
            }
        }
        StormShape::Gaussian { sigma, .. } => {
            let m = mahalanobis(&sigma, d.x, d.y);
            if m <= SMITH_CUTOFF {
                let det = sigma[0][0] * sigma[1][1] - sigma[0][1] * sigma[1][0];
                (-0.5 * m * m).exp() / (2.0 * std::f64::consts::PI * det.sqrt())
            } else {
                0.0
            }
        }
    }
}

/// Column interval (as offsets from the storm center) of the level set of
/// radius `radius` on the row at vertical offset `dy`.
fn row_span(shape: &StormShape, dy: f64, radius: f64) -> Option<(f64, f64)> {
    match *shape {
        StormShape::Disk { .. } => {
            let w2 = radius * radius - dy * dy;
            (w2 >= 0.0).then(|| {
                let w = w2.sqrt();
                (-w, w)
            })
        }
        StormShape::Gaussian { inv, .. } => {
            let (a, b, c) = (inv[0][0], inv[0][1], inv[1][1]);
            let disc = b * b * dy * dy - a * (c * dy * dy - radius * radius);
            (disc >= 0.0).then(|| {
                let s = disc.sqrt();
                ((-b * dy - s) / a, (-b * dy + s) / a)
            })
        }
    }
}

/// Vertical half-extent of the level set.
fn vertical_reach(shape: &StormShape, radius: f64) -> f64 {
    match *shape {
        StormShape::Disk { .. } => radius,
        StormShape::Gaussian { sigma, .. } => radius * sigma[1][1].sqrt(),
    }
}

fn for_each_cell_within(l: &Lattice, shape: &StormShape, s: Point, radius: f64, mut f: impl FnMut(usize, Point)) {
    let reach = vertical_reach(shape, radius);
    let Some((r0, r1)) = l.row_range(s.y - reach, s.y + reach) else { return };
    for row in r0..=r1 {
        let dy = l.y0 + row as f64 * l.dx - s.y;
        let Some((a, b)) = row_span(shape, dy, radius) else { continue };
        let Some((c0, c1)) = l.col_range(s.x + a, s.x + b) else { continue };
        for col in c0..=c1 {
            let dx = l.x0 + col as f64 * l.dx - s.x;
            f(row * l.nx + col, Point::new(dx, dy));
        }
    }
}

fn mark_rows(l: &Lattice, shape: &StormShape, s: Point, radius: f64, bits: &mut [u64]) {
    let words = l.nx.div_ceil(64);
    let reach = vertical_reach(shape, radius);
    let Some((r0, r1)) = l.row_range(s.y - reach, s.y + reach) else { return };
    for row in r0..=r1 {
        let dy = l.y0 + row as f64 * l.dx - s.y;
        let Some((a, b)) = row_span(shape, dy, radius) else { continue };
        let Some((c0, c1)) = l.col_range(s.x + a, s.x + b) else { continue };
        set_bits(&mut bits[row * words..(row + 1) * words], c0, c1);
    }
}

/// Sets bits `c0..=c1`.
fn set_bits(row: &mut [u64], c0: usize, c1: usize) {
    let (w0, w1) = (c0 / 64, c1 / 64);
    let lo_mask = u64::MAX << (c0 % 64);
    let hi_mask = u64::MAX >> (63 - c1 % 64);
    if w0 == w1 {
        row[w0] |= lo_mask & hi_mask;
    } else {
        row[w0] |= lo_mask;
        for w in &mut row[w0 + 1..w1] {
            *w = u64::MAX;
        }
        row[w1] |= hi_mask;
    }
}

fn inside_bitmap(l: &Lattice) -> Vec<u64> {
    let words = l.nx.div_ceil(64);
    let mut bits = vec![0u64; words * l.ny];
    for &(r, c) in &l.cells {
        bits[r * words + c / 64] |= 1 << (c % 64);
    }
    bits
}

fn spectral_engine(model: &ExtremalModel, sites: &Sites, config: &SimulationConfig) -> Result<(SpectralEngine, TruncationReport)> {
    let pts = sites.points();
    let n = pts.len();
    // Bound = tail / 0.5; aim at 80% of the budget.
    let target = 0.4 * config.bias_budget;
    let (kind, sampler, tail): (Spectral, Sampler, Box<dyn Fn(f64) -> f64>) = match *model {
        ExtremalModel::Schlather { corr } | ExtremalModel::GeometricGaussian { corr, .. } => {
            let sampler = if n <= CHOLESKY_MAX_SITES {
                Sampler::Cholesky(Cholesky::factor(n, |i, j| corr.rho(pts[i].distance(pts[j])))?)
            } else {
                match sites {
                    Sites::Lattice(l) => {
                        let ce = CirculantEmbedding::new(l.nx, l.ny, l.dx, |dx, dy| corr.rho(dx.hypot(dy)))?;
                        Sampler::Circulant { ce, cells: l.cells.iter().map(|&(r, c)| r * l.nx + c).collect() }
                    }
                    Sites::Points(_) => {
                        return Err(Error::Unsupported(format!(
                            "Gaussian fields at more than {CHOLESKY_MAX_SITES} scattered sites"
                        )))
                    }
                }
            };
            match *model {
                ExtremalModel::GeometricGaussian { sigma_eps, .. } => {
                    (Spectral::Geometric { sigma: sigma_eps }, sampler, Box::new(move |c| lognormal_tail(c, sigma_eps)))
                }
                _ => (Spectral::Schlather, sampler, Box::new(schlather_tail)),
            }
        }
        ExtremalModel::BrownResnick { vario } => {
            if n > CHOLESKY_MAX_SITES {
                return Err(Error::Unsupported(format!(
                    "Brown-Resnick simulation is limited to {CHOLESKY_MAX_SITES} sites"
                )));
            }
            let cx = pts.iter().map(|p| p.x).sum::<f64>() / n as f64;
            let cy = pts.iter().map(|p| p.y).sum::<f64>() / n as f64;
            let origin = Point::new(cx, cy);
            let drift: Vec<f64> = pts.iter().map(|p| vario.value(p.distance(origin))).collect();
            let chol = Cholesky::factor(n, |i, j| drift[i] + drift[j] - vario.value(pts[i].distance(pts[j])))?;
            let s = (2.0 * drift.iter().copied().fold(0.0, f64::max)).sqrt();
            (Spectral::BrownResnick { drift }, Sampler::Cholesky(chol), Box::new(move |c| lognormal_tail(c, s)))
        }
        _ => unreachable!("spectral engine requested for a moving-maxima model"),
    };
    let envelope = match config.envelope {
        Some(c) => {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidParameter(format!("spectral envelope must be positive, got {c}")));
            }
            c
        }
        None => match &kind {
            Spectral::Schlather => (2.0 * std::f64::consts::PI).sqrt() * (-2.0 * target.ln()).sqrt(),
            Spectral::Geometric { sigma } => (0.5 * sigma * sigma - sigma * normal_quantile(target)).exp(),
            Spectral::BrownResnick { drift } => {
                let s = (2.0 * drift.iter().copied().fold(0.0, f64::max)).sqrt();
                (0.5 * s * s - s * normal_quantile(target)).exp()
            }
        },
    };
    let bound = tail(envelope) / 0.5;
    if bound > config.bias_budget && config.strict {
        return Err(Error::TruncationBudgetExceeded { bound, budget: config.bias_budget });
    }
    let report = TruncationReport { kind: TruncationKind::Truncated, bound, envelope: Some(envelope), budget_hits: 0 };
    Ok((SpectralEngine { kind, sampler, envelope }, report))
}
