//! Centered Gaussian vectors at a fixed set of sites.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Lower-triangular factor `L` with `L L^T = K`, packed row by row.
///
/// Semi-definite matrices are accepted: a pivot below `1e-10` times the
/// largest diagonal entry zeroes its column. A pivot below `-1e-8` times that
/// scale means the matrix is indefinite.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    packed: Vec<f64>,
}

impl Cholesky {
    pub fn factor(n: usize, cov: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut packed = vec![0.0; n * (n + 1) / 2];
        let idx = |i: usize, j: usize| i * (i + 1) / 2 + j;
        let scale = (0..n).map(|i| cov(i, i)).fold(0.0, f64::max);
        if !(scale > 0.0) {
            return Err(Error::NotPositiveDefinite("covariance has no positive diagonal entry".into()));
        }
        for i in 0..n {
            for j in 0..=i {
                let mut s = cov(i, j);
                let (ri, rj) = (idx(i, 0), idx(j, 0));
                for k in 0..j {
                    s -= packed[ri + k] * packed[rj + k];
                }
                if i == j {
                    if s < -1e-8 * scale {
                        return Err(Error::NotPositiveDefinite(format!("negative pivot {s:e} at row {i}")));
                    }
                    packed[ri + i] = if s > 1e-10 * scale { s.sqrt() } else { 0.0 };
                } else {
                    let d = packed[rj + j];
                    packed[ri + j] = if d > 0.0 { s / d } else { 0.0 };
                }
            }
        }
        Ok(Self { n, packed })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `out = L z` for standard normal `z`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut Vec<f64>, out: &mut [f64]) {
        z.clear();
        z.extend((0..self.n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            let row = &self.packed[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
            *o = row.iter().zip(z.iter()).map(|(a, b)| a * b).sum();
        }
    }
}

/// Stationary Gaussian field on an `nx x ny` lattice by circulant embedding.
///
/// Each FFT yields two independent fields; the second one is handed out by
/// the next call with the same scratch state.
#[derive(Clone)]
pub struct CirculantEmbedding {
    nx: usize,
    ny: usize,
    mx: usize,
    my: usize,
    sqrt_eigen: Vec<f64>,
    row_fft: Arc<dyn Fft<f64>>,
    col_fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantEmbedding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantEmbedding")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("mx", &self.mx)
            .field("my", &self.my)
            .finish()
    }
}

/// Scratch space and the cached second field of a circulant sampler.
#[derive(Default)]
pub struct CirculantScratch {
    buf: Vec<Complex64>,
    col: Vec<Complex64>,
    pending: Option<Vec<f64>>,
}

impl CirculantEmbedding {
    /// `cov(dx, dy)` is the covariance at lag `(dx, dy)` in lattice units times `step`.
    pub fn new(nx: usize, ny: usize, step: f64, cov: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut planner = FftPlanner::new();
        let mut worst = 0.0;
        for pad in [2usize, 4, 8] {
            let mx = (pad * nx).max(2);
            let my = (pad * ny).max(2);
            let mut buf: Vec<Complex64> = Vec::with_capacity(mx * my);
            for j in 0..my {
                let dy = j.min(my - j) as f64 * step;
                for i in 0..mx {
                    let dx = i.min(mx - i) as f64 * step;
                    buf.push(Complex64::new(cov(dx, dy), 0.0));
                }
            }
            let row_fft = planner.plan_fft_forward(mx);
            let col_fft = planner.plan_fft_forward(my);
            let mut col = vec![Complex64::default(); my];
            fft2(&mut buf, mx, my, &*row_fft, &*col_fft, &mut col);
            let max = buf.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
            let min = buf.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
            worst = min / max;
            if min >= -1e-10 * max {
                let n = (mx * my) as f64;
                let sqrt_eigen = buf.iter().map(|c| (c.re.max(0.0) / n).sqrt()).collect();
                return Ok(Self { nx, ny, mx, my, sqrt_eigen, row_fft, col_fft });
            }
        }
        Err(Error::NotPositiveDefinite(format!(
            "circulant embedding has relative negative eigenvalue {worst:e} after 8x padding"
        )))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes one field, row-major over the `nx x ny` lattice.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, scratch: &mut CirculantScratch, out: &mut [f64]) {
        if let Some(p) = scratch.pending.take() {
            out[..p.len()].copy_from_slice(&p);
            return;
        }
        let (mx, my) = (self.mx, self.my);
        scratch.buf.clear();
        scratch.buf.extend(self.sqrt_eigen.iter().map(|&s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(s * re, s * im)
        }));
        scratch.col.resize(my, Complex64::default());
        fft2(&mut scratch.buf, mx, my, &*self.row_fft, &*self.col_fft, &mut scratch.col);
        let mut second = vec![0.0; self.nx * self.ny];
        for j in 0..self.ny {
            for i in 0..self.nx {
                let c = scratch.buf[j * mx + i];
                out[j * self.nx + i] = c.re;
                second[j * self.nx + i] = c.im;
            }
        }
        scratch.pending = Some(second);
    }
}

fn fft2(buf: &mut [Complex64], mx: usize, my: usize, row: &dyn Fft<f64>, col: &dyn Fft<f64>, tmp: &mut [Complex64]) {
    for r in buf.chunks_exact_mut(mx) {
        row.process(r);
    }
    for i in 0..mx {
        for j in 0..my {
            tmp[j] = buf[j * mx + i];
        }
        col.process(tmp);
        for j in 0..my {
            buf[j * mx + i] = tmp[j];
        }
    }
}
