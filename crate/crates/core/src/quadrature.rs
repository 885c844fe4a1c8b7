//! Adaptive Gauss-Kronrod (G7/K15) quadrature.
//!
//! Global adaptive bisection: the panel with the largest error estimate is
//! split until the summed estimate meets the tolerance. Panels are kept in
//! insertion order and summed left to right at the end, so results are
//! bit-reproducible for a given integrand and breakpoint list.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and budget for adaptive integration.
///
/// Refinement stops once the error estimate is below
/// `max(abs_tol, rel_tol * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl QuadConfig {
    pub const ONE_D: QuadConfig = QuadConfig {
        abs_tol: 1e-9,
        rel_tol: 0.0,
        max_panels: 4000,
    };

    pub const TWO_D: QuadConfig = QuadConfig {
        abs_tol: 1e-7,
        rel_tol: 0.0,
        max_panels: 400,
    };

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self::ONE_D
    }
}

/// Value of an integral with its a-posteriori error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let value = res_k * half;
    res_abs *= h;
    res_asc *= h;
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel { a, b, value, error }
}

struct ByError(usize, f64);

impl PartialEq for ByError {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for ByError {}
impl PartialOrd for ByError {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ByError {
    fn cmp(&self, other: &Self) -> Ordering {
        // Largest error first; ties go to the leftmost (lowest index) panel.
        self.1.total_cmp(&other.1).then_with(|| other.0.cmp(&self.0))
    }
}

/// Integrates `f` over `[points[0], points[last]]`, with the interior points
/// used as initial panel boundaries (kinks, discontinuities, scale changes).
///
/// `points` must be non-decreasing; repeated points are ignored.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], cfg: &QuadConfig) -> Result<Integral> {
    if points.len() < 2 {
        return Err(Error::Domain("integration needs at least two points".into()));
    }
    if points.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Domain("integration breakpoints must be non-decreasing".into()));
    }
    let mut panels: Vec<Panel> = Vec::new();
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            let p = kronrod15(&mut f, w[0], w[1]);
            heap.push(ByError(panels.len(), p.error));
            panels.push(p);
        }
    }
    let mut evaluations = 15 * panels.len();
    if panels.is_empty() {
        return Ok(Integral { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let mut value: f64 = panels.iter().map(|p| p.value).sum();
    let mut error: f64 = panels.iter().map(|p| p.error).sum();

    while error > cfg.target(value) && panels.len() < cfg.max_panels {
        let Some(ByError(idx, _)) = heap.pop() else { break };
        let p = panels[idx];
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) || (p.b - p.a) <= 1e-15 * p.a.abs().max(p.b.abs()).max(1e-300) {
            // Panel cannot be split further; leave it out of the queue.
            continue;
        }
        let left = kronrod15(&mut f, p.a, mid);
        let right = kronrod15(&mut f, mid, p.b);
        evaluations += 30;
        value += left.value + right.value - p.value;
        error += left.error + right.error - p.error;
        panels[idx] = left;
        heap.push(ByError(idx, left.error));
        heap.push(ByError(panels.len(), right.error));
        panels.push(right);
    }

    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let error: f64 = panels.iter().map(|p| p.error).sum();
    if !value.is_finite() {
        return Err(Error::Domain("integrand produced a non-finite value".into()));
    }
    if error > cfg.target(value) {
        return Err(Error::QuadratureNonConvergence {
            estimate: error,
            tolerance: cfg.target(value),
        });
    }
    Ok(Integral { value, error, evaluations })
}

/// Iterated integral `int_x int_{y in inner(x)} f(x, y) dy dx`.
///
/// `inner(x)` returns the breakpoints of the inner integral (its first and
/// last entries are the limits). Each inner integral is resolved to a tenth
/// of the outer tolerance per unit length of the outer range.
pub fn integrate_2d<F, G>(f: F, outer: &[f64], inner: G, cfg: &QuadConfig) -> Result<Integral>
where
    F: Fn(f64, f64) -> f64,
    G: Fn(f64) -> Vec<f64>,
{
    let span = match (outer.first(), outer.last()) {
        (Some(a), Some(b)) if b > a => b - a,
        _ => return Ok(Integral { value: 0.0, error: 0.0, evaluations: 0 }),
    };
    let inner_cfg = QuadConfig {
        abs_tol: 0.1 * cfg.abs_tol / span,
        rel_tol: 0.1 * cfg.rel_tol,
        max_panels: cfg.max_panels,
    };
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_err = RefCell::new(0.0_f64);
    let evals = RefCell::new(0usize);
    let outer_res = integrate(
        |x| {
            if failure.borrow().is_some() {
                return 0.0;
            }
            let pts = inner(x);
            if pts.len() < 2 {
                return 0.0;
            }
            match integrate(|y| f(x, y), &pts, &inner_cfg) {
                Ok(r) => {
                    let mut e = inner_err.borrow_mut();
                    *e = e.max(r.error);
                    *evals.borrow_mut() += r.evaluations;
                    r.value
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        },
        outer,
        cfg,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let r = outer_res?;
    Ok(Integral {
        value: r.value,
        error: r.error + inner_err.into_inner() * span,
        evaluations: evals.into_inner(),
    })
}
