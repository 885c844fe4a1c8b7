//! Quadrature evaluation of the risk measures of the normalized exceedance
//! area `L(lambda A) = |{x in lambda A : Z(x) > u}| / |lambda A|`.
//!
//! The variance is computed by two independent routes: a 1-D integral
//! against the pair-distance density (isotropic models on disks and squares)
//! and a 2-D integral against the set covariogram (any model, any convex
//! polygon or finite union of disjoint ones).

use std::cell::RefCell;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance_density, ConvexPolygon, Point, Region, Shape};
use crate::models::ExtremalModel;
use crate::quadrature::{integrate, integrate_2d, QuadConfig};
use crate::special::{gamma, gamma_ur, normal_quantile};

/// Tail mass allowed beyond the radial cutoff of `sigma_squared`.
const SIGMA_TAIL_BUDGET: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RiskKind {
    Expectation,
    Variance,
    #[serde(rename = "var")]
    VaR {
        alpha: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskQuery {
    pub model: ExtremalModel,
    pub region: Region,
    pub u: f64,
    pub kind: RiskKind,
}

impl RiskQuery {
    pub fn new(model: ExtremalModel, region: Region, u: f64, kind: RiskKind) -> Result<Self> {
        let q = Self { model, region, u, kind };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.region.validate()?;
        check_u(self.u)?;
        if let RiskKind::VaR { alpha } = self.kind {
            check_alpha(alpha)?;
        }
        Ok(())
    }
}

/// Generalized extreme value margin `GEV(mu, sigma, xi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    pub mu: f64,
    pub sigma: f64,
    pub xi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    #[serde(rename = "quadrature_1d")]
    Quadrature1D,
    #[serde(rename = "quadrature_2d")]
    Quadrature2D,
    MonteCarlo,
    ClosedForm,
}

/// A single value with its error estimate (quadrature a-posteriori error or
/// Monte-Carlo standard error).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub error: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskCurve {
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: Option<f64>,
    pub provenance: Provenance,
    pub err_estimate: Vec<f64>,
}

/// `R(lambda A) ~ K1 + K2 * lambda^order` as `lambda -> inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityConstants {
    pub k1: f64,
    pub k2: f64,
    pub order: f64,
}

/// `sigma^2 = int_{R^2} [exp(-Theta(x)/u) - exp(-2/u)] dx`.
///
/// `degenerate` is set when the integrand vanishes identically (`Theta = 2`),
/// in which case the Gaussian limit of the loss is a point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaSquared {
    pub value: f64,
    pub error: f64,
    pub degenerate: bool,
}

pub(crate) fn check_u(u: f64) -> Result<()> {
    if u > 0.0 && u.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(format!("threshold u must be positive and finite, got {u}")))
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("lambda must be positive and finite, got {lambda}")))
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// `exp(-theta/u) - exp(-2/u)`, accurate when `theta` is close to 2.
pub(crate) fn pair_excess(theta: f64, u: f64) -> f64 {
    (-2.0 / u).exp() * ((2.0 - theta) / u).exp_m1()
}

/// `R1 = P(Z(x) > u) = 1 - exp(-1/u)`, the same for every region.
pub fn r1_expectation(u: f64) -> f64 {
    -(-1.0 / u).exp_m1()
}

/// Exact variance for the constant-`Theta` fixtures.
fn fixture_variance(model: &ExtremalModel, u: f64) -> Option<f64> {
    match model {
        ExtremalModel::CompleteDependence => Some(pair_excess(1.0, u)),
        ExtremalModel::Independence => Some(0.0),
        _ => None,
    }
}

fn floor_roundoff(v: f64) -> f64 {
    if v < 0.0 && v > -1e-12 {
        0.0
    } else {
        v
    }
}

fn scaled_radii(model: &ExtremalModel, lambda: f64, hmax: f64) -> Vec<f64> {
    model.feature_radii().into_iter().map(|r| r / lambda).filter(|&r| r > 0.0 && r < hmax).collect()
}

fn sorted_points(mut pts: Vec<f64>) -> Vec<f64> {
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Variance `R2(lambda A)` by the 1-D pair-distance integral
/// `int f(h, R) [exp(-Theta(lambda h)/u) - exp(-2/u)] dh`.
pub fn r2_variance_1d(model: &ExtremalModel, region: &Region, lambda: f64, u: f64) -> Result<f64> {
    Ok(r2_variance_1d_with(model, region, lambda, u, &QuadConfig::ONE_D)?.value)
}

pub fn r2_variance_1d_with(
    model: &ExtremalModel,
    region: &Region,
    lambda: f64,
    u: f64,
    cfg: &QuadConfig,
) -> Result<Evaluation> {
    model.validate()?;
    region.validate()?;
    check_lambda(lambda)?;
    check_u(u)?;
    if !model.is_isotropic() {
        return Err(Error::Unsupported("the 1-D variance route needs an isotropic model".into()));
    }
    if let Some(value) = fixture_variance(model, u) {
        return Ok(Evaluation { value, error: 0.0, provenance: Provenance::ClosedForm });
    }
    r2_1d_quadrature(model, region, lambda, u, cfg)
}

fn r2_1d_quadrature(model: &ExtremalModel, region: &Region, lambda: f64, u: f64, cfg: &QuadConfig) -> Result<Evaluation> {
    let hmax = region.max_distance();
    let mut pts = vec![0.0, hmax];
    if region.shape == Shape::Square {
        pts.push(region.r);
    }
    pts.extend(scaled_radii(model, lambda, hmax));
    let pts = sorted_points(pts);
    let failure = RefCell::new(None);
    let res = integrate(
        |h| match model.theta(lambda * h) {
            Ok(t) => distance_density(region, h) * pair_excess(t, u),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        &pts,
        cfg,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let r = res?;
    Ok(Evaluation { value: floor_roundoff(r.value), error: r.error, provenance: Provenance::Quadrature1D })
}

/// `+-sqrt(rho^2 - x^2)` for every radius that the vertical line at `x` crosses.
fn circle_cuts(x: f64, radii: &[f64], out: &mut Vec<f64>) {
    for &rho in radii {
        if x.abs() < rho {
            let y = (rho * rho - x * x).sqrt();
            out.push(y);
            out.push(-y);
        }
    }
}

fn clip_sorted(mut pts: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    pts.retain(|&p| p > lo && p < hi);
    pts.push(lo);
    pts.push(hi);
    sorted_points(pts)
}

/// Variance `R2(lambda A)` by the 2-D covariogram integral
/// `|A|^-2 int [exp(-Theta(lambda w)/u) - exp(-2/u)] |A ∩ (A + w)| dw`.
///
/// Works for anisotropic models. The covariogram is evaluated from the
/// actual coordinates of the region, including its center.
pub fn r2_variance_2d(model: &ExtremalModel, region: &Region, lambda: f64, u: f64) -> Result<f64> {
    Ok(r2_variance_2d_with(model, region, lambda, u, &QuadConfig::TWO_D)?.value)
}

pub fn r2_variance_2d_with(
    model: &ExtremalModel,
    region: &Region,
    lambda: f64,
    u: f64,
    cfg: &QuadConfig,
) -> Result<Evaluation> {
    model.validate()?;
    region.validate()?;
    check_lambda(lambda)?;
    check_u(u)?;
    if let Some(value) = fixture_variance(model, u) {
        return Ok(Evaluation { value, error: 0.0, provenance: Provenance::ClosedForm });
    }
    let area = region.area();
    let reach = region.max_distance();
    let radii = scaled_radii(model, lambda, reach);
    let integrand = |x: f64, y: f64| -> Result<f64> {
        let g = region.covariogram(Point::new(x, y));
        if g <= 0.0 {
            return Ok(0.0);
        }
        Ok(g * pair_excess(model.theta_vec(lambda * x, lambda * y)?, u))
    };
    let (outer, inner): (Vec<f64>, Box<dyn Fn(f64) -> Vec<f64> + '_>) = match region.shape {
        Shape::Disk => {
            let mut o = vec![0.0];
            o.extend(radii.iter().flat_map(|&r| [r, -r]));
            (
                clip_sorted(o, -reach, reach),
                Box::new(|x: f64| {
                    let y0 = (reach * reach - x * x).max(0.0).sqrt();
                    if y0 == 0.0 {
                        return Vec::new();
                    }
                    let mut pts = vec![0.0];
                    circle_cuts(x, &radii, &mut pts);
                    clip_sorted(pts, -y0, y0)
                }),
            )
        }
        Shape::Square => {
            let side = region.r;
            let mut o = vec![0.0];
            o.extend(radii.iter().flat_map(|&r| [r, -r]));
            (
                clip_sorted(o, -side, side),
                Box::new(move |x: f64| {
                    let mut pts = vec![0.0];
                    circle_cuts(x, &radii, &mut pts);
                    clip_sorted(pts, -side, side)
                }),
            )
        }
    };
    let total = integrate_guarded(integrand, &outer, inner, &scaled_cfg(cfg, area * area))?;
    Ok(Evaluation {
        value: floor_roundoff(total.0 / (area * area)),
        error: total.1 / (area * area),
        provenance: Provenance::Quadrature2D,
    })
}

fn scaled_cfg(cfg: &QuadConfig, factor: f64) -> QuadConfig {
    QuadConfig { abs_tol: cfg.abs_tol * factor, ..*cfg }
}

fn integrate_guarded<F, G>(f: F, outer: &[f64], inner: G, cfg: &QuadConfig) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> Result<f64>,
    G: Fn(f64) -> Vec<f64>,
{
    let failure = RefCell::new(None);
    let res = integrate_2d(
        |x, y| match f(x, y) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        outer,
        inner,
        cfg,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let r = res?;
    Ok((r.value, r.error))
}

/// Variance of the loss over `lambda (P_1 ∪ ... ∪ P_n)` for disjoint convex
/// polygons, the homothety being centered at the origin:
/// `|A|^-2 sum_ij int [exp(-Theta(lambda w)/u) - exp(-2/u)] |P_i ∩ (P_j + w)| dw`.
pub fn r2_variance_polygons(model: &ExtremalModel, polygons: &[ConvexPolygon], lambda: f64, u: f64) -> Result<f64> {
    Ok(r2_variance_polygons_with(model, polygons, lambda, u, &QuadConfig::TWO_D)?.value)
}

pub fn r2_variance_polygons_with(
    model: &ExtremalModel,
    polygons: &[ConvexPolygon],
    lambda: f64,
    u: f64,
    cfg: &QuadConfig,
) -> Result<Evaluation> {
    model.validate()?;
    check_lambda(lambda)?;
    check_u(u)?;
    if polygons.is_empty() {
        return Err(Error::InvalidParameter("at least one polygon is required".into()));
    }
    for (i, p) in polygons.iter().enumerate() {
        for q in &polygons[i + 1..] {
            if p.intersection_area(q) > 1e-12 * p.area().min(q.area()) {
                return Err(Error::InvalidParameter("polygons must have disjoint interiors".into()));
            }
        }
    }
    if let Some(value) = fixture_variance(model, u) {
        return Ok(Evaluation { value, error: 0.0, provenance: Provenance::ClosedForm });
    }
    let area: f64 = polygons.iter().map(ConvexPolygon::area).sum();
    let cfg = scaled_cfg(cfg, area * area / (polygons.len() * polygons.len()) as f64);
    let mut value = 0.0;
    let mut error = 0.0;
    for p in polygons {
        for q in polygons {
            // |P ∩ (Q + w)| > 0 only for w in P - Q.
            let (plo, phi) = p.bounds();
            let (qlo, qhi) = q.bounds();
            let (x0, x1) = (plo.x - qhi.x, phi.x - qlo.x);
            let (y0, y1) = (plo.y - qhi.y, phi.y - qlo.y);
            let reach = x0.abs().max(x1.abs()).hypot(y0.abs().max(y1.abs()));
            let radii = scaled_radii(model, lambda, reach);
            let kinks = |a: &[Point], b: &[Point], coord: fn(&Point) -> f64| -> Vec<f64> {
                a.iter().flat_map(|pa| b.iter().map(move |pb| coord(pa) - coord(pb))).collect()
            };
            let mut outer = kinks(&p.vertices, &q.vertices, |pt| pt.x);
            outer.push(0.0);
            outer.extend(radii.iter().flat_map(|&r| [r, -r]));
            let outer = clip_sorted(outer, x0, x1);
            let ykinks = kinks(&p.vertices, &q.vertices, |pt| pt.y);
            let (v, e) = integrate_guarded(
                |x, y| {
                    let g = p.cross_covariogram(q, Point::new(x, y));
                    if g <= 0.0 {
                        return Ok(0.0);
                    }
                    Ok(g * pair_excess(model.theta_vec(lambda * x, lambda * y)?, u))
                },
                &outer,
                |x| {
                    let mut pts = ykinks.clone();
                    pts.push(0.0);
                    circle_cuts(x, &radii, &mut pts);
                    clip_sorted(pts, y0, y1)
                },
                &cfg,
            )?;
            value += v;
            error += e;
        }
    }
    Ok(Evaluation {
        value: floor_roundoff(value / (area * area)),
        error: error / (area * area),
        provenance: Provenance::Quadrature2D,
    })
}

/// `lim_{lambda -> inf} R2(lambda A) = exp(-Theta(inf)/u) - exp(-2/u)`.
pub fn limiting_risk_measure(model: &ExtremalModel, u: f64) -> Result<f64> {
    model.validate()?;
    check_u(u)?;
    Ok(pair_excess(model.theta_at_infinity(), u))
}

/// Upper bound on `(2 pi / u) int_H^inf 2 h Phi_bar(c h^(a/2)) dh`, the tail of
/// `sigma^2` for `2 - Theta(h) = 2 Phi_bar(c h^(a/2))`.
///
/// With `t = c h^(a/2)` and `m = 4/a`, integration by parts gives
/// `int_H^inf 2h Phi_bar dh <= c^-m int_T^inf t^m phi(t) dt`, an incomplete gamma.
fn gaussian_tail_bound(c: f64, a: f64, h: f64, u: f64) -> f64 {
    let m = 4.0 / a;
    let t = c * h.powf(0.5 * a);
    let s = 0.5 * (m + 1.0);
    let moment = 2f64.powf(0.5 * (m - 1.0)) / (2.0 * PI).sqrt() * gamma(s) * gamma_ur(s, 0.5 * t * t);
    2.0 * PI / u * c.powf(-m) * moment
}

/// `sigma^2` for models with integrable `2 - Theta`.
pub fn sigma_squared(model: &ExtremalModel, u: f64) -> Result<SigmaSquared> {
    sigma_squared_with(model, u, &QuadConfig::ONE_D)
}

pub fn sigma_squared_with(model: &ExtremalModel, u: f64, cfg: &QuadConfig) -> Result<SigmaSquared> {
    model.validate()?;
    check_u(u)?;
    match *model {
        ExtremalModel::Schlather { .. } | ExtremalModel::GeometricGaussian { .. } => Err(Error::Divergent(format!(
            "{} model keeps Theta(inf) < 2, so int (2 - Theta) over the plane is infinite",
            model.name()
        ))),
        ExtremalModel::CompleteDependence => {
            Err(Error::Divergent("complete dependence keeps Theta = 1 at every distance".into()))
        }
        ExtremalModel::Independence => Ok(SigmaSquared { value: 0.0, error: 0.0, degenerate: true }),
        ExtremalModel::Tube { r_b } => {
            let r = radial_integral(model, u, &[0.0, r_b, 2.0 * r_b], cfg)?;
            Ok(SigmaSquared { value: r.0, error: r.1, degenerate: false })
        }
        ExtremalModel::Smith { sigma } => {
            let det = sigma[0][0] * sigma[1][1] - sigma[0][1] * sigma[1][0];
            // Theta(I) at h equals 2 Phi_bar(c h) with c = 1/2.
            let unit = ExtremalModel::smith_isotropic(1.0);
            let r = gaussian_radial(&unit, u, 0.5, 2.0, cfg)?;
            let scale = det.sqrt();
            Ok(SigmaSquared { value: scale * r.0, error: scale * r.1, degenerate: false })
        }
        ExtremalModel::BrownResnick { vario } => {
            let r = gaussian_radial(model, u, (0.5 * vario.eta).sqrt(), vario.a, cfg)?;
            Ok(SigmaSquared { value: r.0, error: r.1, degenerate: false })
        }
    }
}

fn radial_integral(model: &ExtremalModel, u: f64, pts: &[f64], cfg: &QuadConfig) -> Result<(f64, f64)> {
    let failure = RefCell::new(None);
    let res = integrate(
        |h| match model.theta(h) {
            Ok(t) => 2.0 * PI * h * pair_excess(t, u),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        pts,
        cfg,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let r = res?;
    Ok((r.value, r.error))
}

fn gaussian_radial(model: &ExtremalModel, u: f64, c: f64, a: f64, cfg: &QuadConfig) -> Result<(f64, f64)> {
    // Distance where c h^(a/2) = 1.
    let unit = c.powf(-2.0 / a);
    let mut cutoff = unit;
    let mut doublings = 0;
    while gaussian_tail_bound(c, a, cutoff, u) >= SIGMA_TAIL_BUDGET {
        cutoff *= 2.0;
        doublings += 1;
        if doublings > 1000 {
            return Err(Error::Divergent("no finite radial cutoff meets the tail budget".into()));
        }
    }
    let mut pts = vec![0.0];
    let mut b = unit * 2f64.powi(-10);
    while b < cutoff {
        pts.push(b);
        b *= 2.0;
    }
    pts.push(cutoff);
    let (v, e) = radial_integral(model, u, &pts, cfg)?;
    Ok((v, e + gaussian_tail_bound(c, a, cutoff, u)))
}

/// Constants of `R2(lambda A) ~ K2 lambda^-2`: `(0, sigma^2 / |A|, -2)`.
pub fn homogeneity_constants_variance(model: &ExtremalModel, region: &Region, u: f64) -> Result<HomogeneityConstants> {
    region.validate()?;
    let s = sigma_squared(model, u)?;
    Ok(HomogeneityConstants { k1: 0.0, k2: s.value / region.area(), order: -2.0 })
}

/// Constants of the Gaussian VaR asymptotics `R3(lambda A) ~ m + K2 / lambda`:
/// `(1 - exp(-1/u), sigma q_alpha / sqrt|A|, -1)`.
pub fn homogeneity_constants_var(model: &ExtremalModel, region: &Region, u: f64, alpha: f64) -> Result<HomogeneityConstants> {
    check_alpha(alpha)?;
    if alpha == 0.5 {
        return Err(Error::InvalidParameter(
            "alpha = 0.5 gives a vanishing first-order term, so the order -1 expansion does not hold".into(),
        ));
    }
    region.validate()?;
    let s = sigma_squared(model, u)?;
    Ok(HomogeneityConstants {
        k1: r1_expectation(u),
        k2: s.value.sqrt() * normal_quantile(alpha) / region.area().sqrt(),
        order: -1.0,
    })
}

/// Gaussian approximation `m + sigma q_alpha / (lambda sqrt|A|)` of the
/// level-`alpha` VaR of the loss over `lambda A`.
pub fn clt_gaussian_approx(model: &ExtremalModel, region: &Region, lambda: f64, u: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_lambda(lambda)?;
    region.validate()?;
    let s = sigma_squared(model, u)?;
    Ok(r1_expectation(u) + s.value.sqrt() * normal_quantile(alpha) / (lambda * region.area().sqrt()))
}

/// Unit-Fréchet threshold equivalent to the threshold `u1` on `GEV(mu, sigma, xi)`
/// margins: `[1 + xi (u1 - mu)/sigma]^(1/xi)`, or `exp((u1 - mu)/sigma)` when
/// `|xi| < 1e-12`.
pub fn gev_to_frechet_threshold(params: &GevParams, u1: f64) -> Result<f64> {
    let GevParams { mu, sigma, xi } = *params;
    if !(sigma > 0.0 && sigma.is_finite()) || !mu.is_finite() || !xi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "GEV parameters must be finite with positive scale, got mu={mu} sigma={sigma} xi={xi}"
        )));
    }
    if !u1.is_finite() {
        return Err(Error::InvalidThreshold(format!("threshold must be finite, got {u1}")));
    }
    let z = (u1 - mu) / sigma;
    let u = if xi.abs() < 1e-12 {
        z.exp()
    } else {
        let t = xi * z;
        if !(1.0 + t > 0.0) {
            return Err(Error::InvalidThreshold(format!(
                "1 + xi (u1 - mu)/sigma = {} is not positive",
                1.0 + t
            )));
        }
        (t.ln_1p() / xi).exp()
    };
    if u > 0.0 && u.is_finite() {
        Ok(u)
    } else {
        Err(Error::InvalidThreshold(format!("transformed threshold {u} is not a positive finite number")))
    }
}

/// Evaluates the query on an ascending `lambda` grid. Points are computed in
/// parallel; each is an independent quadrature, so results do not depend on
/// scheduling.
pub fn risk_curve(query: &RiskQuery, lambdas: &[f64]) -> Result<RiskCurve> {
    query.validate()?;
    if lambdas.is_empty() {
        return Err(Error::InvalidParameter("lambda grid is empty".into()));
    }
    for &l in lambdas {
        check_lambda(l)?;
    }
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("lambda grid must be strictly ascending".into()));
    }
    let RiskQuery { model, region, u, kind } = *query;
    match kind {
        RiskKind::Expectation => {
            let m = r1_expectation(u);
            Ok(RiskCurve {
                lambdas: lambdas.to_vec(),
                values: vec![m; lambdas.len()],
                limit: Some(m),
                provenance: Provenance::ClosedForm,
                err_estimate: vec![0.0; lambdas.len()],
            })
        }
        RiskKind::Variance => {
            let points: Vec<Evaluation> = lambdas
                .par_iter()
                .map(|&l| {
                    if model.is_isotropic() {
                        r2_variance_1d_with(&model, &region, l, u, &QuadConfig::ONE_D)
                    } else {
                        r2_variance_2d_with(&model, &region, l, u, &QuadConfig::TWO_D)
                    }
                })
                .collect::<Result<_>>()?;
            Ok(RiskCurve {
                lambdas: lambdas.to_vec(),
                values: points.iter().map(|e| e.value).collect(),
                limit: Some(limiting_risk_measure(&model, u)?),
                provenance: points[0].provenance,
                err_estimate: points.iter().map(|e| e.error).collect(),
            })
        }
        RiskKind::VaR { .. } => Err(Error::Unsupported(
            "VaR has no quadrature route; use simulation::var_curve or clt_gaussian_approx".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::CorrelationFamily;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const E1_MINUS_E2: f64 = 0.2325441579348296297;

    fn smith() -> ExtremalModel {
        ExtremalModel::smith_isotropic(1.0)
    }

    #[test]
    fn expectation_examples() {
        assert!((r1_expectation(1.0) - 0.63212055882855767840).abs() < 1e-15);
        assert!((r1_expectation(0.5) - 0.86466471676338730810).abs() < 1e-15);
        assert_eq!(r1_expectation(f64::INFINITY), 0.0);
    }

    #[test]
    fn complete_dependence_is_exact() {
        let m = ExtremalModel::CompleteDependence;
        for region in [Region::disk(1.0), Region::square(3.0), Region::disk(0.2).with_center(Point::new(4.0, -1.0))] {
            for lambda in [0.3, 1.0, 17.0] {
                let v = r2_variance_1d(&m, &region, lambda, 1.0).unwrap();
                assert!((v - E1_MINUS_E2).abs() < 1e-12);
                let v = r2_variance_2d(&m, &region, lambda, 1.0).unwrap();
                assert!((v - E1_MINUS_E2).abs() < 1e-12);
                // The generic quadrature agrees to its own tolerance.
                let q = r2_1d_quadrature(&m, &region, lambda, 1.0, &QuadConfig::ONE_D).unwrap();
                assert!((q.value - E1_MINUS_E2).abs() < 1e-9);
            }
        }
        let u = 2.5;
        let v = r2_variance_1d(&m, &Region::square(1.0), 1.0, u).unwrap();
        assert!((v - ((-1.0 / u).exp() - (-2.0 / u).exp())).abs() < 1e-12);
    }

    #[test]
    fn independence_vanishes() {
        let m = ExtremalModel::Independence;
        assert_eq!(r2_variance_2d(&m, &Region::square(1.0), 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(r2_variance_1d(&m, &Region::disk(1.0), 3.0, 0.7).unwrap(), 0.0);
        let q = r2_1d_quadrature(&m, &Region::disk(1.0), 1.0, 1.0, &QuadConfig::ONE_D).unwrap();
        assert_eq!(q.value, 0.0);
    }

    #[test]
    fn smith_square_reference_values() {
        for (lambda, want) in [(1.0, 0.165970602446014), (2.0, 0.118090627383927), (5.0, 0.0468814029687862)] {
            let one = r2_variance_1d(&smith(), &Region::square(1.0), lambda, 1.0).unwrap();
            assert!((one - want).abs() < 1e-9, "lambda {lambda}: {one}");
            let two = r2_variance_2d(&smith(), &Region::square(1.0), lambda, 1.0).unwrap();
            assert!((two - want).abs() < 1e-6, "lambda {lambda}: {two}");
        }
    }

    #[test]
    fn disk_reference_values() {
        let tube = ExtremalModel::tube(1.0);
        let v = r2_variance_1d(&tube, &Region::disk(1.0), 1.0, 1.0).unwrap();
        assert!((v - 0.0848776917320339296).abs() < 1e-9);
        let v = r2_variance_1d(&tube, &Region::disk(1.0), 3.0, 1.0).unwrap();
        assert!((v - 0.0158174517644410750).abs() < 1e-9);
        let v = r2_variance_1d(&smith(), &Region::disk(1.0), 2.0, 2.0).unwrap();
        assert!((v - 0.0855441749777779580).abs() < 1e-9);
    }

    #[test]
    fn routes_agree_on_disk() {
        let one = r2_variance_1d(&smith(), &Region::disk(1.0), 2.0, 1.0).unwrap();
        let two = r2_variance_2d(&smith(), &Region::disk(1.0), 2.0, 1.0).unwrap();
        assert!((one - two).abs() < 1e-6, "{one} vs {two}");
        let tube = ExtremalModel::tube(0.7);
        let one = r2_variance_1d(&tube, &Region::disk(1.3), 1.7, 0.8).unwrap();
        let two = r2_variance_2d(&tube, &Region::disk(1.3), 1.7, 0.8).unwrap();
        assert!((one - two).abs() < 1e-6, "{one} vs {two}");
    }

    #[test]
    fn polygon_route_matches_region_route() {
        let sq = Region::square(1.0);
        let poly = sq.to_polygon().unwrap();
        let a = r2_variance_polygons(&smith(), std::slice::from_ref(&poly), 2.0, 1.0).unwrap();
        let b = r2_variance_1d(&smith(), &sq, 2.0, 1.0).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        let halves = [
            ConvexPolygon::new(vec![Point::new(-0.5, -0.5), Point::new(0.0, -0.5), Point::new(0.0, 0.5), Point::new(-0.5, 0.5)])
                .unwrap(),
            ConvexPolygon::new(vec![Point::new(0.0, -0.5), Point::new(0.5, -0.5), Point::new(0.5, 0.5), Point::new(0.0, 0.5)])
                .unwrap(),
        ];
        let c = r2_variance_polygons(&smith(), &halves, 2.0, 1.0).unwrap();
        assert!((c - b).abs() < 1e-6, "{c} vs {b}");
        let overlapping = [poly.clone(), poly];
        assert!(r2_variance_polygons(&smith(), &overlapping, 1.0, 1.0).is_err());
    }

    #[test]
    fn tube_vanishes_at_large_scale() {
        let v = r2_variance_1d(&ExtremalModel::tube(1.0), &Region::disk(1.0), 1e3, 1.0).unwrap();
        assert!(v < 1e-4 && v > 0.0);
    }

    #[test]
    fn limiting_values() {
        let corr = CorrelationFamily::cauchy(1.0, 1.0).unwrap();
        let s = limiting_risk_measure(&ExtremalModel::schlather(corr), 1.0).unwrap();
        assert!((s - 0.046054551413002472479).abs() < 1e-15);
        let g = limiting_risk_measure(&ExtremalModel::geometric_gaussian(1.0, corr), 1.0).unwrap();
        assert!((g - 0.083267301816938157528).abs() < 1e-15);
        assert_eq!(limiting_risk_measure(&smith(), 1.0).unwrap(), 0.0);
        assert!(limiting_risk_measure(&smith(), 0.0).is_err());
    }

    #[test]
    fn limit_vanishes_exactly_for_asymptotic_independence() {
        let corr = CorrelationFamily::powered_exponential(1.0, 1.0).unwrap();
        let zoo = [
            smith(),
            ExtremalModel::smith([[2.0, 0.3], [0.3, 1.0]]).unwrap(),
            ExtremalModel::brown_resnick(1.0, 1.5).unwrap(),
            ExtremalModel::tube(0.5),
            ExtremalModel::schlather(corr),
            ExtremalModel::geometric_gaussian(0.4, corr),
            ExtremalModel::CompleteDependence,
            ExtremalModel::Independence,
        ];
        for m in zoo {
            let limit = limiting_risk_measure(&m, 1.0).unwrap();
            assert_eq!(m.theta_at_infinity() == 2.0, limit == 0.0, "{}", m.name());
        }
    }

    #[test]
    fn sigma_squared_reference_values() {
        let t = sigma_squared(&ExtremalModel::tube(1.0), 1.0).unwrap();
        assert!((t.value - 0.54524700562228440293).abs() < 1e-9);
        assert!(!t.degenerate);
        let s = sigma_squared(&smith(), 1.0).unwrap();
        assert!((s.value - 2.0742083481923638558).abs() < 1e-9);
        let b = sigma_squared(&ExtremalModel::brown_resnick(1.0, 1.0).unwrap(), 1.0).unwrap();
        assert!((b.value - 5.5315243127160176732).abs() < 1e-9);
        // Smith(I) is Brown-Resnick with gamma(h) = h^2 / 2.
        let b = sigma_squared(&ExtremalModel::brown_resnick(0.5, 2.0).unwrap(), 1.0).unwrap();
        assert!((b.value - s.value).abs() < 1e-9);
    }

    #[test]
    fn sigma_squared_tube_monte_carlo() {
        let tube = ExtremalModel::tube(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 400_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let x: f64 = rng.random_range(-2.0..2.0);
            let y: f64 = rng.random_range(-2.0..2.0);
            let v = 16.0 * pair_excess(tube.theta(x.hypot(y)).unwrap(), 1.0);
            sum += v;
            sum2 += v * v;
        }
        let mean = sum / n as f64;
        let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
        let exact = sigma_squared(&tube, 1.0).unwrap().value;
        assert!((mean - exact).abs() < 4.0 * se, "{mean} +- {se} vs {exact}");
    }

    #[test]
    fn anisotropic_sigma_squared_matches_planar_quadrature() {
        let sigma = [[4.0, 0.6], [0.6, 1.0]];
        let m = ExtremalModel::smith(sigma).unwrap();
        let s = sigma_squared(&m, 1.0).unwrap().value;
        let l = 30.0;
        let (v, _) = integrate_guarded(
            |x, y| Ok(pair_excess(m.theta_vec(x, y)?, 1.0)),
            &[-l, 0.0, l],
            |_| vec![-l, 0.0, l],
            &QuadConfig::TWO_D.with_abs_tol(1e-8),
        )
        .unwrap();
        assert!((s - v).abs() < 1e-6, "{s} vs {v}");
    }

    #[test]
    fn sigma_squared_rejections() {
        let corr = CorrelationFamily::whittle_matern(1.0, 1.0).unwrap();
        assert!(matches!(sigma_squared(&ExtremalModel::schlather(corr), 1.0), Err(Error::Divergent(_))));
        assert!(matches!(
            sigma_squared(&ExtremalModel::geometric_gaussian(1.0, corr), 1.0),
            Err(Error::Divergent(_))
        ));
        assert!(matches!(sigma_squared(&ExtremalModel::CompleteDependence, 1.0), Err(Error::Divergent(_))));
        let d = sigma_squared(&ExtremalModel::Independence, 1.0).unwrap();
        assert!(d.degenerate && d.value == 0.0);
    }

    #[test]
    fn tail_bound_dominates_tail() {
        for (c, a) in [(0.5, 2.0), (0.7, 1.0), (1.0, 0.5)] {
            for h in [0.5, 2.0, 6.0] {
                let exact = integrate(
                    |x| 2.0 * PI * x * 2.0 * crate::special::normal_sf(c * x.powf(0.5 * a)),
                    &[h, 2.0 * h, 10.0 * h, 100.0 * h, 1e4 * h],
                    &QuadConfig::ONE_D.with_abs_tol(1e-300).with_rel_tol(1e-10),
                )
                .unwrap()
                .value;
                let bound = gaussian_tail_bound(c, a, h, 1.0);
                assert!(bound >= exact * (1.0 - 1e-9), "c {c} a {a} h {h}: {bound} < {exact}");
            }
        }
    }

    #[test]
    fn homogeneity_constants() {
        let tube = ExtremalModel::tube(1.0);
        let s_tube = 0.54524700562228440293;
        let k = homogeneity_constants_variance(&tube, &Region::disk(1.0), 1.0).unwrap();
        assert_eq!((k.k1, k.order), (0.0, -2.0));
        assert!((k.k2 - s_tube / PI).abs() < 1e-9);
        let s_smith = 2.0742083481923638558;
        let k = homogeneity_constants_variance(&smith(), &Region::square(2.0), 1.0).unwrap();
        assert!((k.k2 - s_smith / 4.0).abs() < 1e-9);
        let corr = CorrelationFamily::cauchy(1.0, 1.0).unwrap();
        assert!(homogeneity_constants_variance(&ExtremalModel::schlather(corr), &Region::disk(1.0), 1.0).is_err());

        let k = homogeneity_constants_var(&smith(), &Region::square(1.0), 1.0, 0.9).unwrap();
        assert!((k.k1 - 0.63212055882855767840).abs() < 1e-15);
        assert!((k.k2 - s_smith.sqrt() * 1.2815515655446004).abs() < 1e-9);
        assert_eq!(k.order, -1.0);
        assert!(homogeneity_constants_var(&smith(), &Region::square(1.0), 1.0, 0.5).is_err());
        let k = homogeneity_constants_var(&smith(), &Region::square(1.0), 1.0, 0.1).unwrap();
        assert!(k.k2 < 0.0);
    }

    #[test]
    fn clt_approximation() {
        let tube = ExtremalModel::tube(1.0);
        let d = Region::disk(1.0);
        let m = r1_expectation(1.0);
        let v = clt_gaussian_approx(&tube, &d, 20.0, 1.0, 0.9).unwrap();
        let want = m + 0.54524700562228440293f64.sqrt() * 1.2815515655446004 / (20.0 * PI.sqrt());
        assert!((v - want).abs() < 1e-9);
        assert_eq!(clt_gaussian_approx(&tube, &d, 3.0, 1.0, 0.5).unwrap(), m);
        assert!((clt_gaussian_approx(&tube, &d, 1e12, 1.0, 0.9).unwrap() - m).abs() < 1e-12);
    }

    #[test]
    fn gev_threshold() {
        let p = |mu, sigma, xi| GevParams { mu, sigma, xi };
        assert_eq!(gev_to_frechet_threshold(&p(0.0, 1.0, 0.0), 0.0).unwrap(), 1.0);
        assert!((gev_to_frechet_threshold(&p(0.0, 1.0, 1.0), 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(gev_to_frechet_threshold(&p(0.0, 1.0, -1.0), 2.0), Err(Error::InvalidThreshold(_))));
        assert!(gev_to_frechet_threshold(&p(0.0, 0.0, 0.1), 1.0).is_err());
        for (mu, sigma, u1) in [(0.0, 1.0, 1.0), (10.0, 2.0, 14.0), (-3.0, 0.5, -2.0), (1.0, 3.0, -2.0)] {
            let a = gev_to_frechet_threshold(&p(mu, sigma, 1e-9), u1).unwrap();
            let b = gev_to_frechet_threshold(&p(mu, sigma, 0.0), u1).unwrap();
            let c = gev_to_frechet_threshold(&p(mu, sigma, -1e-9), u1).unwrap();
            assert!((a - b).abs() < 1e-7 && (c - b).abs() < 1e-7);
        }
    }

    #[test]
    fn curves() {
        let lambdas: Vec<f64> = (1..=30).map(f64::from).collect();
        let q = RiskQuery::new(smith(), Region::disk(1.0), 1.0, RiskKind::Variance).unwrap();
        let c = risk_curve(&q, &lambdas).unwrap();
        assert_eq!(c.provenance, Provenance::Quadrature1D);
        assert!(c.values.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(c.limit, Some(0.0));
        assert!(c.values[29] < 1e-3);

        let corr = CorrelationFamily::powered_exponential(1.0, 0.5).unwrap();
        let q = RiskQuery::new(ExtremalModel::schlather(corr), Region::square(1.0), 1.0, RiskKind::Variance).unwrap();
        let c = risk_curve(&q, &lambdas).unwrap();
        let limit = c.limit.unwrap();
        assert!((limit - 0.046054551413002472479).abs() < 1e-15);
        assert!(c.values.windows(2).all(|w| w[1] <= w[0]));
        assert!(c.values.iter().all(|&v| v > limit));

        let q = RiskQuery::new(ExtremalModel::tube(1.0), Region::square(1.0), 1.0, RiskKind::Expectation).unwrap();
        let c = risk_curve(&q, &lambdas).unwrap();
        assert!(c.values.iter().all(|&v| v == r1_expectation(1.0)));

        let q = RiskQuery::new(smith(), Region::disk(1.0), 1.0, RiskKind::VaR { alpha: 0.9 }).unwrap();
        assert!(matches!(risk_curve(&q, &lambdas), Err(Error::Unsupported(_))));
        let q = RiskQuery::new(smith(), Region::disk(1.0), 1.0, RiskKind::Variance).unwrap();
        assert!(risk_curve(&q, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn anisotropic_curve_uses_planar_route() {
        let m = ExtremalModel::smith([[4.0, 0.0], [0.0, 1.0]]).unwrap();
        let q = RiskQuery::new(m, Region::square(1.0), 1.0, RiskKind::Variance).unwrap();
        let c = risk_curve(&q, &[1.0, 2.0]).unwrap();
        assert_eq!(c.provenance, Provenance::Quadrature2D);
        assert!(c.values[1] < c.values[0]);
    }

    #[test]
    fn curve_is_independent_of_thread_count() {
        let q = RiskQuery::new(ExtremalModel::tube(1.0), Region::square(1.0), 1.0, RiskKind::Variance).unwrap();
        let lambdas = [0.5, 1.0, 2.0, 4.0, 8.0];
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| risk_curve(&q, &lambdas).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(
            a.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn order_minus_two() {
        let tube = ExtremalModel::tube(1.0);
        let d = Region::disk(1.0);
        let s = sigma_squared(&tube, 1.0).unwrap().value;
        let v = r2_variance_1d(&tube, &d, 50.0, 1.0).unwrap();
        assert!((2500.0 * d.area() * v / s - 1.0).abs() < 0.02);
        let s = sigma_squared(&smith(), 1.0).unwrap().value;
        for region in [Region::disk(1.0), Region::square(1.0)] {
            let v = r2_variance_1d(&smith(), &region, 200.0, 1.0).unwrap();
            assert!((4e4 * region.area() * v / s - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn small_tubes_leave_the_variance_unchanged_by_scaling() {
        let d = Region::disk(1.0);
        let gaps: Vec<f64> = [1.0, 0.1, 0.01]
            .iter()
            .map(|&rb| {
                let m = ExtremalModel::tube(rb);
                (r2_variance_1d(&m, &d, 3.0, 1.0).unwrap() - r2_variance_1d(&m, &d, 1.0, 1.0).unwrap()).abs()
            })
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] < 1e-4, "{gaps:?}");
    }

    #[test]
    fn variance_is_non_increasing_across_the_zoo() {
        let zoo = [
            smith(),
            ExtremalModel::brown_resnick(0.5, 1.0).unwrap(),
            ExtremalModel::tube(0.4),
            ExtremalModel::schlather(CorrelationFamily::whittle_matern(0.5, 1.5).unwrap()),
            ExtremalModel::schlather(CorrelationFamily::cauchy(1.0, 0.5).unwrap()),
            ExtremalModel::geometric_gaussian(2.0, CorrelationFamily::powered_exponential(0.3, 1.5).unwrap()),
        ];
        let lambdas = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 13.0, 20.0];
        for m in zoo {
            for region in [Region::disk(1.0), Region::square(1.0)] {
                let q = RiskQuery::new(m, region, 1.3, RiskKind::Variance).unwrap();
                let c = risk_curve(&q, &lambdas).unwrap();
                assert!(c.values.windows(2).all(|w| w[1] <= w[0] + 1e-10), "{} {:?}", m.name(), c.values);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn variance_is_bounded(lambda in 0.05..40.0f64, u in 0.1..10.0f64, rb in 0.1..3.0f64, square in any::<bool>()) {
            let region = if square { Region::square(1.0) } else { Region::disk(1.0) };
            for m in [smith(), ExtremalModel::tube(rb)] {
                let v = r2_variance_1d(&m, &region, lambda, u).unwrap();
                prop_assert!((0.0..=0.25).contains(&v));
                prop_assert!(v <= pair_excess(1.0, u) + 1e-12);
            }
        }
    }
}
