//! Simulation of max-stable fields on lattices and Monte-Carlo risk estimates.
//!
//! Replicate `i` of a run with seed `s` draws from `ChaCha8` stream `i` of key
//! `s`, so results are reproducible and independent of the worker count.

mod engine;
mod gaussian;
mod grid;
mod raster;
mod stats;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use engine::{SimulationConfig, TruncationKind, TruncationReport, CHOLESKY_MAX_SITES};
pub use gaussian::{CirculantEmbedding, CirculantScratch, Cholesky};
pub use grid::{GridSpec, Lattice};
pub use raster::{read_raster, write_raster, Raster, RasterCell};
pub use stats::{
    chi_square_test, kolmogorov_sf, ks_test, lower_quantile, moments, pairwise_theta_estimate, MomentEstimate,
    QuantileEstimate, ThetaEstimate,
};

use engine::{FieldSimulator, Scratch, Sites};

use crate::error::{Error, Result};
use crate::geometry::{Point, Region};
use crate::models::ExtremalModel;
use crate::risk::{check_alpha, check_lambda, check_u, r1_expectation, Provenance, RiskCurve, RiskKind, RiskQuery};

/// One realization of the field at the in-region sites of a grid, in
/// row-major site order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub seed: u64,
    pub replicate: u64,
    pub model: ExtremalModel,
    pub truncation: TruncationReport,
}

/// Riemann-sum loss: fraction of grid sites where the field exceeds `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSample {
    pub l_n: f64,
    pub u: f64,
    pub seed: u64,
    pub replicate: u64,
}

/// Monte-Carlo settings shared by the curve and audit front ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    /// Grid cells along the side (square) or diameter (disk) of the base region.
    pub m_per_unit: usize,
    pub replicates: usize,
    pub seed: u64,
    pub sim: SimulationConfig,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { m_per_unit: 7, replicates: 10_000, seed: 42, sim: SimulationConfig::default() }
    }
}

/// Seed for the `k`-th point of a curve (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed.wrapping_add(k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn simulate_field(model: &ExtremalModel, grid: &GridSpec, seed: u64) -> Result<FieldSample> {
    simulate_field_with(model, grid, seed, 0, &SimulationConfig::default())
}

pub fn simulate_field_with(
    model: &ExtremalModel,
    grid: &GridSpec,
    seed: u64,
    replicate: u64,
    config: &SimulationConfig,
) -> Result<FieldSample> {
    let sim = FieldSimulator::new(model, Sites::Lattice(grid.lattice()?), *config)?;
    let (values, truncation) = sim.sample(seed, replicate, &mut Scratch::default())?;
    Ok(FieldSample { grid: *grid, values, seed, replicate, model: *model, truncation })
}

/// `replicates` independent realizations at arbitrary sites, replicate-major.
pub fn simulate_points(
    model: &ExtremalModel,
    points: &[Point],
    replicates: usize,
    seed: u64,
    config: &SimulationConfig,
) -> Result<(Vec<Vec<f64>>, TruncationReport)> {
    let sim = FieldSimulator::new(model, Sites::Points(points.to_vec()), *config)?;
    let out: Vec<(Vec<f64>, TruncationReport)> = (0..replicates as u64)
        .into_par_iter()
        .map_init(Scratch::default, |s, i| sim.sample(seed, i, s))
        .collect::<Result<_>>()?;
    let mut report = sim.report();
    let mut values = Vec::with_capacity(out.len());
    for (v, r) in out {
        report.merge(&r);
        values.push(v);
    }
    Ok((values, report))
}

pub fn loss_sample(field: &FieldSample, u: f64) -> Result<LossSample> {
    check_u(u)?;
    let n = field.values.len();
    if n == 0 {
        return Err(Error::InvalidParameter("field has no sites".into()));
    }
    let above = field.values.iter().filter(|&&z| z > u).count();
    Ok(LossSample { l_n: above as f64 / n as f64, u, seed: field.seed, replicate: field.replicate })
}

/// Loss samples for `replicates` independent fields on `grid`.
///
/// Only the part of each field that can exceed `u` is simulated: storms with
/// `zeta * max f <= u` and spectral terms with `zeta * C <= u` are skipped,
/// which leaves the exceedance indicators unchanged.
pub fn loss_samples(
    model: &ExtremalModel,
    grid: &GridSpec,
    u: f64,
    replicates: usize,
    seed: u64,
    config: &SimulationConfig,
) -> Result<(Vec<f64>, TruncationReport)> {
    check_u(u)?;
    let sim = FieldSimulator::new(model, Sites::Lattice(grid.lattice()?), *config)?;
    let out: Vec<(f64, TruncationReport)> = (0..replicates as u64)
        .into_par_iter()
        .map_init(Scratch::default, |s, i| sim.exceedance_fraction(u, seed, i, s))
        .collect::<Result<_>>()?;
    let mut report = sim.report();
    let mut losses = Vec::with_capacity(out.len());
    for (l, r) in out {
        report.merge(&r);
        losses.push(l);
    }
    Ok((losses, report))
}

/// Mean and variance of the loss over `replicates >= 2` fields.
pub fn empirical_var(model: &ExtremalModel, grid: &GridSpec, u: f64, replicates: usize, seed: u64) -> Result<MomentEstimate> {
    if replicates < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 replicates, got {replicates}")));
    }
    let (losses, _) = loss_samples(model, grid, u, replicates, seed, &SimulationConfig::default())?;
    moments(&losses)
}

/// Level-`alpha` value-at-risk of the loss: the `ceil(alpha S)`-th smallest of
/// `S >= 100` loss samples.
pub fn empirical_var_at_risk(
    model: &ExtremalModel,
    grid: &GridSpec,
    u: f64,
    alpha: f64,
    replicates: usize,
    seed: u64,
) -> Result<f64> {
    Ok(empirical_var_at_risk_detailed(model, grid, u, alpha, replicates, seed, &SimulationConfig::default())?.value)
}

pub fn empirical_var_at_risk_detailed(
    model: &ExtremalModel,
    grid: &GridSpec,
    u: f64,
    alpha: f64,
    replicates: usize,
    seed: u64,
    config: &SimulationConfig,
) -> Result<QuantileEstimate> {
    check_alpha(alpha)?;
    if replicates < 100 {
        return Err(Error::InvalidParameter(format!("need at least 100 replicates for a quantile, got {replicates}")));
    }
    let (mut losses, _) = loss_samples(model, grid, u, replicates, seed, config)?;
    losses.sort_by(f64::total_cmp);
    lower_quantile(&losses, alpha)
}

/// Monte-Carlo risk curve. Point `k` uses seed `derive_seed(mc.seed, k)`.
///
/// Error estimates are standard errors: of the mean, jackknife for the
/// variance, order-statistic band for VaR.
pub fn mc_curve(query: &RiskQuery, lambdas: &[f64], mc: &McConfig) -> Result<RiskCurve> {
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
    let min_reps = if matches!(query.kind, RiskKind::VaR { .. }) { 100 } else { 2 };
    if mc.replicates < min_reps {
        return Err(Error::InvalidParameter(format!("need at least {min_reps} replicates, got {}", mc.replicates)));
    }
    let mut values = Vec::with_capacity(lambdas.len());
    let mut errs = Vec::with_capacity(lambdas.len());
    for (k, &lambda) in lambdas.iter().enumerate() {
        let grid = GridSpec::new(query.region, lambda, mc.m_per_unit)?;
        let (mut losses, _) = loss_samples(&query.model, &grid, query.u, mc.replicates, derive_seed(mc.seed, k as u64), &mc.sim)?;
        let (v, e) = match query.kind {
            RiskKind::Expectation => {
                let m = moments(&losses)?;
                (m.mean, m.mean_stderr)
            }
            RiskKind::Variance => {
                let m = moments(&losses)?;
                (m.variance, m.variance_stderr)
            }
            RiskKind::VaR { alpha } => {
                losses.sort_by(f64::total_cmp);
                let q = lower_quantile(&losses, alpha)?;
                (q.value, q.stderr)
            }
        };
        values.push(v);
        errs.push(e);
    }
    let limit = match query.kind {
        RiskKind::Expectation => Some(r1_expectation(query.u)),
        RiskKind::Variance => Some(crate::risk::limiting_risk_measure(&query.model, query.u)?),
        RiskKind::VaR { .. } => (query.model.theta_at_infinity() == 2.0).then(|| r1_expectation(query.u)),
    };
    Ok(RiskCurve { lambdas: lambdas.to_vec(), values, limit, provenance: Provenance::MonteCarlo, err_estimate: errs })
}

/// Monte-Carlo VaR curve `lambda -> R3_alpha(lambda A)`.
pub fn var_curve(
    model: &ExtremalModel,
    region: &Region,
    u: f64,
    alpha: f64,
    lambdas: &[f64],
    mc: &McConfig,
) -> Result<RiskCurve> {
    let q = RiskQuery::new(*model, *region, u, RiskKind::VaR { alpha })?;
    mc_curve(&q, lambdas, mc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::CorrelationFamily;
    use crate::risk::r2_variance_1d;
    use crate::special::normal_cdf;

    fn frechet_cdf(z: f64) -> f64 {
        if z <= 0.0 {
            0.0
        } else {
            (-1.0 / z).exp()
        }
    }

    fn zoo() -> Vec<ExtremalModel> {
        vec![
            ExtremalModel::tube(1.0),
            ExtremalModel::smith_isotropic(1.0),
            ExtremalModel::smith([[2.0, 0.5], [0.5, 1.0]]).unwrap(),
            ExtremalModel::schlather(CorrelationFamily::whittle_matern(1.0, 1.0).unwrap()),
            ExtremalModel::geometric_gaussian(1.0, CorrelationFamily::cauchy(1.0, 1.0).unwrap()),
            ExtremalModel::brown_resnick(1.0, 1.0).unwrap(),
        ]
    }

    #[test]
    fn tube_marginals_on_unit_grid() {
        let grid = GridSpec::new(Region::square(1.0), 1.0, 7).unwrap();
        let sim = FieldSimulator::new(&ExtremalModel::tube(1.0), Sites::Lattice(grid.lattice().unwrap()), SimulationConfig::default())
            .unwrap();
        let mut scratch = Scratch::default();
        let site: Vec<f64> = (0..10_000).map(|i| sim.sample(1, i, &mut scratch).unwrap().0[24]).collect();
        assert!(ks_test(&site, frechet_cdf).1 > 1e-3);
        assert_eq!(sim.report().kind, TruncationKind::Exact);
    }

    #[test]
    fn marginals_across_models() {
        let pts = [Point::new(0.0, 0.0), Point::new(0.7, 0.2)];
        for m in zoo() {
            let (v, report) = simulate_points(&m, &pts, 4000, 7, &SimulationConfig::default()).unwrap();
            assert!(v.iter().flatten().all(|&z| z > 0.0));
            let first: Vec<f64> = v.iter().map(|r| r[0]).collect();
            assert!(ks_test(&first, frechet_cdf).1 > 1e-3, "{}", m.name());
            assert!(report.bound < 1e-3);
            assert_eq!(report.budget_hits, 0);
        }
    }

    #[test]
    fn smith_pairwise_coefficient() {
        let pts = [Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        let (v, _) = simulate_points(&ExtremalModel::smith_isotropic(1.0), &pts, 10_000, 3, &SimulationConfig::default()).unwrap();
        let a: Vec<f64> = v.iter().map(|r| r[0]).collect();
        let b: Vec<f64> = v.iter().map(|r| r[1]).collect();
        let t = pairwise_theta_estimate(&a, &b, 1.0).unwrap();
        assert!((t.value - 2.0 * normal_cdf(0.5)).abs() < 3.0 * t.stderr, "{t:?}");
    }

    #[test]
    fn tube_sites_beyond_two_radii_are_independent() {
        let pts = [Point::new(0.0, 0.0), Point::new(2.5, 0.0)];
        let (v, _) = simulate_points(&ExtremalModel::tube(1.0), &pts, 10_000, 4, &SimulationConfig::default()).unwrap();
        let a: Vec<f64> = v.iter().map(|r| r[0]).collect();
        let b: Vec<f64> = v.iter().map(|r| r[1]).collect();
        let t = pairwise_theta_estimate(&a, &b, 1.0).unwrap();
        assert!((t.value - 2.0).abs() < 3.0 * t.stderr, "{t:?}");
    }

    #[test]
    fn loss_extremes() {
        let grid = GridSpec::new(Region::square(1.0), 1.0, 3).unwrap();
        let mut f = simulate_field(&ExtremalModel::tube(1.0), &grid, 1).unwrap();
        f.values = vec![0.5; 9];
        assert_eq!(loss_sample(&f, 1.0).unwrap().l_n, 0.0);
        f.values = vec![2.0; 9];
        assert_eq!(loss_sample(&f, 1.0).unwrap().l_n, 1.0);
        assert!(loss_sample(&f, 0.0).is_err());
    }

    #[test]
    fn exceedance_path_agrees_with_full_fields() {
        // Same law through two different code paths.
        let grid = GridSpec::new(Region::disk(1.0), 1.5, 7).unwrap();
        for m in [ExtremalModel::tube(0.6), ExtremalModel::smith([[0.5, 0.1], [0.1, 0.3]]).unwrap()] {
            let s = 4000;
            let (fast, _) = loss_samples(&m, &grid, 1.0, s, 21, &SimulationConfig::default()).unwrap();
            let slow: Vec<f64> = (0..s as u64)
                .map(|i| {
                    let f = simulate_field_with(&m, &grid, 22, i, &SimulationConfig::default()).unwrap();
                    loss_sample(&f, 1.0).unwrap().l_n
                })
                .collect();
            let a = moments(&fast).unwrap();
            let b = moments(&slow).unwrap();
            let z = (a.mean - b.mean) / a.mean_stderr.hypot(b.mean_stderr);
            assert!(z.abs() < 3.5, "{}: mean z = {z}", m.name());
            let z = (a.variance - b.variance) / a.variance_stderr.hypot(b.variance_stderr);
            assert!(z.abs() < 3.5, "{}: variance z = {z}", m.name());
        }
    }

    #[test]
    fn expectation_matches_for_every_model() {
        let grid = GridSpec::new(Region::square(1.0), 1.0, 5).unwrap();
        let mut models = zoo();
        models.push(ExtremalModel::CompleteDependence);
        models.push(ExtremalModel::Independence);
        for m in models {
            let e = empirical_var(&m, &grid, 1.0, 4000, 5).unwrap();
            let z = (e.mean - r1_expectation(1.0)) / e.mean_stderr;
            assert!(z.abs() < 3.0, "{}: z = {z}", m.name());
        }
    }

    #[test]
    fn smith_variance_matches_quadrature() {
        let grid = GridSpec::new(Region::square(1.0), 1.0, 7).unwrap();
        let e = empirical_var(&ExtremalModel::smith_isotropic(1.0), &grid, 1.0, 10_000, 42).unwrap();
        let q = r2_variance_1d(&ExtremalModel::smith_isotropic(1.0), &Region::square(1.0), 1.0, 1.0).unwrap();
        assert!((e.variance - q).abs() < 3.0 * e.variance_stderr, "{} +- {} vs {q}", e.variance, e.variance_stderr);
    }

    #[test]
    fn independent_sites_give_binomial_variance() {
        // Sites 3 apart, tube radius 1: no storm covers two sites.
        let grid = GridSpec::new(Region::square(21.0), 1.0, 7).unwrap();
        let e = empirical_var(&ExtremalModel::tube(1.0), &grid, 1.0, 10_000, 8).unwrap();
        let p = r1_expectation(1.0);
        let want = p * (1.0 - p) / 49.0;
        assert!((e.variance - want).abs() < 3.0 * e.variance_stderr, "{} vs {want}", e.variance);
    }

    #[test]
    fn determinism() {
        let grid = GridSpec::new(Region::square(1.0), 2.0, 7).unwrap();
        let a = empirical_var(&ExtremalModel::smith_isotropic(1.0), &grid, 1.0, 2, 99).unwrap();
        let b = empirical_var(&ExtremalModel::smith_isotropic(1.0), &grid, 1.0, 2, 99).unwrap();
        assert_eq!(a, b);
        assert!(a.variance_stderr.is_infinite());
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| loss_samples(&ExtremalModel::tube(1.0), &grid, 1.0, 64, 5, &SimulationConfig::default()).unwrap().0)
        };
        assert_eq!(run(1), run(3));
        let f1 = simulate_field(&ExtremalModel::geometric_gaussian(1.0, CorrelationFamily::cauchy(1.0, 1.0).unwrap()), &grid, 5).unwrap();
        let f2 = simulate_field(&ExtremalModel::geometric_gaussian(1.0, CorrelationFamily::cauchy(1.0, 1.0).unwrap()), &grid, 5).unwrap();
        assert_eq!(f1, f2);
    }

    #[test]
    fn quantile_of_constant_field() {
        let grid = GridSpec::new(Region::square(1.0), 1.0, 7).unwrap();
        let v = empirical_var_at_risk(&ExtremalModel::CompleteDependence, &grid, 1.0, 0.999, 1000, 1).unwrap();
        assert_eq!(v, 1.0);
        assert!(empirical_var_at_risk(&ExtremalModel::CompleteDependence, &grid, 1.0, 0.9, 99, 1).is_err());
    }

    #[test]
    fn large_lattices_use_circulant_embedding() {
        let grid = GridSpec::new(Region::square(1.0), 8.0, 7).unwrap();
        let m = ExtremalModel::schlather(CorrelationFamily::powered_exponential(2.0, 1.0).unwrap());
        let f = simulate_field(&m, &grid, 3).unwrap();
        assert_eq!(f.values.len(), 56 * 56);
        assert!(f.values.iter().all(|&z| z > 0.0));
        let br = ExtremalModel::brown_resnick(1.0, 1.0).unwrap();
        assert!(matches!(simulate_field(&br, &grid, 3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn strict_mode_escalates() {
        let m = ExtremalModel::schlather(CorrelationFamily::cauchy(1.0, 1.0).unwrap());
        let grid = GridSpec::new(Region::square(1.0), 1.0, 3).unwrap();
        let loose = SimulationConfig { envelope: Some(3.0), ..SimulationConfig::default() };
        let f = simulate_field_with(&m, &grid, 1, 0, &loose).unwrap();
        assert!(f.truncation.bound > 1e-3);
        let strict = SimulationConfig { strict: true, ..loose };
        assert!(matches!(simulate_field_with(&m, &grid, 1, 0, &strict), Err(Error::TruncationBudgetExceeded { .. })));
        let tight = SimulationConfig { max_terms: 1, strict: true, ..SimulationConfig::default() };
        assert!(simulate_field_with(&ExtremalModel::tube(1.0), &grid, 1, 0, &tight).is_err());
    }

    #[test]
    fn var_curve_shape() {
        let mc = McConfig { replicates: 2000, ..McConfig::default() };
        let c = var_curve(&ExtremalModel::smith_isotropic(1.0), &Region::square(1.0), 1.0, 0.9, &[1.0, 3.0, 9.0], &mc).unwrap();
        assert_eq!(c.provenance, Provenance::MonteCarlo);
        for w in c.values.windows(2).zip(c.err_estimate.windows(2)) {
            assert!(w.0[1] <= w.0[0] + 3.0 * w.1[0].hypot(w.1[1]));
        }
        assert_eq!(c.limit, Some(r1_expectation(1.0)));
    }
}
