//! Command-line front end behind the `spatial-risk` binary.
//!
//! Every subcommand accepts the same option set; options that a command does
//! not use are ignored. Options may also come from a TOML file given with
//! `--config` (keys are the long flag names, e.g. `sigma-mat = "I"`,
//! `R = 1.0`); flags win on conflict.
//!
//! Outputs:
//!
//! | command | output |
//! |---|---|
//! | `curve`, `var-curve` | CSV `lambda,value,err,limit` |
//! | `theta` | CSV `h,theta` |
//! | `sigma` | CSV `sigma2,err,degenerate` |
//! | `limit`, `transform-threshold` | a single number |
//! | `simulate` | raster, see [`crate::simulation::write_raster`] |
//! | `audit` | JSON array of [`AuditReport`] |
//!
//! With `--format json` tables are written as JSON instead. CSV numbers use
//! 17 significant digits in scientific notation; a missing limit is `NaN`.
//!
//! Exit status is 0 on success, 2 for configuration errors and 3 for numeric
//! errors; failures write one JSON record
//! `{"error": kind, "message": text, "exit_code": code}` to stderr.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::audit::{audit_asymptotic_homogeneity, audit_subadditivity, audit_translation_invariance, AuditConfig, AuditReport};
use crate::error::{Error, Result};
use crate::geometry::{Point, Region};
use crate::models::{CorrelationFamily, CorrelationKind, ExtremalModel};
use crate::risk::{
    gev_to_frechet_threshold, limiting_risk_measure, risk_curve, sigma_squared, GevParams, RiskCurve, RiskKind, RiskQuery,
};
use crate::simulation::{mc_curve, simulate_field_with, write_raster, GridSpec, McConfig, SimulationConfig};

const GRID_HELP: &str = "\
Grids (--lambda, --h) are either `start:stop:step`, inclusive of both ends
(n = floor((stop - start)/step) + 1 points), or a comma-separated list.

Smith covariance (--sigma-mat) is `I` or `s11,s12,s22` or `s11,s12,s21,s22`.
--M is the number of sites on the unit square and must be a perfect square
(49 gives a 7 x 7 lattice); a disk uses sqrt(M) cells per diameter.

Exit status: 0 success, 2 configuration error, 3 numeric error.";

#[derive(Debug, Parser)]
#[command(name = "spatial-risk", version, about = "Spatial risk measures of max-stable fields", after_help = GRID_HELP)]
pub struct Cli {
    /// Worker threads for curve points and replicates.
    #[arg(long, global = true, env = "RISK_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Variance (or expectation) curve by quadrature.
    Curve(Opts),
    /// Limit of the variance as lambda grows.
    Limit(Opts),
    /// sigma^2 of a model with integrable dependence.
    Sigma(Opts),
    /// Monte-Carlo Value-at-Risk curve.
    VarCurve(Opts),
    /// Simulate one field realization and export it as a raster.
    Simulate(Opts),
    /// Audit the axioms of spatial risk measures.
    Audit(Opts),
    /// Map a GEV threshold u1 to the unit-Frechet scale.
    TransformThreshold(Opts),
    /// Dump the extremal coefficient function.
    Theta(Opts),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    Smith,
    Schlather,
    GeometricGaussian,
    BrownResnick,
    Tube,
    CompleteDependence,
    Independence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrName {
    WhittleMatern,
    Cauchy,
    PoweredExponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionName {
    Disk,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindName {
    Expectation,
    Variance,
    Var,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxiomName {
    Translation,
    Subadditivity,
    Homogeneity,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// Raw options, from flags or a config file. Defaults are applied in
/// [`RunConfig::from_opts`].
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Opts {
    /// TOML file with default option values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Dependence model [default: smith].
    #[arg(long, value_enum)]
    pub model: Option<ModelName>,
    /// Smith covariance matrix [default: I].
    #[arg(long)]
    pub sigma_mat: Option<String>,
    /// Correlation family of schlather and geometric-gaussian [default: whittle-matern].
    #[arg(long, value_enum)]
    pub corr: Option<CorrName>,
    /// Correlation range [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub c1: Option<f64>,
    /// Correlation smoothness [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub c2: Option<f64>,
    /// Geometric-gaussian standard deviation [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub sigma_eps: Option<f64>,
    /// Brown-Resnick semivariogram scale [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Brown-Resnick semivariogram exponent in (0, 2] [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Tube radius [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub rb: Option<f64>,
    /// Region shape [default: disk].
    #[arg(long, value_enum)]
    pub region: Option<RegionName>,
    /// Disk radius or square side [default: 1].
    #[arg(long = "R", allow_negative_numbers = true)]
    #[serde(rename = "R")]
    pub r: Option<f64>,
    /// Unit-Frechet threshold [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub u: Option<f64>,
    /// GEV location.
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// GEV scale.
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    /// GEV shape.
    #[arg(long, allow_negative_numbers = true)]
    pub xi: Option<f64>,
    /// Threshold on the GEV scale.
    #[arg(long, allow_negative_numbers = true)]
    pub u1: Option<f64>,
    /// Scale grid, `start:stop:step` (inclusive) or a comma list [default: 1:30:1, simulate 1, audit 1:10:1].
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Distance grid for `theta`, same syntax as --lambda [default: 0:5:0.05].
    #[arg(long)]
    pub h: Option<String>,
    /// Direction of the `theta` dump in radians [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    pub angle: Option<f64>,
    /// Sites on the unit square, a perfect square [default: 49].
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub m: Option<usize>,
    /// Monte-Carlo replicates [default: 10000].
    #[arg(long = "S")]
    #[serde(rename = "S")]
    pub s: Option<usize>,
    /// Random seed [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replicate index for `simulate` [default: 0].
    #[arg(long)]
    pub replicate: Option<u64>,
    /// VaR level [default: 0.9].
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Risk measure for `curve` and `audit` [default: variance].
    #[arg(long, value_enum)]
    pub kind: Option<KindName>,
    /// Axiom for `audit` [default: all].
    #[arg(long, value_enum)]
    pub axiom: Option<AxiomName>,
    /// Translation vectors `x,y;x,y` [default: 5,-3;100,100].
    #[arg(long, allow_hyphen_values = true)]
    pub translations: Option<String>,
    /// Fail instead of warning when simulation truncation exceeds its budget.
    #[arg(long)]
    pub strict: bool,
    /// Output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format for tables [default: csv].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Opts {
    /// Fills unset fields from `file`.
    fn merge(self, file: Opts) -> Opts {
        macro_rules! pick {
            ($($f:ident),*) => { Opts { config: self.config, strict: self.strict || file.strict, $($f: self.$f.or(file.$f)),* } };
        }
        pick!(
            model, sigma_mat, corr, c1, c2, sigma_eps, eta, a, rb, region, r, u, mu, sigma, xi, u1, lambda, h, angle, m, s, seed,
            replicate, alpha, kind, axiom, translations, out, format
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Curve,
    Limit,
    Sigma,
    VarCurve,
    Simulate,
    Audit,
    TransformThreshold,
    Theta,
}

/// A validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub model: ExtremalModel,
    pub region: Region,
    pub u: f64,
    pub gev: Option<(GevParams, f64)>,
    pub lambdas: Vec<f64>,
    pub h: Vec<f64>,
    pub angle: f64,
    pub mc: McConfig,
    pub alpha: f64,
    pub kind: RiskKind,
    pub axiom: AxiomName,
    pub translations: Vec<Point>,
    pub replicate: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| config_err(format!("bad number `{t}` in grid `{s}`")));
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0 && stop >= start && step.is_finite() && stop.is_finite() && start.is_finite()) {
                return Err(config_err(format!("grid `{s}` needs start <= stop and a positive step")));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if n > 1_000_000 {
                return Err(config_err(format!("grid `{s}` has {n} points")));
            }
            (0..n)
                .map(|i| {
                    let x = start + i as f64 * step;
                    if (x - stop).abs() <= 1e-9 * step {
                        stop
                    } else {
                        x
                    }
                })
                .collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<f64>>>()?,
        _ => return Err(config_err(format!("grid `{s}` is neither start:stop:step nor a list"))),
    };
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(config_err(format!("grid `{s}` must be strictly ascending")));
    }
    Ok(grid)
}

fn parse_sigma_mat(s: &str) -> Result<[[f64; 2]; 2]> {
    if s.trim().eq_ignore_ascii_case("i") {
        return Ok([[1.0, 0.0], [0.0, 1.0]]);
    }
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<f64>, _>>()
        .map_err(|_| config_err(format!("bad --sigma-mat `{s}`")))?;
    match *v.as_slice() {
        [a, b, d] => Ok([[a, b], [b, d]]),
        [a, b, c, d] => Ok([[a, b], [c, d]]),
        _ => Err(config_err(format!("--sigma-mat needs I, 3 or 4 entries, got `{s}`"))),
    }
}

fn parse_translations(s: &str) -> Result<Vec<Point>> {
    s.split(';')
        .map(|p| {
            let v: Vec<&str> = p.split(',').collect();
            match v.as_slice() {
                [x, y] => match (x.trim().parse(), y.trim().parse()) {
                    (Ok(x), Ok(y)) => Ok(Point::new(x, y)),
                    _ => Err(config_err(format!("bad translation `{p}`"))),
                },
                _ => Err(config_err(format!("translation `{p}` must be `x,y`"))),
            }
        })
        .collect()
}

impl RunConfig {
    /// Merges `--config`, applies defaults and validates every field.
    pub fn from_opts(command: CommandKind, opts: Opts) -> Result<Self> {
        let opts = match &opts.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
                let file: Opts = toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
                opts.merge(file)
            }
            None => opts,
        };

        let corr = || -> Result<CorrelationFamily> {
            let kind = match opts.corr.unwrap_or(CorrName::WhittleMatern) {
                CorrName::WhittleMatern => CorrelationKind::WhittleMatern,
                CorrName::Cauchy => CorrelationKind::Cauchy,
                CorrName::PoweredExponential => CorrelationKind::PoweredExponential,
            };
            CorrelationFamily::new(kind, opts.c1.unwrap_or(1.0), opts.c2.unwrap_or(1.0))
        };
        let model = match opts.model.unwrap_or(ModelName::Smith) {
            ModelName::Smith => ExtremalModel::smith(parse_sigma_mat(opts.sigma_mat.as_deref().unwrap_or("I"))?)?,
            ModelName::Schlather => ExtremalModel::schlather(corr()?),
            ModelName::GeometricGaussian => ExtremalModel::geometric_gaussian(opts.sigma_eps.unwrap_or(1.0), corr()?),
            ModelName::BrownResnick => ExtremalModel::brown_resnick(opts.eta.unwrap_or(1.0), opts.a.unwrap_or(1.0))?,
            ModelName::Tube => ExtremalModel::tube(opts.rb.unwrap_or(1.0)),
            ModelName::CompleteDependence => ExtremalModel::CompleteDependence,
            ModelName::Independence => ExtremalModel::Independence,
        };
        model.validate()?;

        let r = opts.r.unwrap_or(1.0);
        let region = match opts.region.unwrap_or(RegionName::Disk) {
            RegionName::Disk => Region::disk(r),
            RegionName::Square => Region::square(r),
        };
        region.validate()?;

        let gev_fields = [opts.mu, opts.sigma, opts.xi, opts.u1];
        let gev = match gev_fields {
            [None, None, None, None] => None,
            [Some(mu), Some(sigma), Some(xi), Some(u1)] => Some((GevParams { mu, sigma, xi }, u1)),
            _ => return Err(config_err("--mu, --sigma, --xi and --u1 must be given together")),
        };
        let u = match (opts.u, gev) {
            (Some(_), Some(_)) => return Err(config_err("give either --u or the GEV threshold, not both")),
            (Some(u), None) => u,
            (None, Some((p, u1))) if command != CommandKind::TransformThreshold => gev_to_frechet_threshold(&p, u1)?,
            _ => 1.0,
        };
        if command == CommandKind::TransformThreshold && gev.is_none() {
            return Err(config_err("transform-threshold needs --mu, --sigma, --xi and --u1"));
        }
        if !(u > 0.0 && u.is_finite()) {
            return Err(Error::InvalidParameter(format!("threshold u must be positive, got {u}")));
        }

        let default_grid = match command {
            CommandKind::Simulate => "1",
            CommandKind::Audit => "1:10:1",
            _ => "1:30:1",
        };
        let lambdas = parse_grid(opts.lambda.as_deref().unwrap_or(default_grid))?;
        if lambdas.iter().any(|&l| !(l > 0.0)) {
            return Err(config_err("lambda values must be positive"));
        }
        if command == CommandKind::Simulate && lambdas.len() != 1 {
            return Err(config_err("simulate takes a single --lambda"));
        }
        let h = parse_grid(opts.h.as_deref().unwrap_or("0:5:0.05"))?;
        if h[0] < 0.0 {
            return Err(config_err("distances must be non-negative"));
        }

        let m = opts.m.unwrap_or(49);
        let side = (m as f64).sqrt().round() as usize;
        if m == 0 || side * side != m {
            return Err(config_err(format!("--M must be a positive perfect square, got {m}")));
        }
        let replicates = opts.s.unwrap_or(10_000);
        if replicates == 0 {
            return Err(config_err("--S must be positive"));
        }
        let mc = McConfig {
            m_per_unit: side,
            replicates,
            seed: opts.seed.unwrap_or(42),
            sim: SimulationConfig { strict: opts.strict, ..SimulationConfig::default() },
        };

        let alpha = opts.alpha.unwrap_or(0.9);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(config_err(format!("--alpha must lie in (0, 1), got {alpha}")));
        }
        let kind = match (command, opts.kind.unwrap_or(KindName::Variance)) {
            (CommandKind::VarCurve, _) | (_, KindName::Var) => RiskKind::VaR { alpha },
            (_, KindName::Variance) => RiskKind::Variance,
            (_, KindName::Expectation) => RiskKind::Expectation,
        };
        if command == CommandKind::Curve && matches!(kind, RiskKind::VaR { .. }) {
            return Err(config_err("curve evaluates expectation or variance; use var-curve for VaR"));
        }

        Ok(RunConfig {
            command,
            model,
            region,
            u,
            gev,
            lambdas,
            h,
            angle: opts.angle.unwrap_or(0.0),
            mc,
            alpha,
            kind,
            axiom: opts.axiom.unwrap_or(AxiomName::All),
            translations: parse_translations(opts.translations.as_deref().unwrap_or("5,-3;100,100"))?,
            replicate: opts.replicate.unwrap_or(0),
            out: opts.out,
            format: opts.format.unwrap_or(Format::Csv),
        })
    }
}

/// Formats with 17 significant digits.
fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn to_json<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn curve_output(curve: &RiskCurve, format: Format) -> Result<String> {
    if format == Format::Json {
        return to_json(curve);
    }
    let mut s = String::from("lambda,value,err,limit\n");
    let limit = num(curve.limit.unwrap_or(f64::NAN));
    for ((l, v), e) in curve.lambdas.iter().zip(&curve.values).zip(&curve.err_estimate) {
        let _ = writeln!(s, "{},{},{},{limit}", num(*l), num(*v), num(*e));
    }
    Ok(s)
}

/// Runs a validated configuration and returns the artifact.
pub fn execute(cfg: &RunConfig) -> Result<Vec<u8>> {
    let query = || RiskQuery::new(cfg.model, cfg.region, cfg.u, cfg.kind);
    let text = match cfg.command {
        CommandKind::Curve => curve_output(&risk_curve(&query()?, &cfg.lambdas)?, cfg.format)?,
        CommandKind::VarCurve => curve_output(&mc_curve(&query()?, &cfg.lambdas, &cfg.mc)?, cfg.format)?,
        CommandKind::Limit => {
            let v = limiting_risk_measure(&cfg.model, cfg.u)?;
            match cfg.format {
                Format::Csv => format!("{v}\n"),
                Format::Json => to_json(&serde_json::json!({ "limit": v }))?,
            }
        }
        CommandKind::TransformThreshold => {
            let (p, u1) = cfg.gev.expect("validated");
            let v = gev_to_frechet_threshold(&p, u1)?;
            match cfg.format {
                Format::Csv => format!("{v}\n"),
                Format::Json => to_json(&serde_json::json!({ "u": v }))?,
            }
        }
        CommandKind::Sigma => {
            let s = sigma_squared(&cfg.model, cfg.u)?;
            match cfg.format {
                Format::Csv => format!("sigma2,err,degenerate\n{},{},{}\n", num(s.value), num(s.error), s.degenerate),
                Format::Json => to_json(&s)?,
            }
        }
        CommandKind::Theta => {
            let (c, sn) = (cfg.angle.cos(), cfg.angle.sin());
            let rows = cfg
                .h
                .iter()
                .map(|&h| Ok((h, cfg.model.pairwise_extremal_coefficient(Point::ORIGIN, Point::new(h * c, h * sn))?)))
                .collect::<Result<Vec<(f64, f64)>>>()?;
            match cfg.format {
                Format::Csv => {
                    let mut s = String::from("h,theta\n");
                    for (h, t) in rows {
                        let _ = writeln!(s, "{},{}", num(h), num(t));
                    }
                    s
                }
                Format::Json => to_json(&rows.iter().map(|&(h, theta)| serde_json::json!({ "h": h, "theta": theta })).collect::<Vec<_>>())?,
            }
        }
        CommandKind::Simulate => {
            let grid = GridSpec::new(cfg.region, cfg.lambdas[0], cfg.mc.m_per_unit)?;
            let field = simulate_field_with(&cfg.model, &grid, cfg.mc.seed, cfg.replicate, &cfg.mc.sim)?;
            match cfg.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_raster(&field, &mut buf)?;
                    return Ok(buf);
                }
                Format::Json => to_json(&field)?,
            }
        }
        CommandKind::Audit => to_json(&run_audits(cfg)?)?,
    };
    Ok(text.into_bytes())
}

fn run_audits(cfg: &RunConfig) -> Result<Vec<AuditReport>> {
    let q = RiskQuery::new(cfg.model, cfg.region, cfg.u, cfg.kind)?;
    let acfg = AuditConfig { mc: cfg.mc, ..AuditConfig::default() };
    let mut out = Vec::new();
    if matches!(cfg.axiom, AxiomName::Translation | AxiomName::All) {
        out.push(audit_translation_invariance(&q, &cfg.translations, &acfg)?);
    }
    if matches!(cfg.axiom, AxiomName::Subadditivity | AxiomName::All) {
        out.push(audit_subadditivity(&q, &cfg.lambdas, &acfg)?);
    }
    if matches!(cfg.axiom, AxiomName::Homogeneity | AxiomName::All) {
        out.push(audit_asymptotic_homogeneity(&q, &cfg.lambdas, &acfg)?);
    }
    Ok(out)
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidParameter(_) => "invalid-parameter",
        Error::Domain(_) => "domain",
        Error::ThetaOutOfRange { .. } => "theta-out-of-range",
        Error::QuadratureNonConvergence { .. } => "quadrature-non-convergence",
        Error::Divergent(_) => "divergent",
        Error::Degenerate(_) => "degenerate",
        Error::InvalidThreshold(_) => "invalid-threshold",
        Error::NotPositiveDefinite(_) => "not-positive-definite",
        Error::TruncationBudgetExceeded { .. } => "truncation-budget-exceeded",
        Error::Unsupported(_) => "unsupported",
        Error::InsufficientGrid(_) => "insufficient-grid",
        Error::Config(_) => "config",
        Error::Io(_) => "io",
    }
}

/// Exit status for an error: 2 for configuration problems, 3 for numerics.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        2
    } else {
        3
    }
}

fn report(kind: &str, message: &str, code: i32) -> i32 {
    let rec = serde_json::json!({ "error": kind, "message": message, "exit_code": code });
    eprintln!("{rec}");
    code
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            return report("config", e.render().to_string().trim(), 2);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return report("config", "RISK_THREADS must be positive", 2);
        }
        // Fails only if a pool already exists, e.g. when called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let (kind, opts) = match cli.command {
        Command::Curve(o) => (CommandKind::Curve, o),
        Command::Limit(o) => (CommandKind::Limit, o),
        Command::Sigma(o) => (CommandKind::Sigma, o),
        Command::VarCurve(o) => (CommandKind::VarCurve, o),
        Command::Simulate(o) => (CommandKind::Simulate, o),
        Command::Audit(o) => (CommandKind::Audit, o),
        Command::TransformThreshold(o) => (CommandKind::TransformThreshold, o),
        Command::Theta(o) => (CommandKind::Theta, o),
    };
    let result = RunConfig::from_opts(kind, opts).and_then(|cfg| {
        let bytes = execute(&cfg)?;
        write_output(cfg.out.as_deref(), &bytes)
    });
    match result {
        Ok(()) => 0,
        Err(e) => report(error_kind(&e), &e.to_string(), exit_code(&e)),
    }
}
