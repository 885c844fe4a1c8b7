//! Spatial risk measures for threshold exceedances of max-stable random fields.
//!
//! The loss on a region `A` is the fraction of `A` where a simple max-stable
//! field `Z` exceeds a threshold `u`. This crate evaluates the expectation,
//! the variance and the Value-at-Risk of that loss as `A` grows by homothety
//! `lambda A`, for the Smith, Schlather, geometric Gaussian, Brown-Resnick and
//! tube models:
//!
//! - [`models`]: extremal coefficient functions `Theta(h)`.
//! - [`geometry`]: disks, squares, convex polygons, distance densities and covariograms.
//! - [`risk`]: variance by 1-D and 2-D quadrature, limits, `sigma^2`,
//!   homogeneity constants, the central-limit VaR approximation and the GEV
//!   threshold transform.
//! - [`simulation`]: exact and truncated field simulation on lattices,
//!   Monte-Carlo risk curves, raster export.
//! - [`audit`]: numeric checks of translation invariance, sub-additivity and
//!   asymptotic homogeneity.
//! - [`run`]: the `spatial-risk` command line.
//!
//! ```
//! use spatial_risk::geometry::Region;
//! use spatial_risk::models::ExtremalModel;
//! use spatial_risk::risk::r2_variance_1d;
//!
//! let v = r2_variance_1d(&ExtremalModel::tube(1.0), &Region::disk(1.0), 1.0, 1.0).unwrap();
//! assert!((v - 0.0848776917320339).abs() < 1e-9);
//! ```
//!
//! ## Examples
//!
//! ```text
//! cargo run --release --example extremal_coefficients   # Theta(h) for each model
//! cargo run --release --example distance_densities      # pair-distance densities vs simulation
//! cargo run --release --example variance_curves         # lambda -> R2(lambda A) and limits
//! cargo run --release --example homogeneity             # sigma^2 and the order -2 decay
//! cargo run --release --example anisotropic_smith       # 2-D route for a non-isotropic model
//! cargo run --release --example simulate_field          # one field as a raster
//! cargo run --release --example monte_carlo_var         # Monte-Carlo VaR curve
//! cargo run --release --example axiom_audit             # audit reports
//! cargo run --release --example gev_threshold           # GEV thresholds on the Frechet scale
//! ```

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod error;
pub mod geometry;
pub mod models;
pub mod quadrature;
pub mod risk;
pub mod run;
pub mod simulation;
pub mod special;

pub use error::{Error, Result};
