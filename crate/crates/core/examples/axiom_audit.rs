//! Audits translation invariance, sub-additivity and asymptotic homogeneity
//! of the variance, and sub-additivity over a union of two squares.

use spatial_risk::audit::{
    audit_asymptotic_homogeneity, audit_subadditivity, audit_translation_invariance, audit_union_subadditivity,
    AuditConfig,
};
use spatial_risk::geometry::{ConvexPolygon, Point, Region};
use spatial_risk::models::{CorrelationFamily, ExtremalModel};
use spatial_risk::risk::{RiskKind, RiskQuery};

fn main() -> spatial_risk::Result<()> {
    let cfg = AuditConfig::default();
    let q = RiskQuery::new(ExtremalModel::tube(1.0), Region::disk(1.0), 1.0, RiskKind::Variance)?;
    let lambdas: Vec<f64> = (10..=100).step_by(10).map(f64::from).collect();
    let reports = [
        audit_translation_invariance(&q, &[Point::new(5.0, -3.0), Point::new(100.0, 100.0)], &cfg)?,
        audit_subadditivity(&q, &lambdas, &cfg)?,
        audit_asymptotic_homogeneity(&q, &lambdas, &cfg)?,
    ];
    for r in &reports {
        println!("{:?}: {:?} ({:?}) order {:?} K2 {:?}", r.axiom, r.verdict, r.basis, r.fitted_order, r.fitted_k2);
    }

    let schlather = RiskQuery::new(
        ExtremalModel::schlather(CorrelationFamily::cauchy(1.0, 0.5)?),
        Region::square(1.0),
        1.0,
        RiskKind::Variance,
    )?;
    let r = audit_asymptotic_homogeneity(&schlather, &lambdas, &cfg)?;
    println!("schlather homogeneity: {:?}, {}", r.verdict, r.note);

    let unit = |x: f64| {
        ConvexPolygon::new(vec![Point::new(x, 0.0), Point::new(x + 1.0, 0.0), Point::new(x + 1.0, 1.0), Point::new(x, 1.0)])
    };
    let r = audit_union_subadditivity(&ExtremalModel::smith_isotropic(1.0), &[unit(0.0)?, unit(3.0)?], 1.0, &cfg)?;
    println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
    Ok(())
}
