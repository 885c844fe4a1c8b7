//! Variance of the exceedance area fraction on growing disks, for each model.

use spatial_risk::geometry::Region;
use spatial_risk::models::{CorrelationFamily, ExtremalModel};
use spatial_risk::risk::{risk_curve, RiskKind, RiskQuery};

fn main() -> spatial_risk::Result<()> {
    let cauchy = CorrelationFamily::cauchy(1.0, 0.5)?;
    let models = [
        ExtremalModel::tube(1.0),
        ExtremalModel::smith_isotropic(1.0),
        ExtremalModel::schlather(cauchy),
        ExtremalModel::geometric_gaussian(1.0, cauchy),
    ];
    let lambdas = [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0];
    print!("{:>20}", "lambda");
    for l in lambdas {
        print!("{l:>11}");
    }
    println!("{:>11}", "limit");
    for model in models {
        for region in [Region::disk(1.0), Region::square(1.0)] {
            let curve = risk_curve(&RiskQuery::new(model, region, 1.0, RiskKind::Variance)?, &lambdas)?;
            print!("{:>13} {:>6}", model.name(), format!("{:?}", region.shape).to_lowercase());
            for v in &curve.values {
                print!("{v:>11.3e}");
            }
            println!("{:>11.3e}", curve.limit.unwrap_or(f64::NAN));
        }
    }
    Ok(())
}
