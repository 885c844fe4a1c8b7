//! Monte-Carlo Value-at-Risk of the exceedance fraction on growing squares,
//! with the central-limit approximation alongside.

use spatial_risk::geometry::Region;
use spatial_risk::models::ExtremalModel;
use spatial_risk::risk::clt_gaussian_approx;
use spatial_risk::simulation::{var_curve, McConfig};

fn main() -> spatial_risk::Result<()> {
    let model = ExtremalModel::smith_isotropic(1.0);
    let square = Region::square(1.0);
    let lambdas = [1.0, 2.0, 4.0, 8.0, 16.0];
    let mc = McConfig { replicates: 5000, ..McConfig::default() };
    let curve = var_curve(&model, &square, 1.0, 0.9, &lambdas, &mc)?;
    println!("{:>7} {:>9} {:>9} {:>9}", "lambda", "VaR", "stderr", "CLT");
    for ((l, v), e) in lambdas.iter().zip(&curve.values).zip(&curve.err_estimate) {
        println!("{l:>7} {v:>9.4} {e:>9.4} {:>9.4}", clt_gaussian_approx(&model, &square, *l, 1.0, 0.9)?);
    }
    Ok(())
}
