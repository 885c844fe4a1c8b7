//! Order -2 decay of the variance: lambda^2 |A| R2(lambda A) approaches sigma^2,
//! and the central-limit approximation of the VaR.

use spatial_risk::geometry::Region;
use spatial_risk::models::ExtremalModel;
use spatial_risk::risk::{clt_gaussian_approx, homogeneity_constants_variance, r2_variance_1d, sigma_squared};

fn main() -> spatial_risk::Result<()> {
    let disk = Region::disk(1.0);
    for model in [ExtremalModel::tube(1.0), ExtremalModel::smith_isotropic(1.0), ExtremalModel::brown_resnick(1.0, 1.0)?] {
        let s = sigma_squared(&model, 1.0)?;
        let h = homogeneity_constants_variance(&model, &disk, 1.0)?;
        println!("{}: sigma^2 = {:.10} (+- {:.1e}), K2 = {:.6}", model.name(), s.value, s.error, h.k2);
        for lambda in [5.0, 10.0, 50.0, 200.0] {
            let v = r2_variance_1d(&model, &disk, lambda, 1.0)?;
            println!("  lambda {lambda:>5}: lambda^2 |A| R2 / sigma^2 = {:.5}", lambda * lambda * disk.area() * v / s.value);
        }
    }
    let tube = ExtremalModel::tube(1.0);
    for lambda in [10.0, 20.0, 40.0] {
        println!("tube VaR_0.9 approximation at lambda {lambda}: {:.6}", clt_gaussian_approx(&tube, &disk, lambda, 1.0, 0.9)?);
    }
    Ok(())
}
