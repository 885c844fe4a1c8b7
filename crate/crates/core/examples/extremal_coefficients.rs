//! Extremal coefficient functions of the model zoo.
//!
//! ```text
//! cargo run --example extremal_coefficients
//! ```

use spatial_risk::models::{CorrelationFamily, ExtremalModel};

fn main() -> spatial_risk::Result<()> {
    let cauchy = CorrelationFamily::cauchy(1.0, 0.5)?;
    let models = [
        ExtremalModel::smith_isotropic(1.0),
        ExtremalModel::schlather(cauchy),
        ExtremalModel::geometric_gaussian(1.0, cauchy),
        ExtremalModel::brown_resnick(1.0, 1.0)?,
        ExtremalModel::tube(1.0),
    ];
    print!("{:>6}", "h");
    for m in &models {
        print!("{:>20}", m.name());
    }
    println!();
    for k in 0..=12 {
        let h = 0.25 * k as f64;
        print!("{h:>6.2}");
        for m in &models {
            print!("{:>20.6}", m.extremal_coefficient(h)?);
        }
        println!();
    }
    for m in &models {
        println!("{:>20}: Theta(inf) = {}, integrable dependence: {}", m.name(), m.theta_at_infinity(), m.has_integrable_dependence());
    }
    Ok(())
}
