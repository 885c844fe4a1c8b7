//! Anisotropic Smith model: direction-dependent extremal coefficient and the
//! variance by the 2-D covariogram route, which needs no isotropy.

use spatial_risk::geometry::{Point, Region};
use spatial_risk::models::ExtremalModel;
use spatial_risk::risk::{r2_variance_2d, sigma_squared};

fn main() -> spatial_risk::Result<()> {
    let model = ExtremalModel::smith([[2.0, 0.6], [0.6, 0.5]])?;
    for deg in [0.0f64, 45.0, 90.0, 135.0] {
        let (s, c) = deg.to_radians().sin_cos();
        let theta = model.pairwise_extremal_coefficient(Point::ORIGIN, Point::new(c, s))?;
        println!("direction {deg:>5} deg: Theta(1) = {theta:.6}");
    }
    println!("sigma^2 = {:.8}", sigma_squared(&model, 1.0)?.value);
    for lambda in [1.0, 4.0, 16.0] {
        let disk = r2_variance_2d(&model, &Region::disk(1.0), lambda, 1.0)?;
        let square = r2_variance_2d(&model, &Region::square(1.0), lambda, 1.0)?;
        println!("lambda {lambda:>4}: disk {disk:.6e}, square {square:.6e}");
    }
    Ok(())
}
