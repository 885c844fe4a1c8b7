//! Maps thresholds on GEV margins to the unit-Frechet scale used everywhere else.

use spatial_risk::risk::{gev_to_frechet_threshold, r1_expectation, GevParams};

fn main() {
    let params = GevParams { mu: 20.0, sigma: 4.0, xi: 0.1 };
    for u1 in [20.0, 25.0, 30.0, 40.0] {
        let u = gev_to_frechet_threshold(&params, u1).expect("valid threshold");
        println!("u1 = {u1:>5}: u = {u:>9.4}, P(exceed) = {:.4}", r1_expectation(u));
    }
    let bounded = GevParams { mu: 0.0, sigma: 1.0, xi: -0.5 };
    match gev_to_frechet_threshold(&bounded, 3.0) {
        Ok(u) => println!("unexpected: {u}"),
        Err(e) => println!("xi = -0.5, u1 = 3: {e}"),
    }
}
