//! Simulates one tube-process field on a 4 x 4 square and writes it as a raster.
//!
//! ```text
//! cargo run --example simulate_field -- field.csv
//! ```

use spatial_risk::geometry::Region;
use spatial_risk::models::ExtremalModel;
use spatial_risk::simulation::{loss_sample, simulate_field, write_raster, GridSpec};

fn main() -> spatial_risk::Result<()> {
    let grid = GridSpec::new(Region::square(1.0), 4.0, 10)?;
    let field = simulate_field(&ExtremalModel::tube(0.5), &grid, 2024)?;
    let loss = loss_sample(&field, 2.0)?;
    eprintln!(
        "{} sites, truncation {:?}, fraction above u=2: {:.4}",
        field.values.len(),
        field.truncation.kind,
        loss.l_n
    );
    match std::env::args().nth(1) {
        Some(path) => write_raster(&field, std::fs::File::create(path)?),
        None => write_raster(&field, std::io::stdout().lock()),
    }
}
