//! Density of the distance between two uniform points of a disk or a square,
//! checked against a quick simulation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spatial_risk::geometry::{distance_density, Point, Region};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for region in [Region::disk(1.0), Region::square(1.0)] {
        let hmax = region.max_distance();
        let bins = 10;
        let n = 200_000;
        let side = region.bounding_side();
        let mut draw = || loop {
            let p = Point::new(rng.random_range(-0.5..0.5) * side, rng.random_range(-0.5..0.5) * side);
            if region.contains(p) {
                return p;
            }
        };
        let mut counts = vec![0usize; bins];
        for _ in 0..n {
            let d = draw().distance(draw());
            counts[((d / hmax * bins as f64) as usize).min(bins - 1)] += 1;
        }
        println!("{:?} of size {}:", region.shape, region.r);
        println!("{:>8} {:>10} {:>10}", "h", "density", "empirical");
        let width = hmax / bins as f64;
        for (k, c) in counts.iter().enumerate() {
            let mid = (k as f64 + 0.5) * width;
            println!("{mid:>8.3} {:>10.4} {:>10.4}", distance_density(&region, mid), *c as f64 / (n as f64 * width));
        }
    }
}
