use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use segmeans_core::polyline::{hausdorff_polylines_sq, Polyline};
use segmeans_core::Point;
use std::time::Instant;

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let mk = |rng: &mut ChaCha12Rng, pieces: usize| loop {
        let vs: Vec<Point> = (0..=pieces)
            .map(|_| Point::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
            .collect();
        if let Ok(p) = Polyline::new(vs) {
            return p;
        }
    };
    for pieces in [1usize, 2, 3] {
        let pairs: Vec<(Polyline, Polyline)> =
            (0..10_000).map(|_| (mk(&mut rng, pieces), mk(&mut rng, pieces))).collect();
        let t = Instant::now();
        let mut acc = 0.0;
        for _ in 0..10 {
            for (p, q) in &pairs {
                acc += hausdorff_polylines_sq(p, q);
            }
        }
        println!(
            "ell={pieces}: {:.3} us per distance (checksum {acc:.3})",
            t.elapsed().as_secs_f64() / 100_000.0 * 1e6
        );
    }
}
