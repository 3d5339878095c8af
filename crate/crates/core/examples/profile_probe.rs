use scramble_core::rat::{pow2_inv, rat};
use scramble_core::region::{Flavor, Region};
use scramble_core::MetricSystem;

fn main() {
    let d = MetricSystem::parse("doubling").unwrap();
    // Typical stage-2 box: tiny arc with ~200-bit endpoints.
    let lo = rat(1, 6) + pow2_inv(150) * rat(1, 7);
    let hi = &lo + pow2_inv(160);
    let boxed = Region::interval_compact(&d, lo, hi);
    let t0 = std::time::Instant::now();
    let mut n = 0u64;
    for _ in 0..2000 {
        let img = boxed.image_pow(&d, 150);
        n += img.piece_count() as u64;
    }
    println!("300k arc image ops: {:?} ({n})", t0.elapsed());

    let target = Region::ball(&d, &scramble_core::Point::rational(1, 3), &rat(1, 40));
    let t0 = std::time::Instant::now();
    let mut hits = 0;
    for _ in 0..2000 {
        let img = boxed.image_pow(&d, 150);
        if !img.is_disjoint(&d, &target) {
            hits += 1;
        }
    }
    println!("with disjointness: {:?} ({hits})", t0.elapsed());

    // Full-region images (the saturated regime).
    let full = Region::full(&d, Flavor::Open);
    let t0 = std::time::Instant::now();
    for _ in 0..300000 {
        let img = full.clone();
        std::hint::black_box(&img);
    }
    println!("300k full clones: {:?}", t0.elapsed());
}
