use cadkit_core::boundary::shapes;
use cadkit_core::rng::Rng;
use std::time::Instant;

fn main() {
    let d = shapes::disk(2048, 2e-3);
    let shell = 1e-6 * d.diam_boundary();
    let t0 = Instant::now();
    let mut steps = 0u64;
    let n = 20000u32;
    for w in 0..n {
        let mut rng = Rng::stream(42, w as u64);
        let mut x = [0.0, 0.0, 0.0];
        loop {
            let c = d.closest_boundary(x);
            steps += 1;
            if c.distance <= shell { break; }
            let dir = rng.unit_circle();
            x = [x[0] + c.distance * dir[0], x[1] + c.distance * dir[1], 0.0];
        }
    }
    let dt = t0.elapsed();
    println!("{n} walks, {steps} steps, {:?} total, {:.2}µs/step", dt, dt.as_secs_f64() / steps as f64 * 1e6);
}
