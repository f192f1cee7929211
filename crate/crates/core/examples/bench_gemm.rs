use nalgebra::DMatrix;
use std::time::Instant;

fn main() {
    let a = DMatrix::<f64>::from_fn(512, 512, |i, j| ((i * 7 + j) % 13) as f64 * 0.1);
    let b = DMatrix::<f64>::from_fn(512, 256, |i, j| ((i * 3 + j) % 11) as f64 * 0.1);
    let t0 = Instant::now();
    let mut acc = 0.0;
    for _ in 0..20 {
        let c = &a * &b;
        acc += c[(0, 0)];
    }
    let dt = t0.elapsed().as_secs_f64();
    let flops = 2.0 * 512.0 * 512.0 * 256.0 * 20.0;
    println!("acc {acc:.3}, {:.2} GFlop/s", flops / dt / 1e9);
}
