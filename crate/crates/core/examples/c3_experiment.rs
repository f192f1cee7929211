use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use scoremeans::estimators::{diffusion_mean, OptimizerConfig};
use scoremeans::manifold::{self, Manifold, ManifoldId, Point, Sphere, TangentVector};
use scoremeans::net::{train, NetProvider, TrainConfig};
use scoremeans::oracle::{oracle_provider, ScoreProvider, SeriesTruncation};
use scoremeans::sampler::{build_dataset, sample_endpoints, SampleAlgorithm, SamplingConfig};
use std::time::Instant;

fn main() {
    let id = ManifoldId::Sphere(2);
    let m = manifold::make::<f64>(id);
    let t0 = Instant::now();
    let cfg = SamplingConfig::<f64>::default(); // 1024 x0, 100 steps, T=1
    let ds = build_dataset(m.as_ref(), &cfg).unwrap();
    println!("dataset: {} records in {:.1?}", ds.records.len(), t0.elapsed());

    let t0 = Instant::now();
    let tcfg = TrainConfig {
        epochs: 5000,
        hidden: Some(vec![128, 128, 128]),
        seed: 2712,
        ..TrainConfig::default()
    };
    let out = train(m.as_ref(), &ds, &tcfg).unwrap();
    println!("training: {:.1?}, final loss {:.3}", t0.elapsed(), out.checkpoint.final_loss);

    let provider = NetProvider::<f64>::from_checkpoint(&out.checkpoint).unwrap();
    let oracle = oracle_provider::<f64>(id, SeriesTruncation::default()).unwrap();

    // criterion 4 style: median angular error over 500 queries
    let sphere = Sphere::new(2);
    let mut r = ChaCha12Rng::seed_from_u64(99);
    let mut errs = Vec::new();
    for _ in 0..500 {
        let t: f64 = r.gen_range(0.1..1.0);
        let dir: Vec<f64> = (0..3).map(|_| r.sample(rand_distr::StandardNormal)).collect();
        let x = Point::with_anchor(DVector::zeros(2), DVector::from_column_slice(&dir).normalize());
        let dist = r.gen_range(0.0..2.0 * t.sqrt());
        let angle: f64 = r.gen_range(0.0..std::f64::consts::TAU);
        let v = TangentVector::new(x.clone(), DVector::from_column_slice(&[angle.cos() * dist / 2.0, angle.sin() * dist / 2.0]));
        let y = m.exp(&v).unwrap();
        let s_net = provider.score(&x, &y, t).unwrap();
        let s_true = oracle.score(&x, &y, t).unwrap();
        let a = m.embed_tangent(&s_net).unwrap();
        let b = m.embed_tangent(&s_true).unwrap();
        let cosang = (a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0);
        errs.push(cosang.acos().to_degrees());
    }
    errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!("median angular error: {:.2} deg (p90 {:.2})", errs[250], errs[450]);
    drop(sphere);

    // criterion 3: desk-scale protocol with the trained provider
    let x0 = Sphere::new(2).north_point::<f64>();
    let data = sample_endpoints(m.as_ref(), SampleAlgorithm::LocalCoords, &x0, 0.5, 100, 1000, 2712).unwrap();
    let t0 = Instant::now();
    let ocfg = OptimizerConfig::for_manifold(id);
    let est = diffusion_mean(&provider, m.as_ref(), &data, &ocfg).unwrap();
    let mu_err = (m.embed(&est.mu).unwrap() - m.embed(&x0).unwrap()).norm();
    println!(
        "trained-provider estimation: {:.1?}, |mu-x0| = {:.4}, |t-0.5| = {:.4}, iters {}",
        t0.elapsed(), mu_err, (est.t.unwrap() - 0.5).abs(), est.iters_used
    );

    // oracle row for criterion 2
    let t0 = Instant::now();
    let est = diffusion_mean(oracle.as_ref(), m.as_ref(), &data, &ocfg).unwrap();
    let mu_err = (m.embed(&est.mu).unwrap() - m.embed(&x0).unwrap()).norm();
    println!(
        "oracle estimation: {:.1?}, |mu-x0| = {:.4}, |t-0.5| = {:.4}, iters {}",
        t0.elapsed(), mu_err, (est.t.unwrap() - 0.5).abs(), est.iters_used
    );
}
