use std::collections::BTreeMap;
use std::hint::black_box;
use std::sync::Arc;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use roughskew::asymptotics::{f_theta, ks_two_sample, skew_estimate};
use roughskew::fbm::{BetaQuadrature, StepScratch, DEFAULT_BETA_MAX, DEFAULT_BETA_MIN, DEFAULT_NODES};
use roughskew::models::model_zoo;
use roughskew::numerics::NormalSource;
use roughskew::pricing::{bs_put, implied_vol, McParams, PutQuote};
use roughskew::{Hurst, OuBank, RngStream};

fn quad(h: f64) -> Arc<BetaQuadrature> {
    BetaQuadrature::build(Hurst::new(h).unwrap(), DEFAULT_NODES, DEFAULT_BETA_MIN, DEFAULT_BETA_MAX).unwrap()
}

fn bank(c: &mut Criterion) {
    let q = quad(0.1);
    let mut group = c.benchmark_group("bank");
    for dt in [1e-4, 1e-2, 1.0] {
        let kernel = q.step_kernel(dt).unwrap();
        let mut rng = RngStream::new(1, 0);
        let mut b = OuBank::stationary(Arc::clone(&q), &mut rng).unwrap();
        let mut scratch = StepScratch::default();
        group.bench_with_input(BenchmarkId::new("step", dt), &dt, |bench, _| {
            bench.iter(|| black_box(b.step_with(&kernel, &mut rng, &mut scratch)));
        });
    }
    group.bench_function("stationary-init", |bench| {
        let mut rng = RngStream::new(2, 0);
        bench.iter(|| black_box(OuBank::stationary(Arc::clone(&q), &mut rng).unwrap()));
    });
    let b = OuBank::stationary(Arc::clone(&q), &mut RngStream::new(3, 0)).unwrap();
    group.bench_function("f-theta", |bench| bench.iter(|| black_box(f_theta(&b, 1e-2).unwrap())));
    group.finish();
}

fn pricing(c: &mut Criterion) {
    let mut group = c.benchmark_group("pricing");
    let quotes: Vec<PutQuote> = [(-0.2, 1e-3, 0.3), (0.0, 1e-2, 0.2), (0.1, 1.0, 0.5)]
        .into_iter()
        .map(|(k, t, s)| PutQuote::exact(k, t, bs_put(k, t, s).unwrap()))
        .collect();
    group.bench_function("implied-vol", |bench| {
        bench.iter(|| {
            for q in &quotes {
                black_box(implied_vol(q).unwrap());
            }
        })
    });
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    let params = McParams { n_paths: 2000, n_steps: 50, ..McParams::default() };
    for name in ["lsv-linear", "rough-bounded"] {
        let spec = model_zoo(name, &BTreeMap::new()).unwrap();
        let q = spec.hurst().map(|h| quad(h.value()));
        let init = spec.initial_state(q.as_ref()).unwrap();
        group.bench_function(BenchmarkId::new("skew-2000-paths", name), |bench| {
            bench.iter(|| black_box(skew_estimate(&spec, &init, 0.1, -0.1, 1e-2, &params).unwrap()))
        });
    }
    group.finish();
}

fn statistics(c: &mut Criterion) {
    let mut rng = RngStream::new(4, 0);
    let a: Vec<f64> = (0..10_000).map(|_| rng.normal()).collect();
    let b: Vec<f64> = (0..10_000).map(|_| rng.normal()).collect();
    c.bench_function("ks-two-sample-1e4", |bench| bench.iter(|| black_box(ks_two_sample(&a, &b).unwrap())));
}

criterion_group!(benches, bank, pricing, statistics);
criterion_main!(benches);
