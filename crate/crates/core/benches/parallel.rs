use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use quantized_backreach::backreach::{verify_all, CheckConfig, Checker, VerifyOptions};
use quantized_backreach::exec::available_jobs;
use quantized_backreach::partition::enumerate_unsafe_partitions;
use quantized_backreach::quant::QuantParams;
use quantized_backreach::synthetic::bearing_policy;

fn verify_partitions(c: &mut Criterion) {
    let params = QuantParams::new(500.0, 100.0, 10.0, (100.0, 200.0), (600.0, 700.0)).unwrap();
    let nets = bearing_policy(1500.0, 40f64.to_radians());
    let space = enumerate_unsafe_partitions(&params, &[0]);
    let checker = Checker::new(
        &nets,
        params,
        CheckConfig {
            rho_init: 2500.0,
            max_depth: 200,
        },
    );
    let subset: Vec<usize> = (0..space.len()).step_by(3).collect();

    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let opts = VerifyOptions {
                jobs: 1,
                ..Default::default()
            };
            black_box(verify_all(&space, Some(&subset), &checker, &opts).unsafe_count)
        })
    });
    let jobs = available_jobs();
    group.bench_function(format!("parallel-{jobs}"), |b| {
        b.iter(|| {
            let opts = VerifyOptions {
                jobs: 0,
                ..Default::default()
            };
            black_box(verify_all(&space, Some(&subset), &checker, &opts).unsafe_count)
        })
    });
    group.finish();
}

criterion_group!(benches, verify_partitions);
criterion_main!(benches);
