//! Parallel versus sequential evaluation of the heavy sweeps.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use satqkd_core::cv::{key_rate_point, worst_case_rate, ChannelObservation, CvScenario, GridSpec, Method};
use satqkd_core::{lidar::MonitorSetup, par};

fn observation() -> ChannelObservation {
    ChannelObservation {
        t_eq: 0.3,
        xi: 0.05,
        ..Default::default()
    }
}

/// Width of the parallel pool; at least four so the comparison exists on
/// small machines.
fn wide() -> usize {
    rayon::current_num_threads().max(4)
}

fn grid_map(c: &mut Criterion) {
    let obs = observation();
    let base = CvScenario {
        eta_ae: 0.5,
        ..Default::default()
    };
    let n = 101;
    let point = |i: usize| {
        let scn = base.with_channel((i / n) as f64 / (n - 1) as f64, (i % n) as f64 / (n - 1) as f64);
        key_rate_point(&scn, &obs, Method::Rr).map(|p| p.rate).ok()
    };
    let mut g = c.benchmark_group("rr_grid_101x101");
    g.sample_size(10);
    g.bench_function("sequential", |b| b.iter(|| par::map_indexed_seq(n * n, point)));
    g.bench_function("rayon", |b| b.iter(|| par::map_indexed(n * n, point)));
    g.finish();
}

fn worst_case_threads(c: &mut Criterion) {
    let obs = observation();
    let base = CvScenario {
        eta_ae: 0.5,
        ..Default::default()
    };
    let grid = GridSpec::default();
    let mut g = c.benchmark_group("worst_case_rr");
    g.sample_size(10);
    for threads in [1, wide()] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(threads), &threads, |b, _| {
            b.iter(|| pool.install(|| worst_case_rate(&base, &obs, Method::Rr, &grid).unwrap()))
        });
    }
    g.finish();
}

fn lidar_profile(c: &mut Criterion) {
    let setup = MonitorSetup::default();
    let mut g = c.benchmark_group("lidar_profile_20001");
    for threads in [1, wide()] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(threads), &threads, |b, _| {
            b.iter(|| pool.install(|| setup.profile(20_001).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, grid_map, worst_case_threads, lidar_profile);
criterion_main!(benches);
