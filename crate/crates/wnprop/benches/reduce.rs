use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use wnprop::closedform::PropagatorQuery;
use wnprop::dossmc::{doss_propagator, AnalyticPotential, DossOptions};
use wnprop::dyson::ahk::{ahk_order_n, FourierMeasure};
use wnprop::dyson::SeriesOptions;
use wnprop::Exec;

fn modes() -> [(&'static str, Exec); 2] {
    [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)]
}

fn plain_sum(c: &mut Criterion) {
    let mut g = c.benchmark_group("sum_c");
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::new(name, 1_000_000), &exec, |b, &exec| {
            b.iter(|| exec.sum_c(black_box(1_000_000), |i| Complex64::new((i as f64 * 1e-3).sin(), (i as f64 * 1e-3).cos())))
        });
    }
    g.finish();
}

fn series_order(c: &mut Criterion) {
    let q = PropagatorQuery::one_d(0.0, 0.5, 0.0, 1.0).unwrap();
    let m = FourierMeasure::cosine(0.2, &[1.0]);
    let mut g = c.benchmark_group("ahk_order_4");
    g.sample_size(10);
    for (name, exec) in modes() {
        let opts = SeriesOptions { exec, ..SeriesOptions::ahk() };
        g.bench_function(name, |b| b.iter(|| ahk_order_n(&q, &m, 4, &[], &opts).unwrap()));
    }
    g.finish();
}

fn bridge_mc(c: &mut Criterion) {
    let q = PropagatorQuery::one_d(0.0, 0.5, 0.0, 1.0).unwrap();
    let v = AnalyticPotential::cosine(0.2, vec![1.0], vec![(-1.0, 1.0)]).unwrap();
    let mut g = c.benchmark_group("doss_10k_paths");
    g.sample_size(10);
    for (name, exec) in modes() {
        let opts = DossOptions { n_paths: 10_000, exec, ..DossOptions::new(1) };
        g.bench_function(name, |b| b.iter(|| doss_propagator(&q, &v, &opts).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, plain_sum, series_order, bridge_mc);
criterion_main!(benches);
