use super::*;
use crate::closedform::t_harmonic;
use crate::dyson::ahk::{ahk_propagator, FourierMeasure};
use crate::dyson::SeriesOptions;

const SQRT_I: Complex64 = Complex64 { re: std::f64::consts::FRAC_1_SQRT_2, im: std::f64::consts::FRAC_1_SQRT_2 };

fn box1(r: f64) -> Vec<(f64, f64)> {
    vec![(-r, r)]
}

fn opts(paths: usize, seed: u64) -> DossOptions {
    DossOptions { n_paths: paths, ..DossOptions::new(seed) }
}

/// Euclidean Mehler kernel of ∂_t = λ(½∂² − ½x²): (2π sinh τ)^{−1/2}e^{−((x²+x₀²)cosh τ − 2xx₀)/(2 sinh τ)}.
fn euclidean_mehler(x0: f64, x: f64, tau: f64) -> f64 {
    let (s, c) = (tau.sinh(), tau.cosh());
    (2.0 * PI * s).powf(-0.5) * (-((x * x + x0 * x0) * c - 2.0 * x * x0) / (2.0 * s)).exp()
}

#[test]
fn zero_potential_is_exactly_free() {
    let q = PropagatorQuery::new(vec![0.1, -0.3], vec![0.5, 0.2], 0.0, 0.7, None).unwrap();
    let v = AnalyticPotential::zero(vec![(-1.0, 1.0); 2]).unwrap();
    let r = doss_propagator(&q, &v, &opts(1000, 3)).unwrap();
    assert_eq!(r.mean, Complex64::new(1.0, 0.0));
    assert_eq!(r.stderr, 0.0);
    let k0 = crate::closedform::t_free(&q, &[]).unwrap();
    assert!((r.value - k0).norm() < 1e-15 * k0.norm());
    assert!(r.verified);
}

#[test]
fn zero_margin_is_minus_a() {
    let v = AnalyticPotential::new(Potential::Zero, box1(1.0), Some(DossParams { a: 0.3, b: 0.0 })).unwrap();
    let grid = StripGrid { x_points: 5, y_max: 4.0, y_points: 9 };
    assert_eq!(doss_class_margin(&v, SQRT_I, &grid).unwrap(), -0.3);
}

#[test]
fn harmonic_margin_matches_symbolic_expansion() {
    // Im (x + e^{iπ/4}y)² = √2·x·y + y²
    let k = 1.3;
    let v = AnalyticPotential::harmonic(k, box1(1.5)).unwrap();
    let p = v.doss.unwrap();
    let grid = StripGrid { x_points: 7, y_max: 6.0, y_points: 25 };
    let mut oracle = f64::NEG_INFINITY;
    for i in 0..7 {
        let x = -1.5 + 3.0 * i as f64 / 6.0;
        for j in 0..25 {
            let y = -6.0 + 12.0 * j as f64 / 24.0;
            oracle = oracle.max(0.5 * k * k * (2f64.sqrt() * x * y + y * y) - p.a - p.b * y * y);
        }
    }
    let m = doss_class_margin(&v, SQRT_I, &grid).unwrap();
    assert!((m - oracle).abs() < 1e-12);
    assert!(m <= 1e-12);
    let wide = StripGrid { x_points: 9, y_max: 200.0, y_points: 401 };
    assert!(doss_class_margin(&v, SQRT_I, &wide).unwrap() <= 1e-9);
    let tight = AnalyticPotential::new(Potential::Harmonic { k }, box1(1.5), Some(DossParams { a: p.a, b: 0.4 * k * k })).unwrap();
    assert!(doss_class_margin(&tight, SQRT_I, &wide).unwrap() > 0.0);
}

#[test]
fn sextic_imaginary_part_is_bounded_above() {
    let v = AnalyticPotential::new(Potential::Polynomial { coeffs: vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.7] }, box1(1.0), Some(DossParams { a: 0.0, b: 0.0 })).unwrap();
    let near = doss_class_margin(&v, SQRT_I, &StripGrid { x_points: 11, y_max: 4.0, y_points: 801 }).unwrap();
    let far = doss_class_margin(&v, SQRT_I, &StripGrid { x_points: 11, y_max: 400.0, y_points: 80_001 }).unwrap();
    assert!(near > 0.0 && near.is_finite());
    assert!((far - near).abs() < 1e-6 * near.max(1.0), "{near} vs {far}");
    let a = AnalyticPotential { doss: Some(DossParams { a: near + 1e-9, b: 0.0 }), ..v.clone() };
    assert!(doss_class_margin(&a, SQRT_I, &StripGrid { x_points: 11, y_max: 400.0, y_points: 80_001 }).unwrap() <= 0.0);
    let quartic = AnalyticPotential { v: Potential::Polynomial { coeffs: vec![0.0, 0.0, 0.0, 0.0, 1.0] }, ..a };
    assert!(doss_class_margin(&quartic, SQRT_I, &StripGrid { x_points: 11, y_max: 400.0, y_points: 801 }).unwrap() > 1e3);
}

#[test]
fn lp_estimate_threshold() {
    let t = 0.8;
    let p = 1.2;
    let free = AnalyticPotential::new(Potential::Zero, box1(1.0), Some(DossParams { a: 0.4, b: 0.0 })).unwrap();
    let e = doss_lp_estimate(&free, t, p).unwrap();
    // 2√(2/πt)e^{pta}·½√(2πt) = 2e^{pta}
    assert!((e.bound - 2.0 * (p * t * 0.4).exp()).abs() < 1e-13);
    let thr = 3.0 / (14.0 * p * t * t);
    assert!((e.threshold - thr).abs() < 1e-15);
    let at = |b: f64| AnalyticPotential { doss: Some(DossParams { a: 0.4, b }), ..free.clone() };
    let below = doss_lp_estimate(&at(0.95 * thr), t, p).unwrap();
    assert!(below.convergent && below.bound.is_finite());
    let above = doss_lp_estimate(&at(1.05 * thr), t, p).unwrap();
    assert!(!above.convergent && above.bound.is_infinite());
    assert!(doss_lp_estimate(&free, t, 0.5).is_err());
}

#[test]
fn empirical_moment_below_bound() {
    let q = PropagatorQuery::one_d(0.2, -0.3, 0.0, 0.5).unwrap();
    let v = AnalyticPotential::harmonic(1.0, box1(1.0)).unwrap();
    let p = 1.1;
    let bound = doss_lp_estimate(&v, 0.5, p).unwrap();
    assert!(bound.convergent);
    let (m, se) = doss_lp_moment(&q, &v, p, &opts(100_000, 11)).unwrap();
    assert!(m + 3.0 * se <= bound.bound, "{m} ± {se} vs {}", bound.bound);
}

#[test]
fn harmonic_matches_mehler() {
    let q = PropagatorQuery::new(vec![0.2], vec![-0.3], 0.0, 0.5, Some(1.0)).unwrap();
    let v = AnalyticPotential::harmonic(1.0, box1(1.0)).unwrap();
    let r = doss_propagator(&q, &v, &opts(100_000, 5)).unwrap();
    let exact = t_harmonic(&q, &[]).unwrap();
    assert!(r.verified, "{:?}", r.warning);
    assert!((r.value - exact).norm() < 3.0 * r.stderr + r.bias, "{} vs {exact} ± {}", r.value, r.stderr);
}

#[test]
fn cosine_matches_series_engine() {
    let q = PropagatorQuery::one_d(0.0, 0.5, 0.0, 1.0).unwrap();
    let v = AnalyticPotential::cosine(0.2, vec![1.0], box1(1.0)).unwrap();
    let r = doss_propagator(&q, &v, &opts(100_000, 9)).unwrap();
    assert!(!r.verified && r.warning.as_deref().unwrap().starts_with("unverified regime"));
    let series = ahk_propagator(&q, &FourierMeasure::cosine(0.2, &[1.0]), &SeriesOptions::ahk()).unwrap();
    assert!((r.value - series.value).norm() < 3.0 * r.stderr + r.bias, "{} vs {}", r.value, series.value);
}

#[test]
fn real_lambda_matches_euclidean_mehler() {
    let q = PropagatorQuery::one_d(0.3, -0.2, 0.0, 0.8).unwrap();
    let v = AnalyticPotential::harmonic(1.0, box1(1.0)).unwrap();
    for lam in [0.5f64, 1.0] {
        let o = DossOptions { z: Complex64::new(lam.sqrt(), 0.0), ..opts(100_000, 21) };
        let r = doss_propagator(&q, &v, &o).unwrap();
        let exact = euclidean_mehler(0.3, -0.2, lam * 0.8);
        assert!(r.value.im.abs() < 1e-15);
        assert!((r.value.re - exact).abs() < 3.0 * r.stderr + r.bias, "λ={lam}: {} vs {exact} ± {}", r.value, r.stderr);
    }
}

#[test]
fn regime_flags() {
    let v = AnalyticPotential::harmonic(1.0, box1(1.0)).unwrap();
    let short = PropagatorQuery::one_d(0.0, 0.5, 0.0, 0.5).unwrap();
    let long = PropagatorQuery::one_d(0.0, 0.5, 0.0, 1.0).unwrap();
    let outside = PropagatorQuery::one_d(0.0, 1.5, 0.0, 0.5).unwrap();
    assert!(doss_propagator(&short, &v, &opts(100, 1)).unwrap().verified);
    assert!(!doss_propagator(&long, &v, &opts(100, 1)).unwrap().verified);
    assert!(!doss_propagator(&outside, &v, &opts(100, 1)).unwrap().verified);
}

#[test]
fn option_checks() {
    let q = PropagatorQuery::one_d(0.0, 0.5, 0.0, 0.5).unwrap();
    let v = AnalyticPotential::harmonic(1.0, box1(1.0)).unwrap();
    let no_seed = DossOptions { seed: None, ..opts(100, 1) };
    assert!(matches!(doss_propagator(&q, &v, &no_seed), Err(Error::Invalid(_))));
    assert!(doss_propagator(&q, &v, &DossOptions { n_steps: 255, ..opts(100, 1) }).is_err());
    assert!(doss_propagator(&q, &v, &DossOptions { z: Complex64::new(0.0, 1.0), ..opts(100, 1) }).is_err());
    let v2 = AnalyticPotential::harmonic(1.0, vec![(-1.0, 1.0); 2]).unwrap();
    assert!(doss_propagator(&q, &v2, &opts(100, 1)).is_err());
}

#[test]
fn bridge_endpoints_and_layout() {
    let b = bridge_path(42, 7, 64, 2);
    for l in 0..2 {
        assert_eq!(b.value(0, l), 0.0);
        assert_eq!(b.value(64, l), 0.0);
    }
    assert_ne!(b.value(32, 0), b.value(32, 1));
    assert_eq!(b, bridge_path(42, 7, 64, 2));
    assert_ne!(b, bridge_path(42, 8, 64, 2));
}

#[test]
fn bridge_covariance_within_mc_error() {
    let r = bridge_covariance(100_000, 64, 17, &[8, 16, 32, 48, 56], Exec::default()).unwrap();
    for a in 0..5 {
        assert!(r.mean[a].abs() < 4.0 * r.mean_stderr[a], "mean {a}: {}", r.mean[a]);
        for b in 0..5 {
            assert!((r.cov[a][b] - r.exact[a][b]).abs() < 4.0 * r.stderr[a][b], "cov {a},{b}: {} vs {}", r.cov[a][b], r.exact[a][b]);
        }
    }
}

#[test]
fn bridge_midpoint_marginal_passes_ks() {
    let xs = bridge_marginal(20_000, 64, 0, 32, Exec::default());
    let ks = ks_normal(&xs, 0.5).unwrap();
    assert!(ks.p_value > 0.01, "{ks:?}");
    let wrong = ks_normal(&xs, 0.6).unwrap();
    assert!(wrong.p_value < 0.01, "{wrong:?}");
}

#[test]
fn seed_determinism_and_thread_independence() {
    let q = PropagatorQuery::one_d(0.0, 0.5, 0.0, 1.0).unwrap();
    let v = AnalyticPotential::cosine(0.2, vec![1.0], box1(1.0)).unwrap();
    let seq = DossOptions { exec: Exec::Sequential, ..opts(5000, 99) };
    let par = DossOptions { exec: Exec::Parallel, ..seq };
    let a = doss_propagator(&q, &v, &seq).unwrap();
    let b = doss_propagator(&q, &v, &par).unwrap();
    let c = doss_propagator(&q, &v, &seq).unwrap();
    assert_eq!(a.value, b.value);
    assert_eq!(a, c);
    let other = doss_propagator(&q, &v, &DossOptions { seed: Some(100), ..seq }).unwrap();
    assert_ne!(a.value, other.value);
}

