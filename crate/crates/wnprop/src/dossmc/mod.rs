//! Complex-scaled Brownian-bridge Monte Carlo for propagators of analytic potentials.
//!
//! With λ = z² the kernel of ∂_tψ = λ(½Δ − V)ψ is
//!
//! (2πλt)^{−d/2} e^{−|x⃗−x⃗₀|²/(2λt)} · E exp(−λt∫₀¹V(x⃗₀ + s(x⃗−x⃗₀) + z√t β(s))ds),
//!
//! β a standard Brownian bridge on [0,1]. At z = √i this is the Schrödinger propagator
//! with prefactor K₀; for real z it is the Feynman–Kac heat kernel with potential λV.
//!
//! Path i draws its increments from ChaCha8 stream i of the seed (step-major,
//! dimension-minor), so estimates do not depend on the thread count.

use crate::closedform::PropagatorQuery;
use crate::error::{Error, Result};
use crate::exec::{Exec, CHUNK};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use std::f64::consts::PI;
use std::fmt;
use std::ops::Add;
use std::sync::Arc;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Default number of time steps on the bridge grid.
pub const DEFAULT_STEPS: usize = 256;

/// Callable potential on complex points.
pub type PotentialFn = Arc<dyn Fn(&[Complex64]) -> Complex64 + Send + Sync>;

/// Built-in and user-supplied analytic potentials.
#[derive(Clone)]
pub enum Potential {
    /// V ≡ 0.
    Zero,
    /// V = ½k²|x⃗|².
    Harmonic {
        /// Frequency k.
        k: f64,
    },
    /// V = g cos(k⃗·x⃗).
    Cosine {
        /// Coupling g.
        g: f64,
        /// Wave vector k⃗.
        k: Vec<f64>,
    },
    /// V = Σ_l Σ_j c_j x_l^j.
    Polynomial {
        /// Coefficients c_0, c_1, … in increasing degree.
        coeffs: Vec<f64>,
    },
    /// Arbitrary analytic continuation.
    Custom(PotentialFn),
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Zero => write!(f, "Zero"),
            Potential::Harmonic { k } => write!(f, "Harmonic {{ k: {k} }}"),
            Potential::Cosine { g, k } => write!(f, "Cosine {{ g: {g}, k: {k:?} }}"),
            Potential::Polynomial { coeffs } => write!(f, "Polynomial {{ coeffs: {coeffs:?} }}"),
            Potential::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Potential {
    fn eval(&self, x: &[Complex64]) -> Complex64 {
        match self {
            Potential::Zero => ZERO,
            Potential::Harmonic { k } => 0.5 * k * k * x.iter().map(|v| v * v).sum::<Complex64>(),
            Potential::Cosine { g, k } => *g * k.iter().zip(x).map(|(a, v)| a * v).sum::<Complex64>().cos(),
            Potential::Polynomial { coeffs } => x
                .iter()
                .map(|v| coeffs.iter().rev().fold(ZERO, |acc, c| acc * v + c))
                .sum(),
            Potential::Custom(f) => f(x),
        }
    }
}

/// Doss-class parameters: Im V(x⃗ + z y⃗) ≤ a + b|y⃗|² on D × ℝ^d at z = √i.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DossParams {
    /// Constant a ≥ 0.
    pub a: f64,
    /// Quadratic growth b ≥ 0.
    pub b: f64,
}

/// Potential with its analytic extension, optional Doss parameters and box domain D.
#[derive(Debug, Clone)]
pub struct AnalyticPotential {
    /// The potential.
    pub v: Potential,
    /// Space dimension d.
    pub dim: usize,
    /// Doss parameters for z = √i, when known.
    pub doss: Option<DossParams>,
    /// Box D = Π[lo_l, hi_l].
    pub domain: Vec<(f64, f64)>,
}

impl AnalyticPotential {
    /// General constructor; checks the shapes and the signs of a, b.
    pub fn new(v: Potential, domain: Vec<(f64, f64)>, doss: Option<DossParams>) -> Result<Self> {
        let dim = domain.len();
        if dim == 0 || domain.iter().any(|(lo, hi)| !(lo < hi)) {
            return Err(Error::invalid("domain must be a non-empty box with lo < hi"));
        }
        if let Some(p) = doss {
            if !(p.a >= 0.0 && p.b >= 0.0) {
                return Err(Error::invalid("Doss parameters need a, b >= 0"));
            }
        }
        match &v {
            Potential::Cosine { k, .. } if k.len() != dim => {
                return Err(Error::invalid("cosine wave vector dimension differs from the domain"));
            }
            Potential::Harmonic { k } if !(*k > 0.0) => return Err(Error::domain("harmonic frequency must be positive")),
            Potential::Polynomial { coeffs } if coeffs.is_empty() => {
                return Err(Error::invalid("polynomial needs at least one coefficient"));
            }
            _ => {}
        }
        Ok(Self { v, dim, doss, domain })
    }

    /// V ≡ 0 on D, with a = b = 0.
    pub fn zero(domain: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(Potential::Zero, domain, Some(DossParams { a: 0.0, b: 0.0 }))
    }

    /// V = ½k²|x⃗|² on D. Im V(x⃗+√i y⃗) = ½k²Σ(√2x_l y_l + y_l²); with b = ¾k² the
    /// smallest admissible a is Σ_l k²max(x_l²)/2.
    pub fn harmonic(k: f64, domain: Vec<(f64, f64)>) -> Result<Self> {
        let a = domain.iter().map(|(lo, hi)| 0.5 * k * k * lo.abs().max(hi.abs()).powi(2)).sum();
        Self::new(Potential::Harmonic { k }, domain, Some(DossParams { a, b: 0.75 * k * k }))
    }

    /// V = g cos(k⃗·x⃗) on D; Im V grows like sinh along the strip, so no Doss parameters.
    pub fn cosine(g: f64, k: Vec<f64>, domain: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(Potential::Cosine { g, k }, domain, None)
    }

    /// V(x⃗) at a complex point.
    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        self.v.eval(x)
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.domain).all(|(v, (lo, hi))| v >= lo && v <= hi)
    }
}

/// Sampling lattice on D × [−y_max, y_max]^d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripGrid {
    /// Points per dimension in D.
    pub x_points: usize,
    /// Half-width of the y range.
    pub y_max: f64,
    /// Points per dimension in y.
    pub y_points: usize,
}

fn lattice(ranges: &[(f64, f64)], n: usize) -> Vec<Vec<f64>> {
    let axis = |(lo, hi): (f64, f64)| -> Vec<f64> {
        if n == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        }
    };
    let mut out = vec![vec![]];
    for &r in ranges {
        let ax = axis(r);
        out = out.iter().flat_map(|p| ax.iter().map(move |v| [p.as_slice(), &[*v]].concat())).collect();
    }
    out
}

/// max over the lattice of Im V(x⃗ + z y⃗) − a − b|y⃗|²; ≤ 0 certifies the Doss bound on
/// the lattice.
pub fn doss_class_margin(v: &AnalyticPotential, z: Complex64, grid: &StripGrid) -> Result<f64> {
    let p = v.doss.ok_or_else(|| Error::invalid("potential has no Doss parameters"))?;
    if grid.x_points == 0 || grid.y_points == 0 || !(grid.y_max >= 0.0) {
        return Err(Error::invalid("strip grid needs points and y_max >= 0"));
    }
    let xs = lattice(&v.domain, grid.x_points);
    let ys = lattice(&vec![(-grid.y_max, grid.y_max); v.dim], grid.y_points);
    let mut margin = f64::NEG_INFINITY;
    let mut pt = vec![ZERO; v.dim];
    for x in &xs {
        for y in &ys {
            for l in 0..v.dim {
                pt[l] = x[l] + z * y[l];
            }
            let im = v.eval(&pt).im;
            if !im.is_finite() {
                return Err(Error::domain(format!("potential not evaluable at {pt:?}")));
            }
            let y2: f64 = y.iter().map(|u| u * u).sum();
            margin = margin.max(im - p.a - p.b * y2);
        }
    }
    Ok(margin)
}

/// True when some p > 1 satisfies b < 3/(14pt²).
pub fn doss_regime(b: f64, t: f64) -> bool {
    b < 3.0 / (14.0 * t * t)
}

/// Analytic L^p bound on the bridge functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LpEstimate {
    /// 2d√(2/πt)∫₀^∞exp(pta + (7/3)ptbu² − u²/2t)du, or +∞.
    pub bound: f64,
    /// False when the Gaussian integral diverges.
    pub convergent: bool,
    /// Threshold 3/(14pt²) on b.
    pub threshold: f64,
}

/// Upper bound on E|exp(−it∫V(bridge))|^p from the Doss parameters.
pub fn doss_lp_estimate(v: &AnalyticPotential, t: f64, p: f64) -> Result<LpEstimate> {
    if !(p >= 1.0) || !(t > 0.0) {
        return Err(Error::domain("Lp estimate needs p >= 1 and t > 0"));
    }
    let dp = v.doss.ok_or_else(|| Error::invalid("potential has no Doss parameters"))?;
    let threshold = 3.0 / (14.0 * p * t * t);
    let c = 1.0 / (2.0 * t) - 7.0 / 3.0 * p * t * dp.b;
    if !(c > 0.0) {
        return Ok(LpEstimate { bound: f64::INFINITY, convergent: false, threshold });
    }
    let d = v.dim as f64;
    let bound = 2.0 * d * (2.0 / (PI * t)).sqrt() * (p * t * dp.a).exp() * 0.5 * (PI / c).sqrt();
    Ok(LpEstimate { bound, convergent: true, threshold })
}

/// Sampling options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DossOptions {
    /// Scaling z; λ = z².
    pub z: Complex64,
    /// Number of bridge paths.
    pub n_paths: usize,
    /// Trapezoid steps on [0,1]; must be even.
    pub n_steps: usize,
    /// Seed (required).
    pub seed: Option<u64>,
    /// Execution strategy.
    pub exec: Exec,
}

impl DossOptions {
    /// z = √i, 10⁵ paths, 256 steps.
    pub fn new(seed: u64) -> Self {
        Self { z: Complex64::from_polar(1.0, PI / 4.0), n_paths: 100_000, n_steps: DEFAULT_STEPS, seed: Some(seed), exec: Exec::default() }
    }

    fn check(&self) -> Result<u64> {
        let seed = self.seed.ok_or_else(|| Error::invalid("Monte Carlo runs need an explicit seed"))?;
        if self.n_paths < 2 {
            return Err(Error::invalid("need at least two paths"));
        }
        if self.n_steps < 2 || self.n_steps % 2 != 0 {
            return Err(Error::invalid("n_steps must be even and >= 2"));
        }
        if !((self.z * self.z).re >= 0.0) || self.z == ZERO {
            return Err(Error::domain(format!("z = {} must satisfy Re z² >= 0, z != 0", self.z)));
        }
        Ok(seed)
    }
}

/// Samples of β(s) = W(s) − sW(1) on s_j = j/n_steps, stored step-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgePath {
    /// Steps n_s.
    pub n_steps: usize,
    /// Dimension d.
    pub dim: usize,
    /// Values β_l(s_j) at index j·d + l.
    pub values: Vec<f64>,
}

impl BridgePath {
    /// β_l(s_j).
    pub fn value(&self, j: usize, l: usize) -> f64 {
        self.values[j * self.dim + l]
    }
}

fn stream_rng(key: [u8; 32], index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index as u64);
    rng
}

fn seed_key(seed: u64) -> [u8; 32] {
    ChaCha8Rng::seed_from_u64(seed).get_seed()
}

fn fill_bridge(rng: &mut ChaCha8Rng, n_steps: usize, dim: usize, out: &mut [f64]) {
    let sh = (1.0 / n_steps as f64).sqrt();
    out[..dim].fill(0.0);
    for j in 1..=n_steps {
        for l in 0..dim {
            let z: f64 = rng.sample(StandardNormal);
            out[j * dim + l] = out[(j - 1) * dim + l] + sh * z;
        }
    }
    for l in 0..dim {
        let end = out[n_steps * dim + l];
        for j in 0..=n_steps {
            out[j * dim + l] -= j as f64 / n_steps as f64 * end;
        }
        out[n_steps * dim + l] = 0.0;
    }
}

/// Bridge path `index` of the stream family `seed`.
pub fn bridge_path(seed: u64, index: usize, n_steps: usize, dim: usize) -> BridgePath {
    let mut values = vec![0.0; (n_steps + 1) * dim];
    fill_bridge(&mut stream_rng(seed_key(seed), index), n_steps, dim, &mut values);
    BridgePath { n_steps, dim, values }
}

#[derive(Debug, Clone, Copy)]
struct Moments {
    sum: Complex64,
    sum_sq: f64,
    half: Complex64,
    abs_p: f64,
    abs_p_sq: f64,
}

impl Add for Moments {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { sum: self.sum + o.sum, sum_sq: self.sum_sq + o.sum_sq, half: self.half + o.half, abs_p: self.abs_p + o.abs_p, abs_p_sq: self.abs_p_sq + o.abs_p_sq }
    }
}

const NO_MOMENTS: Moments = Moments { sum: ZERO, sum_sq: 0.0, half: ZERO, abs_p: 0.0, abs_p_sq: 0.0 };

fn sample_functional(q: &PropagatorQuery, v: &AnalyticPotential, opts: &DossOptions, p: f64) -> Result<Moments> {
    let seed = opts.check()?;
    let d = q.dim();
    if v.dim != d {
        return Err(Error::invalid(format!("potential dimension {} differs from query dimension {d}", v.dim)));
    }
    let t = q.duration();
    let n = opts.n_steps;
    let lam = opts.z * opts.z;
    let zs = opts.z * t.sqrt();
    let h = 1.0 / n as f64;
    let key = seed_key(seed);
    let m = opts.exec.chunked_sum(opts.n_paths, CHUNK / 8, NO_MOMENTS, |i| {
        let mut beta = vec![0.0; (n + 1) * d];
        fill_bridge(&mut stream_rng(key, i), n, d, &mut beta);
        let mut pt = vec![ZERO; d];
        let (mut full, mut half) = (ZERO, ZERO);
        for j in 0..=n {
            let s = j as f64 * h;
            for l in 0..d {
                pt[l] = q.x0[l] + s * (q.x[l] - q.x0[l]) + zs * beta[j * d + l];
            }
            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
            let f = v.eval(&pt);
            full += w * f;
            if j % 2 == 0 {
                half += w * f;
            }
        }
        let fv = (-lam * t * h * full).exp();
        let hv = (-lam * t * 2.0 * h * half).exp();
        let ap = fv.norm().powf(p);
        Moments { sum: fv, sum_sq: fv.norm_sqr(), half: hv, abs_p: ap, abs_p_sq: ap * ap }
    });
    if !(m.sum.is_finite() && m.sum_sq.is_finite()) {
        return Err(Error::tolerance("bridge functional overflowed"));
    }
    Ok(m)
}

/// Monte Carlo propagator with its standard error and discretisation bias.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DossEstimate {
    /// Gaussian factor times the path mean.
    pub value: Complex64,
    /// Standard error of `value`.
    pub stderr: f64,
    /// Path mean of the bridge functional.
    pub mean: Complex64,
    /// Standard error of `mean`.
    pub mean_stderr: f64,
    /// (2πλt)^{−d/2}e^{−|x⃗−x⃗₀|²/(2λt)}; K₀ at z = √i.
    pub k0_factor: Complex64,
    /// Estimate on every second grid point.
    pub coarse: Complex64,
    /// |value − coarse|/3, the trapezoid bias estimate.
    pub bias: f64,
    /// Paths used.
    pub n_paths: usize,
    /// Steps used.
    pub n_steps: usize,
    /// Doss bound b < 3/(14t²) holds and x⃗₀, x⃗ ∈ D.
    pub verified: bool,
    /// Reason when not verified.
    pub warning: Option<String>,
}

/// (2πλt)^{−d/2}exp(−|x⃗−x⃗₀|²/(2λt)), λ = z².
pub fn gaussian_factor(q: &PropagatorQuery, z: Complex64) -> Complex64 {
    let lt = z * z * q.duration();
    let r2: f64 = q.x.iter().zip(&q.x0).map(|(a, b)| (a - b) * (a - b)).sum();
    (2.0 * PI * lt).powf(-0.5 * q.dim() as f64) * (-r2 / (2.0 * lt)).exp()
}

fn regime(q: &PropagatorQuery, v: &AnalyticPotential) -> Option<String> {
    if !(v.contains(&q.x0) && v.contains(&q.x)) {
        return Some("unverified regime: endpoints outside the Doss domain".into());
    }
    match v.doss {
        None => Some("unverified regime: no Doss parameters for this potential".into()),
        Some(p) if !doss_regime(p.b, q.duration()) => {
            Some(format!("unverified regime: b = {} >= 3/(14t²) = {}", p.b, 3.0 / (14.0 * q.duration().powi(2))))
        }
        _ => None,
    }
}

/// K(x⃗,t|x⃗₀,t₀) by bridge Monte Carlo; runs outside the Doss regime are flagged, not refused.
pub fn doss_propagator(q: &PropagatorQuery, v: &AnalyticPotential, opts: &DossOptions) -> Result<DossEstimate> {
    let m = sample_functional(q, v, opts, 1.0)?;
    let n = opts.n_paths as f64;
    let mean = m.sum / n;
    let var = ((m.sum_sq - n * mean.norm_sqr()) / (n - 1.0)).max(0.0);
    let mean_stderr = (var / n).sqrt();
    let k0 = gaussian_factor(q, opts.z);
    let value = k0 * mean;
    let coarse = k0 * m.half / n;
    let warning = regime(q, v);
    Ok(DossEstimate {
        value,
        stderr: k0.norm() * mean_stderr,
        mean,
        mean_stderr,
        k0_factor: k0,
        coarse,
        bias: (value - coarse).norm() / 3.0,
        n_paths: opts.n_paths,
        n_steps: opts.n_steps,
        verified: warning.is_none(),
        warning,
    })
}

/// Empirical E|exp(−λt∫V)|^p with its standard error.
pub fn doss_lp_moment(q: &PropagatorQuery, v: &AnalyticPotential, p: f64, opts: &DossOptions) -> Result<(f64, f64)> {
    if !(p >= 1.0) {
        return Err(Error::domain("moment order must be >= 1"));
    }
    let m = sample_functional(q, v, opts, p)?;
    let n = opts.n_paths as f64;
    let mean = m.abs_p / n;
    let var = ((m.abs_p_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// Sample mean and covariance of β(s) at selected grid indices (d = 1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BridgeCovariance {
    /// Grid times s.
    pub s: Vec<f64>,
    /// Sample means.
    pub mean: Vec<f64>,
    /// Sample second moments E β(s_a)β(s_b).
    pub cov: Vec<Vec<f64>>,
    /// min(s,s') − ss'.
    pub exact: Vec<Vec<f64>>,
    /// Standard errors of `cov`.
    pub stderr: Vec<Vec<f64>>,
    /// Standard errors of `mean`.
    pub mean_stderr: Vec<f64>,
}

/// Bridge covariance on `n_paths` one-dimensional paths at the grid indices `at`.
pub fn bridge_covariance(n_paths: usize, n_steps: usize, seed: u64, at: &[usize], exec: Exec) -> Result<BridgeCovariance> {
    if n_paths < 2 || n_steps < 1 || at.iter().any(|&j| j > n_steps) {
        return Err(Error::invalid("bridge covariance needs >= 2 paths and indices on the grid"));
    }
    let k = at.len();
    let key = seed_key(seed);
    let chunks = n_paths.div_ceil(CHUNK);
    let parts = exec.map_collect(chunks, |c| {
        let mut acc = vec![0.0; k + 2 * k * k];
        let mut beta = vec![0.0; n_steps + 1];
        for i in c * CHUNK..((c + 1) * CHUNK).min(n_paths) {
            fill_bridge(&mut stream_rng(key, i), n_steps, 1, &mut beta);
            for (a, &ja) in at.iter().enumerate() {
                acc[a] += beta[ja];
                for (b, &jb) in at.iter().enumerate() {
                    let prod = beta[ja] * beta[jb];
                    acc[k + a * k + b] += prod;
                    acc[k + k * k + a * k + b] += prod * prod;
                }
            }
        }
        acc
    });
    let mut tot = vec![0.0; k + 2 * k * k];
    for p in &parts {
        for (t, v) in tot.iter_mut().zip(p) {
            *t += v;
        }
    }
    let n = n_paths as f64;
    let s: Vec<f64> = at.iter().map(|&j| j as f64 / n_steps as f64).collect();
    let mean: Vec<f64> = tot[..k].iter().map(|v| v / n).collect();
    let cov: Vec<Vec<f64>> = (0..k).map(|a| (0..k).map(|b| tot[k + a * k + b] / n).collect()).collect();
    let stderr = (0..k)
        .map(|a| (0..k).map(|b| ((tot[k + k * k + a * k + b] / n - cov[a][b].powi(2)).max(0.0) / n).sqrt()).collect())
        .collect();
    let exact = s.iter().map(|&u| s.iter().map(|&w| u.min(w) - u * w).collect()).collect();
    let mean_stderr = (0..k).map(|a| ((cov[a][a] - mean[a] * mean[a]).max(0.0) / n).sqrt()).collect();
    Ok(BridgeCovariance { s, mean, cov, exact, stderr, mean_stderr })
}

/// One-sample Kolmogorov–Smirnov result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsTest {
    /// sup |F_n − F|.
    pub statistic: f64,
    /// Asymptotic p-value.
    pub p_value: f64,
}

/// Kolmogorov–Smirnov test of `samples` against N(0, σ²).
pub fn ks_normal(samples: &[f64], sigma: f64) -> Result<KsTest> {
    if samples.is_empty() || !(sigma > 0.0) {
        return Err(Error::invalid("KS test needs samples and sigma > 0"));
    }
    let dist = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let statistic = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = dist.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let sn = n.sqrt();
    let lam = (sn + 0.12 + 0.11 / sn) * statistic;
    let p_value = if lam < 0.2 {
        1.0
    } else {
        (1..=100).map(|j| 2.0 * (-1f64).powi(j - 1) * (-2.0 * (j * j) as f64 * lam * lam).exp()).sum::<f64>().clamp(0.0, 1.0)
    };
    Ok(KsTest { statistic, p_value })
}

/// β(s_j) on `n_paths` one-dimensional paths.
pub fn bridge_marginal(n_paths: usize, n_steps: usize, seed: u64, j: usize, exec: Exec) -> Vec<f64> {
    let key = seed_key(seed);
    exec.map_collect(n_paths, |i| {
        let mut beta = vec![0.0; n_steps + 1];
        fill_bridge(&mut stream_rng(key, i), n_steps, 1, &mut beta);
        beta[j]
    })
}

#[cfg(test)]
mod tests;
