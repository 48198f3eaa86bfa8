//! Closed-form propagators and T/S-transforms: free particle, forced and harmonic
//! oscillator, pinned-path chains, the circle, Donsker series and local time.
//!
//! Test functions are passed as one [`GridFunction`] per space dimension; an empty
//! slice stands for θ ≡ 0. Complex square roots use the principal branch; harmonic
//! queries are restricted to `0 < k|Δ| < π/2`.

mod grid;

pub use grid::{GridFunction, MIN_GRID_POINTS};

use crate::error::{Error, Result};
use crate::extrap::{extrapolate, Extrapolated};
use crate::quad::{adaptive, adaptive_panels, QuadResult};
use crate::specfun::theta;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Endpoints, times and optional oscillator frequency of a propagator query.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorQuery {
    /// Start point x⃗₀.
    pub x0: Vec<f64>,
    /// End point x⃗.
    pub x: Vec<f64>,
    /// Start time.
    pub t0: f64,
    /// End time.
    pub t: f64,
    /// Oscillator frequency for harmonic queries.
    pub k: Option<f64>,
}

impl PropagatorQuery {
    /// Validated query; requires equal, non-zero dimensions and `t > t₀`.
    pub fn new(x0: Vec<f64>, x: Vec<f64>, t0: f64, t: f64, k: Option<f64>) -> Result<Self> {
        if x0.is_empty() || x0.len() != x.len() {
            return Err(Error::invalid("endpoints must share a non-zero dimension"));
        }
        if !(t > t0) {
            return Err(Error::domain(format!("propagator needs t > t0, got t0={t0}, t={t}")));
        }
        if let Some(k) = k {
            if !(k > 0.0) {
                return Err(Error::domain(format!("oscillator frequency must be positive, got {k}")));
            }
        }
        Ok(Self { x0, x, t0, t, k })
    }

    /// One-dimensional convenience constructor.
    pub fn one_d(x0: f64, x: f64, t0: f64, t: f64) -> Result<Self> {
        Self::new(vec![x0], vec![x], t0, t, None)
    }

    /// Space dimension d.
    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// |Δ| = t − t₀.
    pub fn duration(&self) -> f64 {
        self.t - self.t0
    }
}

/// Intermediate pinning point (x⃗_j, t_j).
#[derive(Debug, Clone, PartialEq)]
pub struct Pin {
    /// Position.
    pub x: Vec<f64>,
    /// Time.
    pub t: f64,
}

pub(crate) fn component<'a>(theta: &'a [GridFunction], d: usize, j: usize) -> Result<Option<&'a GridFunction>> {
    match theta.len() {
        0 => Ok(None),
        n if n == d => Ok(Some(&theta[j])),
        n => Err(Error::invalid(format!("test function has {n} components, query dimension is {d}"))),
    }
}

fn val(xi: Option<&GridFunction>, t: f64) -> Complex64 {
    xi.map_or(ZERO, |g| g.value(t))
}

fn int(xi: Option<&GridFunction>, a: f64, b: f64) -> Complex64 {
    xi.map_or(ZERO, |g| g.integral(a, b))
}

fn int_sq(xi: Option<&GridFunction>, a: f64, b: f64) -> Complex64 {
    xi.map_or(ZERO, |g| g.integral_sq(a, b))
}

fn total_sq(xi: Option<&GridFunction>) -> Complex64 {
    xi.map_or(ZERO, |g| g.total_sq())
}

/// (2πi·dt)^{−1/2} on the principal branch.
fn free_prefactor(dt: f64) -> Complex64 {
    Complex64::from_polar((2.0 * PI * dt).powf(-0.5), -PI / 4.0)
}

/// Sourced free kernel K₀^{(ξ̇)}(x,t|x₀,t₀) in one dimension; the Green's function of
/// i∂_t + ½∂²_x − ξ̇x.
pub fn free_kernel(x0: f64, t0: f64, x: f64, t: f64, xi: Option<&GridFunction>) -> Result<Complex64> {
    if !(t > t0) {
        return Err(Error::domain(format!("propagator needs t > t0, got t0={t0}, t={t}")));
    }
    let dt = t - t0;
    let s = int(xi, t0, t) + x - x0;
    let phase = I * (x0 * val(xi, t0) - x * val(xi, t)) - 0.5 * I * int_sq(xi, t0, t) + I * s * s / (2.0 * dt);
    Ok(free_prefactor(dt) * phase.exp())
}

/// T-transform of the free Feynman integrand:
/// (2πi|Δ|)^{−d/2}·exp(−(i/2)|θ|² − (1/(2i|Δ|))(∫_Δθ + x⃗ − x⃗₀)²).
pub fn t_free(q: &PropagatorQuery, theta: &[GridFunction]) -> Result<Complex64> {
    let d = q.dim();
    let dt = q.duration();
    let mut out = ONE;
    for j in 0..d {
        let xi = component(theta, d, j)?;
        out *= free_factor(xi, q.t0, q.t, q.x0[j], q.x[j], dt);
    }
    Ok(out)
}

/// One coordinate of [`t_free`].
pub(crate) fn free_factor(xi: Option<&GridFunction>, t0: f64, t: f64, x0: f64, x: f64, dt: f64) -> Complex64 {
    let s = int(xi, t0, t) + x - x0;
    free_prefactor(dt) * (-0.5 * I * total_sq(xi) + I * s * s / (2.0 * dt)).exp()
}

fn chain_points(q: &PropagatorQuery, pins: &[Pin]) -> Result<Vec<(Vec<f64>, f64)>> {
    let mut pts = vec![(q.x0.clone(), q.t0)];
    for p in pins {
        if p.x.len() != q.dim() {
            return Err(Error::invalid("pin dimension differs from query dimension"));
        }
        pts.push((p.x.clone(), p.t));
    }
    pts.push((q.x.clone(), q.t));
    if pts.windows(2).any(|w| !(w[1].1 > w[0].1)) {
        return Err(Error::domain("pins must satisfy t0 < t1 < ... < tn < t"));
    }
    Ok(pts)
}

fn pinned_chain<K>(q: &PropagatorQuery, pins: &[Pin], theta: &[GridFunction], kernel: K) -> Result<Complex64>
where
    K: Fn(f64, f64, f64, f64, Option<&GridFunction>) -> Result<Complex64>,
{
    let pts = chain_points(q, pins)?;
    let d = q.dim();
    let mut out = ONE;
    for j in 0..d {
        let xi = component(theta, d, j)?;
        let outside = total_sq(xi) - int_sq(xi, q.t0, q.t);
        out *= (-0.5 * I * outside + I * (q.x[j] * val(xi, q.t) - q.x0[j] * val(xi, q.t0))).exp();
        for w in pts.windows(2) {
            out *= kernel(w[0].0[j], w[0].1, w[1].0[j], w[1].1, xi)?;
        }
    }
    Ok(out)
}

/// T-transform of the pinned free integrand Π_j δ(x(t_j) − x⃗_j)·I₀: the product of
/// sourced segment kernels with the outside phase; no pins reduces to [`t_free`].
pub fn t_free_pinned(q: &PropagatorQuery, pins: &[Pin], theta: &[GridFunction]) -> Result<Complex64> {
    pinned_chain(q, pins, theta, free_kernel)
}

fn check_harmonic(k: f64, dt: f64) -> Result<()> {
    let kt = k * dt;
    if !(k > 0.0) || !(kt > 0.0 && kt < FRAC_PI_2) {
        return Err(Error::domain(format!("harmonic requires 0 < k|Δ| < π/2, got k|Δ| = {kt}")));
    }
    Ok(())
}

fn harmonic_k(q: &PropagatorQuery) -> Result<f64> {
    q.k.ok_or_else(|| Error::invalid("harmonic query needs an oscillator frequency k"))
}

/// Mehler kernel √(k/(2πi sin kT))·exp{(ik/(2 sin kT))[(x₀²+x²)cos kT − 2x₀x]} for
/// complex time T (principal square root).
pub fn mehler(k: f64, x0: f64, x: f64, time: Complex64) -> Complex64 {
    let s = (time * k).sin();
    let c = (time * k).cos();
    let pref = (k / (2.0 * PI * I * s)).sqrt();
    pref * (I * k / (2.0 * s) * ((x0 * x0 + x * x) * c - 2.0 * x0 * x)).exp()
}

/// Exponent of the forced-oscillator kernel without the |ξ|² term.
fn harmonic_exponent(k: f64, x0: f64, t0: f64, x: f64, t: f64, xi: Option<&GridFunction>) -> Complex64 {
    let dt = t - t0;
    let (s, c) = (k * dt).sin_cos();
    let mut bracket = Complex64::new((x0 * x0 + x * x) * c - 2.0 * x0 * x, 0.0);
    if let Some(g) = xi {
        let a = g.integral_weighted(t0, t, |u| ONE * (k * (u - t0)).cos());
        let b = g.integral_weighted(t0, t, |u| ONE * (k * (t - u)).cos());
        let dd = g.ordered_double_integral(t0, t, |u| ONE * (k * (t - u)).cos(), |u| ONE * (k * (u - t0)).cos());
        bracket += 2.0 * x * a - 2.0 * x0 * b + 2.0 * dd;
    }
    I * k / (2.0 * s) * bracket
}

fn harmonic_prefactor(k: f64, dt: f64) -> Complex64 {
    (Complex64::new(k / (2.0 * PI * (k * dt).sin()), 0.0) / I).sqrt()
}

/// Sourced harmonic kernel K_h^{(ξ̇)}(x,t|x₀,t₀): Green's function of
/// i∂_t + ½∂²_x − ½k²x² − ξ̇x, for 0 < k|Δ| < π/2.
pub fn harmonic_kernel(k: f64, x0: f64, t0: f64, x: f64, t: f64, xi: Option<&GridFunction>) -> Result<Complex64> {
    if !(t > t0) {
        return Err(Error::domain(format!("propagator needs t > t0, got t0={t0}, t={t}")));
    }
    check_harmonic(k, t - t0)?;
    let phase = harmonic_exponent(k, x0, t0, x, t, xi) - 0.5 * I * int_sq(xi, t0, t)
        + I * (x0 * val(xi, t0) - x * val(xi, t));
    Ok(harmonic_prefactor(k, t - t0) * phase.exp())
}

/// Forced-oscillator T-transform; θ = 0 gives the Mehler kernel.
pub fn t_harmonic(q: &PropagatorQuery, theta: &[GridFunction]) -> Result<Complex64> {
    let k = harmonic_k(q)?;
    let dt = q.duration();
    check_harmonic(k, dt)?;
    let d = q.dim();
    let mut out = ONE;
    for j in 0..d {
        let xi = component(theta, d, j)?;
        let e = harmonic_exponent(k, q.x0[j], q.t0, q.x[j], q.t, xi) - 0.5 * I * total_sq(xi);
        out *= harmonic_prefactor(k, dt) * e.exp();
    }
    Ok(out)
}

/// Pinned harmonic T-transform: chain of sourced harmonic segment kernels; each
/// segment must satisfy k|Δ_j| < π/2.
pub fn t_harmonic_pinned(q: &PropagatorQuery, pins: &[Pin], theta: &[GridFunction]) -> Result<Complex64> {
    let k = harmonic_k(q)?;
    pinned_chain(q, pins, theta, |a, s, b, t, xi| harmonic_kernel(k, a, s, b, t, xi))
}

/// ∫ (one-pin chain at x₁)·e^{−εx₁²} dx₁ in one dimension, with the pin at time `t1`.
pub fn chapman_kolmogorov_regularized(
    q: &PropagatorQuery,
    t1: f64,
    theta: &[GridFunction],
    eps: f64,
    harmonic: bool,
) -> Result<QuadResult> {
    if q.dim() != 1 {
        return Err(Error::invalid("regularized Chapman–Kolmogorov is one-dimensional"));
    }
    if !(eps > 0.0) {
        return Err(Error::domain("regularizer ε must be positive"));
    }
    let centre = 0.5 * (q.x0[0] + q.x[0]);
    let half = (40.0 / eps).sqrt() + centre.abs() + 2.0;
    let panels = 400usize;
    let breaks: Vec<f64> = (0..=panels).map(|i| -half + 2.0 * half * i as f64 / panels as f64).collect();
    let f = |x1: f64| {
        let pin = [Pin { x: vec![x1], t: t1 }];
        let v = if harmonic { t_harmonic_pinned(q, &pin, theta) } else { t_free_pinned(q, &pin, theta) };
        v.unwrap_or(Complex64::new(f64::NAN, 0.0)) * (-eps * x1 * x1).exp()
    };
    if !(t1 > q.t0 && t1 < q.t) {
        return Err(Error::domain("pin time must lie strictly inside (t0, t)"));
    }
    adaptive_panels(f, &breaks, 1e-13, 1e-12)
}

/// Richardson/Neville extrapolation of [`chapman_kolmogorov_regularized`] to ε = 0.
pub fn chapman_kolmogorov_extrapolated(
    q: &PropagatorQuery,
    t1: f64,
    theta: &[GridFunction],
    eps: &[f64],
    harmonic: bool,
) -> Result<Extrapolated> {
    let vals = eps
        .iter()
        .map(|&e| chapman_kolmogorov_regularized(q, t1, theta, e, harmonic).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    extrapolate(eps, &vals)
}

/// Circle T-transform e^{−(i/2)∫θ²}·Σ_l a_l exp(−(i/2)l²t + il(−∫₀^tθ + φ₀)).
pub fn circle_propagator(coeffs: &[(i64, Complex64)], phi0: f64, t: f64, theta: Option<&GridFunction>) -> Result<Complex64> {
    if coeffs.is_empty() {
        return Err(Error::invalid("circle propagator needs at least one Fourier coefficient"));
    }
    let shift = -int(theta, 0.0, t) + phi0;
    let sum: Complex64 = coeffs
        .iter()
        .map(|&(l, a)| {
            let l = l as f64;
            a * (-0.5 * I * l * l * t + I * l * shift).exp()
        })
        .sum();
    Ok((-0.5 * I * total_sq(theta)).exp() * sum)
}

/// S-transform of Σ_n σ_zδ(⟨ω,η⟩ − a + n) at ⟨θ,η⟩ = `theta_pair`, via the Jacobi theta
/// function: Sσ_zδ(θ)·ϑ((i/(2πz|η|²))(⟨θ,η⟩ − a/z), i/(2πz²|η|²)). Requires Re z^{−2} > 0.
pub fn donsker_series_s(eta: &[f64], a: Complex64, z: Complex64, theta_pair: Complex64) -> Result<Complex64> {
    let s: f64 = eta.iter().map(|e| e * e).sum();
    if !(s > 0.0) {
        return Err(Error::invalid("η must be non-zero"));
    }
    if !((z * z).inv().re > 1e-14) {
        return Err(Error::domain(format!("z = {z} is outside S0 (Re z^-2 <= 0)")));
    }
    let u = theta_pair - a / z;
    let head = (2.0 * PI * s).powf(-0.5) / z * (-(u * u) / (2.0 * s)).exp();
    let rho = I * u / (2.0 * PI * z * s);
    let tau = I / (2.0 * PI * z * z * s);
    Ok(head * theta(rho, tau)?)
}

/// Expectation of the local time L(τ,a) = (1/τ)∫₀^τ δ(B(t) − a)dt paired with the
/// S-transform at θ (d = 1), by adaptive quadrature in u = √t.
pub fn local_time_expectation(a: Complex64, tau: f64, theta: Option<&GridFunction>) -> Result<QuadResult> {
    if (a * a).re < 0.0 {
        return Err(Error::domain(format!("local time needs Re a^2 >= 0, got a = {a}")));
    }
    if !(tau > 0.0) {
        return Err(Error::invalid("local time needs τ > 0"));
    }
    let c = 2.0 / (2.0 * PI).sqrt();
    let f = |u: f64| {
        if u == 0.0 {
            return if a == ZERO { ONE * c } else { ZERO };
        }
        let w = int(theta, 0.0, u * u) - a;
        c * (-(w * w) / (2.0 * u * u)).exp()
    };
    let r = adaptive(f, 0.0, tau.sqrt(), 1e-15, 1e-13)?;
    Ok(QuadResult { value: r.value / tau, error: r.error / tau })
}
