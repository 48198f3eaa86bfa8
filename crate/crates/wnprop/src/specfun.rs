//! Special functions: physicists' Hermite polynomials, the Jacobi theta
//! series and the singular simplex volume.
//!
//! Hermite polynomials use the physicists' normalization H_n. The
//! probabilists' polynomials follow from He_n(x) = 2^{-n/2} H_n(x/√2).

use crate::error::{Error, Result};
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

/// Largest degree accepted by [`hermite`].
pub const HERMITE_MAX_DEGREE: usize = 300;

/// Physicists' Hermite polynomial H_n(z) by forward recurrence.
pub fn hermite(n: usize, z: Complex64) -> Result<Complex64> {
    Ok(*hermite_all(n, z)?.last().expect("non-empty"))
}

/// H_0(z), ..., H_n(z).
pub fn hermite_all(n: usize, z: Complex64) -> Result<Vec<Complex64>> {
    if n > HERMITE_MAX_DEGREE {
        return Err(Error::domain(format!(
            "hermite degree {n} exceeds {HERMITE_MAX_DEGREE}"
        )));
    }
    let mut h = Vec::with_capacity(n + 1);
    h.push(Complex64::new(1.0, 0.0));
    if n >= 1 {
        h.push(z * 2.0);
    }
    for k in 1..n {
        let next = z * h[k] * 2.0 - h[k - 1] * (2.0 * k as f64);
        h.push(next);
    }
    Ok(h)
}

/// Probabilists' Hermite polynomials He_0(x), ..., He_n(x).
pub fn hermite_prob_all(n: usize, x: Complex64) -> Vec<Complex64> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(Complex64::new(1.0, 0.0));
    if n >= 1 {
        h.push(x);
    }
    for k in 1..n {
        let next = x * h[k] - h[k - 1] * k as f64;
        h.push(next);
    }
    h
}

/// Normalized polynomials h_n(x) = H_n(x)/√(2^n n!) for n ≤ `n`.
///
/// The scaled recurrence stays in range for degrees far beyond
/// [`HERMITE_MAX_DEGREE`].
pub fn hermite_normalized_all(n: usize, z: Complex64) -> Vec<Complex64> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(Complex64::new(1.0, 0.0));
    if n >= 1 {
        h.push(z * std::f64::consts::SQRT_2);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = z * h[k] * (2.0 / (kf + 1.0)).sqrt() - h[k - 1] * (kf / (kf + 1.0)).sqrt();
        h.push(next);
    }
    h
}

/// Jacobi theta ϑ(ρ, τ) = Σ_n exp(πi n² τ + 2πi n ρ), Im τ > 0.
pub fn theta(rho: Complex64, tau: Complex64) -> Result<Complex64> {
    theta_terms(rho, tau, None)
}

/// Theta series truncated to |n - n₀| ≤ `cutoff` around the dominant index n₀.
pub fn theta_with_cutoff(rho: Complex64, tau: Complex64, cutoff: usize) -> Result<Complex64> {
    theta_terms(rho, tau, Some(cutoff))
}

fn theta_terms(rho: Complex64, tau: Complex64, cutoff: Option<usize>) -> Result<Complex64> {
    if !(tau.im > 0.0) {
        return Err(Error::domain(format!("theta needs Im tau > 0, got {tau}")));
    }
    let i = Complex64::i();
    let term = |n: i64| {
        let nf = n as f64;
        (i * PI * (nf * nf * tau + 2.0 * nf * rho)).exp()
    };
    let center = (-rho.im / tau.im).round() as i64;
    let log_mag = |n: i64| {
        let nf = n as f64;
        -PI * (nf * nf * tau.im + 2.0 * nf * rho.im)
    };
    let peak = log_mag(center);
    let mut sum = term(center);
    let mut k: i64 = 1;
    loop {
        if let Some(c) = cutoff {
            if k as usize > c {
                break;
            }
        }
        let lo = log_mag(center - k);
        let hi = log_mag(center + k);
        sum += term(center - k) + term(center + k);
        if cutoff.is_none() && lo.max(hi) - peak < -40.0 && k > 1 {
            break;
        }
        k += 1;
        if k > 1_000_000 {
            return Err(Error::tolerance("theta series did not converge"));
        }
    }
    Ok(sum)
}

/// ∫ over the ordered simplex in |Δ| of Π_{j=1}^{n+1} (2π|t_j − t_{j−1}|)^{−α}.
///
/// Closed form (Γ(1−α)/(2π)^α)^{n+1} |Δ|^{n(1−α)−α} / Γ((n+1)(1−α)) in log space.
pub fn simplex_singular_volume(n: usize, alpha: f64, delta: f64) -> Result<f64> {
    if !(alpha < 1.0) {
        return Err(Error::domain(format!("alpha must be < 1, got {alpha}")));
    }
    if !(delta > 0.0) {
        return Err(Error::domain(format!("interval length must be > 0, got {delta}")));
    }
    let nf = n as f64;
    let lg = (nf + 1.0) * (ln_gamma(1.0 - alpha) - alpha * (2.0 * PI).ln())
        + (nf * (1.0 - alpha) - alpha) * delta.ln()
        - ln_gamma((nf + 1.0) * (1.0 - alpha));
    Ok(lg.exp())
}

/// Upper bound √(n!·2^n)·e^{√(2n)|Im λ|} for |H_n(λ)|.
pub fn hermite_growth_bound(n: usize, lambda: Complex64) -> f64 {
    let nf = n as f64;
    (0.5 * (ln_gamma(nf + 1.0) + nf * 2f64.ln()) + (2.0 * nf).sqrt() * lambda.im.abs()).exp()
}
