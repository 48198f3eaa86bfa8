//! One-dimensional Appell systems for non-Gaussian measures.
//!
//! Densities are finite mixtures ρ(x) = Σ_i w_i exp(p_i(x)) / Z with polynomial
//! exponents p_i, so every derivative ρ^{(n)} = Σ_i w_i q_{i,n}(x) e^{p_i(x)}/Z
//! is available symbolically through q_{i,n+1} = q_{i,n}' + q_{i,n}·p_i'.

use crate::error::{Error, Result};
use crate::fock::factorial;
use crate::quad::{adaptive_panels, QuadResult};
use num_complex::Complex64;

/// Dense real polynomial, coefficient `k` multiplies x^k.
pub type Poly = Vec<f64>;

fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn poly_eval_c(p: &[f64], x: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
}

fn poly_deriv(p: &[f64]) -> Poly {
    p.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

fn poly_add(a: &[f64], b: &[f64]) -> Poly {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, v) in a.iter().enumerate() {
        out[i] += v;
    }
    for (i, v) in b.iter().enumerate() {
        out[i] += v;
    }
    out
}

fn poly_mul(a: &[f64], b: &[f64]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn binom(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Smooth positive density on ℝ given as a mixture of exponentials of polynomials.
#[derive(Debug, Clone)]
pub struct Density1D {
    terms: Vec<(f64, Poly)>,
    log_z: f64,
    half_width: f64,
    eps: f64,
}

impl Density1D {
    /// Build from unnormalized terms w_i·exp(p_i(x)); normalizes numerically.
    ///
    /// `eps` is the analyticity radius of the Laplace transform (∞ for
    /// exponents of even degree ≥ 2 with negative leading coefficient).
    pub fn exp_poly_mixture(terms: Vec<(f64, Poly)>, eps: f64) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid("density needs at least one term"));
        }
        for (w, p) in &terms {
            let deg = p.len().saturating_sub(1);
            if !(*w > 0.0) || deg < 2 || deg % 2 == 1 || !(p[deg] < 0.0) {
                return Err(Error::domain(
                    "each term needs positive weight and an exponent of even degree with negative leading coefficient",
                ));
            }
        }
        let mut d = Self { terms, log_z: 0.0, half_width: 1.0, eps };
        d.half_width = d.find_half_width();
        let z = d.integrate(|_| Complex64::new(1.0, 0.0), 1e-15)?.value.re;
        d.log_z = z.ln();
        Ok(d)
    }

    /// Gaussian N(mean, var).
    pub fn gaussian(mean: f64, var: f64) -> Result<Self> {
        if !(var > 0.0) {
            return Err(Error::domain("variance must be positive"));
        }
        let p = vec![-mean * mean / (2.0 * var), mean / var, -1.0 / (2.0 * var)];
        Self::exp_poly_mixture(vec![(1.0, p)], f64::INFINITY)
    }

    /// ρ ∝ e^{−x⁴}.
    pub fn quartic() -> Self {
        Self::exp_poly_mixture(vec![(1.0, vec![0.0, 0.0, 0.0, 0.0, -1.0])], f64::INFINITY)
            .expect("valid quartic density")
    }

    /// Largest ln ρ among mixture terms and the per-term offsets, at x.
    fn log_terms(&self, x: f64) -> Vec<f64> {
        self.terms.iter().map(|(w, p)| w.ln() + poly_eval(p, x)).collect()
    }

    fn find_half_width(&self) -> f64 {
        let mut l: f64 = 1.0;
        loop {
            let worst = [l, -l]
                .iter()
                .map(|&x| self.log_terms(x).into_iter().fold(f64::NEG_INFINITY, f64::max))
                .fold(f64::NEG_INFINITY, f64::max);
            if worst - self.log_z + 44.0 * (1.0 + l).ln() + 2.0 * l < -75.0 || l > 200.0 {
                return l;
            }
            l += 0.5;
        }
    }

    /// Truncation half-width L of the integration domain.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Analyticity radius of the Laplace transform.
    pub fn analyticity_radius(&self) -> f64 {
        self.eps
    }

    /// ρ(x).
    pub fn pdf(&self, x: f64) -> f64 {
        self.log_terms(x).iter().map(|l| (l - self.log_z).exp()).sum()
    }

    /// ρ^{(n)}(x)/ρ(x), computed with log-sum-exp weights.
    pub fn derivative_ratio(&self, n: usize, x: f64) -> Result<f64> {
        let logs = self.log_terms(x);
        let mx = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if mx - self.log_z < -700.0 {
            return Err(Error::domain(format!("density underflows at x = {x}")));
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for ((_, p), l) in self.terms.iter().zip(&logs) {
            let w = (l - mx).exp();
            num += w * poly_eval(&self.derivative_poly(p, n), x);
            den += w;
        }
        Ok(num / den)
    }

    /// q_n with (e^{p})^{(n)} = q_n·e^{p}.
    fn derivative_poly(&self, p: &[f64], n: usize) -> Poly {
        let dp = poly_deriv(p);
        let mut q: Poly = vec![1.0];
        for _ in 0..n {
            q = poly_add(&poly_deriv(&q), &poly_mul(&q, &dp));
        }
        q
    }

    /// ρ^{(n)}(x) directly.
    pub fn derivative(&self, n: usize, x: f64) -> f64 {
        self.terms
            .iter()
            .zip(self.log_terms(x))
            .map(|((_, p), l)| poly_eval(&self.derivative_poly(p, n), x) * (l - self.log_z).exp())
            .sum()
    }

    /// ∫ f dx over [−L, L] on 16 adaptive panels.
    pub fn integrate_dx<F: FnMut(f64) -> Complex64>(&self, f: F, rel_tol: f64) -> Result<QuadResult> {
        let l = self.half_width;
        let breaks: Vec<f64> = (0..=16).map(|i| -l + 2.0 * l * i as f64 / 16.0).collect();
        adaptive_panels(f, &breaks, 0.0, rel_tol)
    }

    /// ∫ f dμ.
    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, mut f: F, rel_tol: f64) -> Result<QuadResult> {
        self.integrate_dx(|x| f(x) * self.pdf(x), rel_tol)
    }

    /// Moments M_0..M_n.
    pub fn moments(&self, n: usize) -> Result<Vec<f64>> {
        (0..=n)
            .map(|k| Ok(self.integrate(|x| Complex64::new(x.powi(k as i32), 0.0), 1e-15)?.value.re))
            .collect()
    }
}

/// l_μ(θ) = ∫ e^{θx} dμ(x) by adaptive quadrature.
pub fn laplace_transform(mu: &Density1D, theta: Complex64) -> Result<Complex64> {
    if !(theta.re.abs() < mu.eps) {
        return Err(Error::domain("theta outside the analyticity strip"));
    }
    Ok(mu.integrate(|x| (theta * x).exp(), 1e-14)?.value)
}

/// P^μ system up to degree N with its moments.
#[derive(Debug, Clone)]
pub struct AppellSystem1D {
    /// M_0..M_{2N}.
    pub moments: Vec<f64>,
    /// P_n(0) for n ≤ N, from the power-series reciprocal of l_μ.
    pub p_at_zero: Vec<f64>,
    /// Monomial coefficients of P_n; `p[n][k]` multiplies x^k.
    pub p: Vec<Poly>,
}

/// P_n(x) = Σ_k C(n,k) x^k P_{n−k}(0) with Σ_n P_n(0)θ^n/n! = 1/l_μ(θ).
pub fn appell_p(mu: &Density1D, n: usize) -> Result<AppellSystem1D> {
    let moments = mu.moments(2 * n)?;
    if (moments[0] - 1.0).abs() > 1e-10 {
        return Err(Error::tolerance("density is not normalized: l_mu(0) != 1"));
    }
    let mut p0 = vec![0.0; n + 1];
    p0[0] = 1.0;
    for m in 1..=n {
        p0[m] = -(1..=m).map(|k| binom(m, k) * moments[k] * p0[m - k]).sum::<f64>();
    }
    let p = (0..=n)
        .map(|m| (0..=m).map(|k| binom(m, k) * p0[m - k]).collect())
        .collect();
    Ok(AppellSystem1D { moments, p_at_zero: p0, p })
}

impl AppellSystem1D {
    /// Degree cap N.
    pub fn degree(&self) -> usize {
        self.p.len() - 1
    }

    /// P_n(x).
    pub fn eval(&self, n: usize, x: f64) -> f64 {
        poly_eval(&self.p[n], x)
    }

    /// Σ φ^{(n)} P_n as monomial coefficients.
    pub fn to_monomial(&self, coeffs: &[f64]) -> Poly {
        let mut out = vec![0.0; coeffs.len()];
        for (n, c) in coeffs.iter().enumerate() {
            for (k, a) in self.p[n].iter().enumerate() {
                out[k] += c * a;
            }
        }
        out
    }

    /// Monomial coefficients to P-basis coefficients via x^n = Σ_k C(n,k) M_k P_{n−k}.
    pub fn from_monomial(&self, mono: &[f64]) -> Result<Vec<f64>> {
        if mono.len() > self.p.len() {
            return Err(Error::invalid("polynomial degree exceeds the Appell system"));
        }
        let mut out = vec![0.0; mono.len()];
        for (n, c) in mono.iter().enumerate() {
            for k in 0..=n {
                out[n - k] += c * binom(n, k) * self.moments[k];
            }
        }
        Ok(out)
    }
}

/// Q_n^μ(x) = (−1)^n ρ^{(n)}(x)/ρ(x).
pub fn appell_q(mu: &Density1D, n: usize, x: f64) -> Result<f64> {
    let r = mu.derivative_ratio(n, x)?;
    Ok(if n % 2 == 0 { r } else { -r })
}

/// ⟨⟨Q_n, P_m⟩⟩_μ = ∫ (−1)^n ρ^{(n)}(x) P_m(x) dx.
pub fn biorthogonality(mu: &Density1D, sys: &AppellSystem1D, n: usize, m: usize) -> Result<f64> {
    if n > sys.degree() || m > sys.degree() {
        return Err(Error::invalid("degree exceeds the Appell system"));
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let r = mu.integrate_dx(|x| Complex64::new(sign * mu.derivative(n, x) * sys.eval(m, x), 0.0), 1e-15)?;
    Ok(r.value.re)
}

/// Both routes of ⟨⟨ρ_μ(z,·), φ⟩⟩.
#[derive(Debug, Clone, Copy)]
pub struct RadonNikodym {
    /// Σ_n (−z)^n φ^{(n)} from biorthogonality.
    pub series: Complex64,
    /// ∫ φ(x − z) dμ by quadrature.
    pub quadrature: Complex64,
}

/// Generalized Radon–Nikodym pairing for a polynomial φ (monomial coefficients).
pub fn radon_nikodym_general(
    mu: &Density1D,
    sys: &AppellSystem1D,
    z: Complex64,
    phi: &[f64],
    tol: f64,
) -> Result<RadonNikodym> {
    let coeffs = sys.from_monomial(phi)?;
    let mut series = Complex64::new(0.0, 0.0);
    let mut zp = Complex64::new(1.0, 0.0);
    for c in &coeffs {
        series += zp * c;
        zp *= -z;
    }
    let quadrature = mu.integrate(|x| poly_eval_c(phi, Complex64::new(x, 0.0) - z), 1e-14)?.value;
    if (series - quadrature).norm() > tol * (1.0 + series.norm()) {
        return Err(Error::tolerance(format!(
            "series and quadrature routes differ by {:.3e}",
            (series - quadrature).norm()
        )));
    }
    Ok(RadonNikodym { series, quadrature })
}

/// (S_μφ(θ), C_μφ(θ)) for φ = Σ φ^{(n)} P_n.
pub fn s_mu_and_c_mu(
    mu: &Density1D,
    sys: &AppellSystem1D,
    phi_p: &[f64],
    theta: Complex64,
) -> Result<(Complex64, Complex64)> {
    if !(theta.re.abs() < mu.eps) {
        return Err(Error::domain("theta outside the analyticity strip"));
    }
    let mono = sys.to_monomial(phi_p);
    let l = laplace_transform(mu, theta)?;
    let s = mu.integrate(|x| poly_eval(&mono, x) * (theta * x).exp(), 1e-14)?.value / l;
    let mut c = Complex64::new(0.0, 0.0);
    let mut tp = Complex64::new(1.0, 0.0);
    for v in phi_p {
        c += tp * v;
        tp *= theta;
    }
    Ok((s, c))
}

/// Q-coefficients w.r.t. μ of the distribution Σ_k Φ̂^{(k)} Q_k^{μ̂}:
/// Φ^{(n)} = Σ_{k+l+m=n} Φ̂^{(k)} P_l^μ(0) M_m^{μ̂}/(l!·m!).
pub fn change_of_measure(phi_hat: &[f64], sys_mu: &AppellSystem1D, sys_mu_hat: &AppellSystem1D) -> Result<Vec<f64>> {
    let n = phi_hat.len();
    if n > sys_mu.p_at_zero.len() || n > sys_mu_hat.moments.len() {
        return Err(Error::invalid("degree overflow in change of measure"));
    }
    let mut out = vec![0.0; n];
    for (k, ph) in phi_hat.iter().enumerate() {
        for l in 0..n - k {
            for m in 0..n - k - l {
                out[k + l + m] += ph * sys_mu.p_at_zero[l] * sys_mu_hat.moments[m] / (factorial(l) * factorial(m));
            }
        }
    }
    Ok(out)
}

/// Wick product of Q-representations: Ξ^{(n)} = Σ_k Φ^{(k)}Ψ^{(n−k)}.
pub fn wick_q(phi: &[f64], psi: &[f64]) -> Vec<f64> {
    let n = phi.len().min(psi.len());
    (0..n).map(|m| (0..=m).map(|k| phi[k] * psi[m - k]).sum()).collect()
}

/// Poisson(λ) weight at x.
pub fn poisson_pmf(lambda: f64, x: u32) -> f64 {
    (x as f64 * lambda.ln() - lambda - statrs::function::gamma::ln_gamma(x as f64 + 1.0)).exp()
}

/// Charlier polynomial C_n(x; λ) from Σ_n C_n θ^n/n! = e^{−λθ}(1+θ)^x.
pub fn charlier(n: usize, lambda: f64, x: u32) -> f64 {
    let mut s = 0.0;
    let mut falling = 1.0;
    for k in 0..=n {
        s += binom(n, k) * falling * (-lambda).powi((n - k) as i32);
        falling *= x as f64 - k as f64;
    }
    s
}

/// C_0(x), ..., C_n(x) by C_{k+1} = (x − k − λ)C_k − kλC_{k−1}.
pub fn charlier_all(n: usize, lambda: f64, x: u32) -> Vec<f64> {
    let xf = x as f64;
    let mut out = vec![1.0];
    if n >= 1 {
        out.push(xf - lambda);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = (xf - kf - lambda) * out[k] - kf * lambda * out[k - 1];
        out.push(next);
    }
    out
}

/// Σ_x C_n(x)C_m(x)μ(x) over the Poisson support, truncated where the mass is negligible.
///
/// Weights λ^x/x! are built multiplicatively and e^{−λ} is applied once; the
/// sum uses Neumaier compensation.
pub fn charlier_pairing(n: usize, m: usize, lambda: f64) -> f64 {
    let top = (lambda + 40.0 * lambda.sqrt() + 60.0) as u32;
    let mut w = 1.0;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in 0..=top {
        let c = charlier_all(n.max(m), lambda, x);
        let term = c[n] * c[m] * w;
        let t = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
        w *= lambda / (x as f64 + 1.0);
    }
    (sum + comp) * (-lambda).exp()
}
