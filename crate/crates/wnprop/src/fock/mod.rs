//! Truncated symmetric Fock-space kernel algebra over a finite weighted basis.
//!
//! A [`ChaosVector`] holds kernels φ^{(0)}, ..., φ^{(N)}. Each kernel is a
//! [`SymKernel`], equivalently a homogeneous polynomial in θ ∈ ℂ^D, so that the
//! S-transform is Σ_n P_n(θ).

mod kernel;
mod serial;

pub use kernel::{factorial, mfact, monomial, multi_indices, MultiIndex, SymKernel};
pub use serial::{BasisDoc, EntryDoc, KernelDoc, VectorDoc};

use crate::error::{Error, Result};
use crate::specfun::{hermite_normalized_all, hermite_prob_all};
use num_complex::Complex64;
use std::f64::consts::PI;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Finite orthonormal basis e_1..e_D with norm weights λ_j > 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedBasis {
    weights: Vec<f64>,
}

impl WeightedBasis {
    /// Basis with explicit weights (strictly increasing, all > 1).
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("basis dimension must be positive"));
        }
        if weights.iter().any(|&l| !(l > 1.0)) {
            return Err(Error::domain("basis weights must exceed 1"));
        }
        if weights.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("basis weights must be strictly increasing"));
        }
        Ok(Self { weights })
    }

    /// Default weights λ_j = j + 1.
    pub fn standard(dim: usize) -> Self {
        Self { weights: (1..=dim).map(|j| j as f64 + 1.0).collect() }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Σ_j λ_j^{−2p}, the squared Hilbert–Schmidt norm of H_p → H_0.
    pub fn hs_embedding_norm_sq(&self, p: f64) -> f64 {
        self.weights.iter().map(|l| l.powf(-2.0 * p)).sum()
    }

    /// |Tr|²_{−p} of Tr = Σ e_j⊗e_j computed with Gram factors in H_{−p}^{⊗2}.
    pub fn trace_norm_sq(&self, p: f64) -> f64 {
        trace_kernel(self.dim()).norm_sq_weighted(&self.weights, -p)
    }
}

/// The trace kernel Tr = Σ_j e_j⊗e_j as a degree-2 kernel.
pub fn trace_kernel(dim: usize) -> SymKernel {
    let mut k = SymKernel::zero(dim, 2);
    for j in 0..dim {
        let mut m = vec![0u16; dim];
        m[j] = 2;
        k.add_term(m, ONE);
    }
    k
}

/// Truncated chaos expansion φ = Σ_{n≤N} ⟨:ω^{⊗n}:, φ^{(n)}⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosVector {
    pub basis: WeightedBasis,
    pub kernels: Vec<SymKernel>,
    /// Set when an operation dropped contributions above the truncation degree.
    pub overflow: bool,
}

impl ChaosVector {
    /// Zero vector with kernels up to degree `n_trunc`.
    pub fn zero(basis: &WeightedBasis, n_trunc: usize) -> Self {
        let d = basis.dim();
        Self {
            basis: basis.clone(),
            kernels: (0..=n_trunc).map(|n| SymKernel::zero(d, n)).collect(),
            overflow: false,
        }
    }

    /// Constant functional c·𝟙.
    pub fn constant(basis: &WeightedBasis, n_trunc: usize, c: Complex64) -> Self {
        let mut v = Self::zero(basis, n_trunc);
        v.kernels[0] = SymKernel::constant(basis.dim(), c);
        v
    }

    /// Vector with a single kernel placed at its degree.
    pub fn from_kernel(basis: &WeightedBasis, n_trunc: usize, k: SymKernel) -> Result<Self> {
        if k.dim != basis.dim() || k.degree > n_trunc {
            return Err(Error::invalid("kernel does not fit basis/truncation"));
        }
        let mut v = Self::zero(basis, n_trunc);
        let deg = k.degree;
        v.kernels[deg] = k;
        Ok(v)
    }

    pub fn n_trunc(&self) -> usize {
        self.kernels.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn check_basis(&self, other: &Self) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::invalid("basis mismatch"));
        }
        Ok(())
    }

    /// Sum of two vectors (truncated to the smaller degree).
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_basis(other)?;
        let n = self.n_trunc().min(other.n_trunc());
        let mut out = Self::zero(&self.basis, n);
        for k in 0..=n {
            out.kernels[k] = self.kernels[k].plus(&other.kernels[k]);
        }
        Ok(out)
    }

    /// Multiply every kernel by `s`.
    pub fn scaled(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for k in out.kernels.iter_mut() {
            *k = k.scaled(s);
        }
        out
    }

    /// Largest coefficient difference to another vector of equal shape.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let n = self.n_trunc().max(other.n_trunc());
        let empty = |d| SymKernel::zero(self.dim(), d);
        (0..=n)
            .map(|d| {
                let a = self.kernels.get(d).cloned().unwrap_or_else(|| empty(d));
                let b = other.kernels.get(d).cloned().unwrap_or_else(|| empty(d));
                a.plus(&b.scaled(-ONE)).max_abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Wick product: Ξ^{(n)} = Σ_k Φ^{(k)} ⊗̂ Ψ^{(n−k)}.
pub fn wick_product(phi: &ChaosVector, psi: &ChaosVector) -> Result<ChaosVector> {
    phi.check_basis(psi)?;
    let n = phi.n_trunc().min(psi.n_trunc());
    let mut out = ChaosVector::zero(&phi.basis, n);
    out.overflow = phi.overflow || psi.overflow;
    for (a, ka) in phi.kernels.iter().enumerate() {
        for (b, kb) in psi.kernels.iter().enumerate() {
            if ka.coeffs.is_empty() || kb.coeffs.is_empty() {
                continue;
            }
            if a + b > n {
                out.overflow = true;
                continue;
            }
            out.kernels[a + b] = out.kernels[a + b].plus(&ka.sym_product(kb));
        }
    }
    Ok(out)
}

/// k-fold contraction φ ⊗̂_k ψ of kernels of degrees a ≥ k and b ≥ k.
pub fn contract(phi: &SymKernel, psi: &SymKernel, k: usize) -> Result<SymKernel> {
    let (a, b) = (phi.degree, psi.degree);
    if k > a || k > b {
        return Err(Error::invalid("contraction order exceeds kernel degree"));
    }
    let pref = factorial(a - k) * factorial(b - k) / (factorial(a) * factorial(b)) * factorial(k);
    let mut out = SymKernel::zero(phi.dim, a + b - 2 * k);
    for r in multi_indices(phi.dim, k) {
        let dp = phi.partial_multi(&r);
        if dp.coeffs.is_empty() {
            continue;
        }
        let dq = psi.partial_multi(&r);
        out = out.plus(&dp.sym_product(&dq).scaled(Complex64::new(pref / mfact(&r), 0.0)));
    }
    Ok(out)
}

/// Pointwise (Wiener) product via
/// f^{(l)} = Σ_{m+n=l} Σ_k k!·C(m+k,k)·C(n+k,k)·φ^{(m+k)} ⊗̂_k ψ^{(n+k)}.
pub fn wiener_product(phi: &ChaosVector, psi: &ChaosVector) -> Result<ChaosVector> {
    phi.check_basis(psi)?;
    let n = phi.n_trunc().min(psi.n_trunc());
    let mut out = ChaosVector::zero(&phi.basis, n);
    out.overflow = phi.overflow || psi.overflow;
    let binom = |p: usize, q: usize| factorial(p) / (factorial(q) * factorial(p - q));
    for (a, ka) in phi.kernels.iter().enumerate() {
        if ka.coeffs.is_empty() {
            continue;
        }
        for (b, kb) in psi.kernels.iter().enumerate() {
            if kb.coeffs.is_empty() {
                continue;
            }
            for k in 0..=a.min(b) {
                let l = a + b - 2 * k;
                if l > n {
                    out.overflow = true;
                    continue;
                }
                let c = factorial(k) * binom(a, k) * binom(b, k);
                let t = contract(ka, kb, k)?.scaled(Complex64::new(c, 0.0));
                out.kernels[l] = out.kernels[l].plus(&t);
            }
        }
    }
    Ok(out)
}

/// Iterated trace tr^k of a kernel of degree n + 2k.
pub fn trace_contract(kernel: &SymKernel, k: usize) -> Result<SymKernel> {
    if 2 * k > kernel.degree {
        return Err(Error::invalid(format!(
            "cannot take {k} traces of a degree-{} kernel",
            kernel.degree
        )));
    }
    let n = kernel.degree - 2 * k;
    let mut out = kernel.clone();
    for _ in 0..k {
        out = out.laplacian();
    }
    Ok(out.scaled(Complex64::new(factorial(n) / factorial(n + 2 * k), 0.0)))
}

/// Scaling σ_zφ(ω) = φ(zω):
/// φ̃^{(n)} = z^n Σ_k ((n+2k)!/(k!n!)) ((z²−1)/2)^k tr^k φ^{(n+2k)}.
pub fn scale(phi: &ChaosVector, z: Complex64) -> ChaosVector {
    let nt = phi.n_trunc();
    let mut out = ChaosVector::zero(&phi.basis, nt);
    out.overflow = phi.overflow;
    let h = (z * z - ONE) * 0.5;
    for n in 0..=nt {
        let mut acc = SymKernel::zero(phi.dim(), n);
        let mut k = 0;
        while n + 2 * k <= nt {
            let src = &phi.kernels[n + 2 * k];
            if !src.coeffs.is_empty() {
                let tr = trace_contract(src, k).expect("degree checked");
                let c = h.powu(k as u32) * (factorial(n + 2 * k) / (factorial(k) * factorial(n)));
                acc = acc.plus(&tr.scaled(c));
            }
            k += 1;
        }
        out.kernels[n] = acc.scaled(z.powu(n as u32));
    }
    out
}

/// Shift τ_ηφ = φ(· + η): ψ^{(l)} = Σ_k C(k+l,k) (η^{⊗k}, φ^{(k+l)}).
pub fn shift(phi: &ChaosVector, eta: &[Complex64]) -> Result<ChaosVector> {
    if eta.len() != phi.dim() {
        return Err(Error::invalid("shift vector has wrong dimension"));
    }
    let nt = phi.n_trunc();
    let mut out = ChaosVector::zero(&phi.basis, nt);
    out.overflow = phi.overflow;
    for (deg, src) in phi.kernels.iter().enumerate() {
        if src.coeffs.is_empty() {
            continue;
        }
        let mut d = src.clone();
        for k in 0..=deg {
            let l = deg - k;
            out.kernels[l] = out.kernels[l].plus(&d.scaled(Complex64::new(1.0 / factorial(k), 0.0)));
            d = d.directional(eta);
        }
    }
    Ok(out)
}

fn unit_check(eta: &[Complex64]) -> Result<()> {
    let n: Complex64 = eta.iter().map(|e| e * e).sum();
    if eta.iter().any(|e| e.im != 0.0) || (n.re - 1.0).abs() > 1e-12 {
        return Err(Error::domain("projection direction must be a real unit vector"));
    }
    Ok(())
}

/// φ ∘ P_⊥ with P_⊥ω = ω − ⟨ω,η⟩η:
/// φ̃^{(n)} = Σ_k ((n+2k)!/(k!n!)) (−1/2)^k P_⊥^{⊗n}(η^{⊗2k}, φ^{(n+2k)}).
pub fn project_perp(phi: &ChaosVector, eta: &[Complex64]) -> Result<ChaosVector> {
    if eta.len() != phi.dim() {
        return Err(Error::invalid("projection vector has wrong dimension"));
    }
    unit_check(eta)?;
    let d = phi.dim();
    let proj: Vec<Vec<Complex64>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| if i == j { ONE } else { ZERO } - eta[i] * eta[j])
                .collect()
        })
        .collect();
    let nt = phi.n_trunc();
    let mut out = ChaosVector::zero(&phi.basis, nt);
    out.overflow = phi.overflow;
    for (deg, src) in phi.kernels.iter().enumerate() {
        if src.coeffs.is_empty() {
            continue;
        }
        let mut dd = src.clone();
        let mut k = 0;
        while 2 * k <= deg {
            let n = deg - 2 * k;
            let c = (-0.5f64).powi(k as i32) / factorial(k);
            out.kernels[n] = out.kernels[n].plus(&dd.substitute(&proj).scaled(Complex64::new(c, 0.0)));
            dd = dd.directional(eta).directional(eta);
            k += 1;
        }
    }
    Ok(out)
}

/// Principal square root of ⟨η,η⟩, rejecting the cut (−∞, 0].
fn sqrt_eta_sq(eta: &[Complex64]) -> Result<(Complex64, Complex64)> {
    let s: Complex64 = eta.iter().map(|e| e * e).sum();
    if s.im == 0.0 && s.re <= 0.0 {
        return Err(Error::domain("<eta,eta> lies on the branch cut"));
    }
    Ok((s, s.sqrt()))
}

/// Kernels 0..N of Donsker's delta δ(⟨·,η⟩ − a):
/// f^{(n)} = e^{−a²/2s}/√(2πs) · H_n(a/√(2s))/n! · (2s)^{−n/2} · η^{⊗n}, s = ⟨η,η⟩.
pub fn donsker_kernels(basis: &WeightedBasis, eta: &[Complex64], a: Complex64, n: usize) -> Result<ChaosVector> {
    if eta.len() != basis.dim() {
        return Err(Error::invalid("eta has wrong dimension"));
    }
    let (s, rs) = sqrt_eta_sq(eta)?;
    let pref = (-a * a / (s * 2.0)).exp() / (rs * (2.0 * PI).sqrt());
    // H_n(x)(2s)^{-n/2}/n! = h_n(x) s^{-n/2}/√(n!) with h_n the normalized Hermite.
    let h = hermite_normalized_all(n, a / (rs * std::f64::consts::SQRT_2));
    let mut out = ChaosVector::zero(basis, n);
    let mut spow = ONE;
    for (k, hk) in h.iter().enumerate() {
        let c = pref * hk / (spow * factorial(k).sqrt());
        out.kernels[k] = SymKernel::tensor_power(eta, k).scaled(c);
        spow *= rs;
    }
    Ok(out)
}

/// Closed-form S-transform of δ(⟨·,η⟩ − a).
pub fn donsker_s_closed(eta: &[Complex64], a: Complex64, theta: &[Complex64]) -> Result<Complex64> {
    let (s, rs) = sqrt_eta_sq(eta)?;
    let t: Complex64 = eta.iter().zip(theta).map(|(e, t)| e * t).sum();
    Ok((-(t - a) * (t - a) / (s * 2.0)).exp() / (rs * (2.0 * PI).sqrt()))
}

/// φ(x) = Σ_n ⟨:x^{⊗n}:, φ^{(n)}⟩ with :x^{⊗n}: expanded through He_{m_j}(x_j).
pub fn evaluate(phi: &ChaosVector, x: &[Complex64]) -> Complex64 {
    let nt = phi.n_trunc();
    let he: Vec<Vec<Complex64>> = x.iter().map(|xi| hermite_prob_all(nt, *xi)).collect();
    let mut s = ZERO;
    for k in &phi.kernels {
        for (m, c) in &k.coeffs {
            let mut t = *c;
            for (j, &mj) in m.iter().enumerate() {
                t *= he[j][mj as usize];
            }
            s += t;
        }
    }
    s
}

/// S-transform Σ_n ⟨φ^{(n)}, θ^{⊗n}⟩.
pub fn s_transform(phi: &ChaosVector, theta: &[Complex64]) -> Complex64 {
    phi.kernels.iter().map(|k| k.pair_power(theta)).sum()
}

/// Dual pairing ⟨⟨Φ, φ⟩⟩ = Σ_n n!⟨Φ^{(n)}, φ^{(n)}⟩ (bilinear).
pub fn dual_pairing(big: &ChaosVector, phi: &ChaosVector) -> Complex64 {
    big.kernels
        .iter()
        .zip(&phi.kernels)
        .map(|(a, b)| a.gram_pair(b) * factorial(a.degree))
        .sum()
}

/// ⟨⟨δ(⟨·,η⟩ − a), φ⟩⟩ = (2π)^{−1/2} e^{−a²/2} E(P τ_{aη} φ).
pub fn pair_with_donsker(phi: &ChaosVector, eta: &[Complex64], a: Complex64) -> Result<Complex64> {
    unit_check(eta)?;
    let shifted: Vec<Complex64> = eta.iter().map(|e| e * a).collect();
    let t = shift(phi, &shifted)?;
    let p = project_perp(&t, eta)?;
    let e0 = p.kernels[0].coeff(&vec![0; phi.dim()]);
    Ok(e0 * (-a * a * 0.5).exp() / (2.0 * PI).sqrt())
}

/// ||φ||²_{p,q,β} = Σ_n (n!)^{1+β} 2^{nq} |φ^{(n)}|²_p.
pub fn norm_sq(phi: &ChaosVector, p: f64, q: f64, beta: f64) -> f64 {
    phi.kernels
        .iter()
        .map(|k| {
            let n = k.degree as f64;
            factorial(k.degree).powf(1.0 + beta) * 2f64.powf(n * q) * k.norm_sq_weighted(phi.basis.weights(), p)
        })
        .sum()
}

/// ||φ||_{p,q,β}.
pub fn norm(phi: &ChaosVector, p: f64, q: f64, beta: f64) -> f64 {
    norm_sq(phi, p, q, beta).sqrt()
}

/// Wick exponential :exp⟨·,ξ⟩: with kernels ξ^{⊗n}/n!.
pub fn wick_exponential(basis: &WeightedBasis, xi: &[Complex64], n: usize) -> ChaosVector {
    let mut out = ChaosVector::zero(basis, n);
    for k in 0..=n {
        out.kernels[k] = SymKernel::tensor_power(xi, k).scaled(Complex64::new(1.0 / factorial(k), 0.0));
    }
    out
}

/// J_z with S J_z(θ) = exp(½(z²−1)⟨θ,θ⟩), truncated at degree `n`.
pub fn j_z(basis: &WeightedBasis, z: Complex64, n: usize) -> ChaosVector {
    let d = basis.dim();
    let mut out = ChaosVector::zero(basis, n);
    let h = (z * z - ONE) * 0.5;
    let mut qpow = SymKernel::constant(d, ONE);
    let q = trace_kernel(d);
    let mut k = 0;
    while 2 * k <= n {
        out.kernels[2 * k] = qpow.scaled(h.powu(k as u32) / factorial(k));
        qpow = qpow.sym_product(&q);
        k += 1;
    }
    out
}

/// Γ_z: multiply kernel n by z^n.
pub fn gamma_z(phi: &ChaosVector, z: Complex64) -> ChaosVector {
    let mut out = phi.clone();
    for (n, k) in out.kernels.iter_mut().enumerate() {
        *k = k.scaled(z.powu(n as u32));
    }
    out
}

/// S-transform of Π_j σ_z δ(⟨·,η_j⟩ − a_j) for linearly independent η_j:
/// (2πz²)^{−n/2} det(M)^{−1/2} exp(−½ vᵀM^{−1}v), v_j = ⟨η_j,θ⟩ − a_j/z.
pub fn prod_delta_s(
    etas: &[Vec<Complex64>],
    a: &[Complex64],
    z: Complex64,
    theta: &[Complex64],
) -> Result<Complex64> {
    let n = etas.len();
    if n == 0 || a.len() != n {
        return Err(Error::invalid("need one offset per direction"));
    }
    let dot = |u: &[Complex64], w: &[Complex64]| -> Complex64 { u.iter().zip(w).map(|(x, y)| x * y).sum() };
    let m: Vec<Vec<Complex64>> = (0..n).map(|i| (0..n).map(|j| dot(&etas[i], &etas[j])).collect()).collect();
    let v: Vec<Complex64> = (0..n).map(|i| dot(&etas[i], theta) - a[i] / z).collect();
    let (det, x) = solve(&m, &v)?;
    let quad: Complex64 = v.iter().zip(&x).map(|(a, b)| a * b).sum();
    let pref = (z * z * 2.0 * PI).powf(-(n as f64) / 2.0) / det.sqrt();
    Ok(pref * (-quad * 0.5).exp())
}

fn solve(m: &[Vec<Complex64>], b: &[Complex64]) -> Result<(Complex64, Vec<Complex64>)> {
    let n = b.len();
    let mut a: Vec<Vec<Complex64>> = m.to_vec();
    let mut x = b.to_vec();
    let mut det = ONE;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm()))
            .expect("non-empty");
        if a[p][c].norm() < 1e-14 {
            return Err(Error::domain("directions are linearly dependent"));
        }
        if p != c {
            a.swap(p, c);
            x.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                let v = a[c][k];
                a[r][k] -= f * v;
            }
            let xc = x[c];
            x[r] -= f * xc;
        }
    }
    for c in (0..n).rev() {
        let mut s = x[c];
        for k in c + 1..n {
            s -= a[c][k] * x[k];
        }
        x[c] = s / a[c][c];
    }
    Ok((det, x))
}
