//! Homogeneous symmetric kernels stored by multi-index.
//!
//! A degree-n kernel Σ_m c_m ê_m is identified with the homogeneous
//! polynomial P(θ) = Σ_m c_m θ^m = ⟨φ^{(n)}, θ^{⊗n}⟩. Contractions, traces and
//! shifts become differential operators on P.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::collections::BTreeMap;

/// Multi-index m = (m_1, ..., m_D).
pub type MultiIndex = Vec<u16>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// All multi-indices of length `d` with |m| = n, in lexicographic order.
pub fn multi_indices(d: usize, n: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0u16; d];
    fn rec(pos: usize, left: usize, cur: &mut Vec<u16>, out: &mut Vec<MultiIndex>) {
        if pos + 1 == cur.len() {
            cur[pos] = left as u16;
            out.push(cur.clone());
            return;
        }
        for k in (0..=left).rev() {
            cur[pos] = k as u16;
            rec(pos + 1, left - k, cur, out);
        }
    }
    if d == 0 {
        if n == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, n, &mut cur, &mut out);
    out
}

/// m! = Π m_j!.
pub fn mfact(m: &[u16]) -> f64 {
    m.iter().map(|&k| factorial(k as usize)).product()
}

/// n! as f64.
pub fn factorial(n: usize) -> f64 {
    if n < 30 {
        (1..=n).map(|k| k as f64).product()
    } else {
        ln_gamma(n as f64 + 1.0).exp()
    }
}

fn cpow(z: Complex64, k: u16) -> Complex64 {
    let mut r = Complex64::new(1.0, 0.0);
    for _ in 0..k {
        r *= z;
    }
    r
}

/// θ^m = Π θ_j^{m_j}.
pub fn monomial(theta: &[Complex64], m: &[u16]) -> Complex64 {
    theta.iter().zip(m).map(|(t, &k)| cpow(*t, k)).product()
}

/// Degree-n symmetric kernel over a D-dimensional basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymKernel {
    pub dim: usize,
    pub degree: usize,
    pub coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl SymKernel {
    /// Zero kernel.
    pub fn zero(dim: usize, degree: usize) -> Self {
        Self { dim, degree, coeffs: BTreeMap::new() }
    }

    /// Scalar kernel of degree 0.
    pub fn constant(dim: usize, c: Complex64) -> Self {
        let mut k = Self::zero(dim, 0);
        k.add_term(vec![0; dim], c);
        k
    }

    /// Single symmetrized basis element c·ê_m.
    pub fn basis_element(m: MultiIndex, c: Complex64) -> Self {
        let dim = m.len();
        let degree = m.iter().map(|&k| k as usize).sum();
        let mut k = Self::zero(dim, degree);
        k.add_term(m, c);
        k
    }

    /// The kernel η^{⊗n}, i.e. P(θ) = ⟨η,θ⟩^n.
    pub fn tensor_power(eta: &[Complex64], n: usize) -> Self {
        let nf = factorial(n);
        let mut k = Self::zero(eta.len(), n);
        for m in multi_indices(eta.len(), n) {
            let c = monomial(eta, &m) * (nf / mfact(&m));
            k.add_term(m, c);
        }
        k
    }

    /// Add `c` to the coefficient of ê_m.
    pub fn add_term(&mut self, m: MultiIndex, c: Complex64) {
        debug_assert_eq!(m.len(), self.dim);
        debug_assert_eq!(m.iter().map(|&k| k as usize).sum::<usize>(), self.degree);
        if c == ZERO {
            return;
        }
        *self.coeffs.entry(m).or_insert(ZERO) += c;
    }

    /// Coefficient of ê_m.
    pub fn coeff(&self, m: &[u16]) -> Complex64 {
        self.coeffs.get(m).copied().unwrap_or(ZERO)
    }

    /// Multiply all coefficients by `s`.
    pub fn scaled(&self, s: Complex64) -> Self {
        let coeffs = self.coeffs.iter().map(|(m, c)| (m.clone(), c * s)).collect();
        Self { dim: self.dim, degree: self.degree, coeffs }
    }

    /// Coefficientwise sum of two kernels of equal degree.
    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for (m, c) in &other.coeffs {
            out.add_term(m.clone(), *c);
        }
        out
    }

    /// P(θ) = ⟨φ^{(n)}, θ^{⊗n}⟩ (bilinear).
    pub fn pair_power(&self, theta: &[Complex64]) -> Complex64 {
        self.coeffs.iter().map(|(m, c)| c * monomial(theta, m)).sum()
    }

    /// Symmetric tensor product, i.e. polynomial multiplication.
    pub fn sym_product(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dim, self.degree + other.degree);
        for (m1, c1) in &self.coeffs {
            for (m2, c2) in &other.coeffs {
                let m: MultiIndex = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    /// ∂P/∂θ_j.
    pub fn partial(&self, j: usize) -> Self {
        let mut out = Self::zero(self.dim, self.degree.saturating_sub(1));
        if self.degree == 0 {
            return out;
        }
        for (m, c) in &self.coeffs {
            if m[j] > 0 {
                let mut m2 = m.clone();
                m2[j] -= 1;
                out.add_term(m2, c * m[j] as f64);
            }
        }
        out
    }

    /// ∂^r P.
    pub fn partial_multi(&self, r: &[u16]) -> Self {
        let mut out = self.clone();
        for (j, &k) in r.iter().enumerate() {
            for _ in 0..k {
                out = out.partial(j);
            }
        }
        out
    }

    /// (η·∇)P.
    pub fn directional(&self, eta: &[Complex64]) -> Self {
        let mut out = Self::zero(self.dim, self.degree.saturating_sub(1));
        for (j, e) in eta.iter().enumerate() {
            if *e != ZERO {
                out = out.plus(&self.partial(j).scaled(*e));
            }
        }
        out
    }

    /// ΔP = Σ_j ∂_j² P.
    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero(self.dim, self.degree.saturating_sub(2));
        if self.degree < 2 {
            return out;
        }
        for j in 0..self.dim {
            out = out.plus(&self.partial(j).partial(j));
        }
        out
    }

    /// Q(θ) = P(Aθ) with A given row-wise (A[j] = row j).
    pub fn substitute(&self, a: &[Vec<Complex64>]) -> Self {
        let rows: Vec<SymKernel> = a
            .iter()
            .map(|row| {
                let mut lin = SymKernel::zero(self.dim, 1);
                for (i, v) in row.iter().enumerate() {
                    let mut m = vec![0u16; self.dim];
                    m[i] = 1;
                    lin.add_term(m, *v);
                }
                lin
            })
            .collect();
        let mut powers: Vec<Vec<SymKernel>> = rows
            .iter()
            .map(|r| vec![SymKernel::constant(self.dim, Complex64::new(1.0, 0.0)), r.clone()])
            .collect();
        let mut out = Self::zero(self.dim, self.degree);
        for (m, c) in &self.coeffs {
            let mut term = SymKernel::constant(self.dim, *c);
            for (j, &k) in m.iter().enumerate() {
                while powers[j].len() <= k as usize {
                    let next = powers[j].last().expect("non-empty").sym_product(&rows[j]);
                    powers[j].push(next);
                }
                term = term.sym_product(&powers[j][k as usize]);
            }
            out = out.plus(&term);
        }
        out
    }

    /// Unweighted squared norm Σ|c_m|² m!/n!.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq_weighted(&vec![1.0; self.dim], 0.0)
    }

    /// |φ^{(n)}|²_p = Σ |c_m|² (m!/n!) Π λ_j^{2p m_j}.
    pub fn norm_sq_weighted(&self, weights: &[f64], p: f64) -> f64 {
        let nf = factorial(self.degree);
        self.coeffs
            .iter()
            .map(|(m, c)| {
                let w: f64 = m
                    .iter()
                    .zip(weights)
                    .map(|(&k, l)| l.powf(2.0 * p * k as f64))
                    .product();
                c.norm_sqr() * mfact(m) / nf * w
            })
            .sum()
    }

    /// Bilinear Gram pairing ⟨φ, ψ⟩ = Σ a_m b_m m!/n!.
    pub fn gram_pair(&self, other: &Self) -> Complex64 {
        if self.degree != other.degree {
            return ZERO;
        }
        let nf = factorial(self.degree);
        self.coeffs
            .iter()
            .map(|(m, a)| a * other.coeff(m) * (mfact(m) / nf))
            .sum()
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}
