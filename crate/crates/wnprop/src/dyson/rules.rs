//! Quadrature rules on ordered simplices, boxes and the positive sphere orthant.

use crate::exec::{Exec, CHUNK};
use crate::lowdisc::Kronecker;
use crate::quad::GaussLegendre;
use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::Add;

fn gl01(m: usize) -> (Vec<f64>, Vec<f64>) {
    let g = GaussLegendre::new(m);
    (g.nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(), g.weights.iter().map(|w| 0.5 * w).collect())
}

/// Gauss rule for a < τ₁ < … < τ_k < b in collapsed coordinates
/// (w_k = u_k, w_{j} = w_{j+1}u_j; Jacobian Π_{j≥2} w_j).
#[derive(Debug, Clone)]
pub struct SimplexRule {
    k: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SimplexRule {
    /// Product rule with `m` Gauss–Legendre points per collapsed coordinate.
    pub fn gauss(k: usize, a: f64, b: f64, m: usize) -> Self {
        if k == 0 {
            return Self { k, nodes: vec![], weights: vec![1.0] };
        }
        let (x, w) = gl01(m);
        let total = m.pow(k as u32);
        let len = b - a;
        let mut nodes = Vec::with_capacity(total * k);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; k];
        let mut ws = vec![0.0; k];
        for _ in 0..total {
            let mut wt = len.powi(k as i32);
            let mut cur = 1.0;
            for j in (0..k).rev() {
                if j + 1 < k {
                    wt *= cur;
                }
                cur *= x[idx[j]];
                ws[j] = cur;
                wt *= w[idx[j]];
            }
            nodes.extend(ws.iter().map(|v| a + len * v));
            weights.push(wt);
            for d in idx.iter_mut() {
                *d += 1;
                if *d < m {
                    break;
                }
                *d = 0;
            }
        }
        Self { k, nodes, weights }
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    /// True when the rule has no points.
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Point `i` (ascending times) and its weight.
    pub fn point(&self, i: usize) -> (&[f64], f64) {
        (&self.nodes[i * self.k..(i + 1) * self.k], self.weights[i])
    }
}

/// Rule for the ordered simplex over [b₀, b_M] split at interior breakpoints: the union
/// over compositions n = n₁+…+n_M of the products Π Λ_{n_i}(b_{i−1}, b_i).
#[derive(Debug, Clone)]
pub struct OrderedRule {
    n: usize,
    blocks: Vec<Vec<SimplexRule>>,
    offsets: Vec<usize>,
}

fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in (0..=n).rev() {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

impl OrderedRule {
    /// Build for `n` ordered times over sorted `breaks` with `m` points per coordinate.
    pub fn new(breaks: &[f64], n: usize, m: usize) -> Self {
        let mut br: Vec<f64> = breaks.to_vec();
        br.dedup();
        let parts = br.len() - 1;
        let mut blocks = Vec::new();
        let mut offsets = vec![0];
        for comp in compositions(n, parts) {
            let rules: Vec<SimplexRule> = comp.iter().enumerate().map(|(i, &k)| SimplexRule::gauss(k, br[i], br[i + 1], m)).collect();
            let count: usize = rules.iter().map(|r| r.len()).product();
            offsets.push(offsets.last().unwrap() + count);
            blocks.push(rules);
        }
        Self { n, blocks, offsets }
    }

    /// Total number of points.
    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// True when the rule has no points.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Write point `idx` into `out` (length n) and return its weight.
    pub fn point(&self, idx: usize, out: &mut [f64]) -> f64 {
        let b = self.offsets.partition_point(|&o| o <= idx) - 1;
        let mut r = idx - self.offsets[b];
        let mut w = 1.0;
        let mut pos = 0;
        for rule in &self.blocks[b] {
            let i = r % rule.len();
            r /= rule.len();
            let (p, wt) = rule.point(i);
            out[pos..pos + p.len()].copy_from_slice(p);
            pos += p.len();
            w *= wt;
        }
        w
    }

    /// Weighted sum of `f(τ)` over all points.
    pub fn integrate<T, F>(&self, exec: Exec, zero: T, f: F) -> T
    where
        T: Copy + Add<Output = T> + Send + Sync + std::ops::Mul<f64, Output = T>,
        F: Fn(&[f64]) -> T + Sync + Send,
    {
        let n = self.n;
        exec.chunked_sum(self.len(), CHUNK, zero, |i| {
            let mut buf = [0.0f64; 16];
            let w = self.point(i, &mut buf[..n]);
            f(&buf[..n]) * w
        })
    }
}

/// Tensor Gauss rule on the box [a,b]^n.
pub fn box_gauss_integrate<F: Fn(&[f64]) -> f64>(n: usize, a: f64, b: f64, m: usize, f: F) -> f64 {
    let (x, w) = gl01(m);
    let mut idx = vec![0usize; n];
    let mut p = vec![0.0; n];
    let mut s = 0.0;
    for _ in 0..m.pow(n as u32) {
        let mut wt = (b - a).powi(n as i32);
        for j in 0..n {
            p[j] = a + (b - a) * x[idx[j]];
            wt *= w[idx[j]];
        }
        s += wt * f(&p);
        for d in idx.iter_mut() {
            *d += 1;
            if *d < m {
                break;
            }
            *d = 0;
        }
    }
    s
}

/// Quasi-Monte Carlo estimate of ∫_{Λ_n(a,b)} f: Kronecker points on the box, sorted,
/// weighted by (b−a)^n/n!. Returns the value and the half-sample error estimate.
pub fn kronecker_simplex<F: Fn(&[f64]) -> f64>(n: usize, a: f64, b: f64, points: usize, seed: u64, f: F) -> (f64, f64) {
    let k = Kronecker::new(n, seed);
    let mut p = vec![0.0; n];
    let vol = (b - a).powi(n as i32) / (1..=n).map(|i| i as f64).product::<f64>();
    let half = points / 2;
    let (mut s1, mut s2) = (0.0, 0.0);
    for i in 0..points {
        k.point(i, &mut p);
        for v in p.iter_mut() {
            *v = a + (b - a) * *v;
        }
        p.sort_by(f64::total_cmp);
        if i < half {
            s1 += f(&p);
        } else {
            s2 += f(&p);
        }
    }
    let full = (s1 + s2) / points as f64 * vol;
    let first = s1 / half.max(1) as f64 * vol;
    (full, (full - first).abs())
}

/// Product Gauss rule on the positive orthant of the unit sphere S^n ⊂ ℝ^{n+1} in
/// hyperspherical angles (surface measure).
#[derive(Debug, Clone)]
pub struct SphereRule {
    n: usize,
    m: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
    w: Vec<Vec<f64>>,
}

impl SphereRule {
    /// `m` Gauss–Legendre angles per coordinate.
    pub fn new(n: usize, m: usize) -> Self {
        let (x, w) = gl01(m);
        let ang: Vec<f64> = x.iter().map(|u| FRAC_PI_2 * u).collect();
        let cos = ang.iter().map(|a| a.cos()).collect();
        let sin = ang.iter().map(|a| a.sin()).collect();
        let w = w.iter().map(|v| FRAC_PI_2 * v).collect();
        Self::from_angles(n, cos, sin, w)
    }

    /// `m` tanh-sinh angles per coordinate; nodes cluster double-exponentially at both
    /// ends, which resolves integrands with essential singularities on the faces.
    pub fn tanh_sinh(n: usize, m: usize) -> Self {
        let k = (m.max(3) / 2) as i64;
        let h = 3.2 / k as f64;
        let (mut cos, mut sin, mut w) = (Vec::new(), Vec::new(), Vec::new());
        for i in -k..=k {
            let z = FRAC_PI_2 * (i as f64 * h).sinh();
            let e = (-2.0 * z.abs()).exp();
            // distance of the node from the nearer end of [0, π/2]
            let near = 0.25 * PI * 2.0 * e / (1.0 + e);
            let (c, s) = if i <= 0 { (near.cos(), near.sin()) } else { (near.sin(), near.cos()) };
            let wt = 0.25 * PI * FRAC_PI_2 * h * (i as f64 * h).cosh() / z.cosh().powi(2);
            cos.push(c);
            sin.push(s);
            w.push(wt);
        }
        Self::from_angles(n, cos, sin, w)
    }

    fn from_angles(n: usize, cos: Vec<f64>, sin: Vec<f64>, w: Vec<f64>) -> Self {
        let m = w.len();
        let weights = (1..=n).map(|j| (0..m).map(|i| w[i] * sin[i].powi((n - j) as i32)).collect()).collect();
        Self { n, m, cos, sin, w: weights }
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    /// True when the rule has no points.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Write point `idx` (n+1 coordinates) into `s` and return its weight.
    pub fn point(&self, mut idx: usize, s: &mut [f64]) -> f64 {
        let mut prod = 1.0;
        let mut wt = 1.0;
        for j in 0..self.n {
            let i = idx % self.m;
            idx /= self.m;
            s[j] = prod * self.cos[i];
            prod *= self.sin[i];
            wt *= self.w[j][i];
        }
        s[self.n] = prod;
        wt
    }
}
