//! Reference solvers used by the acceptance suite.
//!
//! [`cn_propagator`] is a Crank–Nicolson propagator for one-dimensional potentials.

use num_complex::Complex64;
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Uniform grid on [−L/2, L/2] with Dirichlet ends.
#[derive(Debug, Clone, Copy)]
pub struct CnGrid {
    pub length: f64,
    pub dx: f64,
    pub dt: f64,
}

impl CnGrid {
    fn points(&self) -> usize {
        (self.length / self.dx).round() as usize + 1
    }

    fn x(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.dx
    }

    fn index(&self, x: f64) -> usize {
        let j = ((x + 0.5 * self.length) / self.dx).round() as usize;
        assert!((self.x(j) - x).abs() < 1e-9 * self.dx.max(1.0), "{x} is not a grid point");
        j
    }
}

/// Solves (1 + iΔt/2·H)ψ' = (1 − iΔt/2·H)ψ with H = −½∂²ₓ + V, second-order differences.
pub fn evolve(grid: &CnGrid, v: &dyn Fn(f64) -> f64, psi0: &dyn Fn(f64) -> f64, t: f64) -> Vec<Complex64> {
    let n = grid.points();
    let a = I * (0.5 * grid.dt);
    let off = -0.5 / (grid.dx * grid.dx);
    let diag: Vec<f64> = (0..n).map(|j| 1.0 / (grid.dx * grid.dx) + v(grid.x(j))).collect();
    let mut psi: Vec<Complex64> = (0..n).map(|j| Complex64::new(psi0(grid.x(j)), 0.0)).collect();
    let lower = a * off;
    let main: Vec<Complex64> = diag.iter().map(|&d| 1.0 + a * d).collect();
    // Thomas elimination factors depend only on the matrix.
    let mut cp = vec![Complex64::new(0.0, 0.0); n];
    let mut denom = vec![Complex64::new(0.0, 0.0); n];
    denom[0] = main[0];
    cp[0] = lower / denom[0];
    for j in 1..n {
        denom[j] = main[j] - lower * cp[j - 1];
        cp[j] = lower / denom[j];
    }
    let steps = (t / grid.dt).round() as usize;
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..steps {
        for j in 0..n {
            let mut r = (1.0 - a * diag[j]) * psi[j];
            if j > 0 {
                r -= lower * psi[j - 1];
            }
            if j + 1 < n {
                r -= lower * psi[j + 1];
            }
            rhs[j] = r;
        }
        psi[0] = rhs[0] / denom[0];
        for j in 1..n {
            psi[j] = (rhs[j] - lower * psi[j - 1]) / denom[j];
        }
        for j in (0..n - 1).rev() {
            let next = psi[j + 1];
            psi[j] -= cp[j] * next;
        }
    }
    psi
}

/// Neville extrapolation of (h_i, v_i) to h = 0.
pub fn neville_at_zero(h: &[f64], v: &[Complex64]) -> Complex64 {
    let mut p = v.to_vec();
    let n = h.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (h[i + k] * p[i] - h[i] * p[i + 1]) / (h[i + k] - h[i]);
        }
    }
    p[0]
}

/// Free kernel (2πit)^{−1/2} e^{i(x−x₀)²/(2t)}.
pub fn free_kernel(x0: f64, x: f64, t: f64) -> Complex64 {
    (2.0 * PI * I * t).sqrt().inv() * (I * (x - x0) * (x - x0) / (2.0 * t)).exp()
}

/// K(x, t | 0, 0) for H = −½∂²ₓ + V at the given grid points.
///
/// Gaussian initial data of widths w approximate δ(x); the free run on the same grid is
/// subtracted, the difference is extrapolated to w = 0 in w², and the exact free kernel
/// is added back.
pub fn cn_propagator(grid: &CnGrid, v: &dyn Fn(f64) -> f64, widths: &[f64], xs: &[f64], t: f64) -> Vec<Complex64> {
    let idx: Vec<usize> = xs.iter().map(|&x| grid.index(x)).collect();
    let mut diffs = vec![vec![]; xs.len()];
    for &w in widths {
        let g = move |x: f64| (-x * x / (2.0 * w * w)).exp() / (2.0 * PI * w * w).sqrt();
        let with = evolve(grid, v, &g, t);
        let without = evolve(grid, &|_| 0.0, &g, t);
        for (k, &j) in idx.iter().enumerate() {
            diffs[k].push(with[j] - without[j]);
        }
    }
    let h: Vec<f64> = widths.iter().map(|w| w * w).collect();
    xs.iter().zip(&diffs).map(|(&x, d)| neville_at_zero(&h, d) + free_kernel(0.0, x, t)).collect()
}
