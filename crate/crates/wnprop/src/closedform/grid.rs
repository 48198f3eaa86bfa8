//! Test functions sampled on a uniform time grid.

use crate::error::{Error, Result};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

// 4-point Gauss–Legendre on [0, 1]; exact for the degree-6 square of a cubic.
const GL4_X: [f64; 4] = [0.069_431_844_202_973_71, 0.330_009_478_207_571_9, 0.669_990_521_792_428_1, 0.930_568_155_797_026_3];
const GL4_W: [f64; 4] = [0.173_927_422_568_726_9, 0.326_072_577_431_273_1, 0.326_072_577_431_273_1, 0.173_927_422_568_726_9];

/// Complex test function on [T₀, T] (zero outside) given by values and
/// derivatives on a uniform grid, interpolated by cubic Hermite cells.
#[derive(Debug, Clone)]
pub struct GridFunction {
    t0: f64,
    h: f64,
    values: Vec<Complex64>,
    derivs: Vec<Complex64>,
    cum: Vec<Complex64>,
    cum_sq: Vec<Complex64>,
}

/// Minimum number of grid points.
pub const MIN_GRID_POINTS: usize = 16;

impl GridFunction {
    /// Build from samples; `values` and `derivs` share the grid.
    pub fn new(t0: f64, t1: f64, values: Vec<Complex64>, derivs: Vec<Complex64>) -> Result<Self> {
        let n = values.len();
        if n < MIN_GRID_POINTS {
            return Err(Error::invalid(format!("grid needs at least {MIN_GRID_POINTS} points, got {n}")));
        }
        if derivs.len() != n {
            return Err(Error::invalid("values and derivatives differ in length"));
        }
        if !(t1 > t0) {
            return Err(Error::invalid("grid interval must be increasing"));
        }
        let h = (t1 - t0) / (n - 1) as f64;
        let mut g = Self { t0, h, values, derivs, cum: vec![ZERO; n], cum_sq: vec![ZERO; n] };
        for i in 1..n {
            let (a, b) = (g.values[i - 1], g.values[i]);
            let (da, db) = (g.derivs[i - 1], g.derivs[i]);
            g.cum[i] = g.cum[i - 1] + (a + b) * (0.5 * h) + (da - db) * (h * h / 12.0);
            let sq = g.cell_quad(i - 1, 0.0, 1.0, |v| v * v);
            g.cum_sq[i] = g.cum_sq[i - 1] + sq;
        }
        Ok(g)
    }

    /// Sample a closure and its derivative on `n` points.
    pub fn from_fn<F, D>(t0: f64, t1: f64, n: usize, f: F, df: D) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
        D: Fn(f64) -> Complex64,
    {
        let h = (t1 - t0) / (n.max(2) - 1) as f64;
        let ts: Vec<f64> = (0..n).map(|i| t0 + i as f64 * h).collect();
        Self::new(t0, t1, ts.iter().map(|&t| f(t)).collect(), ts.iter().map(|&t| df(t)).collect())
    }

    /// Grid start.
    pub fn start(&self) -> f64 {
        self.t0
    }

    /// Grid end.
    pub fn end(&self) -> f64 {
        self.t0 + self.h * (self.values.len() - 1) as f64
    }

    fn locate(&self, t: f64) -> Option<(usize, f64)> {
        let n = self.values.len();
        if t < self.t0 || t > self.end() {
            return None;
        }
        let s = (t - self.t0) / self.h;
        let i = (s.floor() as usize).min(n - 2);
        Some((i, s - i as f64))
    }

    fn hermite(&self, i: usize, u: f64) -> (Complex64, Complex64) {
        let (a, b) = (self.values[i], self.values[i + 1]);
        let (da, db) = (self.derivs[i] * self.h, self.derivs[i + 1] * self.h);
        let u2 = u * u;
        let u3 = u2 * u;
        let v = a * (2.0 * u3 - 3.0 * u2 + 1.0) + da * (u3 - 2.0 * u2 + u) + b * (-2.0 * u3 + 3.0 * u2) + db * (u3 - u2);
        let d = (a * (6.0 * u2 - 6.0 * u) + da * (3.0 * u2 - 4.0 * u + 1.0) + b * (-6.0 * u2 + 6.0 * u) + db * (3.0 * u2 - 2.0 * u))
            / self.h;
        (v, d)
    }

    fn cell_quad<G: Fn(Complex64) -> Complex64>(&self, i: usize, u0: f64, u1: f64, g: G) -> Complex64 {
        let mut s = ZERO;
        for (x, w) in GL4_X.iter().zip(GL4_W) {
            let u = u0 + (u1 - u0) * x;
            s += g(self.hermite(i, u).0) * w;
        }
        s * ((u1 - u0) * self.h)
    }

    /// θ(t), zero outside the grid.
    pub fn value(&self, t: f64) -> Complex64 {
        self.locate(t).map_or(ZERO, |(i, u)| self.hermite(i, u).0)
    }

    /// θ'(t), zero outside the grid.
    pub fn deriv(&self, t: f64) -> Complex64 {
        self.locate(t).map_or(ZERO, |(i, u)| self.hermite(i, u).1)
    }

    fn cumulative(&self, t: f64, sq: bool) -> Complex64 {
        let n = self.values.len();
        if t <= self.t0 {
            return ZERO;
        }
        if t >= self.end() {
            return if sq { self.cum_sq[n - 1] } else { self.cum[n - 1] };
        }
        let (i, u) = self.locate(t).expect("inside grid");
        let base = if sq { self.cum_sq[i] } else { self.cum[i] };
        let part = if sq { self.cell_quad(i, 0.0, u, |v| v * v) } else { self.cell_quad(i, 0.0, u, |v| v) };
        base + part
    }

    /// ∫_a^b θ.
    pub fn integral(&self, a: f64, b: f64) -> Complex64 {
        self.cumulative(b, false) - self.cumulative(a, false)
    }

    /// ∫_a^b θ² (bilinear).
    pub fn integral_sq(&self, a: f64, b: f64) -> Complex64 {
        self.cumulative(b, true) - self.cumulative(a, true)
    }

    /// ⟨θ,θ⟩ over the whole line.
    pub fn total_sq(&self) -> Complex64 {
        self.cum_sq[self.values.len() - 1]
    }

    /// ∫_a^b θ(s)·w(s) ds cellwise with 8-point Gauss–Legendre.
    pub fn integral_weighted<W: Fn(f64) -> Complex64>(&self, a: f64, b: f64, w: W) -> Complex64 {
        let a = a.max(self.t0);
        let b = b.min(self.end());
        if b <= a {
            return ZERO;
        }
        let gl = gl8();
        let (ia, ua) = self.locate(a).expect("inside");
        let (ib, ub) = self.locate(b).expect("inside");
        let mut s = ZERO;
        for i in ia..=ib {
            let u0 = if i == ia { ua } else { 0.0 };
            let u1 = if i == ib { ub } else { 1.0 };
            if u1 <= u0 {
                continue;
            }
            for (x, wt) in gl.0.iter().zip(gl.1.iter()) {
                let u = u0 + (u1 - u0) * x;
                let t = self.t0 + (i as f64 + u) * self.h;
                s += self.hermite(i, u).0 * w(t) * (wt * (u1 - u0) * self.h);
            }
        }
        s
    }

    /// ∫_a^b ds₁ θ(s₁)w₁(s₁) ∫_a^{s₁} ds₂ θ(s₂)w₂(s₂), nested 8-point Gauss–Legendre per cell.
    pub fn ordered_double_integral<W1, W2>(&self, a: f64, b: f64, w1: W1, w2: W2) -> Complex64
    where
        W1: Fn(f64) -> Complex64,
        W2: Fn(f64) -> Complex64,
    {
        let a = a.max(self.t0);
        let b = b.min(self.end());
        if b <= a {
            return ZERO;
        }
        let gl = gl8();
        let mut breaks = vec![a];
        let first = ((a - self.t0) / self.h).floor() as usize + 1;
        let mut k = first;
        while self.t0 + k as f64 * self.h < b {
            let t = self.t0 + k as f64 * self.h;
            if t > a {
                breaks.push(t);
            }
            k += 1;
        }
        breaks.push(b);
        let mut acc = ZERO;
        let mut total = ZERO;
        for win in breaks.windows(2) {
            let (p, q) = (win[0], win[1]);
            for (x, wt) in gl.0.iter().zip(gl.1.iter()) {
                let s1 = p + (q - p) * x;
                let mut inner = ZERO;
                for (y, wt2) in gl.0.iter().zip(gl.1.iter()) {
                    let s2 = p + (s1 - p) * y;
                    inner += self.value(s2) * w2(s2) * (wt2 * (s1 - p));
                }
                total += self.value(s1) * w1(s1) * (acc + inner) * (wt * (q - p));
            }
            for (y, wt2) in gl.0.iter().zip(gl.1.iter()) {
                let s2 = p + (q - p) * y;
                acc += self.value(s2) * w2(s2) * (wt2 * (q - p));
            }
        }
        total
    }
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    use std::sync::OnceLock;
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| {
        let g = crate::quad::GaussLegendre::new(8);
        (g.nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(), g.weights.iter().map(|w| 0.5 * w).collect())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrals_converge_under_refinement() {
        let f = |t: f64| Complex64::new(t.sin(), 0.3 * t * t);
        let df = |t: f64| Complex64::new(t.cos(), 0.6 * t);
        let exact = Complex64::new(1.0 - 2f64.cos(), 0.3 * 8.0 / 3.0);
        let mut prev = f64::INFINITY;
        for n in [17, 33, 65] {
            let g = GridFunction::from_fn(0.0, 2.0, n, f, df).unwrap();
            let e = (g.integral(0.0, 2.0) - exact).norm();
            assert!(e < prev);
            prev = e;
        }
        assert!(prev < 1e-8);
        assert!(GridFunction::from_fn(0.0, 1.0, 8, f, df).is_err());
    }

    #[test]
    fn partial_integrals_consistent() {
        let g = GridFunction::from_fn(-1.0, 3.0, 101, |t| Complex64::new((-t * t).exp(), 0.0), |t| Complex64::new(-2.0 * t * (-t * t).exp(), 0.0))
            .unwrap();
        let a = g.integral(-0.37, 1.21);
        let b = g.integral_weighted(-0.37, 1.21, |_| Complex64::new(1.0, 0.0));
        assert!((a - b).norm() < 1e-12);
        let s = g.integral_sq(-1.0, 0.5) + g.integral_sq(0.5, 3.0);
        assert!((s - g.total_sq()).norm() < 1e-14);
    }

    #[test]
    fn ordered_double_integral_is_half_square() {
        let g = GridFunction::from_fn(0.0, 1.0, 33, |t| Complex64::new(1.0 + t, -t), |_| Complex64::new(1.0, -1.0)).unwrap();
        let one = |_: f64| Complex64::new(1.0, 0.0);
        let d = g.ordered_double_integral(0.1, 0.83, one, one);
        let i = g.integral(0.1, 0.83);
        assert!((d - 0.5 * i * i).norm() < 1e-13);
    }
}
