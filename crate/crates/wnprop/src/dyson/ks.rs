//! Khandekar–Streit series in one space dimension.
//!
//! Order n integrates the chain of n+1 segment kernels over the ordered times
//! t₀ < τ₁ < … < τ_n < t. The gaps g_j = τ_{j+1} − τ_j are parametrised on the standard
//! simplex, y_j = s_j² with s on the positive orthant of the unit sphere S^n, which
//! removes every |g_j|^{−1/2} singularity. Without a source the gaps are moved into the
//! complex plane, g_j = Δ·y_j·(1 − iβ(S − y_j)) with S = Σy², which keeps Σg_j = Δ and
//! turns the endpoint chirps e^{ic/g} into decaying factors. With a source or a drifting
//! measure the times stay real (β = 0).

use super::rules::SphereRule;
use super::{OrderTerm, SeriesOptions, SeriesReport, SimplexMethod};
use crate::closedform::{free_factor, free_kernel, mehler, GridFunction, PropagatorQuery};
use crate::error::{Error, Result};
use crate::exec::CHUNK;
use crate::quad::{adaptive_panels, GaussLegendre};
use num_complex::Complex64;
use statrs::function::gamma::gamma;
use std::f64::consts::{FRAC_PI_2, PI};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Default imaginary deformation of the gap parametrisation.
pub const DEFAULT_DEFORMATION: f64 = 2.0;

/// Spatial atom w·p(τ)·δ_x(dy)⊗dτ with a polynomial time profile p.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialAtom {
    /// Position.
    pub x: f64,
    /// Complex weight.
    pub weight: Complex64,
    /// Coefficients of p(τ) = Σ c_k τ^k; empty means p ≡ 1.
    pub profile: Vec<Complex64>,
}

/// Atom in space and time, w·δ_x(dy)⊗δ_s(dτ).
#[derive(Debug, Clone, PartialEq)]
pub struct Kick {
    /// Position.
    pub x: f64,
    /// Time.
    pub t: f64,
    /// Complex weight.
    pub weight: Complex64,
}

/// Measure potential v(dy, dτ) on ℝ × [t₀, t].
#[derive(Debug, Clone, Default)]
pub struct SpaceTimeMeasure {
    /// Time-smeared spatial atoms.
    pub atoms: Vec<SpatialAtom>,
    /// Atoms in time (handled by the kicked engine).
    pub kicks: Vec<Kick>,
    /// Optional drift D(τ): atom positions become x + D(τ).
    pub drift: Option<GridFunction>,
}

impl SpaceTimeMeasure {
    /// Single constant-in-time atom g·δ_x.
    pub fn single_atom(x: f64, g: Complex64) -> Self {
        Self { atoms: vec![SpatialAtom { x, weight: g, profile: vec![] }], ..Self::default() }
    }

    /// Time-independent density ρ(y)dy on [lo, hi], discretised into `n` Gauss–Legendre atoms.
    pub fn from_density<F: Fn(f64) -> Complex64>(rho: F, lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) || n == 0 {
            return Err(Error::invalid("density support must be a non-empty interval"));
        }
        let gl = GaussLegendre::new(n);
        let half = 0.5 * (hi - lo);
        let atoms = gl
            .nodes
            .iter()
            .zip(&gl.weights)
            .map(|(u, w)| {
                let x = lo + half * (u + 1.0);
                SpatialAtom { x, weight: rho(x) * (w * half), profile: vec![] }
            })
            .collect();
        Ok(Self { atoms, ..Self::default() })
    }

    /// True when the measure has no atoms at all.
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.kicks.is_empty()
    }

    /// Bound C_v on the density of the time marginal over [t₀, t].
    pub fn time_density_bound(&self, t0: f64, t: f64) -> f64 {
        let tmax = t0.abs().max(t.abs());
        self.atoms
            .iter()
            .map(|a| {
                let p = if a.profile.is_empty() {
                    1.0
                } else {
                    a.profile.iter().enumerate().map(|(k, c)| c.norm() * tmax.powi(k as i32)).sum()
                };
                a.weight.norm() * p
            })
            .sum()
    }

    fn weight_at(&self, i: usize, tau: Complex64) -> Complex64 {
        let a = &self.atoms[i];
        if a.profile.is_empty() {
            return a.weight;
        }
        let mut p = ZERO;
        for c in a.profile.iter().rev() {
            p = p * tau + c;
        }
        a.weight * p
    }

    fn position(&self, x: f64, tau: Complex64) -> Complex64 {
        match &self.drift {
            Some(d) => x + d.value(tau.re),
            None => ONE * x,
        }
    }

    fn validate(&self) -> Result<()> {
        for a in &self.atoms {
            if !a.x.is_finite() || !a.weight.is_finite() {
                return Err(Error::invalid("atom position and weight must be finite"));
            }
        }
        if self.kicks.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::domain("kick times must be strictly increasing"));
        }
        Ok(())
    }
}

/// Reference dynamics of the segment kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Base {
    Free,
    Harmonic(f64),
}

/// Analytic bound M_n = C_v^n|Δ|^{(n−1)/2}/(2^{(n+1)/2}Γ((n+1)/2)), multiplied by
/// (π/2)^{(n+1)/2} around the harmonic oscillator (|sin kg| ≥ 2kg/π).
pub fn ks_bound(cv: f64, dt: f64, n: usize, harmonic: bool) -> f64 {
    let h = (n as f64 + 1.0) / 2.0;
    let m = cv.powi(n as i32) * dt.powf((n as f64 - 1.0) / 2.0) / (2f64.powf(h) * gamma(h));
    if harmonic {
        m * FRAC_PI_2.powf(h)
    } else {
        m
    }
}

/// Σ_{m>n} M_m.
pub fn ks_tail(cv: f64, dt: f64, n: usize, harmonic: bool) -> f64 {
    let mut s = 0.0;
    for m in n + 1..n + 200 {
        let b = ks_bound(cv, dt, m, harmonic);
        s += b;
        if b < 1e-30 * s.max(1e-300) {
            break;
        }
    }
    s
}

fn sqrt_inv(z: Complex64) -> Complex64 {
    z.sqrt().inv()
}

fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        ONE - z * z / 6.0
    } else {
        z.sin() / z
    }
}

/// Free kernel (2πig)^{−1/2}e^{i(b−a)²/(2g)} at complex duration g.
pub(crate) fn free_kernel_c(a: Complex64, b: Complex64, g: Complex64) -> Complex64 {
    sqrt_inv(2.0 * PI * I * g) * (I * (b - a) * (b - a) / (2.0 * g)).exp()
}

struct Engine<'a> {
    v: &'a SpaceTimeMeasure,
    xi: Option<&'a GridFunction>,
    base: Base,
    beta: f64,
    x0: f64,
    x: f64,
    t0: f64,
    dt: Complex64,
}

impl Engine<'_> {
    fn kernel_0(&self) -> Result<Complex64> {
        match (self.base, self.xi) {
            (Base::Free, Some(xi)) => free_kernel(self.x0, self.t0, self.x, self.t0 + self.dt.re, Some(xi)),
            (Base::Free, None) if self.dt.im == 0.0 => Ok(free_factor(None, 0.0, 0.0, self.x0, self.x, self.dt.re)),
            (Base::Free, None) => Ok(free_kernel_c(ONE * self.x0, ONE * self.x, self.dt)),
            (Base::Harmonic(k), _) => Ok(mehler(k, self.x0, self.x, self.dt)),
        }
    }

    /// Segment kernel multiplied by s, where the gap is g = s²·scale.
    fn segment(&self, a: Complex64, ta: Complex64, b: Complex64, tb: Complex64, g: Complex64, scale: Complex64) -> Complex64 {
        match self.base {
            Base::Free => {
                let pref = sqrt_inv(2.0 * PI * I * scale);
                let e = match self.xi {
                    None => I * (b - a) * (b - a) / (2.0 * g),
                    Some(xi) => {
                        let (ra, rb) = (ta.re, tb.re);
                        let s = xi.integral(ra, rb) + b - a;
                        I * (a * xi.value(ra) - b * xi.value(rb)) - 0.5 * I * xi.integral_sq(ra, rb) + I * s * s / (2.0 * g)
                    }
                };
                if !(e.re >= -700.0) || !e.im.is_finite() {
                    return ZERO;
                }
                pref * e.exp()
            }
            Base::Harmonic(k) => {
                let kg = k * g;
                let pref = sqrt_inv(2.0 * PI * I * scale * sinc(kg));
                let e = I * k * (b - a) * (b - a) * cot(kg) / 2.0 - I * k * a * b / cot(kg / 2.0);
                if !(e.re >= -700.0) || !e.im.is_finite() || !pref.is_finite() {
                    return ZERO;
                }
                pref * e.exp()
            }
        }
    }

    /// Sphere-rule sum for order n ≥ 1 with `m` angles per coordinate.
    fn order_sum(&self, n: usize, m: usize, exec: crate::Exec) -> Complex64 {
        let rule = SphereRule::tanh_sinh(n, m);
        let na = self.v.atoms.len();
        let beta = self.beta;
        let sum = exec.chunked_sum(rule.len(), CHUNK, ZERO, |idx| {
            let mut s = [0.0f64; 16];
            let wq = rule.point(idx, &mut s[..=n]);
            let y: Vec<f64> = s[..=n].iter().map(|v| v * v).collect();
            let big_s: f64 = y.iter().map(|v| v * v).sum();
            let scale: Vec<Complex64> = y.iter().map(|&yj| self.dt * Complex64::new(1.0, -beta * (big_s - yj))).collect();
            let gaps: Vec<Complex64> = y.iter().zip(&scale).map(|(yj, sc)| sc * *yj).collect();
            let mut times = Vec::with_capacity(n + 2);
            times.push(ONE * self.t0);
            for g in &gaps[..n] {
                let last = *times.last().unwrap();
                times.push(last + g);
            }
            let det = jacobian_det(&y, beta) * self.dt.powu(n as u32);
            let pos = |i: usize, tau: Complex64| self.v.position(self.v.atoms[i].x, tau);
            let mut cur: Vec<Complex64> = (0..na)
                .map(|a| {
                    let tau = times[1];
                    self.segment(ONE * self.x0, times[0], pos(a, tau), tau, gaps[0], scale[0]) * self.v.weight_at(a, tau)
                })
                .collect();
            for j in 1..n {
                let (ta, tb) = (times[j], times[j + 1]);
                cur = (0..na)
                    .map(|b| {
                        let pb = pos(b, tb);
                        let acc: Complex64 = (0..na).map(|a| self.segment(pos(a, ta), ta, pb, tb, gaps[j], scale[j]) * cur[a]).sum();
                        acc * self.v.weight_at(b, tb)
                    })
                    .collect();
            }
            let tn = times[n];
            let tend = ONE * self.t0 + self.dt;
            let last: Complex64 = (0..na).map(|a| self.segment(pos(a, tn), tn, ONE * self.x, tend, gaps[n], scale[n]) * cur[a]).sum();
            det * last * wq
        });
        (-I).powu(n as u32) * 2f64.powi(n as i32) * sum
    }

    fn resolvent_ok(&self, n: usize, opts: &SeriesOptions) -> bool {
        // chains of unequal length cancel along one line; keep the loss below e^12
        let (lo, hi) = self.chain_lengths(n);
        opts.resolvent
            && (hi - lo).powi(2) / (4.0 * self.dt.norm()) < 12.0
            && self.base == Base::Free
            && self.xi.is_none()
            && self.v.drift.is_none()
            && self.v.atoms.iter().all(|a| a.profile.iter().skip(1).all(|c| *c == ZERO))
    }

    fn order(&self, n: usize, opts: &SeriesOptions) -> Result<OrderTerm> {
        let harmonic = matches!(self.base, Base::Harmonic(_));
        let bound = ks_bound(self.v.time_density_bound(self.t0, self.t0 + self.dt.re), self.dt.norm(), n, harmonic);
        if n == 0 {
            return Ok(OrderTerm { order: 0, value: self.kernel_0()?, bound, quad_error: 0.0, points: 1 });
        }
        if self.v.atoms.is_empty() {
            return Ok(OrderTerm { order: n, value: ZERO, bound, quad_error: 0.0, points: 0 });
        }
        if self.resolvent_ok(n, opts) {
            let (value, quad_error, points) = self.resolvent_order(n)?;
            return Ok(OrderTerm { order: n, value, bound, quad_error, points });
        }
        let SimplexMethod::Gauss { points } = &opts.method else {
            return Err(Error::invalid("the KS engine integrates with Gauss rules only"));
        };
        let m = SimplexMethod::gauss_points(points, n);
        let fine = self.order_sum(n, m, opts.exec);
        let coarse = self.order_sum(n, (2 * m / 3) | 1, opts.exec);
        Ok(OrderTerm { order: n, value: fine, bound, quad_error: (fine - coarse).norm(), points: m.pow(n as u32) })
    }
}

impl Engine<'_> {
    /// Order n for static atoms with constant weights through the time-convolution
    /// theorem: each segment kernel K₀(a,·) has transform −ie^{−|a|κ}/κ on the line
    /// κ = e^{iπ/4}(r − iδ), so K_n(Δ) = (1/2π)∫e^{iκ²Δ/2}(−i)^n rᵀW(ĜW)^{n−1}s κdκ with
    /// W = diag(w_a), Ĝ_ab = K̂₀(x_a − x_b), r_a = K̂₀(x − x_a), s_a = K̂₀(x_a − x₀).
    fn resolvent_atoms(&self) -> Vec<(f64, Complex64)> {
        self.v.atoms.iter().map(|a| (a.x, a.weight * a.profile.first().copied().unwrap_or(ONE))).collect()
    }

    /// Shortest and longest chain x₀ → atoms (n visits) → x.
    fn chain_lengths(&self, n: usize) -> (f64, f64) {
        let xs: Vec<f64> = self.v.atoms.iter().map(|a| a.x).collect();
        let mut lo: Vec<f64> = xs.iter().map(|a| (a - self.x0).abs()).collect();
        let mut hi = lo.clone();
        for _ in 1..n {
            let step = |acc: &[f64], pick: fn(f64, f64) -> f64, init: f64| -> Vec<f64> {
                xs.iter().map(|b| xs.iter().zip(acc).map(|(a, l)| l + (b - a).abs()).fold(init, pick)).collect()
            };
            lo = step(&lo, f64::min, f64::INFINITY);
            hi = step(&hi, f64::max, 0.0);
        }
        let lo = xs.iter().zip(&lo).map(|(a, l)| l + (self.x - a).abs()).fold(f64::INFINITY, f64::min);
        let hi = xs.iter().zip(&hi).map(|(a, l)| l + (self.x - a).abs()).fold(0.0, f64::max);
        (lo, hi)
    }

    /// Order n from the resolvent in κ along the steepest-descent line through the saddle
    /// of the longest chain.
    fn resolvent_order(&self, n: usize) -> Result<(Complex64, f64, usize)> {
        let atoms = self.resolvent_atoms();
        let na = atoms.len();
        let (_, s_max) = self.chain_lengths(n);
        let mag = self.dt.norm();
        let dir = (I * mag / self.dt).sqrt();
        let normal = -I * dir;
        let mut centre = -I * s_max / self.dt;
        let offset = (I * dir.conj() * centre).re;
        let min_offset = 1.0 / mag.sqrt();
        if offset < min_offset {
            centre += (min_offset - offset) * normal;
        }
        // chain sums are carried as e^L·m so that no single factor overflows
        let log_hat = |a: f64, k: Complex64| (-I / k).ln() - a.abs() * k;
        let f = |r: f64| {
            let kappa = centre + dir * r;
            let mut cur: Vec<(f64, Complex64)> = atoms.iter().map(|(xa, w)| scaled(&[(log_hat(xa - self.x0, kappa), *w)])).collect();
            for _ in 1..n {
                cur = (0..na)
                    .map(|b| {
                        let terms: Vec<(Complex64, Complex64)> =
                            (0..na).map(|a| (log_hat(atoms[b].0 - atoms[a].0, kappa) + cur[a].0, atoms[b].1 * cur[a].1)).collect();
                        scaled(&terms)
                    })
                    .collect();
            }
            let gauss = I * kappa * kappa * self.dt / 2.0;
            let terms: Vec<(Complex64, Complex64)> =
                (0..na).map(|a| (log_hat(self.x - atoms[a].0, kappa) + cur[a].0 + gauss, cur[a].1)).collect();
            let (l, m) = scaled(&terms);
            if l < -745.0 || m == ZERO {
                return ZERO;
            }
            l.exp() * m * kappa * dir
        };
        let near = -(dir.conj() * centre).re;
        let reach = (80.0 / mag).sqrt() + 2.0 * min_offset + 4.0 * s_max / mag;
        let (lo, hi) = (near.min(0.0) - reach, near.max(0.0) + reach);
        let mut breaks: Vec<f64> = (0..=16).map(|i| lo + (hi - lo) * i as f64 / 16.0).collect();
        breaks.push(near);
        breaks.push(0.0);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (hi - lo));
        let r = adaptive_panels(f, &breaks, 1e-15, 1e-13)?;
        Ok(((-I).powu(n as u32) * r.value / (2.0 * PI), r.error / (2.0 * PI), 0))
    }
}

/// Sum of e^{l}·m as e^{L}·M with L the largest real part of l.
fn scaled(terms: &[(Complex64, Complex64)]) -> (f64, Complex64) {
    let top = terms.iter().filter(|(_, m)| *m != ZERO).map(|(l, _)| l.re).fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return (f64::NEG_INFINITY, ZERO);
    }
    (top, terms.iter().filter(|(_, m)| *m != ZERO).map(|(l, m)| (l - top).exp() * m).sum())
}

/// Cotangent that stays finite for large imaginary arguments.
fn cot(z: Complex64) -> Complex64 {
    if z.im.abs() < 20.0 {
        z.cos() / z.sin()
    } else if z.im >= 0.0 {
        let w = (2.0 * I * z).exp();
        I * (w + 1.0) / (w - 1.0)
    } else {
        let w = (-2.0 * I * z).exp();
        I * (1.0 + w) / (1.0 - w)
    }
}

/// Determinant of ∂(g_j/Δ)/∂y_k, j,k < n, for g_j = Δ·y_j·(1 − iβ(S − y_j)), S = Σy²,
/// with y_n = 1 − Σ_{j<n} y_j.
fn jacobian_det(y: &[f64], beta: f64) -> Complex64 {
    let n = y.len() - 1;
    let s: f64 = y.iter().map(|v| v * v).sum();
    let yn = y[n];
    let mut a = vec![vec![ZERO; n]; n];
    for j in 0..n {
        for k in 0..n {
            let mut v = Complex64::new(0.0, -beta * y[j] * (2.0 * y[k] - 2.0 * yn));
            if j == k {
                v += Complex64::new(1.0, -beta * (s - 2.0 * y[j]));
            }
            a[j][k] = v;
        }
    }
    let mut det = ONE;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm())).unwrap();
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        let piv = a[c][c];
        if piv == ZERO {
            return ZERO;
        }
        det *= piv;
        for r in c + 1..n {
            let f = a[r][c] / piv;
            for k in c..n {
                let v = a[c][k];
                a[r][k] -= f * v;
            }
        }
    }
    det
}

fn check_query(q: &PropagatorQuery) -> Result<()> {
    if q.dim() != 1 {
        return Err(Error::invalid("the KS series works in one space dimension only"));
    }
    Ok(())
}

fn check_harmonic(k: f64, dt: f64) -> Result<()> {
    if !(k * dt > 0.0 && k * dt < FRAC_PI_2) {
        return Err(Error::domain(format!("harmonic requires 0 < k|Δ| < π/2, got k|Δ| = {}", k * dt)));
    }
    Ok(())
}

fn engine<'a>(q: &PropagatorQuery, v: &'a SpaceTimeMeasure, xi: Option<&'a GridFunction>, base: Base, opts: &SeriesOptions) -> Engine<'a> {
    let real = xi.is_some() || v.drift.is_some();
    let beta = if real { 0.0 } else { opts.deformation };
    Engine { v, xi, base, beta, x0: q.x0[0], x: q.x[0], t0: q.t0, dt: ONE * q.duration() }
}

/// Order-n term K_n^{(ξ̇)}(x,t|x₀,t₀) for time-smeared atoms.
pub fn ks_order_n(q: &PropagatorQuery, v: &SpaceTimeMeasure, n: usize, xi: Option<&GridFunction>, opts: &SeriesOptions) -> Result<OrderTerm> {
    check_query(q)?;
    v.validate()?;
    if !v.kicks.is_empty() {
        return Err(Error::invalid("atoms in time are handled by the kicked engine"));
    }
    engine(q, v, xi, Base::Free, opts).order(n, opts)
}

fn truncation(cv: f64, dt: f64, harmonic: bool, opts: &SeriesOptions) -> Result<usize> {
    (0..=opts.order_cap)
        .find(|&n| ks_tail(cv, dt, n, harmonic) < opts.tol)
        .ok_or_else(|| {
            Error::tolerance(format!(
                "tail bound {:.3e} above tolerance {:.3e} at order cap {}",
                ks_tail(cv, dt, opts.order_cap, harmonic),
                opts.tol,
                opts.order_cap
            ))
        })
}

fn run(e: &Engine, opts: &SeriesOptions) -> Result<SeriesReport> {
    let harmonic = matches!(e.base, Base::Harmonic(_));
    let cv = e.v.time_density_bound(e.t0, e.t0 + e.dt.re);
    let n = truncation(cv, e.dt.norm(), harmonic, opts)?;
    let terms = (0..=n).map(|k| e.order(k, opts)).collect::<Result<Vec<_>>>()?;
    Ok(SeriesReport::from_terms(terms, ks_tail(cv, e.dt.norm(), n, harmonic)))
}

/// Series K^{(ξ̇)} = Σ K_n truncated where the bound tail drops below `opts.tol`. Atoms
/// in time are routed to [`kicked_propagator`].
pub fn ks_propagator(q: &PropagatorQuery, v: &SpaceTimeMeasure, xi: Option<&GridFunction>, opts: &SeriesOptions) -> Result<SeriesReport> {
    check_query(q)?;
    v.validate()?;
    if !v.kicks.is_empty() {
        return kicked_propagator(q, v, xi);
    }
    run(&engine(q, v, xi, Base::Free, opts), opts)
}

/// Order-n term of the series around the harmonic oscillator ½k²x².
pub fn ks_harmonic_order_n(q: &PropagatorQuery, v: &SpaceTimeMeasure, n: usize, opts: &SeriesOptions) -> Result<OrderTerm> {
    check_query(q)?;
    v.validate()?;
    let k = q.k.ok_or_else(|| Error::invalid("harmonic series needs an oscillator frequency k"))?;
    check_harmonic(k, q.duration())?;
    if !v.kicks.is_empty() || v.drift.is_some() {
        return Err(Error::invalid("the harmonic series takes time-smeared static atoms only"));
    }
    engine(q, v, None, Base::Harmonic(k), opts).order(n, opts)
}

/// Series around the harmonic oscillator ½k²x² with harmonic segment kernels.
pub fn ks_harmonic_propagator(q: &PropagatorQuery, v: &SpaceTimeMeasure, opts: &SeriesOptions) -> Result<SeriesReport> {
    check_query(q)?;
    v.validate()?;
    let k = q.k.ok_or_else(|| Error::invalid("harmonic series needs an oscillator frequency k"))?;
    check_harmonic(k, q.duration())?;
    if !v.kicks.is_empty() || v.drift.is_some() {
        return Err(Error::invalid("the harmonic series takes time-smeared static atoms only"));
    }
    run(&engine(q, v, None, Base::Harmonic(k), opts), opts)
}

/// Series to a complex end time t₀ + Δ (free base, no source, no drift).
pub(crate) fn ks_complex_time(x0: f64, x: f64, t0: f64, dt: Complex64, v: &SpaceTimeMeasure, n: usize, opts: &SeriesOptions) -> Result<Complex64> {
    let e = Engine { v, xi: None, base: Base::Free, beta: opts.deformation, x0, x, t0, dt };
    let mut s = e.kernel_0()?;
    for k in 1..=n {
        s += e.order(k, opts)?.value;
    }
    Ok(s)
}

/// Residual of the integral equation K − K₀ + i∬v(dy,dτ)K₀(x,t|y,τ)K(y,τ|x₀,t₀) with
/// its quadrature error estimate. The outer τ runs over t₀ + uΔ − iγΔ sin 2πu (γ = 0.15)
/// with u = sin²(πw/2); the inner series is evaluated at complex end times.
pub fn integral_equation_residual(q: &PropagatorQuery, v: &SpaceTimeMeasure, opts: &SeriesOptions) -> Result<(Complex64, f64)> {
    check_query(q)?;
    v.validate()?;
    if !v.kicks.is_empty() {
        return kicked_residual(q, v);
    }
    if v.drift.is_some() {
        return Err(Error::invalid("the integral-equation check runs without drift"));
    }
    let rep = ks_propagator(q, v, None, opts)?;
    let n = rep.order();
    let dt = q.duration();
    let k0 = free_kernel_c(ONE * q.x0[0], ONE * q.x[0], ONE * dt);
    const GAMMA: f64 = 0.15;
    let outer = |nodes: usize| -> Result<Complex64> {
        let gl = GaussLegendre::new(nodes);
        let mut acc = ZERO;
        for (z, w) in gl.nodes.iter().zip(&gl.weights) {
            let wv = 0.5 * (z + 1.0);
            let u = (FRAC_PI_2 * wv).sin().powi(2);
            let du = FRAC_PI_2 * (PI * wv).sin() * 0.5 * w;
            let off = Complex64::new(u * dt, -GAMMA * dt * (2.0 * PI * u).sin());
            let dtau = Complex64::new(dt, -2.0 * PI * GAMMA * dt * (2.0 * PI * u).cos());
            let tau = q.t0 + off;
            for (i, a) in v.atoms.iter().enumerate() {
                let inner = ks_complex_time(q.x0[0], a.x, q.t0, off, v, n, opts)?;
                let left = free_kernel_c(ONE * a.x, ONE * q.x[0], ONE * dt - off);
                acc += v.weight_at(i, tau) * left * inner * dtau * du;
            }
        }
        Ok(acc)
    };
    let fine = outer(64)?;
    let coarse = outer(48)?;
    let r = rep.value - k0 + I * fine;
    Ok((r, (fine - coarse).norm() + rep.quad_error))
}

fn kick_kernel(v: &SpaceTimeMeasure, xi: Option<&GridFunction>, a: f64, ta: f64, b: f64, tb: f64) -> Result<Complex64> {
    let pa = v.position(a, ONE * ta);
    let pb = v.position(b, ONE * tb);
    match xi {
        None => Ok(free_kernel_c(pa, pb, ONE * (tb - ta))),
        Some(_) if v.drift.is_some() => Err(Error::invalid("combine either a source or a drift, not both")),
        Some(xi) => free_kernel(pa.re, ta, pb.re, tb, Some(xi)),
    }
}

/// Kicked series for atoms in time: each kick acts at most once and in time order, so
/// order n sums the ordered n-subsets of kicks inside (t₀, t).
pub fn kicked_propagator(q: &PropagatorQuery, v: &SpaceTimeMeasure, xi: Option<&GridFunction>) -> Result<SeriesReport> {
    check_query(q)?;
    v.validate()?;
    if !v.atoms.is_empty() {
        return Err(Error::invalid("mixed time-smeared and kicked measures are not supported"));
    }
    let (x0, x, t0, t) = (q.x0[0], q.x[0], q.t0, q.t);
    let kicks: Vec<&Kick> = v.kicks.iter().filter(|k| k.t > t0 && k.t < t).collect();
    let nk = kicks.len();
    // amp[n][j]: amplitude arriving at kick j after exactly n kicks, j being the last.
    let mut amp = vec![vec![ZERO; nk]; nk + 1];
    for (j, kj) in kicks.iter().enumerate() {
        amp[1][j] = -I * kj.weight * kick_kernel(v, xi, x0, t0, kj.x, kj.t)?;
        for n in 2..=j + 1 {
            let mut s = ZERO;
            for (i, ki) in kicks.iter().enumerate().take(j) {
                if amp[n - 1][i] != ZERO {
                    s += kick_kernel(v, xi, ki.x, ki.t, kj.x, kj.t)? * amp[n - 1][i];
                }
            }
            amp[n][j] = -I * kj.weight * s;
        }
    }
    let mut terms = vec![OrderTerm { order: 0, value: kick_kernel(v, xi, x0, t0, x, t)?, bound: f64::INFINITY, quad_error: 0.0, points: 1 }];
    for (n, row) in amp.iter().enumerate().skip(1) {
        let mut s = ZERO;
        for (j, kj) in kicks.iter().enumerate() {
            s += kick_kernel(v, xi, kj.x, kj.t, x, t)? * row[j];
        }
        terms.push(OrderTerm { order: n, value: s, bound: f64::INFINITY, quad_error: 0.0, points: 1 });
    }
    Ok(SeriesReport::from_terms(terms, 0.0))
}

fn kicked_residual(q: &PropagatorQuery, v: &SpaceTimeMeasure) -> Result<(Complex64, f64)> {
    let k = kicked_propagator(q, v, None)?.value;
    let k0 = kick_kernel(v, None, q.x0[0], q.t0, q.x[0], q.t)?;
    let mut s = ZERO;
    for kick in v.kicks.iter().filter(|k| k.t > q.t0 && k.t < q.t) {
        let inner_q = PropagatorQuery::one_d(q.x0[0], kick.x, q.t0, kick.t)?;
        let inner = kicked_propagator(&inner_q, v, None)?.value;
        s += kick.weight * kick_kernel(v, None, kick.x, kick.t, q.x[0], q.t)? * inner;
    }
    Ok((k - k0 + I * s, 0.0))
}
