//! Perturbation series for potentials V(x⃗) = ∫e^{iα⃗·x⃗}dm(α⃗) with finitely many atoms.
//!
//! Order n is (−i)^n ∫_{Λ_n} Σ_{atom tuples} Π w_j·TΦ_n with the explicit Gaussian
//!
//! TΦ_n(θ) = (2πiΔ)^{−d/2} exp(iΣα⃗_j·x⃗₀ − (i/2)∫[θ⃗ + Σα⃗_j𝟙_{[t₀,τ_j)}]²
//!           + (i/2Δ)[∫_{t₀}^tθ⃗ + Σα⃗_j(τ_j − t₀) + x⃗ − x⃗₀]²).
//!
//! At θ = 0 the path under Φ_n is a complex Gaussian bridge with mean
//! x̄(s) = x⃗₀ + (s−t₀)(x⃗−x⃗₀)/Δ − Σα⃗_j σ(s,τ_j) and covariance iσ(s,s')𝟙,
//! σ(s,s') = (min(s,s')−t₀)(t−max(s,s'))/Δ; every observable below multiplies TΦ_n by a
//! moment of that bridge. Atoms with a kick time act as w·δ_s(dτ)e^{iα⃗·x⃗} and enter
//! order n with multiplicity m through w^m/m!.

use super::rules::OrderedRule;
use super::{OrderTerm, SeriesOptions, SeriesReport, SimplexMethod};
use crate::closedform::{component, GridFunction, PropagatorQuery};
use crate::error::{Error, Result};
use crate::exec::CHUNK;
use crate::extrap::extrapolate;
use crate::lowdisc::Kronecker;
use crate::quad::{GaussHermite, GaussLegendre};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const MAX_SLOTS: usize = 24;

/// One atom w·δ_{α⃗} of the Fourier measure, optionally concentrated at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierAtom {
    /// Frequency α⃗.
    pub alpha: Vec<f64>,
    /// Complex weight w.
    pub weight: Complex64,
    /// Kick time s: the atom acts as w·δ_s(dτ) instead of w·dτ.
    pub kick: Option<f64>,
}

/// Finite complex measure m on ℝ^d (optionally with kicks in time).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FourierMeasure {
    /// Atoms.
    pub atoms: Vec<FourierAtom>,
}

impl FourierMeasure {
    /// Measure from atoms; all frequencies must share one dimension and be finite.
    pub fn new(atoms: Vec<FourierAtom>) -> Result<Self> {
        let m = Self { atoms };
        if let Some(d) = m.atoms.first().map(|a| a.alpha.len()) {
            for a in &m.atoms {
                if a.alpha.len() != d || d == 0 {
                    return Err(Error::invalid("Fourier atoms must share a non-zero dimension"));
                }
                if !a.alpha.iter().all(|v| v.is_finite()) || !a.weight.is_finite() {
                    return Err(Error::invalid("Fourier atoms must be finite"));
                }
            }
        }
        Ok(m)
    }

    /// V(x⃗) = g cos(k⃗·x⃗), i.e. m = (g/2)(δ_{k⃗} + δ_{−k⃗}).
    pub fn cosine(g: f64, k: &[f64]) -> Self {
        let atom = |sign: f64| FourierAtom { alpha: k.iter().map(|v| sign * v).collect(), weight: Complex64::new(0.5 * g, 0.0), kick: None };
        Self { atoms: vec![atom(1.0), atom(-1.0)] }
    }

    /// True without atoms.
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// V(x⃗) from the atoms without a kick time.
    pub fn potential(&self, x: &[f64]) -> Complex64 {
        self.atoms.iter().filter(|a| a.kick.is_none()).map(|a| a.weight * (I * dot(&a.alpha, x)).exp()).sum()
    }

    /// ∂_kV(x⃗) from the atoms without a kick time.
    pub fn gradient(&self, x: &[f64], k: usize) -> Complex64 {
        self.atoms.iter().filter(|a| a.kick.is_none()).map(|a| I * a.alpha[k] * a.weight * (I * dot(&a.alpha, x)).exp()).sum()
    }

    /// Σ|w| over atoms without a kick time.
    pub fn mass(&self) -> f64 {
        self.atoms.iter().filter(|a| a.kick.is_none()).map(|a| a.weight.norm()).sum()
    }

    fn check(&self, d: usize, t0: f64, t: f64) -> Result<()> {
        for a in &self.atoms {
            if a.alpha.len() != d {
                return Err(Error::invalid(format!("Fourier atom has dimension {}, query has {d}", a.alpha.len())));
            }
            if let Some(s) = a.kick {
                if !(s > t0 && s < t) {
                    return Err(Error::domain(format!("kick time {s} outside the open interval ({t0}, {t})")));
                }
            }
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Value with a quadrature-plus-truncation error bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Amplitude {
    /// Transition element.
    pub value: Complex64,
    /// Error estimate.
    pub error: f64,
    /// Highest order kept.
    pub order: usize,
}

type Slot = (f64, usize);

/// Series engine on [t₀, t] with possibly complex endpoints.
struct Chain<'a> {
    m: &'a FourierMeasure,
    d: usize,
    x0: Vec<Complex64>,
    x: Vec<Complex64>,
    t0: f64,
    t: f64,
    theta: Vec<Option<&'a GridFunction>>,
    theta_total: Vec<Complex64>,
    theta_sq: Complex64,
    cont: Vec<usize>,
    kicks: Vec<usize>,
    pref: Complex64,
}

impl<'a> Chain<'a> {
    fn new(m: &'a FourierMeasure, x0: Vec<Complex64>, x: Vec<Complex64>, t0: f64, t: f64, theta: &'a [GridFunction]) -> Result<Self> {
        let d = x.len();
        let theta: Vec<Option<&GridFunction>> = (0..d).map(|k| component(theta, d, k)).collect::<Result<_>>()?;
        let theta_total = theta.iter().map(|g| g.map_or(ZERO, |g| g.integral(t0, t))).collect();
        let theta_sq = theta.iter().map(|g| g.map_or(ZERO, |g| g.total_sq())).sum();
        let cont = (0..m.atoms.len()).filter(|&i| m.atoms[i].kick.is_none()).collect();
        let kicks = (0..m.atoms.len()).filter(|&i| m.atoms[i].kick.is_some_and(|s| s > t0 && s < t)).collect();
        let pref = (2.0 * PI * I * (t - t0)).powf(-0.5 * d as f64);
        Ok(Self { m, d, x0, x, t0, t, theta, theta_total, theta_sq, cont, kicks, pref })
    }

    fn dt(&self) -> f64 {
        self.t - self.t0
    }

    fn alpha(&self, a: usize) -> &[f64] {
        &self.m.atoms[a].alpha
    }

    /// TΦ for the given (τ, atom) slots.
    fn t_phi(&self, slots: &[Slot]) -> Complex64 {
        let dt = self.dt();
        let mut e = ZERO;
        let mut q = self.theta_sq;
        for &(tau, a) in slots {
            let al = self.alpha(a);
            for k in 0..self.d {
                e += I * al[k] * self.x0[k];
                if let Some(g) = self.theta[k] {
                    q += 2.0 * al[k] * g.integral(self.t0, tau);
                }
            }
        }
        for (i, &(ti, ai)) in slots.iter().enumerate() {
            let ali = self.alpha(ai);
            q += dot(ali, ali) * (ti - self.t0);
            for &(tj, aj) in &slots[..i] {
                q += 2.0 * dot(ali, self.alpha(aj)) * (ti.min(tj) - self.t0);
            }
        }
        e -= 0.5 * I * q;
        for k in 0..self.d {
            let mut v = self.theta_total[k] + self.x[k] - self.x0[k];
            for &(tau, a) in slots {
                v += self.alpha(a)[k] * (tau - self.t0);
            }
            e += I * v * v / (2.0 * dt);
        }
        self.pref * e.exp()
    }

    /// Bridge mean x̄_k(s) at θ = 0.
    fn mean_x(&self, slots: &[Slot], s: f64, k: usize) -> Complex64 {
        let dt = self.dt();
        let mut v = self.x0[k] + (s - self.t0) / dt * (self.x[k] - self.x0[k]);
        for &(tau, a) in slots {
            v -= self.alpha(a)[k] * (s.min(tau) - self.t0) * (self.t - s.max(tau)) / dt;
        }
        v
    }

    /// Bridge mean velocity d x̄_k/ds at θ = 0.
    fn mean_xdot(&self, slots: &[Slot], s: f64, k: usize) -> Complex64 {
        let dt = self.dt();
        let mut v = (self.x[k] - self.x0[k]) / dt;
        for &(tau, a) in slots {
            let al = self.alpha(a)[k];
            v += if tau < s { al * (tau - self.t0) / dt } else { -al * (self.t - tau) / dt };
        }
        v
    }

    /// σ(s,s) = (s−t₀)(t−s)/Δ.
    fn bridge_var(&self, s: f64) -> f64 {
        (s - self.t0) * (self.t - s) / self.dt()
    }

    /// Σ over continuous-atom tuples of Πw·f(slots, TΦ) with the given free times.
    fn tuple_sum<F>(&self, taus: &[f64], extra: &[Slot], f: &F) -> Complex64
    where
        F: Fn(&[Slot], Complex64) -> Complex64 + Sync,
    {
        let c = taus.len();
        let na = self.cont.len();
        if c > 0 && na == 0 {
            return ZERO;
        }
        let mut buf = [(0.0, 0usize); MAX_SLOTS];
        for (b, &tau) in buf.iter_mut().zip(taus) {
            b.0 = tau;
        }
        buf[c..c + extra.len()].copy_from_slice(extra);
        let len = c + extra.len();
        let mut idx = [0usize; MAX_SLOTS];
        let mut acc = ZERO;
        loop {
            let mut w = ONE;
            for j in 0..c {
                let a = self.cont[idx[j]];
                buf[j].1 = a;
                w *= self.m.atoms[a].weight;
            }
            let slots = &buf[..len];
            acc += w * f(slots, self.t_phi(slots));
            let mut j = 0;
            loop {
                if j == c {
                    return acc;
                }
                idx[j] += 1;
                if idx[j] < na {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }

    /// ∫_{Λ_c} of the tuple sum over [t₀, t] split at `breaks`: value, error, points.
    fn simplex<F>(&self, c: usize, breaks: &[f64], extra: &[Slot], opts: &SeriesOptions, f: &F) -> (Complex64, f64, usize)
    where
        F: Fn(&[Slot], Complex64) -> Complex64 + Sync,
    {
        if c == 0 {
            return (self.tuple_sum(&[], extra, f), 0.0, 1);
        }
        match &opts.method {
            SimplexMethod::Gauss { points } => {
                let m = SimplexMethod::gauss_points(points, c);
                let fine = OrderedRule::new(breaks, c, m);
                let coarse = OrderedRule::new(breaks, c, m - 2);
                let vf = fine.integrate(opts.exec, ZERO, |tau| self.tuple_sum(tau, extra, f));
                let vc = coarse.integrate(opts.exec, ZERO, |tau| self.tuple_sum(tau, extra, f));
                (vf, (vf - vc).norm(), fine.len() + coarse.len())
            }
            SimplexMethod::Kronecker { points, seed } => {
                let kr = Kronecker::new(c, *seed);
                let (a, len) = (self.t0, self.dt());
                let eval = |i: usize| {
                    let mut p = [0.0f64; MAX_SLOTS];
                    kr.point(i, &mut p[..c]);
                    for v in p[..c].iter_mut() {
                        *v = a + len * *v;
                    }
                    p[..c].sort_by(f64::total_cmp);
                    self.tuple_sum(&p[..c], extra, f)
                };
                let half = (points / 2).max(1);
                let total = (*points).max(2);
                let s1 = opts.exec.chunked_sum(half, CHUNK, ZERO, eval);
                let s2 = opts.exec.chunked_sum(total - half, CHUNK, ZERO, |i| eval(i + half));
                let vol = len.powi(c as i32) / factorial(c);
                let full = (s1 + s2) / total as f64 * vol;
                let first = s1 / half as f64 * vol;
                (full, (full - first).norm(), total)
            }
        }
    }

    /// Order-n contribution (−i)^n·Σ_{kick multiplicities}Πw_k^{m_k}/m_k!·∫_{Λ_c}…,
    /// with `fixed` slots appended to every configuration.
    fn order<F>(&self, n: usize, breaks: &[f64], fixed: &[Slot], opts: &SeriesOptions, f: &F) -> Result<(Complex64, f64, usize)>
    where
        F: Fn(&[Slot], Complex64) -> Complex64 + Sync,
    {
        let mut bks: Vec<f64> = vec![self.t0, self.t];
        bks.extend(breaks.iter().copied().filter(|&b| b > self.t0 && b < self.t));
        bks.extend(self.kicks.iter().map(|&k| self.m.atoms[k].kick.unwrap_or(self.t0)));
        bks.sort_by(f64::total_cmp);
        bks.dedup();
        let sign = (-I).powu(n as u32);
        let (mut value, mut err, mut pts) = (ZERO, 0.0, 0);
        for mult in multiplicities(self.kicks.len(), n) {
            let used: usize = mult.iter().sum();
            let c = n - used;
            let mut factor = sign;
            let mut slots: Vec<Slot> = Vec::new();
            for (&k, &mk) in self.kicks.iter().zip(&mult) {
                let atom = &self.m.atoms[k];
                factor *= atom.weight.powu(mk as u32) / factorial(mk);
                slots.extend(std::iter::repeat_n((atom.kick.unwrap_or(self.t0), k), mk));
            }
            slots.extend_from_slice(fixed);
            if slots.len() + c > MAX_SLOTS {
                return Err(Error::invalid(format!("at most {MAX_SLOTS} slots per term")));
            }
            let (v, e, p) = self.simplex(c, &bks, &slots, opts, f);
            value += factor * v;
            err += factor.norm() * e;
            pts += p;
        }
        Ok((value, err, pts))
    }

    /// Σ_{n ≤ order} of `order` with the same integrand.
    fn sum_orders<F>(&self, order: usize, breaks: &[f64], opts: &SeriesOptions, f: &F) -> Result<(Complex64, f64)>
    where
        F: Fn(&[Slot], Complex64) -> Complex64 + Sync,
    {
        let mut vals = Vec::with_capacity(order + 1);
        let mut err = 0.0;
        for n in 0..=order {
            let (v, e, _) = self.order(n, breaks, &[], opts, f)?;
            vals.push(v);
            err += e;
        }
        Ok((crate::exec::pairwise_sum(&vals, ZERO), err))
    }
}

/// All vectors of `len` non-negative integers with sum ≤ n.
fn multiplicities(len: usize, n: usize) -> Vec<Vec<usize>> {
    if len == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in multiplicities(len - 1, n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn real_chain<'a>(q: &PropagatorQuery, m: &'a FourierMeasure, theta: &'a [GridFunction]) -> Result<Chain<'a>> {
    if !(q.t > q.t0) {
        return Err(Error::domain("propagator needs t > t0"));
    }
    m.check(q.dim(), q.t0, q.t)?;
    let c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    Chain::new(m, c(&q.x0), c(&q.x), q.t0, q.t, theta)
}

/// L² norm |θ|₀ of a d-component test function.
fn theta_norm(theta: &[GridFunction]) -> f64 {
    let gl = GaussLegendre::new(64);
    theta
        .iter()
        .map(|g| {
            let cells = 64;
            let h = (g.end() - g.start()) / cells as f64;
            (0..cells).map(|i| gl.integrate_real(g.start() + i as f64 * h, g.start() + (i + 1) as f64 * h, |s| g.value(s).norm_sqr())).sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}

/// Constants (b₀, M) of the order bound |K_n| ≤ b₀·Mⁿ/n! from the integrated estimate
/// C_n with Δⁿ/n! from the simplex volume.
fn bound_constants(q: &PropagatorQuery, m: &FourierMeasure, theta: &[GridFunction]) -> (f64, f64) {
    let dt = q.duration();
    let th = theta_norm(theta);
    let dist = q.x.iter().zip(&q.x0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let b0 = (2.0 * PI * dt).powf(-0.5 * q.dim() as f64) * (th * th + dist * th / dt.sqrt()).exp();
    let mass: f64 = m
        .atoms
        .iter()
        .map(|a| {
            let grow = (2.0 * dt.sqrt() * th * dot(&a.alpha, &a.alpha).sqrt()).exp();
            a.weight.norm() * grow * if a.kick.is_some() { 1.0 } else { dt }
        })
        .sum();
    (b0, mass)
}

/// Analytic bound on |K_n|.
pub fn ahk_bound(q: &PropagatorQuery, m: &FourierMeasure, theta: &[GridFunction], n: usize) -> f64 {
    let (b0, mass) = bound_constants(q, m, theta);
    b0 * mass.powi(n as i32) / factorial(n)
}

/// Σ_{j>n} of [`ahk_bound`].
pub fn ahk_tail(q: &PropagatorQuery, m: &FourierMeasure, theta: &[GridFunction], n: usize) -> f64 {
    let (b0, mass) = bound_constants(q, m, theta);
    let mut term = b0 * mass.powi(n as i32) / factorial(n);
    let mut sum = 0.0;
    for j in n + 1..n + 400 {
        term *= mass / j as f64;
        sum += term;
        if term <= 1e-17 * sum || term == 0.0 {
            break;
        }
    }
    sum
}

fn check_phase(q: &PropagatorQuery, m: &FourierMeasure, theta: &[GridFunction], n: usize, cap: f64) -> Result<()> {
    let amax = m.atoms.iter().map(|a| dot(&a.alpha, &a.alpha).sqrt()).fold(0.0, f64::max);
    let dt = q.duration();
    let dist = q.x.iter().zip(&q.x0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let th = theta_norm(theta) / dt.sqrt();
    let est = n as f64 * amax * (dist + n as f64 * amax * dt + th * dt);
    if est > cap {
        return Err(Error::domain(format!("estimated phase variation {est:.1} rad at order {n} exceeds the cap {cap}")));
    }
    Ok(())
}

/// Order-n term of the T-transform (θ empty means θ = 0).
pub fn ahk_order_n(q: &PropagatorQuery, m: &FourierMeasure, n: usize, theta: &[GridFunction], opts: &SeriesOptions) -> Result<OrderTerm> {
    let chain = real_chain(q, m, theta)?;
    check_phase(q, m, theta, n, opts.phase_cap)?;
    let (value, quad_error, points) = chain.order(n, &[], &[], opts, &|_: &[Slot], phi| phi)?;
    Ok(OrderTerm { order: n, value, bound: ahk_bound(q, m, theta, n), quad_error, points })
}

/// T-transform TI(θ) of the Feynman integrand, truncated once the tail bound drops below
/// `opts.tol`; θ = 0 gives the propagator.
pub fn ahk_t_transform(q: &PropagatorQuery, m: &FourierMeasure, theta: &[GridFunction], opts: &SeriesOptions) -> Result<SeriesReport> {
    real_chain(q, m, theta)?;
    let mut terms = Vec::new();
    for n in 0..=opts.order_cap {
        terms.push(ahk_order_n(q, m, n, theta, opts)?);
        let tail = ahk_tail(q, m, theta, n);
        if tail < opts.tol || m.is_empty() {
            return Ok(SeriesReport::from_terms(terms, if m.is_empty() { 0.0 } else { tail }));
        }
    }
    Err(Error::tolerance(format!(
        "tail bound {:.3e} above tolerance {:.1e} at the order cap {}",
        ahk_tail(q, m, theta, opts.order_cap),
        opts.tol,
        opts.order_cap
    )))
}

/// Propagator K = TI(0).
pub fn ahk_propagator(q: &PropagatorQuery, m: &FourierMeasure, opts: &SeriesOptions) -> Result<SeriesReport> {
    ahk_t_transform(q, m, &[], opts)
}

fn check_time(q: &PropagatorQuery, m: &FourierMeasure, s: f64) -> Result<()> {
    if !(s > q.t0 && s < q.t) {
        return Err(Error::domain(format!("observation time {s} outside ({}, {})", q.t0, q.t)));
    }
    if m.atoms.iter().any(|a| a.kick == Some(s)) {
        return Err(Error::domain(format!("observation time {s} coincides with a kick")));
    }
    Ok(())
}

fn check_component(q: &PropagatorQuery, k: usize) -> Result<()> {
    if k >= q.dim() {
        return Err(Error::invalid(format!("component {k} out of range for dimension {}", q.dim())));
    }
    Ok(())
}

/// Series order and truncation error for observables: the propagator's order and its
/// tail bound scaled by `scale`.
fn observable_order(q: &PropagatorQuery, m: &FourierMeasure, opts: &SeriesOptions) -> Result<(usize, f64)> {
    let rep = ahk_propagator(q, m, opts)?;
    Ok((rep.order(), rep.tail_bound))
}

fn alpha_max(m: &FourierMeasure) -> f64 {
    m.atoms.iter().flat_map(|a| a.alpha.iter().map(|v| v.abs())).fold(0.0, f64::max)
}

/// E(x_k(s)·I) at θ = 0.
pub fn transition_x(q: &PropagatorQuery, m: &FourierMeasure, s: f64, k: usize, opts: &SeriesOptions) -> Result<Amplitude> {
    check_time(q, m, s)?;
    check_component(q, k)?;
    let (order, tail) = observable_order(q, m, opts)?;
    let chain = real_chain(q, m, &[])?;
    let (value, err) = chain.sum_orders(order, &[s], opts, &|sl: &[Slot], phi| chain.mean_x(sl, s, k) * phi)?;
    let scale = q.x0[k].abs() + q.x[k].abs() + (order + 1) as f64 * alpha_max(m) * q.duration();
    Ok(Amplitude { value, error: err + tail * scale, order })
}

/// E(ẋ_k(s)·I) at θ = 0.
pub fn transition_xdot(q: &PropagatorQuery, m: &FourierMeasure, s: f64, k: usize, opts: &SeriesOptions) -> Result<Amplitude> {
    check_time(q, m, s)?;
    check_component(q, k)?;
    let (order, tail) = observable_order(q, m, opts)?;
    let chain = real_chain(q, m, &[])?;
    let (value, err) = chain.sum_orders(order, &[s], opts, &|sl: &[Slot], phi| chain.mean_xdot(sl, s, k) * phi)?;
    let scale = (q.x[k] - q.x0[k]).abs() / q.duration() + (order + 1) as f64 * alpha_max(m);
    Ok(Amplitude { value, error: err + tail * scale, order })
}

/// Functional commutation relation at one s.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcrReport {
    /// ε values.
    pub eps: Vec<f64>,
    /// E((ẋ_k(s+ε)x_l(s) − x_l(s)ẋ_k(s−ε))·I) per ε.
    pub values: Vec<Complex64>,
    /// Polynomial extrapolation to ε = 0.
    pub extrapolated: Complex64,
    /// Extrapolation error estimate.
    pub extrapolation_error: f64,
    /// Summed quadrature and truncation error of the values.
    pub error: f64,
    /// −iδ_{kl}·E(I).
    pub expected: Complex64,
}

/// E((ẋ_k(s+ε)x_l(s) − x_l(s)ẋ_k(s−ε))·I) for each ε and its ε → 0 limit.
pub fn ccr_check(q: &PropagatorQuery, m: &FourierMeasure, s: f64, eps: &[f64], k: usize, l: usize, opts: &SeriesOptions) -> Result<CcrReport> {
    check_time(q, m, s)?;
    check_component(q, k)?;
    check_component(q, l)?;
    if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0 && s - e > q.t0 && s + e < q.t)) {
        return Err(Error::domain("every ε must satisfy t0 < s−ε and s+ε < t"));
    }
    let rep = ahk_propagator(q, m, opts)?;
    let order = rep.order();
    let chain = real_chain(q, m, &[])?;
    let delta = if k == l { ONE } else { ZERO };
    let mut values = Vec::with_capacity(eps.len());
    let mut error = 0.0;
    for &e in eps {
        let f = |sl: &[Slot], phi: Complex64| {
            let jump = chain.mean_xdot(sl, s + e, k) - chain.mean_xdot(sl, s - e, k);
            (chain.mean_x(sl, s, l) * jump - I * delta) * phi
        };
        let (v, err) = chain.sum_orders(order, &[s - e, s, s + e], opts, &f)?;
        values.push(v);
        error += err;
    }
    let ex = extrapolate(eps, &values)?;
    Ok(CcrReport {
        eps: eps.to_vec(),
        values,
        extrapolated: ex.value,
        extrapolation_error: ex.error,
        error: error + rep.error,
        expected: -I * delta * rep.value,
    })
}

/// Ehrenfest relation E(ẍ_k(s)·I) = −E(∂_kV(x(s))·I) by two routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EhrenfestReport {
    /// E(ẍ_k I) from the series with one time collapsed onto s.
    pub xddot_collapsed: Complex64,
    /// E(ẍ_k I) from central differences of E(ẋ_k I), extrapolated in h².
    pub xddot_fd: Complex64,
    /// Error estimate of the difference route.
    pub fd_error: f64,
    /// E(∂_kV(x(s)) I).
    pub grad_v: Complex64,
    /// xddot_collapsed + grad_v.
    pub residual: Complex64,
    /// xddot_fd + grad_v.
    pub fd_residual: Complex64,
    /// E(I).
    pub propagator: Complex64,
    /// Quadrature and truncation error of the series routes.
    pub error: f64,
}

/// Step sizes of the difference route.
pub const EHRENFEST_STEPS: [f64; 3] = [0.1, 0.05, 0.025];

/// Both Ehrenfest routes for component k at time s (no kicks).
pub fn ehrenfest_check(q: &PropagatorQuery, m: &FourierMeasure, s: f64, k: usize, opts: &SeriesOptions) -> Result<EhrenfestReport> {
    check_time(q, m, s)?;
    check_component(q, k)?;
    if m.atoms.iter().any(|a| a.kick.is_some()) {
        return Err(Error::invalid("the Ehrenfest check needs a measure without kicks"));
    }
    let rep = ahk_propagator(q, m, opts)?;
    let order = rep.order();
    let chain = real_chain(q, m, &[])?;
    let plain = |_: &[Slot], phi: Complex64| phi;
    let mut collapsed = Vec::new();
    let mut grad = Vec::new();
    let mut error = rep.error;
    for (b, atom) in m.atoms.iter().enumerate() {
        let ak = atom.alpha[k];
        if ak == 0.0 {
            continue;
        }
        for n in 0..=order {
            let (v, e, _) = chain.order(n, &[s], &[(s, b)], opts, &plain)?;
            // order n+1 of ẍ with τ_j = s carries (−i)^{n+1}α_k w; order n of ∂V carries (−i)^n iα_k w
            if n < order {
                collapsed.push(-I * atom.weight * ak * v);
            }
            grad.push(I * atom.weight * ak * v);
            error += (atom.weight * ak).norm() * e;
        }
    }
    let xddot_collapsed = crate::exec::pairwise_sum(&collapsed, ZERO);
    let grad_v = crate::exec::pairwise_sum(&grad, ZERO);
    let mut diffs = Vec::new();
    let mut fd_error = 0.0;
    let mut hs = Vec::new();
    for &h in EHRENFEST_STEPS.iter() {
        if !(s - h > q.t0 && s + h < q.t) {
            continue;
        }
        let up = chain.sum_orders(order, &[s + h], opts, &|sl: &[Slot], phi| chain.mean_xdot(sl, s + h, k) * phi)?;
        let dn = chain.sum_orders(order, &[s - h], opts, &|sl: &[Slot], phi| chain.mean_xdot(sl, s - h, k) * phi)?;
        diffs.push((up.0 - dn.0) / (2.0 * h));
        fd_error += (up.1 + dn.1) / (2.0 * h);
        hs.push(h * h);
    }
    if hs.is_empty() {
        return Err(Error::domain("s too close to an endpoint for the difference route"));
    }
    let ex = extrapolate(&hs, &diffs)?;
    Ok(EhrenfestReport {
        xddot_collapsed,
        xddot_fd: ex.value,
        fd_error: fd_error + ex.error,
        grad_v,
        residual: xddot_collapsed + grad_v,
        fd_residual: ex.value + grad_v,
        propagator: rep.value,
        error,
    })
}

/// Pinning at x⃗(s) = y⃗ by the split series and by two propagator runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinnedReport {
    /// T(I·δ(x⃗(s) − y⃗))(0) from the series split at s.
    pub split: Complex64,
    /// K(x⃗,t|y⃗,s)·K(y⃗,s|x⃗₀,t₀).
    pub product: Complex64,
    /// split − product.
    pub residual: Complex64,
    /// Combined error estimate.
    pub error: f64,
}

/// Bridge density of x⃗(s) at y⃗ under Φ_n, Π_k(2πiσ²)^{−1/2}e^{i(y_k − x̄_k)²/(2σ²)}.
fn bridge_density(chain: &Chain, slots: &[Slot], s: f64, y: &[Complex64]) -> Complex64 {
    let v = I * chain.bridge_var(s);
    let mut out = ONE;
    for (k, yk) in y.iter().enumerate() {
        let dy = yk - chain.mean_x(slots, s, k);
        out *= (2.0 * PI * v).sqrt().inv() * (-dy * dy / (2.0 * v)).exp();
    }
    out
}

/// Compare the split series for T(I·δ(x⃗(s) − y⃗))(0) with the product of two propagators.
pub fn pinned_factorization_check(q: &PropagatorQuery, m: &FourierMeasure, s: f64, y: &[f64], opts: &SeriesOptions) -> Result<PinnedReport> {
    check_time(q, m, s)?;
    if y.len() != q.dim() {
        return Err(Error::invalid("pin point dimension differs from query dimension"));
    }
    let rep = ahk_propagator(q, m, opts)?;
    let order = rep.order();
    let chain = real_chain(q, m, &[])?;
    let yc: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let (split, err) = chain.sum_orders(order, &[s], opts, &|sl: &[Slot], phi| bridge_density(&chain, sl, s, &yc) * phi)?;
    let late = PropagatorQuery::new(y.to_vec(), q.x.clone(), s, q.t, None)?;
    let early = PropagatorQuery::new(q.x0.clone(), y.to_vec(), q.t0, s, None)?;
    let a = ahk_propagator(&late, m, opts)?;
    let b = ahk_propagator(&early, m, opts)?;
    let product = a.value * b.value;
    let scale = (2.0 * PI * chain.bridge_var(s)).powf(-0.5 * q.dim() as f64);
    Ok(PinnedReport {
        split,
        product,
        residual: split - product,
        error: err + rep.tail_bound * scale + a.error * b.value.norm() + b.error * a.value.norm(),
    })
}

/// E(F_ε(x⃗(s))·g(x⃗(s))·I) with F_ε = e^{−ε²|y|²/2} and g = 1 or y_k, from the closed
/// Gaussian moments of the bridge under each Φ_n.
pub fn gaussian_observable(q: &PropagatorQuery, m: &FourierMeasure, s: f64, eps: f64, weight: Option<usize>, opts: &SeriesOptions) -> Result<Amplitude> {
    check_time(q, m, s)?;
    if let Some(k) = weight {
        check_component(q, k)?;
    }
    let (order, tail) = observable_order(q, m, opts)?;
    let chain = real_chain(q, m, &[])?;
    let v = I * chain.bridge_var(s);
    let e2 = eps * eps;
    let f = |sl: &[Slot], phi: Complex64| {
        let den = ONE + e2 * v;
        let mut out = phi;
        for k in 0..chain.d {
            let mu = chain.mean_x(sl, s, k);
            out *= den.sqrt().inv() * (-e2 * mu * mu / (2.0 * den)).exp();
            if weight == Some(k) {
                out *= mu / den;
            }
        }
        out
    };
    let (value, err) = chain.sum_orders(order, &[s], opts, &f)?;
    let scale = weight.map_or(1.0, |k| q.x0[k].abs() + q.x[k].abs() + (order + 1) as f64 * alpha_max(m) * q.duration());
    Ok(Amplitude { value, error: err + tail * scale, order })
}

/// Samples of K(x,t|y,s)K(y,s|x₀,t₀) on the contour y = ȳ + e^{iπ/4}r through the
/// classical point ȳ (d = 1), for two Gauss–Hermite rules in r.
pub struct MidpointSamples {
    rules: [Vec<(Complex64, Complex64)>; 2],
    order: usize,
    tail: f64,
    scale: f64,
}

impl MidpointSamples {
    /// Evaluate both propagators at every contour node.
    pub fn new(q: &PropagatorQuery, m: &FourierMeasure, s: f64, opts: &SeriesOptions) -> Result<Self> {
        check_time(q, m, s)?;
        if q.dim() != 1 {
            return Err(Error::invalid("the midpoint integral is implemented for d = 1"));
        }
        let (order, tail) = observable_order(q, m, opts)?;
        let (x0, x, t0, t) = (q.x0[0], q.x[0], q.t0, q.t);
        let sig = ((s - t0) * (t - s) / (t - t0)).sqrt();
        let yc = x0 + (s - t0) / (t - t0) * (x - x0);
        let rot = Complex64::from_polar(1.0, PI / 4.0);
        let kernel = |a: Complex64, ta: f64, b: Complex64, tb: f64| -> Result<Complex64> {
            let chain = Chain::new(m, vec![a], vec![b], ta, tb, &[])?;
            Ok(chain.sum_orders(order, &[], opts, &|_: &[Slot], phi| phi)?.0)
        };
        let rule = |nodes: usize| -> Result<Vec<(Complex64, Complex64)>> {
            let gh = GaussHermite::new(nodes);
            gh.nodes
                .iter()
                .zip(&gh.weights)
                .map(|(z, w)| {
                    let y = yc + rot * (sig * z);
                    let kk = kernel(y, s, c1(x), t)? * kernel(c1(x0), t0, y, s)?;
                    Ok((y, kk * w * (0.5 * z * z).exp() * rot * sig * (2.0 * PI).sqrt()))
                })
                .collect()
        };
        Ok(Self { rules: [rule(MIDPOINT_NODES[0])?, rule(MIDPOINT_NODES[1])?], order, tail, scale: x0.abs() + x.abs() + 1.0 })
    }

    /// ∫K(x,t|y,s)F(y)K(y,s|x₀,t₀)dy with the error from the coarser rule.
    pub fn integrate<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Amplitude {
        let sum = |r: &[(Complex64, Complex64)]| r.iter().map(|(y, w)| w * f(*y)).sum::<Complex64>();
        let fine = sum(&self.rules[0]);
        let coarse = sum(&self.rules[1]);
        let probe = f(self.rules[0][self.rules[0].len() / 2].0).norm().max(1.0);
        Amplitude { value: fine, error: (fine - coarse).norm() + self.tail * self.scale * probe, order: self.order }
    }

    /// F_ε(y)·g(y) with F_ε = e^{−ε²y²/2} and g = 1 or y.
    pub fn regularized(&self, eps: f64, with_y: bool) -> Amplitude {
        self.integrate(|y| (-0.5 * eps * eps * y * y).exp() * if with_y { y } else { ONE })
    }
}

/// Gauss–Hermite node counts of the midpoint contour rules.
pub const MIDPOINT_NODES: [usize; 2] = [40, 30];

fn c1(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// ε-extrapolated midpoint route: E(x(s)·I) when `with_y`, else the Chapman–Kolmogorov
/// value K(x,t|x₀,t₀). Extrapolation runs in ε².
pub fn midpoint_route(q: &PropagatorQuery, m: &FourierMeasure, s: f64, eps: &[f64], with_y: bool, opts: &SeriesOptions) -> Result<Amplitude> {
    MidpointSamples::new(q, m, s, opts)?.extrapolated(eps, with_y)
}

impl MidpointSamples {
    /// [`MidpointSamples::regularized`] extrapolated to ε = 0 in ε².
    pub fn extrapolated(&self, eps: &[f64], with_y: bool) -> Result<Amplitude> {
        let vals: Vec<Amplitude> = eps.iter().map(|&e| self.regularized(e, with_y)).collect();
        let e2: Vec<f64> = eps.iter().map(|e| e * e).collect();
        let ex = extrapolate(&e2, &vals.iter().map(|a| a.value).collect::<Vec<_>>())?;
        let err = vals.iter().map(|a| a.error).fold(0.0, f64::max);
        Ok(Amplitude { value: ex.value, error: err + ex.error, order: self.order })
    }
}
