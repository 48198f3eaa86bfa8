//! Perturbation-series propagator engines and path observables.
//!
//! - [`ks`]: Khandekar–Streit series for one-dimensional space-time measures, around
//!   the free particle or the harmonic oscillator, plus a kicked engine for atoms in time.
//! - [`ahk`]: the Fourier-measure series in d dimensions together with transition
//!   elements, the functional commutation relation, Ehrenfest and pinning checks.
//! - [`rules`]: ordered-simplex, box and sphere-orthant quadrature rules.

pub mod ahk;
pub mod ks;
pub mod rules;

use crate::exec::Exec;
use num_complex::Complex64;
use serde::Serialize;

/// Contribution of one perturbation order.
#[derive(Debug, Clone, Serialize)]
pub struct OrderTerm {
    /// Order n.
    pub order: usize,
    /// K_n.
    pub value: Complex64,
    /// Analytic bound on |K_n| (infinite when no bound applies).
    pub bound: f64,
    /// Quadrature error estimate.
    pub quad_error: f64,
    /// Number of quadrature points used.
    pub points: usize,
}

/// Truncated series with per-order data and a combined error bar.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesReport {
    /// Orders 0..=N.
    pub terms: Vec<OrderTerm>,
    /// Σ K_n.
    pub value: Complex64,
    /// Bound on the omitted orders N+1, N+2, ….
    pub tail_bound: f64,
    /// Sum of quadrature error estimates.
    pub quad_error: f64,
    /// tail_bound + quad_error.
    pub error: f64,
}

impl SeriesReport {
    pub(crate) fn from_terms(terms: Vec<OrderTerm>, tail_bound: f64) -> Self {
        let value = crate::exec::pairwise_sum(&terms.iter().map(|t| t.value).collect::<Vec<_>>(), Complex64::new(0.0, 0.0));
        let quad_error: f64 = terms.iter().map(|t| t.quad_error).sum();
        Self { terms, value, tail_bound, quad_error, error: tail_bound + quad_error }
    }

    /// Highest order kept.
    pub fn order(&self) -> usize {
        self.terms.len().saturating_sub(1)
    }
}

/// How ordered-simplex integrals are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum SimplexMethod {
    /// Product Gauss rules in collapsed coordinates; `points[n]` per coordinate at
    /// order n, error from the rule with two fewer points.
    Gauss {
        /// Points per coordinate, indexed by order (last entry reused beyond).
        points: Vec<usize>,
    },
    /// Sorted Kronecker points on the cube with factor 1/n!, half-sample error.
    Kronecker {
        /// Points per order.
        points: usize,
        /// Offset seed.
        seed: u64,
    },
}

impl SimplexMethod {
    pub(crate) fn gauss_points(points: &[usize], n: usize) -> usize {
        points.get(n).or(points.last()).copied().unwrap_or(6).max(3)
    }
}

/// Series evaluation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesOptions {
    /// Target for the tail bound.
    pub tol: f64,
    /// Highest order evaluated.
    pub order_cap: usize,
    /// Simplex or sphere quadrature.
    pub method: SimplexMethod,
    /// Imaginary gap deformation β of the KS engine (ignored elsewhere).
    pub deformation: f64,
    /// KS only: evaluate static constant-weight atoms without a source through the
    /// time-convolution representation instead of the sphere rule.
    pub resolvent: bool,
    /// AHK only: refuse orders whose estimated total phase variation in τ exceeds this
    /// many radians.
    pub phase_cap: f64,
    /// Evaluation strategy.
    pub exec: Exec,
}

impl SeriesOptions {
    /// KS defaults: tolerance 1e−6, order cap 8, Gauss rules on the sphere orthant.
    pub fn ks() -> Self {
        Self {
            tol: 1e-6,
            order_cap: 8,
            method: SimplexMethod::Gauss { points: vec![0, 401, 61, 31, 19, 13, 11, 9, 7] },
            deformation: ks::DEFAULT_DEFORMATION,
            resolvent: true,
            phase_cap: f64::INFINITY,
            exec: Exec::default(),
        }
    }

    /// AHK defaults: tolerance 1e−8, order cap 6, Gauss rules on ordered simplices.
    pub fn ahk() -> Self {
        Self {
            tol: 1e-8,
            order_cap: 6,
            method: SimplexMethod::Gauss { points: vec![0, 20, 14, 10, 8, 7, 6, 5, 5] },
            deformation: 0.0,
            resolvent: false,
            phase_cap: 200.0,
            exec: Exec::default(),
        }
    }
}
