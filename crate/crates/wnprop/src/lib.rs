//! Truncated white-noise analysis and Feynman propagator engines.
//!
//! Modules:
//! - [`specfun`]: Hermite polynomials, theta series, simplex volumes.
//! - [`fock`]: symmetric Fock-space kernel algebra over a finite basis.
//! - [`appell1d`]: one-dimensional Appell systems for non-Gaussian measures.
//! - [`closedform`]: closed-form propagators and their T-transforms.
//! - [`dyson`]: perturbation-series propagator engines and path observables.
//! - [`dossmc`]: complex-scaled Brownian-bridge Monte Carlo.

pub mod appell1d;
pub mod closedform;
pub mod dossmc;
pub mod dyson;
pub mod error;
pub mod exec;
pub mod extrap;
pub mod lowdisc;
pub mod quad;
pub mod fock;
pub mod specfun;

pub use error::{Error, Result};
pub use exec::Exec;
pub use num_complex::Complex64;
