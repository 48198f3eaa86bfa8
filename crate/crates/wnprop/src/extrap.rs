//! Polynomial extrapolation of ε-regularized sequences to ε = 0.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Extrapolated value with an error estimate (difference to the next lower order).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolated {
    /// Value at ε = 0.
    pub value: Complex64,
    /// |full-order − one-order-lower| extrapolant.
    pub error: f64,
}

/// Neville interpolation of (ε_i, f_i) evaluated at ε = 0.
pub fn neville_at_zero(eps: &[f64], vals: &[Complex64]) -> Result<Complex64> {
    if eps.is_empty() || eps.len() != vals.len() {
        return Err(Error::invalid("extrapolation needs matching, non-empty inputs"));
    }
    let mut p = vals.to_vec();
    let n = eps.len();
    for m in 1..n {
        for i in 0..n - m {
            let (a, b) = (eps[i], eps[i + m]);
            if a == b {
                return Err(Error::invalid("extrapolation nodes must be distinct"));
            }
            p[i] = (p[i + 1] * a - p[i] * b) / (a - b);
        }
    }
    Ok(p[0])
}

/// Extrapolate to ε = 0; the error estimate compares against the extrapolant that drops
/// the first node.
pub fn extrapolate(eps: &[f64], vals: &[Complex64]) -> Result<Extrapolated> {
    let value = neville_at_zero(eps, vals)?;
    let error = if eps.len() > 1 { (value - neville_at_zero(&eps[1..], &vals[1..])?).norm() } else { f64::INFINITY };
    Ok(Extrapolated { value, error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_polynomials() {
        let f = |e: f64| Complex64::new(1.0 + 2.0 * e - 3.0 * e * e, e * e);
        let eps = [0.4, 0.2, 0.1];
        let v: Vec<_> = eps.iter().map(|&e| f(e)).collect();
        let r = extrapolate(&eps, &v).unwrap();
        assert!((r.value - Complex64::new(1.0, 0.0)).norm() < 1e-13);
    }
}
