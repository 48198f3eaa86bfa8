//! Execution strategy and deterministic reductions.
//!
//! Every parallel sum in the crate goes through [`Exec::map_sum`]: leaves are
//! produced in index order, then combined by a fixed pairwise tree. The tree
//! shape depends only on the number of leaves, so sequential and parallel
//! runs are bitwise identical.

use num_complex::Complex64;
use std::ops::Add;

/// How independent terms are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    /// Single-threaded evaluation.
    Sequential,
    /// Data-parallel evaluation on the rayon pool (falls back to sequential
    /// when the `parallel` feature is disabled).
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Pairwise sum with a split point fixed at `len / 2`.
pub fn pairwise_sum<T: Copy + Add<Output = T>>(xs: &[T], zero: T) -> T {
    match xs.len() {
        0 => zero,
        1 => xs[0],
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l, zero) + pairwise_sum(r, zero)
        }
    }
}

#[cfg(feature = "parallel")]
fn par_pairwise_sum<T: Copy + Add<Output = T> + Send + Sync>(xs: &[T], zero: T) -> T {
    const GRAIN: usize = 1024;
    if xs.len() <= GRAIN {
        return pairwise_sum(xs, zero);
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    let (a, b) = rayon::join(|| par_pairwise_sum(l, zero), || par_pairwise_sum(r, zero));
    a + b
}

impl Exec {
    /// Evaluate `f(0..n)` and return the results in index order.
    pub fn map_collect<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Deterministic sum of `f(0..n)`.
    pub fn map_sum<T, F>(self, n: usize, zero: T, f: F) -> T
    where
        T: Copy + Add<Output = T> + Send + Sync,
        F: Fn(usize) -> T + Sync + Send,
    {
        let leaves = self.map_collect(n, f);
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => par_pairwise_sum(&leaves, zero),
            _ => pairwise_sum(&leaves, zero),
        }
    }

    /// Deterministic complex sum of `f(0..n)`.
    pub fn sum_c<F>(self, n: usize, f: F) -> Complex64
    where
        F: Fn(usize) -> Complex64 + Sync + Send,
    {
        self.map_sum(n, Complex64::new(0.0, 0.0), f)
    }
}

/// Default number of consecutive indices summed sequentially per leaf.
pub const CHUNK: usize = 2048;

impl Exec {
    /// Deterministic sum of `f(0..n)` in fixed chunks of `chunk` consecutive indices;
    /// the leaf partition and reduction tree do not depend on the thread count.
    pub fn chunked_sum<T, F>(self, n: usize, chunk: usize, zero: T, f: F) -> T
    where
        T: Copy + Add<Output = T> + Send + Sync,
        F: Fn(usize) -> T + Sync + Send,
    {
        let chunk = chunk.max(1);
        let leaves = n.div_ceil(chunk);
        self.map_sum(leaves, zero, |c| {
            let lo = c * chunk;
            let hi = (lo + chunk).min(n);
            let vals: Vec<T> = (lo..hi).map(&f).collect();
            pairwise_sum(&vals, zero)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_integer_sum() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs, 0.0), 499500.0);
    }

    #[test]
    fn parallel_and_sequential_bitwise_equal() {
        let f = |i: usize| Complex64::new((i as f64 * 0.37).sin(), 1.0 / (1.0 + i as f64));
        let a = Exec::Sequential.sum_c(100_003, f);
        let b = Exec::Parallel.sum_c(100_003, f);
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
        let c = Exec::Sequential.chunked_sum(100_003, 64, Complex64::new(0.0, 0.0), f);
        let d = Exec::Parallel.chunked_sum(100_003, 64, Complex64::new(0.0, 0.0), f);
        assert_eq!(c.re.to_bits(), d.re.to_bits());
        assert!((c - a).norm() < 1e-9);
    }
}
