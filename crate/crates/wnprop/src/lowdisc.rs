//! Kronecker low-discrepancy sequences on the unit cube.

/// Additive recurrence x_i = frac(x₀ + i·α) with α_j = φ_d^{−j}, where φ_d is the
/// positive root of x^{d+1} = x + 1.
#[derive(Debug, Clone)]
pub struct Kronecker {
    alpha: Vec<f64>,
    offset: f64,
}

impl Kronecker {
    /// Sequence in `dim` dimensions; `seed` selects the starting offset.
    pub fn new(dim: usize, seed: u64) -> Self {
        let mut phi = 2.0f64;
        for _ in 0..64 {
            phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
        }
        let alpha = (1..=dim).map(|j| phi.powi(-(j as i32))).collect();
        let offset = 0.5 + (seed as f64 * 0.618_033_988_749_894_9).fract();
        Self { alpha, offset }
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// Write point `i` into `out`.
    pub fn point(&self, i: usize, out: &mut [f64]) {
        for (o, a) in out.iter_mut().zip(&self.alpha) {
            *o = (self.offset + i as f64 * a).fract();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_function() {
        let k = Kronecker::new(3, 0);
        let n = 100_000;
        let mut p = [0.0; 3];
        let mut s = 0.0;
        for i in 0..n {
            k.point(i, &mut p);
            s += p[0] * p[1] + p[2] * p[2];
        }
        let err = (s / n as f64 - (0.25 + 1.0 / 3.0)).abs();
        assert!(err < 1e-3, "{err}");
    }
}
