//! End-to-end problems built on the multilevel engine.

mod communicability;
mod fem;
mod heat;

pub use communicability::{node_communicability, total_communicability};
pub use fem::{load_fem_system, solve_convdiff_point, ConvDiffResult, FemSystem};
pub use heat::{build_heat3d, solve_heat_point, Grid3D, HeatProblem, HeatSolution};

use crate::error::{Error, Result};

/// Composite Simpson weights `(1, 4, 2, 4, ..., 2, 4, 1) / 3` for `n`
/// intervals; multiply by the interval length.
pub fn simpson_weights(n: usize) -> Result<Vec<f64>> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::Config(format!(
            "Simpson's rule needs an even interval count >= 2, got {n}"
        )));
    }
    Ok((0..=n)
        .map(|k| {
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w / 3.0
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        simpson_weights(n)
            .unwrap()
            .iter()
            .enumerate()
            .map(|(k, w)| w * h * f(a + k as f64 * h))
            .sum()
    }

    #[test]
    fn two_interval_weights() {
        assert_eq!(simpson_weights(2).unwrap(), vec![1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(
            simpson_weights(6).unwrap(),
            [1.0, 4.0, 2.0, 4.0, 2.0, 4.0, 1.0].map(|w| w / 3.0).to_vec()
        );
    }

    #[test]
    fn odd_or_tiny_counts_fail() {
        assert!(simpson_weights(0).is_err());
        assert!(simpson_weights(3).is_err());
    }

    #[test]
    fn exact_for_cubics() {
        assert!((integrate(|x| x * x * x, 0.0, 1.0, 4) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn exponential_within_error_bound() {
        let n = 8;
        let h = 1.0 / n as f64;
        let err = (integrate(f64::exp, 0.0, 1.0, n) - (1f64.exp() - 1.0)).abs();
        // (b - a) / 180 * h^4 * max |f''''|
        let bound = 1.0 / 180.0 * h.powi(4) * 1f64.exp();
        assert!(err <= bound, "{err} > {bound}");
        assert!(err > 0.0);
    }
}
