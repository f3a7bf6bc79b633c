//! Periodized compactly supported mollifier `phi(x) = alpha + psi_eps(x)`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::potential::wrap_unchecked;
use crate::quadrature::adaptive_simpson;

fn raw_bump(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (-1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

/// Normalization `c` making `c * exp(-1/(1-u^2))` a probability density on `[-1, 1]`.
pub fn bump_normalization() -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    *NORM.get_or_init(|| 1.0 / adaptive_simpson(&raw_bump, -1.0, 1.0, 1e-13))
}

/// Smooth unit-mass bump supported on `[-1, 1]`.
pub fn bump(u: f64) -> f64 {
    bump_normalization() * raw_bump(u)
}

/// Mollifier parameters `(alpha, epsilon)` on a torus of period `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    alpha: f64,
    epsilon: f64,
    period: f64,
    norm: f64,
    inv_eps: f64,
    peak_scale: f64,
}

impl KernelSpec {
    pub fn new(alpha: f64, epsilon: f64, period: f64) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::Config(format!("period must be positive, got {period}")));
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::Config(format!("kernel.alpha must be >= 0, got {alpha}")));
        }
        if !(epsilon > 0.0) || epsilon >= 0.5 * period {
            return Err(Error::Config(format!(
                "kernel.epsilon must lie in (0, L/2) = (0, {}), got {epsilon}",
                0.5 * period
            )));
        }
        Ok(Self {
            alpha,
            epsilon,
            period,
            norm: bump_normalization(),
            inv_eps: 1.0 / epsilon,
            peak_scale: bump_normalization() / epsilon,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// `psi_eps(x) = bump(wrap(x) / eps) / eps`.
    pub fn psi(&self, x: f64) -> f64 {
        self.psi_wrapped(wrap_unchecked(x, self.period))
    }

    /// `psi_eps` at an offset already reduced to `[-L/2, L/2)`.
    #[inline]
    pub fn psi_wrapped(&self, d: f64) -> f64 {
        let u = d * self.inv_eps;
        let q = 1.0 - u * u;
        if q > 0.0 {
            self.peak_scale * (-1.0 / q).exp()
        } else {
            0.0
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.alpha + self.psi(x)
    }

    /// Peak value `psi_eps(0) = c / (e * eps)`.
    pub fn psi_max(&self) -> f64 {
        self.norm * (-1.0f64).exp() / self.epsilon
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bump_examples() {
        assert_eq!(bump(1.5), 0.0);
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-1.0), 0.0);
        assert_abs_diff_eq!(bump(0.0), bump_normalization() * (-1.0f64).exp(), epsilon = 1e-15);
        for i in 0..100 {
            let u = i as f64 / 77.0;
            assert_eq!(bump(u), bump(-u));
        }
    }

    #[test]
    fn spec_validation() {
        assert!(KernelSpec::new(0.0, 2.0, 4.0).is_err());
        assert!(KernelSpec::new(0.0, 3.0, 4.0).is_err());
        assert!(KernelSpec::new(0.0, 0.0, 4.0).is_err());
        assert!(KernelSpec::new(-0.1, 0.1, 4.0).is_err());
        assert!(KernelSpec::new(0.0, 1.999, 4.0).is_ok());
    }

    #[test]
    fn support_is_exact() {
        let k = KernelSpec::new(0.0, 0.1, 4.0).unwrap();
        for i in 0..4000 {
            let x = -8.0 + i as f64 * 0.004;
            let w = wrap_unchecked(x, 4.0);
            if w.abs() >= 0.1 {
                assert_eq!(k.psi(x), 0.0, "x = {x}");
            }
            assert!(k.psi(x) >= 0.0);
        }
    }

    #[test]
    fn phi_adds_alpha() {
        let k = KernelSpec::new(0.1, 0.01, 4.0).unwrap();
        assert_eq!(k.phi(0.5), 0.1);
        assert_eq!(k.phi(-1.7), 0.1);
        let k0 = KernelSpec::new(0.0, 0.01, 4.0).unwrap();
        assert_eq!(k0.phi(0.0), k0.psi(0.0));
        let k5 = KernelSpec::new(0.05, 0.2, 4.0).unwrap();
        let min = (0..10_000)
            .map(|i| k5.phi(-2.0 + 4.0 * i as f64 / 10_000.0))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(min, 0.05);
    }

    #[test]
    fn periodic_in_x() {
        let k = KernelSpec::new(0.0, 0.3, 4.0).unwrap();
        for &x in &[0.0, 0.05, -0.2, 0.29] {
            assert_abs_diff_eq!(k.psi(x), k.psi(x + 4.0), epsilon = 1e-12);
            assert_abs_diff_eq!(k.psi(x), k.psi(x - 8.0), epsilon = 1e-12);
        }
    }
}
