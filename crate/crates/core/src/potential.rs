//! Configuration geometry and the catalog of potential-energy functions.
//!
//! The first coordinate lives on a torus of period `L`; the remaining
//! coordinates are unbounded. Every potential is evaluated on the canonical
//! representative of the first coordinate, which realizes the periodic
//! extension of a closed form defined on `[-L/2, L/2) x R^{d-1}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Canonical representative of `x1` modulo `period`, in `[-period/2, period/2)`.
pub fn wrap(x1: f64, period: f64) -> Result<f64> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::Config(format!("period must be positive, got {period}")));
    }
    Ok(wrap_unchecked(x1, period))
}

#[inline]
pub(crate) fn wrap_unchecked(x1: f64, period: f64) -> f64 {
    let half = 0.5 * period;
    let mut r = x1 - period * ((x1 + half) / period).floor();
    // floor rounding can land exactly on the excluded endpoint
    if r >= half {
        r -= period;
    } else if r < -half {
        r += period;
    }
    r
}

/// A point of `T_L x R^{d-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusConfiguration {
    x1: f64,
    rest: Vec<f64>,
    period: f64,
}

impl TorusConfiguration {
    pub fn new(x1: f64, rest: Vec<f64>, period: f64) -> Result<Self> {
        Ok(Self {
            x1: wrap(x1, period)?,
            rest,
            period,
        })
    }

    /// Builds a configuration from a full coordinate slice `[x1, x2, ...]`.
    pub fn from_coords(coords: &[f64], period: f64) -> Result<Self> {
        let (&x1, rest) = coords
            .split_first()
            .ok_or_else(|| Error::Config("configuration needs at least one coordinate".into()))?;
        Self::new(x1, rest.to_vec(), period)
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn rest(&self) -> &[f64] {
        &self.rest
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn dimension(&self) -> usize {
        1 + self.rest.len()
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dimension());
        v.push(self.x1);
        v.extend_from_slice(&self.rest);
        v
    }
}

/// `amplitude * exp(-|x - center|^2 / width^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTerm {
    pub amplitude: f64,
    pub center: Vec<f64>,
    pub width: f64,
}

/// `coefficient * (x[axis] - center)^power`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfinementTerm {
    pub axis: usize,
    pub center: f64,
    pub coefficient: f64,
    pub power: u32,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Mixture {
        gaussians: Vec<GaussianTerm>,
        confinement: Vec<ConfinementTerm>,
    },
    /// `0.5 * (y - sin(2 pi x / L))^2`
    SineQuadratic,
}

/// Potential energy `V` on `T_L x R^{d-1}` with its analytic gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    name: String,
    dimension: usize,
    period: f64,
    shape: Shape,
}

impl Potential {
    /// Three-well potential on period 4: a central bump between two wells at `(+-1, 0)`.
    pub fn v1() -> Self {
        let g = |amplitude: f64, cx: f64, cy: f64| GaussianTerm {
            amplitude,
            center: vec![cx, cy],
            width: 1.0,
        };
        Self {
            name: "v1".into(),
            dimension: 2,
            period: 4.0,
            shape: Shape::Mixture {
                gaussians: vec![g(5.0, 0.0, 0.0), g(-5.0, 1.0, 0.0), g(-5.0, -1.0, 0.0)],
                confinement: vec![quartic(0, 0.0), quartic(1, 0.0)],
            },
        }
    }

    /// Two-channel potential on period 4: wells at `(+-1, 0)` joined by a direct
    /// lower path and an upper path through a shallow minimum near `(0, 1.5)`.
    pub fn v2() -> Self {
        let g = |amplitude: f64, cx: f64, cy: f64| GaussianTerm {
            amplitude,
            center: vec![cx, cy],
            width: 1.0,
        };
        Self {
            name: "v2".into(),
            dimension: 2,
            period: 4.0,
            shape: Shape::Mixture {
                gaussians: vec![
                    g(3.0, 0.0, 1.0 / 3.0),
                    g(-3.0, 0.0, 5.0 / 3.0),
                    g(-5.0, 1.0, 0.0),
                    g(-5.0, -1.0, 0.0),
                ],
                confinement: vec![quartic(0, 0.0), quartic(1, 1.0 / 3.0)],
            },
        }
    }

    /// `0.5 * (y - sin(2 pi x / L))^2`; with `L = 1` the mean force vanishes
    /// identically.
    pub fn sine_quadratic(period: f64) -> Result<Self> {
        wrap(0.0, period)?;
        Ok(Self {
            name: "sine_quadratic".into(),
            dimension: 2,
            period,
            shape: Shape::SineQuadratic,
        })
    }

    /// Sum of Gaussians plus polynomial confinement.
    pub fn custom(
        name: impl Into<String>,
        dimension: usize,
        period: f64,
        gaussians: Vec<GaussianTerm>,
        confinement: Vec<ConfinementTerm>,
    ) -> Result<Self> {
        wrap(0.0, period)?;
        if dimension < 1 {
            return Err(Error::Config("potential dimension must be at least 1".into()));
        }
        for g in &gaussians {
            if g.center.len() != dimension {
                return Err(Error::Config(format!(
                    "gaussian center has {} coordinates, expected {dimension}",
                    g.center.len()
                )));
            }
            if !(g.width > 0.0) {
                return Err(Error::Config(format!(
                    "gaussian width must be positive, got {}",
                    g.width
                )));
            }
        }
        if let Some(c) = confinement.iter().find(|c| c.axis >= dimension) {
            return Err(Error::Config(format!(
                "confinement axis {} out of range for dimension {dimension}",
                c.axis
            )));
        }
        Ok(Self {
            name: name.into(),
            dimension,
            period,
            shape: Shape::Mixture { gaussians, confinement },
        })
    }

    /// Built-in potential by name: `v1`, `v2` or `sine_quadratic` (unit period).
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "v1" => Ok(Self::v1()),
            "v2" => Ok(Self::v2()),
            "sine_quadratic" => Self::sine_quadratic(1.0),
            other => Err(Error::Config(format!("unknown potential `{other}`"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    fn check(&self, x: &TorusConfiguration) -> Result<()> {
        if x.dimension() != self.dimension {
            return Err(Error::Config(format!(
                "configuration has dimension {}, potential `{}` expects {}",
                x.dimension(),
                self.name,
                self.dimension
            )));
        }
        Ok(())
    }

    pub fn energy(&self, x: &TorusConfiguration) -> Result<f64> {
        self.check(x)?;
        Ok(self.energy_at(&x.coords()))
    }

    pub fn gradient(&self, x: &TorusConfiguration) -> Result<Vec<f64>> {
        self.check(x)?;
        let mut g = vec![0.0; self.dimension];
        self.gradient_at(&x.coords(), &mut g);
        Ok(g)
    }

    /// `V` at raw coordinates (length must equal the dimension).
    pub fn energy_at(&self, coords: &[f64]) -> f64 {
        debug_assert_eq!(coords.len(), self.dimension);
        let x1 = wrap_unchecked(coords[0], self.period);
        let at = |i: usize| if i == 0 { x1 } else { coords[i] };
        match &self.shape {
            Shape::Mixture { gaussians, confinement } => {
                let mut v = 0.0;
                for g in gaussians {
                    let r2: f64 = (0..self.dimension).map(|i| (at(i) - g.center[i]).powi(2)).sum();
                    v += g.amplitude * (-r2 / (g.width * g.width)).exp();
                }
                for c in confinement {
                    v += c.coefficient * (at(c.axis) - c.center).powi(c.power as i32);
                }
                v
            }
            Shape::SineQuadratic => {
                let r = coords[1] - (2.0 * PI * x1 / self.period).sin();
                0.5 * r * r
            }
        }
    }

    /// Writes `grad V` at raw coordinates into `out`.
    pub fn gradient_at(&self, coords: &[f64], out: &mut [f64]) {
        debug_assert_eq!(coords.len(), self.dimension);
        debug_assert_eq!(out.len(), self.dimension);
        let x1 = wrap_unchecked(coords[0], self.period);
        let at = |i: usize| if i == 0 { x1 } else { coords[i] };
        out.fill(0.0);
        match &self.shape {
            Shape::Mixture { gaussians, confinement } => {
                for g in gaussians {
                    let inv_w2 = 1.0 / (g.width * g.width);
                    let r2: f64 = (0..self.dimension).map(|i| (at(i) - g.center[i]).powi(2)).sum();
                    let e = g.amplitude * (-r2 * inv_w2).exp();
                    for (i, o) in out.iter_mut().enumerate() {
                        *o -= 2.0 * e * inv_w2 * (at(i) - g.center[i]);
                    }
                }
                for c in confinement {
                    if c.power > 0 {
                        out[c.axis] +=
                            c.coefficient * c.power as f64 * (at(c.axis) - c.center).powi(c.power as i32 - 1);
                    }
                }
            }
            Shape::SineQuadratic => {
                let k = 2.0 * PI / self.period;
                let r = coords[1] - (k * x1).sin();
                out[0] = -r * k * (k * x1).cos();
                out[1] = r;
            }
        }
    }

    /// The local force along the reaction coordinate, `d V / d x1`.
    pub fn d1_at(&self, coords: &[f64]) -> f64 {
        match &self.shape {
            Shape::SineQuadratic => {
                let x1 = wrap_unchecked(coords[0], self.period);
                let k = 2.0 * PI / self.period;
                -(coords[1] - (k * x1).sin()) * k * (k * x1).cos()
            }
            Shape::Mixture { .. } => {
                let mut g = [0.0; 8];
                if self.dimension <= g.len() {
                    self.gradient_at(coords, &mut g[..self.dimension]);
                    g[0]
                } else {
                    let mut g = vec![0.0; self.dimension];
                    self.gradient_at(coords, &mut g);
                    g[0]
                }
            }
        }
    }
}

fn quartic(axis: usize, center: f64) -> ConfinementTerm {
    ConfinementTerm {
        axis,
        center,
        coefficient: 0.2,
        power: 4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(x: f64, y: f64, l: f64) -> TorusConfiguration {
        TorusConfiguration::new(x, vec![y], l).unwrap()
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap(0.0, 4.0).unwrap(), 0.0);
        assert_eq!(wrap(2.5, 4.0).unwrap(), -1.5);
        // -6 = 2 (mod 4), and the half-open range maps +2 onto -2
        assert_eq!(wrap(-6.0, 4.0).unwrap(), -2.0);
        assert!(wrap(1.0, 0.0).is_err());
        assert!(wrap(1.0, -1.0).is_err());
    }

    #[test]
    fn wrap_is_in_range_and_period_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let l: f64 = rng.random_range(0.1..10.0);
            let x: f64 = rng.random_range(-100.0..100.0);
            let k: i32 = rng.random_range(-5..5);
            let w = wrap(x, l).unwrap();
            assert!(w >= -l / 2.0 && w < l / 2.0, "{x} {l} -> {w}");
            assert_abs_diff_eq!(wrap(x + k as f64 * l, l).unwrap(), w, epsilon = 1e-9);
        }
        // endpoint: exactly +L/2 must map to -L/2
        assert_eq!(wrap(2.0, 4.0).unwrap(), -2.0);
    }

    #[test]
    fn v1_closed_form_at_origin() {
        // 5 - 10/e
        let v = Potential::v1().energy(&cfg(0.0, 0.0, 4.0)).unwrap();
        assert_abs_diff_eq!(v, 5.0 - 10.0 / std::f64::consts::E, epsilon = 1e-14);
        assert_abs_diff_eq!(v, 1.321206, epsilon = 1e-6);
    }

    #[test]
    fn v1_is_even_in_both_coordinates() {
        let p = Potential::v1();
        for &(x, y) in &[(0.3, -0.2), (1.2, 0.7), (1.9, -1.1)] {
            let a = p.energy(&cfg(x, y, 4.0)).unwrap();
            assert_abs_diff_eq!(a, p.energy(&cfg(-x, y, 4.0)).unwrap(), epsilon = 1e-14);
            assert_abs_diff_eq!(a, p.energy(&cfg(x, -y, 4.0)).unwrap(), epsilon = 1e-14);
        }
        let g = p.gradient(&cfg(0.0, 0.0, 4.0)).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn sine_quadratic_vanishes_on_curve() {
        let p = Potential::sine_quadratic(1.0).unwrap();
        for i in 0..50 {
            let x = -0.5 + i as f64 / 50.0;
            let y = (2.0 * PI * x).sin();
            assert_abs_diff_eq!(p.energy(&cfg(x, y, 1.0)).unwrap(), 0.0, epsilon = 1e-30);
        }
    }

    #[test]
    fn v1_gradient_matches_finite_difference_at_sample_point() {
        let p = Potential::v1();
        let h = 1e-5;
        let g = p.gradient(&cfg(0.3, -0.2, 4.0)).unwrap();
        let fd_x =
            (p.energy(&cfg(0.3 + h, -0.2, 4.0)).unwrap() - p.energy(&cfg(0.3 - h, -0.2, 4.0)).unwrap()) / (2.0 * h);
        let fd_y =
            (p.energy(&cfg(0.3, -0.2 + h, 4.0)).unwrap() - p.energy(&cfg(0.3, -0.2 - h, 4.0)).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(g[0], fd_x, epsilon = 1e-6);
        assert_abs_diff_eq!(g[1], fd_y, epsilon = 1e-6);
        assert_eq!(p.d1_at(&[0.3, -0.2]), g[0]);
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let p = Potential::v1();
        let x = TorusConfiguration::new(0.0, vec![0.0, 1.0], 4.0).unwrap();
        assert!(matches!(p.energy(&x), Err(Error::Config(_))));
        assert!(matches!(p.gradient(&x), Err(Error::Config(_))));
    }

    #[test]
    fn custom_rejects_bad_terms() {
        let bad = GaussianTerm {
            amplitude: 1.0,
            center: vec![0.0],
            width: 1.0,
        };
        assert!(Potential::custom("c", 2, 4.0, vec![bad], vec![]).is_err());
        let axis = ConfinementTerm {
            axis: 2,
            center: 0.0,
            coefficient: 1.0,
            power: 2,
        };
        assert!(Potential::custom("c", 2, 4.0, vec![], vec![axis]).is_err());
        assert!(Potential::by_name("v3").is_err());
    }
}
