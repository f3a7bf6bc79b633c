//! Exact mean force and free energy by slice quadrature.
//!
//! For each `z` the canonical measure restricted to the slice `{x1 = z}` is
//! integrated over the box `[-y_max, y_max]^{d-1}` with a tensor Gauss-Legendre
//! rule:
//!
//! ```text
//!   num(z) = int dV/dx1(z, y) exp(-beta V(z, y)) dy
//!   den(z) = int exp(-beta V(z, y)) dy
//!   A'(z)  = num / den,      A(z) = -log(den) / beta  (shifted to min 0)
//! ```

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::profile::{Grid, MeanForceProfile, ProfileKind};
use crate::quadrature::GaussLegendre;

/// Boundary integrand over slice peak must stay below this.
pub const TAIL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub y_max: f64,
    pub n_quad: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            y_max: 6.0,
            n_quad: 200,
        }
    }
}

/// Numerator and denominator of the slice average at one `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceWeights {
    pub numerator: f64,
    pub denominator: f64,
    /// Largest boundary integrand relative to the slice peak.
    pub tail_ratio: f64,
}

impl SliceWeights {
    pub fn mean_force(&self) -> f64 {
        self.numerator / self.denominator
    }
}

/// Quadrature over the slice `{x1 = z}` of the canonical weight.
pub fn slice_weights(z: f64, pot: &Potential, beta: f64, settings: QuadratureSettings) -> Result<SliceWeights> {
    let gl = GaussLegendre::new(settings.n_quad);
    slice_with_rule(z, pot, beta, settings.y_max, &gl)
}

fn slice_with_rule(z: f64, pot: &Potential, beta: f64, y_max: f64, gl: &GaussLegendre) -> Result<SliceWeights> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Config(format!("beta must be finite and positive, got {beta}")));
    }
    if !(y_max > 0.0) {
        return Err(Error::Config(format!("y_max must be positive, got {y_max}")));
    }
    let d = pot.dimension();
    let k = d - 1;
    let rule: Vec<(f64, f64)> = gl.mapped(-y_max, y_max).collect();
    let n = rule.len();

    // shift by the slice minimum so exp never overflows
    let mut idx = vec![0usize; k];
    let mut coords = vec![0.0; d];
    coords[0] = z;
    let total = n.pow(k as u32);
    let mut energies = Vec::with_capacity(total);
    for _ in 0..total {
        for (c, &i) in coords[1..].iter_mut().zip(&idx) {
            *c = rule[i].0;
        }
        energies.push(pot.energy_at(&coords));
        increment(&mut idx, n);
    }
    let v_min = energies.iter().copied().fold(f64::INFINITY, f64::min);

    let mut num = 0.0;
    let mut den = 0.0;
    let mut peak = 0.0f64;
    idx.fill(0);
    for &e in &energies {
        let mut w = 1.0;
        for (c, &i) in coords[1..].iter_mut().zip(&idx) {
            *c = rule[i].0;
            w *= rule[i].1;
        }
        let b = (-beta * (e - v_min)).exp();
        peak = peak.max(b);
        num += w * b * pot.d1_at(&coords);
        den += w * b;
        increment(&mut idx, n);
    }

    // boundary of the box, on each face through the slice peak region
    let mut tail = 0.0f64;
    for axis in 1..d {
        for &edge in &[-y_max, y_max] {
            let mut c = coords.clone();
            c[0] = z;
            for (j, cj) in c.iter_mut().enumerate().skip(1) {
                *cj = if j == axis { edge } else { 0.0 };
            }
            tail = tail.max((-beta * (pot.energy_at(&c) - v_min)).exp());
        }
    }
    let tail_ratio = tail / peak;
    if !(tail_ratio < TAIL_TOLERANCE) {
        return Err(Error::Quadrature {
            z,
            ratio: tail_ratio,
            y_max,
        });
    }
    let scale = (-beta * v_min).exp();
    Ok(SliceWeights {
        numerator: num * scale,
        denominator: den * scale,
        tail_ratio,
    })
}

fn increment(idx: &mut [usize], n: usize) {
    for i in idx.iter_mut().rev() {
        *i += 1;
        if *i < n {
            return;
        }
        *i = 0;
    }
}

/// Per-node `(A'(z), -log den(z) / beta)`.
fn slices(grid: &Grid, pot: &Potential, beta: f64, settings: QuadratureSettings) -> Result<Vec<(f64, f64)>> {
    let gl = GaussLegendre::new(settings.n_quad);
    let nodes: Vec<f64> = grid.nodes().collect();
    nodes
        .par_iter()
        .map(|&z| {
            let s = slice_with_rule(z, pot, beta, settings.y_max, &gl)?;
            Ok((s.mean_force(), -s.denominator.ln() / beta))
        })
        .collect()
}

/// Exact mean force `A'` on `grid`.
pub fn mean_force(grid: &Grid, pot: &Potential, beta: f64, settings: QuadratureSettings) -> Result<MeanForceProfile> {
    let values = slices(grid, pot, beta, settings)?.into_iter().map(|(f, _)| f).collect();
    MeanForceProfile::new(*grid, values, ProfileKind::Exact)
}

/// Free energy `A` on `grid`, shifted so that its minimum is zero.
pub fn free_energy(grid: &Grid, pot: &Potential, beta: f64, settings: QuadratureSettings) -> Result<Vec<f64>> {
    let a: Vec<f64> = slices(grid, pot, beta, settings)?.into_iter().map(|(_, a)| a).collect();
    Ok(shift_min_zero(a))
}

/// `(A, A')` on `grid` from one quadrature pass.
pub fn free_energy_and_mean_force(
    grid: &Grid,
    pot: &Potential,
    beta: f64,
    settings: QuadratureSettings,
) -> Result<(Vec<f64>, MeanForceProfile)> {
    let (force, a): (Vec<f64>, Vec<f64>) = slices(grid, pot, beta, settings)?.into_iter().unzip();
    Ok((
        shift_min_zero(a),
        MeanForceProfile::new(*grid, force, ProfileKind::Exact)?,
    ))
}

fn shift_min_zero(mut a: Vec<f64>) -> Vec<f64> {
    let min = a.iter().copied().fold(f64::INFINITY, f64::min);
    a.iter_mut().for_each(|v| *v -= min);
    a
}
