//! Deterministic oracles: the heat equation on the torus and a finite-volume
//! solver for the regularized nonlinear Fokker-Planck equation
//!
//! ```text
//!   dp/dt = div(p grad V + beta^-1 grad p) - d/dx1 (p * F_eta[p])
//!   F_eta[p] = (phi * p^F) / (phi * p^1)
//! ```
//!
//! on `T_L x [-y_max, y_max]` (two dimensions only), with `p^1` the
//! `x1`-marginal and `p^F` the marginal weighted by `dV/dx1`. Diffusion is
//! centered. Drift fluxes are centered on faces whose cell Peclet number
//! `|v| h / D` is at most 2 (where centering is still monotone) and upwinded
//! elsewhere. The biasing force is evaluated on the `x1`-faces from the
//! face-averaged marginals, so that on centered faces the `x1`-drift summed
//! over a column is exactly the kernel-smoothing residual and the
//! `x1`-marginal follows the discrete heat equation. The walls at `+-y_max`
//! carry no flux.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::potential::Potential;
use crate::profile::{Grid, MeanForceProfile, ProfileKind};

/// Evolves a periodic density on `M` cells under `dp/dt = beta^-1 p''`
/// spectrally: mode `k` is damped by `exp(-(2 pi k / L)^2 t / beta)`.
pub fn heat_solve(p0: &[f64], t: f64, beta: f64, period: f64) -> Vec<f64> {
    let m = p0.len();
    if m == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut buf: Vec<Complex<f64>> = p0.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        // signed frequency
        let kk = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
        let wave = 2.0 * PI * kk / period;
        *c *= (-wave * wave * t / beta).exp();
    }
    inv.process(&mut buf);
    buf.iter().map(|c| c.re / m as f64).collect()
}

/// Density on an `m1 x m2` cell grid over `T_L x [-y_max, y_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    m1: usize,
    m2: usize,
    period: f64,
    y_max: f64,
    /// Row-major: `values[i * m2 + j]` is the cell at `(x1_i, x2_j)`.
    values: Vec<f64>,
    time: f64,
}

impl GridDensity {
    /// Samples `f` at cell centers and normalizes to unit mass.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(m1: usize, m2: usize, period: f64, y_max: f64, f: F) -> Result<Self> {
        if m1 < 3 || m2 < 2 {
            return Err(Error::Config(format!("density grid too small: {m1} x {m2}")));
        }
        if !(period > 0.0) || !(y_max > 0.0) {
            return Err(Error::Config("period and y_max must be positive".into()));
        }
        let mut rho = Self {
            m1,
            m2,
            period,
            y_max,
            values: vec![0.0; m1 * m2],
            time: 0.0,
        };
        for i in 0..m1 {
            for j in 0..m2 {
                let v = f(rho.x1(i), rho.x2(j));
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::Config(format!("density must be finite and >= 0, got {v}")));
                }
                rho.values[i * m2 + j] = v;
            }
        }
        let mass = rho.mass();
        if !(mass > 0.0) {
            return Err(Error::Config("density has zero mass".into()));
        }
        rho.values.iter_mut().for_each(|v| *v /= mass);
        Ok(rho)
    }

    /// `exp(-beta (V - A(x1)))` normalized, with `A` given at the `m1` column centers.
    pub fn biased_stationary(pot: &Potential, beta: f64, m2: usize, y_max: f64, free_energy: &[f64]) -> Result<Self> {
        let m1 = free_energy.len();
        let period = pot.period();
        let h1 = period / m1 as f64;
        let col = |x: f64| (((x + 0.5 * period) / h1) as usize).min(m1 - 1);
        Self::from_fn(m1, m2, period, y_max, |x, y| {
            (-beta * (pot.energy_at(&[x, y]) - free_energy[col(x)])).exp()
        })
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn m2(&self) -> usize {
        self.m2
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn h1(&self) -> f64 {
        self.period / self.m1 as f64
    }

    pub fn h2(&self) -> f64 {
        2.0 * self.y_max / self.m2 as f64
    }

    pub fn x1(&self, i: usize) -> f64 {
        -0.5 * self.period + (i as f64 + 0.5) * self.h1()
    }

    pub fn x2(&self, j: usize) -> f64 {
        -self.y_max + (j as f64 + 0.5) * self.h2()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m2 + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_area(&self) -> f64 {
        self.h1() * self.h2()
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    /// `x1`-marginal density on the `m1` columns.
    pub fn marginal(&self) -> Vec<f64> {
        self.values
            .chunks(self.m2)
            .map(|c| c.iter().sum::<f64>() * self.h2())
            .collect()
    }

    /// `int dV/dx1 p dy` per column.
    fn weighted_marginal(&self, d1_centers: &[f64]) -> Vec<f64> {
        self.values
            .chunks(self.m2)
            .zip(d1_centers.chunks(self.m2))
            .map(|(p, f)| p.iter().zip(f).map(|(p, f)| p * f).sum::<f64>() * self.h2())
            .collect()
    }
}

/// Discrete kernel `phi` on the column grid, with `psi` renormalized so its
/// Riemann sum is exactly one.
#[derive(Debug, Clone)]
struct ColumnKernel {
    alpha: f64,
    /// `(offset, weight)` pairs; weights sum to 1.
    taps: Vec<(isize, f64)>,
}

impl ColumnKernel {
    fn new(spec: &KernelSpec, m1: usize, h1: f64) -> Self {
        let reach = ((spec.epsilon() / h1).ceil() as isize).min(m1 as isize / 2);
        let mut taps: Vec<(isize, f64)> = (-reach..=reach)
            .map(|k| (k, spec.psi(k as f64 * h1)))
            .filter(|&(_, w)| w > 0.0)
            .collect();
        let total: f64 = taps.iter().map(|t| t.1).sum();
        taps.iter_mut().for_each(|t| t.1 /= total);
        Self {
            alpha: spec.alpha(),
            taps,
        }
    }

    /// `(phi * g)_i` for a column density `g` with mass `sum g h1`.
    fn convolve(&self, g: &[f64], h1: f64) -> Vec<f64> {
        let m = g.len() as isize;
        let base = self.alpha * g.iter().sum::<f64>() * h1;
        (0..m)
            .map(|i| {
                base + self
                    .taps
                    .iter()
                    .map(|&(k, w)| w * g[(i - k).rem_euclid(m) as usize])
                    .sum::<f64>()
            })
            .collect()
    }
}

fn force_from_marginals(kernel: &ColumnKernel, p1: &[f64], pf: &[f64], h1: f64) -> Result<Vec<f64>> {
    let den = kernel.convolve(p1, h1);
    let num = kernel.convolve(pf, h1);
    num.iter()
        .zip(&den)
        .enumerate()
        .map(|(i, (n, d))| {
            if *d > 0.0 {
                Ok(n / d)
            } else {
                Err(Error::SingularDensity { column: i })
            }
        })
        .collect()
}

/// Regularized biasing force `(phi * p^F) / (phi * p^1)` at the column centers.
pub fn regularized_force(rho: &GridDensity, pot: &Potential, spec: &KernelSpec) -> Result<MeanForceProfile> {
    check_geometry(rho, pot, spec)?;
    let d1: Vec<f64> = (0..rho.m1)
        .flat_map(|i| (0..rho.m2).map(move |j| (i, j)))
        .map(|(i, j)| pot.d1_at(&[rho.x1(i), rho.x2(j)]))
        .collect();
    let kernel = ColumnKernel::new(spec, rho.m1, rho.h1());
    let values = force_from_marginals(&kernel, &rho.marginal(), &rho.weighted_marginal(&d1), rho.h1())?;
    let grid = Grid::new(rho.period, rho.m1)?;
    MeanForceProfile::new(grid, values, ProfileKind::PdeEstimate)
}

fn check_geometry(rho: &GridDensity, pot: &Potential, spec: &KernelSpec) -> Result<()> {
    if pot.dimension() != 2 {
        return Err(Error::Config("the grid solver is two-dimensional only".into()));
    }
    if (pot.period() - rho.period).abs() > 1e-12 * rho.period || (spec.period() - rho.period).abs() > 1e-12 * rho.period
    {
        return Err(Error::Config("density, potential and kernel periods differ".into()));
    }
    Ok(())
}

/// Finite-volume stepper with the static fields precomputed.
#[derive(Debug, Clone)]
pub struct FokkerPlanck {
    m1: usize,
    m2: usize,
    h1: f64,
    h2: f64,
    diffusivity: f64,
    kernel: ColumnKernel,
    /// `-dV/dx1` on x-faces `(i + 1/2, j)`, face `i` between columns `i` and `i + 1`.
    drift_x: Vec<f64>,
    /// `-dV/dx2` on interior y-faces `(i, j + 1/2)`, `j < m2 - 1`.
    drift_y: Vec<f64>,
}

impl FokkerPlanck {
    pub fn new(rho: &GridDensity, pot: &Potential, spec: &KernelSpec, beta: f64) -> Result<Self> {
        check_geometry(rho, pot, spec)?;
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Config(format!("beta must be finite and positive, got {beta}")));
        }
        let (m1, m2) = (rho.m1, rho.m2);
        let (h1, h2) = (rho.h1(), rho.h2());
        let mut drift_x = Vec::with_capacity(m1 * m2);
        let mut drift_y = Vec::with_capacity(m1 * (m2 - 1));
        let mut g = [0.0; 2];
        for i in 0..m1 {
            let x = rho.x1(i);
            for j in 0..m2 {
                let y = rho.x2(j);
                pot.gradient_at(&[x + 0.5 * h1, y], &mut g);
                drift_x.push(-g[0]);
                if j + 1 < m2 {
                    pot.gradient_at(&[x, y + 0.5 * h2], &mut g);
                    drift_y.push(-g[1]);
                }
            }
        }
        Ok(Self {
            m1,
            m2,
            h1,
            h2,
            diffusivity: 1.0 / beta,
            kernel: ColumnKernel::new(spec, m1, h1),
            drift_x,
            drift_y,
        })
    }

    /// Biasing force on the `x1`-faces, face `i` between columns `i` and `i + 1`.
    fn bias(&self, rho: &GridDensity) -> Result<Vec<f64>> {
        let (m1, m2) = (self.m1, self.m2);
        let p = &rho.values;
        let mut p1 = vec![0.0; m1];
        let mut pf = vec![0.0; m1];
        for i in 0..m1 {
            let ip = (i + 1) % m1;
            for j in 0..m2 {
                let mean = 0.5 * (p[i * m2 + j] + p[ip * m2 + j]);
                p1[i] += mean * self.h2;
                pf[i] -= self.drift_x[i * m2 + j] * mean * self.h2;
            }
        }
        force_from_marginals(&self.kernel, &p1, &pf, self.h1)
    }

    /// Largest stable time step for the current density: the smaller of
    /// `h^2 beta / 4` and `h / (2 max|drift|)` per direction.
    pub fn max_stable_dt(&self, rho: &GridDensity) -> Result<f64> {
        Ok(self.stable_dt_for(&self.bias(rho)?))
    }

    fn stable_dt_for(&self, bias: &[f64]) -> f64 {
        let mut bx = 0.0f64;
        for (i, b) in bias.iter().enumerate() {
            for j in 0..self.m2 {
                bx = bx.max((self.drift_x[i * self.m2 + j] + b).abs());
            }
        }
        let by = self.drift_y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let h = self.h1.min(self.h2);
        let mut dt = h * h / (4.0 * self.diffusivity);
        if bx > 0.0 {
            dt = dt.min(self.h1 / (2.0 * bx));
        }
        if by > 0.0 {
            dt = dt.min(self.h2 / (2.0 * by));
        }
        dt
    }

    /// One explicit conservative step; fails if `dt` exceeds [`Self::max_stable_dt`].
    pub fn step(&self, rho: &mut GridDensity, dt: f64) -> Result<()> {
        let bias = self.bias(rho)?;
        let limit = self.stable_dt_for(&bias);
        if dt > limit {
            return Err(Error::Unstable {
                dt,
                suggested: 0.5 * limit,
            });
        }
        self.advance(rho, &bias, dt);
        Ok(())
    }

    fn advance(&self, rho: &mut GridDensity, bias: &[f64], dt: f64) {
        let (m1, m2) = (self.m1, self.m2);
        let p = &rho.values;
        let d = self.diffusivity;
        let mut div = vec![0.0; m1 * m2];

        for i in 0..m1 {
            let ip = (i + 1) % m1;
            for j in 0..m2 {
                let v = self.drift_x[i * m2 + j] + bias[i];
                let flux = face_flux(v, d, self.h1, p[i * m2 + j], p[ip * m2 + j]) / self.h1;
                div[i * m2 + j] += flux;
                div[ip * m2 + j] -= flux;
            }
        }
        for i in 0..m1 {
            for j in 0..m2 - 1 {
                let v = self.drift_y[i * (m2 - 1) + j];
                let flux = face_flux(v, d, self.h2, p[i * m2 + j], p[i * m2 + j + 1]) / self.h2;
                div[i * m2 + j] += flux;
                div[i * m2 + j + 1] -= flux;
            }
        }
        for (v, dv) in rho.values.iter_mut().zip(&div) {
            *v -= dt * dv;
        }
        rho.time += dt;
    }

    /// Advances to time `rho.time() + t` with steps of half the stable bound
    /// (recomputed every step), landing exactly on the final time.
    pub fn solve(&self, rho: &mut GridDensity, t: f64) -> Result<usize> {
        let end = rho.time + t;
        let mut steps = 0;
        while rho.time < end {
            let bias = self.bias(rho)?;
            let dt = (0.5 * self.stable_dt_for(&bias)).min(end - rho.time);
            self.advance(rho, &bias, dt);
            steps += 1;
        }
        rho.time = end;
        Ok(steps)
    }
}

/// Drift plus diffusion flux from the lower cell to the upper one across a
/// face with velocity `v`, diffusivity `d` and spacing `h`.
fn face_flux(v: f64, d: f64, h: f64, lower: f64, upper: f64) -> f64 {
    let drift = if v.abs() * h <= 2.0 * d {
        0.5 * v * (lower + upper)
    } else if v > 0.0 {
        v * lower
    } else {
        v * upper
    };
    drift - d * (upper - lower) / h
}

/// One finite-volume step (builds the static fields on every call; use
/// [`FokkerPlanck`] directly when stepping repeatedly).
pub fn fp_step(rho: &GridDensity, pot: &Potential, spec: &KernelSpec, dt: f64, beta: f64) -> Result<GridDensity> {
    let fp = FokkerPlanck::new(rho, pot, spec, beta)?;
    let mut next = rho.clone();
    fp.step(&mut next, dt)?;
    Ok(next)
}

/// `sum |a - b| h` for two column densities.
pub fn marginal_l1(a: &[f64], b: &[f64], h: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * h
}
