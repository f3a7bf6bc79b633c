//! Euler-Maruyama integration of the interacting particle system and of the
//! two comparison dynamics (plain overdamped Langevin and the zero-bandwidth
//! limit in which each particle only sees itself).
//!
//! All three share the update
//!
//! ```text
//!   X_n <- X_n + (-grad V(X_n) + e1 * B_n) dt + sqrt(2 dt / beta) G_n
//! ```
//!
//! with `B_n` the biasing force: the Nadaraya-Watson estimate at `X_n^1` for
//! ABF (computed from start-of-step positions), zero for Langevin and
//! `dV/dx1(X_n)` for the zero-bandwidth dynamics. `G_n` is drawn from the
//! particle's own stream, so a step is independent of the worker count.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::BinnedEstimator;
use crate::kernel::KernelSpec;
use crate::potential::{wrap_unchecked, Potential, TorusConfiguration};
use crate::profile::{Grid, MeanForceProfile};
use crate::rng::{self, Stream};

/// Which biasing force the integrator applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Abf,
    Langevin,
    ZeroBandwidth,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Abf => "abf",
            Mode::Langevin => "langevin",
            Mode::ZeroBandwidth => "zero_bandwidth",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abf" => Ok(Mode::Abf),
            "langevin" => Ok(Mode::Langevin),
            "zero_bandwidth" => Ok(Mode::ZeroBandwidth),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

/// Law of the i.i.d. initial particles.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// Isotropic Gaussian of width `sigma` around `center`.
    Gaussian { center: Vec<f64>, sigma: f64 },
    /// `x1` uniform on the torus; other coordinates Gaussian around `center_rest`.
    Uniform { center_rest: Vec<f64>, sigma: f64 },
    /// `x1` with density `(1 + cos(2 pi x1 / L)) / L`; other coordinates Gaussian.
    Cosine { center_rest: Vec<f64>, sigma: f64 },
}

impl InitialCondition {
    pub fn kind(&self) -> &'static str {
        match self {
            InitialCondition::Gaussian { .. } => "gaussian",
            InitialCondition::Uniform { .. } => "uniform",
            InitialCondition::Cosine { .. } => "cosine",
        }
    }

    /// Builds a condition from its config name; `center` holds all `d`
    /// coordinates (its first entry is ignored by the non-Gaussian kinds).
    pub fn from_parts(kind: &str, center: Vec<f64>, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) {
            return Err(Error::Config(format!("init.sigma must be >= 0, got {sigma}")));
        }
        let rest = center.iter().skip(1).copied().collect();
        match kind {
            "gaussian" => Ok(Self::Gaussian { center, sigma }),
            "uniform" => Ok(Self::Uniform {
                center_rest: rest,
                sigma,
            }),
            "cosine" => Ok(Self::Cosine {
                center_rest: rest,
                sigma,
            }),
            other => Err(Error::Config(format!("unknown initial condition `{other}`"))),
        }
    }
}

/// Integration parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Inverse temperature; `f64::INFINITY` switches the noise off.
    pub beta: f64,
    pub dt: f64,
    pub n_steps: u64,
    pub n_particles: usize,
    pub seed: u64,
    pub mode: Mode,
    pub init: InitialCondition,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) {
            return Err(Error::Config(format!("sim.beta must be > 0, got {}", self.beta)));
        }
        if !(self.dt >= 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("sim.dt must be >= 0, got {}", self.dt)));
        }
        if self.n_particles == 0 {
            return Err(Error::Config("sim.n_particles must be positive".into()));
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    fn noise_scale(&self) -> f64 {
        (2.0 * self.dt / self.beta).sqrt()
    }
}

/// `N` particles in `T_L x R^{d-1}` and their noise streams.
#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    dimension: usize,
    period: f64,
    /// Row-major `N x d`; the first column is kept wrapped.
    coords: Vec<f64>,
    streams: Vec<Stream>,
    time: f64,
    steps: u64,
}

impl PartialEq for ParticleEnsemble {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension
            && self.period == other.period
            && self.coords == other.coords
            && self.time == other.time
            && self.steps == other.steps
    }
}

impl ParticleEnsemble {
    /// Ensemble at explicit positions, with streams `0..N` of `seed`.
    pub fn from_positions(positions: &[TorusConfiguration], seed: u64) -> Result<Self> {
        let first = positions
            .first()
            .ok_or_else(|| Error::Usage("ensemble needs at least one particle".into()))?;
        let streams = rng::particle_streams(seed, positions.len());
        Self::with_streams(positions, streams, first.period())
    }

    /// Ensemble at explicit positions with caller-supplied streams.
    pub fn with_streams(positions: &[TorusConfiguration], streams: Vec<Stream>, period: f64) -> Result<Self> {
        let first = positions
            .first()
            .ok_or_else(|| Error::Usage("ensemble needs at least one particle".into()))?;
        if streams.len() != positions.len() {
            return Err(Error::Usage(format!(
                "{} streams for {} particles",
                streams.len(),
                positions.len()
            )));
        }
        let dimension = first.dimension();
        let mut coords = Vec::with_capacity(positions.len() * dimension);
        for p in positions {
            if p.dimension() != dimension || p.period() != period {
                return Err(Error::Config("all particles must share dimension and period".into()));
            }
            coords.extend(p.coords());
        }
        Ok(Self {
            dimension,
            period,
            coords,
            streams,
            time: 0.0,
            steps: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.streams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.streams.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Coordinates of particle `n`.
    pub fn particle(&self, n: usize) -> &[f64] {
        &self.coords[n * self.dimension..(n + 1) * self.dimension]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn positions(&self) -> Vec<TorusConfiguration> {
        (0..self.len())
            .map(|n| {
                let c = self.particle(n);
                TorusConfiguration::new(c[0], c[1..].to_vec(), self.period).expect("valid period")
            })
            .collect()
    }

    pub fn x1(&self) -> Vec<f64> {
        self.coords.iter().step_by(self.dimension).copied().collect()
    }

    /// `dV/dx1` at every particle.
    pub fn d1_values(&self, pot: &Potential) -> Vec<f64> {
        self.coords.chunks(self.dimension).map(|c| pot.d1_at(c)).collect()
    }

    /// Nadaraya-Watson profile of the current ensemble on `grid`.
    pub fn force_profile(&self, pot: &Potential, spec: &KernelSpec, grid: &Grid) -> Result<MeanForceProfile> {
        crate::estimator::nw_profile(&self.x1(), &self.d1_values(pot), spec, grid)
    }

    /// As [`Self::force_profile`], with empty nodes filled by periodic linear
    /// interpolation of their non-empty neighbours.
    pub fn filled_force_profile(&self, pot: &Potential, spec: &KernelSpec, grid: &Grid) -> Result<MeanForceProfile> {
        self.check(pot)?;
        Ok(BinnedEstimator::new(&self.x1(), &self.d1_values(pot), spec)?.filled_profile(grid))
    }

    fn check(&self, pot: &Potential) -> Result<()> {
        if pot.dimension() != self.dimension {
            return Err(Error::Config(format!(
                "ensemble has dimension {}, potential `{}` expects {}",
                self.dimension,
                pot.name(),
                pot.dimension()
            )));
        }
        if (pot.period() - self.period).abs() > 1e-12 * self.period {
            return Err(Error::Config(format!(
                "ensemble period {} differs from potential period {}",
                self.period,
                pot.period()
            )));
        }
        Ok(())
    }
}

/// Draws `N` i.i.d. initial particles from stream [`rng::INITIAL_STREAM`].
pub fn sample_initial(config: &SimulationConfig, pot: &Potential) -> Result<ParticleEnsemble> {
    config.validate()?;
    let d = pot.dimension();
    let period = pot.period();
    let n = config.n_particles;
    let mut init_rng = rng::stream(config.seed, rng::INITIAL_STREAM);
    let mut coords = Vec::with_capacity(n * d);

    let rest_len_ok = |rest: &Vec<f64>| {
        if rest.len() == d - 1 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "init.center has {} coordinates, potential needs {d}",
                rest.len() + 1
            )))
        }
    };

    match &config.init {
        InitialCondition::Gaussian { center, sigma } => {
            if center.len() != d {
                return Err(Error::Config(format!(
                    "init.center has {} coordinates, potential needs {d}",
                    center.len()
                )));
            }
            for _ in 0..n {
                for &c in center {
                    let g: f64 = init_rng.sample(StandardNormal);
                    coords.push(c + sigma * g);
                }
            }
        }
        InitialCondition::Uniform { center_rest, sigma } => {
            rest_len_ok(center_rest)?;
            for _ in 0..n {
                coords.push(init_rng.random_range(-0.5 * period..0.5 * period));
                for &c in center_rest {
                    let g: f64 = init_rng.sample(StandardNormal);
                    coords.push(c + sigma * g);
                }
            }
        }
        InitialCondition::Cosine { center_rest, sigma } => {
            rest_len_ok(center_rest)?;
            for _ in 0..n {
                // rejection from the uniform envelope of height 2/L
                let x = loop {
                    let x: f64 = init_rng.random_range(-0.5 * period..0.5 * period);
                    let u: f64 = init_rng.random();
                    if 2.0 * u <= 1.0 + (2.0 * std::f64::consts::PI * x / period).cos() {
                        break x;
                    }
                };
                coords.push(x);
                for &c in center_rest {
                    let g: f64 = init_rng.sample(StandardNormal);
                    coords.push(c + sigma * g);
                }
            }
        }
    }
    for c in coords.chunks_mut(d) {
        c[0] = wrap_unchecked(c[0], period);
    }
    Ok(ParticleEnsemble {
        dimension: d,
        period,
        coords,
        streams: rng::particle_streams(config.seed, n),
        time: 0.0,
        steps: 0,
    })
}

/// Frozen snapshot quantities for one step.
fn gradients(ens: &ParticleEnsemble, pot: &Potential) -> Vec<f64> {
    let d = ens.dimension;
    let mut grads = vec![0.0; ens.coords.len()];
    grads
        .par_chunks_mut(d)
        .zip(ens.coords.par_chunks(d))
        .for_each(|(g, c)| pot.gradient_at(c, g));
    grads
}

/// Applies the Euler-Maruyama update given the per-particle biasing force.
fn advance<B>(ens: &mut ParticleEnsemble, grads: &[f64], config: &SimulationConfig, bias: B) -> Result<()>
where
    B: Fn(usize, &[f64], &[f64]) -> f64 + Sync,
{
    let d = ens.dimension;
    let dt = config.dt;
    let noise = config.noise_scale();
    let period = ens.period;
    let step = ens.steps;

    let bad = ens
        .coords
        .par_chunks_mut(d)
        .zip(ens.streams.par_iter_mut())
        .zip(grads.par_chunks(d))
        .enumerate()
        .map(|(n, ((x, stream), g))| {
            let b = bias(n, x, g);
            let mut finite = b.is_finite();
            for (i, xi) in x.iter_mut().enumerate() {
                let drift = if i == 0 { b - g[0] } else { -g[i] };
                finite &= drift.is_finite();
                let z: f64 = stream.sample(StandardNormal);
                *xi += drift * dt + noise * z;
            }
            x[0] = wrap_unchecked(x[0], period);
            if finite {
                None
            } else {
                Some(n)
            }
        })
        .min_by_key(|x| x.unwrap_or(usize::MAX));

    if let Some(Some(particle)) = bad {
        return Err(Error::Step { particle, step });
    }
    ens.steps += 1;
    ens.time += dt;
    Ok(())
}

/// One ABF step: every particle feels the kernel estimate of the mean force
/// built from all start-of-step positions (itself included).
pub fn abf_step(
    ens: &mut ParticleEnsemble,
    pot: &Potential,
    spec: &KernelSpec,
    config: &SimulationConfig,
) -> Result<()> {
    ens.check(pot)?;
    let grads = gradients(ens, pot);
    let d = ens.dimension;
    let x1 = ens.x1();
    let d1: Vec<f64> = grads.iter().step_by(d).copied().collect();
    let bias: Vec<f64> = BinnedEstimator::new(&x1, &d1, spec)?
        .at_samples()
        .into_iter()
        .map(|e| e.value)
        .collect();
    advance(ens, &grads, config, |n, _, _| bias[n])
}

/// One step of unbiased overdamped Langevin dynamics.
pub fn langevin_step(ens: &mut ParticleEnsemble, pot: &Potential, config: &SimulationConfig) -> Result<()> {
    ens.check(pot)?;
    let grads = gradients(ens, pot);
    advance(ens, &grads, config, |_, _, _| 0.0)
}

/// One step of the zero-bandwidth limit: the force along `x1` is cancelled.
pub fn zero_bandwidth_step(ens: &mut ParticleEnsemble, pot: &Potential, config: &SimulationConfig) -> Result<()> {
    ens.check(pot)?;
    let grads = gradients(ens, pot);
    advance(ens, &grads, config, |_, _, g| g[0])
}

/// Dispatches on `config.mode`; `spec` is required for ABF only.
pub fn step(
    ens: &mut ParticleEnsemble,
    pot: &Potential,
    spec: Option<&KernelSpec>,
    config: &SimulationConfig,
) -> Result<()> {
    match config.mode {
        Mode::Abf => {
            let spec = spec.ok_or_else(|| Error::Config("ABF mode needs a kernel".into()))?;
            abf_step(ens, pot, spec, config)
        }
        Mode::Langevin => langevin_step(ens, pot, config),
        Mode::ZeroBandwidth => zero_bandwidth_step(ens, pot, config),
    }
}

/// Samples the initial ensemble and runs `config.n_steps` steps, calling
/// `observe` after sampling and after every step.
pub fn simulate<F>(
    config: &SimulationConfig,
    pot: &Potential,
    spec: Option<&KernelSpec>,
    mut observe: F,
) -> Result<ParticleEnsemble>
where
    F: FnMut(&ParticleEnsemble) -> Result<()>,
{
    let mut ens = sample_initial(config, pot)?;
    observe(&ens)?;
    for _ in 0..config.n_steps {
        step(&mut ens, pot, spec, config)?;
        observe(&ens)?;
    }
    Ok(ens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::ConfinementTerm;

    fn cfg(mode: Mode, beta: f64, dt: f64, n: usize) -> SimulationConfig {
        SimulationConfig {
            beta,
            dt,
            n_steps: 1,
            n_particles: n,
            seed: 1,
            mode,
            init: InitialCondition::Gaussian {
                center: vec![-1.0, 0.0],
                sigma: 0.1,
            },
        }
    }

    fn quadratic() -> Potential {
        let c = |axis| ConfinementTerm {
            axis,
            center: 0.0,
            coefficient: 0.5,
            power: 2,
        };
        Potential::custom("quadratic", 2, 100.0, vec![], vec![c(0), c(1)]).unwrap()
    }

    #[test]
    fn degenerate_gaussian_initial_condition() {
        let mut c = cfg(Mode::Abf, 10.0, 0.01, 3);
        c.init = InitialCondition::Gaussian {
            center: vec![-1.0, 0.0],
            sigma: 0.0,
        };
        let ens = sample_initial(&c, &Potential::v1()).unwrap();
        for n in 0..3 {
            assert_eq!(ens.particle(n), &[-1.0, 0.0]);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_validated() {
        let c = cfg(Mode::Abf, 10.0, 0.01, 50);
        let a = sample_initial(&c, &Potential::v1()).unwrap();
        let b = sample_initial(&c, &Potential::v1()).unwrap();
        assert_eq!(a, b);
        let mut bad = c.clone();
        bad.init = InitialCondition::Gaussian {
            center: vec![0.0],
            sigma: 0.1,
        };
        assert!(sample_initial(&bad, &Potential::v1()).is_err());
        assert!(InitialCondition::from_parts("ring", vec![0.0, 0.0], 0.1).is_err());
        let mut bad = c;
        bad.n_particles = 0;
        assert!(sample_initial(&bad, &Potential::v1()).is_err());
    }

    #[test]
    fn zero_time_step_is_identity() {
        let pot = Potential::v1();
        let spec = KernelSpec::new(0.0, 0.05, 4.0).unwrap();
        for mode in [Mode::Abf, Mode::Langevin, Mode::ZeroBandwidth] {
            let c = cfg(mode, 10.0, 0.0, 20);
            let mut ens = sample_initial(&c, &pot).unwrap();
            let before = ens.coords().to_vec();
            step(&mut ens, &pot, Some(&spec), &c).unwrap();
            assert_eq!(ens.coords(), &before[..]);
        }
    }

    #[test]
    fn abf_at_well_bottom_does_not_move_without_noise() {
        let pot = Potential::v1();
        let spec = KernelSpec::new(0.1, 0.05, 4.0).unwrap();
        let c = cfg(Mode::Abf, f64::INFINITY, 0.01, 1);
        let p = TorusConfiguration::new(-1.0, vec![0.0], 4.0).unwrap();
        let mut ens = ParticleEnsemble::from_positions(&[p], 1).unwrap();
        abf_step(&mut ens, &pot, &spec, &c).unwrap();
        // x1 drift cancels exactly; y-gradient vanishes by symmetry
        assert_eq!(ens.particle(0)[0], -1.0);
        assert!(ens.particle(0)[1].abs() < 1e-15);
    }

    #[test]
    fn langevin_contracts_quadratic_without_noise() {
        let pot = quadratic();
        let mut c = cfg(Mode::Langevin, f64::INFINITY, 0.1, 1);
        c.n_steps = 5;
        let p = TorusConfiguration::new(2.0, vec![-3.0], 100.0).unwrap();
        let mut ens = ParticleEnsemble::from_positions(&[p], 1).unwrap();
        for k in 1..=5 {
            langevin_step(&mut ens, &pot, &c).unwrap();
            let f = 0.9f64.powi(k);
            assert!((ens.particle(0)[0] - 2.0 * f).abs() < 1e-13);
            assert!((ens.particle(0)[1] + 3.0 * f).abs() < 1e-13);
        }
    }

    #[test]
    fn potential_mismatch_is_rejected() {
        let c = cfg(Mode::Langevin, 1.0, 0.01, 4);
        let mut ens = sample_initial(&c, &Potential::v1()).unwrap();
        let other = Potential::sine_quadratic(1.0).unwrap();
        assert!(langevin_step(&mut ens, &other, &c).is_err());
        assert!(step(
            &mut ens,
            &Potential::v1(),
            None,
            &SimulationConfig { mode: Mode::Abf, ..c }
        )
        .is_err());
    }

    #[test]
    fn non_finite_drift_reports_particle() {
        let pot = Potential::v1();
        let c = cfg(Mode::Langevin, 10.0, 0.01, 3);
        let pts: Vec<_> = [0.0, 0.5, 1.0]
            .iter()
            .map(|&x| TorusConfiguration::new(x, vec![0.0], 4.0).unwrap())
            .collect();
        let mut ens = ParticleEnsemble::from_positions(&pts, 1).unwrap();
        ens.coords[3] = f64::NAN;
        let err = langevin_step(&mut ens, &pot, &c).unwrap_err();
        assert_eq!(err, Error::Step { particle: 1, step: 0 });
    }
}
