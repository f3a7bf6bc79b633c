//! Runs a preset and collects its numbers into a [`Report`].

use std::collections::BTreeSet;
use std::f64::consts::PI;

use abf_core::dynamics::simulate;
use abf_core::metrics::{
    conditional_mean_profile, grid_l1, grid_sup, histogram_density, loglog_slope, well_crossing_fraction,
    well_occupation, ConditionalProfile, ConvergenceSeries, ParameterKind, Trajectory,
};
use abf_core::pde::{heat_solve, marginal_l1, FokkerPlanck, GridDensity};
use abf_core::reference::free_energy_and_mean_force;
use abf_core::{Grid, KernelSpec, MeanForceProfile, Mode, ParticleEnsemble, Potential};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, InitKind, Preset};
use crate::error::CliError;

/// Potential, evaluation grid and kernel shared by every run of a preset.
#[derive(Debug, Clone)]
pub struct Setup {
    pub potential: Potential,
    pub grid: Grid,
    pub spec: KernelSpec,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let potential = cfg.potential.build()?;
        let grid = Grid::new(potential.period(), cfg.run.grid_points)?;
        let spec = cfg.kernel_spec(potential.period())?;
        Ok(Self { potential, grid, spec })
    }
}

/// Quadrature free energy and mean force on the evaluation grid.
#[derive(Debug, Clone)]
pub struct Reference {
    pub free_energy: Vec<f64>,
    pub mean_force: MeanForceProfile,
}

impl Reference {
    pub fn compute(cfg: &ExperimentConfig, setup: &Setup) -> Result<Self, CliError> {
        let (free_energy, mean_force) =
            free_energy_and_mean_force(&setup.grid, &setup.potential, cfg.sim.beta, cfg.reference)?;
        Ok(Self {
            free_energy,
            mean_force,
        })
    }
}

/// One seed of an accuracy run.
#[derive(Debug, Clone)]
pub struct SeedAccuracy {
    pub seed: u64,
    /// `(step, L1 error)` at each checkpoint, ending with the final step.
    pub checkpoints: Vec<(u64, f64)>,
    pub empty_nodes: usize,
    /// Fraction of particles nearest to each well at the end.
    pub well_mass: Vec<f64>,
    pub profile: MeanForceProfile,
    pub ensemble: ParticleEnsemble,
}

impl SeedAccuracy {
    pub fn final_error(&self) -> f64 {
        self.checkpoints.last().map_or(f64::NAN, |c| c.1)
    }

    pub fn error_at(&self, step: u64) -> Option<f64> {
        self.checkpoints.iter().find(|c| c.0 == step).map(|c| c.1)
    }
}

/// Unbiased run and the ABF run with the same seed and settings.
#[derive(Debug, Clone)]
pub struct SeedMetastability {
    pub seed: u64,
    pub crossing_fraction: f64,
    pub langevin_well_mass: Vec<f64>,
    pub abf_well_mass: Vec<f64>,
    pub langevin: ParticleEnsemble,
    pub abf: ParticleEnsemble,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub parameter: f64,
    /// Final L1 error per seed.
    pub errors: Vec<f64>,
}

impl SweepRow {
    pub fn mean(&self) -> f64 {
        self.errors.iter().sum::<f64>() / self.errors.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub kind: ParameterKind,
    pub rows: Vec<SweepRow>,
    /// Slope of log mean error against log parameter over the unsaturated prefix.
    pub slope: Option<f64>,
    pub fitted_points: usize,
}

impl Sweep {
    pub fn mean_error_at(&self, parameter: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.parameter == parameter).map(SweepRow::mean)
    }
}

/// Conditional means of `x2` given `x1` under the zero-bandwidth and ABF dynamics.
#[derive(Debug, Clone)]
pub struct SeedBiasDemo {
    pub seed: u64,
    pub zero_bandwidth: ConditionalProfile,
    pub abf: ConditionalProfile,
    pub zero_bandwidth_amplitude: f64,
    pub abf_amplitude: f64,
    pub estimate: MeanForceProfile,
    /// Sup-norm distance between the ABF force estimate and the exact mean force.
    pub estimate_sup_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSnapshot {
    pub time: f64,
    pub computed: Vec<f64>,
    pub heat: Vec<f64>,
    pub l1: f64,
}

/// Particle and grid marginals against the heat equation.
#[derive(Debug, Clone)]
pub struct CrossValidation {
    /// Per seed, one histogram snapshot per requested time.
    pub particles: Vec<(u64, Vec<MarginalSnapshot>)>,
    pub pde: Vec<MarginalSnapshot>,
    pub pde_steps: usize,
    pub final_density: GridDensity,
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Accuracy(Vec<SeedAccuracy>),
    Metastability(Vec<SeedMetastability>),
    Sweep(Sweep),
    BiasDemo(Vec<SeedBiasDemo>),
    CrossValidation(CrossValidation),
}

/// Everything a preset produced.
#[derive(Debug, Clone)]
pub struct Report {
    pub config: ExperimentConfig,
    pub reference: Option<Reference>,
    pub outcome: Outcome,
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    s / n as f64
}

impl Report {
    /// `(key, value)` lines of the summary, headline metric first.
    pub fn summary(&self) -> Vec<(String, String)> {
        let mut out = vec![("experiment".to_string(), self.config.preset.name().to_string())];
        let mut push = |k: &str, v: String| out.push((k.to_string(), v));
        match &self.outcome {
            Outcome::Accuracy(runs) => {
                push(
                    "mean_l1_error",
                    mean(runs.iter().map(SeedAccuracy::final_error)).to_string(),
                );
                for r in runs {
                    push(&format!("seed.{}.l1_error", r.seed), r.final_error().to_string());
                    for (step, e) in &r.checkpoints {
                        push(&format!("seed.{}.l1_error_at_step.{step}", r.seed), e.to_string());
                    }
                    push(&format!("seed.{}.empty_nodes", r.seed), r.empty_nodes.to_string());
                    push(&format!("seed.{}.well_mass", r.seed), join(&r.well_mass));
                }
            }
            Outcome::Metastability(runs) => {
                push(
                    "mean_crossing_fraction",
                    mean(runs.iter().map(|r| r.crossing_fraction)).to_string(),
                );
                for r in runs {
                    push(
                        &format!("seed.{}.crossing_fraction", r.seed),
                        r.crossing_fraction.to_string(),
                    );
                    push(
                        &format!("seed.{}.langevin_well_mass", r.seed),
                        join(&r.langevin_well_mass),
                    );
                    push(&format!("seed.{}.abf_well_mass", r.seed), join(&r.abf_well_mass));
                }
            }
            Outcome::Sweep(s) => {
                let name = match s.kind {
                    ParameterKind::ParticleCount => "n",
                    ParameterKind::Bandwidth => "epsilon",
                };
                push("loglog_slope", s.slope.map_or("undefined".into(), |v| v.to_string()));
                push("fitted_points", s.fitted_points.to_string());
                for r in &s.rows {
                    push(&format!("mean_l1_error.{name}.{}", r.parameter), r.mean().to_string());
                }
            }
            Outcome::BiasDemo(runs) => {
                push(
                    "mean_zero_bandwidth_amplitude",
                    mean(runs.iter().map(|r| r.zero_bandwidth_amplitude)).to_string(),
                );
                push(
                    "mean_abf_amplitude",
                    mean(runs.iter().map(|r| r.abf_amplitude)).to_string(),
                );
                for r in runs {
                    push(
                        &format!("seed.{}.zero_bandwidth_amplitude", r.seed),
                        r.zero_bandwidth_amplitude.to_string(),
                    );
                    push(&format!("seed.{}.abf_amplitude", r.seed), r.abf_amplitude.to_string());
                    push(
                        &format!("seed.{}.estimate_sup_error", r.seed),
                        r.estimate_sup_error.to_string(),
                    );
                }
            }
            Outcome::CrossValidation(x) => {
                let worst_particle = x
                    .particles
                    .iter()
                    .flat_map(|(_, s)| s.iter().map(|m| m.l1))
                    .fold(0.0, f64::max);
                push("max_particle_l1", worst_particle.to_string());
                push("max_pde_l1", x.pde.iter().map(|m| m.l1).fold(0.0, f64::max).to_string());
                for (seed, snaps) in &x.particles {
                    for m in snaps {
                        push(&format!("seed.{seed}.particle_l1_at_time.{}", m.time), m.l1.to_string());
                    }
                }
                for m in &x.pde {
                    push(&format!("pde_l1_at_time.{}", m.time), m.l1.to_string());
                }
                push("pde_steps", x.pde_steps.to_string());
            }
        }
        if let Some(r) = &self.reference {
            out.push(("reference_l1_norm".into(), r.mean_force.l1_norm().to_string()));
            out.push(("reference_sup_norm".into(), r.mean_force.sup_norm().to_string()));
        }
        out
    }

    /// Acceptance thresholds for this preset; each entry is `(name, passed, detail)`.
    pub fn checks(&self) -> Vec<(String, bool, String)> {
        let mut out = Vec::new();
        let mut check = |name: &str, passed: bool, detail: String| out.push((name.to_string(), passed, detail));
        match (&self.outcome, self.config.preset) {
            (Outcome::Accuracy(runs), Preset::V1Abf) => {
                let m = mean(runs.iter().map(SeedAccuracy::final_error));
                check(
                    "v1-abf mean L1 error in [0.01, 0.20]",
                    (0.01..=0.20).contains(&m),
                    format!("{m}"),
                );
            }
            (Outcome::Accuracy(runs), Preset::V2Short) => {
                let m = mean(runs.iter().map(SeedAccuracy::final_error));
                check(
                    "v2-short mean L1 error in [0.2, 0.8]",
                    (0.2..=0.8).contains(&m),
                    format!("{m}"),
                );
            }
            (Outcome::Accuracy(runs), Preset::V2Long) => {
                let improved = runs
                    .iter()
                    .all(|r| r.error_at(2000).is_some_and(|e| r.final_error() < e));
                check(
                    "v2-long error below its 2000-step error on every seed",
                    improved,
                    String::new(),
                );
                if self.config.sim.steps >= 2_000_000 {
                    let m = mean(runs.iter().map(SeedAccuracy::final_error));
                    check("v2-long mean L1 error <= 0.25", m <= 0.25, format!("{m}"));
                }
            }
            (Outcome::Metastability(runs), _) => {
                let c = mean(runs.iter().map(|r| r.crossing_fraction));
                check("langevin crossing fraction <= 0.05", c <= 0.05, format!("{c}"));
                let min_mass = runs
                    .iter()
                    .flat_map(|r| r.abf_well_mass.iter().copied())
                    .fold(1.0, f64::min);
                check("abf well masses >= 0.2", min_mass >= 0.2, format!("{min_mass}"));
            }
            (Outcome::Sweep(s), Preset::SweepN) => {
                let slope = s.slope.unwrap_or(f64::NAN);
                check(
                    "N slope in [-0.85, -0.35]",
                    (-0.85..=-0.35).contains(&slope),
                    format!("{slope}"),
                );
            }
            (Outcome::Sweep(s), Preset::SweepEps) => {
                let at = |e| s.mean_error_at(e).unwrap_or(f64::NAN);
                let (small, mid, large) = (at(1e-4), at(1e-2), at(1.0));
                check(
                    "error at eps=1 >= 3x error at eps=1e-2",
                    large >= 3.0 * mid,
                    format!("{large} vs {mid}"),
                );
                check(
                    "error at eps=1e-4 > error at eps=1e-2",
                    small > mid,
                    format!("{small} vs {mid}"),
                );
            }
            (Outcome::BiasDemo(runs), _) => {
                let zb = mean(runs.iter().map(|r| r.zero_bandwidth_amplitude));
                let abf = mean(runs.iter().map(|r| r.abf_amplitude));
                let sup = runs.iter().map(|r| r.estimate_sup_error).fold(0.0, f64::max);
                check(
                    "zero-bandwidth amplitude in [0, 0.1]",
                    (0.0..=0.1).contains(&zb),
                    format!("{zb}"),
                );
                check(
                    "abf amplitude in [0.8, 1.1]",
                    (0.8..=1.1).contains(&abf),
                    format!("{abf}"),
                );
                check("abf force estimate sup error <= 0.15", sup <= 0.15, format!("{sup}"));
            }
            (Outcome::CrossValidation(x), _) => {
                let p = x
                    .particles
                    .iter()
                    .flat_map(|(_, s)| s.iter().map(|m| m.l1))
                    .fold(0.0, f64::max);
                let g = x.pde.iter().map(|m| m.l1).fold(0.0, f64::max);
                check("particle marginal L1 <= 0.05", p <= 0.05, format!("{p}"));
                check("grid marginal L1 <= 0.02", g <= 0.02, format!("{g}"));
            }
            _ => {}
        }
        out
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Runs the preset named in `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    cfg.validate().map_err(|(key, message)| CliError::Override {
        assignment: key.to_string(),
        message,
    })?;
    let setup = Setup::new(cfg)?;
    let needs_reference = !matches!(cfg.preset, Preset::V1Langevin | Preset::PdeXval);
    let reference = if needs_reference {
        Some(Reference::compute(cfg, &setup)?)
    } else {
        None
    };
    let outcome = match cfg.preset {
        Preset::V1Abf | Preset::EpsLarge | Preset::V2Short | Preset::V2Long => {
            let exact = &reference.as_ref().expect("computed above").mean_force;
            let runs = cfg
                .seeds()
                .into_par_iter()
                .map(|seed| accuracy_run(cfg, &setup, exact, seed))
                .collect::<Result<Vec<_>, _>>()?;
            Outcome::Accuracy(runs)
        }
        Preset::V1Langevin => Outcome::Metastability(
            cfg.seeds()
                .into_par_iter()
                .map(|seed| metastability_run(cfg, &setup, seed))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        Preset::SweepN | Preset::SweepEps => Outcome::Sweep(sweep(
            cfg,
            &setup,
            &reference.as_ref().expect("computed above").mean_force,
        )?),
        Preset::BiasDemo => {
            let exact = &reference.as_ref().expect("computed above").mean_force;
            Outcome::BiasDemo(
                cfg.seeds()
                    .into_par_iter()
                    .map(|seed| bias_demo_run(cfg, &setup, exact, seed))
                    .collect::<Result<Vec<_>, _>>()?,
            )
        }
        Preset::PdeXval => Outcome::CrossValidation(cross_validation(cfg, &setup)?),
    };
    Ok(Report {
        config: cfg.clone(),
        reference,
        outcome,
    })
}

fn accuracy_run(
    cfg: &ExperimentConfig,
    setup: &Setup,
    exact: &MeanForceProfile,
    seed: u64,
) -> Result<SeedAccuracy, CliError> {
    let sim = cfg.simulation(seed)?;
    let mut marks: BTreeSet<u64> = cfg.run.checkpoints.iter().copied().collect();
    marks.insert(sim.n_steps);
    let mut checkpoints = Vec::with_capacity(marks.len());
    let ensemble = simulate(&sim, &setup.potential, Some(&setup.spec), |ens| {
        if marks.contains(&ens.steps()) {
            let profile = ens.filled_force_profile(&setup.potential, &setup.spec, &setup.grid)?;
            checkpoints.push((ens.steps(), grid_l1(&profile, exact)?));
        }
        Ok(())
    })?;
    let profile = ensemble.filled_force_profile(&setup.potential, &setup.spec, &setup.grid)?;
    Ok(SeedAccuracy {
        seed,
        checkpoints,
        empty_nodes: profile.empty_nodes,
        well_mass: occupation(cfg, &ensemble)?,
        profile,
        ensemble,
    })
}

fn occupation(cfg: &ExperimentConfig, ens: &ParticleEnsemble) -> Result<Vec<f64>, CliError> {
    let wells = cfg.potential.wells();
    if wells.is_empty() {
        return Ok(Vec::new());
    }
    let points: Vec<&[f64]> = (0..ens.len()).map(|n| ens.particle(n)).collect();
    Ok(well_occupation(&points, &wells, ens.period())?)
}

fn metastability_run(cfg: &ExperimentConfig, setup: &Setup, seed: u64) -> Result<SeedMetastability, CliError> {
    let wells = cfg.potential.wells();
    if wells.is_empty() {
        return Err(
            abf_core::Error::Config(format!("potential `{}` has no wells to cross", cfg.potential.name())).into(),
        );
    }
    let mut sim = cfg.simulation(seed)?;
    sim.mode = Mode::Langevin;
    let mut starts = Vec::new();
    let langevin = simulate(&sim, &setup.potential, None, |ens| {
        if ens.steps() == 0 {
            starts = (0..ens.len()).map(|n| ens.particle(n).to_vec()).collect();
        }
        Ok(())
    })?;
    let trajectories: Vec<Trajectory> = starts
        .into_iter()
        .enumerate()
        .map(|(n, start)| Trajectory {
            start,
            end: langevin.particle(n).to_vec(),
        })
        .collect();
    let crossing_fraction = well_crossing_fraction(&trajectories, &wells, cfg.run.well_radius, langevin.period())?;
    sim.mode = Mode::Abf;
    let abf = simulate(&sim, &setup.potential, Some(&setup.spec), |_| Ok(()))?;
    Ok(SeedMetastability {
        seed,
        crossing_fraction,
        langevin_well_mass: occupation(cfg, &langevin)?,
        abf_well_mass: occupation(cfg, &abf)?,
        langevin,
        abf,
    })
}

fn sweep(cfg: &ExperimentConfig, setup: &Setup, exact: &MeanForceProfile) -> Result<Sweep, CliError> {
    let (kind, parameters): (ParameterKind, Vec<f64>) = match cfg.preset {
        Preset::SweepN => (
            ParameterKind::ParticleCount,
            cfg.sweep.n_values.iter().map(|&n| n as f64).collect(),
        ),
        _ => (ParameterKind::Bandwidth, cfg.sweep.eps_values.clone()),
    };
    let mut rows = Vec::with_capacity(parameters.len());
    for &parameter in &parameters {
        let mut c = cfg.clone();
        match kind {
            ParameterKind::ParticleCount => c.sim.n_particles = parameter as usize,
            ParameterKind::Bandwidth => c.kernel.epsilon = parameter,
        }
        let s = Setup {
            spec: c.kernel_spec(setup.potential.period())?,
            ..setup.clone()
        };
        let mut c_final = c.clone();
        c_final.run.checkpoints.clear();
        let errors = c
            .seeds()
            .into_par_iter()
            .map(|seed| accuracy_run(&c_final, &s, exact, seed).map(|r| r.final_error()))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(SweepRow { parameter, errors });
    }
    let series = ConvergenceSeries::new(kind, rows.iter().map(|r| (r.parameter, r.mean())).collect())?;
    let fit = match kind {
        ParameterKind::ParticleCount => series.unsaturated(),
        ParameterKind::Bandwidth => series,
    };
    Ok(Sweep {
        kind,
        rows,
        slope: loglog_slope(&fit).ok(),
        fitted_points: fit.points.len(),
    })
}

fn bias_demo_run(
    cfg: &ExperimentConfig,
    setup: &Setup,
    exact: &MeanForceProfile,
    seed: u64,
) -> Result<SeedBiasDemo, CliError> {
    let bandwidth = setup.grid.spacing();
    let collect = |mode: Mode| -> Result<(ConditionalProfile, ParticleEnsemble), CliError> {
        let mut sim = cfg.simulation(seed)?;
        sim.mode = mode;
        let mut samples = Vec::new();
        let spec = (mode == Mode::Abf).then_some(&setup.spec);
        let ens = simulate(&sim, &setup.potential, spec, |ens| {
            let k = ens.steps();
            if k >= cfg.demo.sample_from && (k - cfg.demo.sample_from).is_multiple_of(cfg.demo.sample_every) {
                samples.extend((0..ens.len()).map(|n| (ens.particle(n)[0], ens.particle(n)[1])));
            }
            Ok(())
        })?;
        if samples.is_empty() {
            return Err(abf_core::Error::Config(format!(
                "no samples collected: demo.sample_from = {} exceeds sim.steps = {}",
                cfg.demo.sample_from, sim.n_steps
            ))
            .into());
        }
        Ok((conditional_mean_profile(&samples, &setup.grid, bandwidth)?, ens))
    };
    let (zero_bandwidth, _) = collect(Mode::ZeroBandwidth)?;
    let (abf, ens) = collect(Mode::Abf)?;
    let estimate = ens.filled_force_profile(&setup.potential, &setup.spec, &setup.grid)?;
    Ok(SeedBiasDemo {
        seed,
        zero_bandwidth_amplitude: zero_bandwidth.first_harmonic_amplitude(),
        abf_amplitude: abf.first_harmonic_amplitude(),
        zero_bandwidth,
        abf,
        estimate_sup_error: grid_sup(&estimate, exact)?,
        estimate,
    })
}

/// Density of the initial `x1` marginal.
fn initial_marginal(cfg: &ExperimentConfig, x: f64, period: f64) -> f64 {
    match cfg.init.kind {
        InitKind::Uniform => 1.0 / period,
        InitKind::Cosine => (1.0 + (2.0 * PI * x / period).cos()) / period,
        InitKind::Gaussian => {
            let s = cfg.init.sigma.max(1e-12);
            let c = cfg.init.center[0];
            let images = (6.0 * s / period).ceil() as i64 + 1;
            (-images..=images)
                .map(|k| {
                    let d = x - c + k as f64 * period;
                    (-0.5 * (d / s).powi(2)).exp() / (s * (2.0 * PI).sqrt())
                })
                .sum()
        }
    }
}

/// Heat solution of the exact initial marginal, averaged over `bins` cells.
fn heat_bin_averages(cfg: &ExperimentConfig, period: f64, bins: usize, t: f64) -> Vec<f64> {
    const SUB: usize = 64;
    let m = bins * SUB;
    let h = period / m as f64;
    let p0: Vec<f64> = (0..m)
        .map(|i| initial_marginal(cfg, -0.5 * period + (i as f64 + 0.5) * h, period))
        .collect();
    let p = heat_solve(&p0, t, cfg.sim.beta, period);
    p.chunks(SUB).map(|c| c.iter().sum::<f64>() / SUB as f64).collect()
}

fn cross_validation(cfg: &ExperimentConfig, setup: &Setup) -> Result<CrossValidation, CliError> {
    let period = setup.potential.period();
    let mut times = cfg.pde.times.clone();
    times.sort_by(f64::total_cmp);
    let marks: Vec<(u64, f64)> = times.iter().map(|&t| ((t / cfg.sim.dt).round() as u64, t)).collect();
    if let Some(&(k, t)) = marks.iter().find(|m| m.0 > cfg.sim.steps) {
        return Err(
            abf_core::Error::Config(format!("pde time {t} needs {k} steps, sim.steps is {}", cfg.sim.steps)).into(),
        );
    }
    let heat: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| heat_bin_averages(cfg, period, cfg.pde.bins, t))
        .collect();
    let bin_width = period / cfg.pde.bins as f64;

    let particles = cfg
        .seeds()
        .into_par_iter()
        .map(|seed| -> Result<(u64, Vec<MarginalSnapshot>), CliError> {
            let sim = cfg.simulation(seed)?;
            let mut snaps = Vec::new();
            simulate(&sim, &setup.potential, Some(&setup.spec), |ens| {
                for (idx, &(k, t)) in marks.iter().enumerate() {
                    if k == ens.steps() {
                        let computed = histogram_density(&ens.x1(), period, cfg.pde.bins);
                        let l1 = marginal_l1(&computed, &heat[idx], bin_width);
                        snaps.push(MarginalSnapshot {
                            time: t,
                            computed,
                            heat: heat[idx].clone(),
                            l1,
                        });
                    }
                }
                Ok(())
            })?;
            Ok((seed, snaps))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let (pde, pde_steps, final_density) = grid_marginals(cfg, setup, &times)?;
    Ok(CrossValidation {
        particles,
        pde,
        pde_steps,
        final_density,
    })
}

/// Solves the Fokker-Planck equation from the configured initial law and
/// compares its `x1`-marginal with the heat equation at each of `times`
/// (ascending). Returns the snapshots, the step count and the final density.
pub fn grid_marginals(
    cfg: &ExperimentConfig,
    setup: &Setup,
    times: &[f64],
) -> Result<(Vec<MarginalSnapshot>, usize, GridDensity), CliError> {
    let period = setup.potential.period();
    if setup.potential.dimension() != 2 {
        return Err(abf_core::Error::Config("the grid solver needs a two-dimensional potential".into()).into());
    }
    let rest = cfg.init.center[1];
    let sigma = cfg.init.sigma;
    let mut rho = GridDensity::from_fn(cfg.pde.m1, cfg.pde.m2, period, cfg.pde.y_max, |x, y| {
        let g = if sigma > 0.0 {
            (-0.5 * ((y - rest) / sigma).powi(2)).exp()
        } else {
            1.0
        };
        initial_marginal(cfg, x, period) * g
    })?;
    let p0 = rho.marginal();
    let fp = FokkerPlanck::new(&rho, &setup.potential, &setup.spec, cfg.sim.beta)?;
    let mut snaps = Vec::with_capacity(times.len());
    let mut steps = 0;
    for &t in times {
        let dt = t - rho.time();
        steps += fp.solve(&mut rho, dt)?;
        let computed = rho.marginal();
        let heat = heat_solve(&p0, t, cfg.sim.beta, period);
        let l1 = marginal_l1(&computed, &heat, rho.h1());
        snaps.push(MarginalSnapshot {
            time: t,
            computed,
            heat,
            l1,
        });
    }
    Ok((snaps, steps, rho))
}
