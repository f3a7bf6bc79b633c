//! Plain `key = value` experiment configuration with dotted sections.
//!
//! A file names its preset with `experiment = <name>`; every other key
//! overrides that preset's default. Unknown and repeated keys are rejected.
//! Blank lines and lines starting with `#` are ignored.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use abf_core::potential::{ConfinementTerm, GaussianTerm};
use abf_core::reference::QuadratureSettings;
use abf_core::{InitialCondition, KernelSpec, Mode, Potential, SimulationConfig};

use crate::error::CliError;

/// Named experiment presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    V1Abf,
    V1Langevin,
    SweepN,
    SweepEps,
    EpsLarge,
    V2Short,
    V2Long,
    BiasDemo,
    PdeXval,
}

impl Preset {
    pub const ALL: [Preset; 9] = [
        Preset::V1Abf,
        Preset::V1Langevin,
        Preset::SweepN,
        Preset::SweepEps,
        Preset::EpsLarge,
        Preset::V2Short,
        Preset::V2Long,
        Preset::BiasDemo,
        Preset::PdeXval,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::V1Abf => "v1-abf",
            Preset::V1Langevin => "v1-langevin",
            Preset::SweepN => "sweep-n",
            Preset::SweepEps => "sweep-eps",
            Preset::EpsLarge => "eps-large",
            Preset::V2Short => "v2-short",
            Preset::V2Long => "v2-long",
            Preset::BiasDemo => "bias-demo",
            Preset::PdeXval => "pde-xval",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Preset::V1Abf => "ABF on the two-well potential, L1 error of the force estimate",
            Preset::V1Langevin => "unbiased Langevin on the two-well potential, well-crossing fraction",
            Preset::SweepN => "force error as a function of the particle count, with log-log slope",
            Preset::SweepEps => "force error as a function of the kernel bandwidth",
            Preset::EpsLarge => "ABF with a bandwidth of one length unit",
            Preset::V2Short => "ABF on the two-channel potential, short run",
            Preset::V2Long => "ABF on the two-channel potential, long run with error checkpoints",
            Preset::BiasDemo => "zero-bandwidth against ABF conditional means on the sine-quadratic potential",
            Preset::PdeXval => "particle and grid x1-marginals against the heat equation",
        }
    }
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| CliError::UnknownPreset(s.to_string()))
    }
}

/// Potential selection, including user-defined mixtures.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialChoice {
    V1,
    V2,
    SineQuadratic {
        period: f64,
    },
    Custom {
        dimension: usize,
        period: f64,
        gaussians: Vec<GaussianTerm>,
        confinement: Vec<ConfinementTerm>,
    },
}

impl PotentialChoice {
    pub fn name(&self) -> &'static str {
        match self {
            PotentialChoice::V1 => "v1",
            PotentialChoice::V2 => "v2",
            PotentialChoice::SineQuadratic { .. } => "sine_quadratic",
            PotentialChoice::Custom { .. } => "custom",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, String> {
        match name {
            "v1" => Ok(PotentialChoice::V1),
            "v2" => Ok(PotentialChoice::V2),
            "sine_quadratic" => Ok(PotentialChoice::SineQuadratic { period: 1.0 }),
            "custom" => Ok(PotentialChoice::Custom {
                dimension: 2,
                period: 4.0,
                gaussians: Vec::new(),
                confinement: Vec::new(),
            }),
            other => Err(format!(
                "unknown potential `{other}` (expected v1, v2, sine_quadratic or custom)"
            )),
        }
    }

    pub fn build(&self) -> abf_core::Result<Potential> {
        match self {
            PotentialChoice::V1 => Ok(Potential::v1()),
            PotentialChoice::V2 => Ok(Potential::v2()),
            PotentialChoice::SineQuadratic { period } => Potential::sine_quadratic(*period),
            PotentialChoice::Custom {
                dimension,
                period,
                gaussians,
                confinement,
            } => Potential::custom("custom", *dimension, *period, gaussians.clone(), confinement.clone()),
        }
    }

    /// Well centers used by the crossing and occupation diagnostics.
    pub fn wells(&self) -> Vec<Vec<f64>> {
        match self {
            PotentialChoice::V1 | PotentialChoice::V2 => vec![vec![-1.0, 0.0], vec![1.0, 0.0]],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Gaussian,
    Uniform,
    Cosine,
}

impl InitKind {
    pub fn name(&self) -> &'static str {
        match self {
            InitKind::Gaussian => "gaussian",
            InitKind::Uniform => "uniform",
            InitKind::Cosine => "cosine",
        }
    }
}

impl FromStr for InitKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gaussian" => Ok(InitKind::Gaussian),
            "uniform" => Ok(InitKind::Uniform),
            "cosine" => Ok(InitKind::Cosine),
            other => Err(format!(
                "unknown initial condition `{other}` (expected gaussian, uniform or cosine)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub beta: f64,
    pub dt: f64,
    pub steps: u64,
    pub n_particles: usize,
    /// First seed; a run with `k` seeds uses `seed..seed + k`.
    pub seed: u64,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitSettings {
    pub kind: InitKind,
    /// All `d` coordinates; the non-Gaussian kinds ignore the first.
    pub center: Vec<f64>,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSettings {
    pub alpha: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub seeds: usize,
    /// Steps at which the force error is recorded (the final step always is).
    pub checkpoints: Vec<u64>,
    /// Nodes of the force-evaluation grid.
    pub grid_points: usize,
    /// Distance within which a particle counts as starting in a well.
    pub well_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub n_values: Vec<usize>,
    pub eps_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeSettings {
    pub m1: usize,
    pub m2: usize,
    pub y_max: f64,
    pub times: Vec<f64>,
    /// Histogram bins for the particle marginal.
    pub bins: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoSettings {
    /// First step whose positions enter the conditional-mean samples.
    pub sample_from: u64,
    pub sample_every: u64,
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub potential: PotentialChoice,
    pub sim: SimSettings,
    pub init: InitSettings,
    pub kernel: KernelSettings,
    pub reference: QuadratureSettings,
    pub run: RunSettings,
    pub sweep: SweepSettings,
    pub pde: PdeSettings,
    pub demo: DemoSettings,
    pub output_dir: Option<String>,
}

impl ExperimentConfig {
    /// Default settings of `preset`.
    pub fn preset(preset: Preset) -> Self {
        let mut c = Self {
            preset,
            potential: PotentialChoice::V1,
            sim: SimSettings {
                beta: 10.0,
                dt: 0.01,
                steps: 2000,
                n_particles: 1000,
                seed: 1,
                mode: Mode::Abf,
            },
            init: InitSettings {
                kind: InitKind::Gaussian,
                center: vec![-1.0, 0.0],
                sigma: 0.1,
            },
            kernel: KernelSettings {
                alpha: 0.0,
                epsilon: 0.01,
            },
            reference: QuadratureSettings::default(),
            run: RunSettings {
                seeds: 1,
                checkpoints: Vec::new(),
                grid_points: 200,
                well_radius: 0.75,
            },
            sweep: SweepSettings {
                n_values: vec![125, 250, 500, 1000, 2000],
                eps_values: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0],
            },
            pde: PdeSettings {
                m1: 128,
                m2: 128,
                y_max: 4.0,
                times: vec![0.25, 0.5, 1.0],
                bins: 10,
            },
            demo: DemoSettings {
                sample_from: 1000,
                sample_every: 10,
            },
            output_dir: None,
        };
        match preset {
            Preset::V1Abf => c.run.seeds = 5,
            Preset::V1Langevin => {
                c.sim.mode = Mode::Langevin;
                c.sim.n_particles = 200;
            }
            Preset::SweepN => c.run.seeds = 8,
            Preset::SweepEps => c.sim.n_particles = 1500,
            Preset::EpsLarge => {
                c.kernel.epsilon = 1.0;
                c.sim.n_particles = 200;
            }
            Preset::V2Short => {
                c.potential = PotentialChoice::V2;
                c.run.seeds = 3;
            }
            Preset::V2Long => {
                c.potential = PotentialChoice::V2;
                c.run.seeds = 3;
                c.sim.steps = 2_000_000;
                c.run.checkpoints = vec![2000, 20_000, 200_000];
            }
            Preset::BiasDemo => {
                c.potential = PotentialChoice::SineQuadratic { period: 1.0 };
                c.sim.beta = 1.0;
                c.sim.dt = 0.005;
                c.sim.n_particles = 4000;
                c.kernel.epsilon = 0.05;
                c.init = InitSettings {
                    kind: InitKind::Uniform,
                    center: vec![0.0, 0.0],
                    sigma: 1.0,
                };
                c.reference.y_max = 10.0;
                c.run.grid_points = 50;
            }
            Preset::PdeXval => {
                c.sim.beta = 1.0;
                c.sim.dt = 0.005;
                c.sim.n_particles = 5000;
                c.sim.steps = 200;
                c.kernel.epsilon = 0.05;
                c.init = InitSettings {
                    kind: InitKind::Cosine,
                    center: vec![0.0, 0.0],
                    sigma: 0.5,
                };
            }
        }
        c
    }

    /// Seeds of the run, in order.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.run.seeds as u64).map(|k| self.sim.seed + k).collect()
    }

    pub fn initial_condition(&self) -> abf_core::Result<InitialCondition> {
        InitialCondition::from_parts(self.init.kind.name(), self.init.center.clone(), self.init.sigma)
    }

    /// Integrator settings for one seed.
    pub fn simulation(&self, seed: u64) -> abf_core::Result<SimulationConfig> {
        Ok(SimulationConfig {
            beta: self.sim.beta,
            dt: self.sim.dt,
            n_steps: self.sim.steps,
            n_particles: self.sim.n_particles,
            seed,
            mode: self.sim.mode,
            init: self.initial_condition()?,
        })
    }

    pub fn kernel_spec(&self, period: f64) -> abf_core::Result<KernelSpec> {
        KernelSpec::new(self.kernel.alpha, self.kernel.epsilon, period)
    }

    /// Checks every cross-field constraint; the error names the offending key.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        let pot = self.potential.build().map_err(|e| ("potential", e.to_string()))?;
        let period = pot.period();
        self.kernel_spec(period)
            .map_err(|e| ("kernel.epsilon", e.to_string()))?;
        self.simulation(self.sim.seed)
            .and_then(|s| s.validate())
            .map_err(|e| ("sim", e.to_string()))?;
        if self.init.center.len() != pot.dimension() {
            return Err((
                "init.center",
                format!(
                    "{} coordinates given, potential has dimension {}",
                    self.init.center.len(),
                    pot.dimension()
                ),
            ));
        }
        if self.run.grid_points < 2 {
            return Err(("grid.points", "need at least 2 grid points".into()));
        }
        if self.run.seeds == 0 {
            return Err(("run.seeds", "need at least one seed".into()));
        }
        if !(self.run.well_radius > 0.0) {
            return Err(("wells.radius", "must be positive".into()));
        }
        if self.run.checkpoints.iter().any(|&c| c > self.sim.steps) {
            return Err((
                "run.checkpoints",
                format!("checkpoints must not exceed sim.steps = {}", self.sim.steps),
            ));
        }
        if self.sweep.n_values.is_empty() || self.sweep.n_values.contains(&0) {
            return Err(("sweep.n_values", "need positive particle counts".into()));
        }
        let swept = if self.preset == Preset::SweepEps {
            self.sweep.eps_values.as_slice()
        } else {
            &[]
        };
        for &eps in swept {
            KernelSpec::new(self.kernel.alpha, eps, period).map_err(|e| ("sweep.eps_values", e.to_string()))?;
        }
        if !(self.reference.y_max > 0.0) || self.reference.n_quad == 0 {
            return Err(("reference", "y_max and n_quad must be positive".into()));
        }
        if self.pde.m1 < 3 || self.pde.m2 < 2 || !(self.pde.y_max > 0.0) || self.pde.bins == 0 {
            return Err(("pde", "grid needs m1 >= 3, m2 >= 2, y_max > 0 and bins >= 1".into()));
        }
        if self.pde.times.iter().any(|&t| !(t >= 0.0)) {
            return Err(("pde.times", "times must be nonnegative".into()));
        }
        if self.demo.sample_every == 0 {
            return Err(("demo.sample_every", "must be positive".into()));
        }
        Ok(())
    }

    /// All keys with their current values, in canonical order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut e = vec![
            ("experiment", self.preset.name().to_string()),
            ("potential", self.potential.name().to_string()),
        ];
        match &self.potential {
            PotentialChoice::SineQuadratic { period } => e.push(("potential.period", period.to_string())),
            PotentialChoice::Custom {
                dimension,
                period,
                gaussians,
                confinement,
            } => {
                e.push(("potential.dimension", dimension.to_string()));
                e.push(("potential.period", period.to_string()));
                e.push(("potential.gaussians", format_gaussians(gaussians)));
                e.push(("potential.confinement", format_confinement(confinement)));
            }
            _ => {}
        }
        e.extend([
            ("sim.beta", self.sim.beta.to_string()),
            ("sim.dt", self.sim.dt.to_string()),
            ("sim.steps", self.sim.steps.to_string()),
            ("sim.n_particles", self.sim.n_particles.to_string()),
            ("sim.seed", self.sim.seed.to_string()),
            ("sim.mode", self.sim.mode.name().to_string()),
            ("init.kind", self.init.kind.name().to_string()),
            ("init.center", join(&self.init.center)),
            ("init.sigma", self.init.sigma.to_string()),
            ("kernel.alpha", self.kernel.alpha.to_string()),
            ("kernel.epsilon", self.kernel.epsilon.to_string()),
            ("reference.y_max", self.reference.y_max.to_string()),
            ("reference.n_quad", self.reference.n_quad.to_string()),
            ("grid.points", self.run.grid_points.to_string()),
            ("run.seeds", self.run.seeds.to_string()),
            ("run.checkpoints", join(&self.run.checkpoints)),
            ("wells.radius", self.run.well_radius.to_string()),
            ("sweep.n_values", join(&self.sweep.n_values)),
            ("sweep.eps_values", join(&self.sweep.eps_values)),
            ("pde.m1", self.pde.m1.to_string()),
            ("pde.m2", self.pde.m2.to_string()),
            ("pde.y_max", self.pde.y_max.to_string()),
            ("pde.times", join(&self.pde.times)),
            ("pde.bins", self.pde.bins.to_string()),
            ("demo.sample_from", self.demo.sample_from.to_string()),
            ("demo.sample_every", self.demo.sample_every.to_string()),
        ]);
        if let Some(dir) = &self.output_dir {
            e.push(("output.dir", dir.clone()));
        }
        e
    }

    /// Config file text; [`parse_str`] of it gives back `self`.
    pub fn serialize(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "experiment" => {
                let preset: Preset = value.parse().map_err(|e: CliError| e.to_string())?;
                if preset != self.preset {
                    return Err(format!(
                        "experiment is `{}`, cannot change it to `{value}`",
                        self.preset.name()
                    ));
                }
            }
            "potential" => {
                if value != self.potential.name() {
                    self.potential = PotentialChoice::from_name(value)?;
                }
            }
            "potential.period" => match &mut self.potential {
                PotentialChoice::SineQuadratic { period } | PotentialChoice::Custom { period, .. } => {
                    *period = parse(value)?
                }
                _ => return Err("only sine_quadratic and custom potentials take a period".into()),
            },
            "potential.dimension" | "potential.gaussians" | "potential.confinement" => match &mut self.potential {
                PotentialChoice::Custom {
                    dimension,
                    gaussians,
                    confinement,
                    ..
                } => match key {
                    "potential.dimension" => *dimension = parse(value)?,
                    "potential.gaussians" => *gaussians = parse_gaussians(value)?,
                    _ => *confinement = parse_confinement(value)?,
                },
                _ => return Err(format!("`{key}` requires `potential = custom`")),
            },
            "sim.beta" => self.sim.beta = parse(value)?,
            "sim.dt" => self.sim.dt = parse(value)?,
            "sim.steps" => self.sim.steps = parse(value)?,
            "sim.n_particles" => self.sim.n_particles = parse(value)?,
            "sim.seed" => self.sim.seed = parse(value)?,
            "sim.mode" => self.sim.mode = value.parse().map_err(|e: abf_core::Error| e.to_string())?,
            "init.kind" => self.init.kind = value.parse()?,
            "init.center" => self.init.center = parse_list(value)?,
            "init.sigma" => self.init.sigma = parse(value)?,
            "kernel.alpha" => self.kernel.alpha = parse(value)?,
            "kernel.epsilon" => self.kernel.epsilon = parse(value)?,
            "reference.y_max" => self.reference.y_max = parse(value)?,
            "reference.n_quad" => self.reference.n_quad = parse(value)?,
            "grid.points" => self.run.grid_points = parse(value)?,
            "run.seeds" => self.run.seeds = parse(value)?,
            "run.checkpoints" => self.run.checkpoints = parse_list(value)?,
            "wells.radius" => self.run.well_radius = parse(value)?,
            "sweep.n_values" => self.sweep.n_values = parse_list(value)?,
            "sweep.eps_values" => self.sweep.eps_values = parse_list(value)?,
            "pde.m1" => self.pde.m1 = parse(value)?,
            "pde.m2" => self.pde.m2 = parse(value)?,
            "pde.y_max" => self.pde.y_max = parse(value)?,
            "pde.times" => self.pde.times = parse_list(value)?,
            "pde.bins" => self.pde.bins = parse(value)?,
            "demo.sample_from" => self.demo.sample_from = parse(value)?,
            "demo.sample_every" => self.demo.sample_every = parse(value)?,
            "output.dir" => self.output_dir = Some(value.to_string()),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Sets the step count, dropping checkpoints beyond it.
    pub fn truncate(&mut self, steps: u64) {
        self.sim.steps = steps;
        self.run.checkpoints.retain(|&c| c <= steps);
    }

    /// Applies a `key=value` override given on the command line.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, value) = split_assignment(assignment).ok_or_else(|| CliError::Override {
            assignment: assignment.to_string(),
            message: "expected key=value".into(),
        })?;
        let fail = |message: String| CliError::Override {
            assignment: assignment.to_string(),
            message,
        };
        self.set(key, value).map_err(fail)?;
        self.validate().map_err(|(_, m)| fail(m))
    }
}

fn split_assignment(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once('=')?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() {
        None
    } else {
        Some((k, v))
    }
}

fn parse<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| format!("invalid value `{value}`: {e}"))
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>, String>
where
    T::Err: Display,
{
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(parse).collect()
}

fn join<T: Display>(values: &[T]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// `amplitude:c1,c2,...:width` terms separated by `;`.
fn parse_gaussians(value: &str) -> Result<Vec<GaussianTerm>, String> {
    terms(value)
        .map(|t| {
            let parts: Vec<&str> = t.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("gaussian term `{t}` must be amplitude:center:width"));
            }
            Ok(GaussianTerm {
                amplitude: parse(parts[0])?,
                center: parse_list(parts[1])?,
                width: parse(parts[2])?,
            })
        })
        .collect()
}

fn format_gaussians(gaussians: &[GaussianTerm]) -> String {
    gaussians
        .iter()
        .map(|g| format!("{}:{}:{}", g.amplitude, join(&g.center), g.width))
        .collect::<Vec<_>>()
        .join("; ")
}

/// `axis:center:coefficient:power` terms separated by `;`.
fn parse_confinement(value: &str) -> Result<Vec<ConfinementTerm>, String> {
    terms(value)
        .map(|t| {
            let parts: Vec<&str> = t.split(':').collect();
            if parts.len() != 4 {
                return Err(format!("confinement term `{t}` must be axis:center:coefficient:power"));
            }
            Ok(ConfinementTerm {
                axis: parse(parts[0])?,
                center: parse(parts[1])?,
                coefficient: parse(parts[2])?,
                power: parse(parts[3])?,
            })
        })
        .collect()
}

fn format_confinement(terms: &[ConfinementTerm]) -> String {
    terms
        .iter()
        .map(|c| format!("{}:{}:{}:{}", c.axis, c.center, c.coefficient, c.power))
        .collect::<Vec<_>>()
        .join("; ")
}

fn terms(value: &str) -> impl Iterator<Item = &str> {
    value.split(';').map(str::trim).filter(|t| !t.is_empty())
}

/// Parses config text; `source` names it in error messages.
pub fn parse_str(text: &str, source: &str) -> Result<ExperimentConfig, CliError> {
    let err = |line: usize, message: String| CliError::Parse {
        origin: source.to_string(),
        line,
        message,
    };
    let mut entries: Vec<(usize, &str, &str)> = Vec::new();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) =
            split_assignment(line).ok_or_else(|| err(i + 1, format!("expected `key = value`, got `{line}`")))?;
        if let Some(first) = seen.insert(key, i + 1) {
            return Err(err(i + 1, format!("duplicate key `{key}` (first set on line {first})")));
        }
        entries.push((i + 1, key, value));
    }

    let (exp_line, _, name) = entries
        .iter()
        .find(|e| e.1 == "experiment")
        .ok_or_else(|| err(0, "missing `experiment = <preset>`".into()))?;
    let preset: Preset = name.parse().map_err(|e: CliError| err(*exp_line, e.to_string()))?;
    let mut config = ExperimentConfig::preset(preset);

    // the potential decides which potential.* keys are valid, so it goes first
    entries.sort_by_key(|e| match e.1 {
        "experiment" => 0,
        "potential" => 1,
        _ => 2,
    });
    for (line, key, value) in &entries {
        config.set(key, value).map_err(|m| err(*line, m))?;
    }
    config.validate().map_err(|(key, message)| {
        let line = seen
            .iter()
            .filter(|(k, _)| **k == key || k.starts_with(&format!("{key}.")))
            .map(|(_, &l)| l)
            .min()
            .unwrap_or(0);
        err(line, format!("{key}: {message}"))
    })?;
    Ok(config)
}

/// Reads and parses a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        context: format!("reading {}", path.display()),
        source,
    })?;
    parse_str(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gives_preset_defaults() {
        let c = parse_str("experiment = v1-abf\n", "t").unwrap();
        assert_eq!(c, ExperimentConfig::preset(Preset::V1Abf));
    }

    #[test]
    fn every_preset_round_trips_and_validates() {
        for p in Preset::ALL {
            let c = ExperimentConfig::preset(p);
            assert_eq!(c.validate(), Ok(()), "{}", p.name());
            assert_eq!(parse_str(&c.serialize(), "t").unwrap(), c, "{}", p.name());
        }
    }

    #[test]
    fn wide_bandwidth_is_rejected_with_its_line() {
        let e = parse_str("experiment = v1-abf\n\nkernel.epsilon = 3\n", "cfg").unwrap_err();
        match e {
            CliError::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("kernel.epsilon"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        let unknown = parse_str("experiment = v1-abf\nsim.bogus = 1\n", "t").unwrap_err();
        assert!(matches!(unknown, CliError::Parse { line: 2, .. }));
        let dup = parse_str("experiment = v1-abf\nsim.dt = 0.1\nsim.dt = 0.2\n", "t").unwrap_err();
        assert!(matches!(dup, CliError::Parse { line: 3, .. }));
        let missing = parse_str("sim.dt = 0.1\n", "t").unwrap_err();
        assert!(matches!(missing, CliError::Parse { .. }));
        let garbage = parse_str("experiment = v1-abf\nno equals sign\n", "t").unwrap_err();
        assert!(matches!(garbage, CliError::Parse { line: 2, .. }));
    }

    #[test]
    fn custom_potential_keys() {
        let text = "experiment = v1-abf\npotential.gaussians = 5:0,0:1; -5:1,0:1\npotential = custom\npotential.confinement = 0:0:0.2:4; 1:0:0.2:4\n";
        let c = parse_str(text, "t").unwrap();
        let PotentialChoice::Custom {
            gaussians, confinement, ..
        } = &c.potential
        else {
            panic!("not custom");
        };
        assert_eq!(gaussians.len(), 2);
        assert_eq!(gaussians[1].center, vec![1.0, 0.0]);
        assert_eq!(confinement[1].power, 4);
        assert_eq!(parse_str(&c.serialize(), "t").unwrap(), c);

        let bad = parse_str("experiment = v1-abf\npotential.gaussians = 1:0:1\n", "t").unwrap_err();
        assert!(matches!(bad, CliError::Parse { line: 2, .. }));
    }

    #[test]
    fn overrides_apply_and_validate() {
        let mut c = ExperimentConfig::preset(Preset::V1Abf);
        c.apply_override("sim.steps=0").unwrap();
        assert_eq!(c.sim.steps, 0);
        assert!(c.apply_override("kernel.epsilon=2").is_err());
        assert!(c.apply_override("nonsense").is_err());
    }

    #[test]
    fn seeds_are_consecutive() {
        let mut c = ExperimentConfig::preset(Preset::SweepN);
        c.sim.seed = 10;
        assert_eq!(c.seeds(), (10..18).collect::<Vec<_>>());
    }
}
