use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abf_cli::config::{PotentialChoice, Preset};
use abf_cli::experiment::{grid_marginals, Reference, Setup};
use abf_cli::output::{density_csv, reference_csv};
use abf_cli::{parse_config, run_experiment, write_report, CliError, ExperimentConfig};
use abf_core::reference::QuadratureSettings;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "abf", version, about = "Adaptive biasing force particle simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment preset and write its outputs.
    Run(RunArgs),
    /// Print the default configuration of a preset.
    Config { preset: String },
    /// List the presets.
    Presets,
    /// Tabulate the exact free energy and mean force.
    Reference {
        #[arg(long, default_value = "v1")]
        potential: String,
        #[arg(long, default_value_t = 10.0)]
        beta: f64,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, default_value_t = 6.0)]
        y_max: f64,
        #[arg(long, default_value_t = 200)]
        n_quad: usize,
        /// CSV file to write; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the regularized Fokker-Planck equation from a cosine initial law.
    Pde {
        #[arg(long, default_value = "v1")]
        potential: String,
        /// Cells per axis.
        #[arg(long, default_value_t = 128)]
        grid: usize,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 4.0)]
        y_max: f64,
        /// Directory for `density.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Preset name; optional when `--config` names one.
    preset: Option<String>,
    /// First seed; alone it selects a single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of consecutive seeds.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    n_values: Option<String>,
    #[arg(long)]
    eps_values: Option<String>,
    /// Output directory (default `out/<preset>`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Exit with status 4 when an acceptance threshold is missed.
    #[arg(long)]
    check: bool,
    /// `key=value` config overrides.
    overrides: Vec<String>,
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), preset) => {
            let cfg = parse_config(path)?;
            if let Some(name) = preset {
                let p: Preset = name.parse()?;
                if p != cfg.preset {
                    return Err(CliError::Override {
                        assignment: format!("experiment={name}"),
                        message: format!("{} names experiment `{}`", path.display(), cfg.preset.name()),
                    });
                }
            }
            cfg
        }
        (None, Some(name)) => ExperimentConfig::preset(name.parse()?),
        (None, None) => {
            return Err(CliError::Override {
                assignment: "experiment".into(),
                message: "give a preset name or --config FILE".into(),
            })
        }
    };
    if let Some(seed) = args.seed {
        cfg.apply_override(&format!("sim.seed={seed}"))?;
        if args.seeds.is_none() {
            cfg.apply_override("run.seeds=1")?;
        }
    }
    if let Some(k) = args.seeds {
        cfg.apply_override(&format!("run.seeds={k}"))?;
    }
    if let Some(steps) = args.steps {
        cfg.truncate(steps);
    }
    if let Some(v) = &args.n_values {
        cfg.apply_override(&format!("sweep.n_values={v}"))?;
    }
    if let Some(v) = &args.eps_values {
        cfg.apply_override(&format!("sweep.eps_values={v}"))?;
    }
    for o in &args.overrides {
        cfg.apply_override(o)?;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = Some(out.display().to_string());
    }
    Ok(cfg)
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let cfg = build_config(&args)?;
    let dir = cfg
        .output_dir
        .clone()
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new("out").join(cfg.preset.name()));
    let report = run_experiment(&cfg)?;
    write_report(&report, &dir)?;
    for (k, v) in report.summary() {
        println!("{k} = {v}");
    }
    println!("outputs written to {}", dir.display());
    if args.check {
        let mut failed = Vec::new();
        for (name, passed, detail) in report.checks() {
            println!("{} {name} ({detail})", if passed { "PASS" } else { "FAIL" });
            if !passed {
                failed.push(name);
            }
        }
        if !failed.is_empty() {
            return Err(CliError::Check(failed.join("; ")));
        }
    }
    Ok(())
}

fn write_or_print(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            context: format!("writing {}", path.display()),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn potential_choice(name: &str) -> Result<PotentialChoice, CliError> {
    PotentialChoice::from_name(name).map_err(|message| CliError::Override {
        assignment: format!("potential={name}"),
        message,
    })
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Config { preset } => {
            print!("{}", ExperimentConfig::preset(preset.parse()?).serialize());
            Ok(())
        }
        Command::Presets => {
            for p in Preset::ALL {
                println!("{:<12} {}", p.name(), p.description());
            }
            Ok(())
        }
        Command::Reference {
            potential,
            beta,
            grid,
            y_max,
            n_quad,
            out,
        } => {
            let mut cfg = ExperimentConfig::preset(Preset::V1Abf);
            cfg.potential = potential_choice(&potential)?;
            cfg.sim.beta = beta;
            cfg.run.grid_points = grid;
            cfg.reference = QuadratureSettings { y_max, n_quad };
            let setup = Setup::new(&cfg)?;
            let reference = Reference::compute(&cfg, &setup)?;
            write_or_print(&reference_csv(&reference), out.as_deref())
        }
        Command::Pde {
            potential,
            grid,
            beta,
            t,
            epsilon,
            alpha,
            y_max,
            out,
        } => {
            let mut cfg = ExperimentConfig::preset(Preset::PdeXval);
            cfg.potential = potential_choice(&potential)?;
            cfg.sim.beta = beta;
            cfg.kernel.epsilon = epsilon;
            cfg.kernel.alpha = alpha;
            cfg.pde.m1 = grid;
            cfg.pde.m2 = grid;
            cfg.pde.y_max = y_max;
            cfg.pde.times = vec![t];
            cfg.validate().map_err(|(key, message)| CliError::Override {
                assignment: key.into(),
                message,
            })?;
            let setup = Setup::new(&cfg)?;
            let (snaps, steps, rho) = grid_marginals(&cfg, &setup, &[t])?;
            println!("steps = {steps}");
            println!("mass = {}", rho.mass());
            println!("marginal_l1_vs_heat = {}", snaps[0].l1);
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
                        context: format!("creating {}", dir.display()),
                        source,
                    })?;
                    write_or_print(&density_csv(&rho), Some(&dir.join("density.csv")))
                }
                None => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
