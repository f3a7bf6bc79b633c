//! CSV and text files of a finished run.
//!
//! Every CSV opens with a `# abf-csv v1 <schema>` comment line naming its
//! schema, followed by a column header.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use abf_core::pde::GridDensity;
use abf_core::{MeanForceProfile, ParticleEnsemble};

use crate::error::{io_error, CliError};
use crate::experiment::{MarginalSnapshot, Outcome, Reference, Report};

pub const CSV_VERSION: &str = "abf-csv v1";

fn csv(schema: &str, header: &str) -> String {
    format!("# {CSV_VERSION} {schema}\n{header}\n")
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(io_error(format!("writing {}", path.display())))
}

fn create(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_error(format!("creating {}", dir.display())))
}

/// `step,time,particle,x1,x2,...` rows for every particle.
pub fn particles_csv(ens: &ParticleEnsemble) -> String {
    let cols: Vec<String> = (1..=ens.dimension()).map(|k| format!("x{k}")).collect();
    let mut s = csv("particles", &format!("step,time,particle,{}", cols.join(",")));
    for n in 0..ens.len() {
        let _ = write!(s, "{},{},{}", ens.steps(), ens.time(), n);
        for x in ens.particle(n) {
            let _ = write!(s, ",{x}");
        }
        s.push('\n');
    }
    s
}

/// `z,A,Aprime` on the evaluation grid.
pub fn reference_csv(reference: &Reference) -> String {
    let mut s = csv("reference", "z,A,Aprime");
    let p = &reference.mean_force;
    for (i, z) in p.grid.nodes().enumerate() {
        let _ = writeln!(s, "{z},{},{}", reference.free_energy[i], p.values[i]);
    }
    s
}

fn force_profile_csv(estimate: &MeanForceProfile, exact: Option<&MeanForceProfile>) -> String {
    let mut s = csv("force_profile", "z,estimate,reference");
    for (i, z) in estimate.grid.nodes().enumerate() {
        let r = exact.map_or(f64::NAN, |e| e.values[i]);
        let _ = writeln!(s, "{z},{},{r}", estimate.values[i]);
    }
    s
}

/// `x1,x2,p` at cell centers.
pub fn density_csv(rho: &GridDensity) -> String {
    let mut s = csv("density", "x1,x2,p");
    for i in 0..rho.m1() {
        for j in 0..rho.m2() {
            let _ = writeln!(s, "{},{},{}", rho.x1(i), rho.x2(j), rho.value(i, j));
        }
    }
    s
}

fn marginals_csv(snaps: &[MarginalSnapshot], period: f64) -> String {
    let mut s = csv("marginals", "time,x1,computed,heat");
    for m in snaps {
        let h = period / m.computed.len() as f64;
        for (i, (c, e)) in m.computed.iter().zip(&m.heat).enumerate() {
            let _ = writeln!(s, "{},{},{c},{e}", m.time, -0.5 * period + (i as f64 + 0.5) * h);
        }
    }
    s
}

/// Writes the config echo, summary and every CSV of `report` under `dir`.
pub fn write_report(report: &Report, dir: &Path) -> Result<(), CliError> {
    create(dir)?;
    write(dir, "config.txt", &report.config.serialize())?;
    let summary: String = report.summary().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    write(dir, "summary.txt", &summary)?;
    let exact = report.reference.as_ref().map(|r| &r.mean_force);
    if let Some(r) = &report.reference {
        write(dir, "reference.csv", &reference_csv(r))?;
    }
    match &report.outcome {
        Outcome::Accuracy(runs) => {
            let mut errors = csv("errors", "seed,step,l1_error");
            for r in runs {
                for (step, e) in &r.checkpoints {
                    let _ = writeln!(errors, "{},{step},{e}", r.seed);
                }
                let sub = dir.join(format!("seed-{}", r.seed));
                create(&sub)?;
                write(&sub, "force_profile.csv", &force_profile_csv(&r.profile, exact))?;
                write(&sub, "particles_final.csv", &particles_csv(&r.ensemble))?;
            }
            write(dir, "errors.csv", &errors)?;
        }
        Outcome::Metastability(runs) => {
            let mut table = csv("crossing", "seed,crossing_fraction,langevin_well_mass,abf_well_mass");
            for r in runs {
                let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
                let _ = writeln!(
                    table,
                    "{},{},{},{}",
                    r.seed,
                    r.crossing_fraction,
                    join(&r.langevin_well_mass),
                    join(&r.abf_well_mass)
                );
                let sub = dir.join(format!("seed-{}", r.seed));
                create(&sub)?;
                write(&sub, "particles_langevin.csv", &particles_csv(&r.langevin))?;
                write(&sub, "particles_abf.csv", &particles_csv(&r.abf))?;
            }
            write(dir, "crossing.csv", &table)?;
        }
        Outcome::Sweep(sweep) => {
            let seeds = report.config.seeds();
            let mut series = csv("series", "parameter,seed,l1_error");
            for row in &sweep.rows {
                for (seed, e) in seeds.iter().zip(&row.errors) {
                    let _ = writeln!(series, "{},{seed},{e}", row.parameter);
                }
            }
            write(dir, "series.csv", &series)?;
        }
        Outcome::BiasDemo(runs) => {
            let mut table = csv(
                "conditional_mean",
                "seed,z,zero_bandwidth,abf,zero_bandwidth_count,abf_count",
            );
            for r in runs {
                for (i, z) in r.abf.grid.nodes().enumerate() {
                    let v = |p: Option<f64>| p.map_or("nan".to_string(), |x| x.to_string());
                    let _ = writeln!(
                        table,
                        "{},{z},{},{},{},{}",
                        r.seed,
                        v(r.zero_bandwidth.values[i]),
                        v(r.abf.values[i]),
                        r.zero_bandwidth.counts[i],
                        r.abf.counts[i]
                    );
                }
                let sub = dir.join(format!("seed-{}", r.seed));
                create(&sub)?;
                write(&sub, "force_profile.csv", &force_profile_csv(&r.estimate, exact))?;
            }
            write(dir, "conditional_mean.csv", &table)?;
        }
        Outcome::CrossValidation(x) => {
            let period = x.final_density.period();
            for (seed, snaps) in &x.particles {
                let sub = dir.join(format!("seed-{seed}"));
                create(&sub)?;
                write(&sub, "marginals.csv", &marginals_csv(snaps, period))?;
            }
            write(dir, "pde_marginals.csv", &marginals_csv(&x.pde, period))?;
            write(dir, "density.csv", &density_csv(&x.final_density))?;
        }
    }
    Ok(())
}
