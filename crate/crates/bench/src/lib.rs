//! Shared fixtures for the benchmarks.

use abf_core::dynamics::sample_initial;
use abf_core::{InitialCondition, Mode, ParticleEnsemble, Potential, SimulationConfig};

/// `n` particles spread uniformly along the reaction coordinate of the two-well potential.
pub fn spread_ensemble(n: usize, seed: u64) -> (Potential, ParticleEnsemble, SimulationConfig) {
    let pot = Potential::v1();
    let config = SimulationConfig {
        beta: 10.0,
        dt: 0.01,
        n_steps: 1,
        n_particles: n,
        seed,
        mode: Mode::Abf,
        init: InitialCondition::Uniform {
            center_rest: vec![0.0],
            sigma: 0.3,
        },
    };
    let ens = sample_initial(&config, &pot).expect("valid fixture");
    (pot, ens, config)
}
