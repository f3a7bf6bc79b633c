use abf_cli::config::{InitKind, PotentialChoice};
use abf_cli::{parse_str, ExperimentConfig, Preset};
use abf_core::potential::{ConfinementTerm, GaussianTerm};
use abf_core::Mode;
use proptest::prelude::*;

fn preset() -> impl Strategy<Value = Preset> {
    prop::sample::select(Preset::ALL.to_vec())
}

fn potential() -> impl Strategy<Value = PotentialChoice> {
    let gaussian =
        (-10.0..10.0f64, prop::collection::vec(-2.0..2.0f64, 2), 0.1..3.0f64).prop_map(|(amplitude, center, width)| {
            GaussianTerm {
                amplitude,
                center,
                width,
            }
        });
    let confinement =
        (0usize..2, -1.0..1.0f64, 0.01..1.0f64, 1u32..6).prop_map(|(axis, center, coefficient, power)| {
            ConfinementTerm {
                axis,
                center,
                coefficient,
                power,
            }
        });
    prop_oneof![
        Just(PotentialChoice::V1),
        Just(PotentialChoice::V2),
        (
            prop::collection::vec(gaussian, 0..4),
            prop::collection::vec(confinement, 0..3)
        )
            .prop_map(|(gaussians, confinement)| {
                PotentialChoice::Custom {
                    dimension: 2,
                    period: 4.0,
                    gaussians,
                    confinement,
                }
            }),
    ]
}

prop_compose! {
    fn config()(
        preset in preset(),
        potential in potential(),
        beta in 0.1..50.0f64,
        dt in 1e-4..0.1f64,
        steps in 0u64..5_000_000,
        n in 1usize..100_000,
        seed in any::<u64>(),
        mode in prop::sample::select(vec![Mode::Abf, Mode::Langevin, Mode::ZeroBandwidth]),
        kind in prop::sample::select(vec![InitKind::Gaussian, InitKind::Uniform, InitKind::Cosine]),
        center in prop::collection::vec(-2.0..2.0f64, 2),
        sigma in 0.0..2.0f64,
        alpha in 0.0..1.0f64,
        epsilon in 1e-4..1.9f64,
        seeds in 1usize..20,
        checkpoint_fracs in prop::collection::vec(0.0..1.0f64, 0..4),
        n_values in prop::collection::vec(1usize..10_000, 1..6),
        eps_values in prop::collection::vec(1e-4..1.9f64, 0..6),
        times in prop::collection::vec(0.0..5.0f64, 0..4),
        out in prop::option::of("[a-z/]{1,12}"),
    ) -> ExperimentConfig {
        let mut c = ExperimentConfig::preset(preset);
        c.potential = potential;
        c.sim.beta = beta;
        c.sim.dt = dt;
        c.sim.steps = steps;
        c.sim.n_particles = n;
        c.sim.seed = seed;
        c.sim.mode = mode;
        c.init.kind = kind;
        c.init.center = center;
        c.init.sigma = sigma;
        c.kernel.alpha = alpha;
        c.kernel.epsilon = epsilon;
        c.run.seeds = seeds;
        c.run.checkpoints = checkpoint_fracs.iter().map(|f| (f * steps as f64) as u64).collect();
        c.sweep.n_values = n_values;
        c.sweep.eps_values = eps_values;
        c.pde.times = times;
        c.output_dir = out;
        c
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn serialized_config_parses_back_to_itself(c in config()) {
        prop_assert_eq!(c.validate(), Ok(()));
        let text = c.serialize();
        let parsed = parse_str(&text, "roundtrip").map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(parsed, c);
    }

    #[test]
    fn keys_may_appear_in_any_order(c in config(), rotate in 0usize..64) {
        let mut lines: Vec<String> = c.serialize().lines().map(String::from).collect();
        let k = rotate % lines.len();
        lines.rotate_left(k);
        let parsed = parse_str(&lines.join("\n"), "rotated").map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(parsed, c);
    }
}
