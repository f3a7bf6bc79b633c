use abf_core::{Potential, TorusConfiguration};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-5;

fn builtins() -> Vec<Potential> {
    vec![
        Potential::v1(),
        Potential::v2(),
        Potential::sine_quadratic(1.0).unwrap(),
    ]
}

fn central_difference(pot: &Potential, x: &[f64], axis: usize) -> f64 {
    let mut plus = x.to_vec();
    let mut minus = x.to_vec();
    plus[axis] += H;
    minus[axis] -= H;
    (pot.energy_at(&plus) - pot.energy_at(&minus)) / (2.0 * H)
}

// Wrapping x1 makes the quartic term non-smooth at +-L/2, so points near the
// seam are left out of the finite-difference comparison.
fn random_point(rng: &mut ChaCha8Rng, period: f64) -> [f64; 2] {
    let margin = 0.01 * period;
    [
        rng.random_range(-0.5 * period + margin..0.5 * period - margin),
        rng.random_range(-2.5..2.5),
    ]
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for pot in builtins() {
        let mut g = [0.0; 2];
        for _ in 0..1000 {
            let x = random_point(&mut rng, pot.period());
            pot.gradient_at(&x, &mut g);
            for axis in 0..2 {
                let fd = central_difference(&pot, &x, axis);
                assert!(
                    (g[axis] - fd).abs() <= 1e-5,
                    "{} at {x:?} axis {axis}: {} vs {fd}",
                    pot.name(),
                    g[axis]
                );
            }
        }
    }
}

#[test]
fn v1_gradient_at_fixed_point() {
    let pot = Potential::v1();
    let x = [0.3, -0.2];
    let mut g = [0.0; 2];
    pot.gradient_at(&x, &mut g);
    for axis in 0..2 {
        assert!((g[axis] - central_difference(&pot, &x, axis)).abs() < 1e-6);
    }
}

#[test]
fn energy_and_gradient_are_periodic() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for pot in builtins() {
        let l = pot.period();
        for _ in 0..500 {
            let x1 = rng.random_range(-0.5 * l..0.5 * l);
            let y = rng.random_range(-2.5..2.5);
            let k = rng.random_range(-3i32..=3) as f64;
            let a = TorusConfiguration::new(x1, vec![y], l).unwrap();
            let b = TorusConfiguration::new(x1 + k * l, vec![y], l).unwrap();
            assert!((pot.energy(&a).unwrap() - pot.energy(&b).unwrap()).abs() <= 1e-12);
            let (ga, gb) = (pot.gradient(&a).unwrap(), pot.gradient(&b).unwrap());
            for (u, v) in ga.iter().zip(&gb) {
                assert!((u - v).abs() <= 1e-12, "{} at {x1} + {k}L", pot.name());
            }
        }
    }
}

#[test]
fn two_well_potentials_have_no_x1_force_on_the_axis() {
    for pot in [Potential::v1(), Potential::v2()] {
        for i in 0..=60 {
            let y = -3.0 + 0.1 * i as f64;
            assert!(pot.d1_at(&[0.0, y]).abs() < 1e-14, "{} at y = {y}", pot.name());
        }
    }
}

#[test]
fn v1_gradient_vanishes_at_origin() {
    let g = Potential::v1()
        .gradient(&TorusConfiguration::new(0.0, vec![0.0], 4.0).unwrap())
        .unwrap();
    assert_eq!(g, vec![0.0, 0.0]);
}
