use abf_core::kernel::{bump, bump_normalization};
use abf_core::KernelSpec;

const EPSILONS: [f64; 4] = [0.2, 0.1, 0.05, 0.01];

/// Composite trapezoid rule; exponentially accurate for the bump, whose
/// derivatives all vanish at the ends of its support.
fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h)).sum();
    h * (0.5 * f(a) + inner + 0.5 * f(b))
}

fn raw_bump(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (-1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

#[test]
fn normalization_matches_independent_quadrature() {
    let c = 1.0 / trapezoid(raw_bump, -1.0, 1.0, 200_000);
    assert!((bump_normalization() - c).abs() < 1e-10 * c);
    assert!((c - 2.252283621).abs() < 1e-8);
    assert!((bump(0.0) - c * (-1.0f64).exp()).abs() < 1e-12);
}

#[test]
fn peak_value_at_small_bandwidth() {
    let k = KernelSpec::new(0.0, 0.01, 4.0).unwrap();
    assert!((k.psi(0.0) - 82.856).abs() < 1e-3, "{}", k.psi(0.0));
}

#[test]
fn unit_mass_over_one_period() {
    for eps in EPSILONS {
        let k = KernelSpec::new(0.0, eps, 4.0).unwrap();
        let mass = trapezoid(|x| k.psi(x), -2.0, 2.0, 400_000);
        assert!((mass - 1.0).abs() < 1e-8, "eps = {eps}: {mass}");
    }
}

#[test]
fn height_and_slope_bounds() {
    let c = bump_normalization();
    let mut slope_scaled = Vec::new();
    for eps in EPSILONS {
        let k = KernelSpec::new(0.0, eps, 4.0).unwrap();
        let bound = c * (-1.0f64).exp() / eps;
        let n = 20_000;
        let dx = 2.0 * eps / n as f64;
        let h = 1e-4 * eps;
        let mut max_slope = 0.0f64;
        for i in 0..=n {
            let x = -eps + i as f64 * dx;
            // one rounding of slack between c e^-1 / eps and c / eps * e^-1
            assert!(k.psi(x) <= bound * (1.0 + 1e-15), "eps = {eps}, x = {x}");
            max_slope = max_slope.max(((k.psi(x + h) - k.psi(x - h)) / (2.0 * h)).abs());
        }
        slope_scaled.push(max_slope * eps * eps);
    }
    let lo = slope_scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = slope_scaled.iter().copied().fold(0.0, f64::max);
    assert!(hi / lo <= 1.2, "{slope_scaled:?}");
}

#[test]
fn bump_is_even_and_supported_on_unit_interval() {
    for i in 0..=300 {
        let u = -1.5 + 0.01 * i as f64;
        assert_eq!(bump(u), bump(-u));
        if u.abs() >= 1.0 {
            assert_eq!(bump(u), 0.0);
        }
    }
}
