//! Nadaraya-Watson estimation of `E[dV/dx1 | x1 = z]` from particle samples.
//!
//! Estimate at `z`:
//!
//! ```text
//!   sum_m phi(z - x_m) f_m / sum_m phi(z - x_m),    phi = alpha + psi_eps
//! ```
//!
//! The `alpha` part of both sums is a global constant (`alpha * sum f` and
//! `alpha * N`), so only the compactly supported `psi_eps` part needs a
//! neighbourhood search. [`BinnedEstimator`] sorts samples into bins at least
//! `eps` wide and visits the bins overlapping `[z - eps, z + eps]`, which gives
//! the exact same sums as the full double loop.

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::potential::wrap_unchecked;
use crate::profile::{Grid, MeanForceProfile, ProfileKind};

/// Smallest bin width as a fraction of the period.
const MIN_BINS_PER_PERIOD: f64 = 1024.0;

/// One evaluation of the estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// No kernel mass at the query point (only possible with `alpha = 0`);
    /// `value` is then 0.
    pub empty: bool,
}

impl Estimate {
    fn from_sums(num: f64, den: f64) -> Self {
        if den > 0.0 {
            Self {
                value: num / den,
                empty: false,
            }
        } else {
            Self {
                value: 0.0,
                empty: true,
            }
        }
    }
}

fn check_samples(x1: &[f64], values: &[f64]) -> Result<()> {
    if x1.is_empty() {
        return Err(Error::Usage("estimator needs at least one particle".into()));
    }
    if x1.len() != values.len() {
        return Err(Error::Usage(format!(
            "{} positions but {} force values",
            x1.len(),
            values.len()
        )));
    }
    Ok(())
}

/// Direct `O(N)` evaluation at one point.
pub fn nw_estimate(z: f64, x1: &[f64], values: &[f64], spec: &KernelSpec) -> Result<Estimate> {
    check_samples(x1, values)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, &f) in x1.iter().zip(values) {
        let w = spec.phi(z - x);
        num += w * f;
        den += w;
    }
    Ok(Estimate::from_sums(num, den))
}

/// Samples bucketed by first coordinate for `O(N eps / L)` queries.
#[derive(Debug, Clone)]
pub struct BinnedEstimator {
    spec: KernelSpec,
    width: f64,
    /// `starts[b]..starts[b + 1]` indexes bin `b` in `xs`/`fs`.
    starts: Vec<usize>,
    xs: Vec<f64>,
    fs: Vec<f64>,
    /// Original sample index of each sorted slot.
    index: Vec<usize>,
    reach: usize,
    alpha_num: f64,
    alpha_den: f64,
}

impl BinnedEstimator {
    pub fn new(x1: &[f64], values: &[f64], spec: &KernelSpec) -> Result<Self> {
        check_samples(x1, values)?;
        let period = spec.period();
        let min_width = period / MIN_BINS_PER_PERIOD;
        let nbins = ((period / spec.epsilon().max(min_width)).floor() as usize).max(1);
        let width = period / nbins as f64;
        let reach = (spec.epsilon() / width).ceil() as usize;

        // stable counting sort: in-bin order is the particle index order
        let bin_of: Vec<usize> = x1.iter().map(|&x| bin_index(x, period, width, nbins)).collect();
        let mut starts = vec![0usize; nbins + 1];
        for &b in &bin_of {
            starts[b + 1] += 1;
        }
        for b in 0..nbins {
            starts[b + 1] += starts[b];
        }
        let mut fill = starts.clone();
        let mut xs = vec![0.0; x1.len()];
        let mut fs = vec![0.0; x1.len()];
        let mut index = vec![0; x1.len()];
        for (i, &b) in bin_of.iter().enumerate() {
            xs[fill[b]] = wrap_unchecked(x1[i], period);
            fs[fill[b]] = values[i];
            index[fill[b]] = i;
            fill[b] += 1;
        }

        let alpha = spec.alpha();
        Ok(Self {
            spec: *spec,
            width,
            starts,
            xs,
            fs,
            index,
            reach,
            alpha_num: alpha * values.iter().sum::<f64>(),
            alpha_den: alpha * x1.len() as f64,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn bin_width(&self) -> f64 {
        self.width
    }

    pub fn estimate(&self, z: f64) -> Estimate {
        let period = self.spec.period();
        let nbins = self.n_bins();
        let z = wrap_unchecked(z, period);
        let mut num = self.alpha_num;
        let mut den = self.alpha_den;
        let mut visit = |b: usize| {
            for k in self.starts[b]..self.starts[b + 1] {
                let w = self.spec.psi_wrapped(wrap_difference(z - self.xs[k], period));
                num += w * self.fs[k];
                den += w;
            }
        };
        if self.visits_all_bins() {
            (0..nbins).for_each(&mut visit);
        } else {
            let center = bin_index(z, period, self.width, nbins);
            for off in 0..=2 * self.reach {
                visit((center + nbins + off - self.reach) % nbins);
            }
        }
        Estimate::from_sums(num, den)
    }

    fn visits_all_bins(&self) -> bool {
        2 * self.reach + 1 >= self.n_bins()
    }

    /// Estimates at every sample's own position, in the original sample order.
    ///
    /// Same sums as calling [`Self::estimate`] at each sample, but each pair
    /// of samples is visited once and its kernel weight shared.
    pub fn at_samples(&self) -> Vec<Estimate> {
        let n = self.xs.len();
        let period = self.spec.period();
        let self_weight = self.spec.psi_wrapped(0.0);
        let mut num: Vec<f64> = self.fs.iter().map(|f| self.alpha_num + self_weight * f).collect();
        let mut den = vec![self.alpha_den + self_weight; n];

        let mut pair = |i: usize, j: usize| {
            let w = self.spec.psi_wrapped(wrap_difference(self.xs[i] - self.xs[j], period));
            if w > 0.0 {
                num[i] += w * self.fs[j];
                num[j] += w * self.fs[i];
                den[i] += w;
                den[j] += w;
            }
        };
        if self.visits_all_bins() {
            for i in 0..n {
                for j in i + 1..n {
                    pair(i, j);
                }
            }
        } else {
            let nbins = self.n_bins();
            for b in 0..nbins {
                let own = self.starts[b]..self.starts[b + 1];
                for i in own.clone() {
                    for j in i + 1..own.end {
                        pair(i, j);
                    }
                }
                for off in 1..=self.reach {
                    let c = (b + off) % nbins;
                    for i in own.clone() {
                        for j in self.starts[c]..self.starts[c + 1] {
                            pair(i, j);
                        }
                    }
                }
            }
        }

        let mut out = vec![
            Estimate {
                value: 0.0,
                empty: true
            };
            n
        ];
        for k in 0..n {
            out[self.index[k]] = Estimate::from_sums(num[k], den[k]);
        }
        out
    }

    /// Estimator evaluated on every node of `grid`; empty nodes read 0.
    pub fn profile(&self, grid: &Grid) -> MeanForceProfile {
        let (values, empty) = self.raw_profile(grid);
        let count = empty.iter().filter(|&&e| e).count();
        MeanForceProfile {
            grid: *grid,
            values,
            kind: ProfileKind::ParticleEstimate,
            empty_nodes: count,
        }
    }

    /// Like [`Self::profile`], but empty nodes take the periodic linear
    /// interpolation of the nearest non-empty nodes on either side.
    /// `empty_nodes` still counts them. If every node is empty the profile is 0.
    pub fn filled_profile(&self, grid: &Grid) -> MeanForceProfile {
        let (mut values, empty) = self.raw_profile(grid);
        let count = empty.iter().filter(|&&e| e).count();
        fill_periodic(&mut values, &empty);
        MeanForceProfile {
            grid: *grid,
            values,
            kind: ProfileKind::ParticleEstimate,
            empty_nodes: count,
        }
    }

    fn raw_profile(&self, grid: &Grid) -> (Vec<f64>, Vec<bool>) {
        grid.nodes()
            .map(|z| {
                let e = self.estimate(z);
                (e.value, e.empty)
            })
            .unzip()
    }
}

/// Replaces flagged entries of a periodic sequence by linear interpolation
/// between the closest unflagged neighbours.
fn fill_periodic(values: &mut [f64], empty: &[bool]) {
    let m = values.len();
    let known: Vec<usize> = (0..m).filter(|&i| !empty[i]).collect();
    if known.is_empty() || known.len() == m {
        return;
    }
    for (k, &left) in known.iter().enumerate() {
        let right = known[(k + 1) % known.len()];
        // gap length in nodes, going forward from left to right around the circle
        let gap = (right + m - left) % m;
        let gap = if gap == 0 { m } else { gap };
        let (a, b) = (values[left], values[right]);
        for s in 1..gap {
            let t = s as f64 / gap as f64;
            values[(left + s) % m] = a + t * (b - a);
        }
    }
}

/// Reduces a difference of two canonical representatives, which lies in
/// `(-L, L)`, to `[-L/2, L/2)`.
#[inline]
fn wrap_difference(d: f64, period: f64) -> f64 {
    let half = 0.5 * period;
    if d >= half {
        d - period
    } else if d < -half {
        d + period
    } else {
        d
    }
}

#[inline]
fn bin_index(x: f64, period: f64, width: f64, nbins: usize) -> usize {
    let w = wrap_unchecked(x, period);
    (((w + 0.5 * period) / width) as usize).min(nbins - 1)
}

/// Binned estimator profile on `grid`.
pub fn nw_profile(x1: &[f64], values: &[f64], spec: &KernelSpec, grid: &Grid) -> Result<MeanForceProfile> {
    if (grid.period() - spec.period()).abs() > 1e-12 * spec.period() {
        return Err(Error::Usage(format!(
            "grid period {} differs from kernel period {}",
            grid.period(),
            spec.period()
        )));
    }
    Ok(BinnedEstimator::new(x1, values, spec)?.profile(grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_particle_returns_its_own_force() {
        let spec = KernelSpec::new(0.2, 0.05, 4.0).unwrap();
        for z in [-1.9, -0.3, 0.0, 1.234] {
            let e = nw_estimate(z, &[0.7], &[3.25], &spec).unwrap();
            assert_eq!(e.value, 3.25);
            let b = BinnedEstimator::new(&[0.7], &[3.25], &spec).unwrap();
            assert_eq!(b.estimate(z).value, 3.25);
        }
    }

    #[test]
    fn coincident_particles_give_plain_mean() {
        let spec = KernelSpec::new(0.0, 0.01, 4.0).unwrap();
        let xs = [0.4; 5];
        let fs = [1.0, 2.0, 3.0, 4.0, 10.0];
        let e = nw_estimate(0.4, &xs, &fs, &spec).unwrap();
        assert!((e.value - 4.0).abs() < 1e-14);
        assert!(!e.empty);
    }

    #[test]
    fn far_query_with_alpha_gives_plain_mean() {
        let spec = KernelSpec::new(0.5, 0.01, 4.0).unwrap();
        let xs = [0.0, 0.1, 0.2];
        let fs = [1.0, -2.0, 7.0];
        let e = nw_estimate(1.5, &xs, &fs, &spec).unwrap();
        assert!((e.value - 2.0).abs() < 1e-14);
        let b = BinnedEstimator::new(&xs, &fs, &spec).unwrap();
        assert!((b.estimate(1.5).value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn empty_window_falls_back_to_zero() {
        let spec = KernelSpec::new(0.0, 0.01, 4.0).unwrap();
        let e = nw_estimate(1.0, &[0.0], &[5.0], &spec).unwrap();
        assert_eq!(
            e,
            Estimate {
                value: 0.0,
                empty: true
            }
        );
        let grid = Grid::new(4.0, 100).unwrap();
        let p = nw_profile(&[0.0], &[5.0], &spec, &grid).unwrap();
        assert!(p.empty_nodes >= 98);
    }

    #[test]
    fn empty_ensemble_is_usage_error() {
        let spec = KernelSpec::new(0.0, 0.01, 4.0).unwrap();
        assert!(matches!(nw_estimate(0.0, &[], &[], &spec), Err(Error::Usage(_))));
        assert!(BinnedEstimator::new(&[], &[], &spec).is_err());
        assert!(BinnedEstimator::new(&[0.0], &[], &spec).is_err());
    }

    #[test]
    fn bin_layout() {
        let spec = KernelSpec::new(0.0, 0.01, 4.0).unwrap();
        let b = BinnedEstimator::new(&[0.0], &[0.0], &spec).unwrap();
        assert_eq!(b.n_bins(), 400);
        assert!(b.bin_width() >= 0.01);
        let tiny = KernelSpec::new(0.0, 1e-4, 4.0).unwrap();
        let b = BinnedEstimator::new(&[0.0], &[0.0], &tiny).unwrap();
        assert_eq!(b.n_bins(), 1024);
        let wide = KernelSpec::new(0.0, 1.5, 4.0).unwrap();
        let b = BinnedEstimator::new(&[0.0], &[0.0], &wide).unwrap();
        assert_eq!(b.n_bins(), 2);
    }

    #[test]
    fn constant_force_gives_constant_profile() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..500).map(|_| rng.random_range(-2.0..2.0)).collect();
        let fs = vec![7.0; xs.len()];
        let spec = KernelSpec::new(0.0, 0.1, 4.0).unwrap();
        let p = nw_profile(&xs, &fs, &spec, &Grid::new(4.0, 64).unwrap()).unwrap();
        for (v, z) in p.values.iter().zip(p.grid.nodes()) {
            let e = nw_estimate(z, &xs, &fs, &spec).unwrap();
            if e.empty {
                assert_eq!(*v, 0.0);
            } else {
                assert!((v - 7.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fill_interpolates_across_the_seam() {
        let mut v = vec![0.0, 2.0, 0.0, 0.0, 8.0, 0.0];
        let empty = [true, false, true, true, false, true];
        fill_periodic(&mut v, &empty);
        assert_eq!(v, vec![4.0, 2.0, 4.0, 6.0, 8.0, 6.0]);

        let mut one = vec![0.0, 3.0, 0.0];
        fill_periodic(&mut one, &[true, false, true]);
        assert_eq!(one, vec![3.0, 3.0, 3.0]);
    }

    #[test]
    fn filled_profile_keeps_empty_count() {
        let spec = KernelSpec::new(0.0, 0.05, 4.0).unwrap();
        let est = BinnedEstimator::new(&[-1.25, 1.25], &[1.0, 3.0], &spec).unwrap();
        let grid = Grid::new(4.0, 8).unwrap();
        let raw = est.profile(&grid);
        let filled = est.filled_profile(&grid);
        assert_eq!(raw.empty_nodes, filled.empty_nodes);
        assert!(raw.empty_nodes > 0);
        assert!(filled.values.iter().all(|v| (1.0..=3.0).contains(v)));
    }
}
