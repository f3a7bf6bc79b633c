//! Error norms, convergence-rate fits and sampling diagnostics.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::potential::wrap_unchecked;
use crate::profile::{Grid, MeanForceProfile};

/// Relative error decrease below which a series is considered saturated.
pub const SATURATION_THRESHOLD: f64 = 0.05;

/// `sum |f - g| L/M` over one period.
pub fn grid_l1(f: &MeanForceProfile, g: &MeanForceProfile) -> Result<f64> {
    if f.grid != g.grid {
        return Err(Error::Usage("profiles live on different grids".into()));
    }
    Ok(f.values.iter().zip(&g.values).map(|(a, b)| (a - b).abs()).sum::<f64>() * f.grid.spacing())
}

/// `max |f - g|` over the grid.
pub fn grid_sup(f: &MeanForceProfile, g: &MeanForceProfile) -> Result<f64> {
    if f.grid != g.grid {
        return Err(Error::Usage("profiles live on different grids".into()));
    }
    Ok(f.values
        .iter()
        .zip(&g.values)
        .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParameterKind {
    ParticleCount,
    Bandwidth,
}

/// Errors measured along a monotone sweep of one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSeries {
    pub kind: ParameterKind,
    pub points: Vec<(f64, f64)>,
}

impl ConvergenceSeries {
    pub fn new(kind: ParameterKind, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.iter().any(|&(p, _)| !(p > 0.0)) {
            return Err(Error::Usage("sweep parameters must be positive".into()));
        }
        let inc = points.windows(2).all(|w| w[1].0 > w[0].0);
        let dec = points.windows(2).all(|w| w[1].0 < w[0].0);
        if !(inc || dec) {
            return Err(Error::Usage("sweep parameters must be strictly monotone".into()));
        }
        Ok(Self { kind, points })
    }

    /// Longest prefix before the error stops improving by at least
    /// [`SATURATION_THRESHOLD`] between consecutive parameter values.
    /// Returns the whole series when fewer than three points would remain.
    pub fn unsaturated(&self) -> ConvergenceSeries {
        let mut keep = self.points.len();
        for (k, w) in self.points.windows(2).enumerate() {
            if w[1].1 > (1.0 - SATURATION_THRESHOLD) * w[0].1 {
                keep = k + 1;
                break;
            }
        }
        let keep = if keep < 3 { self.points.len() } else { keep };
        ConvergenceSeries {
            kind: self.kind,
            points: self.points[..keep].to_vec(),
        }
    }
}

/// Least-squares slope of `log(error)` against `log(parameter)`.
pub fn loglog_slope(series: &ConvergenceSeries) -> Result<f64> {
    let pts = &series.points;
    if pts.len() < 3 {
        return Err(Error::Usage(format!(
            "slope fit needs at least 3 points, got {}",
            pts.len()
        )));
    }
    if let Some(&(p, e)) = pts.iter().find(|&&(_, e)| !(e > 0.0)) {
        return Err(Error::Usage(format!("non-positive error {e} at parameter {p}")));
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Start and end points of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

fn torus_distance(a: &[f64], b: &[f64], period: f64) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| {
            let d = if i == 0 { wrap_unchecked(x - y, period) } else { x - y };
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn nearest(x: &[f64], wells: &[Vec<f64>], period: f64) -> (usize, f64) {
    wells
        .iter()
        .enumerate()
        .map(|(k, w)| (k, torus_distance(x, w, period)))
        .fold((0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
}

/// Fraction of trajectories whose endpoint is closest to a different well
/// than the one they started in.
pub fn well_crossing_fraction(
    trajectories: &[Trajectory],
    wells: &[Vec<f64>],
    radius: f64,
    period: f64,
) -> Result<f64> {
    if trajectories.is_empty() || wells.is_empty() {
        return Err(Error::Usage("need at least one trajectory and one well".into()));
    }
    let mut crossed = 0usize;
    for (n, t) in trajectories.iter().enumerate() {
        let (start_well, dist) = nearest(&t.start, wells, period);
        if dist > radius {
            return Err(Error::Usage(format!(
                "trajectory {n} starts at distance {dist} from the nearest well (radius {radius})"
            )));
        }
        if nearest(&t.end, wells, period).0 != start_well {
            crossed += 1;
        }
    }
    Ok(crossed as f64 / trajectories.len() as f64)
}

/// Fraction of `points` whose nearest well (torus distance) is each of `wells`.
pub fn well_occupation<P: AsRef<[f64]>>(points: &[P], wells: &[Vec<f64>], period: f64) -> Result<Vec<f64>> {
    if points.is_empty() || wells.is_empty() {
        return Err(Error::Usage("need at least one point and one well".into()));
    }
    let mut counts = vec![0usize; wells.len()];
    for p in points {
        counts[nearest(p.as_ref(), wells, period).0] += 1;
    }
    Ok(counts.iter().map(|&c| c as f64 / points.len() as f64).collect())
}

/// Binned estimate of `E[x2 | x1 = z]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalProfile {
    pub grid: Grid,
    /// `None` for bins without samples.
    pub values: Vec<Option<f64>>,
    pub counts: Vec<usize>,
}

impl ConditionalProfile {
    pub fn missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Least-squares fit of `a sin(2 pi z / L) + b cos(2 pi z / L) + c` over
    /// populated bins; returns `(a, b)`.
    pub fn first_harmonic(&self) -> (f64, f64) {
        let k = 2.0 * PI / self.grid.period();
        let rows: Vec<([f64; 3], f64)> = self
            .grid
            .nodes()
            .zip(&self.values)
            .filter_map(|(z, v)| v.map(|v| ([(k * z).sin(), (k * z).cos(), 1.0], v)))
            .collect();
        let mut ata = [[0.0; 3]; 3];
        let mut atb = [0.0; 3];
        for (r, v) in &rows {
            for i in 0..3 {
                atb[i] += r[i] * v;
                for j in 0..3 {
                    ata[i][j] += r[i] * r[j];
                }
            }
        }
        match solve3(ata, atb) {
            Some(s) => (s[0], s[1]),
            None => (0.0, 0.0),
        }
    }

    /// Magnitude of the first Fourier mode.
    pub fn first_harmonic_amplitude(&self) -> f64 {
        let (a, b) = self.first_harmonic();
        a.hypot(b)
    }
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Averages `x2` over the samples whose `x1` lies within `bandwidth / 2` of each node.
pub fn conditional_mean_profile(samples: &[(f64, f64)], grid: &Grid, bandwidth: f64) -> Result<ConditionalProfile> {
    if !(bandwidth > 0.0) {
        return Err(Error::Usage(format!("bandwidth must be positive, got {bandwidth}")));
    }
    let period = grid.period();
    let m = grid.len();
    let mut sums = vec![0.0; m];
    let mut counts = vec![0usize; m];
    let half = 0.5 * bandwidth;
    let h = grid.spacing();
    for &(x1, x2) in samples {
        let x = wrap_unchecked(x1, period);
        let reach = (half / h).ceil() as isize + 1;
        let mut add = |i: usize| {
            if wrap_unchecked(x - grid.node(i), period).abs() < half {
                sums[i] += x2;
                counts[i] += 1;
            }
        };
        if (2 * reach + 1) as usize >= m {
            (0..m).for_each(&mut add);
        } else {
            let center = ((x + 0.5 * period) / h - 0.5).round() as isize;
            for off in -reach..=reach {
                add((center + off).rem_euclid(m as isize) as usize);
            }
        }
    }
    let values = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { Some(s / c as f64) } else { None })
        .collect();
    Ok(ConditionalProfile {
        grid: *grid,
        values,
        counts,
    })
}

/// Histogram of wrapped `x1` as a density on `bins` equal cells over one period.
pub fn histogram_density(x1: &[f64], period: f64, bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    let w = period / bins as f64;
    for &x in x1 {
        let b = (((wrap_unchecked(x, period) + 0.5 * period) / w) as usize).min(bins - 1);
        h[b] += 1.0;
    }
    let norm = 1.0 / (x1.len() as f64 * w);
    h.iter_mut().for_each(|v| *v *= norm);
    h
}
