//! Functions of the reaction coordinate sampled on a regular periodic grid.

use crate::error::{Error, Result};

/// `m` cell-centered nodes `z_i = -L/2 + (i + 1/2) L/m` covering one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    period: f64,
    m: usize,
}

impl Grid {
    pub fn new(period: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Usage(format!("grid needs at least 2 nodes, got {m}")));
        }
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::Config(format!("period must be positive, got {period}")));
        }
        Ok(Self { period, m })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.m as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -0.5 * self.period + (i as f64 + 0.5) * self.spacing()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.m).map(|i| self.node(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Exact,
    ParticleEstimate,
    PdeEstimate,
}

/// Values of the mean force (or an estimate of it) on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeanForceProfile {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub kind: ProfileKind,
    /// Nodes where the estimator had no kernel mass and fell back to zero.
    pub empty_nodes: usize,
}

impl MeanForceProfile {
    pub fn new(grid: Grid, values: Vec<f64>, kind: ProfileKind) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Usage(format!(
                "profile has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            kind,
            empty_nodes: 0,
        })
    }

    /// Midpoint-rule integral over one period.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.spacing()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.spacing()
    }
}
