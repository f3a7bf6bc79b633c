use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid parameters or inconsistent geometry.
    #[error("configuration error: {0}")]
    Config(String),

    /// Caller violated a precondition (empty input, mismatched grids, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// Non-finite drift while advancing particle `particle`.
    #[error("step error: non-finite drift for particle {particle} at step {step}")]
    Step { particle: usize, step: u64 },

    /// Slice quadrature truncated too much mass at the box boundary.
    #[error("quadrature error at z = {z}: boundary integrand ratio {ratio:e} exceeds tolerance; increase y_max (currently {y_max})")]
    Quadrature { z: f64, ratio: f64, y_max: f64 },

    /// Time step outside the explicit stability region of the grid solver.
    #[error("unstable time step {dt:e}: stability bound requires dt <= {suggested:e}")]
    Unstable { dt: f64, suggested: f64 },

    /// A column of the density grid has zero regularized mass.
    #[error("singular density: zero regularized marginal at column {column}")]
    SingularDensity { column: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
