//! Pseudospectral evolution on a periodic box [−L, L)^n, n ∈ {1, 2}.

mod data;
mod field;
mod grid;
mod linear;
mod nonlinear;
mod norms;
mod semilinear;
mod trajectory;

use thiserror::Error;

use crate::kernel::KernelError;
use crate::ode::OdeError;

pub use data::{make_initial_data, read_field, write_field, DataSpec};
pub use field::Field;
pub use grid::{points_for, Grid, GridSpec, BOX_FACTOR, MIN_NYQUIST, MIN_POINTS};
pub use linear::{linear_evolve, linear_trajectory, multipliers};
pub use nonlinear::nonlinearity;
pub use norms::{hdot_norm, l2_spectral, lq_norm, norms, NormSet};
pub use semilinear::{semilinear_solve, Controls, Scheme};
pub use trajectory::{Snapshot, Status, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("grid: {0}")]
    Grid(String),
    #[error("array has {got} entries, grid needs {expected}")]
    Length { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Io(String),
    #[error("ingestion: {0}")]
    Ingest(String),
    #[error("kernel failed at mode {mode} (|xi| = {xi}): {source}")]
    Kernel {
        mode: usize,
        xi: f64,
        #[source]
        source: KernelError,
    },
    /// |u|^p overflowed or the field already held a non-finite value.
    #[error("nonlinearity produced a non-finite value")]
    Overflow,
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// Output times `t_m = (1+T)^{m/M} − 1`, m = 0..=M, equi-spaced in log(1+t).
pub fn time_grid(t_final: f64, m: usize) -> Vec<f64> {
    if t_final <= 0.0 || m == 0 {
        return vec![0.0];
    }
    let l = (1.0 + t_final).ln();
    let mut t: Vec<f64> = (0..=m).map(|i| (l * i as f64 / m as f64).exp_m1()).collect();
    t[m] = t_final;
    t
}
