use rayon::prelude::*;

use super::field::Field;
use super::norms::norms;
use super::semilinear::Controls;
use super::trajectory::{Snapshot, Trajectory};
use super::{time_grid, SolverError};
use crate::kernel::{eval_psi, eval_psi_zero_mode, eval_psi_zero_mode_dt};
use crate::params::ModelParams;

/// (ψ, ∂_tψ)(t, s, |ξ|) for every distinct radius of the grid.
pub fn multipliers(
    radii: &[f64],
    t: f64,
    s: f64,
    params: &ModelParams,
) -> Result<Vec<(f64, f64)>, SolverError> {
    radii
        .par_iter()
        .enumerate()
        .map(|(mode, &xi)| {
            let wrap = |source| SolverError::Kernel { mode, xi, source };
            if xi == 0.0 {
                Ok((
                    eval_psi_zero_mode(t, s, params).map_err(wrap)?,
                    eval_psi_zero_mode_dt(t, s, params).map_err(wrap)?,
                ))
            } else {
                let a = eval_psi(t, s, xi, 0, 0, params).map_err(wrap)?;
                let b = eval_psi(t, s, xi, 0, 1, params).map_err(wrap)?;
                Ok((a.psi.re, b.psi.re))
            }
        })
        .collect()
}

/// Solution (u, u_t) at time t of the linear problem with u(s) = 0, u_t(s) = u₁.
pub fn linear_evolve(
    u1: &Field,
    t: f64,
    s: f64,
    params: &ModelParams,
) -> Result<(Field, Field), SolverError> {
    if !(s >= 0.0 && t >= s && t.is_finite()) {
        return Err(SolverError::Input(format!("need 0 ≤ s ≤ t (got s = {s}, t = {t})")));
    }
    let grid = u1.grid();
    let m = multipliers(grid.radii(), t, s, params)?;
    Ok(apply_multipliers(u1, &m))
}

pub(crate) fn apply_multipliers(u1: &Field, m: &[(f64, f64)]) -> (Field, Field) {
    let grid = u1.grid();
    let c = u1.spectral();
    let map = grid.mode_radius();
    let mut u = Vec::with_capacity(c.len());
    let mut ut = Vec::with_capacity(c.len());
    for (v, &r) in c.iter().zip(map) {
        let (a, b) = m[r as usize];
        u.push(a * v);
        ut.push(b * v);
    }
    (
        Field::from_spectral(grid.clone(), u).unwrap(),
        Field::from_spectral(grid.clone(), ut).unwrap(),
    )
}

/// Linear solution sampled on the geometric output grid of `controls`.
pub fn linear_trajectory(
    u1: &Field,
    t_final: f64,
    params: &ModelParams,
    controls: &Controls,
) -> Result<Trajectory, SolverError> {
    let times = time_grid(t_final, controls.m_steps);
    let mut traj = Trajectory::new(&controls.q_list, norms(u1, u1, params, &controls.q_list)?);
    for (m, &t) in times.iter().enumerate() {
        let (u, ut) = linear_evolve(u1, t, 0.0, params)?;
        traj.push(t, norms(&u, &ut, params, &controls.q_list)?, &u);
        if controls.snapshot_due(m) {
            traj.snapshots.push(Snapshot { time: t, u });
        }
    }
    Ok(traj)
}
