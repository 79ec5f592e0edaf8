use std::collections::VecDeque;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::Field;
use super::grid::Grid;
use super::nonlinear::{nonlinearity, nonlinearity_with_max};
use super::norms::{norms, NormSet};
use super::trajectory::{Snapshot, Status, Trajectory};
use super::{time_grid, SolverError};
use crate::kernel::ModeFactors;
use crate::ode::{Dop853, OdeError, OdeOptions};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    DuhamelIteration,
    MethodOfLines,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Controls {
    /// Output intervals of the geometric time grid.
    pub m_steps: usize,
    /// Relative L² change between Picard sweeps that counts as converged.
    pub fp_tol: f64,
    pub max_iters: usize,
    /// Quadrature points solved together by one Picard iteration.
    pub window: usize,
    /// Fixed quadrature substeps per output interval; `None` picks them from
    /// the forcing spectrum.
    pub substeps: Option<usize>,
    pub max_substeps: usize,
    /// Target λ·Δs for the most oscillatory mode that carries forcing.
    pub phase_step: f64,
    pub rtol: f64,
    /// Absolute tolerance, relative to the largest data coefficient.
    pub atol: f64,
    /// Abort once ‖u‖∞ exceeds this multiple of ‖u₁‖∞.
    pub blowup_factor: f64,
    /// Keep the field at every k-th output time.
    pub snapshot_every: Option<usize>,
    /// Extra L^q exponents recorded alongside L¹, L², L^∞.
    pub q_list: Vec<f64>,
}

impl Default for Controls {
    fn default() -> Self {
        Self {
            m_steps: 200,
            fp_tol: 1e-12,
            max_iters: 50,
            window: 8,
            substeps: None,
            max_substeps: 64,
            phase_step: 0.25,
            rtol: 1e-10,
            atol: 1e-12,
            blowup_factor: 1e6,
            snapshot_every: None,
            q_list: Vec::new(),
        }
    }
}

impl Controls {
    pub(crate) fn snapshot_due(&self, m: usize) -> bool {
        matches!(self.snapshot_every, Some(k) if k > 0 && m % k == 0)
    }

    fn validate(&self) -> Result<(), SolverError> {
        let bad = |what: &str| Err(SolverError::Input(format!("controls.{what} is invalid")));
        if self.m_steps == 0 {
            return bad("m_steps");
        }
        if self.window == 0 {
            return bad("window");
        }
        if self.max_iters == 0 {
            return bad("max_iters");
        }
        if !(self.fp_tol > 0.0) {
            return bad("fp_tol");
        }
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return bad("rtol/atol");
        }
        if !(self.blowup_factor > 1.0) {
            return bad("blowup_factor");
        }
        if !(self.phase_step > 0.0) || self.max_substeps == 0 {
            return bad("phase_step/max_substeps");
        }
        if self.q_list.iter().any(|&q| !(q >= 1.0)) {
            return bad("q_list");
        }
        Ok(())
    }
}

/// Semilinear problem u_tt + (−Δ)^σu + μ/(1+t)u_t = |u|^p with u(0) = 0,
/// u_t(0) = u₁, sampled on the geometric output grid.
pub fn semilinear_solve(
    u1: &Field,
    p: f64,
    t_final: f64,
    params: &ModelParams,
    scheme: Scheme,
    controls: &Controls,
) -> Result<Trajectory, SolverError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(SolverError::Input(format!("p must be > 1 (got {p})")));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(SolverError::Input(format!("T must be ≥ 0 (got {t_final})")));
    }
    controls.validate()?;
    let times = time_grid(t_final, controls.m_steps);
    let run = Run {
        grid: u1.grid().clone(),
        p,
        params: *params,
        controls,
        threshold: controls.blowup_factor * u1.max_abs(),
    };
    let mut traj = Trajectory::new(&controls.q_list, run.record(u1, u1)?);
    let zero = Field::zeros(run.grid.clone());
    traj.push(0.0, run.record(&zero, u1)?, &zero);
    if controls.snapshot_due(0) {
        traj.snapshots.push(Snapshot { time: 0.0, u: zero });
    }
    match scheme {
        Scheme::DuhamelIteration => run.duhamel(u1, &times, &mut traj)?,
        Scheme::MethodOfLines => run.method_of_lines(u1, &times, &mut traj)?,
    }
    Ok(traj)
}

struct Run<'a> {
    grid: Arc<Grid>,
    p: f64,
    params: ModelParams,
    controls: &'a Controls,
    threshold: f64,
}

/// Per-radius factors at one time: S_J, S_Y, T⁰_J, T⁰_Y, T¹_J, T¹_Y.
type Fac = [f64; 6];

/// Separable kernel factors for every radius. The zero mode uses
/// ψ₀(t,s) = (1+s)^μ[G(t) − G(s)] with G(t) = ∫₀ᵗ (1+r)^{−μ} dr.
struct Kernels {
    modes: Vec<Option<(ModeFactors, ModeFactors)>>,
    scale0: Vec<f64>,
    scale1: Vec<f64>,
    radii: Vec<f64>,
    mu: f64,
}

impl Kernels {
    fn new(grid: &Grid, params: &ModelParams) -> Result<Self, SolverError> {
        let mut modes = Vec::with_capacity(grid.radii().len());
        let (mut scale0, mut scale1) = (Vec::new(), Vec::new());
        for (mode, &xi) in grid.radii().iter().enumerate() {
            if xi == 0.0 {
                modes.push(None);
                scale0.push(1.0);
                scale1.push(1.0);
                continue;
            }
            let wrap = |source| SolverError::Kernel { mode, xi, source };
            let m0 = ModeFactors::new(xi, 0, 0, params).map_err(wrap)?;
            let m1 = ModeFactors::new(xi, 0, 1, params).map_err(wrap)?;
            scale0.push(m0.scale());
            scale1.push(m1.scale());
            modes.push(Some((m0, m1)));
        }
        Ok(Self {
            modes,
            scale0,
            scale1,
            radii: grid.radii().to_vec(),
            mu: params.mu(),
        })
    }

    fn growth(&self, t: f64) -> f64 {
        let e = 1.0 - self.mu;
        let l = (1.0 + t).ln();
        if e == 0.0 {
            l
        } else {
            (e * l).exp_m1() / e
        }
    }

    fn at(&self, t: f64) -> Result<Vec<Fac>, SolverError> {
        let radii_len = self.modes.len();
        (0..radii_len)
            .into_par_iter()
            .map(|r| match &self.modes[r] {
                None => {
                    let tt = 1.0 + t;
                    let pm = tt.powf(self.mu);
                    let g = self.growth(t);
                    Ok([pm, pm * g, 1.0, g, 0.0, 1.0 / pm])
                }
                Some((m0, m1)) => {
                    let wrap = |source| SolverError::Kernel {
                        mode: r,
                        xi: self.radii[r],
                        source,
                    };
                    let s = m0.source(t).map_err(wrap)?;
                    let a = m0.target(t).map_err(wrap)?;
                    let b = m1.target(t).map_err(wrap)?;
                    let f = [s.0, s.1, a.0, a.1, b.0, b.1];
                    if f.iter().all(|v| v.is_finite()) {
                        Ok(f)
                    } else {
                        Err(SolverError::Overflow)
                    }
                }
            })
            .collect()
    }
}

/// Running trapezoid sums A_C = S_C(0)û₁ + ∫ S_C F̂ ds per coefficient.
#[derive(Clone)]
struct Sums {
    j: Vec<Complex64>,
    y: Vec<Complex64>,
}

struct Point {
    t: f64,
    output: Option<usize>,
}

fn spectral_l2(grid: &Grid, c: &[Complex64]) -> f64 {
    (c.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.box_volume()).sqrt()
}

fn max_abs(c: &[Complex64]) -> f64 {
    c.iter().fold(0.0, |m, v| m.max(v.norm()))
}

impl Run<'_> {
    fn record(&self, u: &Field, ut: &Field) -> Result<NormSet, SolverError> {
        norms(u, ut, &self.params, &self.controls.q_list)
    }

    fn field(&self, c: Vec<Complex64>) -> Field {
        Field::from_spectral(self.grid.clone(), c).unwrap()
    }

    fn forcing(&self, c: &[Complex64]) -> Result<Vec<Complex64>, SolverError> {
        Ok(nonlinearity(&self.field(c.to_vec()), self.p)?.spectral().to_vec())
    }

    fn blown_up(&self, u: &Field) -> bool {
        let m = u.max_abs();
        !m.is_finite() || m > self.threshold
    }

    fn nan_record(&self) -> NormSet {
        let nan = f64::NAN;
        NormSet {
            l1: nan,
            l2: nan,
            lq: self.controls.q_list.iter().map(|&q| (q, nan)).collect(),
            linf: nan,
            hdot_sigma: nan,
            ut_l2: nan,
        }
    }

    /// Growth rate √(p|u|^{p−1}) of the ODE w'' = |w|^p linearised at |u|.
    fn nonlinear_rate(&self, peak: f64) -> f64 {
        (self.p * peak.powf(self.p - 1.0)).sqrt()
    }

    /// Quadrature substeps for the output interval [ta, tb].
    fn substeps(&self, ta: f64, tb: f64, u: &[Complex64], ut: &[Complex64], t_final: f64) -> usize {
        if let Some(k) = self.controls.substeps {
            return k.max(1);
        }
        let h = tb - ta;
        let guess: Vec<Complex64> = u.iter().zip(ut).map(|(a, b)| a + h * b).collect();
        let Ok(f) = self.forcing(&guess) else {
            return self.controls.max_substeps;
        };
        let fmax = max_abs(&f);
        let umax = max_abs(&guess);
        if fmax == 0.0 || fmax * h * (1.0 + t_final) < 1e-13 * umax {
            return 1;
        }
        let map = self.grid.mode_radius();
        let r_eff = f
            .iter()
            .zip(map)
            .filter(|(c, _)| c.norm() >= 1e-9 * fmax)
            .map(|(_, &r)| r as usize)
            .max()
            .unwrap_or(0);
        let lam = self.grid.radii()[r_eff].powf(self.params.sigma());
        let peak = self.field(guess).max_abs();
        let lam = lam.max(self.nonlinear_rate(peak));
        let n = (h * lam / self.controls.phase_step).ceil();
        (n as usize).clamp(1, self.controls.max_substeps)
    }

    fn duhamel(
        &self,
        u1: &Field,
        times: &[f64],
        traj: &mut Trajectory,
    ) -> Result<(), SolverError> {
        let kern = Kernels::new(&self.grid, &self.params)?;
        let map = self.grid.mode_radius();
        let n = self.grid.len();
        let t_final = *times.last().unwrap();

        let mut fac_c = kern.at(0.0)?;
        let c1 = u1.spectral();
        let mut sums = Sums {
            j: c1.iter().zip(map).map(|(c, &r)| fac_c[r as usize][0] * c).collect(),
            y: c1.iter().zip(map).map(|(c, &r)| fac_c[r as usize][1] * c).collect(),
        };
        let mut t_c = 0.0;
        let mut f_c = vec![Complex64::new(0.0, 0.0); n];
        let mut u_c = vec![Complex64::new(0.0, 0.0); n];
        let mut ut_c = c1.to_vec();

        let mut pending: VecDeque<Point> = VecDeque::new();
        let mut next_out = 1;
        let window = self.controls.window;
        while next_out < times.len() || !pending.is_empty() {
            while pending.len() < window && next_out < times.len() {
                let (ta, tb) = (times[next_out - 1], times[next_out]);
                let k = self.substeps(ta, tb, &u_c, &ut_c, t_final);
                for i in 1..=k {
                    let t = if i == k { tb } else { ta + (tb - ta) * i as f64 / k as f64 };
                    pending.push_back(Point {
                        t,
                        output: (i == k).then_some(next_out),
                    });
                }
                next_out += 1;
            }
            let take = window.min(pending.len());
            let win: Vec<Point> = pending.drain(..take).collect();
            let facs: Vec<Vec<Fac>> = win.iter().map(|pt| kern.at(pt.t)).collect::<Result<_, _>>()?;

            let mut guess = vec![u_c.clone(); win.len()];
            let mut solved = None;
            for _ in 0..self.controls.max_iters {
                let forcing: Vec<Vec<Complex64>> = match guess
                    .iter()
                    .map(|g| self.forcing(g))
                    .collect::<Result<_, _>>()
                {
                    Ok(f) => f,
                    Err(SolverError::Overflow) => {
                        traj.push(win[0].t, self.nan_record(), &Field::zeros(self.grid.clone()));
                        traj.status = Status::BlowupAbort;
                        return Ok(());
                    }
                    Err(e) => return Err(e),
                };
                let (new, cumulative) =
                    sweep(&kern, map, &sums, &fac_c, &f_c, t_c, &win, &facs, &forcing);
                let diff = new
                    .iter()
                    .zip(&guess)
                    .map(|(a, b)| {
                        let d: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                        spectral_l2(&self.grid, &d)
                    })
                    .fold(0.0, f64::max);
                let size = new
                    .iter()
                    .map(|a| spectral_l2(&self.grid, a))
                    .fold(0.0, f64::max);
                let residual = if diff == 0.0 { 0.0 } else { diff / size.max(f64::MIN_POSITIVE) };
                traj.residual_history.push(residual);
                guess = new;
                if residual <= self.controls.fp_tol || !residual.is_finite() {
                    solved = Some((cumulative, forcing));
                    break;
                }
            }
            let Some((cumulative, forcing)) = solved else {
                // Picard stalls once the nonlinear growth outruns the step;
                // that is blow-up rather than a tolerance failure.
                let mut t_prev = t_c;
                let unresolved = win.iter().zip(&guess).any(|(pt, g)| {
                    let h = pt.t - t_prev;
                    t_prev = pt.t;
                    h * self.nonlinear_rate(self.field(g.clone()).max_abs()) > self.controls.phase_step
                });
                if unresolved {
                    traj.push(win[0].t, self.nan_record(), &Field::zeros(self.grid.clone()));
                    traj.status = Status::BlowupAbort;
                } else {
                    traj.status = Status::ToleranceAbort;
                }
                return Ok(());
            };

            for (i, pt) in win.iter().enumerate() {
                let u = self.field(guess[i].clone());
                let blown = self.blown_up(&u);
                if pt.output.is_none() && !blown {
                    continue;
                }
                let ut_spec: Vec<Complex64> = (0..n)
                    .map(|idx| {
                        let r = map[idx] as usize;
                        let f = &facs[i][r];
                        kern.scale1[r] * (f[5] * cumulative[i].j[idx] - f[4] * cumulative[i].y[idx])
                    })
                    .collect();
                let ut = self.field(ut_spec.clone());
                traj.push(pt.t, self.record(&u, &ut)?, &u);
                if blown {
                    traj.status = Status::BlowupAbort;
                    return Ok(());
                }
                if let Some(m) = pt.output {
                    if self.controls.snapshot_due(m) {
                        traj.snapshots.push(Snapshot { time: pt.t, u });
                    }
                }
                if i + 1 == win.len() {
                    ut_c = ut_spec;
                }
            }
            let last = win.len() - 1;
            if win[last].output.is_none() {
                ut_c = (0..n)
                    .map(|idx| {
                        let r = map[idx] as usize;
                        let f = &facs[last][r];
                        kern.scale1[r]
                            * (f[5] * cumulative[last].j[idx] - f[4] * cumulative[last].y[idx])
                    })
                    .collect();
            }
            t_c = win[last].t;
            fac_c = facs.into_iter().last().unwrap();
            f_c = forcing.into_iter().last().unwrap();
            sums = cumulative.into_iter().last().unwrap();
            u_c = guess.pop().unwrap();
        }
        Ok(())
    }

    fn method_of_lines(
        &self,
        u1: &Field,
        times: &[f64],
        traj: &mut Trajectory,
    ) -> Result<(), SolverError> {
        let grid = self.grid.clone();
        let n = grid.len();
        let map: Vec<usize> = grid.mode_radius().iter().map(|&r| r as usize).collect();
        let sigma = self.params.sigma();
        let mu = self.params.mu();
        let lam: Vec<f64> = grid.radii().iter().map(|r| r.powf(sigma)).collect();
        // State per coefficient: (w·û, û_t)/scale with w = max(λ, 1).
        let w: Vec<f64> = lam.iter().map(|l| l.max(1.0)).collect();
        let c1 = u1.spectral();
        let scale = {
            let m = max_abs(c1);
            if m > 0.0 {
                m
            } else {
                1.0
            }
        };
        let mut y = vec![0.0; 4 * n];
        for (i, c) in c1.iter().enumerate() {
            y[4 * i + 2] = c.re / scale;
            y[4 * i + 3] = c.im / scale;
        }
        let p = self.p;
        // Stage values may overshoot; only a clear excess inside the
        // integrator ends the run early.
        let stage_limit = 10.0 * self.threshold;
        let unpack = |y: &[f64]| -> (Vec<Complex64>, Vec<Complex64>) {
            (0..n)
                .map(|i| {
                    let f = scale / w[map[i]];
                    (
                        Complex64::new(y[4 * i], y[4 * i + 1]) * f,
                        Complex64::new(y[4 * i + 2], y[4 * i + 3]) * scale,
                    )
                })
                .unzip()
        };
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            let (u, _) = unpack(y);
            let u = Field::from_spectral(grid.clone(), u).unwrap();
            let forcing = match nonlinearity_with_max(&u, p) {
                Ok((f, peak)) if peak <= stage_limit => f,
                _ => {
                    dy.fill(f64::NAN);
                    return;
                }
            };
            let f = forcing.spectral();
            let damp = mu / (1.0 + t);
            for i in 0..n {
                let r = map[i];
                let (l, wr) = (lam[r], w[r]);
                let k = l * l / wr;
                dy[4 * i] = wr * y[4 * i + 2];
                dy[4 * i + 1] = wr * y[4 * i + 3];
                dy[4 * i + 2] = -k * y[4 * i] - damp * y[4 * i + 2] + f[i].re / scale;
                dy[4 * i + 3] = -k * y[4 * i + 1] - damp * y[4 * i + 3] + f[i].im / scale;
            }
        };
        let mut sys = (4 * n, rhs);
        let opts = OdeOptions {
            rtol: self.controls.rtol,
            atol: self.controls.atol,
            // A regular solution never needs steps far below the fastest
            // linear period; collapsing steps signal blow-up.
            h_min: 1e-4 / lam.last().copied().unwrap_or(1.0).max(1.0),
            ..OdeOptions::default()
        };
        let mut solver = Dop853::new(4 * n, opts);
        let mut t = 0.0;
        for (m, &t_out) in times.iter().enumerate().skip(1) {
            match solver.integrate_to(&mut sys, &mut t, &mut y, t_out) {
                Ok(()) => {}
                Err(OdeError::NonFinite { t: tf }) | Err(OdeError::StepUnderflow { t: tf, .. }) => {
                    let tf = if tf > traj.final_time() { tf } else { t_out };
                    traj.push(tf, self.nan_record(), &Field::zeros(grid.clone()));
                    traj.status = Status::BlowupAbort;
                    return Ok(());
                }
                Err(OdeError::TooManySteps { .. }) => {
                    traj.status = Status::ToleranceAbort;
                    return Ok(());
                }
                Err(e) => return Err(e.into()),
            }
            let (u, ut) = unpack(&y);
            let (u, ut) = (self.field(u), self.field(ut));
            traj.push(t_out, self.record(&u, &ut)?, &u);
            if self.blown_up(&u) {
                traj.status = Status::BlowupAbort;
                return Ok(());
            }
            if self.controls.snapshot_due(m) {
                traj.snapshots.push(Snapshot { time: t_out, u });
            }
        }
        Ok(())
    }
}

/// One Picard sweep over a window: trapezoid increments of the running sums
/// from the committed point, then u at every window point.
#[allow(clippy::too_many_arguments)]
fn sweep(
    kern: &Kernels,
    map: &[u32],
    sums: &Sums,
    fac_c: &[Fac],
    f_c: &[Complex64],
    t_c: f64,
    win: &[Point],
    facs: &[Vec<Fac>],
    forcing: &[Vec<Complex64>],
) -> (Vec<Vec<Complex64>>, Vec<Sums>) {
    let n = map.len();
    let mut acc = sums.clone();
    let mut us = Vec::with_capacity(win.len());
    let mut cumulative = Vec::with_capacity(win.len());
    let (mut prev_fac, mut prev_f, mut prev_t) = (fac_c, f_c, t_c);
    for (i, pt) in win.iter().enumerate() {
        let half = 0.5 * (pt.t - prev_t);
        let fac = &facs[i];
        let f = &forcing[i];
        let mut u = Vec::with_capacity(n);
        for idx in 0..n {
            let r = map[idx] as usize;
            let (a, b) = (&prev_fac[r], &fac[r]);
            acc.j[idx] += half * (a[0] * prev_f[idx] + b[0] * f[idx]);
            acc.y[idx] += half * (a[1] * prev_f[idx] + b[1] * f[idx]);
            u.push(kern.scale0[r] * (b[3] * acc.j[idx] - b[2] * acc.y[idx]));
        }
        us.push(u);
        cumulative.push(acc.clone());
        prev_fac = fac;
        prev_f = f;
        prev_t = pt.t;
    }
    (us, cumulative)
}
