//! Experiment drivers: decay fits, rate verification, p sweeps, blow-up
//! classification.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::ModelParams;
use crate::predictor::{existence_verdict, linear_decay, DecayPrediction, PredictError, Quantity, Verdict};
use crate::solver::{
    hdot_norm, linear_evolve, lq_norm, make_initial_data, semilinear_solve, time_grid, Controls,
    DataSpec, Field, Grid, GridSpec, NormSet, Scheme, SolverError, Status, Trajectory,
};

/// Fewest samples a decay fit accepts.
pub const MIN_FIT_POINTS: usize = 8;
/// Rate tolerance, widened when the prediction carries a log factor.
pub const RATE_TOL: f64 = 0.05;
pub const RATE_TOL_LOG: f64 = 0.1;
/// Largest admissible box-edge to interior ratio of |u|.
pub const EDGE_TOL: f64 = 1e-8;
/// Tracked-norm growth over the data norm that counts as blow-up.
pub const BLOWUP_RATIO: f64 = 1e6;
pub const DECAY_RATIO: f64 = 0.5;
pub const GROWTH_SLOPE: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("value {value} at t = {t} is not positive")]
    NonPositive { t: f64, value: f64 },
    #[error("window ({t_min}, {t_max}) holds {points} points and spans {decades:.3} decades; need {MIN_FIT_POINTS} points over one decade")]
    InsufficientSpan {
        t_min: f64,
        t_max: f64,
        points: usize,
        decades: f64,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Predict(#[from] PredictError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Slope of log(value) against log(1+t).
    pub exponent: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    pub n_points: usize,
    pub residual_rms: f64,
}

/// Least-squares power law over the samples with t in [t_min, t_max].
///
/// The window must satisfy t_max ≥ 10·t_min; with t_min = 0 it must reach
/// (1+t_max) ≥ 10.
pub fn fit_decay(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit, FitError> {
    let (t_min, t_max) = window;
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t >= t_min && *t <= t_max)
        .copied()
        .collect();
    let decades = if t_min > 0.0 {
        (t_max / t_min).log10()
    } else {
        (1.0 + t_max).log10()
    };
    if pts.len() < MIN_FIT_POINTS || !(decades >= 1.0) {
        return Err(FitError::InsufficientSpan {
            t_min,
            t_max,
            points: pts.len(),
            decades,
        });
    }
    if let Some(&(t, value)) = pts.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(FitError::NonPositive { t, value });
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|(t, _)| t.ln_1p()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - ym - slope * (x - xm)).powi(2))
        .sum();
    Ok(DecayFit {
        exponent: slope,
        stderr: (ssr / (n - 2.0) / sxx).sqrt(),
        window,
        n_points: pts.len(),
        residual_rms: (ssr / n).sqrt(),
    })
}

/// Settings shared by the rate verification runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateOptions {
    /// Explicit grid; `None` applies the automatic box rule.
    pub grid: Option<GridSpec>,
    pub data: DataSpec,
    /// Defaults to [T/10, T].
    pub window: Option<(f64, f64)>,
    pub m_steps: usize,
    /// Reruns at twice the box when the edge check fails.
    pub max_box_doublings: usize,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self {
            grid: None,
            data: DataSpec::default(),
            window: None,
            m_steps: 200,
            max_box_doublings: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub quantity: Quantity,
    pub predicted: Option<DecayPrediction>,
    pub fitted: Option<DecayFit>,
    pub deviation: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeAttempt {
    pub grid: GridSpec,
    pub edge_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub params: ModelParams,
    pub t_final: f64,
    pub window: (f64, f64),
    pub grid: GridSpec,
    /// Every box tried, in order; the last one produced the rows.
    pub attempts: Vec<EdgeAttempt>,
    /// Set when the final box still fails the edge check.
    pub edge_flagged: bool,
    pub rows: Vec<RateRow>,
}

impl RateReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// `quantity,predicted,log_power,fitted,stderr,deviation,pass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,predicted,log_power,fitted,stderr,deviation,pass\n");
        let num = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.quantity,
                num(r.predicted.as_ref().map(|p| p.rate)),
                num(r.predicted.as_ref().map(|p| p.log_power)),
                num(r.fitted.map(|f| f.exponent)),
                num(r.fitted.map(|f| f.stderr)),
                num(r.deviation),
                r.pass
            );
        }
        out
    }
}

fn quantity_value(q: Quantity, u: &Field, ut: &Field) -> f64 {
    match q {
        Quantity::Lq { q } => lq_norm(u, q),
        Quantity::Linf => lq_norm(u, f64::INFINITY),
        Quantity::HdotGamma { gamma } => hdot_norm(u, gamma),
        Quantity::UtL2 => lq_norm(ut, 2.0),
    }
}

/// Samples every quantity along the linear flow on the geometric grid.
fn linear_series(
    u1: &Field,
    quantities: &[Quantity],
    t_final: f64,
    m_steps: usize,
    params: &ModelParams,
) -> Result<(Vec<Vec<(f64, f64)>>, f64), SolverError> {
    let times = time_grid(t_final, m_steps);
    let rows: Vec<(Vec<f64>, f64)> = times
        .par_iter()
        .map(|&t| {
            let (u, ut) = linear_evolve(u1, t, 0.0, params)?;
            let vals = quantities.iter().map(|&q| quantity_value(q, &u, &ut)).collect();
            Ok((vals, u.edge_ratio()))
        })
        .collect::<Result<_, SolverError>>()?;
    let edge = rows.iter().fold(0.0f64, |m, (_, e)| m.max(*e));
    let series = (0..quantities.len())
        .map(|k| times.iter().zip(&rows).map(|(&t, (v, _))| (t, v[k])).collect())
        .collect();
    Ok((series, edge))
}

/// Fits the linear decay of every requested L^q and Ḣ^γ norm and checks it
/// against the predicted rate.
pub fn verify_linear_rates(
    params: &ModelParams,
    q_list: &[f64],
    gamma_list: &[f64],
    t_final: f64,
    opts: &RateOptions,
) -> Result<RateReport, HarnessError> {
    let quantities: Vec<Quantity> = q_list
        .iter()
        .map(|&q| {
            if q.is_infinite() {
                Quantity::Linf
            } else {
                Quantity::Lq { q }
            }
        })
        .chain(gamma_list.iter().map(|&gamma| Quantity::HdotGamma { gamma }))
        .collect();
    let window = opts.window.unwrap_or((t_final / 10.0, t_final));
    let dim = params.n() as usize;
    let mut grid = match opts.grid {
        Some(spec) => Grid::from_spec(spec)?,
        None => Grid::auto(dim, params.sigma(), t_final)?,
    };
    let mut attempts = Vec::new();
    let series = loop {
        let g = Arc::new(grid.clone());
        let u1 = make_initial_data(&opts.data, &g)?;
        let (series, edge) = linear_series(&u1, &quantities, t_final, opts.m_steps, params)?;
        attempts.push(EdgeAttempt {
            grid: grid.spec(),
            edge_ratio: edge,
        });
        if edge <= EDGE_TOL || attempts.len() > opts.max_box_doublings {
            break series;
        }
        grid = grid.doubled_box()?;
    };
    let rows = quantities
        .iter()
        .zip(series)
        .map(|(&quantity, s)| rate_row(quantity, &s, window, params))
        .collect();
    Ok(RateReport {
        params: *params,
        t_final,
        window,
        grid: grid.spec(),
        edge_flagged: attempts.last().unwrap().edge_ratio > EDGE_TOL,
        attempts,
        rows,
    })
}

fn rate_row(
    quantity: Quantity,
    series: &[(f64, f64)],
    window: (f64, f64),
    params: &ModelParams,
) -> RateRow {
    let mut row = RateRow {
        quantity,
        predicted: None,
        fitted: None,
        deviation: None,
        tolerance: RATE_TOL,
        pass: false,
        error: None,
    };
    match linear_decay(quantity, 0.0, params) {
        Ok(p) => {
            if p.log_power != 0.0 {
                row.tolerance = RATE_TOL_LOG;
            }
            row.predicted = Some(p);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    match fit_decay(series, window) {
        Ok(f) => row.fitted = Some(f),
        Err(e) => row.error = Some(e.to_string()),
    }
    if let (Some(p), Some(f)) = (&row.predicted, &row.fitted) {
        let d = (f.exponent - p.rate).abs();
        row.deviation = Some(d);
        row.pass = d <= row.tolerance;
    }
    row
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Observed {
    Decay,
    Growth,
    Blowup,
    Inconclusive,
}

/// Norm that drives classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tracked {
    #[default]
    L2,
    Linf,
}

impl Tracked {
    pub fn of(self, r: &NormSet) -> f64 {
        match self {
            Tracked::L2 => r.l2,
            Tracked::Linf => r.linf,
        }
    }
}

/// Growth of the tracked norm at the last record over its value on the data.
pub fn norm_ratio(traj: &Trajectory, tracked: Tracked) -> f64 {
    let reference = tracked.of(&traj.data_norms);
    match traj.records.last() {
        Some(r) if reference > 0.0 => tracked.of(r) / reference,
        _ => f64::NAN,
    }
}

/// Slope over [T/10, T] of the tracked norm, if the run reached far enough.
fn late_slope(traj: &Trajectory, tracked: Tracked) -> Option<f64> {
    let t = traj.final_time();
    fit_decay(&traj.series(|r| tracked.of(r)), (t / 10.0, t))
        .ok()
        .map(|f| f.exponent)
}

pub fn blowup_detector(traj: &Trajectory, tracked: Tracked) -> Observed {
    let last_finite = traj.records.last().map_or(true, |r| r.is_finite());
    if traj.status == Status::BlowupAbort || !last_finite {
        return Observed::Blowup;
    }
    let ratio = norm_ratio(traj, tracked);
    if ratio >= BLOWUP_RATIO {
        return Observed::Blowup;
    }
    match late_slope(traj, tracked) {
        Some(s) if s > GROWTH_SLOPE => Observed::Growth,
        Some(s) if s < 0.0 && ratio < DECAY_RATIO => Observed::Decay,
        _ => Observed::Inconclusive,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    pub grid: Option<GridSpec>,
    pub scheme: Scheme,
    pub controls: Controls,
    pub tracked: Tracked,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            grid: None,
            scheme: Scheme::DuhamelIteration,
            controls: Controls::default(),
            tracked: Tracked::L2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub p: f64,
    pub observed: Option<Observed>,
    pub predicted: Option<Verdict>,
    pub max_norm_ratio: f64,
    pub end_time: f64,
    pub status: Option<Status>,
    pub late_slope: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub params: ModelParams,
    pub t_final: f64,
    pub mass_positive: bool,
    pub records: Vec<SweepRecord>,
}

pub fn sweep_p(
    p_list: &[f64],
    params: &ModelParams,
    data: &DataSpec,
    t_final: f64,
    opts: &SweepOptions,
) -> Result<SweepResult, HarnessError> {
    let grid = Arc::new(match opts.grid {
        Some(spec) => Grid::from_spec(spec)?,
        None => Grid::auto(params.n() as usize, params.sigma(), t_final)?,
    });
    let u1 = make_initial_data(data, &grid)?;
    let mass_positive = u1.mass() > 0.0;
    let records = p_list
        .par_iter()
        .map(|&p| sweep_one(p, &u1, params, t_final, mass_positive, opts))
        .collect();
    Ok(SweepResult {
        params: *params,
        t_final,
        mass_positive,
        records,
    })
}

fn sweep_one(
    p: f64,
    u1: &Field,
    params: &ModelParams,
    t_final: f64,
    mass_positive: bool,
    opts: &SweepOptions,
) -> SweepRecord {
    let mut rec = SweepRecord {
        p,
        observed: None,
        predicted: None,
        max_norm_ratio: f64::NAN,
        end_time: 0.0,
        status: None,
        late_slope: None,
        error: None,
    };
    let mut errors = Vec::new();
    match existence_verdict(p, params, mass_positive) {
        Ok(v) => rec.predicted = Some(v),
        Err(e) => errors.push(e.to_string()),
    }
    match semilinear_solve(u1, p, t_final, params, opts.scheme, &opts.controls) {
        Ok(traj) => {
            let reference = opts.tracked.of(&traj.data_norms);
            rec.max_norm_ratio = traj
                .records
                .iter()
                .map(|r| opts.tracked.of(r) / reference)
                .fold(f64::NAN, f64::max);
            rec.end_time = traj.final_time();
            rec.status = Some(traj.status);
            rec.late_slope = late_slope(&traj, opts.tracked);
            let mut observed = blowup_detector(&traj, opts.tracked);
            if observed == Observed::Blowup && traj.status != Status::BlowupAbort {
                observed = Observed::Growth;
            }
            rec.observed = Some(observed);
        }
        Err(e) => errors.push(e.to_string()),
    }
    if !errors.is_empty() {
        rec.error = Some(errors.join("; "));
    }
    rec
}

/// Multiplies every record and snapshot by (1+t)^exponent.
pub fn scale_by_power(traj: &Trajectory, exponent: f64) -> Trajectory {
    let mut out = traj.clone();
    for (t, r) in out.times.iter().zip(out.records.iter_mut()) {
        *r = r.scaled((1.0 + t).powf(exponent));
    }
    for s in &mut out.snapshots {
        s.u = s.u.scaled((1.0 + s.time).powf(exponent));
    }
    out
}

/// v = (1+t)^{1−μ} u applied to a trajectory's records and snapshots.
pub fn dissipative_transform(traj: &Trajectory, mu: f64) -> Trajectory {
    scale_by_power(traj, 1.0 - mu)
}
