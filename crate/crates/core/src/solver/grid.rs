use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::SolverError;

pub const MIN_POINTS: usize = 64;
/// Smallest admissible Nyquist mode magnitude.
pub const MIN_NYQUIST: f64 = 8.0;
/// Auto box rule: L = BOX_FACTOR·(1+T)^{1/σ}.
pub const BOX_FACTOR: f64 = 16.0;

#[derive(Clone)]
struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    forward_pad: Arc<dyn Fft<f64>>,
    inverse_pad: Arc<dyn Fft<f64>>,
}

/// Periodic box [−L, L)^dim sampled at `points` per dimension.
#[derive(Clone)]
pub struct Grid {
    dim: usize,
    points: usize,
    half_length: f64,
    /// Distinct |ξ| values, ascending; `radii[0] = 0`.
    radii: Vec<f64>,
    /// Index into `radii` for each spectral coefficient.
    mode_radius: Vec<u32>,
    plans: Plans,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub points: usize,
    pub box_half_length: f64,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("points", &self.points)
            .field("half_length", &self.half_length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.spec() == other.spec()
    }
}

/// Signed integer frequency of FFT index `k` on `n` points.
pub(crate) fn freq(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

impl Grid {
    pub fn new(dim: usize, points: usize, half_length: f64) -> Result<Self, SolverError> {
        if !(dim == 1 || dim == 2) {
            return Err(SolverError::Grid(format!("dim must be 1 or 2 (got {dim})")));
        }
        if points < MIN_POINTS || !points.is_power_of_two() {
            return Err(SolverError::Grid(format!(
                "points per dimension must be a power of two ≥ {MIN_POINTS} (got {points})"
            )));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(SolverError::Grid(format!(
                "box half-length must be positive (got {half_length})"
            )));
        }
        let nyquist = PI * (points / 2) as f64 / half_length;
        if nyquist < MIN_NYQUIST {
            return Err(SolverError::Grid(format!(
                "Nyquist mode {nyquist:.3} < {MIN_NYQUIST}; use more points or a smaller box"
            )));
        }

        let n = points;
        let total = n.pow(dim as u32);
        let sq: Vec<i64> = (0..n).map(|k| freq(k, n).pow(2)).collect();
        let m_of = |idx: usize| -> i64 {
            if dim == 1 {
                sq[idx]
            } else {
                sq[idx / n] + sq[idx % n]
            }
        };
        let mut ms: Vec<i64> = (0..total).map(m_of).collect();
        ms.sort_unstable();
        ms.dedup();
        let dk = PI / half_length;
        let radii = ms.iter().map(|&m| dk * (m as f64).sqrt()).collect();
        let mode_radius = (0..total)
            .map(|idx| ms.binary_search(&m_of(idx)).unwrap() as u32)
            .collect();

        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            forward_pad: planner.plan_fft_forward(2 * n),
            inverse_pad: planner.plan_fft_inverse(2 * n),
        };
        Ok(Self {
            dim,
            points,
            half_length,
            radii,
            mode_radius,
            plans,
        })
    }

    /// Box and resolution chosen by the admissibility rules for horizon `t_final`.
    pub fn auto(dim: usize, sigma: f64, t_final: f64) -> Result<Self, SolverError> {
        let l = BOX_FACTOR * (1.0 + t_final.max(0.0)).powf(1.0 / sigma);
        Self::new(dim, points_for(l), l)
    }

    pub fn from_spec(spec: GridSpec) -> Result<Self, SolverError> {
        Self::new(spec.dim, spec.points, spec.box_half_length)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            dim: self.dim,
            points: self.points,
            box_half_length: self.half_length,
        }
    }

    /// Same resolution per unit length on a box twice as wide.
    pub fn doubled_box(&self) -> Result<Self, SolverError> {
        Self::new(self.dim, 2 * self.points, 2.0 * self.half_length)
    }

    pub fn doubled_points(&self) -> Result<Self, SolverError> {
        Self::new(self.dim, 2 * self.points, self.half_length)
    }

    /// Fails unless the lowest nonzero mode satisfies |ξ|^σ(1+T) ≤ 1.
    pub fn check_horizon(&self, sigma: f64, t_final: f64) -> Result<(), SolverError> {
        let v = self.radii[1].powf(sigma) * (1.0 + t_final);
        if v > 1.0 {
            return Err(SolverError::Grid(format!(
                "lowest mode |ξ|^σ(1+T) = {v:.3} > 1 at T = {t_final}; box is too small"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    pub fn box_volume(&self) -> f64 {
        (2.0 * self.half_length).powi(self.dim as i32)
    }

    pub fn nyquist(&self) -> f64 {
        PI * (self.points / 2) as f64 / self.half_length
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn mode_radius(&self) -> &[u32] {
        &self.mode_radius
    }

    /// |ξ| of spectral coefficient `idx`.
    pub fn xi_abs(&self, idx: usize) -> f64 {
        self.radii[self.mode_radius[idx] as usize]
    }

    /// Coordinate of sample `j` along one dimension.
    pub fn coord(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx()
    }

    /// Squared distance from the origin of flat sample index `idx`.
    pub fn r2(&self, idx: usize) -> f64 {
        if self.dim == 1 {
            self.coord(idx).powi(2)
        } else {
            let n = self.points;
            self.coord(idx / n).powi(2) + self.coord(idx % n).powi(2)
        }
    }

    /// Flat indices of samples on the box boundary x_i = −L.
    pub fn edge_indices(&self) -> Vec<usize> {
        let n = self.points;
        if self.dim == 1 {
            vec![0]
        } else {
            (0..n).chain((1..n).map(|i| i * n)).collect()
        }
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        transform(&*self.plans.forward, self.points, self.dim, data);
    }

    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        transform(&*self.plans.inverse, self.points, self.dim, data);
    }

    pub(crate) fn forward_padded(&self, data: &mut [Complex64]) {
        transform(&*self.plans.forward_pad, 2 * self.points, self.dim, data);
    }

    pub(crate) fn inverse_padded(&self, data: &mut [Complex64]) {
        transform(&*self.plans.inverse_pad, 2 * self.points, self.dim, data);
    }
}

/// Smallest admissible power of two for a box of half-length `l`.
pub fn points_for(l: f64) -> usize {
    let need = (2.0 * MIN_NYQUIST * l / PI).ceil() as usize;
    need.max(MIN_POINTS).next_power_of_two()
}

/// Unnormalized in-place transform of an `n^dim` row-major array.
fn transform(plan: &dyn Fft<f64>, n: usize, dim: usize, data: &mut [Complex64]) {
    plan.process(data);
    if dim == 2 {
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = data[i * n + j];
            }
            plan.process(&mut col);
            for i in 0..n {
                data[i * n + j] = col[i];
            }
        }
    }
}
