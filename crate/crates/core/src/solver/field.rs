use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use super::grid::{freq, Grid};
use super::SolverError;

/// Real field on a [`Grid`]. Physical samples and Fourier coefficients are
/// views of the same data; whichever is missing is computed on first access.
///
/// Coefficients are normalized as periodic Fourier coefficients,
/// `c_k = N^{−dim} Σ_j u_j e^{−2πi k·j/N}`, so the zero mode is the box mean.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    phys: OnceLock<Vec<f64>>,
    spec: OnceLock<Vec<Complex64>>,
}

impl Field {
    pub fn from_physical(grid: Arc<Grid>, samples: Vec<f64>) -> Result<Self, SolverError> {
        check_len(&grid, samples.len())?;
        let phys = OnceLock::new();
        let _ = phys.set(samples);
        Ok(Self {
            grid,
            phys,
            spec: OnceLock::new(),
        })
    }

    /// Coefficients must be conjugate-symmetric; the physical view keeps the
    /// real part of the inverse transform.
    pub fn from_spectral(grid: Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self, SolverError> {
        check_len(&grid, coeffs.len())?;
        let spec = OnceLock::new();
        let _ = spec.set(coeffs);
        Ok(Self {
            grid,
            phys: OnceLock::new(),
            spec,
        })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        let f = Self::from_physical(grid, vec![0.0; n]).unwrap();
        let _ = f.spec.set(vec![Complex64::new(0.0, 0.0); n]);
        f
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn physical(&self) -> &[f64] {
        self.phys.get_or_init(|| {
            let mut buf = self.spec.get().expect("field has no data").clone();
            self.grid.inverse(&mut buf);
            buf.into_iter().map(|c| c.re).collect()
        })
    }

    pub fn spectral(&self) -> &[Complex64] {
        self.spec.get_or_init(|| {
            let mut buf: Vec<Complex64> = self
                .phys
                .get()
                .expect("field has no data")
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect();
            self.grid.forward(&mut buf);
            let norm = 1.0 / self.grid.len() as f64;
            for c in &mut buf {
                *c *= norm;
            }
            buf
        })
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let g = self.grid.clone();
        if let Some(p) = self.phys.get() {
            Self::from_physical(g, p.iter().map(|x| alpha * x).collect()).unwrap()
        } else {
            Self::from_spectral(g, self.spectral().iter().map(|c| alpha * c).collect()).unwrap()
        }
    }

    /// Pointwise sum; both fields must share a grid.
    pub fn add(&self, other: &Field) -> Result<Self, SolverError> {
        self.same_grid(other)?;
        let v = self
            .physical()
            .iter()
            .zip(other.physical())
            .map(|(a, b)| a + b)
            .collect();
        Self::from_physical(self.grid.clone(), v)
    }

    pub fn same_grid(&self, other: &Field) -> Result<(), SolverError> {
        if *self.grid != *other.grid {
            return Err(SolverError::GridMismatch);
        }
        Ok(())
    }

    /// Box quadrature of u.
    pub fn mass(&self) -> f64 {
        self.physical().iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.physical().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// max |u| on the box boundary over max |u| in the box.
    pub fn edge_ratio(&self) -> f64 {
        let p = self.physical();
        let edge = self
            .grid
            .edge_indices()
            .into_iter()
            .fold(0.0f64, |m, i| m.max(p[i].abs()));
        let max = self.max_abs();
        if max == 0.0 {
            0.0
        } else {
            edge / max
        }
    }

    /// Coefficients zero-padded to twice the points per dimension. The
    /// Nyquist coefficient is split evenly between ±N/2 so that the padded
    /// field stays real.
    pub(crate) fn padded_spectrum(&self) -> Vec<Complex64> {
        let g = &self.grid;
        let n = g.points();
        let m = 2 * n;
        let c = self.spectral();
        let mut out = vec![Complex64::new(0.0, 0.0); m.pow(g.dim() as u32)];
        for (idx, &v) in c.iter().enumerate() {
            for_targets(idx, n, g.dim(), |fine, w| out[fine] += w * v);
        }
        out
    }

    /// Inverse of [`Field::padded_spectrum`]: truncation to this grid's modes.
    pub(crate) fn from_padded_spectrum(
        grid: Arc<Grid>,
        fine: &[Complex64],
    ) -> Result<Self, SolverError> {
        let n = grid.points();
        let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (idx, slot) in c.iter_mut().enumerate() {
            for_targets(idx, n, grid.dim(), |f, w| *slot += w * fine[f]);
        }
        Self::from_spectral(grid, c)
    }
}

fn check_len(grid: &Grid, len: usize) -> Result<(), SolverError> {
    if len != grid.len() {
        return Err(SolverError::Length {
            expected: grid.len(),
            got: len,
        });
    }
    Ok(())
}

/// Fine-grid positions (and weights) of coarse coefficient `idx`.
fn for_targets(idx: usize, n: usize, dim: usize, mut f: impl FnMut(usize, f64)) {
    let m = 2 * n;
    let map = |k: usize| -> [(usize, f64); 2] {
        let fr = freq(k, n);
        if fr == -(n as i64 / 2) {
            [(m - n / 2, 0.5), (n / 2, 0.5)]
        } else {
            [((fr.rem_euclid(m as i64)) as usize, 1.0), (usize::MAX, 0.0)]
        }
    };
    if dim == 1 {
        for (t, w) in map(idx) {
            if t != usize::MAX {
                f(t, w);
            }
        }
    } else {
        let (i, j) = (idx / n, idx % n);
        for (ti, wi) in map(i) {
            for (tj, wj) in map(j) {
                if ti != usize::MAX && tj != usize::MAX {
                    f(ti * m + tj, wi * wj);
                }
            }
        }
    }
}
