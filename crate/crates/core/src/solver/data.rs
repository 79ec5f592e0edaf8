use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::field::Field;
use super::grid::Grid;
use super::SolverError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSpec {
    /// ε·exp(−|x|²/(2w²)).
    Gaussian { amplitude: f64, width: f64 },
    /// a·exp(1 − 1/(1 − |x|²/R²)) inside |x| < R.
    Bump { amplitude: f64, radius: f64 },
    /// Gaussian envelope times 1 + ½·(smooth random profile), drawn from `seed`.
    Random {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        seed: u64,
    },
    File { path: PathBuf },
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec::Gaussian {
            amplitude: 1.0,
            width: 1.0,
        }
    }
}

fn positive(what: &'static str, v: f64) -> Result<(), SolverError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SolverError::Input(format!("{what} must be positive (got {v})")))
    }
}

pub fn make_initial_data(spec: &DataSpec, grid: &Arc<Grid>) -> Result<Field, SolverError> {
    let len = grid.len();
    let samples: Vec<f64> = match *spec {
        DataSpec::Gaussian { amplitude, width } => {
            positive("amplitude", amplitude)?;
            positive("width", width)?;
            let s = 0.5 / (width * width);
            (0..len).map(|i| amplitude * (-grid.r2(i) * s).exp()).collect()
        }
        DataSpec::Bump { amplitude, radius } => {
            positive("amplitude", amplitude)?;
            positive("radius", radius)?;
            if radius < grid.dx() {
                return Err(SolverError::Input(format!(
                    "bump radius {radius} is below the grid spacing {}",
                    grid.dx()
                )));
            }
            let r2 = radius * radius;
            (0..len)
                .map(|i| {
                    let x = grid.r2(i) / r2;
                    if x < 1.0 {
                        amplitude * (1.0 - 1.0 / (1.0 - x)).exp()
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        DataSpec::Random {
            amplitude,
            width,
            seed,
        } => {
            positive("amplitude", amplitude)?;
            positive("width", width)?;
            random_profile(grid, amplitude, width, seed)
        }
        DataSpec::File { ref path } => return read_field(path, grid),
    };
    Field::from_physical(grid.clone(), samples)
}

/// Envelope-weighted sum of a few low-frequency cosines with random phases.
fn random_profile(grid: &Grid, amplitude: f64, width: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            let kx = rng.gen_range(-2.0..2.0) / width;
            let ky = rng.gen_range(-2.0..2.0) / width;
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let amp = rng.gen_range(-1.0..1.0) / 6.0;
            (kx, ky, phase, amp)
        })
        .collect();
    let s = 0.5 / (width * width);
    let n = grid.points();
    (0..grid.len())
        .map(|i| {
            let (x, y) = if grid.dim() == 1 {
                (grid.coord(i), 0.0)
            } else {
                (grid.coord(i / n), grid.coord(i % n))
            };
            let wobble: f64 = modes
                .iter()
                .map(|&(kx, ky, ph, a)| a * (kx * x + ky * y + ph).cos())
                .sum();
            amplitude * (-grid.r2(i) * s).exp() * (1.0 + 0.5 * wobble)
        })
        .collect()
}

/// CSV layout: a `dim,points,box_half_length` header line, its values, then
/// `points^{dim−1}` rows of `points` samples each.
pub fn write_field(path: &Path, field: &Field) -> Result<(), SolverError> {
    let g = field.grid();
    let n = g.points();
    let mut out = String::new();
    out.push_str("dim,points,box_half_length\n");
    let _ = writeln!(out, "{},{},{:e}", g.dim(), n, g.half_length());
    for row in field.physical().chunks(n) {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{v:e}");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| SolverError::Io(format!("{}: {e}", path.display())))
}

pub fn read_field(path: &Path, grid: &Arc<Grid>) -> Result<Field, SolverError> {
    let text =
        fs::read_to_string(path).map_err(|e| SolverError::Io(format!("{}: {e}", path.display())))?;
    let bad = |msg: String| SolverError::Ingest(format!("{}: {msg}", path.display()));
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("dim,points,box_half_length") {
        return Err(bad("missing dim,points,box_half_length header".into()));
    }
    let meta: Vec<&str> = lines
        .next()
        .ok_or_else(|| bad("missing header values".into()))?
        .split(',')
        .collect();
    if meta.len() != 3 {
        return Err(bad("header needs three values".into()));
    }
    let dim: usize = meta[0].trim().parse().map_err(|_| bad("bad dim".into()))?;
    let points: usize = meta[1].trim().parse().map_err(|_| bad("bad points".into()))?;
    let half: f64 = meta[2].trim().parse().map_err(|_| bad("bad box".into()))?;
    if dim != grid.dim() || points != grid.points() || half != grid.half_length() {
        return Err(bad(format!(
            "file grid ({dim}, {points}, {half}) does not match ({}, {}, {})",
            grid.dim(),
            grid.points(),
            grid.half_length()
        )));
    }
    let mut samples = Vec::with_capacity(grid.len());
    for (r, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad(format!("unparseable value in row {r}")))?;
        if row.len() != points {
            return Err(bad(format!("row {r} has {} values, expected {points}", row.len())));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(bad(format!("non-finite value in row {r}")));
        }
        samples.extend(row);
    }
    if samples.len() != grid.len() {
        return Err(bad(format!(
            "{} samples, expected {}",
            samples.len(),
            grid.len()
        )));
    }
    Field::from_physical(grid.clone(), samples)
}
