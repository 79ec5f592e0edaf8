use num_complex::Complex64;
use rayon::prelude::*;

use super::field::Field;
use super::SolverError;

/// |u|^p evaluated on the grid padded twice per dimension, then truncated
/// back to this grid's modes.
pub fn nonlinearity(u: &Field, p: f64) -> Result<Field, SolverError> {
    nonlinearity_with_max(u, p).map(|(f, _)| f)
}

/// [`nonlinearity`] together with max |u| over the padded grid.
pub(crate) fn nonlinearity_with_max(u: &Field, p: f64) -> Result<(Field, f64), SolverError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(SolverError::Input(format!("p must be > 1 (got {p})")));
    }
    let grid = u.grid().clone();
    let mut fine = u.padded_spectrum();
    grid.inverse_padded(&mut fine);
    let peak = fine
        .par_iter_mut()
        .map(|c| {
            let a = c.re.abs();
            *c = Complex64::new(a.powf(p), 0.0);
            if c.re.is_finite() {
                a
            } else {
                f64::INFINITY
            }
        })
        .reduce(|| 0.0, f64::max);
    if !peak.is_finite() {
        return Err(SolverError::Overflow);
    }
    grid.forward_padded(&mut fine);
    let norm = 1.0 / fine.len() as f64;
    for c in &mut fine {
        *c *= norm;
    }
    Ok((Field::from_padded_spectrum(grid, &fine)?, peak))
}
