use serde::Serialize;

use super::field::Field;
use super::SolverError;
use crate::params::ModelParams;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormSet {
    pub l1: f64,
    pub l2: f64,
    /// (q, ‖u‖_{L^q}) for the requested exponents.
    pub lq: Vec<(f64, f64)>,
    pub linf: f64,
    pub hdot_sigma: f64,
    pub ut_l2: f64,
}

impl NormSet {
    pub fn is_finite(&self) -> bool {
        [self.l1, self.l2, self.linf, self.hdot_sigma, self.ut_l2]
            .iter()
            .chain(self.lq.iter().map(|(_, v)| v))
            .all(|v| v.is_finite())
    }

    /// `‖·‖_{L^q}` from the record, for q ∈ {1, 2, ∞} or a requested exponent.
    pub fn lq_value(&self, q: f64) -> Option<f64> {
        if q == 1.0 {
            Some(self.l1)
        } else if q == 2.0 {
            Some(self.l2)
        } else if q.is_infinite() {
            Some(self.linf)
        } else {
            self.lq.iter().find(|(qq, _)| *qq == q).map(|(_, v)| *v)
        }
    }

    /// Every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            l1: self.l1 * factor,
            l2: self.l2 * factor,
            lq: self.lq.iter().map(|&(q, v)| (q, v * factor)).collect(),
            linf: self.linf * factor,
            hdot_sigma: self.hdot_sigma * factor,
            ut_l2: self.ut_l2 * factor,
        }
    }
}

/// Box-quadrature L^q norm; q = ∞ gives the grid maximum.
pub fn lq_norm(u: &Field, q: f64) -> f64 {
    let p = u.physical();
    if q.is_infinite() {
        return u.max_abs();
    }
    let dv = u.grid().cell_volume();
    if q == 2.0 {
        return (p.iter().map(|x| x * x).sum::<f64>() * dv).sqrt();
    }
    if q == 1.0 {
        return p.iter().map(|x| x.abs()).sum::<f64>() * dv;
    }
    (p.iter().map(|x| x.abs().powf(q)).sum::<f64>() * dv).powf(1.0 / q)
}

/// ‖u‖_{Ḣ^γ} from spectral weights |ξ|^γ.
pub fn hdot_norm(u: &Field, gamma: f64) -> f64 {
    let g = u.grid();
    let radii = g.radii();
    let w: Vec<f64> = radii
        .iter()
        .map(|&r| if r == 0.0 { if gamma == 0.0 { 1.0 } else { 0.0 } } else { r.powf(2.0 * gamma) })
        .collect();
    let s: f64 = u
        .spectral()
        .iter()
        .zip(g.mode_radius())
        .map(|(c, &k)| w[k as usize] * c.norm_sqr())
        .sum();
    (s * g.box_volume()).sqrt()
}

/// L² norm computed from the Fourier coefficients.
pub fn l2_spectral(u: &Field) -> f64 {
    hdot_norm(u, 0.0)
}

pub fn norms(
    u: &Field,
    ut: &Field,
    params: &ModelParams,
    q_list: &[f64],
) -> Result<NormSet, SolverError> {
    u.same_grid(ut)?;
    Ok(NormSet {
        l1: lq_norm(u, 1.0),
        l2: lq_norm(u, 2.0),
        lq: q_list.iter().map(|&q| (q, lq_norm(u, q))).collect(),
        linf: lq_norm(u, f64::INFINITY),
        hdot_sigma: hdot_norm(u, params.sigma()),
        ut_l2: lq_norm(ut, 2.0),
    })
}
