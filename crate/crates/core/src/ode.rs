//! Explicit Dormand–Prince 8(5,3) integrator with adaptive step control.
//!
//! The error estimate blends the fifth- and third-order embedded solutions
//! the same way Hairer's `dop853` does, and the step controller uses the
//! exponent −1/8. Dense output is not provided; callers that need values at
//! fixed times integrate up to each of them in turn, which [`Dop853`] does
//! without losing its step-size history.

#![allow(clippy::excessive_precision)]

use thiserror::Error;

const STAGES: usize = 12;

const C: [f64; STAGES] = [
    0.0,
    0.526001519587677318785587544488e-01,
    0.789002279381515978178381316732e-01,
    0.118350341907227396726757197510,
    0.281649658092772603273242802490,
    0.333333333333333333333333333333,
    0.25,
    0.307692307692307692307692307692,
    0.651282051282051282051282051282,
    0.6,
    0.857142857142857142857142857142,
    1.0,
];

const A: [[f64; STAGES - 1]; STAGES] = [
    [0.0; STAGES - 1],
    [
        5.26001519587677318785587544488e-02,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        1.97250569845378994544595329183e-02,
        5.91751709536136983633785987549e-02,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2.95875854768068491816892993775e-02,
        0.0,
        8.87627564304205475450678981324e-02,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2.41365134159266685502369798665e-01,
        0.0,
        -8.84549479328286085344864962717e-01,
        9.24834003261792003115737966543e-01,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        3.70370370370370370370370370370e-02,
        0.0,
        0.0,
        1.70828608729473871279604482173e-01,
        1.25467687566822425016691814123e-01,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        3.71093750000000000000000000000e-02,
        0.0,
        0.0,
        1.70252211019544039314978060272e-01,
        6.02165389804559606850219397283e-02,
        -1.75781250000000000000000000000e-02,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        3.70920001185047927108779319836e-02,
        0.0,
        0.0,
        1.70383925712239993810214054705e-01,
        1.07262030446373284651809199168e-01,
        -1.53194377486244017527936158236e-02,
        8.27378916381402288758473766002e-03,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        6.24110958716075717114429577812e-01,
        0.0,
        0.0,
        -3.36089262944694129406857109825e+00,
        -8.68219346841726006818189891453e-01,
        2.75920996994467083049415600797e+01,
        2.01540675504778934086186788979e+01,
        -4.34898841810699588477366255144e+01,
        0.0,
        0.0,
        0.0,
    ],
    [
        4.77662536438264365890433908527e-01,
        0.0,
        0.0,
        -2.48811461997166764192642586468e+00,
        -5.90290826836842996371446475743e-01,
        2.12300514481811942347288949897e+01,
        1.52792336328824235832596922938e+01,
        -3.32882109689848629194453265587e+01,
        -2.03312017085086261358222928593e-02,
        0.0,
        0.0,
    ],
    [
        -9.37142430085987325717040528057e-01,
        0.0,
        0.0,
        5.18637242884406370830023853209e+00,
        1.09143734899672957818500254654e+00,
        -8.14978701074692612513997267357e+00,
        -1.85200656599969598641566180701e+01,
        2.27394870993505042818970056734e+01,
        2.49360555267965238987089396762e+00,
        -3.0467644718982195003823669022e+00,
        0.0,
    ],
    [
        2.27331014751653820792359768449e+00,
        0.0,
        0.0,
        -1.05344954667372501984066689879e+01,
        -2.00087205822486249909675718444e+00,
        -1.79589318631187989172765950534e+01,
        2.79488845294199600508499808837e+01,
        -2.85899827713502369474065508674e+00,
        -8.87285693353062954433549289258e+00,
        1.23605671757943030647266201528e+01,
        6.43392746015763530355970484046e-01,
    ],
];

const B: [f64; STAGES] = [
    5.42937341165687622380535766363e-02,
    0.0,
    0.0,
    0.0,
    0.0,
    4.45031289275240888144113950566e+00,
    1.89151789931450038304281599044e+00,
    -5.80120396001058478146721142270e+00,
    3.1116436695781989440891606237e-01,
    -1.52160949662516078556178806805e-01,
    2.01365400804030348374776537501e-01,
    4.47106157277725905176885569043e-02,
];

// Fifth-order error weights.
const E5: [f64; STAGES] = [
    0.1312004499419488073250102996e-01,
    0.0,
    0.0,
    0.0,
    0.0,
    -0.1225156446376204440720569753e+01,
    -0.4957589496572501915214079952e+00,
    0.1664377182454986536961530415e+01,
    -0.3503288487499736816886487290e+00,
    0.3341791187130174790297318841e+00,
    0.8192320648511571246570742613e-01,
    -0.2235530786388629525884427845e-01,
];

// Third-order embedded weights are B minus these.
const BHH1: f64 = 0.244094488188976377952755905512;
const BHH2: f64 = 0.733846688281611857341361741547;
const BHH3: f64 = 0.0220588235294117647058823529412;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;

/// Right-hand side y' = f(t, y) of a first-order system.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]);
}

impl<F: FnMut(f64, &[f64], &mut [f64])> OdeSystem for (usize, F) {
    fn dim(&self) -> usize {
        self.0
    }
    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]) {
        (self.1)(t, y, dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest allowed step; `f64::INFINITY` for no limit.
    pub h_max: f64,
    /// First trial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    /// Steps forced below this size (other than a truncated final step) end
    /// the integration with [`OdeError::StepUnderflow`].
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: f64::INFINITY,
            h_init: None,
            h_min: 0.0,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },
    #[error("solution became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("invalid integration interval from {t0} to {t1}")]
    BadInterval { t0: f64, t1: f64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Integrator state: workspace, current step size and the FSAL derivative.
pub struct Dop853 {
    opts: OdeOptions,
    k: Vec<Vec<f64>>,
    y_stage: Vec<f64>,
    y_new: Vec<f64>,
    k_new: Vec<f64>,
    h: Option<f64>,
    fsal: Option<f64>,
    pub stats: OdeStats,
}

impl Dop853 {
    pub fn new(dim: usize, opts: OdeOptions) -> Self {
        Self {
            opts,
            k: vec![vec![0.0; dim]; STAGES],
            y_stage: vec![0.0; dim],
            y_new: vec![0.0; dim],
            k_new: vec![0.0; dim],
            h: opts.h_init,
            fsal: None,
            stats: OdeStats::default(),
        }
    }

    /// Advance `y` from `*t` to `t_end` (forward only). On success `*t == t_end`.
    pub fn integrate_to<S: OdeSystem + ?Sized>(
        &mut self,
        sys: &mut S,
        t: &mut f64,
        y: &mut [f64],
        t_end: f64,
    ) -> Result<(), OdeError> {
        let n = y.len();
        if !(t_end >= *t) || !t_end.is_finite() {
            return Err(OdeError::BadInterval { t0: *t, t1: t_end });
        }
        if t_end == *t {
            return Ok(());
        }
        if self.fsal != Some(*t) {
            let (k0, _) = self.k.split_at_mut(1);
            sys.rhs(*t, y, &mut k0[0]);
            self.stats.rhs_evals += 1;
            self.fsal = Some(*t);
        }
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(sys, *t, y, t_end - *t),
        };
        let start_steps = self.stats.accepted + self.stats.rejected;
        loop {
            let remaining = t_end - *t;
            if remaining <= 0.0 {
                break;
            }
            if self.stats.accepted + self.stats.rejected - start_steps >= self.opts.max_steps {
                return Err(OdeError::TooManySteps {
                    t: *t,
                    max_steps: self.opts.max_steps,
                });
            }
            h = h.min(self.opts.h_max);
            let last = h >= remaining * (1.0 - 1e-12);
            let h_try = if last { remaining } else { h };
            if h_try <= 10.0 * f64::EPSILON * t.abs().max(1.0) || (!last && h_try < self.opts.h_min) {
                return Err(OdeError::StepUnderflow { t: *t, h: h_try });
            }
            let err = self.step(sys, *t, y, h_try);
            if err.is_finite() && err <= 1.0 {
                let t_next = if last { t_end } else { *t + h_try };
                if !self.y_new.iter().all(|v| v.is_finite()) {
                    return Err(OdeError::NonFinite { t: t_next });
                }
                y.copy_from_slice(&self.y_new[..n]);
                self.k[0].copy_from_slice(&self.k_new);
                *t = t_next;
                self.fsal = Some(*t);
                self.stats.accepted += 1;
                let fac = if err == 0.0 {
                    FAC_MAX
                } else {
                    (SAFETY * err.powf(-1.0 / 8.0)).clamp(FAC_MIN, FAC_MAX)
                };
                // Do not let a truncated final step shrink the remembered step.
                h = if last { h.max(h_try * fac) } else { h_try * fac };
            } else {
                self.stats.rejected += 1;
                let fac = if err.is_finite() {
                    (SAFETY * err.powf(-1.0 / 8.0)).clamp(0.1, 1.0)
                } else {
                    0.1
                };
                h = h_try * fac;
            }
        }
        self.h = Some(h);
        Ok(())
    }

    // One trial step; leaves the proposal in y_new / k_new and returns the scaled error.
    fn step<S: OdeSystem + ?Sized>(&mut self, sys: &mut S, t: f64, y: &[f64], h: f64) -> f64 {
        let n = y.len();
        for s in 1..STAGES {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in self.k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += a * kj[i];
                    }
                }
                self.y_stage[i] = y[i] + h * acc;
            }
            let (_, rest) = self.k.split_at_mut(s);
            sys.rhs(t + C[s] * h, &self.y_stage, &mut rest[0]);
        }
        let mut err5 = 0.0;
        let mut err3 = 0.0;
        for i in 0..n {
            let mut inc = 0.0;
            let mut e5 = 0.0;
            for s in 0..STAGES {
                let ks = self.k[s][i];
                inc += B[s] * ks;
                e5 += E5[s] * ks;
            }
            let e3 = inc - BHH1 * self.k[0][i] - BHH2 * self.k[8][i] - BHH3 * self.k[11][i];
            self.y_new[i] = y[i] + h * inc;
            let sc = self.opts.atol + self.opts.rtol * y[i].abs().max(self.y_new[i].abs());
            err5 += (e5 / sc).powi(2);
            err3 += (e3 / sc).powi(2);
        }
        sys.rhs(t + h, &self.y_new, &mut self.k_new);
        self.stats.rhs_evals += STAGES;
        if !err5.is_finite() || !err3.is_finite() {
            return f64::NAN;
        }
        let mut deno = err5 + 0.01 * err3;
        if deno <= 0.0 {
            deno = 1.0;
        }
        h.abs() * err5 * (1.0 / (n as f64 * deno)).sqrt()
    }

    // Hairer's starting-step heuristic.
    fn initial_step<S: OdeSystem + ?Sized>(
        &mut self,
        sys: &mut S,
        t: f64,
        y: &[f64],
        span: f64,
    ) -> f64 {
        let n = y.len() as f64;
        let sc = |v: f64| self.opts.atol + self.opts.rtol * v.abs();
        let d0 = (y.iter().map(|&v| (v / sc(v)).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (y
            .iter()
            .zip(&self.k[0])
            .map(|(&v, &f)| (f / sc(v)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(span).min(self.opts.h_max);
        for i in 0..y.len() {
            self.y_stage[i] = y[i] + h0 * self.k[0][i];
        }
        sys.rhs(t + h0, &self.y_stage, &mut self.k_new);
        self.stats.rhs_evals += 1;
        let d2 = (y
            .iter()
            .zip(self.k_new.iter().zip(&self.k[0]))
            .map(|(&v, (&f1, &f0))| ((f1 - f0) / sc(v)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
            / h0;
        let dm = d1.max(d2);
        let h1 = if dm <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dm).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1).min(span).min(self.opts.h_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_consistency() {
        for s in 0..STAGES {
            let row: f64 = A[s].iter().sum();
            assert!((row - C[s]).abs() < 1e-14, "stage {s}");
        }
        assert!((B.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(E5.iter().sum::<f64>().abs() < 1e-14);
        let e3: f64 = B.iter().sum::<f64>() - BHH1 - BHH2 - BHH3;
        assert!(e3.abs() < 1e-14);
    }

    #[test]
    fn quadrature_order_conditions() {
        // Σ b_i c_i^k = 1/(k+1) up to k = 7
        for k in 0..8 {
            let lhs: f64 = B.iter().zip(&C).map(|(b, c)| b * c.powi(k)).sum();
            assert!((lhs - 1.0 / (k as f64 + 1.0)).abs() < 1e-13, "k = {k}");
        }
        // Σ b_i a_ij c_j^k = 1/((k+1)(k+2)) up to k = 6
        for k in 0..7 {
            let mut lhs = 0.0;
            for i in 0..STAGES {
                for j in 0..i {
                    lhs += B[i] * A[i][j] * C[j].powi(k);
                }
            }
            let want = 1.0 / ((k as f64 + 1.0) * (k as f64 + 2.0));
            assert!((lhs - want).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn exponential_growth() {
        let mut sys = (1usize, |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0]);
        let mut y = [1.0];
        let mut t = 0.0;
        let mut solver = Dop853::new(1, OdeOptions::default());
        solver.integrate_to(&mut sys, &mut t, &mut y, 2.0).unwrap();
        assert_eq!(t, 2.0);
        assert!((y[0] - 2f64.exp()).abs() < 1e-9 * 2f64.exp());
    }

    #[test]
    fn harmonic_oscillator_many_periods() {
        let mut sys = (2usize, |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        });
        let mut y = [0.0, 1.0];
        let mut t = 0.0;
        let mut solver = Dop853::new(2, OdeOptions::default());
        let t_end = 200.0;
        solver.integrate_to(&mut sys, &mut t, &mut y, t_end).unwrap();
        assert!((y[0] - t_end.sin()).abs() < 1e-7);
        assert!((y[1] - t_end.cos()).abs() < 1e-7);
    }

    #[test]
    fn resumes_across_output_times() {
        let mut sys = (1usize, |t: f64, _y: &[f64], dy: &mut [f64]| dy[0] = t.cos());
        let mut y = [0.0];
        let mut t = 0.0;
        let mut solver = Dop853::new(1, OdeOptions::default());
        for k in 1..=20 {
            let te = 0.5 * k as f64;
            solver.integrate_to(&mut sys, &mut t, &mut y, te).unwrap();
            assert!((y[0] - te.sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn blowup_is_reported() {
        // y' = y², y(0) = 1 blows up at t = 1
        let mut sys = (1usize, |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0]);
        let mut y = [1.0];
        let mut t = 0.0;
        let mut solver = Dop853::new(1, OdeOptions::default());
        let err = solver.integrate_to(&mut sys, &mut t, &mut y, 2.0).unwrap_err();
        assert!(matches!(
            err,
            OdeError::StepUnderflow { .. } | OdeError::NonFinite { .. } | OdeError::TooManySteps { .. }
        ));
        assert!((t - 1.0).abs() < 1e-6, "t = {t}");
    }
}
