//! Fundamental multiplier of the Fourier-mode equation
//!
//! ```text
//! v'' + |ξ|^{2σ} v + μ/(1+t) v' = 0,   v(s) = 0,  v'(s) = 1,
//! ```
//!
//! whose solutions are `τ^ρ C_ρ(λτ)` with `τ = 1+t`, `λ = |ξ|^σ`,
//! `ρ = (1−μ)/2` and `C` any cylinder function. With `a = λ(1+s)` and
//! `b = λ(1+t)` the multiplier and its time derivative are
//!
//! ```text
//! |ξ|^{jσ} ∂_t^k ψ = (π/4) (1+t)^ρ (1+s)^{1−ρ} λ^{k+j} det[H⁻_ρ(a) H⁻_{ρ−k}(b); H⁺_ρ(a) H⁺_{ρ−k}(b)] / i.
//! ```
//!
//! The determinant equals `2i (J_ρ(a) Y_{ρ−k}(b) − Y_ρ(a) J_{ρ−k}(b))`,
//! which is how the small-argument routes evaluate it.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ode::{Dop853, OdeError, OdeOptions};
use crate::params::ModelParams;
use crate::specfun::{self, bessel_jy, hankel_amplitude, sin_pi, HankelKind, SpecfunError};

/// Both Hankel arguments must reach this for the Hankel route. Below it the
/// J part of H is small against |H| and the determinant loses digits, while
/// the positive-order J/Y cross product stays exact.
pub const HANKEL_MIN_ARG: f64 = 1.0;

/// The csc-form small-argument route is used only when ρ is at least this
/// far from an integer; closer in, its numerator cancels.
pub const CSC_MIN_DISTANCE: f64 = 1e-3;

/// Above this value of (|ρ|+1)·|ln a| the Bessel products risk overflow and
/// the ODE is integrated instead.
pub const OVERFLOW_LOG_BUDGET: f64 = 600.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("source time s = {s} exceeds target time t = {t}")]
    TimeOrder { t: f64, s: f64 },
    #[error("invalid time or frequency argument ({what} = {value})")]
    Argument { what: &'static str, value: f64 },
    #[error("unsupported derivative orders j = {j}, k = {k} (need j + k <= 1)")]
    UnsupportedOrder { j: u8, k: u8 },
    #[error("xi = 0 must go through eval_psi_zero_mode")]
    ZeroMode,
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error("ODE oracle failed: {source} (t = {t}, s = {s}, xi = {xi})")]
    Oracle {
        source: OdeError,
        t: f64,
        s: f64,
        xi: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ZoneLabel {
    #[serde(rename = "Z_HIGH")]
    ZHigh,
    #[serde(rename = "Z1")]
    Z1,
    #[serde(rename = "Z2")]
    Z2,
    #[serde(rename = "Z3")]
    Z3,
    /// The ξ = 0 mode, evaluated by the closed zero-mode formula.
    #[serde(rename = "ZERO")]
    Zero,
}

/// Which representation produced a kernel value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelForm {
    Hankel,
    BesselCsc,
    BesselJY,
    Ode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEval {
    pub psi: Complex64,
    pub j: u8,
    pub k: u8,
    pub zone: ZoneLabel,
    pub form: KernelForm,
    pub t: f64,
    pub s: f64,
    pub xi_abs: f64,
}

fn check_times(t: f64, s: f64) -> Result<(), KernelError> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(KernelError::Argument { what: "s", value: s });
    }
    if !t.is_finite() {
        return Err(KernelError::Argument { what: "t", value: t });
    }
    if s > t {
        return Err(KernelError::TimeOrder { t, s });
    }
    Ok(())
}

pub fn classify_zone(
    t: f64,
    s: f64,
    xi_abs: f64,
    params: &ModelParams,
) -> Result<ZoneLabel, KernelError> {
    check_times(t, s)?;
    if !(xi_abs >= 0.0) {
        return Err(KernelError::Argument {
            what: "xi",
            value: xi_abs,
        });
    }
    if xi_abs >= 1.0 {
        return Ok(ZoneLabel::ZHigh);
    }
    let lam = xi_abs.powf(params.sigma());
    Ok(if (1.0 + s) * lam >= 1.0 {
        ZoneLabel::Z1
    } else if (1.0 + t) * lam >= 1.0 {
        ZoneLabel::Z2
    } else {
        ZoneLabel::Z3
    })
}

/// Smooth cutoff: 1 on r ≤ 1/2, 0 on r ≥ 1, C^∞ in between.
pub fn chi(r: f64) -> f64 {
    if r <= 0.5 {
        return 1.0;
    }
    if r >= 1.0 {
        return 0.0;
    }
    let f = |x: f64| (-1.0 / x).exp();
    let up = f(1.0 - r);
    let down = f(r - 0.5);
    up / (up + down)
}

/// (χ₁, χ₂, χ₃) built from χ((1+s)|ξ|^σ) and χ((1+t)|ξ|^σ).
pub fn smooth_cutoffs(
    t: f64,
    s: f64,
    xi_abs: f64,
    params: &ModelParams,
) -> Result<(f64, f64, f64), KernelError> {
    check_times(t, s)?;
    let lam = xi_abs.abs().powf(params.sigma());
    let cs = chi((1.0 + s) * lam);
    let ct = chi((1.0 + t) * lam);
    Ok((1.0 - cs, cs * (1.0 - ct), cs * ct))
}

/// Route selection for given Hankel arguments a ≤ b and order ρ.
pub fn select_form(a: f64, b: f64, rho: f64) -> KernelForm {
    if a >= HANKEL_MIN_ARG && b >= HANKEL_MIN_ARG {
        KernelForm::Hankel
    } else if (rho.abs() + 1.0) * a.ln().abs() > OVERFLOW_LOG_BUDGET {
        KernelForm::Ode
    } else if (rho - rho.round()).abs() >= CSC_MIN_DISTANCE {
        KernelForm::BesselCsc
    } else {
        KernelForm::BesselJY
    }
}

/// Orders and sign for the cross product `J_ρ(a)Y_{ρ−k}(b) − Y_ρ(a)J_{ρ−k}(b)`.
/// Reflection maps (J_ν, Y_ν) to (J_{−ν}, Y_{−ν}) by a rotation through νπ,
/// so for ρ < 0 the product equals (−1)^k times the one at orders (−ρ, −ρ+k).
/// The positive-order products do not cancel at small arguments.
fn cross_orders(rho: f64, k: u8) -> (f64, f64, f64) {
    if rho < 0.0 {
        let sign = if k == 0 { 1.0 } else { -1.0 };
        (-rho, -rho + k as f64, sign)
    } else {
        (rho, rho - k as f64, 1.0)
    }
}

/// `|ξ|^{jσ} ∂_t^k ψ(t, s, ξ)` for ξ ≠ 0.
pub fn eval_psi(
    t: f64,
    s: f64,
    xi_abs: f64,
    j: u8,
    k: u8,
    params: &ModelParams,
) -> Result<KernelEval, KernelError> {
    debug_assert!(
        calibration().passed(),
        "kernel calibration failed: {:?}",
        calibration()
    );
    let lam = validate_mode(t, s, xi_abs, j, k, params)?;
    let rho = params.rho();
    let form = select_form(lam * (1.0 + s), lam * (1.0 + t), rho);
    eval_psi_with(t, s, xi_abs, j, k, params, form)
}

fn validate_mode(
    t: f64,
    s: f64,
    xi_abs: f64,
    j: u8,
    k: u8,
    params: &ModelParams,
) -> Result<f64, KernelError> {
    check_times(t, s)?;
    if j + k > 1 {
        return Err(KernelError::UnsupportedOrder { j, k });
    }
    if xi_abs == 0.0 {
        return Err(KernelError::ZeroMode);
    }
    if !(xi_abs > 0.0 && xi_abs.is_finite()) {
        return Err(KernelError::Argument {
            what: "xi",
            value: xi_abs,
        });
    }
    Ok(xi_abs.powf(params.sigma()))
}

/// [`eval_psi`] with the representation forced; used to cross-check forms.
pub fn eval_psi_with(
    t: f64,
    s: f64,
    xi_abs: f64,
    j: u8,
    k: u8,
    params: &ModelParams,
    form: KernelForm,
) -> Result<KernelEval, KernelError> {
    let lam = validate_mode(t, s, xi_abs, j, k, params)?;
    let rho = params.rho();
    let nu = rho - k as f64;
    let (ts, tt) = (1.0 + s, 1.0 + t);
    let (a, b) = (lam * ts, lam * tt);
    let zone = classify_zone(t, s, xi_abs, params)?;
    let pref = FRAC_PI_4 * tt.powf(rho) * ts.powf(1.0 - rho) * lam.powi((k + j) as i32);

    let psi = match form {
        KernelForm::Hankel => {
            let am_a = hankel_amplitude(HankelKind::Second, rho, a)?;
            let ap_a = hankel_amplitude(HankelKind::First, rho, a)?;
            let am_b = hankel_amplitude(HankelKind::Second, nu, b)?;
            let ap_b = hankel_amplitude(HankelKind::First, nu, b)?;
            // e^{i(b−a)} with b − a = λ(t − s) formed without cancellation
            let phase = Complex64::from_polar(1.0, lam * (t - s));
            let det = am_a * ap_b * phase - am_b * ap_a * phase.conj();
            pref * det / Complex64::i()
        }
        KernelForm::BesselJY => {
            let (oa, ob, sign) = cross_orders(rho, k);
            let pa = bessel_jy(oa, a)?;
            let pb = bessel_jy(ob, b)?;
            let x = sign * (pa.j * pb.y - pa.y * pb.j);
            Complex64::new(2.0 * pref * x, 0.0)
        }
        KernelForm::BesselCsc => {
            let sin = sin_pi(rho);
            if sin == 0.0 {
                return Err(KernelError::Argument {
                    what: "rho (csc form at integer order)",
                    value: rho,
                });
            }
            let jm_a = specfun::bessel_j(-rho, a)?;
            let jp_a = specfun::bessel_j(rho, a)?;
            let jn_b = specfun::bessel_j(nu, b)?;
            let jmn_b = specfun::bessel_j(-nu, b)?;
            let sign = if k == 0 { 1.0 } else { -1.0 };
            let x = (jm_a * jn_b - sign * jp_a * jmn_b) / sin;
            Complex64::new(2.0 * pref * x, 0.0)
        }
        KernelForm::Ode => {
            let (psi, psi_t) = ode_oracle(t, s, xi_abs, params)?;
            let base = if k == 0 { psi } else { psi_t };
            Complex64::new(base * lam.powi(j as i32), 0.0)
        }
    };
    Ok(KernelEval {
        psi,
        j,
        k,
        zone,
        form,
        t,
        s,
        xi_abs,
    })
}

/// ψ at ξ = 0: `(1+s)^μ((1+t)^{1−μ} − (1+s)^{1−μ})/(1−μ)`, or
/// `(1+s) ln((1+t)/(1+s))` at μ = 1.
pub fn eval_psi_zero_mode(t: f64, s: f64, params: &ModelParams) -> Result<f64, KernelError> {
    check_times(t, s)?;
    let mu = params.mu();
    let (ts, tt) = (1.0 + s, 1.0 + t);
    if mu == 1.0 {
        return Ok(ts * (tt / ts).ln());
    }
    // ts·((tt/ts)^{1−μ} − 1)/(1−μ), written to stay accurate as μ → 1
    let e = 1.0 - mu;
    let l = (tt / ts).ln();
    Ok(ts * (e * l).exp_m1() / e)
}

/// ∂_t ψ at ξ = 0: `((1+s)/(1+t))^μ`.
pub fn eval_psi_zero_mode_dt(t: f64, s: f64, params: &ModelParams) -> Result<f64, KernelError> {
    check_times(t, s)?;
    Ok(((1.0 + s) / (1.0 + t)).powf(params.mu()))
}

/// Oracle tolerances for [`ode_oracle`].
pub const ORACLE_RTOL: f64 = 1e-10;
const ORACLE_ATOL: f64 = 1e-14;

/// Integrates the mode equation from (ψ, ψ_t) = (0, 1) at time s to time t.
pub fn ode_oracle(
    t: f64,
    s: f64,
    xi_abs: f64,
    params: &ModelParams,
) -> Result<(f64, f64), KernelError> {
    let path = ode_oracle_path(&[t], s, xi_abs, params, ORACLE_RTOL)?;
    Ok(path[0])
}

/// Oracle values at an increasing list of times, all ≥ s, at a chosen tolerance.
pub fn ode_oracle_path(
    times: &[f64],
    s: f64,
    xi_abs: f64,
    params: &ModelParams,
    rtol: f64,
) -> Result<Vec<(f64, f64)>, KernelError> {
    for &t in times {
        check_times(t, s)?;
    }
    let lam = xi_abs.abs().powf(params.sigma());
    let mu = params.mu();
    // Scaled unknowns (wψ, ψ_t) keep both components O(1) for oscillatory modes.
    let w = if lam > 0.0 { lam } else { 1.0 };
    let lam2_over_w = lam * lam / w;
    let mut sys = (2usize, move |t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = w * y[1];
        dy[1] = -lam2_over_w * y[0] - mu / (1.0 + t) * y[1];
    });
    let opts = OdeOptions {
        rtol,
        atol: ORACLE_ATOL,
        ..OdeOptions::default()
    };
    let mut solver = Dop853::new(2, opts);
    let mut y = [0.0, 1.0];
    let mut tc = s;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        solver
            .integrate_to(&mut sys, &mut tc, &mut y, t)
            .map_err(|source| KernelError::Oracle {
                source,
                t,
                s,
                xi: xi_abs,
            })?;
        out.push((y[0] / w, y[1]));
    }
    Ok(out)
}

/// Separable factors of the multiplier for one mode:
/// `|ξ|^{jσ}∂_t^kψ(t,s) = c·[T_Y(t) S_J(s) − T_J(t) S_Y(s)]` with
/// `T_C(t) = (1+t)^ρ C_{ρ−k}(λ(1+t))`, `S_C(s) = (1+s)^{1−ρ} C_ρ(λ(1+s))`
/// and `c = (π/2) λ^{k+j}`. Duhamel sums over s then reduce to two running
/// sums per mode. For ρ < 0 the Bessel orders are flipped to −ρ and −ρ+k
/// (with c → (−1)^k c), which is the same product without cancellation.
#[derive(Debug, Clone, Copy)]
pub struct ModeFactors {
    lam: f64,
    rho: f64,
    target_order: f64,
    source_order: f64,
    scale: f64,
}

impl ModeFactors {
    pub fn new(xi_abs: f64, j: u8, k: u8, params: &ModelParams) -> Result<Self, KernelError> {
        let lam = validate_mode(0.0, 0.0, xi_abs, j, k, params)?;
        let (source_order, target_order, sign) = cross_orders(params.rho(), k);
        Ok(Self {
            lam,
            rho: params.rho(),
            target_order,
            source_order,
            scale: sign * FRAC_PI_2 * lam.powi((k + j) as i32),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lam
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// (T_J(t), T_Y(t)).
    pub fn target(&self, t: f64) -> Result<(f64, f64), KernelError> {
        let tt = 1.0 + t;
        let p = bessel_jy(self.target_order, self.lam * tt)?;
        let w = tt.powf(self.rho);
        Ok((w * p.j, w * p.y))
    }

    /// (S_J(s), S_Y(s)).
    pub fn source(&self, s: f64) -> Result<(f64, f64), KernelError> {
        let ts = 1.0 + s;
        let p = bessel_jy(self.source_order, self.lam * ts)?;
        let w = ts.powf(1.0 - self.rho);
        Ok((w * p.j, w * p.y))
    }

    pub fn combine(&self, target: (f64, f64), source: (f64, f64)) -> f64 {
        self.scale * (target.1 * source.0 - target.0 * source.1)
    }
}

/// Outcome of the one-time self-check of every kernel representation.
#[derive(Debug, Clone)]
pub struct Calibration {
    /// (form, max |∂_tψ(s,s) − 1| over the probes)
    pub initial_slope: Vec<(KernelForm, f64)>,
    /// (form, max relative deviation from the ODE oracle)
    pub oracle: Vec<(KernelForm, f64)>,
    pub failures: Vec<String>,
}

impl Calibration {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn calibration() -> &'static Calibration {
    static CELL: OnceLock<Calibration> = OnceLock::new();
    CELL.get_or_init(run_calibration)
}

fn run_calibration() -> Calibration {
    let mut cal = Calibration {
        initial_slope: Vec::new(),
        oracle: Vec::new(),
        failures: Vec::new(),
    };
    // μ = 0.6 (ρ = 0.2, csc-eligible) and μ = 3 (ρ = −1, integer order)
    let cases: [(f64, &[KernelForm]); 2] = [
        (
            0.6,
            &[KernelForm::Hankel, KernelForm::BesselCsc, KernelForm::BesselJY],
        ),
        (3.0, &[KernelForm::Hankel, KernelForm::BesselJY]),
    ];
    for (mu, forms) in cases {
        let params = ModelParams::new(1, 2.0, mu).expect("valid calibration params");
        for &form in forms {
            let mut slope_dev = 0.0_f64;
            let mut oracle_dev = 0.0_f64;
            for &(s, xi) in &[(0.0, 0.05), (2.0, 0.3), (5.0, 1.5)] {
                match eval_psi_with(s, s, xi, 0, 1, &params, form) {
                    Ok(v) => slope_dev = slope_dev.max((v.psi.re - 1.0).abs()),
                    Err(e) => cal.failures.push(format!("{form:?} mu={mu}: {e}")),
                }
                let t = s + 1.5;
                match (
                    eval_psi_with(t, s, xi, 0, 0, &params, form),
                    ode_oracle(t, s, xi, &params),
                ) {
                    (Ok(v), Ok((want, _))) => {
                        oracle_dev = oracle_dev.max((v.psi.re - want).abs() / (1.0 + want.abs()))
                    }
                    (Err(e), _) => cal.failures.push(format!("{form:?} mu={mu}: {e}")),
                    (_, Err(e)) => cal.failures.push(format!("oracle mu={mu}: {e}")),
                }
            }
            if slope_dev > 1e-9 {
                cal.failures
                    .push(format!("{form:?} mu={mu}: dψ/dt(s,s) off by {slope_dev:e}"));
            }
            if oracle_dev > 1e-6 {
                cal.failures
                    .push(format!("{form:?} mu={mu}: oracle deviation {oracle_dev:e}"));
            }
            cal.initial_slope.push((form, slope_dev));
            cal.oracle.push((form, oracle_dev));
        }
    }
    cal
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(mu: f64) -> ModelParams {
        ModelParams::new(1, 2.0, mu).unwrap()
    }

    #[test]
    fn zone_examples() {
        let p = params(2.0);
        assert_eq!(classify_zone(0.0, 0.0, 2.0, &p).unwrap(), ZoneLabel::ZHigh);
        let xi = 0.1f64.powf(0.5);
        assert_eq!(classify_zone(30.0, 1.0, xi, &p).unwrap(), ZoneLabel::Z2);
        let xi = 0.5f64.powf(0.5);
        assert_eq!(classify_zone(10.0, 3.0, xi, &p).unwrap(), ZoneLabel::Z1);
        assert_eq!(classify_zone(1.0, 0.0, 1e-3, &p).unwrap(), ZoneLabel::Z3);
        assert!(matches!(
            classify_zone(1.0, 2.0, 0.5, &p),
            Err(KernelError::TimeOrder { .. })
        ));
    }

    #[test]
    fn zone_boundaries_go_low() {
        let p = params(2.0);
        assert_eq!(classify_zone(0.0, 0.0, 1.0, &p).unwrap(), ZoneLabel::ZHigh);
        // (1+s)|ξ|^σ = 1 exactly
        let xi = 0.5f64.sqrt();
        assert_eq!(classify_zone(3.0, 1.0, xi, &p).unwrap(), ZoneLabel::Z1);
        // (1+t)|ξ|^σ = 1 exactly with (1+s)|ξ|^σ < 1
        let xi = 0.25f64.sqrt();
        assert_eq!(classify_zone(3.0, 1.0, xi, &p).unwrap(), ZoneLabel::Z2);
    }

    #[test]
    fn cutoff_examples() {
        let p = params(2.0);
        // (1+s)λ = 0.25, (1+t)λ = 0.3
        let xi = 0.25f64.sqrt();
        let (c1, c2, c3) = smooth_cutoffs(0.2, 0.0, xi, &p).unwrap();
        assert_eq!((c1, c2, c3), (0.0, 0.0, 1.0));
        let xi = 2f64.sqrt();
        let (c1, c2, c3) = smooth_cutoffs(0.0, 0.0, xi, &p).unwrap();
        assert_eq!((c1, c2, c3), (1.0, 0.0, 0.0));
        for &(t, s, xi) in &[(3.0, 0.5, 0.6), (100.0, 2.0, 0.11), (1.0, 1.0, 0.8)] {
            let (c1, c2, c3) = smooth_cutoffs(t, s, xi, &p).unwrap();
            assert!((c1 + c2 + c3 - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn chi_is_monotone_and_smooth() {
        let mut prev = 1.0;
        for i in 0..=1000 {
            let r = 0.4 + 0.7 * i as f64 / 1000.0;
            let c = chi(r);
            assert!(c <= prev + 1e-15 && (0.0..=1.0).contains(&c));
            prev = c;
        }
        assert!((chi(0.75) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_mode_examples() {
        let p2 = params(2.0);
        for &t in &[0.0, 0.5, 3.0, 100.0] {
            let v = eval_psi_zero_mode(t, 0.0, &p2).unwrap();
            assert!((v - t / (1.0 + t)).abs() < 1e-15);
        }
        let p1 = params(1.0);
        let v = eval_psi_zero_mode(std::f64::consts::E - 1.0, 0.0, &p1).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        assert_eq!(eval_psi_zero_mode(4.0, 4.0, &p2).unwrap(), 0.0);
        assert_eq!(eval_psi_zero_mode_dt(4.0, 4.0, &p2).unwrap(), 1.0);
    }

    #[test]
    fn zero_mode_continuous_in_mu() {
        let a = eval_psi_zero_mode(9.0, 1.0, &params(1.0)).unwrap();
        let b = eval_psi_zero_mode(9.0, 1.0, &params(1.0 + 1e-9)).unwrap();
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn zero_mode_matches_oracle_at_tiny_xi() {
        for &mu in &[0.5, 1.0, 2.0] {
            let p = params(mu);
            let (psi, psi_t) = ode_oracle(7.0, 1.0, 0.0, &p).unwrap();
            assert!((psi - eval_psi_zero_mode(7.0, 1.0, &p).unwrap()).abs() < 1e-9);
            assert!((psi_t - eval_psi_zero_mode_dt(7.0, 1.0, &p).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn spec_oracle_examples() {
        let p = ModelParams::new(1, 2.0, 2.0).unwrap();
        let v = eval_psi(2.0, 0.0, 1.0, 0, 0, &p).unwrap();
        let (o, _) = ode_oracle(2.0, 0.0, 1.0, &p).unwrap();
        assert!((v.psi.re - o).abs() <= 1e-6 * o.abs());

        let p = ModelParams::new(1, 2.0, 0.5).unwrap();
        let v = eval_psi(5.0, 1.0, 0.3, 0, 0, &p).unwrap();
        let (o, _) = ode_oracle(5.0, 1.0, 0.3, &p).unwrap();
        assert!((v.psi.re - o).abs() <= 1e-6 * o.abs());
    }

    #[test]
    fn argument_errors() {
        let p = params(2.0);
        assert_eq!(eval_psi(1.0, 0.0, 0.0, 0, 0, &p), Err(KernelError::ZeroMode));
        assert!(matches!(
            eval_psi(1.0, 0.0, 0.5, 1, 1, &p),
            Err(KernelError::UnsupportedOrder { .. })
        ));
        assert!(matches!(
            eval_psi(1.0, 2.0, 0.5, 0, 0, &p),
            Err(KernelError::TimeOrder { .. })
        ));
    }

    #[test]
    fn calibration_passes() {
        let cal = calibration();
        assert!(cal.passed(), "{:?}", cal.failures);
        assert_eq!(cal.initial_slope.len(), 5);
    }

    #[test]
    fn factors_reproduce_eval_psi() {
        for &mu in &[0.6, 1.0, 3.0] {
            let p = params(mu);
            for &(t, s, xi) in &[(10.0, 2.0, 0.2), (50.0, 0.0, 3.0), (3.0, 1.0, 0.01)] {
                for (j, k) in [(0u8, 0u8), (0, 1), (1, 0)] {
                    let f = ModeFactors::new(xi, j, k, &p).unwrap();
                    let v = f.combine(f.target(t).unwrap(), f.source(s).unwrap());
                    let want = eval_psi(t, s, xi, j, k, &p).unwrap().psi.re;
                    assert!((v - want).abs() <= 1e-10 * (1.0 + want.abs()), "mu={mu} t={t} xi={xi}");
                }
            }
        }
    }
}
