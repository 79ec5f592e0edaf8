//! Closed-form exponents, decay rates and existence verdicts.
//!
//! Case boundaries are equalities between rational expressions in (n, σ, μ, q),
//! so all classification runs in exact rational arithmetic. Float inputs are
//! first mapped to the simplest rational within 1e−12 relative, which recovers
//! values such as 0.6 = 3/5 or 4/3 that binary floats cannot represent.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::params::ModelParams;

pub type Q = BigRational;

/// Largest continued-fraction denominator tried before falling back to the
/// exact binary value of the float.
const MAX_DENOMINATOR: i64 = 10_000;
const SNAP_RTOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictError {
    #[error("{what} must be finite (got {value})")]
    NonFinite { what: &'static str, value: f64 },
    #[error("{what} out of range: {detail}")]
    Domain { what: &'static str, detail: String },
    #[error("unsupported regime: {0}")]
    Unsupported(String),
    #[error("open regime: {0}")]
    Open(String),
}

/// Extended real: a rational or +∞.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExtReal {
    Finite(Q),
    Infinity,
}

impl ExtReal {
    pub fn to_f64(&self) -> f64 {
        match self {
            ExtReal::Finite(q) => q.to_f64().unwrap_or(f64::NAN),
            ExtReal::Infinity => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(&self) -> Option<&Q> {
        match self {
            ExtReal::Finite(q) => Some(q),
            ExtReal::Infinity => None,
        }
    }

    /// `num / [bracket]_+`, with +∞ when the bracket is not positive.
    fn ratio_pos(num: Q, bracket: Q) -> Self {
        if bracket.is_positive() {
            ExtReal::Finite(num / bracket)
        } else {
            ExtReal::Infinity
        }
    }

    fn le_q(&self, x: &Q) -> bool {
        matches!(self, ExtReal::Finite(v) if v <= x)
    }

    fn ge_q(&self, x: &Q) -> bool {
        match self {
            ExtReal::Finite(v) => v >= x,
            ExtReal::Infinity => true,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(q) => write!(f, "{q}"),
            ExtReal::Infinity => write!(f, "inf"),
        }
    }
}

/// JSON form: a number, or the string "inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(_) => s.serialize_f64(self.to_f64()),
            ExtReal::Infinity => s.serialize_str("inf"),
        }
    }
}

fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn half() -> Q {
    Q::new(BigInt::one(), BigInt::from(2))
}

/// Simplest rational within 1e−12 relative of `x` (denominator ≤ 10⁴),
/// otherwise the exact binary value.
pub fn to_rational(x: f64, what: &'static str) -> Result<Q, PredictError> {
    if !x.is_finite() {
        return Err(PredictError::NonFinite { what, value: x });
    }
    let tol = SNAP_RTOL * x.abs().max(1.0);
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let (Some(h2), Some(k2)) = (
            a.checked_mul(h1).and_then(|v| v.checked_add(h0)),
            a.checked_mul(k1).and_then(|v| v.checked_add(k0)),
        ) else {
            break;
        };
        if k2 > MAX_DENOMINATOR {
            break;
        }
        if (h2 as f64 / k2 as f64 - x).abs() <= tol {
            return Ok(Q::new(BigInt::from(h2), BigInt::from(k2)));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a as f64;
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    Q::from_float(x).ok_or(PredictError::NonFinite { what, value: x })
}

/// Exact (n, σ, μ) as rationals.
#[derive(Debug, Clone)]
struct Exact {
    n: Q,
    sigma: Q,
    mu: Q,
}

impl Exact {
    fn new(n: u32, sigma: f64, mu: f64) -> Result<Self, PredictError> {
        Ok(Self {
            n: q(n as i64),
            sigma: to_rational(sigma, "sigma")?,
            mu: to_rational(mu, "mu")?,
        })
    }

    fn from_params(p: &ModelParams) -> Result<Self, PredictError> {
        Self::new(p.n(), p.sigma(), p.mu())
    }

    fn sigma_is_integer(&self) -> bool {
        self.sigma.is_integer()
    }

    /// p_K(n+σμ) = (n+σ+σμ)/[n−σ+σμ]_+.
    fn p_kato(&self) -> ExtReal {
        let sm = &self.sigma * &self.mu;
        ExtReal::ratio_pos(&self.n + &self.sigma + &sm, &self.n - &self.sigma + &sm)
    }

    /// 1 + 2σ/n.
    fn p_fujita(&self) -> Q {
        q(1) + q(2) * &self.sigma / &self.n
    }

    /// q₀ = 2n/[2n − σμ]_+.
    fn q0(&self) -> ExtReal {
        ExtReal::ratio_pos(q(2) * &self.n, q(2) * &self.n - &self.sigma * &self.mu)
    }

    /// q₁ = 1 + (2σ − σμ)/[2n − 2σ + σμ]_+.
    fn q1(&self) -> ExtReal {
        let sm = &self.sigma * &self.mu;
        match ExtReal::ratio_pos(
            q(2) * &self.sigma - &sm,
            q(2) * &self.n - q(2) * &self.sigma + &sm,
        ) {
            ExtReal::Finite(v) => ExtReal::Finite(v + q(1)),
            ExtReal::Infinity => ExtReal::Infinity,
        }
    }

    fn mu_sharp(&self) -> MuSharp {
        let branch = q(2) - q(2) * &self.n / &self.sigma;
        if self.mu <= branch {
            return MuSharp::Infinite;
        }
        let s = &self.sigma;
        let n = &self.n;
        let disc = q(9) * s * s - q(10) * n * s + n * n;
        if disc.is_negative() {
            return MuSharp::Undefined;
        }
        MuSharp::Root {
            base: s - n,
            disc,
            denom: q(2) * s,
        }
    }

    /// μ < min{μ♯, 1}; `None` when μ♯ is undefined.
    fn mu_below_kato_ceiling(&self) -> Option<bool> {
        if self.mu >= q(1) {
            return Some(false);
        }
        match self.mu_sharp() {
            MuSharp::Infinite => Some(true),
            MuSharp::Undefined => None,
            MuSharp::Root { .. } => Some(self.mu_sharp().exceeds(&self.mu)),
        }
    }

    fn ratio(&self) -> Q {
        &self.n / &self.sigma
    }
}

/// μ♯, kept exactly as (base + √disc)/denom so that μ < μ♯ is decided
/// without rounding.
#[derive(Debug, Clone, PartialEq)]
pub enum MuSharp {
    Infinite,
    Root { base: Q, disc: Q, denom: Q },
    /// Negative discriminant; the hypothesis that uses μ♯ cannot hold.
    Undefined,
}

impl MuSharp {
    pub fn to_f64(&self) -> Option<f64> {
        match self {
            MuSharp::Infinite => Some(f64::INFINITY),
            MuSharp::Undefined => None,
            MuSharp::Root { base, disc, denom } => {
                let b = base.to_f64()?;
                let d = disc.to_f64()?;
                Some((b + d.sqrt()) / denom.to_f64()?)
            }
        }
    }

    /// Exact test x < μ♯.
    pub fn exceeds(&self, x: &Q) -> bool {
        match self {
            MuSharp::Infinite => true,
            MuSharp::Undefined => false,
            MuSharp::Root { base, disc, denom } => {
                // x < (base + √disc)/denom with denom > 0  ⇔  x·denom − base < √disc
                let lhs = x * denom - base;
                lhs.is_negative() || &lhs * &lhs < *disc
            }
        }
    }
}

impl Serialize for MuSharp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            MuSharp::Infinite => s.serialize_str("inf"),
            MuSharp::Undefined => s.serialize_none(),
            MuSharp::Root { .. } => s.serialize_f64(self.to_f64().unwrap_or(f64::NAN)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exponents {
    pub p_kato: ExtReal,
    pub p_fujita: ExtReal,
    pub p_crit: ExtReal,
    pub mu_sharp: MuSharp,
    pub q0: ExtReal,
    pub q1: ExtReal,
}

pub fn critical_exponent(params: &ModelParams) -> Result<Exponents, PredictError> {
    critical_exponent_raw(params.n(), params.sigma(), params.mu())
}

/// [`critical_exponent`] without the μ > 0 restriction of [`ModelParams`];
/// μ = 0 gives the undamped limit p_K(n) = (n+σ)/[n−σ]_+.
pub fn critical_exponent_raw(n: u32, sigma: f64, mu: f64) -> Result<Exponents, PredictError> {
    check_raw(n, sigma, mu)?;
    let e = Exact::new(n, sigma, mu)?;
    let p_kato = e.p_kato();
    let p_fujita = ExtReal::Finite(e.p_fujita());
    let p_crit = p_kato.clone().max(p_fujita.clone());
    Ok(Exponents {
        p_kato,
        p_fujita,
        p_crit,
        mu_sharp: e.mu_sharp(),
        q0: e.q0(),
        q1: e.q1(),
    })
}

fn check_raw(n: u32, sigma: f64, mu: f64) -> Result<(), PredictError> {
    if n == 0 {
        return Err(PredictError::Domain {
            what: "n",
            detail: "must be ≥ 1".into(),
        });
    }
    if !(sigma > 1.0 && sigma.is_finite()) {
        return Err(PredictError::Domain {
            what: "sigma",
            detail: format!("must be > 1 (got {sigma})"),
        });
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(PredictError::Domain {
            what: "mu",
            detail: format!("must be ≥ 0 (got {mu})"),
        });
    }
    Ok(())
}

pub fn mu_sharp(n: u32, sigma: f64, mu: f64) -> Result<MuSharp, PredictError> {
    check_raw(n, sigma, mu)?;
    Ok(Exact::new(n, sigma, mu)?.mu_sharp())
}

pub fn q_thresholds(params: &ModelParams) -> Result<(ExtReal, ExtReal), PredictError> {
    let e = Exact::from_params(params)?;
    Ok((e.q0(), e.q1()))
}

/// Norm whose decay is predicted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantity {
    /// L^q, 2 ≤ q < ∞.
    Lq { q: f64 },
    Linf,
    /// Homogeneous Sobolev seminorm Ḣ^γ, 0 ≤ γ ≤ σ.
    HdotGamma { gamma: f64 },
    /// ‖∂_t u‖_{L²}.
    UtL2,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Lq { q } => write!(f, "L^{q}"),
            Quantity::Linf => write!(f, "L^inf"),
            Quantity::HdotGamma { gamma } => write!(f, "Hdot^{gamma}"),
            Quantity::UtL2 => write!(f, "ut-L2"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseId {
    LqI,
    LqII,
    /// μ = (2n/σ)(1−1/q) > 1.
    LqIILogHigh,
    /// μ = 2 − (2n/σ)(1−1/q) < 1.
    LqIILogLow,
    LqIII,
    /// μ = 1.
    LqIV,
    HdotI,
    HdotII,
    HdotIILogHigh,
    HdotIILogLow,
    HdotIII,
    /// μ = 1, not covered by the energy estimates; adjacent rate with a log loss.
    HdotMuOne,
    /// Small-μ global existence regime (Kato-type exponent).
    SemilinearKato,
    /// Large-μ global existence regime (Fujita-type exponent).
    SemilinearFujita,
}

/// (1+s)-powers in front of ‖u₁‖_{L¹} and ‖u₁‖_{L²}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SDependence {
    pub l1: f64,
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayPrediction {
    /// Exponent of (1+t).
    pub rate: f64,
    /// Exponent of ln(e+t).
    pub log_power: f64,
    pub case_id: CaseId,
    pub quantity: Quantity,
    /// One entry per alternative estimate; empty for semilinear rates.
    pub s_dependence: Vec<SDependence>,
}

struct Rates {
    rate: Q,
    log: Q,
    case: CaseId,
    s: Vec<(Q, Q)>,
}

fn max_q(a: Q, b: Q) -> Q {
    if a >= b {
        a
    } else {
        b
    }
}

fn min_q(a: Q, b: Q) -> Q {
    if a <= b {
        a
    } else {
        b
    }
}

fn into_prediction(r: Rates, quantity: Quantity) -> DecayPrediction {
    let f = |x: &Q| x.to_f64().unwrap_or(f64::NAN);
    DecayPrediction {
        rate: f(&r.rate),
        log_power: f(&r.log),
        case_id: r.case,
        quantity,
        s_dependence: r
            .s
            .iter()
            .map(|(a, b)| SDependence { l1: f(a), l2: f(b) })
            .collect(),
    }
}

/// 1/q for q ∈ [2, ∞].
fn inv_q(qv: f64) -> Result<Q, PredictError> {
    if qv.is_infinite() && qv > 0.0 {
        return Ok(Q::zero());
    }
    let r = to_rational(qv, "q")?;
    if r < q(2) {
        return Err(PredictError::Domain {
            what: "q",
            detail: format!("must be ≥ 2 (got {qv})"),
        });
    }
    Ok(q(1) / r)
}

fn lq_rates(e: &Exact, inv_q: &Q) -> Rates {
    let beta = e.ratio() * (q(1) - inv_q);
    let two_beta = q(2) * &beta;
    let mu = &e.mu;
    let l2_shift = e.ratio() * half();
    let one = q(1);
    let log_edge = &one - inv_q;
    match mu.cmp(&one) {
        Ordering::Equal => {
            let rate = -min_q(beta.clone(), half());
            // q = 2n/[2n−σ]_+ exactly when 2β = 1
            let log = if two_beta == one { q(2) - inv_q } else { one.clone() };
            let l2 = q(3) * half() - e.ratio() * (half() - inv_q);
            let l1 = if two_beta > one {
                q(3) * half() - &beta
            } else {
                one.clone()
            };
            Rates {
                rate,
                log,
                case: CaseId::LqIV,
                s: vec![(l1, l2)],
            }
        }
        Ordering::Greater => match mu.cmp(&two_beta) {
            Ordering::Greater => Rates {
                rate: -beta.clone(),
                log: Q::zero(),
                case: CaseId::LqI,
                s: alt(
                    (one.clone(), &one + &l2_shift),
                    Some((max_q(one.clone(), beta.clone()), beta.clone())),
                    &beta,
                ),
            },
            Ordering::Equal => Rates {
                rate: -beta.clone(),
                log: log_edge,
                case: CaseId::LqIILogHigh,
                s: vec![(one.clone(), &one + &l2_shift)],
            },
            Ordering::Less => lq_ii(mu, &beta, &l2_shift),
        },
        Ordering::Less => {
            let edge = q(2) - &two_beta;
            match mu.cmp(&edge) {
                Ordering::Greater => lq_ii(mu, &beta, &l2_shift),
                Ordering::Equal => Rates {
                    rate: &beta - &one,
                    log: log_edge,
                    case: CaseId::LqIILogLow,
                    s: vec![(mu.clone(), mu + &l2_shift)],
                },
                Ordering::Less => Rates {
                    rate: &one - mu - &beta,
                    log: Q::zero(),
                    case: CaseId::LqIII,
                    s: alt(
                        (mu.clone(), mu + &l2_shift),
                        Some((
                            max_q(mu.clone(), mu - &one + &beta),
                            mu - &one + &beta,
                        )),
                        &beta,
                    ),
                },
            }
        }
    }
}

fn lq_ii(mu: &Q, beta: &Q, l2_shift: &Q) -> Rates {
    let one = q(1);
    let a = &one + mu * half() - beta;
    Rates {
        rate: -(mu * half()),
        log: Q::zero(),
        case: CaseId::LqII,
        s: alt(
            (a.clone(), &a + l2_shift),
            Some((
                mu * half() + max_q(Q::zero(), &one - beta),
                mu * half(),
            )),
            beta,
        ),
    }
}

/// Primary estimate plus the alternative one, which the theorem offers only
/// when (n/σ)(1−1/q) ≠ 1.
fn alt(primary: (Q, Q), second: Option<(Q, Q)>, beta: &Q) -> Vec<(Q, Q)> {
    let mut v = vec![primary];
    if let Some(s) = second {
        if !beta.is_one() {
            v.push(s);
        }
    }
    v
}

fn hdot_rates(e: &Exact, gamma: &Q) -> Rates {
    let beta = e.ratio() * half() + gamma / &e.sigma;
    let two_beta = q(2) * &beta;
    let mu = &e.mu;
    let one = q(1);
    let l2_shift = e.ratio() * half();
    let type_i = || Rates {
        rate: -beta.clone(),
        log: Q::zero(),
        case: CaseId::HdotI,
        s: vec![(one.clone(), &one + &l2_shift)],
    };
    let type_ii = || {
        let a = &one + mu * half() - &beta;
        Rates {
            rate: -(mu * half()),
            log: Q::zero(),
            case: CaseId::HdotII,
            s: vec![(a.clone(), &a + &l2_shift)],
        }
    };
    match mu.cmp(&one) {
        Ordering::Equal => {
            // adjacent clauses agree at μ = 1 on each side of 2β = 1
            let mut r = if two_beta <= one { type_i() } else { type_ii() };
            r.log += q(1);
            r.case = CaseId::HdotMuOne;
            r
        }
        Ordering::Greater => match mu.cmp(&two_beta) {
            Ordering::Greater => type_i(),
            Ordering::Equal => Rates {
                rate: -(mu * half()),
                log: half(),
                case: CaseId::HdotIILogHigh,
                s: vec![(one.clone(), &one + &l2_shift)],
            },
            Ordering::Less => type_ii(),
        },
        Ordering::Less => {
            let edge = q(2) - &two_beta;
            match mu.cmp(&edge) {
                Ordering::Greater => type_ii(),
                Ordering::Equal => Rates {
                    rate: &beta - &one,
                    log: half(),
                    case: CaseId::HdotIILogLow,
                    s: vec![(mu.clone(), mu + &l2_shift)],
                },
                Ordering::Less => Rates {
                    rate: &one - mu - &beta,
                    log: Q::zero(),
                    case: CaseId::HdotIII,
                    s: vec![(mu.clone(), mu + &l2_shift)],
                },
            }
        }
    }
}

/// Linear decay rate of ‖u(t)‖ for data u₁ given at time s.
pub fn linear_decay(
    quantity: Quantity,
    s: f64,
    params: &ModelParams,
) -> Result<DecayPrediction, PredictError> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(PredictError::Domain {
            what: "s",
            detail: format!("must be finite and ≥ 0 (got {s})"),
        });
    }
    let e = Exact::from_params(params)?;
    if e.n >= q(2) * &e.sigma {
        return Err(PredictError::Unsupported(format!(
            "n = {} ≥ 2σ = {}; only n < 2σ is covered",
            e.n,
            q(2) * &e.sigma
        )));
    }
    let r = match quantity {
        Quantity::Lq { q: qv } => lq_rates(&e, &inv_q(qv)?),
        Quantity::Linf => lq_rates(&e, &Q::zero()),
        Quantity::HdotGamma { gamma } => {
            let g = to_rational(gamma, "gamma")?;
            if g.is_negative() || g > e.sigma {
                return Err(PredictError::Domain {
                    what: "gamma",
                    detail: format!("must lie in [0, σ] (got {gamma})"),
                });
            }
            hdot_rates(&e, &g)
        }
        Quantity::UtL2 => hdot_rates(&e, &e.sigma.clone()),
    };
    Ok(into_prediction(r, quantity))
}

/// Which global-existence regime, if any, covers (n, σ, μ); the error names
/// the first failed hypothesis.
fn semilinear_regime(e: &Exact, allow_exceptional: bool) -> Result<(CaseId, bool), String> {
    let one = q(1);
    let ratio = e.ratio();
    if e.mu < one {
        if e.n >= e.sigma {
            return Err(format!("small-μ regime needs n < σ (n = {}, σ = {})", e.n, e.sigma));
        }
        if e.mu <= &one - &ratio {
            return Err(format!("needs μ > 1 − n/σ = {}", &one - &ratio));
        }
        match e.mu_below_kato_ceiling() {
            None => return Err("μ♯ is undefined (negative discriminant)".into()),
            Some(false) => return Err("needs μ < min{μ♯, 1}".into()),
            Some(true) => {}
        }
        let exceptional = e.mu == q(2) - q(2) * &ratio;
        if exceptional && !allow_exceptional {
            return Err(format!("μ = 2 − 2n/σ = {} is excluded", e.mu));
        }
        Ok((CaseId::SemilinearKato, exceptional))
    } else {
        if e.n >= q(2) * &e.sigma {
            return Err(format!("large-μ regime needs n < 2σ (n = {})", e.n));
        }
        let base = &ratio + q(2) * &e.n / (&e.n + q(2) * &e.sigma);
        // μ = 1 is admitted with a log loss when the other bound is below 1
        let at_one = e.mu == one && base < one;
        let floor = max_q(base, one.clone());
        if e.mu <= floor && !at_one {
            return Err(format!("needs μ > max{{n/σ + 2n/(n+2σ), 1}} = {floor}"));
        }
        let exceptional = at_one || e.mu == q(2) * &ratio || e.mu == &ratio + q(2);
        if exceptional && !allow_exceptional {
            return Err(format!("μ = {} is an excluded value", e.mu));
        }
        Ok((CaseId::SemilinearFujita, exceptional))
    }
}

/// Decay rate of the small-data global solution's norm.
pub fn semilinear_decay(
    quantity: Quantity,
    params: &ModelParams,
) -> Result<DecayPrediction, PredictError> {
    let e = Exact::from_params(params)?;
    let (case, exceptional) = semilinear_regime(&e, true).map_err(PredictError::Open)?;
    let ratio = e.ratio();
    let one = q(1);
    let mu = &e.mu;
    let rate = match (case, quantity) {
        (CaseId::SemilinearKato, Quantity::Lq { q: qv }) => {
            let iq = inv_q(qv)?;
            let q1 = e.q1();
            if !q1.ge_q(&(q(1) / &iq)) {
                return Err(PredictError::Open(format!("needs q ≤ q₁ = {q1}")));
            }
            -(&ratio * (&one - &iq)) + &one - mu
        }
        (CaseId::SemilinearKato, Quantity::Linf) => {
            -min_q(&ratio + mu - &one, mu * half())
        }
        (CaseId::SemilinearFujita, Quantity::Lq { q: qv }) => {
            let iq = inv_q(qv)?;
            let q0 = e.q0();
            if !q0.ge_q(&(q(1) / &iq)) {
                return Err(PredictError::Open(format!("needs q ≤ q₀ = {q0}")));
            }
            -(&ratio * half() * (&one - &iq))
        }
        (CaseId::SemilinearFujita, Quantity::Linf) => -min_q(&ratio * half(), mu * half()),
        (_, Quantity::HdotGamma { gamma }) if to_rational(gamma, "gamma")? != e.sigma => {
            return Err(PredictError::Unsupported(
                "nonlinear energy rates are stated for γ = σ only".into(),
            ))
        }
        (CaseId::SemilinearKato, _) => -(mu * half()),
        (_, _) => -min_q(&ratio * half() + &one, mu * half()),
    };
    Ok(DecayPrediction {
        rate: rate.to_f64().unwrap_or(f64::NAN),
        log_power: if exceptional { 1.0 } else { 0.0 },
        case_id: case,
        quantity,
        s_dependence: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    GlobalExpected,
    BlowupExpected,
    Open,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub rationale: String,
    /// Set when a blow-up verdict extends the test-function argument to
    /// non-integer σ, where it is not proved.
    pub heuristic: bool,
}

pub fn existence_verdict(
    p: f64,
    params: &ModelParams,
    data_mass_positive: bool,
) -> Result<Verdict, PredictError> {
    let pq = to_rational(p, "p")?;
    if pq <= q(1) {
        return Err(PredictError::Domain {
            what: "p",
            detail: format!("must be > 1 (got {p})"),
        });
    }
    let e = Exact::from_params(params)?;
    let one = q(1);
    let heuristic = !e.sigma_is_integer();

    if data_mass_positive {
        let (limit, label) = if e.mu <= one {
            (e.p_kato(), "0 < μ ≤ 1 and p ≤ p_K(n+σμ)")
        } else {
            (ExtReal::Finite(e.p_fujita()), "μ > 1 and p ≤ 1 + 2σ/n")
        };
        if limit.ge_q(&pq) {
            let mut rationale = format!("test-function nonexistence: {label} = {limit}");
            if heuristic {
                rationale.push_str(" (σ not an integer: heuristic)");
            }
            return Ok(Verdict {
                kind: VerdictKind::BlowupExpected,
                rationale,
                heuristic,
            });
        }
    }

    match semilinear_regime(&e, false) {
        Ok((CaseId::SemilinearKato, _)) => {
            let pk = e.p_kato();
            let q1 = e.q1();
            if !pk.le_q(&pq) || pk == ExtReal::Finite(pq.clone()) {
                return Ok(open(format!("small-μ regime needs p > p_K(n+σμ) = {pk}")));
            }
            if !q1.ge_q(&pq) {
                return Ok(open(format!("small-μ regime needs p ≤ q₁ = {q1}")));
            }
            Ok(Verdict {
                kind: VerdictKind::GlobalExpected,
                rationale: format!("small-μ global existence: p_K = {pk} < p ≤ q₁ = {q1}"),
                heuristic: false,
            })
        }
        Ok((_, _)) => {
            let pf = e.p_fujita();
            let half_q0 = match e.q0() {
                ExtReal::Finite(v) => ExtReal::Finite(v * half()),
                ExtReal::Infinity => ExtReal::Infinity,
            };
            if pq <= pf {
                return Ok(open(format!("large-μ regime needs p > 1 + 2σ/n = {pf}")));
            }
            if !half_q0.ge_q(&pq) {
                return Ok(open(format!("large-μ regime needs p ≤ q₀/2 = {half_q0}")));
            }
            Ok(Verdict {
                kind: VerdictKind::GlobalExpected,
                rationale: format!("large-μ global existence: 1 + 2σ/n = {pf} < p ≤ q₀/2 = {half_q0}"),
                heuristic: false,
            })
        }
        Err(why) => Ok(open(why)),
    }
}

fn open(rationale: String) -> Verdict {
    Verdict {
        kind: VerdictKind::Open,
        rationale,
        heuristic: false,
    }
}

/// Γ(p, q) in the high-frequency L^p–L^q estimate, 1 ≤ p ≤ 2 ≤ q ≤ ∞.
pub fn high_freq_gamma(p: f64, qv: f64) -> Result<f64, PredictError> {
    let pr = to_rational(p, "p")?;
    if pr < q(1) || pr > q(2) {
        return Err(PredictError::Domain {
            what: "p",
            detail: format!("must lie in [1, 2] (got {p})"),
        });
    }
    let iq = inv_q(qv)?;
    let ip = q(1) / pr;
    let g = if &ip + &iq >= q(1) {
        iq - half()
    } else {
        half() - ip
    };
    Ok(g.to_f64().unwrap_or(f64::NAN))
}
