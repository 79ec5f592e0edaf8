use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;
use sigma_evolve::predictor::{
    critical_exponent, critical_exponent_raw, existence_verdict, high_freq_gamma, linear_decay,
    mu_sharp, q_thresholds, semilinear_decay, to_rational, CaseId, ExtReal, MuSharp, Quantity,
    VerdictKind,
};
use sigma_evolve::ModelParams;

fn mp(n: u32, sigma: f64, mu: f64) -> ModelParams {
    ModelParams::new(n, sigma, mu).unwrap()
}

fn fin(x: f64) -> ExtReal {
    ExtReal::Finite(to_rational(x, "x").unwrap())
}

fn rat(x: f64) -> BigRational {
    to_rational(x, "x").unwrap()
}

#[test]
fn critical_exponent_examples() {
    assert_eq!(critical_exponent(&mp(1, 2.0, 0.75)).unwrap().p_crit, fin(9.0));
    assert_eq!(critical_exponent(&mp(2, 2.0, 3.0)).unwrap().p_crit, fin(3.0));
    let e0 = critical_exponent_raw(1, 2.0, 0.0).unwrap();
    assert_eq!(e0.p_kato, ExtReal::Infinity);
    assert_eq!(e0.p_fujita, fin(5.0));
}

#[test]
fn mu_sharp_examples() {
    let v = mu_sharp(1, 2.0, 1.5).unwrap().to_f64().unwrap();
    assert!((v - 1.2807764064044151).abs() <= 1e-15);
    assert_eq!(mu_sharp(1, 2.0, 0.5).unwrap(), MuSharp::Infinite);
    // n/σ = 2 lies between the discriminant roots 1 and 9
    assert_eq!(mu_sharp(4, 2.0, 1.5).unwrap(), MuSharp::Undefined);
}

#[test]
fn q_threshold_examples() {
    let (q0, _) = q_thresholds(&mp(1, 2.0, 1.5)).unwrap();
    assert_eq!(q0, ExtReal::Infinity);
    let (_, q1) = q_thresholds(&mp(1, 2.0, 0.75)).unwrap();
    assert_eq!(q1, ExtReal::Infinity);
}

#[test]
fn linear_decay_examples() {
    let d = linear_decay(Quantity::Lq { q: 2.0 }, 0.0, &mp(1, 2.0, 3.0)).unwrap();
    assert_eq!((d.rate, d.log_power, d.case_id), (-0.25, 0.0, CaseId::LqI));
    let d = linear_decay(Quantity::Lq { q: 2.0 }, 0.0, &mp(1, 2.0, 0.6)).unwrap();
    assert_eq!(d.case_id, CaseId::LqIII);
    assert!((d.rate - 0.15).abs() < 1e-15);
    let d = linear_decay(Quantity::HdotGamma { gamma: 2.0 }, 0.0, &mp(1, 2.0, 3.0)).unwrap();
    assert_eq!((d.rate, d.case_id), (-1.25, CaseId::HdotI));
    let u = linear_decay(Quantity::UtL2, 0.0, &mp(1, 2.0, 3.0)).unwrap();
    assert_eq!(u.rate, d.rate);
}

#[test]
fn linear_decay_boundaries() {
    // n=1, σ=2, q=∞: β = 1/2, so μ = 2β = 1 hits the μ = 1 clause with q at the log pivot
    let d = linear_decay(Quantity::Linf, 0.0, &mp(1, 2.0, 1.0)).unwrap();
    assert_eq!((d.case_id, d.rate, d.log_power), (CaseId::LqIV, -0.5, 2.0));
    // n=3, σ=2, q=2: β = 3/4, μ = 2β = 3/2 > 1
    let d = linear_decay(Quantity::Lq { q: 2.0 }, 0.0, &mp(3, 2.0, 1.5)).unwrap();
    assert_eq!((d.case_id, d.rate, d.log_power), (CaseId::LqIILogHigh, -0.75, 0.5));
    // μ = 2 − 2β = 1/2 < 1
    let d = linear_decay(Quantity::Lq { q: 2.0 }, 0.0, &mp(3, 2.0, 0.5)).unwrap();
    assert_eq!((d.case_id, d.rate, d.log_power), (CaseId::LqIILogLow, -0.25, 0.5));
    // σ = 3/2 with μ = 2 − 2n/σ · 1/2 = 4/3 cannot be written in binary but snaps exactly
    let d = linear_decay(Quantity::Lq { q: 2.0 }, 0.0, &mp(2, 1.5, 4.0 / 3.0)).unwrap();
    assert_eq!(d.case_id, CaseId::LqIILogHigh);
}

#[test]
fn semilinear_examples() {
    let d = semilinear_decay(Quantity::Lq { q: 2.0 }, &mp(1, 2.0, 3.0)).unwrap();
    assert_eq!((d.rate, d.case_id), (-0.125, CaseId::SemilinearFujita));
    let d = semilinear_decay(Quantity::Lq { q: 2.0 }, &mp(1, 2.0, 0.75)).unwrap();
    assert_eq!((d.rate, d.case_id), (0.0, CaseId::SemilinearKato));
    let d = semilinear_decay(Quantity::HdotGamma { gamma: 2.0 }, &mp(1, 2.0, 0.75)).unwrap();
    assert_eq!(d.rate, -0.375);
    let d = semilinear_decay(Quantity::UtL2, &mp(1, 2.0, 0.75)).unwrap();
    assert_eq!(d.rate, -0.375);
    assert!(semilinear_decay(Quantity::Lq { q: 2.0 }, &mp(1, 2.0, 0.4)).is_err());
}

#[test]
fn verdict_examples() {
    let v = existence_verdict(10.0, &mp(1, 2.0, 0.75), true).unwrap();
    assert_eq!(v.kind, VerdictKind::GlobalExpected);
    let v = existence_verdict(2.0, &mp(1, 2.0, 0.5), true).unwrap();
    assert_eq!(v.kind, VerdictKind::BlowupExpected);
    assert!(!v.heuristic);
    let v = existence_verdict(3.0, &mp(2, 2.0, 1.5), true).unwrap();
    assert_eq!(v.kind, VerdictKind::BlowupExpected);
    let v = existence_verdict(3.0, &mp(2, 2.5, 1.5), true).unwrap();
    assert_eq!(v.kind, VerdictKind::BlowupExpected);
    assert!(v.heuristic);
    let v = existence_verdict(2.0, &mp(1, 2.0, 0.5), false).unwrap();
    assert_eq!(v.kind, VerdictKind::Open);
}

#[test]
fn high_freq_gamma_examples() {
    assert_eq!(high_freq_gamma(2.0, 2.0).unwrap(), 0.0);
    assert_eq!(high_freq_gamma(1.0, 4.0).unwrap(), -0.25);
    assert_eq!(high_freq_gamma(2.0, f64::INFINITY).unwrap(), 0.0);
    assert!(high_freq_gamma(3.0, 2.0).is_err());
}

#[test]
fn kato_meets_fujita_at_mu_one() {
    for n in 1..=6u32 {
        for &sigma in &[1.5, 2.0, 2.5, 3.0] {
            let e = critical_exponent(&mp(n, sigma, 1.0)).unwrap();
            assert_eq!(e.p_kato, e.p_fujita, "n={n} sigma={sigma}");
        }
    }
}

#[test]
fn mu_sharp_at_least_one_when_3n_le_2sigma() {
    for n in 1..=4u32 {
        for &sigma in &[1.5, 2.0, 3.0, 4.5, 6.0] {
            if 3.0 * n as f64 > 2.0 * sigma {
                continue;
            }
            let m = mu_sharp(n, sigma, 3.0).unwrap();
            if let Some(v) = m.to_f64() {
                assert!(v >= 1.0, "n={n} sigma={sigma} mu_sharp={v}");
                let (nf, s) = (n as f64, sigma);
                if v.is_finite() {
                    let root = s * v * v + (nf - s) * v + 2.0 * (nf - s);
                    assert!(root.abs() < 1e-12);
                }
            }
        }
    }
}

fn small_rational() -> impl Strategy<Value = f64> {
    (1i64..60, prop::sample::select(vec![1i64, 2, 3, 4, 5, 6, 8])).prop_map(|(a, b)| a as f64 / b as f64)
}

fn sigma_rational() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![1.5, 2.0, 2.5, 3.0, 4.0, 4.0 / 3.0, 5.0 / 3.0])
}

fn q_choice() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![2.0, 3.0, 4.0, 6.0, 8.0, 2.5, 10.0 / 3.0, 12.0, f64::INFINITY])
}

fn beta(n: u32, sigma: f64, q: f64) -> BigRational {
    let iq = if q.is_infinite() { BigRational::from_integer(0.into()) } else { BigRational::one() / rat(q) };
    BigRational::from_integer((n as i64).into()) / rat(sigma) * (BigRational::one() - iq)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn p_crit_monotone_in_mu(
        (sigma, n) in sigma_rational().prop_flat_map(|s| (Just(s), 1u32..(s.ceil() as u32))),
        a in 0.01f64..3.0,
        b in 0.01f64..3.0,
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let pl = critical_exponent(&mp(n, sigma, lo)).unwrap().p_crit;
        let ph = critical_exponent(&mp(n, sigma, hi)).unwrap().p_crit;
        if lo >= 1.0 {
            prop_assert_eq!(pl, ph);
        } else {
            prop_assert!(ph <= pl);
        }
    }

    #[test]
    fn q1_boundary_identity(n in 1u32..6, sigma in sigma_rational(), mu in small_rational()) {
        let e = critical_exponent(&mp(n, sigma, mu)).unwrap();
        if let ExtReal::Finite(q1) = e.q1 {
            let two = BigRational::from_integer(2.into());
            let nn = BigRational::from_integer((n as i64).into());
            let back = &two - &two * nn / rat(sigma) * (BigRational::one() - BigRational::one() / q1);
            prop_assert_eq!(back, rat(mu));
        }
    }

    #[test]
    fn q_below_q0_iff_mu_large(n in 1u32..6, sigma in sigma_rational(), mu in small_rational(), q in q_choice()) {
        prop_assume!(q.is_finite());
        let (q0, _) = q_thresholds(&mp(n, sigma, mu)).unwrap();
        let lhs = match &q0 { ExtReal::Infinity => true, ExtReal::Finite(v) => rat(q) <= *v };
        let two = BigRational::from_integer(2.into());
        let rhs = rat(mu) >= two * beta(n, sigma, q);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn q_thresholds_at_least_two_in_their_regimes(n in 1u32..6, sigma in sigma_rational(), mu in small_rational()) {
        let p = mp(n, sigma, mu);
        let (q0, q1) = q_thresholds(&p).unwrap();
        let ok = semilinear_decay(Quantity::Linf, &p).map(|d| d.case_id);
        let two = BigRational::from_integer(2.into());
        match ok {
            Ok(CaseId::SemilinearKato) => prop_assert!(q1.finite().map_or(true, |v| *v >= two)),
            Ok(_) => prop_assert!(q0.finite().map_or(true, |v| *v >= two)),
            Err(_) => {}
        }
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn verdicts_are_exclusive(n in 1u32..5, sigma in sigma_rational(), mu in small_rational(), p in 1.01f64..20.0) {
        let params = mp(n, sigma, mu);
        let with_mass = existence_verdict(p, &params, true).unwrap();
        let without = existence_verdict(p, &params, false).unwrap();
        prop_assert_ne!(without.kind, VerdictKind::BlowupExpected);
        if with_mass.kind == VerdictKind::BlowupExpected {
            prop_assert_ne!(without.kind, VerdictKind::GlobalExpected);
            prop_assert_eq!(with_mass.heuristic, sigma.fract() != 0.0);
        } else {
            prop_assert_eq!(with_mass.kind, without.kind);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn every_case_is_classified_once(n in 1u32..6, sigma in sigma_rational(), mu in small_rational(), q in q_choice()) {
        prop_assume!((n as f64) < 2.0 * sigma);
        let p = mp(n, sigma, mu);
        let quantity = if q.is_infinite() { Quantity::Linf } else { Quantity::Lq { q } };
        let d = linear_decay(quantity, 0.0, &p).unwrap();
        let two = BigRational::from_integer(2.into());
        let b2 = &two * beta(n, sigma, q);
        let m = rat(mu);
        let one = BigRational::one();
        let expected = if m == one {
            CaseId::LqIV
        } else if m > one {
            if m > b2 { CaseId::LqI } else if m == b2 { CaseId::LqIILogHigh } else { CaseId::LqII }
        } else {
            let edge = &two - &b2;
            if m > edge { CaseId::LqII } else if m == edge { CaseId::LqIILogLow } else { CaseId::LqIII }
        };
        prop_assert_eq!(d.case_id, expected);
        let log_case = matches!(d.case_id, CaseId::LqIILogHigh | CaseId::LqIILogLow | CaseId::LqIV);
        prop_assert_eq!(d.log_power > 0.0, log_case);
        // nudging μ off a boundary leaves the log cases
        if log_case && m != one {
            let d2 = linear_decay(quantity, 0.0, &mp(n, sigma, mu + 1e-6)).unwrap();
            prop_assert_eq!(d2.log_power, 0.0);
        }
        // rates are continuous across the boundaries up to the log factor
        let d3 = linear_decay(quantity, 0.0, &mp(n, sigma, mu * (1.0 + 1e-9))).unwrap();
        prop_assert!((d3.rate - d.rate).abs() < 1e-6);
    }
}
