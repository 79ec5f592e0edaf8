use proptest::prelude::*;
use sigma_evolve::kernel::{
    eval_psi, eval_psi_with, eval_psi_zero_mode, ode_oracle, ode_oracle_path, select_form,
    KernelForm, ZoneLabel, HANKEL_MIN_ARG, ORACLE_RTOL,
};
use sigma_evolve::ModelParams;

fn params(sigma: f64, mu: f64) -> ModelParams {
    ModelParams::new(1, sigma, mu).unwrap()
}

fn sigma_choice() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![1.5, 2.0, 2.5, 3.0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn initial_conditions(
        s in 0.0f64..100.0,
        log_xi in -3.0f64..1.0,
        mu in 0.05f64..4.5,
        sigma in sigma_choice(),
    ) {
        let p = params(sigma, mu);
        let xi = 10f64.powf(log_xi);
        let v = eval_psi(s, s, xi, 0, 0, &p).unwrap();
        prop_assert_eq!(v.psi.re, 0.0);
        prop_assert!(v.psi.im.abs() <= 1e-9);
        let d = eval_psi(s, s, xi, 0, 1, &p).unwrap();
        prop_assert!((d.psi.re - 1.0).abs() <= 1e-9, "dpsi = {}", d.psi.re);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn agrees_with_oracle(
        t in 0.0f64..60.0,
        frac in 0.0f64..1.0,
        log_xi in -3.0f64..1.0,
        mu in 0.2f64..4.0,
        sigma in sigma_choice(),
    ) {
        let s = frac * t;
        let xi = 10f64.powf(log_xi);
        let p = params(sigma, mu);
        let (o, ot) = ode_oracle(t, s, xi, &p).unwrap();
        let v = eval_psi(t, s, xi, 0, 0, &p).unwrap().psi;
        let vt = eval_psi(t, s, xi, 0, 1, &p).unwrap().psi;
        prop_assert!((v.re - o).abs() <= 1e-6 * (1.0 + o.abs()), "psi {} vs {}", v.re, o);
        prop_assert!((vt.re - ot).abs() <= 1e-6 * (1.0 + ot.abs()), "psi_t {} vs {}", vt.re, ot);
        prop_assert!(v.im.abs() <= 1e-9 * (1.0 + v.norm()));
        prop_assert!(vt.im.abs() <= 1e-9 * (1.0 + vt.norm()));
        let w = eval_psi(t, s, xi, 1, 0, &p).unwrap().psi.re;
        let lam = xi.powf(sigma);
        prop_assert!((w - lam * v.re).abs() <= 1e-12 * (1.0 + w.abs()));
    }

    #[test]
    fn ode_residual(
        t in 0.5f64..50.0,
        frac in 0.0f64..0.9,
        log_xi in -2.0f64..0.5,
        mu in 0.2f64..4.0,
        sigma in sigma_choice(),
    ) {
        let s = frac * t;
        let xi = 10f64.powf(log_xi);
        let lam = xi.powf(sigma);
        prop_assume!((1.0 + t) * lam <= 1e3);
        let p = params(sigma, mu);
        // step resolves both the damping scale 1+t and the oscillation scale 1/λ
        let h = 1e-3 * (1.0 + t).min(1.0 / lam).min(t - s);
        let psi = |tt: f64| eval_psi(tt, s, xi, 0, 0, &p).unwrap().psi.re;
        let v = psi(t);
        let vt = eval_psi(t, s, xi, 0, 1, &p).unwrap().psi.re;
        let vtt = (psi(t + h) - 2.0 * v + psi(t - h)) / (h * h);
        let res = vtt + lam * lam * v + mu / (1.0 + t) * vt;
        prop_assert!(res.abs() <= 1e-5 * lam * lam * (v.abs() + 1.0) + 1e-6, "residual {res}");
    }
}

#[test]
fn every_zone_and_boundary_matches_oracle() {
    for &sigma in &[1.5, 2.0, 3.0] {
        for &mu in &[0.3, 1.0, 2.2, 3.0] {
            let p = params(sigma, mu);
            let (t, s): (f64, f64) = (40.0, 3.0);
            // |ξ| = 1, (1+s)λ = 1 and (1+t)λ = 1, each approached from both sides
            let edges = [
                1.0,
                (1.0 / (1.0 + s) as f64).powf(1.0 / sigma),
                (1.0 / (1.0 + t) as f64).powf(1.0 / sigma),
            ];
            let mut seen = std::collections::HashSet::new();
            for &edge in &edges {
                for &f in &[1.0 - 1e-9, 1.0, 1.0 + 1e-9, 0.8, 1.25] {
                    let xi = edge * f;
                    let v = eval_psi(t, s, xi, 0, 0, &p).unwrap();
                    seen.insert(v.zone);
                    let (o, _) = ode_oracle(t, s, xi, &p).unwrap();
                    assert!(
                        (v.psi.re - o).abs() <= 1e-6 * (1.0 + o.abs()),
                        "sigma={sigma} mu={mu} xi={xi} zone={:?}",
                        v.zone
                    );
                }
                // continuity across the edge
                let lo = eval_psi(t, s, edge * (1.0 - 1e-10), 0, 0, &p).unwrap().psi.re;
                let hi = eval_psi(t, s, edge * (1.0 + 1e-10), 0, 0, &p).unwrap().psi.re;
                assert!((lo - hi).abs() <= 1e-7 * (1.0 + lo.abs()));
            }
            for z in [ZoneLabel::ZHigh, ZoneLabel::Z1, ZoneLabel::Z2, ZoneLabel::Z3] {
                assert!(seen.contains(&z), "zone {z:?} not visited");
            }
        }
    }
}

#[test]
fn integer_order_seam() {
    let exact = params(2.0, 3.0);
    let near = params(2.0, 3.0 - 2e-7);
    for &(t, s, xi) in &[(5.0, 0.0, 0.02), (50.0, 10.0, 0.001), (20.0, 1.0, 0.5), (3.0, 0.0, 4.0)] {
        for k in 0..2u8 {
            let a = eval_psi(t, s, xi, 0, k, &exact).unwrap().psi.re;
            let b = eval_psi(t, s, xi, 0, k, &near).unwrap().psi.re;
            assert!((a - b).abs() <= 1e-5 * a.abs().max(1e-300), "t={t} xi={xi} k={k}");
        }
    }
}

#[test]
fn small_argument_forms_agree() {
    // Both Bessel determinant forms everywhere, plus Hankel once a ≥ HANKEL_MIN_ARG.
    for &mu in &[0.3, 0.6, 1.7, 2.5, 3.5, 3.0008] {
        let p = params(2.0, mu);
        for &(t, s, xi) in &[(10.0, 0.0, 0.02), (80.0, 5.0, 0.005), (1.0, 0.5, 0.3), (3.0, 1.0, 1.2)] {
            for k in 0..2u8 {
                let jy = eval_psi_with(t, s, xi, 0, k, &p, KernelForm::BesselJY).unwrap().psi.re;
                let csc = eval_psi_with(t, s, xi, 0, k, &p, KernelForm::BesselCsc).unwrap().psi.re;
                let scale = 1.0 + jy.abs();
                assert!((jy - csc).abs() <= 1e-10 * scale, "mu={mu} t={t} xi={xi} k={k}");
                let a = xi * xi * (1.0 + s);
                if a >= HANKEL_MIN_ARG {
                    let hk = eval_psi_with(t, s, xi, 0, k, &p, KernelForm::Hankel).unwrap().psi.re;
                    assert!((jy - hk).abs() <= 1e-10 * scale, "mu={mu} t={t} xi={xi} k={k}");
                }
            }
        }
    }
}

#[test]
fn routing() {
    assert_eq!(select_form(1.5, 2.0, 0.2), KernelForm::Hankel);
    assert_eq!(select_form(0.5, 2.0, -1.3), KernelForm::BesselCsc);
    assert_eq!(select_form(1e-3, 2.0, 0.2), KernelForm::BesselCsc);
    assert_eq!(select_form(1e-3, 2.0, -1.0), KernelForm::BesselJY);
    assert_eq!(select_form(1e-3, 2.0, -1.0 + 1e-7), KernelForm::BesselJY);
    assert_eq!(select_form(1e-300, 1e-299, -1.5), KernelForm::Ode);
}

#[test]
fn tiny_modes_approach_zero_mode() {
    for &mu in &[0.4, 1.0, 3.0] {
        let p = params(2.0, mu);
        let z = eval_psi_zero_mode(30.0, 2.0, &p).unwrap();
        let v = eval_psi(30.0, 2.0, 1e-5, 0, 0, &p).unwrap().psi.re;
        assert!((v - z).abs() <= 1e-6 * (1.0 + z.abs()), "mu={mu}: {v} vs {z}");
    }
}

#[test]
fn oracle_energy_is_nonincreasing() {
    for &(mu, xi, sigma) in &[(0.5, 0.3, 2.0), (3.0, 2.0, 1.5), (1.0, 0.05, 3.0)] {
        let p = params(sigma, mu);
        let lam = f64::powf(xi, sigma);
        let times: Vec<f64> = (0..400).map(|i| 1.0 + 0.1 * i as f64).collect();
        let path = ode_oracle_path(&times, 1.0, xi, &p, ORACLE_RTOL).unwrap();
        let energy: Vec<f64> = path
            .iter()
            .map(|(v, vt)| vt * vt + lam * lam * v * v)
            .collect();
        assert_eq!(energy[0], 1.0);
        for w in energy.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9), "{} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn oracle_tolerance_halving() {
    let p = params(2.0, 0.5);
    let a = ode_oracle_path(&[5.0], 1.0, 0.3, &p, ORACLE_RTOL).unwrap()[0];
    let b = ode_oracle_path(&[5.0], 1.0, 0.3, &p, 0.5 * ORACLE_RTOL).unwrap()[0];
    assert!((a.0 - b.0).abs() <= 1e-8 * (1.0 + a.0.abs()));
    assert_eq!(ode_oracle(1.0, 1.0, 0.3, &p).unwrap(), (0.0, 1.0));
}
