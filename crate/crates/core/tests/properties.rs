use proptest::prelude::*;
use rajchman_core::decay::{BluhmSchedule, DecayExpr, TauExpr};
use rajchman_core::gauge::{gamma_profile, GaugeExpr, GaugeFunction, SGrid};
use rajchman_core::multipliers::*;
use rajchman_core::num::Complex;
use rajchman_core::spectral::{gm_spectrum, multiply_spectra, primes_in, psi0_hat, SparseSpectrum};

fn tau_strategy() -> impl Strategy<Value = TauExpr> {
    let leaf = prop_oneof![
        (0.0..3.0f64).prop_map(TauExpr::Const),
        (0.1..3.0f64).prop_map(TauExpr::AbsCos),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (0.1..2.0f64, inner.clone()).prop_map(|(c, t)| TauExpr::Scale(c, Box::new(t))),
            (inner.clone(), inner).prop_map(|(a, b)| TauExpr::Add(Box::new(a), Box::new(b))),
        ]
    })
}

fn expr_strategy() -> impl Strategy<Value = DecayExpr> {
    let leaf = prop_oneof![
        (0.1..5.0f64).prop_map(DecayExpr::Const),
        (0.05..3.0f64).prop_map(DecayExpr::PowerLaw),
        (0.1..4.0f64).prop_map(DecayExpr::LogPower),
        (0.1..2.0f64).prop_map(DecayExpr::ExpLogPower),
        Just(DecayExpr::InverseLogLogExponent),
        (1u32..4).prop_map(DecayExpr::ThetaK),
        Just(DecayExpr::BluhmB(BluhmSchedule::default())),
        prop::collection::vec(0.0..1.0f64, 1..4)
            .prop_filter("one positive", |c| c.iter().any(|&x| x > 0.0))
            .prop_map(|c| DecayExpr::BluhmB(BluhmSchedule::Finite(c))),
        tau_strategy().prop_map(DecayExpr::TauExponent),
    ];
    leaf.prop_recursive(2, 8, 3, |inner| {
        prop_oneof![
            (inner.clone(), 1u32..4).prop_map(|(e, n)| DecayExpr::Power(Box::new(e), n)),
            prop::collection::vec(inner.clone(), 1..3).prop_map(DecayExpr::Product),
            (0.5..3.0f64, inner).prop_map(|(w, e)| DecayExpr::AbsCosTimes(w, Box::new(e))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn grammar_round_trips(e in expr_strategy()) {
        let text = e.to_string();
        let back: DecayExpr = text.parse().unwrap();
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn tau_grammar_round_trips(t in tau_strategy()) {
        let text = t.to_string();
        let back: TauExpr = text.parse().unwrap();
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn gauge_grammar_round_trips(t in 0.01..3.0f64, p in 0.05..0.95f64, inner in 0.2..2.0f64) {
        for g in [
            GaugeExpr::Power(t),
            GaugeExpr::Product(vec![GaugeExpr::Power(t), GaugeExpr::InvLogInv]),
            GaugeExpr::Compose(Box::new(GaugeExpr::ExpNegLogPow(p)), Box::new(GaugeExpr::Power(inner))),
        ] {
            let text = g.to_string();
            let back: GaugeExpr = text.parse().unwrap();
            prop_assert_eq!(back, g);
        }
    }

    #[test]
    fn phi_is_gamma_tau(e in expr_strategy(), g in 1.2..4.6f64) {
        let xi = g.exp();
        prop_assume!(xi > e.cutoff() * 1.01);
        let phi = e.neg_log_f(xi).unwrap();
        let tau = e.eval_tau(xi).unwrap();
        prop_assume!(phi.is_finite() && phi.abs() < 1e6);
        prop_assert!((phi - xi.ln() * tau).abs() <= 1e-12 * phi.abs().max(1.0));
    }

    #[test]
    fn f_is_exp_minus_phi(e in expr_strategy(), xi in 20.0..100.0f64) {
        prop_assume!(xi > e.cutoff());
        let f = e.eval_f(xi).unwrap();
        let phi = e.neg_log_f(xi).unwrap();
        prop_assume!(f > 1e-250);
        prop_assert!((f - (-phi).exp()).abs() <= 1e-9 * f);
    }

    #[test]
    fn gauge_profile_invariants(t in 0.05..2.0f64, p in 0.1..0.9f64, pick in 0usize..3) {
        let expr = match pick {
            0 => GaugeExpr::Power(t),
            1 => GaugeExpr::Product(vec![GaugeExpr::Power(t), GaugeExpr::InvLogInv]),
            _ => GaugeExpr::ExpNegLogPow(p),
        };
        let h = GaugeFunction::new(expr);
        let prof = gamma_profile(&h, 0.5, 40, &SGrid { per_decade: 20, decades: 6 }).unwrap();
        for w in prof.points.windows(2) {
            // radii decrease along the profile, so Gamma/r must not decrease
            prop_assert!(w[1].gamma_over_r >= w[0].gamma_over_r * (1.0 - 1e-12));
        }
        for pt in &prof.points {
            prop_assert!(pt.gamma <= h.eval(pt.r) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn translation_keeps_modulus(j in -50i64..50, xi in -100.0..100.0f64) {
        let mu = FromFn(psi0_hat);
        let t = translate_transform(&mu, j).transform(xi);
        prop_assert!((t.value.norm() - psi0_hat(xi).norm()).abs() < 1e-14);
    }

    #[test]
    fn cosine_average_is_mean_of_translates(j in -20i64..20, xi in -50.0..50.0f64) {
        let mu = FromFn(psi0_hat);
        let nu = cosine_average(&mu, j).transform(xi).value;
        let plus = translate_transform(&mu, j).transform(xi).value;
        let minus = translate_transform(&mu, -j).transform(xi).value;
        prop_assert!((nu - (plus + minus) * 0.5).norm() < 1e-14);
    }

    #[test]
    fn multiplier_is_sum_of_translates(
        coeffs in prop::collection::vec(0.0..1.0f64, 1..8),
        period in 0.5..3.0f64,
        xi in -30.0..30.0f64,
    ) {
        prop_assume!(coeffs[0] > 0.0);
        let m = PeriodicMultiplier::new(period, coeffs.clone()).unwrap();
        let n = coeffs.len() - 1;
        let mu = FromFn(psi0_hat);
        let (applied, report) = apply_multiplier(&mu, m.clone(), n).unwrap();
        let mut direct = Complex::new(0.0, 0.0);
        for (k, a) in coeffs.iter().enumerate() {
            let s = k as f64 / period;
            direct += (translate_by(&mu, s).transform(xi).value + translate_by(&mu, -s).transform(xi).value) * (a / 2.0);
        }
        prop_assert!((applied.transform(xi).value - direct).norm() < 1e-12);
        prop_assert!(report.positive);
        for k in 1..=n {
            prop_assert!(m.value_at_zero(k) >= m.value_at_zero(k - 1));
        }
    }

    #[test]
    fn autoconvolution_spectral_law(q in 2u32..6, delta in 0.05..0.24f64, period in 1.0..4.0f64) {
        let b = BumpSample::polynomial(period, 10, q, delta * period);
        let g = autoconvolve(&b).unwrap();
        prop_assert!(g.report.holds(1e-12, 1e-12));
        prop_assert!(g.report.spectral_law_error < 1e-10);
    }

    #[test]
    fn products_commute_and_stay_symmetric(m1 in 2u64..12, m2 in 2u64..12) {
        let a = gm_spectrum(m1, 1, 1e-12, 600).unwrap();
        let b = gm_spectrum(m2, 1, 1e-12, 600).unwrap();
        let ab = multiply_spectra(&a, &b, 1e-12, 600);
        let ba = multiply_spectra(&b, &a, 1e-12, 600);
        prop_assert_eq!(ab.coeffs().len(), ba.coeffs().len());
        for (&(n, x), &(m, y)) in ab.coeffs().iter().zip(ba.coeffs()) {
            prop_assert_eq!(n, m);
            prop_assert!((x - y).norm() <= 1e-14 * a.abs_sum() * b.abs_sum());
            prop_assert_eq!(ab.get(-n), Some(x.conj()));
        }
        let d = SparseSpectrum::delta(1e-12, 600);
        let ad = multiply_spectra(&a, &d, 1e-12, 600);
        prop_assert_eq!(ad.coeffs(), a.coeffs());
    }

    #[test]
    fn windows_hold_only_primes(m in 1u64..5000) {
        let ps = primes_in(m);
        prop_assert!(!ps.is_empty());
        for p in ps {
            prop_assert!(p > m && p <= 2 * m);
            prop_assert!((2..p).take_while(|d| d * d <= p).all(|d| p % d != 0));
        }
    }
}
