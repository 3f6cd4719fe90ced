use bathkit::bcf::AlphaSamples;
use bathkit::cli::table::{read_series, series_rows, write_table, SERIES_HEADER};
use bathkit::fit::{pack, unpack, ScalingTransform};
use bathkit::influence::{eta_strang, eta_trotter, quapi_correct, reorganization_energy};
use bathkit::model::{ExponentialSeries, LorentzianTerm, SpectralDensity, ThermalContext};
use bathkit::pade::{pade_parameters, Statistics};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn decaying_series(max_terms: usize) -> impl Strategy<Value = ExponentialSeries> {
    prop::collection::vec((complex(), 0.05..4.0f64, -6.0..6.0f64), 1..=max_terms)
        .prop_map(|v| ExponentialSeries::from_pairs(v.into_iter().map(|(p, d, w)| (p, Complex64::new(-d, w)))))
}

fn near(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pade_poles_ascending_and_weights_positive(n in 1usize..40, bh in 0.01..100.0f64, fd in any::<bool>()) {
        let stat = if fd { Statistics::FermiDirac } else { Statistics::BoseEinstein };
        let ctx = ThermalContext::with_beta(bh).unwrap();
        let p = pade_parameters(n, stat, &ctx).unwrap();
        prop_assert_eq!(p.xi.len(), n);
        prop_assert_eq!(p.zeta.len(), n - 1);
        prop_assert!(p.xi.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(p.xi[0] > 0.0);
        prop_assert!(p.weights.iter().all(|&w| w > 0.0 && w.is_finite()));
    }

    #[test]
    fn trotter_interior_depends_on_lag_only(s in decaying_series(3), dt in 0.01..1.0f64, n in 2usize..8) {
        let g = eta_trotter(&s, dt, n).unwrap();
        for k in 1..=n {
            for kp in 0..k {
                prop_assert_eq!(g.eta(k, kp).unwrap(), g.lag(k - kp));
            }
            prop_assert_eq!(g.eta(k, k).unwrap(), g.eta(0, 0).unwrap());
        }
    }

    #[test]
    fn strang_boundaries_mirror(s in decaying_series(3), dt in 0.01..1.0f64, n in 2usize..8) {
        let g = eta_strang(&s, dt, n).unwrap();
        let b = g.boundary().unwrap();
        for k in 1..n {
            prop_assert!(near(b.eta_nk[k - 1], b.eta_k0[n - k - 1], 1e-14));
        }
        prop_assert_eq!(g.eta(0, 0).unwrap(), g.eta(n, n).unwrap());
    }

    #[test]
    fn eta_is_linear_in_the_series(a in decaying_series(2), b in decaying_series(2), dt in 0.01..1.0f64) {
        let n = 4;
        let mut both = a.clone();
        for t in b.terms() {
            both.push(*t);
        }
        let (ga, gb, gab) = (eta_strang(&a, dt, n).unwrap(), eta_strang(&b, dt, n).unwrap(), eta_strang(&both, dt, n).unwrap());
        for k in 0..=n {
            for kp in 0..=k {
                let sum = ga.eta(k, kp).unwrap() + gb.eta(k, kp).unwrap();
                prop_assert!(near(gab.eta(k, kp).unwrap(), sum, 1e-13));
            }
        }
    }

    #[test]
    fn quapi_shifts_accumulate(s in decaying_series(2), dt in 0.01..1.0f64, l1 in -3.0..3.0f64, l2 in -3.0..3.0f64) {
        let ctx = ThermalContext::with_beta(1.0).unwrap();
        let g = eta_trotter(&s, dt, 3).unwrap();
        let twice = quapi_correct(&quapi_correct(&g, l1, &ctx), l2, &ctx);
        let once = quapi_correct(&g, l1 + l2, &ctx);
        prop_assert!((twice.diag_shift() - once.diag_shift()).abs() <= 1e-15 * (1.0 + once.diag_shift().abs()));
        prop_assert_eq!(twice.lag_kernel(), g.lag_kernel());
    }

    #[test]
    fn series_table_round_trips(s in decaying_series(6)) {
        let mut buf = Vec::new();
        write_table(&mut buf, "series", &[], &SERIES_HEADER, series_rows(&s)).unwrap();
        let back = read_series(std::str::from_utf8(&buf).unwrap(), "series").unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn pack_unpack_round_trips(s in decaying_series(5)) {
        prop_assert_eq!(unpack(&pack(&s)).unwrap(), s);
    }

    #[test]
    fn scaling_round_trips(s in decaying_series(3), t_end in 0.5..50.0f64) {
        let t: Vec<f64> = (0..20).map(|i| t_end * i as f64 / 19.0).collect();
        let samples = AlphaSamples::from_fn(t.clone(), |x| s.eval(x) + Complex64::new(1.0, 0.0)).unwrap();
        let sc = ScalingTransform::from_samples(&samples).unwrap();
        let back = sc.unscale_series(&sc.scale_series(&s));
        for (a, b) in back.terms().iter().zip(s.terms()) {
            prop_assert!(near(a.p, b.p, 1e-14) && near(a.omega, b.omega, 1e-14));
        }
        let scaled = sc.scale_series(&s);
        for &x in &t {
            prop_assert!(near(scaled.eval(x / sc.t_scale) * sc.a_scale, s.eval(x), 1e-12));
        }
    }

    #[test]
    fn gldd_reorganization_is_the_coupling_sum(
        terms in prop::collection::vec((0.0..5.0f64, 0.1..5.0f64, 0.0..5.0f64), 1..5)
    ) {
        let terms: Vec<LorentzianTerm> = terms.into_iter().map(|(l, g, w)| LorentzianTerm::new(l, g, w).unwrap()).collect();
        let sum: f64 = terms.iter().map(|t| t.lambda()).sum();
        prop_assert_eq!(reorganization_energy(&SpectralDensity::Gldd(terms)).unwrap(), sum);
    }
}
