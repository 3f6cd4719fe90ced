//! Reference values computed independently at 30 digits and frozen here.

#![allow(clippy::excessive_precision)]

use bathkit::bcf::{alpha_powerlaw_closed_form, alpha_quadrature, alpha_series, converge_series};
use bathkit::influence::{eta_strang, eta_trotter, reorganization_energy, reorganization_energy_quadrature};
use bathkit::model::{ExponentialSeries, LorentzianTerm, PowerLawCutoff, SpectralDensity, ThermalContext};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ctx() -> ThermalContext {
    ThermalContext::with_beta(1.0).unwrap()
}

fn term(l: f64, g: f64, w: f64) -> Vec<LorentzianTerm> {
    vec![LorentzianTerm::new(l, g, w).unwrap()]
}

fn close(got: Complex64, want: Complex64, tol: f64) {
    let err = (got - want).norm() / want.norm();
    assert!(err <= tol, "{got} vs {want}: rel err {err:e}");
}

/// (density, t, α(t)) with λ = γ = 1, βħ = 1.
fn alpha_table() -> Vec<(SpectralDensity, f64, Complex64)> {
    let gldd0 = SpectralDensity::Gldd(term(1.0, 1.0, 0.0));
    let gldd5 = SpectralDensity::Gldd(term(1.0, 1.0, 0.5));
    let tg = SpectralDensity::Tgldd {
        terms: term(1.0, 1.0, 1.0),
        thermal: ctx(),
    };
    let mt = SpectralDensity::MeierTannor(term(1.0, 1.0, 1.0));
    vec![
        (gldd0.clone(), 0.5, c(0.36258319159909578269, -0.19306470526010781508)),
        (gldd0, 2.0, c(0.078855497643394957632, -0.043078558603697259572)),
        (gldd5.clone(), 0.5, c(0.35183198890214097142, -0.21094527735725201993)),
        (gldd5, 2.0, c(0.037479185422862034054, -0.04140012311323232659)),
        (tg.clone(), 0.0, c(std::f64::consts::FRAC_1_PI, 0.0)),
        (tg.clone(), 0.5, c(0.16943021865277513351, -0.099976167073466534156)),
        (tg, 2.0, c(-0.017927005885939297855, -0.014670656265076865919)),
        (mt.clone(), 0.0, c(0.44503024671476316323, 0.0)),
        (mt.clone(), 0.5, c(0.34024089635166426459, -0.11419150835170462505)),
        (mt, 2.0, c(0.014632453340797928553, -0.048325558735050739466)),
    ]
}

#[test]
fn quadrature_matches_reference_alpha() {
    for (d, t, want) in alpha_table() {
        close(alpha_quadrature(&d, &ctx(), t).unwrap(), want, 1e-10);
    }
}

#[test]
fn series_match_reference_alpha() {
    for (d, t, want) in alpha_table() {
        close(alpha_series(&d, &ctx(), 200).unwrap().eval(t), want, 1e-7);
    }
    let mt = SpectralDensity::MeierTannor(term(1.0, 1.0, 1.0));
    let (s, _) = converge_series(&mt, &ctx(), 1e-9, None).unwrap();
    close(s.eval(0.5), c(0.34024089635166426459, -0.11419150835170462505), 1e-8);
}

#[test]
fn power_law_reference_alpha() {
    let cases = [
        (1.0, 1.0, 0.3, c(0.64066444038128925677, -0.16074903771591145772)),
        (2.0, 2.0, 1.7, c(-0.15895787234220474828, 0.074809004146667004944)),
        (2.0, 1.0, 0.0, c(0.89388661175710002593, 0.0)),
    ];
    for (s, wc, t, want) in cases {
        let pl = PowerLawCutoff::exponential(1.0, s, wc).unwrap();
        close(alpha_powerlaw_closed_form(&pl, &ctx(), t).unwrap(), want, 1e-13);
        close(
            alpha_quadrature(&SpectralDensity::PowerLaw(pl), &ctx(), t).unwrap(),
            want,
            1e-10,
        );
    }
}

#[test]
fn reference_reorganization_energies() {
    let mt1 = SpectralDensity::MeierTannor(term(1.0, 1.0, 1.0));
    let mt2 = SpectralDensity::MeierTannor(term(2.0, 0.5, 3.0));
    let tg = SpectralDensity::Tgldd {
        terms: term(1.0, 1.0, 1.0),
        thermal: ctx(),
    };
    for (d, want) in [
        (&mt1, 0.61685027506808491368),
        (&mt2, 0.5334921297886139794),
        (&tg, 0.37862137007311927617),
    ] {
        let got = reorganization_energy(d).unwrap();
        assert!(((got - want) / want).abs() < 1e-10, "{got} vs {want}");
        let q = reorganization_energy_quadrature(d).unwrap();
        assert!(((q - want) / want).abs() < 1e-10, "{q} vs {want}");
    }
}

#[test]
fn reference_eta() {
    // α(t) = p e^{Ωt}, Δt = 0.3, N = 4.
    let series = ExponentialSeries::from_pairs([(c(0.7, 0.2), c(-0.8, 2.5))]);
    let (dt, n) = (0.3, 4);
    let tr = eta_trotter(&series, dt, n).unwrap();
    let st = eta_strang(&series, dt, n).unwrap();
    close(
        tr.eta(2, 0).unwrap(),
        c(-0.0068535320919505260407, 0.038260492548057892287),
        1e-13,
    );
    close(
        tr.eta(1, 1).unwrap(),
        c(0.025922142600899414502, 0.014770201737374204886),
        1e-13,
    );
    close(
        st.eta(0, 0).unwrap(),
        c(0.00722057805257521443, 0.0030592207651568430147),
        1e-13,
    );
    close(
        st.eta(2, 0).unwrap(),
        c(-0.000023437986352528949066, 0.020965537312532808605),
        1e-12,
    );
    close(
        st.eta(4, 1).unwrap(),
        c(-0.011255128207592760559, 0.012054500911729115042),
        1e-13,
    );
    close(
        st.eta(4, 0).unwrap(),
        c(-0.0067871544960620069899, 0.0017027763647183386563),
        1e-13,
    );
}
