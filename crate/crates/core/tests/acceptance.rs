//! Acceptance criteria. Each test writes one `criterion N: PASS|FAIL` line to
//! stderr, bypassing output capture, and then asserts it.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use bathkit::bcf::{
    alpha_powerlaw_closed_form, alpha_quadrature, alpha_series_gldd, converge_series, default_grid, relative_sup_error,
    sample_quadrature, spectral_density_from_series, AlphaSamples,
};
use bathkit::fit::{incremental_fit, objective_jacobian, objective_residuals, pack, FitConfig};
use bathkit::influence::{
    eta_oracle, eta_strang, eta_trotter, quapi_correct, reorganization_energy, reorganization_energy_quadrature,
};
use bathkit::model::{ExpTerm, ExponentialSeries, LorentzianTerm, PowerLawCutoff, SpectralDensity, ThermalContext};
use bathkit::pade::{pade_bose_approx, pade_parameters, Statistics};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: &str, pass: bool, detail: String) {
    let line = format!("criterion {id}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {detail}");
}

fn ctx1() -> ThermalContext {
    ThermalContext::with_beta(1.0).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn criterion_01_pade_parameters() {
    let start = Instant::now();
    let ctx = ctx1();
    let be = pade_parameters(1, Statistics::BoseEinstein, &ctx).unwrap();
    let fd = pade_parameters(1, Statistics::FermiDirac, &ctx).unwrap();
    let errs = [
        rel(be.xi[0], 2.0 * 15f64.sqrt()),
        rel(be.weights[0], 2.5),
        rel(fd.xi[0], 2.0 * 3f64.sqrt()),
        rel(fd.weights[0], 1.5),
    ];
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    let elapsed = start.elapsed();
    report(
        "1",
        worst <= 1e-12 && elapsed < Duration::from_secs(1),
        format!("max rel err {worst:.2e}, {elapsed:?}"),
    );
}

#[test]
fn criterion_02_pade_convergence() {
    let start = Instant::now();
    let ctx = ctx1();
    let sup = |n: usize| {
        let p = pade_parameters(n, Statistics::BoseEinstein, &ctx).unwrap();
        (1..=4000)
            .flat_map(|i| {
                let x = 20.0 * i as f64 / 4000.0;
                [x, -x]
            })
            .map(|x| {
                let exact = 1.0 / (-(-x).exp_m1());
                (pade_bose_approx(x, &p).unwrap() - exact).abs()
            })
            .fold(0.0, f64::max)
    };
    let (e2, e7, e12) = (sup(2), sup(7), sup(12));
    let elapsed = start.elapsed();
    report(
        "2",
        e12 <= 1e-8 && e12 < e7 && e12 < e2 && elapsed < Duration::from_secs(5),
        format!("sup err N=2 {e2:.2e}, N=7 {e7:.2e}, N=12 {e12:.2e}, {elapsed:?}"),
    );
}

fn lorentz() -> Vec<LorentzianTerm> {
    // βħγ = 1 with βħ = 1.
    vec![LorentzianTerm::new(1.0, 1.0, 1.0).unwrap()]
}

/// Converges the series on the 201-point grid of `[0, 5βħ]` and measures it
/// against independently sampled quadrature on the same grid.
fn series_vs_quadrature(density: &SpectralDensity) -> Result<(f64, usize), String> {
    let ctx = ctx1();
    let grid = default_grid(&ctx);
    assert_eq!(grid.len(), 201);
    let (series, order) = converge_series(density, &ctx, 1e-6, Some(&grid)).map_err(|e| e.to_string())?;
    let reference = sample_quadrature(density, &ctx, &grid).map_err(|e| e.to_string())?;
    Ok((relative_sup_error(&series, &grid, &reference), order))
}

#[test]
fn criterion_03_alpha_cross_oracles_tgldd_mt() {
    let start = Instant::now();
    let ctx = ctx1();
    let tg = SpectralDensity::Tgldd {
        terms: lorentz(),
        thermal: ctx,
    };
    let mt = SpectralDensity::MeierTannor(lorentz());
    let mut detail = Vec::new();
    let mut pass = true;
    for (name, d) in [("tgLDD", &tg), ("MT", &mt)] {
        match series_vs_quadrature(d) {
            Ok((err, order)) => {
                pass &= err <= 1e-6;
                detail.push(format!("{name} N={order} err {err:.2e}"));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("{name}: {e}"));
            }
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(30);
    report("3 (tgLDD, MT)", pass, format!("{}, {elapsed:?}", detail.join("; ")));

    // Reported here so every run shows it; asserted only by the ignored test.
    let (gldd_pass, gldd_detail) = gldd_cross_oracle();
    let line = format!(
        "criterion 3 (gLDD): {} {gldd_detail} (known unattainable, asserted by the ignored test)\n",
        if gldd_pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
}

/// gLDD has `J ~ ω^{-1}` at large ω, so `∫ J coth(βħω/2) dω` diverges and
/// `α(0)` is infinite. The grid contains `t = 0`, so this cannot pass.
fn gldd_cross_oracle() -> (bool, String) {
    let d = SpectralDensity::Gldd(lorentz());
    match series_vs_quadrature(&d) {
        Ok((err, order)) => (err <= 1e-6, format!("N={order} err {err:.2e}")),
        Err(e) => (false, e),
    }
}

#[test]
#[ignore = "gLDD alpha(0) diverges; the required grid includes t = 0"]
fn criterion_03_alpha_cross_oracles_gldd() {
    let (pass, detail) = gldd_cross_oracle();
    report("3 (gLDD)", pass, detail);
}

#[test]
fn criterion_04_closed_form_vs_quadrature() {
    let start = Instant::now();
    let ctx = ctx1();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let times: Vec<f64> = (0..50).map(|_| rng.random_range(0.0..=5.0)).collect();
    let mut worst: f64 = 0.0;
    for s in [1.0, 2.0] {
        for wc in [1.0, 2.0] {
            let pl = PowerLawCutoff::new(1.0, s, wc, 1.0).unwrap();
            let d = SpectralDensity::PowerLaw(pl);
            for &t in &times {
                let cf = alpha_powerlaw_closed_form(&pl, &ctx, t).unwrap();
                let q = alpha_quadrature(&d, &ctx, t).unwrap();
                worst = worst.max((cf - q).norm() / q.norm());
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        "4",
        worst <= 1e-8 && elapsed < Duration::from_secs(10),
        format!("max rel err {worst:.2e} over 200 points, {elapsed:?}"),
    );
}

/// Random decaying series with well-separated rates.
fn random_series(rng: &mut ChaCha8Rng, k: usize) -> ExponentialSeries {
    let mut s = ExponentialSeries::default();
    for j in 0..k {
        let decay = -(0.3 + 1.2 * j as f64) * rng.random_range(0.8..1.2);
        let freq = if j == 0 { 0.0 } else { rng.random_range(-3.0..3.0) };
        let p = if j == 0 {
            c(rng.random_range(0.5..1.5), 0.0)
        } else {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        };
        s.push(ExpTerm::new(p, c(decay, freq)));
    }
    s
}

#[test]
fn criterion_05_fit_round_trips() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let t: Vec<f64> = (0..301).map(|i| 12.0 * i as f64 / 300.0).collect();
    let mut detail = Vec::new();
    let mut pass = true;
    for k in 1..=3 {
        let truth = random_series(&mut rng, k);
        let samples = AlphaSamples::from_fn(t.clone(), |x| truth.eval(x)).unwrap();
        let config = FitConfig {
            rng_seed: 11,
            ..FitConfig::default()
        };
        let run1 = incremental_fit(&samples, k, &config).unwrap();
        let run2 = incremental_fit(&samples, k, &config).unwrap();
        let rms: Vec<f64> = run1.iter().map(|r| r.rms_residual).collect();
        let last = *rms.last().unwrap();
        let monotone = rms.windows(2).all(|w| w[1] <= w[0]);
        let same = run1 == run2;
        pass &= last <= 1e-6 && monotone && same;
        detail.push(format!(
            "K={k}: rms {last:.2e}, non-increasing {monotone}, repeatable {same}"
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(20);
    report("5", pass, format!("{}, {elapsed:?}", detail.join("; ")));
}

#[test]
fn criterion_06_jacobian() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let truth = random_series(&mut rng, 2);
    let t: Vec<f64> = (0..40).map(|i| 0.1 * i as f64).collect();
    let samples = AlphaSamples::from_fn(t, |x| truth.eval(x)).unwrap();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = pack(&random_series(&mut rng, 2));
        let jac = objective_jacobian(&x, &samples).unwrap();
        for j in 0..x.len() {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[j] += h;
            xm[j] -= h;
            let rp = objective_residuals(&xp, &samples).unwrap();
            let rm = objective_residuals(&xm, &samples).unwrap();
            for i in 0..rp.len() {
                worst = worst.max((jac[(i, j)] - (rp[i] - rm[i]) / (2.0 * h)).abs());
            }
        }
    }
    report("6", worst <= 1e-6, format!("max abs diff {worst:.2e} at 20 points"));
}

#[test]
fn criterion_07_eta_oracles() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 4;
    let mut worst: f64 = 0.0;
    let mut check = |got: Complex64, want: Complex64| worst = worst.max((got - want).norm() / want.norm());
    for _ in 0..10 {
        let p = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let om = c(-rng.random_range(0.1..2.0), rng.random_range(-3.0..3.0));
        let dt = rng.random_range(0.05..0.5);
        let series = ExponentialSeries::from_pairs([(p, om)]);
        let alpha = |x: f64| p * (om * x).exp();
        let h = dt / 2.0;
        let tr = eta_trotter(&series, dt, n).unwrap();
        let st = eta_strang(&series, dt, n).unwrap();
        let q = |a: (f64, f64), b: (f64, f64), tri: bool| eta_oracle(alpha, a, b, tri).unwrap();
        for m in 1..=n {
            check(
                tr.eta(m, 0).unwrap(),
                q((m as f64 * dt, (m + 1) as f64 * dt), (0.0, dt), false),
            );
        }
        check(tr.eta(1, 1).unwrap(), q((0.0, dt), (0.0, dt), true));
        check(st.eta(0, 0).unwrap(), q((0.0, h), (0.0, h), true));
        check(
            st.eta(n, n).unwrap(),
            q(
                (n as f64 * dt - h, n as f64 * dt),
                (n as f64 * dt - h, n as f64 * dt),
                true,
            ),
        );
        for k in 1..n {
            let kt = k as f64 * dt;
            check(st.eta(k, 0).unwrap(), q((kt - h, kt + h), (0.0, h), false));
            check(
                st.eta(n, k).unwrap(),
                q((n as f64 * dt - h, n as f64 * dt), (kt - h, kt + h), false),
            );
        }
        check(
            st.eta(n, 0).unwrap(),
            q((n as f64 * dt - h, n as f64 * dt), (0.0, h), false),
        );
    }

    // Small-Δt limits.
    let p = c(0.7, 0.2);
    let om = c(-0.8, 2.5);
    let series = ExponentialSeries::from_pairs([(p, om)]);
    let dt = 1e-3 / om.norm();
    let tr = eta_trotter(&series, dt, 3).unwrap();
    let mut limit: f64 = 0.0;
    for m in 1..=3 {
        let want = series.eval(m as f64 * dt);
        limit = limit.max((tr.eta(m, 0).unwrap() / (dt * dt) - want).norm() / want.norm());
    }
    limit = limit.max((tr.eta(1, 1).unwrap() / (dt * dt / 2.0) - p).norm() / p.norm());
    let elapsed = start.elapsed();
    report(
        "7",
        worst <= 1e-9 && limit <= 0.01 && elapsed < Duration::from_secs(30),
        format!("max rel err vs 2-D quadrature {worst:.2e}, small-dt limit {limit:.2e}, {elapsed:?}"),
    );
}

#[test]
fn criterion_08_reorganization_energies() {
    let pl = SpectralDensity::PowerLaw(PowerLawCutoff::new(1.0, 1.0, 2.0, 1.0).unwrap());
    let l_pl = reorganization_energy(&pl).unwrap();
    let terms = vec![
        LorentzianTerm::new(0.3, 1.0, 0.0).unwrap(),
        LorentzianTerm::new(1.7, 0.5, 2.0).unwrap(),
    ];
    let l_gldd = reorganization_energy(&SpectralDensity::Gldd(terms.clone())).unwrap();
    let mt = SpectralDensity::MeierTannor(terms.clone());
    let (analytic, quad) = (
        reorganization_energy(&mt).unwrap(),
        reorganization_energy_quadrature(&mt).unwrap(),
    );
    let mt_err = rel(analytic, quad);
    let gldd_sum: f64 = terms.iter().map(|t| t.lambda()).sum();
    report(
        "8",
        l_pl == 2.0 && l_gldd == gldd_sum && mt_err <= 1e-8,
        format!("power law {l_pl:?}, gLDD {l_gldd:?} (sum {gldd_sum:?}), MT rel err {mt_err:.2e}"),
    );
}

#[test]
fn criterion_09_quapi() {
    let series = ExponentialSeries::from_pairs([(c(0.7, 0.2), c(-0.8, 2.5)), (c(0.1, -0.3), c(-2.0, -1.0))]);
    let ctx = ThermalContext::new(0.7, 1.3).unwrap();
    let (dt, lambda, n) = (0.25, 1.9, 5);
    let shift = dt * lambda / (ctx.hbar() * PI);
    let mut pass = true;
    for grid in [
        eta_trotter(&series, dt, n).unwrap(),
        eta_strang(&series, dt, n).unwrap(),
    ] {
        let q = quapi_correct(&grid, lambda, &ctx);
        pass &= q.diag_shift() == shift;
        for k in 0..=n {
            pass &= q.eta(k, k).unwrap() == grid.eta(k, k).unwrap() + c(0.0, shift);
            for kp in 0..k {
                pass &= q.eta(k, kp).unwrap().re.to_bits() == grid.eta(k, kp).unwrap().re.to_bits();
                pass &= q.eta(k, kp).unwrap().im.to_bits() == grid.eta(k, kp).unwrap().im.to_bits();
            }
        }
    }
    report("9", pass, format!("shift {shift:?} on both splittings"));
}

#[test]
fn criterion_10_inverse_transform() {
    let start = Instant::now();
    let ctx = ctx1();
    let gamma = 1.0;
    let mut worst: f64 = 0.0;
    for wt in [0.0, 2.0] {
        let terms = vec![LorentzianTerm::new(1.0, gamma, wt).unwrap()];
        let density = SpectralDensity::Gldd(terms.clone());
        let series = alpha_series_gldd(&terms, &ctx, 40).unwrap();
        for i in 1..=200 {
            let w = 10.0 * gamma * i as f64 / 200.0;
            let j = spectral_density_from_series(&series, &ctx, w).unwrap();
            worst = worst.max(rel(j, density.eval(w)));
        }
        let j0 = spectral_density_from_series(&series, &ctx, 0.0).unwrap();
        worst = worst.max(j0.abs());
    }
    let elapsed = start.elapsed();
    report(
        "10",
        worst <= 1e-4 && elapsed < Duration::from_secs(10),
        format!("max rel err {worst:.2e} on (0, 10 gamma], {elapsed:?}"),
    );
}
