//! Bath response function `α(t) = (1/π)∫_0^∞ J(ω)[coth(βħω/2)cos ωt − i sin ωt] dω`.
//!
//! Three routes: adaptive quadrature for any `J`, Padé-derived exponential
//! series for the Lorentzian families, and a polygamma closed form for
//! power-law densities with an exponential cutoff. [`spectral_density_from_series`]
//! maps a series back to `J(ω)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ExpTerm, ExponentialSeries, LorentzianTerm, PowerLawCutoff, SpectralDensity, Tail, ThermalContext};
use crate::pade::{pade_parameters, PadeParams, Statistics};
use crate::quadrature::{integrate, oscillatory_tail, refine_points, Integral, Tolerance};
use crate::special::{gamma, polygamma};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Largest Padé order tried by [`converge_series`].
pub const DEFAULT_MAX_ORDER: usize = 200;

/// Sampled `α(t)` with optional per-point fit weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSamples {
    t: Vec<f64>,
    alpha: Vec<Complex64>,
    weights: Option<Vec<f64>>,
}

impl AlphaSamples {
    pub fn new(t: Vec<f64>, alpha: Vec<Complex64>, weights: Option<Vec<f64>>) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::invalid("t", "no samples"));
        }
        if alpha.len() != t.len() {
            return Err(Error::invalid(
                "alpha",
                format!("{} values for {} times", alpha.len(), t.len()),
            ));
        }
        if !t.iter().all(|x| x.is_finite()) || t[0] < 0.0 {
            return Err(Error::invalid("t", "times must be finite and non-negative"));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("t", "times must be strictly increasing"));
        }
        if !alpha.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::invalid("alpha", "values must be finite"));
        }
        if let Some(w) = &weights {
            if w.len() != t.len() {
                return Err(Error::invalid(
                    "weights",
                    format!("{} weights for {} times", w.len(), t.len()),
                ));
            }
            if !w.iter().all(|&x| x.is_finite() && x >= 0.0) {
                return Err(Error::invalid("weights", "weights must be finite and non-negative"));
            }
        }
        Ok(Self { t, alpha, weights })
    }

    /// Samples `f` on `t`.
    pub fn from_fn(t: Vec<f64>, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let alpha = t.iter().map(|&x| f(x)).collect();
        Self::new(t, alpha, None)
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Weight of sample `i` (1 when no weights are set).
    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    pub fn with_weights(self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.t, self.alpha, Some(weights))
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// `points` evenly spaced times on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::invalid("tmax", "must be positive"));
    }
    if points < 2 {
        return Err(Error::invalid("points", "need at least 2 points"));
    }
    let n = (points - 1) as f64;
    Ok((0..points).map(|i| t_max * i as f64 / n).collect())
}

/// The 201-point grid on `[0, 5βħ]` used for convergence checks.
pub fn default_grid(ctx: &ThermalContext) -> Vec<f64> {
    uniform_grid(5.0 * ctx.beta_hbar(), 201).expect("βħ is positive")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    /// Relative to `∫|integrand|`.
    pub rel_tol: f64,
    /// Panel budget on top of the initial subdivision.
    pub max_panels: usize,
    /// Half-period budget for the oscillatory tail.
    pub max_cycles: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            max_panels: 4000,
            max_cycles: 4000,
        }
    }
}

/// `α(t)` by adaptive quadrature with default options.
pub fn alpha_quadrature(density: &SpectralDensity, ctx: &ThermalContext, t: f64) -> Result<Complex64> {
    alpha_quadrature_with(density, ctx, t, &QuadratureOptions::default()).map(|r| r.value)
}

/// `α(t)` by adaptive quadrature, returning the error estimate too.
pub fn alpha_quadrature_with(
    density: &SpectralDensity,
    ctx: &ThermalContext,
    t: f64,
    opts: &QuadratureOptions,
) -> Result<Integral> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid("t", "must be finite and non-negative"));
    }
    let zero = Integral {
        value: Complex64::new(0.0, 0.0),
        error: 0.0,
        abs_integral: 0.0,
    };
    if density
        .lorentzian_terms()
        .is_some_and(|ts| ts.iter().all(|h| h.lambda() == 0.0))
    {
        return Ok(zero);
    }
    let s = density.low_frequency_exponent();
    if let Some(s) = s {
        if s <= 0.0 {
            return Err(Error::Divergence(format!(
                "J ~ omega^{s} at small omega makes J coth non-integrable"
            )));
        }
    }
    let bh = ctx.beta_hbar();
    let integrand = |w: f64| -> Complex64 {
        if w <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let j = density.eval(w) / PI;
        let coth = 1.0 / (0.5 * bh * w).tanh();
        if t == 0.0 {
            Complex64::new(j * coth, 0.0)
        } else {
            let (sn, cs) = (w * t).sin_cos();
            Complex64::new(j * coth * cs, -j * sn)
        }
    };
    let tol = Tolerance {
        abs: opts.abs_tol,
        rel: opts.rel_tol,
    };

    let breaks = density.breakpoints();
    let last_break = breaks.last().copied().unwrap_or(1.0 / bh);
    let (head_end, tail) = match density.tail() {
        Tail::Compact(end) => (end, None),
        Tail::Fast => (fast_cutoff(density), None),
        Tail::Algebraic(k) => ((20.0 * last_break).max(40.0 / bh), Some(k)),
    };

    // Small-ω piece, mapped to remove an ω^{s−1} singularity.
    let mut total = zero;
    let mut head_start = 0.0;
    if let Some(s) = s.filter(|&s| s < 1.0) {
        let w1 = breaks.first().copied().unwrap_or(head_end).min(1.0 / bh).min(head_end);
        let inv = 1.0 / s;
        let mapped = |v: f64| integrand(w1 * v.powf(inv)) * (w1 * inv * v.powf(inv - 1.0));
        let piece = integrate(mapped, &[0.0, 1.0], tol, opts.max_panels)?;
        add(&mut total, &piece);
        head_start = w1;
    }

    let mut pts = vec![head_start];
    pts.extend(breaks.iter().copied().filter(|&w| w > head_start && w < head_end));
    pts.push(head_end);
    if t > 0.0 {
        pts = refine_points(&pts, PI / (4.0 * t));
    }
    let head = integrate(integrand, &pts, tol, pts.len() + opts.max_panels)?;
    add(&mut total, &head);

    if let Some(k) = tail {
        let piece = if t > 0.0 {
            let target = tol.target(total.abs_integral);
            oscillatory_tail(integrand, head_end, t, target, opts.max_cycles)?
        } else {
            if k >= -1.0 {
                return Err(Error::Divergence(format!(
                    "J ~ omega^{k} at large omega makes alpha(0) infinite"
                )));
            }
            // ω = A/u folds [A, ∞) onto (0, 1].
            let mapped = |u: f64| {
                if u <= 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                integrand(head_end / u) * (head_end / (u * u))
            };
            integrate(mapped, &[0.0, 1.0], tol, opts.max_panels)?
        };
        add(&mut total, &piece);
    }
    if t == 0.0 {
        total.value.im = 0.0;
    }
    Ok(total)
}

fn add(acc: &mut Integral, piece: &Integral) {
    acc.value += piece.value;
    acc.error += piece.error;
    acc.abs_integral += piece.abs_integral;
}

/// Frequency beyond which a power-law density with exponential cutoff is
/// below `e^{−80}` of its scale.
fn fast_cutoff(density: &SpectralDensity) -> f64 {
    let SpectralDensity::PowerLaw(pl) = density else {
        unreachable!("only power laws decay faster than any power")
    };
    let (s, q) = (pl.exponent(), pl.stretch());
    // Solve x − (s/q) ln x = 80 for x = (ω/ω_c)^q.
    let mut x: f64 = 80.0;
    for _ in 0..50 {
        x = 80.0 + (s / q) * x.max(1.0).ln();
    }
    pl.omega_c() * x.powf(1.0 / q)
}

/// Samples `α` by quadrature on `t`, in parallel, in order.
pub fn sample_quadrature(density: &SpectralDensity, ctx: &ThermalContext, t: &[f64]) -> Result<Vec<Complex64>> {
    t.par_iter().map(|&x| alpha_quadrature(density, ctx, x)).collect()
}

/// Padé parameters, with order 0 meaning no Padé poles at all.
fn series_params(order: usize, statistics: Statistics, ctx: &ThermalContext) -> Result<PadeParams> {
    if order == 0 {
        return Ok(PadeParams {
            statistics,
            order: 0,
            beta_hbar: ctx.beta_hbar(),
            xi: Vec::new(),
            weights: Vec::new(),
            zeta: Vec::new(),
        });
    }
    pade_parameters(order, statistics, ctx)
}

fn check_degenerate(xi: f64, omega: Complex64) -> Result<()> {
    if (omega + xi).norm() <= 1e-12 * xi {
        return Err(Error::DegeneratePole(format!(
            "Pade pole {xi} coincides with Lorentzian rate {omega}; perturb gamma"
        )));
    }
    Ok(())
}

/// `(Ω_h, λ_h, γ_h)` for the conjugate pole pairs, `+iω̃` block first.
fn lorentz_poles(terms: &[LorentzianTerm]) -> Vec<(Complex64, &LorentzianTerm)> {
    let up = terms.iter().map(|h| (Complex64::new(-h.gamma(), h.omega_tilde()), h));
    let down = terms.iter().map(|h| (Complex64::new(-h.gamma(), -h.omega_tilde()), h));
    up.chain(down).collect()
}

fn pade_sum(params: &PadeParams, omega: Complex64, f: impl Fn(f64, f64, Complex64) -> Complex64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (&xi, &w) in params.xi.iter().zip(&params.weights) {
        check_degenerate(xi, omega)?;
        acc += f(xi, w, xi * xi - omega * omega);
    }
    Ok(acc)
}

/// Exponential series of a gLDD bath with `order` Bose-Einstein Padé poles:
/// `2h̆` Lorentzian poles followed by `order` terms with `Ω = −ξ_j`.
pub fn alpha_series_gldd(terms: &[LorentzianTerm], ctx: &ThermalContext, order: usize) -> Result<ExponentialSeries> {
    let params = series_params(order, Statistics::BoseEinstein, ctx)?;
    let bh = ctx.beta_hbar();
    let mut out = ExponentialSeries::default();
    for (om, h) in lorentz_poles(terms) {
        let lam = h.lambda();
        let s = pade_sum(&params, om, |_, w, d| 2.0 * w * om * om / d)?;
        let p = (lam / bh) * (1.0 - s) + I * (0.5 * lam) * om;
        out.push(ExpTerm::new(p / PI, om));
    }
    for (&xi, &w) in params.xi.iter().zip(&params.weights) {
        let mut acc = 0.0;
        for h in terms {
            let om = Complex64::new(-h.gamma(), h.omega_tilde());
            check_degenerate(xi, om)?;
            check_degenerate(xi, om.conj())?;
            acc += h.lambda() * h.gamma() * (xi * xi - om.norm_sqr()) / (xi * xi - om * om).norm_sqr();
        }
        let p = 4.0 * w * xi / bh * acc / PI;
        out.push(ExpTerm::new(Complex64::new(p, 0.0), Complex64::new(-xi, 0.0)));
    }
    Ok(out)
}

/// Exponential series of a tgLDD bath with `order` Fermi-Dirac Padé poles.
/// The `tanh` scaling uses the temperature of `ctx`.
pub fn alpha_series_tgldd(terms: &[LorentzianTerm], ctx: &ThermalContext, order: usize) -> Result<ExponentialSeries> {
    let params = series_params(order, Statistics::FermiDirac, ctx)?;
    let bh = ctx.beta_hbar();
    let mut out = ExponentialSeries::default();
    for (om, h) in lorentz_poles(terms) {
        let lam = h.lambda();
        let s = pade_sum(&params, om, |_, w, d| w * om / d)?;
        let p = 0.5 * lam + I * (2.0 * lam / bh) * s;
        out.push(ExpTerm::new(p / PI, om));
    }
    for (&xi, &w) in params.xi.iter().zip(&params.weights) {
        let mut acc = 0.0;
        for h in terms {
            let om = Complex64::new(-h.gamma(), h.omega_tilde());
            check_degenerate(xi, om)?;
            check_degenerate(xi, om.conj())?;
            acc += h.lambda() * h.gamma() * (xi * xi - om.norm_sqr()) / (xi * xi - om * om).norm_sqr();
        }
        let p = 4.0 * w / bh * acc / PI;
        out.push(ExpTerm::new(Complex64::new(0.0, p), Complex64::new(-xi, 0.0)));
    }
    Ok(out)
}

/// Exponential series of a Meier-Tannor bath with `order` Bose-Einstein Padé
/// poles, from the residues of the transform. `ω̃ = 0` gives double poles and
/// is rejected.
pub fn alpha_series_mt(terms: &[LorentzianTerm], ctx: &ThermalContext, order: usize) -> Result<ExponentialSeries> {
    let params = series_params(order, Statistics::BoseEinstein, ctx)?;
    let bh = ctx.beta_hbar();
    for h in terms {
        if h.omega_tilde() <= 1e-12 * h.gamma() {
            return Err(Error::DegeneratePole(format!(
                "Meier-Tannor term with omega_tilde = {} has double poles",
                h.omega_tilde()
            )));
        }
    }
    let mut out = ExponentialSeries::default();
    for (om, h) in lorentz_poles(terms) {
        // f_BE(iβħΩ) from its Padé form.
        let s = pade_sum(&params, om, |_, w, d| w * om / d)?;
        let f = -I / (bh * om) + 0.5 + (2.0 * I / bh) * s;
        let p = PI * h.lambda() / (8.0 * h.gamma() * -om.im) * f;
        out.push(ExpTerm::new(p, om));
    }
    for (&xi, &w) in params.xi.iter().zip(&params.weights) {
        let mut acc = 0.0;
        for h in terms {
            let om = Complex64::new(-h.gamma(), h.omega_tilde());
            check_degenerate(xi, om)?;
            check_degenerate(xi, om.conj())?;
            acc += h.lambda() / (xi * xi - om * om).norm_sqr();
        }
        let p = -PI * w * xi / bh * acc;
        out.push(ExpTerm::new(Complex64::new(p, 0.0), Complex64::new(-xi, 0.0)));
    }
    Ok(out)
}

/// Dispatches to the series builder of the density's family. A tgLDD density
/// must carry the same temperature as `ctx`.
pub fn alpha_series(density: &SpectralDensity, ctx: &ThermalContext, order: usize) -> Result<ExponentialSeries> {
    match density {
        SpectralDensity::Gldd(terms) => alpha_series_gldd(terms, ctx, order),
        SpectralDensity::Tgldd { terms, thermal } => {
            if thermal.beta_hbar() != ctx.beta_hbar() {
                return Err(Error::invalid(
                    "thermal",
                    "tgLDD scaling temperature differs from the bath temperature",
                ));
            }
            alpha_series_tgldd(terms, ctx, order)
        }
        SpectralDensity::MeierTannor(terms) => alpha_series_mt(terms, ctx, order),
        _ => Err(Error::invalid(
            "spectral_density",
            "analytic series need a gLDD, tgLDD or Meier-Tannor density",
        )),
    }
}

/// Closed-form `α(t)` for `J = A ω^s e^{−ω/ω_c}` with integer `s ≥ 1`:
///
/// ```text
/// α = A (−1)^{s+1}/(π (βħ)^{s+1}) Re[ψ^(s)(z) + ψ^(s)(z+1)] + i (A/π) Im[Γ(s+1)/(βħ z)^{s+1}]
/// z = (1/ω_c + i t)/βħ
/// ```
pub fn alpha_powerlaw_closed_form(pl: &PowerLawCutoff, ctx: &ThermalContext, t: f64) -> Result<Complex64> {
    if pl.stretch() != 1.0 {
        return Err(Error::invalid("q", "closed form needs q = 1"));
    }
    let s = pl.exponent();
    if s == 0.0 {
        return Err(Error::Divergence("s = 0 makes alpha infinite".into()));
    }
    let bh = ctx.beta_hbar();
    let z = Complex64::new(1.0 / pl.omega_c(), t) / bh;
    let psi = polygamma(s, z)? + polygamma(s, z + 1.0)?;
    let n = s as i32;
    let sign = if (n + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let a = pl.amplitude();
    let re = a * sign / (PI * bh.powi(n + 1)) * psi.re;
    let im = a / PI * (gamma(s + 1.0) / (bh * z).powi(n + 1)).im;
    Ok(Complex64::new(re, im))
}

/// `J(ω) = −(1 − e^{−βħω}) Re Σ p/(Ω + iω)`, the density whose transform is
/// the series (extended to `t < 0` by `α(−t) = α*(t)`).
pub fn spectral_density_from_series(series: &ExponentialSeries, ctx: &ThermalContext, omega: f64) -> Result<f64> {
    series.check_decaying()?;
    let sum: f64 = series
        .terms()
        .iter()
        .map(|term| (term.p / (term.omega + I * omega)).re)
        .sum();
    Ok(-(-(-ctx.beta_hbar() * omega).exp_m1()) * sum)
}

/// Relative sup-norm distance `max|series − α| / max|α|` over samples.
pub fn relative_sup_error(series: &ExponentialSeries, t: &[f64], alpha: &[Complex64]) -> f64 {
    let scale = alpha.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let err = t
        .iter()
        .zip(alpha)
        .map(|(&x, a)| (series.eval(x) - a).norm())
        .fold(0.0, f64::max);
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

/// Padé orders tried by [`converge_series`]: 1, 2, 4, … below `cap`, then `cap`.
pub fn order_schedule(cap: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = 1;
    while n < cap {
        out.push(n);
        n *= 2;
    }
    out.push(cap.max(1));
    out
}

/// Raises the Padé order until the series matches quadrature on `t_grid`
/// (default: [`default_grid`]) to relative sup-norm `tol`.
pub fn converge_series(
    density: &SpectralDensity,
    ctx: &ThermalContext,
    tol: f64,
    t_grid: Option<&[f64]>,
) -> Result<(ExponentialSeries, usize)> {
    converge_series_capped(density, ctx, tol, t_grid, DEFAULT_MAX_ORDER)
}

pub fn converge_series_capped(
    density: &SpectralDensity,
    ctx: &ThermalContext,
    tol: f64,
    t_grid: Option<&[f64]>,
    max_order: usize,
) -> Result<(ExponentialSeries, usize)> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    if density.lorentzian_terms().is_none() {
        return Err(Error::invalid(
            "spectral_density",
            "analytic series need a gLDD, tgLDD or Meier-Tannor density",
        ));
    }
    let owned;
    let grid = match t_grid {
        Some(g) => g,
        None => {
            owned = default_grid(ctx);
            &owned
        }
    };
    let reference = sample_quadrature(density, ctx, grid)?;
    let mut best = f64::INFINITY;
    for n in order_schedule(max_order) {
        let series = alpha_series(density, ctx, n)?;
        let err = relative_sup_error(&series, grid, &reference);
        if err <= tol {
            return Ok((series, n));
        }
        best = best.min(err);
    }
    Err(Error::ConvergenceFailure {
        order: max_order,
        best_error: best,
    })
}
