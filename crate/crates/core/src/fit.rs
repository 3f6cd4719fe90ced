//! Least-squares fitting of sampled `α(t)` by sums of decaying exponentials.
//!
//! Parameters are packed as `(Re p, Im p, Re Ω, Im Ω)` per term. Fits run on a
//! scaled problem (`t ∈ [0, 1]`, `max|α| = 1`) with a projected
//! Levenberg-Marquardt iteration that keeps every `Re Ω ≤ −ε`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bcf::{alpha_series_gldd, alpha_series_mt, alpha_series_tgldd, AlphaSamples};
use crate::error::{Error, Result};
use crate::model::{ExpTerm, ExponentialSeries, SpectralDensity, ThermalContext};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Above this many samples, residual rows are evaluated in parallel.
const PARALLEL_ROWS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    /// Steps that leave the feasible set are projected back onto it.
    LevenbergMarquardt,
    /// Steps that leave the feasible set are reflected at the bound.
    BoundedLevenbergMarquardt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub k: usize,
    pub solver: Solver,
    pub max_iterations: usize,
    /// Target scaled RMS residual.
    pub residual_tol: f64,
    /// Relative step size below which the iteration stops.
    pub param_tol: f64,
    /// Scaled bound: `Re Ω′ ≤ −epsilon`.
    pub epsilon: f64,
    /// Keep `p_1` real and non-negative. `None` means "only when `k = 1`".
    pub enforce_p1_positive: Option<bool>,
    pub rng_seed: u64,
    /// Random restarts per ladder rung in [`incremental_fit`].
    pub ladder_attempts: usize,
    /// Tolerance of the conjugate-pair post-pass; `None` disables it.
    pub symmetrize_tol: Option<f64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            k: 1,
            solver: Solver::LevenbergMarquardt,
            max_iterations: 500,
            residual_tol: 1e-12,
            param_tol: 1e-13,
            epsilon: 1e-8,
            enforce_p1_positive: None,
            rng_seed: 0,
            ladder_attempts: 4,
            symmetrize_tol: None,
        }
    }
}

impl FitConfig {
    pub fn with_k(k: usize) -> Self {
        Self { k, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k", "need at least one term"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon", "must be positive"));
        }
        if !(self.residual_tol > 0.0 && self.param_tol > 0.0) {
            return Err(Error::invalid("tolerance", "tolerances must be positive"));
        }
        Ok(())
    }

    fn p1_enforced(&self) -> bool {
        self.enforce_p1_positive.unwrap_or(self.k == 1)
    }
}

/// Maps times by `1/t_scale` and amplitudes by `1/a_scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingTransform {
    pub t_scale: f64,
    pub a_scale: f64,
}

impl ScalingTransform {
    /// `t_scale = t_end`, `a_scale = max|α|`.
    pub fn from_samples(samples: &AlphaSamples) -> Result<Self> {
        let t_end = *samples.t().last().unwrap();
        let a_max = samples.alpha().iter().map(|a| a.norm()).fold(0.0, f64::max);
        if a_max == 0.0 {
            return Err(Error::ZeroAmplitude);
        }
        Ok(Self {
            t_scale: if t_end > 0.0 { t_end } else { 1.0 },
            a_scale: a_max,
        })
    }

    pub fn scale_samples(&self, samples: &AlphaSamples) -> Result<AlphaSamples> {
        AlphaSamples::new(
            samples.t().iter().map(|t| t / self.t_scale).collect(),
            samples.alpha().iter().map(|a| a / self.a_scale).collect(),
            samples.weights().map(<[f64]>::to_vec),
        )
    }

    pub fn scale_series(&self, series: &ExponentialSeries) -> ExponentialSeries {
        ExponentialSeries::new(
            series
                .terms()
                .iter()
                .map(|t| ExpTerm::new(t.p / self.a_scale, t.omega * self.t_scale))
                .collect(),
        )
    }

    pub fn unscale_series(&self, series: &ExponentialSeries) -> ExponentialSeries {
        ExponentialSeries::new(
            series
                .terms()
                .iter()
                .map(|t| ExpTerm::new(t.p * self.a_scale, t.omega / self.t_scale))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Fitted series in caller units.
    pub series: ExponentialSeries,
    /// `sqrt(Σ w²|α − model|² / n)` on the scaled problem.
    pub rms_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `α_i − model(t_i)` in caller units, unweighted.
    pub residuals: Vec<Complex64>,
    pub scaling: ScalingTransform,
}

pub fn pack(series: &ExponentialSeries) -> Vec<f64> {
    series
        .terms()
        .iter()
        .flat_map(|t| [t.p.re, t.p.im, t.omega.re, t.omega.im])
        .collect()
}

pub fn unpack(params: &[f64]) -> Result<ExponentialSeries> {
    if !params.len().is_multiple_of(4) {
        return Err(Error::invalid("params", "length must be a multiple of 4"));
    }
    Ok(ExponentialSeries::new(
        params
            .chunks_exact(4)
            .map(|c| ExpTerm::new(Complex64::new(c[0], c[1]), Complex64::new(c[2], c[3])))
            .collect(),
    ))
}

fn model_row(params: &[f64], t: f64) -> Complex64 {
    params
        .chunks_exact(4)
        .map(|c| Complex64::new(c[0], c[1]) * (Complex64::new(c[2], c[3]) * t).exp())
        .sum()
}

fn rows<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    if n >= PARALLEL_ROWS {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Weighted residuals `w_i(α_i − model_i)`, real and imaginary parts
/// interleaved.
pub fn objective_residuals(params: &[f64], samples: &AlphaSamples) -> Result<Vec<f64>> {
    if params.is_empty() || !params.len().is_multiple_of(4) {
        return Err(Error::invalid("params", "length must be a positive multiple of 4"));
    }
    let r = rows(samples.len(), |i| {
        let w = samples.weight(i);
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        (samples.alpha()[i] - model_row(params, samples.t()[i])) * w
    });
    Ok(r.into_iter().flat_map(|c| [c.re, c.im]).collect())
}

/// Jacobian of [`objective_residuals`], `2n × 4K`.
pub fn objective_jacobian(params: &[f64], samples: &AlphaSamples) -> Result<DMatrix<f64>> {
    if params.is_empty() || !params.len().is_multiple_of(4) {
        return Err(Error::invalid("params", "length must be a positive multiple of 4"));
    }
    let n = params.len();
    let row_pairs = rows(samples.len(), |i| {
        let w = samples.weight(i);
        let t = samples.t()[i];
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        if w != 0.0 {
            for (k, c) in params.chunks_exact(4).enumerate() {
                let p = Complex64::new(c[0], c[1]);
                let e = (Complex64::new(c[2], c[3]) * t).exp();
                let d = [-w * e, -w * I * e, -w * p * t * e, -w * I * p * t * e];
                for (j, v) in d.iter().enumerate() {
                    re[4 * k + j] = v.re;
                    im[4 * k + j] = v.im;
                }
            }
        }
        (re, im)
    });
    let mut jac = DMatrix::zeros(2 * samples.len(), n);
    for (i, (re, im)) in row_pairs.into_iter().enumerate() {
        for j in 0..n {
            jac[(2 * i, j)] = re[j];
            jac[(2 * i + 1, j)] = im[j];
        }
    }
    Ok(jac)
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn rms(cost: f64, points: usize) -> f64 {
    (cost / points as f64).sqrt()
}

/// Feasible set of the scaled problem.
struct Bounds {
    epsilon: f64,
    p1: bool,
    reflect: bool,
}

impl Bounds {
    fn apply(&self, x: &mut [f64]) {
        let bound = -self.epsilon;
        for c in x.chunks_exact_mut(4) {
            if c[2] > bound {
                c[2] = if self.reflect {
                    (2.0 * bound - c[2]).min(bound)
                } else {
                    bound
                };
            }
        }
        if self.p1 {
            x[1] = 0.0;
            if x[0] < 0.0 {
                x[0] = if self.reflect { -x[0] } else { 0.0 };
            }
        }
    }

    fn fixed(&self, j: usize) -> bool {
        self.p1 && j == 1
    }
}

struct LmOutcome {
    x: Vec<f64>,
    cost: f64,
    iterations: usize,
    converged: bool,
}

fn levenberg_marquardt(x0: Vec<f64>, samples: &AlphaSamples, cfg: &FitConfig, bounds: &Bounds) -> Result<LmOutcome> {
    let npts = samples.len();
    let n = x0.len();
    let mut x = x0;
    bounds.apply(&mut x);
    let mut r = objective_residuals(&x, samples)?;
    let mut cost = sum_sq(&r);
    let mut mu = -1.0;
    let mut nu = 2.0;
    let mut diag = vec![0.0f64; n];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iterations {
        if !cost.is_finite() {
            break;
        }
        if rms(cost, npts) <= cfg.residual_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut jac = objective_jacobian(&x, samples)?;
        for j in 0..n {
            if bounds.fixed(j) {
                jac.column_mut(j).fill(0.0);
            }
        }
        let col_max = (0..n).map(|j| jac.column(j).norm_squared()).fold(0.0, f64::max);
        for (j, d) in diag.iter_mut().enumerate() {
            let c = jac.column(j).norm_squared();
            *d = d.max(c).max(1e-12 * col_max).max(f64::MIN_POSITIVE);
        }
        if mu < 0.0 {
            mu = 1e-3;
        }
        let m = jac.nrows();
        let mut rhs = DVector::zeros(m + n);
        for (i, v) in r.iter().enumerate() {
            rhs[i] = -v;
        }

        let mut stalled = false;
        let (x_new, r_new, cost_new, step_norm) = loop {
            let mut aug = DMatrix::zeros(m + n, n);
            aug.view_mut((0, 0), (m, n)).copy_from(&jac);
            for j in 0..n {
                aug[(m + j, j)] = (mu * diag[j]).sqrt();
            }
            let qr = aug.qr();
            let qtb = qr.q().transpose() * &rhs;
            let step = qr.r().solve_upper_triangular(&qtb);
            if let Some(step) = step.filter(|s| s.iter().all(|v| v.is_finite())) {
                let mut trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                bounds.apply(&mut trial);
                let r_trial = objective_residuals(&trial, samples)?;
                let c_trial = sum_sq(&r_trial);
                if c_trial < cost {
                    let moved = trial.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    mu = (mu / 3.0).max(1e-15);
                    nu = 2.0;
                    break (trial, r_trial, c_trial, moved);
                }
            }
            mu *= nu;
            nu *= 2.0;
            if mu > 1e20 {
                stalled = true;
                break (Vec::new(), Vec::new(), cost, 0.0);
            }
        };
        if stalled {
            // No descent direction left: a stationary point of the bounded problem.
            converged = true;
            break;
        }
        let x_norm = x_new.iter().map(|v| v * v).sum::<f64>().sqrt();
        let decrease = cost - cost_new;
        x = x_new;
        r = r_new;
        cost = cost_new;
        if step_norm <= cfg.param_tol * (x_norm + cfg.param_tol) || decrease <= 1e-16 * cost {
            converged = true;
            break;
        }
    }
    if !converged && rms(cost, npts) <= cfg.residual_tol {
        converged = true;
    }
    Ok(LmOutcome {
        x,
        cost,
        iterations,
        converged,
    })
}

/// Fits `config.k` exponentials to `samples` starting from `start`.
pub fn fit_exponentials(samples: &AlphaSamples, start: &ExponentialSeries, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    if start.len() != config.k {
        return Err(Error::invalid(
            "k",
            format!("start has {} terms, config asks for {}", start.len(), config.k),
        ));
    }
    let scaling = ScalingTransform::from_samples(samples)?;
    let scaled = scaling.scale_samples(samples)?;
    let bounds = Bounds {
        epsilon: config.epsilon,
        p1: config.p1_enforced(),
        reflect: config.solver == Solver::BoundedLevenbergMarquardt,
    };
    let out = levenberg_marquardt(pack(&scaling.scale_series(start)), &scaled, config, &bounds)?;
    let mut series = scaling.unscale_series(&unpack(&out.x)?);
    if let Some(tol) = config.symmetrize_tol {
        series.symmetrize_conjugates(tol);
    }
    let residuals = samples
        .t()
        .iter()
        .zip(samples.alpha())
        .map(|(&t, a)| a - series.eval(t))
        .collect();
    Ok(FitResult {
        series,
        rms_residual: rms(out.cost, samples.len()),
        iterations: out.iterations,
        converged: out.converged,
        residuals,
        scaling,
    })
}

/// Padé-seeded start: the analytic series with `k − 2h̆` Padé terms.
pub fn starting_values_pade(density: &SpectralDensity, ctx: &ThermalContext, k: usize) -> Result<ExponentialSeries> {
    let terms = density.lorentzian_terms().ok_or_else(|| {
        Error::invalid(
            "spectral_density",
            "Pade starting values need a gLDD, tgLDD or Meier-Tannor density",
        )
    })?;
    let pairs = 2 * terms.len();
    if k < pairs {
        return Err(Error::invalid(
            "k",
            format!("k = {k} is below the {pairs} Lorentzian pole terms"),
        ));
    }
    let order = k - pairs;
    match density {
        SpectralDensity::Gldd(t) => alpha_series_gldd(t, ctx, order),
        SpectralDensity::Tgldd { terms, thermal } => {
            if thermal.beta_hbar() != ctx.beta_hbar() {
                return Err(Error::invalid(
                    "thermal",
                    "tgLDD scaling temperature differs from the bath temperature",
                ));
            }
            alpha_series_tgldd(terms, ctx, order)
        }
        SpectralDensity::MeierTannor(t) => alpha_series_mt(t, ctx, order),
        _ => unreachable!(),
    }
}

/// One-term start estimated from the shape of the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicStart {
    pub series: ExponentialSeries,
    /// Set when no minimum of `Re α` or `Im α` gave a damping estimate.
    pub fallback: bool,
}

/// Linear interpolation of the first sign change of `y` after index 0.
fn first_zero_crossing(t: &[f64], y: &[f64]) -> Option<f64> {
    (1..y.len()).find_map(|i| {
        let (a, b) = (y[i - 1], y[i]);
        if a == 0.0 && i > 1 {
            Some(t[i - 1])
        } else if a * b < 0.0 {
            Some(t[i - 1] + (t[i] - t[i - 1]) * a / (a - b))
        } else {
            None
        }
    })
}

/// First interior index strictly below both neighbours.
fn first_minimum(y: &[f64]) -> Option<usize> {
    (1..y.len().saturating_sub(1)).find(|&i| y[i] < y[i - 1] && y[i] < y[i + 1])
}

fn first_extremum(y: &[f64]) -> Option<usize> {
    (1..y.len().saturating_sub(1)).find(|&i| (y[i] - y[i - 1]) * (y[i + 1] - y[i]) < 0.0)
}

/// `p_1 = α(0)`, `Im Ω_1` from quarter periods and `Re Ω_1` from the damping at
/// the first minima of `Re α` and `Im α`.
pub fn starting_values_heuristic(samples: &AlphaSamples) -> Result<HeuristicStart> {
    let t = samples.t();
    if t[0] != 0.0 {
        return Err(Error::invalid("t", "heuristic start needs a sample at t = 0"));
    }
    let p1 = samples.alpha()[0].re;
    if p1 == 0.0 {
        return Err(Error::ZeroAmplitude);
    }
    let t_end = *t.last().unwrap();
    let re: Vec<f64> = samples.alpha().iter().map(|a| a.re).collect();
    let im: Vec<f64> = samples.alpha().iter().map(|a| a.im).collect();

    // Oscillation frequency from quarter periods.
    let mut freqs = Vec::new();
    if let Some(tq) = first_zero_crossing(t, &re) {
        freqs.push(std::f64::consts::FRAC_PI_2 / tq);
    }
    let im_scale = im.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let im_signal = im_scale > 1e-12 * p1.abs();
    if im_signal {
        if let Some(i) = first_extremum(&im) {
            freqs.push(std::f64::consts::FRAC_PI_2 / t[i]);
        }
    }
    let mut w = if freqs.is_empty() {
        0.0
    } else {
        freqs.iter().sum::<f64>() / freqs.len() as f64
    };
    if im_signal {
        if let Some(v) = im.iter().skip(1).find(|v| **v != 0.0) {
            if v.signum() != p1.signum() {
                w = -w;
            }
        }
    }

    // Damping from the first minima.
    let mut rates = Vec::new();
    if let Some(i) = first_minimum(&re) {
        let ratio = re[i] / (p1 * (w * t[i]).cos());
        if ratio > 0.0 {
            rates.push(ratio.ln() / t[i]);
        }
    }
    if im_signal {
        if let Some(i) = first_minimum(&im) {
            let ratio = im[i] / (p1 * (w * t[i]).sin());
            if ratio > 0.0 && ratio.is_finite() {
                rates.push(ratio.ln() / t[i]);
            }
        }
    }
    let mut fallback = false;
    let gamma = if rates.is_empty() {
        fallback = true;
        // e-folding time of Re α, else the window length.
        let target = p1 / std::f64::consts::E;
        let fold = (1..re.len()).find_map(|i| {
            let (a, b) = ((re[i - 1] - target) * p1.signum(), (re[i] - target) * p1.signum());
            (a > 0.0 && b <= 0.0).then(|| t[i - 1] + (t[i] - t[i - 1]) * a / (a - b))
        });
        match fold {
            Some(tf) if tf > 0.0 => -1.0 / tf,
            _ => {
                w = 0.0;
                -1.0 / t_end.max(f64::MIN_POSITIVE)
            }
        }
    } else {
        rates.iter().sum::<f64>() / rates.len() as f64
    };
    Ok(HeuristicStart {
        series: ExponentialSeries::from_pairs([(Complex64::new(p1, 0.0), Complex64::new(gamma, w))]),
        fallback,
    })
}

/// Fits `K = 1, 2, …, k_max`, seeding each rung with the previous fit plus a
/// randomly perturbed copy of its last term.
pub fn incremental_fit(samples: &AlphaSamples, k_max: usize, config: &FitConfig) -> Result<Vec<FitResult>> {
    if k_max == 0 {
        return Err(Error::invalid("kmax", "need at least one term"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let start = starting_values_heuristic(samples)?.series;
    let first = fit_exponentials(samples, &start, &FitConfig { k: 1, ..config.clone() })?;
    let mut ladder = vec![first];

    for k in 2..=k_max {
        let prev = ladder.last().unwrap();
        if prev.rms_residual < config.residual_tol {
            break;
        }
        let cfg = FitConfig { k, ..config.clone() };
        let last = *prev.series.terms().last().unwrap();
        let mut best: Option<FitResult> = None;
        for attempt in 0..=config.ladder_attempts {
            let n1: f64 = rng.sample(StandardNormal);
            let n2: f64 = rng.sample(StandardNormal);
            // The final attempt starts with a zero weight, so it cannot end
            // above the previous rung.
            let p_new = if attempt == config.ladder_attempts {
                Complex64::new(0.0, 0.0)
            } else {
                last.p * (1.0 + n1)
            };
            let mut omega_new = last.omega * (1.0 + n2);
            let bound = -config.epsilon / prev.scaling.t_scale;
            if omega_new.re > bound {
                omega_new.re = bound;
            }
            let mut seed = prev.series.clone();
            seed.push(ExpTerm::new(p_new, omega_new));
            let fit = fit_exponentials(samples, &seed, &cfg)?;
            if best.as_ref().is_none_or(|b| fit.rms_residual < b.rms_residual) {
                best = Some(fit);
            }
        }
        ladder.push(best.unwrap());
    }
    Ok(ladder)
}
