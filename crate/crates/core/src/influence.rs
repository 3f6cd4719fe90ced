//! Discretized influence functional coefficients `η_kk′`, the QUAPI counter
//! term and reorganization energies.
//!
//! Every coefficient is a double integral of `α(t − t′)` over a window of the
//! time grid. With `z = ΩΔt` and `φ1(z) = (e^z − 1)/z`, `φ2(z) = (e^z − 1 − z)/z²`
//! the closed forms per term are
//!
//! ```text
//! Trotter   η_kk′ = pΔt² φ1(z)² e^{z(k−k′−1)}          η_kk = pΔt² φ2(z)
//! Strang    η_00 = η_NN = p(Δt/2)² φ2(z/2)
//!           η_k0 = p(Δt²/2) φ1(z) φ1(z/2) e^{z(k−1)}
//!           η_Nk = p(Δt²/2) φ1(z) φ1(z/2) e^{z(N−k−1)}
//!           η_N0 = p(Δt²/4) φ1(z/2)² e^{z(N−1)}
//! ```
//!
//! Interior Strang entries coincide with the Trotter ones.

use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ExponentialSeries, SpectralDensity, Tail, ThermalContext};
use crate::quadrature::{integrate, Tolerance};
use crate::special::gamma;

/// Below this `|z|`, `φ1` and `φ2` use their Taylor series.
const TAYLOR_RADIUS: f64 = 0.1;
const TAYLOR_TERMS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Splitting {
    Trotter,
    Strang,
}

/// `Σ z^k/(k+shift)!`, the Taylor series of `φ1` (`shift = 1`) and `φ2`
/// (`shift = 2`).
fn phi_series(z: Complex64, shift: usize) -> Complex64 {
    let mut fact: f64 = (1..=shift).map(|v| v as f64).product();
    let mut term = Complex64::new(1.0 / fact, 0.0);
    let mut acc = term;
    for k in 1..TAYLOR_TERMS {
        fact = (k + shift) as f64;
        term = term * z / fact;
        acc += term;
    }
    acc
}

fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < TAYLOR_RADIUS {
        phi_series(z, 1)
    } else {
        (z.exp() - 1.0) / z
    }
}

fn phi2(z: Complex64) -> Complex64 {
    if z.norm() < TAYLOR_RADIUS {
        phi_series(z, 2)
    } else {
        (z.exp() - 1.0 - z) / (z * z)
    }
}

/// Strang-only corner and edge coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct StrangBoundary {
    pub eta_n0: Complex64,
    /// `η_k0` for `k = 1..N−1`.
    pub eta_k0: Vec<Complex64>,
    /// `η_Nk` for `k = 1..N−1`.
    pub eta_nk: Vec<Complex64>,
}

/// `η` on an `N`-step grid, stored as a diagonal plus a lag kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaGrid {
    n: usize,
    dt: f64,
    splitting: Splitting,
    diag: Vec<Complex64>,
    /// `η` for lags `1..=N`.
    lag: Vec<Complex64>,
    boundary: Option<StrangBoundary>,
    /// Accumulated imaginary counter-term shift of the diagonal.
    diag_shift: f64,
}

impl EtaGrid {
    pub fn steps(&self) -> usize {
        self.n
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn splitting(&self) -> Splitting {
        self.splitting
    }

    pub fn boundary(&self) -> Option<&StrangBoundary> {
        self.boundary.as_ref()
    }

    /// Imaginary shift added to every diagonal entry by [`quapi_correct`].
    pub fn diag_shift(&self) -> f64 {
        self.diag_shift
    }

    /// `η_kk`, `k = 0..=N`.
    pub fn diag(&self, k: usize) -> Complex64 {
        self.diag[k] + Complex64::new(0.0, self.diag_shift)
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..=self.n).map(|k| self.diag(k)).collect()
    }

    /// Interior coefficient for lag `m = k − k′ ≥ 1`.
    pub fn lag(&self, m: usize) -> Complex64 {
        self.lag[m - 1]
    }

    pub fn lag_kernel(&self) -> &[Complex64] {
        &self.lag
    }

    /// `η_kk′` for `0 ≤ k′ ≤ k ≤ N`.
    pub fn eta(&self, k: usize, kp: usize) -> Result<Complex64> {
        if kp > k || k > self.n {
            return Err(Error::invalid("k", format!("need 0 <= k' <= k <= {}", self.n)));
        }
        if k == kp {
            return Ok(self.diag(k));
        }
        if let Some(b) = &self.boundary {
            let n = self.n;
            if k == n && kp == 0 {
                return Ok(b.eta_n0);
            }
            if kp == 0 {
                return Ok(b.eta_k0[k - 1]);
            }
            if k == n {
                return Ok(b.eta_nk[kp - 1]);
            }
        }
        Ok(self.lag(k - kp))
    }
}

fn check_grid(series: &ExponentialSeries, dt: f64, n: usize, min_n: usize) -> Result<()> {
    series.check_decaying()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    if n < min_n {
        return Err(Error::invalid("steps", format!("need at least {min_n} steps")));
    }
    Ok(())
}

fn sum_terms(series: &ExponentialSeries, dt: f64, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
    series.terms().iter().map(|t| t.p * dt * dt * f(t.omega * dt)).sum()
}

fn trotter_parts(series: &ExponentialSeries, dt: f64, n: usize) -> (Complex64, Vec<Complex64>) {
    let diag = sum_terms(series, dt, phi2);
    let lag = (1..=n)
        .map(|m| sum_terms(series, dt, |z| phi1(z) * phi1(z) * (z * (m as f64 - 1.0)).exp()))
        .collect();
    (diag, lag)
}

/// Trotter-splitting coefficients on `N` steps of `dt`.
pub fn eta_trotter(series: &ExponentialSeries, dt: f64, n: usize) -> Result<EtaGrid> {
    check_grid(series, dt, n, 1)?;
    let (d, lag) = trotter_parts(series, dt, n);
    Ok(EtaGrid {
        n,
        dt,
        splitting: Splitting::Trotter,
        diag: vec![d; n + 1],
        lag,
        boundary: None,
        diag_shift: 0.0,
    })
}

/// Strang-splitting coefficients on `N ≥ 2` steps of `dt`.
pub fn eta_strang(series: &ExponentialSeries, dt: f64, n: usize) -> Result<EtaGrid> {
    check_grid(series, dt, n, 2)?;
    let (d, lag) = trotter_parts(series, dt, n);
    let edge = sum_terms(series, dt, |z| 0.25 * phi2(0.5 * z));
    let mut diag = vec![d; n + 1];
    diag[0] = edge;
    diag[n] = edge;
    let half = |z: Complex64| 0.5 * phi1(z) * phi1(0.5 * z);
    let eta_k0 = (1..n)
        .map(|k| sum_terms(series, dt, |z| half(z) * (z * (k as f64 - 1.0)).exp()))
        .collect();
    let eta_nk = (1..n)
        .map(|k| sum_terms(series, dt, |z| half(z) * (z * ((n - k) as f64 - 1.0)).exp()))
        .collect();
    let eta_n0 = sum_terms(series, dt, |z| {
        let q = phi1(0.5 * z);
        0.25 * q * q * (z * (n as f64 - 1.0)).exp()
    });
    Ok(EtaGrid {
        n,
        dt,
        splitting: Splitting::Strang,
        diag,
        lag,
        boundary: Some(StrangBoundary { eta_n0, eta_k0, eta_nk }),
        diag_shift: 0.0,
    })
}

/// QUAPI counter term: every diagonal entry gains `iΔtλ/(ħπ)`.
pub fn quapi_correct(grid: &EtaGrid, lambda: f64, ctx: &ThermalContext) -> EtaGrid {
    let mut out = grid.clone();
    out.diag_shift += grid.dt * lambda / (ctx.hbar() * PI);
    out
}

/// Brute-force `∫∫ α(t − t′) dt′ dt` over `window_t × window_tp`, restricted
/// to `t′ ≤ t` when `triangular`.
pub fn eta_oracle(
    alpha: impl Fn(f64) -> Complex64,
    window_t: (f64, f64),
    window_tp: (f64, f64),
    triangular: bool,
) -> Result<Complex64> {
    let (a, b) = window_t;
    let (c, d) = window_tp;
    if !(a <= b && c <= d) {
        return Err(Error::invalid("window", "lower end above upper end"));
    }
    if a == b || c == d {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let inner_tol = Tolerance { abs: 0.0, rel: 1e-13 };
    let outer_tol = Tolerance { abs: 0.0, rel: 1e-10 };
    let failure: Cell<Option<Error>> = Cell::new(None);
    let outer = |t: f64| {
        let hi = if triangular { d.min(t) } else { d };
        if hi <= c {
            return Complex64::new(0.0, 0.0);
        }
        match integrate(|tp| alpha(t - tp), &[c, hi], inner_tol, 200) {
            Ok(r) => r.value,
            Err(e) => {
                failure.set(Some(e));
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let mut pts = vec![a];
    if triangular && c > a && c < b {
        pts.push(c);
    }
    if triangular && d > a && d < b {
        pts.push(d);
    }
    pts.push(b);
    let r = integrate(outer, &pts, outer_tol, 400)?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(r.value)
}

/// `λ = ∫_0^∞ J(ω)/ω dω`, analytic where a closed form exists.
pub fn reorganization_energy(density: &SpectralDensity) -> Result<f64> {
    match density {
        SpectralDensity::Gldd(terms) => Ok(terms.iter().map(|h| h.lambda()).sum()),
        SpectralDensity::MeierTannor(terms) => Ok(terms
            .iter()
            .map(|h| {
                let (g, w) = (h.gamma(), h.omega_tilde());
                PI * PI * h.lambda() / (8.0 * g * (g * g + w * w))
            })
            .sum()),
        SpectralDensity::PowerLaw(pl) => {
            let (s, q) = (pl.exponent(), pl.stretch());
            if s <= 0.0 {
                return Err(Error::Divergence(format!(
                    "J ~ omega^{s}: integral of J/omega diverges"
                )));
            }
            Ok(pl.amplitude() / q * pl.omega_c().powf(s) * gamma(s / q))
        }
        SpectralDensity::Tgldd { .. } | SpectralDensity::Tabulated(_) => reorganization_energy_quadrature(density),
    }
}

/// `∫_0^∞ J(ω)/ω dω` by adaptive quadrature, for any family.
pub fn reorganization_energy_quadrature(density: &SpectralDensity) -> Result<f64> {
    let s = density.low_frequency_exponent();
    if let Some(s) = s {
        if s <= 0.0 {
            return Err(Error::Divergence(format!(
                "J ~ omega^{s}: integral of J/omega diverges"
            )));
        }
    }
    let f = |w: f64| {
        if w <= 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(density.eval(w) / w, 0.0)
        }
    };
    let tol = Tolerance { abs: 0.0, rel: 1e-13 };
    let breaks = density.breakpoints();
    let scale = breaks.last().copied().unwrap_or(1.0);
    let (end, tail) = match density.tail() {
        Tail::Compact(end) => (end, false),
        Tail::Fast => {
            let SpectralDensity::PowerLaw(pl) = density else {
                unreachable!()
            };
            let x = 80.0 + pl.exponent() / pl.stretch() * 80f64.ln() * 2.0;
            (pl.omega_c() * x.powf(1.0 / pl.stretch()), false)
        }
        Tail::Algebraic(_) => (20.0 * scale, true),
    };
    let mut total = 0.0;
    let mut start = 0.0;
    if let Some(s) = s.filter(|&s| s < 1.0) {
        let w1 = breaks.first().copied().unwrap_or(end).min(end);
        let inv = 1.0 / s;
        let mapped = |v: f64| f(w1 * v.powf(inv)) * (w1 * inv * v.powf(inv - 1.0));
        total += integrate(mapped, &[0.0, 1.0], tol, 2000)?.value.re;
        start = w1;
    }
    let mut pts = vec![start];
    pts.extend(breaks.iter().copied().filter(|&w| w > start && w < end));
    pts.push(end);
    total += integrate(f, &pts, tol, pts.len() + 2000)?.value.re;
    if tail {
        let mapped = |u: f64| {
            if u <= 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                f(end / u) * (end / (u * u))
            }
        };
        total += integrate(mapped, &[0.0, 1.0], tol, 2000)?.value.re;
    }
    Ok(total)
}
