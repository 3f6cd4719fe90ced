//! C interface to bathkit.
//!
//! Objects are opaque handles created by `bk_*_new`-style functions and
//! released with the matching `bk_*_free`. Every fallible function returns a
//! [`BkStatus`]; on failure, [`bk_last_error`] describes the most recent error
//! on the calling thread. Output pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bathkit::bcf::{alpha_quadrature, alpha_series, converge_series, spectral_density_from_series, AlphaSamples};
use bathkit::fit::{incremental_fit, FitConfig};
use bathkit::influence::{eta_strang, eta_trotter, quapi_correct, reorganization_energy, EtaGrid};
use bathkit::model::{ExpTerm, ExponentialSeries, LorentzianTerm, PowerLawCutoff, SpectralDensity, ThermalContext};
use bathkit::pade::{pade_parameters, PadeParams, Statistics};
use bathkit::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    /// A computation failed: divergence, accuracy, no convergence.
    Numerical = 3,
    OutOfRange = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BkStatistics {
    BoseEinstein = 0,
    FermiDirac = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BkFamily {
    Gldd = 0,
    Tgldd = 1,
    MeierTannor = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BkSplitting {
    Trotter = 0,
    Strang = 1,
}

pub struct BkSeries(ExponentialSeries);
pub struct BkPadeParams(PadeParams);
pub struct BkEtaGrid(EtaGrid);
pub struct BkDensity(SpectralDensity);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: BkStatus, msg: impl Into<String>) -> BkStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> BkStatus {
    let status = match e {
        Error::InvalidInput { .. } => BkStatus::InvalidInput,
        _ => BkStatus::Numerical,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), BkStatus>) -> BkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BkStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(BkStatus::Panic, "internal panic"),
    }
}

fn check<T>(r: bathkit::Result<T>) -> Result<T, BkStatus> {
    r.map_err(from_error)
}

fn nonnull<T>(p: *const T, name: &str) -> Result<(), BkStatus> {
    if p.is_null() {
        Err(fail(BkStatus::NullPointer, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` must be null only when `n == 0`, otherwise valid for `n` reads.
unsafe fn slice<'a>(p: *const f64, n: usize, name: &str) -> Result<&'a [f64], BkStatus> {
    if n == 0 {
        return Ok(&[]);
    }
    nonnull(p, name)?;
    Ok(std::slice::from_raw_parts(p, n))
}

/// # Safety
/// `h` must be null or a live handle from this library.
unsafe fn handle<'a, T>(h: *const T, name: &str) -> Result<&'a T, BkStatus> {
    nonnull(h, name)?;
    Ok(&*h)
}

unsafe fn put<T>(out: *mut T, v: T) {
    *out = v;
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

fn thermal(beta: f64, hbar: f64) -> Result<ThermalContext, BkStatus> {
    check(ThermalContext::new(beta, hbar))
}

/// Builds a series from `n` weights `p` and rates `omega`, given as split real
/// and imaginary arrays.
///
/// # Safety
/// Each array must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bk_series_new(
    p_re: *const f64,
    p_im: *const f64,
    omega_re: *const f64,
    omega_im: *const f64,
    n: usize,
    out: *mut *mut BkSeries,
) -> BkStatus {
    guard(|| {
        nonnull(out, "out")?;
        let (pr, pi) = (slice(p_re, n, "p_re")?, slice(p_im, n, "p_im")?);
        let (or, oi) = (slice(omega_re, n, "omega_re")?, slice(omega_im, n, "omega_im")?);
        let terms = (0..n)
            .map(|i| ExpTerm::new(Complex64::new(pr[i], pi[i]), Complex64::new(or[i], oi[i])))
            .collect();
        put(out, Box::into_raw(Box::new(BkSeries(ExponentialSeries::new(terms)))));
        Ok(())
    })
}

/// # Safety
/// `series` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bk_series_free(series: *mut BkSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Number of terms; 0 for a null handle.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bk_series_len(series: *const BkSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `series` must be a live handle; the four outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn bk_series_term(
    series: *const BkSeries,
    index: usize,
    p_re: *mut f64,
    p_im: *mut f64,
    omega_re: *mut f64,
    omega_im: *mut f64,
) -> BkStatus {
    guard(|| {
        let s = handle(series, "series")?;
        for (p, name) in [
            (p_re, "p_re"),
            (p_im, "p_im"),
            (omega_re, "omega_re"),
            (omega_im, "omega_im"),
        ] {
            nonnull(p, name)?;
        }
        let t =
            s.0.terms()
                .get(index)
                .ok_or_else(|| fail(BkStatus::OutOfRange, format!("term {index} of {}", s.0.len())))?;
        put(p_re, t.p.re);
        put(p_im, t.p.im);
        put(omega_re, t.omega.re);
        put(omega_im, t.omega.im);
        Ok(())
    })
}

/// `α(t) = Σ p_k e^{Ω_k t}`.
///
/// # Safety
/// `series` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bk_series_eval(series: *const BkSeries, t: f64, re: *mut f64, im: *mut f64) -> BkStatus {
    guard(|| {
        let s = handle(series, "series")?;
        nonnull(re, "re")?;
        nonnull(im, "im")?;
        let v = s.0.eval(t);
        put(re, v.re);
        put(im, v.im);
        Ok(())
    })
}

/// `J(ω)` implied by the series at inverse temperature `beta`.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bk_series_spectral_density(
    series: *const BkSeries,
    beta: f64,
    hbar: f64,
    omega: f64,
    out: *mut f64,
) -> BkStatus {
    guard(|| {
        let s = handle(series, "series")?;
        nonnull(out, "out")?;
        let ctx = thermal(beta, hbar)?;
        put(out, check(spectral_density_from_series(&s.0, &ctx, omega))?);
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bk_pade_new(
    order: usize,
    statistics: BkStatistics,
    beta: f64,
    hbar: f64,
    out: *mut *mut BkPadeParams,
) -> BkStatus {
    guard(|| {
        nonnull(out, "out")?;
        let stat = match statistics {
            BkStatistics::BoseEinstein => Statistics::BoseEinstein,
            BkStatistics::FermiDirac => Statistics::FermiDirac,
        };
        let p = check(pade_parameters(order, stat, &thermal(beta, hbar)?))?;
        put(out, Box::into_raw(Box::new(BkPadeParams(p))));
        Ok(())
    })
}

/// # Safety
/// `params` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bk_pade_free(params: *mut BkPadeParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Pole `ξ_j` and residue weight `Ξ_j`, `j < order`.
///
/// # Safety
/// `params` must be a live handle; `xi` and `weight` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bk_pade_pole(
    params: *const BkPadeParams,
    j: usize,
    xi: *mut f64,
    weight: *mut f64,
) -> BkStatus {
    guard(|| {
        let p = &handle(params, "params")?.0;
        nonnull(xi, "xi")?;
        nonnull(weight, "weight")?;
        if j >= p.xi.len() {
            return Err(fail(BkStatus::OutOfRange, format!("pole {j} of {}", p.xi.len())));
        }
        put(xi, p.xi[j]);
        put(weight, p.weights[j]);
        Ok(())
    })
}

/// Auxiliary rate `ζ_j`, `j < order − 1`.
///
/// # Safety
/// `params` must be a live handle; `zeta` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bk_pade_zeta(params: *const BkPadeParams, j: usize, zeta: *mut f64) -> BkStatus {
    guard(|| {
        let p = &handle(params, "params")?.0;
        nonnull(zeta, "zeta")?;
        let z = p
            .zeta
            .get(j)
            .ok_or_else(|| fail(BkStatus::OutOfRange, format!("zeta {j} of {}", p.zeta.len())))?;
        put(zeta, *z);
        Ok(())
    })
}

/// # Safety
/// `params` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bk_pade_order(params: *const BkPadeParams) -> usize {
    params.as_ref().map_or(0, |p| p.0.order)
}

/// Lorentzian family from `n` terms. `beta`/`hbar` fix the scaling temperature
/// of `BK_FAMILY_TGLDD` and are ignored otherwise.
///
/// # Safety
/// The three arrays must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bk_density_lorentzian(
    family: BkFamily,
    lambda: *const f64,
    gamma: *const f64,
    omega_tilde: *const f64,
    n: usize,
    beta: f64,
    hbar: f64,
    out: *mut *mut BkDensity,
) -> BkStatus {
    guard(|| {
        nonnull(out, "out")?;
        let (l, g, w) = (
            slice(lambda, n, "lambda")?,
            slice(gamma, n, "gamma")?,
            slice(omega_tilde, n, "omega_tilde")?,
        );
        let terms = (0..n)
            .map(|i| LorentzianTerm::new(l[i], g[i], w[i]))
            .collect::<bathkit::Result<Vec<_>>>();
        let terms = check(terms)?;
        if terms.is_empty() {
            return Err(fail(BkStatus::InvalidInput, "need at least one term"));
        }
        let d = match family {
            BkFamily::Gldd => SpectralDensity::Gldd(terms),
            BkFamily::Tgldd => SpectralDensity::Tgldd {
                terms,
                thermal: thermal(beta, hbar)?,
            },
            BkFamily::MeierTannor => SpectralDensity::MeierTannor(terms),
        };
        put(out, Box::into_raw(Box::new(BkDensity(d))));
        Ok(())
    })
}

/// `J(ω) = A ω^s e^{−(ω/ω_c)^q}`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bk_density_power_law(
    amplitude: f64,
    exponent: f64,
    omega_c: f64,
    stretch: f64,
    out: *mut *mut BkDensity,
) -> BkStatus {
    guard(|| {
        nonnull(out, "out")?;
        let pl = check(PowerLawCutoff::new(amplitude, exponent, omega_c, stretch))?;
        put(out, Box::into_raw(Box::new(BkDensity(SpectralDensity::PowerLaw(pl)))));
        Ok(())
    })
}

/// # Safety
/// `density` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bk_density_free(density: *mut BkDensity) {
    if !density.is_null() {
        drop(Box::from_raw(density));
    }
}

/// # Safety
/// `density` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bk_density_eval(density: *const BkDensity, omega: f64, out: *mut f64) -> BkStatus {
    guard(|| {
        let d = handle(density, "density")?;
        nonnull(out, "out")?;
        put(out, d.0.eval(omega));
        Ok(())
    })
}

/// Reorganization energy `∫_0^∞ J(ω)/ω dω`.
///
/// # Safety
/// `density` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bk_reorganization_energy(density: *const BkDensity, out: *mut f64) -> BkStatus {
    guard(|| {
        let d = handle(density, "density")?;
        nonnull(out, "out")?;
        put(out, check(reorganization_energy(&d.0))?);
        Ok(())
    })
}

/// `α(t)` by adaptive quadrature.
///
/// # Safety
/// `density` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bk_alpha_quadrature(
    density: *const BkDensity,
    beta: f64,
    hbar: f64,
    t: f64,
    re: *mut f64,
    im: *mut f64,
) -> BkStatus {
    guard(|| {
        let d = handle(density, "density")?;
        nonnull(re, "re")?;
        nonnull(im, "im")?;
        let v = check(alpha_quadrature(&d.0, &thermal(beta, hbar)?, t))?;
        put(re, v.re);
        put(im, v.im);
        Ok(())
    })
}

/// Padé series of a Lorentzian density. With `order == 0` the order is raised
/// until the series matches quadrature to relative sup-norm `tol` on
/// `t ∈ [0, 5βħ]`; `order_used` (may be null) receives the order.
///
/// # Safety
/// `density` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bk_alpha_series(
    density: *const BkDensity,
    beta: f64,
    hbar: f64,
    order: usize,
    tol: f64,
    out: *mut *mut BkSeries,
    order_used: *mut usize,
) -> BkStatus {
    guard(|| {
        let d = handle(density, "density")?;
        nonnull(out, "out")?;
        let ctx = thermal(beta, hbar)?;
        let (series, n) = if order == 0 {
            check(converge_series(&d.0, &ctx, tol, None))?
        } else {
            (check(alpha_series(&d.0, &ctx, order))?, order)
        };
        if !order_used.is_null() {
            put(order_used, n);
        }
        put(out, Box::into_raw(Box::new(BkSeries(series))));
        Ok(())
    })
}

/// Fits `k` exponentials to `n` samples `(t_i, α_i)`. `weights` may be null.
/// `rms` (may be null) receives the scaled RMS residual.
///
/// # Safety
/// `t`, `alpha_re`, `alpha_im` (and `weights` unless null) must hold `n`
/// doubles; `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn bk_fit(
    t: *const f64,
    alpha_re: *const f64,
    alpha_im: *const f64,
    weights: *const f64,
    n: usize,
    k: usize,
    seed: u64,
    out: *mut *mut BkSeries,
    rms: *mut f64,
) -> BkStatus {
    guard(|| {
        nonnull(out, "out")?;
        let t = slice(t, n, "t")?.to_vec();
        let (re, im) = (slice(alpha_re, n, "alpha_re")?, slice(alpha_im, n, "alpha_im")?);
        let alpha = re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect();
        let w = if weights.is_null() {
            None
        } else {
            Some(slice(weights, n, "weights")?.to_vec())
        };
        let samples = check(AlphaSamples::new(t, alpha, w))?;
        let config = FitConfig {
            k,
            rng_seed: seed,
            ..FitConfig::default()
        };
        let ladder = check(incremental_fit(&samples, k, &config))?;
        let best = ladder.into_iter().last().expect("ladder has at least one rung");
        if !rms.is_null() {
            put(rms, best.rms_residual);
        }
        put(out, Box::into_raw(Box::new(BkSeries(best.series))));
        Ok(())
    })
}

/// η coefficients for `steps` steps of size `dt`.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bk_eta_new(
    series: *const BkSeries,
    dt: f64,
    steps: usize,
    splitting: BkSplitting,
    out: *mut *mut BkEtaGrid,
) -> BkStatus {
    guard(|| {
        let s = handle(series, "series")?;
        nonnull(out, "out")?;
        let g = match splitting {
            BkSplitting::Trotter => eta_trotter(&s.0, dt, steps),
            BkSplitting::Strang => eta_strang(&s.0, dt, steps),
        };
        put(out, Box::into_raw(Box::new(BkEtaGrid(check(g)?))));
        Ok(())
    })
}

/// Adds the QUAPI counter term `iΔtλ/(ħπ)` to the diagonal, in place.
///
/// # Safety
/// `grid` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bk_eta_quapi(grid: *mut BkEtaGrid, lambda: f64, hbar: f64) -> BkStatus {
    guard(|| {
        nonnull(grid, "grid")?;
        if !lambda.is_finite() {
            return Err(fail(BkStatus::InvalidInput, "`lambda` must be finite"));
        }
        let ctx = thermal(1.0, hbar)?;
        let g = &mut *grid;
        g.0 = quapi_correct(&g.0, lambda, &ctx);
        Ok(())
    })
}

/// `η_{k k′}` for `0 ≤ k′ ≤ k ≤ steps`.
///
/// # Safety
/// `grid` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bk_eta_get(
    grid: *const BkEtaGrid,
    k: usize,
    kp: usize,
    re: *mut f64,
    im: *mut f64,
) -> BkStatus {
    guard(|| {
        let g = handle(grid, "grid")?;
        nonnull(re, "re")?;
        nonnull(im, "im")?;
        if kp > k || k > g.0.steps() {
            return Err(fail(
                BkStatus::OutOfRange,
                format!("need 0 <= kp <= k <= {}, got ({k}, {kp})", g.0.steps()),
            ));
        }
        let v = check(g.0.eta(k, kp))?;
        put(re, v.re);
        put(im, v.im);
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bk_eta_steps(grid: *const BkEtaGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.steps())
}

/// # Safety
/// `grid` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bk_eta_free(grid: *mut BkEtaGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}
