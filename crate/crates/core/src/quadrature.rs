//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands, with
//! Wynn-ε acceleration for oscillatory tails.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_236_016,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], ...
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    /// Relative to `∫|f|` over the domain.
    pub rel: f64,
}

impl Tolerance {
    pub fn target(&self, abs_integral: f64) -> f64 {
        self.abs.max(self.rel * abs_integral)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    /// Estimate of `∫|f|`.
    pub abs_integral: f64,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    abs_integral: f64,
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut e = err.abs();
    if resasc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / resasc).powf(1.5);
        e = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * resabs);
    }
    e
}

/// One 21-point Kronrod panel with its embedded 10-point Gauss estimate.
fn gk21<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut abs_re = fc.re.abs() * WGK[10];
    let mut abs_im = fc.im.abs() * WGK[10];
    let mut fv1 = [Complex64::new(0.0, 0.0); 10];
    let mut fv2 = [Complex64::new(0.0, 0.0); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kron += (f1 + f2) * WGK[j];
        abs_re += WGK[j] * (f1.re.abs() + f2.re.abs());
        abs_im += WGK[j] * (f1.im.abs() + f2.im.abs());
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut asc_re = WGK[10] * (fc.re - mean.re).abs();
    let mut asc_im = WGK[10] * (fc.im - mean.im).abs();
    for j in 0..10 {
        asc_re += WGK[j] * ((fv1[j].re - mean.re).abs() + (fv2[j].re - mean.re).abs());
        asc_im += WGK[j] * ((fv1[j].im - mean.im).abs() + (fv2[j].im - mean.im).abs());
    }
    let h = half.abs();
    let diff = (kron - gauss) * half;
    let err_re = rescale_error(diff.re, abs_re * h, asc_re * h);
    let err_im = rescale_error(diff.im, abs_im * h, asc_im * h);
    Panel {
        a,
        b,
        value: kron * half,
        error: err_re.hypot(err_im),
        abs_integral: (abs_re + abs_im) * h,
    }
}

/// Adaptive integration over `[points[0], points[last]]`, initially split at
/// every given point. Bisects the worst panel until the summed error estimate
/// meets `tol` or `max_panels` is reached.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, points: &[f64], tol: Tolerance, max_panels: usize) -> Result<Integral> {
    if points.len() < 2 {
        return Ok(Integral {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            abs_integral: 0.0,
        });
    }
    let mut panels: Vec<Panel> = points
        .windows(2)
        .filter(|w| w[1] != w[0])
        .map(|w| gk21(&f, w[0], w[1]))
        .collect();
    loop {
        let (value, error, abs_integral) = totals(&panels);
        let target = tol.target(abs_integral);
        if error <= target || !value.re.is_finite() || !value.im.is_finite() {
            if !(value.re.is_finite() && value.im.is_finite()) {
                return Err(Error::Divergence("integrand produced a non-finite value".into()));
            }
            return Ok(Integral {
                value,
                error,
                abs_integral,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        let too_narrow = (p.b - p.a).abs() <= 1e3 * f64::EPSILON * p.a.abs().max(p.b.abs()).max(f64::MIN_POSITIVE);
        if panels.len() >= max_panels || too_narrow {
            return Err(Error::Accuracy {
                achieved: error,
                requested: target,
            });
        }
        panels[worst] = gk21(&f, p.a, mid);
        panels.push(gk21(&f, mid, p.b));
    }
}

fn totals(panels: &[Panel]) -> (Complex64, f64, f64) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut abs_integral = 0.0;
    for p in panels {
        value += p.value;
        error += p.error;
        abs_integral += p.abs_integral;
    }
    (value, error, abs_integral)
}

/// Evenly subdivides each interval in `points` so no piece is wider than
/// `max_width`.
pub fn refine_points(points: &[f64], max_width: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len());
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let pieces = ((b - a) / max_width).ceil().max(1.0) as usize;
        for k in 0..pieces {
            out.push(a + (b - a) * k as f64 / pieces as f64);
        }
    }
    if let Some(&last) = points.last() {
        out.push(last);
    }
    out
}

/// Wynn ε-algorithm estimate of the limit of a sequence.
pub fn wynn_epsilon(seq: &[f64]) -> f64 {
    let n = seq.len();
    if n < 3 {
        return *seq.last().unwrap_or(&0.0);
    }
    // prev = ε_{k-1}, cur = ε_k, column by column.
    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut cur: Vec<f64> = seq.to_vec();
    let mut best = seq[n - 1];
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d == 0.0 {
                // Column has converged exactly.
                return if k % 2 == 0 { cur[i + 1] } else { best };
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        k += 1;
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            if let Some(&v) = cur.last() {
                if v.is_finite() {
                    best = v;
                }
            }
        }
    }
    best
}

/// `∫_start^∞ f` for an oscillatory integrand with period `2π/freq` and a
/// slowly decaying envelope: half-period pieces, summed and extrapolated.
pub fn oscillatory_tail<F: Fn(f64) -> Complex64>(
    f: F,
    start: f64,
    freq: f64,
    abs_target: f64,
    max_cycles: usize,
) -> Result<Integral> {
    let cycle = std::f64::consts::PI / freq;
    let piece_tol = Tolerance {
        abs: abs_target / 4.0,
        rel: 10.0 * f64::EPSILON,
    };
    let mut partial_re = Vec::new();
    let mut partial_im = Vec::new();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut piece_error = 0.0;
    let mut abs_integral = 0.0;
    let mut last = Complex64::new(f64::NAN, f64::NAN);
    let mut settled = 0;
    for k in 0..max_cycles {
        let a = start + k as f64 * cycle;
        let piece = integrate(&f, &[a, a + cycle], piece_tol, 200)?;
        sum += piece.value;
        piece_error += piece.error;
        abs_integral += piece.abs_integral;
        partial_re.push(sum.re);
        partial_im.push(sum.im);
        if partial_re.len() > 60 {
            partial_re.remove(0);
            partial_im.remove(0);
        }
        if k >= 6 {
            let est = Complex64::new(wynn_epsilon(&partial_re), wynn_epsilon(&partial_im));
            let change = (est - last).norm();
            settled = if change <= abs_target { settled + 1 } else { 0 };
            if settled >= 2 {
                return Ok(Integral {
                    value: est,
                    error: change + piece_error,
                    abs_integral,
                });
            }
            last = est;
        }
    }
    Err(Error::Accuracy {
        achieved: (sum - last).norm(),
        requested: abs_target,
    })
}
