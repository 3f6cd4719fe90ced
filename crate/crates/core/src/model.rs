//! Thermal context, spectral-density families and the sum-of-exponentials
//! representation of the bath response function.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Inverse temperature and the reduced Planck constant, in caller units.
///
/// Every formula that needs `βħ` takes both factors from here; `ħ` is never
/// assumed to be one implicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalContext {
    beta: f64,
    hbar: f64,
}

impl ThermalContext {
    pub fn new(beta: f64, hbar: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid(
                "beta",
                format!("must be positive and finite, got {beta}"),
            ));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::invalid(
                "hbar",
                format!("must be positive and finite, got {hbar}"),
            ));
        }
        Ok(Self { beta, hbar })
    }

    /// Context with `ħ = 1`.
    pub fn with_beta(beta: f64) -> Result<Self> {
        Self::new(beta, 1.0)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// The thermal time `βħ`.
    pub fn beta_hbar(&self) -> f64 {
        self.beta * self.hbar
    }
}

/// One shifted-Lorentzian component `(λ_h, γ_h, ω̃_h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianTerm {
    lambda: f64,
    gamma: f64,
    omega_tilde: f64,
}

impl LorentzianTerm {
    pub fn new(lambda: f64, gamma: f64, omega_tilde: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::invalid("lambda", format!("must be finite, got {lambda}")));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::invalid("gamma", format!("must be positive, got {gamma}")));
        }
        if !(omega_tilde.is_finite() && omega_tilde >= 0.0) {
            return Err(Error::invalid(
                "omega_tilde",
                format!("must be non-negative, got {omega_tilde}"),
            ));
        }
        Ok(Self {
            lambda,
            gamma,
            omega_tilde,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn omega_tilde(&self) -> f64 {
        self.omega_tilde
    }

    /// `λγ/(γ² + (ω − ω̃)²) + λγ/(γ² + (ω + ω̃)²)`
    fn lorentz_pair(&self, omega: f64) -> f64 {
        let g2 = self.gamma * self.gamma;
        let lg = self.lambda * self.gamma;
        let dm = omega - self.omega_tilde;
        let dp = omega + self.omega_tilde;
        lg / (g2 + dm * dm) + lg / (g2 + dp * dp)
    }

    /// `λ / ((γ² + (ω + ω̃)²)(γ² + (ω − ω̃)²))`
    fn lorentz_product(&self, omega: f64) -> f64 {
        let g2 = self.gamma * self.gamma;
        let dm = omega - self.omega_tilde;
        let dp = omega + self.omega_tilde;
        self.lambda / ((g2 + dp * dp) * (g2 + dm * dm))
    }
}

/// `J(ω) = A ω^s exp(−(ω/ω_c)^q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawCutoff {
    amplitude: f64,
    exponent: f64,
    omega_c: f64,
    stretch: f64,
}

impl PowerLawCutoff {
    pub fn new(amplitude: f64, exponent: f64, omega_c: f64, stretch: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(Error::invalid("A", format!("must be finite, got {amplitude}")));
        }
        if !(exponent.is_finite() && exponent >= 0.0) {
            return Err(Error::invalid("s", format!("must be non-negative, got {exponent}")));
        }
        if !(omega_c.is_finite() && omega_c > 0.0) {
            return Err(Error::invalid("omega_c", format!("must be positive, got {omega_c}")));
        }
        if !(stretch.is_finite() && stretch > 0.0) {
            return Err(Error::invalid("q", format!("must be positive, got {stretch}")));
        }
        Ok(Self {
            amplitude,
            exponent,
            omega_c,
            stretch,
        })
    }

    /// Plain exponential cutoff (`q = 1`).
    pub fn exponential(amplitude: f64, exponent: f64, omega_c: f64) -> Result<Self> {
        Self::new(amplitude, exponent, omega_c, 1.0)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn stretch(&self) -> f64 {
        self.stretch
    }

    fn eval(&self, omega: f64) -> f64 {
        self.amplitude * omega.powf(self.exponent) * (-(omega / self.omega_c).powf(self.stretch)).exp()
    }
}

/// Sampled `J(ω)`, interpolated piecewise-linearly and zero outside the
/// sampled range.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    omega: Vec<f64>,
    value: Vec<f64>,
}

impl TabulatedDensity {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("tabulated", "no samples"));
        }
        let mut omega = Vec::with_capacity(samples.len());
        let mut value = Vec::with_capacity(samples.len());
        for (i, &(w, j)) in samples.iter().enumerate() {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::invalid(
                    "tabulated",
                    format!("sample {i}: frequency must be finite and non-negative, got {w}"),
                ));
            }
            if !j.is_finite() {
                return Err(Error::invalid("tabulated", format!("sample {i}: J is not finite")));
            }
            if let Some(&prev) = omega.last() {
                if w <= prev {
                    return Err(Error::invalid(
                        "tabulated",
                        format!("sample {i}: frequencies must be strictly increasing"),
                    ));
                }
            }
            omega.push(w);
            value.push(j);
        }
        Ok(Self { omega, value })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn values(&self) -> &[f64] {
        &self.value
    }

    fn eval(&self, w: f64) -> f64 {
        let n = self.omega.len();
        if w < self.omega[0] || w > self.omega[n - 1] {
            return 0.0;
        }
        // first index with omega[i] >= w
        let i = self.omega.partition_point(|&x| x < w);
        if self.omega[i] == w {
            return self.value[i];
        }
        let (w0, w1) = (self.omega[i - 1], self.omega[i]);
        let (j0, j1) = (self.value[i - 1], self.value[i]);
        j0 + (j1 - j0) * (w - w0) / (w1 - w0)
    }
}

/// Spectral distribution function families.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDensity {
    /// Generalized Lorentz-Drude/Debye: `(ω/π) Σ_h [λγ/(γ²+(ω−ω̃)²) + λγ/(γ²+(ω+ω̃)²)]`.
    Gldd(Vec<LorentzianTerm>),
    /// Thermally scaled gLDD: `(1/π) tanh(βħω/2) Σ_h [...]`. The scaling
    /// temperature is part of the density.
    Tgldd {
        terms: Vec<LorentzianTerm>,
        thermal: ThermalContext,
    },
    /// Meier-Tannor: `(πω/2) Σ_h λ/((γ²+(ω+ω̃)²)(γ²+(ω−ω̃)²))`.
    MeierTannor(Vec<LorentzianTerm>),
    PowerLaw(PowerLawCutoff),
    Tabulated(TabulatedDensity),
}

/// How `J(ω)` behaves as `ω → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Tail {
    /// `J ~ ω^k` (k < 0).
    Algebraic(f64),
    /// Faster than any power.
    Fast,
    /// Identically zero beyond the given frequency.
    Compact(f64),
}

impl SpectralDensity {
    /// Evaluates `J(ω)`. Negative frequencies use the antisymmetric extension
    /// `J(−ω) = −J(ω)`.
    pub fn eval(&self, omega: f64) -> f64 {
        if omega < 0.0 {
            return -self.eval(-omega);
        }
        match self {
            SpectralDensity::Gldd(terms) => omega / PI * terms.iter().map(|t| t.lorentz_pair(omega)).sum::<f64>(),
            SpectralDensity::Tgldd { terms, thermal } => {
                (0.5 * thermal.beta_hbar() * omega).tanh() / PI
                    * terms.iter().map(|t| t.lorentz_pair(omega)).sum::<f64>()
            }
            SpectralDensity::MeierTannor(terms) => {
                0.5 * PI * omega * terms.iter().map(|t| t.lorentz_product(omega)).sum::<f64>()
            }
            SpectralDensity::PowerLaw(pl) => pl.eval(omega),
            SpectralDensity::Tabulated(tab) => tab.eval(omega),
        }
    }

    /// Lorentzian terms of the gLDD, tgLDD and Meier-Tannor families.
    pub fn lorentzian_terms(&self) -> Option<&[LorentzianTerm]> {
        match self {
            SpectralDensity::Gldd(t) | SpectralDensity::MeierTannor(t) => Some(t),
            SpectralDensity::Tgldd { terms, .. } => Some(terms),
            _ => None,
        }
    }

    /// Exponent `s` of the small-frequency behaviour `J ~ ω^s`; `None` when
    /// `J` vanishes identically near zero.
    pub(crate) fn low_frequency_exponent(&self) -> Option<f64> {
        match self {
            SpectralDensity::Gldd(_) | SpectralDensity::Tgldd { .. } | SpectralDensity::MeierTannor(_) => Some(1.0),
            SpectralDensity::PowerLaw(pl) => Some(pl.exponent),
            SpectralDensity::Tabulated(tab) => {
                if tab.omega[0] > 0.0 {
                    None
                } else if tab.value[0] != 0.0 {
                    Some(0.0)
                } else {
                    Some(1.0)
                }
            }
        }
    }

    pub(crate) fn tail(&self) -> Tail {
        match self {
            SpectralDensity::Gldd(_) => Tail::Algebraic(-1.0),
            SpectralDensity::Tgldd { .. } => Tail::Algebraic(-2.0),
            SpectralDensity::MeierTannor(_) => Tail::Algebraic(-3.0),
            SpectralDensity::PowerLaw(_) => Tail::Fast,
            SpectralDensity::Tabulated(tab) => Tail::Compact(*tab.omega.last().unwrap()),
        }
    }

    /// Frequencies where `J` has visible structure; quadrature panels are
    /// split there.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        let mut pts = match self {
            SpectralDensity::Gldd(terms)
            | SpectralDensity::Tgldd { terms, .. }
            | SpectralDensity::MeierTannor(terms) => terms
                .iter()
                .flat_map(|t| {
                    let (c, g) = (t.omega_tilde, t.gamma);
                    [c - 4.0 * g, c - g, c, c + g, c + 4.0 * g, c + 16.0 * g]
                })
                .filter(|&w| w > 0.0)
                .collect(),
            SpectralDensity::PowerLaw(pl) => {
                let wc = pl.omega_c;
                vec![0.1 * wc, wc, 4.0 * wc]
            }
            SpectralDensity::Tabulated(tab) => tab.omega.clone(),
        };
        pts.retain(|w| w.is_finite() && *w > 0.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// One term `p e^{Ωt}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub p: Complex64,
    pub omega: Complex64,
}

impl ExpTerm {
    pub fn new(p: Complex64, omega: Complex64) -> Self {
        Self { p, omega }
    }
}

/// `α(t) ≈ Σ_K p_K e^{Ω_K t}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExponentialSeries {
    terms: Vec<ExpTerm>,
}

/// Above this many terms, sums use compensated accumulation.
const COMPENSATED_THRESHOLD: usize = 16;

impl ExponentialSeries {
    pub fn new(terms: Vec<ExpTerm>) -> Self {
        Self { terms }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Complex64, Complex64)>) -> Self {
        Self::new(pairs.into_iter().map(|(p, o)| ExpTerm::new(p, o)).collect())
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, term: ExpTerm) {
        self.terms.push(term);
    }

    pub fn into_terms(self) -> Vec<ExpTerm> {
        self.terms
    }

    /// `Σ p e^{Ωt}`. Terms whose exponent underflows contribute zero.
    pub fn eval(&self, t: f64) -> Complex64 {
        let values = self.terms.iter().map(|term| {
            let z = term.omega * t;
            if z.re < -745.0 {
                Complex64::new(0.0, 0.0)
            } else {
                term.p * z.exp()
            }
        });
        if self.terms.len() > COMPENSATED_THRESHOLD {
            compensated_sum(values)
        } else {
            values.sum()
        }
    }

    /// `Σ p`, the value at `t = 0`.
    pub fn weight_sum(&self) -> Complex64 {
        self.eval(0.0)
    }

    pub fn is_decaying(&self) -> bool {
        self.terms.iter().all(|t| t.omega.re < 0.0)
    }

    pub(crate) fn check_decaying(&self) -> Result<()> {
        match self.terms.iter().position(|t| !(t.omega.re < 0.0)) {
            Some(i) => Err(Error::InvalidSeries(format!(
                "term {i} has Re(Omega) = {} (must be negative)",
                self.terms[i].omega.re
            ))),
            None => Ok(()),
        }
    }

    /// Replaces pairs whose `(p, Ω)` are complex conjugates within `tol`
    /// (relative) by exact conjugates.
    pub fn symmetrize_conjugates(&mut self, tol: f64) {
        let n = self.terms.len();
        let mut paired = vec![false; n];
        for i in 0..n {
            if paired[i] {
                continue;
            }
            for j in (i + 1)..n {
                if paired[j] {
                    continue;
                }
                let (a, b) = (self.terms[i], self.terms[j]);
                let scale_p = a.p.norm().max(b.p.norm()).max(f64::MIN_POSITIVE);
                let scale_o = a.omega.norm().max(b.omega.norm()).max(f64::MIN_POSITIVE);
                if (a.p - b.p.conj()).norm() <= tol * scale_p && (a.omega - b.omega.conj()).norm() <= tol * scale_o {
                    let p = 0.5 * (a.p + b.p.conj());
                    let o = 0.5 * (a.omega + b.omega.conj());
                    self.terms[i] = ExpTerm::new(p, o);
                    self.terms[j] = ExpTerm::new(p.conj(), o.conj());
                    paired[i] = true;
                    paired[j] = true;
                    break;
                }
            }
        }
    }
}

/// Neumaier-compensated complex sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = Complex64>) -> Complex64 {
    fn step(sum: &mut f64, comp: &mut f64, x: f64) {
        let t = *sum + x;
        if sum.abs() >= x.abs() {
            *comp += (*sum - t) + x;
        } else {
            *comp += (x - t) + *sum;
        }
        *sum = t;
    }
    let (mut re, mut re_c, mut im, mut im_c) = (0.0, 0.0, 0.0, 0.0);
    for v in values {
        step(&mut re, &mut re_c, v.re);
        step(&mut im, &mut im_c, v.im);
    }
    Complex64::new(re + re_c, im + im_c)
}

/// Evaluates `J(ω)`.
pub fn eval_spectral_density(density: &SpectralDensity, omega: f64) -> f64 {
    density.eval(omega)
}

/// Evaluates the series at time `t`.
pub fn series_eval(series: &ExponentialSeries, t: f64) -> Complex64 {
    series.eval(t)
}

/// Bose-Einstein function `1/(1 − e^{−x})`.
pub fn bose_einstein(x: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::Pole {
            function: "bose_einstein",
            at: "x = 0".into(),
        });
    }
    if x.abs() < 1e-4 {
        let x2 = x * x;
        return Ok(1.0 / x + 0.5 + x / 12.0 * (1.0 - x2 / 60.0 * (1.0 - x2 / 42.0)));
    }
    Ok(1.0 / -(-x).exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gldd_vanishes_at_zero_frequency() {
        let j = SpectralDensity::Gldd(vec![LorentzianTerm::new(1.0, 1.0, 0.0).unwrap()]);
        assert_eq!(j.eval(0.0), 0.0);
    }

    #[test]
    fn power_law_direct_substitution() {
        let j = SpectralDensity::PowerLaw(PowerLawCutoff::new(1.0, 1.0, 1.0, 1.0).unwrap());
        assert_relative_eq!(j.eval(1.0), (-1.0f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn meier_tannor_hand_value() {
        let j = SpectralDensity::MeierTannor(vec![LorentzianTerm::new(1.0, 1.0, 1.0).unwrap()]);
        assert_relative_eq!(j.eval(1.0), PI / 10.0, max_relative = 1e-15);
    }

    #[test]
    fn tabulated_interpolates_and_vanishes_outside() {
        let tab = TabulatedDensity::new(vec![(1.0, 2.0), (2.0, 4.0), (4.0, 0.0)]).unwrap();
        let j = SpectralDensity::Tabulated(tab);
        assert_eq!(j.eval(0.5), 0.0);
        assert_eq!(j.eval(1.0), 2.0);
        assert_relative_eq!(j.eval(1.5), 3.0);
        assert_relative_eq!(j.eval(3.0), 2.0);
        assert_eq!(j.eval(4.0), 0.0);
        assert_eq!(j.eval(4.5), 0.0);
        assert_eq!(j.eval(-1.5), -3.0);
    }

    #[test]
    fn tabulated_rejects_bad_samples() {
        assert!(matches!(TabulatedDensity::new(vec![]), Err(Error::InvalidInput { .. })));
        assert!(TabulatedDensity::new(vec![(1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(TabulatedDensity::new(vec![(-1.0, 1.0)]).is_err());
        assert!(TabulatedDensity::new(vec![(1.0, f64::NAN)]).is_err());
    }

    #[test]
    fn constructors_validate() {
        assert!(ThermalContext::new(0.0, 1.0).is_err());
        assert!(ThermalContext::new(1.0, -1.0).is_err());
        assert!(LorentzianTerm::new(1.0, 0.0, 0.0).is_err());
        assert!(LorentzianTerm::new(1.0, 1.0, -0.5).is_err());
        assert!(PowerLawCutoff::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(PowerLawCutoff::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(PowerLawCutoff::new(1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn bose_einstein_values() {
        assert_eq!(bose_einstein(800.0).unwrap(), 1.0);
        assert_relative_eq!(bose_einstein(2f64.ln()).unwrap(), 2.0, max_relative = 1e-15);
        // 1/x + 1/2 + x/12 at x = 1e-8, higher orders below 1e-25
        let x = 1e-8;
        assert_relative_eq!(bose_einstein(x).unwrap(), 1e8 + 0.5, max_relative = 1e-10);
        assert!(matches!(bose_einstein(0.0), Err(Error::Pole { .. })));
    }

    #[test]
    fn bose_einstein_branches_agree_at_switch() {
        let below = bose_einstein(0.99999e-4).unwrap();
        let above = 1.0 / -(-0.99999e-4f64).exp_m1();
        assert_relative_eq!(below, above, max_relative = 1e-12);
        let neg = bose_einstein(-0.5).unwrap();
        assert_relative_eq!(neg, 1.0 / (1.0 - 0.5f64.exp()), max_relative = 1e-14);
    }

    #[test]
    fn series_eval_examples() {
        let s = ExponentialSeries::from_pairs([(c(1.0, 0.0), c(-1.0, 0.0))]);
        assert_eq!(s.eval(0.0), c(1.0, 0.0));
        assert_relative_eq!(s.eval(1.0).re, (-1.0f64).exp(), max_relative = 1e-15);
        let s = ExponentialSeries::from_pairs([(c(1.0, 0.0), c(-1.0, 2.0))]);
        let v = s.eval(PI);
        assert_relative_eq!(v.re, (-PI).exp(), max_relative = 1e-13);
        assert!(v.im.abs() < 1e-15);
        assert_eq!(ExponentialSeries::default().eval(3.0), c(0.0, 0.0));
    }

    #[test]
    fn series_eval_underflows_to_zero() {
        let s = ExponentialSeries::from_pairs([(c(1.0, 1.0), c(-1.0, 5.0))]);
        for t in [700.0, 745.0, 800.0, 1e6] {
            let v = s.eval(t);
            assert!(v.re.is_finite() && v.im.is_finite());
        }
        assert_eq!(s.eval(1e6), c(0.0, 0.0));
    }

    #[test]
    fn series_at_zero_is_weight_sum_with_cancellation() {
        let mut pairs = vec![];
        for k in 0..40 {
            let w = if k % 2 == 0 { 1e16 } else { -1e16 };
            pairs.push((c(w, 0.0), c(-1.0 - k as f64, 0.0)));
        }
        pairs.push((c(1.0, 0.0), c(-1.0, 0.0)));
        let s = ExponentialSeries::from_pairs(pairs);
        assert_eq!(s.eval(0.0), c(1.0, 0.0));
    }

    #[test]
    fn symmetrize_pairs_conjugates() {
        let mut s = ExponentialSeries::from_pairs([
            (c(1.0, 0.5), c(-1.0, 2.0)),
            (c(1.0 + 1e-9, -0.5), c(-1.0, -2.0 + 1e-9)),
            (c(0.3, 0.0), c(-4.0, 0.0)),
        ]);
        s.symmetrize_conjugates(1e-6);
        assert_eq!(s.terms()[0].p, s.terms()[1].p.conj());
        assert_eq!(s.terms()[0].omega, s.terms()[1].omega.conj());
        assert_eq!(s.terms()[2].p, c(0.3, 0.0));
    }
}
