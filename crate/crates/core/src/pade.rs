//! `[N−1/N]` Padé decomposition of the Bose-Einstein and Fermi-Dirac
//! functions.
//!
//! The poles `±iξ_j` come from the eigenvalues of a zero-diagonal symmetric
//! tridiagonal matrix `Λ` of size `2N` (`ξ = 2/(βħ·eig)`), and the residues
//! `Ξ_j` from the interlacing eigenvalues `ζ` of a `(2N−1)`-sized companion
//! matrix `Λ̃`:
//!
//! ```text
//! Ξ_j = c_N · Π_k (ζ_k² − ξ_j²) / Π_{k≠j} (ξ_k² − ξ_j²)
//! ```
//!
//! with `c_N = N² + 3N/2` (Bose-Einstein) or `N² + N/2` (Fermi-Dirac).

use crate::error::{Error, Result};
use crate::model::ThermalContext;
use crate::tridiag::sym_tridiag_eigenvalues;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    BoseEinstein,
    FermiDirac,
}

impl Statistics {
    /// `b_m` in `Λ_{m,m+1} = 1/√(b_m b_{m+1})`, 1-based `m`.
    fn lambda_index(self, m: usize) -> f64 {
        match self {
            Statistics::BoseEinstein => 2.0 * m as f64 + 1.0,
            Statistics::FermiDirac => 2.0 * m as f64 - 1.0,
        }
    }

    fn lambda_tilde_index(self, m: usize) -> f64 {
        match self {
            Statistics::BoseEinstein => 2.0 * m as f64 + 3.0,
            Statistics::FermiDirac => 2.0 * m as f64 + 1.0,
        }
    }

    fn weight_prefactor(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            Statistics::BoseEinstein => n * n + 1.5 * n,
            Statistics::FermiDirac => n * n + 0.5 * n,
        }
    }
}

/// Poles and residues of the order-`N` approximant, in caller frequency units.
#[derive(Debug, Clone, PartialEq)]
pub struct PadeParams {
    pub statistics: Statistics,
    pub order: usize,
    /// `βħ` the rates were scaled with.
    pub beta_hbar: f64,
    /// Pole rates `ξ_j`, ascending.
    pub xi: Vec<f64>,
    /// Residue weights `Ξ_j` (dimensionless), aligned with `xi`.
    pub weights: Vec<f64>,
    /// Auxiliary rates `ζ_j` from `Λ̃`, ascending (`N − 1` of them).
    pub zeta: Vec<f64>,
}

fn chain_matrix_offdiag(size: usize, index: impl Fn(usize) -> f64) -> Vec<f64> {
    (1..size).map(|m| 1.0 / (index(m) * index(m + 1)).sqrt()).collect()
}

/// Positive members of a ±-paired spectrum, returned as `2/eig` ascending.
fn paired_rates(size: usize, offdiag: &[f64]) -> Result<Vec<f64>> {
    if size == 0 {
        return Ok(Vec::new());
    }
    let eig = sym_tridiag_eigenvalues(&vec![0.0; size], offdiag)?;
    // Largest eigenvalue gives the smallest rate.
    let mut rates: Vec<f64> = eig[size - size / 2..].iter().rev().map(|&e| 2.0 / e).collect();
    rates.sort_by(f64::total_cmp);
    Ok(rates)
}

/// Padé poles and residues for the given order and statistics.
pub fn pade_parameters(order: usize, statistics: Statistics, ctx: &ThermalContext) -> Result<PadeParams> {
    if order == 0 {
        return Err(Error::invalid("order", "Pade order must be at least 1"));
    }
    let n = order;
    let lambda_off = chain_matrix_offdiag(2 * n, |m| statistics.lambda_index(m));
    let xi = paired_rates(2 * n, &lambda_off)?;
    let tilde_off = chain_matrix_offdiag(2 * n - 1, |m| statistics.lambda_tilde_index(m));
    let zeta = paired_rates(2 * n - 1, &tilde_off)?;

    let log_pre = statistics.weight_prefactor(n).ln();
    let weights = (0..n)
        .map(|j| {
            let x = xi[j];
            let mut log_mag = log_pre;
            let mut negative = false;
            for &z in &zeta {
                let d = (z - x) * (z + x);
                log_mag += d.abs().ln();
                negative ^= d < 0.0;
            }
            for (k, &y) in xi.iter().enumerate() {
                if k == j {
                    continue;
                }
                let d = (y - x) * (y + x);
                log_mag -= d.abs().ln();
                negative ^= d < 0.0;
            }
            let mag = log_mag.exp();
            if negative {
                -mag
            } else {
                mag
            }
        })
        .collect();

    let bh = ctx.beta_hbar();
    Ok(PadeParams {
        statistics,
        order: n,
        beta_hbar: bh,
        xi: xi.iter().map(|x| x / bh).collect(),
        weights,
        zeta: zeta.iter().map(|z| z / bh).collect(),
    })
}

/// `1/x + 1/2 + Σ 2Ξ_j x/(x² + (βħξ_j)²)`, the approximant to `1/(1 − e^{−x})`.
pub fn pade_bose_approx(x: f64, params: &PadeParams) -> Result<f64> {
    if params.statistics != Statistics::BoseEinstein {
        return Err(Error::invalid("statistics", "Bose-Einstein parameters required"));
    }
    if x == 0.0 {
        return Err(Error::Pole {
            function: "pade_bose_approx",
            at: "x = 0".into(),
        });
    }
    Ok(1.0 / x + 0.5 + odd_part(x, params))
}

/// `1/2 − Σ 2Ξ_j x/(x² + (βħξ_j)²)`, the approximant to `1/(1 + e^{x})`.
pub fn pade_fermi_approx(x: f64, params: &PadeParams) -> Result<f64> {
    if params.statistics != Statistics::FermiDirac {
        return Err(Error::invalid("statistics", "Fermi-Dirac parameters required"));
    }
    Ok(0.5 - odd_part(x, params))
}

fn odd_part(x: f64, params: &PadeParams) -> f64 {
    params
        .xi
        .iter()
        .zip(&params.weights)
        .map(|(&xi, &w)| {
            let s = xi * params.beta_hbar;
            2.0 * w * x / (x * x + s * s)
        })
        .sum()
}
