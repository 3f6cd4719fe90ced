//! Eigenvalues of real symmetric tridiagonal matrices by Sturm-sequence
//! bisection.

use crate::error::{Error, Result};

/// All eigenvalues of the symmetric tridiagonal matrix with main diagonal
/// `diag` and first off-diagonal `offdiag`, sorted ascending.
///
/// Each eigenvalue is bisected until its bracket is a few ulps wide, so small
/// eigenvalues keep their relative accuracy when the matrix allows it (zero
/// diagonal matrices do).
pub fn sym_tridiag_eigenvalues(diag: &[f64], offdiag: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::invalid("diag", "empty matrix"));
    }
    if offdiag.len() != n - 1 {
        return Err(Error::invalid(
            "offdiag",
            format!("expected {} entries, got {}", n - 1, offdiag.len()),
        ));
    }
    if diag.iter().chain(offdiag).any(|v| !v.is_finite()) {
        return Err(Error::invalid("diag", "entries must be finite"));
    }
    if n == 1 {
        return Ok(vec![diag[0]]);
    }

    let (mut lo, mut hi) = gershgorin(diag, offdiag);
    let norm = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let pivmin = f64::MIN_POSITIVE * offdiag.iter().fold(1.0f64, |m, e| m.max(e * e));
    let abs_floor = 1e-30 * norm;
    // Widen so Gershgorin endpoints are strictly outside.
    lo -= 2.0 * f64::EPSILON * norm;
    hi += 2.0 * f64::EPSILON * norm;

    let mut out = Vec::with_capacity(n);
    let mut left = lo;
    for k in 0..n {
        // k-th smallest: count(x) <= k for x below it, > k above.
        let (mut a, mut b) = (left, hi);
        loop {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let width = b - a;
            if width <= abs_floor || width <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) {
                break;
            }
            if sturm_count(diag, offdiag, mid, pivmin) > k {
                b = mid;
            } else {
                a = mid;
            }
        }
        let value = 0.5 * (a + b);
        out.push(value);
        left = a;
    }
    Ok(out)
}

fn gershgorin(diag: &[f64], offdiag: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut r = 0.0;
        if i > 0 {
            r += offdiag[i - 1].abs();
        }
        if i + 1 < n {
            r += offdiag[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// Number of eigenvalues strictly less than `x`.
fn sturm_count(diag: &[f64], offdiag: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let e = offdiag[i - 1];
        q = diag[i] - x - e * e / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_by_two() {
        let e = sym_tridiag_eigenvalues(&[0.0, 0.0], &[0.3]).unwrap();
        assert_relative_eq!(e[0], -0.3, max_relative = 1e-15);
        assert_relative_eq!(e[1], 0.3, max_relative = 1e-15);
    }

    #[test]
    fn three_by_three() {
        let a = 0.7;
        let e = sym_tridiag_eigenvalues(&[0.0; 3], &[a, a]).unwrap();
        let r = a * 2f64.sqrt();
        assert_relative_eq!(e[0], -r, max_relative = 1e-14);
        assert!(e[1].abs() < 1e-28);
        assert_relative_eq!(e[2], r, max_relative = 1e-14);
    }

    #[test]
    fn one_by_one() {
        assert_eq!(sym_tridiag_eigenvalues(&[1.0], &[]).unwrap(), vec![1.0]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(sym_tridiag_eigenvalues(&[], &[]).is_err());
        assert!(sym_tridiag_eigenvalues(&[1.0, 2.0], &[]).is_err());
    }

    #[test]
    fn matches_dense_solver() {
        let diag = [2.0, -1.0, 0.5, 3.0, 0.0, 1.5];
        let off = [1.0, 0.3, -0.7, 0.2, 2.0];
        let n = diag.len();
        let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = off[i];
                m[(i + 1, i)] = off[i];
            }
        }
        let mut dense: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        dense.sort_by(f64::total_cmp);
        let ours = sym_tridiag_eigenvalues(&diag, &off).unwrap();
        for (a, b) in ours.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn free_chain_spectrum() {
        // Zero diagonal, unit off-diagonal: 2 cos(kπ/(n+1)).
        let n = 50;
        let e = sym_tridiag_eigenvalues(&vec![0.0; n], &vec![1.0; n - 1]).unwrap();
        let mut exact: Vec<f64> = (1..=n)
            .map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        exact.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
