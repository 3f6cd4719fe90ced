//! Polygamma and Hurwitz zeta functions of complex argument.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// B_2, B_4, ..., B_30.
const BERNOULLI_EVEN: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

/// Shift radius for the asymptotic expansions.
const ASYMPTOTIC_RADIUS: f64 = 20.0;

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Smallest non-negative shift `m` with `|z + m| ≥ R` and `Re(z + m) ≥ 1`.
fn shift_for(z: Complex64) -> u32 {
    let mut m = 0u32;
    while (z + f64::from(m)).norm() < ASYMPTOTIC_RADIUS || z.re + f64::from(m) < 1.0 {
        m += 1;
    }
    m
}

/// Hurwitz zeta `ζ(s, z) = Σ_{k≥0} (z + k)^{−s}` for integer `s ≥ 2`, by
/// direct summation up to a shift and an Euler-Maclaurin tail.
pub fn hurwitz_zeta(s: u32, z: Complex64) -> Result<Complex64> {
    if s < 2 {
        return Err(Error::invalid("s", "Hurwitz zeta needs s >= 2"));
    }
    if is_pole(z) {
        return Err(Error::Pole {
            function: "hurwitz_zeta",
            at: format!("z = {z}"),
        });
    }
    let si = s as i32;
    let m = shift_for(z);
    let mut head = Complex64::new(0.0, 0.0);
    // Sum smallest terms first.
    for k in (0..m).rev() {
        head += (z + f64::from(k)).powi(-si);
    }
    let w = z + f64::from(m);
    let sf = f64::from(s);
    let w_pow = w.powi(-si);
    let mut tail = w * w_pow / (sf - 1.0) + 0.5 * w_pow;
    // j-th correction: B_2j/(2j)! · s(s+1)…(s+2j−2) · w^{−s−2j+1}
    let inv_w2 = (w * w).inv();
    let mut rising = sf; // s(s+1)...(s+2j-2)
    let mut fact = 2.0; // (2j)!
    let mut w_term = w_pow / w; // w^{-s-1}
    for (j, &b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = w_term * (b * rising / fact);
        tail += term;
        if term.norm() <= 1e-18 * tail.norm() {
            break;
        }
        let jj = (j + 1) as f64;
        // advance to j+1
        rising *= (sf + 2.0 * jj - 1.0) * (sf + 2.0 * jj);
        fact *= (2.0 * jj + 1.0) * (2.0 * jj + 2.0);
        w_term *= inv_w2;
    }
    Ok(head + tail)
}

/// Digamma `ψ(z) = Γ'(z)/Γ(z)`.
pub fn digamma(z: Complex64) -> Result<Complex64> {
    if is_pole(z) {
        return Err(Error::Pole {
            function: "digamma",
            at: format!("z = {z}"),
        });
    }
    let m = shift_for(z);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in (0..m).rev() {
        acc -= (z + f64::from(k)).inv();
    }
    let w = z + f64::from(m);
    let inv_w2 = (w * w).inv();
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv_w2;
    for (k, &b) in BERNOULLI_EVEN.iter().take(10).enumerate() {
        series += pow * (b / (2.0 * (k + 1) as f64));
        pow *= inv_w2;
    }
    Ok(acc + w.ln() - 0.5 * w.inv() - series)
}

/// Polygamma `ψ^(s)(z) = d^{s+1}/dz^{s+1} ln Γ(z)` for integer `s ≥ 0`.
///
/// Orders that are not non-negative integers are rejected with
/// [`Error::UnsupportedOrder`].
pub fn polygamma(order: f64, z: Complex64) -> Result<Complex64> {
    if !(order >= 0.0 && order.fract() == 0.0 && order <= 170.0) {
        return Err(Error::UnsupportedOrder(order));
    }
    if is_pole(z) {
        return Err(Error::Pole {
            function: "polygamma",
            at: format!("z = {z}"),
        });
    }
    let n = order as u32;
    if n == 0 {
        return digamma(z);
    }
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    Ok(hurwitz_zeta(n + 1, z)? * (sign * factorial(n)))
}

/// Real gamma function; exact for small positive integers.
pub fn gamma(x: f64) -> f64 {
    if x > 0.0 && x.fract() == 0.0 && x <= 171.0 {
        return factorial(x as u32 - 1);
    }
    statrs::function::gamma::gamma(x)
}
