//! Special functions evaluated in log space.
//!
//! Morse eigenfunctions at λ ≈ 117 combine factors like ξ^{116} and
//! Γ(233) that overflow `f64` long before their product does, so
//! everything here hands back logarithms (plus a sign where needed).

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln|Γ(x)| via the Lanczos approximation (g = 7, n = 9), with the
/// reflection formula below 1/2.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1−x) = π / sin(πx)
        return (PI / (PI * x).sin()).abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

pub fn ln_factorial(n: u32) -> f64 {
    // exact summation is both cheap and more accurate than Lanczos for small n
    if n < 32 {
        (2..=n).map(|k| (k as f64).ln()).sum()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// ln C(n, k); `k` must not exceed `n`.
pub fn ln_binomial(n: u32, k: u32) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// A real number stored as sign and natural log of its magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub sign: f64,
    pub ln_abs: f64,
}

impl SignedLog {
    pub fn value(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }
}

const RESCALE_LIMIT: f64 = 1e150;

/// Generalized Laguerre polynomial L_n^{(a)}(z) by the upward three-term
/// recurrence in `n`, rescaling as it goes so the magnitude never overflows.
pub fn laguerre(n: u32, a: f64, z: f64) -> SignedLog {
    let mut prev = 1.0_f64;
    let mut cur = if n == 0 { 1.0 } else { 1.0 + a - z };
    let mut ln_scale = 0.0;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - z) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_LIMIT {
            prev /= RESCALE_LIMIT;
            cur /= RESCALE_LIMIT;
            ln_scale += RESCALE_LIMIT.ln();
        }
    }
    if cur == 0.0 {
        SignedLog {
            sign: 0.0,
            ln_abs: f64::NEG_INFINITY,
        }
    } else {
        SignedLog {
            sign: cur.signum(),
            ln_abs: cur.abs().ln() + ln_scale,
        }
    }
}
