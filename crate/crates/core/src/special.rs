//! Bessel function `J0` from its power series and Hankel asymptotic expansion.
//!
//! Used as an oracle for the circle quadrature of the synthesis module, so it
//! deliberately shares no code with it.

use std::f64::consts::{FRAC_PI_4, PI};

/// Crossover between the power series and the asymptotic expansion. At 12 the
/// largest series term is ~4e3 (cancellation error ~1e-12) and the smallest
/// asymptotic term is ~e^{-24}.
const SERIES_LIMIT: f64 = 12.0;

/// `J0(x) = Σ_k (−1)^k (x/2)^{2k} / (k!)²`.
pub fn bessel_j0_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && kf * kf > q.abs() {
            break;
        }
    }
    sum
}

/// Hankel expansion `J0(x) ≈ √(2/(πx)) (P cos χ − Q sin χ)`, `χ = x − π/4`,
/// truncated at its smallest term.
pub fn bessel_j0_asymptotic(x: f64) -> f64 {
    let x = x.abs();
    let mut p = 1.0;
    let mut q = 0.0;
    let mut c = 1.0f64;
    let mut prev = f64::INFINITY;
    for n in 1..200usize {
        let nf = n as f64;
        let odd = 2.0 * nf - 1.0;
        c *= odd * odd / (nf * 8.0 * x);
        if c >= prev || c < 1e-18 {
            break;
        }
        prev = c;
        let k = n / 2;
        let alt = if k % 2 == 0 { 1.0 } else { -1.0 };
        if n % 2 == 0 {
            p += alt * c;
        } else {
            q -= alt * c;
        }
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        bessel_j0_series(x)
    } else {
        bessel_j0_asymptotic(x)
    }
}

/// First positive zero of `J0`.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;
