use crate::{Error, Result};

const SERIES_LIMIT: f64 = 15.0;

fn i0_series(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

fn i0_asymptotic(x: f64) -> f64 {
    // e^x/√(2πx) Σ ((2k−1)!!)²/(k! (8x)^k), truncated at the smallest term
    let mut term: f64 = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        let next = term * (2.0 * kf - 1.0).powi(2) / (8.0 * kf * x);
        if next >= term || next < 1e-17 {
            break;
        }
        term = next;
        sum += term;
    }
    x.exp() / (2.0 * std::f64::consts::PI * x).sqrt() * sum
}

/// Modified Bessel function I0 for x ≥ 0 (even extension for x < 0).
pub fn bessel_i0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        i0_series(x)
    } else {
        i0_asymptotic(x)
    }
}

/// Inverse of I0 on [0, ∞).
pub fn bessel_i0_inv(y: f64) -> Result<f64> {
    if !(y >= 1.0) || !y.is_finite() {
        return Err(Error::Domain(y));
    }
    if y == 1.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while bessel_i0(hi) < y {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if bessel_i0(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// f1(α) = I0(2α²)/3, the Amsler-diagonal frontier curve.
pub fn frontier_f1(alpha: f64) -> f64 {
    bessel_i0(2.0 * alpha * alpha) / 3.0
}

/// f2(α) = (α/α*)², the supporting quadratic of f1.
pub fn frontier_f2(alpha: f64) -> f64 {
    let r = alpha / alpha_star();
    r * r
}

/// α* = sup_w w/√f1(w).
pub fn alpha_star() -> f64 {
    // w²/f1(w) = 1.5·x/I0(x) with x = 2w²; maximise over x
    let neg = |x: f64| -1.5 * x / bessel_i0(x);
    let (x, value) = super::golden_section_min(neg, 0.0, 10.0, 1e-12);
    debug_assert!(x > 0.0);
    (-value).sqrt()
}
