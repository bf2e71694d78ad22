//! Analytic baselines: Bessel I0, Painlevé III, Minding's bobbin and the
//! Amsler recursion bound.

mod bessel;
mod bobbin;
mod painleve;

pub use bessel::{alpha_star, bessel_i0, bessel_i0_inv, frontier_f1, frontier_f2};
pub use bobbin::{bobbin_energy_bound, bobbin_profile, golden_section_min, BobbinBound, BobbinProfile, BobbinSample};
pub use painleve::{
    painleve_asymptotic, painleve_iii, AsymptoticRegime, AsymptoticValue, PainleveSample, PainleveSolution,
};

use crate::{Error, Result};

/// Default fixed step for both ODE integrators.
pub const DEFAULT_STEP: f64 = 1e-3;

/// One classical Runge–Kutta step for y' = f(t, y).
pub(crate) fn rk4_step<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    h: f64,
) -> [f64; N] {
    let shift = |y: &[f64; N], k: &[f64; N], s: f64| {
        let mut out = *y;
        for i in 0..N {
            out[i] += s * k[i];
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + h / 2.0, &shift(y, &k1, h / 2.0));
    let k3 = f(t + h / 2.0, &shift(y, &k2, h / 2.0));
    let k4 = f(t + h, &shift(y, &k3, h));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// (1/3)·I0(C/(2 s_n)·(I0⁻¹(φ*/φ_n))²) with C = √(sin φ*/φ*): the guaranteed
/// lower bound on φ_{n+1}/φ_n for an Amsler sector.
pub fn amsler_recursion_bound(phi_n: f64, phi_star: f64, s_n: f64) -> Result<f64> {
    if !(phi_n > 0.0 && phi_n <= phi_star && phi_star < std::f64::consts::PI) {
        return Err(Error::Domain(phi_n));
    }
    if !(s_n > 0.0) {
        return Err(Error::Domain(s_n));
    }
    let c = (phi_star.sin() / phi_star).sqrt();
    let inv = bessel_i0_inv(phi_star / phi_n)?;
    Ok(bessel_i0(c / (2.0 * s_n) * inv * inv) / 3.0)
}
