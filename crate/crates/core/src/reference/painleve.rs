use std::f64::consts::PI;

use serde::Serialize;

use super::rk4_step;

/// One sample of φ(z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PainleveSample {
    pub z: f64,
    pub phi: f64,
    pub dphi: f64,
}

/// Solution of φ'' + φ'/z − sin φ = 0 with φ(0) = φ0, φ'(0) = 0.
#[derive(Debug, Clone, Serialize)]
pub struct PainleveSolution {
    pub phi0: f64,
    pub step: f64,
    pub samples: Vec<PainleveSample>,
    /// First z with φ(z) = π, if reached before `z_max`.
    pub z_star: Option<f64>,
}

impl PainleveSolution {
    /// φ at an arbitrary z in the sampled range, by cubic Hermite
    /// interpolation between samples.
    pub fn phi_at(&self, z: f64) -> Option<f64> {
        let last = self.samples.last()?;
        if z < 0.0 || z > last.z + 1e-12 {
            return None;
        }
        let first_rk = self.samples.get(1)?;
        if z <= first_rk.z {
            return Some(series(self.phi0, z).0);
        }
        let idx = self.samples.partition_point(|s| s.z <= z).min(self.samples.len() - 1);
        let (a, b) = (self.samples[idx - 1], self.samples[idx]);
        let h = b.z - a.z;
        if h <= 0.0 {
            return Some(a.phi);
        }
        let t = (z - a.z) / h;
        let (t2, t3) = (t * t, t * t * t);
        Some(
            (2.0 * t3 - 3.0 * t2 + 1.0) * a.phi
                + (t3 - 2.0 * t2 + t) * h * a.dphi
                + (-2.0 * t3 + 3.0 * t2) * b.phi
                + (t3 - t2) * h * b.dphi,
        )
    }
}

fn series(phi0: f64, z: f64) -> (f64, f64) {
    let (sn, cs) = phi0.sin_cos();
    let a = sn / 4.0;
    let b = cs * a / 16.0;
    let c = (cs * b - sn * a * a / 2.0) / 36.0;
    let z2 = z * z;
    (phi0 + z2 * (a + z2 * (b + z2 * c)), z * (2.0 * a + z2 * (4.0 * b + 6.0 * c * z2)))
}

/// Fixed-step RK4 solution of Painlevé III, seeded by the small-z series at
/// z0 = 10·step.
pub fn painleve_iii(phi0: f64, z_max: f64, step: f64) -> PainleveSolution {
    assert!(phi0 > 0.0 && phi0 < PI, "painleve_iii needs 0 < phi0 < π");
    assert!(step > 0.0 && z_max > 0.0);
    let rhs = |z: f64, y: &[f64; 2]| [y[1], y[0].sin() - y[1] / z];
    let z0 = 10.0 * step;
    let mut samples = vec![PainleveSample { z: 0.0, phi: phi0, dphi: 0.0 }];
    let (p, dp) = series(phi0, z0);
    let mut y = [p, dp];
    samples.push(PainleveSample { z: z0, phi: p, dphi: dp });
    let mut z_star = None;
    let mut i = 0usize;
    loop {
        let z = z0 + i as f64 * step;
        if z >= z_max - 0.5 * step {
            break;
        }
        let next = rk4_step(rhs, z, &y, step);
        let zn = z0 + (i + 1) as f64 * step;
        if z_star.is_none() && y[0] < PI && next[0] >= PI {
            z_star = Some(z + step * (PI - y[0]) / (next[0] - y[0]));
        }
        y = next;
        samples.push(PainleveSample { z: zn, phi: y[0], dphi: y[1] });
        i += 1;
    }
    PainleveSolution { phi0, step, samples, z_star }
}

/// Which of the three asymptotic formulas produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AsymptoticRegime {
    Inner,
    Outer,
    Pendulum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticValue {
    pub phi: f64,
    pub regime: AsymptoticRegime,
    /// The expansions assume φ0 ≪ 1; false once φ0 > 0.1.
    pub valid: bool,
    /// First crossing of π predicted by the matched pendulum.
    pub z_star: f64,
}

const INNER_LIMIT: f64 = 1.5;
// angle at which the outer Bessel branch hands over to the pendulum
const PENDULUM_SWITCH: f64 = 1.0;

fn outer(phi0: f64, z: f64) -> f64 {
    phi0 * z.exp() / (2.0 * PI * z).sqrt() * (1.0 + 1.0 / (8.0 * z))
}

fn pendulum_match(phi0: f64) -> (f64, f64, f64) {
    // z_s where the outer branch reaches the switch angle
    let (mut lo, mut hi) = (INNER_LIMIT, INNER_LIMIT);
    let z_s = if outer(phi0, lo) >= PENDULUM_SWITCH {
        lo
    } else {
        while outer(phi0, hi) < PENDULUM_SWITCH {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if outer(phi0, mid) < PENDULUM_SWITCH {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let delta = outer(phi0, z_s);
    let amplitude = 2.0 * (1.0 + delta.powi(4) / 48.0).sqrt();
    let z_star = z_s + ((PI - delta) / amplitude).min(1.0).asin();
    (z_s, amplitude, z_star)
}

/// Three-regime asymptotic approximation of Painlevé III for small φ0:
/// φ0(1 + z²/4) near the origin, φ0 e^z/√(2πz)(1 + 1/(8z)) in the growth
/// phase and π − A sin(z* − z) once the angle nears π. The pendulum is matched
/// continuously to the outer branch at φ = 1 and its amplitude decays like
/// (z_s/z)^{1/2} under the weak 1/z damping.
pub fn painleve_asymptotic(phi0: f64, z: f64) -> AsymptoticValue {
    let (z_s, amplitude, z_star) = pendulum_match(phi0);
    let valid = phi0 <= 0.1;
    let inner = phi0 * (1.0 + z * z / 4.0);
    let (phi, regime) = if z < INNER_LIMIT && inner < PENDULUM_SWITCH {
        (inner, AsymptoticRegime::Inner)
    } else if z < z_s {
        (outer(phi0, z), AsymptoticRegime::Outer)
    } else {
        let a = amplitude * (z_s / z).sqrt();
        (PI - a * (z_star - z).sin(), AsymptoticRegime::Pendulum)
    };
    AsymptoticValue { phi, regime, valid, z_star }
}
