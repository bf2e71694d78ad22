use serde::Serialize;

use super::rk4_step;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BobbinSample {
    /// Arclength parameter ξ = u + v along the meridian.
    pub xi: f64,
    pub s: f64,
    pub ds: f64,
    /// Distance from the axis, cosh(s)/κ.
    pub rho: f64,
    pub z_height: f64,
    pub phi: f64,
    pub sigma: f64,
}

/// Meridian of Minding's bobbin with throat curvature κ.
#[derive(Debug, Clone, Serialize)]
pub struct BobbinProfile {
    pub kappa: f64,
    /// arcsinh(κ), where the profile meets the singular edge.
    pub half_width: f64,
    pub samples: Vec<BobbinSample>,
}

impl BobbinProfile {
    /// Largest |s| along the orbit, refined by a parabola through the
    /// sampled maximum.
    pub fn max_abs_s(&self) -> f64 {
        let abs: Vec<f64> = self.samples.iter().map(|p| p.s.abs()).collect();
        let (i, &peak) = abs.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("profile has samples");
        if i == 0 || i + 1 == abs.len() {
            return peak;
        }
        let (a, b, c) = (abs[i - 1], abs[i], abs[i + 1]);
        let curv = a - 2.0 * b + c;
        if curv >= 0.0 {
            return peak;
        }
        let offset = 0.5 * (a - c) / curv;
        b - 0.25 * (a - c) * offset
    }

    /// s'² + cosh²(s)/(κ²+1) − 1 at every sample.
    pub fn energy_residuals(&self) -> impl Iterator<Item = f64> + '_ {
        let k2 = self.kappa * self.kappa + 1.0;
        self.samples.iter().map(move |p| p.ds * p.ds + p.s.cosh().powi(2) / k2 - 1.0)
    }
}

/// Integrates s'' = −sinh(s)cosh(s)/(κ²+1) from s(0) = 0 with the positive
/// root of the energy equation, together with the height z(ξ) and the
/// asymptotic angle φ(ξ).
pub fn bobbin_profile(kappa: f64, xi_max: f64, step: f64) -> BobbinProfile {
    assert!(kappa > 0.0, "bobbin_profile needs kappa > 0");
    assert!(step > 0.0 && xi_max > 0.0);
    let k2 = kappa * kappa + 1.0;
    let root = k2.sqrt();
    let rhs = |_: f64, y: &[f64; 3]| {
        let (sh, ch) = (y[0].sinh(), y[0].cosh());
        [y[1], -sh * ch / k2, (kappa * kappa - sh * sh) / (kappa * root)]
    };
    let sample = |xi: f64, y: &[f64; 3], dds: f64| {
        let c = (y[0].cosh() / root).min(1.0);
        // at a turning point the sign of s'' decides which branch follows
        let sigma = if y[1] != 0.0 { y[1].signum() } else { dds.signum() };
        let phi = (1.0 + sigma) * c.asin() + (1.0 - sigma) * c.acos();
        BobbinSample { xi, s: y[0], ds: y[1], rho: y[0].cosh() / kappa, z_height: y[2], phi, sigma }
    };
    let mut y = [0.0, (1.0 - 1.0 / k2).sqrt(), 0.0];
    let n = (xi_max / step).round() as usize;
    let mut samples = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let xi = i as f64 * step;
        samples.push(sample(xi, &y, rhs(xi, &y)[1]));
        if i < n {
            y = rk4_step(rhs, xi, &y, step);
        }
    }
    BobbinProfile { kappa, half_width: kappa.asinh(), samples }
}

/// Minimiser of a unimodal function on [a, b]; returns (x, f(x)).
pub fn golden_section_min(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + c.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if b - a <= f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BobbinBound {
    pub value: f64,
    pub kappa: f64,
}

/// inf over κ ≥ sinh R of max(κ, cosh R/√(κ² − sinh²R)): the smallest E∞ of a
/// bobbin containing a geodesic disk of radius R.
pub fn bobbin_energy_bound(radius: f64) -> BobbinBound {
    assert!(radius >= 0.0, "bobbin_energy_bound needs R >= 0");
    let sh2 = radius.sinh().powi(2);
    let ch2 = radius.cosh().powi(2);
    let kappa2 = 0.5 * (sh2 + (sh2 * sh2 + 4.0 * ch2).sqrt());
    let kappa = kappa2.sqrt();
    BobbinBound { value: kappa, kappa }
}
