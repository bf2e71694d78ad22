//! Poincaré-disk geometry: isometries, distances, geodesic sampling and the
//! rhombus completion that drives the Chebyshev net.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Closest a point may come to the unit circle.
pub const BOUNDARY_GUARD: f64 = 1e-12;

/// Angle in radians. Asymptotic angles are stored signed, in (−π, π].
pub type Angle = f64;

/// A point strictly inside the unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Complex64", into = "Complex64")]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint(Complex64::new(0.0, 0.0));

    pub fn new(z: Complex64) -> Result<Self> {
        if z.is_finite() && z.norm() < 1.0 - BOUNDARY_GUARD {
            Ok(DiskPoint(z))
        } else {
            Err(Error::OutsideDisk { re: z.re, im: z.im })
        }
    }

    pub fn from_re_im(re: f64, im: f64) -> Result<Self> {
        Self::new(Complex64::new(re, im))
    }

    #[inline]
    pub fn value(self) -> Complex64 {
        self.0
    }

    /// Geodesic distance to the disk centre.
    pub fn radius(self) -> f64 {
        2.0 * self.0.norm().atanh()
    }
}

impl TryFrom<Complex64> for DiskPoint {
    type Error = Error;
    fn try_from(z: Complex64) -> Result<Self> {
        DiskPoint::new(z)
    }
}

impl From<DiskPoint> for Complex64 {
    fn from(p: DiskPoint) -> Complex64 {
        p.0
    }
}

/// A nonnegative hyperbolic length.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HypLength(f64);

impl HypLength {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(HypLength(value))
        } else {
            Err(Error::BadLength(value))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for HypLength {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        HypLength::new(v)
    }
}

impl From<HypLength> for f64 {
    fn from(l: HypLength) -> f64 {
        l.0
    }
}

#[inline]
fn mobius_raw(z: Complex64, z0: Complex64) -> Complex64 {
    let den = Complex64::new(1.0, 0.0) + z * z0.conj();
    assert!(den.norm_sqr() > 0.0, "internal error: Möbius denominator vanished");
    (z + z0) / den
}

impl std::ops::Neg for DiskPoint {
    type Output = DiskPoint;

    fn neg(self) -> DiskPoint {
        DiskPoint(-self.0)
    }
}

/// The disk isometry sending 0 to `z0`: (z + z0)/(1 + z·conj(z0)).
#[inline]
pub fn mobius(z: DiskPoint, z0: DiskPoint) -> DiskPoint {
    DiskPoint(mobius_raw(z.0, z0.0))
}

/// `z` seen from `base`, i.e. moved so that `base` sits at the origin.
#[inline]
pub fn recenter(z: DiskPoint, base: DiskPoint) -> Complex64 {
    mobius_raw(z.0, -base.0)
}

/// arccosh(1 + 2|z1−z2|²/((1−|z1|²)(1−|z2|²))), evaluated as 2·artanh of the
/// recentred modulus, which keeps precision for nearby points.
pub fn hyp_distance(z1: DiskPoint, z2: DiskPoint) -> f64 {
    2.0 * recenter(z2, z1).norm().atanh()
}

/// Points at spacing `delta` along the geodesic leaving `base` in `direction`;
/// index 0 is `base` itself.
pub fn geodesic_points(base: DiskPoint, direction: Angle, delta: f64, count: usize) -> Result<Vec<DiskPoint>> {
    if !(delta > 0.0) || count == 0 {
        return Err(Error::InvalidParams(format!(
            "geodesic sampling needs delta > 0 and count >= 1 (got {delta}, {count})"
        )));
    }
    let dir = Complex64::from_polar(1.0, direction);
    (0..count).map(|k| geodesic_point(base, dir, delta, k)).collect()
}

/// The `k`-th sample of [`geodesic_points`], for a unit direction `dir`.
pub fn geodesic_point(base: DiskPoint, dir: Complex64, delta: f64, k: usize) -> Result<DiskPoint> {
    if k == 0 {
        return Ok(base);
    }
    let t = (k as f64 * delta / 2.0).tanh();
    let z = mobius_raw(dir * t, base.0);
    if t >= 1.0 - BOUNDARY_GUARD || z.norm() >= 1.0 - BOUNDARY_GUARD {
        return Err(Error::DiskOverflow { index: k });
    }
    Ok(DiskPoint(z))
}

/// Result of [`complete_rhombus`]. A degenerate completion folds back onto ζ0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Completion {
    pub point: DiskPoint,
    pub degenerate: bool,
}

/// Fourth vertex of the hyperbolic rhombus with corner `z0` and neighbours
/// `z1`, `z2` (both at the same distance from `z0`).
#[inline]
pub fn complete_rhombus(z0: DiskPoint, z1: DiskPoint, z2: DiskPoint) -> Completion {
    let w1 = recenter(z1, z0);
    let w2 = recenter(z2, z0);
    let sum = w1 + w2;
    let scale = w1.norm().max(w2.norm());
    if sum.norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Completion { point: z0, degenerate: true };
    }
    let w12 = sum / (1.0 + (w1 * w2).norm());
    Completion { point: DiskPoint(mobius_raw(w12, z0.0)), degenerate: false }
}

/// Signed angle at `z0` from the geodesic towards `z1` to the one towards `z2`.
#[inline]
pub fn vertex_angle(z0: DiskPoint, z1: DiskPoint, z2: DiskPoint) -> Angle {
    let w1 = recenter(z1, z0);
    let w2 = recenter(z2, z0);
    (w2 * w1.conj()).arg()
}

/// The four edge neighbours of a net vertex.
#[derive(Debug, Clone, Copy)]
pub struct Star {
    /// (j+1, k)
    pub east: DiskPoint,
    /// (j, k+1)
    pub north: DiskPoint,
    /// (j−1, k)
    pub west: DiskPoint,
    /// (j, k−1)
    pub south: DiskPoint,
}

#[inline]
fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// True when the four quads around `center` do not share one orientation.
pub fn detect_reversal(center: DiskPoint, star: &Star) -> bool {
    let e = recenter(star.east, center);
    let n = recenter(star.north, center);
    let w = recenter(star.west, center);
    let s = recenter(star.south, center);
    let product = cross(e, n) * cross(w, n) * cross(w, s) * cross(e, s);
    product <= 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn p(re: f64, im: f64) -> DiskPoint {
        DiskPoint::from_re_im(re, im).unwrap()
    }

    #[test]
    fn rejects_boundary_points() {
        assert!(DiskPoint::from_re_im(1.0, 0.0).is_err());
        assert!(DiskPoint::from_re_im(0.0, 1.0 - 1e-13).is_err());
        assert!(DiskPoint::from_re_im(f64::NAN, 0.0).is_err());
        assert!(DiskPoint::from_re_im(0.0, 0.999).is_ok());
        assert!(HypLength::new(-1.0).is_err());
    }

    #[test]
    fn mobius_identities() {
        let z0 = p(0.3, -0.2);
        assert_eq!(mobius(DiskPoint::ORIGIN, z0), z0);
        assert_eq!(mobius(z0, DiskPoint::ORIGIN), z0);
        let v = mobius(p(0.2, 0.0), p(0.3, 0.0)).value();
        assert_abs_diff_eq!(v.re, 0.5 / 1.06, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, 0.0);
    }

    #[test]
    fn distance_examples() {
        let z = p(0.4, 0.1);
        assert_eq!(hyp_distance(z, z), 0.0);
        assert_abs_diff_eq!(hyp_distance(DiskPoint::ORIGIN, p(0.5, 0.0)), 3f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(p(0.5, 0.0).radius(), 3f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn geodesic_samples() {
        let pts = geodesic_points(DiskPoint::ORIGIN, 0.0, 0.1, 3).unwrap();
        assert_eq!(pts[0], DiskPoint::ORIGIN);
        assert_abs_diff_eq!(pts[1].value().re, 0.05f64.tanh(), epsilon = 1e-16);
        assert_eq!(geodesic_points(p(0.1, 0.1), 1.0, 0.1, 1).unwrap(), vec![p(0.1, 0.1)]);
        let pts = geodesic_points(p(0.3, 0.0), FRAC_PI_2, 0.1, 3).unwrap();
        for w in pts.windows(2) {
            assert_abs_diff_eq!(hyp_distance(w[0], w[1]), 0.1, epsilon = 1e-10);
        }
        assert!(matches!(geodesic_points(DiskPoint::ORIGIN, 0.0, 1.0, 100), Err(Error::DiskOverflow { .. })));
    }

    #[test]
    fn rhombus_examples() {
        let t = 0.05f64.tanh();
        let c = complete_rhombus(DiskPoint::ORIGIN, p(t, 0.0), p(t, 0.0));
        assert!(!c.degenerate);
        assert_abs_diff_eq!(c.point.value().re, 0.1f64.tanh(), epsilon = 1e-15);

        let (z1, z2) = (p(t, 0.0), p(0.0, t));
        let c = complete_rhombus(DiskPoint::ORIGIN, z1, z2);
        let expect = Complex64::new(t, t) / (1.0 + t * t);
        assert_abs_diff_eq!((c.point.value() - expect).norm(), 0.0, epsilon = 1e-16);
        for (a, b) in [(DiskPoint::ORIGIN, z1), (DiskPoint::ORIGIN, z2), (z1, c.point), (z2, c.point)] {
            assert_abs_diff_eq!(hyp_distance(a, b), 0.1, epsilon = 1e-12);
        }

        let z0 = p(0.1, 0.2);
        let z1 = mobius(p(t, 0.0), z0);
        let z2 = mobius(p(-t, 0.0), z0);
        let c = complete_rhombus(z0, z1, z2);
        assert!(c.degenerate);
        assert_eq!(c.point, z0);
    }

    #[test]
    fn angle_examples() {
        let t = 0.3;
        assert_abs_diff_eq!(vertex_angle(DiskPoint::ORIGIN, p(t, 0.0), p(0.0, t)), FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(vertex_angle(DiskPoint::ORIGIN, p(t, 0.1), p(t, 0.1)), 0.0);
        assert_abs_diff_eq!(vertex_angle(DiskPoint::ORIGIN, p(t, 0.0), p(-t, 0.0)), PI, epsilon = 1e-15);
    }

    #[test]
    fn reversal_examples() {
        let t = 0.1;
        let o = DiskPoint::ORIGIN;
        let polar = |a: f64| p(t * a.cos(), t * a.sin());
        let star = Star {
            east: polar(0.0),
            north: polar(FRAC_PI_2),
            west: polar(200f64.to_radians()),
            south: polar(-FRAC_PI_2),
        };
        assert!(!detect_reversal(o, &star));
        // north edge swept past the opposite of east: the north-east angle exceeds pi
        let folded = Star { north: polar(190f64.to_radians()), ..star };
        assert!(detect_reversal(o, &folded));
        let mirror = |z: DiskPoint| p(z.value().re, -z.value().im);
        let flipped = Star {
            east: mirror(folded.east),
            north: mirror(folded.north),
            west: mirror(folded.west),
            south: mirror(folded.south),
        };
        assert_eq!(detect_reversal(o, &flipped), detect_reversal(o, &folded));
    }

    fn disk_point() -> impl Strategy<Value = DiskPoint> {
        (0.0f64..0.9, -PI..PI).prop_map(|(r, a)| DiskPoint::new(Complex64::from_polar(r, a)).unwrap())
    }

    proptest! {
        #[test]
        fn mobius_roundtrip(z in disk_point(), z0 in disk_point()) {
            let back = mobius(mobius(z, z0), -z0);
            prop_assert!((back.value() - z.value()).norm() < 1e-12);
        }

        #[test]
        fn mobius_is_isometry(z1 in disk_point(), z2 in disk_point(), z0 in disk_point()) {
            let d = hyp_distance(z1, z2);
            let dm = hyp_distance(mobius(z1, z0), mobius(z2, z0));
            prop_assert!((d - dm).abs() < 1e-10 * (1.0 + d));
        }

        #[test]
        fn distance_isometry_example(z0 in disk_point()) {
            let a = hyp_distance(DiskPoint::ORIGIN, mobius(p(0.5, 0.0), z0));
            let b = hyp_distance(-z0, p(0.5, 0.0));
            prop_assert!((a - b).abs() < 1e-10);
        }

        #[test]
        fn triangle_inequality(a in disk_point(), b in disk_point(), c in disk_point()) {
            prop_assert!(hyp_distance(a, c) <= hyp_distance(a, b) + hyp_distance(b, c) + 1e-10);
            prop_assert!((hyp_distance(a, b) - hyp_distance(b, a)).abs() < 1e-12);
        }

        #[test]
        fn rhombus_sides_equal(z0 in disk_point(), a1 in -PI..PI, a2 in -PI..PI, d in 0.01f64..0.5) {
            prop_assume!((a1 - a2).abs() > 1e-3);
            let z1 = geodesic_points(z0, a1, d, 2).unwrap()[1];
            let z2 = geodesic_points(z0, a2, d, 2).unwrap()[1];
            let c = complete_rhombus(z0, z1, z2);
            prop_assume!(!c.degenerate);
            for (x, y) in [(z1, c.point), (z2, c.point)] {
                prop_assert!((hyp_distance(x, y) - d).abs() < 1e-9);
            }
        }

        #[test]
        fn rhombus_equivariant(z0 in disk_point(), a in disk_point(), a1 in -PI..PI, a2 in -PI..PI) {
            prop_assume!((a1 - a2).abs() > 1e-2 && ((a1 - a2).abs() - PI).abs() > 1e-2);
            let z1 = geodesic_points(z0, a1, 0.1, 2).unwrap()[1];
            let z2 = geodesic_points(z0, a2, 0.1, 2).unwrap()[1];
            let lhs = mobius(complete_rhombus(z0, z1, z2).point, a);
            let rhs = complete_rhombus(mobius(z0, a), mobius(z1, a), mobius(z2, a)).point;
            prop_assert!((lhs.value() - rhs.value()).norm() < 1e-10);
        }

        #[test]
        fn rhombus_opposite_angles(z0 in disk_point(), a1 in -PI..PI, a2 in -PI..PI) {
            prop_assume!((a1 - a2).abs() > 1e-2 && ((a1 - a2).abs() - PI).abs() > 1e-2);
            let z1 = geodesic_points(z0, a1, 0.1, 2).unwrap()[1];
            let z2 = geodesic_points(z0, a2, 0.1, 2).unwrap()[1];
            let z12 = complete_rhombus(z0, z1, z2).point;
            let at0 = vertex_angle(z0, z1, z2);
            // at ζ12 the sweep from ζ1 to ζ2 runs the other way round
            let at12 = vertex_angle(z12, z2, z1);
            prop_assert!((at0 - at12).abs() < 1e-10);
        }

        #[test]
        fn angle_conformal(z0 in disk_point(), a in disk_point(), a1 in -PI..PI, a2 in -PI..PI) {
            let z1 = geodesic_points(z0, a1, 0.2, 2).unwrap()[1];
            let z2 = geodesic_points(z0, a2, 0.2, 2).unwrap()[1];
            let before = vertex_angle(z0, z1, z2);
            prop_assume!((before.abs() - PI).abs() > 1e-6);
            let after = vertex_angle(mobius(z0, a), mobius(z1, a), mobius(z2, a));
            prop_assert!((before - after).abs() < 1e-10);
        }
    }
}
