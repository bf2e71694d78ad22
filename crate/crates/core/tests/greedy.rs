use std::f64::consts::PI;

use ksurf::analysis::periodic_amsler_energy;
use ksurf::complex::{validate_complex, SectorKind};
use ksurf::hyperbolic::hyp_distance;
use ksurf::netgen::{amsler_sector, find_cut, run_greedy, GreedyParams};
use ksurf::topology::Topology;
use proptest::prelude::*;

fn standard(radius: f64) -> GreedyParams {
    GreedyParams::new(radius, 2, 0.75 * PI).with_delta(0.05)
}

#[test]
fn every_quad_is_a_rhombus() {
    let c = run_greedy(&standard(3.0)).unwrap();
    let mut n = 0;
    for s in &c.sectors {
        for (j, k) in s.quads() {
            let p = [(j, k), (j + 1, k), (j + 1, k + 1), (j, k + 1)].map(|(a, b)| s.point(a, b).unwrap());
            for i in 0..4 {
                assert!((hyp_distance(p[i], p[(i + 1) % 4]) - 0.05).abs() < 1e-9);
            }
            n += 1;
        }
    }
    assert!(n > 10_000);
    assert!(validate_complex(&c).is_valid());
}

#[test]
fn angles_respect_cutoff_after_run() {
    for r in [2.0, 3.0, 4.0] {
        let p = standard(r);
        let c = run_greedy(&p).unwrap();
        assert!(c.terminated());
        for (_, _, _, a) in c.all_angles() {
            assert!(a.abs() <= p.phi_star + 2.0 * p.delta, "R = {r}: {a}");
        }
    }
}

#[test]
fn radius_three_first_generation() {
    let c = run_greedy(&standard(3.0)).unwrap();
    let first: Vec<_> = c.branches.iter().filter(|b| b.generation == 1).collect();
    assert_eq!(first.len(), 4);
    // one per initial quadrant
    let mut parents: Vec<_> = first.iter().map(|b| b.parent_sector).collect();
    parents.sort_unstable();
    assert_eq!(parents, vec![0, 1, 2, 3]);
    let t = Topology::build(&c);
    for b in &first {
        let v = t.vertex_at(b.parent_sector, b.cut.0, b.cut.1).unwrap();
        assert_eq!(t.degree(v), 6);
        assert!(b.radius < 1.0);
        assert!((b.phi_daughter - b.phi_parent / 3.0).abs() < 1e-15);
    }
}

#[test]
fn amsler_cut_is_well_inside() {
    let g = amsler_sector(3.0, PI / 2.0, 0.05).unwrap();
    let cut = find_cut(&g, 0.75 * PI).unwrap().unwrap();
    let p = g.point(cut.j_star, cut.k_star).unwrap();
    assert!(p.radius() < 1.0, "{}", p.radius());
}

#[test]
fn daughters_copy_parent_rows_exactly() {
    let c = run_greedy(&standard(3.0)).unwrap();
    for b in &c.branches {
        let parent = &c.sectors[b.parent_sector];
        let [d1, d2, d3] = b.daughter_sectors;
        assert_eq!(c.sectors[d1].kind, SectorKind::Side);
        assert_eq!(c.sectors[d2].kind, SectorKind::Middle);
        assert_eq!(c.sectors[d3].kind, SectorKind::Side);
        let row = parent.ray_from(b.cut, ksurf::complex::Axis::J);
        let col = parent.ray_from(b.cut, ksurf::complex::Axis::K);
        let d1_row = c.sectors[d1].axis(ksurf::complex::Axis::J);
        let d3_col = c.sectors[d3].axis(ksurf::complex::Axis::K);
        let bits = |v: &[ksurf::hyperbolic::DiskPoint]| {
            v.iter().map(|p| (p.value().re.to_bits(), p.value().im.to_bits())).collect::<Vec<_>>()
        };
        assert_eq!(bits(&row), bits(&d1_row));
        assert_eq!(bits(&col), bits(&d3_col));
        assert!((c.sectors[d2].opening_angle.abs() - b.phi_daughter).abs() < 1e-12);
    }
}

#[test]
fn runs_are_bit_identical() {
    let a = run_greedy(&standard(3.5)).unwrap();
    let b = run_greedy(&standard(3.5)).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}

#[test]
fn sector_count_within_a_priori_bound() {
    for r in [2.0, 3.0, 4.0] {
        let c = run_greedy(&standard(r)).unwrap();
        let m0 = periodic_amsler_energy(r, 0.05).unwrap().m0_min;
        // soft check: factor-2 slack on M ≤ 6·m0
        assert!(c.sectors.len() <= 2 * 6 * m0, "R = {r}: {} sectors, m0 = {m0}", c.sectors.len());
    }
}

#[test]
fn periodic_order_grows_exponentially() {
    let rs = [1.0, 2.0, 3.0, 4.0, 5.0];
    let logs: Vec<f64> = rs.iter().map(|&r| (periodic_amsler_energy(r, 0.05).unwrap().m0_min as f64).ln()).collect();
    let n = rs.len() as f64;
    let (mx, my) = (rs.iter().sum::<f64>() / n, logs.iter().sum::<f64>() / n);
    let sxy: f64 = rs.iter().zip(&logs).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = rs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = logs.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = sxy * sxy / (sxx * syy);
    assert!(slope > 0.3 && r2 > 0.95, "slope {slope}, R² {r2}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_runs_are_valid(
        radius in 0.5f64..2.6,
        m in 2usize..4,
        cutoff in 0.55f64..0.85,
        first in proptest::option::of(0.3f64..1.5),
    ) {
        let mut p = GreedyParams::new(radius, m, cutoff * PI).with_delta(0.06);
        if let Some(phi0) = first {
            p = p.with_first_angle(phi0);
        }
        prop_assume!(p.validate().is_ok());
        let c = match run_greedy(&p) {
            Ok(c) => c,
            Err(e) => {
                // sector too wide for the cutoff: the violation sits at the corner
                prop_assert!(matches!(e, ksurf::Error::Inconsistent { .. }), "{e}");
                return Ok(());
            }
        };
        let rep = validate_complex(&c);
        prop_assert!(rep.is_valid(), "{:?}", rep.violations.first());
        prop_assert_eq!(c.sectors.len(), 2 * m + 3 * c.branches.len());
        for b in &c.branches {
            prop_assert!(b.location.radius() < radius);
            prop_assert_eq!(b.degree, 6);
        }
        for (_, _, _, a) in c.all_angles() {
            prop_assert!(a.abs() <= p.phi_star + 2.0 * p.delta);
        }
    }
}
