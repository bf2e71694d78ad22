//! Greedy construction of branched hyperbolic Chebyshev nets: Amsler sectors
//! at the centre, rhombus fill clipped to a geodesic disk, and trisecting
//! surgery wherever the asymptotic angle exceeds the cutoff.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{
    AsymptoticComplex, Attaching, Axis, AxisSource, BranchRecord, ComplexParams, Family, RunStatus, SectorGrid,
    SectorKind,
};
use crate::hyperbolic::{complete_rhombus, geodesic_point, recenter, vertex_angle, DiskPoint};
use crate::reference::bessel_i0_inv;
use crate::{Error, Result};

pub const DEFAULT_DELTA: f64 = 0.05;
pub const DEFAULT_MAX_GENERATIONS: usize = 64;

/// Opening angles of the 2m initial sectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SectorLayout {
    /// All sectors open π/m.
    Symmetric,
    /// The first sector opens φ0, the other 2m−1 share the rest equally.
    FirstAngle(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreedyParams {
    pub radius: f64,
    pub m: usize,
    pub phi_star: f64,
    pub delta: f64,
    pub max_generations: usize,
    pub layout: SectorLayout,
}

impl GreedyParams {
    pub fn new(radius: f64, m: usize, phi_star: f64) -> GreedyParams {
        GreedyParams {
            radius,
            m,
            phi_star,
            delta: DEFAULT_DELTA,
            max_generations: DEFAULT_MAX_GENERATIONS,
            layout: SectorLayout::Symmetric,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_first_angle(mut self, phi0: f64) -> Self {
        self.layout = SectorLayout::FirstAngle(phi0);
        self
    }

    pub fn with_max_generations(mut self, cap: usize) -> Self {
        self.max_generations = cap;
        self
    }

    /// Ray directions β_0 < β_1 < … < β_{2m−1}, starting at 0.
    pub fn ray_directions(&self) -> Vec<f64> {
        let n = 2 * self.m;
        match self.layout {
            SectorLayout::Symmetric => (0..n).map(|i| PI * i as f64 / self.m as f64).collect(),
            SectorLayout::FirstAngle(phi0) => {
                let rest = (2.0 * PI - phi0) / (n - 1) as f64;
                (0..n).map(|i| if i == 0 { 0.0 } else { phi0 + rest * (i - 1) as f64 }).collect()
            }
        }
    }

    pub fn sector_angles(&self) -> Vec<f64> {
        let dirs = self.ray_directions();
        let n = dirs.len();
        (0..n).map(|i| if i + 1 < n { dirs[i + 1] - dirs[i] } else { 2.0 * PI - dirs[i] }).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("radius must be positive, got {}", self.radius));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if self.m < 2 {
            return bad(format!("need at least 4 sectors, got {}", 2 * self.m));
        }
        if !(self.phi_star > 0.0 && self.phi_star < PI) {
            return bad(format!("phi_star must lie in (0, π), got {}", self.phi_star));
        }
        if let SectorLayout::FirstAngle(phi0) = self.layout {
            if !(phi0 > 0.0 && phi0 < PI) {
                return bad(format!("phi0 must lie in (0, π), got {phi0}"));
            }
        }
        let widest = self.sector_angles().into_iter().fold(0.0, f64::max);
        if widest >= self.phi_star {
            return bad(format!("sector angle {widest} is not below phi_star {}", self.phi_star));
        }
        Ok(())
    }
}

/// The corner (j*, k*) of the excised block {j > j*, k > k*}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CutLocation {
    pub sector: usize,
    pub j_star: usize,
    pub k_star: usize,
}

/// Samples a geodesic from `base` while the previous sample lies inside the
/// disk of radius `radius`.
pub fn clipped_ray(base: DiskPoint, direction: f64, delta: f64, radius: f64) -> Result<Vec<DiskPoint>> {
    let dir = Complex64::from_polar(1.0, direction);
    let cap = (2.0 * radius / delta).ceil() as usize + 2;
    let mut ray = vec![base];
    while ray.last().unwrap().radius() <= radius && ray.len() <= cap {
        ray.push(geodesic_point(base, dir, delta, ray.len())?);
    }
    Ok(ray)
}

/// Completes every interior vertex by the rhombus rule, in anti-diagonal order.
/// A vertex is kept when one of its back neighbours lies inside the disk.
pub fn fill_sector(grid: &mut SectorGrid, radius: f64) {
    let (nj, nk) = grid.extent();
    let mut inside = vec![false; nj * nk];
    for (j, k, p) in grid.active() {
        inside[j * nk + k] = p.radius() <= radius;
    }
    for s in 2..=(nj + nk).saturating_sub(2) {
        let lo = 1.max(s.saturating_sub(nk - 1));
        let hi = (nj - 1).min(s - 1);
        for j in lo..=hi {
            let k = s - j;
            let (Some(z0), Some(z1), Some(z2)) = (grid.point(j - 1, k - 1), grid.point(j, k - 1), grid.point(j - 1, k))
            else {
                continue;
            };
            if !(inside[(j - 1) * nk + k] || inside[j * nk + k - 1]) {
                continue;
            }
            let c = complete_rhombus(z0, z1, z2);
            grid.set_point(j, k, Some(c.point), c.degenerate);
            inside[j * nk + k] = c.point.radius() <= radius;
        }
    }
    compute_angles(grid);
}

/// Recomputes φ wherever both forward neighbours are active; clears it elsewhere.
pub fn compute_angles(grid: &mut SectorGrid) {
    let (nj, nk) = grid.extent();
    for j in 0..nj {
        for k in 0..nk {
            let a = match (grid.point(j, k), grid.point(j + 1, k), grid.point(j, k + 1)) {
                (Some(z0), Some(z1), Some(z2)) => Some(vertex_angle(z0, z1, z2)),
                _ => None,
            };
            grid.set_angle(j, k, a);
        }
    }
}

/// Finds the cut corner: j* is one less than the smallest j of any vertex with
/// |φ| > φ*, and likewise k*. Fails when that corner is the sector origin.
pub fn find_cut(grid: &SectorGrid, phi_star: f64) -> Result<Option<CutLocation>> {
    let (mut jmin, mut kmin) = (usize::MAX, usize::MAX);
    for (j, k, a) in grid.angles() {
        if a.abs() > phi_star {
            jmin = jmin.min(j);
            kmin = kmin.min(k);
        }
    }
    if jmin == usize::MAX {
        return Ok(None);
    }
    // violation on a boundary ray, or a cut landing on the sector origin
    if jmin == 0 || kmin == 0 || (jmin == 1 && kmin == 1) {
        return Err(Error::Inconsistent { sector: grid.id });
    }
    Ok(Some(CutLocation { sector: grid.id, j_star: jmin - 1, k_star: kmin - 1 }))
}

/// Directions splitting the turn from `w1` to `w2` into three equal parts.
/// The turn is signed, so a clockwise pair is trisected clockwise.
pub fn trisect_angles(w1: Complex64, w2: Complex64) -> Result<(f64, f64)> {
    if w1.norm() == 0.0 || w2.norm() == 0.0 {
        return Err(Error::Degenerate("trisection of a zero edge"));
    }
    let turn = (w2 * w1.conj()).arg();
    if turn.abs() < 1e-9 {
        return Err(Error::Degenerate("trisection of a zero angle"));
    }
    let base = w1.arg();
    Ok((base + turn / 3.0, base + 2.0 * turn / 3.0))
}

fn push_attaching(complex: &mut AsymptoticComplex, att: Attaching) -> usize {
    complex.attachings.push(att);
    complex.attachings.len() - 1
}

fn initial_complex(
    radius: f64,
    delta: f64,
    m: usize,
    phi_star: Option<f64>,
    dirs: &[f64],
) -> Result<AsymptoticComplex> {
    let n = dirs.len();
    let rays = dirs.iter().map(|&b| clipped_ray(DiskPoint::ORIGIN, b, delta, radius)).collect::<Result<Vec<_>>>()?;
    let mut complex = AsymptoticComplex {
        params: ComplexParams { radius, m, delta, phi_star },
        sectors: Vec::with_capacity(n),
        branches: Vec::new(),
        attachings: Vec::new(),
        status: RunStatus::Terminated,
        pruned_cuts: 0,
    };
    for i in 0..n {
        let next = (i + 1) % n;
        let opening = if next == 0 { 2.0 * PI - dirs[i] } else { dirs[next] - dirs[i] };
        let family = if i % 2 == 0 { Family::U } else { Family::V };
        complex.sectors.push(SectorGrid::from_rays(
            i,
            0,
            None,
            SectorKind::Initial,
            family,
            1,
            opening,
            &rays[i],
            &rays[next],
        ));
    }
    for i in 0..n {
        let prev = (i + n - 1) % n;
        let a = push_attaching(
            &mut complex,
            Attaching {
                target: i,
                target_axis: Axis::J,
                source: prev,
                source_start: (0, 0),
                source_axis: Axis::K,
                reflected: false,
            },
        );
        complex.sectors[i].j_source = AxisSource::Attached(a);
    }
    complex.sectors.par_iter_mut().for_each(|s| fill_sector(s, radius));
    Ok(complex)
}

/// The 2m filled initial sectors rooted at the disk centre.
pub fn init_sectors(params: &GreedyParams) -> Result<AsymptoticComplex> {
    params.validate()?;
    initial_complex(params.radius, params.delta, params.m, Some(params.phi_star), &params.ray_directions())
}

/// 2m0 equal Amsler sectors around the centre, without surgery.
pub fn build_periodic_amsler(radius: f64, m0: usize, delta: f64) -> Result<AsymptoticComplex> {
    if m0 < 2 || !(radius > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidParams(format!(
            "periodic Amsler needs m0 >= 2, R > 0, delta > 0 (got {m0}, {radius}, {delta})"
        )));
    }
    let dirs: Vec<f64> = (0..2 * m0).map(|i| PI * i as f64 / m0 as f64).collect();
    initial_complex(radius, delta, m0, None, &dirs)
}

/// One filled Amsler sector with rays at angles 0 and `opening`.
pub fn amsler_sector(radius: f64, opening: f64, delta: f64) -> Result<SectorGrid> {
    if !(opening > 0.0 && opening < PI) || !(radius > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidParams(format!("bad Amsler sector ({radius}, {opening}, {delta})")));
    }
    let j_ray = clipped_ray(DiskPoint::ORIGIN, 0.0, delta, radius)?;
    let k_ray = clipped_ray(DiskPoint::ORIGIN, opening, delta, radius)?;
    let mut grid = SectorGrid::from_rays(0, 0, None, SectorKind::Initial, Family::U, 1, opening, &j_ray, &k_ray);
    fill_sector(&mut grid, radius);
    Ok(grid)
}

fn excise(grid: &mut SectorGrid, j_star: usize, k_star: usize) {
    let (nj, nk) = grid.extent();
    for j in j_star + 1..nj {
        for k in k_star + 1..nk {
            grid.set_point(j, k, None, false);
        }
    }
    compute_angles(grid);
    grid.set_angle(j_star, k_star, None);
}

/// Excises the block beyond `cut`, then creates the three daughter sectors
/// and the branch record, leaving the daughters unfilled. Returns the new
/// branch id, or None when the cut vertex lies outside the disk.
fn spawn_unfilled(complex: &mut AsymptoticComplex, cut: CutLocation) -> Result<Option<usize>> {
    let radius = complex.params.radius;
    let delta = complex.params.delta;
    let parent = &complex.sectors[cut.sector];
    let (js, ks) = (cut.j_star, cut.k_star);
    let missing = || Error::Degenerate("cut corner lacks forward neighbours");
    let z0 = parent.point(js, ks).ok_or_else(missing)?;
    let z1 = parent.point(js + 1, ks).ok_or_else(missing)?;
    let z2 = parent.point(js, ks + 1).ok_or_else(missing)?;
    let phi_parent = vertex_angle(z0, z1, z2).abs();

    let row = parent.ray_from((js, ks), Axis::J);
    let column = parent.ray_from((js, ks), Axis::K);
    let (p_gen, p_orient, p_family, p_opening, p_origin) =
        (parent.generation, parent.orientation, parent.j_family, parent.opening_angle, parent.origin);

    excise(&mut complex.sectors[cut.sector], js, ks);
    if z0.radius() > radius {
        complex.pruned_cuts += 1;
        return Ok(None);
    }

    let (dir_a, dir_b) = trisect_angles(recenter(z1, z0), recenter(z2, z0))?;
    let ray_a = clipped_ray(z0, dir_a, delta, radius)?;
    let ray_b = clipped_ray(z0, dir_b, delta, radius)?;

    let branch = complex.branches.len();
    let generation = p_gen + 1;
    let first = complex.sectors.len();
    let (side1, middle, side3) = (first, first + 1, first + 2);
    let phi_daughter = phi_parent / 3.0;
    let make = |id, kind, orientation, j_ray: &[DiskPoint], k_ray: &[DiskPoint]| {
        SectorGrid::from_rays(id, generation, Some(branch), kind, p_family, orientation, phi_daughter, j_ray, k_ray)
    };
    let mut s1 = make(side1, SectorKind::Side, p_orient, &row, &ray_a);
    let s2 = make(middle, SectorKind::Middle, -p_orient, &ray_b, &ray_a);
    let mut s3 = make(side3, SectorKind::Side, p_orient, &ray_b, &column);

    let direct = |target, target_axis, source, source_start, source_axis| Attaching {
        target,
        target_axis,
        source,
        source_start,
        source_axis,
        reflected: false,
    };
    s1.j_source = AxisSource::Attached(push_attaching(complex, direct(side1, Axis::J, cut.sector, (js, ks), Axis::J)));
    s1.k_source = AxisSource::Attached(push_attaching(complex, direct(side1, Axis::K, middle, (0, 0), Axis::K)));
    s3.j_source = AxisSource::Attached(push_attaching(complex, direct(side3, Axis::J, middle, (0, 0), Axis::J)));
    s3.k_source = AxisSource::Attached(push_attaching(complex, direct(side3, Axis::K, cut.sector, (js, ks), Axis::K)));
    complex.sectors.extend([s1, s2, s3]);

    let phi_star = complex.params.phi_star.unwrap_or(PI);
    let s_n = radius - p_origin.radius();
    let inv = bessel_i0_inv(phi_star / p_opening)?;
    complex.branches.push(BranchRecord {
        id: branch,
        location: z0,
        generation,
        parent_sector: cut.sector,
        daughter_sectors: [side1, middle, side3],
        cut: (js, ks),
        phi_parent,
        phi_daughter,
        phi_sector: p_opening,
        s_n,
        radius: z0.radius(),
        alpha_sq: inv * inv / (4.0 * s_n),
        degree: 6,
    });
    Ok(Some(branch))
}

/// Performs one surgery and fills the daughters.
pub fn spawn_daughters(complex: &mut AsymptoticComplex, cut: CutLocation) -> Result<Option<usize>> {
    let first = complex.sectors.len();
    let branch = spawn_unfilled(complex, cut)?;
    let radius = complex.params.radius;
    complex.sectors[first..].par_iter_mut().for_each(|s| fill_sector(s, radius));
    Ok(branch)
}

/// Runs the greedy cut loop. Sectors are examined in creation order; the
/// daughters of one pass are filled in parallel before the next pass. A
/// result with `RunStatus::NonTerminated` still holds every finished cut.
pub fn run_greedy(params: &GreedyParams) -> Result<AsymptoticComplex> {
    let mut complex = init_sectors(params)?;
    let mut pending: Vec<usize> = (0..complex.sectors.len()).collect();
    while !pending.is_empty() {
        let first_new = complex.sectors.len();
        for &sid in &pending {
            let Some(cut) = find_cut(&complex.sectors[sid], params.phi_star)? else { continue };
            if complex.sectors[sid].generation + 1 > params.max_generations {
                complex.status = RunStatus::NonTerminated;
                continue;
            }
            spawn_unfilled(&mut complex, cut)?;
        }
        let radius = params.radius;
        complex.sectors[first_new..].par_iter_mut().for_each(|s| fill_sector(s, radius));
        pending = (first_new..complex.sectors.len()).collect();
    }
    Ok(complex)
}
