//! Gauss map and surface: the spherical Chebyshev net of unit normals over the
//! complex, and the discrete Lelieuvre integration r_b = r_a ± N_b × N_a.

use nalgebra::{Rotation3, Unit, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{AsymptoticComplex, Axis, Family, SectorGrid, SectorKind};
use crate::hyperbolic::{detect_reversal, recenter, Star};
use crate::topology::{Topology, VertexId};
use crate::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// A point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    pub const E3: UnitVec3 = UnitVec3(Vector3::new(0.0, 0.0, 1.0));

    /// Normalises `v`.
    pub fn new(v: Vec3) -> Result<UnitVec3> {
        let n = v.norm();
        if n > 0.0 && n.is_finite() {
            Ok(UnitVec3(v / n))
        } else {
            Err(Error::Degenerate("zero vector has no direction"))
        }
    }

    pub fn from_xyz(x: f64, y: f64, z: f64) -> Result<UnitVec3> {
        UnitVec3::new(Vector3::new(x, y, z))
    }

    pub fn get(self) -> Vec3 {
        self.0
    }
}

#[inline]
fn householder(n0: &Vec3, n1: &Vec3, n2: &Vec3) -> Option<Vec3> {
    let s = n1 + n2;
    let ss = s.norm_squared();
    if ss < 1e-18 {
        return None;
    }
    Some(s * (2.0 * s.dot(n0) / ss) - n0)
}

/// Fourth normal of a spherical rhombus: the reflection of `n0` across the
/// line through `n1 + n2`.
pub fn complete_normal(n0: UnitVec3, n1: UnitVec3, n2: UnitVec3) -> Result<UnitVec3> {
    householder(&n0.0, &n1.0, &n2.0).map(UnitVec3).ok_or(Error::Degenerate("antipodal normals in rhombus completion"))
}

/// Unit normals aligned with the complex's sector grids.
#[derive(Debug, Clone)]
pub struct SphericalNet {
    pub delta: f64,
    extents: Vec<(usize, usize)>,
    normals: Vec<Vec<Option<Vec3>>>,
    degenerate: Vec<Vec<bool>>,
}

impl SphericalNet {
    fn empty(complex: &AsymptoticComplex) -> SphericalNet {
        let extents: Vec<_> = complex.sectors.iter().map(|s| s.extent()).collect();
        SphericalNet {
            delta: complex.delta(),
            normals: extents.iter().map(|&(a, b)| vec![None; a * b]).collect(),
            degenerate: extents.iter().map(|&(a, b)| vec![false; a * b]).collect(),
            extents,
        }
    }

    pub fn normal(&self, sector: usize, j: usize, k: usize) -> Option<Vec3> {
        let (nj, nk) = self.extents[sector];
        if j >= nj || k >= nk {
            return None;
        }
        self.normals[sector][j * nk + k]
    }

    /// Overwrites one stored normal.
    pub fn set_normal(&mut self, sector: usize, j: usize, k: usize, n: Vec3) {
        let nk = self.extents[sector].1;
        self.normals[sector][j * nk + k] = Some(n);
    }

    pub fn is_degenerate(&self, sector: usize, j: usize, k: usize) -> bool {
        let (nj, nk) = self.extents[sector];
        j < nj && k < nk && self.degenerate[sector][j * nk + k]
    }

    pub fn degenerate_count(&self) -> usize {
        self.degenerate.iter().flatten().filter(|&&d| d).count()
    }

    fn set_axis(&mut self, sector: usize, axis: Axis, values: &[Vec3]) {
        let (nj, nk) = self.extents[sector];
        let (dj, dk) = axis.step();
        for (t, v) in values.iter().enumerate() {
            let (j, k) = (t * dj, t * dk);
            if j < nj && k < nk {
                self.normals[sector][j * nk + k] = Some(*v);
            }
        }
    }

    fn ray(&self, sector: usize, start: (usize, usize), axis: Axis) -> Vec<Vec3> {
        let (dj, dk) = axis.step();
        (0..).map_while(|t| self.normal(sector, start.0 + t * dj, start.1 + t * dk)).collect()
    }
}

/// Normals along an asymptotic line leaving `n0` with surface direction `e`.
fn ray_normals(n0: Vec3, e: Vec3, family: Family, delta: f64, len: usize) -> Vec<Vec3> {
    let binormal = n0.cross(&e) * family.lelieuvre_sign();
    (0..len)
        .map(|t| {
            if t == 0 {
                n0
            } else {
                let a = t as f64 * delta;
                n0 * a.cos() + binormal * a.sin()
            }
        })
        .collect()
}

fn fill_normals(grid: &SectorGrid, normals: &mut [Option<Vec3>], degenerate: &mut [bool]) {
    let (nj, nk) = grid.extent();
    for s in 2..=(nj + nk).saturating_sub(2) {
        let lo = 1.max(s.saturating_sub(nk - 1));
        let hi = (nj - 1).min(s - 1);
        for j in lo..=hi {
            let k = s - j;
            if !grid.is_active(j, k) {
                continue;
            }
            let at = |j: usize, k: usize| j * nk + k;
            let (Some(n0), Some(n1), Some(n2)) =
                (normals[at(j - 1, k - 1)], normals[at(j, k - 1)], normals[at(j - 1, k)])
            else {
                continue;
            };
            match householder(&n0, &n1, &n2) {
                Some(n) => normals[at(j, k)] = Some(n),
                None => {
                    normals[at(j, k)] = Some(n0);
                    degenerate[at(j, k)] = true;
                }
            }
        }
    }
}

fn axis_len(grid: &SectorGrid, axis: Axis) -> usize {
    grid.axis(axis).len()
}

/// Spherical net with base normal e3 and the first ray along e1.
pub fn build_spherical_net(complex: &AsymptoticComplex) -> Result<SphericalNet> {
    build_spherical_net_in_frame(complex, &Rotation3::identity())
}

/// Spherical net whose boundary data is rotated by `frame`.
pub fn build_spherical_net_in_frame(complex: &AsymptoticComplex, frame: &Rotation3<f64>) -> Result<SphericalNet> {
    let mut net = SphericalNet::empty(complex);
    let delta = complex.delta();
    let base = frame * Vector3::z();
    let initial: Vec<usize> = complex.sectors.iter().filter(|s| s.kind == SectorKind::Initial).map(|s| s.id).collect();
    let n = initial.len();
    for &i in &initial {
        let s = &complex.sectors[i];
        let len = axis_len(s, Axis::J);
        let normals = match s.point(1, 0) {
            Some(p) => {
                let beta = recenter(p, s.origin).arg();
                let e = frame * Vector3::new(beta.cos(), beta.sin(), 0.0);
                ray_normals(base, e, s.j_family, delta, len)
            }
            None => vec![base],
        };
        net.set_axis(i, Axis::J, &normals);
        net.set_axis((i + n - 1) % n, Axis::K, &normals);
    }

    let max_gen = complex.sectors.iter().map(|s| s.generation).max().unwrap_or(0);
    for gen in 0..=max_gen {
        for b in complex.branches.iter().filter(|b| b.generation == gen) {
            let parent = &complex.sectors[b.parent_sector];
            let (js, ks) = b.cut;
            let get = |j, k| net.normal(b.parent_sector, j, k).ok_or(Error::Degenerate("branch normal missing"));
            let (n0, n1, n2) = (get(js, ks)?, get(js + 1, ks)?, get(js, ks + 1)?);
            let fj = parent.j_family;
            let fk = fj.other();
            let e1 = (n1.cross(&n0) * fj.lelieuvre_sign()).normalize();
            let e2 = (n2.cross(&n0) * fk.lelieuvre_sign()).normalize();
            let turn = n0.dot(&e1.cross(&e2)).atan2(e1.dot(&e2));
            let axis = Unit::new_normalize(n0);
            let e_a = Rotation3::from_axis_angle(&axis, turn / 3.0) * e1;
            let e_b = Rotation3::from_axis_angle(&axis, 2.0 * turn / 3.0) * e1;
            let [d1, d2, d3] = b.daughter_sectors;
            let mid = &complex.sectors[d2];
            let ray_a = ray_normals(n0, e_a, fk, delta, axis_len(mid, Axis::K));
            let ray_b = ray_normals(n0, e_b, fj, delta, axis_len(mid, Axis::J));
            let row = net.ray(b.parent_sector, (js, ks), Axis::J);
            let column = net.ray(b.parent_sector, (js, ks), Axis::K);
            net.set_axis(d1, Axis::J, &row);
            net.set_axis(d1, Axis::K, &ray_a);
            net.set_axis(d2, Axis::J, &ray_b);
            net.set_axis(d2, Axis::K, &ray_a);
            net.set_axis(d3, Axis::J, &ray_b);
            net.set_axis(d3, Axis::K, &column);
        }
        let ids: Vec<usize> = complex.sectors.iter().filter(|s| s.generation == gen).map(|s| s.id).collect();
        let (lo, hi) = match (ids.first(), ids.last()) {
            (Some(&a), Some(&b)) => (a, b + 1),
            _ => continue,
        };
        debug_assert_eq!(hi - lo, ids.len(), "sector ids are grouped by generation");
        net.normals[lo..hi]
            .par_iter_mut()
            .zip(net.degenerate[lo..hi].par_iter_mut())
            .zip(complex.sectors[lo..hi].par_iter())
            .for_each(|((normals, degenerate), grid)| fill_normals(grid, normals, degenerate));
    }
    Ok(net)
}

/// A discrete K-surface: one position and normal per global vertex.
#[derive(Debug, Clone, Serialize)]
pub struct KSurface {
    pub delta: f64,
    pub positions: Vec<[f64; 3]>,
    pub normals: Vec<[f64; 3]>,
    /// Quads as counter-clockwise global vertex ids.
    pub faces: Vec<[VertexId; 4]>,
    /// Asymptotic angle at the first sector copy where it is defined.
    pub phi: Vec<Option<f64>>,
    /// Largest principal curvature over all sector copies.
    pub kappa_max: Vec<Option<f64>>,
    pub sector: Vec<usize>,
    pub generation: Vec<usize>,
}

impl KSurface {
    pub fn position(&self, v: VertexId) -> Vec3 {
        Vector3::from(self.positions[v as usize])
    }

    pub fn normal(&self, v: VertexId) -> Vec3 {
        Vector3::from(self.normals[v as usize])
    }
}

fn kappa_of(phi: f64) -> f64 {
    let h = phi.abs() / 2.0;
    h.tan().max(1.0 / h.tan())
}

/// Integrates positions sector by sector, row-major, from `origin`.
pub fn integrate_lelieuvre(complex: &AsymptoticComplex, net: &SphericalNet, topo: &Topology, origin: Vec3) -> KSurface {
    let nv = topo.vertex_count();
    let mut pos: Vec<Option<Vec3>> = vec![None; nv];
    let mut normals = vec![[0.0; 3]; nv];
    for v in 0..nv as VertexId {
        let (s, j, k) = topo.owner(v);
        let n = net.normal(s, j, k).expect("every active vertex has a normal");
        normals[v as usize] = [n.x, n.y, n.z];
    }
    for s in &complex.sectors {
        let fj = s.j_family;
        for (j, k, _) in s.active() {
            let v = topo.vertex_at(s.id, j, k).unwrap() as usize;
            if pos[v].is_some() {
                continue;
            }
            let nb = net.normal(s.id, j, k).unwrap();
            let step = |from: (usize, usize), family: Family| {
                let a = topo.vertex_at(s.id, from.0, from.1).unwrap() as usize;
                let na = net.normal(s.id, from.0, from.1).unwrap();
                pos[a].map(|ra| ra + nb.cross(&na) * family.lelieuvre_sign())
            };
            let r = if j > 0 {
                step((j - 1, k), fj)
            } else if k > 0 {
                step((j, k - 1), fj.other())
            } else {
                Some(origin)
            };
            pos[v] = Some(r.expect("back neighbour positioned before its successor"));
        }
    }

    let mut phi = vec![None; nv];
    let mut kappa_max: Vec<Option<f64>> = vec![None; nv];
    for (sid, j, k, a) in complex.all_angles() {
        let v = topo.vertex_at(sid, j, k).unwrap() as usize;
        phi[v].get_or_insert(a);
        let kap = kappa_of(a);
        kappa_max[v] = Some(kappa_max[v].map_or(kap, |x: f64| x.max(kap)));
    }
    let sector = (0..nv as VertexId).map(|v| topo.owner(v).0).collect::<Vec<_>>();
    KSurface {
        delta: complex.delta(),
        positions: pos.into_iter().map(|p| p.unwrap().into()).collect(),
        normals,
        faces: topo.faces().iter().map(|f| f.ccw_corners()).collect(),
        phi,
        kappa_max,
        generation: sector.iter().map(|&s| complex.sectors[s].generation).collect(),
        sector,
    }
}

/// Lelieuvre closure defect of every quad, |(0→1→12) − (0→2→12)|, from the
/// normals alone.
pub fn closure_residuals(complex: &AsymptoticComplex, net: &SphericalNet) -> Vec<f64> {
    let mut out = Vec::new();
    for s in &complex.sectors {
        let (sj, sk) = (s.j_family.lelieuvre_sign(), s.j_family.other().lelieuvre_sign());
        for (j, k) in s.quads() {
            let n = |a, b| net.normal(s.id, a, b).unwrap();
            let (n0, n1, n12, n2) = (n(j, k), n(j + 1, k), n(j + 1, k + 1), n(j, k + 1));
            let via1 = n1.cross(&n0) * sj + n12.cross(&n1) * sk;
            let via2 = n2.cross(&n0) * sk + n12.cross(&n2) * sj;
            out.push((via1 - via2).norm());
        }
    }
    out
}

/// Signed angle about `axis` from `a` to `b`, after projecting both onto the
/// plane normal to `axis`.
pub fn signed_angle_about(axis: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let pa = a - axis * axis.dot(a);
    let pb = b - axis * axis.dot(b);
    axis.dot(&pa.cross(&pb)).atan2(pa.dot(&pb))
}

/// Sum over the faces at `v` of the signed angle of the normal image,
/// swept counter-clockwise; 2π(1 − m) at a vertex of degree 2m.
pub fn gauss_angle_sum(topo: &Topology, surface: &KSurface, v: VertexId) -> f64 {
    let nv = surface.normal(v);
    topo.wedges(v)
        .iter()
        .map(|&(_, next, prev)| signed_angle_about(&nv, &surface.normal(next), &surface.normal(prev)))
        .sum()
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct EmbeddingReport {
    /// max |⟨N_a, N_b⟩ − cos δ| over edges
    pub max_chebyshev_error: f64,
    /// max |‖r_b − r_a‖ − sin δ|
    pub max_edge_length_error: f64,
    /// max |(r_b − r_a)·N_a|
    pub max_planarity_error: f64,
    /// max |r_b − r_a ∓ N_b × N_a|, including edges off the integration tree
    pub max_edge_residual: f64,
    pub max_closure_residual: f64,
    /// max | embedded angle − |φ| | at vertices carrying an angle
    pub max_angle_discrepancy: f64,
    /// worst planarity vertex as (sector, j, k)
    pub worst_planarity: Option<(usize, usize, usize)>,
    pub n_reversals: usize,
    pub n_degenerate_normals: usize,
}

impl EmbeddingReport {
    pub fn passes(&self, tol: f64, angle_tol: f64) -> bool {
        self.max_chebyshev_error <= tol
            && self.max_edge_length_error <= tol
            && self.max_planarity_error <= tol
            && self.max_edge_residual <= tol
            && self.max_closure_residual <= tol
            && self.max_angle_discrepancy <= angle_tol
    }
}

pub fn validate_embedding(
    complex: &AsymptoticComplex,
    net: &SphericalNet,
    topo: &Topology,
    surface: &KSurface,
) -> EmbeddingReport {
    let mut rep = EmbeddingReport::default();
    let (cos_d, sin_d) = (net.delta.cos(), net.delta.sin());
    let mut worst_plan = (0.0, 0);
    for a in 0..topo.vertex_count() as VertexId {
        let (ra, na) = (surface.position(a), surface.normal(a));
        for nb in topo.neighbors(a) {
            let (rb, nbv) = (surface.position(nb.vertex), surface.normal(nb.vertex));
            let edge = rb - ra;
            let plan = edge.dot(&na).abs();
            if plan > worst_plan.0 {
                worst_plan = (plan, a);
            }
            if a < nb.vertex {
                rep.max_chebyshev_error = rep.max_chebyshev_error.max((na.dot(&nbv) - cos_d).abs());
                rep.max_edge_length_error = rep.max_edge_length_error.max((edge.norm() - sin_d).abs());
                let expect = nbv.cross(&na) * nb.family.lelieuvre_sign();
                rep.max_edge_residual = rep.max_edge_residual.max((edge - expect).norm());
            }
        }
    }
    rep.max_planarity_error = worst_plan.0;
    rep.worst_planarity = (worst_plan.0 > 0.0).then(|| topo.owner(worst_plan.1));
    rep.max_closure_residual = closure_residuals(complex, net).into_iter().fold(0.0, f64::max);

    for s in &complex.sectors {
        for (j, k, phi) in s.angles() {
            let v = |a, b| surface.position(topo.vertex_at(s.id, a, b).unwrap());
            let (r0, r1, r2) = (v(j, k), v(j + 1, k), v(j, k + 1));
            let embedded = (r1 - r0).angle(&(r2 - r0));
            rep.max_angle_discrepancy = rep.max_angle_discrepancy.max((embedded - phi.abs()).abs());
        }
        let (nj, nk) = s.extent();
        for j in 1..nj.saturating_sub(1) {
            for k in 1..nk.saturating_sub(1) {
                let p = |a, b| s.point(a, b);
                if let (Some(c), Some(e), Some(n), Some(w), Some(so)) =
                    (p(j, k), p(j + 1, k), p(j, k + 1), p(j - 1, k), p(j, k - 1))
                {
                    if detect_reversal(c, &Star { east: e, north: n, west: w, south: so }) {
                        rep.n_reversals += 1;
                    }
                }
            }
        }
    }
    rep.n_degenerate_normals = net.degenerate_count();
    rep
}
