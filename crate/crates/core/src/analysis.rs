//! Bending energies, singular-edge proximity, the branched Hazzidakis
//! identity on lattice loops, and frontier records of the branch tree.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::PI;

use serde::Serialize;

use crate::complex::{cut_depth, AsymptoticComplex, Family, RunStatus, SectorGrid};
use crate::hyperbolic::recenter;
use crate::netgen::amsler_sector;
use crate::topology::{Topology, VertexId};
use crate::{Error, Result};

const SINGULAR_GUARD: f64 = 1e-9;

fn check_regular(phi: f64) -> Result<f64> {
    let a = phi.abs();
    if a <= SINGULAR_GUARD || a >= PI - SINGULAR_GUARD {
        return Err(Error::Singular(phi));
    }
    Ok(a)
}

/// (tan(|φ|/2), −cot(|φ|/2)).
pub fn principal_curvatures(phi: f64) -> Result<(f64, f64)> {
    let h = check_regular(phi)? / 2.0;
    Ok((h.tan(), -1.0 / h.tan()))
}

/// max(|κ1|, |κ2|) at angle φ.
pub fn max_curvature(phi: f64) -> Result<f64> {
    let (k1, k2) = principal_curvatures(phi)?;
    Ok(k1.max(-k2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyMax {
    /// Largest principal curvature over all vertices carrying an angle.
    pub e_inf: f64,
    /// max(cot(φ_min/2), tan(φ*/2)) over sector opening angles.
    pub branch_formula: f64,
}

pub fn energy_max(complex: &AsymptoticComplex) -> Result<EnergyMax> {
    let mut e_inf: f64 = 0.0;
    for (_, _, _, a) in complex.all_angles() {
        e_inf = e_inf.max(max_curvature(a)?);
    }
    let min_opening = complex.sectors.iter().map(|s| s.opening_angle).fold(PI, f64::min);
    let mut branch_formula = 1.0 / (min_opening / 2.0).tan();
    if let Some(ps) = complex.params.phi_star {
        branch_formula = branch_formula.max((ps / 2.0).tan());
    }
    Ok(EnergyMax { e_inf, branch_formula })
}

/// Mean |φ| over the quad's corners that carry an angle.
pub fn quad_mean_angle(grid: &SectorGrid, j: usize, k: usize) -> Option<f64> {
    let corners = [(j, k), (j + 1, k), (j + 1, k + 1), (j, k + 1)];
    let (sum, n) =
        corners.iter().filter_map(|&(a, b)| grid.angle(a, b)).fold((0.0, 0usize), |(s, n), a| (s + a.abs(), n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn quad_willmore(grid: &SectorGrid, j: usize, k: usize, d2: f64) -> Result<f64> {
    let Some(phi) = quad_mean_angle(grid, j, k) else { return Ok(0.0) };
    let (k1, k2) = principal_curvatures(phi)?;
    Ok((k1 * k1 + k2 * k2) * phi.sin() * d2)
}

/// Σ over quads of (tan² + cot²)(φ̄/2)·sin φ̄·Δ².
pub fn energy_willmore(complex: &AsymptoticComplex) -> Result<f64> {
    let d2 = complex.delta().powi(2);
    let mut total = 0.0;
    for s in &complex.sectors {
        for (j, k) in s.quads() {
            total += quad_willmore(s, j, k, d2)?;
        }
    }
    Ok(total)
}

/// Willmore energy of a subset of the topology's faces.
pub fn energy_willmore_faces(complex: &AsymptoticComplex, topo: &Topology, faces: &[usize]) -> Result<f64> {
    let d2 = complex.delta().powi(2);
    let mut total = 0.0;
    for &f in faces {
        let face = topo.face(f);
        total += quad_willmore(&complex.sectors[face.sector], face.j, face.k, d2)?;
    }
    Ok(total)
}

/// Σ over quads of sin φ̄·Δ².
pub fn net_area(complex: &AsymptoticComplex) -> f64 {
    let d2 = complex.delta().powi(2);
    complex
        .sectors
        .iter()
        .flat_map(|s| s.quads().filter_map(move |(j, k)| quad_mean_angle(s, j, k)))
        .map(|phi| phi.sin() * d2)
        .sum()
}

/// min over vertices of min(|φ|, π − |φ|).
pub fn singular_proximity(complex: &AsymptoticComplex) -> f64 {
    complex.all_angles().map(|(_, _, _, a)| a.abs().min(PI - a.abs())).fold(PI / 2.0, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeKind {
    AmslerDiagonal,
    PseudoAmsler,
}

impl NodeKind {
    pub fn label(self) -> &'static str {
        match self {
            NodeKind::AmslerDiagonal => "amsler",
            NodeKind::PseudoAmsler => "pseudo_amsler",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierRecord {
    pub generation: usize,
    pub node_kind: NodeKind,
    pub phi_n: f64,
    pub ratio: f64,
    pub alpha_sq: f64,
    pub s_n: f64,
    pub branch_radius: f64,
}

pub fn frontier_records(complex: &AsymptoticComplex) -> Vec<FrontierRecord> {
    complex
        .branches
        .iter()
        .map(|b| FrontierRecord {
            generation: b.generation,
            node_kind: if complex.sectors[b.parent_sector].kind.is_amsler() {
                NodeKind::AmslerDiagonal
            } else {
                NodeKind::PseudoAmsler
            },
            phi_n: b.phi_sector,
            ratio: b.phi_daughter / b.phi_sector,
            alpha_sq: b.alpha_sq,
            s_n: b.s_n,
            branch_radius: b.radius,
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub e_inf: f64,
    pub e_inf_branch_formula: f64,
    pub e_willmore: f64,
    pub area: f64,
    pub min_phi: f64,
    pub max_phi: f64,
    pub singular_proximity: f64,
    pub n_vertices: usize,
    pub n_quads: usize,
    pub n_branches: usize,
    pub cut_depth: usize,
    pub pruned_cuts: usize,
    pub status: RunStatus,
    /// Smallest daughter opening angle per branch generation.
    pub min_branch_angle: BTreeMap<usize, f64>,
}

pub fn energy_report(complex: &AsymptoticComplex, topo: &Topology) -> Result<EnergyReport> {
    let em = energy_max(complex)?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (_, _, _, a) in complex.all_angles() {
        lo = lo.min(a.abs());
        hi = hi.max(a.abs());
    }
    let mut min_branch_angle = BTreeMap::new();
    for b in &complex.branches {
        let e = min_branch_angle.entry(b.generation).or_insert(f64::INFINITY);
        *e = f64::min(*e, b.phi_daughter);
    }
    Ok(EnergyReport {
        e_inf: em.e_inf,
        e_inf_branch_formula: em.branch_formula,
        e_willmore: energy_willmore(complex)?,
        area: net_area(complex),
        min_phi: lo,
        max_phi: hi,
        singular_proximity: singular_proximity(complex),
        n_vertices: topo.vertex_count(),
        n_quads: topo.faces().len(),
        n_branches: complex.branches.len(),
        cut_depth: cut_depth(complex),
        pruned_cuts: complex.pruned_cuts,
        status: complex.status,
        min_branch_angle,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicAmsler {
    /// Smallest order whose sectors stay clear of the singular edge.
    pub m0_min: usize,
    /// Order with the least E∞.
    pub m0_best: usize,
    pub e_inf: f64,
}

fn sector_energy(radius: f64, m0: usize, delta: f64) -> Result<Option<f64>> {
    let g = amsler_sector(radius, PI / m0 as f64, delta)?;
    let mut e: f64 = 0.0;
    for (_, _, a) in g.angles() {
        if !(a > SINGULAR_GUARD && a < PI - SINGULAR_GUARD) {
            return Ok(None);
        }
        e = e.max(max_curvature(a)?);
    }
    Ok(Some(e))
}

/// E∞ of the best 2m0-sector periodic Amsler surface covering the disk. All
/// sectors are congruent, so one sector of opening π/m0 is evaluated.
pub fn periodic_amsler_energy(radius: f64, delta: f64) -> Result<PeriodicAmsler> {
    const CAP: usize = 1 << 22;
    let mut hi = 2;
    while sector_energy(radius, hi, delta)?.is_none() {
        hi *= 2;
        if hi > CAP {
            return Err(Error::InvalidParams(format!("no admissible periodic Amsler order for R = {radius}")));
        }
    }
    let mut lo = hi / 2;
    if lo >= 2 {
        // lo inadmissible, hi admissible
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if sector_energy(radius, mid, delta)?.is_some() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let m0_min = hi;
    let mut best = (m0_min, sector_energy(radius, m0_min, delta)?.unwrap());
    let mut m = m0_min + 1;
    // cot(π/(2m)) bounds E∞ from below through the opening angle
    while 1.0 / (PI / (2.0 * m as f64)).tan() < best.1 && m <= CAP {
        if let Some(e) = sector_energy(radius, m, delta)? {
            if e < best.1 {
                best = (m, e);
            }
        }
        m += 1;
    }
    Ok(PeriodicAmsler { m0_min, m0_best: best.0, e_inf: best.1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HazzidakisResult {
    /// Alternating corner sum Σ(−1)^n φ(q_n).
    pub delta_gamma: f64,
    /// Σ sin φ̄ Δ² over enclosed quads.
    pub area: f64,
    /// π Σ(m_i − 2) over enclosed vertices of degree 2m_i.
    pub branch_term: f64,
    pub residual: f64,
    pub n_quads: usize,
    pub n_corners: usize,
    pub perimeter: usize,
    pub enclosed_branch_vertices: usize,
}

fn quad_orientation_ok(topo: &Topology, f: usize) -> bool {
    let c = topo.face(f).ccw_corners();
    let base = topo.point(c[0]);
    let w: Vec<_> = c.iter().map(|&v| recenter(topo.point(v), base)).collect();
    let mut area = 0.0;
    for i in 0..4 {
        let (a, b) = (w[i], w[(i + 1) % 4]);
        area += a.re * b.im - a.im * b.re;
    }
    area > 0.0
}

/// Vertices touching a quad whose corners run clockwise in the disk.
pub fn reversal_vertices(topo: &Topology) -> HashSet<VertexId> {
    let mut out = HashSet::new();
    for f in 0..topo.faces().len() {
        if !quad_orientation_ok(topo, f) {
            out.extend(topo.face(f).corners);
        }
    }
    out
}

/// Checks Δ_Γ = A(Γ) − π Σ(m_i − 2) on a closed lattice loop given as its
/// vertex sequence (the closing edge back to the first vertex is implied).
pub fn hazzidakis_check(complex: &AsymptoticComplex, topo: &Topology, path: &[VertexId]) -> Result<HazzidakisResult> {
    let mut lp: Vec<VertexId> = path.to_vec();
    if lp.len() > 1 && lp.first() == lp.last() {
        lp.pop();
    }
    let p = lp.len();
    if p < 4 {
        return Err(Error::OpenLoop);
    }
    let mut families = Vec::with_capacity(p);
    for i in 0..p {
        let (a, b) = (lp[i], lp[(i + 1) % p]);
        let n = topo.neighbor(a, b).ok_or(Error::NotAnEdge(i))?;
        families.push(n.family);
    }
    let mut shoelace = 0.0;
    for i in 0..p {
        let (a, b) = (topo.point(lp[i]).value(), topo.point(lp[(i + 1) % p]).value());
        shoelace += a.re * b.im - a.im * b.re;
    }
    let reversed = reversal_vertices(topo);
    // corner turning is measured along the counter-clockwise traversal
    let clockwise = shoelace <= 0.0;
    let mut delta_gamma = 0.0;
    let mut corners = 0;
    for i in 0..p {
        let v = lp[i];
        if reversed.contains(&v) {
            return Err(Error::ReversalOnLoop(i));
        }
        let (prev, next) = (lp[(i + p - 1) % p], lp[(i + 1) % p]);
        let (f_in, f_out) = (families[(i + p - 1) % p], families[i]);
        if f_in == f_out {
            if prev == next || topo.degree(v) > 4 {
                return Err(Error::MixedRun(i));
            }
            continue;
        }
        corners += 1;
        let (prev, next, f_out) = if clockwise { (next, prev, f_in) } else { (prev, next, f_out) };
        let (u_end, v_end) = if f_out == Family::U { (next, prev) } else { (prev, next) };
        let c = topo.point(v);
        let (wu, wv) = (recenter(topo.point(u_end), c), recenter(topo.point(v_end), c));
        let phi = (wv.arg() - wu.arg()).rem_euclid(PI);
        delta_gamma += if f_out == Family::U { phi } else { -phi };
    }
    if corners == 0 {
        return Err(Error::MixedRun(0));
    }

    // enclosed quads: flood fill from the quad left of the first edge of the
    // counter-clockwise traversal, never crossing a loop edge
    let (a0, b0) = if shoelace > 0.0 { (lp[0], lp[1]) } else { (lp[1], lp[0]) };
    let key = |a: VertexId, b: VertexId| (a.min(b), a.max(b));
    let loop_edges: HashSet<_> = (0..p).map(|i| key(lp[i], lp[(i + 1) % p])).collect();
    let start = topo
        .neighbor(a0, b0)
        .unwrap()
        .faces()
        .iter()
        .map(|&f| f as usize)
        .find(|&f| {
            let c = topo.face(f).ccw_corners();
            (0..4).any(|i| c[i] == a0 && c[(i + 1) % 4] == b0)
        })
        .ok_or(Error::OpenLoop)?;
    let mut inside = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(f) = stack.pop() {
        let c = topo.face(f).corners;
        for i in 0..4 {
            let (a, b) = (c[i], c[(i + 1) % 4]);
            if loop_edges.contains(&key(a, b)) {
                continue;
            }
            let n = topo.neighbor(a, b).unwrap();
            if n.face_count() < 2 {
                // escaped through the mesh boundary: the loop does not enclose
                return Err(Error::OpenLoop);
            }
            for &g in n.faces() {
                if inside.insert(g as usize) {
                    stack.push(g as usize);
                }
            }
        }
    }

    let d2 = complex.delta().powi(2);
    let mut area = 0.0;
    let mut verts = HashSet::new();
    // fixed summation order keeps the result reproducible
    let mut inside: Vec<usize> = inside.into_iter().collect();
    inside.sort_unstable();
    for &f in &inside {
        let face = topo.face(f);
        let grid = &complex.sectors[face.sector];
        let phi = quad_mean_angle(grid, face.j, face.k).ok_or(Error::Degenerate("quad without angles"))?;
        area += phi.sin() * d2;
        verts.extend(face.corners);
    }
    let on_loop: HashSet<_> = lp.iter().copied().collect();
    let mut branch_term = 0.0;
    let mut enclosed_branch_vertices = 0;
    for v in verts.into_iter().filter(|v| !on_loop.contains(v)) {
        let m = topo.degree(v) / 2;
        if m != 2 {
            enclosed_branch_vertices += 1;
            branch_term += PI * (m as f64 - 2.0);
        }
    }
    Ok(HazzidakisResult {
        delta_gamma,
        area,
        branch_term,
        residual: (delta_gamma - area + branch_term).abs(),
        n_quads: inside.len(),
        n_corners: corners,
        perimeter: p,
        enclosed_branch_vertices,
    })
}

/// Boundary of a simply connected set of faces, as a counter-clockwise
/// vertex cycle.
pub fn boundary_loop(topo: &Topology, faces: &[usize]) -> Result<Vec<VertexId>> {
    let set: HashSet<usize> = faces.iter().copied().collect();
    let mut next = std::collections::HashMap::new();
    for &f in faces {
        let c = topo.face(f).ccw_corners();
        for i in 0..4 {
            let (a, b) = (c[i], c[(i + 1) % 4]);
            let n = topo.neighbor(a, b).ok_or(Error::NotAnEdge(i))?;
            let shared = n.faces().iter().filter(|&&g| set.contains(&(g as usize))).count();
            if shared == 1 && next.insert(a, b).is_some() {
                return Err(Error::Degenerate("face set boundary is not a simple cycle"));
            }
        }
    }
    let &start = next.keys().min().ok_or(Error::OpenLoop)?;
    let mut out = vec![start];
    let mut v = start;
    loop {
        v = *next.get(&v).ok_or(Error::OpenLoop)?;
        if v == start {
            break;
        }
        out.push(v);
        if out.len() > next.len() {
            return Err(Error::OpenLoop);
        }
    }
    if out.len() != next.len() {
        return Err(Error::Degenerate("face set boundary has several components"));
    }
    Ok(out)
}

/// Faces of the rectangle [j0, j1) × [k0, k1) of quads in one sector.
pub fn rectangle_faces(
    topo: &Topology,
    sector: usize,
    j0: usize,
    k0: usize,
    j1: usize,
    k1: usize,
) -> Option<Vec<usize>> {
    let index: std::collections::HashMap<(usize, usize, usize), usize> = topo
        .faces()
        .iter()
        .enumerate()
        .filter(|(_, f)| f.sector == sector)
        .map(|(i, f)| ((f.sector, f.j, f.k), i))
        .collect();
    let mut out = Vec::new();
    for j in j0..j1 {
        for k in k0..k1 {
            out.push(*index.get(&(sector, j, k))?);
        }
    }
    Some(out)
}

/// The 2m-sided star of quads within `r` steps of a branch vertex: three
/// quadrants of the parent sector and the corner blocks of the three daughters.
pub fn branch_star_faces(complex: &AsymptoticComplex, topo: &Topology, branch: usize, r: usize) -> Option<Vec<usize>> {
    let b = complex.branches.get(branch)?;
    let (js, ks) = b.cut;
    if r == 0 || js < r || ks < r {
        return None;
    }
    let mut out = Vec::new();
    out.extend(rectangle_faces(topo, b.parent_sector, js - r, ks - r, js, ks)?);
    out.extend(rectangle_faces(topo, b.parent_sector, js, ks - r, js + r, ks)?);
    out.extend(rectangle_faces(topo, b.parent_sector, js - r, ks, js, ks + r)?);
    for d in b.daughter_sectors {
        out.extend(rectangle_faces(topo, d, 0, 0, r, r)?);
    }
    Some(out)
}
