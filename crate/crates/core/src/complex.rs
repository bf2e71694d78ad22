//! The asymptotic complex: per-sector grids, seam attachings, the branch tree
//! and its combinatorial validation.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::hyperbolic::{hyp_distance, DiskPoint};
use crate::topology::{Topology, VertexId};
use crate::{Error, Result};

/// The two families of asymptotic lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    U,
    V,
}

impl Family {
    pub fn other(self) -> Family {
        match self {
            Family::U => Family::V,
            Family::V => Family::U,
        }
    }

    /// Sign in the discrete Lelieuvre step r_b = r_a ± N_b × N_a.
    pub fn lelieuvre_sign(self) -> f64 {
        match self {
            Family::U => 1.0,
            Family::V => -1.0,
        }
    }
}

/// Grid direction inside a sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Axis {
    /// increasing j, the row (t, 0)
    J,
    /// increasing k, the column (0, t)
    K,
}

impl Axis {
    pub fn step(self) -> (usize, usize) {
        match self {
            Axis::J => (1, 0),
            Axis::K => (0, 1),
        }
    }
}

/// How a sector came about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SectorKind {
    /// One of the 2m sectors at the disk centre.
    Initial,
    /// The middle daughter of a cut: both rays are fresh geodesics.
    Middle,
    /// An outer daughter of a cut: one ray is copied from the parent.
    Side,
}

impl SectorKind {
    /// Both boundary rays are geodesics.
    pub fn is_amsler(self) -> bool {
        matches!(self, SectorKind::Initial | SectorKind::Middle)
    }
}

/// Where a sector's boundary ray came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AxisSource {
    /// Freshly sampled geodesic.
    Geodesic,
    /// Copied from another sector; index into `AsymptoticComplex::attachings`.
    Attached(usize),
}

/// `target`'s axis at parameter t equals `source`'s vertex `source_start + t·source_axis`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Attaching {
    pub target: usize,
    pub target_axis: Axis,
    pub source: usize,
    pub source_start: (usize, usize),
    pub source_axis: Axis,
    /// Coordinate-reversing attaching; never produced by the generator.
    pub reflected: bool,
}

/// One sector Ω_n: a rectangular grid (j, k) of net vertices.
#[derive(Debug, Clone, Serialize)]
pub struct SectorGrid {
    pub id: usize,
    pub origin: DiskPoint,
    pub generation: usize,
    pub parent_branch: Option<usize>,
    pub kind: SectorKind,
    /// Family of the j-direction edges.
    pub j_family: Family,
    /// +1 when the k-ray lies counter-clockwise of the j-ray.
    pub orientation: i8,
    /// Angle between the boundary rays at the origin, as constructed.
    pub opening_angle: f64,
    pub j_source: AxisSource,
    pub k_source: AxisSource,
    nj: usize,
    nk: usize,
    points: Vec<Option<DiskPoint>>,
    angles: Vec<Option<f64>>,
    degenerate: Vec<bool>,
}

impl SectorGrid {
    /// A grid holding only its two boundary rays; `j_ray[0]` and `k_ray[0]`
    /// must both be the origin.
    #[allow(clippy::too_many_arguments)]
    pub fn from_rays(
        id: usize,
        generation: usize,
        parent_branch: Option<usize>,
        kind: SectorKind,
        j_family: Family,
        orientation: i8,
        opening_angle: f64,
        j_ray: &[DiskPoint],
        k_ray: &[DiskPoint],
    ) -> SectorGrid {
        assert!(!j_ray.is_empty() && !k_ray.is_empty());
        assert_eq!(j_ray[0], k_ray[0], "rays must share the sector origin");
        let (nj, nk) = (j_ray.len(), k_ray.len());
        let mut grid = SectorGrid {
            id,
            origin: j_ray[0],
            generation,
            parent_branch,
            kind,
            j_family,
            orientation,
            opening_angle,
            j_source: AxisSource::Geodesic,
            k_source: AxisSource::Geodesic,
            nj,
            nk,
            points: vec![None; nj * nk],
            angles: vec![None; nj * nk],
            degenerate: vec![false; nj * nk],
        };
        for (j, p) in j_ray.iter().enumerate() {
            grid.points[j * nk] = Some(*p);
        }
        for (k, p) in k_ray.iter().enumerate() {
            grid.points[k] = Some(*p);
        }
        grid
    }

    /// Number of indices along j and k.
    pub fn extent(&self) -> (usize, usize) {
        (self.nj, self.nk)
    }

    #[inline]
    pub fn index(&self, j: usize, k: usize) -> Option<usize> {
        (j < self.nj && k < self.nk).then(|| j * self.nk + k)
    }

    #[inline]
    pub fn point(&self, j: usize, k: usize) -> Option<DiskPoint> {
        self.index(j, k).and_then(|i| self.points[i])
    }

    #[inline]
    pub fn is_active(&self, j: usize, k: usize) -> bool {
        self.point(j, k).is_some()
    }

    /// Signed angle from the j-edge to the k-edge at (j, k), where defined.
    #[inline]
    pub fn angle(&self, j: usize, k: usize) -> Option<f64> {
        self.index(j, k).and_then(|i| self.angles[i])
    }

    pub fn is_degenerate(&self, j: usize, k: usize) -> bool {
        self.index(j, k).map(|i| self.degenerate[i]).unwrap_or(false)
    }

    pub(crate) fn set_point(&mut self, j: usize, k: usize, p: Option<DiskPoint>, degenerate: bool) {
        let i = self.index(j, k).expect("index in range");
        self.points[i] = p;
        self.degenerate[i] = degenerate && p.is_some();
    }

    pub(crate) fn set_angle(&mut self, j: usize, k: usize, a: Option<f64>) {
        let i = self.index(j, k).expect("index in range");
        self.angles[i] = a;
    }

    /// Active vertices in row-major (j outer) order.
    pub fn active(&self) -> impl Iterator<Item = (usize, usize, DiskPoint)> + '_ {
        (0..self.nj).flat_map(move |j| (0..self.nk).filter_map(move |k| self.point(j, k).map(|p| (j, k, p))))
    }

    /// Vertices carrying an angle.
    pub fn angles(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nj).flat_map(move |j| (0..self.nk).filter_map(move |k| self.angle(j, k).map(|a| (j, k, a))))
    }

    /// Lower-left corners of complete quads.
    pub fn quads(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.nj.saturating_sub(1))
            .flat_map(move |j| (0..self.nk.saturating_sub(1)).map(move |k| (j, k)))
            .filter(move |&(j, k)| self.is_active(j + 1, k + 1))
    }

    /// Points of the boundary row (t, 0) while active.
    pub fn axis(&self, axis: Axis) -> Vec<DiskPoint> {
        let (dj, dk) = axis.step();
        (0..).map_while(|t| self.point(t * dj, t * dk)).collect()
    }

    /// Active points from `start` stepping along `axis` until the first gap.
    pub fn ray_from(&self, start: (usize, usize), axis: Axis) -> Vec<DiskPoint> {
        let (dj, dk) = axis.step();
        (0..).map_while(|t| self.point(start.0 + t * dj, start.1 + t * dk)).collect()
    }

    pub fn active_count(&self) -> usize {
        self.points.iter().filter(|p| p.is_some()).count()
    }
}

/// A cut point of Algorithm 1 and the branch vertex it creates.
#[derive(Debug, Clone, Serialize)]
pub struct BranchRecord {
    pub id: usize,
    pub location: DiskPoint,
    pub generation: usize,
    pub parent_sector: usize,
    pub daughter_sectors: [usize; 3],
    pub cut: (usize, usize),
    /// Angle at the cut before trisection.
    pub phi_parent: f64,
    /// phi_parent / 3.
    pub phi_daughter: f64,
    /// Opening angle φ_n of the parent sector.
    pub phi_sector: f64,
    /// Distance from the parent sector's corner to the domain boundary.
    pub s_n: f64,
    /// Distance of the branch vertex from the disk centre.
    pub radius: f64,
    pub alpha_sq: f64,
    /// Number of asymptotic rays meeting at the vertex (2m_p).
    pub degree: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RunStatus {
    Terminated,
    /// The generation cap stopped the cut loop with cuts still pending.
    NonTerminated,
}

/// Parameters carried by a built complex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexParams {
    pub radius: f64,
    pub m: usize,
    pub delta: f64,
    pub phi_star: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticComplex {
    pub params: ComplexParams,
    pub sectors: Vec<SectorGrid>,
    pub branches: Vec<BranchRecord>,
    pub attachings: Vec<Attaching>,
    pub status: RunStatus,
    /// Cuts whose vertex fell outside the disk: excised without daughters.
    pub pruned_cuts: usize,
}

impl AsymptoticComplex {
    pub fn terminated(&self) -> bool {
        self.status == RunStatus::Terminated
    }

    pub fn radius(&self) -> f64 {
        self.params.radius
    }

    pub fn delta(&self) -> f64 {
        self.params.delta
    }

    /// Every (sector, j, k, φ) with a defined angle.
    pub fn all_angles(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        self.sectors.iter().flat_map(|s| s.angles().map(move |(j, k, a)| (s.id, j, k, a)))
    }
}

/// Largest branch generation; 0 without branches.
pub fn cut_depth(complex: &AsymptoticComplex) -> usize {
    complex.branches.iter().map(|b| b.generation).max().unwrap_or(0)
}

/// J_p = 1 − m_p for an interior vertex of degree 2m_p.
pub fn branch_index(topology: &Topology, vertex: VertexId) -> Result<i64> {
    if !topology.is_interior(vertex) {
        return Err(Error::BoundaryVertex(vertex as usize));
    }
    Ok(1 - (topology.degree(vertex) as i64) / 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ViolationKind {
    NotCheckerboard,
    NonManifoldEdge,
    OddDegree,
    BranchDegree,
    SeamMismatch,
    UnequalSides,
    UnsupportedAttaching,
    BranchTree,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub sector: usize,
    pub j: usize,
    pub k: usize,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub n_vertices: usize,
    pub n_quads: usize,
    pub max_side_error: f64,
    /// Interior vertex degree histogram.
    pub degrees: BTreeMap<usize, usize>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

/// Side-length tolerance for the rhombus check.
pub const RHOMBUS_TOL: f64 = 1e-9;

/// Checks checkerboard colourability, even interior degrees, bit-identical
/// seams, equal rhombus sides and branch-tree consistency.
pub fn validate_complex(complex: &AsymptoticComplex) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut push = |kind, sector, j, k, detail: String| {
        report.violations.push(Violation { kind, sector, j, k, detail });
    };

    for (idx, att) in complex.attachings.iter().enumerate() {
        if att.reflected {
            push(ViolationKind::UnsupportedAttaching, att.target, 0, 0, format!("attaching {idx} is reflected"));
            continue;
        }
        let target = &complex.sectors[att.target];
        let source = &complex.sectors[att.source];
        let (tj, tk) = att.target_axis.step();
        let (sj, sk) = att.source_axis.step();
        for t in 0.. {
            let Some(p) = target.point(t * tj, t * tk) else { break };
            let q = source.point(att.source_start.0 + t * sj, att.source_start.1 + t * sk);
            let same = q.is_some_and(|q| {
                q.value().re.to_bits() == p.value().re.to_bits() && q.value().im.to_bits() == p.value().im.to_bits()
            });
            if !same {
                push(
                    ViolationKind::SeamMismatch,
                    att.target,
                    t * tj,
                    t * tk,
                    format!("seam {idx} differs from sector {} at step {t}", att.source),
                );
            }
        }
    }

    let delta = complex.delta();
    let mut max_err: f64 = 0.0;
    let mut n_quads = 0;
    for s in &complex.sectors {
        for (j, k) in s.quads() {
            n_quads += 1;
            let c = [(j, k), (j + 1, k), (j + 1, k + 1), (j, k + 1)].map(|(a, b)| s.point(a, b).unwrap());
            let mut worst: f64 = 0.0;
            for i in 0..4 {
                worst = worst.max((hyp_distance(c[i], c[(i + 1) % 4]) - delta).abs());
            }
            max_err = max_err.max(worst);
            if !(worst <= RHOMBUS_TOL) {
                push(ViolationKind::UnequalSides, s.id, j, k, format!("side error {worst:e}"));
            }
        }
    }
    report.max_side_error = max_err;
    report.n_quads = n_quads;

    for s in &complex.sectors {
        if let Some(b) = s.parent_branch {
            let ok = complex.branches.get(b).is_some_and(|br| br.daughter_sectors.contains(&s.id));
            if !ok {
                push(ViolationKind::BranchTree, s.id, 0, 0, format!("parent branch {b} does not list sector"));
            }
        }
    }
    for b in &complex.branches {
        let parent = &complex.sectors[b.parent_sector];
        let expected = parent.generation + 1;
        if b.generation != expected {
            push(ViolationKind::BranchTree, b.parent_sector, b.cut.0, b.cut.1, format!("branch {} generation", b.id));
        }
    }
    if complex.sectors.len() != 2 * complex.params.m + 3 * complex.branches.len() {
        push(ViolationKind::BranchTree, 0, 0, 0, "sector count is not 2m + 3·branches".into());
    }

    let topo = Topology::build(complex);
    report.n_vertices = topo.vertex_count();
    for v in topo.conflicting_faces() {
        let f = topo.face(v);
        push(ViolationKind::NotCheckerboard, f.sector, f.j, f.k, "face 2-colouring conflict".into());
    }
    for (a, b) in topo.non_manifold_edges() {
        let o = topo.owner(a);
        push(ViolationKind::NonManifoldEdge, o.0, o.1, o.2, format!("edge {a}-{b} has more than two faces"));
    }
    for v in 0..topo.vertex_count() as VertexId {
        if !topo.is_interior(v) {
            continue;
        }
        let d = topo.degree(v);
        *report.degrees.entry(d).or_default() += 1;
        if !d.is_multiple_of(2) {
            let o = topo.owner(v);
            push(ViolationKind::OddDegree, o.0, o.1, o.2, format!("interior degree {d}"));
        }
    }
    for b in &complex.branches {
        let v = topo.vertex_at(b.parent_sector, b.cut.0, b.cut.1).expect("branch vertex is active");
        if topo.is_interior(v) && topo.degree(v) != b.degree {
            push(
                ViolationKind::BranchDegree,
                b.parent_sector,
                b.cut.0,
                b.cut.1,
                format!("branch {} has degree {}", b.id, topo.degree(v)),
            );
        }
    }
    report
}
