//! Global quad mesh over the complex: seam copies are merged into single
//! vertices so that degrees, face adjacency and loops can be queried.

use crate::complex::{AsymptoticComplex, Family};
use crate::hyperbolic::DiskPoint;

pub type VertexId = u32;

const NONE: VertexId = VertexId::MAX;

/// One quad of a sector, corners listed as (j,k), (j+1,k), (j+1,k+1), (j,k+1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub sector: usize,
    pub j: usize,
    pub k: usize,
    pub corners: [VertexId; 4],
    pub orientation: i8,
}

impl Face {
    /// Corners in counter-clockwise order in the disk.
    pub fn ccw_corners(&self) -> [VertexId; 4] {
        let [a, b, c, d] = self.corners;
        if self.orientation >= 0 {
            [a, b, c, d]
        } else {
            [a, d, c, b]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub vertex: VertexId,
    pub family: Family,
    faces: [u32; 2],
    n_faces: u8,
}

impl Neighbor {
    pub fn faces(&self) -> &[u32] {
        &self.faces[..(self.n_faces as usize).min(2)]
    }

    pub fn face_count(&self) -> usize {
        self.n_faces as usize
    }
}

#[derive(Debug, Clone)]
pub struct Topology {
    offsets: Vec<usize>,
    extents: Vec<(usize, usize)>,
    slots: Vec<VertexId>,
    owners: Vec<(usize, usize, usize)>,
    points: Vec<DiskPoint>,
    faces: Vec<Face>,
    adjacency: Vec<Vec<Neighbor>>,
    colour: Vec<u8>,
    conflicts: Vec<usize>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl Topology {
    pub fn build(complex: &AsymptoticComplex) -> Topology {
        let mut offsets = Vec::with_capacity(complex.sectors.len() + 1);
        let mut extents = Vec::with_capacity(complex.sectors.len());
        let mut total = 0;
        for s in &complex.sectors {
            offsets.push(total);
            let (nj, nk) = s.extent();
            extents.push((nj, nk));
            total += nj * nk;
        }
        offsets.push(total);
        let slot = |sector: usize, j: usize, k: usize| offsets[sector] + j * extents[sector].1 + k;

        let mut parent: Vec<usize> = (0..total).collect();
        for att in &complex.attachings {
            let target = &complex.sectors[att.target];
            let source = &complex.sectors[att.source];
            let (tj, tk) = att.target_axis.step();
            let (sj, sk) = att.source_axis.step();
            for t in 0.. {
                let (aj, ak) = (t * tj, t * tk);
                let (bj, bk) = (att.source_start.0 + t * sj, att.source_start.1 + t * sk);
                if !target.is_active(aj, ak) || !source.is_active(bj, bk) {
                    break;
                }
                let a = find(&mut parent, slot(att.target, aj, ak));
                let b = find(&mut parent, slot(att.source, bj, bk));
                if a != b {
                    // keep the earlier slot as root so ids follow creation order
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    parent[hi] = lo;
                }
            }
        }

        let mut slots = vec![NONE; total];
        let mut root_id = vec![NONE; total];
        let mut owners = Vec::new();
        let mut points = Vec::new();
        for s in &complex.sectors {
            for (j, k, p) in s.active() {
                let sl = slot(s.id, j, k);
                let r = find(&mut parent, sl);
                if root_id[r] == NONE {
                    root_id[r] = owners.len() as VertexId;
                    owners.push((s.id, j, k));
                    points.push(p);
                }
                slots[sl] = root_id[r];
            }
        }

        let mut adjacency: Vec<Vec<Neighbor>> = vec![Vec::new(); owners.len()];
        let add_edge = |adjacency: &mut Vec<Vec<Neighbor>>, a: VertexId, b: VertexId, family: Family| {
            for (x, y) in [(a, b), (b, a)] {
                let list = &mut adjacency[x as usize];
                if !list.iter().any(|n| n.vertex == y) {
                    list.push(Neighbor { vertex: y, family, faces: [0; 2], n_faces: 0 });
                }
            }
        };
        let mut faces = Vec::new();
        for s in &complex.sectors {
            let id = |j: usize, k: usize| slots[slot(s.id, j, k)];
            for (j, k, _) in s.active() {
                if s.is_active(j + 1, k) {
                    add_edge(&mut adjacency, id(j, k), id(j + 1, k), s.j_family);
                }
                if s.is_active(j, k + 1) {
                    add_edge(&mut adjacency, id(j, k), id(j, k + 1), s.j_family.other());
                }
            }
            for (j, k) in s.quads() {
                faces.push(Face {
                    sector: s.id,
                    j,
                    k,
                    corners: [id(j, k), id(j + 1, k), id(j + 1, k + 1), id(j, k + 1)],
                    orientation: s.orientation,
                });
            }
        }
        for (fi, f) in faces.iter().enumerate() {
            for i in 0..4 {
                let (a, b) = (f.corners[i], f.corners[(i + 1) % 4]);
                for (x, y) in [(a, b), (b, a)] {
                    let n = adjacency[x as usize].iter_mut().find(|n| n.vertex == y).expect("face edge exists");
                    if (n.n_faces as usize) < 2 {
                        n.faces[n.n_faces as usize] = fi as u32;
                    }
                    n.n_faces = n.n_faces.saturating_add(1);
                }
            }
        }

        let mut topo = Topology {
            offsets,
            extents,
            slots,
            owners,
            points,
            faces,
            adjacency,
            colour: Vec::new(),
            conflicts: Vec::new(),
        };
        topo.colour_faces();
        topo
    }

    fn colour_faces(&mut self) {
        const UNSET: u8 = 2;
        let mut colour = vec![UNSET; self.faces.len()];
        let mut conflicts = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        for start in 0..self.faces.len() {
            if colour[start] != UNSET {
                continue;
            }
            colour[start] = 0;
            queue.push_back(start);
            while let Some(f) = queue.pop_front() {
                for g in self.face_neighbors(f) {
                    if colour[g] == UNSET {
                        colour[g] = 1 - colour[f];
                        queue.push_back(g);
                    } else if colour[g] == colour[f] && g > f {
                        conflicts.push(g);
                    }
                }
            }
        }
        self.colour = colour;
        self.conflicts = conflicts;
    }

    /// Faces sharing an edge with face `f`.
    pub fn face_neighbors(&self, f: usize) -> Vec<usize> {
        let c = self.faces[f].corners;
        let mut out = Vec::with_capacity(4);
        for i in 0..4 {
            if let Some(n) = self.neighbor(c[i], c[(i + 1) % 4]) {
                out.extend(n.faces().iter().map(|&g| g as usize).filter(|&g| g != f));
            }
        }
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.owners.len()
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    /// Checkerboard colour of each face (0 or 1).
    pub fn face_colour(&self, f: usize) -> u8 {
        self.colour[f]
    }

    pub fn conflicting_faces(&self) -> Vec<usize> {
        self.conflicts.clone()
    }

    pub fn non_manifold_edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for (a, list) in self.adjacency.iter().enumerate() {
            for n in list {
                if (a as VertexId) < n.vertex && n.n_faces > 2 {
                    out.push((a as VertexId, n.vertex));
                }
            }
        }
        out
    }

    pub fn vertex_at(&self, sector: usize, j: usize, k: usize) -> Option<VertexId> {
        let (nj, nk) = *self.extents.get(sector)?;
        if j >= nj || k >= nk {
            return None;
        }
        let v = self.slots[self.offsets[sector] + j * nk + k];
        (v != NONE).then_some(v)
    }

    /// First (sector, j, k) copy of a vertex.
    pub fn owner(&self, v: VertexId) -> (usize, usize, usize) {
        self.owners[v as usize]
    }

    pub fn point(&self, v: VertexId) -> DiskPoint {
        self.points[v as usize]
    }

    pub fn neighbors(&self, v: VertexId) -> &[Neighbor] {
        &self.adjacency[v as usize]
    }

    pub fn neighbor(&self, a: VertexId, b: VertexId) -> Option<&Neighbor> {
        self.adjacency[a as usize].iter().find(|n| n.vertex == b)
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v as usize].len()
    }

    /// Every incident edge borders exactly two faces.
    pub fn is_interior(&self, v: VertexId) -> bool {
        let list = &self.adjacency[v as usize];
        !list.is_empty() && list.iter().all(|n| n.n_faces == 2)
    }

    /// Faces incident to `v`, each with the neighbours that follow and precede
    /// `v` in the face's counter-clockwise corner order.
    pub fn wedges(&self, v: VertexId) -> Vec<(usize, VertexId, VertexId)> {
        let mut out = Vec::new();
        let mut seen = Vec::new();
        for n in self.neighbors(v) {
            for &f in n.faces() {
                if seen.contains(&f) {
                    continue;
                }
                seen.push(f);
                let c = self.faces[f as usize].ccw_corners();
                let i = c.iter().position(|&x| x == v).expect("face contains vertex");
                out.push((f as usize, c[(i + 1) % 4], c[(i + 3) % 4]));
            }
        }
        out.sort_unstable_by_key(|w| w.0);
        out
    }
}
