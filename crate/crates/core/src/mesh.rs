//! Axis-aligned affine Cartesian meshes (single or multi-block) and boundary
//! conditions.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::euler::EulerState;

/// Boundary condition applied weakly through the interface flux.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryKind {
    /// Prescribed far-field state.
    Inflow(EulerState),
    /// Prescribed post-shock state (same treatment as inflow, kept distinct for reporting).
    PostShock(EulerState),
    /// Zeroth-order extrapolation of the interior trace.
    Outflow,
    /// Reflecting wall: normal velocity mirrored, density and pressure copied.
    SlipWall,
}

/// Ghost state paired with the interior trace at a boundary face. Periodic
/// boundaries never reach here; they are resolved by mesh connectivity.
pub fn ghost_state(interior: &EulerState, kind: &BoundaryKind, outward_normal: [f64; 2], _t: f64) -> EulerState {
    match kind {
        BoundaryKind::Inflow(s) | BoundaryKind::PostShock(s) => *s,
        BoundaryKind::Outflow => *interior,
        BoundaryKind::SlipWall => {
            let n = outward_normal;
            let mn = interior.mom[0] * n[0] + interior.mom[1] * n[1];
            EulerState {
                rho: interior.rho,
                mom: [interior.mom[0] - 2.0 * mn * n[0], interior.mom[1] - 2.0 * mn * n[1]],
                energy: interior.energy,
            }
        }
    }
}

/// Straight boundary segment `x[axis] = coord`, spanning `range` in the other
/// coordinate, with outward normal `outward * e_axis`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundarySegment {
    pub axis: usize,
    pub outward: f64,
    pub coord: f64,
    pub range: (f64, f64),
    pub kind: BoundaryKind,
}

impl BoundarySegment {
    pub fn new(axis: usize, outward: f64, coord: f64, range: (f64, f64), kind: BoundaryKind) -> Self {
        Self { axis, outward, coord, range, kind }
    }

    fn matches(&self, center: [f64; 2], axis: usize, outward: f64, tol: f64) -> bool {
        if self.axis != axis || self.outward != outward || Float::abs(center[axis] - self.coord) > tol {
            return false;
        }
        let t = center[1 - axis];
        t > self.range.0 - tol && t < self.range.1 + tol
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundarySpec {
    pub periodic: [bool; 2],
    pub segments: Vec<BoundarySegment>,
}

impl BoundarySpec {
    pub fn periodic(dim: usize) -> Self {
        Self { periodic: [true, dim == 2], segments: Vec::new() }
    }
}

/// Axis-aligned rectangle of the domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Block {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FaceSide {
    Element(usize),
    Boundary(BoundaryKind),
}

/// Face normal to `axis`; the `minus` side lies at lower coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Face {
    pub axis: usize,
    pub minus: FaceSide,
    pub plus: FaceSide,
    pub center: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Element {
    pub lattice: [usize; 2],
    pub center: [f64; 2],
    /// Face ids in local order `[x-, x+, y-, y+]`.
    pub faces: [usize; 4],
}

#[derive(Clone, Debug)]
pub struct CartesianMesh {
    dim: usize,
    lo: [f64; 2],
    hi: [f64; 2],
    cells: [usize; 2],
    h: [f64; 2],
    blocks: Vec<Block>,
    elements: Vec<Element>,
    faces: Vec<Face>,
    lattice_to_element: Vec<Option<usize>>,
}

const UNSET: usize = usize::MAX;

impl CartesianMesh {
    /// Uniform mesh of one interval `[lo, hi]` with `n` elements.
    pub fn interval(lo: f64, hi: f64, n: usize, spec: &BoundarySpec) -> Result<Self> {
        Self::new(1, &[Block { lo: [lo, 0.0], hi: [hi, 1.0] }], [n, 1], spec)
    }

    /// Uniform mesh of the union of `blocks` on a common lattice with
    /// `cells` elements across the bounding box.
    pub fn new(dim: usize, blocks: &[Block], cells: [usize; 2], spec: &BoundarySpec) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::invalid("dimension must be 1 or 2"));
        }
        if blocks.is_empty() || cells[0] == 0 || cells[1] == 0 || (dim == 1 && cells[1] != 1) {
            return Err(Error::invalid("mesh needs at least one block and positive element counts"));
        }
        let mut lo = blocks[0].lo;
        let mut hi = blocks[0].hi;
        for b in blocks {
            for a in 0..2 {
                if !(b.hi[a] > b.lo[a]) {
                    return Err(Error::invalid("block with non-positive extent"));
                }
                lo[a] = lo[a].min(b.lo[a]);
                hi[a] = hi[a].max(b.hi[a]);
            }
        }
        let h = [(hi[0] - lo[0]) / cells[0] as f64, (hi[1] - lo[1]) / cells[1] as f64];
        for b in blocks {
            for a in 0..dim {
                for x in [b.lo[a], b.hi[a]] {
                    let k = (x - lo[a]) / h[a];
                    if Float::abs(k - Float::round(k)) > 1e-9 {
                        return Err(Error::NonConforming(alloc::format!(
                            "block edge {x} is not on the lattice of spacing {}",
                            h[a]
                        )));
                    }
                }
            }
        }

        let center_of = |i: usize, j: usize| {
            [lo[0] + (i as f64 + 0.5) * h[0], lo[1] + (j as f64 + 0.5) * h[1]]
        };
        let inside = |c: [f64; 2]| {
            blocks.iter().any(|b| (0..dim).all(|a| c[a] > b.lo[a] && c[a] < b.hi[a]))
        };

        let mut lattice_to_element = vec![None; cells[0] * cells[1]];
        let mut elements = Vec::new();
        for j in 0..cells[1] {
            for i in 0..cells[0] {
                let c = center_of(i, j);
                if inside(c) {
                    lattice_to_element[i + cells[0] * j] = Some(elements.len());
                    elements.push(Element { lattice: [i, j], center: c, faces: [UNSET; 4] });
                }
            }
        }

        let tol = 1e-9 * (h[0].max(h[1]));
        let find_kind = |center: [f64; 2], axis: usize, outward: f64| -> Result<BoundaryKind> {
            let mut found = spec.segments.iter().filter(|s| s.matches(center, axis, outward, tol));
            match (found.next(), found.count()) {
                (Some(s), 0) => Ok(s.kind),
                (first, rest) => Err(Error::BoundaryPartition {
                    x: center[0],
                    y: center[1],
                    matches: rest + usize::from(first.is_some()),
                }),
            }
        };

        let mut faces = Vec::new();
        for e in 0..elements.len() {
            let [i, j] = elements[e].lattice;
            for axis in 0..dim {
                let mut center = elements[e].center;
                center[axis] += 0.5 * h[axis];
                let (ni, nj) = if axis == 0 { (i + 1, j) } else { (i, j + 1) };
                let at_edge = if axis == 0 { ni == cells[0] } else { nj == cells[1] };
                let neighbor = if at_edge {
                    if spec.periodic[axis] {
                        let (wi, wj) = if axis == 0 { (0, j) } else { (i, 0) };
                        let nb = lattice_to_element[wi + cells[0] * wj];
                        if nb.is_none() {
                            return Err(Error::NonConforming("periodic wrap onto an inactive cell".into()));
                        }
                        nb
                    } else {
                        None
                    }
                } else {
                    lattice_to_element[ni + cells[0] * nj]
                };
                let id = faces.len();
                let plus = match neighbor {
                    Some(nb) => {
                        elements[nb].faces[2 * axis] = id;
                        FaceSide::Element(nb)
                    }
                    None => FaceSide::Boundary(find_kind(center, axis, 1.0)?),
                };
                faces.push(Face { axis, minus: FaceSide::Element(e), plus, center });
                elements[e].faces[2 * axis + 1] = id;
            }
        }
        for e in 0..elements.len() {
            for axis in 0..dim {
                if elements[e].faces[2 * axis] == UNSET {
                    let mut center = elements[e].center;
                    center[axis] -= 0.5 * h[axis];
                    let kind = find_kind(center, axis, -1.0)?;
                    elements[e].faces[2 * axis] = faces.len();
                    faces.push(Face { axis, minus: FaceSide::Boundary(kind), plus: FaceSide::Element(e), center });
                }
            }
        }

        Ok(Self { dim, lo, hi, cells, h, blocks: blocks.to_vec(), elements, faces, lattice_to_element })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }
    pub fn elements(&self) -> &[Element] {
        &self.elements
    }
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }
    /// Element sizes per direction.
    pub fn h(&self) -> [f64; 2] {
        self.h
    }
    /// Lattice cell counts of the bounding box.
    pub fn cells(&self) -> [usize; 2] {
        self.cells
    }
    pub fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        (self.lo, self.hi)
    }
    /// Affine Jacobian determinant of the reference-to-physical map.
    pub fn jacobian(&self) -> f64 {
        if self.dim == 1 { 0.5 * self.h[0] } else { 0.25 * self.h[0] * self.h[1] }
    }
    /// Solution degrees of freedom per variable.
    pub fn num_dofs(&self, degree: usize) -> usize {
        self.elements.len() * (degree + 1).pow(self.dim as u32)
    }
    /// Element lattice-adjacent lookup.
    pub fn element_at_lattice(&self, i: usize, j: usize) -> Option<usize> {
        if i < self.cells[0] && j < self.cells[1] { self.lattice_to_element[i + self.cells[0] * j] } else { None }
    }

    /// Physical coordinates of reference point `xi` in element `e`.
    pub fn physical(&self, e: usize, xi: [f64; 2]) -> [f64; 2] {
        let c = self.elements[e].center;
        [c[0] + 0.5 * self.h[0] * xi[0], if self.dim == 1 { 0.0 } else { c[1] + 0.5 * self.h[1] * xi[1] }]
    }

    /// Element containing `x` and the reference coordinates of `x` in it.
    pub fn locate(&self, x: [f64; 2]) -> Option<(usize, [f64; 2])> {
        let mut idx = [0usize; 2];
        let mut xi = [0.0; 2];
        for a in 0..self.dim {
            let t = (x[a] - self.lo[a]) / self.h[a];
            if !(t >= 0.0 && t <= self.cells[a] as f64) {
                return None;
            }
            let k = (Float::floor(t) as usize).min(self.cells[a] - 1);
            idx[a] = k;
            xi[a] = 2.0 * (t - k as f64) - 1.0;
        }
        self.element_at_lattice(idx[0], idx[1]).map(|e| (e, xi))
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        self.blocks.iter().any(|b| (0..self.dim).all(|a| x[a] >= b.lo[a] && x[a] <= b.hi[a]))
    }
}
