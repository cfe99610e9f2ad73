//! Uniform Cartesian mesh geometry, cell-state storage with ghost layers,
//! and boundary-condition application for 2D and 3D.
//!
//! Storage is row-major over (z, y, x), x fastest. The ghost width is fixed
//! at 2: the slope at a cell needs both neighbors, and the flux at the first
//! interior face needs the limited value from ghost layer 1, whose own slope
//! needs ghost layer 2. Inactive axes (z in 2D) carry no ghost cells.

use crate::error::{MhdError, Result};
use crate::state::CellState;
use crate::vec3::Vec3;

/// Fixed ghost-layer width on active axes.
pub const GHOST: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    /// 2 or 3.
    pub dim: usize,
    /// Interior cells per axis; `n[2] == 1` in 2D.
    pub n: [usize; 3],
    /// Lower domain corner per axis.
    pub origin: [f64; 3],
    /// Cell size per axis (inactive axes hold 1.0).
    pub dx: [f64; 3],
    /// Ghost-layer width on active axes.
    pub ghost: usize,
}

impl GridGeometry {
    pub fn new_2d(n: [usize; 2], lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        Self::build(2, [n[0], n[1], 1], [lo[0], lo[1], 0.0], [hi[0], hi[1], 1.0])
    }

    pub fn new_3d(n: [usize; 3], lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        Self::build(3, n, lo, hi)
    }

    fn build(dim: usize, n: [usize; 3], lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        let mut dx = [1.0; 3];
        for a in 0..dim {
            if n[a] == 0 {
                return Err(MhdError::Config(format!("axis {a} has zero cells")));
            }
            if !(hi[a] > lo[a]) {
                return Err(MhdError::Config(format!(
                    "axis {a} extent [{}, {}] is empty",
                    lo[a], hi[a]
                )));
            }
            dx[a] = (hi[a] - lo[a]) / n[a] as f64;
        }
        Ok(GridGeometry {
            dim,
            n,
            origin: lo,
            dx,
            ghost: GHOST,
        })
    }

    pub fn is_active(&self, axis: usize) -> bool {
        axis < self.dim
    }

    /// Ghost width on `axis` (0 on inactive axes).
    pub fn ghost_on(&self, axis: usize) -> usize {
        if self.is_active(axis) {
            self.ghost
        } else {
            0
        }
    }

    /// Total extent of the storage array along `axis`, ghosts included.
    pub fn total(&self, axis: usize) -> usize {
        self.n[axis] + 2 * self.ghost_on(axis)
    }

    /// Extended-array index range covering the interior of `axis`.
    pub fn interior_range(&self, axis: usize) -> std::ops::Range<usize> {
        let g = self.ghost_on(axis);
        g..g + self.n[axis]
    }

    pub fn cell_count(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn storage_len(&self) -> usize {
        self.total(0) * self.total(1) * self.total(2)
    }

    pub fn min_dx(&self) -> f64 {
        (0..self.dim)
            .map(|a| self.dx[a])
            .fold(f64::INFINITY, f64::min)
    }

    /// Center coordinates of the cell at extended coordinates `p`.
    /// Ghost cells get centers outside the domain, which is what inflow
    /// masks evaluate.
    pub fn center(&self, p: [usize; 3]) -> Vec3 {
        let mut c = Vec3::ZERO;
        for a in 0..self.dim {
            let i = p[a] as f64 - self.ghost_on(a) as f64;
            c.set_comp(a, self.origin[a] + (i + 0.5) * self.dx[a]);
        }
        c
    }

    /// Half-open bounds `[lo, hi)` of the cell at extended coordinates `p`.
    pub fn cell_bounds(&self, p: [usize; 3]) -> ([f64; 3], [f64; 3]) {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for a in 0..self.dim {
            let i = p[a] as f64 - self.ghost_on(a) as f64;
            lo[a] = self.origin[a] + i * self.dx[a];
            hi[a] = lo[a] + self.dx[a];
        }
        (lo, hi)
    }

    /// Interior cell-center coordinates along one axis.
    pub fn cell_centers(&self, axis: usize) -> Vec<f64> {
        (0..self.n[axis])
            .map(|i| self.origin[axis] + (i as f64 + 0.5) * self.dx[axis])
            .collect()
    }

    /// Iterate interior cells (z slowest, x fastest).
    pub fn interior(&self) -> Coords {
        self.with_margin(0)
    }

    /// Interior grown by `m` ghost layers on every active axis.
    pub fn with_margin(&self, m: usize) -> Coords {
        debug_assert!(m <= self.ghost);
        let mut lo = [0usize; 3];
        let mut hi = [1usize; 3];
        for a in 0..3 {
            let g = self.ghost_on(a);
            let mm = if self.is_active(a) { m } else { 0 };
            lo[a] = g - mm;
            hi[a] = g + self.n[a] + mm;
        }
        Coords::new(lo, hi)
    }

    /// Iterate the full storage array, ghosts included.
    pub fn extended(&self) -> Coords {
        self.with_margin(self.ghost)
    }

    /// Storage index of extended coordinates `p` (row-major z, y, x).
    #[inline]
    pub fn index(&self, p: [usize; 3]) -> usize {
        (p[2] * self.total(1) + p[1]) * self.total(0) + p[0]
    }

    /// One cell per pencil orthogonal to `axis`: interior coordinates on the
    /// other axes, zero on `axis` itself.
    pub(crate) fn pencil_bases(&self, axis: usize) -> Coords {
        let mut lo = [0usize; 3];
        let mut hi = [1usize; 3];
        for b in 0..3 {
            if b != axis {
                lo[b] = self.ghost_on(b);
                hi[b] = self.ghost_on(b) + self.n[b];
            }
        }
        Coords::new(lo, hi)
    }
}

/// Iterator over `[i, j, k]` coordinate triples in a box, x fastest.
#[derive(Debug, Clone)]
pub struct Coords {
    lo: [usize; 3],
    hi: [usize; 3],
    cur: [usize; 3],
    done: bool,
}

impl Coords {
    pub(crate) fn new(lo: [usize; 3], hi: [usize; 3]) -> Self {
        let done = (0..3).any(|a| lo[a] >= hi[a]);
        Coords {
            lo,
            hi,
            cur: lo,
            done,
        }
    }
}

impl Iterator for Coords {
    type Item = [usize; 3];

    fn next(&mut self) -> Option<[usize; 3]> {
        if self.done {
            return None;
        }
        let out = self.cur;
        self.cur[0] += 1;
        if self.cur[0] == self.hi[0] {
            self.cur[0] = self.lo[0];
            self.cur[1] += 1;
            if self.cur[1] == self.hi[1] {
                self.cur[1] = self.lo[1];
                self.cur[2] += 1;
                if self.cur[2] == self.hi[2] {
                    self.done = true;
                }
            }
        }
        Some(out)
    }
}

/// Dense array of cell states over interior plus ghost region.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub geom: GridGeometry,
    cells: Vec<CellState>,
}

impl FieldGrid {
    #[inline]
    pub fn idx(&self, p: [usize; 3]) -> usize {
        self.geom.index(p)
    }

    pub fn uniform(geom: GridGeometry, state: CellState) -> Self {
        FieldGrid {
            geom,
            cells: vec![state; geom.storage_len()],
        }
    }

    /// Builds a field by evaluating `f` at every cell of the extended array
    /// (ghost values are placeholders until boundaries are applied).
    pub fn from_fn(geom: GridGeometry, mut f: impl FnMut([usize; 3], Vec3) -> CellState) -> Self {
        let mut field = FieldGrid::uniform(geom, CellState::default());
        for p in geom.extended() {
            *field.at_mut(p) = f(p, geom.center(p));
        }
        field
    }

    #[inline]
    pub fn at(&self, p: [usize; 3]) -> &CellState {
        &self.cells[self.idx(p)]
    }

    #[inline]
    pub fn at_mut(&mut self, p: [usize; 3]) -> &mut CellState {
        let i = self.idx(p);
        &mut self.cells[i]
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }
}

/// Axis-aligned band `|coord[axis] - center| < half_width`, used to restrict
/// an inflow face to an inlet section.
#[derive(Debug, Clone, Copy)]
pub struct CoordMask {
    pub axis: usize,
    pub center: f64,
    pub half_width: f64,
}

impl CoordMask {
    pub fn contains(&self, pos: Vec3) -> bool {
        (pos.comp(self.axis) - self.center).abs() < self.half_width
    }
}

/// Boundary condition on one face of the domain.
#[derive(Debug, Clone)]
pub enum FaceCondition {
    /// Ghosts wrap around to the opposite interior edge. Must pair with a
    /// periodic condition on the opposing face.
    Periodic,
    /// Zeroth-order extrapolation: copy the nearest interior cell.
    Outflow,
    /// Mirror interior cells across the face, negating the face-normal
    /// components of both velocity and magnetic field.
    Reflecting,
    /// Ghosts hold the given state.
    Inflow(CellState),
    /// The inflow state where `mask` holds at the ghost-cell center, the
    /// `outside` condition elsewhere.
    MaskedInflow {
        inside: CellState,
        outside: Box<FaceCondition>,
        mask: CoordMask,
    },
}

/// Per-face boundary conditions, indexed `[axis][side]` with side 0 = low.
#[derive(Debug, Clone)]
pub struct BoundarySpec {
    pub faces: [[FaceCondition; 2]; 3],
}

impl BoundarySpec {
    pub fn all_periodic() -> Self {
        BoundarySpec {
            faces: std::array::from_fn(|_| [FaceCondition::Periodic, FaceCondition::Periodic]),
        }
    }

    pub fn all_outflow() -> Self {
        BoundarySpec {
            faces: std::array::from_fn(|_| [FaceCondition::Outflow, FaceCondition::Outflow]),
        }
    }

    pub fn with_face(mut self, axis: usize, side: usize, cond: FaceCondition) -> Self {
        self.faces[axis][side] = cond;
        self
    }

    fn validate(&self, geom: &GridGeometry) -> Result<()> {
        for a in 0..geom.dim {
            let low = matches!(self.faces[a][0], FaceCondition::Periodic);
            let high = matches!(self.faces[a][1], FaceCondition::Periodic);
            if low != high {
                return Err(MhdError::Config(format!(
                    "periodic faces must come in opposing pairs (axis {a})"
                )));
            }
            if low && geom.n[a] < geom.ghost {
                return Err(MhdError::Config(format!(
                    "periodic axis {a} needs at least {} cells, got {}",
                    geom.ghost, geom.n[a]
                )));
            }
        }
        Ok(())
    }
}

/// Fills every ghost cell from the interior according to `spec`.
///
/// Axes are swept in x, y, z order; when filling axis `a`, already-swept
/// axes are traversed over their full extended range so corner ghosts end
/// up consistent (exact for periodic pairs, standard extrapolation
/// otherwise). Idempotent: applying twice equals applying once.
pub fn apply_boundaries(field: &mut FieldGrid, spec: &BoundarySpec) -> Result<()> {
    let geom = field.geom;
    spec.validate(&geom)?;
    for a in 0..geom.dim {
        // axes already swept (< a) include their ghosts; later axes do not
        let mut lo = [0usize; 3];
        let mut hi = [1usize; 3];
        for b in 0..3 {
            if b < a {
                lo[b] = 0;
                hi[b] = geom.total(b);
            } else {
                lo[b] = geom.ghost_on(b);
                hi[b] = geom.ghost_on(b) + geom.n[b];
            }
        }
        for side in 0..2 {
            let cond = &spec.faces[a][side];
            for layer in 1..=geom.ghost {
                let ghost_pa = if side == 0 {
                    geom.ghost - layer
                } else {
                    geom.ghost + geom.n[a] + layer - 1
                };
                let mut box_lo = lo;
                let mut box_hi = hi;
                box_lo[a] = ghost_pa;
                box_hi[a] = ghost_pa + 1;
                for p in Coords::new(box_lo, box_hi) {
                    fill_ghost(field, p, a, side, layer, cond);
                }
            }
        }
    }
    Ok(())
}

fn fill_ghost(
    field: &mut FieldGrid,
    p: [usize; 3],
    axis: usize,
    side: usize,
    layer: usize,
    cond: &FaceCondition,
) {
    let geom = field.geom;
    let g = geom.ghost;
    let n = geom.n[axis];
    match cond {
        FaceCondition::Periodic => {
            let mut src = p;
            src[axis] = if side == 0 {
                g + n - layer
            } else {
                g + layer - 1
            };
            *field.at_mut(p) = *field.at(src);
        }
        FaceCondition::Outflow => {
            let mut src = p;
            src[axis] = if side == 0 { g } else { g + n - 1 };
            *field.at_mut(p) = *field.at(src);
        }
        FaceCondition::Reflecting => {
            let mut src = p;
            src[axis] = if side == 0 {
                g + layer - 1
            } else {
                g + n - layer
            };
            let mut s = *field.at(src);
            s.mom.set_comp(axis, -s.mom.comp(axis));
            s.mag.set_comp(axis, -s.mag.comp(axis));
            *field.at_mut(p) = s;
        }
        FaceCondition::Inflow(state) => {
            *field.at_mut(p) = *state;
        }
        FaceCondition::MaskedInflow {
            inside,
            outside,
            mask,
        } => {
            if mask.contains(geom.center(p)) {
                *field.at_mut(p) = *inside;
            } else {
                fill_ghost(field, p, axis, side, layer, outside);
            }
        }
    }
}
