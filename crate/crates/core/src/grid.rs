//! Masked Cartesian grid over a planar domain with cut-cell closure.
//!
//! Unknowns live at lattice nodes strictly inside `Ω`. Derivatives use
//! three-point quadratic stencils along four directions, `X = (1,0)`,
//! `Y = (0,1)`, `D = (1,1)` and `A = (1,-1)`. When an arm of a stencil
//! crosses `∂Ω` it is shortened to the crossing point, where the Dirichlet
//! value is imposed, and the nonuniform three-point formulas take over:
//!
//! ```text
//! g'(0)  ≈ -b/(a(a+b)) g₋ + (b-a)/(ab) g₀ + a/(b(a+b)) g₊
//! g''(0) ≈  2/(a(a+b)) g₋ -     2/(ab) g₀ + 2/(b(a+b)) g₊
//! ```
//!
//! with arm fractions `a` (minus side) and `b` (plus side). Then
//! `u_x = g'_X/h`, `u_xx = g''_X/h²` and `u_xy = (g''_D - g''_A)/(4h²)`.
//!
//! Stencil slots: 0 centre, 1/2 = X∓, 3/4 = Y∓, 5/6 = D∓, 7/8 = A∓.
//!
//! A node closer to `∂Ω` than `MIN_ARM` lattice steps along some arm is
//! pinned instead: its value is the linear interpolant between the crossing
//! and the opposite arm end. Its equation is then well conditioned and the
//! interpolation error is `O(MIN_ARM h²)`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use libm::{ceil, sqrt};

use crate::domain::{DomainSpec, Point};
use crate::error::{Error, Result};
use crate::hypgeo::GraphSample;
use crate::sparse::{CscMatrix, SymbolicLu};

/// Lattice offsets of slots 1..=8.
pub const OFFSETS: [[i32; 2]; 8] = [
    [-1, 0],
    [1, 0],
    [0, -1],
    [0, 1],
    [-1, -1],
    [1, 1],
    [-1, 1],
    [1, -1],
];

/// Slot of the opposite arm, indexed by slot.
pub const OPPOSITE: [usize; 9] = [0, 2, 1, 4, 3, 6, 5, 8, 7];

/// Arms shorter than this fraction of the lattice step pin their node.
pub const MIN_ARM: f64 = 1e-3;
/// A lattice point is inside only if the domain level function is below `-INSIDE_TOL`.
pub const INSIDE_TOL: f64 = 1e-12;

/// Derivative rows of [`Stencil::weights`].
pub const PX: usize = 0;
pub const PY: usize = 1;
pub const UXX: usize = 2;
pub const UYY: usize = 3;
pub const UXY: usize = 4;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct Stencil {
    /// Neighbour node per slot, `None` where the arm ends on `∂Ω`.
    nbr: [u32; 9],
    /// Arm length per slot 1..=8 as a fraction of the lattice step.
    pub frac: [f64; 8],
    /// Weights of `u_x, u_y, u_xx, u_yy, u_xy` over the nine slots.
    pub weights: [[f64; 9]; 5],
}

impl Stencil {
    pub fn neighbour(&self, slot: usize) -> Option<usize> {
        (self.nbr[slot] != NONE).then_some(self.nbr[slot] as usize)
    }

    pub fn is_band(&self) -> bool {
        self.nbr[1..].contains(&NONE)
    }
}

/// Interpolation constraint of a node lying almost on `∂Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pin {
    /// Slot of the short arm.
    pub slot: usize,
    /// Its true length as a fraction of the lattice step.
    pub frac: f64,
    /// Length of the opposite arm.
    pub far_frac: f64,
}

impl Pin {
    /// Interpolation weight of the opposite arm end; the crossing gets the rest.
    pub fn far_weight(&self) -> f64 {
        self.frac / (self.frac + self.far_frac)
    }
}

/// A point where a stencil arm meets `∂Ω`, kept for boundary measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryArm {
    pub node: usize,
    pub slot: usize,
    pub point: Point,
    pub normal: Point,
}

#[derive(Debug)]
pub struct Grid {
    pub domain: DomainSpec,
    pub h: f64,
    coords: Vec<Point>,
    lattice: Vec<[i32; 2]>,
    stencils: Vec<Stencil>,
    pins: Vec<Option<Pin>>,
    boundary_arms: Vec<BoundaryArm>,
    /// Unknown index of each node in the factorization order.
    perm: Vec<usize>,
    pattern: CscMatrix,
    /// Position in `pattern.values` of the (node, slot-neighbour) entry.
    jac_pos: Vec<[u32; 9]>,
    symbolic: SymbolicLu,
}

fn three_point(a: f64, b: f64) -> ([f64; 3], [f64; 3]) {
    let d1 = [-b / (a * (a + b)), (b - a) / (a * b), a / (b * (a + b))];
    let d2 = [2.0 / (a * (a + b)), -2.0 / (a * b), 2.0 / (b * (a + b))];
    (d1, d2)
}

impl Grid {
    /// Builds the grid with lattice nodes at integer multiples of `h`.
    pub fn new(domain: DomainSpec, h: f64) -> Result<Arc<Self>> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Grid(alloc::format!("grid spacing must be positive, got {h}")));
        }
        let (lo, hi) = domain.bbox();
        let i0 = libm::floor(lo[0] / h) as i32 - 1;
        let j0 = libm::floor(lo[1] / h) as i32 - 1;
        let i1 = ceil(hi[0] / h) as i32 + 1;
        let j1 = ceil(hi[1] / h) as i32 + 1;
        let nx = (i1 - i0 + 1) as usize;
        let ny = (j1 - j0 + 1) as usize;
        if nx.saturating_mul(ny) > 50_000_000 {
            return Err(Error::Grid("lattice too large".into()));
        }
        let mut lookup = vec![NONE; nx * ny];
        let mut coords = Vec::new();
        let mut lattice = Vec::new();
        for j in j0..=j1 {
            for i in i0..=i1 {
                let x = [i as f64 * h, j as f64 * h];
                // Lattice points on ∂Ω up to rounding count as outside.
                if domain.level(x) < -INSIDE_TOL {
                    if i == i0 || i == i1 || j == j0 || j == j1 {
                        return Err(Error::Grid("stencil leaves the bounding box".into()));
                    }
                    lookup[(j - j0) as usize * nx + (i - i0) as usize] = coords.len() as u32;
                    coords.push(x);
                    lattice.push([i, j]);
                }
            }
        }
        let n = coords.len();
        if n == 0 {
            return Err(Error::Grid("no lattice node lies inside the domain".into()));
        }
        let find = |i: i32, j: i32| -> u32 {
            if i < i0 || i > i1 || j < j0 || j > j1 {
                NONE
            } else {
                lookup[(j - j0) as usize * nx + (i - i0) as usize]
            }
        };

        let mut stencils = Vec::with_capacity(n);
        let mut pins = Vec::with_capacity(n);
        let mut boundary_arms = Vec::new();
        for k in 0..n {
            let [i, j] = lattice[k];
            let mut nbr = [NONE; 9];
            nbr[0] = k as u32;
            let mut frac = [1.0; 8];
            let mut shortest: Option<(usize, f64)> = None;
            for s in 1..9 {
                let [di, dj] = OFFSETS[s - 1];
                let m = find(i + di, j + dj);
                nbr[s] = m;
                if m == NONE {
                    let d = [di as f64 * h, dj as f64 * h];
                    let raw = domain.crossing(coords[k], d)?;
                    if raw < MIN_ARM && shortest.is_none_or(|(_, r)| raw < r) {
                        shortest = Some((s, raw));
                    }
                    let t = raw.max(MIN_ARM);
                    frac[s - 1] = t;
                    let point = [coords[k][0] + t * d[0], coords[k][1] + t * d[1]];
                    boundary_arms.push(BoundaryArm {
                        node: k,
                        slot: s,
                        point,
                        normal: domain.normal(point),
                    });
                }
            }
            pins.push(shortest.map(|(slot, t)| Pin {
                slot,
                frac: t,
                far_frac: frac[OPPOSITE[slot] - 1],
            }));
            let mut weights = [[0.0; 9]; 5];
            let mut dir_d2 = [[0.0; 3]; 4];
            for dir in 0..4 {
                let (sm, sp) = (2 * dir + 1, 2 * dir + 2);
                let (d1, d2) = three_point(frac[sm - 1], frac[sp - 1]);
                dir_d2[dir] = d2;
                if dir < 2 {
                    let row = if dir == 0 { PX } else { PY };
                    let row2 = if dir == 0 { UXX } else { UYY };
                    weights[row][sm] = d1[0] / h;
                    weights[row][0] = d1[1] / h;
                    weights[row][sp] = d1[2] / h;
                    weights[row2][sm] = d2[0] / (h * h);
                    weights[row2][0] = d2[1] / (h * h);
                    weights[row2][sp] = d2[2] / (h * h);
                }
            }
            let c = 1.0 / (4.0 * h * h);
            weights[UXY][5] = c * dir_d2[2][0];
            weights[UXY][6] = c * dir_d2[2][2];
            weights[UXY][7] = -c * dir_d2[3][0];
            weights[UXY][8] = -c * dir_d2[3][2];
            weights[UXY][0] = c * (dir_d2[2][1] - dir_d2[3][1]);
            stencils.push(Stencil {
                nbr,
                frac,
                weights,
            });
        }

        let perm = nested_dissection(&lattice);
        let mut triplets = Vec::with_capacity(9 * n);
        for (k, st) in stencils.iter().enumerate() {
            for s in 0..9 {
                if let Some(m) = st.neighbour(s) {
                    triplets.push((perm[k], perm[m], 0.0));
                }
            }
        }
        let pattern = CscMatrix::from_triplets(n, &triplets);
        let mut jac_pos = vec![[NONE; 9]; n];
        for (k, st) in stencils.iter().enumerate() {
            for s in 0..9 {
                if let Some(m) = st.neighbour(s) {
                    jac_pos[k][s] = pattern
                        .position(perm[k], perm[m])
                        .expect("entry was inserted") as u32;
                }
            }
        }
        let symbolic = SymbolicLu::analyze(&pattern)?;

        Ok(Arc::new(Grid {
            domain,
            h,
            coords,
            lattice,
            stencils,
            pins,
            boundary_arms,
            perm,
            pattern,
            jac_pos,
            symbolic,
        }))
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coord(&self, node: usize) -> Point {
        self.coords[node]
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn lattice(&self, node: usize) -> [i32; 2] {
        self.lattice[node]
    }

    pub fn stencil(&self, node: usize) -> &Stencil {
        &self.stencils[node]
    }

    pub fn pin(&self, node: usize) -> Option<Pin> {
        self.pins[node]
    }

    pub fn is_pinned(&self, node: usize) -> bool {
        self.pins[node].is_some()
    }

    /// Value a pinned node must take given the current field.
    pub fn pin_target(&self, pin: &Pin, node: usize, values: &[f64], dirichlet: f64) -> f64 {
        let far = match self.stencils[node].neighbour(OPPOSITE[pin.slot]) {
            Some(m) => values[m],
            None => dirichlet,
        };
        let w = pin.far_weight();
        (1.0 - w) * dirichlet + w * far
    }

    pub fn boundary_arms(&self) -> &[BoundaryArm] {
        &self.boundary_arms
    }

    /// Nodes with at least one arm ending on `∂Ω`.
    pub fn is_band(&self, node: usize) -> bool {
        self.stencils[node].is_band()
    }

    /// End point of an arm: the neighbour node or the boundary crossing.
    pub fn arm_point(&self, node: usize, slot: usize) -> Point {
        if slot == 0 {
            return self.coords[node];
        }
        let [di, dj] = OFFSETS[slot - 1];
        let t = self.stencils[node].frac[slot - 1];
        let x = self.coords[node];
        [x[0] + t * di as f64 * self.h, x[1] + t * dj as f64 * self.h]
    }

    /// Node index → position in the factorization order.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn pattern(&self) -> &CscMatrix {
        &self.pattern
    }

    pub fn jacobian_position(&self, node: usize, slot: usize) -> Option<usize> {
        let p = self.jac_pos[node][slot];
        (p != NONE).then_some(p as usize)
    }

    pub fn symbolic(&self) -> &SymbolicLu {
        &self.symbolic
    }

    /// `(u_x, u_y, u_xx, u_yy, u_xy)` of `values` at `node`, with
    /// `boundary(point)` supplying the value at arm ends on `∂Ω`.
    pub fn derivatives_with(
        &self,
        node: usize,
        values: &[f64],
        boundary: impl Fn(Point) -> f64,
    ) -> [f64; 5] {
        let st = &self.stencils[node];
        let mut slot_vals = [0.0; 9];
        for (s, v) in slot_vals.iter_mut().enumerate() {
            *v = match st.neighbour(s) {
                Some(m) => values[m],
                None => boundary(self.arm_point(node, s)),
            };
        }
        let mut out = [0.0; 5];
        for (r, o) in out.iter_mut().enumerate() {
            *o = st.weights[r].iter().zip(&slot_vals).map(|(w, v)| w * v).sum();
        }
        out
    }

    /// One-sided derivative at the boundary end of an arm, along the arm's
    /// unit direction, from the quadratic through the three stencil points.
    pub fn boundary_slope(&self, arm: &BoundaryArm, values: &[f64], dirichlet: f64) -> f64 {
        let st = &self.stencils[arm.node];
        let opp = OPPOSITE[arm.slot];
        let b = st.frac[arm.slot - 1];
        let a = st.frac[opp - 1];
        let g_far = match st.neighbour(opp) {
            Some(m) => values[m],
            None => dirichlet,
        };
        let g0 = values[arm.node];
        let step = if arm.slot <= 4 { self.h } else { self.h * sqrt(2.0) };
        let d = b / (a * (a + b)) * g_far - (a + b) / (a * b) * g0 + (2.0 * b + a) / (b * (a + b)) * dirichlet;
        d / step
    }

    /// Unit direction of a slot's arm.
    pub fn slot_direction(slot: usize) -> Point {
        let [di, dj] = OFFSETS[slot - 1];
        let len = sqrt((di * di + dj * dj) as f64);
        [di as f64 / len, dj as f64 / len]
    }
}

fn nested_dissection(lattice: &[[i32; 2]]) -> Vec<usize> {
    let n = lattice.len();
    let mut order = Vec::with_capacity(n);
    let mut nodes: Vec<usize> = (0..n).collect();
    dissect(lattice, &mut nodes, &mut order);
    let mut perm = vec![0usize; n];
    for (pos, &node) in order.iter().enumerate() {
        perm[node] = pos;
    }
    perm
}

/// Orders `nodes` as: left part, right part, separator line. A full lattice
/// line separates a 9-point stencil.
fn dissect(lattice: &[[i32; 2]], nodes: &mut [usize], order: &mut Vec<usize>) {
    if nodes.len() <= 32 {
        order.extend_from_slice(nodes);
        return;
    }
    let mut lo = [i32::MAX; 2];
    let mut hi = [i32::MIN; 2];
    for &k in nodes.iter() {
        for d in 0..2 {
            lo[d] = lo[d].min(lattice[k][d]);
            hi[d] = hi[d].max(lattice[k][d]);
        }
    }
    let axis = if hi[0] - lo[0] >= hi[1] - lo[1] { 0 } else { 1 };
    if hi[axis] - lo[axis] < 2 {
        order.extend_from_slice(nodes);
        return;
    }
    nodes.sort_unstable_by_key(|&k| (lattice[k][axis], lattice[k][1 - axis]));
    let cut = lattice[nodes[nodes.len() / 2]][axis];
    let left_end = nodes.partition_point(|&k| lattice[k][axis] < cut);
    let right_start = nodes.partition_point(|&k| lattice[k][axis] <= cut);
    let (left, rest) = nodes.split_at_mut(left_end);
    let (sep, right) = rest.split_at_mut(right_start - left_end);
    dissect(lattice, left, order);
    dissect(lattice, right, order);
    order.extend_from_slice(sep);
}

/// Heights on the inside nodes of a grid with Dirichlet value `eps`.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
    pub eps: f64,
    pub sigma: f64,
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, eps: f64, sigma: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(ScalarField {
            grid,
            values,
            eps,
            sigma,
        })
    }

    pub fn from_fn(grid: Arc<Grid>, eps: f64, sigma: f64, f: impl Fn(Point) -> f64) -> Self {
        let values = grid.coords().iter().map(|&x| f(x)).collect();
        ScalarField {
            grid,
            values,
            eps,
            sigma,
        }
    }

    pub fn derivatives(&self, node: usize) -> [f64; 5] {
        let eps = self.eps;
        self.grid.derivatives_with(node, &self.values, |_| eps)
    }

    /// Discrete height, gradient and Hessian at an inside node.
    pub fn discretize(&self, node: usize) -> GraphSample {
        let [px, py, uxx, uyy, uxy] = self.derivatives(node);
        GraphSample {
            u: self.values[node],
            du: vec![px, py],
            d2u: vec![uxx, uxy, uxy, uyy],
        }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratics_are_differentiated_exactly() {
        let grid = Grid::new(DomainSpec::ellipse(1.0, 0.6).unwrap(), 1.0 / 16.0).unwrap();
        let q = |x: Point| 0.3 + 0.5 * x[0] - 0.2 * x[1] + 1.5 * x[0] * x[0] - 0.7 * x[0] * x[1]
            + 0.25 * x[1] * x[1];
        let vals: Vec<f64> = grid.coords().iter().map(|&x| q(x)).collect();
        for k in 0..grid.len() {
            let x = grid.coord(k);
            let d = grid.derivatives_with(k, &vals, q);
            let exact = [
                0.5 + 3.0 * x[0] - 0.7 * x[1],
                -0.2 - 0.7 * x[0] + 0.5 * x[1],
                3.0,
                0.5,
                -0.7,
            ];
            for r in 0..5 {
                assert!((d[r] - exact[r]).abs() < 1e-8, "node {k} row {r}: {d:?}");
            }
        }
    }

    #[test]
    fn pattern_is_symmetric_and_ordering_is_a_permutation() {
        let grid = Grid::new(DomainSpec::ball(1.0).unwrap(), 1.0 / 8.0).unwrap();
        let mut seen = vec![false; grid.len()];
        for &p in grid.perm() {
            assert!(!seen[p]);
            seen[p] = true;
        }
        let a = grid.pattern();
        for c in 0..a.n {
            for p in a.col_ptr[c]..a.col_ptr[c + 1] {
                assert!(a.position(c, a.row_idx[p]).is_some());
            }
        }
    }

    #[test]
    fn boundary_slope_of_a_quadratic_is_exact() {
        let grid = Grid::new(DomainSpec::ball(1.0).unwrap(), 0.1).unwrap();
        // u = 1 - |x|² vanishes on the unit circle.
        let vals: Vec<f64> = grid.coords().iter().map(|x| 1.0 - x[0] * x[0] - x[1] * x[1]).collect();
        for arm in grid.boundary_arms().iter().filter(|a| a.slot <= 4) {
            let e = Grid::slot_direction(arm.slot);
            let slope = grid.boundary_slope(arm, &vals, 0.0);
            let exact = -2.0 * (arm.point[0] * e[0] + arm.point[1] * e[1]);
            assert!((slope - exact).abs() < 1e-9);
        }
    }
}
