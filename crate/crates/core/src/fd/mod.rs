//! Monotone finite differences for `Lu = g` in Ω, `u = Φ` on Γ₁ and
//! `∂u/∂ℓ = Ψ` on Γ₂.
//!
//! Interior rows use second differences along the axes and, for mixed
//! terms, along the face diagonals, weighted so that the matrix is an
//! M-matrix whenever `a(x)` is diagonally dominant. Γ₂ rows are the upwind
//! quotient `(u(x) − I[u](x − hℓ))/h` with trilinear interpolation `I`.

mod grid;
mod ladder;

use alloc::sync::Arc;
use alloc::vec::Vec;

pub use grid::{aligned_box, Grid, GridOptions, NodeKind, Region};
pub use ladder::{Ladder, LadderLevel, LadderSolution};

use crate::coeffs::CoefficientField;
use crate::error::{Error, Result};
use crate::geometry::{Domain, VectorField};
use crate::math;

pub type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Data of the mixed problem. Every field defaults to zero.
#[derive(Clone)]
pub struct BoundaryData {
    /// Dirichlet values on Γ₁.
    pub phi: Arc<ScalarFn>,
    /// Oblique derivative values on Γ₂.
    pub psi: Arc<ScalarFn>,
    /// Right-hand side `g` of `Lu = g`.
    pub rhs: Arc<ScalarFn>,
    /// Dirichlet values on the truncation faces of the box.
    pub far: Arc<ScalarFn>,
    /// Values on pinned nodes.
    pub pin: Arc<ScalarFn>,
}

impl core::fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("BoundaryData")
    }
}

fn zero() -> Arc<ScalarFn> {
    Arc::new(|_: &[f64]| 0.0)
}

fn constant(c: f64) -> Arc<ScalarFn> {
    Arc::new(move |_: &[f64]| c)
}

impl Default for BoundaryData {
    fn default() -> Self {
        BoundaryData {
            phi: zero(),
            psi: zero(),
            rhs: zero(),
            far: zero(),
            pin: zero(),
        }
    }
}

impl BoundaryData {
    /// All data zero.
    pub fn homogeneous() -> Self {
        Self::default()
    }

    /// `Φ ≡ c` on Γ₁ and on the truncation faces, everything else zero.
    pub fn dirichlet_constant(c: f64) -> Self {
        BoundaryData {
            phi: constant(c),
            far: constant(c),
            ..Self::default()
        }
    }

    pub fn with_phi(mut self, f: Arc<ScalarFn>) -> Self {
        self.phi = f;
        self
    }

    pub fn with_psi(mut self, f: Arc<ScalarFn>) -> Self {
        self.psi = f;
        self
    }

    pub fn with_rhs(mut self, f: Arc<ScalarFn>) -> Self {
        self.rhs = f;
        self
    }

    pub fn with_far(mut self, f: Arc<ScalarFn>) -> Self {
        self.far = f;
        self
    }

    pub fn with_pin(mut self, f: Arc<ScalarFn>) -> Self {
        self.pin = f;
        self
    }
}

/// Square sparse system `A x = b` in compressed rows with the diagonal kept
/// apart.
#[derive(Debug, Clone, Default)]
pub struct SparseSystem {
    diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    rhs: Vec<f64>,
}

impl SparseSystem {
    fn new() -> Self {
        SparseSystem {
            row_ptr: alloc::vec![0],
            ..Default::default()
        }
    }

    fn push_row(&mut self, diag: f64, off: &[(u32, f64)], rhs: f64) {
        self.diag.push(diag);
        for &(c, v) in off {
            self.cols.push(c);
            self.vals.push(v);
        }
        self.row_ptr.push(self.cols.len());
        self.rhs.push(rhs);
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Off-diagonal `(column, value)` entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().map(|&c| c as usize).zip(self.vals[r].iter().copied())
    }

    /// First row breaking the M-matrix pattern: positive diagonal,
    /// nonpositive off-diagonals, weak diagonal dominance.
    pub fn m_matrix_violation(&self) -> Option<usize> {
        (0..self.len()).find(|&i| {
            let d = self.diag[i];
            let mut sum = 0.0;
            for (_, v) in self.row(i) {
                if v > 0.0 {
                    return true;
                }
                sum -= v;
            }
            !(d > 0.0) || sum > d * (1.0 + 1e-12)
        })
    }

    /// `max_i |b_i − (A x)_i| / a_ii`.
    pub fn scaled_residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.len() {
            let mut r = self.rhs[i] - self.diag[i] * x[i];
            for (c, v) in self.row(i) {
                r -= v * x[c];
            }
            worst = worst.max((r / self.diag[i]).abs());
        }
        worst
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.diag[i] * x[i] + self.row(i).map(|(c, v)| v * x[c]).sum::<f64>())
            .collect()
    }

    /// Successive over-relaxation in row order from `x`, until the scaled
    /// residual drops below `tol`.
    pub fn sor(&self, x: &mut [f64], omega: f64, tol: f64, max_iter: usize) -> Result<SorOutcome> {
        let start = x.to_vec();
        let mut omega = omega.clamp(1.0, 1.99);
        let mut initial = self.scaled_residual(x);
        if initial <= tol {
            return Ok(SorOutcome {
                residual: initial,
                iterations: 0,
                omega,
            });
        }
        let mut it = 0;
        loop {
            let mut worst: f64 = 0.0;
            for i in 0..self.len() {
                let r0 = self.row_ptr[i];
                let r1 = self.row_ptr[i + 1];
                let mut r = self.rhs[i] - self.diag[i] * x[i];
                for k in r0..r1 {
                    r -= self.vals[k] * x[self.cols[k] as usize];
                }
                let dx = r / self.diag[i];
                worst = worst.max(dx.abs());
                x[i] += omega * dx;
            }
            it += 1;
            if !worst.is_finite() || worst > 1e6 * initial.max(1.0) {
                omega = 1.0 + 0.5 * (omega - 1.0);
                x.copy_from_slice(&start);
                initial = self.scaled_residual(x);
                continue;
            }
            if worst <= tol {
                let res = self.scaled_residual(x);
                if res <= tol {
                    return Ok(SorOutcome {
                        residual: res,
                        iterations: it,
                        omega,
                    });
                }
            }
            if it >= max_iter {
                return Err(Error::NoConvergence {
                    residual: self.scaled_residual(x),
                    iterations: it,
                });
            }
        }
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = self.diag[i] * x[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *o = acc;
        }
    }

    fn scaled_max(&self, r: &[f64]) -> f64 {
        r.iter().zip(&self.diag).fold(0.0f64, |m, (r, d)| m.max((r / d).abs()))
    }

    /// Jacobi-preconditioned BiCGSTAB from `x`, stopping on the same scaled
    /// residual as [`SparseSystem::sor`]. Restarts on breakdown.
    pub fn bicgstab(&self, x: &mut [f64], tol: f64, max_iter: usize) -> Result<SorOutcome> {
        let n = self.len();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        let mut r = alloc::vec![0.0; n];
        let mut scratch = alloc::vec![0.0; n];
        let (mut p, mut v, mut y, mut s, mut z, mut t) = (
            alloc::vec![0.0; n],
            alloc::vec![0.0; n],
            alloc::vec![0.0; n],
            alloc::vec![0.0; n],
            alloc::vec![0.0; n],
            alloc::vec![0.0; n],
        );
        let true_residual = |x: &[f64], r: &mut [f64], scratch: &mut [f64]| {
            self.apply_into(x, scratch);
            for i in 0..n {
                r[i] = self.rhs[i] - scratch[i];
            }
        };
        let mut it = 0;
        'restart: loop {
            true_residual(x, &mut r, &mut scratch);
            let res = self.scaled_max(&r);
            if res <= tol {
                return Ok(SorOutcome {
                    residual: res,
                    iterations: it,
                    omega: 1.0,
                });
            }
            let shadow = r.clone();
            let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
            p.iter_mut().for_each(|e| *e = 0.0);
            v.iter_mut().for_each(|e| *e = 0.0);
            loop {
                if it >= max_iter {
                    true_residual(x, &mut r, &mut scratch);
                    return Err(Error::NoConvergence {
                        residual: self.scaled_max(&r),
                        iterations: it,
                    });
                }
                it += 1;
                let rho_next = dot(&shadow, &r);
                if rho_next.abs() < 1e-300 {
                    continue 'restart;
                }
                let beta = (rho_next / rho) * (alpha / omega);
                rho = rho_next;
                for i in 0..n {
                    p[i] = r[i] + beta * (p[i] - omega * v[i]);
                    y[i] = p[i] / self.diag[i];
                }
                self.apply_into(&y, &mut v);
                let sv = dot(&shadow, &v);
                if sv.abs() < 1e-300 {
                    continue 'restart;
                }
                alpha = rho / sv;
                for i in 0..n {
                    x[i] += alpha * y[i];
                    s[i] = r[i] - alpha * v[i];
                }
                if self.scaled_max(&s) <= tol {
                    continue 'restart;
                }
                for i in 0..n {
                    z[i] = s[i] / self.diag[i];
                }
                self.apply_into(&z, &mut t);
                let tt = dot(&t, &t);
                if tt <= 0.0 {
                    continue 'restart;
                }
                omega = dot(&t, &s) / tt;
                if omega == 0.0 || !omega.is_finite() {
                    continue 'restart;
                }
                for i in 0..n {
                    x[i] += omega * z[i];
                    r[i] = s[i] - omega * t[i];
                }
                if self.scaled_max(&r) <= tol {
                    continue 'restart;
                }
            }
        }
    }
}

/// Summary of an iterative solve; `omega` is 1 for BiCGSTAB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SorOutcome {
    pub residual: f64,
    pub iterations: usize,
    pub omega: f64,
}

/// The over-relaxation factor `2/(1 + sin(π/N))` of a model problem with
/// `N` nodes along the longest axis.
pub fn default_omega(n: usize) -> f64 {
    2.0 / (1.0 + math::sin(core::f64::consts::PI / n.max(2) as f64))
}

/// The assembled system of one grid.
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    grid: Arc<Grid>,
    matrix: SparseSystem,
    /// Unknown index of each grid node (`u32::MAX` for exterior nodes).
    unknown_of: Vec<u32>,
    node_of: Vec<u32>,
}

impl DiscreteSystem {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn matrix(&self) -> &SparseSystem {
        &self.matrix
    }

    pub fn unknown_of(&self, node: usize) -> Option<usize> {
        let u = self.unknown_of[node];
        (u != u32::MAX).then_some(u as usize)
    }

    pub fn node_of(&self, unknown: usize) -> usize {
        self.node_of[unknown] as usize
    }

    /// Apply the assembled rows to nodal values, returning one value per
    /// unknown (the discrete operator including boundary rows).
    pub fn apply_rows(&self, nodal: &[f64]) -> Vec<f64> {
        let x: Vec<f64> = self.node_of.iter().map(|&n| nodal[n as usize]).collect();
        self.matrix.apply(&x)
    }
}

/// Build the row of node `idx` into `off` with grid-node column indices;
/// returns `(diag, rhs)`.
pub(crate) fn node_row(
    grid: &Grid,
    field: &CoefficientField,
    ell: &VectorField,
    data: &BoundaryData,
    idx: usize,
    amat: &mut [f64],
    off: &mut Vec<(usize, f64)>,
) -> Result<(f64, f64)> {
    off.clear();
    let node = grid.unflatten(idx);
    let x = grid.coord(node);
    let h = grid.h();
    match grid.kind(idx) {
        NodeKind::Gamma1 => Ok((1.0, (data.phi)(&x))),
        NodeKind::Truncation => Ok((1.0, (data.far)(&x))),
        NodeKind::Pinned => Ok((1.0, (data.pin)(&x))),
        NodeKind::Exterior => Err(Error::param("node", "exterior nodes have no row")),
        NodeKind::Interior => {
            field.matrix(&x, amat);
            let inv_h2 = 1.0 / (h * h);
            let mut diag = 0.0;
            let mut push = |off_k: [i64; 3], w: f64, off: &mut Vec<(usize, f64)>| -> Result<()> {
                if w == 0.0 {
                    return Ok(());
                }
                for sign in [1i64, -1] {
                    let o = [sign * off_k[0], sign * off_k[1], sign * off_k[2]];
                    let j = grid.offset(node, o).ok_or(Error::DanglingStencil { node })?;
                    if grid.kind(j) == NodeKind::Exterior {
                        return Err(Error::DanglingStencil { node });
                    }
                    off.push((j, -w * inv_h2));
                }
                diag += 2.0 * w * inv_h2;
                Ok(())
            };
            for i in 0..3 {
                let mut axis = a_ii_slack(amat, i);
                let scale = amat[i * 3 + i].abs().max(1e-300);
                if axis < 0.0 {
                    if axis < -1e-12 * scale {
                        return Err(Error::StencilNotMonotone { node });
                    }
                    axis = 0.0;
                }
                let mut e = [0i64; 3];
                e[i] = 1;
                push(e, axis, off)?;
            }
            for i in 0..3 {
                for j in i + 1..3 {
                    let aij = amat[i * 3 + j];
                    if aij != 0.0 {
                        let mut e = [0i64; 3];
                        e[i] = 1;
                        e[j] = if aij > 0.0 { 1 } else { -1 };
                        push(e, aij.abs(), off)?;
                    }
                }
            }
            Ok((diag, (data.rhs)(&x)))
        }
        NodeKind::Gamma2 => {
            let mut l = [0.0; 3];
            ell.direction(&x, &mut l);
            let foot = [x[0] - h * l[0], x[1] - h * l[1], x[2] - h * l[2]];
            let weights = grid.trilinear(&foot).ok_or(Error::FootOutside { node })?;
            let inv_h = 1.0 / h;
            let mut diag = inv_h;
            for (j, w) in weights {
                if w <= 1e-14 {
                    continue;
                }
                if grid.kind(j) == NodeKind::Exterior {
                    return Err(Error::FootOutside { node });
                }
                if j == idx {
                    diag -= w * inv_h;
                } else {
                    off.push((j, -w * inv_h));
                }
            }
            if !(diag > 1e-12 * inv_h) {
                return Err(Error::FootOutside { node });
            }
            Ok((diag, (data.psi)(&x)))
        }
    }
}

/// `a_ii − Σ_{j≠i} |a_ij|`.
fn a_ii_slack(a: &[f64], i: usize) -> f64 {
    let mut s = a[i * 3 + i];
    for j in 0..3 {
        if j != i {
            s -= a[i * 3 + j].abs();
        }
    }
    s
}

/// Assemble the rows of every non-exterior node of `grid`.
pub fn assemble(
    domain: &Domain,
    field: &CoefficientField,
    grid: Arc<Grid>,
    ell: &VectorField,
    data: &BoundaryData,
) -> Result<DiscreteSystem> {
    if domain.dim() != 3 || field.dim() != 3 {
        return Err(Error::Dimension {
            dim: field.dim(),
            expected: "three-dimensional domain and field",
        });
    }
    let total = grid.len();
    let mut unknown_of = alloc::vec![u32::MAX; total];
    let mut node_of = Vec::new();
    for idx in 0..total {
        if grid.kind(idx).is_unknown() {
            unknown_of[idx] = node_of.len() as u32;
            node_of.push(idx as u32);
        }
    }
    let mut matrix = SparseSystem::new();
    let mut amat = [0.0; 9];
    let mut off = Vec::new();
    let mut mapped: Vec<(u32, f64)> = Vec::new();
    for &idx in &node_of {
        let (diag, rhs) = node_row(&grid, field, ell, data, idx as usize, &mut amat, &mut off)?;
        merge_row(&off, &unknown_of, &mut mapped);
        matrix.push_row(diag, &mapped, rhs);
    }
    Ok(DiscreteSystem {
        grid,
        matrix,
        unknown_of,
        node_of,
    })
}

/// Map node columns to unknown columns and merge duplicates.
pub(crate) fn merge_row(off: &[(usize, f64)], unknown_of: &[u32], out: &mut Vec<(u32, f64)>) {
    out.clear();
    for &(j, v) in off {
        let c = unknown_of[j];
        match out.iter_mut().find(|e| e.0 == c) {
            Some(e) => e.1 += v,
            None => out.push((c, v)),
        }
    }
}

/// Solver settings; the defaults are tolerance `1e-10` and `10⁶` sweeps.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: 1_000_000,
        }
    }
}

/// Nodal values on a grid (NaN at exterior nodes).
#[derive(Debug, Clone)]
pub struct GridSolution {
    grid: Arc<Grid>,
    values: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// BiCGSTAB with SOR as the fallback when the Krylov iteration stalls.
pub(crate) fn iterate(matrix: &SparseSystem, widest: usize, tol: f64, max_iter: usize) -> Result<(Vec<f64>, SorOutcome)> {
    let mut x = alloc::vec![0.0; matrix.len()];
    if let Ok(out) = matrix.bicgstab(&mut x, tol, max_iter.min(100 * widest.max(10))) {
        return Ok((x, out));
    }
    x.iter_mut().for_each(|v| *v = 0.0);
    let out = matrix.sor(&mut x, default_omega(widest), tol, max_iter)?;
    Ok((x, out))
}

/// Solve the system to scaled residual `tol` from a zero start.
pub fn solve(system: &DiscreteSystem, tol: f64, max_iter: usize) -> Result<GridSolution> {
    if let Some(i) = system.matrix.m_matrix_violation() {
        return Err(Error::StencilNotMonotone {
            node: system.grid.unflatten(system.node_of(i)),
        });
    }
    let dims = system.grid.dims();
    let (x, out) = iterate(&system.matrix, dims[0].max(dims[1]).max(dims[2]), tol, max_iter)?;
    Ok(GridSolution::from_unknowns(system, &x, out.residual, out.iterations))
}

impl GridSolution {
    pub(crate) fn from_unknowns(system: &DiscreteSystem, x: &[f64], residual: f64, iterations: usize) -> Self {
        let mut values = alloc::vec![f64::NAN; system.grid.len()];
        for (u, &node) in system.node_of.iter().enumerate() {
            values[node as usize] = x[u];
        }
        GridSolution {
            grid: system.grid.clone(),
            values,
            residual,
            iterations,
        }
    }

    pub(crate) fn from_values(grid: Arc<Grid>, values: Vec<f64>, residual: f64, iterations: usize) -> Self {
        GridSolution {
            grid,
            values,
            residual,
            iterations,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Nodes of Ω̄ on the grid with their values.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, [f64; 3], f64)> + '_ {
        (0..self.grid.len())
            .filter(|&i| self.grid.kind(i).is_unknown())
            .map(|i| (i, self.grid.coord_of(i), self.values[i]))
    }

    /// Trilinear interpolation at `x`, renormalised over the non-exterior
    /// corners of the cell. `None` if `x` is outside the box or every corner
    /// is exterior.
    pub fn interpolate(&self, x: &[f64]) -> Option<f64> {
        let w = self.grid.trilinear(x)?;
        let mut acc = 0.0;
        let mut mass = 0.0;
        for (j, wt) in w {
            if wt > 0.0 && self.grid.kind(j).is_unknown() {
                acc += wt * self.values[j];
                mass += wt;
            }
        }
        (mass > 1e-12).then(|| acc / mass)
    }

    /// Largest nodal value over the nodes of Ω̄ inside `region`.
    pub fn sup_on(&self, region: impl Fn(&[f64]) -> bool) -> Result<f64> {
        self.extremum_on(region, f64::max, f64::NEG_INFINITY)
    }

    /// Smallest nodal value over the nodes of Ω̄ inside `region`.
    pub fn inf_on(&self, region: impl Fn(&[f64]) -> bool) -> Result<f64> {
        self.extremum_on(region, f64::min, f64::INFINITY)
    }

    fn extremum_on(&self, region: impl Fn(&[f64]) -> bool, pick: fn(f64, f64) -> f64, start: f64) -> Result<f64> {
        let mut best = start;
        let mut any = false;
        for (_, x, v) in self.nodes() {
            if region(&x) {
                best = pick(best, v);
                any = true;
            }
        }
        if any {
            Ok(best)
        } else {
            Err(Error::Empty("no grid node in the region"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::presets;

    fn halfspace_grid(h: f64, depth: f64) -> (Domain, Arc<Grid>) {
        let d = presets::halfspace(3);
        let (o, dims) = aligned_box([-0.5, -0.5, -depth], [0.5, 0.5, 0.0], h);
        let g = Grid::build(&d, o, h, dims, &GridOptions::default()).unwrap();
        (d, Arc::new(g))
    }

    #[test]
    fn identity_gives_seven_point_rows() {
        let (d, g) = halfspace_grid(0.125, 0.5);
        let ell = VectorField::vertical(3, 0.5).unwrap();
        let sys = assemble(&d, &CoefficientField::identity(3), g.clone(), &ell, &BoundaryData::default()).unwrap();
        let node = g.flatten([4, 4, 2]);
        let u = sys.unknown_of(node).unwrap();
        let h2 = 0.125 * 0.125;
        assert!((sys.matrix().diag()[u] - 6.0 / h2).abs() < 1e-9);
        let offs: Vec<(usize, f64)> = sys.matrix().row(u).collect();
        assert_eq!(offs.len(), 6);
        assert!(offs.iter().all(|&(_, v)| (v + 1.0 / h2).abs() < 1e-9));
    }

    #[test]
    fn diagonal_field_row() {
        let (d, g) = halfspace_grid(0.125, 0.5);
        let ell = VectorField::vertical(3, 0.5).unwrap();
        let f = CoefficientField::diagonal(alloc::vec![1.0, 1.0, 4.0]).unwrap();
        let sys = assemble(&d, &f, g.clone(), &ell, &BoundaryData::default()).unwrap();
        let u = sys.unknown_of(g.flatten([4, 4, 2])).unwrap();
        assert!((sys.matrix().diag()[u] - 12.0 / (0.125 * 0.125)).abs() < 1e-9);
    }

    #[test]
    fn flat_oblique_row_is_upwind() {
        let (d, g) = halfspace_grid(0.125, 0.5);
        let ell = VectorField::vertical(3, 0.5).unwrap();
        let sys = assemble(&d, &CoefficientField::identity(3), g.clone(), &ell, &BoundaryData::default()).unwrap();
        let top = g.flatten([4, 4, 4]);
        assert_eq!(g.kind(top), NodeKind::Gamma2);
        let u = sys.unknown_of(top).unwrap();
        assert!((sys.matrix().diag()[u] - 8.0).abs() < 1e-12);
        let offs: Vec<(usize, f64)> = sys.matrix().row(u).collect();
        assert_eq!(offs.len(), 1);
        assert_eq!(sys.node_of(offs[0].0), g.flatten([4, 4, 3]));
        assert!((offs[0].1 + 8.0).abs() < 1e-12);
    }

    #[test]
    fn non_dominant_field_is_rejected() {
        let (d, g) = halfspace_grid(0.25, 0.5);
        let ell = VectorField::vertical(3, 0.5).unwrap();
        let f = CoefficientField::full(3, alloc::vec![1.0, 0.9, 0.9, 0.9, 1.0, 0.0, 0.9, 0.0, 1.0]).unwrap();
        let err = assemble(&d, &f, g, &ell, &BoundaryData::default()).unwrap_err();
        assert!(matches!(err, Error::StencilNotMonotone { .. }));
    }

    #[test]
    fn constants_solve_the_homogeneous_problem() {
        let (d, g) = halfspace_grid(0.125, 0.5);
        let ell = VectorField::vertical(3, 0.5).unwrap();
        let sys = assemble(&d, &CoefficientField::identity(3), g, &ell, &BoundaryData::dirichlet_constant(2.5)).unwrap();
        let sol = solve(&sys, 1e-12, 100_000).unwrap();
        for (_, _, v) in sol.nodes() {
            assert!((v - 2.5).abs() < 1e-9);
        }
        assert!((sol.sup_on(|_| true).unwrap() - 2.5).abs() < 1e-9);
        assert!(sol.sup_on(|x| x[0] > 10.0).is_err());
    }

    #[test]
    fn mixed_terms_are_consistent_on_quadratics() {
        let d = presets::halfspace(3);
        let h = 0.1;
        let (o, dims) = aligned_box([-0.5, -0.5, -1.0], [0.5, 0.5, 0.0], h);
        let opts = GridOptions {
            diagonals: true,
            ..Default::default()
        };
        let g = Arc::new(Grid::build(&d, o, h, dims, &opts).unwrap());
        let a = [2.0, 0.5, -0.3, 0.5, 1.5, 0.4, -0.3, 0.4, 1.0];
        let f = CoefficientField::full(3, a.to_vec()).unwrap();
        let ell = VectorField::vertical(3, 0.5).unwrap();
        let sys = assemble(&d, &f, g.clone(), &ell, &BoundaryData::default()).unwrap();
        // p(x) = xᵀBx/2 with symmetric B; −Σ a_ij D_ij p = −Σ a_ij B_ij
        let b = [1.0, 0.3, -0.7, 0.3, -2.0, 0.5, -0.7, 0.5, 0.8];
        let target: f64 = -(0..9).map(|k| a[k] * b[k]).sum::<f64>();
        let nodal: Vec<f64> = (0..g.len())
            .map(|i| {
                let x = g.coord_of(i);
                let mut acc = 0.0;
                for r in 0..3 {
                    for c in 0..3 {
                        acc += 0.5 * x[r] * b[r * 3 + c] * x[c];
                    }
                }
                acc
            })
            .collect();
        let applied = sys.apply_rows(&nodal);
        let mut checked = 0;
        for (u, v) in applied.iter().enumerate() {
            if g.kind(sys.node_of(u)) == NodeKind::Interior {
                assert!((v - target).abs() < 1e-9, "{v} vs {target}");
                checked += 1;
            }
        }
        assert!(checked > 100);
        assert!(sys.matrix().m_matrix_violation().is_none());
    }

    #[test]
    fn oblique_rows_are_first_order_consistent() {
        let d = presets::halfspace(3);
        let h = 0.05;
        let (o, dims) = aligned_box([-0.5, -0.5, -0.5], [0.5, 0.5, 0.0], h);
        let g = Arc::new(Grid::build(&d, o, h, dims, &GridOptions::default()).unwrap());
        let ell = VectorField::constant(&[0.3, -0.2, 1.0], 0.2).unwrap();
        let sys = assemble(&d, &CoefficientField::identity(3), g.clone(), &ell, &BoundaryData::default()).unwrap();
        let c = [0.7, -1.1, 0.4];
        let nodal: Vec<f64> = (0..g.len()).map(|i| math::dot(&g.coord_of(i), &c)).collect();
        let applied = sys.apply_rows(&nodal);
        let mut l = [0.0; 3];
        ell.direction(&[0.0; 3], &mut l);
        let exact = math::dot(&c, &l);
        for (u, v) in applied.iter().enumerate() {
            if g.kind(sys.node_of(u)) == NodeKind::Gamma2 {
                // trilinear interpolation reproduces linear functions exactly
                assert!((v - exact).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn reflection_solution_is_reproduced() {
        // p = x² − z² is harmonic with ∂p/∂z = 0 on z = 0
        let d = presets::halfspace(3);
        let h = 1.0 / 16.0;
        let (o, dims) = aligned_box([-0.5, -0.5, -1.0], [0.5, 0.5, 0.0], h);
        let g = Arc::new(Grid::build(&d, o, h, dims, &GridOptions::default()).unwrap());
        let ell = VectorField::vertical(3, 0.5).unwrap();
        let p = |x: &[f64]| x[0] * x[0] - x[2] * x[2];
        let data = BoundaryData::default().with_far(Arc::new(p)).with_phi(Arc::new(p));
        let sys = assemble(&d, &CoefficientField::identity(3), g, &ell, &data).unwrap();
        let sol = solve(&sys, 1e-12, 100_000).unwrap();
        let worst = sol.nodes().map(|(_, x, v)| (v - p(&x)).abs()).fold(0.0, f64::max);
        assert!(worst < 2.0 * h, "{worst}");
    }

    #[test]
    fn krylov_and_relaxation_agree() {
        let d = presets::halfspace(3);
        let h = 1.0 / 12.0;
        let (o, dims) = aligned_box([-0.5, -0.5, -1.0], [0.5, 0.5, 0.0], h);
        let g = Arc::new(Grid::build(&d, o, h, dims, &GridOptions::default()).unwrap());
        let ell = VectorField::constant(&[0.3, -0.2, 1.0], 0.3).unwrap();
        let data = BoundaryData::default()
            .with_far(Arc::new(|x: &[f64]| 1.0 + x[0]))
            .with_psi(Arc::new(|x: &[f64]| x[1]))
            .with_rhs(Arc::new(|x: &[f64]| x[2] * x[2]));
        let sys = assemble(&d, &CoefficientField::identity(3), g, &ell, &data).unwrap();
        let m = sys.matrix();
        let mut a = alloc::vec![0.0; m.len()];
        let mut b = alloc::vec![0.0; m.len()];
        m.bicgstab(&mut a, 1e-12, 10_000).unwrap();
        m.sor(&mut b, 1.8, 1e-12, 100_000).unwrap();
        let gap = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-9, "{gap}");
        assert!(m.scaled_residual(&a) <= 1e-12);
    }
}
