//! Nested grids refining towards the origin.
//!
//! Level `k` has spacing `h₀/2^k` and covers `[−n h_k, n h_k]²` in the
//! horizontal directions. The levels are coupled into a single linear
//! system: coarse nodes deep inside the next level copy the fine value, and
//! nodes on the faces of a fine level interpolate the coarse solution.

use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{merge_row, node_row, BoundaryData, Grid, GridOptions, GridSolution, Region, SparseSystem};
use crate::coeffs::CoefficientField;
use crate::error::{Error, Result};
use crate::geometry::{Domain, VectorField};
use crate::math;

/// One level of a [`Ladder`].
#[derive(Debug, Clone)]
pub struct LadderLevel {
    pub grid: Arc<Grid>,
    /// Half-width `n h` of the horizontal extent.
    pub half_width: f64,
}

/// A stack of grids with spacings `h₀, h₀/2, h₀/4, …`.
#[derive(Debug, Clone)]
pub struct Ladder {
    levels: Vec<LadderLevel>,
}

/// Solution on every level of a ladder.
#[derive(Debug, Clone)]
pub struct LadderSolution {
    pub levels: Vec<GridSolution>,
    pub residual: f64,
    pub iterations: usize,
}

impl Ladder {
    /// Build `count` levels, each `2n+1` nodes wide horizontally and reaching
    /// `n h_k` below the origin; the boxes are cut at height `top`.
    pub fn build(
        domain: &Domain,
        coarse_h: f64,
        half_nodes: usize,
        count: usize,
        top: f64,
        pinned: Option<Arc<Region>>,
        diagonals: bool,
    ) -> Result<Self> {
        if count == 0 {
            return Err(Error::param("count", "need at least one level"));
        }
        if half_nodes < 4 {
            return Err(Error::param("half_nodes", "need at least four nodes per half-width"));
        }
        let mut levels = Vec::with_capacity(count);
        let mut h = coarse_h;
        for k in 0..count {
            let w = half_nodes as f64 * h;
            let hi = top.min(w);
            let (origin, dims) = super::aligned_box([-w, -w, -w], [w, w, hi], h);
            let opts = GridOptions {
                pinned: pinned.clone(),
                faces_coupled: k > 0,
                diagonals,
            };
            let grid = Grid::build(domain, origin, h, dims, &opts)?;
            levels.push(LadderLevel {
                grid: Arc::new(grid),
                half_width: w,
            });
            h *= 0.5;
        }
        Ok(Ladder { levels })
    }

    pub fn levels(&self) -> &[LadderLevel] {
        &self.levels
    }

    fn in_core(&self, k: usize, x: &[f64]) -> bool {
        let c = 0.5 * self.levels[k].half_width;
        x[0].abs() <= c + 1e-12 && x[1].abs() <= c + 1e-12 && x[2] >= -c - 1e-12
    }

    fn node_at(grid: &Grid, x: &[f64]) -> Option<usize> {
        let o = grid.origin();
        let d = grid.dims();
        let mut node = [0usize; 3];
        for k in 0..3 {
            let t = (x[k] - o[k]) / grid.h();
            let r = math::round(t);
            if (t - r).abs() > 1e-6 || r < 0.0 || r as usize >= d[k] {
                return None;
            }
            node[k] = r as usize;
        }
        Some(grid.flatten(node))
    }

    /// Assemble the composite system and relax it to scaled residual `tol`.
    pub fn solve(
        &self,
        field: &CoefficientField,
        ell: &VectorField,
        data: &BoundaryData,
        tol: f64,
        max_iter: usize,
    ) -> Result<LadderSolution> {
        let mut offsets = Vec::with_capacity(self.levels.len());
        let mut unknown_of: Vec<u32> = Vec::new();
        let mut node_of: Vec<(usize, usize)> = Vec::new();
        for (k, lvl) in self.levels.iter().enumerate() {
            offsets.push(unknown_of.len());
            for idx in 0..lvl.grid.len() {
                if lvl.grid.kind(idx).is_unknown() {
                    unknown_of.push(node_of.len() as u32);
                    node_of.push((k, idx));
                } else {
                    unknown_of.push(u32::MAX);
                }
            }
        }
        let last = self.levels.len() - 1;
        let mut matrix = SparseSystem::new();
        let mut amat = [0.0; 9];
        let mut off = Vec::new();
        let mut mapped = Vec::new();
        for &(k, idx) in &node_of {
            let grid = &self.levels[k].grid;
            let kind = grid.kind(idx);
            let node = grid.unflatten(idx);
            let x = grid.coord(node);
            let base = offsets[k];
            off.clear();
            if k > 0 && grid.on_open_face(node) && !kind.is_dirichlet() {
                let coarse = &self.levels[k - 1].grid;
                let w = coarse.trilinear(&x).ok_or(Error::DanglingStencil { node })?;
                let mass: f64 = w
                    .iter()
                    .filter(|(j, _)| coarse.kind(*j).is_unknown())
                    .map(|(_, v)| v)
                    .sum();
                if mass < 1e-12 {
                    return Err(Error::DanglingStencil { node });
                }
                for (j, v) in w {
                    if v > 0.0 && coarse.kind(j).is_unknown() {
                        off.push((offsets[k - 1] + j, -v / mass));
                    }
                }
                merge_row(&off, &unknown_of, &mut mapped);
                matrix.push_row(1.0, &mapped, 0.0);
                continue;
            }
            if k < last && !kind.is_dirichlet() && self.in_core(k + 1, &x) {
                let fine = &self.levels[k + 1].grid;
                if let Some(j) = Self::node_at(fine, &x).filter(|&j| fine.kind(j).is_unknown()) {
                    off.push((offsets[k + 1] + j, -1.0));
                    merge_row(&off, &unknown_of, &mut mapped);
                    matrix.push_row(1.0, &mapped, 0.0);
                    continue;
                }
            }
            let (diag, rhs) = node_row(grid, field, ell, data, idx, &mut amat, &mut off)?;
            for e in off.iter_mut() {
                e.0 += base;
            }
            merge_row(&off, &unknown_of, &mut mapped);
            matrix.push_row(diag, &mapped, rhs);
        }
        if let Some(i) = matrix.m_matrix_violation() {
            let (k, idx) = node_of[i];
            return Err(Error::StencilNotMonotone {
                node: self.levels[k].grid.unflatten(idx),
            });
        }
        let widest = self
            .levels
            .iter()
            .map(|l| l.grid.dims().into_iter().max().unwrap_or(2))
            .max()
            .unwrap_or(2);
        let (x, out) = super::iterate(&matrix, widest, tol, max_iter)?;
        let mut levels = Vec::with_capacity(self.levels.len());
        for (k, lvl) in self.levels.iter().enumerate() {
            let mut values = alloc::vec![f64::NAN; lvl.grid.len()];
            for (idx, v) in values.iter_mut().enumerate() {
                let u = unknown_of[offsets[k] + idx];
                if u != u32::MAX {
                    *v = x[u as usize];
                }
            }
            levels.push(GridSolution::from_values(lvl.grid.clone(), values, out.residual, out.iterations));
        }
        Ok(LadderSolution {
            levels,
            residual: out.residual,
            iterations: out.iterations,
        })
    }
}

impl LadderSolution {
    /// Interpolate on the finest level whose box contains `x`.
    pub fn interpolate(&self, x: &[f64]) -> Option<f64> {
        self.levels.iter().rev().find_map(|s| {
            if s.grid().box_contains(x) {
                s.interpolate(x)
            } else {
                None
            }
        })
    }

    /// Index of the finest level whose box contains `x`.
    pub fn level_of(&self, x: &[f64]) -> Option<usize> {
        (0..self.levels.len()).rev().find(|&k| self.levels[k].grid().box_contains(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::presets;

    #[test]
    fn ladder_reproduces_constants() {
        let d = presets::halfspace(3);
        let ladder = Ladder::build(&d, 0.1, 8, 3, 0.0, None, false).unwrap();
        let ell = VectorField::vertical(3, 0.5).unwrap();
        let sol = ladder
            .solve(&CoefficientField::identity(3), &ell, &BoundaryData::dirichlet_constant(1.5), 1e-12, 200_000)
            .unwrap();
        for lvl in &sol.levels {
            for (_, _, v) in lvl.nodes() {
                assert!((v - 1.5).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn ladder_matches_linear_solution() {
        // u = 1 + z/2 solves Δu = 0 with ∂u/∂z = 1/2 on the plane
        let d = presets::halfspace(3);
        let ladder = Ladder::build(&d, 0.1, 8, 3, 0.0, None, false).unwrap();
        let ell = VectorField::vertical(3, 0.5).unwrap();
        let p = |x: &[f64]| 1.0 + 0.5 * x[2];
        let data = BoundaryData::default().with_far(Arc::new(p)).with_psi(Arc::new(|_: &[f64]| 0.5));
        let sol = ladder.solve(&CoefficientField::identity(3), &ell, &data, 1e-12, 200_000).unwrap();
        for lvl in &sol.levels {
            for (_, x, v) in lvl.nodes() {
                assert!((v - p(&x)).abs() < 1e-8, "{v} at {x:?}");
            }
        }
        let probe = [0.013, -0.021, -0.05];
        assert!((sol.interpolate(&probe).unwrap() - p(&probe)).abs() < 1e-8);
        assert_eq!(sol.level_of(&probe), Some(2));
    }
}
