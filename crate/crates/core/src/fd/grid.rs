use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{Domain, PointClass};
use crate::math;

/// Role of a grid node in the discrete problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Interior,
    /// Dirichlet node on Γ₁.
    Gamma1,
    /// Oblique-derivative node on Γ₂.
    Gamma2,
    /// Node on the faces of the bounding box, carrying far-field Dirichlet data.
    Truncation,
    /// Node inside a region where the solution is prescribed.
    Pinned,
    Exterior,
}

impl NodeKind {
    pub fn is_unknown(self) -> bool {
        self != NodeKind::Exterior
    }

    pub fn is_dirichlet(self) -> bool {
        matches!(self, NodeKind::Gamma1 | NodeKind::Truncation | NodeKind::Pinned)
    }
}

pub type Region = dyn Fn(&[f64]) -> bool + Send + Sync;

/// A uniform box grid in ℝ³ with nodes `origin + h·(i, j, k)`.
#[derive(Clone)]
pub struct Grid {
    origin: [f64; 3],
    h: f64,
    dims: [usize; 3],
    kinds: Vec<NodeKind>,
}

impl core::fmt::Debug for Grid {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Grid")
            .field("origin", &self.origin)
            .field("h", &self.h)
            .field("dims", &self.dims)
            .finish_non_exhaustive()
    }
}

/// Options for [`Grid::build`].
#[derive(Clone, Default)]
pub struct GridOptions {
    /// Nodes of Ω inside this region become [`NodeKind::Pinned`].
    pub pinned: Option<Arc<Region>>,
    /// Treat the box faces as interior rather than truncation nodes (used by
    /// fine levels of a ladder, whose faces are coupled to a coarser level).
    pub faces_coupled: bool,
    /// Also repair nodes whose face-diagonal neighbours leave Ω; needed when
    /// the coefficient field has mixed terms.
    pub diagonals: bool,
}

impl Grid {
    /// Classify the nodes of the box `origin + h·[0, dims)` against `domain`
    /// with tolerance `h/2`.
    ///
    /// Nodes that are within tolerance of both Γ₁ and Γ₂ are Dirichlet nodes.
    /// An interior node whose stencil reaches outside Ω is reassigned: to Γ₁
    /// if Γ₁ lies within a diagonal step, otherwise to Γ₂ if it sits under
    /// the graph patch; failing both the grid is rejected.
    pub fn build(domain: &Domain, origin: [f64; 3], h: f64, dims: [usize; 3], opts: &GridOptions) -> Result<Self> {
        if domain.dim() != 3 {
            return Err(Error::Dimension {
                dim: domain.dim(),
                expected: "the finite-difference grid is three-dimensional",
            });
        }
        if !(h > 0.0) {
            return Err(Error::param("h", "must be positive"));
        }
        if dims.iter().any(|&d| d < 3) {
            return Err(Error::param("dims", "need at least three nodes per axis"));
        }
        let mut grid = Grid {
            origin,
            h,
            dims,
            kinds: Vec::new(),
        };
        let tol = h / 2.0;
        let total = dims[0] * dims[1] * dims[2];
        let mut kinds = Vec::with_capacity(total);
        for idx in 0..total {
            let node = grid.unflatten(idx);
            let x = grid.coord(node);
            let class = match domain.classify(&x, tol) {
                Ok(c) => c,
                Err(Error::AmbiguousBoundary { .. }) => PointClass::OnGamma1,
                Err(e) => return Err(e),
            };
            let on_side = !opts.faces_coupled && grid.on_side(node);
            let on_face = !opts.faces_coupled && grid.on_face(node);
            let kind = match class {
                PointClass::OnGamma1 => NodeKind::Gamma1,
                PointClass::Exterior => NodeKind::Exterior,
                PointClass::Interior | PointClass::OnGamma2 => {
                    if opts.pinned.as_ref().is_some_and(|p| p(&x)) {
                        NodeKind::Pinned
                    } else if class == PointClass::OnGamma2 && !on_side {
                        NodeKind::Gamma2
                    } else if on_face {
                        NodeKind::Truncation
                    } else if class == PointClass::OnGamma2 {
                        NodeKind::Gamma2
                    } else {
                        NodeKind::Interior
                    }
                }
            };
            kinds.push(kind);
        }
        grid.kinds = kinds;
        if opts.faces_coupled {
            for idx in 0..total {
                let node = grid.unflatten(idx);
                if grid.on_side(node) && grid.kinds[idx] == NodeKind::Gamma2 {
                    // oblique rows need a foot inside the box; faces are
                    // coupled rows in a ladder and are handled there
                    grid.kinds[idx] = NodeKind::Interior;
                }
            }
        }
        grid.repair_dangling(domain, opts)?;
        Ok(grid)
    }

    fn repair_dangling(&mut self, domain: &Domain, opts: &GridOptions) -> Result<()> {
        let h = self.h;
        let total = self.kinds.len();
        let reach = h * math::sqrt(3.0);
        for idx in 0..total {
            if self.kinds[idx] != NodeKind::Interior {
                continue;
            }
            let node = self.unflatten(idx);
            if opts.faces_coupled && self.on_open_face(node) {
                continue;
            }
            let reach_set = if opts.diagonals { &NEIGHBOURS[..] } else { &NEIGHBOURS[..6] };
            let dangling = reach_set.iter().any(|off| match self.offset(node, *off) {
                Some(j) => self.kinds[j] == NodeKind::Exterior,
                None => true,
            });
            if !dangling {
                continue;
            }
            let x = self.coord(node);
            if domain.gamma1().distance(&x) <= reach {
                self.kinds[idx] = NodeKind::Gamma1;
            } else if math::norm(&x[..2]) <= domain.patch_radius()
                && domain.height_above(&x) - x[2] <= 2.0 * h
            {
                self.kinds[idx] = NodeKind::Gamma2;
            } else {
                return Err(Error::DanglingStencil { node });
            }
        }
        Ok(())
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn kind(&self, idx: usize) -> NodeKind {
        self.kinds[idx]
    }

    #[inline]
    pub fn flatten(&self, node: [usize; 3]) -> usize {
        node[0] + self.dims[0] * (node[1] + self.dims[1] * node[2])
    }

    #[inline]
    pub fn unflatten(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let rest = idx / self.dims[0];
        [i, rest % self.dims[1], rest / self.dims[1]]
    }

    #[inline]
    pub fn coord(&self, node: [usize; 3]) -> [f64; 3] {
        [
            self.origin[0] + self.h * node[0] as f64,
            self.origin[1] + self.h * node[1] as f64,
            self.origin[2] + self.h * node[2] as f64,
        ]
    }

    pub fn coord_of(&self, idx: usize) -> [f64; 3] {
        self.coord(self.unflatten(idx))
    }

    pub fn on_face(&self, node: [usize; 3]) -> bool {
        (0..3).any(|k| node[k] == 0 || node[k] + 1 == self.dims[k])
    }

    /// Whether the node lies on one of the four vertical faces.
    pub fn on_side(&self, node: [usize; 3]) -> bool {
        (0..2).any(|k| node[k] == 0 || node[k] + 1 == self.dims[k])
    }

    /// Whether the node lies on a vertical face or the bottom face.
    pub fn on_open_face(&self, node: [usize; 3]) -> bool {
        self.on_side(node) || node[2] == 0
    }

    /// Flat index of `node + off`, if it lies in the box.
    #[inline]
    pub fn offset(&self, node: [usize; 3], off: [i64; 3]) -> Option<usize> {
        let mut q = [0usize; 3];
        for k in 0..3 {
            let v = node[k] as i64 + off[k];
            if v < 0 || v >= self.dims[k] as i64 {
                return None;
            }
            q[k] = v as usize;
        }
        Some(self.flatten(q))
    }

    /// Whether `x` lies in the closed box.
    pub fn box_contains(&self, x: &[f64]) -> bool {
        (0..3).all(|k| {
            let t = (x[k] - self.origin[k]) / self.h;
            t >= -1e-9 && t <= (self.dims[k] - 1) as f64 + 1e-9
        })
    }

    /// Trilinear weights of the cell containing `x`: eight `(node, weight)`
    /// pairs with nonnegative weights summing to one. `None` outside the box.
    pub fn trilinear(&self, x: &[f64]) -> Option<[(usize, f64); 8]> {
        if !self.box_contains(x) {
            return None;
        }
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for k in 0..3 {
            let t = ((x[k] - self.origin[k]) / self.h).clamp(0.0, (self.dims[k] - 1) as f64);
            let i = (math::floor(t) as usize).min(self.dims[k] - 2);
            base[k] = i;
            frac[k] = (t - i as f64).clamp(0.0, 1.0);
        }
        let mut out = [(0usize, 0.0); 8];
        for (c, slot) in out.iter_mut().enumerate() {
            let mut w = 1.0;
            let mut node = base;
            for k in 0..3 {
                if c >> k & 1 == 1 {
                    node[k] += 1;
                    w *= frac[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            *slot = (self.flatten(node), w);
        }
        Some(out)
    }

    /// Count of nodes per kind, in the order of [`NodeKind`] variants.
    pub fn census(&self) -> [usize; 6] {
        let mut c = [0usize; 6];
        for k in &self.kinds {
            c[*k as usize] += 1;
        }
        c
    }
}

/// Axis and face-diagonal offsets of the 19-point stencil.
pub(crate) const NEIGHBOURS: [[i64; 3]; 18] = [
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
    [1, 1, 0],
    [-1, -1, 0],
    [1, -1, 0],
    [-1, 1, 0],
    [1, 0, 1],
    [-1, 0, -1],
    [1, 0, -1],
    [-1, 0, 1],
    [0, 1, 1],
    [0, -1, -1],
    [0, 1, -1],
    [0, -1, 1],
];

/// A box `[lo, hi]` aligned so that the origin is a grid node.
pub fn aligned_box(lo: [f64; 3], hi: [f64; 3], h: f64) -> ([f64; 3], [usize; 3]) {
    let mut origin = [0.0; 3];
    let mut dims = [0usize; 3];
    for k in 0..3 {
        let a = math::floor(lo[k] / h + 1e-9);
        let b = math::ceil(hi[k] / h - 1e-9);
        origin[k] = a * h;
        dims[k] = (b - a) as usize + 1;
    }
    (origin, dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::presets;

    #[test]
    fn halfspace_kinds() {
        let d = presets::halfspace(3);
        let (o, dims) = aligned_box([-0.5, -0.5, -0.5], [0.5, 0.5, 0.25], 0.125);
        let g = Grid::build(&d, o, 0.125, dims, &GridOptions::default()).unwrap();
        let top = g.flatten([4, 4, 4]);
        assert_eq!(g.coord_of(top), [0.0, 0.0, 0.0]);
        assert_eq!(g.kind(top), NodeKind::Gamma2);
        assert_eq!(g.kind(g.flatten([4, 4, 5])), NodeKind::Exterior);
        assert_eq!(g.kind(g.flatten([4, 4, 2])), NodeKind::Interior);
        assert_eq!(g.kind(g.flatten([0, 4, 2])), NodeKind::Truncation);
    }

    #[test]
    fn trilinear_weights_are_a_partition() {
        let d = presets::halfspace(3);
        let (o, dims) = aligned_box([-1.0; 3], [1.0, 1.0, 0.0], 0.25);
        let g = Grid::build(&d, o, 0.25, dims, &GridOptions::default()).unwrap();
        let w = g.trilinear(&[0.1, -0.33, -0.7]).unwrap();
        let s: f64 = w.iter().map(|p| p.1).sum();
        assert!((s - 1.0).abs() < 1e-14);
        assert!(w.iter().all(|p| p.1 >= 0.0));
        let x: f64 = w.iter().map(|&(i, wt)| wt * g.coord_of(i)[0]).sum();
        assert!((x - 0.1).abs() < 1e-14);
        assert!(g.trilinear(&[2.0, 0.0, 0.0]).is_none());
    }

    #[test]
    fn obstacle_neighbours_become_dirichlet() {
        let d = presets::halfspace_with_obstacle(alloc::vec![0.0, 0.0, -0.5], 0.2);
        let (o, dims) = aligned_box([-0.5, -0.5, -1.0], [0.5, 0.5, 0.0], 1.0 / 16.0);
        let g = Grid::build(&d, o, 1.0 / 16.0, dims, &GridOptions::default()).unwrap();
        for idx in 0..g.len() {
            if g.kind(idx) != NodeKind::Interior {
                continue;
            }
            let node = g.unflatten(idx);
            for off in &NEIGHBOURS[..6] {
                let j = g.offset(node, *off).unwrap();
                assert_ne!(g.kind(j), NodeKind::Exterior);
            }
        }
    }
}
