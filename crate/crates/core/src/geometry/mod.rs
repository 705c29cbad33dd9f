//! Domains whose boundary splits into a Dirichlet part Γ₁, an oblique part Γ₂
//! given as a Lipschitz graph `xₙ = f(x′)`, and the junction point ζ = 0.

mod dirichlet;
mod graph;
pub mod presets;

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

pub use dirichlet::{BallObstacle, DirichletSet, Disk, EmptySet, PointSet, Union, Wedge};
pub use graph::{ConeGraph, FlatGraph, Graph, LinearGraph, PiecewiseLinearGraph};

use crate::error::{Error, Result};
use crate::math::{self, dist, norm};

/// A closed ball `B(center, radius)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::param("radius", "must be positive and finite"));
        }
        Ok(Ball { center, radius })
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        math::dist2(&self.center, x) <= self.radius * self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }
}

/// `{x : r_inner < |x − center| < r_outer}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalLayer {
    pub center: Vec<f64>,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl SphericalLayer {
    pub fn new(center: Vec<f64>, r_inner: f64, r_outer: f64) -> Result<Self> {
        if !(r_inner > 0.0 && r_inner < r_outer) {
            return Err(Error::param("r_inner", "need 0 < r_inner < r_outer"));
        }
        Ok(SphericalLayer {
            center,
            r_inner,
            r_outer,
        })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let r = dist(&self.center, x);
        r > self.r_inner && r < self.r_outer
    }
}

/// Where a point sits relative to the split boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointClass {
    Interior,
    OnGamma1,
    OnGamma2,
    Exterior,
}

type Membership = dyn Fn(&[f64]) -> bool + Send + Sync;

/// A domain Ω ⊂ ℝⁿ near the junction point ζ = 0.
///
/// Γ₂ is the part of the graph `xₙ = f(x′)` over `|x′| ≤ patch_radius`, with Ω
/// lying below it. Γ₁ is an arbitrary closed set accessed through
/// [`DirichletSet`]. Membership is `xₙ < f(x′)`, off Γ₁ and outside any solid
/// obstacle, intersected with an optional extra predicate.
#[derive(Clone)]
pub struct Domain {
    dim: usize,
    graph: Arc<dyn Graph>,
    patch_radius: f64,
    gamma1: Arc<dyn DirichletSet>,
    extra: Option<Arc<Membership>>,
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain")
            .field("dim", &self.dim)
            .field("patch_radius", &self.patch_radius)
            .finish_non_exhaustive()
    }
}

impl Domain {
    pub fn new(
        dim: usize,
        graph: Arc<dyn Graph>,
        patch_radius: f64,
        gamma1: Arc<dyn DirichletSet>,
    ) -> Result<Self> {
        if dim < 3 {
            return Err(Error::Dimension {
                dim,
                expected: "n >= 3",
            });
        }
        if !(patch_radius > 0.0) {
            return Err(Error::param("patch_radius", "must be positive"));
        }
        let f0 = graph.height(&alloc::vec![0.0; dim - 1]);
        if f0.abs() > 1e-12 {
            return Err(Error::param("graph", "f(0) must vanish"));
        }
        Ok(Domain {
            dim,
            graph,
            patch_radius,
            gamma1,
            extra: None,
        })
    }

    /// Intersect Ω with an additional region.
    pub fn restricted(mut self, region: Arc<Membership>) -> Self {
        self.extra = Some(region);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn graph(&self) -> &Arc<dyn Graph> {
        &self.graph
    }

    pub fn gamma1(&self) -> &Arc<dyn DirichletSet> {
        &self.gamma1
    }

    pub fn patch_radius(&self) -> f64 {
        self.patch_radius
    }

    /// `f(x′)` evaluated at the horizontal part of `x`.
    #[inline]
    pub fn height_above(&self, x: &[f64]) -> f64 {
        self.graph.height(&x[..self.dim - 1])
    }

    #[inline]
    fn in_patch(&self, x: &[f64]) -> bool {
        norm(&x[..self.dim - 1]) <= self.patch_radius
    }

    /// The membership oracle `x ∈ Ω`.
    pub fn inside(&self, x: &[f64]) -> bool {
        if x[self.dim - 1] >= self.height_above(x) {
            return false;
        }
        if self.gamma1.solid_contains(x) || self.gamma1.distance(x) == 0.0 {
            return false;
        }
        match &self.extra {
            Some(region) => region(x),
            None => true,
        }
    }

    /// Classify `x` against Γ₁, Γ₂ and Ω with boundary fuzz `tol`.
    pub fn classify(&self, x: &[f64], tol: f64) -> Result<PointClass> {
        if !(tol > 0.0) {
            return Err(Error::param("tol", "must be positive"));
        }
        let on_g2 = self.in_patch(x) && (x[self.dim - 1] - self.height_above(x)).abs() <= tol;
        let on_g1 = self.gamma1.distance(x) <= tol;
        match (on_g1, on_g2) {
            (true, true) => Err(Error::AmbiguousBoundary { point: x.to_vec() }),
            (false, true) => Ok(PointClass::OnGamma2),
            (true, false) => Ok(PointClass::OnGamma1),
            (false, false) if self.inside(x) => Ok(PointClass::Interior),
            _ => Ok(PointClass::Exterior),
        }
    }

    /// Distance from `x` to Γ₂, searched over graph points with
    /// `|y′ − x′| ≤ reach`. Returns `f64::INFINITY` when none lie within `reach`.
    pub fn graph_distance(&self, x: &[f64], reach: f64) -> f64 {
        let n = self.dim;
        let xp = &x[..n - 1];
        let mut best = f64::INFINITY;
        let mut y = alloc::vec![0.0; n];
        let mut probe = |yp: &[f64], best: &mut f64| {
            if norm(yp) > self.patch_radius {
                return;
            }
            y[..n - 1].copy_from_slice(yp);
            y[n - 1] = self.graph.height(yp);
            let d = dist(&y, x);
            if d < *best {
                *best = d;
            }
        };
        probe(xp, &mut best);
        if let Some(d) = self.graph.exact_distance(x, self.patch_radius) {
            return d.min(best);
        }
        let rings = 16;
        let dirs = math::sphere_directions(n - 1, 32);
        for k in 1..=rings {
            let r = reach * k as f64 / rings as f64;
            for d in &dirs {
                let yp: Vec<f64> = xp.iter().zip(d).map(|(a, b)| a + r * b).collect();
                probe(&yp, &mut best);
            }
        }
        best
    }

    /// Γ₂ points `(y′, f(y′))` with `y` inside `ball`, on a polar lattice of
    /// roughly `spacing`.
    pub fn sample_gamma2(&self, ball: &Ball, spacing: f64) -> Vec<Vec<f64>> {
        let n = self.dim;
        let cp = &ball.center[..n - 1];
        let rings = math::ceil(ball.radius / spacing).max(1.0) as usize;
        let mut out = Vec::new();
        let push = |yp: Vec<f64>, out: &mut Vec<Vec<f64>>| {
            if norm(&yp) > self.patch_radius {
                return;
            }
            let mut y = yp;
            let h = self.graph.height(&y);
            y.push(h);
            if ball.contains(&y) {
                out.push(y);
            }
        };
        push(cp.to_vec(), &mut out);
        for k in 1..=rings {
            let r = ball.radius * k as f64 / rings as f64;
            let count = match n - 1 {
                1 => 2,
                2 => (math::ceil(2.0 * PI * r / spacing) as usize).max(6),
                _ => (math::ceil(4.0 * PI * r * r / (spacing * spacing)) as usize).max(12),
            };
            for d in math::sphere_directions(n - 1, count) {
                push(cp.iter().zip(&d).map(|(a, b)| a + r * b).collect(), &mut out);
            }
        }
        out
    }

    /// The domain mapped by `x ↦ t·x`: graph `t·f(x′/t)`, Γ₁ scaled by `t`.
    pub fn scaled(&self, t: f64) -> Result<Domain> {
        if !(t > 0.0) {
            return Err(Error::param("t", "scale must be positive"));
        }
        let graph = Arc::new(graph::ScaledGraph {
            inner: self.graph.clone(),
            t,
        });
        let gamma1 = Arc::new(dirichlet::Scaled {
            inner: self.gamma1.clone(),
            t,
        });
        let mut d = Domain::new(self.dim, graph, self.patch_radius * t, gamma1)?;
        if let Some(region) = &self.extra {
            let region = region.clone();
            d.extra = Some(Arc::new(move |x: &[f64]| {
                let y: Vec<f64> = x.iter().map(|v| v / t).collect();
                region(&y)
            }));
        }
        Ok(d)
    }
}

/// Estimate the Lipschitz constant of `f` over `|x′| ≤ patch_radius` from
/// pairwise difference quotients.
///
/// The sample sequence is the origin, the points `±r/2·e_k`, then Halton
/// points of the patch; raising `n_samples` only appends points, so the
/// estimate never decreases under refinement.
pub fn lipschitz_estimate(f: &dyn Graph, dim_horizontal: usize, patch_radius: f64, n_samples: usize) -> Result<f64> {
    if n_samples < 2 {
        return Err(Error::param("n_samples", "need at least two samples"));
    }
    let d = dim_horizontal;
    let r = patch_radius;
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n_samples);
    pts.push(alloc::vec![0.0; d]);
    'axes: for k in 0..d {
        for s in [1.0, -1.0] {
            if pts.len() >= n_samples {
                break 'axes;
            }
            let mut e = alloc::vec![0.0; d];
            e[k] = s * r / 2.0;
            pts.push(e);
        }
    }
    let mut h = alloc::vec![0.0; d];
    let mut i = 1u64;
    while pts.len() < n_samples {
        math::halton(i, d, &mut h);
        i += 1;
        let p: Vec<f64> = h.iter().map(|v| r * (2.0 * v - 1.0)).collect();
        if norm(&p) <= r {
            pts.push(p);
        }
    }
    let vals: Vec<f64> = pts.iter().map(|p| f.height(p)).collect();
    let mut best: f64 = 0.0;
    for i in 0..pts.len() {
        for j in 0..i {
            let dx = dist(&pts[i], &pts[j]);
            if dx > 0.0 {
                best = best.max((vals[i] - vals[j]).abs() / dx);
            }
        }
    }
    Ok(best)
}

/// Check that the right circular cone with apex `y`, axis `−eₙ`, half-angle
/// `phi` and height `h` lies in Ω, on a lattice of about `n_samples` points.
/// The apex itself is excluded.
pub fn cone_check(domain: &Domain, y: &[f64], phi: f64, h: f64, n_samples: usize) -> Result<bool> {
    if !(phi > 0.0 && phi < PI / 2.0) {
        return Err(Error::param("phi", "need 0 < φ < π/2"));
    }
    if !(h > 0.0) {
        return Err(Error::param("h", "must be positive"));
    }
    let n = domain.dim();
    let levels = (math::ceil(math::sqrt(n_samples as f64)) as usize).max(4);
    let per_level = (n_samples / levels).max(8);
    let dirs = math::sphere_directions(n - 1, per_level);
    let tan = libm::tan(phi);
    let mut x = alloc::vec![0.0; n];
    for k in 1..=levels {
        let depth = h * k as f64 / levels as f64;
        let radius = depth * tan;
        for frac in [1.0, 0.5, 0.0] {
            for d in &dirs {
                for i in 0..n - 1 {
                    x[i] = y[i] + frac * radius * d[i];
                }
                x[n - 1] = y[n - 1] - depth;
                if !domain.inside(&x) {
                    return Ok(false);
                }
                if frac == 0.0 {
                    break;
                }
            }
        }
    }
    Ok(true)
}

/// The oblique direction field ℓ on Γ₂ with its uniform non-tangency margin.
#[derive(Clone)]
pub struct VectorField {
    kind: FieldKind,
    epsilon_margin: f64,
}

type DirectionFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

#[derive(Clone)]
enum FieldKind {
    Constant(Vec<f64>),
    Custom(Arc<DirectionFn>),
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FieldKind::Constant(v) => write!(f, "VectorField::Constant({:?}, ε={})", v, self.epsilon_margin),
            FieldKind::Custom(_) => write!(f, "VectorField::Custom(ε={})", self.epsilon_margin),
        }
    }
}

impl VectorField {
    /// A constant field; `direction` is normalised.
    pub fn constant(direction: &[f64], epsilon_margin: f64) -> Result<Self> {
        let n = norm(direction);
        if !(n > 0.0) {
            return Err(Error::param("direction", "must be nonzero"));
        }
        if !(epsilon_margin > 0.0) {
            return Err(Error::param("epsilon_margin", "must be positive"));
        }
        Ok(VectorField {
            kind: FieldKind::Constant(direction.iter().map(|v| v / n).collect()),
            epsilon_margin,
        })
    }

    /// The outward normal `eₙ` of a flat Γ₂.
    pub fn vertical(dim: usize, epsilon_margin: f64) -> Result<Self> {
        let mut e = alloc::vec![0.0; dim];
        e[dim - 1] = 1.0;
        Self::constant(&e, epsilon_margin)
    }

    /// A general field; the closure must write a unit vector.
    pub fn custom(f: Arc<DirectionFn>, epsilon_margin: f64) -> Result<Self> {
        if !(epsilon_margin > 0.0) {
            return Err(Error::param("epsilon_margin", "must be positive"));
        }
        Ok(VectorField {
            kind: FieldKind::Custom(f),
            epsilon_margin,
        })
    }

    pub fn epsilon_margin(&self) -> f64 {
        self.epsilon_margin
    }

    #[inline]
    pub fn direction(&self, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            FieldKind::Constant(v) => out.copy_from_slice(v),
            FieldKind::Custom(f) => f(x, out),
        }
    }

    /// Largest violation of `|ℓ| = 1` and of `∠(ℓ, eₙ) ≤ cot⁻¹(L) − ε` over
    /// the given Γ₂ samples. Nonpositive means the field is admissible.
    pub fn margin_violation(&self, lipschitz: f64, samples: &[Vec<f64>]) -> f64 {
        let phi = math::arccot(lipschitz);
        let mut worst = f64::NEG_INFINITY;
        for x in samples {
            let mut l = alloc::vec![0.0; x.len()];
            self.direction(x, &mut l);
            let nl = norm(&l);
            worst = worst.max((nl - 1.0).abs() - 1e-12);
            let angle = math::acos((l[l.len() - 1] / nl).clamp(-1.0, 1.0));
            worst = worst.max(angle - (phi - self.epsilon_margin));
        }
        worst
    }
}
