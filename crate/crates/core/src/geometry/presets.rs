//! Named domains used by the experiments and the command line.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{BallObstacle, ConeGraph, DirichletSet, Disk, Domain, EmptySet, FlatGraph, Graph, Union, Wedge};

/// `{xₙ < 0}` with Γ₁ = ∅ (the grid truncation supplies the far boundary).
pub fn halfspace(dim: usize) -> Domain {
    with_gamma1(dim, Arc::new(EmptySet))
}

/// `{xₙ < 0}` with the given Dirichlet set.
pub fn with_gamma1(dim: usize, gamma1: Arc<dyn DirichletSet>) -> Domain {
    Domain::new(dim, Arc::new(FlatGraph), f64::INFINITY, gamma1).expect("flat graph is valid")
}

/// The downward cone `{xₙ < −L|x′|}`: the tight case of the inner cone
/// condition with half-angle `cot⁻¹(L)` at the apex.
pub fn cone(dim: usize, lipschitz: f64) -> Domain {
    Domain::new(
        dim,
        Arc::new(ConeGraph { slope: -lipschitz }),
        f64::INFINITY,
        Arc::new(EmptySet),
    )
    .expect("cone graph is valid")
}

/// Options for [`slit`].
#[derive(Debug, Clone)]
pub struct SlitOptions {
    /// Half opening angle of the planar sector, measured from `−e₃`.
    pub half_angle: f64,
    /// Radial extent of the sector.
    pub r_max: f64,
    /// Optional solid ball removed from Ω, its sphere joining Γ₁.
    pub hub: Option<(Vec<f64>, f64)>,
}

impl Default for SlitOptions {
    fn default() -> Self {
        SlitOptions {
            half_angle: PI / 4.0,
            r_max: f64::INFINITY,
            hub: None,
        }
    }
}

/// Half-space in ℝ³ cut by the vertical sector `{x₂ = 0, |x₁| ≤ −x₃·tan β}`
/// hanging from the junction point, optionally with a ball obstacle.
pub fn slit(dim: usize, opts: SlitOptions) -> Domain {
    assert_eq!(dim, 3, "the slit preset lives in three dimensions");
    let wedge = Arc::new(Wedge::new(
        alloc::vec![1.0, 0.0, 0.0],
        alloc::vec![0.0, 0.0, -1.0],
        opts.half_angle,
        opts.r_max,
    ));
    let gamma1: Arc<dyn DirichletSet> = match opts.hub {
        Some((center, radius)) => Arc::new(Union {
            parts: alloc::vec![wedge, Arc::new(BallObstacle { center, radius })],
        }),
        None => wedge,
    };
    with_gamma1(dim, gamma1)
}

/// Half-space in ℝ³ with a vertical Dirichlet disk of the given radius
/// centred at `center` (normal `e₂`).
pub fn halfspace_with_disk(center: Vec<f64>, radius: f64) -> Domain {
    with_gamma1(3, Arc::new(Disk::new(center, &[0.0, 1.0, 0.0], radius)))
}

/// Half-space with a solid ball obstacle.
pub fn halfspace_with_obstacle(center: Vec<f64>, radius: f64) -> Domain {
    with_gamma1(center.len(), Arc::new(BallObstacle { center, radius }))
}

/// Domain below an arbitrary graph.
pub fn below_graph(dim: usize, graph: Arc<dyn Graph>, patch_radius: f64, gamma1: Arc<dyn DirichletSet>) -> crate::Result<Domain> {
    Domain::new(dim, graph, patch_radius, gamma1)
}
