//! Drivers that measure the growth of solved subsolutions between nested
//! balls and layers, run the chain argument as an algorithm, and classify
//! layer suprema near the junction point.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::barrier::BarrierSpec;
use crate::capacity::{capacity_estimate, CapacityProblem};
use crate::chains::{self, build_chain, chain_path, clear_of_gamma2, verify_chain, BallChain, LayerSpec};
use crate::coeffs::{CoefficientField, FieldKind};
use crate::error::{Error, Result};
use crate::fd::{BoundaryData, GridSolution, Ladder, LadderSolution, NodeKind, Region};
use crate::geometry::{Ball, Domain, VectorField};
use crate::math::{self, dist};

/// Tolerances used when checking the lemma hypotheses on a grid solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisTol {
    /// Allowed negativity of `u` and positivity on Γ₁.
    pub value: f64,
    /// Allowed positivity of the discrete oblique derivative.
    pub derivative: f64,
}

impl Default for HypothesisTol {
    fn default() -> Self {
        HypothesisTol {
            value: 1e-7,
            derivative: 1e-5,
        }
    }
}

/// Measured growth between a small and a large set.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthResult {
    pub sup_small: f64,
    pub sup_big: f64,
    /// `sup_big / sup_small` (1 when the small supremum vanishes).
    pub ratio: f64,
    pub predicted_lower: f64,
    pub passed: bool,
    /// The hypotheses hold only trivially (`u ≡ 0` on the small set).
    pub vacuous: bool,
    /// Growth constant implied by the measured ratio, where one is defined.
    pub implied_eta: Option<f64>,
}

/// `(u(x) − I[u](x − hℓ))/h` at a Γ₂ node.
pub fn oblique_quotient(u: &GridSolution, ell: &VectorField, node: usize) -> Option<f64> {
    let grid = u.grid();
    let x = grid.coord_of(node);
    let mut l = [0.0; 3];
    ell.direction(&x, &mut l);
    let h = grid.h();
    let foot = [x[0] - h * l[0], x[1] - h * l[1], x[2] - h * l[2]];
    let value = u.interpolate(&foot)?;
    Some((u.values()[node] - value) / h)
}

/// Check `u ≥ 0`, `u ≤ 0` on Γ₁ and `∂u/∂ℓ ≤ 0` on Γ₂ at the nodes inside
/// `region`.
pub fn check_hypotheses(
    u: &GridSolution,
    ell: &VectorField,
    region: impl Fn(&[f64]) -> bool,
    tol: HypothesisTol,
) -> Result<()> {
    let grid = u.grid();
    for (idx, x, v) in u.nodes() {
        if !region(&x) {
            continue;
        }
        if v < -tol.value {
            return Err(Error::Hypothesis {
                what: "u is negative",
                location: x.to_vec(),
            });
        }
        match grid.kind(idx) {
            NodeKind::Gamma1 if v > tol.value => {
                return Err(Error::Hypothesis {
                    what: "u is positive on the Dirichlet boundary",
                    location: x.to_vec(),
                })
            }
            NodeKind::Gamma2 => {
                if oblique_quotient(u, ell, idx).is_some_and(|q| q > tol.derivative) {
                    return Err(Error::Hypothesis {
                        what: "oblique derivative is positive",
                        location: x.to_vec(),
                    });
                }
            }
            _ => {}
        }
    }
    Ok(())
}

fn ball_region(center: &[f64], r: f64) -> impl Fn(&[f64]) -> bool + '_ {
    move |x: &[f64]| math::dist2(x, center) <= r * r * (1.0 + 1e-12)
}

fn node_sup(u: &GridSolution, region: impl Fn(&[f64]) -> bool) -> f64 {
    u.sup_on(region).unwrap_or(f64::NEG_INFINITY)
}

/// Growth across `B(c, R) → B(c, aR)` for the barrier centred at `c`,
/// compared with `1/(1 − η₀)`; `slack` is the allowed shortfall.
pub fn growth_via_barrier(
    domain: &Domain,
    field: &CoefficientField,
    ell: &VectorField,
    spec: &BarrierSpec,
    u: &GridSolution,
    slack: f64,
) -> Result<GrowthResult> {
    if domain.dim() != 3 || field.dim() != 3 {
        return Err(Error::Dimension {
            dim: domain.dim(),
            expected: "three-dimensional grid solutions",
        });
    }
    let c = spec.center();
    let big_r = spec.a() * spec.radius();
    check_hypotheses(u, ell, ball_region(c, big_r), HypothesisTol::default())?;
    let sup_small = node_sup(u, ball_region(c, spec.radius()));
    let sup_big = node_sup(u, ball_region(c, big_r));
    let predicted_lower = 1.0 / (1.0 - spec.eta0());
    Ok(finish(sup_small, sup_big, predicted_lower, slack, None))
}

fn finish(sup_small: f64, sup_big: f64, predicted_lower: f64, slack: f64, eta_scale: Option<f64>) -> GrowthResult {
    if !(sup_small > 1e-14) {
        return GrowthResult {
            sup_small,
            sup_big,
            ratio: 1.0,
            predicted_lower,
            passed: true,
            vacuous: true,
            implied_eta: None,
        };
    }
    let ratio = sup_big / sup_small;
    let implied_eta = eta_scale.map(|k| (1.0 - sup_small / sup_big) * k);
    GrowthResult {
        sup_small,
        sup_big,
        ratio,
        predicted_lower,
        passed: ratio >= predicted_lower - slack,
        vacuous: false,
        implied_eta,
    }
}

/// Capacity of a point cloud with the default constraint set (zero when the
/// cloud is empty).
pub fn cloud_capacity(atoms: &[Vec<f64>], s: f64) -> Result<f64> {
    if atoms.is_empty() {
        return Ok(0.0);
    }
    Ok(capacity_estimate(&CapacityProblem::with_default_constraints(atoms.to_vec(), s)?)?.value)
}

/// Growth across `B(c, R) → B(c, aR)` forced by a Dirichlet set `H` of
/// positive capacity. Reports `η₁ = (1 − sup_small/sup_big)·Rˢ/C_s(H)` and
/// passes when it is positive.
#[allow(clippy::too_many_arguments)]
pub fn growth_via_capacity(
    domain: &Domain,
    ell: &VectorField,
    u: &GridSolution,
    h_cloud: &[Vec<f64>],
    s: f64,
    center: &[f64],
    radius: f64,
    a: f64,
) -> Result<GrowthResult> {
    if !(radius > 0.0 && a > 1.0) {
        return Err(Error::param("a", "need R > 0 and a > 1"));
    }
    let big_r = a * radius;
    if let Some((_, x, _)) = u
        .nodes()
        .find(|&(i, x, _)| u.grid().kind(i) == NodeKind::Gamma2 && math::dist(&x, center) < big_r)
    {
        return Err(Error::Hypothesis {
            what: "Γ₂ meets the large ball",
            location: x.to_vec(),
        });
    }
    if !clear_of_gamma2(domain, center, big_r) {
        return Err(Error::Hypothesis {
            what: "Γ₂ meets the large ball",
            location: center.to_vec(),
        });
    }
    check_hypotheses(u, ell, ball_region(center, big_r), HypothesisTol::default())?;
    let cap = cloud_capacity(h_cloud, s)?;
    let sup_small = node_sup(u, ball_region(center, radius));
    let sup_big = node_sup(u, ball_region(center, big_r));
    if cap <= 0.0 {
        let mut r = finish(sup_small, sup_big, 1.0, 0.0, None);
        r.vacuous = true;
        return Ok(r);
    }
    let mut r = finish(sup_small, sup_big, 1.0, 0.0, Some(math::powf(radius, s) / cap));
    r.passed = !r.vacuous && r.implied_eta.is_some_and(|e| e > 0.0);
    Ok(r)
}

/// Points of `S_R = ∂B(0, q*R) ∩ Ω` about `spacing` apart with their
/// interpolated values.
fn sphere_values(domain: &Domain, radius: f64, spacing: f64, value: impl Fn(&[f64]) -> Option<f64>) -> Vec<([f64; 3], f64)> {
    let area = 4.0 * core::f64::consts::PI * radius * radius;
    let count = (math::ceil(area / (spacing * spacing)) as usize).max(64);
    math::fibonacci_sphere(count)
        .into_iter()
        .map(|d| [radius * d[0], radius * d[1], radius * d[2]])
        .filter(|p| domain.inside(p))
        .filter_map(|p| value(&p).map(|v| (p, v)))
        .collect()
}

/// Growth from the mid-sphere of a layer to all of Ω. Reports
/// `η = (1 − sup_{S_R} u / sup_Ω u)·Rˢ/C_s(H)`.
#[allow(clippy::too_many_arguments)]
pub fn growth_in_layer(
    domain: &Domain,
    ell: &VectorField,
    chain: &BallChain,
    layer: &LayerSpec,
    u: &GridSolution,
    s: f64,
) -> Result<GrowthResult> {
    let report = verify_chain(domain, chain, layer, s)?;
    if !report.all_ok() {
        return Err(Error::LayerNotAdmissible {
            m: 0,
            reason: String::from("the chain fails verification"),
        });
    }
    check_hypotheses(u, ell, |_| true, HypothesisTol::default())?;
    let samples = sphere_values(domain, layer.sphere_radius(), u.grid().h() / 2.0, |p| u.interpolate(p));
    let sup_small = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let sup_big = node_sup(u, |_| true).max(sup_small);
    let cap = chain.layer_capacity;
    let scale = (cap > 0.0).then(|| math::powf(layer.radius, s) / cap);
    let mut r = finish(sup_small, sup_big, 1.0, 0.0, scale);
    r.passed = r.vacuous || r.implied_eta.map_or(true, |e| e >= 0.0);
    Ok(r)
}

/// Constants entering the chain iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConstants {
    /// Growth constant of the root step.
    pub eta1: f64,
    /// Growth constant for balls away from Γ₂.
    pub eta1_tilde: f64,
    /// Growth constant for balls near Γ₂.
    pub eta2: f64,
    pub s: f64,
}

/// Which lemma drives a step of the chain iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepCase {
    Root,
    /// `B(ξ, aθR)` misses Γ₂.
    AwayFromGamma2,
    /// `B(ξ, aθR)` meets Γ₂.
    NearGamma2,
}

/// One step of the chain iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationStep {
    pub step: usize,
    pub ball: usize,
    pub threshold: f64,
    pub case: StepCase,
    pub achieved: f64,
}

/// Record of a chain iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainIterationTrace {
    pub steps: Vec<IterationStep>,
    /// `m = sup_{S_R} u`.
    pub m: f64,
    pub delta0: f64,
    pub tau: f64,
    /// Lower bound on `sup_Ω u` certified at the terminating step.
    pub certified: f64,
    /// Directly measured `sup_Ω u`.
    pub measured: f64,
}

impl ChainIterationTrace {
    pub fn sound(&self, tol: f64) -> bool {
        self.certified <= self.measured + tol
    }
}

/// Run the chain argument on a solution: walk from the root towards the ball
/// holding the maximum on the covered part of `S_R`, stopping at the first
/// ball whose supremum reaches `m(1 − δ₀τᵏ)`.
pub fn chain_iteration(
    domain: &Domain,
    chain: &BallChain,
    layer: &LayerSpec,
    u: &GridSolution,
    constants: ChainConstants,
) -> Result<ChainIterationTrace> {
    let ChainConstants {
        eta1,
        eta1_tilde,
        eta2,
        s,
    } = constants;
    if !(eta1 > 0.0 && eta1_tilde > 0.0 && eta2 > 0.0 && eta1_tilde < 1.0 && eta2 < 1.0) {
        return Err(Error::param("constants", "growth constants must lie in (0, 1)"));
    }
    let rho = layer.ball_radius();
    let eps = layer.kappa * eta1 * chain.layer_capacity * math::powf(layer.radius, -s);
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::param("eta1", "κη₁C_s(H)R^{-s} must lie in (0, 1/2)"));
    }
    let delta0 = eps / (2.0 * (1.0 - eps));
    let tau = 0.5 * eta1_tilde.min(eta2);

    // m is taken over the part of S_R that a chain can cover
    let gap = chains::COVER_GAP * rho;
    let samples: Vec<([f64; 3], f64)> = sphere_values(domain, layer.sphere_radius(), u.grid().h() / 2.0, |p| u.interpolate(p))
        .into_iter()
        .filter(|(p, _)| domain.height_above(p) - p[2] >= gap)
        .collect();
    let (y, m) = samples
        .iter()
        .copied()
        .fold(([0.0; 3], f64::NEG_INFINITY), |acc, s| if s.1 > acc.1 { s } else { acc });
    if !m.is_finite() {
        return Err(Error::Empty("S_R has no grid values"));
    }
    let measured = node_sup(u, |_| true).max(m);

    // ball holding y with the shortest path to the root
    let mut best: Option<Vec<usize>> = None;
    for (k, b) in chain.balls.iter().enumerate() {
        if dist(&b.center, &y) <= b.radius * (1.0 + 1e-9) {
            let p = chain_path(chain, k)?;
            if best.as_ref().map_or(true, |q| p.len() < q.len()) {
                best = Some(p);
            }
        }
    }
    let Some(mut path) = best else {
        return Err(Error::CoverFailed { point: y.to_vec() });
    };
    path.reverse();

    let ball_sup = |b: &Ball| -> f64 {
        let nodes = node_sup(u, ball_region(&b.center, b.radius));
        let on_sphere = samples
            .iter()
            .filter(|s| dist(&s.0, &b.center) <= b.radius * (1.0 + 1e-9))
            .map(|s| s.1)
            .fold(f64::NEG_INFINITY, f64::max);
        nodes.max(on_sphere)
    };
    let mut steps = Vec::new();
    let mut tau_k = 1.0;
    for (k, &ball) in path.iter().enumerate() {
        let b = &chain.balls[ball];
        let threshold = m * (1.0 - delta0 * tau_k);
        let case = if k == 0 {
            StepCase::Root
        } else if clear_of_gamma2(domain, &b.center, layer.a * rho) {
            StepCase::AwayFromGamma2
        } else {
            StepCase::NearGamma2
        };
        let achieved = ball_sup(b);
        steps.push(IterationStep {
            step: k,
            ball,
            threshold,
            case,
            achieved,
        });
        if achieved >= threshold {
            let certified = if k == 0 {
                m * (1.0 - delta0) / (1.0 - eps)
            } else {
                m * (1.0 + delta0 * tau_k / (1.0 - 2.0 * tau))
            };
            return Ok(ChainIterationTrace {
                steps,
                m,
                delta0,
                tau,
                certified,
                measured,
            });
        }
        tau_k *= tau;
    }
    Err(Error::IterationDidNotTerminate { steps: path.len() })
}

/// Configuration of a dyadic layer experiment with radii `R_m = Q^{−m}`.
#[derive(Debug, Clone)]
pub struct DichotomyConfig {
    pub ratio: f64,
    pub first_layer: usize,
    pub layers: usize,
    /// Layer template; its radius is replaced by `R_m`.
    pub template: LayerSpec,
    pub s: f64,
    /// Grid spacing at layer `m` is `R_m / resolution`.
    pub resolution: f64,
    /// Half-width of each ladder level in grid steps.
    pub half_nodes: usize,
    /// Height at which the ladder boxes are cut.
    pub top: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub check_admissibility: bool,
    /// Chain candidates per ball radius.
    pub candidate_density: usize,
}

impl DichotomyConfig {
    /// `Q = 2`, five layers from `m = 1`, ratios `(0.6, 0.8, 1, 1.2, 1.4)`,
    /// `θ = 0.15`, `δ = 0.05`, grid spacing `R_m/32`.
    pub fn standard(a: f64) -> Result<Self> {
        let template = LayerSpec::new(
            [0.6, 0.8, 1.0, 1.2, 1.4],
            1.0,
            0.15,
            0.05,
            1e-3,
            a,
            chains::OverlapRule::Literal,
        )?;
        Ok(DichotomyConfig {
            ratio: 2.0,
            first_layer: 1,
            layers: 5,
            template,
            s: 1.0,
            resolution: 32.0,
            half_nodes: 47,
            top: 0.0,
            tol: 1e-10,
            max_iter: 2_000_000,
            check_admissibility: true,
            candidate_density: 4,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 1.0) {
            return Err(Error::param("ratio", "Q must exceed 1"));
        }
        if !(self.template.q_star < self.template.q1 * self.ratio) {
            return Err(Error::param("template", "need q* < q1·Q"));
        }
        if self.layers < 2 {
            return Err(Error::param("layers", "need at least two layers"));
        }
        if !(self.s > 0.0) {
            return Err(Error::param("s", "must be positive"));
        }
        if self.candidate_density == 0 {
            return Err(Error::param("candidate_density", "must be positive"));
        }
        if !(self.resolution > 0.0) {
            return Err(Error::param("resolution", "must be positive"));
        }
        Ok(())
    }

    pub fn layer_radius(&self, m: usize) -> f64 {
        math::powf(self.ratio, -(m as f64))
    }

    pub fn layer(&self, m: usize) -> Result<LayerSpec> {
        self.template.with_radius(self.layer_radius(m))
    }
}

/// Which alternative a series of layer suprema follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    /// `M_{m+1} < M_m` throughout.
    Decay,
    /// `M_{m+1} ≥ M_m` from layer `switch` on.
    Growth { switch: usize },
    /// Neither pattern holds; `at` is the first offending layer.
    Mixed { at: usize },
    /// All suprema vanish.
    Degenerate,
}

/// Layer suprema and capacities of a dichotomy run.
#[derive(Debug, Clone, PartialEq)]
pub struct DichotomySeries {
    pub layers: Vec<usize>,
    pub radii: Vec<f64>,
    pub sups: Vec<f64>,
    pub capacities: Vec<f64>,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub alternative: Alternative,
    /// `(1 − M_small/M_big)/term` for each consecutive pair.
    pub step_eta: Vec<f64>,
    /// Slope of `log M_m` against the partial sums, signed so that it is
    /// positive when the series follows its alternative.
    pub eta_fit: Option<f64>,
    pub r2: Option<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub chain_sizes: Vec<usize>,
}

/// Classify successive differences: a difference counts as an increase when
/// `M_{m+1} ≥ M_m − tol·max|M|`.
pub fn classify(sups: &[f64], tol: f64) -> Alternative {
    let scale = sups.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale <= 1e-14 {
        return Alternative::Degenerate;
    }
    let up: Vec<bool> = sups.windows(2).map(|w| w[1] >= w[0] - tol * scale).collect();
    match up.iter().position(|&u| u) {
        None => Alternative::Decay,
        Some(first) => match up[first..].iter().position(|&u| !u) {
            None => Alternative::Growth { switch: first },
            Some(k) => Alternative::Mixed { at: first + k },
        },
    }
}

/// Partial sums `Σ_{j ≤ m} C_s(H_j) Q^{sj}` from per-layer capacities.
pub fn capacity_sum(config: &DichotomyConfig, capacities: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    capacities
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let m = config.first_layer + k;
            acc += c * math::powf(config.ratio, config.s * m as f64);
            acc
        })
        .collect()
}

/// Capacities of point clouds, one per layer, then their partial sums.
pub fn capacity_sum_of_clouds(config: &DichotomyConfig, clouds: &[Vec<Vec<f64>>]) -> Result<Vec<f64>> {
    let caps = clouds
        .iter()
        .map(|c| cloud_capacity(c, config.s))
        .collect::<Result<Vec<_>>>()?;
    Ok(capacity_sum(config, &caps))
}

/// Solve on a ladder refined towards the junction point and classify the
/// layer suprema `M_m = sup_{S_m ∩ Ω} u`.
pub fn dichotomy_run(
    config: &DichotomyConfig,
    domain: &Domain,
    field: &CoefficientField,
    ell: &VectorField,
    data: &BoundaryData,
    pinned: Option<Arc<Region>>,
) -> Result<DichotomySeries> {
    config.validate()?;
    let n0 = config.first_layer;
    let layer_ms: Vec<usize> = (n0..n0 + config.layers).collect();

    let mut capacities = Vec::with_capacity(config.layers);
    let mut chain_sizes = Vec::new();
    for &m in &layer_ms {
        let layer = config.layer(m)?;
        if config.check_admissibility {
            let chain = build_chain(domain, &layer, config.s, config.candidate_density).map_err(|e| Error::LayerNotAdmissible {
                m,
                reason: alloc::format!("{e}"),
            })?;
            let report = verify_chain(domain, &chain, &layer.with_kappa(chain.kappa_measured * 0.5), config.s)?;
            if !report.all_ok() {
                return Err(Error::LayerNotAdmissible {
                    m,
                    reason: alloc::format!("{report:?}"),
                });
            }
            chain_sizes.push(chain.balls.len());
            capacities.push(chain.layer_capacity);
        } else {
            capacities.push(cloud_capacity(&chains::layer_cloud(domain, &layer, 600), config.s)?);
        }
    }

    let r0 = config.layer_radius(n0);
    let ladder = Ladder::build(
        domain,
        r0 / config.resolution,
        config.half_nodes,
        config.layers,
        config.top,
        pinned,
        !matches!(field.kind(), FieldKind::Identity | FieldKind::Diagonal(_)),
    )?;
    let solution = ladder.solve(field, ell, data, config.tol, config.max_iter)?;
    let outer = config.template.q4 * r0;
    check_layer_hypotheses(&solution, ell, outer)?;

    let mut sups = Vec::with_capacity(config.layers);
    for &m in &layer_ms {
        let r = config.layer_radius(m);
        let rho = config.template.q_star * r;
        let needed = r / config.resolution;
        let values = sphere_values(domain, rho, needed / 2.0, |p| {
            let k = solution.level_of(p)?;
            let h = solution.levels[k].grid().h();
            if h > needed * (1.0 + 1e-9) {
                return None;
            }
            solution.levels[k].interpolate(p)
        });
        if values.is_empty() {
            let h = solution.levels.last().map_or(f64::INFINITY, |l| l.grid().h());
            return Err(Error::GridTooCoarse { m, h, needed });
        }
        sups.push(values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max));
    }

    let partial_sums = capacity_sum(config, &capacities);
    let terms: Vec<f64> = capacities
        .iter()
        .zip(&layer_ms)
        .map(|(c, &m)| c * math::powf(config.ratio, config.s * m as f64))
        .collect();
    let alternative = classify(&sups, 1e-8);
    let step_eta: Vec<f64> = sups
        .windows(2)
        .zip(&terms)
        .map(|(w, t)| {
            let (small, big) = if w[1] >= w[0] { (w[0], w[1]) } else { (w[1], w[0]) };
            if big > 0.0 && *t > 0.0 {
                (1.0 - small / big) / t
            } else {
                0.0
            }
        })
        .collect();
    let (eta_fit, r2) = if sups.iter().all(|&v| v > 0.0) {
        let logs: Vec<f64> = sups.iter().map(|&v| math::ln(v)).collect();
        match math::linear_fit(&partial_sums, &logs) {
            Some((slope, _, r2)) => {
                let signed = match alternative {
                    Alternative::Decay => -slope,
                    _ => slope,
                };
                (Some(signed), Some(r2))
            }
            None => (None, None),
        }
    } else {
        (None, None)
    };
    Ok(DichotomySeries {
        layers: layer_ms.clone(),
        radii: layer_ms.iter().map(|&m| config.layer_radius(m)).collect(),
        sups,
        capacities,
        terms,
        partial_sums,
        alternative,
        step_eta,
        eta_fit,
        r2,
        residual: solution.residual,
        iterations: solution.iterations,
        chain_sizes,
    })
}

fn check_layer_hypotheses(solution: &LadderSolution, ell: &VectorField, outer: f64) -> Result<()> {
    // each point is judged on the finest level holding it, where its row is
    // the scheme's own
    for (k, level) in solution.levels.iter().enumerate() {
        let grid = level.grid();
        for (idx, x, v) in level.nodes() {
            if math::norm(&x) >= outer || solution.level_of(&x) != Some(k) {
                continue;
            }
            match grid.kind(idx) {
                NodeKind::Gamma1 if v > 1e-7 => {
                    return Err(Error::Hypothesis {
                        what: "u is positive on the Dirichlet boundary near the junction",
                        location: x.to_vec(),
                    })
                }
                NodeKind::Gamma2 if oblique_quotient(level, ell, idx).is_some_and(|q| q > 1e-5) => {
                    return Err(Error::Hypothesis {
                        what: "oblique derivative is positive near the junction",
                        location: x.to_vec(),
                    })
                }
                _ => {}
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_patterns() {
        assert_eq!(classify(&[5.0, 4.0, 3.0, 2.0], 1e-8), Alternative::Decay);
        assert_eq!(classify(&[1.0, 2.0, 3.0], 1e-8), Alternative::Growth { switch: 0 });
        assert_eq!(classify(&[3.0, 2.0, 2.5, 4.0], 1e-8), Alternative::Growth { switch: 1 });
        assert_eq!(classify(&[3.0, 4.0, 2.0], 1e-8), Alternative::Mixed { at: 1 });
        assert_eq!(classify(&[0.0, 0.0, 0.0], 1e-8), Alternative::Degenerate);
        // equal within tolerance counts as non-decreasing
        assert_eq!(classify(&[2.0, 2.0 - 1e-12, 3.0], 1e-8), Alternative::Growth { switch: 0 });
    }

    fn config() -> DichotomyConfig {
        DichotomyConfig::standard(1.1).unwrap()
    }

    #[test]
    fn constant_terms_sum_linearly() {
        let cfg = config();
        // C_s(H_m) = c·Q^{−sm} gives constant terms
        let caps: Vec<f64> = (1..=5).map(|m| 0.3 * math::powf(2.0, -(m as f64))).collect();
        let sums = capacity_sum(&cfg, &caps);
        for (k, v) in sums.iter().enumerate() {
            assert!((v - 0.3 * (k + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_and_alternating_layers() {
        let cfg = config();
        assert!(capacity_sum(&cfg, &[0.0; 5]).iter().all(|&v| v == 0.0));
        let caps: Vec<f64> = (1..=6)
            .map(|m| if m % 2 == 0 { 0.0 } else { math::powf(2.0, -(m as f64)) })
            .collect();
        let sums = capacity_sum(&cfg, &caps);
        assert_eq!(sums, alloc::vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
    }

    #[test]
    fn config_checks_layer_nesting() {
        let mut cfg = config();
        cfg.ratio = 1.5;
        assert!(cfg.validate().is_err());
        cfg.ratio = 2.0;
        assert!(cfg.validate().is_ok());
        assert!((cfg.layer_radius(3) - 0.125).abs() < 1e-15);
    }
}
