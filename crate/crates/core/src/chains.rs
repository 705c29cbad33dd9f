//! Chains of equal balls inside a spherical layer that cover the mid-sphere
//! and link back to a root ball touching the Dirichlet boundary.

use alloc::collections::{BTreeMap, BinaryHeap, VecDeque};
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::capacity::{capacity_estimate, CapacityProblem};
use crate::error::{Error, Result};
use crate::geometry::{Ball, Domain};
use crate::math::{self, dist};

/// Relative tolerance for tangency with Γ₂.
pub const TANGENCY_TOL: f64 = 1e-9;

/// How the overlap of consecutive balls is tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlapRule {
    /// `B^j ∩ B^{j+1} ∩ Ω ⊇ B(ξ_{j+1}, δR)`: the small ball sits at the
    /// centre of the later ball.
    #[default]
    Literal,
    /// Some ball of radius `δR` lies in `B^j ∩ B^{j+1} ∩ Ω`; it is placed at
    /// the midpoint of the centres.
    Relaxed,
}

/// Radii ratios and ball parameters of a layer `q₁R < |x| < q₄R`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    pub q1: f64,
    pub q2: f64,
    pub q_star: f64,
    pub q3: f64,
    pub q4: f64,
    pub radius: f64,
    pub theta: f64,
    pub delta: f64,
    pub kappa: f64,
    pub a: f64,
    pub overlap: OverlapRule,
}

impl LayerSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        q: [f64; 5],
        radius: f64,
        theta: f64,
        delta: f64,
        kappa: f64,
        a: f64,
        overlap: OverlapRule,
    ) -> Result<Self> {
        if !(q[0] > 0.0 && q.windows(2).all(|w| w[0] < w[1])) {
            return Err(Error::param("q", "need 0 < q1 < q2 < q* < q3 < q4"));
        }
        if !(radius > 0.0) {
            return Err(Error::param("radius", "must be positive"));
        }
        if !(theta > 0.0) {
            return Err(Error::param("theta", "must be positive"));
        }
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::param("delta", "must lie in (0, 1/2)"));
        }
        if !(kappa > 0.0) {
            return Err(Error::param("kappa", "must be positive"));
        }
        if !(a > 1.0) {
            return Err(Error::param("a", "must exceed 1"));
        }
        if 2.0 * theta >= q[3] - q[1] {
            return Err(Error::param("theta", "balls of radius θR do not fit in the inner layer"));
        }
        if delta >= theta {
            return Err(Error::param("delta", "must be smaller than theta"));
        }
        Ok(LayerSpec {
            q1: q[0],
            q2: q[1],
            q_star: q[2],
            q3: q[3],
            q4: q[4],
            radius,
            theta,
            delta,
            kappa,
            a,
            overlap,
        })
    }

    /// Ratios `(1, 2, 2.5, 3, 4)`, `θ = 0.25`, `δ = 0.1`.
    pub fn standard(radius: f64, kappa: f64, a: f64) -> Result<Self> {
        Self::new([1.0, 2.0, 2.5, 3.0, 4.0], radius, 0.25, 0.1, kappa, a, OverlapRule::Literal)
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        let mut l = self.clone();
        if !(radius > 0.0) {
            return Err(Error::param("radius", "must be positive"));
        }
        l.radius = radius;
        Ok(l)
    }

    pub fn with_kappa(&self, kappa: f64) -> Self {
        LayerSpec { kappa, ..self.clone() }
    }

    pub fn ball_radius(&self) -> f64 {
        self.theta * self.radius
    }

    pub fn sphere_radius(&self) -> f64 {
        self.q_star * self.radius
    }

    /// Whether `|x|` lies strictly between `q₂R` and `q₃R`.
    pub fn inner_contains(&self, x: &[f64]) -> bool {
        let r = math::norm(x);
        r > self.q2 * self.radius && r < self.q3 * self.radius
    }

    /// Whether `|x|` lies strictly between `q₁R` and `q₄R`.
    pub fn outer_contains(&self, x: &[f64]) -> bool {
        let r = math::norm(x);
        r > self.q1 * self.radius && r < self.q4 * self.radius
    }

    /// Whether the open ball `B(c, θR)` lies in the inner layer.
    pub fn ball_fits(&self, c: &[f64]) -> bool {
        let r = math::norm(c);
        let rho = self.ball_radius();
        r - rho >= self.q2 * self.radius * (1.0 - 1e-12) && r + rho <= self.q3 * self.radius * (1.0 + 1e-12)
    }
}

/// Balls `B(ξ_k, θR)`, `k = 0..=N`, with the root at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BallChain {
    pub balls: Vec<Ball>,
    /// Undirected edges `(i, j)`, `i < j`, passing the overlap test.
    pub adjacency: Vec<(usize, usize)>,
    /// Measured `C_s(B⁰ ∩ Γ₁) / C_s(Γ₁ ∩ Û_R)`.
    pub kappa_measured: f64,
    pub root_capacity: f64,
    pub layer_capacity: f64,
}

impl BallChain {
    /// `N`, the index of the last ball.
    pub fn last_index(&self) -> usize {
        self.balls.len().saturating_sub(1)
    }

    pub fn root(&self) -> &Ball {
        &self.balls[0]
    }

    fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = alloc::vec![Vec::new(); self.balls.len()];
        for &(i, j) in &self.adjacency {
            if i < self.balls.len() && j < self.balls.len() {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }
}

/// Shortest adjacency path from ball `k` to the root, preferring lower
/// indices among equally short paths.
pub fn chain_path(chain: &BallChain, k: usize) -> Result<Vec<usize>> {
    let n = chain.balls.len();
    if k >= n {
        return Err(Error::param("k", "ball index out of range"));
    }
    let adj = chain.neighbours();
    // BFS from the root; neighbours visited in ascending order so the parent
    // of each ball is its lowest-index predecessor
    let mut parent = alloc::vec![usize::MAX; n];
    parent[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for &j in &adj[i] {
            if parent[j] == usize::MAX {
                parent[j] = i;
                queue.push_back(j);
            }
        }
    }
    if parent[k] == usize::MAX {
        return Err(Error::Disconnected { index: k });
    }
    let mut path = alloc::vec![k];
    let mut i = k;
    while i != 0 {
        i = parent[i];
        path.push(i);
    }
    Ok(path)
}

/// Uniform bucket grid over points of ℝ³.
struct Buckets {
    cell: f64,
    map: BTreeMap<[i64; 3], Vec<u32>>,
}

impl Buckets {
    fn new(points: &[[f64; 3]], cell: f64) -> Self {
        let mut map: BTreeMap<[i64; 3], Vec<u32>> = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            map.entry(Self::key(p, cell)).or_default().push(i as u32);
        }
        Buckets { cell, map }
    }

    fn key(p: &[f64], cell: f64) -> [i64; 3] {
        [
            math::floor(p[0] / cell) as i64,
            math::floor(p[1] / cell) as i64,
            math::floor(p[2] / cell) as i64,
        ]
    }

    /// Indices of points within `r` of `x`, in ascending order.
    fn within(&self, points: &[[f64; 3]], x: &[f64], r: f64) -> Vec<usize> {
        let span = math::ceil(r / self.cell) as i64;
        let k = Self::key(x, self.cell);
        let mut out = Vec::new();
        for a in -span..=span {
            for b in -span..=span {
                for c in -span..=span {
                    if let Some(list) = self.map.get(&[k[0] + a, k[1] + b, k[2] + c]) {
                        for &i in list {
                            if math::dist2(&points[i as usize], x) <= r * r {
                                out.push(i as usize);
                            }
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Points of `∂B(0, ρ) ∩ Ω` roughly `spacing` apart, keeping only those at
/// least `gap` below the graph.
pub fn sphere_section(domain: &Domain, rho: f64, spacing: f64, gap: f64) -> Vec<[f64; 3]> {
    let area = 4.0 * core::f64::consts::PI * rho * rho;
    let count = (math::ceil(area / (spacing * spacing)) as usize).max(32);
    math::fibonacci_sphere(count)
        .into_iter()
        .map(|d| [rho * d[0], rho * d[1], rho * d[2]])
        .filter(|p| domain.inside(p) && domain.height_above(p) - p[2] >= gap)
        .collect()
}

/// Whether the open ball `B(c, r)` misses Γ₂ and lies on the Ω side of the
/// graph, allowing tangency.
pub fn clear_of_gamma2(domain: &Domain, c: &[f64], r: f64) -> bool {
    c[2] < domain.height_above(c) && domain.graph_distance(c, 1.5 * r) >= r * (1.0 - TANGENCY_TOL)
}

/// Whether the open ball `B(c, r)` lies in Ω (away from both Γ₂ and Γ₁).
fn ball_in_domain(domain: &Domain, c: &[f64], r: f64) -> bool {
    clear_of_gamma2(domain, c, r) && domain.gamma1().distance(c) >= r && domain.inside(c)
}

/// Γ₁ points in the inner layer, about `spacing` apart, thinned to a budget.
pub fn layer_cloud(domain: &Domain, layer: &LayerSpec, budget: usize) -> Vec<Vec<f64>> {
    let outer = Ball {
        center: alloc::vec![0.0; 3],
        radius: layer.q3 * layer.radius,
    };
    let mut spacing = layer.ball_radius() / 8.0;
    let mut cloud = Vec::new();
    for _ in 0..24 {
        cloud = domain
            .gamma1()
            .sample(&outer, spacing)
            .into_iter()
            .filter(|p| layer.inner_contains(p))
            .collect();
        if cloud.len() <= budget {
            break;
        }
        spacing *= 1.25;
    }
    cloud
}

fn cloud_capacity(atoms: Vec<Vec<f64>>, s: f64) -> Result<f64> {
    match atoms.len() {
        0 => Ok(0.0),
        _ => Ok(capacity_estimate(&CapacityProblem::with_default_constraints(atoms, s)?)?.value),
    }
}

/// Build-time sampling parameters, relative to `θR`.
const BUILD_SPACING: f64 = 1.0 / 8.0;
const BUILD_SHRINK: f64 = 0.75 * BUILD_SPACING;
const BUILD_GAP: f64 = 0.1;
/// Verification samples `S_R` this far (relative to `θR`) below Γ₂.
pub const COVER_GAP: f64 = 0.2;
const VERIFY_SPACING: f64 = 1.0 / 11.0;
const CAPACITY_BUDGET: usize = 600;
const ROOT_TRIALS: usize = 8;

/// Greedy construction of an admissible chain.
///
/// Candidate centres are a lattice of spacing `θR/candidate_density` in the
/// inner layer plus, for mid-sphere samples close to Γ₂, the point `θR`
/// straight below the graph. Cover balls are chosen greedily, linked to the
/// root through shortest paths in the candidate graph, and relabelled in
/// breadth-first order from the root.
pub fn build_chain(domain: &Domain, layer: &LayerSpec, s: f64, candidate_density: usize) -> Result<BallChain> {
    if domain.dim() != 3 {
        return Err(Error::Dimension {
            dim: domain.dim(),
            expected: "chains are built in three dimensions",
        });
    }
    if !(s > 0.0) {
        return Err(Error::param("s", "must be positive"));
    }
    if candidate_density == 0 {
        return Err(Error::param("candidate_density", "must be positive"));
    }
    let rho = layer.ball_radius();
    let samples = sphere_section(domain, layer.sphere_radius(), BUILD_SPACING * rho, BUILD_GAP * rho);
    if samples.is_empty() {
        return Err(Error::EmptyLayer);
    }
    let delta_r = layer.delta * layer.radius;

    // candidate centres; every non-root ball must be able to end a path, so
    // it has to carry the δR ball of the overlap test
    let step = rho / candidate_density as f64;
    let reach = layer.q3 * layer.radius;
    let m = math::ceil(reach / step) as i64;
    let mut lattice: Vec<[f64; 3]> = Vec::new();
    for i in -m..=m {
        for j in -m..=m {
            for k in -m..=0 {
                let c = [i as f64 * step, j as f64 * step, k as f64 * step];
                if layer.ball_fits(&c) && clear_of_gamma2(domain, &c, rho) {
                    lattice.push(c);
                }
            }
        }
    }
    let mut candidates: Vec<[f64; 3]> = lattice.iter().copied().filter(|c| ball_in_domain(domain, c, delta_r)).collect();
    for p in &samples {
        if domain.height_above(p) - p[2] < rho {
            let c = [p[0], p[1], domain.height_above(p) - rho];
            if layer.ball_fits(&c) && clear_of_gamma2(domain, &c, rho) && ball_in_domain(domain, &c, delta_r) {
                candidates.push(c);
            }
        }
    }

    // root: enlarged ball clear of Γ₂, largest Γ₁ capacity among the most
    // promising lattice points
    let cloud = layer_cloud(domain, layer, CAPACITY_BUDGET);
    let layer_capacity = cloud_capacity(cloud.clone(), s)?;
    let mut ranked: Vec<(usize, usize)> = lattice
        .iter()
        .enumerate()
        .filter(|(_, c)| clear_of_gamma2(domain, &c[..], layer.a * rho))
        .map(|(i, c)| (cloud.iter().filter(|p| dist(p, c) < rho).count(), i))
        .filter(|&(n, _)| n > 0)
        .collect();
    ranked.sort_by_key(|&(n, i)| (Reverse(n), i));
    let mut root: Option<([f64; 3], f64)> = None;
    for &(_, i) in ranked.iter().take(ROOT_TRIALS) {
        let c = lattice[i];
        let atoms: Vec<Vec<f64>> = cloud.iter().filter(|p| dist(p, &c) < rho).cloned().collect();
        let cap = cloud_capacity(atoms, s)?;
        if root.as_ref().map_or(true, |(_, best)| cap > *best) {
            root = Some((c, cap));
        }
    }
    let (root_center, root_capacity) = match root {
        Some((c, cap)) if cap > 0.0 => (c, cap),
        _ => return Err(Error::ZeroRootCapacity),
    };

    // connected greedy cover: grow from the root, always adding the linked
    // candidate that covers most new samples; when no linked candidate helps,
    // walk to the nearest useful one through the candidate graph
    let cover_r = rho * (1.0 - BUILD_SHRINK);
    let sample_buckets = Buckets::new(&samples, rho);
    let mut nodes = candidates;
    nodes.push(root_center);
    let root_node = nodes.len() - 1;
    let covers: Vec<Vec<usize>> = nodes
        .iter()
        .map(|c| sample_buckets.within(&samples, c, cover_r))
        .collect();
    let mut reachable = alloc::vec![false; samples.len()];
    for list in &covers {
        for &i in list {
            reachable[i] = true;
        }
    }
    if let Some(i) = reachable.iter().position(|r| !r) {
        return Err(Error::CoverFailed {
            point: samples[i].to_vec(),
        });
    }
    let link = match layer.overlap {
        OverlapRule::Literal => (layer.theta - layer.delta) * layer.radius,
        OverlapRule::Relaxed => 2.0 * (layer.theta - layer.delta) * layer.radius,
    } * (1.0 + 1e-12);
    let node_buckets = Buckets::new(&nodes, link.max(step));
    let linked = |i: usize, j: usize| -> bool { overlap_ok(domain, layer, &nodes[i], &nodes[j], j != root_node) };
    let successors = |i: usize| -> Vec<usize> {
        node_buckets
            .within(&nodes, &nodes[i], link)
            .into_iter()
            .filter(|&j| j != i && linked(i, j))
            .collect()
    };

    let mut cover_count = alloc::vec![0u32; samples.len()];
    let mut uncovered = samples.len();
    let mut member = alloc::vec![false; nodes.len()];
    let mut queued = alloc::vec![false; nodes.len()];
    let mut order: Vec<usize> = Vec::new();
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = BinaryHeap::new();
    let gain_of = |i: usize, count: &[u32]| covers[i].iter().filter(|&&k| count[k] == 0).count();
    let admit = |i: usize,
                     member: &mut Vec<bool>,
                     order: &mut Vec<usize>,
                     count: &mut Vec<u32>,
                     uncovered: &mut usize,
                     heap: &mut BinaryHeap<(usize, Reverse<usize>)>,
                     queued: &mut Vec<bool>| {
        member[i] = true;
        order.push(i);
        for &k in &covers[i] {
            if count[k] == 0 {
                *uncovered -= 1;
            }
            count[k] += 1;
        }
        for j in successors(i) {
            if !member[j] && !queued[j] {
                queued[j] = true;
                heap.push((gain_of(j, count), Reverse(j)));
            }
        }
    };
    admit(root_node, &mut member, &mut order, &mut cover_count, &mut uncovered, &mut heap, &mut queued);
    while uncovered > 0 {
        let mut progressed = false;
        while let Some((stale, Reverse(i))) = heap.pop() {
            if member[i] {
                continue;
            }
            let gain = gain_of(i, &cover_count);
            if gain == 0 {
                queued[i] = false;
                continue;
            }
            if gain < stale {
                heap.push((gain, Reverse(i)));
                continue;
            }
            admit(i, &mut member, &mut order, &mut cover_count, &mut uncovered, &mut heap, &mut queued);
            progressed = true;
            break;
        }
        if progressed {
            continue;
        }
        // BFS from the current chain to the nearest candidate with gain
        let mut parent = alloc::vec![usize::MAX; nodes.len()];
        let mut queue: VecDeque<usize> = order.iter().copied().collect();
        for &i in &order {
            parent[i] = i;
        }
        let mut target = None;
        while let Some(i) = queue.pop_front() {
            if !member[i] && gain_of(i, &cover_count) > 0 {
                target = Some(i);
                break;
            }
            for j in successors(i) {
                if parent[j] == usize::MAX {
                    parent[j] = i;
                    queue.push_back(j);
                }
            }
        }
        let Some(t) = target else {
            let k = cover_count.iter().position(|&c| c == 0).unwrap_or(0);
            return Err(Error::CoverFailed {
                point: samples[k].to_vec(),
            });
        };
        let mut path = Vec::new();
        let mut i = t;
        while !member[i] {
            path.push(i);
            i = parent[i];
        }
        for &i in path.iter().rev() {
            admit(i, &mut member, &mut order, &mut cover_count, &mut uncovered, &mut heap, &mut queued);
        }
    }

    // prune leaves whose samples are covered elsewhere, latest first
    let mut degree = alloc::vec![0usize; nodes.len()];
    let mut member_adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &i in &order {
        let near: Vec<usize> = node_buckets
            .within(&nodes, &nodes[i], link)
            .into_iter()
            .filter(|&j| j != i && member[j] && (linked(i, j) || linked(j, i)))
            .collect();
        degree[i] = near.len();
        member_adj.insert(i, near);
    }
    for &i in order.iter().rev() {
        if i == root_node || degree[i] != 1 {
            continue;
        }
        if covers[i].iter().all(|&k| cover_count[k] >= 2) {
            // the surviving neighbour must still reach the root without i;
            // removing a leaf never disconnects anyone else
            member[i] = false;
            for &k in &covers[i] {
                cover_count[k] -= 1;
            }
            for &j in &member_adj[&i] {
                if member[j] {
                    degree[j] -= 1;
                }
            }
            degree[i] = 0;
        }
    }

    // relabel in BFS order from the root
    let mut label = BTreeMap::new();
    label.insert(root_node, 0usize);
    let mut bfs = alloc::vec![root_node];
    let mut head = 0;
    while head < bfs.len() {
        let i = bfs[head];
        head += 1;
        for j in successors(i) {
            if member[j] && !label.contains_key(&j) {
                label.insert(j, bfs.len());
                bfs.push(j);
            }
        }
    }
    if let Some(&lost) = order.iter().find(|&&i| member[i] && !label.contains_key(&i)) {
        return Err(Error::Disconnected { index: lost });
    }
    let balls: Vec<Ball> = bfs
        .iter()
        .map(|&i| Ball {
            center: nodes[i].to_vec(),
            radius: rho,
        })
        .collect();
    let mut adjacency = Vec::new();
    for (a, &i) in bfs.iter().enumerate() {
        for j in node_buckets.within(&nodes, &nodes[i], link) {
            if let Some(&b) = label.get(&j) {
                if a < b && (linked(i, j) || linked(j, i)) {
                    adjacency.push((a, b));
                }
            }
        }
    }
    adjacency.sort_unstable();
    Ok(BallChain {
        balls,
        adjacency,
        kappa_measured: if layer_capacity > 0.0 { root_capacity / layer_capacity } else { 0.0 },
        root_capacity,
        layer_capacity,
    })
}

/// Overlap test for the step from the ball at `from` to the ball at `to`.
/// The small ball must avoid Γ₁ and Γ₂; `to_is_chain_end` is false only
/// when `to` is the root.
fn overlap_ok(domain: &Domain, layer: &LayerSpec, from: &[f64], to: &[f64], to_is_chain_end: bool) -> bool {
    let rho = layer.ball_radius();
    let dr = layer.delta * layer.radius;
    let d = dist(from, to);
    match layer.overlap {
        OverlapRule::Literal => to_is_chain_end && d + dr <= rho * (1.0 + 1e-12) && ball_in_domain(domain, to, dr),
        OverlapRule::Relaxed => {
            let mid = [0.5 * (from[0] + to[0]), 0.5 * (from[1] + to[1]), 0.5 * (from[2] + to[2])];
            0.5 * d + dr <= rho * (1.0 + 1e-12) && ball_in_domain(domain, &mid, dr)
        }
    }
}

/// Outcome of [`verify_chain`]; every condition carries its worst margin.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    /// Condition 1: `C_s(B⁰ ∩ Γ₁) / C_s(Γ₁ ∩ Û_R)` against the declared `κ`.
    pub capacity_ratio: f64,
    pub capacity_ok: bool,
    /// Condition 2: smallest `dist(ξ, Γ₂) − radius` over the balls (the
    /// root with its enlarged radius), in units of `R`.
    pub gamma2_margin: f64,
    pub gamma2_ok: bool,
    /// Every ball lies in the inner layer.
    pub containment_ok: bool,
    /// Condition 3: every ball reaches the root through edges that pass the
    /// overlap test.
    pub connectivity_ok: bool,
    pub failing_edges: Vec<(usize, usize)>,
    pub unreachable: Vec<usize>,
    /// Condition 4: largest `dist(x, nearest centre) − θR` over the samples
    /// of `S_R`, in units of `R`.
    pub cover_excess: f64,
    pub cover_ok: bool,
    pub uncovered: Option<Vec<f64>>,
}

impl ChainReport {
    pub fn all_ok(&self) -> bool {
        self.capacity_ok && self.gamma2_ok && self.containment_ok && self.connectivity_ok && self.cover_ok
    }
}

/// Re-check the four admissibility conditions with fresh samples.
pub fn verify_chain(domain: &Domain, chain: &BallChain, layer: &LayerSpec, s: f64) -> Result<ChainReport> {
    if chain.balls.is_empty() {
        return Err(Error::Empty("chain has no balls"));
    }
    let rho = layer.ball_radius();
    let r_unit = layer.radius;

    // 1: capacities on a cloud sampled with a different budget
    let cloud = layer_cloud(domain, layer, CAPACITY_BUDGET * 3 / 4);
    let root = chain.root();
    let root_atoms: Vec<Vec<f64>> = cloud.iter().filter(|p| dist(p, &root.center) < root.radius).cloned().collect();
    let c_root = cloud_capacity(root_atoms, s)?;
    let c_layer = cloud_capacity(cloud, s)?;
    let capacity_ratio = if c_layer > 0.0 { c_root / c_layer } else { 0.0 };
    let capacity_ok = c_root > 0.0 && capacity_ratio >= layer.kappa;

    // 2: distance to the graph and dense graph samples
    let mut gamma2_margin = f64::INFINITY;
    let mut gamma2_ok = true;
    let mut containment_ok = true;
    for (k, b) in chain.balls.iter().enumerate() {
        let r = if k == 0 { layer.a * b.radius } else { b.radius };
        let below = b.center[2] < domain.height_above(&b.center);
        let d = domain.graph_distance(&b.center, 1.5 * r);
        gamma2_margin = gamma2_margin.min((d - r) / r_unit);
        let probe = Ball {
            center: b.center.clone(),
            radius: r * (1.0 - TANGENCY_TOL),
        };
        let hits = domain.sample_gamma2(&probe, r / 16.0);
        if !below || !hits.is_empty() || d < r * (1.0 - TANGENCY_TOL) {
            gamma2_ok = false;
        }
        if (b.radius - rho).abs() > 1e-12 * rho || !layer.ball_fits(&b.center) {
            containment_ok = false;
        }
    }

    // 3: overlap balls sampled against both balls and Ω
    let n = chain.balls.len();
    let mut good: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    let mut failing_edges = Vec::new();
    for &(i, j) in &chain.adjacency {
        if i >= n || j >= n {
            failing_edges.push((i, j));
            continue;
        }
        let fwd = j != 0 && overlap_sampled(domain, layer, &chain.balls[i], &chain.balls[j]);
        let bwd = i != 0 && overlap_sampled(domain, layer, &chain.balls[j], &chain.balls[i]);
        if fwd {
            good[i].push(j);
        }
        if bwd {
            good[j].push(i);
        }
        if !fwd && !bwd {
            failing_edges.push((i, j));
        }
    }
    let mut seen = alloc::vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for &j in &good[i] {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    let unreachable: Vec<usize> = (0..n).filter(|&k| !seen[k]).collect();
    let connectivity_ok = unreachable.is_empty() && failing_edges.is_empty();

    // 4: cover of the mid-sphere
    let samples = sphere_section(domain, layer.sphere_radius(), VERIFY_SPACING * rho, COVER_GAP * rho);
    let centres: Vec<[f64; 3]> = chain.balls.iter().map(|b| [b.center[0], b.center[1], b.center[2]]).collect();
    let buckets = Buckets::new(&centres, rho);
    let mut cover_excess = f64::NEG_INFINITY;
    let mut uncovered = None;
    for p in &samples {
        let near = buckets.within(&centres, p, 2.0 * rho);
        let d = near.iter().map(|&k| dist(&centres[k], p)).fold(f64::INFINITY, f64::min);
        let excess = (d - rho) / r_unit;
        if excess > cover_excess {
            cover_excess = excess;
            if excess > TANGENCY_TOL {
                uncovered = Some(p.to_vec());
            }
        }
    }
    let cover_ok = !samples.is_empty() && cover_excess <= TANGENCY_TOL;

    Ok(ChainReport {
        capacity_ratio,
        capacity_ok,
        gamma2_margin,
        gamma2_ok,
        containment_ok,
        connectivity_ok,
        failing_edges,
        unreachable,
        cover_excess,
        cover_ok,
        uncovered,
    })
}

/// Sampled overlap test for the step `from → to`.
fn overlap_sampled(domain: &Domain, layer: &LayerSpec, from: &Ball, to: &Ball) -> bool {
    let dr = layer.delta * layer.radius;
    let centre: Vec<f64> = match layer.overlap {
        OverlapRule::Literal => to.center.clone(),
        OverlapRule::Relaxed => from.center.iter().zip(&to.center).map(|(a, b)| 0.5 * (a + b)).collect(),
    };
    if !ball_in_domain(domain, &centre, dr) {
        return false;
    }
    let slack = 1.0 + 1e-9;
    let mut pts = math::ball_points(&centre, dr, 128);
    for d in math::fibonacci_sphere(64) {
        pts.push(centre.iter().zip(d.iter()).map(|(c, v)| c + dr * v).collect());
    }
    pts.iter().all(|p| {
        dist(p, &from.center) <= from.radius * slack
            && dist(p, &to.center) <= to.radius * slack
            && (domain.inside(p) || domain.graph_distance(p, dr) < 1e-9 * dr)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::presets;

    fn toy_chain(centres: &[[f64; 3]], edges: &[(usize, usize)]) -> BallChain {
        BallChain {
            balls: centres
                .iter()
                .map(|c| Ball {
                    center: c.to_vec(),
                    radius: 0.25,
                })
                .collect(),
            adjacency: edges.to_vec(),
            kappa_measured: 1.0,
            root_capacity: 1.0,
            layer_capacity: 1.0,
        }
    }

    #[test]
    fn layer_validation() {
        assert!(LayerSpec::new([1.0, 2.0, 2.0, 3.0, 4.0], 1.0, 0.25, 0.1, 0.1, 1.08, OverlapRule::Literal).is_err());
        assert!(LayerSpec::new([1.0, 2.0, 2.5, 3.0, 4.0], 1.0, 0.25, 0.6, 0.1, 1.08, OverlapRule::Literal).is_err());
        assert!(LayerSpec::new([1.0, 2.0, 2.5, 3.0, 4.0], 1.0, 0.25, 0.1, 0.1, 1.0, OverlapRule::Literal).is_err());
        let l = LayerSpec::standard(1.0, 0.1, 1.08).unwrap();
        assert!(l.ball_fits(&[0.0, 0.0, -2.5]));
        assert!(!l.ball_fits(&[0.0, 0.0, -2.1]));
    }

    #[test]
    fn paths_follow_adjacency() {
        let c = toy_chain(&[[0.0; 3], [0.1, 0.0, 0.0], [0.2, 0.0, 0.0]], &[(0, 1), (1, 2)]);
        assert_eq!(chain_path(&c, 0).unwrap(), alloc::vec![0]);
        assert_eq!(chain_path(&c, 2).unwrap(), alloc::vec![2, 1, 0]);
        let broken = toy_chain(&[[0.0; 3], [0.1, 0.0, 0.0], [0.2, 0.0, 0.0]], &[(0, 1)]);
        assert_eq!(chain_path(&broken, 2).unwrap_err(), Error::Disconnected { index: 2 });
    }

    #[test]
    fn tie_break_prefers_lower_index() {
        // square 0-1-3, 0-2-3: both routes have length two
        let c = toy_chain(&[[0.0; 3]; 4], &[(0, 2), (0, 1), (1, 3), (2, 3)]);
        assert_eq!(chain_path(&c, 3).unwrap(), alloc::vec![3, 1, 0]);
    }

    #[test]
    fn empty_mid_sphere_is_reported() {
        let d = presets::halfspace(3).restricted(alloc::sync::Arc::new(|x: &[f64]| math::norm(x) < 1.0));
        let l = LayerSpec::standard(1.0, 0.1, 1.08).unwrap();
        assert_eq!(build_chain(&d, &l, 1.0, 2).unwrap_err(), Error::EmptyLayer);
    }

    #[test]
    fn no_dirichlet_contact_means_no_root() {
        let d = presets::halfspace(3);
        let l = LayerSpec::standard(1.0, 0.1, 1.08).unwrap();
        assert_eq!(build_chain(&d, &l, 1.0, 2).unwrap_err(), Error::ZeroRootCapacity);
    }
}
