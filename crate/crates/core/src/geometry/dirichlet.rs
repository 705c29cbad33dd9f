use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::Ball;
use crate::math::{self, dist, dot, norm};

/// The Dirichlet boundary Γ₁, accessed through a distance function and a
/// sampler that produces points of Γ₁ inside a query ball.
pub trait DirichletSet: Send + Sync {
    /// Euclidean distance from `x` to the set.
    fn distance(&self, x: &[f64]) -> f64;

    /// Points of the set inside `ball`, roughly `spacing` apart.
    fn sample(&self, ball: &Ball, spacing: f64) -> Vec<Vec<f64>>;

    /// Whether `x` lies in a solid obstacle bounded by this set.
    fn solid_contains(&self, _x: &[f64]) -> bool {
        false
    }
}

/// Γ₁ = ∅.
#[derive(Debug, Clone, Copy, Default)]
pub struct EmptySet;

impl DirichletSet for EmptySet {
    fn distance(&self, _x: &[f64]) -> f64 {
        f64::INFINITY
    }

    fn sample(&self, _ball: &Ball, _spacing: f64) -> Vec<Vec<f64>> {
        Vec::new()
    }
}

/// Orthonormal basis of the hyperplane orthogonal to the unit vector `normal`.
fn complement_basis(normal: &[f64]) -> Vec<Vec<f64>> {
    let n = normal.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for k in 0..n {
        let mut v = alloc::vec![0.0; n];
        v[k] = 1.0;
        let p = dot(&v, normal);
        for i in 0..n {
            v[i] -= p * normal[i];
        }
        for b in &basis {
            let p = dot(&v, b);
            for i in 0..n {
                v[i] -= p * b[i];
            }
        }
        let l = norm(&v);
        if l > 1e-8 {
            basis.push(v.iter().map(|x| x / l).collect());
            if basis.len() == n - 1 {
                break;
            }
        }
    }
    basis
}

/// A flat closed disk (codimension one ball) with the given unit normal.
#[derive(Debug, Clone)]
pub struct Disk {
    center: Vec<f64>,
    normal: Vec<f64>,
    radius: f64,
    basis: Vec<Vec<f64>>,
}

impl Disk {
    pub fn new(center: Vec<f64>, normal: &[f64], radius: f64) -> Self {
        let l = norm(normal);
        let normal: Vec<f64> = normal.iter().map(|v| v / l).collect();
        let basis = complement_basis(&normal);
        Disk {
            center,
            normal,
            radius,
            basis,
        }
    }
}

impl DirichletSet for Disk {
    fn distance(&self, x: &[f64]) -> f64 {
        let v = math::sub(x, &self.center);
        let h = dot(&v, &self.normal);
        let inplane = math::sqrt((dot(&v, &v) - h * h).max(0.0));
        if inplane <= self.radius {
            h.abs()
        } else {
            math::sqrt(h * h + (inplane - self.radius) * (inplane - self.radius))
        }
    }

    fn sample(&self, ball: &Ball, spacing: f64) -> Vec<Vec<f64>> {
        let m = math::ceil(self.radius / spacing) as i64;
        let mut out = Vec::new();
        let d = self.basis.len();
        let mut idx = alloc::vec![-m; d];
        loop {
            let coords: Vec<f64> = idx.iter().map(|&i| i as f64 * spacing).collect();
            if norm(&coords) <= self.radius {
                let mut p = self.center.clone();
                for (c, b) in coords.iter().zip(&self.basis) {
                    for i in 0..p.len() {
                        p[i] += c * b[i];
                    }
                }
                if ball.contains(&p) {
                    out.push(p);
                }
            }
            let mut k = 0;
            loop {
                if k == d {
                    return out;
                }
                idx[k] += 1;
                if idx[k] > m {
                    idx[k] = -m;
                    k += 1;
                } else {
                    break;
                }
            }
        }
    }
}

/// A planar sector with apex at the origin: points `a·u + b·v` with
/// `b ≥ 0`, `|a| ≤ b·tan(half_angle)` and `|(a, b)| ≤ r_max`.
///
/// With `u = e₁`, `v = −e₃` and a quarter-turn opening this is the slit
/// `{x₂ = 0, x₃ ≤ −|x₁|}` hanging below the junction point.
#[derive(Debug, Clone)]
pub struct Wedge {
    u: Vec<f64>,
    v: Vec<f64>,
    normal: Vec<f64>,
    half_angle: f64,
    r_max: f64,
}

impl Wedge {
    /// `u`, `v` must be orthonormal and span a plane through the origin of ℝ³.
    pub fn new(u: Vec<f64>, v: Vec<f64>, half_angle: f64, r_max: f64) -> Self {
        let normal = alloc::vec![
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ];
        Wedge {
            u,
            v,
            normal,
            half_angle,
            r_max,
        }
    }

    /// The sector `{x₂ = 0, |x₁| ≤ −x₃·tan(half_angle)}` in ℝ³.
    pub fn vertical_slit(half_angle: f64) -> Self {
        Self::new(
            alloc::vec![1.0, 0.0, 0.0],
            alloc::vec![0.0, 0.0, -1.0],
            half_angle,
            f64::INFINITY,
        )
    }

    fn planar_distance(&self, a: f64, b: f64) -> f64 {
        let r = math::sqrt(a * a + b * b);
        let angle = math::atan2(a, b).abs();
        if angle <= self.half_angle {
            return (r - self.r_max).max(0.0);
        }
        // nearest point on the boundary ray at angle ±half_angle
        let (s, c) = (libm::sin(self.half_angle), libm::cos(self.half_angle));
        let t = (a.abs() * s + b * c).clamp(0.0, self.r_max);
        let dx = a.abs() - t * s;
        let dy = b - t * c;
        math::sqrt(dx * dx + dy * dy)
    }
}

impl DirichletSet for Wedge {
    fn distance(&self, x: &[f64]) -> f64 {
        let a = dot(x, &self.u);
        let b = dot(x, &self.v);
        let h = dot(x, &self.normal);
        let p = self.planar_distance(a, b);
        math::sqrt(h * h + p * p)
    }

    fn sample(&self, ball: &Ball, spacing: f64) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        let c = &ball.center;
        let rc = norm(c);
        let r_lo = (rc - ball.radius).max(0.0);
        let r_hi = (rc + ball.radius).min(self.r_max);
        if r_hi < r_lo {
            return out;
        }
        let k0 = math::ceil(r_lo / spacing) as i64;
        let k1 = math::floor(r_hi / spacing) as i64;
        for k in k0..=k1 {
            let r = k as f64 * spacing;
            if r == 0.0 {
                let p = alloc::vec![0.0; 3];
                if ball.contains(&p) {
                    out.push(p);
                }
                continue;
            }
            let arcs = (math::ceil(2.0 * self.half_angle * r / spacing) as i64).max(1);
            for j in 0..=arcs {
                let ang = -self.half_angle + 2.0 * self.half_angle * j as f64 / arcs as f64;
                let (a, b) = (r * libm::sin(ang), r * libm::cos(ang));
                let p: Vec<f64> = (0..3).map(|i| a * self.u[i] + b * self.v[i]).collect();
                if ball.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }
}

/// A solid ball removed from Ω; Γ₁ is its sphere.
#[derive(Debug, Clone)]
pub struct BallObstacle {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl DirichletSet for BallObstacle {
    fn distance(&self, x: &[f64]) -> f64 {
        (dist(x, &self.center) - self.radius).abs()
    }

    fn sample(&self, ball: &Ball, spacing: f64) -> Vec<Vec<f64>> {
        let n = self.center.len();
        let area = match n {
            2 => 2.0 * PI * self.radius,
            _ => 4.0 * PI * self.radius * self.radius,
        };
        let count = (math::ceil(area / (spacing * spacing)) as usize).max(12);
        math::sphere_directions(n, count)
            .into_iter()
            .map(|d| math::axpy(&self.center, self.radius, &d))
            .filter(|p| ball.contains(p))
            .collect()
    }

    fn solid_contains(&self, x: &[f64]) -> bool {
        dist(x, &self.center) < self.radius
    }
}

/// A finite set of points.
#[derive(Debug, Clone)]
pub struct PointSet {
    pub points: Vec<Vec<f64>>,
}

impl DirichletSet for PointSet {
    fn distance(&self, x: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|p| dist(p, x))
            .fold(f64::INFINITY, f64::min)
    }

    fn sample(&self, ball: &Ball, _spacing: f64) -> Vec<Vec<f64>> {
        self.points.iter().filter(|p| ball.contains(p)).cloned().collect()
    }
}

/// Union of Dirichlet sets.
#[derive(Clone, Default)]
pub struct Union {
    pub parts: Vec<Arc<dyn DirichletSet>>,
}

impl DirichletSet for Union {
    fn distance(&self, x: &[f64]) -> f64 {
        self.parts
            .iter()
            .map(|p| p.distance(x))
            .fold(f64::INFINITY, f64::min)
    }

    fn sample(&self, ball: &Ball, spacing: f64) -> Vec<Vec<f64>> {
        self.parts.iter().flat_map(|p| p.sample(ball, spacing)).collect()
    }

    fn solid_contains(&self, x: &[f64]) -> bool {
        self.parts.iter().any(|p| p.solid_contains(x))
    }
}

pub(crate) struct Scaled {
    pub inner: Arc<dyn DirichletSet>,
    pub t: f64,
}

impl Scaled {
    fn down(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| v / self.t).collect()
    }
}

impl DirichletSet for Scaled {
    fn distance(&self, x: &[f64]) -> f64 {
        self.t * self.inner.distance(&self.down(x))
    }

    fn sample(&self, ball: &Ball, spacing: f64) -> Vec<Vec<f64>> {
        let b = Ball {
            center: self.down(&ball.center),
            radius: ball.radius / self.t,
        };
        self.inner
            .sample(&b, spacing / self.t)
            .into_iter()
            .map(|p| p.iter().map(|v| v * self.t).collect())
            .collect()
    }

    fn solid_contains(&self, x: &[f64]) -> bool {
        self.inner.solid_contains(&self.down(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_distance_and_samples() {
        let d = Disk::new(alloc::vec![0.0, 0.0, -2.0], &[0.0, 1.0, 0.0], 0.5);
        assert!((d.distance(&[0.0, 0.3, -2.0]) - 0.3).abs() < 1e-12);
        assert!((d.distance(&[1.0, 0.0, -2.0]) - 0.5).abs() < 1e-12);
        let b = Ball::new(alloc::vec![0.0, 0.0, -2.0], 1.0).unwrap();
        let s = d.sample(&b, 0.1);
        assert!(s.len() > 50);
        assert!(s.iter().all(|p| d.distance(p) < 1e-12));
    }

    #[test]
    fn wedge_distance() {
        let w = Wedge::vertical_slit(PI / 4.0);
        assert!(w.distance(&[0.0, 0.0, -1.0]) < 1e-15);
        assert!(w.distance(&[0.5, 0.0, -0.5]) < 1e-12);
        assert!((w.distance(&[0.0, 0.2, -1.0]) - 0.2).abs() < 1e-12);
        // above the apex the nearest point is the origin
        assert!((w.distance(&[0.0, 0.0, 0.5]) - 0.5).abs() < 1e-12);
        // beside the sector the nearest point is on the boundary ray
        let x = [1.0, 0.0, 0.0];
        assert!((w.distance(&x) - libm::sqrt(0.5)).abs() < 1e-12);
    }

    #[test]
    fn wedge_samples_lie_on_wedge() {
        let w = Wedge::vertical_slit(PI / 4.0);
        let b = Ball::new(alloc::vec![0.0, 0.0, -1.0], 0.4).unwrap();
        let s = w.sample(&b, 0.05);
        assert!(s.len() > 30);
        for p in &s {
            assert!(w.distance(p) < 1e-12);
            assert!(b.contains(p));
        }
    }

    #[test]
    fn obstacle_samples_on_sphere() {
        let o = BallObstacle {
            center: alloc::vec![0.0, 0.0, -1.0],
            radius: 0.25,
        };
        let b = Ball::new(alloc::vec![0.0, 0.0, -1.0], 1.0).unwrap();
        let s = o.sample(&b, 0.05);
        assert!(s.len() >= 12);
        assert!(s.iter().all(|p| o.distance(p) < 1e-12));
        assert!(o.solid_contains(&[0.0, 0.0, -1.1]));
    }
}
