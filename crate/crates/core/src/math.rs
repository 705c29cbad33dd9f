//! Float helpers for `no_std` builds, small vector algebra and deterministic
//! point sets used for sampling.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn acos(x: f64) -> f64 {
    libm::acos(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// `cot⁻¹(l)` on `[0, ∞)`, with `cot⁻¹(0) = π/2`.
#[inline]
pub fn arccot(l: f64) -> f64 {
    libm::atan2(1.0, l)
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sqrt(dist2(a, b))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn axpy(a: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    a.iter().zip(d).map(|(x, y)| x + t * y).collect()
}

/// Radical inverse of `index` in `base` (van der Corput).
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// The `index`-th Halton point in `[0,1)^dim`.
pub fn halton(index: u64, dim: usize, out: &mut [f64]) {
    for (k, o) in out.iter_mut().enumerate().take(dim) {
        *o = radical_inverse(index, PRIMES[k % PRIMES.len()]);
    }
}

/// `count` nearly uniform points on the unit sphere of ℝ³ (golden-angle spiral).
pub fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - sqrt(5.0));
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = sqrt((1.0 - z * z).max(0.0));
            let phi = golden * i as f64;
            [r * cos(phi), r * sin(phi), z]
        })
        .collect()
}

/// Unit directions in ℝ^dim. Circles and spheres get even spacings; higher
/// dimensions use normalised Halton points together with the coordinate axes.
pub fn sphere_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        0 => Vec::new(),
        1 => alloc::vec![alloc::vec![1.0], alloc::vec![-1.0]],
        2 => (0..count.max(1))
            .map(|i| {
                let t = 2.0 * PI * i as f64 / count.max(1) as f64;
                alloc::vec![cos(t), sin(t)]
            })
            .collect(),
        3 => fibonacci_sphere(count.max(1))
            .into_iter()
            .map(|p| p.to_vec())
            .collect(),
        _ => {
            let mut dirs = Vec::with_capacity(count + 2 * dim);
            for k in 0..dim {
                for sign in [1.0, -1.0] {
                    let mut e = alloc::vec![0.0; dim];
                    e[k] = sign;
                    dirs.push(e);
                }
            }
            let mut p = alloc::vec![0.0; dim];
            let mut i = 1u64;
            while dirs.len() < count.max(2 * dim) {
                halton(i, dim, &mut p);
                i += 1;
                let v: Vec<f64> = p.iter().map(|x| 2.0 * x - 1.0).collect();
                let n = norm(&v);
                if n > 1e-3 && n <= 1.0 {
                    dirs.push(v.iter().map(|x| x / n).collect());
                }
            }
            dirs
        }
    }
}

/// Quasi-uniform points in the ball `B(center, radius)` of ℝ^dim.
pub fn ball_points(center: &[f64], radius: f64, count: usize) -> Vec<Vec<f64>> {
    let dim = center.len();
    let mut out = Vec::with_capacity(count);
    let mut p = alloc::vec![0.0; dim];
    let mut i = 1u64;
    while out.len() < count {
        halton(i, dim, &mut p);
        i += 1;
        let v: Vec<f64> = p.iter().map(|x| 2.0 * x - 1.0).collect();
        if norm(&v) <= 1.0 {
            out.push(center.iter().zip(&v).map(|(c, x)| c + radius * x).collect());
        }
    }
    out
}

/// Ordinary least squares `y ≈ intercept + slope·x`; returns
/// `(slope, intercept, r_squared)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Some((slope, intercept, r2))
}
