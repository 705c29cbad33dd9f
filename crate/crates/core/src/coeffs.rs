//! Coefficient fields `a_ij(x)`, the ellipticity function
//! `e(x, ξ) = tr a(x) / ξᵀa(x)ξ` and its supremum `e₁`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::error::{Error, Result};
use crate::math::{self, norm};

type MatrixFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// Preset families of coefficient fields.
#[derive(Clone)]
pub enum FieldKind {
    Identity,
    /// Constant diagonal matrix.
    Diagonal(Vec<f64>),
    /// Constant symmetric matrix, row-major.
    Full(Vec<f64>),
    /// `diag(1 + amplitude·sin(frequency·x₁), 1, …, 1)`.
    Oscillating { amplitude: f64, frequency: f64 },
    /// Arbitrary field; the closure writes a symmetric row-major matrix.
    Custom(Arc<MatrixFn>),
}

impl fmt::Debug for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldKind::Identity => write!(f, "Identity"),
            FieldKind::Diagonal(d) => write!(f, "Diagonal({d:?})"),
            FieldKind::Full(m) => write!(f, "Full({m:?})"),
            FieldKind::Oscillating {
                amplitude,
                frequency,
            } => write!(f, "Oscillating({amplitude}, {frequency})"),
            FieldKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// A bounded, measurable, symmetric and uniformly elliptic coefficient field.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    dim: usize,
    kind: FieldKind,
    scale: f64,
}

impl CoefficientField {
    pub fn identity(dim: usize) -> Self {
        CoefficientField {
            dim,
            kind: FieldKind::Identity,
            scale: 1.0,
        }
    }

    pub fn diagonal(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|&d| !(d > 0.0)) {
            return Err(Error::param("diag", "entries must be positive"));
        }
        Ok(CoefficientField {
            dim: entries.len(),
            kind: FieldKind::Diagonal(entries),
            scale: 1.0,
        })
    }

    /// A constant matrix given row-major; rejected unless exactly symmetric.
    pub fn full(dim: usize, matrix: Vec<f64>) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(Error::param("matrix", "expected dim² entries"));
        }
        for i in 0..dim {
            for j in 0..i {
                if matrix[i * dim + j] != matrix[j * dim + i] {
                    return Err(Error::param("matrix", "must be symmetric"));
                }
            }
        }
        Ok(CoefficientField {
            dim,
            kind: FieldKind::Full(matrix),
            scale: 1.0,
        })
    }

    /// `R·diag(eigs)·Rᵀ` with `R` the rotation by `angle` in the `(x₁, x₂)` plane.
    pub fn rotated(angle: f64, eigs: Vec<f64>) -> Result<Self> {
        let n = eigs.len();
        if n < 2 {
            return Err(Error::param("eigs", "need at least two eigenvalues"));
        }
        if eigs.iter().any(|&d| !(d > 0.0)) {
            return Err(Error::param("eigs", "eigenvalues must be positive"));
        }
        let (c, s) = (math::cos(angle), math::sin(angle));
        let mut m = alloc::vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = eigs[i];
        }
        m[0] = c * c * eigs[0] + s * s * eigs[1];
        m[n + 1] = s * s * eigs[0] + c * c * eigs[1];
        let off = c * s * (eigs[0] - eigs[1]);
        m[1] = off;
        m[n] = off;
        Self::full(n, m)
    }

    pub fn oscillating(dim: usize, amplitude: f64, frequency: f64) -> Result<Self> {
        if !(amplitude.abs() < 1.0) {
            return Err(Error::param("amplitude", "need |amplitude| < 1 for ellipticity"));
        }
        Ok(CoefficientField {
            dim,
            kind: FieldKind::Oscillating {
                amplitude,
                frequency,
            },
            scale: 1.0,
        })
    }

    pub fn custom(dim: usize, f: Arc<MatrixFn>) -> Self {
        CoefficientField {
            dim,
            kind: FieldKind::Custom(f),
            scale: 1.0,
        }
    }

    /// The field multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        CoefficientField {
            dim: self.dim,
            kind: self.kind.clone(),
            scale: self.scale * c,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    /// Whether `a` does not depend on `x`.
    pub fn is_constant(&self) -> bool {
        matches!(
            self.kind,
            FieldKind::Identity | FieldKind::Diagonal(_) | FieldKind::Full(_)
        )
    }

    /// Write `a(x)` row-major into `out` (length `dim²`).
    pub fn matrix(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim;
        match &self.kind {
            FieldKind::Identity => {
                out.fill(0.0);
                for i in 0..n {
                    out[i * n + i] = 1.0;
                }
            }
            FieldKind::Diagonal(d) => {
                out.fill(0.0);
                for i in 0..n {
                    out[i * n + i] = d[i];
                }
            }
            FieldKind::Full(m) => out.copy_from_slice(m),
            FieldKind::Oscillating {
                amplitude,
                frequency,
            } => {
                out.fill(0.0);
                for i in 0..n {
                    out[i * n + i] = 1.0;
                }
                out[0] = 1.0 + amplitude * math::sin(frequency * x[0]);
            }
            FieldKind::Custom(f) => f(x, out),
        }
        if self.scale != 1.0 {
            for v in out.iter_mut() {
                *v *= self.scale;
            }
        }
    }

    pub fn matrix_at(&self, x: &[f64]) -> Vec<f64> {
        let mut m = alloc::vec![0.0; self.dim * self.dim];
        self.matrix(x, &mut m);
        m
    }
}

pub fn trace(m: &[f64], n: usize) -> f64 {
    (0..n).map(|i| m[i * n + i]).sum()
}

pub fn quadratic_form(m: &[f64], n: usize, xi: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += m[i * n + j] * xi[i] * xi[j];
        }
    }
    acc
}

/// `e(x, ξ) = Σ a_ii(x) / Σ a_ij(x) ξ_i ξ_j` for a unit vector `ξ`.
pub fn ellipticity(field: &CoefficientField, x: &[f64], xi: &[f64]) -> Result<f64> {
    let l = norm(xi);
    if (l - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitDirection { norm: l });
    }
    let m = field.matrix_at(x);
    let n = field.dim();
    Ok(trace(&m, n) / quadratic_form(&m, n, xi))
}

/// Smallest eigenvalue of a symmetric matrix together with a unit eigenvector.
///
/// 3×3 matrices use the trigonometric solution of the characteristic cubic;
/// other sizes, and nearly degenerate 3×3 spectra, fall back to cyclic Jacobi.
pub fn min_eigen(m: &[f64], n: usize) -> (f64, Vec<f64>) {
    if n == 3 {
        if let Some(r) = min_eigen_3x3(m) {
            return r;
        }
    }
    jacobi_min_eigen(m, n)
}

fn min_eigen_3x3(m: &[f64]) -> Option<(f64, Vec<f64>)> {
    let (a11, a12, a13, a22, a23, a33) = (m[0], m[1], m[2], m[4], m[5], m[8]);
    let p1 = a12 * a12 + a13 * a13 + a23 * a23;
    let q = (a11 + a22 + a33) / 3.0;
    let p2 = sq(a11 - q) + sq(a22 - q) + sq(a33 - q) + 2.0 * p1;
    let p = math::sqrt(p2 / 6.0);
    let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(f64::MIN_POSITIVE);
    if p < 1e-6 * scale {
        return None;
    }
    let b = [
        (a11 - q) / p,
        a12 / p,
        a13 / p,
        a12 / p,
        (a22 - q) / p,
        a23 / p,
        a13 / p,
        a23 / p,
        (a33 - q) / p,
    ];
    let det_b = b[0] * (b[4] * b[8] - b[5] * b[7]) - b[1] * (b[3] * b[8] - b[5] * b[6])
        + b[2] * (b[3] * b[7] - b[4] * b[6]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = math::acos(r) / 3.0;
    let e_max = q + 2.0 * p * math::cos(phi);
    let e_min = q + 2.0 * p * math::cos(phi + 2.0 * PI / 3.0);
    let e_mid = 3.0 * q - e_max - e_min;
    if (e_mid - e_min).abs() < 1e-6 * scale {
        return None;
    }
    // eigenvector of e_min: cross product of two rows of (A − e_min I)
    let r0 = [a11 - e_min, a12, a13];
    let r1 = [a12, a22 - e_min, a23];
    let r2 = [a13, a23, a33 - e_min];
    let cross = |u: &[f64; 3], v: &[f64; 3]| {
        [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ]
    };
    let cands = [cross(&r0, &r1), cross(&r0, &r2), cross(&r1, &r2)];
    let best = cands
        .iter()
        .max_by(|a, b| norm(&a[..]).total_cmp(&norm(&b[..])))
        .copied()?;
    let l = norm(&best);
    if l < 1e-12 * scale * scale {
        return None;
    }
    let mut v: Vec<f64> = best.iter().map(|x| x / l).collect();
    // one Rayleigh quotient refinement keeps the eigenvalue at full precision
    let lam = quadratic_form(m, 3, &v);
    if (lam - e_min).abs() > 1e-10 * scale {
        return None;
    }
    canonical_sign(&mut v);
    Some((lam.min(e_min).max(e_min - 1e-10 * scale), v))
}

#[inline]
fn sq(x: f64) -> f64 {
    x * x
}

fn canonical_sign(v: &mut [f64]) {
    if let Some(k) = v.iter().position(|x| x.abs() > 1e-12) {
        if v[k] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn jacobi_min_eigen(m: &[f64], n: usize) -> (f64, Vec<f64>) {
    let mut a = m.to_vec();
    let mut v = alloc::vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + math::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let k = (0..n)
        .min_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]))
        .unwrap_or(0);
    let mut vec: Vec<f64> = (0..n).map(|i| v[i * n + k]).collect();
    canonical_sign(&mut vec);
    (a[k * n + k], vec)
}

/// `e₁ = max_x max_{|ξ|=1} e(x, ξ) = max_x tr a(x) / λ_min(a(x))` over the
/// given samples.
pub fn e1(field: &CoefficientField, sample_points: &[Vec<f64>]) -> Result<f64> {
    if sample_points.is_empty() {
        return Err(Error::Empty("e1 sample points"));
    }
    let n = field.dim();
    let mut m = alloc::vec![0.0; n * n];
    let mut best = f64::NEG_INFINITY;
    for (index, x) in sample_points.iter().enumerate() {
        field.matrix(x, &mut m);
        let (lam, _) = min_eigen(&m, n);
        if !(lam > 0.0) {
            return Err(Error::NotElliptic {
                index,
                min_eigenvalue: lam,
            });
        }
        best = best.max(trace(&m, n) / lam);
    }
    Ok(best)
}

/// Diagonal dominance `a_ii ≥ Σ_{j≠i} |a_ij|`, the condition under which the
/// rotated-difference stencil is monotone.
pub fn is_diagonally_dominant(m: &[f64], n: usize) -> bool {
    (0..n).all(|i| {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| m[i * n + j].abs()).sum();
        m[i * n + i] >= off
    })
}
