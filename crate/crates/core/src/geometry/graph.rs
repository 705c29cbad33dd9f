use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, norm};

/// A scalar function `f : ℝⁿ⁻¹ → ℝ` whose graph carries Γ₂.
pub trait Graph: Send + Sync {
    fn height(&self, xp: &[f64]) -> f64;

    /// Exact distance from `x` to the graph when it has a closed form.
    fn exact_distance(&self, _x: &[f64], _patch_radius: f64) -> Option<f64> {
        None
    }
}

impl<F> Graph for F
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn height(&self, xp: &[f64]) -> f64 {
        self(xp)
    }
}

/// `f ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlatGraph;

impl Graph for FlatGraph {
    fn height(&self, _xp: &[f64]) -> f64 {
        0.0
    }

    fn exact_distance(&self, x: &[f64], patch_radius: f64) -> Option<f64> {
        if patch_radius.is_infinite() {
            Some(x[x.len() - 1].abs())
        } else {
            None
        }
    }
}

/// `f(x′) = slope·|x′|`. A negative slope makes Ω a downward cone.
#[derive(Debug, Clone, Copy)]
pub struct ConeGraph {
    pub slope: f64,
}

impl Graph for ConeGraph {
    fn height(&self, xp: &[f64]) -> f64 {
        self.slope * norm(xp)
    }
}

/// `f(x′) = g·x′`.
#[derive(Debug, Clone)]
pub struct LinearGraph {
    pub gradient: Vec<f64>,
}

impl Graph for LinearGraph {
    fn height(&self, xp: &[f64]) -> f64 {
        math::dot(&self.gradient, xp)
    }
}

/// Values on a regular lattice of `ℝⁿ⁻¹`, interpolated piecewise linearly on
/// the Kuhn (Freudenthal) simplicial triangulation of each lattice cell.
/// Queries outside the lattice box are clamped to it.
#[derive(Debug, Clone)]
pub struct PiecewiseLinearGraph {
    origin: Vec<f64>,
    spacing: f64,
    counts: Vec<usize>,
    values: Vec<f64>,
}

impl PiecewiseLinearGraph {
    /// `values` are stored with the first coordinate varying fastest.
    pub fn new(origin: Vec<f64>, spacing: f64, counts: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if origin.len() != counts.len() || origin.is_empty() {
            return Err(Error::param("counts", "dimension mismatch"));
        }
        if counts.iter().any(|&c| c < 2) {
            return Err(Error::param("counts", "need at least two samples per axis"));
        }
        if counts.iter().product::<usize>() != values.len() {
            return Err(Error::param("values", "length does not match the lattice"));
        }
        if !(spacing > 0.0) {
            return Err(Error::param("spacing", "must be positive"));
        }
        Ok(PiecewiseLinearGraph {
            origin,
            spacing,
            counts,
            values,
        })
    }

    /// Build from scattered `(x′, f)` rows that lie on a regular lattice.
    pub fn from_samples(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or(Error::Empty("graph samples"))?;
        let d = first.len() - 1;
        if d == 0 {
            return Err(Error::param("samples", "need x′ coordinates and a value"));
        }
        let mut axes: Vec<Vec<f64>> = alloc::vec![Vec::new(); d];
        for row in rows {
            if row.len() != d + 1 {
                return Err(Error::param("samples", "ragged rows"));
            }
            for k in 0..d {
                axes[k].push(row[k]);
            }
        }
        for a in axes.iter_mut() {
            a.sort_by(|x, y| x.total_cmp(y));
            a.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        }
        let spacing = axes[0][1.min(axes[0].len() - 1)] - axes[0][0];
        let origin: Vec<f64> = axes.iter().map(|a| a[0]).collect();
        let counts: Vec<usize> = axes.iter().map(|a| a.len()).collect();
        let mut values = alloc::vec![f64::NAN; counts.iter().product()];
        for row in rows {
            let mut idx = 0;
            let mut stride = 1;
            for k in 0..d {
                let i = math::round((row[k] - origin[k]) / spacing);
                if (origin[k] + i * spacing - row[k]).abs() > 1e-9 * spacing.max(1.0) {
                    return Err(Error::param("samples", "points are not on a regular lattice"));
                }
                idx += i as usize * stride;
                stride *= counts[k];
            }
            values[idx] = row[d];
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::param("samples", "lattice has missing values"));
        }
        Self::new(origin, spacing, counts, values)
    }

    fn value_at(&self, idx: &[usize]) -> f64 {
        let mut flat = 0;
        let mut stride = 1;
        for (k, &i) in idx.iter().enumerate() {
            flat += i * stride;
            stride *= self.counts[k];
        }
        self.values[flat]
    }
}

impl Graph for PiecewiseLinearGraph {
    fn height(&self, xp: &[f64]) -> f64 {
        let d = self.counts.len();
        let mut base = alloc::vec![0usize; d];
        let mut frac = alloc::vec![0.0; d];
        for k in 0..d {
            let t = ((xp[k] - self.origin[k]) / self.spacing).clamp(0.0, (self.counts[k] - 1) as f64);
            let i = (math::floor(t) as usize).min(self.counts[k] - 2);
            base[k] = i;
            frac[k] = t - i as f64;
        }
        // Walk the simplex vertices in order of decreasing fractional part.
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| frac[b].total_cmp(&frac[a]).then(a.cmp(&b)));
        let mut vertex = base.clone();
        let mut prev = 1.0;
        let mut acc = 0.0;
        for &k in &order {
            acc += (prev - frac[k]) * self.value_at(&vertex);
            prev = frac[k];
            vertex[k] += 1;
        }
        acc + prev * self.value_at(&vertex)
    }
}

pub(crate) struct ScaledGraph {
    pub inner: Arc<dyn Graph>,
    pub t: f64,
}

impl Graph for ScaledGraph {
    fn height(&self, xp: &[f64]) -> f64 {
        let y: Vec<f64> = xp.iter().map(|v| v / self.t).collect();
        self.t * self.inner.height(&y)
    }

    fn exact_distance(&self, x: &[f64], patch_radius: f64) -> Option<f64> {
        let y: Vec<f64> = x.iter().map(|v| v / self.t).collect();
        self.inner
            .exact_distance(&y, patch_radius / self.t)
            .map(|d| d * self.t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_linear_reproduces_affine_data() {
        let mut rows = Vec::new();
        for i in 0..5 {
            for j in 0..4 {
                let x = -1.0 + 0.5 * i as f64;
                let y = -1.0 + 0.5 * j as f64;
                rows.push(alloc::vec![x, y, 0.3 * x - 0.7 * y]);
            }
        }
        let g = PiecewiseLinearGraph::from_samples(&rows).unwrap();
        for p in [[0.1, 0.2], [-0.77, 0.31], [0.9, -0.9]] {
            assert!((g.height(&p) - (0.3 * p[0] - 0.7 * p[1])).abs() < 1e-12);
        }
    }

    #[test]
    fn piecewise_linear_hits_nodes() {
        let rows = alloc::vec![
            alloc::vec![0.0, 0.0, 0.0],
            alloc::vec![1.0, 0.0, 1.0],
            alloc::vec![0.0, 1.0, 2.0],
            alloc::vec![1.0, 1.0, 5.0],
        ];
        let g = PiecewiseLinearGraph::from_samples(&rows).unwrap();
        assert_eq!(g.height(&[1.0, 1.0]), 5.0);
        assert_eq!(g.height(&[0.0, 1.0]), 2.0);
        // on the diagonal of the Kuhn split the value is the average of the
        // two ends
        assert!((g.height(&[0.5, 0.5]) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_irregular_samples() {
        let rows = alloc::vec![
            alloc::vec![0.0, 0.0, 0.0],
            alloc::vec![1.0, 0.0, 1.0],
            alloc::vec![0.0, 1.0, 2.0],
        ];
        assert!(PiecewiseLinearGraph::from_samples(&rows).is_err());
    }
}
