//! The radial barrier `w(x) = αˢRˢ/|x − c|ˢ − αˢ/aˢ`, its certification
//! against the five barrier conditions, and the dilation factor `a(L, ε)`.

use alloc::vec::Vec;

use crate::coeffs::{quadratic_form, trace, CoefficientField};
use crate::error::{Error, Result};
use crate::geometry::{Ball, Domain, VectorField};
use crate::math::{self, dist, dot, norm, sub};

/// Parameters of the radial barrier between `B(c, R)` and `B(c, aR)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierSpec {
    s: f64,
    alpha: f64,
    a: f64,
    radius: f64,
    center: Vec<f64>,
}

impl BarrierSpec {
    pub fn new(s: f64, alpha: f64, a: f64, radius: f64, center: Vec<f64>) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::param("s", "must be positive"));
        }
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(Error::param("alpha", "need 0 < α < 1/2"));
        }
        if !(a > 1.0) || !a.is_finite() {
            return Err(Error::param("a", "dilation factor must exceed 1"));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::param("radius", "must be positive"));
        }
        Ok(BarrierSpec {
            s,
            alpha,
            a,
            radius,
            center,
        })
    }

    /// Check `s ≥ e₁ − 2` for the given field value of `e₁`.
    pub fn check_exponent(&self, e1: f64) -> Result<()> {
        if self.s < e1 - 2.0 - 1e-12 {
            return Err(Error::param("s", "below e₁ − 2, the radial power is not a subsolution"));
        }
        Ok(())
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// `αˢ(1 − a^{−s})`, the floor of `w` on `B(c, R)`.
    pub fn eta0(&self) -> f64 {
        math::powf(self.alpha, self.s) * (1.0 - math::powf(self.a, -self.s))
    }

    /// `αˢRˢ`, the amplitude of the radial term.
    fn amplitude(&self) -> f64 {
        math::powf(self.alpha * self.radius, self.s)
    }
}

/// `w(x)`.
pub fn barrier_eval(spec: &BarrierSpec, x: &[f64]) -> Result<f64> {
    let r = dist(x, &spec.center);
    if r == 0.0 {
        return Err(Error::Singular("barrier evaluated at its center"));
    }
    Ok(spec.amplitude() * math::powf(r, -spec.s) - math::powf(spec.alpha / spec.a, spec.s))
}

/// `∇w(x) = −s αˢRˢ |x − c|^{−s−2} (x − c)`.
pub fn barrier_gradient(spec: &BarrierSpec, x: &[f64]) -> Result<Vec<f64>> {
    let d = sub(x, &spec.center);
    let r = norm(&d);
    if r == 0.0 {
        return Err(Error::Singular("barrier gradient at its center"));
    }
    let f = -spec.s * spec.amplitude() * math::powf(r, -spec.s - 2.0);
    Ok(d.iter().map(|v| f * v).collect())
}

/// `L|x|^{−s} = s|x|^{−s−2}(tr a(x) − (s+2) x̂ᵀa(x)x̂)`.
pub fn radial_l_apply(field: &CoefficientField, s: f64, x: &[f64]) -> Result<f64> {
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::Singular("radial power at the origin"));
    }
    Ok(s * math::powf(r, -s - 2.0) * radial_bracket(field, s, x, x))
}

/// `tr a(x) − (s+2) x̂ᵀa(x)x̂` with `x̂ = direction/|direction|`, the factor
/// that decides the sign of `L|·|^{−s}`.
fn radial_bracket(field: &CoefficientField, s: f64, x: &[f64], direction: &[f64]) -> f64 {
    let n = field.dim();
    let m = field.matrix_at(x);
    let r = norm(direction);
    let xhat: Vec<f64> = direction.iter().map(|v| v / r).collect();
    trace(&m, n) - (s + 2.0) * quadratic_form(&m, n, &xhat)
}

/// The dilation factor and the angular slack it was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dilation {
    pub a: f64,
    pub eps_tilde: f64,
}

/// Largest `a` for which the oblique derivative of the barrier stays
/// nonpositive on a Lipschitz Γ₂ with constant `L` and field margin `ε`.
///
/// With `φ = cot⁻¹L`, `ε̃ = min(sin φ − sin(φ−ε), cos(φ−ε) − cos φ)` and `a`
/// solves `√(a²−1)(√(1+L²) + ε̃(L−1)) = ε̃(L+1)`.
pub fn compute_a(lipschitz: f64, eps: f64) -> Result<Dilation> {
    if !(lipschitz >= 0.0) {
        return Err(Error::param("L", "must be nonnegative"));
    }
    let phi = math::arccot(lipschitz);
    if !(eps > 0.0 && eps < phi) {
        return Err(Error::param("eps", "need 0 < ε < cot⁻¹(L)"));
    }
    let hyp = math::sqrt(1.0 + lipschitz * lipschitz);
    let (sin_phi, cos_phi) = (1.0 / hyp, lipschitz / hyp);
    let eps_tilde = (sin_phi - math::sin(phi - eps)).min(math::cos(phi - eps) - cos_phi);
    let denom = hyp + eps_tilde * (lipschitz - 1.0);
    if !(eps_tilde > 0.0) || !(denom > 0.0) {
        return Err(Error::MarginTooSmall { eps_tilde });
    }
    let t = eps_tilde * (lipschitz + 1.0) / denom;
    Ok(Dilation {
        a: math::sqrt(1.0 + t * t),
        eps_tilde,
    })
}

/// Outcome of [`verify_barrier`]; violations are measured in the
/// dimensionless units described on each field.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierReport {
    /// `Lw ≤ 0` on `Ω ∩ B(c, aR)`, judged by `s(tr a − (s+2)x̂ᵀax̂)`.
    pub sub_elliptic_ok: bool,
    /// `w ≤ 1` on `Γ₁ ∩ B(c, aR)`.
    pub dirichlet_bound_ok: bool,
    /// `∂w/∂ℓ ≤ 0` on `Γ₂ ∩ B(c, aR)`, judged by `−x̂·ℓ`.
    pub oblique_sign_ok: bool,
    /// `w ≤ 0` on `Ω̄ ∩ ∂B(c, aR)`.
    pub outer_zero_ok: bool,
    /// `w ≥ η₀` on `Ω ∩ B(c, R)`.
    pub lower_bound_ok: bool,
    pub eta0: f64,
    /// Largest violation over all five conditions (nonpositive when all hold).
    pub worst_violation: f64,
    /// Samples checked per condition, in the order above.
    pub samples: [usize; 5],
}

impl BarrierReport {
    pub fn all_ok(&self) -> bool {
        self.sub_elliptic_ok
            && self.dirichlet_bound_ok
            && self.oblique_sign_ok
            && self.outer_zero_ok
            && self.lower_bound_ok
    }
}

/// Tolerance of the analytic barrier checks.
pub const BARRIER_TOL: f64 = 1e-9;

/// Check the five barrier conditions on sampled points, using closed-form
/// values and derivatives of `w`. `sample_budget` bounds the samples per
/// condition.
pub fn verify_barrier(
    spec: &BarrierSpec,
    domain: &Domain,
    field: &CoefficientField,
    ell: &VectorField,
    sample_budget: usize,
) -> Result<BarrierReport> {
    let n = domain.dim();
    if spec.center.len() != n || field.dim() != n {
        return Err(Error::Dimension {
            dim: spec.center.len(),
            expected: "barrier, field and domain dimensions must agree",
        });
    }
    let budget = sample_budget.max(16);
    let c = &spec.center;
    let big = Ball::new(c.clone(), spec.a * spec.radius)?;
    let spacing = big.radius * math::sqrt(4.0 / budget as f64);
    let mut worst = f64::NEG_INFINITY;
    let mut counts = [0usize; 5];

    // (i) sub-ellipticity inside the big ball
    let mut v1 = f64::NEG_INFINITY;
    for x in math::ball_points(c, big.radius, budget) {
        if !domain.inside(&x) || dist(&x, c) == 0.0 {
            continue;
        }
        counts[0] += 1;
        let d = sub(&x, c);
        v1 = v1.max(spec.s * radial_bracket(field, spec.s, &x, &d));
    }

    // (ii) w ≤ 1 on Γ₁
    let mut v2 = f64::NEG_INFINITY;
    for y in domain.gamma1().sample(&big, spacing) {
        if dist(&y, c) == 0.0 {
            v2 = f64::INFINITY;
            continue;
        }
        counts[1] += 1;
        v2 = v2.max(barrier_eval(spec, &y)? - 1.0);
    }

    // (iii) oblique derivative on Γ₂
    let mut v3 = f64::NEG_INFINITY;
    let mut l = alloc::vec![0.0; n];
    for y in domain.sample_gamma2(&big, spacing) {
        let d = sub(&y, c);
        let r = norm(&d);
        if r == 0.0 {
            continue;
        }
        counts[2] += 1;
        ell.direction(&y, &mut l);
        v3 = v3.max(-dot(&d, &l) / r);
    }

    // (iv) w ≤ 0 on the closure of Ω on the outer sphere
    let mut v4 = f64::NEG_INFINITY;
    for d in math::sphere_directions(n, budget) {
        let x: Vec<f64> = c.iter().zip(&d).map(|(a, b)| a + big.radius * b).collect();
        let closure = domain.inside(&x) || x[n - 1] <= domain.height_above(&x) + 1e-12;
        if !closure {
            continue;
        }
        counts[3] += 1;
        v4 = v4.max(barrier_eval(spec, &x)?);
    }

    // (v) w ≥ η₀ in the small ball; the infimum sits on the sphere |x − c| = R
    let eta0 = spec.eta0();
    let mut v5 = f64::NEG_INFINITY;
    let small_pts = math::ball_points(c, spec.radius, budget / 2);
    let rim = math::sphere_directions(n, budget / 2)
        .into_iter()
        .map(|d| c.iter().zip(&d).map(|(a, b)| a + spec.radius * b).collect::<Vec<f64>>());
    for x in small_pts.into_iter().chain(rim) {
        if !domain.inside(&x) || dist(&x, c) == 0.0 {
            continue;
        }
        counts[4] += 1;
        v5 = v5.max(eta0 - barrier_eval(spec, &x)?);
    }

    let ok = |v: f64| v <= BARRIER_TOL;
    for v in [v1, v2, v3, v4, v5] {
        worst = worst.max(v);
    }
    Ok(BarrierReport {
        sub_elliptic_ok: ok(v1),
        dirichlet_bound_ok: ok(v2),
        oblique_sign_ok: ok(v3),
        outer_zero_ok: ok(v4),
        lower_bound_ok: ok(v5),
        eta0,
        worst_violation: if worst.is_finite() { worst } else { 0.0 },
        samples: counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::presets;
    use core::f64::consts::PI;

    fn spec(s: f64, alpha: f64, a: f64) -> BarrierSpec {
        BarrierSpec::new(s, alpha, a, 1.0, alloc::vec![0.0, 0.0, -1.0]).unwrap()
    }

    #[test]
    fn barrier_values() {
        let w = spec(1.0, 0.25, 1.1);
        assert!(barrier_eval(&w, &[0.0, 1.1, -1.0]).unwrap().abs() < 1e-15);
        let at_alpha = barrier_eval(&w, &[0.25, 0.0, -1.0]).unwrap();
        assert!((at_alpha - (1.0 - 0.25 / 1.1)).abs() < 1e-15);
        let at_r = barrier_eval(&w, &[0.0, 0.0, 0.0]).unwrap();
        assert!((at_r - 0.022727272727).abs() < 1e-10);
        assert!(barrier_eval(&w, &[0.0, 0.0, -1.0]).is_err());
    }

    #[test]
    fn gradient_matches_difference_quotient() {
        let w = spec(1.7, 0.3, 1.2);
        let x = [0.3, -0.2, -0.4];
        let g = barrier_gradient(&w, &x).unwrap();
        for k in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += 1e-6;
            xm[k] -= 1e-6;
            let fd = (barrier_eval(&w, &xp).unwrap() - barrier_eval(&w, &xm).unwrap()) / 2e-6;
            assert!((fd - g[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn spec_validation() {
        assert!(BarrierSpec::new(1.0, 0.25, 0.9, 1.0, alloc::vec![0.0; 3]).is_err());
        assert!(BarrierSpec::new(1.0, 0.5, 1.1, 1.0, alloc::vec![0.0; 3]).is_err());
        assert!(BarrierSpec::new(0.0, 0.25, 1.1, 1.0, alloc::vec![0.0; 3]).is_err());
    }

    #[test]
    fn radial_examples() {
        let id = CoefficientField::identity(3);
        assert!(radial_l_apply(&id, 1.0, &[0.3, -1.2, 0.7]).unwrap().abs() < 1e-13);
        assert!((radial_l_apply(&id, 2.0, &[1.0, 0.0, 0.0]).unwrap() + 2.0).abs() < 1e-14);
        assert!(radial_l_apply(&id, 1.0, &[0.0; 3]).is_err());
    }

    #[test]
    fn radial_equality_along_min_eigenvector() {
        let f = CoefficientField::diagonal(alloc::vec![1.0, 2.0, 3.0]).unwrap();
        let e1 = crate::coeffs::e1(&f, &[alloc::vec![0.0; 3]]).unwrap();
        let v = radial_l_apply(&f, e1 - 2.0, &[2.5, 0.0, 0.0]).unwrap();
        assert!(v.abs() < 1e-10);
    }

    #[test]
    fn dilation_examples() {
        let d = compute_a(0.0, PI / 4.0).unwrap();
        assert!((d.eps_tilde - (1.0 - core::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-15);
        assert!((d.a - 1.08239).abs() < 1e-5);
        let tiny = compute_a(1.0, 1e-9).unwrap();
        assert!(tiny.a - 1.0 < 1e-8);
        assert!(compute_a(1.0, PI / 4.0).is_err());
        assert!(compute_a(-1.0, 0.1).is_err());
    }

    #[test]
    fn eta0_example() {
        let a = compute_a(0.0, PI / 4.0).unwrap().a;
        let w = spec(1.0, 0.25, a);
        // 0.25·(1 − 1/1.0823922002923940)
        assert!((w.eta0() - 0.019030116872178).abs() < 1e-12);
    }

    #[test]
    fn halfspace_barrier_certifies() {
        let a = compute_a(0.0, PI / 4.0).unwrap().a;
        let w = spec(1.0, 0.25, a);
        let domain = presets::halfspace(3);
        let ell = VectorField::vertical(3, PI / 4.0).unwrap();
        let report = verify_barrier(&w, &domain, &CoefficientField::identity(3), &ell, 2000).unwrap();
        assert!(report.all_ok(), "{report:?}");
        assert!(report.worst_violation <= 1e-9);
        assert!(report.samples.iter().enumerate().all(|(i, &c)| i == 1 || c > 0));
    }

    #[test]
    fn barrier_fails_when_too_wide() {
        // a ball reaching past the flat boundary sees Γ₂ points below its center
        let w = BarrierSpec::new(1.0, 0.25, 1.5, 1.0, alloc::vec![0.0, 0.0, -0.2]).unwrap();
        let domain = presets::halfspace(3);
        let ell = VectorField::constant(&[0.6, 0.0, 0.8], 0.1).unwrap();
        let report = verify_barrier(&w, &domain, &CoefficientField::identity(3), &ell, 1000).unwrap();
        assert!(!report.oblique_sign_ok);
    }
}
