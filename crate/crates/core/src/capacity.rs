//! Riesz s-capacity `C_s(H) = sup { μ(H) : ∫ dμ(y)/|x−y|^s ≤ 1 off H }`,
//! bounded from below by discrete measures on a point cloud of `H`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lp::Simplex;
use crate::math::{self, dist2};

/// Potential values above `1 + FEAS_TOL` count as violations.
pub const FEAS_TOL: f64 = 1e-9;

/// Finite measure `Σ mᵢ δ_{yᵢ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<Vec<f64>>,
    masses: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Vec<f64>>, masses: Vec<f64>) -> Result<Self> {
        if atoms.len() != masses.len() {
            return Err(Error::param("masses", "one mass per atom"));
        }
        if masses.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::param("masses", "must be finite and nonnegative"));
        }
        Ok(DiscreteMeasure { atoms, masses })
    }

    pub fn zero(atoms: Vec<Vec<f64>>) -> Self {
        let n = atoms.len();
        DiscreteMeasure {
            atoms,
            masses: alloc::vec![0.0; n],
        }
    }

    /// Total mass `total` spread evenly over the atoms.
    pub fn uniform(atoms: Vec<Vec<f64>>, total: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Empty("atoms"));
        }
        let m = total / atoms.len() as f64;
        Self::new(atoms.clone(), alloc::vec![m; atoms.len()])
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    fn scaled(mut self, c: f64) -> Self {
        self.masses.iter_mut().for_each(|m| *m *= c);
        self
    }
}

/// `|x − y|^{−s}` from the squared distance.
#[inline]
pub(crate) fn kernel(d2: f64, s: f64) -> f64 {
    if s == 1.0 {
        1.0 / math::sqrt(d2)
    } else if s == 2.0 {
        1.0 / d2
    } else {
        math::powf(d2, -0.5 * s)
    }
}

/// `Σᵢ mᵢ / |x − yᵢ|^s`.
pub fn potential(mu: &DiscreteMeasure, s: f64, x: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for (y, &m) in mu.atoms.iter().zip(&mu.masses) {
        let d2 = dist2(x, y);
        if d2 == 0.0 {
            return Err(Error::Singular("potential evaluated at an atom"));
        }
        if m != 0.0 {
            acc += m * kernel(d2, s);
        }
    }
    Ok(acc)
}

/// A discretised capacity problem: atoms of `H`, the Riesz exponent and the
/// points off `H` where the potential is constrained.
#[derive(Debug, Clone)]
pub struct CapacityProblem {
    atoms: Vec<Vec<f64>>,
    s: f64,
    constraints: Vec<Vec<f64>>,
}

impl CapacityProblem {
    /// Constraint points must keep a positive distance from every atom.
    pub fn new(atoms: Vec<Vec<f64>>, s: f64, constraints: Vec<Vec<f64>>) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::param("s", "must be positive"));
        }
        if atoms.is_empty() {
            return Err(Error::Empty("atoms"));
        }
        let dim = atoms[0].len();
        if atoms.iter().chain(&constraints).any(|p| p.len() != dim) {
            return Err(Error::param("points", "mixed dimensions"));
        }
        for c in &constraints {
            if atoms.iter().any(|a| dist2(a, c) == 0.0) {
                return Err(Error::param("constraints", "a constraint point coincides with an atom"));
            }
        }
        Ok(CapacityProblem {
            atoms,
            s,
            constraints,
        })
    }

    /// Problem with [`default_constraints`].
    pub fn with_default_constraints(atoms: Vec<Vec<f64>>, s: f64) -> Result<Self> {
        let constraints = default_constraints(&atoms);
        Self::new(atoms, s, constraints)
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn constraints(&self) -> &[Vec<f64>] {
        &self.constraints
    }

    /// The same problem mapped by `x ↦ t·x`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        let map = |v: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            v.iter().map(|p| p.iter().map(|x| x * t).collect()).collect()
        };
        Self::new(map(&self.atoms), self.s, map(&self.constraints))
    }

    fn kernel_row(&self, c: &[f64], out: &mut [f64]) {
        for (o, a) in out.iter_mut().zip(&self.atoms) {
            *o = kernel(dist2(c, a), self.s);
        }
    }
}

/// `potential ≤ 1 + FEAS_TOL` at every constraint point.
pub fn is_admissible(mu: &DiscreteMeasure, problem: &CapacityProblem) -> bool {
    problem.constraints.iter().all(|x| match potential(mu, problem.s, x) {
        Ok(p) => p <= 1.0 + FEAS_TOL,
        Err(_) => mu.total_mass() == 0.0,
    })
}

/// Result of [`capacity_estimate`].
#[derive(Debug, Clone)]
pub struct CapacityEstimate {
    pub value: f64,
    pub witness: DiscreteMeasure,
    /// Constraint rows that entered the linear program.
    pub active_rows: usize,
    pub rounds: usize,
}

/// Maximise `Σ mᵢ` over `m ≥ 0` with potential at most one on every
/// constraint point.
///
/// Rows are generated lazily: the program starts from one constraint per
/// atom and adds the most violated points until none exceeds the bound. The
/// returned witness is rescaled by its worst potential so that it is
/// admissible for the full constraint set.
pub fn capacity_estimate(problem: &CapacityProblem) -> Result<CapacityEstimate> {
    let n = problem.atoms.len();
    if n == 1 {
        return Ok(CapacityEstimate {
            value: 0.0,
            witness: DiscreteMeasure::zero(problem.atoms.clone()),
            active_rows: 0,
            rounds: 0,
        });
    }
    let nc = problem.constraints.len();
    if nc == 0 {
        return Err(Error::Unbounded);
    }
    let mut row = alloc::vec![0.0; n];
    let mut in_lp = alloc::vec![false; nc];
    let mut lp = Simplex::new(alloc::vec![1.0; n]);

    // Seed: for every atom the constraint where it dominates the potential
    // of the uniform measure.
    let uniform: Vec<f64> = problem
        .constraints
        .iter()
        .map(|c| {
            problem.kernel_row(c, &mut row);
            row.iter().sum::<f64>()
        })
        .collect();
    let mut best_for_atom = alloc::vec![(f64::NEG_INFINITY, usize::MAX); n];
    for (i, c) in problem.constraints.iter().enumerate() {
        problem.kernel_row(c, &mut row);
        for (j, &k) in row.iter().enumerate() {
            let score = k * uniform[i];
            if score > best_for_atom[j].0 {
                best_for_atom[j] = (score, i);
            }
        }
    }
    let mut seed: Vec<usize> = best_for_atom.iter().map(|&(_, i)| i).collect();
    seed.sort_unstable();
    seed.dedup();
    for &i in &seed {
        problem.kernel_row(&problem.constraints[i], &mut row);
        lp.add_row(&row, 1.0)?;
        in_lp[i] = true;
    }

    let batch = (n / 10).max(50);
    let mut rounds = 0;
    let mut masses;
    loop {
        rounds += 1;
        lp.solve()?;
        masses = lp.solution();
        let mut violated: Vec<(f64, usize)> = Vec::new();
        for (i, c) in problem.constraints.iter().enumerate() {
            if in_lp[i] {
                continue;
            }
            problem.kernel_row(c, &mut row);
            let p: f64 = row.iter().zip(&masses).map(|(k, m)| k * m).sum();
            if p > 1.0 + 1e-12 {
                violated.push((p, i));
            }
        }
        if violated.is_empty() || rounds > 200 {
            break;
        }
        violated.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, i) in violated.iter().take(batch) {
            problem.kernel_row(&problem.constraints[i], &mut row);
            lp.add_row(&row, 1.0)?;
            in_lp[i] = true;
        }
    }
    let mut witness = DiscreteMeasure::new(problem.atoms.clone(), masses)?;
    let worst = problem
        .constraints
        .iter()
        .map(|c| potential(&witness, problem.s, c))
        .try_fold(0.0f64, |m, p| p.map(|p| m.max(p)))?;
    if worst > 1.0 {
        witness = witness.scaled(1.0 / worst);
    }
    Ok(CapacityEstimate {
        value: witness.total_mass(),
        witness,
        active_rows: lp.n_rows(),
        rounds,
    })
}

/// Exact optimum of the capacity program for at most three atoms, by
/// enumerating every vertex of the feasible polytope.
///
/// Returns `f64::INFINITY` when there are no constraints.
pub fn capacity_oracle_small(atoms: &[Vec<f64>], s: f64, constraints: &[Vec<f64>]) -> Result<f64> {
    let k = atoms.len();
    if k == 0 || k > 3 {
        return Err(Error::param("atoms", "the oracle handles one to three atoms"));
    }
    if constraints.is_empty() {
        return Ok(f64::INFINITY);
    }
    // Hyperplanes: kernel rows `K m = 1` followed by coordinate planes `mⱼ = 0`.
    let mut planes: Vec<(Vec<f64>, f64)> = constraints
        .iter()
        .map(|c| (atoms.iter().map(|a| kernel(dist2(a, c), s)).collect(), 1.0))
        .collect();
    for j in 0..k {
        let mut e = alloc::vec![0.0; k];
        e[j] = 1.0;
        planes.push((e, 0.0));
    }
    let kernel_rows = constraints.len();
    let feasible = |m: &[f64]| {
        m.iter().all(|&v| v >= -1e-12)
            && planes[..kernel_rows]
                .iter()
                .all(|(r, b)| r.iter().zip(m).map(|(a, x)| a * x).sum::<f64>() <= b + 1e-10)
    };
    let mut best = 0.0f64;
    let mut idx = alloc::vec![0usize; k];
    let p = planes.len();
    let mut choose = |idx: &[usize]| {
        let mut a: Vec<Vec<f64>> = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let mut b: Vec<f64> = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(m) = solve_dense(&mut a, &mut b) {
            if feasible(&m) {
                best = best.max(m.iter().sum());
            }
        }
    };
    match k {
        1 => {
            for i in 0..p {
                idx[0] = i;
                choose(&idx);
            }
        }
        2 => {
            for i in 0..p {
                for j in i + 1..p {
                    idx[0] = i;
                    idx[1] = j;
                    choose(&idx);
                }
            }
        }
        _ => {
            for i in 0..p {
                for j in i + 1..p {
                    for l in j + 1..p {
                        idx[0] = i;
                        idx[1] = j;
                        idx[2] = l;
                        choose(&idx);
                    }
                }
            }
        }
    }
    Ok(best)
}

/// Gaussian elimination with partial pivoting; `None` for singular systems.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-13 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = alloc::vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - tail) / a[r][r];
    }
    Some(x)
}

/// Default constraint layout around a cloud: shells of radius `1.05·r_H` and
/// `3·r_H` about the centroid (`r_H` the circumradius) and, for every atom,
/// two points half the typical atom spacing away along the local normal of
/// the cloud. Points closer than a quarter spacing to an atom are dropped.
pub fn default_constraints(atoms: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = atoms.len();
    if n == 0 {
        return Vec::new();
    }
    let dim = atoms[0].len();
    let mut centroid = alloc::vec![0.0; dim];
    for a in atoms {
        for (c, x) in centroid.iter_mut().zip(a) {
            *c += x / n as f64;
        }
    }
    let r_h = atoms
        .iter()
        .map(|a| math::dist(a, &centroid))
        .fold(0.0f64, f64::max);
    let spacing = typical_spacing(atoms);
    let scale = if r_h > 0.0 { r_h } else { spacing.max(1.0) };
    let mut out = Vec::new();
    let near_count = n.max(64);
    for (radius, count) in [(1.05 * scale, near_count), (3.0 * scale, (n / 4).max(64))] {
        for d in math::sphere_directions(dim, count) {
            out.push(centroid.iter().zip(&d).map(|(c, v)| c + radius * v).collect());
        }
    }
    if n > 1 && spacing > 0.0 {
        let neighbours = 8.min(n - 1);
        for a in atoms {
            let normal = local_normal(atoms, a, neighbours);
            for sign in [1.0, -1.0] {
                out.push(a.iter().zip(&normal).map(|(x, v)| x + sign * 0.5 * spacing * v).collect());
            }
        }
    }
    let clearance = 0.25 * spacing;
    let c2 = clearance * clearance;
    out.retain(|p: &Vec<f64>| atoms.iter().all(|a| dist2(a, p) >= c2.max(f64::MIN_POSITIVE)));
    out
}

/// Median nearest-neighbour distance of the cloud.
pub fn typical_spacing(atoms: &[Vec<f64>]) -> f64 {
    if atoms.len() < 2 {
        return 0.0;
    }
    let mut nn: Vec<f64> = atoms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            atoms
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, b)| dist2(a, b))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    nn.sort_by(|a, b| a.total_cmp(b));
    math::sqrt(nn[nn.len() / 2])
}

/// Direction of least spread of the nearest neighbours of `a` (smallest
/// eigenvector of their covariance), used as a surface normal.
fn local_normal(atoms: &[Vec<f64>], a: &[f64], k: usize) -> Vec<f64> {
    let dim = a.len();
    let mut near: Vec<(f64, usize)> = atoms
        .iter()
        .enumerate()
        .map(|(i, b)| (dist2(a, b), i))
        .collect();
    let k = (k + 1).min(near.len());
    near.select_nth_unstable_by(k - 1, |x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let mut cov = alloc::vec![0.0; dim * dim];
    for &(_, i) in &near[..k] {
        let d = math::sub(&atoms[i], a);
        for r in 0..dim {
            for c in 0..dim {
                cov[r * dim + c] += d[r] * d[c];
            }
        }
    }
    let (_, v) = crate::coeffs::min_eigen(&cov, dim);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64, z: f64) -> Vec<f64> {
        alloc::vec![x, y, z]
    }

    #[test]
    fn potential_examples() {
        let one = DiscreteMeasure::new(alloc::vec![pt(0.0, 0.0, 0.0)], alloc::vec![1.0]).unwrap();
        assert!((potential(&one, 1.0, &[2.0, 0.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        let two = DiscreteMeasure::new(alloc::vec![pt(1.0, 0.0, 0.0), pt(-1.0, 0.0, 0.0)], alloc::vec![0.5, 0.5]).unwrap();
        assert!((potential(&two, 1.0, &[0.0; 3]).unwrap() - 1.0).abs() < 1e-15);
        assert!(potential(&one, 1.0, &[0.0; 3]).is_err());
    }

    #[test]
    fn sphere_potential_outside_is_newtonian() {
        let atoms: Vec<Vec<f64>> = math::fibonacci_sphere(1000).iter().map(|p| p.to_vec()).collect();
        let mu = DiscreteMeasure::uniform(atoms, 1.0).unwrap();
        assert!((potential(&mu, 1.0, &[3.0, 0.0, 0.0]).unwrap() - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn admissibility_examples() {
        let atoms = alloc::vec![pt(0.0, 0.0, 0.0)];
        let problem = CapacityProblem::new(atoms.clone(), 1.0, alloc::vec![pt(1.0, 0.0, 0.0)]).unwrap();
        assert!(is_admissible(&DiscreteMeasure::zero(atoms.clone()), &problem));
        let heavy = DiscreteMeasure::new(atoms, alloc::vec![10.0]).unwrap();
        assert!(!is_admissible(&heavy, &problem));
    }

    #[test]
    fn single_atom_reports_zero() {
        let p = CapacityProblem::with_default_constraints(alloc::vec![pt(0.1, 0.2, 0.3)], 1.0).unwrap();
        assert_eq!(capacity_estimate(&p).unwrap().value, 0.0);
    }

    #[test]
    fn empty_constraints_are_unbounded() {
        let p = CapacityProblem::new(alloc::vec![pt(0.0, 0.0, 0.0), pt(1.0, 0.0, 0.0)], 1.0, Vec::new()).unwrap();
        assert_eq!(capacity_estimate(&p).unwrap_err(), Error::Unbounded);
    }

    #[test]
    fn oracle_examples() {
        let d = 0.7;
        let m = capacity_oracle_small(&[pt(0.0, 0.0, 0.0)], 1.0, &[pt(d, 0.0, 0.0), pt(0.0, 2.0, 0.0)]).unwrap();
        assert!((m - d).abs() < 1e-12);
        let m = capacity_oracle_small(&[pt(-d, 0.0, 0.0), pt(d, 0.0, 0.0)], 1.0, &[pt(0.0, 0.0, 0.0)]).unwrap();
        assert!((m - d).abs() < 1e-12);
    }

    #[test]
    fn estimate_matches_oracle_on_three_atoms() {
        let atoms = alloc::vec![pt(0.0, 0.0, 0.0), pt(0.5, 0.1, 0.0), pt(0.2, 0.6, -0.1)];
        let constraints: Vec<Vec<f64>> = math::fibonacci_sphere(40)
            .iter()
            .flat_map(|d| {
                [0.4, 1.2].into_iter().map(move |r| alloc::vec![0.2 + r * d[0], 0.2 + r * d[1], r * d[2]])
            })
            .collect();
        let p = CapacityProblem::new(atoms.clone(), 1.0, constraints.clone()).unwrap();
        let est = capacity_estimate(&p).unwrap();
        let exact = capacity_oracle_small(&atoms, 1.0, &constraints).unwrap();
        assert!((est.value - exact).abs() < 1e-8, "{} vs {}", est.value, exact);
        assert!(is_admissible(&est.witness, &p));
    }

    #[test]
    fn default_constraints_keep_clearance() {
        let atoms: Vec<Vec<f64>> = math::fibonacci_sphere(200).iter().map(|p| p.to_vec()).collect();
        let spacing = typical_spacing(&atoms);
        let cs = default_constraints(&atoms);
        assert!(cs.len() > 400);
        for c in &cs {
            for a in &atoms {
                assert!(math::dist(a, c) >= 0.25 * spacing - 1e-12);
            }
        }
    }
}
