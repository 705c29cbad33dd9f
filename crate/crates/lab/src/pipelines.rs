//! One function per command. Each writes its CSV tables (and SVG plots when
//! asked) and returns a one-line summary.

use std::sync::Arc;

use zaremba::barrier::{compute_a, verify_barrier, BarrierSpec};
use zaremba::capacity::{capacity_estimate, is_admissible, CapacityProblem, DiscreteMeasure};
use zaremba::chains::{build_chain, verify_chain, LayerSpec, OverlapRule};
use zaremba::coeffs::{CoefficientField, FieldKind};
use zaremba::experiments::{dichotomy_run, growth_via_barrier, DichotomyConfig};
use zaremba::fd::{aligned_box, assemble, solve, Grid, GridOptions, GridSolution, Region};
use zaremba::geometry::Domain;
use zaremba::math;

use crate::artifacts::{num, read_cloud, Artifacts};
use crate::config::{
    BarrierSection, CapacitySection, ChainSection, CloudSource, DichotomySection, GridConfig, GrowthSection,
    OverlapConfig, RunConfig, SolveSection,
};
use crate::error::LabError;
use crate::{setup, svg};

fn bool_str(b: bool) -> String {
    b.to_string()
}

fn needs_diagonals(field: &CoefficientField) -> bool {
    matches!(field.kind(), FieldKind::Full(_) | FieldKind::Custom(_))
}

fn dilation(field: &str, lipschitz: f64, epsilon: f64) -> Result<zaremba::barrier::Dilation, LabError> {
    compute_a(lipschitz, epsilon).map_err(|e| LabError::field(field, e.to_string()))
}

pub fn capacity(cfg: &RunConfig, sec: &CapacitySection, out: &mut Artifacts) -> Result<String, LabError> {
    let (set_id, atoms, masses) = match &sec.cloud {
        CloudSource::Sphere { count, radius } => {
            let pts = math::fibonacci_sphere(*count);
            ("sphere".to_string(), pts.iter().map(|p| p.iter().map(|v| v * radius).collect()).collect(), None)
        }
        CloudSource::Ball { count, radius } => ("ball".to_string(), math::ball_points(&[0.0; 3], *radius, *count), None),
        CloudSource::Csv(path) => {
            let (atoms, masses) = read_cloud(path)?;
            let id = path.file_stem().map_or("csv".into(), |s| s.to_string_lossy().into_owned());
            (id, atoms, masses)
        }
    };
    let problem = CapacityProblem::with_default_constraints(atoms, cfg.s)
        .map_err(|e| LabError::field("capacity.cloud", e.to_string()))?;
    if let Some(masses) = masses {
        let mu = DiscreteMeasure::new(problem.atoms().to_vec(), masses)
            .map_err(|e| LabError::field("capacity.cloud.csv", e.to_string()))?;
        out.csv(
            "input_measure.csv",
            &["set_id", "total_mass", "admissible"],
            [vec![set_id.clone(), num(mu.total_mass()), bool_str(is_admissible(&mu, &problem))]],
        )?;
    }
    let problem = if sec.scale != 1.0 { problem.scaled(sec.scale)? } else { problem };
    let est = capacity_estimate(&problem)?;
    out.csv(
        "capacity.csv",
        &["set_id", "s", "value", "n_atoms", "n_constraints"],
        [vec![
            set_id.clone(),
            num(cfg.s),
            num(est.value),
            problem.atoms().len().to_string(),
            problem.constraints().len().to_string(),
        ]],
    )?;
    out.csv(
        "witness.csv",
        &["x1", "x2", "x3", "mass"],
        est.witness
            .atoms()
            .iter()
            .zip(est.witness.masses())
            .map(|(p, m)| vec![num(p[0]), num(p[1]), num(p[2]), num(*m)]),
    )?;
    Ok(format!("C_{}({set_id}) = {}", cfg.s, est.value))
}

pub fn barrier(cfg: &RunConfig, sec: &BarrierSection, out: &mut Artifacts) -> Result<String, LabError> {
    let domain = setup::domain(&cfg.domain)?;
    let field = setup::coefficients(&cfg.coefficients)?;
    let ell = setup::vector_field(&cfg.ell)?;
    let d = dilation("barrier.epsilon", sec.lipschitz, sec.epsilon)?;
    let center = sec.center.map_or(vec![0.0, 0.0, -sec.radius], |c| c.to_vec());
    let spec = BarrierSpec::new(cfg.s, sec.alpha, d.a, sec.radius, center.clone())
        .map_err(|e| LabError::field("barrier", e.to_string()))?;
    let report = verify_barrier(&spec, &domain, &field, &ell, sec.samples)?;
    out.csv(
        "barrier.csv",
        &[
            "s",
            "alpha",
            "lipschitz",
            "epsilon",
            "a",
            "eps_tilde",
            "radius",
            "c1",
            "c2",
            "c3",
            "sub_elliptic_ok",
            "dirichlet_bound_ok",
            "oblique_sign_ok",
            "outer_zero_ok",
            "lower_bound_ok",
            "eta0",
            "worst_violation",
        ],
        [vec![
            num(cfg.s),
            num(sec.alpha),
            num(sec.lipschitz),
            num(sec.epsilon),
            num(d.a),
            num(d.eps_tilde),
            num(sec.radius),
            num(center[0]),
            num(center[1]),
            num(center[2]),
            bool_str(report.sub_elliptic_ok),
            bool_str(report.dirichlet_bound_ok),
            bool_str(report.oblique_sign_ok),
            bool_str(report.outer_zero_ok),
            bool_str(report.lower_bound_ok),
            num(spec.eta0()),
            num(report.worst_violation),
        ]],
    )?;
    Ok(format!(
        "a = {}, eta0 = {}, all conditions hold: {}",
        d.a,
        spec.eta0(),
        report.all_ok()
    ))
}

fn grid_solve(
    domain: &Domain,
    field: &CoefficientField,
    cfg: &RunConfig,
    grid: &GridConfig,
    data: &crate::config::DataConfig,
    tol: f64,
    max_iter: usize,
) -> Result<GridSolution, LabError> {
    let ell = setup::vector_field(&cfg.ell)?;
    let (origin, dims) = aligned_box(grid.lo, grid.hi, grid.h);
    let opts = GridOptions {
        diagonals: needs_diagonals(field),
        ..GridOptions::default()
    };
    let g = Arc::new(Grid::build(domain, origin, grid.h, dims, &opts)?);
    let system = assemble(domain, field, g, &ell, &setup::boundary_data(data))?;
    Ok(solve(&system, tol, max_iter)?)
}

fn slice_svg(u: &GridSolution, z: Option<f64>, title: &str) -> String {
    let g = u.grid();
    let [nx, ny, nz] = g.dims();
    let top = g.origin()[2] + (nz - 1) as f64 * g.h();
    let k = ((z.unwrap_or(top) - g.origin()[2]) / g.h()).round().clamp(0.0, (nz - 1) as f64) as usize;
    let rows: Vec<Vec<f64>> = (0..ny)
        .map(|j| (0..nx).map(|i| u.values()[g.flatten([i, j, k])]).collect())
        .collect();
    let z = g.origin()[2] + k as f64 * g.h();
    svg::slice(&format!("{title} at x3 = {z}"), &rows, 10)
}

pub fn solve_cmd(cfg: &RunConfig, sec: &SolveSection, out: &mut Artifacts, with_svg: bool) -> Result<String, LabError> {
    let domain = setup::domain(&cfg.domain)?;
    let field = setup::coefficients(&cfg.coefficients)?;
    let u = grid_solve(&domain, &field, cfg, &sec.grid, &sec.data, sec.tol, sec.max_iter)?;
    out.csv(
        "solution.csv",
        &["x1", "x2", "x3", "value"],
        u.nodes().map(|(_, x, v)| vec![num(x[0]), num(x[1]), num(x[2]), num(v)]),
    )?;
    let (lo, hi) = u.nodes().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (_, _, v)| (a.min(v), b.max(v)));
    out.csv(
        "solve_summary.csv",
        &["nodes", "h", "residual", "iterations", "min", "max"],
        [vec![
            u.nodes().count().to_string(),
            num(sec.grid.h),
            num(u.residual),
            u.iterations.to_string(),
            num(lo),
            num(hi),
        ]],
    )?;
    if with_svg {
        out.write("solution.svg", slice_svg(&u, sec.slice_z, "u").as_bytes())?;
    }
    Ok(format!("{} nodes, residual {:e}, range [{lo}, {hi}]", u.nodes().count(), u.residual))
}

fn overlap(o: OverlapConfig) -> OverlapRule {
    match o {
        OverlapConfig::Literal => OverlapRule::Literal,
        OverlapConfig::Relaxed => OverlapRule::Relaxed,
    }
}

pub fn chain(cfg: &RunConfig, sec: &ChainSection, out: &mut Artifacts, with_svg: bool) -> Result<String, LabError> {
    let domain = setup::domain(&cfg.domain)?;
    let a = match sec.a {
        Some(a) => a,
        None => dilation("chain.epsilon", sec.lipschitz, sec.epsilon)?.a,
    };
    let layer = LayerSpec::new(sec.q, sec.radius, sec.theta, sec.delta, sec.kappa.unwrap_or(0.5), a, overlap(sec.overlap))
        .map_err(|e| LabError::field("chain", e.to_string()))?;
    let built = build_chain(&domain, &layer, cfg.s, sec.density)?;
    let kappa = sec.kappa.unwrap_or(0.5 * built.kappa_measured);
    let layer = layer.with_kappa(kappa);
    let report = verify_chain(&domain, &built, &layer, cfg.s)?;
    let mut neighbours = vec![Vec::new(); built.balls.len()];
    for &(i, j) in &built.adjacency {
        neighbours[i].push(j);
        neighbours[j].push(i);
    }
    out.csv(
        "chain.csv",
        &["index", "c1", "c2", "c3", "radius", "adjacency"],
        built.balls.iter().enumerate().map(|(k, b)| {
            let mut adj = neighbours[k].clone();
            adj.sort_unstable();
            vec![
                k.to_string(),
                num(b.center[0]),
                num(b.center[1]),
                num(b.center[2]),
                num(b.radius),
                adj.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(";"),
            ]
        }),
    )?;
    out.csv(
        "chain_report.csv",
        &[
            "n",
            "kappa",
            "kappa_measured",
            "capacity_ratio",
            "capacity_ok",
            "gamma2_margin",
            "gamma2_ok",
            "containment_ok",
            "connectivity_ok",
            "cover_excess",
            "cover_ok",
        ],
        [vec![
            built.last_index().to_string(),
            num(kappa),
            num(built.kappa_measured),
            num(report.capacity_ratio),
            bool_str(report.capacity_ok),
            num(report.gamma2_margin),
            bool_str(report.gamma2_ok),
            bool_str(report.containment_ok),
            bool_str(report.connectivity_ok),
            num(report.cover_excess),
            bool_str(report.cover_ok),
        ]],
    )?;
    if with_svg {
        let balls: Vec<([f64; 3], f64)> = built
            .balls
            .iter()
            .map(|b| ([b.center[0], b.center[1], b.center[2]], b.radius))
            .collect();
        out.write(
            "chain.svg",
            svg::chain_projection("chain projected on (x1, x3)", &balls, &built.adjacency).as_bytes(),
        )?;
    }
    Ok(format!(
        "N = {}, kappa measured {}, admissible: {}",
        built.last_index(),
        built.kappa_measured,
        report.all_ok()
    ))
}

pub fn growth(cfg: &RunConfig, sec: &GrowthSection, out: &mut Artifacts, with_svg: bool) -> Result<String, LabError> {
    let domain = setup::domain(&cfg.domain)?;
    let field = setup::coefficients(&cfg.coefficients)?;
    let ell = setup::vector_field(&cfg.ell)?;
    let d = dilation("growth.epsilon", sec.lipschitz, sec.epsilon)?;
    let center = sec.center.map_or(vec![0.0, 0.0, -sec.radius], |c| c.to_vec());
    let spec = BarrierSpec::new(cfg.s, sec.alpha, d.a, sec.radius, center)
        .map_err(|e| LabError::field("growth", e.to_string()))?;
    let u = grid_solve(&domain, &field, cfg, &sec.grid, &sec.data, sec.tol, sec.max_iter)?;
    let slack = sec.slack.unwrap_or(5.0 * sec.grid.h);
    let g = growth_via_barrier(&domain, &field, &ell, &spec, &u, slack)?;
    out.csv(
        "growth.csv",
        &["sup_small", "sup_big", "ratio", "predicted_lower", "slack", "passed", "vacuous"],
        [vec![
            num(g.sup_small),
            num(g.sup_big),
            num(g.ratio),
            num(g.predicted_lower),
            num(slack),
            bool_str(g.passed),
            bool_str(g.vacuous),
        ]],
    )?;
    if with_svg {
        out.write("growth.svg", slice_svg(&u, None, "u").as_bytes())?;
    }
    Ok(format!(
        "ratio {} against 1/(1 - eta0) = {} (slack {slack}): {}",
        g.ratio,
        g.predicted_lower,
        if g.passed { "passed" } else { "failed" }
    ))
}

pub fn dichotomy(cfg: &RunConfig, sec: &DichotomySection, out: &mut Artifacts, with_svg: bool) -> Result<String, LabError> {
    let domain = setup::domain(&cfg.domain)?;
    let field = setup::coefficients(&cfg.coefficients)?;
    let ell = setup::vector_field(&cfg.ell)?;
    let a = dilation("dichotomy.epsilon", sec.lipschitz, sec.epsilon)?.a;
    let template = LayerSpec::new(sec.q, 1.0, sec.theta, sec.delta, 1e-3, a, OverlapRule::Literal)
        .map_err(|e| LabError::field("dichotomy", e.to_string()))?;
    let config = DichotomyConfig {
        ratio: sec.ratio,
        first_layer: sec.first_layer,
        layers: sec.layers,
        template,
        s: cfg.s,
        resolution: sec.resolution,
        half_nodes: sec.half_nodes,
        top: 0.0,
        tol: sec.tol,
        max_iter: sec.max_iter,
        check_admissibility: sec.check_admissibility,
        candidate_density: sec.density,
    };
    config.validate().map_err(|e| LabError::field("dichotomy", e.to_string()))?;
    let mut data = setup::boundary_data(&sec.data);
    let pinned: Option<Arc<Region>> = sec.pin_radius.map(|r| {
        let pin_value = sec.pin_value;
        data = data.clone().with_pin(Arc::new(move |_: &[f64]| pin_value));
        Arc::new(move |x: &[f64]| math::norm(x) <= r) as Arc<Region>
    });
    let series = dichotomy_run(&config, &domain, &field, &ell, &data, pinned)?;
    out.csv(
        "dichotomy.csv",
        &["m", "radius", "sup", "capacity", "term", "partial_sum", "chain_size", "step_eta"],
        (0..series.layers.len()).map(|k| {
            vec![
                series.layers[k].to_string(),
                num(series.radii[k]),
                num(series.sups[k]),
                num(series.capacities[k]),
                num(series.terms[k]),
                num(series.partial_sums[k]),
                series.chain_sizes.get(k).map_or(String::new(), |n| n.to_string()),
                series.step_eta.get(k).map_or(String::new(), |v| num(*v)),
            ]
        }),
    )?;
    let alternative = format!("{:?}", series.alternative);
    out.csv(
        "dichotomy_summary.csv",
        &["alternative", "eta_fit", "r2", "residual", "iterations"],
        [vec![
            alternative.clone(),
            series.eta_fit.map_or(String::new(), num),
            series.r2.map_or(String::new(), num),
            num(series.residual),
            series.iterations.to_string(),
        ]],
    )?;
    if with_svg {
        let m: Vec<f64> = series.layers.iter().map(|&m| m as f64).collect();
        out.write(
            "dichotomy.svg",
            svg::log_series(
                "layer suprema and capacity partial sums",
                &m,
                &[("M_m", &series.sups), ("partial sums", &series.partial_sums)],
            )
            .as_bytes(),
        )?;
    }
    Ok(format!(
        "{alternative}, eta_fit {}, R^2 {}",
        series.eta_fit.map_or("n/a".into(), num),
        series.r2.map_or("n/a".into(), num)
    ))
}
