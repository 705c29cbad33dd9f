//! Turning config presets into core objects.

use std::sync::Arc;

use zaremba::coeffs::CoefficientField;
use zaremba::fd::BoundaryData;
use zaremba::geometry::presets::{self, SlitOptions};
use zaremba::geometry::{Domain, EmptySet, PiecewiseLinearGraph, VectorField};

use crate::config::{DataConfig, DomainConfig, EllConfig};
use crate::error::LabError;

fn invalid(field: &str) -> impl Fn(zaremba::Error) -> LabError + '_ {
    move |e| LabError::field(field, e.to_string())
}

pub fn domain(cfg: &DomainConfig) -> Result<Domain, LabError> {
    let positive = |field: &str, v: f64| {
        if v > 0.0 {
            Ok(())
        } else {
            Err(LabError::field(field, "must be positive"))
        }
    };
    Ok(match cfg {
        DomainConfig::Halfspace => presets::halfspace(3),
        DomainConfig::Cone { lipschitz } => {
            if !(*lipschitz >= 0.0) {
                return Err(LabError::field("domain.lipschitz", "must be nonnegative"));
            }
            presets::cone(3, *lipschitz)
        }
        DomainConfig::Slit { half_angle, r_max, hub } => {
            if !(*half_angle > 0.0 && *half_angle < std::f64::consts::FRAC_PI_2) {
                return Err(LabError::field("domain.half_angle", "need 0 < β < π/2"));
            }
            if let Some(r) = r_max {
                positive("domain.r_max", *r)?;
            }
            if let Some(b) = hub {
                positive("domain.hub.radius", b.radius)?;
            }
            presets::slit(
                3,
                SlitOptions {
                    half_angle: *half_angle,
                    r_max: r_max.unwrap_or(f64::INFINITY),
                    hub: hub.as_ref().map(|b| (b.center.to_vec(), b.radius)),
                },
            )
        }
        DomainConfig::Disk { center, radius } => {
            positive("domain.radius", *radius)?;
            presets::halfspace_with_disk(center.to_vec(), *radius)
        }
        DomainConfig::Obstacle { center, radius } => {
            positive("domain.radius", *radius)?;
            presets::halfspace_with_obstacle(center.to_vec(), *radius)
        }
        DomainConfig::Graph { samples, patch_radius } => {
            let rows: Vec<Vec<f64>> = samples.iter().map(|r| r.to_vec()).collect();
            let graph = PiecewiseLinearGraph::from_samples(&rows).map_err(invalid("domain.samples"))?;
            presets::below_graph(3, Arc::new(graph), *patch_radius, Arc::new(EmptySet))
                .map_err(invalid("domain.patch_radius"))?
        }
    })
}

fn numbers(text: &str) -> Option<Vec<f64>> {
    text.trim_matches(|c| c == '[' || c == ']')
        .split(',')
        .map(|t| t.trim().parse().ok())
        .collect()
}

/// Parse a coefficient preset name.
pub fn coefficients(spec: &str) -> Result<CoefficientField, LabError> {
    let bad = |msg: &str| LabError::field("coefficients", format!("`{spec}`: {msg}"));
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    match name.trim() {
        "identity" if args.is_empty() => Ok(CoefficientField::identity(3)),
        "diag" => {
            let d = numbers(args).ok_or_else(|| bad("expected diag:[d1,d2,d3]"))?;
            if d.len() != 3 {
                return Err(bad("need three diagonal entries"));
            }
            CoefficientField::diagonal(d).map_err(invalid("coefficients"))
        }
        "rot2d" => {
            let v = numbers(args).ok_or_else(|| bad("expected rot2d:angle,e1,e2,e3"))?;
            if v.len() != 4 {
                return Err(bad("need an angle and three eigenvalues"));
            }
            CoefficientField::rotated(v[0], v[1..].to_vec()).map_err(invalid("coefficients"))
        }
        "osc" => {
            let v = numbers(args).ok_or_else(|| bad("expected osc:amplitude,frequency"))?;
            if v.len() != 2 {
                return Err(bad("need an amplitude and a frequency"));
            }
            CoefficientField::oscillating(3, v[0], v[1]).map_err(invalid("coefficients"))
        }
        _ => Err(bad("unknown preset (identity, diag, rot2d, osc)")),
    }
}

pub fn vector_field(cfg: &EllConfig) -> Result<VectorField, LabError> {
    match cfg.direction {
        Some(d) => VectorField::constant(&d, cfg.epsilon).map_err(invalid("ell.direction")),
        None => VectorField::vertical(3, cfg.epsilon).map_err(invalid("ell.epsilon")),
    }
}

pub fn boundary_data(cfg: &DataConfig) -> BoundaryData {
    let c = |v: f64| -> Arc<zaremba::fd::ScalarFn> { Arc::new(move |_: &[f64]| v) };
    BoundaryData::default()
        .with_far(c(cfg.far))
        .with_phi(c(cfg.phi))
        .with_psi(c(cfg.psi))
        .with_rhs(c(cfg.rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_presets_parse() {
        assert!(coefficients("identity").is_ok());
        assert!(coefficients("diag:[1, 2, 3]").is_ok());
        assert!(coefficients("rot2d:0.3,1,2,1").is_ok());
        assert!(coefficients("osc:0.2,3").is_ok());
        for bad in ["", "diag:[1,2]", "rot2d:1", "osc:2,1", "laplace", "identity:1"] {
            let err = coefficients(bad).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad}");
        }
    }

    #[test]
    fn domain_presets_build() {
        let slit = DomainConfig::Slit {
            half_angle: 0.5,
            r_max: None,
            hub: None,
        };
        assert!(domain(&slit).unwrap().inside(&[0.3, 0.3, -0.2]));
        assert!(domain(&DomainConfig::Cone { lipschitz: -1.0 }).is_err());
        let graph = DomainConfig::Graph {
            samples: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.1], [0.0, 1.0, 0.0], [1.0, 1.0, 0.1]],
            patch_radius: 1.0,
        };
        assert!(domain(&graph).is_ok());
    }
}
