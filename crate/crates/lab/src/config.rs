//! The JSON run configuration.
//!
//! Every field except the section of the selected command has a default;
//! the defaults are listed in the README.

use std::f64::consts::FRAC_PI_4;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::FieldError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Capacity,
    Barrier,
    Solve,
    Chain,
    Growth,
    Dichotomy,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Capacity => "capacity",
            Command::Barrier => "barrier",
            Command::Solve => "solve",
            Command::Chain => "chain",
            Command::Growth => "growth",
            Command::Dichotomy => "dichotomy",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    #[serde(default)]
    pub domain: DomainConfig,
    /// `identity`, `diag:[d1,d2,d3]`, `rot2d:angle,e1,e2,e3` or
    /// `osc:amplitude,frequency`.
    #[serde(default = "default_coefficients")]
    pub coefficients: String,
    #[serde(default)]
    pub ell: EllConfig,
    #[serde(default = "one")]
    pub s: f64,
    pub out: Option<PathBuf>,
    pub capacity: Option<CapacitySection>,
    pub barrier: Option<BarrierSection>,
    pub solve: Option<SolveSection>,
    pub chain: Option<ChainSection>,
    pub growth: Option<GrowthSection>,
    pub dichotomy: Option<DichotomySection>,
}

fn default_coefficients() -> String {
    "identity".into()
}

fn one() -> f64 {
    1.0
}

fn quarter_pi() -> f64 {
    FRAC_PI_4
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    1_000_000
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainConfig {
    #[default]
    Halfspace,
    Cone {
        lipschitz: f64,
    },
    Slit {
        #[serde(default = "quarter_pi")]
        half_angle: f64,
        r_max: Option<f64>,
        hub: Option<BallConfig>,
    },
    /// Vertical Dirichlet disk with normal `e₂`.
    Disk {
        center: [f64; 3],
        radius: f64,
    },
    Obstacle {
        center: [f64; 3],
        radius: f64,
    },
    /// Γ₂ from `[x₁, x₂, f]` rows on a regular lattice, no Γ₁.
    Graph {
        samples: Vec<[f64; 3]>,
        #[serde(default = "one")]
        patch_radius: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallConfig {
    pub center: [f64; 3],
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllConfig {
    /// Constant direction; `eₙ` when absent.
    pub direction: Option<[f64; 3]>,
    #[serde(default = "quarter_pi")]
    pub epsilon: f64,
}

impl Default for EllConfig {
    fn default() -> Self {
        EllConfig {
            direction: None,
            epsilon: FRAC_PI_4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum CloudSource {
    /// Fibonacci points on a sphere about the origin.
    Sphere {
        count: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    /// Deterministic points filling a ball about the origin.
    Ball {
        count: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    /// CSV file, one point per row with an optional trailing mass column.
    Csv(PathBuf),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitySection {
    pub cloud: CloudSource,
    #[serde(default = "one")]
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierSection {
    #[serde(default)]
    pub lipschitz: f64,
    #[serde(default = "quarter_pi")]
    pub epsilon: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub radius: f64,
    /// `(0, 0, −R)` when absent.
    pub center: Option<[f64; 3]>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_alpha() -> f64 {
    0.25
}

fn default_samples() -> usize {
    2000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_lo")]
    pub lo: [f64; 3],
    #[serde(default = "default_hi")]
    pub hi: [f64; 3],
    #[serde(default = "default_h")]
    pub h: f64,
}

fn default_lo() -> [f64; 3] {
    [-0.5, -0.5, -1.0]
}

fn default_hi() -> [f64; 3] {
    [0.5, 0.5, 0.0]
}

fn default_h() -> f64 {
    1.0 / 32.0
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            lo: default_lo(),
            hi: default_hi(),
            h: default_h(),
        }
    }
}

/// Constant boundary data.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default)]
    pub far: f64,
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub psi: f64,
    #[serde(default)]
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Height of the SVG slice; the top of the box when absent.
    pub slice_z: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OverlapConfig {
    #[default]
    Literal,
    Relaxed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    #[serde(default = "default_q")]
    pub q: [f64; 5],
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Half the measured capacity ratio when absent.
    pub kappa: Option<f64>,
    /// Computed from `lipschitz` and `epsilon` when absent.
    pub a: Option<f64>,
    #[serde(default)]
    pub lipschitz: f64,
    #[serde(default = "quarter_pi")]
    pub epsilon: f64,
    #[serde(default)]
    pub overlap: OverlapConfig,
    #[serde(default = "default_density")]
    pub density: usize,
}

fn default_q() -> [f64; 5] {
    [1.0, 2.0, 2.5, 3.0, 4.0]
}

fn default_theta() -> f64 {
    0.25
}

fn default_delta() -> f64 {
    0.1
}

fn default_density() -> usize {
    2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthSection {
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "far_one")]
    pub data: DataConfig,
    #[serde(default)]
    pub lipschitz: f64,
    #[serde(default = "quarter_pi")]
    pub epsilon: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_growth_radius")]
    pub radius: f64,
    /// `(0, 0, −R)` when absent.
    pub center: Option<[f64; 3]>,
    /// `5h` when absent.
    pub slack: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn far_one() -> DataConfig {
    DataConfig {
        far: 1.0,
        ..DataConfig::default()
    }
}

fn default_growth_radius() -> f64 {
    0.4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DichotomySection {
    #[serde(default = "two")]
    pub ratio: f64,
    #[serde(default = "one_usize")]
    pub first_layer: usize,
    #[serde(default = "five")]
    pub layers: usize,
    #[serde(default = "dichotomy_q")]
    pub q: [f64; 5],
    #[serde(default = "dichotomy_theta")]
    pub theta: f64,
    #[serde(default = "dichotomy_delta")]
    pub delta: f64,
    #[serde(default)]
    pub lipschitz: f64,
    #[serde(default = "quarter_pi")]
    pub epsilon: f64,
    #[serde(default = "dichotomy_resolution")]
    pub resolution: f64,
    #[serde(default = "dichotomy_half_nodes")]
    pub half_nodes: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "dichotomy_max_iter")]
    pub max_iter: usize,
    #[serde(default = "yes")]
    pub check_admissibility: bool,
    #[serde(default = "dichotomy_density")]
    pub density: usize,
    #[serde(default = "far_one")]
    pub data: DataConfig,
    /// Nodes with `|x| ≤ pin_radius` are held at `pin_value`.
    pub pin_radius: Option<f64>,
    #[serde(default = "one")]
    pub pin_value: f64,
}

fn two() -> f64 {
    2.0
}

fn one_usize() -> usize {
    1
}

fn five() -> usize {
    5
}

fn dichotomy_q() -> [f64; 5] {
    [0.6, 0.8, 1.0, 1.2, 1.4]
}

fn dichotomy_theta() -> f64 {
    0.15
}

fn dichotomy_delta() -> f64 {
    0.05
}

fn dichotomy_resolution() -> f64 {
    32.0
}

fn dichotomy_half_nodes() -> usize {
    47
}

fn dichotomy_max_iter() -> usize {
    2_000_000
}

fn dichotomy_density() -> usize {
    4
}

fn yes() -> bool {
    true
}

impl RunConfig {
    /// Parse the JSON text, reporting syntax and schema errors per field.
    pub fn parse(text: &str) -> Result<Self, Vec<FieldError>> {
        if text.trim().is_empty() {
            return Err(vec![FieldError::new("", "config is empty")]);
        }
        serde_json::from_str(text).map_err(|e| {
            vec![FieldError::new(
                "",
                format!("{e} (line {}, column {})", e.line(), e.column()),
            )]
        })
    }

    /// Range checks that do not need the core constructors.
    pub fn check(&self, command: Command) -> Vec<FieldError> {
        let mut errs = Vec::new();
        if let Some(c) = self.command {
            if c != command {
                errs.push(FieldError::new(
                    "command",
                    format!("config names `{}` but `{}` was requested", c.name(), command.name()),
                ));
            }
        }
        let present = match command {
            Command::Capacity => self.capacity.is_some(),
            Command::Barrier => self.barrier.is_some(),
            Command::Solve => self.solve.is_some(),
            Command::Chain => self.chain.is_some(),
            Command::Growth => self.growth.is_some(),
            Command::Dichotomy => self.dichotomy.is_some(),
        };
        if !present {
            errs.push(FieldError::new(command.name(), "section is required for this command"));
        }
        if !(self.s > 0.0) {
            errs.push(FieldError::new("s", "must be positive"));
        }
        if !(self.ell.epsilon > 0.0) {
            errs.push(FieldError::new("ell.epsilon", "must be positive"));
        }
        let grid_checks = |errs: &mut Vec<FieldError>, prefix: &str, g: &GridConfig| {
            if !(g.h > 0.0) {
                errs.push(FieldError::new(format!("{prefix}.grid.h"), "must be positive"));
            }
            if (0..3).any(|k| !(g.hi[k] > g.lo[k])) {
                errs.push(FieldError::new(format!("{prefix}.grid"), "need lo < hi in every coordinate"));
            }
        };
        if let Some(sec) = &self.solve {
            grid_checks(&mut errs, "solve", &sec.grid);
            if !(sec.tol > 0.0) {
                errs.push(FieldError::new("solve.tol", "must be positive"));
            }
        }
        if let Some(sec) = &self.growth {
            grid_checks(&mut errs, "growth", &sec.grid);
            if !(sec.tol > 0.0) {
                errs.push(FieldError::new("growth.tol", "must be positive"));
            }
        }
        if let Some(sec) = &self.capacity {
            match &sec.cloud {
                CloudSource::Sphere { count, radius } | CloudSource::Ball { count, radius } => {
                    if *count == 0 {
                        errs.push(FieldError::new("capacity.cloud.count", "must be positive"));
                    }
                    if !(*radius > 0.0) {
                        errs.push(FieldError::new("capacity.cloud.radius", "must be positive"));
                    }
                }
                CloudSource::Csv(_) => {}
            }
            if !(sec.scale > 0.0) {
                errs.push(FieldError::new("capacity.scale", "must be positive"));
            }
        }
        if let Some(sec) = &self.barrier {
            if sec.samples == 0 {
                errs.push(FieldError::new("barrier.samples", "must be positive"));
            }
        }
        if let Some(sec) = &self.chain {
            if sec.density == 0 {
                errs.push(FieldError::new("chain.density", "must be positive"));
            }
        }
        if let Some(sec) = &self.dichotomy {
            if let Some(r) = sec.pin_radius {
                if !(r > 0.0) {
                    errs.push(FieldError::new("dichotomy.pin_radius", "must be positive"));
                }
            }
        }
        errs
    }
}
