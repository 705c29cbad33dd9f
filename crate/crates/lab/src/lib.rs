//! Configuration-driven runs of the `zaremba` pipelines with CSV, SVG and
//! manifest output.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod pipelines;
pub mod setup;
pub mod svg;

use std::path::{Path, PathBuf};

pub use config::{Command, RunConfig};
pub use error::{FieldError, LabError};

use artifacts::Artifacts;

/// What a successful run produced.
#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    pub message: String,
}

/// Load and validate a config file.
pub fn load(command: Command, path: &Path) -> Result<(RunConfig, String), LabError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::field("config", format!("cannot read {}: {e}", path.display())))?;
    let config = RunConfig::parse(&text).map_err(LabError::Validation)?;
    let errs = config.check(command);
    if !errs.is_empty() {
        return Err(LabError::Validation(errs));
    }
    Ok((config, text))
}

/// Run `command` with the config at `config_path`. `out` overrides the
/// config's output directory, which defaults to `out/<command>`.
pub fn run(command: Command, config_path: &Path, out: Option<&Path>, svg: bool) -> Result<RunSummary, LabError> {
    let (config, text) = load(command, config_path)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| Path::new("out").join(command.name()));
    let mut artifacts = Artifacts::new(&dir)?;
    let message = match command {
        Command::Capacity => pipelines::capacity(&config, config.capacity.as_ref().expect("checked"), &mut artifacts)?,
        Command::Barrier => pipelines::barrier(&config, config.barrier.as_ref().expect("checked"), &mut artifacts)?,
        Command::Solve => pipelines::solve_cmd(&config, config.solve.as_ref().expect("checked"), &mut artifacts, svg)?,
        Command::Chain => pipelines::chain(&config, config.chain.as_ref().expect("checked"), &mut artifacts, svg)?,
        Command::Growth => pipelines::growth(&config, config.growth.as_ref().expect("checked"), &mut artifacts, svg)?,
        Command::Dichotomy => {
            pipelines::dichotomy(&config, config.dichotomy.as_ref().expect("checked"), &mut artifacts, svg)?
        }
    };
    let resolved = serde_json::to_value(&config).expect("config serializes");
    artifacts.manifest(command.name(), config_path, &text, &resolved)?;
    Ok(RunSummary {
        out_dir: artifacts.dir().to_path_buf(),
        files: artifacts.files().iter().map(|f| f.file.clone()).collect(),
        message,
    })
}
