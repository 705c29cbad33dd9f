use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use zaremba_lab::{run, Command};

/// Run a zaremba pipeline from a JSON config.
#[derive(Parser, Debug)]
#[command(name = "zaremba-lab", version)]
struct Cli {
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command, &cli.config, cli.out.as_deref(), cli.svg) {
        Ok(summary) => {
            println!("{}", summary.message);
            println!("wrote {} to {}", summary.files.join(", "), summary.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
