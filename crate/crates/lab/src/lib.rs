//! Command-line front end and file formats for `diolab-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use cli::{Cli, Command, FormatArg};
use config::{ExperimentConfig, Format};
use error::LabResult;
use output::Table;

/// Builds the effective config: defaults, then `--config`, then global flags.
pub fn effective_config(cli: &Cli) -> LabResult<ExperimentConfig> {
    let mut cfg = match &cli.common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(o) = &cli.common.omega {
        cfg.omega = o.clone();
    }
    if let Some(p) = cli.common.precision {
        cfg.set("precision", &p.to_string())?;
    }
    if let Some(f) = cli.common.format {
        cfg.output.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    Ok(cfg)
}

/// Runs one parsed invocation.
pub fn run(cli: &Cli, cfg: &ExperimentConfig) -> LabResult<Table> {
    match &cli.command {
        Command::Dioph(c) => commands::dioph(cfg, c),
        Command::Walk(c) => commands::walk(cfg, c),
        Command::Variance(a) => commands::variance(cfg, a),
        Command::Sfactor(c) => commands::sfactor(cfg, c),
        Command::Mc(a) => commands::mc(cfg, a),
        Command::Fit(a) => commands::fit(a),
    }
}
