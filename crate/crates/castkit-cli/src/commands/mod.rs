//! Subcommand implementations.

pub mod maskdiff;
pub mod matching;
pub mod propagate;
pub mod report;
pub mod select;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;

use castkit_core::ImagePlane;

use crate::config::{load_config, PipelineConfig};
use crate::error::{contract, internal, CliResult};

/// Flags shared by every stage.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Pipeline config JSON; defaults apply when omitted.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory (default: config output_dir, then ".").
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Worker count; the CASTKIT_THREADS environment variable overrides it.
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

pub struct StageContext {
    pub config: PipelineConfig,
    pub config_hash: String,
    pub out_dir: PathBuf,
    pub workers: usize,
}

/// Loads config and resolves the output directory and worker count.
/// Config parsing runs first so strict-key violations fail before any
/// input is touched.
pub fn stage_context(common: &CommonArgs) -> CliResult<StageContext> {
    let config = load_config(common.config.as_deref())?;
    let config_hash = crate::config::config_hash(&config);
    let out_dir = common
        .out_dir
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))
        .map_err(internal)?;
    let workers = crate::parallel::resolve_workers(common.threads)?;
    Ok(StageContext {
        config,
        config_hash,
        out_dir,
        workers,
    })
}

/// Loads a PNG as an input (contract error on failure).
pub fn load_image(path: &Path) -> CliResult<ImagePlane> {
    ImagePlane::load_png(path)
        .with_context(|| format!("cannot load image {}", path.display()))
        .map_err(contract)
}

pub fn elapsed_timing(start: std::time::Instant) -> crate::manifest::Timing {
    crate::manifest::Timing {
        seconds: start.elapsed().as_secs_f64(),
    }
}
