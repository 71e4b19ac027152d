//! `castkit maskdiff` — derive the first-frame difference mask.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;

use castkit_core::masking::{diff_mask, stats_for};

use super::{elapsed_timing, load_image, stage_context, CommonArgs};
use crate::error::{contract, contract_bail, CliResult};
use crate::manifest::{self, MaskdiffManifest, MASKDIFF_MANIFEST};
use crate::staged::StagedWriter;

pub const MASK_FILE: &str = "m1_mask.png";

#[derive(Debug, Args)]
pub struct MaskdiffArgs {
    /// Original first frame (PNG).
    pub original: PathBuf,
    /// Edited first frame (PNG).
    pub edited: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

pub fn run(args: &MaskdiffArgs) -> CliResult<()> {
    let start = Instant::now();
    let ctx = stage_context(&args.common)?;

    let original = load_image(&args.original)?;
    let edited = load_image(&args.edited)?;
    if original.shape() != edited.shape() {
        contract_bail!(
            "size mismatch: {} is {}, {} is {}",
            args.original.display(),
            original.shape(),
            args.edited.display(),
            edited.shape()
        );
    }

    let mask = diff_mask(&original, &edited, &ctx.config.diff).map_err(contract)?;
    let stats = stats_for(&mask);

    let mut writer = StagedWriter::new();
    let mask_path = ctx.out_dir.join(MASK_FILE);
    writer.stage_with(&mask_path, |p| mask.save_png(p))?;

    let manifest = MaskdiffManifest {
        schema_version: manifest::SCHEMA_VERSION,
        stage: "maskdiff".into(),
        config_hash: ctx.config_hash.clone(),
        original: args.original.display().to_string(),
        edited: args.edited.display().to_string(),
        width: original.width(),
        height: original.height(),
        mask_path: MASK_FILE.into(),
        stats: stats.into(),
        timing: elapsed_timing(start),
    };
    writer.stage_bytes(
        &ctx.out_dir.join(MASKDIFF_MANIFEST),
        &manifest::to_json_bytes(&manifest),
    )?;
    writer.commit()?;

    println!(
        "maskdiff: wrote {} (marked area {:.4}) and {}",
        mask_path.display(),
        manifest.stats.area_fraction,
        ctx.out_dir.join(MASKDIFF_MANIFEST).display()
    );
    Ok(())
}
