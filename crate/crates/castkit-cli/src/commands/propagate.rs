//! `castkit propagate` — spread a first-frame added-object mask to every
//! frame through pixel-aligned point maps.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::Args;

use castkit_core::geometry::{load_cameras, PointMap};
use castkit_core::masking::{stats_for, write_sequence_manifest, SequenceEntry};
use castkit_core::{propagate_added_object_masks, Mask};

use super::{elapsed_timing, stage_context, CommonArgs};
use crate::dataset::list_files;
use crate::error::{contract, contract_bail, CliResult};
use crate::manifest::{self, PropagateFrame, PropagateManifest, PROPAGATE_MANIFEST};
use crate::parallel::map_frames;
use crate::staged::StagedWriter;

pub const SEQUENCE_MANIFEST: &str = "mask_sequence.json";

#[derive(Debug, Args)]
pub struct PropagateArgs {
    /// First-frame added-object mask (PNG, 255 = object).
    #[arg(long, value_name = "PNG")]
    pub first_mask: PathBuf,
    /// Directory of per-frame point maps (.pmap or .ply+sidecar), or a
    /// single file for one-frame smoke runs.
    #[arg(long, value_name = "DIR|FILE")]
    pub pointmaps: PathBuf,
    /// Camera parameters JSON (enables camera projection mode; omit for
    /// the nearest-point fallback).
    #[arg(long, value_name = "JSON")]
    pub cameras: Option<PathBuf>,
    /// Expected frame count; must match the point maps found.
    #[arg(long, value_name = "N")]
    pub frames: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn mask_file_name(frame: usize) -> String {
    format!("mask_{frame:04}.png")
}

pub fn run(args: &PropagateArgs) -> CliResult<()> {
    let start = Instant::now();
    let ctx = stage_context(&args.common)?;

    let first_mask = Mask::load_png(&args.first_mask)
        .with_context(|| format!("cannot load first mask {}", args.first_mask.display()))
        .map_err(contract)?;

    let pointmap_paths: Vec<PathBuf> = if args.pointmaps.is_file() {
        vec![args.pointmaps.clone()]
    } else {
        list_files(&args.pointmaps, &["pmap", "ply"])?
            .into_iter()
            .map(|(_, path)| path)
            .collect()
    };
    if pointmap_paths.len() != args.frames {
        contract_bail!(
            "expected {} point maps (--frames), found {} in {}",
            args.frames,
            pointmap_paths.len(),
            args.pointmaps.display()
        );
    }

    let pointmaps: Vec<PointMap> = map_frames(&pointmap_paths, ctx.workers, |_, path| {
        PointMap::load(path).map_err(contract)
    })?;

    let cameras = match &args.cameras {
        Some(path) => Some(load_cameras(path).map_err(contract)?),
        None => None,
    };
    let mode = if cameras.is_some() { "camera" } else { "nearest" };

    let sequence = propagate_added_object_masks(
        &first_mask,
        &pointmaps,
        cameras.as_deref(),
        &ctx.config.propagate,
    )
    .map_err(contract)?;

    let mut writer = StagedWriter::new();
    let mut frames = Vec::with_capacity(sequence.len());
    let mut entries = Vec::with_capacity(sequence.len());
    for (frame, mask) in sequence.masks.iter().enumerate() {
        let name = mask_file_name(frame);
        writer.stage_with(&ctx.out_dir.join(&name), |p| mask.save_png(p))?;
        let stats = stats_for(mask);
        frames.push(PropagateFrame {
            frame,
            path: name.clone(),
            bbox: stats.bbox.map(|(x0, y0, x1, y1)| [x0, y0, x1, y1]),
        });
        entries.push(SequenceEntry { frame, path: name });
    }
    writer.stage_with(&ctx.out_dir.join(SEQUENCE_MANIFEST), |p| {
        write_sequence_manifest(p, &entries)
    })?;

    let manifest = PropagateManifest {
        schema_version: manifest::SCHEMA_VERSION,
        stage: "propagate".into(),
        config_hash: ctx.config_hash.clone(),
        mode: mode.into(),
        frame_count: sequence.len(),
        first_mask: args.first_mask.display().to_string(),
        sequence_manifest: SEQUENCE_MANIFEST.into(),
        frames,
        timing: elapsed_timing(start),
    };
    writer.stage_bytes(
        &ctx.out_dir.join(PROPAGATE_MANIFEST),
        &manifest::to_json_bytes(&manifest),
    )?;
    writer.commit()?;

    println!(
        "propagate: wrote {} masks ({mode} mode) and {}",
        sequence.len(),
        ctx.out_dir.join(PROPAGATE_MANIFEST).display()
    );
    Ok(())
}
