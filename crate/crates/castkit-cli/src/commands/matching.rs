//! `castkit match` — keypoint-matching consistency report for an
//! original view pair against its edited counterpart.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;

use castkit_core::matching::{consistency_report, render_composite};

use super::{elapsed_timing, load_image, stage_context, CommonArgs};
use crate::error::{contract, CliResult};
use crate::manifest::{self, CompositePaths, MatchInputs, MatchManifest, MATCH_MANIFEST};
use crate::staged::StagedWriter;

pub const COMPOSITE_ORIGINAL: &str = "composite_original.png";
pub const COMPOSITE_EDITED: &str = "composite_edited.png";

#[derive(Debug, Args)]
pub struct MatchArgs {
    /// First view of the original (unedited) pair.
    #[arg(long, value_name = "PNG")]
    pub orig_a: PathBuf,
    /// Second view of the original pair.
    #[arg(long, value_name = "PNG")]
    pub orig_b: PathBuf,
    /// First view of the edited pair.
    #[arg(long, value_name = "PNG")]
    pub edit_a: PathBuf,
    /// Second view of the edited pair.
    #[arg(long, value_name = "PNG")]
    pub edit_b: PathBuf,
    /// Also write side-by-side composites with match lines.
    #[arg(long)]
    pub composite: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

pub fn run(args: &MatchArgs) -> CliResult<()> {
    let start = Instant::now();
    let ctx = stage_context(&args.common)?;

    let orig_a = load_image(&args.orig_a)?;
    let orig_b = load_image(&args.orig_b)?;
    let edit_a = load_image(&args.edit_a)?;
    let edit_b = load_image(&args.edit_b)?;

    let outcome = consistency_report(
        (&orig_a, &orig_b),
        (&edit_a, &edit_b),
        &ctx.config.matching,
    )
    .map_err(contract)?;

    let mut writer = StagedWriter::new();
    let composites = if args.composite {
        let mut paths = None;
        if let (Some(original), Some(edited)) = (&outcome.original, &outcome.edited) {
            let orig_img = render_composite(&orig_a, &orig_b, original);
            let edit_img = render_composite(&edit_a, &edit_b, edited);
            writer.stage_with(&ctx.out_dir.join(COMPOSITE_ORIGINAL), |p| {
                orig_img.save_png(p)
            })?;
            writer.stage_with(&ctx.out_dir.join(COMPOSITE_EDITED), |p| edit_img.save_png(p))?;
            paths = Some(CompositePaths {
                original: COMPOSITE_ORIGINAL.into(),
                edited: COMPOSITE_EDITED.into(),
            });
        } else {
            eprintln!("match: skipping composites (a pair produced no keypoints)");
        }
        paths
    } else {
        None
    };

    let manifest = MatchManifest {
        schema_version: manifest::SCHEMA_VERSION,
        stage: "match".into(),
        config_hash: ctx.config_hash.clone(),
        inputs: MatchInputs {
            orig_a: args.orig_a.display().to_string(),
            orig_b: args.orig_b.display().to_string(),
            edit_a: args.edit_a.display().to_string(),
            edit_b: args.edit_b.display().to_string(),
        },
        original_matches: outcome.report.original_matches,
        edited_matches: outcome.report.edited_matches,
        ratio: outcome.report.ratio,
        degraded: outcome.report.degraded,
        params: ctx.config.matching,
        composites,
        timing: elapsed_timing(start),
    };
    writer.stage_bytes(
        &ctx.out_dir.join(MATCH_MANIFEST),
        &manifest::to_json_bytes(&manifest),
    )?;
    writer.commit()?;

    let show = |v: Option<usize>| v.map_or("null".to_string(), |n| n.to_string());
    println!(
        "match: original {} edited {} ratio {}; wrote {}",
        show(manifest.original_matches),
        show(manifest.edited_matches),
        manifest
            .ratio
            .map_or("null".to_string(), |r| format!("{r:.4}")),
        ctx.out_dir.join(MATCH_MANIFEST).display()
    );
    Ok(())
}
