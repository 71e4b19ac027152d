//! `castkit select` — score rendered/edited pairs and emit the selection
//! manifest consumed by a downstream feedforward reconstructor.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;

use castkit_core::metrics::PerceptualEvaluator;
use castkit_core::selection::{
    auto_tau, score_view, select_views, ScoreWeights, ViewScore, AUTO_TAU_PERCENTILE,
};

use super::{elapsed_timing, load_image, stage_context, CommonArgs};
use crate::config::TauSetting;
use crate::dataset::paired_pngs;
use crate::error::{contract, contract_bail, CliResult};
use crate::manifest::{self, ScoreRow, SelectManifest, SELECT_MANIFEST};
use crate::parallel::map_frames;
use crate::staged::StagedWriter;

pub const SCORE_TABLE: &str = "score_table.txt";

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Directory of edited frames (PNG), matched to rendered by sorted
    /// filename.
    #[arg(long, value_name = "DIR")]
    pub edited: PathBuf,
    /// Directory of rendered training views (PNG).
    #[arg(long, value_name = "DIR")]
    pub rendered: PathBuf,
    /// Score threshold: "auto" (60th percentile) or a number. Overrides
    /// the config value.
    #[arg(long, value_name = "auto|X")]
    pub tau: Option<TauSetting>,
    /// Minimum retained view count. Overrides the config value.
    #[arg(long, value_name = "K")]
    pub kmin: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn format_table(scores: &[ViewScore], files: &[String], selected: &[usize]) -> String {
    let mut table = String::new();
    let _ = writeln!(
        table,
        "{:>5}  {:<28} {:>12} {:>12} {:>12} {:>12} {:>10}  {}",
        "frame", "file", "mse", "ssim_term", "perceptual", "score", "psnr_db", "selected"
    );
    for (s, file) in scores.iter().zip(files) {
        let psnr = if s.psnr_db.is_finite() {
            format!("{:.3}", s.psnr_db)
        } else {
            "inf".into()
        };
        let _ = writeln!(
            table,
            "{:>5}  {:<28} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>10}  {}",
            s.frame_index,
            file,
            s.mse_term,
            s.ssim_term,
            s.perceptual_term,
            s.score,
            psnr,
            if selected.contains(&s.frame_index) {
                "*"
            } else {
                ""
            }
        );
    }
    table
}

pub fn run(args: &SelectArgs) -> CliResult<()> {
    let start = Instant::now();
    let ctx = stage_context(&args.common)?;

    let pairs = paired_pngs(&args.rendered, &args.edited)?;
    let n = pairs.len();
    if n < 2 {
        contract_bail!("dataset needs at least 2 frames, found {n}");
    }
    let tau_setting = args.tau.unwrap_or(ctx.config.weights.tau);
    let k_min = args.kmin.unwrap_or(ctx.config.weights.k_min);
    if k_min == 0 || k_min > n {
        contract_bail!("k_min = {k_min} is out of range for {n} frames");
    }

    let evaluator = PerceptualEvaluator::new(&ctx.config.perceptual).map_err(contract)?;
    let weights_only = ScoreWeights {
        lambda1: ctx.config.weights.lambda1,
        lambda2: ctx.config.weights.lambda2,
        lambda3: ctx.config.weights.lambda3,
        tau: 0.0,
        k_min,
    };

    let scores: Vec<ViewScore> = map_frames(&pairs, ctx.workers, |frame, (rendered, edited)| {
        let rendered_img = load_image(&rendered.1)?;
        let edited_img = load_image(&edited.1)?;
        if rendered_img.shape() != edited_img.shape() {
            contract_bail!(
                "shape mismatch at frame {frame}: rendered {} is {}, edited {} is {}",
                rendered.0,
                rendered_img.shape(),
                edited.0,
                edited_img.shape()
            );
        }
        score_view(
            &rendered_img,
            &edited_img,
            &weights_only,
            &ctx.config.ssim,
            &evaluator,
            frame,
        )
        .map_err(contract)
    })?;

    let tau = match tau_setting {
        TauSetting::Fixed(v) => v,
        TauSetting::Auto => auto_tau(&scores, AUTO_TAU_PERCENTILE).map_err(contract)?,
    };
    let weights = ScoreWeights {
        tau,
        ..weights_only
    };
    let result = select_views(scores, &weights).map_err(contract)?;

    let files: Vec<String> = pairs.iter().map(|(r, _)| r.0.clone()).collect();
    let table = format_table(&result.scores, &files, &result.selected);

    let mut writer = StagedWriter::new();
    writer.stage_bytes(&ctx.out_dir.join(SCORE_TABLE), table.as_bytes())?;
    let manifest = SelectManifest {
        schema_version: manifest::SCHEMA_VERSION,
        stage: "select".into(),
        config_hash: ctx.config_hash.clone(),
        rendered_dir: args.rendered.display().to_string(),
        edited_dir: args.edited.display().to_string(),
        rule: result.rule_applied,
        tau: result.tau,
        selected: result.selected.clone(),
        scores: result
            .scores
            .iter()
            .map(|s| ScoreRow {
                frame: s.frame_index,
                mse: s.mse_term,
                ssim_term: s.ssim_term,
                perceptual: s.perceptual_term,
                score: s.score,
                psnr_db: s.psnr_db.is_finite().then_some(s.psnr_db),
            })
            .collect(),
        score_table: SCORE_TABLE.into(),
        timing: elapsed_timing(start),
    };
    writer.stage_bytes(
        &ctx.out_dir.join(SELECT_MANIFEST),
        &manifest::to_json_bytes(&manifest),
    )?;
    writer.commit()?;

    print!("{table}");
    println!(
        "select: kept {}/{} views (rule {:?}, tau {:.6}); wrote {}",
        result.selected.len(),
        n,
        result.rule_applied,
        result.tau,
        ctx.out_dir.join(SELECT_MANIFEST).display()
    );
    Ok(())
}
