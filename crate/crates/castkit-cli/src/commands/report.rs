//! `castkit report` — merge the stage manifests in a run directory into
//! one aggregated report with config hashes and stage timings.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;

use super::{elapsed_timing, CommonArgs};
use crate::error::{contract_bail, CliResult};
use crate::manifest::{
    self, read_manifest, ReportStages, RunReport, REPORT_FILE, STAGE_MANIFESTS,
};
use crate::staged::StagedWriter;

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Run directory holding stage manifests.
    #[arg(long, value_name = "DIR")]
    pub run: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

pub fn run(args: &ReportArgs) -> CliResult<()> {
    let start = Instant::now();
    // Report has no heavy config dependence, but the config is still
    // parsed for strictness and the hash recorded alongside the stages.
    let ctx = super::stage_context(&args.common)?;
    if !args.run.is_dir() {
        contract_bail!("run directory {} does not exist", args.run.display());
    }

    let mut stages = ReportStages::default();
    let mut config_hashes = BTreeMap::new();
    let mut timings = BTreeMap::new();
    let mut found = 0usize;
    for (stage, file_name) in STAGE_MANIFESTS {
        let path = args.run.join(file_name);
        if !path.exists() {
            continue;
        }
        let value = read_manifest(stage, &path)?;
        if let Some(hash) = value.get("config_hash").and_then(|v| v.as_str()) {
            config_hashes.insert(stage.to_string(), hash.to_string());
        }
        if let Some(seconds) = value
            .get("timing")
            .and_then(|t| t.get("seconds"))
            .and_then(|s| s.as_f64())
        {
            timings.insert(stage.to_string(), seconds);
        }
        match stage {
            "maskdiff" => stages.maskdiff = Some(value),
            "propagate" => stages.propagate = Some(value),
            "select" => stages.select = Some(value),
            "match" => stages.matching = Some(value),
            _ => unreachable!(),
        }
        found += 1;
    }
    if found == 0 {
        contract_bail!(
            "no stage manifests found in {} (expected any of {})",
            args.run.display(),
            STAGE_MANIFESTS
                .iter()
                .map(|(_, f)| *f)
                .collect::<Vec<_>>()
                .join(", ")
        );
    }

    // The report lands in the run directory unless --out-dir redirects it.
    let out_dir = args.common.out_dir.clone().unwrap_or_else(|| args.run.clone());
    let report = RunReport {
        schema_version: manifest::SCHEMA_VERSION,
        stage: "report".into(),
        stages,
        config_hashes,
        timings,
        timing: elapsed_timing(start),
    };
    let mut writer = StagedWriter::new();
    writer.stage_bytes(&out_dir.join(REPORT_FILE), &manifest::to_json_bytes(&report))?;
    writer.commit()?;

    let _ = ctx;
    println!(
        "report: merged {found} stage manifest(s) into {}",
        out_dir.join(REPORT_FILE).display()
    );
    Ok(())
}
