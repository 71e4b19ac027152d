//! Directory ingestion. Frame ordering is lexicographic by filename
//! everywhere in the pipeline; the sorted order is asserted on ingest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;

use crate::error::{contract, contract_bail, CliResult};

/// Files in `dir` with one of `extensions`, sorted lexicographically by
/// filename. Errors if the directory is unreadable or no file matches.
pub fn list_files(dir: &Path, extensions: &[&str]) -> CliResult<Vec<(String, PathBuf)>> {
    let entries = fs::read_dir(dir)
        .with_context(|| format!("cannot read directory {}", dir.display()))
        .map_err(contract)?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry
            .with_context(|| format!("cannot read directory {}", dir.display()))
            .map_err(contract)?;
        let path = entry.path();
        let matches = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| extensions.contains(&e));
        if matches && path.is_file() {
            let name = entry.file_name().to_string_lossy().into_owned();
            files.push((name, path));
        }
    }
    if files.is_empty() {
        contract_bail!(
            "no .{} files found in {}",
            extensions.join("/."),
            dir.display()
        );
    }
    files.sort_by(|a, b| a.0.cmp(&b.0));
    debug_assert!(files.windows(2).all(|w| w[0].0 < w[1].0));
    Ok(files)
}

pub fn list_pngs(dir: &Path) -> CliResult<Vec<(String, PathBuf)>> {
    list_files(dir, &["png"])
}

/// Pairs the rendered and edited directories by sorted filename, erroring
/// with both counts when they disagree.
pub fn paired_pngs(
    rendered_dir: &Path,
    edited_dir: &Path,
) -> CliResult<Vec<((String, PathBuf), (String, PathBuf))>> {
    let rendered = list_pngs(rendered_dir)?;
    let edited = list_pngs(edited_dir)?;
    if rendered.len() != edited.len() {
        contract_bail!(
            "frame count mismatch: {} has {} frames, {} has {}",
            rendered_dir.display(),
            rendered.len(),
            edited_dir.display(),
            edited.len()
        );
    }
    Ok(rendered.into_iter().zip(edited).collect())
}
