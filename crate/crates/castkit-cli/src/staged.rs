//! Atomic stage output: every file is first written under a `.partial`
//! suffix and renamed into place only when the whole stage commits. A
//! failed stage leaves only `.partial` files behind.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;

use crate::error::{internal, CliResult};

pub struct StagedWriter {
    staged: Vec<(PathBuf, PathBuf)>,
}

fn partial_path(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".partial");
    path.with_file_name(name)
}

impl StagedWriter {
    pub fn new() -> Self {
        Self { staged: Vec::new() }
    }

    /// Writes `bytes` to the `.partial` twin of `path`.
    pub fn stage_bytes(&mut self, path: &Path, bytes: &[u8]) -> CliResult<()> {
        let partial = partial_path(path);
        fs::write(&partial, bytes)
            .with_context(|| format!("cannot write {}", partial.display()))
            .map_err(internal)?;
        self.staged.push((partial, path.to_path_buf()));
        Ok(())
    }

    /// Runs a writer callback against the `.partial` twin of `path`; used
    /// for encoders that take a path.
    pub fn stage_with<E, F>(&mut self, path: &Path, write: F) -> CliResult<()>
    where
        E: Into<anyhow::Error>,
        F: FnOnce(&Path) -> Result<(), E>,
    {
        let partial = partial_path(path);
        write(&partial)
            .map_err(|e| internal(e.into().context(format!("cannot write {}", partial.display()))))?;
        self.staged.push((partial, path.to_path_buf()));
        Ok(())
    }

    /// Renames every staged file into place.
    pub fn commit(self) -> CliResult<()> {
        for (partial, final_path) in &self.staged {
            fs::rename(partial, final_path)
                .with_context(|| {
                    format!(
                        "cannot finalize {} -> {}",
                        partial.display(),
                        final_path.display()
                    )
                })
                .map_err(internal)?;
        }
        Ok(())
    }
}

impl Default for StagedWriter {
    fn default() -> Self {
        Self::new()
    }
}
