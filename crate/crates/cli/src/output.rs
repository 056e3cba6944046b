//! Output directory handling: a lock file against concurrent runs and
//! atomic file replacement.

use std::fs::{self, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

pub const LOCK_FILE: &str = ".tmnovelty.lock";

/// Held for the lifetime of a command; removes the lock file on drop.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    lock: PathBuf,
}

impl OutputDir {
    pub fn lock(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        let lock = root.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(CliError::Validation(format!(
                    "output directory {} is in use (remove {} if no other run is active)",
                    root.display(),
                    lock.display()
                )));
            }
            Err(e) => return Err(CliError::io(&lock, e)),
        }
        Ok(Self { root: root.to_path_buf(), lock })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Writes `name` through a temporary file in the same directory and
    /// renames it into place.
    pub fn write<F>(&self, name: &str, body: F) -> CliResult<PathBuf>
    where
        F: FnOnce(&mut dyn Write) -> CliResult<()>,
    {
        let target = self.path(name);
        let tmp = NamedTempFile::new_in(&self.root).map_err(|e| CliError::io(&self.root, e))?;
        {
            let mut w = BufWriter::new(tmp.as_file());
            body(&mut w)?;
            w.flush().map_err(|e| CliError::io(&target, e))?;
        }
        tmp.persist(&target).map_err(|e| CliError::io(&target, e.error))?;
        log::info!("wrote {}", target.display());
        Ok(target)
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}
