//! All-or-nothing output files.
//!
//! Every CSV is rendered into a temporary file beside its destination and
//! only renamed into place once all requested outputs have been written.

use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::error::CliError;

pub enum Destination {
    Stdout,
    File(PathBuf),
}

impl Destination {
    pub fn from_arg(path: Option<&Path>) -> Self {
        match path {
            Some(p) if p != Path::new("-") => Destination::File(p.to_path_buf()),
            _ => Destination::Stdout,
        }
    }
}

/// Writes each `(destination, bytes)` pair, committing files only after all
/// of them were staged successfully.
pub fn commit(outputs: Vec<(Destination, Vec<u8>)>) -> Result<(), CliError> {
    let mut staged = Vec::new();
    let mut stdout_chunks = Vec::new();
    for (dest, bytes) in outputs {
        match dest {
            Destination::Stdout => stdout_chunks.push(bytes),
            Destination::File(path) => {
                let dir = match path.parent() {
                    Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                    _ => PathBuf::from("."),
                };
                let mut tmp = NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&path, e))?;
                tmp.write_all(&bytes).map_err(|e| CliError::io(&path, e))?;
                tmp.flush().map_err(|e| CliError::io(&path, e))?;
                staged.push((tmp, path));
            }
        }
    }

    let mut committed: Vec<PathBuf> = Vec::new();
    for (tmp, path) in staged {
        if let Err(e) = tmp.persist(&path) {
            for done in &committed {
                let _ = std::fs::remove_file(done);
            }
            return Err(CliError::io(&path, e.error));
        }
        committed.push(path);
    }

    let mut out = std::io::stdout().lock();
    for chunk in stdout_chunks {
        out.write_all(&chunk)
            .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
    }
    out.flush()
        .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
    Ok(())
}
