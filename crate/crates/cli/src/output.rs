use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn temp_path(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    path.with_file_name(format!(".{name}.partial"))
}

/// Writes a set of files so that either all of them appear or none do.
///
/// Each file is staged next to its destination and renamed into place once
/// every stage succeeded; on any error the staged files are removed.
pub fn write_all_or_nothing(files: &[(PathBuf, Vec<u8>)]) -> Result<(), CliError> {
    let mut staged: Vec<PathBuf> = Vec::new();
    let result = (|| {
        for (path, bytes) in files {
            let tmp = temp_path(path);
            staged.push(tmp.clone());
            let mut f = fs::File::create(&tmp).map_err(|e| io_err(path, e))?;
            f.write_all(bytes).map_err(|e| io_err(path, e))?;
            f.sync_all().map_err(|e| io_err(path, e))?;
        }
        for (path, _) in files {
            fs::rename(temp_path(path), path).map_err(|e| io_err(path, e))?;
        }
        Ok(())
    })();
    if result.is_err() {
        for tmp in &staged {
            let _ = fs::remove_file(tmp);
        }
    }
    result
}

/// Report to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, bytes: Vec<u8>) -> Result<(), CliError> {
    match out {
        Some(path) => write_all_or_nothing(&[(path.to_path_buf(), bytes)]),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| io_err(Path::new("<stdout>"), e))
        }
    }
}
