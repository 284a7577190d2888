//! Input reading and all-or-nothing output files.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use tempfile::NamedTempFile;

use crate::error::{Error, Result};

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Input {
        path: path.to_owned(),
        source,
    })
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Input {
        path: path.to_owned(),
        source,
    })
}

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Rejects output paths whose directory does not exist, before any work
/// is done.
pub fn check_output_path(path: &Path) -> Result<()> {
    if path.file_name().is_none() {
        return Err(Error::Usage(format!("{}: not a file path", path.display())));
    }
    let dir = parent_dir(path);
    if !dir.is_dir() {
        return Err(Error::Usage(format!(
            "{}: directory {} does not exist",
            path.display(),
            dir.display()
        )));
    }
    if path.is_dir() {
        return Err(Error::Usage(format!("{}: is a directory", path.display())));
    }
    Ok(())
}

/// Streams `body` into a temporary file next to `path` and renames it over
/// `path` only once `body` succeeded and the data is flushed. On any error
/// the temporary file is removed and `path` is left untouched.
pub fn write_atomic_with<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let io_err = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    let mut tmp = NamedTempFile::new_in(parent_dir(path)).map_err(io_err)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        body(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)?;
    }
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic_with(path, |w| w.write_all(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_body_leaves_target_untouched() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("out.json");
        fs::write(&target, b"previous").unwrap();
        let err = write_atomic_with(&target, |w| {
            w.write_all(b"half of the new cont")?;
            Err(io::Error::other("injected"))
        })
        .unwrap_err();
        assert!(err.to_string().contains("injected"));
        assert_eq!(fs::read(&target).unwrap(), b"previous");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn successful_body_replaces_target() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("out.csv");
        write_atomic(&target, b"a,b\n").unwrap();
        write_atomic(&target, b"c,d\n").unwrap();
        assert_eq!(fs::read(&target).unwrap(), b"c,d\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn output_paths_are_validated() {
        let dir = tempfile::tempdir().unwrap();
        assert!(check_output_path(&dir.path().join("x.svg")).is_ok());
        assert!(check_output_path(&dir.path().join("missing/x.svg")).is_err());
        assert!(check_output_path(dir.path()).is_err());
    }
}
