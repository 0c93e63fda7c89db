//! Input discovery, output files and artifact manifests.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST: &str = "MANIFEST.sha256";

/// Event files of one trading session.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Session {
    /// Subdirectory name when the input was a multi-day root.
    pub label: Option<String>,
    pub files: Vec<PathBuf>,
}

fn event_files_in(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let rd = fs::read_dir(dir).map_err(|e| CliError::missing(dir, e.to_string()))?;
    let mut out = Vec::new();
    for entry in rd {
        let p = entry.map_err(|e| CliError::missing(dir, e.to_string()))?.path();
        if p.is_file() && p.extension().is_some_and(|x| x == "events") {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

/// Resolves the positional inputs of `detect`/`roc`.
///
/// * event files, or directories holding `*.events`, form one session;
/// * a single directory without event files but with subdirectories that hold
///   them (a `simulate` output root) gives one session per subdirectory.
pub fn resolve_sessions(inputs: &[PathBuf]) -> Result<Vec<Session>, CliError> {
    if inputs.is_empty() {
        return Err(CliError::new(crate::error::Kind::Missing, "no input event files given"));
    }
    for p in inputs {
        if !p.exists() {
            return Err(CliError::missing(p, "no such file or directory"));
        }
    }
    if let [dir] = inputs {
        if dir.is_dir() && event_files_in(dir)?.is_empty() {
            let mut days: Vec<PathBuf> = fs::read_dir(dir)
                .map_err(|e| CliError::missing(dir, e.to_string()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_dir())
                .collect();
            days.sort();
            let mut out = Vec::new();
            for d in days {
                let files = event_files_in(&d)?;
                if !files.is_empty() {
                    let label = d.file_name().map(|n| n.to_string_lossy().into_owned());
                    out.push(Session { label, files });
                }
            }
            if out.is_empty() {
                return Err(CliError::missing(dir, "no .events files found"));
            }
            return Ok(out);
        }
    }
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let found = event_files_in(p)?;
            if found.is_empty() {
                return Err(CliError::missing(p, "no .events files found"));
            }
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(vec![Session { label: None, files }])
}

/// Output directory of a session under `out`.
pub fn session_dir(out: &Path, s: &Session) -> PathBuf {
    match &s.label {
        Some(l) => out.join(l),
        None => out.to_path_buf(),
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))
}

/// Creates `path` and hands a buffered writer to `body`.
pub fn write_file<F>(path: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let f = File::create(path).map_err(|e| CliError::output(path, e))?;
    let mut w = BufWriter::new(f);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::output(path, e))
}

pub fn open_input(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::missing(path, e.to_string()))
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let mut f = File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

fn collect(root: &Path, dir: &Path, out: &mut Vec<(String, PathBuf)>) -> std::io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let p = entry?.path();
        if p.is_dir() {
            collect(root, &p, out)?;
        } else {
            let rel = p.strip_prefix(root).expect("under root");
            let rel: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
            let rel = rel.join("/");
            if rel != MANIFEST {
                out.push((rel, p));
            }
        }
    }
    Ok(())
}

/// `(relative path, sha256)` of every file under `root`, sorted by path.
pub fn checksums(root: &Path) -> std::io::Result<Vec<(String, String)>> {
    let mut files = Vec::new();
    collect(root, root, &mut files)?;
    files.sort();
    files.into_iter().map(|(rel, p)| Ok((rel, sha256_file(&p)?))).collect()
}

/// Writes `root/MANIFEST.sha256` in `sha256sum` format.
pub fn write_manifest(root: &Path) -> Result<(), CliError> {
    let sums = checksums(root).map_err(|e| CliError::output(root, e))?;
    write_file(&root.join(MANIFEST), |w| {
        for (rel, h) in &sums {
            writeln!(w, "{h}  {rel}")?;
        }
        Ok(())
    })
}
