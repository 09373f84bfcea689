//! Corpus storage: one file per case, named by the lowercase hex of the
//! sha-256 of its contents, written atomically so concurrent workers never
//! corrupt entries.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub fn hash_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Stores a case under `corpus_dir/<target>/<hash>`; returns the hash.
/// Write-to-temp plus atomic rename.
pub fn save_case(corpus_dir: &Path, target: &str, bytes: &[u8]) -> std::io::Result<String> {
    let dir = corpus_dir.join(target);
    fs::create_dir_all(&dir)?;
    let name = hash_hex(bytes);
    let path = dir.join(&name);
    if !path.exists() {
        let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
        tmp.write_all(bytes)?;
        tmp.persist(&path).map_err(|e| e.error)?;
    }
    Ok(name)
}

/// Loads the stored cases for a target, sorted by file name for
/// reproducible replay order.
pub fn load_cases(corpus_dir: &Path, target: &str) -> std::io::Result<Vec<(String, Vec<u8>)>> {
    let dir = corpus_dir.join(target);
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut entries: Vec<PathBuf> = fs::read_dir(&dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    entries.sort();
    let mut cases = Vec::with_capacity(entries.len());
    for path in entries {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        cases.push((name, fs::read(&path)?));
    }
    Ok(cases)
}

/// Target names that have at least one stored case.
pub fn stored_targets(corpus_dir: &Path) -> std::io::Result<Vec<String>> {
    if !corpus_dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut names: Vec<String> = fs::read_dir(corpus_dir)?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    Ok(names)
}
