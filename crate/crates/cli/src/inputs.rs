//! Locating gathers and their companion files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rmopick_core::synth::{DatasetManifest, MANIFEST_NAME};

/// Expands files and directories into a list of gather paths. A directory
/// with a dataset manifest yields its entries in manifest order; any other
/// directory yields its `*.cigr` files whose stem has no further dot
/// (so `x.mask.cigr` or `x.seg.cigr` are skipped), sorted by name.
pub fn gather_paths(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let manifest = p.join(MANIFEST_NAME);
            if manifest.is_file() {
                let m = DatasetManifest::read(&manifest)?;
                out.extend(m.entries.iter().map(|e| p.join(&e.gather)));
            } else {
                let mut found = Vec::new();
                for entry in fs::read_dir(p).with_context(|| format!("listing {}", p.display()))? {
                    let path = entry?.path();
                    if path.is_file() && is_plain_gather(&path) {
                        found.push(path);
                    }
                }
                found.sort();
                out.extend(found);
            }
        } else if p.is_file() {
            out.push(p.clone());
        } else {
            bail!("no such file or directory: {}", p.display());
        }
    }
    if out.is_empty() {
        bail!("no gathers found");
    }
    Ok(out)
}

fn is_plain_gather(path: &Path) -> bool {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    match name.strip_suffix(".cigr") {
        Some(stem) => !stem.is_empty() && !stem.contains('.'),
        None => false,
    }
}

/// File name without the `.cigr` extension.
pub fn stem(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.strip_suffix(".cigr").unwrap_or(&name).to_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_gathers_only() {
        assert!(is_plain_gather(Path::new("d/cig_00001.cigr")));
        assert!(!is_plain_gather(Path::new("d/cig_00001.mask.cigr")));
        assert!(!is_plain_gather(Path::new("d/cig_00001.truth.csv")));
        assert!(!is_plain_gather(Path::new("d/.cigr")));
        assert_eq!(stem(Path::new("a/b.cigr")), "b");
    }

    #[test]
    fn directory_listing_sorted() {
        let dir = tempfile::tempdir().unwrap();
        for n in ["b.cigr", "a.cigr", "a.seg.cigr", "notes.txt"] {
            fs::write(dir.path().join(n), b"").unwrap();
        }
        let got = gather_paths(&[dir.path().to_owned()]).unwrap();
        let names: Vec<String> = got.iter().map(|p| stem(p)).collect();
        assert_eq!(names, ["a", "b"]);
        assert!(gather_paths(&[dir.path().join("missing")]).is_err());
    }
}
