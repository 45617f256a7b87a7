use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Output files staged in memory and committed together.
///
/// Each file is written to a temporary sibling and renamed into place. If any
/// step fails, files already committed by this run are removed.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), bytes.into()));
    }

    pub fn add_json<T: serde::Serialize>(&mut self, name: &str, value: &T) {
        let mut s = serde_json::to_string_pretty(value).expect("output serializes");
        s.push('\n');
        self.add(name, s);
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        let mut done: Vec<PathBuf> = Vec::new();
        for (name, bytes) in &self.files {
            let target = dir.join(name);
            if let Err(e) = write_atomic(&target, bytes) {
                for p in &done {
                    let _ = fs::remove_file(p);
                }
                if created_dir {
                    let _ = fs::remove_dir(dir);
                }
                return Err(e);
            }
            done.push(target);
        }
        Ok(done)
    }
}

fn write_atomic(target: &Path, bytes: &[u8]) -> Result<()> {
    let name = target.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = target.with_file_name(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, target)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.with_context(|| format!("writing {}", target.display()))
}
