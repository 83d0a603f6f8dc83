//! Scene manifests: one `train <path>` or `test <path>` line per `.scube`
//! file, paths relative to the manifest. Blank lines and `#` comments are
//! ignored.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spectral::io::read_scube;
use crate::spectral::SpectralImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidArgument(format!("unknown split {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetEntry {
    pub split: Split,
    /// As written in the manifest.
    pub path: PathBuf,
}

impl DatasetEntry {
    /// File stem, used as the scene name in reports.
    pub fn name(&self) -> String {
        self.path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub entries: Vec<DatasetEntry>,
}

/// A loaded scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub name: String,
    pub image: SpectralImage,
}

impl DatasetManifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let root = path.parent().unwrap_or(Path::new("")).to_path_buf();
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (split, file) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::parse(path, i + 1, "expected `<train|test> <path>`"))?;
            let split = split.parse().map_err(|e: Error| Error::parse(path, i + 1, e.to_string()))?;
            entries.push(DatasetEntry { split, path: PathBuf::from(file.trim()) });
        }
        if entries.is_empty() {
            return Err(Error::parse(path, 0, "manifest lists no scenes"));
        }
        Ok(DatasetManifest { root, entries })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!("{} {}\n", e.split, e.path.display()));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn entries(&self, split: Split) -> impl Iterator<Item = &DatasetEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    pub fn resolve(&self, entry: &DatasetEntry) -> PathBuf {
        self.root.join(&entry.path)
    }

    pub fn load(&self, split: Split) -> Result<Vec<Scene>> {
        self.entries(split)
            .map(|e| Ok(Scene { name: e.name(), image: read_scube(self.resolve(e))? }))
            .collect()
    }
}
