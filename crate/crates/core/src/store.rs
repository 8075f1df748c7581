//! Append-only sketch store for duplicate detection under group
//! equivalence.
//!
//! One JSON object per line: a header carrying the group description,
//! `group_hash`, `omega`, `m` and `seed`, then one record per sketch. Floats
//! are written in shortest round-trip form, so a load/save cycle is
//! bit-exact.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::GroupSpec;
use crate::error::{Error, Result};
use crate::numeric::dist_sq;

pub const STORE_FORMAT: &str = "ginvsketch-store";
pub const STORE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreHeader {
    pub format: String,
    pub version: u32,
    pub group_hash: String,
    pub group: GroupSpec,
    pub omega: usize,
    pub m: usize,
    pub seed: u64,
}

impl StoreHeader {
    pub fn new(group: GroupSpec, omega: usize, m: usize, seed: u64) -> Self {
        StoreHeader {
            format: STORE_FORMAT.into(),
            version: STORE_VERSION,
            group_hash: crate::config::group_hash(&group, omega),
            group,
            omega,
            m,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchRecord {
    pub id: String,
    pub group_hash: String,
    pub m: usize,
    pub seed: u64,
    pub sketch: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Match {
    pub id: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SketchStore {
    pub header: StoreHeader,
    pub records: Vec<SketchRecord>,
}

impl SketchStore {
    pub fn new(header: StoreHeader) -> Self {
        SketchStore {
            header,
            records: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing store header".into(),
        })?;
        let header: StoreHeader = serde_json::from_str(first).map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        if header.format != STORE_FORMAT || header.version != STORE_VERSION {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "unsupported store format {} v{}",
                    header.format, header.version
                ),
            });
        }
        let records = lines
            .map(|(i, l)| {
                serde_json::from_str::<SketchRecord>(l).map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SketchStore { header, records })
    }

    pub fn to_text(&self) -> Result<String> {
        let mut out = serde_json::to_string(&self.header)?;
        out.push('\n');
        for r in &self.records {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Option<Self>> {
        match fs::read_to_string(path) {
            Ok(text) => Self::parse(&text).map(Some),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn check_header(&self, header: &StoreHeader) -> Result<()> {
        if self.header.group_hash != header.group_hash {
            return Err(Error::GroupHashMismatch {
                expected: header.group_hash.clone(),
                found: self.header.group_hash.clone(),
            });
        }
        if (self.header.m, self.header.seed) != (header.m, header.seed) {
            return Err(Error::InvalidParameter(format!(
                "store was built with m = {}, seed = {}; configuration has m = {}, seed = {}",
                self.header.m, self.header.seed, header.m, header.seed
            )));
        }
        Ok(())
    }

    /// Adds a sketch under this store's header.
    pub fn push(&mut self, id: String, sketch: Vec<f64>) -> Result<()> {
        if sketch.len() != self.header.m {
            return Err(Error::DimensionMismatch {
                expected: self.header.m,
                got: sketch.len(),
            });
        }
        self.records.push(SketchRecord {
            id,
            group_hash: self.header.group_hash.clone(),
            m: self.header.m,
            seed: self.header.seed,
            sketch,
        });
        Ok(())
    }

    /// Records within `radius` (Euclidean) of `query`, nearest first.
    /// Records from a different group hash are never compared.
    pub fn query(&self, query: &[f64], radius: f64) -> Result<Vec<Match>> {
        if self.records.is_empty() {
            return Err(Error::EmptyStore);
        }
        if query.len() != self.header.m {
            return Err(Error::DimensionMismatch {
                expected: self.header.m,
                got: query.len(),
            });
        }
        let mut matches: Vec<Match> = self
            .records
            .iter()
            .filter(|r| r.group_hash == self.header.group_hash)
            .map(|r| Match {
                id: r.id.clone(),
                distance: dist_sq(&r.sketch, query).sqrt(),
            })
            .filter(|m| m.distance <= radius)
            .collect();
        matches.sort_by(|a, b| {
            a.distance
                .total_cmp(&b.distance)
                .then_with(|| a.id.cmp(&b.id))
        });
        Ok(matches)
    }
}

/// Advisory single-writer lock held while the guard lives.
struct LockGuard {
    path: PathBuf,
}

impl LockGuard {
    fn acquire(store: &Path) -> Result<Self> {
        let path = sibling(store, "lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(LockGuard { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(Error::StoreLocked(path))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(suffix);
    path.with_file_name(name)
}

/// Appends sketches to the store at `path`, creating it with `header` if it
/// does not exist. The new file is written next to the old one and renamed
/// over it.
pub fn append_records(
    path: &Path,
    header: &StoreHeader,
    sketches: impl IntoIterator<Item = (String, Vec<f64>)>,
) -> Result<SketchStore> {
    let _lock = LockGuard::acquire(path)?;
    let mut store = match SketchStore::load(path)? {
        Some(existing) => {
            existing.check_header(header)?;
            existing
        }
        None => SketchStore::new(header.clone()),
    };
    for (id, sketch) in sketches {
        store.push(id, sketch)?;
    }
    let tmp = sibling(path, &format!("tmp.{}", std::process::id()));
    {
        let mut f = File::create(&tmp)?;
        f.write_all(store.to_text()?.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(store)
}
