//! On-disk invariant cache.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hhi_core::exactnum::LaurentPoly;
use hhi_core::invariants::{InvariantKey, InvariantRecord, Method};
use serde::{Deserialize, Serialize};

pub const FORMAT: &str = "hhi/1";
pub const ENV_VAR: &str = "HHI_CACHE";
pub const DEFAULT_PATH: &str = "hhi-cache.json";

#[derive(Serialize, Deserialize)]
struct CacheFile {
    format: String,
    records: Vec<InvariantRecord>,
}

/// `--cache` wins over `HHI_CACHE`, which wins over `./hhi-cache.json`.
pub fn resolve_path(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match std::env::var_os(ENV_VAR) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => PathBuf::from(DEFAULT_PATH),
    }
}

/// Stack-normalized values keyed by canonical key and method.
pub struct Cache {
    path: PathBuf,
    records: BTreeMap<(InvariantKey, Method), LaurentPoly>,
    dirty: bool,
}

impl Cache {
    /// A missing file is an empty cache.
    pub fn load(path: PathBuf) -> Result<Self> {
        let mut records = BTreeMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let file: CacheFile =
                serde_json::from_str(&text).with_context(|| format!("parsing cache {}", path.display()))?;
            if file.format != FORMAT {
                bail!("{}: unsupported cache format {:?}, expected {FORMAT:?}", path.display(), file.format);
            }
            for rec in file.records {
                records.entry((rec.key.canonical(), rec.method)).or_insert(rec.value);
            }
        }
        Ok(Cache { path, records, dirty: false })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, method: Method) -> usize {
        self.records.keys().filter(|(_, m)| *m == method).count()
    }

    pub fn get(&self, key: &InvariantKey, method: Method) -> Option<&LaurentPoly> {
        self.records.get(&(key.canonical(), method))
    }

    pub fn insert(&mut self, key: &InvariantKey, method: Method, value: LaurentPoly) {
        let k = (key.canonical(), method);
        if let std::collections::btree_map::Entry::Vacant(e) = self.records.entry(k) {
            e.insert(value);
            self.dirty = true;
        }
    }

    /// Returns the cached value or computes and records it.
    pub fn get_or_compute(
        &mut self,
        key: &InvariantKey,
        method: Method,
        f: impl FnOnce() -> Result<LaurentPoly>,
    ) -> Result<LaurentPoly> {
        if let Some(v) = self.get(key, method) {
            return Ok(v.clone());
        }
        let v = f()?;
        self.insert(key, method, v.clone());
        Ok(v)
    }

    /// Writes to a sibling temp file and renames it over the cache. No-op if
    /// nothing was added.
    pub fn save(&mut self) -> Result<()> {
        if !self.dirty {
            return Ok(());
        }
        let file = CacheFile {
            format: FORMAT.to_string(),
            records: self
                .records
                .iter()
                .map(|((key, method), value)| InvariantRecord { key: key.clone(), value: value.clone(), method: *method })
                .collect(),
        };
        let mut tmp = self.path.clone().into_os_string();
        tmp.push(format!(".tmp{}", std::process::id()));
        let tmp = PathBuf::from(tmp);
        std::fs::write(&tmp, serde_json::to_string(&file)?).with_context(|| format!("writing {}", tmp.display()))?;
        std::fs::rename(&tmp, &self.path).with_context(|| format!("renaming onto {}", self.path.display()))?;
        self.dirty = false;
        Ok(())
    }
}
