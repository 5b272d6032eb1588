//! Flat-file cache of Frobenius traces, one file per minimal model.
//!
//! Each file holds lines `ell a_ell`. Entries are only ever appended, and a
//! trace already present is never rewritten, so deleting the directory only
//! costs recomputation.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::curve::WeierstrassModel;
use crate::error::Result;

pub const CACHE_DIR_ENV: &str = "IWASAWA_CACHE_DIR";

#[derive(Debug)]
pub struct TraceCache {
    path: PathBuf,
    inner: Mutex<HashMap<u64, i64>>,
}

impl TraceCache {
    /// Opens (creating if needed) the cache file for `model` under `dir`.
    pub fn open(dir: &Path, model: &WeierstrassModel) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.txt", model.digest()));
        let mut map = HashMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(&path)?).lines() {
                let line = line?;
                let mut it = line.split_whitespace();
                let parsed = match (it.next(), it.next(), it.next()) {
                    (Some(l), Some(a), None) => l.parse::<u64>().ok().zip(a.parse::<i64>().ok()),
                    _ => None,
                };
                match parsed {
                    Some((ell, a)) if (a as i128).pow(2) <= 4 * ell as i128 => {
                        map.entry(ell).or_insert(a);
                    }
                    _ => log::warn!("ignoring malformed cache line {line:?} in {}", path.display()),
                }
            }
        }
        Ok(TraceCache { path, inner: Mutex::new(map) })
    }

    /// Uses the directory named by the environment variable, if set.
    pub fn from_env(model: &WeierstrassModel) -> Result<Option<Self>> {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(dir) => Self::open(Path::new(&dir), model).map(Some),
            None => Ok(None),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, ell: u64) -> Option<i64> {
        self.inner.lock().expect("cache lock").get(&ell).copied()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends the entries not yet present, in the order given.
    pub fn extend(&self, entries: &[(u64, i64)]) -> Result<()> {
        let mut map = self.inner.lock().expect("cache lock");
        let mut buf = String::new();
        for &(ell, a) in entries {
            if let std::collections::hash_map::Entry::Vacant(v) = map.entry(ell) {
                v.insert(a);
                buf.push_str(&format!("{ell} {a}\n"));
            }
        }
        if !buf.is_empty() {
            let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
            f.write_all(buf.as_bytes())?;
        }
        Ok(())
    }
}
