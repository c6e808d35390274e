//! Memory and on-disk cache of disk spectra keyed by radius and medium.

use super::eigen::{disk_spectrum_robust, EigenSystem, ModeBlock, Provenance, RobustSpectrum};
use crate::elastic::ElasticMedium;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "ELASTICA_CACHE";
/// Version tag written into every cache file.
pub const CACHE_SCHEMA: u32 = 1;

/// Radius rounded to `1e-10` plus the exact medium parameters and grid size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CacheKey {
    pub h_e10: i64,
    pub lambda_bits: u64,
    pub mu_bits: u64,
    pub omega_bits: u64,
    pub m: usize,
}

impl CacheKey {
    pub fn new(h: f64, med: &ElasticMedium, m: usize) -> Self {
        CacheKey {
            h_e10: (h * 1e10).round() as i64,
            lambda_bits: med.lambda.to_bits(),
            mu_bits: med.mu.to_bits(),
            omega_bits: med.omega.to_bits(),
            m,
        }
    }

    pub fn file_name(&self) -> String {
        let text = format!("{}:{}:{}:{}:{}", self.h_e10, self.lambda_bits, self.mu_bits, self.omega_bits, self.m);
        let digest = Sha256::digest(text.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        format!("spectrum-{}.json", &hex[..32])
    }
}

/// Serialized form of one cached spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheEntry {
    pub schema: u32,
    pub key: CacheKey,
    pub h_requested: f64,
    pub h_used: f64,
    pub blocks: Vec<ModeBlock>,
}

impl CacheEntry {
    fn from_spectrum(key: CacheKey, rs: &RobustSpectrum) -> Self {
        CacheEntry {
            schema: CACHE_SCHEMA,
            key,
            h_requested: rs.h_requested,
            h_used: rs.h_used,
            blocks: rs.spectrum.blocks().map(|b| b.to_vec()).unwrap_or_default(),
        }
    }

    /// Parses and validates a cache file body.
    pub fn parse(text: &str) -> Result<Self> {
        let e: CacheEntry = serde_json::from_str(text)?;
        if e.schema != CACHE_SCHEMA {
            return Err(Error::Cache(format!("schema {} (expected {CACHE_SCHEMA})", e.schema)));
        }
        if e.blocks.len() != e.key.m || e.key.m < 2 || e.key.m % 2 != 0 {
            return Err(Error::Cache(format!("{} blocks for M = {}", e.blocks.len(), e.key.m)));
        }
        if !(e.h_used.is_finite() && e.h_used > 0.0 && e.h_requested.is_finite()) {
            return Err(Error::Cache("radius is not a positive number".into()));
        }
        let mi = e.key.m as i64;
        for (s, b) in e.blocks.iter().enumerate() {
            let n = if (s as i64) < mi / 2 { s as i64 } else { s as i64 - mi };
            if b.n != n {
                return Err(Error::Cache(format!("block {s} has mode {} (expected {n})", b.n)));
            }
            let finite = b.values.iter().chain(b.vectors.iter().flatten()).all(|z| z.re.is_finite() && z.im.is_finite());
            if !finite {
                return Err(Error::Cache(format!("block {s} is not finite")));
            }
        }
        Ok(e)
    }

    fn into_spectrum(self, med: &ElasticMedium) -> RobustSpectrum {
        RobustSpectrum {
            spectrum: EigenSystem::from_blocks(self.key.m, self.blocks, Provenance::DiskModal, [0.0, 0.0], [med.k_p, med.k_s]),
            h_requested: self.h_requested,
            h_used: self.h_used,
        }
    }
}

/// Spectrum cache shared across threads; optionally persisted as JSON files.
#[derive(Debug, Default)]
pub struct SpectrumCache {
    dir: Option<PathBuf>,
    memory: Mutex<HashMap<CacheKey, RobustSpectrum>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl SpectrumCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(SpectrumCache { dir: Some(dir), ..Self::default() })
    }

    /// Uses `dir` if given, else the directory in [`CACHE_ENV`], else memory only.
    pub fn from_env(dir: Option<&Path>) -> Result<Self> {
        match dir.map(Path::to_path_buf).or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from)) {
            Some(d) => Self::with_dir(d),
            None => Ok(Self::in_memory()),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    /// Spectrum of the origin-centered disk of radius `h`, computed on a miss.
    pub fn get(&self, h: f64, med: &ElasticMedium, m: usize) -> Result<RobustSpectrum> {
        let key = CacheKey::new(h, med, m);
        if let Some(rs) = self.memory.lock().expect("cache lock").get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(rs.clone());
        }
        if let Some(rs) = self.load(&key, med) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            self.memory.lock().expect("cache lock").insert(key, rs.clone());
            return Ok(rs);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let rs = disk_spectrum_robust(h, med, m)?;
        self.store(&key, &rs)?;
        self.memory.lock().expect("cache lock").insert(key, rs.clone());
        Ok(rs)
    }

    fn load(&self, key: &CacheKey, med: &ElasticMedium) -> Option<RobustSpectrum> {
        let path = self.dir.as_ref()?.join(key.file_name());
        let text = fs::read_to_string(path).ok()?;
        let entry = CacheEntry::parse(&text).ok()?;
        (entry.key == *key).then(|| entry.into_spectrum(med))
    }

    fn store(&self, key: &CacheKey, rs: &RobustSpectrum) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let body = serde_json::to_string(&CacheEntry::from_spectrum(*key, rs))?;
        let path = dir.join(key.file_name());
        let tmp = dir.join(format!("{}.{}.tmp", key.file_name(), std::process::id()));
        fs::write(&tmp, body)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}
