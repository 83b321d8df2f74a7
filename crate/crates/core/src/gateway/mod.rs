//! Retrieval of CSV extracts: pinned fixtures first, then a checksum-verified
//! on-disk cache, then HTTP through an injected [`Transport`].
//!
//! Cache layout is `<cache_root>/<name>.csv` plus `<name>.sha256`.

pub mod fixtures;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, UNIX_EPOCH};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::series::{load_csv_str, Dataset, Provenance, Schema, SeriesError};

/// Environment variable overriding the cache root.
pub const CACHE_ENV: &str = "SUSTAIN_CACHE_DIR";

/// Network attempts per fetch.
pub const MAX_ATTEMPTS: u32 = 3;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("checksum mismatch for `{name}`: expected {expected}, actual {actual}")]
    ChecksumMismatch { name: String, expected: String, actual: String },
    #[error("`{name}` is not cached and offline mode forbids network access")]
    OfflineColdCache { name: String },
    #[error("GET {url} failed after {attempts} attempt(s): {message}")]
    Network { url: String, attempts: u32, message: String },
    #[error("cache {path}: {message}")]
    Cache { path: PathBuf, message: String },
    #[error("`{name}`: {source}")]
    Data { name: String, source: SeriesError },
}

/// Something that can GET a URL body.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str) -> Result<Vec<u8>, String>;
}

/// Blocking HTTP transport.
pub struct HttpTransport {
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new() -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .build();
        HttpTransport { agent: config.into() }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        Self::new()
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> Result<Vec<u8>, String> {
        let mut response = self.agent.get(url).call().map_err(|e| e.to_string())?;
        response.body_mut().read_to_vec().map_err(|e| e.to_string())
    }
}

/// A retrievable CSV extract.
#[derive(Debug, Clone)]
pub struct SourceDescriptor {
    pub name: String,
    pub url: String,
    pub schema: Schema,
    /// Hex SHA-256 of the pinned snapshot, when one is pinned.
    pub checksum: Option<String>,
}

impl SourceDescriptor {
    pub fn new(name: impl Into<String>, url: impl Into<String>, schema: Schema) -> Self {
        SourceDescriptor { name: name.into(), url: url.into(), schema, checksum: None }
    }

    pub fn pinned(mut self, checksum: impl Into<String>) -> Self {
        self.checksum = Some(checksum.into().to_ascii_lowercase());
        self
    }

    /// Descriptor for a compiled-in fixture.
    pub fn fixture(name: &str) -> Option<Self> {
        let f = fixtures::lookup(name)?;
        Some(SourceDescriptor::new(f.name, f.url, Schema::Mapping(f.schema())).pinned(f.sha256))
    }

    pub fn cache_path(&self, root: &Path) -> PathBuf {
        root.join(format!("{}.csv", self.name))
    }

    pub fn checksum_path(&self, root: &Path) -> PathBuf {
        root.join(format!("{}.sha256", self.name))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Cache root from [`CACHE_ENV`], else a directory under the system temp dir.
pub fn default_cache_root() -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("sustain-cache"))
}

/// Loads a compiled-in fixture by name, verifying its checksum.
pub fn load_fixture(name: &str) -> Result<Dataset, GatewayError> {
    let f = fixtures::lookup(name).ok_or_else(|| GatewayError::UnknownFixture(name.to_owned()))?;
    verify(name, f.sha256, f.body.as_bytes())?;
    load_csv_str(f.body, &Schema::Mapping(f.schema()), Provenance::new(format!("fixture:{} ({})", f.name, f.label)))
        .map_err(|source| GatewayError::Data { name: name.to_owned(), source })
}

fn verify(name: &str, expected: &str, bytes: &[u8]) -> Result<(), GatewayError> {
    let actual = sha256_hex(bytes);
    if actual.eq_ignore_ascii_case(expected.trim()) {
        Ok(())
    } else {
        Err(GatewayError::ChecksumMismatch { name: name.to_owned(), expected: expected.trim().to_owned(), actual })
    }
}

pub struct Gateway {
    cache_root: PathBuf,
    transport: Arc<dyn Transport>,
    backoff: Duration,
}

impl Gateway {
    pub fn new(cache_root: impl Into<PathBuf>, transport: Arc<dyn Transport>) -> Self {
        Gateway { cache_root: cache_root.into(), transport, backoff: Duration::from_millis(500) }
    }

    /// HTTP transport rooted at [`default_cache_root`].
    pub fn from_env() -> Self {
        Gateway::new(default_cache_root(), Arc::new(HttpTransport::new()))
    }

    /// Base delay; attempt `k` waits `k × backoff` before retrying.
    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }

    pub fn cache_root(&self) -> &Path {
        &self.cache_root
    }

    pub fn fetch(&self, source: &SourceDescriptor, offline: bool) -> Result<Dataset, GatewayError> {
        if let Some(f) = fixtures::lookup(&source.name) {
            if source.checksum.as_deref() == Some(f.sha256) {
                return load_fixture(f.name);
            }
        }
        if let Some(dataset) = self.read_cache(source)? {
            return Ok(dataset);
        }
        if offline {
            return Err(GatewayError::OfflineColdCache { name: source.name.clone() });
        }
        self.download(source)
    }

    fn read_cache(&self, source: &SourceDescriptor) -> Result<Option<Dataset>, GatewayError> {
        let path = source.cache_path(&self.cache_root);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(GatewayError::Cache { path, message: e.to_string() }),
        };
        let sidecar = source.checksum_path(&self.cache_root);
        match std::fs::read_to_string(&sidecar) {
            Ok(recorded) => verify(&source.name, &recorded, &bytes)?,
            Err(e) => return Err(GatewayError::Cache { path: sidecar, message: e.to_string() }),
        }
        if let Some(pinned) = &source.checksum {
            verify(&source.name, pinned, &bytes)?;
        }
        let text = String::from_utf8(bytes).map_err(|e| GatewayError::Cache { path: path.clone(), message: e.to_string() })?;
        let retrieved = std::fs::metadata(&path)
            .and_then(|m| m.modified())
            .ok()
            .and_then(|t| t.duration_since(UNIX_EPOCH).ok())
            .map(|d| d.as_secs());
        let provenance = Provenance { source: source.url.clone(), retrieved_unix: retrieved };
        load_csv_str(&text, &source.schema, provenance)
            .map(Some)
            .map_err(|e| GatewayError::Data { name: source.name.clone(), source: e })
    }

    fn download(&self, source: &SourceDescriptor) -> Result<Dataset, GatewayError> {
        let mut last_error = String::new();
        let mut body = None;
        for attempt in 1..=MAX_ATTEMPTS {
            match self.transport.get(&source.url) {
                Ok(bytes) => {
                    body = Some(bytes);
                    break;
                }
                Err(e) => {
                    last_error = e;
                    if attempt < MAX_ATTEMPTS {
                        std::thread::sleep(self.backoff * attempt);
                    }
                }
            }
        }
        let bytes = body.ok_or_else(|| GatewayError::Network {
            url: source.url.clone(),
            attempts: MAX_ATTEMPTS,
            message: last_error,
        })?;
        if let Some(pinned) = &source.checksum {
            verify(&source.name, pinned, &bytes)?;
        }
        let text = std::str::from_utf8(&bytes).map_err(|e| GatewayError::Data {
            name: source.name.clone(),
            source: SeriesError::Csv(e.to_string()),
        })?;
        let dataset = load_csv_str(text, &source.schema, Provenance::retrieved_now(source.url.clone()))
            .map_err(|e| GatewayError::Data { name: source.name.clone(), source: e })?;
        self.write_cache(source, &bytes)?;
        Ok(dataset)
    }

    fn write_cache(&self, source: &SourceDescriptor, bytes: &[u8]) -> Result<(), GatewayError> {
        let cache_err = |path: &Path, e: &dyn std::fmt::Display| GatewayError::Cache {
            path: path.to_owned(),
            message: e.to_string(),
        };
        std::fs::create_dir_all(&self.cache_root).map_err(|e| cache_err(&self.cache_root, &e))?;
        let atomic_write = |target: PathBuf, contents: &[u8]| -> Result<(), GatewayError> {
            let mut tmp = tempfile::NamedTempFile::new_in(&self.cache_root).map_err(|e| cache_err(&target, &e))?;
            tmp.write_all(contents).map_err(|e| cache_err(&target, &e))?;
            tmp.persist(&target).map_err(|e| cache_err(&target, &e.error))?;
            Ok(())
        };
        // sidecar first: a csv without its checksum is treated as corrupt on the next read
        atomic_write(source.checksum_path(&self.cache_root), sha256_hex(bytes).as_bytes())?;
        atomic_write(source.cache_path(&self.cache_root), bytes)
    }
}
