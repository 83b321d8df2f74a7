use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use sustain_core::gateway::{sha256_hex, Gateway, GatewayError, SourceDescriptor, Transport, MAX_ATTEMPTS};
use sustain_core::series::{ColumnMapping, Schema};

const BODY: &str = "year,gdp\n2000,100\n2001,103\n2002,106.09\n";

/// Serves a fixed body after `failures` failed calls, counting every call.
struct Mock {
    body: Vec<u8>,
    failures: usize,
    calls: AtomicUsize,
    urls: Mutex<Vec<String>>,
}

impl Mock {
    fn new(body: &str, failures: usize) -> Arc<Self> {
        Arc::new(Mock { body: body.as_bytes().to_vec(), failures, calls: AtomicUsize::new(0), urls: Mutex::new(Vec::new()) })
    }

    fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Transport for Mock {
    fn get(&self, url: &str) -> Result<Vec<u8>, String> {
        self.urls.lock().unwrap().push(url.to_owned());
        let n = self.calls.fetch_add(1, Ordering::SeqCst);
        if n < self.failures {
            Err(format!("connection reset ({n})"))
        } else {
            Ok(self.body.clone())
        }
    }
}

fn source() -> SourceDescriptor {
    SourceDescriptor::new(
        "synthetic",
        "http://example.invalid/synthetic.csv",
        Schema::Mapping(ColumnMapping::parse_inline("year=year,gdp=gdp:currency-millions:gdp").unwrap()),
    )
}

fn gateway(dir: &std::path::Path, mock: &Arc<Mock>) -> Gateway {
    Gateway::new(dir, mock.clone()).with_backoff(Duration::ZERO)
}

#[test]
fn warm_cache_makes_no_calls() {
    let dir = tempfile::tempdir().unwrap();
    let mock = Mock::new(BODY, 0);
    let gw = gateway(dir.path(), &mock);
    let first = gw.fetch(&source(), false).unwrap();
    assert_eq!(mock.calls(), 1);
    let second = gw.fetch(&source(), false).unwrap();
    let third = gw.fetch(&source(), true).unwrap();
    assert_eq!(mock.calls(), 1);
    assert!(first.same_values(&second));
    assert!(first.same_values(&third));

    let cached = std::fs::read(source().cache_path(dir.path())).unwrap();
    assert_eq!(cached, BODY.as_bytes());
    let sidecar = std::fs::read_to_string(source().checksum_path(dir.path())).unwrap();
    assert_eq!(sidecar, sha256_hex(BODY.as_bytes()));
}

#[test]
fn offline_cold_cache_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let mock = Mock::new(BODY, 0);
    let err = gateway(dir.path(), &mock).fetch(&source(), true).unwrap_err();
    assert!(matches!(err, GatewayError::OfflineColdCache { .. }), "{err}");
    assert_eq!(mock.calls(), 0);
}

#[test]
fn transient_failures_are_retried() {
    let dir = tempfile::tempdir().unwrap();
    let mock = Mock::new(BODY, MAX_ATTEMPTS as usize - 1);
    gateway(dir.path(), &mock).fetch(&source(), false).unwrap();
    assert_eq!(mock.calls(), MAX_ATTEMPTS as usize);
}

#[test]
fn persistent_failure_stops_after_max_attempts() {
    let dir = tempfile::tempdir().unwrap();
    let mock = Mock::new(BODY, usize::MAX);
    let err = gateway(dir.path(), &mock).fetch(&source(), false).unwrap_err();
    match err {
        GatewayError::Network { attempts, ref url, .. } => {
            assert_eq!(attempts, MAX_ATTEMPTS);
            assert_eq!(url, "http://example.invalid/synthetic.csv");
        }
        other => panic!("{other}"),
    }
    assert_eq!(mock.calls(), MAX_ATTEMPTS as usize);
    assert!(!source().cache_path(dir.path()).exists());
}

#[test]
fn pinned_download_mismatch_names_both_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let mock = Mock::new(BODY, 0);
    let pinned = source().pinned("00".repeat(32));
    let err = gateway(dir.path(), &mock).fetch(&pinned, false).unwrap_err();
    match err {
        GatewayError::ChecksumMismatch { expected, actual, .. } => {
            assert_eq!(expected, "00".repeat(32));
            assert_eq!(actual, sha256_hex(BODY.as_bytes()));
        }
        other => panic!("{other}"),
    }
    assert!(!source().cache_path(dir.path()).exists());
}

#[test]
fn corrupted_cache_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let mock = Mock::new(BODY, 0);
    let gw = gateway(dir.path(), &mock);
    gw.fetch(&source(), false).unwrap();
    std::fs::write(source().cache_path(dir.path()), BODY.replace("103", "104")).unwrap();
    let err = gw.fetch(&source(), true).unwrap_err();
    assert!(matches!(err, GatewayError::ChecksumMismatch { .. }), "{err}");
}

#[test]
fn schema_drift_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let mock = Mock::new("year,GDP_renamed\n2000,1\n", 0);
    let err = gateway(dir.path(), &mock).fetch(&source(), false).unwrap_err();
    assert!(matches!(err, GatewayError::Data { .. }), "{err}");
}

#[test]
fn fixtures_never_hit_the_transport() {
    let dir = tempfile::tempdir().unwrap();
    let mock = Mock::new(BODY, 0);
    let gw = gateway(dir.path(), &mock);
    let ds = gw.fetch(&SourceDescriptor::fixture("def2011").unwrap(), true).unwrap();
    assert_eq!(ds.series_iter().count(), 6);
    assert!(ds.series_iter().all(|s| s.len() == 5));
    assert_eq!(mock.calls(), 0);
}
