//! Robust streaming readers for WARC and ARC container files.
//!
//! Real collections contain truncated records, wrong Content-Length values,
//! corrupt gzip members, and plain garbage. The readers here never abort a
//! scan over bad data: a malformed record is skipped, counted, and the scan
//! resumes at the next plausible record boundary. Memory stays bounded by the
//! largest single record, never by file size.

mod arc;
mod gzip;
mod http;
mod scan;
mod source;
mod warc;

pub use http::{split_http, HttpPayload};
pub use source::{ArchiveSource, FormatHint, RecordIter};

pub(crate) use arc::ArcParser;
pub(crate) use warc::WarcParser;

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};

/// Default cap on a single record's payload; corrupt length fields must not
/// be able to exhaust memory.
pub const DEFAULT_MAX_RECORD_SIZE: u64 = 1 << 30;

#[derive(Debug, thiserror::Error)]
pub enum ArchiveError {
    #[error("no input paths given")]
    NoInputs,
    #[error("input file not found or not readable: {0}")]
    MissingFile(PathBuf),
}

/// Record kinds across both container formats. Unrecognized WARC-Type values
/// are folded into `Metadata` so framing stays intact for forward
/// compatibility; `ArcEntry` appears only when the source file is ARC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecordKind {
    Response,
    Request,
    Metadata,
    Revisit,
    Resource,
    Conversion,
    Warcinfo,
    ArcEntry,
}

impl RecordKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecordKind::Response => "response",
            RecordKind::Request => "request",
            RecordKind::Metadata => "metadata",
            RecordKind::Revisit => "revisit",
            RecordKind::Resource => "resource",
            RecordKind::Conversion => "conversion",
            RecordKind::Warcinfo => "warcinfo",
            RecordKind::ArcEntry => "arc-entry",
        }
    }

    fn from_warc_type(value: &str) -> RecordKind {
        match value.trim().to_ascii_lowercase().as_str() {
            "response" => RecordKind::Response,
            "request" => RecordKind::Request,
            "revisit" => RecordKind::Revisit,
            "resource" => RecordKind::Resource,
            "conversion" => RecordKind::Conversion,
            "warcinfo" => RecordKind::Warcinfo,
            _ => RecordKind::Metadata,
        }
    }
}

/// One parsed record: the container envelope plus the raw payload block.
/// For HTTP captures the payload is the full HTTP message; see
/// [`split_http`].
#[derive(Debug, Clone)]
pub struct ArchiveRecord {
    pub kind: RecordKind,
    pub target_uri: Option<String>,
    /// 14-digit UTC timestamp, `yyyyMMddHHmmss`. Both WARC-Date (ISO 8601)
    /// and the ARC header date normalize to this form.
    pub timestamp: String,
    pub declared_mime: Option<String>,
    pub content_length: u64,
    pub payload: Vec<u8>,
    /// Version string from the record header ("WARC/1.0", "WARC/1.1", ...);
    /// recorded but not enforced beyond framing. Absent for ARC.
    pub version: Option<String>,
}

impl ArchiveRecord {
    /// 8-digit crawl date (`yyyyMMdd`) prefix of the timestamp.
    pub fn crawl_date(&self) -> &str {
        &self.timestamp[..8]
    }

    /// Split the payload into HTTP status/headers/body. Total: payloads
    /// without an HTTP envelope come back with absent status and the whole
    /// payload as body.
    pub fn http(&self) -> HttpPayload<'_> {
        split_http(&self.payload)
    }
}

/// Scan counters, shared by every reader layer of a source. Monotonically
/// non-decreasing while a scan runs; safe to observe concurrently.
#[derive(Debug, Default)]
pub struct SourceStats {
    records_read: AtomicU64,
    records_skipped: AtomicU64,
    bytes_read: AtomicU64,
    files_skipped: AtomicU64,
    gzip_members_skipped: AtomicU64,
}

impl SourceStats {
    pub(crate) fn add_read(&self) {
        self.records_read.fetch_add(1, Ordering::Relaxed);
    }
    pub(crate) fn add_skipped(&self) {
        self.records_skipped.fetch_add(1, Ordering::Relaxed);
    }
    pub(crate) fn add_bytes(&self, n: u64) {
        self.bytes_read.fetch_add(n, Ordering::Relaxed);
    }
    pub(crate) fn add_file_skipped(&self) {
        self.files_skipped.fetch_add(1, Ordering::Relaxed);
    }
    pub(crate) fn add_gzip_member_skipped(&self) {
        self.gzip_members_skipped.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> StatsSnapshot {
        StatsSnapshot {
            records_read: self.records_read.load(Ordering::Relaxed),
            records_skipped: self.records_skipped.load(Ordering::Relaxed),
            bytes_read: self.bytes_read.load(Ordering::Relaxed),
            files_skipped: self.files_skipped.load(Ordering::Relaxed),
            gzip_members_skipped: self.gzip_members_skipped.load(Ordering::Relaxed),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StatsSnapshot {
    pub records_read: u64,
    pub records_skipped: u64,
    pub bytes_read: u64,
    pub files_skipped: u64,
    pub gzip_members_skipped: u64,
}

impl StatsSnapshot {
    /// Anything at all went sideways during the scan.
    pub fn any_skips(&self) -> bool {
        self.records_skipped > 0 || self.files_skipped > 0 || self.gzip_members_skipped > 0
    }
}

/// Convert an ISO 8601 / RFC 3339 instant ("2014-09-01T12:00:00Z") to the
/// 14-digit form. Fractional seconds are accepted and dropped.
pub(crate) fn iso_to_timestamp14(value: &str) -> Option<String> {
    let dt = chrono::DateTime::parse_from_rfc3339(value.trim()).ok()?;
    Some(dt.to_utc().format("%Y%m%d%H%M%S").to_string())
}

/// A 14-digit all-numeric string that decodes as a real UTC instant.
pub(crate) fn valid_timestamp14(value: &str) -> bool {
    if value.len() != 14 || !value.bytes().all(|b| b.is_ascii_digit()) {
        return false;
    }
    chrono::NaiveDateTime::parse_from_str(value, "%Y%m%d%H%M%S").is_ok()
}
