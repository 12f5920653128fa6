//! The filter/extract/aggregate engine: record views, composable declarative
//! plans, and a deterministic parallel runner. Output is byte-identical for
//! any worker count — rows canonicalize to (file, record, emit) order and
//! grouped counts to (count desc, key asc).

mod engine;
mod plan;

pub use engine::{run, Materialized, RunOptions};
pub use plan::{
    AggregateSpec, ExtractSpec, FilterSpec, Plan, Reducer, SinkFormat, SinkSpec, Stage, View,
};

pub(crate) use engine::run_grouped;

use crate::archive::{ArchiveError, ArchiveRecord, ArchiveSource, RecordKind};
use crate::extract::{
    detect_mime, extract_domain, extract_links, extract_text_with_charset, is_valid_page,
    MimeClass,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error("aggregation exceeded the in-memory row cap of {cap} groups")]
    AggregateTooLarge { cap: usize },
    #[error("worker thread panicked")]
    WorkerPanic,
    #[error("sink write failed: {0}")]
    Sink(#[from] std::io::Error),
}

/// A valid HTML page: the keepValidPages output enriched with its domain and
/// classified MIME type. `body` is the HTTP payload body (the HTML bytes).
#[derive(Debug, Clone)]
pub struct PageRecord {
    /// 14-digit capture timestamp.
    pub crawl_ts: String,
    pub url: String,
    /// `extract_domain(url)`, never empty.
    pub domain: String,
    pub mime: MimeClass,
    /// HTTP status; absent only for ARC entries without an HTTP envelope.
    pub status: Option<u16>,
    /// Declared charset from the HTTP header, if any.
    pub charset: Option<String>,
    pub body: Vec<u8>,
}

impl PageRecord {
    pub fn crawl_date(&self) -> &str {
        &self.crawl_ts[..8]
    }

    /// Plain text of the page body, honoring the declared charset.
    pub fn text(&self) -> String {
        extract_text_with_charset(&self.body, self.charset.as_deref())
    }
}

/// One hyperlink row of the webgraph view: crawl date, source URL,
/// destination URL, anchor text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkRecord {
    /// 8-digit crawl date, the prefix of the owning page's timestamp.
    pub crawl_date: String,
    pub src: String,
    pub dest: String,
    pub anchor: String,
}

/// Build a page from a raw record, applying the valid-page filter. Pages
/// whose target URI has no extractable domain are dropped: every page view
/// row aggregates by domain.
pub(crate) fn page_from_record(rec: ArchiveRecord) -> Option<PageRecord> {
    if !matches!(rec.kind, RecordKind::Response | RecordKind::ArcEntry) {
        return None;
    }
    let http = rec.http();
    if !is_valid_page(&rec, &http) {
        return None;
    }
    let url = rec.target_uri.clone()?;
    let domain = extract_domain(&url);
    if domain.is_empty() {
        return None;
    }
    let lead = &http.body[..http.body.len().min(512)];
    let mime = detect_mime(Some(&http), &url, lead);
    let status = http.status;
    let charset = http.charset();
    let body = http.body.to_vec();
    Some(PageRecord {
        crawl_ts: rec.timestamp,
        url,
        domain,
        mime,
        status,
        charset,
        body,
    })
}

pub(crate) fn links_from_page(page: &PageRecord) -> Vec<LinkRecord> {
    extract_links(&page.url, &page.body)
        .into_iter()
        .map(|l| LinkRecord {
            crawl_date: page.crawl_date().to_string(),
            src: l.src,
            dest: l.dest,
            anchor: l.anchor,
        })
        .collect()
}

/// Stream of valid pages, single-threaded. The parallel engine is
/// [`run`]; this is the library-level view for ad-hoc iteration.
pub fn pages_view(source: &ArchiveSource) -> impl Iterator<Item = PageRecord> + '_ {
    source.records().filter_map(page_from_record)
}

/// Stream of hyperlinks: one [`LinkRecord`] per anchor of every valid page.
pub fn webgraph_view(source: &ArchiveSource) -> impl Iterator<Item = LinkRecord> + '_ {
    pages_view(source).flat_map(|page| links_from_page(&page))
}

/// Grouped counts in canonical order: count descending, ties broken by key
/// ascending. The ordering makes every downstream product deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KeyedCounts {
    pub rows: Vec<(Vec<String>, u64)>,
}

impl KeyedCounts {
    pub(crate) fn from_map(map: std::collections::HashMap<Vec<String>, u64>) -> KeyedCounts {
        let mut rows: Vec<(Vec<String>, u64)> = map.into_iter().collect();
        rows.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        KeyedCounts { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Exact grouped counts over anything that yields key tuples.
pub fn count_items<I>(keys: I) -> KeyedCounts
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut map = std::collections::HashMap::new();
    for key in keys {
        *map.entry(key).or_insert(0u64) += 1;
    }
    KeyedCounts::from_map(map)
}

/// Keep rows with count strictly greater than `min_exclusive`; ordering
/// preserved.
pub fn threshold(counts: KeyedCounts, min_exclusive: u64) -> KeyedCounts {
    KeyedCounts {
        rows: counts
            .rows
            .into_iter()
            .filter(|(_, c)| *c > min_exclusive)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(s: &str) -> Vec<String> {
        vec![s.to_string()]
    }

    #[test]
    fn count_items_basic() {
        let counts = count_items(vec![key("a"), key("b"), key("a")]);
        assert_eq!(counts.rows, vec![(key("a"), 2), (key("b"), 1)]);
    }

    #[test]
    fn count_items_empty() {
        assert!(count_items(Vec::<Vec<String>>::new()).is_empty());
    }

    #[test]
    fn canonical_ordering_breaks_ties_by_key() {
        let counts = count_items(vec![key("z"), key("m"), key("a"), key("m")]);
        assert_eq!(
            counts.rows,
            vec![(key("m"), 2), (key("a"), 1), (key("z"), 1)]
        );
    }

    #[test]
    fn threshold_is_strictly_greater() {
        let counts = KeyedCounts {
            rows: vec![(key("a"), 6), (key("b"), 5)],
        };
        let kept = threshold(counts, 5);
        assert_eq!(kept.rows, vec![(key("a"), 6)]);
    }

    #[test]
    fn threshold_zero_keeps_everything() {
        let counts = count_items(vec![key("a"), key("b")]);
        let before = counts.clone();
        assert_eq!(threshold(counts, 0), before);
    }
}
