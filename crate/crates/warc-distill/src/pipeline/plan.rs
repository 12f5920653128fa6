use serde::{Deserialize, Serialize};

use super::PipelineError;

/// Which table of the collection a plan reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    /// Valid HTML pages (the keepValidPages output).
    Pages,
    /// One row per hyperlink: crawl date, source URL, destination URL, anchor.
    Webgraph,
    /// Every parsed record, HTTP split applied.
    Raw,
}

/// A declarative pipeline: filters and extractions in any order and number,
/// at most one aggregation, optional post-aggregation filters. Serializes to
/// JSON for job logging and replay.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Plan {
    pub view: View,
    #[serde(default)]
    pub stages: Vec<Stage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink: Option<SinkSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Filter(FilterSpec),
    Extract(ExtractSpec),
    Aggregate(AggregateSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FilterSpec {
    /// Regex match over the record/page URL (link source URL on the
    /// webgraph view).
    UrlMatches { pattern: String },
    /// Exact domain of the page / record target (links: source domain).
    DomainIs { domain: String },
    /// Links only: exact destination domain.
    DestDomainIs { domain: String },
    /// Links only: exact destination URL.
    DestUrlIs { url: String },
    /// Inclusive timestamp range; bounds are 8- or 14-digit strings.
    DateRange {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        from: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        to: Option<String>,
    },
    /// Exact HTTP status.
    StatusIs { status: u16 },
    /// Media type match: exact ("text/html") or type wildcard ("image/*").
    MimeMatches { pattern: String },
    /// Rows only: listed columns must be non-empty.
    NonEmpty { cols: Vec<usize> },
    /// After aggregation: keep rows whose value is strictly greater.
    CountGreaterThan { min: u64 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExtractSpec {
    /// Pages -> hyperlinks (what the webgraph view does internally).
    Links,
    /// Page/record -> [url].
    Url,
    /// Page/record -> [domain].
    Domain,
    /// Link -> [src_domain, dest_domain].
    DomainPair,
    /// Link -> [crawl_date, src, dest, anchor].
    LinkRow,
    /// Link -> [crawl_date, src, anchor].
    AnchorRow,
    /// Page -> [crawl_date, domain, url, text].
    PlainText,
    /// Page -> one [keyword, count] row per keyword with count > 0.
    KeywordHits { keywords: Vec<String> },
    /// Record -> [checksum, url] over the HTTP body.
    PayloadChecksum,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AggregateSpec {
    /// Key column indices into the incoming rows.
    pub key: Vec<usize>,
    pub reducer: Reducer,
    /// Column whose minimum value is carried along per group (one exemplar
    /// URL for checksum groups).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exemplar: Option<usize>,
    /// Output name for the value column; defaults to the reducer name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_name: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Reducer {
    Count,
    Sum { col: usize },
    Min { col: usize },
    Max { col: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SinkSpec {
    pub format: SinkFormat,
    /// Absent means standard output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SinkFormat {
    Csv,
    Jsonl,
}

/// The item shape flowing between stages, tracked statically during
/// validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ItemKind {
    Page,
    Link,
    Record,
    Row(usize),
    Counts,
}

impl ExtractSpec {
    /// (input kinds accepted, output kind)
    pub(crate) fn typing(&self, input: ItemKind) -> Option<ItemKind> {
        use ExtractSpec::*;
        use ItemKind::*;
        match (self, input) {
            (Links, Page) => Some(Link),
            (Url, Page | Record) => Some(Row(1)),
            (Domain, Page | Record) => Some(Row(1)),
            (DomainPair, Link) => Some(Row(2)),
            (LinkRow, Link) => Some(Row(4)),
            (AnchorRow, Link) => Some(Row(3)),
            (PlainText, Page) => Some(Row(4)),
            (KeywordHits { .. }, Page) => Some(Row(2)),
            (PayloadChecksum, Record | Page) => Some(Row(2)),
            _ => None,
        }
    }

    pub(crate) fn header(&self) -> Vec<String> {
        let names: &[&str] = match self {
            ExtractSpec::Links => &["crawl_date", "src", "dest", "anchor"],
            ExtractSpec::Url => &["url"],
            ExtractSpec::Domain => &["domain"],
            ExtractSpec::DomainPair => &["src_domain", "dest_domain"],
            ExtractSpec::LinkRow => &["crawl_date", "src", "dest", "anchor"],
            ExtractSpec::AnchorRow => &["crawl_date", "src", "anchor"],
            ExtractSpec::PlainText => &["crawl_date", "domain", "url", "text"],
            ExtractSpec::KeywordHits { .. } => &["keyword", "count"],
            ExtractSpec::PayloadChecksum => &["checksum", "url"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }
}

impl FilterSpec {
    pub(crate) fn applies_to(&self, kind: ItemKind) -> bool {
        use FilterSpec::*;
        use ItemKind::*;
        match self {
            UrlMatches { .. } | DomainIs { .. } | DateRange { .. } => {
                matches!(kind, Page | Link | Record)
            }
            DestDomainIs { .. } | DestUrlIs { .. } => matches!(kind, Link),
            StatusIs { .. } => matches!(kind, Page | Record),
            MimeMatches { .. } => matches!(kind, Page | Record),
            NonEmpty { .. } => matches!(kind, Row(_)),
            CountGreaterThan { .. } => matches!(kind, Counts),
        }
    }
}

/// Default row projections when a plan ends (or aggregates) without an
/// explicit row-shaping extraction.
pub(crate) fn default_header(kind: ItemKind) -> Vec<String> {
    let names: &[&str] = match kind {
        ItemKind::Page => &["crawl_ts", "url", "domain", "mime", "status"],
        ItemKind::Link => &["crawl_date", "src", "dest", "anchor"],
        ItemKind::Record => &["timestamp", "kind", "target_uri", "media_type", "content_length"],
        ItemKind::Row(_) | ItemKind::Counts => &[],
        // Row headers come from the extract that produced them
    };
    names.iter().map(|s| s.to_string()).collect()
}

pub(crate) fn default_width(kind: ItemKind) -> usize {
    match kind {
        ItemKind::Page => 5,
        ItemKind::Link => 4,
        ItemKind::Record => 5,
        ItemKind::Row(n) => n,
        ItemKind::Counts => 0,
    }
}

/// The validated, compiled form of a plan: pre-aggregation stages, the
/// optional aggregation, post-aggregation count filters, and the output
/// header.
pub(crate) struct CompiledPlan {
    pub view: View,
    pub pre: Vec<CompiledStage>,
    pub aggregate: Option<AggregateSpec>,
    pub post_min: Option<u64>,
    pub header: Vec<String>,
}

pub(crate) enum CompiledStage {
    Filter(CompiledFilter),
    Extract(ExtractSpec),
}

pub(crate) enum CompiledFilter {
    UrlMatches(regex::Regex),
    DomainIs(String),
    DestDomainIs(String),
    DestUrlIs(String),
    DateRange { from14: String, to14: String },
    StatusIs(u16),
    MimeExact(String),
    MimePrefix(String),
    NonEmpty(Vec<usize>),
}

fn pad_date(bound: &str, fill: &str) -> Result<String, PipelineError> {
    let b = bound.trim();
    if b.is_empty() || b.len() > 14 || !b.bytes().all(|c| c.is_ascii_digit()) {
        return Err(PipelineError::InvalidPlan(format!(
            "date bound must be 1-14 digits, got {b:?}"
        )));
    }
    Ok(format!("{}{}", b, &fill[b.len()..]))
}

impl Plan {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plan serializes")
    }

    pub fn from_json(s: &str) -> Result<Plan, PipelineError> {
        serde_json::from_str(s).map_err(|e| PipelineError::InvalidPlan(e.to_string()))
    }

    /// Type-check the stage chain and compile parameters. Per the engine's
    /// contract, every parameter error surfaces here, before any record is
    /// read.
    pub(crate) fn compile(&self) -> Result<CompiledPlan, PipelineError> {
        let mut kind = match self.view {
            View::Pages => ItemKind::Page,
            View::Webgraph => ItemKind::Link,
            View::Raw => ItemKind::Record,
        };
        let mut header = default_header(kind);
        let mut pre: Vec<CompiledStage> = Vec::new();
        let mut aggregate: Option<AggregateSpec> = None;
        let mut post_min: Option<u64> = None;

        for (i, stage) in self.stages.iter().enumerate() {
            let err = |msg: String| PipelineError::InvalidPlan(format!("stage {i}: {msg}"));
            match stage {
                Stage::Filter(f) => {
                    if aggregate.is_some() {
                        match f {
                            FilterSpec::CountGreaterThan { min } => {
                                post_min = Some(post_min.map_or(*min, |m: u64| m.max(*min)));
                                continue;
                            }
                            _ => {
                                return Err(err(
                                    "only count-greater-than filters may follow an aggregation"
                                        .to_string(),
                                ))
                            }
                        }
                    }
                    if !f.applies_to(kind) {
                        return Err(err(format!("filter {f:?} does not apply to {kind:?} items")));
                    }
                    if let (FilterSpec::NonEmpty { cols }, ItemKind::Row(w)) = (f, kind) {
                        if let Some(&c) = cols.iter().find(|&&c| c >= w) {
                            return Err(err(format!("column {c} out of range (width {w})")));
                        }
                    }
                    pre.push(CompiledStage::Filter(compile_filter(f).map_err(err)?));
                }
                Stage::Extract(e) => {
                    if aggregate.is_some() {
                        return Err(err("extraction cannot follow an aggregation".to_string()));
                    }
                    if let ExtractSpec::KeywordHits { keywords } = e {
                        if keywords.is_empty() {
                            return Err(err("keyword list must not be empty".to_string()));
                        }
                        if keywords.iter().any(|k| k.trim().is_empty()) {
                            return Err(err("keywords must not be empty".to_string()));
                        }
                    }
                    match e.typing(kind) {
                        Some(out) => {
                            kind = out;
                            header = e.header();
                            pre.push(CompiledStage::Extract(e.clone()));
                        }
                        None => {
                            return Err(err(format!(
                                "extraction {e:?} does not apply to {kind:?} items"
                            )))
                        }
                    }
                }
                Stage::Aggregate(a) => {
                    if aggregate.is_some() {
                        return Err(err("at most one aggregation per plan".to_string()));
                    }
                    let width = default_width(kind);
                    if a.key.is_empty() {
                        return Err(err("aggregation needs at least one key column".to_string()));
                    }
                    for &c in &a.key {
                        if c >= width {
                            return Err(err(format!("key column {c} out of range (width {width})")));
                        }
                    }
                    let value_cols: &[usize] = match &a.reducer {
                        Reducer::Count => &[],
                        Reducer::Sum { col } | Reducer::Min { col } | Reducer::Max { col } => {
                            std::slice::from_ref(col)
                        }
                    };
                    for &c in value_cols {
                        if c >= width {
                            return Err(err(format!(
                                "reducer column {c} out of range (width {width})"
                            )));
                        }
                    }
                    if let Some(c) = a.exemplar {
                        if c >= width {
                            return Err(err(format!(
                                "exemplar column {c} out of range (width {width})"
                            )));
                        }
                    }
                    // output header: key columns, value, optional exemplar
                    let in_header = header.clone();
                    let mut out_header: Vec<String> = a
                        .key
                        .iter()
                        .map(|&c| in_header.get(c).cloned().unwrap_or_else(|| format!("k{c}")))
                        .collect();
                    out_header.push(a.value_name.clone().unwrap_or_else(|| {
                        match a.reducer {
                            Reducer::Count => "count",
                            Reducer::Sum { .. } => "sum",
                            Reducer::Min { .. } => "min",
                            Reducer::Max { .. } => "max",
                        }
                        .to_string()
                    }));
                    if a.exemplar.is_some() {
                        out_header.push("example".to_string());
                    }
                    header = out_header;
                    aggregate = Some(a.clone());
                    kind = ItemKind::Counts;
                }
            }
        }

        Ok(CompiledPlan {
            view: self.view,
            pre,
            aggregate,
            post_min,
            header,
        })
    }
}

fn compile_filter(f: &FilterSpec) -> Result<CompiledFilter, String> {
    Ok(match f {
        FilterSpec::UrlMatches { pattern } => CompiledFilter::UrlMatches(
            regex::Regex::new(pattern).map_err(|e| format!("bad url pattern: {e}"))?,
        ),
        FilterSpec::DomainIs { domain } => CompiledFilter::DomainIs(domain.to_ascii_lowercase()),
        FilterSpec::DestDomainIs { domain } => {
            CompiledFilter::DestDomainIs(domain.to_ascii_lowercase())
        }
        FilterSpec::DestUrlIs { url } => CompiledFilter::DestUrlIs(url.clone()),
        FilterSpec::DateRange { from, to } => CompiledFilter::DateRange {
            from14: match from {
                Some(b) => pad_date(b, "00000000000000").map_err(|e| e.to_string())?,
                None => "00000000000000".to_string(),
            },
            to14: match to {
                Some(b) => pad_date(b, "99999999999999").map_err(|e| e.to_string())?,
                None => "99999999999999".to_string(),
            },
        },
        FilterSpec::StatusIs { status } => CompiledFilter::StatusIs(*status),
        FilterSpec::MimeMatches { pattern } => {
            let p = pattern.trim().to_ascii_lowercase();
            if let Some(prefix) = p.strip_suffix("/*") {
                CompiledFilter::MimePrefix(format!("{prefix}/"))
            } else if p.contains('/') && !p.is_empty() {
                CompiledFilter::MimeExact(p)
            } else {
                return Err(format!("bad mime pattern {pattern:?}"));
            }
        }
        FilterSpec::NonEmpty { cols } => CompiledFilter::NonEmpty(cols.clone()),
        FilterSpec::CountGreaterThan { .. } => {
            return Err("count-greater-than only applies after an aggregation".to_string())
        }
    })
}
