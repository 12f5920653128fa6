use std::collections::HashMap;

use crate::archive::{ArchiveRecord, ArchiveSource};
use crate::extract::{
    checksum_payload, detect_mime_ct, extract_domain, keyword_counts, MimeClass,
};

use super::plan::{CompiledFilter, CompiledPlan, CompiledStage, ExtractSpec, Reducer};
use super::{
    links_from_page, page_from_record, LinkRecord, PageRecord, PipelineError, Plan,
};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub workers: usize,
    /// Upper bound on in-memory aggregation groups per worker; exceeding it
    /// aborts with an error rather than degrading silently.
    pub agg_group_cap: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            agg_group_cap: 10_000_000,
        }
    }
}

impl RunOptions {
    pub fn with_workers(workers: usize) -> Self {
        RunOptions {
            workers,
            ..Default::default()
        }
    }
}

/// Tabular output of a plan run: a header plus rows of strings, already in
/// canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Materialized {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Aggregated output before stringification: (key, value, optional
/// exemplar), sorted value-descending then key-ascending.
#[derive(Debug, Clone, Default)]
pub(crate) struct AggRows {
    pub rows: Vec<(Vec<String>, i64, Option<String>)>,
}

/// A record of the raw view with its HTTP split precomputed.
struct RawItem {
    rec: ArchiveRecord,
    status: Option<u16>,
    mime: MimeClass,
    body_start: usize,
}

impl RawItem {
    fn new(rec: ArchiveRecord) -> RawItem {
        let http = rec.http();
        let url = rec.target_uri.clone().unwrap_or_default();
        let lead = &http.body[..http.body.len().min(512)];
        let mime = detect_mime_ct(http.content_type.as_deref(), &url, lead);
        let status = http.status;
        let body_start = rec.payload.len() - http.body.len();
        RawItem {
            rec,
            status,
            mime,
            body_start,
        }
    }

    fn body(&self) -> &[u8] {
        &self.rec.payload[self.body_start..]
    }

    fn url(&self) -> &str {
        self.rec.target_uri.as_deref().unwrap_or("")
    }
}

enum Item {
    Page(PageRecord),
    Link(LinkRecord),
    Record(Box<RawItem>),
    Row(Vec<String>),
}

fn filter_matches(f: &CompiledFilter, item: &Item) -> bool {
    match (f, item) {
        (CompiledFilter::UrlMatches(re), Item::Page(p)) => re.is_match(&p.url),
        (CompiledFilter::UrlMatches(re), Item::Link(l)) => re.is_match(&l.src),
        (CompiledFilter::UrlMatches(re), Item::Record(r)) => re.is_match(r.url()),

        (CompiledFilter::DomainIs(d), Item::Page(p)) => p.domain == *d,
        (CompiledFilter::DomainIs(d), Item::Link(l)) => extract_domain(&l.src) == *d,
        (CompiledFilter::DomainIs(d), Item::Record(r)) => extract_domain(r.url()) == *d,

        (CompiledFilter::DestDomainIs(d), Item::Link(l)) => extract_domain(&l.dest) == *d,
        (CompiledFilter::DestUrlIs(u), Item::Link(l)) => l.dest == *u,

        (CompiledFilter::DateRange { from14, to14 }, item) => {
            let ts = match item {
                Item::Page(p) => p.crawl_ts.clone(),
                Item::Link(l) => format!("{}000000", l.crawl_date),
                Item::Record(r) => r.rec.timestamp.clone(),
                Item::Row(_) => return false,
            };
            ts.as_str() >= from14.as_str() && ts.as_str() <= to14.as_str()
        }

        (CompiledFilter::StatusIs(s), Item::Page(p)) => p.status == Some(*s),
        (CompiledFilter::StatusIs(s), Item::Record(r)) => r.status == Some(*s),

        (CompiledFilter::MimeExact(m), Item::Page(p)) => p.mime.media_type == *m,
        (CompiledFilter::MimeExact(m), Item::Record(r)) => r.mime.media_type == *m,
        (CompiledFilter::MimePrefix(m), Item::Page(p)) => p.mime.media_type.starts_with(m),
        (CompiledFilter::MimePrefix(m), Item::Record(r)) => r.mime.media_type.starts_with(m),

        (CompiledFilter::NonEmpty(cols), Item::Row(row)) => {
            cols.iter().all(|&c| !row[c].is_empty())
        }

        _ => false,
    }
}

fn apply_extract(e: &ExtractSpec, item: Item) -> Vec<Item> {
    match (e, item) {
        (ExtractSpec::Links, Item::Page(p)) => links_from_page(&p)
            .into_iter()
            .map(Item::Link)
            .collect(),
        (ExtractSpec::Url, Item::Page(p)) => vec![Item::Row(vec![p.url])],
        (ExtractSpec::Url, Item::Record(r)) => match &r.rec.target_uri {
            Some(u) => vec![Item::Row(vec![u.clone()])],
            None => Vec::new(),
        },
        (ExtractSpec::Domain, Item::Page(p)) => vec![Item::Row(vec![p.domain])],
        (ExtractSpec::Domain, Item::Record(r)) => {
            vec![Item::Row(vec![extract_domain(r.url())])]
        }
        (ExtractSpec::DomainPair, Item::Link(l)) => vec![Item::Row(vec![
            extract_domain(&l.src),
            extract_domain(&l.dest),
        ])],
        (ExtractSpec::LinkRow, Item::Link(l)) => {
            vec![Item::Row(vec![l.crawl_date, l.src, l.dest, l.anchor])]
        }
        (ExtractSpec::AnchorRow, Item::Link(l)) => {
            vec![Item::Row(vec![l.crawl_date, l.src, l.anchor])]
        }
        (ExtractSpec::PlainText, Item::Page(p)) => {
            let text = p.text();
            vec![Item::Row(vec![
                p.crawl_date().to_string(),
                p.domain,
                p.url,
                text,
            ])]
        }
        (ExtractSpec::KeywordHits { keywords }, Item::Page(p)) => {
            match keyword_counts(&p.text(), keywords) {
                Ok(counts) => counts
                    .into_iter()
                    .filter(|(_, c)| *c > 0)
                    .map(|(k, c)| Item::Row(vec![k, c.to_string()]))
                    .collect(),
                Err(_) => Vec::new(), // parameters validated at compile time
            }
        }
        (ExtractSpec::PayloadChecksum, Item::Record(r)) => vec![Item::Row(vec![
            checksum_payload(r.body()),
            r.url().to_string(),
        ])],
        (ExtractSpec::PayloadChecksum, Item::Page(p)) => {
            let sum = checksum_payload(&p.body);
            vec![Item::Row(vec![sum, p.url])]
        }
        _ => Vec::new(), // unreachable for validated plans
    }
}

fn finalize_row(item: Item) -> Vec<String> {
    match item {
        Item::Row(row) => row,
        Item::Page(p) => vec![
            p.crawl_ts.clone(),
            p.url,
            p.domain,
            p.mime.media_type,
            p.status.map(|s| s.to_string()).unwrap_or_default(),
        ],
        Item::Link(l) => vec![l.crawl_date, l.src, l.dest, l.anchor],
        Item::Record(r) => vec![
            r.rec.timestamp.clone(),
            r.rec.kind.as_str().to_string(),
            r.rec.target_uri.clone().unwrap_or_default(),
            r.mime.media_type.clone(),
            r.rec.content_length.to_string(),
        ],
    }
}

fn process(item: Item, stages: &[CompiledStage], out: &mut dyn FnMut(Vec<String>)) {
    match stages.first() {
        None => out(finalize_row(item)),
        Some(CompiledStage::Filter(f)) => {
            if filter_matches(f, &item) {
                process(item, &stages[1..], out);
            }
        }
        Some(CompiledStage::Extract(e)) => {
            for next in apply_extract(e, item) {
                process(next, &stages[1..], out);
            }
        }
    }
}

#[derive(Clone, Copy, Default, PartialEq)]
struct Acc {
    value: i64,
    seen: bool,
}

struct AggMap {
    groups: HashMap<Vec<String>, (Acc, Option<String>)>,
    reducer: Reducer,
    key_cols: Vec<usize>,
    exemplar_col: Option<usize>,
    cap: usize,
}

impl AggMap {
    fn new(spec: &super::plan::AggregateSpec, cap: usize) -> AggMap {
        AggMap {
            groups: HashMap::new(),
            reducer: spec.reducer,
            key_cols: spec.key.clone(),
            exemplar_col: spec.exemplar,
            cap,
        }
    }

    fn add_row(&mut self, row: &[String]) -> Result<(), PipelineError> {
        let key: Vec<String> = self.key_cols.iter().map(|&c| row[c].clone()).collect();
        let value = match self.reducer {
            Reducer::Count => 1,
            Reducer::Sum { col } | Reducer::Min { col } | Reducer::Max { col } => {
                row[col].parse::<i64>().unwrap_or(0)
            }
        };
        let exemplar = self.exemplar_col.map(|c| row[c].clone());
        self.combine(key, value, exemplar)
    }

    fn combine(
        &mut self,
        key: Vec<String>,
        value: i64,
        exemplar: Option<String>,
    ) -> Result<(), PipelineError> {
        let entry = self.groups.entry(key).or_insert((Acc::default(), None));
        let acc = &mut entry.0;
        if !acc.seen {
            acc.value = value;
            acc.seen = true;
        } else {
            acc.value = match self.reducer {
                Reducer::Count | Reducer::Sum { .. } => acc.value + value,
                Reducer::Min { .. } => acc.value.min(value),
                Reducer::Max { .. } => acc.value.max(value),
            };
        }
        if let Some(ex) = exemplar {
            match &mut entry.1 {
                Some(cur) => {
                    if ex < *cur {
                        *cur = ex;
                    }
                }
                none => *none = Some(ex),
            }
        }
        if self.groups.len() > self.cap {
            return Err(PipelineError::AggregateTooLarge { cap: self.cap });
        }
        Ok(())
    }

    fn merge(&mut self, other: AggMap) -> Result<(), PipelineError> {
        for (key, (acc, exemplar)) in other.groups {
            self.combine(key, acc.value, exemplar)?;
        }
        Ok(())
    }

    fn into_sorted(self) -> AggRows {
        let mut rows: Vec<(Vec<String>, i64, Option<String>)> = self
            .groups
            .into_iter()
            .map(|(k, (acc, ex))| (k, acc.value, ex))
            .collect();
        rows.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        AggRows { rows }
    }
}

type OrderKey = (u32, u64, u32);

enum WorkerOut {
    Rows(Vec<(OrderKey, Vec<String>)>),
    Agg(AggMap),
}

fn worker(
    worker_idx: usize,
    stride: usize,
    source: &ArchiveSource,
    compiled: &CompiledPlan,
    opts: &RunOptions,
) -> Result<WorkerOut, PipelineError> {
    let mut rows: Vec<(OrderKey, Vec<String>)> = Vec::new();
    let mut agg = compiled
        .aggregate
        .as_ref()
        .map(|a| AggMap::new(a, opts.agg_group_cap));

    for file_idx in (worker_idx..source.paths().len()).step_by(stride) {
        for (rec_idx, rec) in source.file_records(file_idx).enumerate() {
            let initial: Vec<Item> = match compiled.view {
                super::View::Pages => page_from_record(rec).map(Item::Page).into_iter().collect(),
                super::View::Webgraph => match page_from_record(rec) {
                    Some(page) => links_from_page(&page).into_iter().map(Item::Link).collect(),
                    None => Vec::new(),
                },
                super::View::Raw => vec![Item::Record(Box::new(RawItem::new(rec)))],
            };
            let mut seq: u32 = 0;
            let mut failure: Option<PipelineError> = None;
            for item in initial {
                let agg_ref = &mut agg;
                let failure_ref = &mut failure;
                let rows_ref = &mut rows;
                let mut emit = |row: Vec<String>| {
                    if failure_ref.is_some() {
                        return;
                    }
                    match agg_ref {
                        Some(map) => {
                            if let Err(e) = map.add_row(&row) {
                                *failure_ref = Some(e);
                            }
                        }
                        None => {
                            rows_ref.push(((file_idx as u32, rec_idx as u64, seq), row));
                            seq += 1;
                        }
                    }
                };
                process(item, &compiled.pre, &mut emit);
            }
            if let Some(e) = failure {
                return Err(e);
            }
        }
    }

    Ok(match agg {
        Some(map) => WorkerOut::Agg(map),
        None => WorkerOut::Rows(rows),
    })
}

fn execute(
    compiled: &CompiledPlan,
    source: &ArchiveSource,
    opts: &RunOptions,
) -> Result<WorkerOut, PipelineError> {
    let n_files = source.paths().len();
    let workers = opts.workers.clamp(1, n_files.max(1));

    if workers == 1 {
        return worker(0, 1, source, compiled, opts);
    }

    let outputs: Vec<Result<WorkerOut, PipelineError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| scope.spawn(move || worker(w, workers, source, compiled, opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or(Err(PipelineError::WorkerPanic)))
            .collect()
    });

    let mut merged_rows: Vec<(OrderKey, Vec<String>)> = Vec::new();
    let mut merged_agg: Option<AggMap> = None;
    for out in outputs {
        match out? {
            WorkerOut::Rows(mut r) => merged_rows.append(&mut r),
            WorkerOut::Agg(map) => match &mut merged_agg {
                Some(m) => m.merge(map)?,
                none => *none = Some(map),
            },
        }
    }
    Ok(match merged_agg {
        Some(map) => WorkerOut::Agg(map),
        None => WorkerOut::Rows(merged_rows),
    })
}

/// Run a plan over a source with `opts.workers` parallel file shards.
/// Equal inputs produce byte-identical output for every worker count.
pub fn run(
    plan: &Plan,
    source: &ArchiveSource,
    opts: &RunOptions,
) -> Result<Materialized, PipelineError> {
    let compiled = plan.compile()?;
    let out = execute(&compiled, source, opts)?;
    Ok(match out {
        WorkerOut::Rows(mut rows) => {
            rows.sort_unstable_by(|a, b| a.0.cmp(&b.0));
            Materialized {
                header: compiled.header.clone(),
                rows: rows.into_iter().map(|(_, r)| r).collect(),
            }
        }
        WorkerOut::Agg(map) => {
            let agg = map.into_sorted();
            let min = compiled.post_min;
            let rows = agg
                .rows
                .into_iter()
                .filter(|(_, v, _)| min.map_or(true, |m| *v > m as i64))
                .map(|(mut key, value, exemplar)| {
                    key.push(value.to_string());
                    if let Some(ex) = exemplar {
                        key.push(ex);
                    }
                    key
                })
                .collect();
            Materialized {
                header: compiled.header.clone(),
                rows,
            }
        }
    })
}

/// Aggregating run with typed (key, value, exemplar) output, for the
/// derivative builders. The plan must contain exactly one aggregation.
pub(crate) fn run_grouped(
    plan: &Plan,
    source: &ArchiveSource,
    opts: &RunOptions,
) -> Result<AggRows, PipelineError> {
    let compiled = plan.compile()?;
    debug_assert!(compiled.aggregate.is_some(), "run_grouped needs an aggregation");
    match execute(&compiled, source, opts)? {
        WorkerOut::Agg(map) => {
            let agg = map.into_sorted();
            let min = compiled.post_min;
            Ok(AggRows {
                rows: agg
                    .rows
                    .into_iter()
                    .filter(|(_, v, _)| min.map_or(true, |m| *v > m as i64))
                    .collect(),
            })
        }
        WorkerOut::Rows(_) => Err(PipelineError::InvalidPlan(
            "grouped run requires an aggregation stage".to_string(),
        )),
    }
}
