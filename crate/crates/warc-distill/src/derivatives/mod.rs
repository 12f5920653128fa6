//! The three standard derivative products and their download formats.
//!
//! Every product is an exact filter/extract/aggregate over the collection,
//! re-runnable to byte-identical files: domain distribution (page counts per
//! domain), domain webgraph (thresholded domain-to-domain edge counts), and
//! plain text (one row per valid page).

mod filesink;

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::archive::ArchiveSource;
use crate::pipeline::{
    run_grouped, AggregateSpec, ExtractSpec, FilterSpec, PipelineError, Plan, Reducer, RunOptions,
    Stage, View,
};

pub(crate) use filesink::{write_csv_file, write_jsonl_file, AtomicFile};

/// Stream rows as RFC 4180 CSV (header first) to any writer; what the CLI
/// uses for stdout output.
pub fn write_csv_stream<W: std::io::Write, I>(
    w: &mut W,
    header: &[&str],
    rows: I,
) -> std::io::Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    filesink::write_csv_line(w, &header)?;
    for row in rows {
        filesink::write_csv_line(w, &row)?;
    }
    Ok(())
}

/// Default webgraph noise threshold: edges kept only with count strictly
/// greater than this.
pub const DEFAULT_EDGE_THRESHOLD: u64 = 5;

/// Page counts per domain, canonical (count desc, domain asc) order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DomainDistribution {
    pub rows: Vec<(String, u64)>,
}

impl DomainDistribution {
    /// The chart slice: first `min(10, n)` rows.
    pub fn top(&self, k: usize) -> &[(String, u64)] {
        &self.rows[..self.rows.len().min(k)]
    }

    pub fn total_pages(&self) -> u64 {
        self.rows.iter().map(|(_, c)| c).sum()
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), PipelineError> {
        write_csv_file(
            path,
            &["domain", "count"],
            self.rows
                .iter()
                .map(|(d, c)| vec![d.clone(), c.to_string()]),
        )?;
        Ok(())
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<(), PipelineError> {
        #[derive(Serialize)]
        struct Row<'a> {
            domain: &'a str,
            count: u64,
        }
        write_jsonl_file(
            path,
            self.rows.iter().map(|(d, c)| Row {
                domain: d,
                count: *c,
            }),
        )?;
        Ok(())
    }
}

/// Domain-to-domain edge counts above a threshold. Both endpoints are
/// non-empty domains; parallel edges cannot occur.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DomainWebgraphEdges {
    pub rows: Vec<(String, String, u64)>,
    pub threshold_used: u64,
}

impl DomainWebgraphEdges {
    pub fn total_links(&self) -> u64 {
        self.rows.iter().map(|(_, _, c)| c).sum()
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), PipelineError> {
        write_csv_file(
            path,
            &["src_domain", "dest_domain", "count"],
            self.rows
                .iter()
                .map(|(s, d, c)| vec![s.clone(), d.clone(), c.to_string()]),
        )?;
        Ok(())
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<(), PipelineError> {
        #[derive(Serialize)]
        struct Row<'a> {
            src_domain: &'a str,
            dest_domain: &'a str,
            count: u64,
        }
        write_jsonl_file(
            path,
            self.rows.iter().map(|(s, d, c)| Row {
                src_domain: s,
                dest_domain: d,
                count: *c,
            }),
        )?;
        Ok(())
    }
}

/// One plain-text row per valid page, in collection order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlainTextRow {
    /// 8-digit crawl date.
    pub crawl_date: String,
    pub domain: String,
    pub url: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PlainTextRows {
    pub rows: Vec<PlainTextRow>,
}

impl PlainTextRows {
    pub fn write_csv(&self, path: &Path) -> Result<(), PipelineError> {
        write_csv_file(
            path,
            &["crawl_date", "domain", "url", "text"],
            self.rows.iter().map(|r| {
                vec![
                    r.crawl_date.clone(),
                    r.domain.clone(),
                    r.url.clone(),
                    r.text.clone(),
                ]
            }),
        )?;
        Ok(())
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<(), PipelineError> {
        write_jsonl_file(path, self.rows.iter())?;
        Ok(())
    }
}

/// Count valid pages per domain.
pub fn derive_domain_distribution(
    source: &ArchiveSource,
    opts: &RunOptions,
) -> Result<DomainDistribution, PipelineError> {
    let plan = Plan {
        view: View::Pages,
        stages: vec![
            Stage::Extract(ExtractSpec::Domain),
            Stage::Aggregate(AggregateSpec {
                key: vec![0],
                reducer: Reducer::Count,
                exemplar: None,
                value_name: None,
            }),
        ],
        sink: None,
    };
    let agg = run_grouped(&plan, source, opts)?;
    Ok(DomainDistribution {
        rows: agg
            .rows
            .into_iter()
            .map(|(mut key, value, _)| (key.swap_remove(0), value as u64))
            .collect(),
    })
}

/// The domain webgraph: hyperlinks mapped to (source domain, destination
/// domain), empty domains dropped, grouped and counted, then thresholded
/// (strictly greater than `min_exclusive`).
pub fn derive_domain_webgraph(
    source: &ArchiveSource,
    min_exclusive: u64,
    opts: &RunOptions,
) -> Result<DomainWebgraphEdges, PipelineError> {
    let plan = webgraph_plan(min_exclusive);
    let agg = run_grouped(&plan, source, opts)?;
    Ok(DomainWebgraphEdges {
        rows: agg
            .rows
            .into_iter()
            .map(|(mut key, value, _)| {
                let dest = key.swap_remove(1);
                let src = key.swap_remove(0);
                (src, dest, value as u64)
            })
            .collect(),
        threshold_used: min_exclusive,
    })
}

/// The plan behind the webgraph derivative, exposed for job logging.
pub fn webgraph_plan(min_exclusive: u64) -> Plan {
    Plan {
        view: View::Webgraph,
        stages: vec![
            Stage::Extract(ExtractSpec::DomainPair),
            Stage::Filter(FilterSpec::NonEmpty { cols: vec![0, 1] }),
            Stage::Aggregate(AggregateSpec {
                key: vec![0, 1],
                reducer: Reducer::Count,
                exemplar: None,
                value_name: None,
            }),
            Stage::Filter(FilterSpec::CountGreaterThan { min: min_exclusive }),
        ],
        sink: None,
    }
}

/// One plain-text row per valid page. Pages whose markup yields empty text
/// keep their row.
pub fn derive_plain_text(
    source: &ArchiveSource,
    opts: &RunOptions,
) -> Result<PlainTextRows, PipelineError> {
    let plan = Plan {
        view: View::Pages,
        stages: vec![Stage::Extract(ExtractSpec::PlainText)],
        sink: None,
    };
    let out = crate::pipeline::run(&plan, source, opts)?;
    Ok(PlainTextRows {
        rows: out
            .rows
            .into_iter()
            .map(|mut row| {
                let text = row.swap_remove(3);
                let url = row.swap_remove(2);
                let domain = row.swap_remove(1);
                let crawl_date = row.swap_remove(0);
                PlainTextRow {
                    crawl_date,
                    domain,
                    url,
                    text,
                }
            })
            .collect(),
    })
}

/// Download-format paths for a collection's products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivativePaths {
    pub fullurls_csv: PathBuf,
    pub links_csv: PathBuf,
    pub gephi_graphml: PathBuf,
    pub fulltext_csv: PathBuf,
    pub fulltext_jsonl: PathBuf,
}

impl DerivativePaths {
    pub fn new(out_dir: &Path, id: &str) -> DerivativePaths {
        DerivativePaths {
            fullurls_csv: out_dir.join(format!("{id}-fullurls.csv")),
            links_csv: out_dir.join(format!("{id}-links.csv")),
            gephi_graphml: out_dir.join(format!("{id}-gephi.graphml")),
            fulltext_csv: out_dir.join(format!("{id}-fulltext.csv")),
            fulltext_jsonl: out_dir.join(format!("{id}-fulltext.jsonl")),
        }
    }

    pub fn all(&self) -> [&Path; 5] {
        [
            &self.fullurls_csv,
            &self.links_csv,
            &self.gephi_graphml,
            &self.fulltext_csv,
            &self.fulltext_jsonl,
        ]
    }
}

/// Row counts from a full derivative run.
#[derive(Debug, Clone, Copy, Default, Serialize, serde::Deserialize, PartialEq, Eq)]
pub struct DeriveCounts {
    pub domains: u64,
    pub pages: u64,
    pub edges: u64,
    pub text_rows: u64,
}

/// Produce all five files for a collection: domain distribution, webgraph
/// edges + GraphML, and plain text as CSV and JSONL.
pub fn derive_all(
    source: &ArchiveSource,
    id: &str,
    out_dir: &Path,
    min_exclusive: u64,
    opts: &RunOptions,
) -> Result<DeriveCounts, PipelineError> {
    let paths = DerivativePaths::new(out_dir, id);

    let dist = derive_domain_distribution(source, opts)?;
    dist.write_csv(&paths.fullurls_csv)?;

    let edges = derive_domain_webgraph(source, min_exclusive, opts)?;
    edges.write_csv(&paths.links_csv)?;
    let mut graph = crate::graph::DomainGraph::from_edges(&edges);
    graph.compute_pagerank(&crate::graph::PagerankOptions::default());
    graph.write_graphml(&paths.gephi_graphml)?;

    let text = derive_plain_text(source, opts)?;
    text.write_csv(&paths.fulltext_csv)?;
    text.write_jsonl(&paths.fulltext_jsonl)?;

    Ok(DeriveCounts {
        domains: dist.rows.len() as u64,
        pages: dist.total_pages(),
        edges: edges.rows.len() as u64,
        text_rows: text.rows.len() as u64,
    })
}
