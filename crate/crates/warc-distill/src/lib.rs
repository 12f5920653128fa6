//! Streaming analytics for web-archive collections.
//!
//! The crate reads WARC and ARC container files (plain or gzipped, including
//! per-record gzip members), survives the malformed data that real crawls are
//! full of, and runs filter/extract/aggregate pipelines over the records in
//! parallel with deterministic output. On top of the pipeline sit the three
//! standard derivative products — domain distribution, domain webgraph, and
//! plain text — plus PageRank and GraphML export for the domain graph, and a
//! small collection registry that chains the derivative jobs with resume
//! support.
//!
//! ```no_run
//! use warc_distill::archive::{ArchiveSource, FormatHint};
//! use warc_distill::pipeline::{pages_view, RunOptions};
//! use warc_distill::derivatives::derive_domain_distribution;
//!
//! let source = ArchiveSource::open(vec!["crawl.warc.gz"], FormatHint::Auto)?;
//! let dist = derive_domain_distribution(&source, &RunOptions::default())?;
//! for (domain, count) in &dist.rows {
//!     println!("{domain}\t{count}");
//! }
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod archive;
pub mod derivatives;
pub mod extract;
pub mod graph;
pub mod pipeline;
pub mod registry;

pub use archive::{ArchiveRecord, ArchiveSource, FormatHint, HttpPayload, RecordKind};
