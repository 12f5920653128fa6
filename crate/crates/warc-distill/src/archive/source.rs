use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::gzip::MemberGzReader;
use super::scan::PushbackReader;
use super::{ArcParser, ArchiveError, ArchiveRecord, SourceStats, StatsSnapshot, WarcParser};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FormatHint {
    #[default]
    Auto,
    Warc,
    Arc,
}

/// A readable collection: an ordered list of archive files plus shared scan
/// counters. Iteration yields records file-by-file in path order. A source
/// is single-consumer; shards over disjoint file subsets (sharing the same
/// counters) may be scanned concurrently.
pub struct ArchiveSource {
    paths: Vec<PathBuf>,
    hint: FormatHint,
    max_record_size: u64,
    stats: Arc<SourceStats>,
}

impl ArchiveSource {
    /// Verifies every path up front: a missing file is a configuration
    /// error, not a skip.
    pub fn open<I, P>(paths: I, hint: FormatHint) -> Result<ArchiveSource, ArchiveError>
    where
        I: IntoIterator<Item = P>,
        P: Into<PathBuf>,
    {
        let paths: Vec<PathBuf> = paths.into_iter().map(Into::into).collect();
        if paths.is_empty() {
            return Err(ArchiveError::NoInputs);
        }
        for p in &paths {
            if !p.is_file() {
                return Err(ArchiveError::MissingFile(p.clone()));
            }
        }
        Ok(ArchiveSource {
            paths,
            hint,
            max_record_size: super::DEFAULT_MAX_RECORD_SIZE,
            stats: Arc::new(SourceStats::default()),
        })
    }

    pub fn with_max_record_size(mut self, bytes: u64) -> Self {
        self.max_record_size = bytes;
        self
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.paths
    }

    pub fn stats(&self) -> StatsSnapshot {
        self.stats.snapshot()
    }

    pub fn stats_handle(&self) -> Arc<SourceStats> {
        Arc::clone(&self.stats)
    }

    /// A source over a subset of this source's files (those with index
    /// `offset mod step`), sharing its counters. Used to partition work
    /// across scan threads.
    pub fn shard(&self, offset: usize, step: usize) -> ArchiveSource {
        ArchiveSource {
            paths: self
                .paths
                .iter()
                .skip(offset)
                .step_by(step.max(1))
                .cloned()
                .collect(),
            hint: self.hint,
            max_record_size: self.max_record_size,
            stats: Arc::clone(&self.stats),
        }
    }

    /// Iterate every record in every file.
    pub fn records(&self) -> RecordIter<'_> {
        RecordIter {
            source: self,
            next_file: 0,
            current: None,
        }
    }

    /// Iterate the records of one file (by index into `paths`).
    pub fn file_records(&self, file_idx: usize) -> FileRecords {
        FileRecords {
            parser: open_parser(
                &self.paths[file_idx],
                self.hint,
                Arc::clone(&self.stats),
                self.max_record_size,
            ),
            stats: Arc::clone(&self.stats),
            reported: 0,
        }
    }
}

enum Parser {
    Warc(WarcParser<Box<dyn Read + Send>>),
    Arc(ArcParser<Box<dyn Read + Send>>),
}

impl Parser {
    fn next_record(&mut self) -> Option<ArchiveRecord> {
        match self {
            Parser::Warc(p) => p.next_record(),
            Parser::Arc(p) => p.next_record(),
        }
    }

    fn bytes_consumed(&self) -> u64 {
        match self {
            Parser::Warc(p) => p.bytes_consumed(),
            Parser::Arc(p) => p.bytes_consumed(),
        }
    }
}

const GZ_MAGIC: &[u8] = &[0x1f, 0x8b];

/// Open one file, unwrapping gzip by magic bytes and detecting the container
/// format from the leading decompressed bytes when the hint is `Auto`.
/// Unrecognizable files yield `None` and are counted.
fn open_parser(
    path: &Path,
    hint: FormatHint,
    stats: Arc<SourceStats>,
    max_record_size: u64,
) -> Option<Parser> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(_) => {
            stats.add_file_skipped();
            return None;
        }
    };

    let mut head = PushbackReader::new(file);
    let magic = match head.fill_at_least(2) {
        Ok(m) => m,
        Err(_) => {
            stats.add_file_skipped();
            return None;
        }
    };
    let gzipped = magic.starts_with(GZ_MAGIC);

    let mut stream: Box<dyn Read + Send> = if gzipped {
        Box::new(MemberGzReader::new(head, Arc::clone(&stats)))
    } else {
        Box::new(head)
    };

    // peek decompressed leading bytes for format detection
    let mut lead = [0u8; 16];
    let mut got = 0;
    while got < lead.len() {
        match stream.read(&mut lead[got..]) {
            Ok(0) => break,
            Ok(n) => got += n,
            Err(_) => {
                stats.add_file_skipped();
                return None;
            }
        }
    }
    if got == 0 {
        // a zero-byte file is an empty archive, not a skip
        return None;
    }
    let mut pb = PushbackReader::new(stream);
    pb.unread(&lead[..got]);
    let stream: Box<dyn Read + Send> = Box::new(pb);

    let format = match hint {
        FormatHint::Warc => FormatHint::Warc,
        FormatHint::Arc => FormatHint::Arc,
        FormatHint::Auto => {
            if lead[..got].starts_with(b"WARC/") {
                FormatHint::Warc
            } else if lead[..got].starts_with(b"filedesc://") {
                FormatHint::Arc
            } else {
                stats.add_file_skipped();
                return None;
            }
        }
    };

    Some(match format {
        FormatHint::Warc => Parser::Warc(WarcParser::new(stream, stats, max_record_size)),
        FormatHint::Arc => Parser::Arc(ArcParser::new(stream, stats, max_record_size)),
        FormatHint::Auto => unreachable!(),
    })
}

/// Iterator over one file's records, tracking the bytes counter as it goes.
pub struct FileRecords {
    parser: Option<Parser>,
    stats: Arc<SourceStats>,
    reported: u64,
}

impl Iterator for FileRecords {
    type Item = ArchiveRecord;

    fn next(&mut self) -> Option<ArchiveRecord> {
        let parser = self.parser.as_mut()?;
        let rec = parser.next_record();
        let consumed = parser.bytes_consumed();
        self.stats.add_bytes(consumed - self.reported);
        self.reported = consumed;
        if rec.is_none() {
            self.parser = None;
        }
        rec
    }
}

/// Iterator over all records of all files, in path order.
pub struct RecordIter<'a> {
    source: &'a ArchiveSource,
    next_file: usize,
    current: Option<FileRecords>,
}

impl Iterator for RecordIter<'_> {
    type Item = ArchiveRecord;

    fn next(&mut self) -> Option<ArchiveRecord> {
        loop {
            if let Some(cur) = &mut self.current {
                if let Some(rec) = cur.next() {
                    return Some(rec);
                }
                self.current = None;
            }
            if self.next_file >= self.source.paths.len() {
                return None;
            }
            self.current = Some(self.source.file_records(self.next_file));
            self.next_file += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> PathBuf {
        let path = dir.join(name);
        let mut f = File::create(&path).unwrap();
        f.write_all(bytes).unwrap();
        path
    }

    #[test]
    fn missing_file_is_a_fatal_open_error() {
        let err = ArchiveSource::open(vec!["/definitely/not/here.warc"], FormatHint::Auto)
            .err()
            .unwrap();
        let msg = err.to_string();
        assert!(msg.contains("/definitely/not/here.warc"), "message names path: {msg}");
    }

    #[test]
    fn empty_path_list_rejected() {
        let err = ArchiveSource::open(Vec::<PathBuf>::new(), FormatHint::Auto).err();
        assert!(matches!(err, Some(ArchiveError::NoInputs)));
    }

    #[test]
    fn empty_warc_yields_zero_records_zero_skips() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(dir.path(), "empty.warc", b"");
        let src = ArchiveSource::open(vec![path], FormatHint::Auto).unwrap();
        assert_eq!(src.records().count(), 0);
        let stats = src.stats();
        assert_eq!(stats.records_read, 0);
        assert_eq!(stats.records_skipped, 0);
        assert_eq!(stats.files_skipped, 0);
    }

    #[test]
    fn unrecognizable_file_is_skipped_and_counted() {
        let dir = tempfile::tempdir().unwrap();
        let junk = write_file(dir.path(), "junk.bin", b"\x00\x01\x02 nothing archival here");
        let src = ArchiveSource::open(vec![junk], FormatHint::Auto).unwrap();
        assert_eq!(src.records().count(), 0);
        assert_eq!(src.stats().files_skipped, 1);
    }

    #[test]
    fn shard_splits_paths_round_robin() {
        let dir = tempfile::tempdir().unwrap();
        let paths: Vec<PathBuf> = (0..5)
            .map(|i| write_file(dir.path(), &format!("f{i}.warc"), b"WARC/1.0\r\n"))
            .collect();
        let src = ArchiveSource::open(paths, FormatHint::Auto).unwrap();
        let a = src.shard(0, 2);
        let b = src.shard(1, 2);
        assert_eq!(a.paths().len(), 3);
        assert_eq!(b.paths().len(), 2);
    }
}
