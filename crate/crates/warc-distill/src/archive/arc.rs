use std::io::Read;
use std::sync::Arc;

use super::scan::{trim_line_end, RecordScanner};
use super::{valid_timestamp14, ArchiveRecord, RecordKind, SourceStats};

const MAX_HEADER_LINE: usize = 16 * 1024;

/// Header-line fields of an ARC entry: v1 has 5, v2 has 10.
struct ArcHeader {
    url: String,
    date14: String,
    mime: String,
    length: u64,
}

fn parse_arc_header(line: &[u8]) -> Option<ArcHeader> {
    let text = std::str::from_utf8(line).ok()?;
    let fields: Vec<&str> = text.split_ascii_whitespace().collect();
    let (url, date, mime, length) = match fields.len() {
        5 => (fields[0], fields[2], fields[3], fields[4]),
        10 => (fields[0], fields[2], fields[3], fields[9]),
        _ => return None,
    };
    if !valid_timestamp14(date) {
        return None;
    }
    let length: u64 = length.parse().ok()?;
    if url.is_empty() || !url.contains("://") {
        return None;
    }
    Some(ArcHeader {
        url: url.to_string(),
        date14: date.to_string(),
        mime: mime.to_string(),
        length,
    })
}

/// Streaming ARC/1.0 parser: `<url> <ip> <date> <mime> <length>` header
/// lines followed by length-delimited bodies. The version block at the top
/// of the file is exposed as an ordinary `arc-entry` record (its
/// `filedesc://` URI never passes page filters downstream).
pub(crate) struct ArcParser<R: Read> {
    scan: RecordScanner<R>,
    stats: Arc<SourceStats>,
    max_record_size: u64,
    done: bool,
}

impl<R: Read> ArcParser<R> {
    pub fn new(inner: R, stats: Arc<SourceStats>, max_record_size: u64) -> Self {
        ArcParser {
            scan: RecordScanner::new(inner),
            stats,
            max_record_size,
            done: false,
        }
    }

    pub fn bytes_consumed(&self) -> u64 {
        self.scan.consumed()
    }

    /// Consume lines until one parses as an ARC header again.
    fn recover(&mut self) -> bool {
        self.stats.add_skipped();
        loop {
            match self.scan.read_line(MAX_HEADER_LINE) {
                Err(_) | Ok(None) => {
                    self.done = true;
                    return false;
                }
                Ok(Some(line)) => {
                    if parse_arc_header(trim_line_end(&line)).is_some() {
                        self.scan.unread(&line);
                        return true;
                    }
                }
            }
        }
    }

    pub fn next_record(&mut self) -> Option<ArchiveRecord> {
        loop {
            if self.done {
                return None;
            }
            let line = match self.scan.read_line(MAX_HEADER_LINE) {
                Err(_) | Ok(None) => {
                    self.done = true;
                    return None;
                }
                Ok(Some(line)) => line,
            };
            let t = trim_line_end(&line);
            if t.is_empty() {
                continue;
            }
            let header = match parse_arc_header(t) {
                Some(h) => h,
                None => {
                    if self.recover() {
                        continue;
                    }
                    return None;
                }
            };

            if header.length > self.max_record_size {
                self.stats.add_skipped();
                match self.scan.skip_bytes(header.length) {
                    Ok(n) if n == header.length => continue,
                    _ => {
                        self.done = true;
                        return None;
                    }
                }
            }

            let (payload, complete) = match self.scan.read_exact_vec(header.length) {
                Ok(v) => v,
                Err(_) => {
                    self.stats.add_skipped();
                    self.done = true;
                    return None;
                }
            };
            if !complete {
                self.stats.add_skipped();
                self.done = true;
                return None;
            }

            self.stats.add_read();
            return Some(ArchiveRecord {
                kind: RecordKind::ArcEntry,
                target_uri: Some(header.url),
                timestamp: header.date14,
                declared_mime: Some(header.mime),
                content_length: header.length,
                payload,
                version: None,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn entry(url: &str, date: &str, mime: &str, body: &[u8]) -> Vec<u8> {
        let mut out = format!("{} 10.0.0.1 {} {} {}\n", url, date, mime, body.len()).into_bytes();
        out.extend_from_slice(body);
        out.push(b'\n');
        out
    }

    fn version_block() -> Vec<u8> {
        let body = b"1 0 fixture\nURL IP-address Archive-date Content-type Archive-length\n";
        let mut out =
            format!("filedesc://fixture.arc 0.0.0.0 20140101000000 text/plain {}\n", body.len())
                .into_bytes();
        out.extend_from_slice(body);
        out.push(b'\n');
        out
    }

    fn parse_all(bytes: Vec<u8>) -> (Vec<ArchiveRecord>, super::super::StatsSnapshot) {
        let stats = Arc::new(SourceStats::default());
        let mut p = ArcParser::new(Cursor::new(bytes), Arc::clone(&stats), 1 << 30);
        let mut out = Vec::new();
        while let Some(r) = p.next_record() {
            out.push(r);
        }
        (out, stats.snapshot())
    }

    #[test]
    fn version_block_and_entries() {
        let mut bytes = version_block();
        bytes.extend(entry(
            "http://site.example/a.html",
            "20140901120000",
            "text/html",
            b"HTTP/1.0 200 OK\r\nContent-Type: text/html\r\n\r\n<html>a</html>",
        ));
        bytes.extend(entry(
            "http://site.example/b.html",
            "20140902130000",
            "text/html",
            b"<html>bare body, no envelope</html>",
        ));
        let (recs, stats) = parse_all(bytes);
        assert_eq!(recs.len(), 3);
        assert_eq!(stats.records_read, 3);
        assert_eq!(stats.records_skipped, 0);
        assert!(recs.iter().all(|r| r.kind == RecordKind::ArcEntry));
        assert_eq!(recs[0].target_uri.as_deref(), Some("filedesc://fixture.arc"));
        assert_eq!(recs[1].timestamp, "20140901120000");
        assert_eq!(recs[1].declared_mime.as_deref(), Some("text/html"));
        assert_eq!(recs[2].content_length, recs[2].payload.len() as u64);
    }

    #[test]
    fn ten_field_v2_header_parses() {
        let body = b"<html>v2</html>";
        let mut bytes = format!(
            "http://v2.example/x.html 10.0.0.1 20150101000000 text/html 200 - - 0 f.arc {}\n",
            body.len()
        )
        .into_bytes();
        bytes.extend_from_slice(body);
        bytes.push(b'\n');
        let (recs, _) = parse_all(bytes);
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].target_uri.as_deref(), Some("http://v2.example/x.html"));
    }

    #[test]
    fn bad_length_recovers_at_next_entry() {
        let mut bytes = version_block();
        bytes.extend(b"http://bad.example/x 10.0.0.1 20140901120000 text/html notanumber\ngarbage body\n".to_vec());
        bytes.extend(entry("http://ok.example/y.html", "20140903000000", "text/html", b"fine"));
        let (recs, stats) = parse_all(bytes);
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].target_uri.as_deref(), Some("http://ok.example/y.html"));
        assert_eq!(stats.records_skipped, 1);
    }

    #[test]
    fn truncated_final_entry_counts_one_skip() {
        let mut bytes = version_block();
        let full = entry("http://site.example/z.html", "20140904000000", "text/html", b"0123456789");
        bytes.extend(&full[..full.len() - 6]);
        let (recs, stats) = parse_all(bytes);
        assert_eq!(recs.len(), 1); // just the version block
        assert_eq!(stats.records_skipped, 1);
    }
}
