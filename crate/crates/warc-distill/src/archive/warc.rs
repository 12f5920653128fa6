use std::io::Read;
use std::sync::Arc;

use super::scan::{trim_line_end, RecordScanner};
use super::{iso_to_timestamp14, ArchiveRecord, RecordKind, SourceStats};

const MAX_HEADER_LINE: usize = 64 * 1024;
const MAX_HEADER_BLOCK: usize = 256 * 1024;
const WARC_MAGIC: &[u8] = b"WARC/";

/// Streaming WARC/1.x record parser. Malformed records are skipped and
/// counted; the scan resynchronizes at the next line starting with "WARC/".
pub(crate) struct WarcParser<R: Read> {
    scan: RecordScanner<R>,
    stats: Arc<SourceStats>,
    max_record_size: u64,
    done: bool,
}

impl<R: Read> WarcParser<R> {
    pub fn new(inner: R, stats: Arc<SourceStats>, max_record_size: u64) -> Self {
        WarcParser {
            scan: RecordScanner::new(inner),
            stats,
            max_record_size,
            done: false,
        }
    }

    pub fn bytes_consumed(&self) -> u64 {
        self.scan.consumed()
    }

    /// Skip + resync, or end the stream when no further record start exists.
    fn recover(&mut self) -> bool {
        self.stats.add_skipped();
        match self.scan.skip_to_line_magic(WARC_MAGIC) {
            Ok(true) => true,
            Ok(false) | Err(_) => {
                self.done = true;
                false
            }
        }
    }

    pub fn next_record(&mut self) -> Option<ArchiveRecord> {
        'record: loop {
            if self.done {
                return None;
            }
            // locate the version line
            let version = loop {
                match self.scan.read_line(MAX_HEADER_LINE) {
                    Err(_) | Ok(None) => {
                        self.done = true;
                        return None;
                    }
                    Ok(Some(line)) => {
                        let t = trim_line_end(&line);
                        if t.is_empty() {
                            continue;
                        }
                        if t.starts_with(WARC_MAGIC) {
                            break String::from_utf8_lossy(t).into_owned();
                        }
                        if !self.recover() {
                            return None;
                        }
                        continue 'record;
                    }
                }
            };

            // header block, terminated by an empty line
            let mut headers: Vec<(String, String)> = Vec::new();
            let mut header_bytes = 0usize;
            loop {
                match self.scan.read_line(MAX_HEADER_LINE) {
                    Err(_) | Ok(None) => {
                        // truncated inside headers
                        self.stats.add_skipped();
                        self.done = true;
                        return None;
                    }
                    Ok(Some(line)) => {
                        header_bytes += line.len();
                        if header_bytes > MAX_HEADER_BLOCK {
                            if self.recover() {
                                continue 'record;
                            }
                            return None;
                        }
                        let t = trim_line_end(&line);
                        if t.is_empty() {
                            break;
                        }
                        let text = String::from_utf8_lossy(t);
                        if let Some((name, value)) = text.split_once(':') {
                            headers.push((name.trim().to_string(), value.trim().to_string()));
                        }
                        // header lines without a colon are dropped
                    }
                }
            }

            let header = |name: &str| {
                headers
                    .iter()
                    .find(|(n, _)| n.eq_ignore_ascii_case(name))
                    .map(|(_, v)| v.as_str())
            };

            let content_length: u64 = match header("Content-Length").and_then(|v| v.parse().ok())
            {
                Some(n) => n,
                None => {
                    if self.recover() {
                        continue 'record;
                    }
                    return None;
                }
            };

            if content_length > self.max_record_size {
                self.stats.add_skipped();
                match self.scan.skip_bytes(content_length) {
                    Ok(n) if n == content_length => continue 'record,
                    _ => {
                        self.done = true;
                        return None;
                    }
                }
            }

            let (payload, complete) = match self.scan.read_exact_vec(content_length) {
                Ok(v) => v,
                Err(_) => {
                    self.stats.add_skipped();
                    self.done = true;
                    return None;
                }
            };
            if !complete {
                // truncated final record
                self.stats.add_skipped();
                self.done = true;
                return None;
            }

            // trailer: blank line(s), then the next record or end of stream
            let mut ok_trailer = false;
            for _ in 0..4 {
                match self.scan.read_line(MAX_HEADER_LINE) {
                    Err(_) | Ok(None) => {
                        ok_trailer = true;
                        break;
                    }
                    Ok(Some(line)) => {
                        let t = trim_line_end(&line);
                        if t.is_empty() {
                            ok_trailer = true;
                            continue;
                        }
                        if t.starts_with(WARC_MAGIC) {
                            self.scan.unread(&line);
                            ok_trailer = true;
                        }
                        break;
                    }
                }
            }
            if !ok_trailer {
                // Content-Length disagreed with the actual framing
                if self.recover() {
                    continue 'record;
                }
                return None;
            }

            // envelope fields
            let timestamp = match header("WARC-Date").and_then(iso_to_timestamp14) {
                Some(ts) => ts,
                None => {
                    // framing was fine; skip just this record
                    self.stats.add_skipped();
                    continue 'record;
                }
            };
            let kind = header("WARC-Type")
                .map(RecordKind::from_warc_type)
                .unwrap_or(RecordKind::Metadata);
            let target_uri = header("WARC-Target-URI")
                .map(|v| v.trim_start_matches('<').trim_end_matches('>').to_string());
            let declared_mime = header("Content-Type").map(|v| v.to_string());

            self.stats.add_read();
            return Some(ArchiveRecord {
                kind,
                target_uri,
                timestamp,
                declared_mime,
                content_length,
                payload,
                version: Some(version),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn record(warc_type: &str, uri: &str, body: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"WARC/1.0\r\n");
        out.extend_from_slice(format!("WARC-Type: {}\r\n", warc_type).as_bytes());
        out.extend_from_slice(b"WARC-Date: 2014-09-01T12:00:00Z\r\n");
        out.extend_from_slice(format!("WARC-Target-URI: {}\r\n", uri).as_bytes());
        out.extend_from_slice(format!("Content-Length: {}\r\n", body.len()).as_bytes());
        out.extend_from_slice(b"\r\n");
        out.extend_from_slice(body);
        out.extend_from_slice(b"\r\n\r\n");
        out
    }

    fn parse_all(bytes: Vec<u8>) -> (Vec<ArchiveRecord>, super::super::StatsSnapshot) {
        let stats = Arc::new(SourceStats::default());
        let mut p = WarcParser::new(Cursor::new(bytes), Arc::clone(&stats), 1 << 30);
        let mut out = Vec::new();
        while let Some(r) = p.next_record() {
            out.push(r);
        }
        (out, stats.snapshot())
    }

    #[test]
    fn two_well_formed_records() {
        let mut bytes = record("response", "http://a.example/", b"HTTP/1.1 200 OK\r\n\r\nhello");
        bytes.extend(record("request", "http://a.example/", b"GET / HTTP/1.1\r\n\r\n"));
        let (recs, stats) = parse_all(bytes);
        assert_eq!(recs.len(), 2);
        assert_eq!(stats.records_read, 2);
        assert_eq!(stats.records_skipped, 0);
        assert_eq!(recs[0].kind, RecordKind::Response);
        assert_eq!(recs[0].timestamp, "20140901120000");
        assert_eq!(recs[0].target_uri.as_deref(), Some("http://a.example/"));
        assert_eq!(recs[0].content_length, recs[0].payload.len() as u64);
        assert_eq!(recs[1].kind, RecordKind::Request);
    }

    #[test]
    fn iso_date_converts_to_14_digit_form() {
        let bytes = record("response", "http://a.example/x", b"body");
        let (recs, _) = parse_all(bytes);
        assert_eq!(recs[0].timestamp, "20140901120000");
        assert_eq!(recs[0].crawl_date(), "20140901");
    }

    #[test]
    fn corrupt_content_length_skips_only_that_record() {
        let first = record("response", "http://a.example/1", b"one");
        let mut middle =
            String::from_utf8(record("response", "http://a.example/2", b"two")).unwrap();
        middle = middle.replace("Content-Length: 3", "Content-Length: oops");
        let last = record("response", "http://a.example/3", b"three");

        let mut bytes = first;
        bytes.extend(middle.into_bytes());
        bytes.extend(last);

        let (recs, stats) = parse_all(bytes);
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].target_uri.as_deref(), Some("http://a.example/1"));
        assert_eq!(recs[1].target_uri.as_deref(), Some("http://a.example/3"));
        assert_eq!(stats.records_skipped, 1);
    }

    #[test]
    fn understated_content_length_recovers_at_next_record() {
        // claims 2 bytes for a 5-byte body; the framing check fails and the
        // scan resyncs on the next record
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"WARC/1.0\r\n");
        bytes.extend_from_slice(b"WARC-Type: response\r\n");
        bytes.extend_from_slice(b"WARC-Date: 2014-09-01T12:00:00Z\r\n");
        bytes.extend_from_slice(b"Content-Length: 2\r\n\r\nhello\r\n\r\n");
        bytes.extend(record("response", "http://a.example/ok", b"fine"));
        let (recs, stats) = parse_all(bytes);
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].target_uri.as_deref(), Some("http://a.example/ok"));
        assert_eq!(stats.records_skipped, 1);
    }

    #[test]
    fn truncated_final_record_ends_cleanly() {
        let mut bytes = record("response", "http://a.example/1", b"one");
        let second = record("response", "http://a.example/2", b"a much longer body here");
        bytes.extend(&second[..second.len() - 12]);
        let (recs, stats) = parse_all(bytes);
        assert_eq!(recs.len(), 1);
        assert_eq!(stats.records_skipped, 1);
    }

    #[test]
    fn oversized_record_is_skipped_without_buffering() {
        let body = vec![b'x'; 4096];
        let mut bytes = record("response", "http://a.example/big", &body);
        bytes.extend(record("response", "http://a.example/ok", b"ok"));
        let stats = Arc::new(SourceStats::default());
        let mut p = WarcParser::new(Cursor::new(bytes), Arc::clone(&stats), 1024);
        let mut recs = Vec::new();
        while let Some(r) = p.next_record() {
            recs.push(r);
        }
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].target_uri.as_deref(), Some("http://a.example/ok"));
        assert_eq!(stats.snapshot().records_skipped, 1);
    }

    #[test]
    fn bad_date_skips_record_semantically() {
        let mut bytes =
            String::from_utf8(record("response", "http://a.example/1", b"one")).unwrap();
        bytes = bytes.replace("2014-09-01T12:00:00Z", "not-a-date");
        let mut all = bytes.into_bytes();
        all.extend(record("response", "http://a.example/2", b"two"));
        let (recs, stats) = parse_all(all);
        assert_eq!(recs.len(), 1);
        assert_eq!(stats.records_skipped, 1);
    }

    #[test]
    fn garbage_prefix_then_record() {
        let mut bytes = b"this is not a warc header\nmore junk\n".to_vec();
        bytes.extend(record("response", "http://a.example/", b"payload"));
        let (recs, stats) = parse_all(bytes);
        assert_eq!(recs.len(), 1);
        assert_eq!(stats.records_skipped, 1);
    }
}
