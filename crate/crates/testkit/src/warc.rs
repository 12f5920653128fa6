use std::io::{self, Write};

use flate2::write::GzEncoder;
use flate2::Compression;

/// Shorthand for composing the HTTP message that goes inside a response record.
pub struct HttpResponseSpec<'a> {
    pub status: u16,
    pub reason: &'a str,
    pub content_type: Option<&'a str>,
    pub body: &'a [u8],
}

impl<'a> HttpResponseSpec<'a> {
    pub fn html(body: &'a [u8]) -> Self {
        HttpResponseSpec {
            status: 200,
            reason: "OK",
            content_type: Some("text/html; charset=utf-8"),
            body,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.body.len() + 128);
        out.extend_from_slice(format!("HTTP/1.1 {} {}\r\n", self.status, self.reason).as_bytes());
        if let Some(ct) = self.content_type {
            out.extend_from_slice(format!("Content-Type: {}\r\n", ct).as_bytes());
        }
        out.extend_from_slice(format!("Content-Length: {}\r\n", self.body.len()).as_bytes());
        out.extend_from_slice(b"\r\n");
        out.extend_from_slice(self.body);
        out
    }
}

/// Minimal WARC/1.0 emitter. With `gzip` set, each record becomes its own
/// gzip member, matching the .warc.gz convention.
pub struct WarcWriter<W: Write> {
    out: W,
    gzip: bool,
    records: usize,
}

impl<W: Write> WarcWriter<W> {
    pub fn new(out: W) -> Self {
        WarcWriter {
            out,
            gzip: false,
            records: 0,
        }
    }

    pub fn new_gzip(out: W) -> Self {
        WarcWriter {
            out,
            gzip: true,
            records: 0,
        }
    }

    pub fn records_written(&self) -> usize {
        self.records
    }

    /// Low-level record emitter; `extra_headers` come after the generated ones.
    pub fn write_record(
        &mut self,
        warc_type: &str,
        target_uri: Option<&str>,
        date_iso: &str,
        content_type: Option<&str>,
        extra_headers: &[(&str, &str)],
        payload: &[u8],
    ) -> io::Result<()> {
        let mut rec = Vec::with_capacity(payload.len() + 256);
        rec.extend_from_slice(b"WARC/1.0\r\n");
        rec.extend_from_slice(format!("WARC-Type: {}\r\n", warc_type).as_bytes());
        rec.extend_from_slice(format!("WARC-Date: {}\r\n", date_iso).as_bytes());
        rec.extend_from_slice(
            format!("WARC-Record-ID: <urn:uuid:test-{:08}>\r\n", self.records).as_bytes(),
        );
        if let Some(uri) = target_uri {
            rec.extend_from_slice(format!("WARC-Target-URI: {}\r\n", uri).as_bytes());
        }
        if let Some(ct) = content_type {
            rec.extend_from_slice(format!("Content-Type: {}\r\n", ct).as_bytes());
        }
        for (k, v) in extra_headers {
            rec.extend_from_slice(format!("{}: {}\r\n", k, v).as_bytes());
        }
        rec.extend_from_slice(format!("Content-Length: {}\r\n", payload.len()).as_bytes());
        rec.extend_from_slice(b"\r\n");
        rec.extend_from_slice(payload);
        rec.extend_from_slice(b"\r\n\r\n");

        if self.gzip {
            let mut enc = GzEncoder::new(&mut self.out, Compression::fast());
            enc.write_all(&rec)?;
            enc.finish()?;
        } else {
            self.out.write_all(&rec)?;
        }
        self.records += 1;
        Ok(())
    }

    pub fn write_response(
        &mut self,
        url: &str,
        date_iso: &str,
        http: &HttpResponseSpec<'_>,
    ) -> io::Result<()> {
        self.write_record(
            "response",
            Some(url),
            date_iso,
            Some("application/http; msgtype=response"),
            &[],
            &http.to_bytes(),
        )
    }

    pub fn write_request(&mut self, url: &str, date_iso: &str) -> io::Result<()> {
        let payload = format!("GET {} HTTP/1.1\r\nHost: test\r\n\r\n", url);
        self.write_record(
            "request",
            Some(url),
            date_iso,
            Some("application/http; msgtype=request"),
            &[],
            payload.as_bytes(),
        )
    }

    pub fn write_revisit(&mut self, url: &str, date_iso: &str) -> io::Result<()> {
        self.write_record(
            "revisit",
            Some(url),
            date_iso,
            Some("application/http; msgtype=response"),
            &[("WARC-Profile", "http://netpreserve.org/warc/1.0/revisit/identical-payload-digest")],
            b"HTTP/1.1 200 OK\r\n\r\n",
        )
    }

    pub fn write_warcinfo(&mut self, date_iso: &str) -> io::Result<()> {
        self.write_record(
            "warcinfo",
            None,
            date_iso,
            Some("application/warc-fields"),
            &[],
            b"software: warc-distill-testkit\r\n",
        )
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}
