use std::io::{self, Write};

use flate2::write::GzEncoder;
use flate2::Compression;

/// Minimal ARC/1.0 emitter: version block followed by
/// `<url> <ip> <yyyyMMddHHmmss> <mime> <length>\n<body>\n` entries.
pub struct ArcWriter<W: Write> {
    out: W,
    gzip: bool,
    started: bool,
}

impl<W: Write> ArcWriter<W> {
    pub fn new(out: W) -> Self {
        ArcWriter {
            out,
            gzip: false,
            started: false,
        }
    }

    pub fn new_gzip(out: W) -> Self {
        ArcWriter {
            out,
            gzip: true,
            started: false,
        }
    }

    fn emit(&mut self, bytes: &[u8]) -> io::Result<()> {
        if self.gzip {
            let mut enc = GzEncoder::new(&mut self.out, Compression::fast());
            enc.write_all(bytes)?;
            enc.finish()?;
            Ok(())
        } else {
            self.out.write_all(bytes)
        }
    }

    fn write_version_block(&mut self) -> io::Result<()> {
        let body = b"1 0 warc-distill-testkit\nURL IP-address Archive-date Content-type Archive-length\n";
        let header = format!(
            "filedesc://fixture.arc 0.0.0.0 20140101000000 text/plain {}\n",
            body.len()
        );
        let mut block = header.into_bytes();
        block.extend_from_slice(body);
        block.push(b'\n');
        self.emit(&block)
    }

    /// Body is the raw capture: either a full HTTP message or bare content
    /// for pre-HTTP-envelope captures.
    pub fn write_entry(
        &mut self,
        url: &str,
        ip: &str,
        date14: &str,
        mime: &str,
        body: &[u8],
    ) -> io::Result<()> {
        if !self.started {
            self.write_version_block()?;
            self.started = true;
        }
        let mut rec =
            format!("{} {} {} {} {}\n", url, ip, date14, mime, body.len()).into_bytes();
        rec.extend_from_slice(body);
        rec.push(b'\n');
        self.emit(&rec)
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}
