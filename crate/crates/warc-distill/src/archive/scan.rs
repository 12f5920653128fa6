use std::io::{self, Read};

const CHUNK: usize = 64 * 1024;

/// Buffered reader with pushback, the primitive under both record parsers
/// and the gzip member recovery. Holds at most one chunk plus whatever was
/// pushed back, so memory stays independent of input size.
pub(crate) struct PushbackReader<R: Read> {
    inner: R,
    buf: Vec<u8>,
    pos: usize,
    eof: bool,
    consumed: u64,
}

impl<R: Read> PushbackReader<R> {
    pub fn new(inner: R) -> Self {
        PushbackReader {
            inner,
            buf: Vec::with_capacity(CHUNK),
            pos: 0,
            eof: false,
            consumed: 0,
        }
    }

    /// Total bytes handed out so far (pushed-back bytes are un-counted when
    /// unread and re-counted when consumed again).
    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    fn available(&self) -> &[u8] {
        &self.buf[self.pos..]
    }

    /// Compact the buffer and append one more chunk from the inner reader.
    /// Returns false once the inner reader is exhausted and nothing was added.
    fn top_up(&mut self) -> io::Result<bool> {
        if self.pos > 0 {
            self.buf.drain(..self.pos);
            self.pos = 0;
        }
        if self.eof {
            return Ok(false);
        }
        let old_len = self.buf.len();
        self.buf.resize(old_len + CHUNK, 0);
        match self.inner.read(&mut self.buf[old_len..]) {
            Ok(0) => {
                self.buf.truncate(old_len);
                self.eof = true;
                Ok(false)
            }
            Ok(n) => {
                self.buf.truncate(old_len + n);
                Ok(true)
            }
            Err(e) => {
                self.buf.truncate(old_len);
                Err(e)
            }
        }
    }

    /// Ensure at least `n` bytes are buffered if the stream has them.
    pub fn fill_at_least(&mut self, n: usize) -> io::Result<&[u8]> {
        while self.available().len() < n && self.top_up()? {}
        Ok(self.available())
    }

    pub fn unread(&mut self, bytes: &[u8]) {
        if bytes.is_empty() {
            return;
        }
        let mut rebuilt = Vec::with_capacity(bytes.len() + self.available().len());
        rebuilt.extend_from_slice(bytes);
        rebuilt.extend_from_slice(self.available());
        self.buf = rebuilt;
        self.pos = 0;
        self.consumed = self.consumed.saturating_sub(bytes.len() as u64);
    }
}

impl<R: Read> Read for PushbackReader<R> {
    fn read(&mut self, out: &mut [u8]) -> io::Result<usize> {
        if self.available().is_empty() && !self.top_up()? {
            return Ok(0);
        }
        let avail = self.available();
        let n = avail.len().min(out.len());
        out[..n].copy_from_slice(&avail[..n]);
        self.pos += n;
        self.consumed += n as u64;
        Ok(n)
    }
}

impl<R: Read> io::BufRead for PushbackReader<R> {
    fn fill_buf(&mut self) -> io::Result<&[u8]> {
        if self.available().is_empty() {
            self.top_up()?;
        }
        Ok(&self.buf[self.pos..])
    }

    fn consume(&mut self, amt: usize) {
        let amt = amt.min(self.available().len());
        self.pos += amt;
        self.consumed += amt as u64;
    }
}

/// Line- and block-oriented scanning over a byte stream, with the pushback
/// needed for resynchronization after malformed records.
pub(crate) struct RecordScanner<R: Read> {
    r: PushbackReader<R>,
}

impl<R: Read> RecordScanner<R> {
    pub fn new(inner: R) -> Self {
        RecordScanner {
            r: PushbackReader::new(inner),
        }
    }

    pub fn consumed(&self) -> u64 {
        self.r.consumed()
    }

    pub fn unread(&mut self, bytes: &[u8]) {
        self.r.unread(bytes);
    }

    /// Read one line including its terminator. Lines longer than `max` are
    /// returned in `max`-sized pieces. `None` only at end of stream.
    pub fn read_line(&mut self, max: usize) -> io::Result<Option<Vec<u8>>> {
        let mut line = Vec::new();
        loop {
            use std::io::BufRead;
            let avail = self.r.fill_buf()?;
            if avail.is_empty() {
                return Ok(if line.is_empty() { None } else { Some(line) });
            }
            let want = (max - line.len()).min(avail.len());
            match avail[..want].iter().position(|&b| b == b'\n') {
                Some(i) => {
                    line.extend_from_slice(&avail[..=i]);
                    self.r.consume(i + 1);
                    return Ok(Some(line));
                }
                None => {
                    line.extend_from_slice(&avail[..want]);
                    self.r.consume(want);
                    if line.len() >= max {
                        return Ok(Some(line));
                    }
                }
            }
        }
    }

    /// Read exactly `n` bytes; the bool is false when the stream ended short.
    pub fn read_exact_vec(&mut self, n: u64) -> io::Result<(Vec<u8>, bool)> {
        let n = usize::try_from(n).unwrap_or(usize::MAX);
        let mut out = Vec::with_capacity(n.min(16 * 1024 * 1024));
        while out.len() < n {
            use std::io::BufRead;
            let avail = self.r.fill_buf()?;
            if avail.is_empty() {
                return Ok((out, false));
            }
            let take = avail.len().min(n - out.len());
            out.extend_from_slice(&avail[..take]);
            self.r.consume(take);
        }
        Ok((out, true))
    }

    /// Discard up to `n` bytes without buffering them; returns the number
    /// actually discarded (shorter at end of stream).
    pub fn skip_bytes(&mut self, n: u64) -> io::Result<u64> {
        let mut left = n;
        while left > 0 {
            use std::io::BufRead;
            let avail = self.r.fill_buf()?;
            if avail.is_empty() {
                break;
            }
            let take = (avail.len() as u64).min(left);
            self.r.consume(take as usize);
            left -= take;
        }
        Ok(n - left)
    }

    /// Consume input until a line starts with `magic`; the matching line is
    /// pushed back so the caller re-reads it. Returns false at end of stream.
    pub fn skip_to_line_magic(&mut self, magic: &[u8]) -> io::Result<bool> {
        loop {
            match self.read_line(64 * 1024)? {
                None => return Ok(false),
                Some(line) => {
                    if line.starts_with(magic) {
                        self.unread(&line);
                        return Ok(true);
                    }
                }
            }
        }
    }
}

/// Strip one trailing newline (CRLF or LF) from a line.
pub(crate) fn trim_line_end(line: &[u8]) -> &[u8] {
    let line = line.strip_suffix(b"\n").unwrap_or(line);
    line.strip_suffix(b"\r").unwrap_or(line)
}
