use std::io::{self, BufRead, Read};
use std::sync::Arc;

use flate2::bufread::GzDecoder;

use super::scan::PushbackReader;
use super::SourceStats;

const GZ_MAGIC: &[u8] = &[0x1f, 0x8b, 0x08];

/// Streaming decoder for gzip files made of one or many members (the
/// .warc.gz convention is one member per record). A member that fails to
/// decode is skipped: the raw stream is scanned forward for the next member
/// signature and decoding resumes there, with the skip counted.
pub(crate) struct MemberGzReader<R: Read> {
    state: State<R>,
    stats: Arc<SourceStats>,
}

enum State<R: Read> {
    Between(PushbackReader<R>),
    Decoding(GzDecoder<PushbackReader<R>>),
    Done,
    // placeholder while transitioning between states
    Poisoned,
}

impl<R: Read> MemberGzReader<R> {
    pub fn new(inner: R, stats: Arc<SourceStats>) -> Self {
        MemberGzReader {
            state: State::Between(PushbackReader::new(inner)),
            stats,
        }
    }
}

/// Advance `r` to the next gzip member signature. Returns false when the
/// stream ends first. A false positive (the byte pattern inside compressed
/// data) just fails the next decode and the scan continues from there.
fn scan_to_member<R: Read>(r: &mut PushbackReader<R>) -> io::Result<bool> {
    loop {
        let avail = r.fill_at_least(GZ_MAGIC.len())?;
        if avail.len() < GZ_MAGIC.len() {
            // fewer bytes than a signature left; drain them
            let n = avail.len();
            r.consume(n);
            return Ok(false);
        }
        if let Some(i) = avail
            .windows(GZ_MAGIC.len())
            .position(|w| w == GZ_MAGIC)
        {
            r.consume(i);
            return Ok(true);
        }
        // keep a partial-signature tail for the next chunk
        let n = avail.len() - (GZ_MAGIC.len() - 1);
        r.consume(n);
        // force more input behind the tail
        let have = r.fill_at_least(GZ_MAGIC.len())?.len();
        if have < GZ_MAGIC.len() {
            let n = have;
            r.consume(n);
            return Ok(false);
        }
    }
}

fn is_data_error(e: &io::Error) -> bool {
    matches!(
        e.kind(),
        io::ErrorKind::InvalidData
            | io::ErrorKind::InvalidInput
            | io::ErrorKind::UnexpectedEof
            | io::ErrorKind::Other
    )
}

impl<R: Read> Read for MemberGzReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        loop {
            match std::mem::replace(&mut self.state, State::Poisoned) {
                State::Done => {
                    self.state = State::Done;
                    return Ok(0);
                }
                State::Between(mut r) => {
                    let avail = r.fill_at_least(GZ_MAGIC.len())?;
                    if avail.is_empty() {
                        self.state = State::Done;
                        return Ok(0);
                    }
                    if avail.starts_with(GZ_MAGIC) {
                        self.state = State::Decoding(GzDecoder::new(r));
                    } else {
                        // junk between members
                        self.stats.add_gzip_member_skipped();
                        if scan_to_member(&mut r)? {
                            self.state = State::Between(r);
                        } else {
                            self.state = State::Done;
                            return Ok(0);
                        }
                    }
                }
                State::Decoding(mut dec) => match dec.read(buf) {
                    Ok(0) => {
                        self.state = State::Between(dec.into_inner());
                    }
                    Ok(n) => {
                        self.state = State::Decoding(dec);
                        return Ok(n);
                    }
                    Err(e) if is_data_error(&e) => {
                        self.stats.add_gzip_member_skipped();
                        let mut r = dec.into_inner();
                        if scan_to_member(&mut r)? {
                            self.state = State::Between(r);
                        } else {
                            self.state = State::Done;
                            return Ok(0);
                        }
                    }
                    Err(e) => {
                        self.state = State::Done;
                        return Err(e);
                    }
                },
                State::Poisoned => unreachable!("reader left poisoned"),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use flate2::write::GzEncoder;
    use flate2::Compression;
    use std::io::Write;

    fn member(data: &[u8]) -> Vec<u8> {
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(data).unwrap();
        enc.finish().unwrap()
    }

    fn read_all(bytes: Vec<u8>, stats: &Arc<SourceStats>) -> Vec<u8> {
        let mut r = MemberGzReader::new(io::Cursor::new(bytes), Arc::clone(stats));
        let mut out = Vec::new();
        r.read_to_end(&mut out).unwrap();
        out
    }

    #[test]
    fn concatenated_members_decode_in_order() {
        let mut bytes = member(b"alpha ");
        bytes.extend(member(b"beta "));
        bytes.extend(member(b"gamma"));
        let stats = Arc::new(SourceStats::default());
        assert_eq!(read_all(bytes, &stats), b"alpha beta gamma");
        assert_eq!(stats.snapshot().gzip_members_skipped, 0);
    }

    #[test]
    fn corrupt_middle_member_is_skipped() {
        let first = member(b"alpha ");
        let mut middle = member(b"beta ");
        // damage the deflate stream, not the header
        let mid = middle.len() / 2;
        middle[mid] ^= 0xff;
        middle[mid + 1] ^= 0xff;
        let last = member(b"gamma");

        let mut bytes = first;
        bytes.extend(&middle);
        bytes.extend(&last);

        let stats = Arc::new(SourceStats::default());
        let out = read_all(bytes, &stats);
        let text = String::from_utf8_lossy(&out);
        assert!(text.starts_with("alpha "));
        assert!(text.ends_with("gamma"));
        assert!(stats.snapshot().gzip_members_skipped >= 1);
    }

    #[test]
    fn truncated_final_member_ends_cleanly() {
        let mut bytes = member(b"alpha ");
        let second = member(b"beta beta beta beta");
        bytes.extend(&second[..second.len() / 2]);
        let stats = Arc::new(SourceStats::default());
        let out = read_all(bytes, &stats);
        assert!(out.starts_with(b"alpha "));
        assert!(stats.snapshot().gzip_members_skipped >= 1);
    }

    #[test]
    fn garbage_between_members_is_scanned_past() {
        let mut bytes = member(b"alpha ");
        bytes.extend(b"NOT GZIP DATA AT ALL");
        bytes.extend(member(b"omega"));
        let stats = Arc::new(SourceStats::default());
        let out = read_all(bytes, &stats);
        assert_eq!(out, b"alpha omega");
        assert!(stats.snapshot().gzip_members_skipped >= 1);
    }
}
