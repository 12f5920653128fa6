/// The HTTP half of a capture: status line, headers, body. Borrowed from the
/// record payload; records without an HTTP envelope (old ARC captures, or
/// junk) come back with absent status and the whole payload as body.
#[derive(Debug)]
pub struct HttpPayload<'a> {
    pub status: Option<u16>,
    /// Ordered as they appeared; names looked up case-insensitively.
    pub headers: Vec<(String, String)>,
    pub body: &'a [u8],
    /// Lowercased `type/subtype` from the Content-Type header, parameters
    /// stripped, absent when the header is missing or malformed.
    pub content_type: Option<String>,
}

impl<'a> HttpPayload<'a> {
    /// First header with the given name, case-insensitive.
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    /// Declared charset from the Content-Type parameters, lowercased.
    pub fn charset(&self) -> Option<String> {
        let ct = self.header("content-type")?;
        for param in ct.split(';').skip(1) {
            let param = param.trim();
            if param.len() > 8 && param[..8].eq_ignore_ascii_case("charset=") {
                let v = param[8..].trim().trim_matches('"').trim_matches('\'');
                if !v.is_empty() {
                    return Some(v.to_ascii_lowercase());
                }
            }
        }
        None
    }
}

/// Find where the header block ends: the first CRLF CRLF, tolerating bare
/// LF LF. Returns the byte offset where the body starts.
fn find_body_start(payload: &[u8]) -> Option<usize> {
    let mut i = 0;
    while i < payload.len() {
        if payload[i] == b'\n' {
            if payload[i + 1..].starts_with(b"\r\n") {
                return Some(i + 3);
            }
            if payload[i + 1..].starts_with(b"\n") {
                return Some(i + 2);
            }
        }
        i += 1;
    }
    None
}

fn parse_media_type(value: &str) -> Option<String> {
    let mt = value.split(';').next()?.trim().to_ascii_lowercase();
    let (t, s) = mt.split_once('/')?;
    if t.is_empty() || s.is_empty() || mt.contains(char::is_whitespace) {
        return None;
    }
    Some(mt)
}

/// Split a record payload into HTTP status, headers, and body.
///
/// Unparseable header lines are dropped individually; continuation lines
/// (leading whitespace) fold into the previous header. A payload that does
/// not open with an HTTP status line, or has no blank-line separator, is
/// returned whole as the body.
pub fn split_http(payload: &[u8]) -> HttpPayload<'_> {
    let no_envelope = HttpPayload {
        status: None,
        headers: Vec::new(),
        body: payload,
        content_type: None,
    };
    if !payload.starts_with(b"HTTP/") {
        return no_envelope;
    }
    let body_start = match find_body_start(payload) {
        Some(i) => i,
        None => return no_envelope,
    };
    let head = String::from_utf8_lossy(&payload[..body_start]);
    let mut lines = head.lines();

    let status = lines.next().and_then(|status_line| {
        let code = status_line.split_ascii_whitespace().nth(1)?;
        let code: u16 = code.parse().ok()?;
        (100..=599).contains(&code).then_some(code)
    });

    let mut headers: Vec<(String, String)> = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        if line.starts_with(' ') || line.starts_with('\t') {
            if let Some(last) = headers.last_mut() {
                last.1.push(' ');
                last.1.push_str(line.trim());
            }
            continue;
        }
        if let Some((name, value)) = line.split_once(':') {
            headers.push((name.trim().to_string(), value.trim().to_string()));
        }
    }

    let content_type = headers
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case("content-type"))
        .and_then(|(_, v)| parse_media_type(v));

    HttpPayload {
        status,
        headers,
        body: &payload[body_start..],
        content_type,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_response() {
        let p = split_http(b"HTTP/1.1 200 OK\r\nContent-Type: text/html\r\n\r\n<html>hi</html>");
        assert_eq!(p.status, Some(200));
        assert_eq!(p.content_type.as_deref(), Some("text/html"));
        assert_eq!(p.body, b"<html>hi</html>");
    }

    #[test]
    fn no_blank_line_separator_returns_whole_payload() {
        let raw = b"HTTP/1.1 200 OK\r\nContent-Type: text/html";
        let p = split_http(raw);
        assert_eq!(p.status, None);
        assert_eq!(p.body, raw.as_slice());
    }

    #[test]
    fn no_envelope_at_all() {
        let raw = b"just some bytes\n\nwith a blank line";
        let p = split_http(raw);
        assert_eq!(p.status, None);
        assert!(p.headers.is_empty());
        assert_eq!(p.body, raw.as_slice());
    }

    #[test]
    fn bare_lf_separator_tolerated() {
        let p = split_http(b"HTTP/1.0 404 Not Found\nContent-Type: text/plain\n\ngone");
        assert_eq!(p.status, Some(404));
        assert_eq!(p.body, b"gone");
    }

    #[test]
    fn charset_and_params() {
        let p = split_http(
            b"HTTP/1.1 200 OK\r\nContent-Type: text/HTML; charset=UTF-8\r\n\r\nx",
        );
        assert_eq!(p.content_type.as_deref(), Some("text/html"));
        assert_eq!(p.charset().as_deref(), Some("utf-8"));
    }

    #[test]
    fn bad_header_lines_dropped_individually() {
        let p = split_http(
            b"HTTP/1.1 200 OK\r\nGood: yes\r\nthis line has no colon\r\nAlso-Good: 1\r\n\r\nbody",
        );
        assert_eq!(p.headers.len(), 2);
        assert_eq!(p.header("also-good"), Some("1"));
        assert_eq!(p.body, b"body");
    }

    #[test]
    fn status_out_of_range_is_absent() {
        let p = split_http(b"HTTP/1.1 999 Weird\r\n\r\nbody");
        assert_eq!(p.status, None);
        assert_eq!(p.body, b"body");
    }
}
