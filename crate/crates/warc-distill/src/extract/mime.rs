use crate::archive::{ArchiveRecord, HttpPayload, RecordKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MimeOrigin {
    HttpHeader,
    Extension,
    MagicBytes,
    /// Nothing matched; `application/octet-stream`.
    Fallback,
}

/// A classified media type and where the classification came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MimeClass {
    /// Lowercase `type/subtype`.
    pub media_type: String,
    pub origin: MimeOrigin,
}

impl MimeClass {
    pub fn is_html(&self) -> bool {
        self.media_type == "text/html" || self.media_type == "application/xhtml+xml"
    }

    pub fn is_image(&self) -> bool {
        self.media_type.starts_with("image/")
    }
}

fn extension_mime(url: &str) -> Option<&'static str> {
    let path = match url::Url::parse(url) {
        Ok(u) => u.path().to_string(),
        Err(_) => {
            // tolerate bare paths; strip query/fragment manually
            let end = url.find(['?', '#']).unwrap_or(url.len());
            url[..end].to_string()
        }
    };
    let last = path.rsplit('/').next().unwrap_or("");
    let ext = last.rsplit_once('.')?.1.to_ascii_lowercase();
    Some(match ext.as_str() {
        "html" | "htm" => "text/html",
        "xhtml" => "application/xhtml+xml",
        "txt" => "text/plain",
        "css" => "text/css",
        "js" => "text/javascript",
        "json" => "application/json",
        "xml" => "application/xml",
        "pdf" => "application/pdf",
        "gif" => "image/gif",
        "png" => "image/png",
        "jpg" | "jpeg" => "image/jpeg",
        "svg" => "image/svg+xml",
        "ico" => "image/x-icon",
        "zip" => "application/zip",
        _ => return None,
    })
}

fn magic_mime(leading: &[u8]) -> Option<&'static str> {
    if leading.starts_with(b"GIF87a") || leading.starts_with(b"GIF89a") {
        return Some("image/gif");
    }
    if leading.starts_with(&[0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a]) {
        return Some("image/png");
    }
    if leading.starts_with(&[0xff, 0xd8, 0xff]) {
        return Some("image/jpeg");
    }
    if leading.starts_with(b"%PDF-") {
        return Some("application/pdf");
    }
    let head = &leading[..leading.len().min(256)];
    let text = String::from_utf8_lossy(head);
    let trimmed = text.trim_start();
    let lower = trimmed
        .get(..trimmed.len().min(16))
        .unwrap_or("")
        .to_ascii_lowercase();
    if lower.starts_with("<!doctype html") || lower.starts_with("<html") {
        return Some("text/html");
    }
    None
}

/// Classify a capture's media type: HTTP Content-Type first, then the URL
/// extension, then magic-byte sniffing, falling back to
/// `application/octet-stream`.
pub fn detect_mime(http: Option<&HttpPayload<'_>>, url: &str, leading: &[u8]) -> MimeClass {
    detect_mime_ct(
        http.and_then(|h| h.content_type.as_deref()),
        url,
        leading,
    )
}

pub(crate) fn detect_mime_ct(content_type: Option<&str>, url: &str, leading: &[u8]) -> MimeClass {
    if let Some(ct) = content_type {
        return MimeClass {
            media_type: ct.to_string(),
            origin: MimeOrigin::HttpHeader,
        };
    }
    if let Some(mt) = extension_mime(url) {
        return MimeClass {
            media_type: mt.to_string(),
            origin: MimeOrigin::Extension,
        };
    }
    if let Some(mt) = magic_mime(leading) {
        return MimeClass {
            media_type: mt.to_string(),
            origin: MimeOrigin::MagicBytes,
        };
    }
    MimeClass {
        media_type: "application/octet-stream".to_string(),
        origin: MimeOrigin::Fallback,
    }
}

/// The valid-page filter: HTML captured successfully. True iff the record is
/// a response (or ARC entry), the HTTP status is 200 (absent allowed only for
/// ARC entries, which may predate HTTP envelopes), the MIME classifies as
/// HTML — response header first, else `.htm`/`.html` URL extension — and the
/// URL is not a robots.txt fetch.
pub fn is_valid_page(record: &ArchiveRecord, http: &HttpPayload<'_>) -> bool {
    match record.kind {
        RecordKind::Response | RecordKind::ArcEntry => {}
        _ => return false,
    }
    match http.status {
        Some(200) => {}
        None if record.kind == RecordKind::ArcEntry => {}
        _ => return false,
    }
    let url = match &record.target_uri {
        Some(u) => u.as_str(),
        None => return false,
    };
    if url.trim_end_matches('/').ends_with("robots.txt") {
        return false;
    }
    let html = match http.content_type.as_deref() {
        Some(ct) => ct == "text/html" || ct == "application/xhtml+xml",
        None => matches!(extension_mime(url), Some("text/html")),
    };
    html
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archive::split_http;

    fn record(kind: RecordKind, uri: &str, payload: &[u8]) -> ArchiveRecord {
        ArchiveRecord {
            kind,
            target_uri: Some(uri.to_string()),
            timestamp: "20140901120000".to_string(),
            declared_mime: None,
            content_length: payload.len() as u64,
            payload: payload.to_vec(),
            version: Some("WARC/1.0".to_string()),
        }
    }

    #[test]
    fn header_takes_precedence() {
        let http = split_http(b"HTTP/1.1 200 OK\r\nContent-Type: text/html; charset=utf-8\r\n\r\nx");
        let m = detect_mime(Some(&http), "http://a.com/image.png", b"GIF89a");
        assert_eq!(m.media_type, "text/html");
        assert_eq!(m.origin, MimeOrigin::HttpHeader);
    }

    #[test]
    fn extension_then_magic() {
        let m = detect_mime(None, "http://a.com/x.gif", b"GIF89a...");
        assert_eq!(m.media_type, "image/gif");
        assert_eq!(m.origin, MimeOrigin::Extension);

        let m = detect_mime(None, "http://a.com/x.bin", &[0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a]);
        assert_eq!(m.media_type, "image/png");
        assert_eq!(m.origin, MimeOrigin::MagicBytes);
    }

    #[test]
    fn fallback_is_octet_stream() {
        let m = detect_mime(None, "http://a.com/mystery", b"\x00\x01\x02");
        assert_eq!(m.media_type, "application/octet-stream");
        assert_eq!(m.origin, MimeOrigin::Fallback);
    }

    #[test]
    fn html_sniffing() {
        let m = detect_mime(None, "http://a.com/page", b"  <!DOCTYPE html><html>");
        assert_eq!(m.media_type, "text/html");
    }

    #[test]
    fn valid_page_cases() {
        let ok = record(
            RecordKind::Response,
            "http://a.com/p.html",
            b"HTTP/1.1 200 OK\r\nContent-Type: text/html\r\n\r\n<html></html>",
        );
        assert!(is_valid_page(&ok, &ok.http()));

        let not_found = record(
            RecordKind::Response,
            "http://a.com/p.html",
            b"HTTP/1.1 404 Not Found\r\nContent-Type: text/html\r\n\r\ngone",
        );
        assert!(!is_valid_page(&not_found, &not_found.http()));

        let png = record(
            RecordKind::Response,
            "http://a.com/logo.png",
            b"HTTP/1.1 200 OK\r\nContent-Type: image/png\r\n\r\n\x89PNG",
        );
        assert!(!is_valid_page(&png, &png.http()));

        let robots = record(
            RecordKind::Response,
            "http://a.com/robots.txt",
            b"HTTP/1.1 200 OK\r\nContent-Type: text/html\r\n\r\nUser-agent: *",
        );
        assert!(!is_valid_page(&robots, &robots.http()));
    }

    #[test]
    fn arc_entry_without_envelope_uses_extension() {
        let bare = record(RecordKind::ArcEntry, "http://a.com/old.html", b"<html>old</html>");
        assert!(is_valid_page(&bare, &bare.http()));

        let bare_no_ext = record(RecordKind::ArcEntry, "http://a.com/old", b"<html>old</html>");
        assert!(!is_valid_page(&bare_no_ext, &bare_no_ext.http()));
    }

    #[test]
    fn request_and_revisit_records_never_pages() {
        let req = record(RecordKind::Request, "http://a.com/p.html", b"GET / HTTP/1.1\r\n\r\n");
        assert!(!is_valid_page(&req, &req.http()));
        let rev = record(RecordKind::Revisit, "http://a.com/p.html", b"HTTP/1.1 200 OK\r\n\r\n");
        assert!(!is_valid_page(&rev, &rev.http()));
    }
}
