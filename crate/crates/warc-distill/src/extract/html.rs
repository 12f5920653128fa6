//! Tolerant HTML scanning shared by the text and link extractors. This is a
//! forgiving tag tokenizer, not a tree builder: broken markup degrades to
//! text, never to a failure.

/// One scanned item. Attribute values arrive entity-decoded; text does not
/// (the consumer decides whether to decode).
pub(crate) enum HtmlEvent<'a> {
    Text(&'a str),
    Tag {
        name: String,
        closing: bool,
        attrs: Vec<(String, String)>,
    },
    /// Comments, doctypes, processing instructions.
    Skip,
}

pub(crate) struct HtmlScanner<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> HtmlScanner<'a> {
    pub fn new(s: &'a str) -> Self {
        HtmlScanner { s, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    /// After an opening `<script>`/`<style>` tag: drop everything up to and
    /// including the matching close tag.
    pub fn skip_raw_content(&mut self, name: &str) {
        let close = format!("</{}", name);
        let rest = self.rest();
        let lower_rest = rest.to_ascii_lowercase();
        match lower_rest.find(&close) {
            Some(i) => {
                let after = &rest[i..];
                match after.find('>') {
                    Some(j) => self.pos += i + j + 1,
                    None => self.pos = self.s.len(),
                }
            }
            None => self.pos = self.s.len(),
        }
    }

    pub fn next_event(&mut self) -> Option<HtmlEvent<'a>> {
        let rest = self.rest();
        if rest.is_empty() {
            return None;
        }
        if !rest.starts_with('<') {
            let end = rest.find('<').unwrap_or(rest.len());
            self.pos += end;
            return Some(HtmlEvent::Text(&rest[..end]));
        }

        // comment
        if rest.starts_with("<!--") {
            match rest.find("-->") {
                Some(i) => self.pos += i + 3,
                None => self.pos = self.s.len(),
            }
            return Some(HtmlEvent::Skip);
        }
        // doctype / processing instruction
        if rest.starts_with("<!") || rest.starts_with("<?") {
            match rest.find('>') {
                Some(i) => self.pos += i + 1,
                None => self.pos = self.s.len(),
            }
            return Some(HtmlEvent::Skip);
        }

        let (closing, body_start) = if rest.starts_with("</") {
            (true, 2)
        } else {
            (false, 1)
        };
        let after = &rest[body_start..];
        let name_len = after
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-' || c == ':'))
            .unwrap_or(after.len());
        if name_len == 0 {
            // "< " or "<3": literal text, consume the '<'
            self.pos += 1;
            return Some(HtmlEvent::Text(&rest[..1]));
        }
        let name = after[..name_len].to_ascii_lowercase();

        let mut i = body_start + name_len;
        let attrs = if closing {
            // closing tags carry no attributes; find '>'
            match rest[i..].find('>') {
                Some(j) => i += j + 1,
                None => i = rest.len(),
            }
            Vec::new()
        } else {
            let bytes = rest.as_bytes();
            let mut attrs = Vec::new();
            loop {
                while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
                if i >= bytes.len() {
                    break;
                }
                if bytes[i] == b'>' {
                    i += 1;
                    break;
                }
                if bytes[i] == b'/' {
                    i += 1;
                    continue;
                }
                // attribute name
                let an_start = i;
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && bytes[i] != b'='
                    && bytes[i] != b'>'
                    && bytes[i] != b'/'
                {
                    i += 1;
                }
                if i == an_start {
                    i += 1; // malformed byte; keep moving
                    continue;
                }
                let an = rest[an_start..i].to_ascii_lowercase();
                while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
                let mut value = String::new();
                if i < bytes.len() && bytes[i] == b'=' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                        i += 1;
                    }
                    if i < bytes.len() && (bytes[i] == b'"' || bytes[i] == b'\'') {
                        let quote = bytes[i];
                        i += 1;
                        let v_start = i;
                        while i < bytes.len() && bytes[i] != quote {
                            i += 1;
                        }
                        value = decode_entities(&rest[v_start..i]);
                        if i < bytes.len() {
                            i += 1; // closing quote
                        }
                    } else {
                        let v_start = i;
                        while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'>'
                        {
                            i += 1;
                        }
                        value = decode_entities(&rest[v_start..i]);
                    }
                }
                attrs.push((an, value));
            }
            attrs
        };

        self.pos += i.max(1);
        Some(HtmlEvent::Tag {
            name,
            closing,
            attrs,
        })
    }
}

/// Decode numeric and common named character entities; unknown entities are
/// left as-is.
pub(crate) fn decode_entities(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        match decode_one_entity(rest) {
            Some((decoded, used)) => {
                out.push_str(&decoded);
                rest = &rest[used..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn decode_one_entity(s: &str) -> Option<(String, usize)> {
    debug_assert!(s.starts_with('&'));
    let semi = s.find(';')?;
    if semi > 12 {
        return None;
    }
    let entity = &s[..=semi];
    let decoded = match entity {
        "&amp;" => "&",
        "&lt;" => "<",
        "&gt;" => ">",
        "&quot;" => "\"",
        "&apos;" => "'",
        "&nbsp;" => "\u{a0}",
        "&copy;" => "\u{a9}",
        "&reg;" => "\u{ae}",
        "&trade;" => "\u{2122}",
        "&mdash;" => "\u{2014}",
        "&ndash;" => "\u{2013}",
        "&lsquo;" => "\u{2018}",
        "&rsquo;" => "\u{2019}",
        "&ldquo;" => "\u{201c}",
        "&rdquo;" => "\u{201d}",
        "&hellip;" => "\u{2026}",
        "&laquo;" => "\u{ab}",
        "&raquo;" => "\u{bb}",
        "&eacute;" => "\u{e9}",
        "&egrave;" => "\u{e8}",
        "&agrave;" => "\u{e0}",
        "&ccedil;" => "\u{e7}",
        "&uuml;" => "\u{fc}",
        "&ouml;" => "\u{f6}",
        "&auml;" => "\u{e4}",
        "&szlig;" => "\u{df}",
        other => {
            if let Some(num) = other.strip_prefix("&#") {
                let num = &num[..num.len() - 1]; // drop ';'
                let code = if let Some(hex) = num.strip_prefix('x').or_else(|| num.strip_prefix('X'))
                {
                    u32::from_str_radix(hex, 16).ok()?
                } else {
                    num.parse::<u32>().ok()?
                };
                let ch = char::from_u32(code)?;
                return Some((ch.to_string(), entity.len()));
            }
            return None;
        }
    };
    Some((decoded.to_string(), entity.len()))
}

/// Collapse whitespace runs (including NBSP) to single spaces and trim.
pub(crate) fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut pending_space = false;
    for ch in s.chars() {
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(ch);
        }
    }
    out
}

/// Decode payload bytes honoring a declared charset where supported,
/// otherwise lossy UTF-8.
pub(crate) fn decode_bytes(bytes: &[u8], charset: Option<&str>) -> String {
    match charset.map(normalize_charset) {
        Some(Charset::Latin1) => bytes.iter().map(|&b| b as char).collect(),
        Some(Charset::Windows1252) => bytes.iter().map(|&b| win1252_char(b)).collect(),
        _ => String::from_utf8_lossy(bytes).into_owned(),
    }
}

enum Charset {
    Utf8,
    Latin1,
    Windows1252,
    Unsupported,
}

fn normalize_charset(name: &str) -> Charset {
    let name = name.trim().trim_matches('"').trim_matches('\'').to_ascii_lowercase();
    match name.as_str() {
        "utf-8" | "utf8" | "us-ascii" | "ascii" => Charset::Utf8,
        "iso-8859-1" | "iso8859-1" | "iso_8859-1" | "latin1" | "latin-1" | "l1" => Charset::Latin1,
        "windows-1252" | "cp1252" | "x-cp1252" => Charset::Windows1252,
        _ => Charset::Unsupported,
    }
}

/// Windows-1252 differs from Latin-1 only in 0x80..=0x9F.
fn win1252_char(b: u8) -> char {
    const HIGH: [char; 32] = [
        '\u{20ac}', '\u{81}', '\u{201a}', '\u{192}', '\u{201e}', '\u{2026}', '\u{2020}',
        '\u{2021}', '\u{2c6}', '\u{2030}', '\u{160}', '\u{2039}', '\u{152}', '\u{8d}',
        '\u{17d}', '\u{8f}', '\u{90}', '\u{2018}', '\u{2019}', '\u{201c}', '\u{201d}',
        '\u{2022}', '\u{2013}', '\u{2014}', '\u{2dc}', '\u{2122}', '\u{161}', '\u{203a}',
        '\u{153}', '\u{9d}', '\u{17e}', '\u{178}',
    ];
    match b {
        0x80..=0x9f => HIGH[(b - 0x80) as usize],
        _ => b as char,
    }
}

/// Sniff a `<meta charset=...>` declaration from the leading bytes, the way
/// browsers pre-scan documents without a transport-level charset.
pub(crate) fn sniff_meta_charset(bytes: &[u8]) -> Option<String> {
    let head = &bytes[..bytes.len().min(1024)];
    let lower: Vec<u8> = head.iter().map(|b| b.to_ascii_lowercase()).collect();
    let needle = b"charset";
    let mut from = 0;
    while let Some(i) = find_sub(&lower[from..], needle) {
        let mut j = from + i + needle.len();
        while j < lower.len() && (lower[j] as char).is_ascii_whitespace() {
            j += 1;
        }
        if j < lower.len() && lower[j] == b'=' {
            j += 1;
            while j < lower.len()
                && ((lower[j] as char).is_ascii_whitespace() || lower[j] == b'"' || lower[j] == b'\'')
            {
                j += 1;
            }
            let start = j;
            while j < lower.len()
                && (lower[j].is_ascii_alphanumeric() || lower[j] == b'-' || lower[j] == b'_')
            {
                j += 1;
            }
            if j > start {
                return Some(String::from_utf8_lossy(&lower[start..j]).into_owned());
            }
        }
        from += i + needle.len();
    }
    None
}

fn find_sub(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack.windows(needle.len()).position(|w| w == needle)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entities_decode() {
        assert_eq!(decode_entities("&amp;&lt;"), "&<");
        assert_eq!(decode_entities("a &#65; &#x42; b"), "a A B b");
        assert_eq!(decode_entities("&unknown; stays"), "&unknown; stays");
        assert_eq!(decode_entities("no entities"), "no entities");
    }

    #[test]
    fn whitespace_collapses() {
        assert_eq!(collapse_whitespace("  a\t\tb \n c  "), "a b c");
        assert_eq!(collapse_whitespace(""), "");
        assert_eq!(collapse_whitespace("   "), "");
    }

    #[test]
    fn charset_decoding() {
        assert_eq!(decode_bytes(b"caf\xe9", Some("iso-8859-1")), "café");
        assert_eq!(decode_bytes(b"\x80", Some("windows-1252")), "\u{20ac}");
        assert_eq!(decode_bytes("café".as_bytes(), Some("utf-8")), "café");
        // unsupported charset falls back to lossy utf-8
        assert_eq!(decode_bytes(b"abc", Some("koi8-r")), "abc");
    }

    #[test]
    fn meta_charset_sniffing() {
        assert_eq!(
            sniff_meta_charset(b"<html><head><meta charset=\"ISO-8859-1\"></head>"),
            Some("iso-8859-1".to_string())
        );
        assert_eq!(
            sniff_meta_charset(
                b"<meta http-equiv=\"Content-Type\" content=\"text/html; charset=utf-8\">"
            ),
            Some("utf-8".to_string())
        );
        assert_eq!(sniff_meta_charset(b"<html>no declaration</html>"), None);
    }
}
