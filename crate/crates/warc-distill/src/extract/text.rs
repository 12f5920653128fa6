use super::html::{
    collapse_whitespace, decode_bytes, decode_entities, sniff_meta_charset, HtmlEvent, HtmlScanner,
};

/// Plain text of an HTML document: script/style/comment content removed,
/// tags stripped (each acts as a word separator), standard entities decoded,
/// whitespace collapsed. Bytes decode per a `<meta charset>` declaration when
/// present and supported, else lossy UTF-8. Total; never fails.
pub fn extract_text(html: &[u8]) -> String {
    extract_text_with_charset(html, None)
}

/// Like [`extract_text`] but honoring a transport-declared charset (e.g.
/// from the HTTP Content-Type header), which takes precedence over any
/// in-document declaration.
pub fn extract_text_with_charset(html: &[u8], charset: Option<&str>) -> String {
    let charset = charset
        .map(str::to_string)
        .or_else(|| sniff_meta_charset(html));
    let decoded = decode_bytes(html, charset.as_deref());
    strip_tags(&decoded)
}

fn strip_tags(html: &str) -> String {
    let mut scanner = HtmlScanner::new(html);
    let mut out = String::with_capacity(html.len() / 2);
    while let Some(event) = scanner.next_event() {
        match event {
            HtmlEvent::Text(t) => out.push_str(&decode_entities(t)),
            HtmlEvent::Tag { name, closing, .. } => {
                out.push(' ');
                if !closing && (name == "script" || name == "style") {
                    scanner.skip_raw_content(&name);
                }
            }
            HtmlEvent::Skip => out.push(' '),
        }
    }
    collapse_whitespace(&out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_markup_strips() {
        assert_eq!(
            extract_text(b"<html><body><p>Hello <b>world</b></p></body></html>"),
            "Hello world"
        );
    }

    #[test]
    fn script_and_style_content_removed() {
        assert_eq!(extract_text(b"<script>x=1</script>Hi"), "Hi");
        assert_eq!(extract_text(b"<style>p { color: red }</style>ok"), "ok");
        assert_eq!(
            extract_text(b"<script type=\"text/javascript\">if (a<b) { alert('<p>') }</script>text"),
            "text"
        );
    }

    #[test]
    fn comments_removed() {
        assert_eq!(extract_text(b"a<!-- hidden <b>markup</b> -->b"), "a b");
    }

    #[test]
    fn entities_decode() {
        assert_eq!(extract_text(b"&amp;&lt;"), "&<");
    }

    #[test]
    fn block_tags_separate_words() {
        assert_eq!(extract_text(b"<p>a</p><p>b</p>"), "a b");
    }

    #[test]
    fn empty_and_markup_only() {
        assert_eq!(extract_text(b""), "");
        assert_eq!(extract_text(b"<html><body><br/></body></html>"), "");
    }

    #[test]
    fn latin1_meta_charset_honored() {
        let doc = b"<html><head><meta charset=\"iso-8859-1\"></head><body>caf\xe9</body></html>";
        assert_eq!(extract_text(doc), "café");
    }

    #[test]
    fn header_charset_takes_precedence() {
        let doc = b"<meta charset=\"utf-8\">caf\xe9";
        assert_eq!(extract_text_with_charset(doc, Some("iso-8859-1")), "café");
    }

    #[test]
    fn unclosed_script_swallows_rest() {
        assert_eq!(extract_text(b"before<script>var x = 'no end"), "before");
    }
}
