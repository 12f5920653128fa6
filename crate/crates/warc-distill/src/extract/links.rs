use url::Url;

use super::html::{collapse_whitespace, decode_entities, HtmlEvent, HtmlScanner};

/// One harvested hyperlink. Both URLs are absolute; the anchor text is
/// whitespace-normalized and may be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperlink {
    pub src: String,
    pub dest: String,
    pub anchor: String,
}

/// Harvest `<a href>` hyperlinks in document order. Relative hrefs resolve
/// against `base_url`; fragment-only, `javascript:`, `mailto:`, and empty
/// hrefs are dropped. Anchor text is the tag's inner text with markup
/// stripped and whitespace collapsed. Malformed HTML never fails — an
/// unparseable `base_url` just yields no links.
pub fn extract_links(base_url: &str, html: &[u8]) -> Vec<Hyperlink> {
    let base = match Url::parse(base_url.trim()) {
        Ok(u) => u,
        Err(_) => return Vec::new(),
    };
    let src = base.to_string();
    let text = String::from_utf8_lossy(html);
    let mut scanner = HtmlScanner::new(&text);

    let mut out = Vec::new();
    // (dest, anchor-in-progress) while inside an <a> with a usable href;
    // None while inside an <a> whose href was dropped
    let mut open: Option<Option<(String, String)>> = None;

    let finish = |capture: &mut Option<Option<(String, String)>>, out: &mut Vec<Hyperlink>| {
        if let Some(Some((dest, anchor))) = capture.take() {
            out.push(Hyperlink {
                src: src.clone(),
                dest,
                anchor: collapse_whitespace(&anchor),
            });
        }
    };

    while let Some(event) = scanner.next_event() {
        match event {
            HtmlEvent::Text(t) => {
                if let Some(Some((_, anchor))) = &mut open {
                    anchor.push_str(&decode_entities(t));
                }
            }
            HtmlEvent::Tag {
                name,
                closing,
                attrs,
            } => {
                if name == "a" {
                    finish(&mut open, &mut out);
                    if !closing {
                        let href = attrs
                            .iter()
                            .find(|(n, _)| n == "href")
                            .map(|(_, v)| v.as_str());
                        open = Some(resolve_href(&base, href).map(|dest| (dest, String::new())));
                    }
                } else if !closing && (name == "script" || name == "style") {
                    scanner.skip_raw_content(&name);
                } else if let Some(Some((_, anchor))) = &mut open {
                    // tags inside the anchor separate words
                    anchor.push(' ');
                }
            }
            HtmlEvent::Skip => {}
        }
    }
    finish(&mut open, &mut out);
    out
}

fn resolve_href(base: &Url, href: Option<&str>) -> Option<String> {
    let href = href?.trim();
    if href.is_empty() || href.starts_with('#') {
        return None;
    }
    let lower = href.to_ascii_lowercase();
    if lower.starts_with("javascript:") || lower.starts_with("mailto:") {
        return None;
    }
    base.join(href).ok().map(|u| u.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_relative_link() {
        let links = extract_links("http://a.com/", b"<a href='/x'>Go</a>");
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].src, "http://a.com/");
        assert_eq!(links[0].dest, "http://a.com/x");
        assert_eq!(links[0].anchor, "Go");
    }

    #[test]
    fn no_links() {
        assert!(extract_links("http://a.com/", b"<p>no links</p>").is_empty());
    }

    #[test]
    fn dropped_href_schemes() {
        let html = b"<a href='#frag'>f</a><a href='javascript:void(0)'>j</a>\
                     <a href='mailto:x@y.z'>m</a><a href=''>e</a><a>none</a>";
        assert!(extract_links("http://a.com/", html).is_empty());
    }

    #[test]
    fn anchor_text_strips_nested_markup() {
        let links = extract_links(
            "http://a.com/",
            b"<a href=\"/p\"> Click <b>here</b>\n now </a>",
        );
        assert_eq!(links[0].anchor, "Click here now");
    }

    #[test]
    fn document_order_and_absolute_dests() {
        let html = b"<a href='http://b.org/1'>one</a> text <a href='2.html'>two</a>";
        let links = extract_links("http://a.com/dir/index.html", html);
        assert_eq!(links.len(), 2);
        assert_eq!(links[0].dest, "http://b.org/1");
        assert_eq!(links[1].dest, "http://a.com/dir/2.html");
    }

    #[test]
    fn entity_encoded_href_decodes() {
        let links = extract_links("http://a.com/", b"<a href=\"/x?a=1&amp;b=2\">q</a>");
        assert_eq!(links[0].dest, "http://a.com/x?a=1&b=2");
    }

    #[test]
    fn unparseable_base_yields_nothing() {
        assert!(extract_links("not a url", b"<a href='/x'>Go</a>").is_empty());
    }

    #[test]
    fn unclosed_anchor_finishes_at_end() {
        let links = extract_links("http://a.com/", b"<a href='/x'>dangling");
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].anchor, "dangling");
    }

    #[test]
    fn empty_anchor_text_is_kept() {
        let links = extract_links("http://a.com/", b"<a href='/x'></a>");
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].anchor, "");
    }
}
