use url::Url;

/// Lowercase registrable host of a URL with any leading `www.` labels
/// stripped and the port removed. Total: anything unparseable (including
/// the empty string and relative references) maps to `""`, which matches
/// the non-empty filter applied before domain aggregation.
///
/// Idempotent on its own output: `extract_domain("http://" + d) == d`
/// for every non-empty result `d`.
pub fn extract_domain(url: &str) -> String {
    let parsed = match Url::parse(url.trim()) {
        Ok(u) => u,
        Err(_) => return String::new(),
    };
    let host = match parsed.host_str() {
        Some(h) => h.to_ascii_lowercase(),
        None => return String::new(),
    };
    let mut rest = host.as_str();
    while let Some(stripped) = rest.strip_prefix("www.") {
        rest = stripped;
    }
    rest.trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_www_and_lowercases() {
        assert_eq!(extract_domain("http://www.qc.ca/env/page.html"), "qc.ca");
        assert_eq!(extract_domain("HTTPS://WWW.Example.COM:8080/a?b=c"), "example.com");
    }

    #[test]
    fn unparseable_input_is_empty() {
        assert_eq!(extract_domain(""), "");
        assert_eq!(extract_domain("not a url"), "");
        assert_eq!(extract_domain("/relative/path.html"), "");
        assert_eq!(extract_domain("mailto:someone@example.com"), "");
    }

    #[test]
    fn repeated_www_labels_all_strip() {
        assert_eq!(extract_domain("http://www.www.example.com/"), "example.com");
        // idempotence on own output
        let d = extract_domain("http://www.www.example.com/");
        assert_eq!(extract_domain(&format!("http://{d}")), d);
    }

    #[test]
    fn ip_hosts_pass_through() {
        assert_eq!(extract_domain("http://192.0.2.7:8080/x"), "192.0.2.7");
    }
}
