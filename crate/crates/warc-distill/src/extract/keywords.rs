use super::ExtractError;

/// Case-insensitive whole-token keyword counts. Text splits on
/// non-alphanumeric boundaries; each keyword must match a whole token.
/// Keywords keep their given spelling in the output, deduplicated
/// case-insensitively with the first spelling winning.
pub fn keyword_counts(text: &str, keywords: &[String]) -> Result<Vec<(String, u64)>, ExtractError> {
    if keywords.is_empty() {
        return Err(ExtractError::EmptyKeywordList);
    }
    if keywords.iter().any(|k| k.trim().is_empty()) {
        return Err(ExtractError::EmptyKeyword);
    }

    let mut order: Vec<(String, String)> = Vec::new(); // (lowercase, as given)
    for k in keywords {
        let lower = k.trim().to_lowercase();
        if !order.iter().any(|(l, _)| *l == lower) {
            order.push((lower, k.trim().to_string()));
        }
    }

    let mut counts = vec![0u64; order.len()];
    for token in text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
    {
        let token = token.to_lowercase();
        for (i, (lower, _)) in order.iter().enumerate() {
            if *lower == token {
                counts[i] += 1;
            }
        }
    }

    Ok(order
        .into_iter()
        .zip(counts)
        .map(|((_, given), c)| (given, c))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kw(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn simple_counts() {
        let got = keyword_counts("a b a", &kw(&["a"])).unwrap();
        assert_eq!(got, vec![("a".to_string(), 2)]);
    }

    #[test]
    fn case_folding() {
        let got = keyword_counts("Trudeau spoke; trudeau left", &kw(&["trudeau"])).unwrap();
        assert_eq!(got, vec![("trudeau".to_string(), 2)]);
    }

    #[test]
    fn whole_token_only() {
        let got = keyword_counts("cat catalog concatenate cat", &kw(&["cat"])).unwrap();
        assert_eq!(got[0].1, 2);
    }

    #[test]
    fn empty_list_is_an_error() {
        assert!(keyword_counts("anything", &[]).is_err());
        assert!(keyword_counts("anything", &kw(&["ok", " "])).is_err());
    }

    #[test]
    fn zero_counts_still_reported() {
        let got = keyword_counts("nothing here", &kw(&["absent", "here"])).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].1, 0);
        assert_eq!(got[1].1, 1);
    }
}
