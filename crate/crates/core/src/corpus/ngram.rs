use std::collections::HashSet;
use std::hash::Hash;

/// A contiguous window of tokens.
pub type NGram = Vec<String>;

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Splits text into maximal identifier runs and single punctuation symbols.
/// Whitespace separates tokens and is discarded.
pub fn tokenize(text: &str) -> Vec<&str> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if is_ident_char(c) {
            if start.is_none() {
                start = Some(i);
            }
            continue;
        }
        if let Some(s) = start.take() {
            tokens.push(&text[s..i]);
        }
        if !c.is_whitespace() {
            tokens.push(&text[i..i + c.len_utf8()]);
        }
    }
    if let Some(s) = start {
        tokens.push(&text[s..]);
    }
    tokens
}

/// All contiguous `n`-token windows over the concatenated token stream of
/// `lines`. Empty when there are fewer than `n` tokens.
pub fn ngram_set<S: AsRef<str>>(lines: &[S], n: usize) -> HashSet<NGram> {
    assert!(n >= 1, "n-gram size must be positive");
    let stream: Vec<&str> = lines.iter().flat_map(|l| tokenize(l.as_ref())).collect();
    if stream.len() < n {
        return HashSet::new();
    }
    stream
        .windows(n)
        .map(|w| w.iter().map(|t| t.to_string()).collect())
        .collect()
}

/// |A ∩ B| / |A ∪ B|, with two empty sets treated as identical.
pub fn jaccard<T: Eq + Hash>(a: &HashSet<T>, b: &HashSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let inter = small.iter().filter(|x| large.contains(*x)).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grams(items: &[&[&str]]) -> HashSet<NGram> {
        items
            .iter()
            .map(|g| g.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    #[test]
    fn tokenizer_splits_identifiers_and_punctuation() {
        assert_eq!(tokenize("x_1 += foo(b)"), vec!["x_1", "+", "=", "foo", "(", "b", ")"]);
        assert_eq!(tokenize("   "), Vec::<&str>::new());
    }

    #[test]
    fn unigrams_are_the_token_set() {
        assert_eq!(ngram_set(&["a b c"], 1), grams(&[&["a"], &["b"], &["c"]]));
    }

    #[test]
    fn single_window() {
        assert_eq!(ngram_set(&["a b c"], 3), grams(&[&["a", "b", "c"]]));
    }

    #[test]
    fn windows_cross_line_boundaries_and_collapse_duplicates() {
        let got = ngram_set(&["x = 1", "y = 1"], 2);
        let want = grams(&[&["x", "="], &["=", "1"], &["1", "y"], &["y", "="]]);
        assert_eq!(got, want);
    }

    #[test]
    fn too_few_tokens_is_empty() {
        assert!(ngram_set(&["a b"], 3).is_empty());
    }

    #[test]
    fn jaccard_cases() {
        let a: HashSet<&str> = ["a", "b", "c"].into();
        let b: HashSet<&str> = ["b", "c", "d"].into();
        let d: HashSet<&str> = ["x", "y"].into();
        let empty: HashSet<&str> = HashSet::new();
        assert_eq!(jaccard(&a, &a), 1.0);
        assert_eq!(jaccard(&a, &d), 0.0);
        assert_eq!(jaccard(&a, &b), 0.5);
        assert_eq!(jaccard(&empty, &empty), 1.0);
        assert_eq!(jaccard(&a, &empty), 0.0);
    }
}
