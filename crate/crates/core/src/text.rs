//! Tokenization and the cheap text heuristics used at ingestion.

use alloc::string::String;
use alloc::vec::Vec;

/// Built-in English stopword list, sorted so lookups can binary search.
pub const STOPWORDS: &[&str] = &[
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "also",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "don",
    "down",
    "during",
    "each",
    "even",
    "few",
    "for",
    "from",
    "further",
    "get",
    "got",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "just",
    "me",
    "more",
    "most",
    "much",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "one",
    "only",
    "or",
    "other",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "really",
    "same",
    "she",
    "should",
    "so",
    "some",
    "such",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "too",
    "under",
    "until",
    "up",
    "very",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "which",
    "while",
    "who",
    "whom",
    "why",
    "will",
    "with",
    "would",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
];

/// Minimum token length in characters.
pub const MIN_TOKEN_CHARS: usize = 2;

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// Lowercased alphanumeric runs of at least [`MIN_TOKEN_CHARS`] characters,
/// stopwords included.
pub fn raw_tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= MIN_TOKEN_CHARS)
        .map(|t| t.to_lowercase())
}

/// Content tokens: [`raw_tokens`] minus stopwords, in document order.
pub fn tokenize(text: &str) -> Vec<String> {
    raw_tokens(text).filter(|t| !is_stopword(t)).collect()
}

/// Whitespace-delimited token count of title and text together.
pub fn word_count(title: Option<&str>, text: &str) -> usize {
    title.map_or(0, |t| t.split_whitespace().count()) + text.split_whitespace().count()
}

/// Title and body joined the way every text-level consumer sees a review.
pub fn full_text(title: Option<&str>, text: &str) -> String {
    match title {
        Some(t) if !t.is_empty() => {
            let mut s = String::with_capacity(t.len() + 1 + text.len());
            s.push_str(t);
            s.push('\n');
            s.push_str(text);
            s
        }
        _ => String::from(text),
    }
}

/// Detects markup tags (`<b>`, `</p>`, `<!-- -->`, `<br/>`) and character
/// entities (`&amp;`, `&#39;`).
pub fn contains_html(text: &str) -> bool {
    let bytes = text.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'<' => {
                let rest = &bytes[i + 1..];
                let opens_tag = match rest.first() {
                    Some(b'/') | Some(b'!') => rest.get(1).is_some_and(|c| c.is_ascii_alphabetic() || *c == b'-'),
                    Some(c) => c.is_ascii_alphabetic(),
                    None => false,
                };
                if opens_tag && rest.iter().take(256).any(|&c| c == b'>') {
                    return true;
                }
            }
            b'&' => {
                let rest = &bytes[i + 1..];
                let (body, numeric) = match rest.first() {
                    Some(b'#') => (&rest[1..], true),
                    _ => (rest, false),
                };
                let len = body
                    .iter()
                    .take_while(|c| {
                        if numeric {
                            c.is_ascii_digit()
                        } else {
                            c.is_ascii_alphabetic()
                        }
                    })
                    .count();
                let min_len = if numeric { 1 } else { 2 };
                if (min_len..=10).contains(&len) && body.get(len) == Some(&b';') {
                    return true;
                }
            }
            _ => {}
        }
    }
    false
}

/// Fraction of characters that are neither printable ASCII nor ASCII
/// whitespace. Empty text scores 0.
pub fn non_ascii_ratio(text: &str) -> f64 {
    let mut total = 0usize;
    let mut foreign = 0usize;
    for c in text.chars() {
        total += 1;
        if !(c == ' ' || c.is_ascii_graphic() || c.is_ascii_whitespace()) {
            foreign += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        foreign as f64 / total as f64
    }
}
