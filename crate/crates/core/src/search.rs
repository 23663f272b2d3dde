//! Conjunctive keyword / sentiment / free-text filtering with highlight spans.
//!
//! Matching is ASCII case-insensitive and anchored at the start of a word, so
//! `price` finds `Price` and `prices` but not `supprice`. Byte offsets are
//! preserved because no case folding rewrites the haystack.

use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::{Review, Sentiment};
use crate::keywords::KeywordPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Field {
    Title,
    Text,
}

/// Byte range `[start, end)` of a match inside a review's title or text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HighlightSpan {
    pub review_id: String,
    pub field: Field,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReviewFilter {
    pub keyword: Option<KeywordPair>,
    pub sentiment: Option<Sentiment>,
    pub query: Option<String>,
}

impl ReviewFilter {
    fn query_term(&self) -> Option<&str> {
        self.query.as_deref().map(str::trim).filter(|q| !q.is_empty())
    }
}

/// All word-start-anchored, ASCII case-insensitive occurrences of `term`.
pub fn find_term(haystack: &str, term: &str) -> Vec<(usize, usize)> {
    let term = term.trim();
    let mut out = Vec::new();
    if term.is_empty() || term.len() > haystack.len() {
        return out;
    }
    let hay = haystack.as_bytes();
    let needle = term.as_bytes();
    let mut i = 0;
    while i + needle.len() <= hay.len() {
        if haystack.is_char_boundary(i)
            && hay[i..i + needle.len()].eq_ignore_ascii_case(needle)
            && haystack[..i].chars().next_back().is_none_or(|c| !c.is_alphanumeric())
        {
            out.push((i, i + needle.len()));
            i += needle.len();
        } else {
            i += 1;
        }
    }
    out
}

pub fn contains_term(review: &Review, term: &str) -> bool {
    review.title.as_deref().is_some_and(|t| !find_term(t, term).is_empty()) || !find_term(&review.text, term).is_empty()
}

/// Whether `review` contains either word of the pair.
pub fn matches_keyword(review: &Review, pair: &KeywordPair) -> bool {
    pair.words().iter().any(|w| contains_term(review, w))
}

fn push_spans(out: &mut Vec<HighlightSpan>, review: &Review, term: &str) {
    if let Some(title) = review.title.as_deref() {
        for (start, end) in find_term(title, term) {
            out.push(HighlightSpan {
                review_id: review.review_id.clone(),
                field: Field::Title,
                start,
                end,
            });
        }
    }
    for (start, end) in find_term(&review.text, term) {
        out.push(HighlightSpan {
            review_id: review.review_id.clone(),
            field: Field::Text,
            start,
            end,
        });
    }
}

/// Applies all supplied filters conjunctively, preserving input order, and
/// returns highlight spans for every matched keyword word and query term.
pub fn filter_reviews<'a>(reviews: &[&'a Review], filter: &ReviewFilter) -> (Vec<&'a Review>, Vec<HighlightSpan>) {
    let query = filter.query_term();
    let mut kept = Vec::new();
    let mut spans = Vec::new();
    for &review in reviews {
        if filter.sentiment.is_some_and(|s| s != review.sentiment) {
            continue;
        }
        if filter.keyword.as_ref().is_some_and(|k| !matches_keyword(review, k)) {
            continue;
        }
        if query.is_some_and(|q| !contains_term(review, q)) {
            continue;
        }
        let before = spans.len();
        if let Some(k) = &filter.keyword {
            for w in k.words() {
                push_spans(&mut spans, review, w);
            }
        }
        if let Some(q) = query {
            push_spans(&mut spans, review, q);
        }
        spans[before..].sort();
        kept.push(review);
    }
    (kept, spans)
}
