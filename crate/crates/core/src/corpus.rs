//! Reviews, products, and the ingestion filters that decide which raw records
//! make it into a corpus.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::text;

/// Star-derived valence of a review.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Sentiment {
    Positive,
    Neutral,
    Negative,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Sentiment::Positive, Sentiment::Neutral, Sentiment::Negative];

    /// 1–2 stars are negative, 3 neutral, 4–5 positive.
    pub fn from_stars(stars: u8) -> Option<Sentiment> {
        match stars {
            1 | 2 => Some(Sentiment::Negative),
            3 => Some(Sentiment::Neutral),
            4 | 5 => Some(Sentiment::Positive),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Positive => "positive",
            Sentiment::Neutral => "neutral",
            Sentiment::Negative => "negative",
        }
    }

    pub fn parse(s: &str) -> Option<Sentiment> {
        Sentiment::ALL.into_iter().find(|x| x.as_str().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-sentiment counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SentimentCounts {
    pub positive: usize,
    pub neutral: usize,
    pub negative: usize,
}

impl SentimentCounts {
    pub fn get(&self, s: Sentiment) -> usize {
        match s {
            Sentiment::Positive => self.positive,
            Sentiment::Neutral => self.neutral,
            Sentiment::Negative => self.negative,
        }
    }

    pub fn get_mut(&mut self, s: Sentiment) -> &mut usize {
        match s {
            Sentiment::Positive => &mut self.positive,
            Sentiment::Neutral => &mut self.neutral,
            Sentiment::Negative => &mut self.negative,
        }
    }

    pub fn total(&self) -> usize {
        self.positive + self.neutral + self.negative
    }

    /// Sentiments with a non-zero count, in canonical order.
    pub fn present(&self) -> impl Iterator<Item = Sentiment> + '_ {
        Sentiment::ALL.into_iter().filter(|&s| self.get(s) > 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Review {
    pub review_id: String,
    pub product_id: String,
    pub title: Option<String>,
    pub text: String,
    pub stars: u8,
    pub sentiment: Sentiment,
    pub word_count: usize,
}

impl Review {
    /// Title and text joined by a newline.
    pub fn full_text(&self) -> String {
        text::full_text(self.title.as_deref(), &self.text)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Product {
    pub product_id: String,
    pub name: String,
    pub review_ids: Vec<String>,
    pub n: usize,
    pub sentiment_totals: SentimentCounts,
}

/// A record as it appears in a dataset file, before validation.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RawReview {
    pub product_id: String,
    pub review_id: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub title: Option<String>,
    pub text: String,
    pub stars: i64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub product_name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IngestConfig {
    pub min_words: usize,
    pub max_words: usize,
    /// Reviews whose non-ASCII character ratio exceeds this are treated as
    /// non-English.
    pub max_non_ascii_ratio: f64,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            min_words: 10,
            max_words: 100,
            max_non_ascii_ratio: 0.20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RejectReason {
    Malformed,
    DuplicateId,
    Html,
    NonEnglish,
    TooShort,
    TooLong,
    NoTerms,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RecordError {
    /// 1-based record (line) number in the source.
    pub record: usize,
    pub review_id: Option<String>,
    pub reason: RejectReason,
    pub message: String,
}

/// Counts per rejection reason plus the per-record details.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RejectionReport {
    pub total_records: usize,
    pub accepted: usize,
    pub malformed: usize,
    pub duplicate_id: usize,
    pub html: usize,
    pub non_english: usize,
    pub too_short: usize,
    pub too_long: usize,
    pub no_terms: usize,
    pub errors: Vec<RecordError>,
}

impl RejectionReport {
    pub fn rejected(&self) -> usize {
        self.total_records - self.accepted
    }

    fn reject(&mut self, record: usize, review_id: Option<String>, reason: RejectReason, message: String) {
        let counter = match reason {
            RejectReason::Malformed => &mut self.malformed,
            RejectReason::DuplicateId => &mut self.duplicate_id,
            RejectReason::Html => &mut self.html,
            RejectReason::NonEnglish => &mut self.non_english,
            RejectReason::TooShort => &mut self.too_short,
            RejectReason::TooLong => &mut self.too_long,
            RejectReason::NoTerms => &mut self.no_terms,
        };
        *counter += 1;
        self.errors.push(RecordError {
            record,
            review_id,
            reason,
            message,
        });
    }
}

/// An immutable, filtered set of products and their reviews.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    products: Vec<Product>,
    reviews: Vec<Review>,
    review_index: BTreeMap<String, usize>,
    product_index: BTreeMap<String, usize>,
}

impl Corpus {
    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn reviews(&self) -> &[Review] {
        &self.reviews
    }

    pub fn product(&self, product_id: &str) -> Result<&Product> {
        self.product_index
            .get(product_id)
            .map(|&i| &self.products[i])
            .ok_or_else(|| Error::UnknownProduct(product_id.to_string()))
    }

    pub fn review(&self, review_id: &str) -> Option<&Review> {
        self.review_index.get(review_id).map(|&i| &self.reviews[i])
    }

    /// Reviews of one product in ingestion order.
    pub fn product_reviews(&self, product_id: &str) -> Result<Vec<&Review>> {
        let product = self.product(product_id)?;
        Ok(product
            .review_ids
            .iter()
            .map(|id| &self.reviews[self.review_index[id]])
            .collect())
    }

    /// Builds a corpus from already-validated reviews. Duplicate ids keep the
    /// first occurrence.
    pub fn from_reviews(reviews: impl IntoIterator<Item = Review>) -> Corpus {
        let mut corpus = Corpus::default();
        for review in reviews {
            corpus.insert(review, None);
        }
        corpus
    }

    fn insert(&mut self, review: Review, product_name: Option<String>) -> bool {
        if self.review_index.contains_key(&review.review_id) {
            return false;
        }
        let pidx = match self.product_index.get(&review.product_id) {
            Some(&i) => i,
            None => {
                let i = self.products.len();
                self.products.push(Product {
                    product_id: review.product_id.clone(),
                    name: product_name.clone().unwrap_or_else(|| review.product_id.clone()),
                    review_ids: Vec::new(),
                    n: 0,
                    sentiment_totals: SentimentCounts::default(),
                });
                self.product_index.insert(review.product_id.clone(), i);
                i
            }
        };
        let product = &mut self.products[pidx];
        if let Some(name) = product_name {
            if product.name == product.product_id {
                product.name = name;
            }
        }
        product.review_ids.push(review.review_id.clone());
        product.n += 1;
        *product.sentiment_totals.get_mut(review.sentiment) += 1;
        self.review_index.insert(review.review_id.clone(), self.reviews.len());
        self.reviews.push(review);
        true
    }
}

/// Streaming ingestion: feed records one by one, then [`Ingest::finish`].
#[derive(Debug, Default)]
pub struct Ingest {
    config: IngestConfig,
    corpus: Corpus,
    report: RejectionReport,
}

impl Ingest {
    pub fn new(config: IngestConfig) -> Self {
        Ingest {
            config,
            corpus: Corpus::default(),
            report: RejectionReport::default(),
        }
    }

    /// Records a line that could not be parsed into a [`RawReview`].
    pub fn reject_malformed(&mut self, record: usize, message: impl Into<String>) {
        self.report.total_records += 1;
        self.report
            .reject(record, None, RejectReason::Malformed, message.into());
    }

    /// Validates and (if it passes every filter) admits one record.
    /// Returns whether the record was accepted.
    pub fn push(&mut self, record: usize, raw: RawReview) -> bool {
        self.report.total_records += 1;
        match self.validate(&raw) {
            Ok((stars, sentiment, word_count)) => {
                let RawReview {
                    product_id,
                    review_id,
                    title,
                    text,
                    product_name,
                    ..
                } = raw;
                let review = Review {
                    review_id,
                    product_id,
                    title,
                    text,
                    stars,
                    sentiment,
                    word_count,
                };
                let inserted = self.corpus.insert(review, product_name);
                debug_assert!(inserted);
                self.report.accepted += 1;
                true
            }
            Err((reason, message)) => {
                let id = if raw.review_id.is_empty() {
                    None
                } else {
                    Some(raw.review_id)
                };
                self.report.reject(record, id, reason, message);
                false
            }
        }
    }

    fn validate(&self, raw: &RawReview) -> core::result::Result<(u8, Sentiment, usize), (RejectReason, String)> {
        if raw.review_id.is_empty() || raw.product_id.is_empty() {
            return Err((RejectReason::Malformed, "empty review_id or product_id".to_string()));
        }
        let stars = u8::try_from(raw.stars).ok().filter(|s| (1..=5).contains(s));
        let Some(stars) = stars else {
            return Err((
                RejectReason::Malformed,
                alloc::format!("stars {} outside 1..5", raw.stars),
            ));
        };
        let sentiment = Sentiment::from_stars(stars).expect("stars validated");
        if self.corpus.review_index.contains_key(&raw.review_id) {
            return Err((
                RejectReason::DuplicateId,
                alloc::format!("duplicate review_id {}", raw.review_id),
            ));
        }
        let title = raw.title.as_deref();
        let body = text::full_text(title, &raw.text);
        if text::contains_html(&body) {
            return Err((RejectReason::Html, "contains HTML markup".to_string()));
        }
        let ratio = text::non_ascii_ratio(&body);
        if ratio > self.config.max_non_ascii_ratio {
            return Err((RejectReason::NonEnglish, alloc::format!("non-ASCII ratio {ratio:.3}")));
        }
        let words = text::word_count(title, &raw.text);
        if words < self.config.min_words {
            return Err((RejectReason::TooShort, alloc::format!("{words} words")));
        }
        if words > self.config.max_words {
            return Err((RejectReason::TooLong, alloc::format!("{words} words")));
        }
        if text::raw_tokens(&body).next().is_none() {
            return Err((RejectReason::NoTerms, "no alphanumeric terms".to_string()));
        }
        Ok((stars, sentiment, words))
    }

    pub fn finish(self) -> (Corpus, RejectionReport) {
        (self.corpus, self.report)
    }
}
