//! Synthetic corpora with a known sentiment mix and redundancy rate.
//!
//! Each original review draws its words from a large pseudo-word vocabulary,
//! so two originals share almost no terms. A redundant review copies an
//! original of the same sentiment and swaps about a tenth of its words, which
//! keeps it well above the similarity threshold of its source.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use revex_core::{Corpus, Ingest, IngestConfig, RawReview, RejectionReport, Sentiment};
use serde::{Deserialize, Serialize};

const SYLLABLES: [&str; 24] = [
    "ka", "lo", "mi", "ne", "ru", "sa", "to", "vi", "ze", "qu", "fa", "go", "hi", "ju", "be", "do", "pe", "ri", "su",
    "ta", "wo", "xe", "yu", "ci",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub product_id: String,
    /// Reviews per sentiment: positive, neutral, negative.
    pub mix: [usize; 3],
    /// Fraction of each sentiment's reviews that are near-duplicates.
    pub redundancy: f64,
    /// Fraction of words replaced in a near-duplicate.
    pub substitution: f64,
    pub min_words: usize,
    pub max_words: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            product_id: "synthetic".into(),
            mix: [100, 100, 100],
            redundancy: 0.0,
            substitution: 0.1,
            min_words: 30,
            max_words: 50,
            seed: 0,
        }
    }
}

/// Ground truth alongside the generated records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCorpus {
    pub records: Vec<RawReview>,
    /// For each record, the index of the original it duplicates.
    pub source: Vec<Option<usize>>,
}

impl SyntheticCorpus {
    pub fn ingest(&self) -> (Corpus, RejectionReport) {
        let mut ingest = Ingest::new(IngestConfig::default());
        for (i, r) in self.records.iter().enumerate() {
            ingest.push(i + 1, r.clone());
        }
        ingest.finish()
    }

    pub fn redundant_count(&self) -> usize {
        self.source.iter().filter(|s| s.is_some()).count()
    }
}

fn pseudo_word(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(3..=4);
    (0..n)
        .map(|_| SYLLABLES[rng.random_range(0..SYLLABLES.len())])
        .collect()
}

fn stars_for(rng: &mut ChaCha8Rng, s: Sentiment) -> i64 {
    match s {
        Sentiment::Positive => rng.random_range(4..=5),
        Sentiment::Neutral => 3,
        Sentiment::Negative => rng.random_range(1..=2),
    }
}

pub fn generate(config: &SyntheticConfig) -> SyntheticCorpus {
    assert!(config.min_words >= 10 && config.min_words <= config.max_words && config.max_words <= 100);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut words: Vec<Vec<String>> = Vec::new();
    let mut sentiments = Vec::new();
    let mut source = Vec::new();

    for (k, &count) in config.mix.iter().enumerate() {
        let sentiment = Sentiment::ALL[k];
        let redundant = ((count as f64) * config.redundancy).round() as usize;
        let originals = count - redundant.min(count.saturating_sub(1));
        let first = words.len();
        for _ in 0..originals.min(count) {
            let len = rng.random_range(config.min_words..=config.max_words);
            words.push((0..len).map(|_| pseudo_word(&mut rng)).collect());
            sentiments.push(sentiment);
            source.push(None);
        }
        for _ in originals.min(count)..count {
            let from = first + rng.random_range(0..originals);
            let mut copy = words[from].clone();
            let swaps = ((copy.len() as f64) * config.substitution).round() as usize;
            for _ in 0..swaps {
                let at = rng.random_range(0..copy.len());
                copy[at] = pseudo_word(&mut rng);
            }
            words.push(copy);
            sentiments.push(sentiment);
            source.push(Some(from));
        }
    }

    // Interleave so review order carries no sentiment signal.
    let mut order: Vec<usize> = (0..words.len()).collect();
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut position = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        position[old] = new;
    }

    let mut records = Vec::with_capacity(order.len());
    let mut new_source = Vec::with_capacity(order.len());
    for (new, &old) in order.iter().enumerate() {
        let stars = stars_for(&mut rng, sentiments[old]);
        records.push(RawReview {
            product_id: config.product_id.clone(),
            review_id: format!("{}-{new:04}", config.product_id),
            title: None,
            text: words[old].join(" "),
            stars,
            product_name: Some(format!("Synthetic product {}", config.product_id)),
        });
        new_source.push(source[old].map(|s| position[s]));
    }
    SyntheticCorpus {
        records,
        source: new_source,
    }
}
