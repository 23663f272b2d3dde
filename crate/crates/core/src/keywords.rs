//! Document-level co-occurring word pairs used as keyword filters.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::Review;
use crate::text;

pub const DEFAULT_TOP_K: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KeywordPair {
    pub word_a: String,
    pub word_b: String,
    /// Number of reviews containing both words.
    pub frequency: usize,
}

impl KeywordPair {
    pub fn words(&self) -> [&str; 2] {
        [&self.word_a, &self.word_b]
    }
}

/// Top `k` word pairs by document frequency, ties broken by `(word_a, word_b)`.
pub fn extract_keywords<'a>(reviews: impl IntoIterator<Item = &'a Review>, k: usize) -> Vec<KeywordPair> {
    // Intern tokens so the pair table stays small; ordering is recovered from
    // the strings at the end.
    let mut vocab: BTreeMap<String, u32> = BTreeMap::new();
    let mut words: Vec<String> = Vec::new();
    let mut pairs: BTreeMap<(u32, u32), usize> = BTreeMap::new();

    for review in reviews {
        let doc: BTreeSet<String> = text::tokenize(&review.full_text()).into_iter().collect();
        let ids: Vec<u32> = doc
            .into_iter()
            .map(|t| {
                *vocab.entry(t.clone()).or_insert_with(|| {
                    words.push(t);
                    (words.len() - 1) as u32
                })
            })
            .collect();
        // `doc` iterates in lexicographic order, so ids[i] < ids[j] by string
        // whenever i < j.
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                *pairs.entry((ids[i], ids[j])).or_insert(0) += 1;
            }
        }
    }

    let mut ranked: Vec<((u32, u32), usize)> = pairs.into_iter().collect();
    ranked.sort_by(|(pa, fa), (pb, fb)| {
        fb.cmp(fa)
            .then_with(|| words[pa.0 as usize].cmp(&words[pb.0 as usize]))
            .then_with(|| words[pa.1 as usize].cmp(&words[pb.1 as usize]))
    });
    ranked
        .into_iter()
        .take(k)
        .map(|((a, b), frequency)| KeywordPair {
            word_a: words[a as usize].clone(),
            word_b: words[b as usize].clone(),
            frequency,
        })
        .collect()
}
