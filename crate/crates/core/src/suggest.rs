//! Bias-mitigating suggestions.
//!
//! Every unvisited review `u` is scored on two components:
//!
//! * **dissimilarity** `d = 1 - min_v sim(u, v)` over the visited reviews
//!   (or `1 - max` under [`DissimilarityMode::Nearest`]);
//! * **sentiment** `s`, derived from the coefficient of variation of the
//!   per-sentiment visit proportions the reader would have *after* visiting
//!   `u`. A CoV below 1 means `u` keeps reading balanced and scores
//!   `s = 1 - CoV`; otherwise `s = 1 - P_X` for `u`'s own sentiment `X`.
//!
//! The final score is `m_d * d + m_s * s`, where the modifiers
//! `m_Y = 1 - |S_Y| / |S|` are computed from the component flags of
//! previously visited suggestions `S` (both 0.5 while `S` is empty). Each
//! candidate is flagged with its dominating component (`Sentiment` iff
//! `s > d`), which feeds back into the modifiers once the reader visits it.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::corpus::Sentiment;
use crate::error::{Error, Result};
use crate::space::ProductSpace;

pub const DEFAULT_SUGGESTION_COUNT: usize = 5;

/// Which score term dominated a suggestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ScoreComponent {
    Dissimilarity,
    Sentiment,
}

/// Reading of the dissimilarity term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum DissimilarityMode {
    /// `1 - min similarity`: distance to the farthest visited review.
    #[default]
    Farthest,
    /// `1 - max similarity`: distance to the nearest visited review.
    Nearest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SuggestParams {
    pub count: usize,
    pub dissimilarity: DissimilarityMode,
}

impl Default for SuggestParams {
    fn default() -> Self {
        SuggestParams {
            count: DEFAULT_SUGGESTION_COUNT,
            dissimilarity: DissimilarityMode::Farthest,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoredCandidate {
    pub review_id: String,
    /// 1-based position in the served set.
    pub rank: usize,
    pub d: f64,
    pub s: f64,
    pub cov: f64,
    pub score: f64,
    pub component: ScoreComponent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModifierPair {
    pub m_dissimilarity: f64,
    pub m_sentiment: f64,
}

impl ModifierPair {
    /// `m_Y = 1 - |S_Y| / |S|`, or `(0.5, 0.5)` while nothing was visited.
    pub fn from_history(history: &[SuggestionRecord]) -> Self {
        if history.is_empty() {
            return ModifierPair {
                m_dissimilarity: 0.5,
                m_sentiment: 0.5,
            };
        }
        let total = history.len() as f64;
        let dis = history
            .iter()
            .filter(|r| r.component == ScoreComponent::Dissimilarity)
            .count() as f64;
        let sent = total - dis;
        ModifierPair {
            m_dissimilarity: 1.0 - dis / total,
            m_sentiment: 1.0 - sent / total,
        }
    }
}

/// A visited suggestion and the component it was served for.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SuggestionRecord {
    pub review_id: String,
    pub component: ScoreComponent,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SuggestionSet {
    pub ranked: Vec<ScoredCandidate>,
    pub generated_at: u64,
    /// Set when nothing was visited yet and the ranking is the unscored
    /// one-per-sentiment starter set.
    pub cold_start: bool,
}

impl SuggestionSet {
    pub fn empty(generated_at: u64) -> Self {
        SuggestionSet {
            ranked: Vec::new(),
            generated_at,
            cold_start: false,
        }
    }

    pub fn get(&self, review_id: &str) -> Option<&ScoredCandidate> {
        self.ranked.iter().find(|c| c.review_id == review_id)
    }

    pub fn contains(&self, review_id: &str) -> bool {
        self.get(review_id).is_some()
    }
}

/// Coefficient of variation (population standard deviation over mean).
/// All-zero input yields 0.
pub fn coefficient_of_variation(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return 0.0;
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    libm::sqrt(var) / mean
}

/// Scores every unvisited review and returns the top `params.count`,
/// ordered by score descending then review id ascending.
///
/// `unvisited` and `visited` are local indices into `space`. When `visited`
/// is empty the cold-start set is returned instead (see [`cold_start`]).
pub fn get_suggestions(
    space: &ProductSpace,
    unvisited: &[usize],
    visited: &[usize],
    history: &[SuggestionRecord],
    params: &SuggestParams,
    generated_at: u64,
) -> SuggestionSet {
    if unvisited.is_empty() {
        return SuggestionSet::empty(generated_at);
    }
    if visited.is_empty() {
        return cold_start(space, unvisited, params.count, generated_at);
    }

    let totals = space.sentiment_totals();
    let present: Vec<Sentiment> = totals.present().collect();
    let mut base = [0usize; 3];
    for &v in visited {
        base[space.review(v).sentiment.index()] += 1;
    }
    let modifiers = ModifierPair::from_history(history);
    let matrix = space.matrix();

    let mut proportions = Vec::with_capacity(present.len());
    let mut scored: Vec<ScoredCandidate> = unvisited
        .iter()
        .map(|&u| {
            let own = space.review(u).sentiment;
            proportions.clear();
            let mut own_p = 0.0;
            for &x in &present {
                let visited_x = base[x.index()] + usize::from(x == own);
                let p = visited_x as f64 / totals.get(x) as f64;
                if x == own {
                    own_p = p;
                }
                proportions.push(p);
            }
            let cov = coefficient_of_variation(&proportions);

            let row = matrix.row(u);
            let closest = match params.dissimilarity {
                DissimilarityMode::Farthest => visited.iter().map(|&v| row[v]).fold(f64::INFINITY, f64::min),
                DissimilarityMode::Nearest => visited.iter().map(|&v| row[v]).fold(f64::NEG_INFINITY, f64::max),
            };
            let d = 1.0 - closest;
            let s = if cov < 1.0 { 1.0 - cov } else { 1.0 - own_p };
            let score = modifiers.m_dissimilarity * d + modifiers.m_sentiment * s;
            let component = if s > d {
                ScoreComponent::Sentiment
            } else {
                ScoreComponent::Dissimilarity
            };
            ScoredCandidate {
                review_id: space.review(u).review_id.clone(),
                rank: 0,
                d,
                s,
                cov,
                score,
                component,
            }
        })
        .collect();

    scored.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.review_id.cmp(&b.review_id))
    });
    scored.truncate(params.count);
    for (i, c) in scored.iter_mut().enumerate() {
        c.rank = i + 1;
    }
    SuggestionSet {
        ranked: scored,
        generated_at,
        cold_start: false,
    }
}

/// Starter set before any visit: for each present sentiment, the unvisited
/// review with the highest salience (embedding norm), unscored and flagged
/// [`ScoreComponent::Sentiment`].
pub fn cold_start(space: &ProductSpace, unvisited: &[usize], count: usize, generated_at: u64) -> SuggestionSet {
    let mut ranked = Vec::new();
    for sentiment in Sentiment::ALL {
        let best = unvisited
            .iter()
            .copied()
            .filter(|&i| space.review(i).sentiment == sentiment)
            .max_by(|&a, &b| {
                space
                    .salience(a)
                    .partial_cmp(&space.salience(b))
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| space.review(b).review_id.cmp(&space.review(a).review_id))
            });
        if let Some(i) = best {
            ranked.push(ScoredCandidate {
                review_id: space.review(i).review_id.clone(),
                rank: ranked.len() + 1,
                d: 0.0,
                s: 0.0,
                cov: 0.0,
                score: 0.0,
                component: ScoreComponent::Sentiment,
            });
        }
    }
    ranked.truncate(count);
    SuggestionSet {
        ranked,
        generated_at,
        cold_start: true,
    }
}

/// Appends the visited suggestion's flag to `history`. The review must be in
/// the latest served set.
pub fn record_suggestion_visit(
    history: &mut Vec<SuggestionRecord>,
    served: &SuggestionSet,
    review_id: &str,
) -> Result<()> {
    let candidate = served
        .get(review_id)
        .ok_or_else(|| Error::NotSuggested(review_id.to_string()))?;
    history.push(SuggestionRecord {
        review_id: candidate.review_id.clone(),
        component: candidate.component,
    });
    Ok(())
}
