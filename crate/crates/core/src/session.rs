//! Per-reader, per-product exploration state and the Visit / Coverage /
//! Distribution metrics.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::corpus::{Review, Sentiment, SentimentCounts};
use crate::error::{Error, Result};
use crate::space::ProductSpace;
use crate::suggest::{self, SuggestParams, SuggestionRecord, SuggestionSet};

pub const DEFAULT_SKEW_THRESHOLD: f64 = 0.07;
pub const MIN_HOVER_MS: u64 = 1000;
pub const MAX_HOVER_MS: u64 = 5000;

/// Engine knobs shared by every session.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct EngineConfig {
    pub skew_threshold: f64,
    pub suggest: SuggestParams,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            skew_threshold: DEFAULT_SKEW_THRESHOLD,
            suggest: SuggestParams::default(),
        }
    }
}

/// UI component an interaction happened on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Component {
    ProductSelect,
    Keyword,
    Sentiment,
    Metrics,
    Review,
    Suggestion,
    Search,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Action {
    Click,
    HoverRead,
    Filter,
    View,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum VisitMethod {
    Click,
    Hover,
}

impl VisitMethod {
    pub fn action(self) -> Action {
        match self {
            VisitMethod::Click => Action::Click,
            VisitMethod::Hover => Action::HoverRead,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InteractionEvent {
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
    pub component: Component,
    pub action: Action,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub product_id: Option<String>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub target: Option<String>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub dwell_ms: Option<u64>,
}

impl InteractionEvent {
    pub fn new(timestamp: u64, component: Component, action: Action) -> Self {
        InteractionEvent {
            timestamp,
            component,
            action,
            product_id: None,
            target: None,
            dwell_ms: None,
        }
    }

    pub fn on_product(mut self, product_id: impl Into<String>) -> Self {
        self.product_id = Some(product_id.into());
        self
    }

    pub fn with_target(mut self, target: impl Into<String>) -> Self {
        self.target = Some(target.into());
        self
    }

    /// Visits are the only state-changing events: a click or timed hover on a
    /// review, either in the list or in the suggestion panel.
    pub fn is_visit(&self) -> bool {
        matches!(self.component, Component::Review | Component::Suggestion)
            && matches!(self.action, Action::Click | Action::HoverRead)
    }

    pub fn visit_method(&self) -> Option<VisitMethod> {
        match (self.is_visit(), self.action) {
            (true, Action::Click) => Some(VisitMethod::Click),
            (true, Action::HoverRead) => Some(VisitMethod::Hover),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExplorationMetrics {
    pub visit_pct: u8,
    pub coverage_pct: u8,
    /// Present sentiments only.
    pub distribution: BTreeMap<Sentiment, f64>,
    pub skewed_toward: Option<Sentiment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Metric {
    Visit,
    Coverage,
}

/// `ceil(100 * part / whole)`, 0 for an empty whole.
pub fn ceil_pct(part: usize, whole: usize) -> u8 {
    if whole == 0 {
        0
    } else {
        (100 * part).div_ceil(whole) as u8
    }
}

/// Visit, Coverage and Distribution from the raw counts.
pub fn compute_metrics(
    n: usize,
    visited: usize,
    covered: usize,
    visited_by_sentiment: SentimentCounts,
    totals: SentimentCounts,
    skew_threshold: f64,
) -> ExplorationMetrics {
    let distribution: BTreeMap<Sentiment, f64> = totals
        .present()
        .map(|x| (x, visited_by_sentiment.get(x) as f64 / totals.get(x) as f64))
        .collect();
    let skewed_toward = distribution.iter().find_map(|(&x, &dx)| {
        let mut others = distribution.iter().filter(|(&y, _)| y != x).peekable();
        others.peek()?;
        others.all(|(_, &dy)| dx > dy + skew_threshold).then_some(x)
    });
    ExplorationMetrics {
        visit_pct: ceil_pct(visited, n),
        coverage_pct: ceil_pct(covered, n),
        distribution,
        skewed_toward,
    }
}

/// Dwell time a hover needs before it counts as reading: 1 s at 10 words,
/// 5 s at 100 words, linear in between.
pub fn required_hover_ms(word_count: usize) -> u64 {
    let extra = word_count.saturating_sub(10) as u64;
    let ms = MIN_HOVER_MS + (4000 * extra + 45) / 90;
    ms.clamp(MIN_HOVER_MS, MAX_HOVER_MS)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Fill {
    pub matching: usize,
    pub marked: usize,
    pub fraction: f64,
}

impl Fill {
    fn new(matching: usize, marked: usize) -> Self {
        let fraction = if matching == 0 {
            0.0
        } else {
            marked as f64 / matching as f64
        };
        Fill {
            matching,
            marked,
            fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KeywordFill {
    pub word_a: String,
    pub word_b: String,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub fill: Fill,
}

/// Scented-widget fill levels for keyword and sentiment filters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WidgetBreakdown {
    pub metric: Metric,
    pub keywords: Vec<KeywordFill>,
    pub sentiments: BTreeMap<Sentiment, Fill>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisitOutcome {
    pub metrics: ExplorationMetrics,
    /// Reviews that entered the covered set with this visit, in product order.
    pub newly_covered: Vec<String>,
    pub suggestions: SuggestionSet,
    /// False for a re-visit, which leaves the state untouched.
    pub changed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VisitRequest {
    pub method: VisitMethod,
    pub dwell_ms: Option<u64>,
    /// [`Component::Review`] or [`Component::Suggestion`].
    pub source: Component,
}

impl VisitRequest {
    pub fn click() -> Self {
        VisitRequest {
            method: VisitMethod::Click,
            dwell_ms: None,
            source: Component::Review,
        }
    }

    pub fn hover(dwell_ms: u64) -> Self {
        VisitRequest {
            method: VisitMethod::Hover,
            dwell_ms: Some(dwell_ms),
            source: Component::Review,
        }
    }

    pub fn from_suggestions(mut self) -> Self {
        self.source = Component::Suggestion;
        self
    }
}

/// Exploration record for one (session, product).
///
/// Visited `V`, covered `C ⊇ V`, the visited-suggestion history `S` and the
/// product-scoped event log. `U` is the complement of `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionState {
    session_id: String,
    product_id: String,
    visited: Vec<usize>,
    is_visited: Vec<bool>,
    is_covered: Vec<bool>,
    covered_count: usize,
    visited_by_sentiment: SentimentCounts,
    history: Vec<SuggestionRecord>,
    served: SuggestionSet,
    events: Vec<InteractionEvent>,
}

impl SessionState {
    /// Fresh state; the cold-start suggestions are stamped `created_at`.
    pub fn new(session_id: &str, space: &ProductSpace, config: &EngineConfig, created_at: u64) -> Self {
        let n = space.len();
        let mut state = SessionState {
            session_id: session_id.to_string(),
            product_id: space.product_id().to_string(),
            visited: Vec::new(),
            is_visited: alloc::vec![false; n],
            is_covered: alloc::vec![false; n],
            covered_count: 0,
            visited_by_sentiment: SentimentCounts::default(),
            history: Vec::new(),
            served: SuggestionSet::empty(created_at),
            events: Vec::new(),
        };
        state.served = state.compute_suggestions(space, config, created_at);
        state
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn product_id(&self) -> &str {
        &self.product_id
    }

    /// Visited local indices in visit order.
    pub fn visited(&self) -> &[usize] {
        &self.visited
    }

    pub fn unvisited(&self) -> Vec<usize> {
        (0..self.is_visited.len()).filter(|&i| !self.is_visited[i]).collect()
    }

    pub fn is_visited(&self, i: usize) -> bool {
        self.is_visited[i]
    }

    pub fn is_covered(&self, i: usize) -> bool {
        self.is_covered[i]
    }

    pub fn covered(&self) -> Vec<usize> {
        (0..self.is_covered.len()).filter(|&i| self.is_covered[i]).collect()
    }

    pub fn covered_count(&self) -> usize {
        self.covered_count
    }

    pub fn visited_by_sentiment(&self) -> SentimentCounts {
        self.visited_by_sentiment
    }

    /// Visited suggestions, oldest first.
    pub fn suggestion_history(&self) -> &[SuggestionRecord] {
        &self.history
    }

    /// The latest served suggestion set.
    pub fn suggestions(&self) -> &SuggestionSet {
        &self.served
    }

    pub fn events(&self) -> &[InteractionEvent] {
        &self.events
    }

    fn last_timestamp(&self) -> u64 {
        self.events.last().map_or(0, |e| e.timestamp)
    }

    fn check_space(&self, space: &ProductSpace) -> Result<()> {
        if space.product_id() != self.product_id {
            return Err(Error::UnknownProduct(space.product_id().to_string()));
        }
        Ok(())
    }

    pub fn metrics(&self, space: &ProductSpace, config: &EngineConfig) -> ExplorationMetrics {
        compute_metrics(
            space.len(),
            self.visited.len(),
            self.covered_count,
            self.visited_by_sentiment,
            space.sentiment_totals(),
            config.skew_threshold,
        )
    }

    fn compute_suggestions(&self, space: &ProductSpace, config: &EngineConfig, at: u64) -> SuggestionSet {
        suggest::get_suggestions(
            space,
            &self.unvisited(),
            &self.visited,
            &self.history,
            &config.suggest,
            at,
        )
    }

    /// Marks a review as read.
    ///
    /// Hovers must carry a dwell of at least [`required_hover_ms`]; visits
    /// from the suggestion panel must target the latest served set. A
    /// rejected visit leaves the state (and the log) untouched. Re-visits are
    /// logged but change nothing else.
    pub fn visit(
        &mut self,
        space: &ProductSpace,
        review_id: &str,
        request: VisitRequest,
        timestamp: u64,
        config: &EngineConfig,
    ) -> Result<VisitOutcome> {
        self.check_space(space)?;
        let i = space.position(review_id)?;
        if !matches!(request.source, Component::Review | Component::Suggestion) {
            return Err(Error::InvalidInput(alloc::format!(
                "{:?} cannot originate a visit",
                request.source
            )));
        }
        if request.method == VisitMethod::Hover {
            let required_ms = required_hover_ms(space.review(i).word_count);
            let dwell_ms = request.dwell_ms.unwrap_or(0);
            if dwell_ms < required_ms {
                return Err(Error::DwellTooShort {
                    review: review_id.to_string(),
                    dwell_ms,
                    required_ms,
                });
            }
        }
        if request.source == Component::Suggestion && !self.is_visited[i] && !self.served.contains(review_id) {
            return Err(Error::NotSuggested(review_id.to_string()));
        }
        let last = self.last_timestamp();
        if timestamp < last {
            return Err(Error::NonMonotonicTimestamp { last, got: timestamp });
        }

        self.events.push(InteractionEvent {
            timestamp,
            component: request.source,
            action: request.method.action(),
            product_id: Some(self.product_id.clone()),
            target: Some(review_id.to_string()),
            dwell_ms: request.dwell_ms,
        });

        if self.is_visited[i] {
            return Ok(VisitOutcome {
                metrics: self.metrics(space, config),
                newly_covered: Vec::new(),
                suggestions: self.served.clone(),
                changed: false,
            });
        }

        self.is_visited[i] = true;
        self.visited.push(i);
        *self.visited_by_sentiment.get_mut(space.review(i).sentiment) += 1;

        let mut newly = Vec::new();
        if !self.is_covered[i] {
            newly.push(i);
        }
        // Only the new review can add coverage; earlier visits already
        // covered their neighbors.
        newly.extend(space.neighbors(i).iter().copied().filter(|&j| !self.is_covered[j]));
        for &j in &newly {
            self.is_covered[j] = true;
        }
        self.covered_count += newly.len();
        newly.sort_unstable();

        if self.served.contains(review_id) {
            suggest::record_suggestion_visit(&mut self.history, &self.served, review_id)?;
        }
        self.served = self.compute_suggestions(space, config, timestamp);

        Ok(VisitOutcome {
            metrics: self.metrics(space, config),
            newly_covered: newly.into_iter().map(|j| space.review(j).review_id.clone()).collect(),
            suggestions: self.served.clone(),
            changed: true,
        })
    }

    /// Appends a non-visit interaction (filter clicks, metric hovers, ...).
    pub fn record_event(&mut self, event: InteractionEvent) -> Result<()> {
        if event.is_visit() {
            return Err(Error::InvalidInput("visit events must go through visit()".to_string()));
        }
        let last = self.last_timestamp();
        if event.timestamp < last {
            return Err(Error::NonMonotonicTimestamp {
                last,
                got: event.timestamp,
            });
        }
        self.events.push(event);
        Ok(())
    }

    pub fn widget_breakdown(&self, space: &ProductSpace, metric: Metric) -> WidgetBreakdown {
        let marked = |i: usize| match metric {
            Metric::Visit => self.is_visited[i],
            Metric::Coverage => self.is_covered[i],
        };
        let keywords = space
            .keywords()
            .iter()
            .enumerate()
            .map(|(k, pair)| {
                let members = space.keyword_members(k);
                KeywordFill {
                    word_a: pair.word_a.clone(),
                    word_b: pair.word_b.clone(),
                    fill: Fill::new(members.len(), members.iter().filter(|&&i| marked(i)).count()),
                }
            })
            .collect();
        let totals = space.sentiment_totals();
        let mut counts = [0usize; 3];
        for i in (0..space.len()).filter(|&i| marked(i)) {
            counts[space.review(i).sentiment.index()] += 1;
        }
        let sentiments = Sentiment::ALL
            .into_iter()
            .map(|s| (s, Fill::new(totals.get(s), counts[s.index()])))
            .collect();
        WidgetBreakdown {
            metric,
            keywords,
            sentiments,
        }
    }

    /// Reviews in `V` (Visit) or `C` (Coverage), in product order.
    pub fn drilldown<'a>(&self, space: &'a ProductSpace, metric: Metric) -> Vec<&'a Review> {
        let set = match metric {
            Metric::Visit => &self.is_visited,
            Metric::Coverage => &self.is_covered,
        };
        (0..space.len()).filter(|&i| set[i]).map(|i| space.review(i)).collect()
    }
}
