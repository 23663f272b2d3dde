//! Scripted readers driving sessions, and log-derived run reports.
//!
//! A run produces an event log; every report field is recomputed from that
//! log by [`analyze_log`], so a report is exactly reproducible from an
//! exported log.

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use revex_core::{
    Action, Catalog, Component, EngineConfig, InteractionEvent, ProductSpace, ReadingSession, Sentiment, SessionState,
    VisitRequest,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::LineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Uniform over unvisited reviews.
    Random,
    /// Picks a positive review with probability `bias`.
    PositiveBiased,
    /// Picks a negative review with probability `bias`.
    NegativeBiased,
    /// Always opens the top-ranked suggestion.
    SuggestionFollowing,
    /// Reads the sentiment with the lowest Distribution value.
    MetricsBalancing,
    /// Uniform over unvisited reviews that are not yet covered.
    CoverageAware,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Random,
        PolicyKind::PositiveBiased,
        PolicyKind::NegativeBiased,
        PolicyKind::SuggestionFollowing,
        PolicyKind::MetricsBalancing,
        PolicyKind::CoverageAware,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Random => "random",
            PolicyKind::PositiveBiased => "positive_biased",
            PolicyKind::NegativeBiased => "negative_biased",
            PolicyKind::SuggestionFollowing => "suggestion_following",
            PolicyKind::MetricsBalancing => "metrics_balancing",
            PolicyKind::CoverageAware => "coverage_aware",
        }
    }

    /// Accepts snake_case, kebab-case or CamelCase.
    pub fn parse(s: &str) -> Option<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        PolicyKind::ALL.into_iter().find(|k| k.as_str().replace('_', "") == key)
    }

    fn needs_metrics(self) -> bool {
        matches!(self, PolicyKind::MetricsBalancing | PolicyKind::CoverageAware)
    }

    fn needs_suggestions(self) -> bool {
        self == PolicyKind::SuggestionFollowing
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which engine features a reader may consult.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    B,
    M,
    S,
    MS,
}

impl Condition {
    pub fn metrics(self) -> bool {
        matches!(self, Condition::M | Condition::MS)
    }

    pub fn suggestions(self) -> bool {
        matches!(self, Condition::S | Condition::MS)
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "B" => Some(Condition::B),
            "M" => Some(Condition::M),
            "S" => Some(Condition::S),
            "MS" | "M&S" => Some(Condition::MS),
            _ => None,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyParams {
    pub bias: f64,
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams { bias: 0.9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReaderPolicy {
    pub kind: PolicyKind,
    pub seed: u64,
    pub steps: usize,
    #[serde(default)]
    pub params: PolicyParams,
}

impl ReaderPolicy {
    pub fn new(kind: PolicyKind, seed: u64, steps: usize) -> Self {
        ReaderPolicy {
            kind,
            seed,
            steps,
            params: PolicyParams::default(),
        }
    }

    pub fn check(&self, condition: Condition) -> Result<()> {
        if self.kind.needs_metrics() && !condition.metrics() {
            return Err(Error::Config(format!(
                "policy {} reads metrics, which condition {condition} hides",
                self.kind
            )));
        }
        if self.kind.needs_suggestions() && !condition.suggestions() {
            return Err(Error::Config(format!(
                "policy {} reads suggestions, which condition {condition} hides",
                self.kind
            )));
        }
        if !(0.0..=1.0).contains(&self.params.bias) {
            return Err(Error::Config(format!("bias {} is outside [0, 1]", self.params.bias)));
        }
        Ok(())
    }
}

/// Interface areas used for transition counting. Search shares the keyword
/// area, since both narrow the review list by text.
pub const AREAS: [&str; 6] = [
    "product_select",
    "keyword",
    "sentiment",
    "metrics",
    "review",
    "suggestion",
];

pub fn area(component: Component) -> usize {
    match component {
        Component::ProductSelect => 0,
        Component::Keyword | Component::Search => 1,
        Component::Sentiment => 2,
        Component::Metrics => 3,
        Component::Review => 4,
        Component::Suggestion => 5,
    }
}

/// Consecutive-event counts between interface areas, diagonal included, so
/// the grand total is `events - 1`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionCounts {
    pub areas: Vec<String>,
    pub counts: [[usize; 6]; 6],
}

impl TransitionCounts {
    pub fn from_components(components: impl IntoIterator<Item = Component>) -> Self {
        let mut counts = [[0; 6]; 6];
        let mut prev: Option<usize> = None;
        for c in components {
            let a = area(c);
            if let Some(p) = prev {
                counts[p][a] += 1;
            }
            prev = Some(a);
        }
        TransitionCounts {
            areas: AREAS.iter().map(|s| s.to_string()).collect(),
            counts,
        }
    }

    pub fn get(&self, from: Component, to: Component) -> usize {
        self.counts[area(from)][area(to)]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Transitions between different areas.
    pub fn changes(&self) -> usize {
        self.total() - (0..6).map(|i| self.counts[i][i]).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub product_id: String,
    pub events: usize,
    /// Visit events, the unit of simulated time.
    pub steps: usize,
    pub visited: usize,
    pub covered: usize,
    pub visit_pct: u8,
    pub coverage_pct: u8,
    pub coverage_per_step: f64,
    pub distribution: BTreeMap<Sentiment, f64>,
    pub max_gap: f64,
    pub skewed_toward: Option<Sentiment>,
    pub transitions: TransitionCounts,
}

/// Largest pairwise difference between Distribution values.
pub fn max_gap(distribution: &BTreeMap<Sentiment, f64>) -> f64 {
    let values: Vec<f64> = distribution.values().copied().collect();
    let mut gap: f64 = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            gap = gap.max((a - b).abs());
        }
    }
    gap
}

fn report(space: &ProductSpace, state: &SessionState, config: &EngineConfig, log: &[InteractionEvent]) -> RunReport {
    let metrics = state.metrics(space, config);
    let steps = log
        .iter()
        .filter(|e| e.is_visit() && e.product_id.as_deref() == Some(space.product_id()))
        .count();
    let covered = state.covered_count();
    RunReport {
        product_id: space.product_id().to_string(),
        events: log.len(),
        steps,
        visited: state.visited().len(),
        covered,
        visit_pct: metrics.visit_pct,
        coverage_pct: metrics.coverage_pct,
        coverage_per_step: if steps == 0 { 0.0 } else { covered as f64 / steps as f64 },
        max_gap: max_gap(&metrics.distribution),
        distribution: metrics.distribution,
        skewed_toward: metrics.skewed_toward,
        transitions: TransitionCounts::from_components(log.iter().map(|e| e.component)),
    }
}

/// Rebuilds a report for one product from an event log. Events that cannot
/// be applied are skipped and reported with their 1-based position.
pub fn analyze_log(
    events: &[InteractionEvent],
    catalog: &Catalog,
    product_id: &str,
    config: &EngineConfig,
) -> Result<(RunReport, Vec<LineError>)> {
    analyze_numbered(
        events.iter().cloned().enumerate().map(|(i, e)| (i + 1, e)),
        Vec::new(),
        catalog,
        product_id,
        config,
    )
}

/// [`analyze_log`] over JSON lines; unparsable lines are reported too.
pub fn analyze_jsonl(
    reader: impl BufRead,
    catalog: &Catalog,
    product_id: &str,
    config: &EngineConfig,
) -> Result<(RunReport, Vec<LineError>)> {
    let mut events = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<event log>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<InteractionEvent>(&line) {
            Ok(e) => events.push((i + 1, e)),
            Err(e) => errors.push(LineError {
                line: i + 1,
                message: e.to_string(),
            }),
        }
    }
    analyze_numbered(events.into_iter(), errors, catalog, product_id, config)
}

fn analyze_numbered(
    events: impl Iterator<Item = (usize, InteractionEvent)>,
    mut errors: Vec<LineError>,
    catalog: &Catalog,
    product_id: &str,
    config: &EngineConfig,
) -> Result<(RunReport, Vec<LineError>)> {
    let space = catalog.get(product_id)?;
    let mut events = events.peekable();
    let created_at = events.peek().map_or(0, |(_, e)| e.timestamp);
    let mut session = ReadingSession::new("analysis", created_at);
    for (line, event) in events {
        if let Err(e) = session.apply(catalog, config, &event) {
            errors.push(LineError {
                line,
                message: e.to_string(),
            });
        }
    }
    errors.sort_by_key(|e| e.line);
    let fresh;
    let state = match session.product(product_id) {
        Some(s) => s,
        None => {
            fresh = SessionState::new("analysis", space, config, created_at);
            &fresh
        }
    };
    Ok((report(space, state, config, session.log()), errors))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub report: RunReport,
    pub events: Vec<InteractionEvent>,
}

fn pick(rng: &mut ChaCha8Rng, pool: &[usize]) -> usize {
    pool[rng.random_range(0..pool.len())]
}

/// Drives one session on one product with a scripted reader.
pub fn run_policy(
    policy: &ReaderPolicy,
    catalog: &Catalog,
    product_id: &str,
    condition: Condition,
    config: &EngineConfig,
) -> Result<Run> {
    policy.check(condition)?;
    let space = catalog.get(product_id)?;
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    let mut session = ReadingSession::new(format!("sim-{}-{}", policy.kind, policy.seed), 0);
    let mut clock = 0u64;
    let mut tick = || {
        clock += 1;
        clock
    };
    let select = InteractionEvent::new(tick(), Component::ProductSelect, Action::Click)
        .on_product(product_id)
        .with_target(product_id);
    session.record(catalog, config, select)?;
    let mut sentiment_filter: Option<Sentiment> = None;

    for _ in 0..policy.steps {
        let state = session.product_state(catalog, config, product_id)?;
        let unvisited = state.unvisited();
        if unvisited.is_empty() {
            break;
        }
        let by_sentiment = |s: Sentiment| -> Vec<usize> {
            unvisited
                .iter()
                .copied()
                .filter(|&i| space.review(i).sentiment == s)
                .collect()
        };
        let mut pre: Vec<InteractionEvent> = Vec::new();
        let mut want_filter: Option<Sentiment> = None;
        let mut request = VisitRequest::click();

        let choice = match policy.kind {
            PolicyKind::Random => pick(&mut rng, &unvisited),
            PolicyKind::PositiveBiased | PolicyKind::NegativeBiased => {
                let target = if policy.kind == PolicyKind::PositiveBiased {
                    Sentiment::Positive
                } else {
                    Sentiment::Negative
                };
                let favoured = by_sentiment(target);
                let rest: Vec<usize> = unvisited
                    .iter()
                    .copied()
                    .filter(|&i| space.review(i).sentiment != target)
                    .collect();
                let take_favoured = rng.random_bool(policy.params.bias);
                let pool = match (take_favoured, favoured.is_empty(), rest.is_empty()) {
                    (true, false, _) | (false, false, true) => {
                        want_filter = Some(target);
                        &favoured
                    }
                    _ => &rest,
                };
                pick(&mut rng, pool)
            }
            PolicyKind::SuggestionFollowing => match state.suggestions().ranked.first() {
                Some(top) => {
                    request = request.from_suggestions();
                    space.position(&top.review_id)?
                }
                None => pick(&mut rng, &unvisited),
            },
            PolicyKind::MetricsBalancing => {
                let metrics = state.metrics(space, config);
                pre.push(InteractionEvent::new(0, Component::Metrics, Action::View).on_product(product_id));
                let candidates: Vec<(Sentiment, f64)> = metrics
                    .distribution
                    .iter()
                    .map(|(s, d)| (*s, *d))
                    .filter(|(s, _)| !by_sentiment(*s).is_empty())
                    .collect();
                let lowest = candidates.iter().map(|(_, d)| *d).fold(f64::INFINITY, f64::min);
                let tied: Vec<Sentiment> = candidates
                    .iter()
                    .filter(|(_, d)| *d == lowest)
                    .map(|(s, _)| *s)
                    .collect();
                let s = tied[rng.random_range(0..tied.len())];
                want_filter = Some(s);
                pick(&mut rng, &by_sentiment(s))
            }
            PolicyKind::CoverageAware => {
                pre.push(
                    InteractionEvent::new(0, Component::Metrics, Action::View)
                        .on_product(product_id)
                        .with_target("coverage"),
                );
                let fresh: Vec<usize> = unvisited.iter().copied().filter(|&i| !state.is_covered(i)).collect();
                pick(&mut rng, if fresh.is_empty() { &unvisited } else { &fresh })
            }
        };

        if let Some(s) = want_filter.filter(|_| want_filter != sentiment_filter) {
            pre.push(
                InteractionEvent::new(0, Component::Sentiment, Action::Filter)
                    .on_product(product_id)
                    .with_target(s.as_str()),
            );
        }
        sentiment_filter = want_filter;
        for mut e in pre {
            e.timestamp = tick();
            session.record(catalog, config, e)?;
        }
        let review_id = space.review(choice).review_id.clone();
        session.visit(catalog, config, product_id, &review_id, request, tick())?;
    }

    let state = session.product(product_id).expect("product selected");
    let report = report(space, state, config, session.log());
    Ok(Run {
        report,
        events: session.log().to_vec(),
    })
}

/// One policy/condition pairing in a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    pub label: String,
    pub condition: Condition,
    pub policy: PolicyKind,
    #[serde(default)]
    pub params: PolicyParams,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Population standard deviation.
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return MeanStd::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        MeanStd { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub condition: Condition,
    pub policy: PolicyKind,
    pub runs: usize,
    pub covered: MeanStd,
    pub coverage_per_step: MeanStd,
    pub max_gap: MeanStd,
    pub visited: MeanStd,
    /// Runs that ended with a skew flag.
    pub skewed_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub product_id: String,
    pub steps: usize,
    pub seeds: Vec<u64>,
    pub rows: Vec<ComparisonRow>,
}

pub const CSV_HEADER: [&str; 14] = [
    "label",
    "condition",
    "policy",
    "runs",
    "covered_mean",
    "covered_std",
    "coverage_per_step_mean",
    "coverage_per_step_std",
    "max_gap_mean",
    "max_gap_std",
    "visited_mean",
    "visited_std",
    "skewed_runs",
    "steps",
];

impl ComparisonTable {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory csv");
        for r in &self.rows {
            let f = |v: f64| v.to_string();
            w.write_record([
                r.label.clone(),
                r.condition.to_string(),
                r.policy.to_string(),
                r.runs.to_string(),
                f(r.covered.mean),
                f(r.covered.std),
                f(r.coverage_per_step.mean),
                f(r.coverage_per_step.std),
                f(r.max_gap.mean),
                f(r.max_gap.std),
                f(r.visited.mean),
                f(r.visited.std),
                r.skewed_runs.to_string(),
                self.steps.to_string(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

pub fn compare_conditions(
    catalog: &Catalog,
    product_id: &str,
    arms: &[Arm],
    seeds: &[u64],
    steps: usize,
    config: &EngineConfig,
) -> Result<ComparisonTable> {
    if arms.len() < 2 {
        return Err(Error::Config("a comparison needs at least two arms".into()));
    }
    if seeds.len() < 10 {
        return Err(Error::Config("a comparison needs at least ten seeds".into()));
    }
    let mut rows = Vec::with_capacity(arms.len());
    for arm in arms {
        let mut reports = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let policy = ReaderPolicy {
                kind: arm.policy,
                seed,
                steps,
                params: arm.params,
            };
            reports.push(run_policy(&policy, catalog, product_id, arm.condition, config)?.report);
        }
        let col = |f: fn(&RunReport) -> f64| MeanStd::of(&reports.iter().map(f).collect::<Vec<_>>());
        rows.push(ComparisonRow {
            label: arm.label.clone(),
            condition: arm.condition,
            policy: arm.policy,
            runs: reports.len(),
            covered: col(|r| r.covered as f64),
            coverage_per_step: col(|r| r.coverage_per_step),
            max_gap: col(|r| r.max_gap),
            visited: col(|r| r.visited as f64),
            skewed_runs: reports.iter().filter(|r| r.skewed_toward.is_some()).count(),
        });
    }
    Ok(ComparisonTable {
        product_id: product_id.to_string(),
        steps,
        seeds: seeds.to_vec(),
        rows,
    })
}

/// Input of `simulate compare`: where the corpus comes from, the arms and
/// the seeds. Read from JSON, TOML or YAML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    #[serde(default)]
    pub corpus: Option<std::path::PathBuf>,
    #[serde(default)]
    pub synthetic: Option<crate::synth::SyntheticConfig>,
    /// Defaults to the first product.
    #[serde(default)]
    pub product: Option<String>,
    pub steps: usize,
    /// Explicit seeds; otherwise `seed_count` consecutive seeds from `base_seed`.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "default_seed_count")]
    pub seed_count: usize,
    #[serde(default)]
    pub base_seed: u64,
    pub arms: Vec<Arm>,
    #[serde(default)]
    pub engine: Option<EngineConfig>,
    #[serde(default = "default_threshold")]
    pub similarity_threshold: f64,
}

fn default_seed_count() -> usize {
    10
}

fn default_threshold() -> f64 {
    revex_core::embedding::DEFAULT_SIMILARITY_THRESHOLD
}

impl CompareSpec {
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or("")
            .to_ascii_lowercase();
        let parsed = match ext.as_str() {
            "toml" => toml::from_str(&text).map_err(|e| e.to_string()),
            "yaml" | "yml" => serde_yaml::from_str(&text).map_err(|e| e.to_string()),
            _ => serde_json::from_str(&text).map_err(|e| e.to_string()),
        };
        parsed.map_err(|message| Error::Format {
            path: path.into(),
            message,
        })
    }

    pub fn seeds(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => (0..self.seed_count as u64).map(|i| self.base_seed + i).collect(),
        }
    }

    /// Loads or generates the corpus and runs the comparison.
    pub fn run(&self) -> Result<ComparisonTable> {
        let corpus = match (&self.corpus, &self.synthetic) {
            (Some(path), None) => {
                let format = crate::io::CorpusFormat::from_path(path);
                crate::io::load_corpus(path, format, revex_core::IngestConfig::default())?.0
            }
            (None, Some(synth)) => crate::synth::generate(synth).ingest().0,
            _ => return Err(Error::Config("give exactly one of corpus or synthetic".into())),
        };
        let catalog = Catalog::build(&corpus, &revex_core::TfIdfEmbedder, self.similarity_threshold)?;
        let product = match &self.product {
            Some(p) => p.clone(),
            None => catalog
                .iter()
                .next()
                .map(|s| s.product_id().to_string())
                .ok_or_else(|| Error::Config("corpus has no products".into()))?,
        };
        compare_conditions(
            &catalog,
            &product,
            &self.arms,
            &self.seeds(),
            self.steps,
            &self.engine.unwrap_or_default(),
        )
    }
}
