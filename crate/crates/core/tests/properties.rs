mod common;

use std::collections::BTreeSet;

use common::{covered_brute, get_suggestion_naive, keyword_pairs_brute, metrics_brute, Flag, World, XorShift};
use proptest::prelude::*;
use revex_core::embedding::{redundancy_set, similarity};
use revex_core::keywords::extract_keywords;
use revex_core::search::{filter_reviews, find_term};
use revex_core::session::compute_metrics;
use revex_core::suggest::{get_suggestions, SuggestionRecord};
use revex_core::text::tokenize;
use revex_core::{
    EmbeddingVector, EngineConfig, KeywordPair, Normalization, Review, ReviewFilter, ScoreComponent, Sentiment,
    SentimentCounts, SessionState, SuggestParams, VisitRequest,
};

const THRESHOLD: f64 = 0.8;

fn to_record(f: Flag) -> SuggestionRecord {
    let component = match f {
        Flag::Dissimilarity => ScoreComponent::Dissimilarity,
        Flag::Sentiment => ScoreComponent::Sentiment,
    };
    SuggestionRecord {
        review_id: "h".into(),
        component,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn incremental_coverage_matches_full_recompute(seed in any::<u64>(), n in 1usize..60) {
        let world = World::random(seed, n, seed % 2 == 0);
        let space = world.space(THRESHOLD);
        let config = EngineConfig::default();
        let mut state = SessionState::new("s", &space, &config, 0);
        let mut order: Vec<usize> = (0..n).collect();
        XorShift(seed | 1).shuffle(&mut order);
        let mut last = (0u8, 0u8);
        for (step, &i) in order.iter().enumerate() {
            state.visit(&space, &world.ids[i], VisitRequest::click(), step as u64, &config).unwrap();
            let visited = &order[..=step];
            let brute = covered_brute(&world, visited, THRESHOLD);
            let got: BTreeSet<usize> = state.covered().into_iter().collect();
            prop_assert_eq!(&got, &brute);
            let unvisited: Vec<usize> = (0..n).filter(|j| !visited.contains(j)).collect();
            let mut via_set = redundancy_set(visited, &unvisited, space.matrix(), THRESHOLD);
            via_set.extend(visited.iter().copied());
            prop_assert_eq!(&via_set, &brute);

            let m = state.metrics(&space, &config);
            let oracle = metrics_brute(&world, visited, &brute, 0.07);
            prop_assert_eq!(m.visit_pct, oracle.visit_pct);
            prop_assert_eq!(m.coverage_pct, oracle.coverage_pct);
            prop_assert_eq!(m.skewed_toward, oracle.skewed_toward);
            let dist: Vec<(Sentiment, f64)> = m.distribution.iter().map(|(k, v)| (*k, *v)).collect();
            prop_assert_eq!(dist.len(), oracle.distribution.len());
            for ((a, x), (b, y)) in dist.iter().zip(&oracle.distribution) {
                prop_assert_eq!(a, b);
                prop_assert!((x - y).abs() <= 1e-12);
            }
            prop_assert!(m.coverage_pct >= m.visit_pct);
            prop_assert!(m.visit_pct >= last.0 && m.coverage_pct >= last.1);
            last = (m.visit_pct, m.coverage_pct);
        }
        let m = state.metrics(&space, &config);
        prop_assert_eq!((m.visit_pct, m.coverage_pct), (100, 100));
        prop_assert!(m.distribution.values().all(|&d| d == 1.0));
    }

    #[test]
    fn redundancy_is_monotone(seed in any::<u64>(), n in 2usize..40, split in 0usize..40, extra in 0usize..40) {
        let world = World::random(seed, n, false);
        let space = world.space(THRESHOLD);
        let mut order: Vec<usize> = (0..n).collect();
        XorShift(seed ^ 0xABCD).shuffle(&mut order);
        let small = split.min(n);
        let big = (small + extra).min(n);
        let all: Vec<usize> = (0..n).collect();
        let a = redundancy_set(&order[..small], &all, space.matrix(), THRESHOLD);
        let b = redundancy_set(&order[..big], &all, space.matrix(), THRESHOLD);
        prop_assert!(a.is_subset(&b));
    }

    #[test]
    fn suggestions_match_naive_transcription(seed in any::<u64>(), n in 1usize..=50, visits in 0usize..50, flags in proptest::collection::vec(any::<bool>(), 0..8)) {
        let world = World::random(seed, n, seed % 3 == 0);
        let space = world.space(THRESHOLD);
        let mut order: Vec<usize> = (0..n).collect();
        XorShift(seed.rotate_left(7) | 1).shuffle(&mut order);
        let k = visits.min(n);
        let visited = &order[..k];
        let unvisited: Vec<usize> = (0..n).filter(|i| !visited.contains(i)).collect();
        let s_list: Vec<Flag> = flags.iter().map(|&b| if b { Flag::Sentiment } else { Flag::Dissimilarity }).collect();
        let history: Vec<SuggestionRecord> = s_list.iter().copied().map(to_record).collect();
        let got = get_suggestions(&space, &unvisited, visited, &history, &SuggestParams::default(), 0);
        if k == 0 || unvisited.is_empty() {
            prop_assert!(k == 0 || got.ranked.is_empty());
            return Ok(());
        }
        let want = get_suggestion_naive(&world, &unvisited, visited, &s_list, 5);
        prop_assert_eq!(got.ranked.len(), want.len());
        prop_assert_eq!(got.ranked.len(), unvisited.len().min(5));
        for (g, w) in got.ranked.iter().zip(&want) {
            prop_assert_eq!(&g.review_id, &w.id);
            prop_assert!((g.score - w.score).abs() <= 1e-9);
            prop_assert!((g.d - w.d).abs() <= 1e-9 && (g.s - w.s).abs() <= 1e-9);
            let flag = if g.component == ScoreComponent::Sentiment { Flag::Sentiment } else { Flag::Dissimilarity };
            prop_assert_eq!(flag, w.flag);
            prop_assert!((0.0..=1.0).contains(&g.score) && (0.0..=1.0).contains(&g.d) && (0.0..=1.0).contains(&g.s));
            prop_assert!(!visited.contains(&space.position(&g.review_id).unwrap()));
        }
        let again = get_suggestions(&space, &unvisited, visited, &history, &SuggestParams::default(), 0);
        prop_assert_eq!(got, again);
    }

    #[test]
    fn distribution_is_label_equivariant(counts in proptest::array::uniform3(0usize..20), extra in proptest::array::uniform3(0usize..20), perm in 0usize..6) {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let p = perms[perm];
        let make = |v: [usize; 3]| SentimentCounts { positive: v[0], neutral: v[1], negative: v[2] };
        let totals = [counts[0] + extra[0], counts[1] + extra[1], counts[2] + extra[2]];
        let visited: usize = counts.iter().sum();
        let n: usize = totals.iter().sum();
        let a = compute_metrics(n, visited, visited, make(counts), make(totals), 0.07);
        let permute = |v: [usize; 3]| [v[p[0]], v[p[1]], v[p[2]]];
        let b = compute_metrics(n, visited, visited, make(permute(counts)), make(permute(totals)), 0.07);
        let all = Sentiment::ALL;
        for (i, s) in all.iter().enumerate() {
            prop_assert_eq!(b.distribution.get(s), a.distribution.get(&all[p[i]]));
        }
        prop_assert_eq!(b.skewed_toward.map(|s| all[p[s.index()]]), a.skewed_toward);
    }

    #[test]
    fn similarity_symmetric(a in proptest::collection::vec(-3.0f64..3.0, 6), b in proptest::collection::vec(-3.0f64..3.0, 6)) {
        let va = EmbeddingVector::dense(a);
        let vb = EmbeddingVector::dense(b);
        if va.norm() > 0.0 && vb.norm() > 0.0 {
            for norm in [Normalization::Identity, Normalization::Shifted] {
                let x = similarity(&va, &vb, norm).unwrap();
                let y = similarity(&vb, &va, norm).unwrap();
                prop_assert!((x - y).abs() <= 1e-12);
                prop_assert!((0.0..=1.0).contains(&x));
            }
        }
    }

    #[test]
    fn highlight_spans_fold_to_query(text in "[a-zA-Z ,.]{0,80}", term in "[a-zA-Z]{1,4}") {
        let review = Review {
            review_id: "r".into(),
            product_id: "p".into(),
            title: None,
            text: text.clone(),
            stars: 4,
            sentiment: Sentiment::Positive,
            word_count: 0,
        };
        let filter = ReviewFilter { query: Some(term.clone()), ..Default::default() };
        let (kept, spans) = filter_reviews(&[&review], &filter);
        prop_assert_eq!(kept.is_empty(), spans.is_empty());
        for span in &spans {
            prop_assert!(span.start < span.end && span.end <= text.len());
            prop_assert!(text[span.start..span.end].eq_ignore_ascii_case(&term));
        }
        // Exhaustive scan oracle.
        let lower = text.to_ascii_lowercase();
        let t = term.to_ascii_lowercase();
        let mut expected = Vec::new();
        let mut i = 0;
        while i + t.len() <= lower.len() {
            let boundary = i == 0 || !lower.as_bytes()[i - 1].is_ascii_alphanumeric();
            if boundary && lower[i..i + t.len()] == t {
                expected.push((i, i + t.len()));
                i += t.len();
            } else {
                i += 1;
            }
        }
        prop_assert_eq!(find_term(&text, &term), expected);
    }

    #[test]
    fn keywords_match_brute_force(docs in proptest::collection::vec(proptest::collection::vec("[a-e]{2}", 0..6), 1..8)) {
        let reviews: Vec<Review> = docs
            .iter()
            .enumerate()
            .map(|(i, words)| Review {
                review_id: format!("r{i}"),
                product_id: "p".into(),
                title: None,
                text: words.join(" "),
                stars: 5,
                sentiment: Sentiment::Positive,
                word_count: words.len(),
            })
            .collect();
        let tokens: Vec<Vec<String>> = reviews.iter().map(|r| tokenize(&r.text)).collect();
        let brute = keyword_pairs_brute(&tokens);
        let got = extract_keywords(&reviews, 8);
        let want: Vec<KeywordPair> = brute
            .into_iter()
            .take(8)
            .map(|(a, b, f)| KeywordPair { word_a: a, word_b: b, frequency: f })
            .collect();
        prop_assert_eq!(&got, &want);
        prop_assert_eq!(extract_keywords(&reviews, 8), got);
    }
}

#[test]
fn three_review_keyword_example() {
    let texts = [
        "sound quality is superb",
        "the sound quality could be better",
        "battery lasts",
    ];
    let reviews: Vec<Review> = texts
        .iter()
        .enumerate()
        .map(|(i, t)| Review {
            review_id: format!("r{i}"),
            product_id: "p".into(),
            title: None,
            text: t.to_string(),
            stars: 4,
            sentiment: Sentiment::Positive,
            word_count: 0,
        })
        .collect();
    let k = extract_keywords(&reviews, 8);
    assert_eq!(
        k[0],
        KeywordPair {
            word_a: "quality".into(),
            word_b: "sound".into(),
            frequency: 2
        }
    );
}

#[test]
fn modifier_feedback_drives_sentiment_weight() {
    let world = World::random(11, 30, false);
    let space = world.space(THRESHOLD);
    let history: Vec<SuggestionRecord> = (0..6).map(|_| to_record(Flag::Dissimilarity)).collect();
    let m = revex_core::ModifierPair::from_history(&history);
    assert_eq!((m.m_dissimilarity, m.m_sentiment), (0.0, 1.0));
    let visited = [0, 1, 2];
    let unvisited: Vec<usize> = (3..30).collect();
    let set = get_suggestions(&space, &unvisited, &visited, &history, &SuggestParams::default(), 0);
    for c in &set.ranked {
        assert!((c.score - c.s).abs() < 1e-15);
    }
}
