#![allow(dead_code)]

use revex_core::{Catalog, Corpus, TfIdfEmbedder};
use serde_json::json;

pub fn words(n: usize, seed: &str) -> String {
    (0..n).map(|i| format!("{seed}{i}")).collect::<Vec<_>>().join(" ")
}

/// Two products: `p1` with six reviews (two near-duplicates), `p2` with three.
pub fn corpus_jsonl() -> String {
    let mut lines = Vec::new();
    let mut push = |pid: &str, rid: &str, text: String, stars: i64| {
        lines.push(json!({"product_id": pid, "review_id": rid, "title": if pid == "p1" { Some("t") } else { None }, "text": text, "stars": stars}).to_string());
    };
    push(
        "p1",
        "a",
        "great sound quality and deep bass for the price here".into(),
        5,
    );
    push(
        "p1",
        "b",
        "great sound quality and deep bass for the price too".into(),
        4,
    );
    push(
        "p1",
        "c",
        "battery died after two weeks of light daily use sadly".into(),
        1,
    );
    push(
        "p1",
        "d",
        "average headphones nothing special about them at all really".into(),
        3,
    );
    push("p1", "e", words(12, "neg"), 2);
    push("p1", "f", words(99, "long"), 5);
    push("p2", "x", words(10, "x"), 5);
    push("p2", "y", words(11, "y"), 3);
    push("p2", "z", words(13, "z"), 1);
    lines.join("\n") + "\n"
}

pub fn catalog() -> Catalog {
    let (corpus, report) =
        revex::io::read_corpus_jsonl(corpus_jsonl().as_bytes(), revex_core::IngestConfig::default()).unwrap();
    assert_eq!(report.rejected(), 0, "{report:?}");
    build(&corpus)
}

pub fn build(corpus: &Corpus) -> Catalog {
    Catalog::build(corpus, &TfIdfEmbedder, 0.8).unwrap()
}
