//! Review embeddings, normalized cosine similarity and the per-product
//! similarity matrix behind Coverage and the suggestion model.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::corpus::Review;
use crate::error::{Error, Result};
use crate::text;

pub const DEFAULT_SIMILARITY_THRESHOLD: f64 = 0.8;

/// How raw cosine is mapped into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Normalization {
    /// Non-negative embeddings: cosine is already in `[0, 1]`.
    Identity,
    /// Signed embeddings: `(cos + 1) / 2`.
    Shifted,
}

impl Normalization {
    pub fn apply(self, cosine: f64) -> f64 {
        let v = match self {
            Normalization::Identity => cosine,
            Normalization::Shifted => (cosine + 1.0) / 2.0,
        };
        v.clamp(0.0, 1.0)
    }
}

/// Sparse vector of fixed dimension. Values are kept unnormalized; `norm` is
/// their Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
    norm: f64,
}

impl EmbeddingVector {
    pub fn dense(values: Vec<f64>) -> Self {
        let dim = values.len();
        let (indices, values): (Vec<u32>, Vec<f64>) = values
            .into_iter()
            .enumerate()
            .filter(|(_, v)| *v != 0.0)
            .map(|(i, v)| (i as u32, v))
            .unzip();
        Self::from_parts(dim, indices, values)
    }

    /// `entries` need not be sorted; duplicate indices are summed.
    pub fn sparse(dim: usize, entries: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<u32, f64> = BTreeMap::new();
        for (i, v) in entries {
            if i as usize >= dim {
                return Err(Error::InvalidInput(alloc::format!("index {i} out of dimension {dim}")));
            }
            *merged.entry(i).or_insert(0.0) += v;
        }
        let (indices, values) = merged.into_iter().filter(|(_, v)| *v != 0.0).unzip();
        Ok(Self::from_parts(dim, indices, values))
    }

    fn from_parts(dim: usize, indices: Vec<u32>, values: Vec<f64>) -> Self {
        let norm = libm::sqrt(values.iter().map(|v| v * v).sum());
        EmbeddingVector {
            dim,
            indices,
            values,
            norm,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn has_negative(&self) -> bool {
        self.values.iter().any(|v| *v < 0.0)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.dim];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            out[i as usize] = v;
        }
        out
    }

    fn dot(&self, other: &EmbeddingVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::InvalidInput(alloc::format!(
            "dimension mismatch: {} vs {}",
            a.dim,
            b.dim
        )));
    }
    if a.norm == 0.0 || b.norm == 0.0 {
        return Err(Error::InvalidInput("zero-norm vector".to_string()));
    }
    Ok(a.dot(b) / (a.norm * b.norm))
}

/// Normalized similarity in `[0, 1]`.
pub fn similarity(a: &EmbeddingVector, b: &EmbeddingVector, normalization: Normalization) -> Result<f64> {
    cosine(a, b).map(|c| normalization.apply(c))
}

/// Pluggable review embedder.
pub trait Embedder {
    fn id(&self) -> &str;
    fn normalization(&self) -> Normalization;
    /// One vector per input review, in input order.
    fn embed(&self, reviews: &[&Review]) -> Result<Vec<EmbeddingVector>>;
}

/// TF-IDF over the vocabulary of the reviews passed in (one product), with
/// smoothed idf `ln((1 + n) / (1 + df)) + 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TfIdfEmbedder;

impl TfIdfEmbedder {
    pub const ID: &'static str = "tfidf";

    fn terms(review: &Review) -> Vec<String> {
        let body = review.full_text();
        let content = text::tokenize(&body);
        if content.is_empty() {
            text::raw_tokens(&body).collect()
        } else {
            content
        }
    }
}

impl Embedder for TfIdfEmbedder {
    fn id(&self) -> &str {
        Self::ID
    }

    fn normalization(&self) -> Normalization {
        Normalization::Identity
    }

    fn embed(&self, reviews: &[&Review]) -> Result<Vec<EmbeddingVector>> {
        let docs: Vec<BTreeMap<String, usize>> = reviews
            .iter()
            .map(|r| {
                let mut tf = BTreeMap::new();
                for t in Self::terms(r) {
                    *tf.entry(t).or_insert(0usize) += 1;
                }
                tf
            })
            .collect();
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in &docs {
            for term in doc.keys() {
                *df.entry(term.as_str()).or_insert(0) += 1;
            }
        }
        let n = docs.len() as f64;
        let vocab: BTreeMap<&str, (u32, f64)> = df
            .iter()
            .enumerate()
            .map(|(i, (&t, &d))| (t, (i as u32, libm::log((1.0 + n) / (1.0 + d as f64)) + 1.0)))
            .collect();
        let dim = vocab.len();
        Ok(docs
            .iter()
            .map(|doc| {
                let (indices, values) = doc
                    .iter()
                    .map(|(t, &tf)| {
                        let (idx, idf) = vocab[t.as_str()];
                        (idx, tf as f64 * idf)
                    })
                    .unzip();
                // BTreeMap iteration keeps indices sorted.
                EmbeddingVector::from_parts(dim, indices, values)
            })
            .collect())
    }
}

/// Externally supplied vectors keyed by review id.
#[derive(Debug, Clone, Default)]
pub struct PrecomputedEmbedder {
    vectors: BTreeMap<String, Vec<f64>>,
    signed: bool,
}

impl PrecomputedEmbedder {
    pub const ID: &'static str = "precomputed";

    pub fn new(vectors: BTreeMap<String, Vec<f64>>) -> Self {
        let signed = vectors.values().flatten().any(|v| *v < 0.0);
        PrecomputedEmbedder { vectors, signed }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl Embedder for PrecomputedEmbedder {
    fn id(&self) -> &str {
        Self::ID
    }

    fn normalization(&self) -> Normalization {
        if self.signed {
            Normalization::Shifted
        } else {
            Normalization::Identity
        }
    }

    fn embed(&self, reviews: &[&Review]) -> Result<Vec<EmbeddingVector>> {
        let mut dim = None;
        reviews
            .iter()
            .map(|r| {
                let v = self
                    .vectors
                    .get(&r.review_id)
                    .ok_or_else(|| Error::InvalidInput(alloc::format!("no vector for review {}", r.review_id)))?;
                match dim {
                    None => dim = Some(v.len()),
                    Some(d) if d != v.len() => {
                        return Err(Error::InvalidInput(alloc::format!(
                            "vector for {} has dimension {}, expected {d}",
                            r.review_id,
                            v.len()
                        )))
                    }
                    _ => {}
                }
                Ok(EmbeddingVector::dense(v.clone()))
            })
            .collect()
    }
}

/// Resolves a built-in embedder by identifier.
pub fn embedder_by_id(id: &str) -> Result<Box<dyn Embedder>> {
    match id {
        TfIdfEmbedder::ID => Ok(Box::new(TfIdfEmbedder)),
        other => Err(Error::UnknownEmbedder(other.to_string())),
    }
}

/// Dense symmetric matrix of normalized similarities, diagonal 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    product_id: String,
    n: usize,
    sim: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn build(product_id: &str, vectors: &[EmbeddingVector], normalization: Normalization) -> Result<Self> {
        let n = vectors.len();
        if let Some(i) = vectors.iter().position(|v| v.norm == 0.0) {
            return Err(Error::InvalidInput(alloc::format!("zero-norm vector at position {i}")));
        }
        let mut sim = alloc::vec![0.0; n * n];
        for i in 0..n {
            sim[i * n + i] = 1.0;
            for j in i + 1..n {
                let s = similarity(&vectors[i], &vectors[j], normalization)?;
                sim[i * n + j] = s;
                sim[j * n + i] = s;
            }
        }
        Ok(SimilarityMatrix {
            product_id: product_id.to_string(),
            n,
            sim,
        })
    }

    /// Wraps a precomputed row-major matrix, validating its invariants.
    pub fn from_rows(product_id: &str, n: usize, sim: Vec<f64>) -> Result<Self> {
        if sim.len() != n * n {
            return Err(Error::InvalidInput(alloc::format!(
                "expected {} entries, got {}",
                n * n,
                sim.len()
            )));
        }
        for i in 0..n {
            if sim[i * n + i] != 1.0 {
                return Err(Error::InvalidInput(alloc::format!("diagonal entry {i} is not 1")));
            }
            for j in 0..n {
                let v = sim[i * n + j];
                if !(0.0..=1.0).contains(&v) || v != sim[j * n + i] {
                    return Err(Error::InvalidInput(alloc::format!(
                        "entry ({i}, {j}) breaks symmetry or range"
                    )));
                }
            }
        }
        Ok(SimilarityMatrix {
            product_id: product_id.to_string(),
            n,
            sim,
        })
    }

    pub fn product_id(&self) -> &str {
        &self.product_id
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sim[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.sim[i * self.n..(i + 1) * self.n]
    }
}

/// Unvisited reviews within `threshold` similarity of any visited review.
pub fn redundancy_set(
    visited: &[usize],
    unvisited: &[usize],
    matrix: &SimilarityMatrix,
    threshold: f64,
) -> BTreeSet<usize> {
    unvisited
        .iter()
        .copied()
        .filter(|&u| visited.iter().any(|&v| matrix.get(u, v) >= threshold))
        .collect()
}
