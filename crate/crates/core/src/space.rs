//! Per-product precomputed structure: reviews in a fixed local order, the
//! similarity matrix, thresholded neighbor lists and keyword matches.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::corpus::{Corpus, Product, Review, SentimentCounts};
use crate::embedding::{Embedder, SimilarityMatrix};
use crate::error::{Error, Result};
use crate::keywords::{self, KeywordPair};
use crate::search;

#[derive(Debug, Clone)]
pub struct ProductSpace {
    product: Product,
    reviews: Vec<Review>,
    index: BTreeMap<String, usize>,
    matrix: SimilarityMatrix,
    threshold: f64,
    neighbors: Vec<Vec<usize>>,
    salience: Vec<f64>,
    keywords: Vec<KeywordPair>,
    keyword_members: Vec<Vec<usize>>,
}

impl ProductSpace {
    /// Embeds one product's reviews and precomputes everything a session
    /// needs.
    pub fn build(corpus: &Corpus, product_id: &str, embedder: &dyn Embedder, threshold: f64) -> Result<Self> {
        let product = corpus.product(product_id)?.clone();
        let reviews: Vec<Review> = corpus.product_reviews(product_id)?.into_iter().cloned().collect();
        let refs: Vec<&Review> = reviews.iter().collect();
        let vectors = embedder.embed(&refs)?;
        let matrix = SimilarityMatrix::build(product_id, &vectors, embedder.normalization())?;
        let salience = vectors.iter().map(|v| v.norm()).collect();
        Self::from_parts(product, reviews, matrix, salience, threshold)
    }

    /// Assembles a space from an explicit matrix. `salience` ranks reviews for
    /// cold-start suggestions (higher first).
    pub fn from_parts(
        product: Product,
        reviews: Vec<Review>,
        matrix: SimilarityMatrix,
        salience: Vec<f64>,
        threshold: f64,
    ) -> Result<Self> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "similarity threshold {threshold} outside (0, 1]"
            )));
        }
        let n = reviews.len();
        if matrix.len() != n || salience.len() != n || product.n != n {
            return Err(Error::InvalidInput(
                "matrix, salience and review counts disagree".to_string(),
            ));
        }
        let mut index = BTreeMap::new();
        for (i, r) in reviews.iter().enumerate() {
            if r.product_id != product.product_id || index.insert(r.review_id.clone(), i).is_some() {
                return Err(Error::InvalidInput(alloc::format!(
                    "review {} misplaced or duplicated",
                    r.review_id
                )));
            }
        }
        let neighbors = (0..n)
            .map(|i| (0..n).filter(|&j| j != i && matrix.get(i, j) >= threshold).collect())
            .collect();
        let keywords = keywords::extract_keywords(&reviews, keywords::DEFAULT_TOP_K);
        let keyword_members = keywords
            .iter()
            .map(|k| (0..n).filter(|&i| search::matches_keyword(&reviews[i], k)).collect())
            .collect();
        Ok(ProductSpace {
            product,
            reviews,
            index,
            matrix,
            threshold,
            neighbors,
            salience,
            keywords,
            keyword_members,
        })
    }

    pub fn product(&self) -> &Product {
        &self.product
    }

    pub fn product_id(&self) -> &str {
        &self.product.product_id
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    pub fn reviews(&self) -> &[Review] {
        &self.reviews
    }

    pub fn review(&self, i: usize) -> &Review {
        &self.reviews[i]
    }

    pub fn position(&self, review_id: &str) -> Result<usize> {
        self.index.get(review_id).copied().ok_or_else(|| Error::UnknownReview {
            product: self.product.product_id.clone(),
            review: review_id.to_string(),
        })
    }

    pub fn matrix(&self) -> &SimilarityMatrix {
        &self.matrix
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Other reviews at or above the similarity threshold, ascending.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn salience(&self, i: usize) -> f64 {
        self.salience[i]
    }

    pub fn sentiment_totals(&self) -> SentimentCounts {
        self.product.sentiment_totals
    }

    pub fn keywords(&self) -> &[KeywordPair] {
        &self.keywords
    }

    /// Local indices of reviews matching `keywords()[k]`.
    pub fn keyword_members(&self, k: usize) -> &[usize] {
        &self.keyword_members[k]
    }
}

/// Every product of a corpus, each with its own [`ProductSpace`].
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    spaces: BTreeMap<String, ProductSpace>,
    order: Vec<String>,
}

impl Catalog {
    pub fn build(corpus: &Corpus, embedder: &dyn Embedder, threshold: f64) -> Result<Self> {
        let mut catalog = Catalog::default();
        for p in corpus.products() {
            catalog.insert(ProductSpace::build(corpus, &p.product_id, embedder, threshold)?);
        }
        Ok(catalog)
    }

    pub fn insert(&mut self, space: ProductSpace) {
        let id = space.product_id().to_string();
        if self.spaces.insert(id.clone(), space).is_none() {
            self.order.push(id);
        }
    }

    pub fn get(&self, product_id: &str) -> Result<&ProductSpace> {
        self.spaces
            .get(product_id)
            .ok_or_else(|| Error::UnknownProduct(product_id.to_string()))
    }

    /// Products in corpus order.
    pub fn iter(&self) -> impl Iterator<Item = &ProductSpace> {
        self.order.iter().map(|id| &self.spaces[id])
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}
