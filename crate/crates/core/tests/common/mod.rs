//! Brute-force reference implementations shared by the property tests and
//! the acceptance suite. They work on plain vectors and sets and never call
//! into the engine's metric or scoring code.

#![allow(dead_code)]

use std::collections::BTreeSet;

use revex_core::{Corpus, ProductSpace, Review, Sentiment, SimilarityMatrix};

pub const SENTIMENTS: [Sentiment; 3] = [Sentiment::Positive, Sentiment::Neutral, Sentiment::Negative];

/// A toy product: ids, sentiments and an explicit similarity matrix.
#[derive(Debug, Clone)]
pub struct World {
    pub ids: Vec<String>,
    pub sentiments: Vec<Sentiment>,
    pub sim: Vec<Vec<f64>>,
}

impl World {
    pub fn n(&self) -> usize {
        self.ids.len()
    }

    /// Builds a world from a seed with a small xorshift generator so the
    /// oracle tests do not depend on the engine's RNG choices.
    pub fn random(seed: u64, n: usize, quantize: bool) -> World {
        let mut rng = XorShift(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1);
        // Half of the worlds lack one sentiment entirely.
        let drop = rng.next() % 6;
        let allowed: Vec<Sentiment> = SENTIMENTS
            .iter()
            .copied()
            .enumerate()
            .filter(|(i, _)| drop < 3 || *i as u64 != drop - 3)
            .map(|(_, s)| s)
            .collect();
        let ids = (0..n).map(|i| format!("r{i:03}")).collect();
        let sentiments = (0..n)
            .map(|_| allowed[(rng.next() % allowed.len() as u64) as usize])
            .collect();
        let mut sim = vec![vec![0.0; n]; n];
        for i in 0..n {
            sim[i][i] = 1.0;
            for j in i + 1..n {
                let mut v = rng.unit();
                // Bias towards the threshold region so coverage is exercised.
                if rng.next().is_multiple_of(4) {
                    v = 0.7 + 0.3 * v;
                }
                if quantize {
                    v = (v * 10.0).round() / 10.0;
                }
                sim[i][j] = v;
                sim[j][i] = v;
            }
        }
        World { ids, sentiments, sim }
    }

    pub fn space(&self, threshold: f64) -> ProductSpace {
        let reviews: Vec<Review> = (0..self.n())
            .map(|i| Review {
                review_id: self.ids[i].clone(),
                product_id: "p".into(),
                title: None,
                text: format!("review number {i} with some plain words"),
                stars: match self.sentiments[i] {
                    Sentiment::Positive => 5,
                    Sentiment::Neutral => 3,
                    Sentiment::Negative => 1,
                },
                sentiment: self.sentiments[i],
                word_count: 10 + i % 91,
            })
            .collect();
        let corpus = Corpus::from_reviews(reviews.clone());
        let product = corpus.product("p").unwrap().clone();
        let flat: Vec<f64> = self.sim.iter().flatten().copied().collect();
        let matrix = SimilarityMatrix::from_rows("p", self.n(), flat).unwrap();
        let salience = (0..self.n()).map(|i| ((i * 7919) % 101) as f64 + 1.0).collect();
        ProductSpace::from_parts(product, reviews, matrix, salience, threshold).unwrap()
    }
}

pub struct XorShift(pub u64);

impl XorShift {
    pub fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    pub fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }

    pub fn shuffle<T>(&mut self, v: &mut [T]) {
        for i in (1..v.len()).rev() {
            let j = self.below(i + 1);
            v.swap(i, j);
        }
    }
}

/// `C = V ∪ { u ∉ V : ∃ v ∈ V, sim[u][v] ≥ t }` by double loop.
pub fn covered_brute(world: &World, visited: &[usize], threshold: f64) -> BTreeSet<usize> {
    let vset: BTreeSet<usize> = visited.iter().copied().collect();
    let mut covered = vset.clone();
    for u in 0..world.n() {
        if vset.contains(&u) {
            continue;
        }
        for &v in visited {
            if world.sim[u][v] >= threshold {
                covered.insert(u);
            }
        }
    }
    covered
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleMetrics {
    pub visit_pct: u8,
    pub coverage_pct: u8,
    pub distribution: Vec<(Sentiment, f64)>,
    pub skewed_toward: Option<Sentiment>,
}

/// Visit / Coverage as `ceil` of the percentage, Distribution as
/// `|V_X| / |V_X ∪ U_X|`, skew when one sentiment leads every other by more
/// than `skew`.
pub fn metrics_brute(world: &World, visited: &[usize], covered: &BTreeSet<usize>, skew: f64) -> OracleMetrics {
    let n = world.n();
    let pct = |k: usize| {
        if n == 0 {
            0
        } else {
            ((100 * k) as f64 / n as f64).ceil() as u8
        }
    };
    let vset: BTreeSet<usize> = visited.iter().copied().collect();
    let mut distribution = Vec::new();
    for x in SENTIMENTS {
        let v_x: BTreeSet<usize> = vset.iter().copied().filter(|&i| world.sentiments[i] == x).collect();
        let u_x: BTreeSet<usize> = (0..n)
            .filter(|i| !vset.contains(i) && world.sentiments[*i] == x)
            .collect();
        let union: BTreeSet<usize> = v_x.union(&u_x).copied().collect();
        if !union.is_empty() {
            distribution.push((x, v_x.len() as f64 / union.len() as f64));
        }
    }
    let mut skewed_toward = None;
    for &(x, dx) in &distribution {
        let others: Vec<f64> = distribution.iter().filter(|(y, _)| *y != x).map(|(_, d)| *d).collect();
        if !others.is_empty() && others.iter().all(|&dy| dx > dy + skew) {
            skewed_toward = Some(x);
        }
    }
    OracleMetrics {
        visit_pct: pct(vset.len()),
        coverage_pct: pct(covered.len()),
        distribution,
        skewed_toward,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flag {
    Dissimilarity,
    Sentiment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCandidate {
    pub id: String,
    pub d: f64,
    pub s: f64,
    pub cov: f64,
    pub score: f64,
    pub flag: Flag,
}

/// Line-by-line transcription of the suggestion procedure over id lists.
pub fn get_suggestion_naive(
    world: &World,
    u_list: &[usize],
    v_list: &[usize],
    s_list: &[Flag],
    top: usize,
) -> Vec<OracleCandidate> {
    // Score modifiers M; None while no suggestion was visited.
    let m: Option<(f64, f64)> = if s_list.is_empty() {
        None
    } else {
        let size = s_list.len() as f64;
        let s_dis = s_list.iter().filter(|f| **f == Flag::Dissimilarity).count() as f64;
        let s_sent = s_list.iter().filter(|f| **f == Flag::Sentiment).count() as f64;
        Some((1.0 - s_dis / size, 1.0 - s_sent / size))
    };
    let mut t: Vec<OracleCandidate> = Vec::new();
    for &u in u_list {
        let mut v_prime: Vec<usize> = v_list.to_vec();
        v_prime.push(u);
        let mut p: Vec<(Sentiment, f64)> = Vec::new();
        for x in SENTIMENTS {
            let v_prime_x = v_prime.iter().filter(|&&i| world.sentiments[i] == x).count();
            let v_x: Vec<usize> = v_list.iter().copied().filter(|&i| world.sentiments[i] == x).collect();
            let u_x: Vec<usize> = u_list.iter().copied().filter(|&i| world.sentiments[i] == x).collect();
            let union: BTreeSet<usize> = v_x.into_iter().chain(u_x).collect();
            if !union.is_empty() {
                p.push((x, v_prime_x as f64 / union.len() as f64));
            }
        }
        let k = p.len() as f64;
        let mean = p.iter().map(|(_, v)| v).sum::<f64>() / k;
        let cov = if mean == 0.0 {
            0.0
        } else {
            let var = p.iter().map(|(_, v)| (v - mean) * (v - mean)).sum::<f64>() / k;
            var.sqrt() / mean
        };
        let min_sim = v_list.iter().map(|&v| world.sim[u][v]).fold(f64::INFINITY, f64::min);
        let d = 1.0 - min_sim;
        let p_u = p.iter().find(|(x, _)| *x == world.sentiments[u]).unwrap().1;
        let s = if cov < 1.0 {
            1.0 - cov
        } else if cov > 1.0 {
            1.0 - p_u
        } else {
            1.0 - p_u
        };
        let score = match m {
            None => 0.5 * d + 0.5 * s,
            Some((m_dis, m_sent)) => m_dis * d + m_sent * s,
        };
        let flag = if s > d { Flag::Sentiment } else { Flag::Dissimilarity };
        t.push(OracleCandidate {
            id: world.ids[u].clone(),
            d,
            s,
            cov,
            score,
            flag,
        });
    }
    t.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap().then_with(|| a.id.cmp(&b.id)));
    t.truncate(top);
    t
}

/// All unordered content-token pairs per review, counted once per review.
pub fn keyword_pairs_brute(docs: &[Vec<String>]) -> Vec<(String, String, usize)> {
    let mut all: Vec<(String, String)> = Vec::new();
    for doc in docs {
        let mut seen: Vec<(String, String)> = Vec::new();
        for a in doc {
            for b in doc {
                if a < b && !seen.contains(&(a.clone(), b.clone())) {
                    seen.push((a.clone(), b.clone()));
                }
            }
        }
        all.extend(seen);
    }
    let mut counted: Vec<(String, String, usize)> = Vec::new();
    for (a, b) in all {
        match counted.iter_mut().find(|(x, y, _)| *x == a && *y == b) {
            Some(entry) => entry.2 += 1,
            None => counted.push((a, b, 1)),
        }
    }
    counted.sort_by(|x, y| y.2.cmp(&x.2).then_with(|| (&x.0, &x.1).cmp(&(&y.0, &y.1))));
    counted
}
