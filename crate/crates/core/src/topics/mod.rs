//! Topic extraction from the knowledge graph: fixed-length random walks
//! produce token documents (vertex and relation labels interleaved), which
//! are TF-IDF vectorized and factorized with NMF.

mod nmf;
mod tfidf;

pub use nmf::{nmf, NmfResult};
pub use tfidf::tfidf;

use indexmap::IndexSet;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph_ops::UndirectedGraph;
use crate::ident::EntityId;

/// One walk document: `2*steps + 1` tokens alternating vertex and relation
/// labels, beginning and ending with a vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkDocument {
    pub tokens: Vec<String>,
    pub start: EntityId,
    pub steps: usize,
}

impl WalkDocument {
    /// Tokens at vertex positions (0, 2, 4, ...).
    pub fn vertex_tokens(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().step_by(2).map(String::as_str)
    }
}

/// A generated walk corpus plus the vocabulary of observed tokens, in first
/// appearance order.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub documents: Vec<WalkDocument>,
    pub vocabulary: IndexSet<String>,
    pub walk_count: usize,
    pub walk_length: usize,
    pub seed: u64,
}

impl Corpus {
    /// One document per line, tokens space separated.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for doc in &self.documents {
            out.push_str(&doc.tokens.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Walk `steps` edges from `start`: the next vertex is uniform over the
/// current vertex's neighbors, and the emitted edge token is the predicate
/// of a uniformly chosen supporting fact of the traversed pair.
pub fn random_walk(
    g: &UndirectedGraph,
    start: usize,
    steps: usize,
    rng: &mut impl Rng,
) -> Result<WalkDocument> {
    if steps == 0 {
        return Err(Error::invalid("walk length must be at least 1"));
    }
    if g.degree(start) == 0 {
        return Err(Error::invalid(format!(
            "cannot start a walk at isolated vertex `{}`",
            g.label(start)
        )));
    }
    let mut tokens = Vec::with_capacity(2 * steps + 1);
    tokens.push(g.label(start).to_string());
    let mut current = start;
    for _ in 0..steps {
        let edges = g.neighbors(current);
        let edge = &edges[rng.gen_range(0..edges.len())];
        let fact = &edge.facts[rng.gen_range(0..edge.facts.len())];
        tokens.push(fact.predicate.to_string());
        tokens.push(g.label(edge.neighbor).to_string());
        current = edge.neighbor;
    }
    Ok(WalkDocument {
        tokens,
        start: g.label(start).clone(),
        steps,
    })
}

/// Generate `walk_count` documents of `walk_length` steps each. Start
/// vertices are uniform over vertices of degree >= 1. Each document draws
/// its randomness from (seed, document index), so the corpus is independent
/// of generation order.
pub fn generate_corpus(
    g: &UndirectedGraph,
    walk_count: usize,
    walk_length: usize,
    seed: u64,
) -> Result<Corpus> {
    let eligible = g.active_vertices();
    if walk_count > 0 && eligible.is_empty() {
        return Err(Error::invalid("no vertex of degree >= 1 to start from"));
    }
    let mut documents = Vec::with_capacity(walk_count);
    let mut vocabulary = IndexSet::new();
    for doc_index in 0..walk_count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(doc_index as u64 + 1);
        let start = eligible[rng.gen_range(0..eligible.len())];
        let doc = random_walk(g, start, walk_length, &mut rng)?;
        for token in &doc.tokens {
            vocabulary.insert(token.clone());
        }
        documents.push(doc);
    }
    Ok(Corpus {
        documents,
        vocabulary,
        walk_count,
        walk_length,
        seed,
    })
}

/// Corpus coverage of the graph's vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageStats {
    /// Fraction of vertices appearing in at least one document.
    pub coverage: f64,
    /// Mean, over all vertices, of the number of documents containing the
    /// vertex (vertices in no document count 0).
    pub mean_repetition: f64,
}

pub fn coverage_stats(corpus: &Corpus, g: &UndirectedGraph) -> CoverageStats {
    let n = g.vertex_count();
    if n == 0 {
        return CoverageStats {
            coverage: 0.0,
            mean_repetition: 0.0,
        };
    }
    let mut containing_docs: std::collections::HashMap<&str, usize> =
        std::collections::HashMap::new();
    for doc in &corpus.documents {
        let distinct: std::collections::BTreeSet<&str> = doc.vertex_tokens().collect();
        for token in distinct {
            *containing_docs.entry(token).or_insert(0) += 1;
        }
    }
    let mut covered = 0usize;
    let mut total_docs = 0usize;
    for vertex in g.vertices() {
        if let Some(&count) = containing_docs.get(vertex.as_str()) {
            covered += 1;
            total_docs += count;
        }
    }
    CoverageStats {
        coverage: covered as f64 / n as f64,
        mean_repetition: total_docs as f64 / n as f64,
    }
}

/// TF-IDF matrix plus NMF factors over a corpus.
#[derive(Debug, Clone)]
pub struct TopicModel {
    pub vocabulary: Vec<String>,
    /// m x n TF-IDF matrix (rows: vocabulary, columns: documents).
    pub x: Array2<f64>,
    /// m x r nonnegative topic loadings.
    pub u: Array2<f64>,
    /// r x n nonnegative document mixtures.
    pub v: Array2<f64>,
    pub residuals: Vec<f64>,
}

impl TopicModel {
    pub fn topic_count(&self) -> usize {
        self.u.ncols()
    }

    /// For each topic, the `k` heaviest vocabulary tokens, descending by
    /// weight; ties resolve to the lower vocabulary index.
    pub fn top_terms(&self, k: usize) -> Result<Vec<Vec<(String, f64)>>> {
        let m = self.vocabulary.len();
        if k == 0 || k > m {
            return Err(Error::invalid(format!("k must be in 1..={m}, got {k}")));
        }
        let mut topics = Vec::with_capacity(self.topic_count());
        for j in 0..self.topic_count() {
            let mut order: Vec<usize> = (0..m).collect();
            // Stable sort keeps vocabulary order among equal weights.
            order.sort_by(|&a, &b| {
                self.u[[b, j]]
                    .partial_cmp(&self.u[[a, j]])
                    .expect("NMF weights are finite")
            });
            topics.push(
                order
                    .into_iter()
                    .take(k)
                    .map(|t| (self.vocabulary[t].clone(), self.u[[t, j]]))
                    .collect(),
            );
        }
        Ok(topics)
    }

    /// CSV export: `topic_id,rank,token,weight`.
    pub fn to_csv(&self, k: usize) -> Result<String> {
        use std::fmt::Write as _;
        let mut out = String::from("topic_id,rank,token,weight\n");
        for (topic_id, terms) in self.top_terms(k)?.iter().enumerate() {
            for (rank, (token, weight)) in terms.iter().enumerate() {
                writeln!(out, "{topic_id},{},{token},{weight}", rank + 1).unwrap();
            }
        }
        Ok(out)
    }
}

/// TF-IDF vectorize the corpus and factorize with `r` topics.
pub fn fit_topics(corpus: &Corpus, r: usize, iterations: usize, seed: u64) -> Result<TopicModel> {
    let x = tfidf(corpus)?;
    let NmfResult { u, v, residuals } = nmf(&x, r, iterations, seed)?;
    Ok(TopicModel {
        vocabulary: corpus.vocabulary.iter().cloned().collect(),
        x,
        u,
        v,
        residuals,
    })
}
