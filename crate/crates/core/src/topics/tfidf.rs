//! TF-IDF vectorization of walk documents.
//!
//! `X[t, d] = count(t in d) * idf(t)` with the smoothed
//! `idf(t) = ln((1 + n) / (1 + df(t))) + 1`, then every column is scaled to
//! unit Euclidean norm. A token present in every document therefore gets
//! idf exactly 1, damping ubiquitous vertices without zeroing them.

use ndarray::Array2;

use crate::error::{Error, Result};

use super::Corpus;

/// Build the m x n TF-IDF matrix; rows follow vocabulary order, columns
/// follow document order.
pub fn tfidf(corpus: &Corpus) -> Result<Array2<f64>> {
    let n = corpus.documents.len();
    let m = corpus.vocabulary.len();
    if n == 0 || m == 0 {
        return Err(Error::invalid("cannot vectorize an empty corpus"));
    }

    // Raw term counts.
    let mut x = Array2::zeros((m, n));
    for (d, doc) in corpus.documents.iter().enumerate() {
        for token in &doc.tokens {
            let t = corpus
                .vocabulary
                .get_index_of(token.as_str())
                .expect("vocabulary covers every token");
            x[[t, d]] += 1.0;
        }
    }

    // Document frequencies and idf weighting.
    for t in 0..m {
        let df = (0..n).filter(|&d| x[[t, d]] > 0.0).count();
        let idf = ((1.0 + n as f64) / (1.0 + df as f64)).ln() + 1.0;
        for d in 0..n {
            x[[t, d]] *= idf;
        }
    }

    // Unit-norm columns.
    for d in 0..n {
        let norm = (0..m).map(|t| x[[t, d]] * x[[t, d]]).sum::<f64>().sqrt();
        if norm > 0.0 {
            for t in 0..m {
                x[[t, d]] /= norm;
            }
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::super::WalkDocument;
    use super::*;
    use crate::ident::EntityId;
    use indexmap::IndexSet;

    fn doc(tokens: &[&str]) -> WalkDocument {
        WalkDocument {
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
            start: EntityId::new(tokens[0]).unwrap(),
            steps: tokens.len() / 2,
        }
    }

    fn corpus_of(docs: Vec<WalkDocument>) -> Corpus {
        let mut vocabulary = IndexSet::new();
        for d in &docs {
            for t in &d.tokens {
                vocabulary.insert(t.clone());
            }
        }
        Corpus {
            walk_count: docs.len(),
            walk_length: docs.first().map(|d| d.steps).unwrap_or(0),
            seed: 0,
            documents: docs,
            vocabulary,
        }
    }

    #[test]
    fn ubiquitous_token_gets_idf_one() {
        // "A" appears in both documents, "C" in one.
        let corpus = corpus_of(vec![doc(&["A", "r", "B"]), doc(&["A", "r", "C"])]);
        let x = tfidf(&corpus).unwrap();
        let a = corpus.vocabulary.get_index_of("A").unwrap();
        let c = corpus.vocabulary.get_index_of("C").unwrap();

        // Undo the column normalization of column 1 to read raw weights.
        let column_norm = (0..corpus.vocabulary.len())
            .map(|t| x[[t, 1]] * x[[t, 1]])
            .sum::<f64>()
            .sqrt();
        assert!((column_norm - 1.0).abs() < 1e-9);
        let idf_a = (3.0_f64 / 3.0).ln() + 1.0;
        let idf_c = (3.0_f64 / 2.0).ln() + 1.0;
        assert_eq!(idf_a, 1.0);
        // ratio of weights in column 1 equals ratio of idfs (counts are 1).
        let ratio = x[[c, 1]] / x[[a, 1]];
        assert!((ratio - idf_c / idf_a).abs() < 1e-12, "ratio {ratio}");
    }

    #[test]
    fn term_counts_are_raw_occurrences() {
        // Single looping document: A twice, r twice, B once. With one
        // document every idf is identical, so normalized weights are
        // proportional to counts.
        let corpus = corpus_of(vec![doc(&["A", "r", "B", "r", "A"])]);
        let x = tfidf(&corpus).unwrap();
        let a = corpus.vocabulary.get_index_of("A").unwrap();
        let r = corpus.vocabulary.get_index_of("r").unwrap();
        let b = corpus.vocabulary.get_index_of("B").unwrap();
        assert!((x[[a, 0]] / x[[b, 0]] - 2.0).abs() < 1e-12);
        assert!((x[[r, 0]] / x[[b, 0]] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn columns_have_unit_norm() {
        let corpus = corpus_of(vec![
            doc(&["A", "r", "B"]),
            doc(&["B", "s", "C", "s", "B"]),
            doc(&["C", "r", "A"]),
        ]);
        let x = tfidf(&corpus).unwrap();
        for d in 0..3 {
            let norm = (0..corpus.vocabulary.len())
                .map(|t| x[[t, d]] * x[[t, d]])
                .sum::<f64>()
                .sqrt();
            assert!((norm - 1.0).abs() <= 1e-9, "column {d} norm {norm}");
        }
        assert!(x.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let corpus = corpus_of(vec![]);
        assert!(tfidf(&corpus).is_err());
    }

    #[test]
    fn matches_reference_weights() {
        // Expected matrix computed once with scikit-learn's
        // TfidfTransformer(norm='l2', smooth_idf=True), which implements the
        // same smoothed-idf + unit-column formulation.
        let corpus = corpus_of(vec![
            doc(&["A", "r", "B"]),
            doc(&["A", "r", "B", "r", "A"]),
            doc(&["C", "s", "A"]),
        ]);
        let x = tfidf(&corpus).unwrap();
        let expected = [
            [0.48133416873660545, 0.5704833858957894, 0.3853716274664007], // A
            [0.6198053799406072, 0.7346012286495991, 0.0],                 // r
            [0.6198053799406072, 0.36730061432479955, 0.0],                // B
            [0.0, 0.0, 0.652490884512534],                                 // C
            [0.0, 0.0, 0.652490884512534],                                 // s
        ];
        assert_eq!(x.dim(), (5, 3));
        for (t, row) in expected.iter().enumerate() {
            for (d, &want) in row.iter().enumerate() {
                assert!(
                    (x[[t, d]] - want).abs() <= 1e-12,
                    "X[{t},{d}] = {}, want {want}",
                    x[[t, d]]
                );
            }
        }
    }
}
