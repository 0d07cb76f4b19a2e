//! storygraph: ontology-validated knowledge graphs for narrative data,
//! plus the analysis stack that mines them.
//!
//! The pipeline:
//!
//! 1. [`kg`] — parse fact spreadsheets and an ontology into a
//!    [`KnowledgeGraph`], materialize symmetric/inverse closure, reify
//!    statements for temporal and provenance annotations.
//! 2. [`graph_ops`] — undirected projection, character subgraphs, DOT and
//!    N-Triples exports.
//! 3. [`embedding`] — translational embeddings trained with margin ranking,
//!    projected to 2D with exact t-SNE ([`tsne`]).
//! 4. [`topics`] — random-walk corpus generation, TF-IDF, NMF topics.
//! 5. [`linkpred`] — distance ranking, train/test splits, Hits@k and MRR.
//!
//! Every randomized operation takes an explicit seed and is deterministic
//! under sequential execution.

pub mod embedding;
pub mod error;
pub mod fact;
pub mod graph_ops;
pub mod ident;
pub mod kg;
pub mod linkpred;
pub mod ontology;
pub mod topics;
pub mod tsne;

pub use error::{Error, Result};
pub use fact::{parse_fact_row, read_facts_csv, Fact, TripleKey};
pub use ident::{EntityId, RelationId};
pub use kg::{KnowledgeGraph, Mode, Pattern, Stats, StoredFact};
pub use ontology::{Ontology, RelationProps};
