//! The knowledge graph: entities, relations, facts, ontology closure,
//! reification, querying and serialization.

use std::collections::HashMap;
use std::fmt::Write as _;

use indexmap::IndexSet;

use crate::error::{Error, Result};
use crate::fact::{read_facts_csv, Fact, TripleKey};
use crate::ident::{EntityId, RelationId};
use crate::ontology::Ontology;

/// Relation used to attach time tokens to reified statements.
pub const OCCURS_AT: &str = "occurs_at";
/// Relation used to attach provenance to reified statements.
pub const REVEALED_BY: &str = "revealed_by";
/// Structural relations of a reified statement.
pub const RDF_SUBJECT: &str = "rdf_subject";
pub const RDF_PREDICATE_IS: &str = "rdf_predicate_is";
pub const RDF_OBJECT: &str = "rdf_object";

const ARCHIVE_MAGIC: &str = "# storygraph graph archive v1";

/// Validation mode for `add_fact`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Unknown relations are rejected.
    Strict,
    /// Unknown relations are registered with default properties.
    #[default]
    Permissive,
}

/// A fact plus its provenance flag: asserted from input, or derived by
/// ontology closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredFact {
    pub fact: Fact,
    pub derived: bool,
}

/// Triple pattern for `query`; `None` positions are wildcards.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pattern {
    pub subject: Option<EntityId>,
    pub predicate: Option<RelationId>,
    pub object: Option<EntityId>,
}

impl Pattern {
    fn matches(&self, fact: &Fact) -> bool {
        self.subject.as_ref().is_none_or(|s| *s == fact.subject)
            && self.predicate.as_ref().is_none_or(|p| *p == fact.predicate)
            && self.object.as_ref().is_none_or(|o| *o == fact.object)
    }
}

/// Counts reported by `stats`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stats {
    pub entity_count: usize,
    pub relation_count: usize,
    pub asserted_fact_count: usize,
    pub derived_fact_count: usize,
}

/// In-memory knowledge graph. Construction is single-writer; once built the
/// graph is immutable and can be shared freely across readers.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    entities: IndexSet<EntityId>,
    relations: IndexSet<RelationId>,
    facts: Vec<StoredFact>,
    by_key: HashMap<TripleKey, usize>,
    ontology: Ontology,
    reified: Vec<(TripleKey, EntityId)>,
    warnings: Vec<String>,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_ontology(ontology: Ontology) -> Self {
        KnowledgeGraph {
            ontology,
            ..Self::default()
        }
    }

    /// Build a graph from CSV text and an ontology in one step.
    pub fn ingest_csv(csv_text: &str, ontology: Ontology, mode: Mode) -> Result<Self> {
        let mut kg = KnowledgeGraph::with_ontology(ontology);
        for fact in read_facts_csv(csv_text.as_bytes())? {
            kg.add_fact(fact, mode)?;
        }
        Ok(kg)
    }

    /// Rebuild a graph from an ontology and a fact list (all asserted,
    /// permissive). Entity order follows first appearance in the fact list.
    pub fn from_parts<I>(ontology: Ontology, facts: I) -> Result<Self>
    where
        I: IntoIterator<Item = Fact>,
    {
        let mut kg = KnowledgeGraph::with_ontology(ontology);
        for fact in facts {
            kg.add_fact(fact, Mode::Permissive)?;
        }
        Ok(kg)
    }

    pub fn entities(&self) -> impl ExactSizeIterator<Item = &EntityId> {
        self.entities.iter()
    }

    pub fn relations(&self) -> impl ExactSizeIterator<Item = &RelationId> {
        self.relations.iter()
    }

    pub fn facts(&self) -> &[StoredFact] {
        &self.facts
    }

    pub fn ontology(&self) -> &Ontology {
        &self.ontology
    }

    pub fn contains_entity(&self, e: &EntityId) -> bool {
        self.entities.contains(e)
    }

    pub fn contains_triple(&self, key: &TripleKey) -> bool {
        self.by_key.contains_key(key)
    }

    pub fn entity_index(&self, e: &EntityId) -> Option<usize> {
        self.entities.get_index_of(e)
    }

    pub fn entity_at(&self, index: usize) -> Option<&EntityId> {
        self.entities.get_index(index)
    }

    /// Statement node created for a reified triple, if any.
    pub fn reified_statement(&self, key: &TripleKey) -> Option<&EntityId> {
        self.reified
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, stmt)| stmt)
    }

    pub fn reified(&self) -> &[(TripleKey, EntityId)] {
        &self.reified
    }

    /// Warnings accumulated during construction (annotation conflicts).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    fn register_entity(&mut self, e: &EntityId) {
        self.entities.insert(e.clone());
    }

    /// Register an entity that participates in no fact (isolated vertex).
    pub fn add_entity(&mut self, e: EntityId) {
        self.entities.insert(e);
    }

    /// Add a fact asserted from input. Returns `true` when the core triple
    /// is new. Re-adding an existing triple merges annotations: absent
    /// fields are filled, present fields are kept, and a conflicting value
    /// records a warning.
    pub fn add_fact(&mut self, fact: Fact, mode: Mode) -> Result<bool> {
        match mode {
            Mode::Strict if !self.ontology.contains_relation(&fact.predicate) => {
                return Err(Error::UnknownRelation(fact.predicate.to_string()))
            }
            Mode::Strict => {}
            Mode::Permissive => self.ontology.register_default(&fact.predicate),
        }
        self.check_types(&fact)?;

        self.register_entity(&fact.subject);
        self.register_entity(&fact.object);
        if let Some(who) = &fact.revealed_by {
            let who = who.clone();
            self.register_entity(&who);
        }
        self.relations.insert(fact.predicate.clone());

        let key = fact.key();
        if let Some(&idx) = self.by_key.get(&key) {
            let stored = &mut self.facts[idx];
            if stored.derived {
                stored.derived = false; // now directly asserted
            }
            merge_annotation(
                &mut stored.fact.episode,
                fact.episode,
                "episode",
                &key,
                &mut self.warnings,
            );
            merge_annotation(
                &mut stored.fact.timestamp,
                fact.timestamp,
                "timestamp",
                &key,
                &mut self.warnings,
            );
            merge_annotation(
                &mut stored.fact.revealed_by,
                fact.revealed_by,
                "revealed_by",
                &key,
                &mut self.warnings,
            );
            return Ok(false);
        }

        self.by_key.insert(key, self.facts.len());
        self.facts.push(StoredFact {
            fact,
            derived: false,
        });
        Ok(true)
    }

    fn check_types(&self, fact: &Fact) -> Result<()> {
        let Some(props) = self.ontology.relation(&fact.predicate) else {
            return Ok(());
        };
        for (declared, entity, role) in [
            (&props.domain, &fact.subject, "subject"),
            (&props.range, &fact.object, "object"),
        ] {
            if let (Some(expected), Some(actual)) = (declared, self.ontology.entity_type(entity)) {
                if expected != actual {
                    return Err(Error::TypeViolation {
                        relation: fact.predicate.to_string(),
                        role,
                        expected: expected.clone(),
                        actual: actual.to_string(),
                        entity: entity.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Append a closure-derived fact unless the triple already exists.
    pub(crate) fn add_derived(&mut self, fact: Fact) {
        let key = fact.key();
        if self.by_key.contains_key(&key) {
            return;
        }
        self.register_entity(&fact.subject);
        self.register_entity(&fact.object);
        if let Some(who) = fact.revealed_by.clone() {
            self.register_entity(&who);
        }
        self.relations.insert(fact.predicate.clone());
        self.ontology.register_default(&fact.predicate);
        self.by_key.insert(key, self.facts.len());
        self.facts.push(StoredFact {
            fact,
            derived: true,
        });
    }

    /// Materialize symmetric and inverse consequences of every fact. New
    /// facts are flagged derived and inherit episode/timestamp (but not
    /// provenance) from their source. Idempotent.
    pub fn apply_ontology_closure(&mut self) {
        let snapshot: Vec<Fact> = self.facts.iter().map(|sf| sf.fact.clone()).collect();
        for fact in snapshot {
            let Some(props) = self.ontology.relation(&fact.predicate).cloned() else {
                continue;
            };
            let reversed = |predicate: RelationId| Fact {
                subject: fact.object.clone(),
                predicate,
                object: fact.subject.clone(),
                episode: fact.episode,
                timestamp: fact.timestamp,
                revealed_by: None,
            };
            if props.symmetric {
                self.add_derived(reversed(fact.predicate.clone()));
            }
            if let Some(inverse) = props.inverse {
                self.add_derived(reversed(inverse));
            }
        }
    }

    /// Turn one existing fact into a first-class statement entity and attach
    /// the given annotations to it. The statement label is a deterministic
    /// function of the triple and its episode, so repeated calls reuse the
    /// same node. Returns the statement entity.
    pub fn reify(
        &mut self,
        key: &TripleKey,
        occurs_at: Option<EntityId>,
        revealed_by: Option<EntityId>,
    ) -> Result<EntityId> {
        let &idx = self
            .by_key
            .get(key)
            .ok_or_else(|| Error::FactNotFound(key.to_string()))?;
        let episode = self.facts[idx].fact.episode;

        let mut label = format!("stmt__{}__{}__{}", key.subject, key.predicate, key.object);
        if let Some(ep) = episode {
            write!(label, "__{ep}").unwrap();
        }
        let stmt = EntityId::from_canonical(label);

        let structural = [
            (RDF_SUBJECT, key.subject.clone()),
            (RDF_PREDICATE_IS, EntityId::from(&key.predicate)),
            (RDF_OBJECT, key.object.clone()),
        ];
        for (relation, object) in structural {
            let fact = Fact::new(
                stmt.clone(),
                RelationId::from_canonical(relation.to_string()),
                object,
            );
            self.add_fact(fact, Mode::Permissive)?;
        }
        if let Some(token) = occurs_at {
            let fact = Fact::new(
                stmt.clone(),
                RelationId::from_canonical(OCCURS_AT.to_string()),
                token,
            );
            self.add_fact(fact, Mode::Permissive)?;
        }
        if let Some(who) = revealed_by {
            let fact = Fact::new(
                stmt.clone(),
                RelationId::from_canonical(REVEALED_BY.to_string()),
                who,
            );
            self.add_fact(fact, Mode::Permissive)?;
        }

        if !self.reified.iter().any(|(k, _)| k == key) {
            self.reified.push((key.clone(), stmt.clone()));
        }
        Ok(stmt)
    }

    /// All facts (asserted and derived) matching the pattern, in insertion
    /// order. Unknown identifiers simply match nothing.
    pub fn query(&self, pattern: &Pattern) -> Vec<&StoredFact> {
        self.facts
            .iter()
            .filter(|sf| pattern.matches(&sf.fact))
            .collect()
    }

    pub fn stats(&self) -> Stats {
        let derived = self.facts.iter().filter(|sf| sf.derived).count();
        Stats {
            entity_count: self.entities.len(),
            relation_count: self.relations.len(),
            asserted_fact_count: self.facts.len() - derived,
            derived_fact_count: derived,
        }
    }

    /// One `<s> <p> <o> .` line per fact, in insertion order. The output can
    /// be read back with `import_ntriples`.
    pub fn export_ntriples(&self, base_iri: &str) -> String {
        let base = base_iri.trim_end_matches('/');
        let mut out = String::new();
        for sf in &self.facts {
            writeln!(
                out,
                "<{base}/{}> <{base}/{}> <{base}/{}> .",
                sf.fact.subject, sf.fact.predicate, sf.fact.object
            )
            .unwrap();
        }
        out
    }

    /// Parse N-Triples text produced by `export_ntriples`. Labels are
    /// recovered by stripping `base_iri/` (falling back to the final path
    /// segment); all facts are asserted and annotation-free.
    pub fn import_ntriples(text: &str, base_iri: &str) -> Result<Self> {
        let base = base_iri.trim_end_matches('/');
        let prefix = format!("{base}/");
        let mut kg = KnowledgeGraph::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let body = line
                .strip_suffix('.')
                .ok_or_else(|| Error::parse(line_no, "missing terminating `.`"))?
                .trim_end();
            let mut labels = Vec::with_capacity(3);
            let mut rest = body;
            for _ in 0..3 {
                rest = rest.trim_start();
                let inner = rest
                    .strip_prefix('<')
                    .and_then(|r| r.split_once('>'))
                    .ok_or_else(|| Error::parse(line_no, "expected `<iri>` term"))?;
                let (iri, tail) = inner;
                let label = iri
                    .strip_prefix(&prefix)
                    .unwrap_or_else(|| iri.rsplit('/').next().unwrap_or(iri));
                labels.push(label.to_string());
                rest = tail;
            }
            if !rest.trim().is_empty() {
                return Err(Error::parse(line_no, "trailing content after object"));
            }
            let fact = Fact::from_labels(&labels[0], &labels[1], &labels[2])
                .map_err(|e| Error::parse(line_no, e.to_string()))?;
            kg.add_fact(fact, Mode::Permissive)?;
        }
        Ok(kg)
    }

    /// Self-contained line-based archive: entity and relation order,
    /// ontology, facts with flags and annotations, and reified statements.
    pub fn save_archive(&self) -> String {
        let mut out = String::new();
        out.push_str(ARCHIVE_MAGIC);
        out.push('\n');
        out.push_str("[entities]\n");
        for e in &self.entities {
            writeln!(out, "{e}").unwrap();
        }
        out.push_str("[relations]\n");
        for r in &self.relations {
            writeln!(out, "{r}").unwrap();
        }
        out.push_str("[ontology]\n");
        out.push_str(&self.ontology.to_text());
        out.push_str("[facts]\n");
        for sf in &self.facts {
            let f = &sf.fact;
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                f.subject,
                f.predicate,
                f.object,
                f.episode.map(|v| v.to_string()).unwrap_or_default(),
                f.timestamp.map(|v| v.to_string()).unwrap_or_default(),
                f.revealed_by
                    .as_ref()
                    .map(|v| v.to_string())
                    .unwrap_or_default(),
                if sf.derived { "derived" } else { "asserted" },
            )
            .unwrap();
        }
        out.push_str("[reified]\n");
        for (key, stmt) in &self.reified {
            writeln!(
                out,
                "{},{},{},{}",
                key.subject, key.predicate, key.object, stmt
            )
            .unwrap();
        }
        out
    }

    pub fn load_archive(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, first)) if first == ARCHIVE_MAGIC => {}
            _ => return Err(Error::parse(1, "not a storygraph graph archive")),
        }

        let mut kg = KnowledgeGraph::new();
        let mut section = String::new();
        let mut ontology_text = String::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                section = line.to_string();
                continue;
            }
            match section.as_str() {
                "[entities]" => {
                    let e =
                        EntityId::new(line).map_err(|e| Error::parse(line_no, e.to_string()))?;
                    kg.entities.insert(e);
                }
                "[relations]" => {
                    let r =
                        RelationId::new(line).map_err(|e| Error::parse(line_no, e.to_string()))?;
                    kg.relations.insert(r);
                }
                "[ontology]" => {
                    ontology_text.push_str(line);
                    ontology_text.push('\n');
                }
                "[facts]" => {
                    let fields: Vec<&str> = line.split(',').collect();
                    if fields.len() != 7 {
                        return Err(Error::parse(line_no, "fact line must have 7 fields"));
                    }
                    let derived = match fields[6] {
                        "derived" => true,
                        "asserted" => false,
                        other => {
                            return Err(Error::parse(line_no, format!("bad fact flag `{other}`")))
                        }
                    };
                    let fact = crate::fact::parse_fact_row(&fields[..6])
                        .map_err(|e| Error::parse(line_no, e.to_string()))?;
                    let key = fact.key();
                    if kg.by_key.contains_key(&key) {
                        return Err(Error::parse(line_no, "duplicate triple in archive"));
                    }
                    kg.by_key.insert(key, kg.facts.len());
                    kg.facts.push(StoredFact { fact, derived });
                }
                "[reified]" => {
                    let fields: Vec<&str> = line.split(',').collect();
                    if fields.len() != 4 {
                        return Err(Error::parse(line_no, "reified line must have 4 fields"));
                    }
                    let key = TripleKey {
                        subject: EntityId::new(fields[0])
                            .map_err(|e| Error::parse(line_no, e.to_string()))?,
                        predicate: RelationId::new(fields[1])
                            .map_err(|e| Error::parse(line_no, e.to_string()))?,
                        object: EntityId::new(fields[2])
                            .map_err(|e| Error::parse(line_no, e.to_string()))?,
                    };
                    let stmt = EntityId::new(fields[3])
                        .map_err(|e| Error::parse(line_no, e.to_string()))?;
                    kg.reified.push((key, stmt));
                }
                _ => return Err(Error::parse(line_no, "content outside a known section")),
            }
        }
        kg.ontology = Ontology::parse(&ontology_text)?;
        kg.check_integrity()?;
        Ok(kg)
    }

    /// Every identifier referenced by a fact or reified entry must be
    /// registered; a well-formed archive always satisfies this.
    fn check_integrity(&self) -> Result<()> {
        for sf in &self.facts {
            for entity in [&sf.fact.subject, &sf.fact.object]
                .into_iter()
                .chain(sf.fact.revealed_by.as_ref())
            {
                if !self.entities.contains(entity) {
                    return Err(Error::UnknownEntity(entity.to_string()));
                }
            }
            if !self.relations.contains(&sf.fact.predicate) {
                return Err(Error::UnknownRelation(sf.fact.predicate.to_string()));
            }
        }
        for (key, stmt) in &self.reified {
            if !self.by_key.contains_key(key) {
                return Err(Error::FactNotFound(key.to_string()));
            }
            if !self.entities.contains(stmt) {
                return Err(Error::UnknownEntity(stmt.to_string()));
            }
        }
        Ok(())
    }
}

fn merge_annotation<T: PartialEq + std::fmt::Debug>(
    existing: &mut Option<T>,
    incoming: Option<T>,
    name: &str,
    key: &TripleKey,
    warnings: &mut Vec<String>,
) {
    match (existing.as_ref(), incoming) {
        (None, Some(value)) => *existing = Some(value),
        (Some(old), Some(new)) if *old != new => warnings.push(format!(
            "conflicting {name} for {key}: keeping {old:?}, ignoring {new:?}"
        )),
        _ => {}
    }
}
