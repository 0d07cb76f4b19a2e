//! Facts: subject-predicate-object triples with optional annotations.

use std::fmt;
use std::io::Read;

use crate::error::{Error, Result};
use crate::ident::{EntityId, RelationId};

/// One assertion. `episode`, `timestamp` (scene index within the episode)
/// and `revealed_by` are optional annotations carried alongside the core
/// triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fact {
    pub subject: EntityId,
    pub predicate: RelationId,
    pub object: EntityId,
    pub episode: Option<u32>,
    pub timestamp: Option<u32>,
    pub revealed_by: Option<EntityId>,
}

impl Fact {
    pub fn new(subject: EntityId, predicate: RelationId, object: EntityId) -> Self {
        Fact {
            subject,
            predicate,
            object,
            episode: None,
            timestamp: None,
            revealed_by: None,
        }
    }

    /// Convenience constructor from raw labels.
    pub fn from_labels(subject: &str, predicate: &str, object: &str) -> Result<Self> {
        Ok(Fact::new(
            EntityId::new(subject)?,
            RelationId::new(predicate)?,
            EntityId::new(object)?,
        ))
    }

    pub fn with_episode(mut self, episode: u32) -> Self {
        self.episode = Some(episode);
        self
    }

    pub fn key(&self) -> TripleKey {
        TripleKey {
            subject: self.subject.clone(),
            predicate: self.predicate.clone(),
            object: self.object.clone(),
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.predicate, self.object)
    }
}

/// The deduplication key of a fact: its core triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TripleKey {
    pub subject: EntityId,
    pub predicate: RelationId,
    pub object: EntityId,
}

impl fmt::Display for TripleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.predicate, self.object)
    }
}

fn parse_count(field: &str, what: &str, min: u32) -> Result<Option<u32>> {
    let field = field.trim();
    if field.is_empty() {
        return Ok(None);
    }
    let value: u32 = field.parse().map_err(|_| {
        Error::invalid(format!(
            "{what} must be a nonnegative integer, got `{field}`"
        ))
    })?;
    if value < min {
        return Err(Error::invalid(format!(
            "{what} must be >= {min}, got {value}"
        )));
    }
    Ok(Some(value))
}

/// Parse one CSV record of 3 to 6 fields:
/// `subject,predicate,object[,episode][,timestamp][,revealed_by]`.
pub fn parse_fact_row(fields: &[&str]) -> Result<Fact> {
    if fields.len() < 3 || fields.len() > 6 {
        return Err(Error::invalid(format!(
            "expected 3 to 6 fields, got {}",
            fields.len()
        )));
    }
    let subject = EntityId::new(fields[0]).map_err(|e| Error::invalid(format!("subject: {e}")))?;
    let predicate =
        RelationId::new(fields[1]).map_err(|e| Error::invalid(format!("predicate: {e}")))?;
    let object = EntityId::new(fields[2]).map_err(|e| Error::invalid(format!("object: {e}")))?;

    let episode = parse_count(fields.get(3).copied().unwrap_or(""), "episode", 1)?;
    let timestamp = parse_count(fields.get(4).copied().unwrap_or(""), "timestamp", 0)?;
    let revealed_by = match fields.get(5).map(|f| f.trim()) {
        Some("") | None => None,
        Some(raw) => {
            Some(EntityId::new(raw).map_err(|e| Error::invalid(format!("revealed_by: {e}")))?)
        }
    };

    Ok(Fact {
        subject,
        predicate,
        object,
        episode,
        timestamp,
        revealed_by,
    })
}

/// Read a fact CSV. The canonical header row
/// `subject,predicate,object,episode,timestamp,revealed_by` is skipped when
/// present. Returns facts in file order; errors carry 1-based line numbers.
pub fn read_facts_csv<R: Read>(reader: R) -> Result<Vec<Fact>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut facts = Vec::new();
    for (idx, record) in csv_reader.records().enumerate() {
        let record = record.map_err(|e| match e.position() {
            Some(pos) => Error::parse(pos.line() as usize, e.to_string()),
            None => Error::invalid(e.to_string()),
        })?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(idx + 1);
        let fields: Vec<&str> = record.iter().collect();
        if idx == 0 && fields.first().map(|f| f.trim()) == Some("subject") {
            continue; // header row
        }
        if fields.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let fact = parse_fact_row(&fields).map_err(|e| Error::parse(line, e.to_string()))?;
        facts.push(fact);
    }
    Ok(facts)
}
