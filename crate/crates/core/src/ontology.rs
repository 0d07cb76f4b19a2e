//! Relation vocabulary and its rules.
//!
//! An ontology declares which relations exist, which of them are symmetric,
//! which come in inverse pairs, and (optionally) domain/range types checked
//! against declared entity types.
//!
//! The text format is line based, `#` starts a comment:
//!
//! ```text
//! relation friend_of symmetric
//! relation child_of inverse parent_of
//! relation employee_of domain Person range Person
//! entity Keith_Mars type Person
//! ```
//!
//! A bare `relation <name>` line declares a relation with default
//! properties. Repeated declarations for the same relation merge, with later
//! lines winning per field.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ident::{EntityId, RelationId};

/// Properties attached to one relation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationProps {
    pub symmetric: bool,
    pub inverse: Option<RelationId>,
    pub domain: Option<String>,
    pub range: Option<String>,
}

/// Declared relations plus optional entity typing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ontology {
    relations: BTreeMap<RelationId, RelationProps>,
    entity_types: BTreeMap<EntityId, String>,
}

impl Ontology {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse the line-based ontology format. Errors carry 1-based line
    /// numbers.
    pub fn parse(text: &str) -> Result<Self> {
        let mut onto = Ontology::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            match tokens[0] {
                "relation" => onto.parse_relation_line(&tokens, line_no)?,
                "entity" => onto.parse_entity_line(&tokens, line_no)?,
                other => {
                    return Err(Error::parse(
                        line_no,
                        format!("expected `relation` or `entity`, got `{other}`"),
                    ))
                }
            }
        }
        Ok(onto)
    }

    fn parse_relation_line(&mut self, tokens: &[&str], line_no: usize) -> Result<()> {
        if tokens.len() < 2 {
            return Err(Error::parse(line_no, "missing relation name"));
        }
        let name = RelationId::new(tokens[1]).map_err(|e| Error::parse(line_no, e.to_string()))?;
        let mut props = self.relations.get(&name).cloned().unwrap_or_default();

        let mut rest = tokens[2..].iter();
        let mut inverse_target: Option<RelationId> = None;
        while let Some(&key) = rest.next() {
            match key {
                "symmetric" => props.symmetric = true,
                "inverse" => {
                    let target = rest.next().ok_or_else(|| {
                        Error::parse(line_no, "`inverse` requires a relation name")
                    })?;
                    let target = RelationId::new(target)
                        .map_err(|e| Error::parse(line_no, e.to_string()))?;
                    // Later lines win: re-pairing must unlink the previous
                    // partner or involution breaks.
                    if let Some(old) = props.inverse.take() {
                        if old != target {
                            if let Some(partner) = self.relations.get_mut(&old) {
                                if partner.inverse.as_ref() == Some(&name) {
                                    partner.inverse = None;
                                }
                            }
                        }
                    }
                    props.inverse = Some(target.clone());
                    inverse_target = Some(target);
                }
                "domain" => {
                    let t = rest
                        .next()
                        .ok_or_else(|| Error::parse(line_no, "`domain` requires a type"))?;
                    props.domain = Some(t.to_string());
                }
                "range" => {
                    let t = rest
                        .next()
                        .ok_or_else(|| Error::parse(line_no, "`range` requires a type"))?;
                    props.range = Some(t.to_string());
                }
                other => {
                    return Err(Error::parse(
                        line_no,
                        format!("unknown relation property `{other}`"),
                    ))
                }
            }
        }

        if props.symmetric && props.inverse.as_ref().is_some_and(|inv| *inv != name) {
            return Err(Error::parse(
                line_no,
                format!("relation `{name}` declared both symmetric and inverse-paired"),
            ));
        }
        self.relations.insert(name.clone(), props);

        // Inverse pairing is involutive: declaring a->b also pairs b->a.
        if let Some(target) = inverse_target {
            if target != name {
                let back = self.relations.entry(target.clone()).or_default();
                match &back.inverse {
                    Some(existing) if *existing != name => {
                        return Err(Error::parse(
                            line_no,
                            format!(
                                "inverse conflict: `{target}` is already paired with `{existing}`"
                            ),
                        ))
                    }
                    _ => back.inverse = Some(name.clone()),
                }
                if back.symmetric {
                    return Err(Error::parse(
                        line_no,
                        format!("relation `{target}` declared both symmetric and inverse-paired"),
                    ));
                }
            }
        }
        Ok(())
    }

    fn parse_entity_line(&mut self, tokens: &[&str], line_no: usize) -> Result<()> {
        if tokens.len() != 4 || tokens[2] != "type" {
            return Err(Error::parse(
                line_no,
                "expected `entity <name> type <Type>`",
            ));
        }
        let entity = EntityId::new(tokens[1]).map_err(|e| Error::parse(line_no, e.to_string()))?;
        self.entity_types.insert(entity, tokens[3].to_string());
        Ok(())
    }

    pub fn relation(&self, r: &RelationId) -> Option<&RelationProps> {
        self.relations.get(r)
    }

    pub fn contains_relation(&self, r: &RelationId) -> bool {
        self.relations.contains_key(r)
    }

    /// Register a relation with default properties if it is not declared.
    pub fn register_default(&mut self, r: &RelationId) {
        self.relations.entry(r.clone()).or_default();
    }

    pub fn entity_type(&self, e: &EntityId) -> Option<&str> {
        self.entity_types.get(e).map(String::as_str)
    }

    pub fn set_entity_type(&mut self, e: EntityId, ty: String) {
        self.entity_types.insert(e, ty);
    }

    pub fn relations(&self) -> impl Iterator<Item = (&RelationId, &RelationProps)> {
        self.relations.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty() && self.entity_types.is_empty()
    }

    /// Serialize back to the text format, sorted, one declaration per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, props) in &self.relations {
            write!(out, "relation {name}").unwrap();
            if props.symmetric {
                out.push_str(" symmetric");
            }
            if let Some(inv) = &props.inverse {
                write!(out, " inverse {inv}").unwrap();
            }
            if let Some(d) = &props.domain {
                write!(out, " domain {d}").unwrap();
            }
            if let Some(r) = &props.range {
                write!(out, " range {r}").unwrap();
            }
            out.push('\n');
        }
        for (entity, ty) in &self.entity_types {
            writeln!(out, "entity {entity} type {ty}").unwrap();
        }
        out
    }
}
