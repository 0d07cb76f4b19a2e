//! Entity and relation identifiers.
//!
//! Labels are canonical strings: surrounding whitespace is trimmed and
//! internal spaces become underscores, so `Veronica Mars` and
//! `Veronica_Mars` name the same entity. Identifiers are case sensitive.

use std::borrow::Borrow;
use std::fmt;

use crate::error::{Error, Result};

/// Characters allowed in a normalized identifier.
fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '\'' | '\u{2019}' | '.' | '-')
}

/// Trim, replace internal spaces with `_`, and validate the remaining
/// characters. Returns the canonical label.
pub fn normalize_label(raw: &str) -> Result<String> {
    let label: String = raw.trim().replace(' ', "_");
    if label.is_empty() {
        return Err(Error::invalid("empty identifier"));
    }
    if let Some(bad) = label.chars().find(|&c| !is_ident_char(c)) {
        return Err(Error::invalid(format!(
            "illegal character {bad:?} in identifier `{label}`"
        )));
    }
    Ok(label)
}

macro_rules! ident_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(String);

        impl $name {
            /// Parse a raw string into a canonical identifier.
            pub fn new(raw: &str) -> Result<Self> {
                Ok(Self(normalize_label(raw)?))
            }

            /// Wrap a label that is already canonical (used for labels the
            /// library itself constructs).
            pub(crate) fn from_canonical(label: String) -> Self {
                Self(label)
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

ident_type! {
    /// Label of a node in the knowledge graph.
    EntityId
}

ident_type! {
    /// Label of a relation (predicate).
    RelationId
}

impl From<&RelationId> for EntityId {
    /// Relations become ordinary entities when a statement is reified.
    fn from(r: &RelationId) -> Self {
        EntityId(r.0.clone())
    }
}
