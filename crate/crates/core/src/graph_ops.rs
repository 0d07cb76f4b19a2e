//! Undirected projection of the knowledge graph, character subgraphs, and
//! graph exports.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ident::{EntityId, RelationId};
use crate::kg::{KnowledgeGraph, Mode, OCCURS_AT};

/// Reference to one supporting fact of an undirected edge: its index into
/// `KnowledgeGraph::facts` plus the predicate label, kept here so random
/// walks can emit edge tokens without holding the source graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactRef {
    pub index: usize,
    pub predicate: RelationId,
}

/// One undirected adjacency entry: the neighbor's vertex index plus
/// references to every fact between the pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub neighbor: usize,
    pub facts: Vec<FactRef>,
}

/// The undirected graph obtained by forgetting the orientation and type of
/// every relation. Vertices are indexed in entity insertion order; parallel
/// facts between a pair collapse into one edge but stay attached as
/// supporting references.
#[derive(Debug, Clone, Default)]
pub struct UndirectedGraph {
    vertices: Vec<EntityId>,
    index: HashMap<EntityId, usize>,
    adjacency: Vec<Vec<Edge>>,
}

impl UndirectedGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[EntityId] {
        &self.vertices
    }

    pub fn label(&self, v: usize) -> &EntityId {
        &self.vertices[v]
    }

    pub fn vertex_index(&self, label: &EntityId) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn neighbors(&self, v: usize) -> &[Edge] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Vertex indices with at least one incident edge, ascending.
    pub fn active_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| self.degree(v) > 0)
            .collect()
    }
}

/// Project the knowledge graph onto its undirected underlying graph. With
/// `include_derived = false` only asserted facts contribute edges; isolated
/// entities remain as degree-0 vertices either way.
pub fn underlying_graph(kg: &KnowledgeGraph, include_derived: bool) -> UndirectedGraph {
    let vertices: Vec<EntityId> = kg.entities().cloned().collect();
    let index: HashMap<EntityId, usize> = vertices
        .iter()
        .enumerate()
        .map(|(i, e)| (e.clone(), i))
        .collect();
    let mut adjacency: Vec<Vec<Edge>> = vec![Vec::new(); vertices.len()];

    let mut edge_slot: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for (fact_idx, sf) in kg.facts().iter().enumerate() {
        if sf.derived && !include_derived {
            continue;
        }
        let u = index[&sf.fact.subject];
        let v = index[&sf.fact.object];
        let fact_ref = FactRef {
            index: fact_idx,
            predicate: sf.fact.predicate.clone(),
        };
        let key = (u.min(v), u.max(v));
        if let Some(&(slot_lo, slot_hi)) = edge_slot.get(&key) {
            adjacency[key.0][slot_lo].facts.push(fact_ref.clone());
            if key.0 != key.1 {
                adjacency[key.1][slot_hi].facts.push(fact_ref);
            }
        } else {
            let slot_lo = adjacency[key.0].len();
            adjacency[key.0].push(Edge {
                neighbor: key.1,
                facts: vec![fact_ref.clone()],
            });
            let slot_hi = if key.0 == key.1 {
                slot_lo
            } else {
                let s = adjacency[key.1].len();
                adjacency[key.1].push(Edge {
                    neighbor: key.0,
                    facts: vec![fact_ref],
                });
                s
            };
            edge_slot.insert(key, (slot_lo, slot_hi));
        }
    }

    UndirectedGraph {
        vertices,
        index,
        adjacency,
    }
}

/// The sub-knowledge-graph of facts mentioning `who`: as subject only
/// (`subject_only = true`) or in either position. Entities are restricted to
/// those appearing in the kept facts, plus `who` itself.
pub fn character_subgraph(
    kg: &KnowledgeGraph,
    who: &EntityId,
    subject_only: bool,
) -> Result<KnowledgeGraph> {
    if !kg.contains_entity(who) {
        return Err(Error::UnknownEntity(who.to_string()));
    }
    let mut sub = KnowledgeGraph::with_ontology(kg.ontology().clone());
    for sf in kg.facts() {
        let hit = sf.fact.subject == *who || (!subject_only && sf.fact.object == *who);
        if !hit {
            continue;
        }
        if sf.derived {
            sub.add_derived(sf.fact.clone());
        } else {
            sub.add_fact(sf.fact.clone(), Mode::Permissive)?;
        }
    }
    sub.add_entity(who.clone());
    Ok(sub)
}

/// DOT text for the directed knowledge graph; edge labels are predicates.
/// With `suppress_temporal`, `occurs_at` facts are omitted and vertices that
/// appear only as their time tokens disappear with them.
pub fn export_dot(kg: &KnowledgeGraph, suppress_temporal: bool) -> String {
    let mut kept: Vec<&crate::kg::StoredFact> = Vec::new();
    let mut temporal_objects: Vec<&EntityId> = Vec::new();
    for sf in kg.facts() {
        if suppress_temporal && sf.fact.predicate.as_str() == OCCURS_AT {
            temporal_objects.push(&sf.fact.object);
        } else {
            kept.push(sf);
        }
    }

    let mut out = String::from("digraph knowledge_graph {\n");
    for entity in kg.entities() {
        let only_temporal = temporal_objects.contains(&entity)
            && !kept
                .iter()
                .any(|sf| sf.fact.subject == *entity || sf.fact.object == *entity);
        if only_temporal {
            continue;
        }
        writeln!(out, "  {};", quote(entity.as_str())).unwrap();
    }
    for sf in kept {
        writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(sf.fact.subject.as_str()),
            quote(sf.fact.object.as_str()),
            quote(sf.fact.predicate.as_str()),
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

fn quote(label: &str) -> String {
    format!("\"{}\"", label.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Partition of the vertex set into maximal connected components, ordered by
/// smallest contained vertex index; members ascending.
pub fn connected_components(g: &UndirectedGraph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut members = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            members.push(v);
            for edge in g.neighbors(v) {
                if !seen[edge.neighbor] {
                    seen[edge.neighbor] = true;
                    stack.push(edge.neighbor);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}
