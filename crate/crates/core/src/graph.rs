//! Multi-relational labeled graphs and multi-view containers.
//!
//! `rdf:type` statements with IRI objects become vertex labels; every other
//! statement becomes a labeled edge. Literal objects are edge targets but
//! never vertices.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::rdf_io::{Term, Triple, RDF_TYPE};

static NO_LABELS: BTreeSet<String> = BTreeSet::new();

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub subject: Term,
    pub label: String,
    pub object: Term,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    vertices: HashSet<Term>,
    edges: HashSet<Edge>,
    // Only vertices with a non-empty label set have an entry.
    vertex_labels: HashMap<Term, BTreeSet<String>>,
    out_labels: HashMap<Term, BTreeSet<String>>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one statement according to the type-splitting rule.
    pub fn insert(&mut self, triple: Triple) -> Result<()> {
        let (subject, predicate, object) = triple.into_parts();
        if predicate == RDF_TYPE {
            let Term::Iri(class) = object else {
                return Err(Error::Malformed(format!(
                    "rdf:type object of {subject} must be an IRI, got {object}"
                )));
            };
            self.vertex_labels
                .entry(subject.clone())
                .or_default()
                .insert(class);
            self.vertices.insert(subject);
            return Ok(());
        }
        self.vertices.insert(subject.clone());
        if !object.is_literal() {
            self.vertices.insert(object.clone());
        }
        self.out_labels
            .entry(subject.clone())
            .or_default()
            .insert(predicate.clone());
        self.edges.insert(Edge {
            subject,
            label: predicate,
            object,
        });
        Ok(())
    }

    /// Adds a vertex without edges or types; it gets the empty schema.
    pub fn insert_vertex(&mut self, v: Term) {
        if !v.is_literal() {
            self.vertices.insert(v);
        }
    }

    pub fn vertices(&self) -> &HashSet<Term> {
        &self.vertices
    }

    pub fn edges(&self) -> &HashSet<Edge> {
        &self.edges
    }

    pub fn contains_vertex(&self, v: &Term) -> bool {
        self.vertices.contains(v)
    }

    /// Class IRIs of `v` (ℓV). Empty for untyped or unknown vertices.
    pub fn vertex_labels(&self, v: &Term) -> &BTreeSet<String> {
        self.vertex_labels.get(v).unwrap_or(&NO_LABELS)
    }

    /// Labels of the outgoing edges of `v`.
    pub fn out_labels(&self, v: &Term) -> &BTreeSet<String> {
        self.out_labels.get(v).unwrap_or(&NO_LABELS)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn union(&self, other: &Graph) -> Graph {
        let mut out = self.clone();
        out.absorb(other);
        out
    }

    /// In-place union with `other`.
    pub fn absorb(&mut self, other: &Graph) {
        self.vertices.extend(other.vertices.iter().cloned());
        self.edges.extend(other.edges.iter().cloned());
        for (v, labels) in &other.vertex_labels {
            self.vertex_labels
                .entry(v.clone())
                .or_default()
                .extend(labels.iter().cloned());
        }
        for (v, labels) in &other.out_labels {
            self.out_labels
                .entry(v.clone())
                .or_default()
                .extend(labels.iter().cloned());
        }
    }

    /// Statements that rebuild this graph, type triples included, sorted.
    pub fn to_triples(&self) -> Vec<Triple> {
        let mut out: Vec<Triple> = self
            .edges
            .iter()
            .map(|e| {
                Triple::new(e.subject.clone(), e.label.clone(), e.object.clone())
                    .expect("edge subjects are never literals")
            })
            .collect();
        for (v, classes) in &self.vertex_labels {
            for c in classes {
                out.push(
                    Triple::new(v.clone(), RDF_TYPE, Term::Iri(c.clone()))
                        .expect("vertices are never literals"),
                );
            }
        }
        out.sort();
        out
    }
}

pub fn build_graph<I>(triples: I) -> Result<Graph>
where
    I: IntoIterator<Item = Triple>,
{
    let mut g = Graph::new();
    for t in triples {
        g.insert(t)?;
    }
    Ok(g)
}

pub fn union(g1: &Graph, g2: &Graph) -> Graph {
    g1.union(g2)
}

/// Ordered, uniquely named views of one underlying graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MultiViewSet {
    views: Vec<(String, Graph)>,
}

impl MultiViewSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, view_id: impl Into<String>, graph: Graph) -> Result<()> {
        let view_id = view_id.into();
        if self.views.iter().any(|(id, _)| *id == view_id) {
            return Err(Error::InvalidParams(format!(
                "duplicate view id {view_id:?}"
            )));
        }
        self.views.push((view_id, graph));
        Ok(())
    }

    pub fn views(&self) -> &[(String, Graph)] {
        &self.views
    }

    pub fn get(&self, view_id: &str) -> Option<&Graph> {
        self.views
            .iter()
            .find(|(id, _)| id == view_id)
            .map(|(_, g)| g)
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    /// Union of all views.
    pub fn merged(&self) -> Graph {
        let mut g = Graph::new();
        for (_, v) in &self.views {
            g.absorb(v);
        }
        g
    }
}
