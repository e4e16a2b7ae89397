//! Shared helpers: a brute-force partitioner and random graph sources.
#![allow(dead_code)]

use std::collections::BTreeSet;

use mvsum::graph::{build_graph, Graph};
use mvsum::rdf_io::{Term, Triple, RDF_TYPE};
use mvsum::summary::{ModelKind, Summary};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// (attributes, classes, members) per block; members rendered as N-Triples.
pub type Partition = BTreeSet<(BTreeSet<String>, BTreeSet<String>, BTreeSet<String>)>;

/// Groups vertices by comparing every vertex against every block
/// representative, reading labels straight from the triples.
pub fn naive_partition(triples: &[Triple], model: ModelKind) -> Partition {
    let mut vertices: Vec<Term> = Vec::new();
    for t in triples {
        let mut push = |v: &Term| {
            if !v.is_literal() && !vertices.contains(v) {
                vertices.push(v.clone());
            }
        };
        push(t.subject());
        if t.predicate() != RDF_TYPE {
            push(t.object());
        }
    }
    let key = |v: &Term| {
        let mut attrs = BTreeSet::new();
        let mut classes = BTreeSet::new();
        for t in triples.iter().filter(|t| t.subject() == v) {
            if t.predicate() == RDF_TYPE {
                if model != ModelKind::Ac {
                    classes.insert(t.object().as_iri().unwrap().to_owned());
                }
            } else if model != ModelKind::Cc {
                attrs.insert(t.predicate().to_owned());
            }
        }
        (attrs, classes)
    };
    let mut blocks: Vec<Vec<Term>> = Vec::new();
    for v in vertices {
        match blocks.iter_mut().find(|b| key(&b[0]) == key(&v)) {
            Some(b) => b.push(v),
            None => blocks.push(vec![v]),
        }
    }
    blocks
        .into_iter()
        .map(|b| {
            let (a, c) = key(&b[0]);
            (a, c, b.iter().map(Term::to_string).collect())
        })
        .collect()
}

pub fn summary_partition(s: &Summary) -> Partition {
    s.eqcs()
        .iter()
        .map(|(id, schema)| {
            let members = s
                .payload(id)
                .unwrap()
                .members()
                .iter()
                .map(Term::to_string)
                .collect();
            (
                schema.attributes().clone(),
                schema.classes().clone(),
                members,
            )
        })
        .collect()
}

fn vertex(i: usize) -> Term {
    if i % 5 == 4 {
        Term::blank(&format!("b{i}"))
    } else {
        Term::iri(format!("urn:t:v{i}"))
    }
}

/// Triples over a small vocabulary so that label sets collide often.
pub fn arb_triples(max_vertices: usize, max_triples: usize) -> impl Strategy<Value = Vec<Triple>> {
    let one = (0..max_vertices, 0..6usize, 0..max_vertices, 0..3u8).prop_map(|(s, p, o, kind)| {
        let subject = vertex(s);
        match (p, kind) {
            (5, _) => {
                Triple::new(subject, RDF_TYPE, Term::iri(format!("urn:t:C{}", o % 3))).unwrap()
            }
            (_, 0) => Triple::new(
                subject,
                format!("urn:t:p{p}"),
                Term::literal(format!("l{o}")),
            )
            .unwrap(),
            _ => Triple::new(subject, format!("urn:t:p{p}"), vertex(o)).unwrap(),
        }
    });
    proptest::collection::vec(one, 0..max_triples)
}

pub fn arb_graph(max_vertices: usize, max_triples: usize) -> impl Strategy<Value = Graph> {
    arb_triples(max_vertices, max_triples).prop_map(|t| build_graph(t).unwrap())
}

/// Configuration of one seeded random view pair.
#[derive(Debug, Clone, Copy)]
pub struct PairSpec {
    pub vertices: usize,
    pub edges: usize,
    pub overlap: f64,
}

/// Two views over `vertices` vertices each, of which a fraction `overlap`
/// is shared. Predicates and classes come from small alphabets.
pub fn random_view_pair(seed: u64, shape: PairSpec) -> (Vec<Triple>, Vec<Triple>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shared = (shape.overlap * shape.vertices as f64).round() as usize;
    let view = |tag: &str, rng: &mut ChaCha8Rng| {
        let name = |i: usize| {
            if i < shared {
                Term::iri(format!("urn:r:s{i}"))
            } else {
                Term::iri(format!("urn:r:{tag}{i}"))
            }
        };
        let mut out = Vec::with_capacity(shape.edges + shape.vertices / 2);
        for _ in 0..shape.edges {
            let s = name(rng.random_range(0..shape.vertices));
            let p = format!("urn:r:p{}", rng.random_range(0..10));
            let o = if rng.random_bool(0.2) {
                Term::literal(format!("{}", rng.random_range(0..50)))
            } else {
                name(rng.random_range(0..shape.vertices))
            };
            out.push(Triple::new(s, p, o).unwrap());
        }
        for i in 0..shape.vertices {
            if rng.random_bool(0.4) {
                let c = format!("urn:r:C{}", rng.random_range(0..5));
                out.push(Triple::new(name(i), RDF_TYPE, Term::iri(c)).unwrap());
            }
        }
        out
    };
    let a = view("a", &mut rng);
    let b = view("b", &mut rng);
    (a, b)
}
