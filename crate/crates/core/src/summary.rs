//! Structural summary models (AC, CC, ACC), equivalence-class identifiers and
//! whole-graph summarization.
//!
//! An equivalence class (EQC) is identified by a truncated cryptographic digest
//! of its canonical schema string, so independently computed summaries agree on
//! identifiers without coordination.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;
use sha2::{Digest, Sha256, Sha512};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rdf_io::{
    iri_to_string, parse_ntriples, LiteralKind, ParseMode, Term, Triple, XSD_INTEGER,
};

pub const HEADER_PREFIX: &str = "# mvs-summary v1";
pub const EQC_PREFIX: &str = "urn:mvs:eqc:";
pub const PAYLOAD_PREFIX: &str = "urn:mvs:payload:";
pub const ATTRIBUTE: &str = "urn:mvs:attribute";
pub const CLASS: &str = "urn:mvs:class";
pub const PAYLOAD: &str = "urn:mvs:payload";
pub const MEMBER: &str = "urn:mvs:member";
pub const COUNT: &str = "urn:mvs:count";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    /// Attribute collection: same set of outgoing edge labels.
    Ac,
    /// Class collection: same type set.
    Cc,
    /// Both of the above.
    Acc,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Ac, ModelKind::Cc, ModelKind::Acc];

    pub fn uses_attributes(self) -> bool {
        matches!(self, ModelKind::Ac | ModelKind::Acc)
    }

    pub fn uses_classes(self) -> bool {
        matches!(self, ModelKind::Cc | ModelKind::Acc)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Ac => "AC",
            ModelKind::Cc => "CC",
            ModelKind::Acc => "ACC",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AC" => Ok(ModelKind::Ac),
            "CC" => Ok(ModelKind::Cc),
            "ACC" => Ok(ModelKind::Acc),
            _ => Err(Error::InvalidParams(format!("unknown summary model {s:?}"))),
        }
    }
}

/// Digest used to derive EQC identifiers. Only the first 128 bits are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DigestKind {
    #[default]
    Sha256,
    Sha512,
}

impl DigestKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DigestKind::Sha256 => "sha256",
            DigestKind::Sha512 => "sha512",
        }
    }

    fn truncated(self, data: &[u8]) -> [u8; 16] {
        let mut out = [0u8; 16];
        match self {
            DigestKind::Sha256 => out.copy_from_slice(&Sha256::digest(data)[..16]),
            DigestKind::Sha512 => out.copy_from_slice(&Sha512::digest(data)[..16]),
        }
        out
    }
}

impl fmt::Display for DigestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DigestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "sha256" => Ok(DigestKind::Sha256),
            "sha512" => Ok(DigestKind::Sha512),
            _ => Err(Error::InvalidParams(format!("unknown digest {s:?}"))),
        }
    }
}

/// 128-bit EQC identifier, displayed as 32 lowercase hex characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EqcId([u8; 16]);

impl EqcId {
    pub fn as_bytes(&self) -> &[u8; 16] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for EqcId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl FromStr for EqcId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::SummaryFormat(format!("invalid EQC id {s:?}"));
        if s.len() != 32 || !s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
            return Err(bad());
        }
        let mut out = [0u8; 16];
        for (i, byte) in out.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&s[2 * i..2 * i + 2], 16).map_err(|_| bad())?;
        }
        Ok(EqcId(out))
    }
}

/// Schema of an equivalence class. The side not used by the model is always empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EqcSchema {
    model: ModelKind,
    attributes: BTreeSet<String>,
    classes: BTreeSet<String>,
}

impl EqcSchema {
    /// Builds a schema, discarding whichever side `model` does not use.
    pub fn new(model: ModelKind, attributes: BTreeSet<String>, classes: BTreeSet<String>) -> Self {
        EqcSchema {
            model,
            attributes: if model.uses_attributes() {
                attributes
            } else {
                BTreeSet::new()
            },
            classes: if model.uses_classes() {
                classes
            } else {
                BTreeSet::new()
            },
        }
    }

    pub fn empty(model: ModelKind) -> Self {
        Self::new(model, BTreeSet::new(), BTreeSet::new())
    }

    pub fn model(&self) -> ModelKind {
        self.model
    }

    pub fn attributes(&self) -> &BTreeSet<String> {
        &self.attributes
    }

    pub fn classes(&self) -> &BTreeSet<String> {
        &self.classes
    }

    /// Schema with both sides unioned with `other`'s.
    pub fn combined(&self, other: &EqcSchema) -> EqcSchema {
        EqcSchema::new(
            self.model,
            self.attributes.union(&other.attributes).cloned().collect(),
            self.classes.union(&other.classes).cloned().collect(),
        )
    }

    pub fn canonical_string(&self) -> String {
        canonical_string(self)
    }

    pub fn id(&self, digest: DigestKind) -> EqcId {
        eqc_id(self, digest)
    }

    /// Number of schema triples this EQC contributes when serialized.
    pub fn edge_count(&self) -> usize {
        self.attributes.len() + self.classes.len()
    }
}

/// `model tag`, then one `<IRI>` line per attribute, a `|` line, then one
/// `<IRI>` line per class. Lines within a side are sorted by code point of the
/// bracketed form.
pub fn canonical_string(schema: &EqcSchema) -> String {
    let side = |set: &BTreeSet<String>| {
        let mut lines: Vec<String> = set.iter().map(|iri| iri_to_string(iri)).collect();
        lines.sort_unstable();
        lines
    };
    let mut out = String::new();
    out.push_str(schema.model.as_str());
    out.push('\n');
    for line in side(&schema.attributes) {
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("|\n");
    for line in side(&schema.classes) {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn eqc_id(schema: &EqcSchema, digest: DigestKind) -> EqcId {
    EqcId(digest.truncated(canonical_string(schema).as_bytes()))
}

/// Payload of an EQC: its member vertices and their count.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Payload {
    pub(crate) members: HashSet<Term>,
    pub(crate) count: usize,
}

impl Payload {
    pub fn singleton(member: Term) -> Self {
        Payload {
            members: HashSet::from([member]),
            count: 1,
        }
    }

    pub fn members(&self) -> &HashSet<Term> {
        &self.members
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// The single-vertex summary `C_M(v; G)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSummary {
    pub id: EqcId,
    pub schema: EqcSchema,
    pub payload: Payload,
}

/// A structural summary: schema vertices, payload vertices and the reverse
/// member index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    pub(crate) model: ModelKind,
    pub(crate) digest: DigestKind,
    pub(crate) eqcs: HashMap<EqcId, EqcSchema>,
    pub(crate) payloads: HashMap<EqcId, Payload>,
    pub(crate) member_index: HashMap<Term, EqcId>,
}

impl Summary {
    pub fn new(model: ModelKind, digest: DigestKind) -> Self {
        Summary {
            model,
            digest,
            eqcs: HashMap::new(),
            payloads: HashMap::new(),
            member_index: HashMap::new(),
        }
    }

    pub fn model(&self) -> ModelKind {
        self.model
    }

    pub fn digest(&self) -> DigestKind {
        self.digest
    }

    pub fn eqcs(&self) -> &HashMap<EqcId, EqcSchema> {
        &self.eqcs
    }

    pub fn payloads(&self) -> &HashMap<EqcId, Payload> {
        &self.payloads
    }

    pub fn member_index(&self) -> &HashMap<Term, EqcId> {
        &self.member_index
    }

    pub fn schema(&self, id: &EqcId) -> Option<&EqcSchema> {
        self.eqcs.get(id)
    }

    pub fn payload(&self, id: &EqcId) -> Option<&Payload> {
        self.payloads.get(id)
    }

    pub fn eqc_of(&self, member: &Term) -> Option<EqcId> {
        self.member_index.get(member).copied()
    }

    pub fn contains_member(&self, member: &Term) -> bool {
        self.member_index.contains_key(member)
    }

    pub fn eqc_count(&self) -> usize {
        self.eqcs.len()
    }

    pub fn member_count(&self) -> usize {
        self.member_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eqcs.is_empty()
    }

    /// Number of triples in the serialized form (the summary's edge set).
    pub fn edge_count(&self) -> usize {
        self.eqcs
            .iter()
            .map(|(id, schema)| {
                let members = self.payloads.get(id).map_or(0, |p| p.members.len());
                schema.edge_count() + 2 + members
            })
            .sum()
    }

    /// Adds one vertex summary to this summary.
    pub(crate) fn add_vertex(&mut self, vs: VertexSummary) {
        for m in &vs.payload.members {
            self.member_index.insert(m.clone(), vs.id);
        }
        self.eqcs.entry(vs.id).or_insert(vs.schema);
        let p = self.payloads.entry(vs.id).or_default();
        p.members.extend(vs.payload.members);
        p.count = p.members.len();
    }

    /// Verifies every structural invariant of a finalized summary.
    pub fn validate(&self) -> Result<()> {
        if self.eqcs.len() != self.payloads.len() {
            return Err(Error::Corruption(
                "schema and payload vertex sets differ".into(),
            ));
        }
        let mut seen = 0usize;
        for (id, schema) in &self.eqcs {
            let payload = self
                .payloads
                .get(id)
                .ok_or_else(|| Error::Corruption(format!("EQC {id} has no payload")))?;
            if schema.model != self.model {
                return Err(Error::Corruption(format!(
                    "EQC {id} has model {}",
                    schema.model
                )));
            }
            if eqc_id(schema, self.digest) != *id {
                return Err(Error::Corruption(format!(
                    "EQC {id} does not match its schema digest"
                )));
            }
            if payload.members.is_empty() {
                return Err(Error::Corruption(format!("EQC {id} has no members")));
            }
            if payload.count != payload.members.len() {
                return Err(Error::Corruption(format!(
                    "EQC {id} count {} but {} members",
                    payload.count,
                    payload.members.len()
                )));
            }
            for m in &payload.members {
                if self.member_index.get(m) != Some(id) {
                    return Err(Error::Corruption(format!(
                        "member {m} of EQC {id} is not indexed to it"
                    )));
                }
            }
            seen += payload.members.len();
        }
        if seen != self.member_index.len() {
            return Err(Error::Corruption(
                "member index has dangling entries".into(),
            ));
        }
        Ok(())
    }

    /// The summary as triples, sorted by their serialized line.
    pub fn to_triples(&self) -> Vec<Triple> {
        let mut lines: Vec<(String, Triple)> = self
            .unsorted_triples()
            .map(|t| (t.to_string(), t))
            .collect();
        lines.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        lines.into_iter().map(|(_, t)| t).collect()
    }

    fn unsorted_triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.eqcs.iter().flat_map(move |(id, schema)| {
            let eqc = Term::Iri(format!("{EQC_PREFIX}{id}"));
            let pay = Term::Iri(format!("{PAYLOAD_PREFIX}{id}"));
            let payload = &self.payloads[id];
            let mut out = Vec::with_capacity(schema.edge_count() + 2 + payload.members.len());
            for a in &schema.attributes {
                out.push(triple(&eqc, ATTRIBUTE, Term::Iri(a.clone())));
            }
            for c in &schema.classes {
                out.push(triple(&eqc, CLASS, Term::Iri(c.clone())));
            }
            out.push(triple(&eqc, PAYLOAD, pay.clone()));
            for m in &payload.members {
                out.push(triple(&pay, MEMBER, m.clone()));
            }
            out.push(triple(
                &pay,
                COUNT,
                Term::typed_literal(payload.count.to_string(), XSD_INTEGER),
            ));
            out
        })
    }

    pub fn header(&self) -> String {
        format!(
            "{HEADER_PREFIX} model={} digest={}",
            self.model, self.digest
        )
    }

    /// Header line followed by the sorted triples.
    pub fn write_ntriples<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "{}", self.header())?;
        let mut lines: Vec<String> = self.unsorted_triples().map(|t| t.to_string()).collect();
        lines.sort_unstable();
        for line in lines {
            sink.write_all(line.as_bytes())?;
            sink.write_all(b"\n")?;
        }
        sink.flush()
    }

    /// The exact bytes of [`Summary::write_ntriples`] as a string.
    pub fn to_canonical_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_ntriples(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serializer emits UTF-8")
    }

    /// Loads a summary written by [`Summary::write_ntriples`], re-deriving and
    /// checking every EQC id.
    pub fn read_ntriples<R: BufRead>(mut reader: R) -> Result<Summary> {
        let mut first = String::new();
        reader.read_line(&mut first)?;
        let (model, digest) = parse_header(first.trim_end_matches(['\n', '\r']))?;
        let triples = parse_ntriples(reader, ParseMode::FailFast).with_line_offset(1);
        from_summary_triples(model, digest, triples)
    }

    pub fn from_canonical_str(s: &str) -> Result<Summary> {
        Self::read_ntriples(s.as_bytes())
    }
}

fn triple(s: &Term, p: &str, o: Term) -> Triple {
    Triple::new(s.clone(), p, o).expect("summary subjects are IRIs")
}

/// Parses `# mvs-summary v1 model=<M> digest=<D>`.
pub fn parse_header(line: &str) -> Result<(ModelKind, DigestKind)> {
    let rest = line
        .strip_prefix(HEADER_PREFIX)
        .ok_or_else(|| Error::SummaryFormat(format!("missing summary header, found {line:?}")))?;
    let mut model = None;
    let mut digest = None;
    for field in rest.split_whitespace() {
        match field.split_once('=') {
            Some(("model", v)) => {
                model = Some(v.parse::<ModelKind>().map_err(|_| bad_header(line))?)
            }
            Some(("digest", v)) => {
                digest = Some(v.parse::<DigestKind>().map_err(|_| bad_header(line))?)
            }
            _ => return Err(bad_header(line)),
        }
    }
    match (model, digest) {
        (Some(m), Some(d)) => Ok((m, d)),
        _ => Err(bad_header(line)),
    }
}

fn bad_header(line: &str) -> Error {
    Error::SummaryFormat(format!("malformed summary header {line:?}"))
}

#[derive(Default)]
struct RawEqc {
    attributes: BTreeSet<String>,
    classes: BTreeSet<String>,
    linked: bool,
    members: HashSet<Term>,
    count: Option<usize>,
}

fn from_summary_triples<I>(model: ModelKind, digest: DigestKind, triples: I) -> Result<Summary>
where
    I: Iterator<Item = Result<Triple>>,
{
    let mut raw: BTreeMap<String, RawEqc> = BTreeMap::new();
    for t in triples {
        let t = t?;
        let fmt_err = |msg: &str| Error::SummaryFormat(format!("{msg}: {t}"));
        let subject = t
            .subject()
            .as_iri()
            .ok_or_else(|| fmt_err("subject must be an IRI"))?;
        if let Some(hex) = subject.strip_prefix(EQC_PREFIX) {
            let entry = raw.entry(hex.to_owned()).or_default();
            match t.predicate() {
                ATTRIBUTE | CLASS => {
                    let iri = t
                        .object()
                        .as_iri()
                        .ok_or_else(|| fmt_err("schema object must be an IRI"))?
                        .to_owned();
                    if t.predicate() == ATTRIBUTE {
                        entry.attributes.insert(iri);
                    } else {
                        entry.classes.insert(iri);
                    }
                }
                PAYLOAD => {
                    let expected = format!("{PAYLOAD_PREFIX}{hex}");
                    if t.object().as_iri() != Some(expected.as_str()) {
                        return Err(fmt_err("payload vertex does not match its EQC"));
                    }
                    entry.linked = true;
                }
                _ => return Err(fmt_err("unknown EQC predicate")),
            }
        } else if let Some(hex) = subject.strip_prefix(PAYLOAD_PREFIX) {
            let entry = raw.entry(hex.to_owned()).or_default();
            match t.predicate() {
                MEMBER => {
                    if t.object().is_literal() {
                        return Err(fmt_err("member must be an IRI or blank node"));
                    }
                    entry.members.insert(t.object().clone());
                }
                COUNT => {
                    let n = match t.object() {
                        Term::Literal(lit)
                            if lit.kind == LiteralKind::Typed(XSD_INTEGER.into()) =>
                        {
                            lit.value.parse::<usize>().ok()
                        }
                        _ => None,
                    }
                    .ok_or_else(|| fmt_err("count must be an xsd:integer"))?;
                    entry.count = Some(n);
                }
                _ => return Err(fmt_err("unknown payload predicate")),
            }
        } else {
            return Err(fmt_err("subject outside the summary vocabulary"));
        }
    }

    let mut summary = Summary::new(model, digest);
    for (hex, r) in raw {
        let id: EqcId = hex.parse()?;
        if !r.linked {
            return Err(Error::SummaryFormat(format!(
                "EQC {hex} has no payload link"
            )));
        }
        if (!model.uses_attributes() && !r.attributes.is_empty())
            || (!model.uses_classes() && !r.classes.is_empty())
        {
            return Err(Error::SummaryFormat(format!(
                "EQC {hex} has features outside model {model}"
            )));
        }
        let schema = EqcSchema::new(model, r.attributes, r.classes);
        if eqc_id(&schema, digest) != id {
            return Err(Error::Corruption(format!(
                "EQC {hex} does not match its schema digest"
            )));
        }
        if r.members.is_empty() {
            return Err(Error::SummaryFormat(format!("EQC {hex} has no members")));
        }
        let count = r
            .count
            .ok_or_else(|| Error::SummaryFormat(format!("EQC {hex} has no count")))?;
        if count != r.members.len() {
            return Err(Error::SummaryFormat(format!(
                "EQC {hex} declares count {count} but lists {} members",
                r.members.len()
            )));
        }
        for m in &r.members {
            if let Some(prev) = summary.member_index.insert(m.clone(), id) {
                return Err(Error::Corruption(format!(
                    "member {m} belongs to both {prev} and {id}"
                )));
            }
        }
        summary.eqcs.insert(id, schema);
        summary.payloads.insert(
            id,
            Payload {
                members: r.members,
                count,
            },
        );
    }
    Ok(summary)
}

/// ψ(v; G): the schema features `model` selects for vertex `v`.
pub fn schema_of(v: &Term, g: &Graph, model: ModelKind) -> Result<EqcSchema> {
    if !g.contains_vertex(v) {
        return Err(Error::UnknownVertex(v.clone()));
    }
    Ok(schema_unchecked(v, g, model))
}

fn schema_unchecked(v: &Term, g: &Graph, model: ModelKind) -> EqcSchema {
    let attributes = if model.uses_attributes() {
        g.out_labels(v).clone()
    } else {
        BTreeSet::new()
    };
    let classes = if model.uses_classes() {
        g.vertex_labels(v).clone()
    } else {
        BTreeSet::new()
    };
    EqcSchema {
        model,
        attributes,
        classes,
    }
}

/// `C_M(v; G)`: the one-vertex summary of `v`.
pub fn summarize_vertex(
    v: &Term,
    g: &Graph,
    model: ModelKind,
    digest: DigestKind,
) -> Result<VertexSummary> {
    let schema = schema_of(v, g, model)?;
    Ok(VertexSummary {
        id: eqc_id(&schema, digest),
        schema,
        payload: Payload::singleton(v.clone()),
    })
}

/// Summarizes every vertex of `g` with the default digest.
pub fn summarize(g: &Graph, model: ModelKind) -> Summary {
    summarize_with_digest(g, model, DigestKind::default())
}

pub fn summarize_with_digest(g: &Graph, model: ModelKind, digest: DigestKind) -> Summary {
    let mut ids: HashMap<EqcSchema, EqcId> = HashMap::new();
    let mut summary = Summary::new(model, digest);
    for v in g.vertices() {
        let schema = schema_unchecked(v, g, model);
        let id = match ids.get(&schema) {
            Some(id) => *id,
            None => {
                let id = eqc_id(&schema, digest);
                ids.insert(schema.clone(), id);
                id
            }
        };
        summary.member_index.insert(v.clone(), id);
        summary.eqcs.entry(id).or_insert(schema);
        summary
            .payloads
            .entry(id)
            .or_default()
            .members
            .insert(v.clone());
    }
    for p in summary.payloads.values_mut() {
        p.count = p.members.len();
    }
    summary
}

/// Same result as [`summarize_with_digest`], computed on the rayon pool.
/// Each worker builds partial payloads that are reduced by disjoint union.
pub fn summarize_parallel(g: &Graph, model: ModelKind, digest: DigestKind) -> Summary {
    type Partial = HashMap<EqcId, (EqcSchema, HashSet<Term>)>;
    let vertices: Vec<&Term> = g.vertices().iter().collect();
    let partial: Partial = vertices
        .par_iter()
        .fold(Partial::new, |mut acc, v| {
            let schema = schema_unchecked(v, g, model);
            let id = eqc_id(&schema, digest);
            acc.entry(id)
                .or_insert_with(|| (schema, HashSet::new()))
                .1
                .insert((*v).clone());
            acc
        })
        .reduce(Partial::new, |mut a, b| {
            for (id, (schema, members)) in b {
                a.entry(id)
                    .or_insert_with(|| (schema, HashSet::new()))
                    .1
                    .extend(members);
            }
            a
        });
    let mut summary = Summary::new(model, digest);
    for (id, (schema, members)) in partial {
        for m in &members {
            summary.member_index.insert(m.clone(), id);
        }
        summary.eqcs.insert(id, schema);
        summary.payloads.insert(
            id,
            Payload {
                count: members.len(),
                members,
            },
        );
    }
    summary
}
