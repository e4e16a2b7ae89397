//! Pairwise summary merging.
//!
//! `merge(s1, s2)` runs three steps:
//!
//! 1. take the union of both summaries (EQCs, payload member sets);
//! 2. for every member present in both summaries under different EQCs,
//!    recompute its EQC from the union of the two schemas;
//! 3. refresh the payload of every non-empty EQC and drop the empty ones.
//!
//! Membership moves are O(1) amortized hash operations, so a merge is linear
//! in the size of the two summaries.

use std::collections::hash_map::Keys;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rdf_io::{Term, Triple, RDF_TYPE};
use crate::summary::{summarize_vertex, EqcId, Summary};

/// How the members of the first summary fall into the three merge cases.
///
/// * case 1: the member needs no change (it is in both summaries under the
///   same EQC, or only in `s1` with an EQC only `s1` has);
/// * case 2: the member is only in `s1` but its EQC also exists in `s2`;
/// * case 3: the member is in both summaries under different EQCs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CaseStats {
    pub case1: usize,
    pub case2: usize,
    pub case3: usize,
    pub members_s1: usize,
}

impl CaseStats {
    pub fn is_consistent(&self) -> bool {
        self.case1 + self.case2 + self.case3 == self.members_s1
    }
}

/// Measurements of one pairwise merge. Edge counts are those of the
/// serialized summaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergeRecord {
    pub edges_s1: usize,
    pub edges_s2: usize,
    pub edges_sum: usize,
    /// Size of the step-1 union of both edge sets.
    pub edges_union: usize,
    pub wall_time: Duration,
    pub stats: CaseStats,
}

impl MergeRecord {
    pub fn wall_ms(&self) -> f64 {
        self.wall_time.as_secs_f64() * 1e3
    }
}

/// Merges `s1` into `s2`.
///
/// The resulting summary does not depend on the argument order; the reported
/// [`CaseStats`] are relative to `s1`.
pub fn merge(s1: &Summary, s2: &Summary) -> Result<(Summary, MergeRecord)> {
    check_compatible(s1, s2)?;

    let start = Instant::now();
    let summary = merge_summaries(s1, s2)?;
    let wall_time = start.elapsed();

    let edges_s1 = s1.edge_count();
    let edges_s2 = s2.edge_count();
    let record = MergeRecord {
        edges_s1,
        edges_s2,
        edges_sum: edges_s1 + edges_s2,
        edges_union: edges_s1 + edges_s2 - shared_edges(s1, s2),
        wall_time,
        stats: classify_cases(s1, s2),
    };
    Ok((summary, record))
}

/// Merge without the bookkeeping of [`merge`].
pub fn merge_summaries(s1: &Summary, s2: &Summary) -> Result<Summary> {
    check_compatible(s1, s2)?;

    // Step 1: union. Cloning the larger side keeps the copy cost bounded by
    // the result size; the union itself is symmetric.
    let (big, small) = if s1.member_count() >= s2.member_count() {
        (s1, s2)
    } else {
        (s2, s1)
    };
    let mut work = big.clone();
    union_into(&mut work, small)?;

    // Step 2: case 3, scanning the smaller member set.
    for m in get_members(small) {
        let Some(other) = big.eqc_of(m) else {
            continue;
        };
        let own = small.eqc_of(m).expect("member of its own summary");
        if own != other {
            let (c1, c2) = if std::ptr::eq(small, s1) {
                (own, other)
            } else {
                (other, own)
            };
            combine_eqcs(&mut work, c1, c2, m)?;
        }
    }

    // Step 3: fix payloads, drop drained EQCs.
    let ids: Vec<EqcId> = work.eqcs.keys().copied().collect();
    for c in ids {
        if has_members(&work, c)? {
            adapt_payload(&mut work, c)?;
        } else {
            remove_empty_eqc(&mut work, c)?;
        }
    }
    Ok(work)
}

fn check_compatible(s1: &Summary, s2: &Summary) -> Result<()> {
    if s1.model() != s2.model() {
        return Err(Error::ModelMismatch {
            left: s1.model(),
            right: s2.model(),
        });
    }
    if s1.digest() != s2.digest() {
        return Err(Error::DigestMismatch {
            left: s1.digest(),
            right: s2.digest(),
        });
    }
    Ok(())
}

fn union_into(work: &mut Summary, other: &Summary) -> Result<()> {
    for (id, schema) in &other.eqcs {
        match work.eqcs.get(id) {
            Some(existing) if existing != schema => {
                return Err(Error::Corruption(format!(
                    "EQC {id} has different schemas in the two summaries"
                )))
            }
            Some(_) => {}
            None => {
                work.eqcs.insert(*id, schema.clone());
            }
        }
        work.payloads
            .entry(*id)
            .or_default()
            .members
            .extend(other.payloads[id].members.iter().cloned());
    }
    for (m, id) in &other.member_index {
        work.member_index.entry(m.clone()).or_insert(*id);
    }
    Ok(())
}

/// Number of triples both serialized summaries have in common.
fn shared_edges(s1: &Summary, s2: &Summary) -> usize {
    let (a, b) = if s1.eqc_count() <= s2.eqc_count() {
        (s1, s2)
    } else {
        (s2, s1)
    };
    let mut shared = 0;
    for (id, schema) in &a.eqcs {
        if b.eqcs.get(id) != Some(schema) {
            continue;
        }
        let pa = &a.payloads[id];
        let pb = &b.payloads[id];
        shared += schema.edge_count() + 1;
        if pa.count == pb.count {
            shared += 1;
        }
        let (x, y) = if pa.members.len() <= pb.members.len() {
            (pa, pb)
        } else {
            (pb, pa)
        };
        shared += x.members.iter().filter(|m| y.members.contains(*m)).count();
    }
    shared
}

/// All member vertices of a summary.
pub fn get_members(s: &Summary) -> Keys<'_, Term, EqcId> {
    s.member_index.keys()
}

/// The unique EQC of member `m`.
pub fn get_eqc(s: &Summary, m: &Term) -> Result<EqcId> {
    s.eqc_of(m).ok_or_else(|| Error::UnknownMember(m.clone()))
}

/// Moves `m` out of `c1` and `c2` into the EQC computed from the union of
/// their schemas, creating that EQC if needed. Returns the EQC `m` ends up in.
///
/// The combined EQC is obtained by summarizing `m` in a temporary graph that
/// carries the schema edges of both EQCs. `c1` and `c2` are left in place even
/// if they become empty.
pub fn combine_eqcs(work: &mut Summary, c1: EqcId, c2: EqcId, m: &Term) -> Result<EqcId> {
    let schema1 = work.eqcs.get(&c1).ok_or(Error::UnknownEqc(c1))?;
    let schema2 = work.eqcs.get(&c2).ok_or(Error::UnknownEqc(c2))?;

    let mut temp = Graph::new();
    let target = Term::literal("");
    for attr in schema1.attributes().iter().chain(schema2.attributes()) {
        temp.insert(Triple::new(m.clone(), attr.clone(), target.clone())?)?;
    }
    for class in schema1.classes().iter().chain(schema2.classes()) {
        temp.insert(Triple::new(m.clone(), RDF_TYPE, Term::Iri(class.clone()))?)?;
    }
    // m has to be a vertex even when both schemas are empty
    temp.insert_vertex(m.clone());
    let combined = summarize_vertex(m, &temp, work.model, work.digest)?;

    if let Some(existing) = work.eqcs.get(&combined.id) {
        if *existing != combined.schema {
            return Err(Error::Corruption(format!(
                "digest collision on EQC {}",
                combined.id
            )));
        }
    }
    for c in [c1, c2] {
        if let Some(p) = work.payloads.get_mut(&c) {
            p.members.remove(m);
        }
    }
    let id = combined.id;
    work.add_vertex(combined);
    Ok(id)
}

pub fn has_members(s: &Summary, c: EqcId) -> Result<bool> {
    if !s.eqcs.contains_key(&c) {
        return Err(Error::UnknownEqc(c));
    }
    Ok(s.payloads.get(&c).is_some_and(|p| !p.members.is_empty()))
}

/// Drops an EQC without members and its payload vertex.
pub fn remove_empty_eqc(work: &mut Summary, c: EqcId) -> Result<()> {
    if has_members(work, c)? {
        return Err(Error::NonEmptyEqc(c));
    }
    work.eqcs.remove(&c);
    work.payloads.remove(&c);
    Ok(())
}

/// Recomputes the payload functions of `c`. Member sets are already exact, so
/// only the count changes.
pub fn adapt_payload(work: &mut Summary, c: EqcId) -> Result<()> {
    let p = work.payloads.get_mut(&c).ok_or(Error::UnknownEqc(c))?;
    p.count = p.members.len();
    Ok(())
}

/// Assigns every member of `s1` to one of the three merge cases.
pub fn classify_cases(s1: &Summary, s2: &Summary) -> CaseStats {
    let mut stats = CaseStats {
        members_s1: s1.member_count(),
        ..CaseStats::default()
    };
    for (m, c1) in &s1.member_index {
        match s2.eqc_of(m) {
            None if s2.eqcs.contains_key(c1) => stats.case2 += 1,
            None => stats.case1 += 1,
            Some(c2) if c2 == *c1 => stats.case1 += 1,
            Some(_) => stats.case3 += 1,
        }
    }
    stats
}
