//! Merges the summaries of two views and checks the result against
//! summarizing the union of the views directly.

use mvsum::graph::{build_graph, union};
use mvsum::merge::merge;
use mvsum::rdf_io::parse_str;
use mvsum::summary::{summarize, ModelKind};

fn main() -> mvsum::Result<()> {
    // x changes class between views: it has p in one and q in the other.
    let g1 = build_graph(parse_str(
        "<urn:x> <urn:p> <urn:a> .\n<urn:w> <urn:p> <urn:c> .\n",
    )?)?;
    let g2 = build_graph(parse_str("<urn:x> <urn:q> <urn:b> .\n")?)?;

    let s1 = summarize(&g1, ModelKind::Ac);
    let s2 = summarize(&g2, ModelKind::Ac);
    let (merged, forward) = merge(&s1, &s2)?;
    let (_, backward) = merge(&s2, &s1)?;

    println!("forward  cases: {:?}", forward.stats);
    println!("backward cases: {:?}", backward.stats);
    println!(
        "edges: {} + {} = {}, union {}",
        forward.edges_s1, forward.edges_s2, forward.edges_sum, forward.edges_union
    );
    print!("{}", merged.to_canonical_string());

    let direct = summarize(&union(&g1, &g2), ModelKind::Ac);
    assert_eq!(merged, direct);
    println!("merge equals summary of the union");
    Ok(())
}
