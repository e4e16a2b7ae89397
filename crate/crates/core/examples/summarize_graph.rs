//! Summarizes one small graph under the three models and prints each summary.

use mvsum::graph::build_graph;
use mvsum::rdf_io::parse_str;
use mvsum::summary::{summarize, ModelKind};

const GRAPH: &str = r#"
<urn:ex:alice> <urn:ex:knows> <urn:ex:bob> .
<urn:ex:alice> <urn:ex:name> "Alice" .
<urn:ex:bob> <urn:ex:name> "Bob" .
<urn:ex:bob> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <urn:ex:Person> .
<urn:ex:carol> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <urn:ex:Person> .
"#;

fn main() -> mvsum::Result<()> {
    let g = build_graph(parse_str(GRAPH)?)?;
    println!(
        "graph: {} vertices, {} edges\n",
        g.vertex_count(),
        g.edge_count()
    );
    for model in ModelKind::ALL {
        let s = summarize(&g, model);
        println!(
            "{model}: {} classes, {} summary edges",
            s.eqc_count(),
            s.edge_count()
        );
        print!("{}", s.to_canonical_string());
        println!();
    }
    Ok(())
}
