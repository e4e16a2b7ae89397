//! Streaming N-Triples parsing in both error modes, and serialization back.

use std::io::Cursor;

use mvsum::rdf_io::{parse_ntriples, serialize_ntriples, ParseMode, Triple};

const INPUT: &str = r#"# comment lines are ignored
<urn:a> <urn:label> "tab\there \"quoted\"" .
<urn:a> <urn:age> "5"^^<http://www.w3.org/2001/XMLSchema#integer> .
<urn:a> <urn:name> "chat"@fr .
_:b0 <urn:p> <urn:a> .
<urn:a> <urn:broken> .
"#;

fn main() -> mvsum::Result<()> {
    let fail_fast: Result<Vec<Triple>, _> =
        parse_ntriples(Cursor::new(INPUT), ParseMode::FailFast).collect();
    println!("fail-fast: {}", fail_fast.unwrap_err());

    let mut reader = parse_ntriples(Cursor::new(INPUT), ParseMode::SkipAndCount);
    let triples = reader.by_ref().collect::<mvsum::Result<Vec<_>>>()?;
    println!(
        "skip mode: {} triples, {} skipped\n",
        triples.len(),
        reader.skipped()
    );

    let mut out = Vec::new();
    serialize_ntriples(&triples, &mut out)?;
    let text = String::from_utf8(out).expect("serializer writes UTF-8");
    print!("{text}");

    let again = parse_ntriples(Cursor::new(text), ParseMode::FailFast)
        .collect::<mvsum::Result<Vec<_>>>()?;
    assert_eq!(again, triples);
    println!("\nround trip ok");
    Ok(())
}
