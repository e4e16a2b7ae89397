//! Streaming N-Triples reader and writer.
//!
//! Only the line-based N-Triples subset is supported: one statement per line,
//! `#` comment lines, no prefixes. The reader holds one line in memory at a time.

use std::fmt::{self, Write as _};
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::error::{Error, Result};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";

/// Syntax error at a 1-based line and column (columns count characters).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: u64,
    pub column: usize,
    pub message: String,
}

/// How a reader reacts to a malformed line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Yield the error and stop.
    #[default]
    FailFast,
    /// Drop the line, bump [`NTriplesReader::skipped`] and continue.
    SkipAndCount,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LiteralKind {
    Simple,
    Typed(String),
    Lang(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub value: String,
    pub kind: LiteralKind,
}

/// An RDF term. IRIs are stored without angle brackets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Blank(String),
    Literal(Literal),
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Self {
        Term::Iri(value.into())
    }

    /// Blank node with its label normalized to `[A-Za-z0-9]+`.
    pub fn blank(label: &str) -> Self {
        Term::Blank(normalize_blank_label(label))
    }

    pub fn literal(value: impl Into<String>) -> Self {
        Term::Literal(Literal {
            value: value.into(),
            kind: LiteralKind::Simple,
        })
    }

    pub fn typed_literal(value: impl Into<String>, datatype: impl Into<String>) -> Self {
        Term::Literal(Literal {
            value: value.into(),
            kind: LiteralKind::Typed(datatype.into()),
        })
    }

    pub fn lang_literal(value: impl Into<String>, lang: impl Into<String>) -> Self {
        Term::Literal(Literal {
            value: value.into(),
            kind: LiteralKind::Lang(lang.into()),
        })
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(v) => Some(v),
            _ => None,
        }
    }

    /// Prefix a blank node label with a file index so that blank nodes from
    /// different files never coincide. Other terms are returned unchanged.
    pub fn namespaced(self, file_index: usize) -> Self {
        match self {
            Term::Blank(label) => Term::Blank(format!("f{file_index}N{label}")),
            other => other,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(v) => write_iri(f, v),
            Term::Blank(label) => write!(f, "_:{label}"),
            Term::Literal(lit) => {
                f.write_char('"')?;
                write_escaped_string(f, &lit.value)?;
                f.write_char('"')?;
                match &lit.kind {
                    LiteralKind::Simple => Ok(()),
                    LiteralKind::Typed(dt) => {
                        f.write_str("^^")?;
                        write_iri(f, dt)
                    }
                    LiteralKind::Lang(tag) => write!(f, "@{tag}"),
                }
            }
        }
    }
}

/// Maps an arbitrary blank node label into `[A-Za-z0-9]+`.
///
/// Labels that already match are kept, so the mapping is idempotent. Any other
/// character is written as `U<hex codepoint>U`.
pub fn normalize_blank_label(label: &str) -> String {
    if !label.is_empty() && label.bytes().all(|b| b.is_ascii_alphanumeric()) {
        return label.to_owned();
    }
    let mut out = String::with_capacity(label.len() + 8);
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c);
        } else {
            let _ = write!(out, "U{:X}U", c as u32);
        }
    }
    if out.is_empty() {
        out.push_str("U0U");
    }
    out
}

/// A subject–predicate–object statement.
///
/// The subject is never a literal and the predicate is always an IRI.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    subject: Term,
    predicate: String,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: impl Into<String>, object: Term) -> Result<Self> {
        if subject.is_literal() {
            return Err(Error::Malformed(format!(
                "literal {subject} cannot be a subject"
            )));
        }
        Ok(Triple {
            subject,
            predicate: predicate.into(),
            object,
        })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    /// Predicate IRI, without angle brackets.
    pub fn predicate(&self) -> &str {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn into_parts(self) -> (Term, String, Term) {
        (self.subject, self.predicate, self.object)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.subject)?;
        write_iri(f, &self.predicate)?;
        write!(f, " {} .", self.object)
    }
}

fn write_iri(f: &mut impl fmt::Write, iri: &str) -> fmt::Result {
    f.write_char('<')?;
    for c in iri.chars() {
        match c {
            '\u{0}'..='\u{20}' | '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => {
                write!(f, "\\u{:04X}", c as u32)?
            }
            _ => f.write_char(c)?,
        }
    }
    f.write_char('>')
}

fn write_escaped_string(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\r' => f.write_str("\\r")?,
            '\t' => f.write_str("\\t")?,
            '\u{8}' => f.write_str("\\b")?,
            '\u{c}' => f.write_str("\\f")?,
            '\u{0}'..='\u{1f}' | '\u{7f}' => write!(f, "\\u{:04X}", c as u32)?,
            _ => f.write_char(c)?,
        }
    }
    Ok(())
}

/// Renders a term as it appears in N-Triples.
pub fn term_to_string(term: &Term) -> String {
    term.to_string()
}

/// Renders an IRI with angle brackets and N-Triples escaping.
pub fn iri_to_string(iri: &str) -> String {
    let mut s = String::with_capacity(iri.len() + 2);
    let _ = write_iri(&mut s, iri);
    s
}

/// Writes one statement per line, LF line endings.
pub fn serialize_ntriples<'a, I, W>(triples: I, mut sink: W) -> io::Result<()>
where
    I: IntoIterator<Item = &'a Triple>,
    W: Write,
{
    for t in triples {
        writeln!(sink, "{t}")?;
    }
    sink.flush()
}

/// Streaming reader over an N-Triples byte source.
pub struct NTriplesReader<R> {
    reader: R,
    buf: Vec<u8>,
    line: u64,
    mode: ParseMode,
    skipped: u64,
    done: bool,
}

/// Starts a streaming parse; triples are yielded in file order.
pub fn parse_ntriples<R: BufRead>(reader: R, mode: ParseMode) -> NTriplesReader<R> {
    NTriplesReader::new(reader, mode)
}

/// Parses a whole string in fail-fast mode.
pub fn parse_str(input: &str) -> Result<Vec<Triple>> {
    parse_ntriples(input.as_bytes(), ParseMode::FailFast).collect()
}

impl<R: BufRead> NTriplesReader<R> {
    pub fn new(reader: R, mode: ParseMode) -> Self {
        NTriplesReader {
            reader,
            buf: Vec::new(),
            line: 0,
            mode,
            skipped: 0,
            done: false,
        }
    }

    /// Report line numbers as if `lines` lines had already been consumed.
    pub fn with_line_offset(mut self, lines: u64) -> Self {
        self.line = lines;
        self
    }

    /// Malformed lines dropped so far (skip-and-count mode only).
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    pub fn lines_read(&self) -> u64 {
        self.line
    }

    fn next_line(&mut self) -> Result<Option<std::result::Result<Option<Triple>, ParseError>>> {
        self.buf.clear();
        if self.reader.read_until(b'\n', &mut self.buf)? == 0 {
            return Ok(None);
        }
        self.line += 1;
        let mut bytes = self.buf.as_slice();
        if let Some(rest) = bytes.strip_suffix(b"\n") {
            bytes = rest;
        }
        if let Some(rest) = bytes.strip_suffix(b"\r") {
            bytes = rest;
        }
        let text = match std::str::from_utf8(bytes) {
            Ok(t) => t,
            Err(e) => {
                let column = String::from_utf8_lossy(&bytes[..e.valid_up_to()])
                    .chars()
                    .count()
                    + 1;
                return Ok(Some(Err(ParseError {
                    line: self.line,
                    column,
                    message: "invalid UTF-8".into(),
                })));
            }
        };
        Ok(Some(parse_line(text, self.line)))
    }
}

impl<R: BufRead> Iterator for NTriplesReader<R> {
    type Item = Result<Triple>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            match self.next_line() {
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
                Ok(None) => {
                    self.done = true;
                    return None;
                }
                Ok(Some(Ok(Some(triple)))) => return Some(Ok(triple)),
                Ok(Some(Ok(None))) => continue,
                Ok(Some(Err(e))) => match self.mode {
                    ParseMode::FailFast => {
                        self.done = true;
                        return Some(Err(e.into()));
                    }
                    ParseMode::SkipAndCount => self.skipped += 1,
                },
            }
        }
    }
}

/// Parses one line. Blank and comment lines yield `Ok(None)`.
pub fn parse_line(line: &str, line_no: u64) -> std::result::Result<Option<Triple>, ParseError> {
    let mut cur = Cursor {
        src: line,
        pos: 0,
        line: line_no,
    };
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let subject = match cur.peek() {
        Some('<') => Term::Iri(cur.iri()?),
        Some('_') => cur.blank()?,
        _ => return Err(cur.error("expected IRI or blank node as subject")),
    };
    cur.skip_ws();
    let predicate = match cur.peek() {
        Some('<') => cur.iri()?,
        _ => return Err(cur.error("expected IRI as predicate")),
    };
    cur.skip_ws();
    let object = match cur.peek() {
        Some('<') => Term::Iri(cur.iri()?),
        Some('_') => cur.blank()?,
        Some('"') => cur.literal()?,
        _ => return Err(cur.error("expected object term")),
    };
    cur.skip_ws();
    if !cur.eat('.') {
        return Err(cur.error("expected '.' terminating the statement"));
    }
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return Err(cur.error("unexpected content after '.'"));
    }
    Ok(Some(Triple {
        subject,
        predicate,
        object,
    }))
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u64,
}

impl Cursor<'_> {
    fn error(&self, message: &str) -> ParseError {
        ParseError {
            line: self.line,
            column: self.src[..self.pos].chars().count() + 1,
            message: message.to_owned(),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    fn iri(&mut self) -> std::result::Result<String, ParseError> {
        let start = self.pos;
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated IRI")),
                Some('>') => break,
                Some('\\') => out.push(self.uchar()?),
                Some(c @ ('\u{0}'..='\u{20}' | '<' | '"' | '{' | '}' | '|' | '^' | '`')) => {
                    self.pos -= c.len_utf8();
                    return Err(self.error("character not allowed in IRI"));
                }
                Some(c) => out.push(c),
            }
        }
        if !has_scheme(&out) {
            let end = self.pos;
            self.pos = start;
            let err = self.error("IRI is not absolute");
            self.pos = end;
            return Err(err);
        }
        Ok(out)
    }

    fn uchar(&mut self) -> std::result::Result<char, ParseError> {
        let digits = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.error("invalid escape in IRI")),
        };
        self.hex_char(digits)
    }

    fn hex_char(&mut self, digits: usize) -> std::result::Result<char, ParseError> {
        let end = self.pos + digits;
        let hex = self
            .src
            .get(self.pos..end)
            .filter(|h| h.bytes().all(|b| b.is_ascii_hexdigit()))
            .ok_or_else(|| self.error("truncated unicode escape"))?;
        let code = u32::from_str_radix(hex, 16).expect("validated hex digits");
        let c =
            char::from_u32(code).ok_or_else(|| self.error("escape is not a valid code point"))?;
        self.pos = end;
        Ok(c)
    }

    fn blank(&mut self) -> std::result::Result<Term, ParseError> {
        if !self.src[self.pos..].starts_with("_:") {
            return Err(self.error("expected '_:' blank node prefix"));
        }
        self.pos += 2;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\u{b7}') {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        // a trailing '.' terminates the statement
        while self.pos > start && self.src[..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        if self.pos == start {
            return Err(self.error("empty blank node label"));
        }
        Ok(Term::blank(&self.src[start..self.pos]))
    }

    fn literal(&mut self) -> std::result::Result<Term, ParseError> {
        self.bump();
        let mut value = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated string literal")),
                Some('"') => break,
                Some('\\') => {
                    let c = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex_char(4)?,
                        Some('U') => self.hex_char(8)?,
                        _ => {
                            self.pos -= 1;
                            return Err(self.error("invalid escape in string literal"));
                        }
                    };
                    value.push(c);
                }
                Some(c) => value.push(c),
            }
        }
        if self.src[self.pos..].starts_with("^^") {
            self.pos += 2;
            if self.peek() != Some('<') {
                return Err(self.error("expected datatype IRI after '^^'"));
            }
            let dt = self.iri()?;
            return Ok(Term::typed_literal(value, dt));
        }
        if self.eat('@') {
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
                self.pos += 1;
            }
            if self.pos == start {
                return Err(self.error("empty language tag"));
            }
            while self.peek() == Some('-') {
                self.pos += 1;
                let seg = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric()) {
                    self.pos += 1;
                }
                if self.pos == seg {
                    return Err(self.error("empty language subtag"));
                }
            }
            let tag = self.src[start..self.pos].to_owned();
            return Ok(Term::lang_literal(value, tag));
        }
        Ok(Term::literal(value))
    }
}

fn has_scheme(iri: &str) -> bool {
    let Some(colon) = iri.find(':') else {
        return false;
    };
    let scheme = &iri[..colon];
    let mut chars = scheme.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(line: &str) -> Triple {
        parse_line(line, 1).unwrap().unwrap()
    }

    #[test]
    fn parses_plain_iri_triple() {
        let t = one("<urn:a> <urn:p> <urn:b> .");
        assert_eq!(t.subject(), &Term::iri("urn:a"));
        assert_eq!(t.predicate(), "urn:p");
        assert_eq!(t.object(), &Term::iri("urn:b"));
    }

    #[test]
    fn parses_datatyped_literal() {
        let t = one("<urn:a> <urn:p> \"5\"^^<http://www.w3.org/2001/XMLSchema#integer> .");
        assert_eq!(t.object(), &Term::typed_literal("5", XSD_INTEGER));
    }

    #[test]
    fn parses_lang_literal_and_blank_nodes() {
        let t = one("_:b1 <urn:p> \"chat\"@fr-CA .");
        assert_eq!(t.subject(), &Term::Blank("b1".into()));
        assert_eq!(t.object(), &Term::lang_literal("chat", "fr-CA"));
        let t = one("_:x <urn:p> _:y.");
        assert_eq!(t.object(), &Term::Blank("y".into()));
    }

    #[test]
    fn missing_object_is_an_error_on_that_line() {
        let err = parse_line("<urn:a> <urn:p> .", 7).unwrap_err();
        assert_eq!(err.line, 7);
        assert_eq!(err.column, 17);
    }

    #[test]
    fn unescapes_strings_and_iris() {
        let t = one(r#"<urn:a\u0041> <urn:p> "q\"b\\s\n\té\U0001F600" ."#);
        assert_eq!(t.subject(), &Term::iri("urn:aA"));
        assert_eq!(t.object(), &Term::literal("q\"b\\s\n\t\u{e9}\u{1F600}"));
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let src = "# header\n\n   \n<urn:a> <urn:p> <urn:b> . # trailing\n";
        let triples = parse_str(src).unwrap();
        assert_eq!(triples.len(), 1);
    }

    #[test]
    fn rejects_relative_iri_and_literal_subject() {
        assert!(parse_line("<a> <urn:p> <urn:b> .", 1).is_err());
        assert!(parse_line("\"x\" <urn:p> <urn:b> .", 1).is_err());
        assert!(parse_line("<urn:a> _:p <urn:b> .", 1).is_err());
        assert!(parse_line("<urn:a> <urn:p> <urn:b>", 1).is_err());
        assert!(parse_line("<urn:a> <urn:p> <urn:b> . extra", 1).is_err());
    }

    #[test]
    fn serializes_simple_literal() {
        let t = Triple::new(Term::iri("urn:a"), "urn:p", Term::literal("x")).unwrap();
        assert_eq!(t.to_string(), "<urn:a> <urn:p> \"x\" .");
        let t = Triple::new(Term::iri("urn:a"), "urn:p", Term::literal("say \"hi\"")).unwrap();
        assert_eq!(t.to_string(), r#"<urn:a> <urn:p> "say \"hi\"" ."#);
    }

    #[test]
    fn empty_sequence_serializes_to_nothing() {
        let mut out = Vec::new();
        serialize_ntriples(&Vec::<Triple>::new(), &mut out).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn fail_fast_stops_and_skip_mode_counts() {
        let src = "<urn:a> <urn:p> <urn:b> .\nbroken\n<urn:c> <urn:p> <urn:d> .\n";
        let mut r = parse_ntriples(src.as_bytes(), ParseMode::FailFast);
        assert!(r.next().unwrap().is_ok());
        match r.next().unwrap() {
            Err(Error::Parse(e)) => assert_eq!(e.line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(r.next().is_none());

        let mut r = parse_ntriples(src.as_bytes(), ParseMode::SkipAndCount);
        let ok: Vec<_> = r.by_ref().collect::<Result<_>>().unwrap();
        assert_eq!(ok.len(), 2);
        assert_eq!(r.skipped(), 1);
    }

    #[test]
    fn invalid_utf8_reports_line() {
        let src: &[u8] = b"<urn:a> <urn:p> <urn:b> .\n<urn:a> <urn:p> \"\xff\" .\n";
        let err = parse_ntriples(src, ParseMode::FailFast)
            .collect::<Result<Vec<_>>>()
            .unwrap_err();
        match err {
            Error::Parse(e) => {
                assert_eq!(e.line, 2);
                assert_eq!(e.column, 18);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn blank_labels_normalize_idempotently() {
        assert_eq!(normalize_blank_label("abc9"), "abc9");
        let n = normalize_blank_label("a_b-c");
        assert!(n.bytes().all(|b| b.is_ascii_alphanumeric()));
        assert_eq!(normalize_blank_label(&n), n);
        assert_ne!(normalize_blank_label("a_b"), normalize_blank_label("a-b"));
    }

    #[test]
    fn namespacing_only_touches_blank_nodes() {
        assert_eq!(Term::blank("x").namespaced(3), Term::Blank("f3Nx".into()));
        assert_eq!(Term::iri("urn:x").namespaced(3), Term::iri("urn:x"));
    }

    #[test]
    fn crlf_input_is_accepted() {
        let triples = parse_str("<urn:a> <urn:p> <urn:b> .\r\n").unwrap();
        assert_eq!(triples.len(), 1);
    }
}
