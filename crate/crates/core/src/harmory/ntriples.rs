use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::MemoryGraph;
use crate::{Error, Result};

const NS: &str = "urn:harmory:";
const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";

fn is_unreserved(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'-' | b'_' | b'.' | b'~' | b'/')
}

fn encode(id: &str) -> String {
    let mut out = String::with_capacity(id.len());
    for &b in id.as_bytes() {
        if is_unreserved(b) {
            out.push(b as char);
        } else {
            write!(out, "%{b:02X}").unwrap();
        }
    }
    out
}

/// Like [`encode`] but also escapes `/`, for ids embedded as one path
/// component.
fn encode_component(id: &str) -> String {
    encode(id).replace('/', "%2F")
}

fn sim_key(a: &str, b: &str) -> String {
    format!("{}/{}", encode_component(a), encode_component(b))
}

fn decode(text: &str) -> Result<String> {
    let bytes = text.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = text
                .get(i + 1..i + 3)
                .and_then(|h| u8::from_str_radix(h, 16).ok())
                .ok_or_else(|| Error::Schema(format!("bad percent escape in '{text}'")))?;
            out.push(hex);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).map_err(|_| Error::Schema(format!("IRI '{text}' does not decode to UTF-8")))
}

fn iri(kind: &str, id: &str) -> String {
    format!("<{NS}{kind}/{}>", encode(id))
}

fn predicate(name: &str) -> String {
    format!("<{NS}{name}>")
}

fn literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

pub(crate) fn format_weight(w: f64) -> String {
    format!("{w:.6}")
}

/// The graph as sorted, LF-terminated N-Triples.
pub fn export_ntriples(g: &MemoryGraph) -> String {
    let mut lines = Vec::new();
    let mut triple = |s: String, p: &str, o: String| lines.push(format!("{s} {} {o} .", predicate(p)));
    for (pid, piece) in &g.pieces {
        for s in &piece.segments {
            triple(iri("piece", pid), "hasSegment", iri("segment", s));
        }
        for w in piece.segments.windows(2) {
            triple(iri("segment", &w[0]), "nextSegment", iri("segment", &w[1]));
        }
    }
    for (sid, seg) in &g.segments {
        triple(iri("segment", sid), "chordSequence", literal(&seg.chord_sequence()));
    }
    for (pat, node) in &g.patterns {
        for m in &node.members {
            triple(iri("segment", m), "instanceOf", iri("pattern", pat));
        }
        triple(
            iri("pattern", pat),
            "chordSequence",
            literal(&g.segments[&node.medoid].chord_sequence()),
        );
    }
    for e in &g.similar {
        triple(iri("pattern", &e.a), "similarTo", iri("pattern", &e.b));
        let sim = format!("<{NS}sim/{}>", sim_key(&e.a, &e.b));
        triple(sim, "weight", format!("\"{}\"^^<{XSD_DECIMAL}>", format_weight(e.weight)));
    }
    lines.sort();
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

/// Structural content of a graph as recoverable from N-Triples. Two graphs
/// are isomorphic when their views are equal, since node identities are
/// carried by their ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphView {
    /// Piece id to its segments in temporal order.
    pub pieces: BTreeMap<String, Vec<String>>,
    pub segment_chords: BTreeMap<String, String>,
    pub instance_of: BTreeMap<String, String>,
    pub pattern_chords: BTreeMap<String, String>,
    /// `(a, b)` with `a < b` to the weight as written (six decimals).
    pub similar: BTreeMap<(String, String), String>,
}

impl GraphView {
    pub fn of(g: &MemoryGraph) -> GraphView {
        GraphView {
            pieces: g.pieces.iter().map(|(k, p)| (k.clone(), p.segments.clone())).collect(),
            segment_chords: g.segments.iter().map(|(k, s)| (k.clone(), s.chord_sequence())).collect(),
            instance_of: g
                .instance_of()
                .into_iter()
                .map(|(s, p)| (s.to_string(), p.to_string()))
                .collect(),
            pattern_chords: g
                .patterns
                .iter()
                .map(|(k, p)| (k.clone(), g.segments[&p.medoid].chord_sequence()))
                .collect(),
            similar: g
                .similar
                .iter()
                .map(|e| ((e.a.clone(), e.b.clone()), format_weight(e.weight)))
                .collect(),
        }
    }
}

enum Term {
    Iri(String),
    Literal(String),
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Line {
            line: self.line,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn iri(&mut self) -> Result<String> {
        self.skip_ws();
        let rest = self.rest();
        if !rest.starts_with('<') {
            return Err(self.err("expected IRI"));
        }
        let end = rest.find('>').ok_or_else(|| self.err("unterminated IRI"))?;
        self.pos += end + 1;
        Ok(rest[1..end].to_string())
    }

    fn term(&mut self) -> Result<Term> {
        self.skip_ws();
        if !self.rest().starts_with('"') {
            return self.iri().map(Term::Iri);
        }
        let mut value = String::new();
        let mut chars = self.rest().char_indices().skip(1);
        let close = loop {
            match chars.next() {
                None => return Err(self.err("unterminated literal")),
                Some((i, '"')) => break i,
                Some((_, '\\')) => match chars.next() {
                    Some((_, 'n')) => value.push('\n'),
                    Some((_, 'r')) => value.push('\r'),
                    Some((_, 't')) => value.push('\t'),
                    Some((_, c @ ('"' | '\\'))) => value.push(c),
                    _ => return Err(self.err("unsupported escape in literal")),
                },
                Some((_, c)) => value.push(c),
            }
        };
        self.pos += close + 1;
        if self.rest().starts_with("^^") {
            self.pos += 2;
            self.iri()?;
        } else if self.rest().starts_with('@') {
            let tag = self.rest().find(|c: char| c.is_whitespace()).unwrap_or(self.rest().len());
            self.pos += tag;
        }
        Ok(Term::Literal(value))
    }

    fn end(&mut self) -> Result<()> {
        self.skip_ws();
        if self.rest() != "." {
            return Err(self.err("expected '.' at end of triple"));
        }
        Ok(())
    }
}

fn strip<'a>(iri: &'a str, kind: &str) -> Option<&'a str> {
    iri.strip_prefix(NS)?.strip_prefix(kind)?.strip_prefix('/')
}

fn node(iri: &str, kind: &str, line: usize) -> Result<String> {
    strip(iri, kind)
        .ok_or_else(|| Error::Line {
            line,
            message: format!("expected a {kind} IRI, got <{iri}>"),
        })
        .and_then(decode)
}

/// Reads N-Triples written by [`export_ntriples`]. Segment order within a
/// piece is recovered from the `nextSegment` chain.
pub fn import_ntriples(text: &str) -> Result<GraphView> {
    let mut view = GraphView::default();
    let mut has: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut next: BTreeMap<String, String> = BTreeMap::new();
    let mut weights: BTreeMap<String, String> = BTreeMap::new();
    let mut similar = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut c = Cursor {
            text: trimmed,
            pos: 0,
            line,
        };
        let s = c.iri()?;
        let p = c.iri()?;
        let o = c.term()?;
        c.end()?;
        let pred = p
            .strip_prefix(NS)
            .ok_or_else(|| c.err(format!("unknown predicate <{p}>")))?;
        match (pred, o) {
            ("hasSegment", Term::Iri(o)) => has
                .entry(node(&s, "piece", line)?)
                .or_default()
                .push(node(&o, "segment", line)?),
            ("nextSegment", Term::Iri(o)) => {
                next.insert(node(&s, "segment", line)?, node(&o, "segment", line)?);
            }
            ("instanceOf", Term::Iri(o)) => {
                view.instance_of
                    .insert(node(&s, "segment", line)?, node(&o, "pattern", line)?);
            }
            ("similarTo", Term::Iri(o)) => similar.push((node(&s, "pattern", line)?, node(&o, "pattern", line)?)),
            ("weight", Term::Literal(w)) => {
                let key = strip(&s, "sim").ok_or_else(|| c.err("weight on a non-sim node"))?;
                weights.insert(key.to_string(), w);
            }
            ("chordSequence", Term::Literal(seq)) => {
                if let Some(seg) = strip(&s, "segment") {
                    view.segment_chords.insert(decode(seg)?, seq);
                } else {
                    view.pattern_chords.insert(node(&s, "pattern", line)?, seq);
                }
            }
            _ => return Err(c.err(format!("unexpected object for predicate '{pred}'"))),
        }
    }

    for (a, b) in similar {
        let key = sim_key(&a, &b);
        let w = weights
            .remove(&key)
            .ok_or_else(|| Error::Schema(format!("similarTo {a} -> {b} has no weight")))?;
        view.similar.insert((a, b), w);
    }

    for (piece, segs) in has {
        let mut ordered = Vec::with_capacity(segs.len());
        let targets: std::collections::BTreeSet<&String> = segs.iter().filter_map(|s| next.get(s)).collect();
        let mut heads = segs.iter().filter(|s| !targets.contains(s));
        let mut cur = heads
            .next()
            .ok_or_else(|| Error::Schema(format!("piece '{piece}' has a cyclic segment chain")))?
            .clone();
        if heads.next().is_some() {
            return Err(Error::Schema(format!("piece '{piece}' has a broken segment chain")));
        }
        loop {
            ordered.push(cur.clone());
            match next.get(&cur) {
                Some(n) if ordered.len() <= segs.len() => cur = n.clone(),
                _ => break,
            }
        }
        if ordered.len() != segs.len() {
            return Err(Error::Schema(format!("piece '{piece}' has a broken segment chain")));
        }
        view.pieces.insert(piece, ordered);
    }
    Ok(view)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_encoding_round_trips() {
        for id in ["plain/seg/0", "with space", "ü#?<>", "100%"] {
            let enc = encode(id);
            assert!(enc.bytes().all(|b| is_unreserved(b) || b == b'%'));
            assert_eq!(decode(&enc).unwrap(), id);
        }
        assert_eq!(encode("a b"), "a%20b");
    }

    #[test]
    fn literal_escapes() {
        assert_eq!(literal("a\"b\\c"), r#""a\"b\\c""#);
        let mut c = Cursor {
            text: r#""a\"b\\c" ."#,
            pos: 0,
            line: 1,
        };
        match c.term().unwrap() {
            Term::Literal(s) => assert_eq!(s, "a\"b\\c"),
            Term::Iri(_) => panic!("expected literal"),
        }
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(import_ntriples("<urn:harmory:piece/a> <urn:harmory:hasSegment> <urn:harmory:segment/a/seg/0>").is_err());
        assert!(import_ntriples("<urn:x> <urn:harmory:hasSegment> <urn:harmory:segment/a> .").is_err());
        assert!(import_ntriples("<urn:harmory:pattern/a> <urn:harmory:similarTo> <urn:harmory:pattern/b> .").is_err());
    }
}
