//! Plain-text chord charts.
//!
//! ```text
//! # title: Example
//! # artist: Someone
//! # key: C:maj
//! 0 4 C:maj
//! 4 4 G:maj
//! ```
//!
//! Event lines are `<start> <duration> <harte-chord>`, times in beats as
//! decimals or `a/b`. Other `#` lines are comments; blank lines are ignored.

use std::fmt::Write as _;

use super::{format_beats, parse_beats, Beats, ChordEvent, Timeline};
use crate::harte::{parse_chord, render_chord};
use crate::tps::Key;
use crate::{Error, Result};

fn line_err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Line {
        line,
        message: message.into(),
    })
}

pub fn load_chart(text: &str) -> Result<Timeline> {
    let mut id = String::new();
    let mut title = None;
    let mut artist = None;
    let mut key: Option<Key> = None;
    let mut events = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            let header = header.trim_start();
            if let Some(v) = header.strip_prefix("title:") {
                title = Some(v.trim().to_string());
            } else if let Some(v) = header.strip_prefix("artist:") {
                artist = Some(v.trim().to_string());
            } else if let Some(v) = header.strip_prefix("id:") {
                id = v.trim().to_string();
            } else if let Some(v) = header.strip_prefix("key:") {
                if key.is_some() {
                    return line_err(line_no, "duplicate key header");
                }
                match v.trim().parse() {
                    Ok(k) => key = Some(k),
                    Err(e) => return line_err(line_no, format!("bad key '{}': {e}", v.trim())),
                }
            }
            continue;
        }

        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return line_err(
                line_no,
                format!("expected '<start> <duration> <chord>', found {} fields", fields.len()),
            );
        }
        let Some(start) = parse_beats(fields[0]) else {
            return line_err(line_no, format!("bad start '{}'", fields[0]));
        };
        let Some(duration) = parse_beats(fields[1]) else {
            return line_err(line_no, format!("bad duration '{}'", fields[1]));
        };
        if start < Beats::from_integer(0) {
            return line_err(line_no, "negative start");
        }
        if duration <= Beats::from_integer(0) {
            return line_err(line_no, "non-positive duration");
        }
        let chord = match parse_chord(fields[2]) {
            Ok(c) => c,
            Err(e) => return line_err(line_no, format!("chord '{}': {e}", fields[2])),
        };
        events.push(ChordEvent::new(start, duration, chord));
    }

    if events.is_empty() {
        return Err(Error::Schema("chart has no chord events".into()));
    }
    let marks = key.map(|k| vec![(Beats::from_integer(0), k)]).unwrap_or_default();
    Ok(Timeline::new(id, events, marks)?.with_metadata(title, artist))
}

/// Inverse of [`load_chart`] for single-key timelines.
pub fn write_chart(tl: &Timeline) -> Result<String> {
    if tl.keys().len() != 1 {
        return Err(Error::InvalidParameter(format!(
            "chart format holds a single key; '{}' has {}",
            tl.id,
            tl.keys().len()
        )));
    }
    let mut out = String::new();
    if !tl.id.is_empty() {
        writeln!(out, "# id: {}", tl.id).unwrap();
    }
    if let Some(t) = &tl.title {
        writeln!(out, "# title: {t}").unwrap();
    }
    if let Some(a) = &tl.artist {
        writeln!(out, "# artist: {a}").unwrap();
    }
    writeln!(out, "# key: {}", tl.keys()[0].key).unwrap();
    for e in tl.events() {
        writeln!(
            out,
            "{} {} {}",
            format_beats(e.start),
            format_beats(e.duration),
            render_chord(&e.chord)
        )
        .unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_two_events() {
        let tl = load_chart("# key: C:maj\n0 4 C:maj\n4 4 G:maj").unwrap();
        assert_eq!(tl.events().len(), 2);
        assert_eq!(tl.keys()[0].key, Key::major(0));
    }

    #[test]
    fn header_only_is_schema_error() {
        assert!(matches!(load_chart("# title: x\n# key: C:maj\n"), Err(Error::Schema(_))));
    }

    #[test]
    fn positioned_errors() {
        match load_chart("# key: C:maj\n\n0 0 C:maj") {
            Err(Error::Line { line: 3, message }) => assert!(message.contains("non-positive")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(load_chart("0 4 H:maj"), Err(Error::Line { line: 1, .. })));
        assert!(matches!(load_chart("0 4"), Err(Error::Line { line: 1, .. })));
        assert!(matches!(load_chart("0 x C"), Err(Error::Line { line: 1, .. })));
        assert!(matches!(
            load_chart("# key: C:maj\n# key: G:maj\n0 1 C"),
            Err(Error::Line { line: 2, .. })
        ));
    }

    #[test]
    fn rationals_and_comments() {
        let tl = load_chart("# a comment\n# title: T\n0 3/2 C\n1.5 0.5 N\n").unwrap();
        assert_eq!(tl.events()[1].start, Beats::new(3, 2));
        assert_eq!(tl.title.as_deref(), Some("T"));
    }

    #[test]
    fn writer_round_trips() {
        let text = "# id: p\n# title: T\n# artist: A\n# key: Eb:min\n0 3/2 Eb:min\n3/2 1/2 N\n2 2 Bb:7/3\n";
        let tl = load_chart(text).unwrap();
        let written = write_chart(&tl).unwrap();
        assert_eq!(written, text);
        assert_eq!(load_chart(&written).unwrap(), tl);
    }
}
