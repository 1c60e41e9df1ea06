use log::warn;
use serde_json::Value;

use super::{parse_beats, Beats, ChordEvent, Timeline};
use crate::harte::parse_chord;
use crate::tps::Key;
use crate::{Error, Result};

const CHORD_NAMESPACE: &str = "chord_harte";
const KEY_NAMESPACE: &str = "key_mode";

fn schema<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Schema(msg.into()))
}

/// JSON numbers become exact rationals through their shortest decimal form,
/// so `0.1` is one tenth of a beat.
fn number_to_beats(v: &Value, what: &str) -> Result<Beats> {
    let f = match v.as_f64() {
        Some(f) if f.is_finite() => f,
        _ => return schema(format!("{what} must be a finite number")),
    };
    match parse_beats(&format!("{f}")) {
        Some(b) => Ok(b),
        None => schema(format!("{what} {f} cannot be represented as a rational beat count")),
    }
}

fn observations(annotation: &Value, index: usize) -> Result<&Vec<Value>> {
    match annotation.get("data").and_then(Value::as_array) {
        Some(d) => Ok(d),
        None => schema(format!("annotation {index}: missing 'data' array")),
    }
}

fn optional_string(meta: &Value, field: &str) -> Option<String> {
    meta.get(field).and_then(Value::as_str).map(str::to_string)
}

/// Reads the JAMS subset: `file_metadata` (`title`, `artist`,
/// `identifiers.id`) and `annotations` with the `chord_harte` and
/// `key_mode` namespaces. Times are read as beats. Other namespaces are
/// skipped.
pub fn load_jams(bytes: &[u8]) -> Result<Timeline> {
    let doc: Value = serde_json::from_slice(bytes)?;
    let Some(root) = doc.as_object() else {
        return schema("top level must be an object");
    };
    let Some(meta) = root.get("file_metadata").filter(|m| m.is_object()) else {
        return schema("missing 'file_metadata' object");
    };
    let Some(annotations) = root.get("annotations").and_then(Value::as_array) else {
        return schema("missing 'annotations' array");
    };
    if annotations.is_empty() {
        return schema("'annotations' is empty");
    }

    let id = meta
        .get("identifiers")
        .and_then(|i| i.get("id"))
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();

    let mut events: Option<Vec<ChordEvent>> = None;
    let mut key_marks = Vec::new();
    for (ai, ann) in annotations.iter().enumerate() {
        let Some(namespace) = ann.get("namespace").and_then(Value::as_str) else {
            return schema(format!("annotation {ai}: missing 'namespace'"));
        };
        match namespace {
            CHORD_NAMESPACE => {
                let data = observations(ann, ai)?;
                if events.is_some() {
                    warn!("annotation {ai}: additional {CHORD_NAMESPACE} annotation ignored");
                    continue;
                }
                let mut evs = Vec::with_capacity(data.len());
                for (index, obs) in data.iter().enumerate() {
                    let start = number_to_beats(field(obs, "time", index)?, &format!("event {index} time"))?;
                    let duration =
                        number_to_beats(field(obs, "duration", index)?, &format!("event {index} duration"))?;
                    let Some(value) = field(obs, "value", index)?.as_str() else {
                        return schema(format!("event {index}: 'value' must be a string"));
                    };
                    let chord = parse_chord(value).map_err(|source| Error::Event { index, source })?;
                    evs.push(ChordEvent::new(start, duration, chord));
                }
                events = Some(evs);
            }
            KEY_NAMESPACE => {
                for (index, obs) in observations(ann, ai)?.iter().enumerate() {
                    let start = number_to_beats(field(obs, "time", index)?, &format!("key {index} time"))?;
                    let Some(value) = field(obs, "value", index)?.as_str() else {
                        return schema(format!("key {index}: 'value' must be a string"));
                    };
                    let key: Key = value
                        .parse()
                        .map_err(|e| Error::Schema(format!("key {index}: '{value}': {e}")))?;
                    key_marks.push((start, key));
                }
            }
            other => warn!("annotation {ai}: unknown namespace '{other}' skipped"),
        }
    }
    let events = match events {
        Some(e) if !e.is_empty() => e,
        Some(_) => return schema(format!("'{CHORD_NAMESPACE}' annotation has no observations")),
        None => return schema(format!("no '{CHORD_NAMESPACE}' annotation")),
    };
    Ok(Timeline::new(id, events, key_marks)?
        .with_metadata(optional_string(meta, "title"), optional_string(meta, "artist")))
}

fn field<'a>(obs: &'a Value, name: &str, index: usize) -> Result<&'a Value> {
    match obs.get(name) {
        Some(v) => Ok(v),
        None => schema(format!("observation {index}: missing '{name}'")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harte::HarteError;

    const TWO_CHORDS: &str = r#"{
      "file_metadata": {"title": "Two", "artist": "Nobody", "identifiers": {"id": "two"}},
      "annotations": [
        {"namespace": "chord_harte", "data": [
          {"time": 0, "duration": 4, "value": "C:maj", "confidence": 1},
          {"time": 4, "duration": 4, "value": "G:maj", "confidence": 1}
        ]},
        {"namespace": "key_mode", "data": [
          {"time": 0, "duration": 8, "value": "C:maj", "confidence": 1}
        ]},
        {"namespace": "beat", "data": []}
      ]
    }"#;

    #[test]
    fn loads_subset() {
        let tl = load_jams(TWO_CHORDS.as_bytes()).unwrap();
        assert_eq!(tl.id, "two");
        assert_eq!(tl.title.as_deref(), Some("Two"));
        assert_eq!(tl.artist.as_deref(), Some("Nobody"));
        assert_eq!(tl.events().len(), 2);
        assert_eq!(tl.keys().len(), 1);
        assert_eq!(tl.keys()[0].key, Key::major(0));
        assert_eq!(tl.events()[1].start, Beats::from_integer(4));
        assert_eq!(load_jams(TWO_CHORDS.as_bytes()).unwrap(), tl);
    }

    #[test]
    fn fractional_times_are_exact() {
        let doc = r#"{"file_metadata": {}, "annotations": [{"namespace": "chord_harte",
            "data": [{"time": 0.1, "duration": 0.5, "value": "C", "confidence": 1}]}]}"#;
        let tl = load_jams(doc.as_bytes()).unwrap();
        assert_eq!(tl.events()[0].start, Beats::new(1, 10));
        assert_eq!(tl.events()[0].duration, Beats::new(1, 2));
    }

    #[test]
    fn schema_errors() {
        let empty = r#"{"file_metadata": {}, "annotations": []}"#;
        assert!(matches!(load_jams(empty.as_bytes()), Err(Error::Schema(_))));
        let no_meta = r#"{"annotations": []}"#;
        assert!(matches!(load_jams(no_meta.as_bytes()), Err(Error::Schema(_))));
        let only_keys = r#"{"file_metadata": {}, "annotations": [{"namespace": "key_mode", "data": []}]}"#;
        assert!(matches!(load_jams(only_keys.as_bytes()), Err(Error::Schema(_))));
        assert!(matches!(load_jams(b"[1"), Err(Error::Json(_))));
    }

    #[test]
    fn chord_errors_name_the_event() {
        let bad = r#"{"file_metadata": {}, "annotations": [{"namespace": "chord_harte",
            "data": [{"time": 0, "duration": 1, "value": "H:maj", "confidence": 1}]}]}"#;
        match load_jams(bad.as_bytes()) {
            Err(Error::Event { index: 0, source: HarteError::Syntax { position: 0, .. } }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
