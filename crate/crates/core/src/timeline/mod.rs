//! Piece-level data model: timed chord events on a beat grid with key
//! annotations, plus the TPS encodings used by the similarity measures.

mod chart;
mod jams;

pub use chart::{load_chart, write_chart};
pub use jams::load_jams;

use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

use crate::harte::{Chord, SoundedChord};
use crate::tps::{self, Key, Mode, TpsPoint, TpsValue};
use crate::{Error, Result};

/// Musical time in beats.
pub type Beats = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChordEvent {
    pub start: Beats,
    pub duration: Beats,
    pub chord: Chord,
}

impl ChordEvent {
    pub fn new(start: Beats, duration: Beats, chord: Chord) -> Self {
        ChordEvent {
            start,
            duration,
            chord,
        }
    }

    pub fn end(&self) -> Beats {
        self.start + self.duration
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeySpan {
    pub start: Beats,
    pub duration: Beats,
    pub key: Key,
}

/// A sounded event together with the key governing it.
#[derive(Debug, Clone, Copy)]
pub struct SoundedEvent<'a> {
    /// Index into [`Timeline::events`].
    pub event_index: usize,
    pub start: Beats,
    pub duration: Beats,
    pub chord: &'a SoundedChord,
    pub key: Key,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timeline {
    pub id: String,
    pub title: Option<String>,
    pub artist: Option<String>,
    events: Vec<ChordEvent>,
    keys: Vec<KeySpan>,
}

impl Timeline {
    /// Builds a timeline from events in any order and key annotations given
    /// as `(start, key)`. Key spans are tiled over the whole piece; without
    /// annotations a single estimated key is used.
    pub fn new(
        id: impl Into<String>,
        mut events: Vec<ChordEvent>,
        mut key_marks: Vec<(Beats, Key)>,
    ) -> Result<Self> {
        let id = id.into();
        if events.is_empty() {
            return Err(Error::Schema(format!("piece '{id}' has no chord events")));
        }
        for (i, e) in events.iter().enumerate() {
            if e.duration <= Beats::from_integer(0) {
                return Err(Error::Schema(format!(
                    "event {i}: non-positive duration {}",
                    format_beats(e.duration)
                )));
            }
            if e.start < Beats::from_integer(0) {
                return Err(Error::Schema(format!(
                    "event {i}: negative start {}",
                    format_beats(e.start)
                )));
            }
        }
        events.sort_by_key(|e| e.start);
        for (i, w) in events.windows(2).enumerate() {
            if w[1].start < w[0].end() {
                return Err(Error::Schema(format!(
                    "events {i} and {} overlap at beat {}",
                    i + 1,
                    format_beats(w[1].start)
                )));
            }
        }
        let end = events.last().map(ChordEvent::end).unwrap_or_default();

        key_marks.sort_by_key(|m| m.0);
        if key_marks.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Schema("two key annotations share a start time".into()));
        }
        if key_marks.is_empty() {
            key_marks.push((Beats::from_integer(0), estimate_key(&events)));
        }
        let mut keys = Vec::with_capacity(key_marks.len());
        for (i, &(start, key)) in key_marks.iter().enumerate() {
            let start = if i == 0 { Beats::from_integer(0) } else { start };
            let stop = match key_marks.get(i + 1) {
                Some(&(next, _)) => next,
                None => end.max(start + 1),
            };
            keys.push(KeySpan {
                start,
                duration: stop - start,
                key,
            });
        }

        Ok(Timeline {
            id,
            title: None,
            artist: None,
            events,
            keys,
        })
    }

    pub fn with_metadata(mut self, title: Option<String>, artist: Option<String>) -> Self {
        self.title = title;
        self.artist = artist;
        self
    }

    /// Convenience constructor: consecutive events of the given beat
    /// durations in a single key.
    pub fn from_progression(
        id: impl Into<String>,
        chords: &[(&str, i64)],
        key: Option<Key>,
    ) -> Result<Self> {
        let mut t = Beats::from_integer(0);
        let mut events = Vec::with_capacity(chords.len());
        for (index, &(text, beats)) in chords.iter().enumerate() {
            let chord = crate::harte::parse_chord(text).map_err(|source| Error::Event { index, source })?;
            let d = Beats::from_integer(beats);
            events.push(ChordEvent::new(t, d, chord));
            t += d;
        }
        let marks = key.map(|k| vec![(Beats::from_integer(0), k)]).unwrap_or_default();
        Timeline::new(id, events, marks)
    }

    pub fn events(&self) -> &[ChordEvent] {
        &self.events
    }

    pub fn keys(&self) -> &[KeySpan] {
        &self.keys
    }

    pub fn end(&self) -> Beats {
        self.events.last().map(ChordEvent::end).unwrap_or_default()
    }

    /// Key governing the given position.
    pub fn key_at(&self, at: Beats) -> Key {
        let idx = self.keys.partition_point(|k| k.start <= at);
        self.keys[idx.saturating_sub(1)].key
    }

    pub fn sounded(&self) -> impl Iterator<Item = SoundedEvent<'_>> + '_ {
        self.events.iter().enumerate().filter_map(move |(i, e)| {
            e.chord.as_sounded().map(|c| SoundedEvent {
                event_index: i,
                start: e.start,
                duration: e.duration,
                chord: c,
                key: self.key_at(e.start),
            })
        })
    }

    pub fn sounded_count(&self) -> usize {
        self.events.iter().filter(|e| e.chord.is_sounded()).count()
    }

    pub(crate) fn require_sounded(&self) -> Result<()> {
        if self.sounded_count() == 0 {
            Err(Error::EmptyTimeline(self.id.clone()))
        } else {
            Ok(())
        }
    }

    /// TPS points of the sounded events in absolute pitch.
    pub fn tps_points(&self) -> Vec<TpsPoint> {
        self.sounded().map(|e| TpsPoint::new(e.chord, e.key)).collect()
    }

    /// TPS points of the sounded events, each expressed relative to its
    /// governing key.
    pub fn key_relative_points(&self) -> Vec<TpsPoint> {
        self.sounded()
            .map(|e| TpsPoint::key_relative(e.chord, e.key))
            .collect()
    }

    /// Same timeline with every root, bass and key tonic shifted.
    pub fn transpose(&self, semitones: i32) -> Timeline {
        Timeline {
            events: self
                .events
                .iter()
                .map(|e| ChordEvent {
                    chord: e.chord.transpose(semitones),
                    ..e.clone()
                })
                .collect(),
            keys: self
                .keys
                .iter()
                .map(|k| KeySpan {
                    key: k.key.transpose(semitones),
                    ..*k
                })
                .collect(),
            ..self.clone()
        }
    }

    /// Sub-timeline made of the sounded events `range` (indices into the
    /// sounded sequence), re-based to start at beat 0, each keeping its key.
    pub fn sounded_slice(&self, id: impl Into<String>, range: std::ops::Range<usize>) -> Result<Timeline> {
        let picked: Vec<SoundedEvent<'_>> = self.sounded().skip(range.start).take(range.len()).collect();
        let origin = picked.first().map(|e| e.start).unwrap_or_default();
        let mut events = Vec::with_capacity(picked.len());
        let mut marks: Vec<(Beats, Key)> = Vec::new();
        for e in &picked {
            let start = e.start - origin;
            if marks.last().is_none_or(|m| m.1 != e.key) {
                marks.push((start, e.key));
            }
            events.push(ChordEvent::new(start, e.duration, Chord::Sounded(e.chord.clone())));
        }
        Timeline::new(id, events, marks)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Grid {
    /// One value per sounded chord event, weighted by its duration.
    Event,
    /// One value per whole beat.
    Beat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TpsStep {
    pub value: TpsValue,
    #[serde(serialize_with = "serialize_beats")]
    pub weight: Beats,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TpsSeries {
    pub steps: Vec<TpsStep>,
}

impl TpsSeries {
    pub fn values(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.value.0).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Key-relative TPS values of a timeline.
///
/// On the beat grid NoChord beats (and gaps) hold the previous sounded
/// value; leading ones take the first sounded value. The grid runs from the
/// first event to the end of the piece, at least one beat long.
pub fn encode_tps(tl: &Timeline, grid: Grid) -> Result<TpsSeries> {
    tl.require_sounded()?;
    let steps = match grid {
        Grid::Event => tl
            .sounded()
            .map(|e| TpsStep {
                value: tps::sounded_key_relative_value(e.chord, e.key),
                weight: e.duration,
            })
            .collect(),
        Grid::Beat => beat_grid(tl)
            .into_iter()
            .map(|value| TpsStep {
                value,
                weight: Beats::from_integer(1),
            })
            .collect(),
    };
    Ok(TpsSeries { steps })
}

/// Beat-grid step function of key-relative values. Requires at least one
/// sounded event.
pub(crate) fn beat_grid(tl: &Timeline) -> Vec<TpsValue> {
    let events = tl.events();
    let values: Vec<Option<TpsValue>> = events
        .iter()
        .map(|e| {
            e.chord
                .as_sounded()
                .map(|c| tps::sounded_key_relative_value(c, tl.key_at(e.start)))
        })
        .collect();
    let first = values.iter().flatten().next().copied().unwrap_or_default();
    let origin = events[0].start;
    let beats = (tl.end() - origin).floor().to_integer().max(1);

    let mut out = Vec::with_capacity(beats as usize);
    let mut held = first;
    let mut cursor = 0;
    for b in 0..beats {
        let t = origin + b;
        while cursor < events.len() && events[cursor].end() <= t {
            if let Some(v) = values[cursor] {
                held = v;
            }
            cursor += 1;
        }
        if cursor < events.len() && events[cursor].start <= t {
            if let Some(v) = values[cursor] {
                held = v;
            }
        }
        out.push(held);
    }
    out
}

pub fn transpose(tl: &Timeline, semitones: i32) -> Timeline {
    tl.transpose(semitones)
}

/// Key maximising the duration-weighted number of chord tones inside its
/// diatonic set. Ties go to the key whose tonic roots the most chord
/// duration, then to a tonic equal to the first chord's root, then to the
/// lowest tonic, major before minor.
pub fn estimate_key(events: &[ChordEvent]) -> Key {
    estimate_key_from(events.iter().filter_map(|e| e.chord.as_sounded().map(|c| (c, e.duration))))
}

pub fn estimate_key_from<'a>(chords: impl Iterator<Item = (&'a SoundedChord, Beats)> + Clone) -> Key {
    let opening = chords.clone().next().map(|(c, _)| c.root_pc());
    let mut best: Option<(Key, (Beats, Beats, bool))> = None;
    for tonic in 0..12u8 {
        for mode in [Mode::Major, Mode::Minor] {
            let key = Key::new(crate::harte::PitchClass::new(tonic as i32), mode);
            let diatonic = key.diatonic_set();
            let mut coverage = Beats::from_integer(0);
            let mut tonic_weight = Beats::from_integer(0);
            for (c, d) in chords.clone() {
                let pcs = c.pitch_classes();
                coverage += d * pcs.iter().filter(|p| diatonic.contains(*p)).count() as i64;
                if c.root_pc() == key.tonic {
                    tonic_weight += d;
                }
            }
            let score = (coverage, tonic_weight, opening == Some(key.tonic));
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((key, score));
            }
        }
    }
    best.map(|b| b.0).unwrap_or(Key::major(0))
}

/// Parses `12`, `1.5` or `3/2`.
pub fn parse_beats(text: &str) -> Option<Beats> {
    if let Some((n, d)) = text.split_once('/') {
        let n: i64 = n.parse().ok()?;
        let d: i64 = d.parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Beats::new(n, d));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let numer: i64 = digits.parse().ok()?;
    let denom = 10i64.checked_pow(frac.len() as u32)?;
    let r = Beats::new(numer, denom);
    Some(if neg { -r } else { r })
}

/// Integer when whole, `a/b` otherwise.
pub fn format_beats(b: Beats) -> String {
    if b.is_integer() {
        b.to_integer().to_string()
    } else {
        format!("{}/{}", b.numer(), b.denom())
    }
}

pub(crate) fn serialize_beats<S: serde::Serializer>(b: &Beats, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_beats(*b))
}

impl fmt::Display for Timeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} events)", self.id, self.events.len())
    }
}
