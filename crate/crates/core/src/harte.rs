//! Harte chord notation: parsing, validation, canonical rendering and
//! pitch-class semantics.
//!
//! Accepted grammar:
//!
//! ```text
//! chord      ::= "N" | note | note "/" degree | note ":" body ("/" degree)?
//! body       ::= shorthand | shorthand "(" degreelist ")" | "(" degreelist ")"
//! note       ::= natural modifier*
//! natural    ::= "A".."G"
//! modifier   ::= "b" | "#"
//! degreelist ::= degree ("," degree)*
//! degree     ::= "*"? modifier* integer
//! ```
//!
//! A bare note expands to `maj`. A degree list without a shorthand starts
//! from the root alone, which the list may restate as `1`. Omissions (`*`)
//! are applied to the base set first, then additions; an interval number
//! may appear at most once.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarteError {
    #[error("syntax error at position {position}: expected {expected}")]
    Syntax {
        position: usize,
        expected: &'static str,
    },
    #[error("semantic error: {0}")]
    Semantic(String),
}

impl HarteError {
    pub fn position(&self) -> Option<usize> {
        match self {
            HarteError::Syntax { position, .. } => Some(*position),
            HarteError::Semantic(_) => None,
        }
    }
}

/// Pitch modulo the octave, 0 = C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PitchClass(u8);

impl PitchClass {
    pub const C: PitchClass = PitchClass(0);

    /// Wraps any integer into 0..12.
    pub fn new(semitones: i32) -> Self {
        PitchClass(semitones.rem_euclid(12) as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn transpose(self, semitones: i32) -> Self {
        PitchClass::new(self.0 as i32 + semitones)
    }

    /// Semitones needed to go up from `self` to `other`, in 0..12.
    pub fn interval_to(self, other: PitchClass) -> u8 {
        (other.0 + 12 - self.0) % 12
    }
}

impl fmt::Display for PitchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of pitch classes stored as a 12-bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PcSet(u16);

impl PcSet {
    pub const EMPTY: PcSet = PcSet(0);
    pub const ALL: PcSet = PcSet(0x0fff);

    pub fn from_bits(bits: u16) -> Self {
        PcSet(bits & 0x0fff)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn insert(&mut self, pc: PitchClass) {
        self.0 |= 1 << pc.value();
    }

    pub fn with(mut self, pc: PitchClass) -> Self {
        self.insert(pc);
        self
    }

    pub fn contains(self, pc: PitchClass) -> bool {
        self.0 & (1 << pc.value()) != 0
    }

    pub fn union(self, other: PcSet) -> PcSet {
        PcSet(self.0 | other.0)
    }

    /// Members of `self` not in `other`.
    pub fn difference(self, other: PcSet) -> PcSet {
        PcSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: PcSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Rotates every member up by `semitones`.
    pub fn transpose(self, semitones: i32) -> PcSet {
        let s = semitones.rem_euclid(12) as u32;
        let wide = (self.0 as u32) << s;
        PcSet::from_bits((wide | (wide >> 12)) as u16)
    }

    pub fn iter(self) -> impl Iterator<Item = PitchClass> {
        (0..12u8).filter(move |i| self.0 & (1 << i) != 0).map(PitchClass)
    }
}

impl FromIterator<PitchClass> for PcSet {
    fn from_iter<I: IntoIterator<Item = PitchClass>>(iter: I) -> Self {
        let mut set = PcSet::EMPTY;
        for pc in iter {
            set.insert(pc);
        }
        set
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    C,
    D,
    E,
    F,
    G,
    A,
    B,
}

impl Letter {
    fn from_char(c: char) -> Option<Letter> {
        Some(match c {
            'C' => Letter::C,
            'D' => Letter::D,
            'E' => Letter::E,
            'F' => Letter::F,
            'G' => Letter::G,
            'A' => Letter::A,
            'B' => Letter::B,
            _ => return None,
        })
    }

    fn as_char(self) -> char {
        match self {
            Letter::C => 'C',
            Letter::D => 'D',
            Letter::E => 'E',
            Letter::F => 'F',
            Letter::G => 'G',
            Letter::A => 'A',
            Letter::B => 'B',
        }
    }

    fn base(self) -> i32 {
        match self {
            Letter::C => 0,
            Letter::D => 2,
            Letter::E => 4,
            Letter::F => 5,
            Letter::G => 7,
            Letter::A => 9,
            Letter::B => 11,
        }
    }
}

/// A spelled note name: letter plus a run of flats (negative) or sharps
/// (positive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Natural {
    pub letter: Letter,
    pub accidentals: i8,
}

const SHARP_SPELLING: [(Letter, i8); 12] = [
    (Letter::C, 0),
    (Letter::C, 1),
    (Letter::D, 0),
    (Letter::D, 1),
    (Letter::E, 0),
    (Letter::F, 0),
    (Letter::F, 1),
    (Letter::G, 0),
    (Letter::G, 1),
    (Letter::A, 0),
    (Letter::A, 1),
    (Letter::B, 0),
];

const FLAT_SPELLING: [(Letter, i8); 12] = [
    (Letter::C, 0),
    (Letter::D, -1),
    (Letter::D, 0),
    (Letter::E, -1),
    (Letter::E, 0),
    (Letter::F, 0),
    (Letter::G, -1),
    (Letter::G, 0),
    (Letter::A, -1),
    (Letter::A, 0),
    (Letter::B, -1),
    (Letter::B, 0),
];

/// Conventional key-signature spelling used when only a pitch class is known.
const KEY_SPELLING: [(Letter, i8); 12] = [
    (Letter::C, 0),
    (Letter::D, -1),
    (Letter::D, 0),
    (Letter::E, -1),
    (Letter::E, 0),
    (Letter::F, 0),
    (Letter::F, 1),
    (Letter::G, 0),
    (Letter::A, -1),
    (Letter::A, 0),
    (Letter::B, -1),
    (Letter::B, 0),
];

impl Natural {
    pub const fn new(letter: Letter, accidentals: i8) -> Self {
        Natural {
            letter,
            accidentals,
        }
    }

    pub fn pitch_class(self) -> PitchClass {
        pitch_class_of(self)
    }

    /// Default spelling of a pitch class.
    pub fn spell(pc: PitchClass) -> Natural {
        let (letter, accidentals) = KEY_SPELLING[pc.value() as usize];
        Natural::new(letter, accidentals)
    }

    /// Shifts by `semitones`, keeping the flat/sharp preference of the
    /// original spelling. A shift of a whole number of octaves is the
    /// identity.
    pub fn transpose(self, semitones: i32) -> Natural {
        if semitones.rem_euclid(12) == 0 {
            return self;
        }
        let pc = self.pitch_class().transpose(semitones).value() as usize;
        let (letter, accidentals) = if self.accidentals < 0 {
            FLAT_SPELLING[pc]
        } else {
            SHARP_SPELLING[pc]
        };
        Natural::new(letter, accidentals)
    }
}

impl fmt::Display for Natural {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter.as_char())?;
        let mark = if self.accidentals < 0 { 'b' } else { '#' };
        for _ in 0..self.accidentals.unsigned_abs() {
            write!(f, "{mark}")?;
        }
        Ok(())
    }
}

impl FromStr for Natural {
    type Err = HarteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser::new(s);
        let note = p.note()?;
        p.expect_end()?;
        Ok(note)
    }
}

/// Letter base plus one semitone per modifier, modulo 12.
pub fn pitch_class_of(note: Natural) -> PitchClass {
    PitchClass::new(note.letter.base() + note.accidentals as i32)
}

/// Scale-degree reference within a chord.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Degree {
    pub interval: u8,
    pub alteration: i8,
    pub omit: bool,
}

const MAJOR_OFFSETS: [i32; 13] = [0, 2, 4, 5, 7, 9, 11, 0, 2, 4, 5, 7, 9];

impl Degree {
    pub const fn new(interval: u8, alteration: i8) -> Self {
        Degree {
            interval,
            alteration,
            omit: false,
        }
    }

    pub fn semitones(self) -> u8 {
        semitone_of(self)
    }

    fn validate(self) -> Result<Self, HarteError> {
        if !(1..=13).contains(&self.interval) {
            return Err(HarteError::Semantic(format!(
                "degree {} outside 1..13",
                self.interval
            )));
        }
        if self.alteration.abs() > 2 {
            return Err(HarteError::Semantic(format!(
                "degree {} altered by {} semitones (max 2)",
                self.interval, self.alteration
            )));
        }
        Ok(self)
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.omit {
            write!(f, "*")?;
        }
        let mark = if self.alteration < 0 { 'b' } else { '#' };
        for _ in 0..self.alteration.unsigned_abs() {
            write!(f, "{mark}")?;
        }
        write!(f, "{}", self.interval)
    }
}

/// Major-scale offset of the interval number plus its alteration, mod 12.
pub fn semitone_of(degree: Degree) -> u8 {
    let base = MAJOR_OFFSETS[(degree.interval as usize - 1) % 13];
    PitchClass::new(base + degree.alteration as i32).value()
}

/// Named chord qualities, in table order (ties in canonical rendering
/// resolve to the earlier entry).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shorthand {
    Maj,
    Min,
    Dim,
    Aug,
    Maj7,
    Min7,
    Dom7,
    Dim7,
    Hdim7,
    MinMaj7,
    Maj6,
    Min6,
    Dom9,
    Maj9,
    Min9,
    Sus2,
    Sus4,
    Dom11,
    Dom13,
}

impl Shorthand {
    pub const ALL: [Shorthand; 19] = [
        Shorthand::Maj,
        Shorthand::Min,
        Shorthand::Dim,
        Shorthand::Aug,
        Shorthand::Maj7,
        Shorthand::Min7,
        Shorthand::Dom7,
        Shorthand::Dim7,
        Shorthand::Hdim7,
        Shorthand::MinMaj7,
        Shorthand::Maj6,
        Shorthand::Min6,
        Shorthand::Dom9,
        Shorthand::Maj9,
        Shorthand::Min9,
        Shorthand::Sus2,
        Shorthand::Sus4,
        Shorthand::Dom11,
        Shorthand::Dom13,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Shorthand::Maj => "maj",
            Shorthand::Min => "min",
            Shorthand::Dim => "dim",
            Shorthand::Aug => "aug",
            Shorthand::Maj7 => "maj7",
            Shorthand::Min7 => "min7",
            Shorthand::Dom7 => "7",
            Shorthand::Dim7 => "dim7",
            Shorthand::Hdim7 => "hdim7",
            Shorthand::MinMaj7 => "minmaj7",
            Shorthand::Maj6 => "maj6",
            Shorthand::Min6 => "min6",
            Shorthand::Dom9 => "9",
            Shorthand::Maj9 => "maj9",
            Shorthand::Min9 => "min9",
            Shorthand::Sus2 => "sus2",
            Shorthand::Sus4 => "sus4",
            Shorthand::Dom11 => "11",
            Shorthand::Dom13 => "13",
        }
    }

    pub fn from_name(name: &str) -> Option<Shorthand> {
        Shorthand::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Interval set as (interval number, alteration) pairs.
    pub fn degrees(self) -> &'static [(u8, i8)] {
        match self {
            Shorthand::Maj => &[(1, 0), (3, 0), (5, 0)],
            Shorthand::Min => &[(1, 0), (3, -1), (5, 0)],
            Shorthand::Dim => &[(1, 0), (3, -1), (5, -1)],
            Shorthand::Aug => &[(1, 0), (3, 0), (5, 1)],
            Shorthand::Maj7 => &[(1, 0), (3, 0), (5, 0), (7, 0)],
            Shorthand::Min7 => &[(1, 0), (3, -1), (5, 0), (7, -1)],
            Shorthand::Dom7 => &[(1, 0), (3, 0), (5, 0), (7, -1)],
            Shorthand::Dim7 => &[(1, 0), (3, -1), (5, -1), (7, -2)],
            Shorthand::Hdim7 => &[(1, 0), (3, -1), (5, -1), (7, -1)],
            Shorthand::MinMaj7 => &[(1, 0), (3, -1), (5, 0), (7, 0)],
            Shorthand::Maj6 => &[(1, 0), (3, 0), (5, 0), (6, 0)],
            Shorthand::Min6 => &[(1, 0), (3, -1), (5, 0), (6, 0)],
            Shorthand::Dom9 => &[(1, 0), (3, 0), (5, 0), (7, -1), (9, 0)],
            Shorthand::Maj9 => &[(1, 0), (3, 0), (5, 0), (7, 0), (9, 0)],
            Shorthand::Min9 => &[(1, 0), (3, -1), (5, 0), (7, -1), (9, 0)],
            Shorthand::Sus2 => &[(1, 0), (2, 0), (5, 0)],
            Shorthand::Sus4 => &[(1, 0), (4, 0), (5, 0)],
            Shorthand::Dom11 => &[(1, 0), (3, 0), (5, 0), (7, -1), (9, 0), (11, 0)],
            Shorthand::Dom13 => &[
                (1, 0),
                (3, 0),
                (5, 0),
                (7, -1),
                (9, 0),
                (11, 0),
                (13, 0),
            ],
        }
    }

    fn degree_map(self) -> BTreeMap<u8, i8> {
        self.degrees().iter().copied().collect()
    }
}

/// A sounded chord. Degrees are keyed by interval number, so an interval
/// can occur at most once.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SoundedChord {
    root: Natural,
    degrees: BTreeMap<u8, i8>,
    bass: Option<Degree>,
}

impl SoundedChord {
    pub fn new(
        root: Natural,
        degrees: impl IntoIterator<Item = Degree>,
        bass: Option<Degree>,
    ) -> Result<Self, HarteError> {
        let mut map = BTreeMap::new();
        for d in degrees {
            let d = d.validate()?;
            if map.insert(d.interval, d.alteration).is_some() {
                return Err(HarteError::Semantic(format!(
                    "duplicate interval number {}",
                    d.interval
                )));
            }
        }
        if map.is_empty() {
            return Err(HarteError::Semantic("chord has no degrees".into()));
        }
        let bass = bass.map(|b| Degree { omit: false, ..b }.validate()).transpose()?;
        Ok(SoundedChord {
            root,
            degrees: map,
            bass,
        })
    }

    pub fn from_shorthand(root: Natural, shorthand: Shorthand) -> Self {
        SoundedChord {
            root,
            degrees: shorthand.degree_map(),
            bass: None,
        }
    }

    pub fn root(&self) -> Natural {
        self.root
    }

    pub fn bass(&self) -> Option<Degree> {
        self.bass
    }

    pub fn degrees(&self) -> impl Iterator<Item = Degree> + '_ {
        self.degrees.iter().map(|(&i, &a)| Degree::new(i, a))
    }

    pub fn degree(&self, interval: u8) -> Option<Degree> {
        self.degrees.get(&interval).map(|&a| Degree::new(interval, a))
    }

    pub fn root_pc(&self) -> PitchClass {
        self.root.pitch_class()
    }

    pub fn bass_pc(&self) -> Option<PitchClass> {
        self.bass
            .map(|b| self.root_pc().transpose(semitone_of(b) as i32))
    }

    /// Pitch classes of the degree set alone (no bass).
    pub fn degree_pcs(&self) -> PcSet {
        let root = self.root_pc();
        self.degrees()
            .map(|d| root.transpose(semitone_of(d) as i32))
            .collect()
    }

    /// All sounding pitch classes, including a bass outside the degree set.
    pub fn pitch_classes(&self) -> PcSet {
        let mut set = self.degree_pcs();
        if let Some(b) = self.bass_pc() {
            set.insert(b);
        }
        set
    }

    /// Longest table shorthand whose expansion is contained in the degree set.
    pub fn shorthand(&self) -> Option<Shorthand> {
        let mut best: Option<Shorthand> = None;
        for s in Shorthand::ALL {
            let fits = s
                .degrees()
                .iter()
                .all(|(i, a)| self.degrees.get(i) == Some(a));
            if fits && best.is_none_or(|b| s.degrees().len() > b.degrees().len()) {
                best = Some(s);
            }
        }
        best
    }

    pub fn transpose(&self, semitones: i32) -> SoundedChord {
        SoundedChord {
            root: self.root.transpose(semitones),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Chord {
    NoChord,
    Sounded(SoundedChord),
}

impl Chord {
    pub fn is_sounded(&self) -> bool {
        matches!(self, Chord::Sounded(_))
    }

    pub fn as_sounded(&self) -> Option<&SoundedChord> {
        match self {
            Chord::Sounded(c) => Some(c),
            Chord::NoChord => None,
        }
    }

    pub fn transpose(&self, semitones: i32) -> Chord {
        match self {
            Chord::NoChord => Chord::NoChord,
            Chord::Sounded(c) => Chord::Sounded(c.transpose(semitones)),
        }
    }
}

impl fmt::Display for Chord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_chord(self))
    }
}

impl FromStr for Chord {
    type Err = HarteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_chord(s)
    }
}

impl Serialize for Chord {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&render_chord(self))
    }
}

impl<'de> Deserialize<'de> for Chord {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_chord(&s).map_err(serde::de::Error::custom)
    }
}

/// Flat description of a chord for machine-readable output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChordInfo {
    pub harte: String,
    /// `"Chord"` or `"NoChord"`.
    pub kind: &'static str,
    pub root: Option<String>,
    pub shorthand: Option<&'static str>,
    pub degrees: Vec<String>,
    pub bass: Option<String>,
    pub pitch_classes: Vec<u8>,
}

impl From<&Chord> for ChordInfo {
    fn from(chord: &Chord) -> Self {
        match chord {
            Chord::NoChord => ChordInfo {
                harte: "N".into(),
                kind: "NoChord",
                root: None,
                shorthand: None,
                degrees: Vec::new(),
                bass: None,
                pitch_classes: Vec::new(),
            },
            Chord::Sounded(c) => ChordInfo {
                harte: render_chord(chord),
                kind: "Chord",
                root: Some(c.root().to_string()),
                shorthand: c.shorthand().map(Shorthand::name),
                degrees: c.degrees().map(|d| d.to_string()).collect(),
                bass: c.bass().map(|d| d.to_string()),
                pitch_classes: c.pitch_classes().iter().map(PitchClass::value).collect(),
            },
        }
    }
}

/// Sounding pitch classes of a chord, bass included.
pub fn pitch_class_set(chord: &Chord) -> Result<PcSet, crate::Error> {
    chord
        .as_sounded()
        .map(SoundedChord::pitch_classes)
        .ok_or(crate::Error::NoChord)
}

pub fn parse_chord(text: &str) -> Result<Chord, HarteError> {
    let mut p = Parser::new(text);
    let chord = p.chord()?;
    p.expect_end()?;
    Ok(chord)
}

/// Canonical Harte string: `root:shorthand(extras)/bass`, with the longest
/// fitting shorthand and the remaining degrees sorted by interval number.
pub fn render_chord(chord: &Chord) -> String {
    let c = match chord {
        Chord::NoChord => return "N".to_string(),
        Chord::Sounded(c) => c,
    };
    let mut out = format!("{}:", c.root);
    let shorthand = c.shorthand();
    let base = match shorthand {
        Some(s) => s.degree_map(),
        None => BTreeMap::from([(1, 0)]),
    };
    let mut extras: Vec<String> = base
        .iter()
        .filter(|(i, a)| c.degrees.get(i) != Some(a))
        .map(|(i, _)| format!("*{i}"))
        .collect();
    extras.extend(
        c.degrees()
            .filter(|d| base.get(&d.interval) != Some(&d.alteration))
            .map(|d| d.to_string()),
    );
    if let Some(s) = shorthand {
        out.push_str(s.name());
    } else if extras.is_empty() {
        // root alone
        extras.push("1".into());
    }
    if !extras.is_empty() {
        out.push('(');
        out.push_str(&extras.join(","));
        out.push(')');
    }
    if let Some(b) = c.bass {
        out.push('/');
        out.push_str(&b.to_string());
    }
    out
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Self {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn err<T>(&self, expected: &'static str) -> Result<T, HarteError> {
        Err(HarteError::Syntax {
            position: self.pos,
            expected,
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_end(&self) -> Result<(), HarteError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => self.err("end of input"),
        }
    }

    fn modifiers(&mut self) -> Result<i8, HarteError> {
        let start = self.pos;
        let mut flats = 0i32;
        let mut sharps = 0i32;
        while let Some(c) = self.peek() {
            match c {
                'b' => flats += 1,
                '#' => sharps += 1,
                _ => break,
            }
            if flats > 0 && sharps > 0 {
                return self.err("consistent accidentals (all 'b' or all '#')");
            }
            self.pos += 1;
        }
        let n = sharps - flats;
        i8::try_from(n).map_err(|_| HarteError::Syntax {
            position: start,
            expected: "at most 127 accidentals",
        })
    }

    fn note(&mut self) -> Result<Natural, HarteError> {
        let letter = match self.peek().and_then(Letter::from_char) {
            Some(l) => l,
            None => return self.err("note name A-G"),
        };
        self.pos += 1;
        let accidentals = self.modifiers()?;
        Ok(Natural::new(letter, accidentals))
    }

    fn degree(&mut self, allow_omit: bool) -> Result<Degree, HarteError> {
        let omit = allow_omit && self.eat('*');
        let alteration = self.modifiers()?;
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("degree number");
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        let interval: u32 = digits.parse().unwrap_or(u32::MAX);
        let interval = u8::try_from(interval).unwrap_or(u8::MAX);
        Degree {
            interval,
            alteration,
            omit,
        }
        .validate()
    }

    fn chord(&mut self) -> Result<Chord, HarteError> {
        if self.chars.first() == Some(&'N') {
            self.pos = 1;
            return Ok(Chord::NoChord);
        }
        let root = self.note()?;
        let (base, list) = if self.eat(':') {
            self.body()?
        } else {
            (Some(Shorthand::Maj), Vec::new())
        };
        let bass = if self.eat('/') {
            Some(self.degree(false)?)
        } else {
            None
        };
        build_chord(root, base, &list, bass).map(Chord::Sounded)
    }

    fn body(&mut self) -> Result<(Option<Shorthand>, Vec<Degree>), HarteError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        let shorthand = if start == self.pos {
            None
        } else {
            let name: String = self.chars[start..self.pos].iter().collect();
            match Shorthand::from_name(&name) {
                Some(s) => Some(s),
                None => {
                    return Err(HarteError::Syntax {
                        position: start,
                        expected: "known shorthand",
                    })
                }
            }
        };
        let mut list = Vec::new();
        if self.eat('(') {
            loop {
                list.push(self.degree(true)?);
                if self.eat(',') {
                    continue;
                }
                if self.eat(')') {
                    break;
                }
                return self.err("',' or ')'");
            }
        } else if shorthand.is_none() {
            return self.err("shorthand or '('");
        }
        Ok((shorthand, list))
    }
}

fn build_chord(
    root: Natural,
    shorthand: Option<Shorthand>,
    list: &[Degree],
    bass: Option<Degree>,
) -> Result<SoundedChord, HarteError> {
    let mut degrees = match shorthand {
        Some(s) => s.degree_map(),
        None => BTreeMap::from([(1, 0)]),
    };
    for d in list.iter().filter(|d| d.omit) {
        if degrees.remove(&d.interval).is_none() {
            return Err(HarteError::Semantic(format!(
                "cannot omit degree {}: not present",
                d.interval
            )));
        }
    }
    let mut added = std::collections::BTreeSet::new();
    for d in list.iter().filter(|d| !d.omit) {
        // "C:(1,5)" spells out the implicit root of a bare degree list.
        let restates_root = shorthand.is_none() && d.interval == 1 && d.alteration == 0 && degrees.get(&1) == Some(&0);
        if restates_root && added.insert(1) {
            continue;
        }
        if degrees.contains_key(&d.interval) || !added.insert(d.interval) {
            return Err(HarteError::Semantic(format!(
                "duplicate interval number {}",
                d.interval
            )));
        }
        degrees.insert(d.interval, d.alteration);
    }
    if degrees.is_empty() {
        return Err(HarteError::Semantic("chord has no degrees".into()));
    }
    Ok(SoundedChord {
        root,
        degrees,
        bass,
    })
}
