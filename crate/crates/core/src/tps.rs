//! Tonal Pitch Space: basic spaces, chord-to-chord distance and
//! key-relative values.
//!
//! The distance from chord `x` (in key `kx`) to chord `y` (in key `ky`) is
//! `i + j + k`: fifths between the key tonics, fifths between the chord
//! roots, and the number of (pitch class, level) entries over levels a–d
//! present in `y`'s basic space but absent at the same level in `x`'s.
//! The directed value is symmetrised by the arithmetic mean.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::harte::{Chord, Degree, HarteError, Natural, PcSet, PitchClass, Shorthand, SoundedChord};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Major,
    Minor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key {
    pub tonic: PitchClass,
    pub mode: Mode,
}

const MAJOR_SCALE: [i32; 7] = [0, 2, 4, 5, 7, 9, 11];
const HARMONIC_MINOR_SCALE: [i32; 7] = [0, 2, 3, 5, 7, 8, 11];

impl Key {
    pub fn new(tonic: PitchClass, mode: Mode) -> Self {
        Key { tonic, mode }
    }

    pub fn major(tonic: u8) -> Self {
        Key::new(PitchClass::new(tonic as i32), Mode::Major)
    }

    pub fn minor(tonic: u8) -> Self {
        Key::new(PitchClass::new(tonic as i32), Mode::Minor)
    }

    /// Major scale, or harmonic minor.
    pub fn diatonic_set(self) -> PcSet {
        let scale = match self.mode {
            Mode::Major => &MAJOR_SCALE,
            Mode::Minor => &HARMONIC_MINOR_SCALE,
        };
        scale.iter().map(|&s| self.tonic.transpose(s)).collect()
    }

    pub fn tonic_triad(self) -> SoundedChord {
        let shorthand = match self.mode {
            Mode::Major => Shorthand::Maj,
            Mode::Minor => Shorthand::Min,
        };
        SoundedChord::from_shorthand(Natural::spell(self.tonic), shorthand)
    }

    pub fn transpose(self, semitones: i32) -> Key {
        Key::new(self.tonic.transpose(semitones), self.mode)
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            Mode::Major => "maj",
            Mode::Minor => "min",
        };
        write!(f, "{}:{}", Natural::spell(self.tonic), mode)
    }
}

impl FromStr for Key {
    type Err = HarteError;

    /// `<Natural>:<maj|min>`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (note, mode) = s.split_once(':').ok_or(HarteError::Syntax {
            position: s.len(),
            expected: "':' followed by maj or min",
        })?;
        let tonic: Natural = note.parse()?;
        let mode = match mode {
            "maj" => Mode::Major,
            "min" => Mode::Minor,
            _ => {
                return Err(HarteError::Syntax {
                    position: note.chars().count() + 1,
                    expected: "maj or min",
                })
            }
        };
        Ok(Key::new(tonic.pitch_class(), mode))
    }
}

impl Serialize for Key {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Key {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Non-negative TPS distance. Symmetrised values are multiples of 1/2 and
/// therefore exact in binary floating point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TpsValue(pub f64);

impl TpsValue {
    pub fn value(self) -> f64 {
        self.0
    }

    /// Twice the value as an integer; a hashable identity for half-integer
    /// distances.
    pub fn halves(self) -> i64 {
        (self.0 * 2.0).round() as i64
    }
}

impl Eq for TpsValue {}

impl PartialOrd for TpsValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TpsValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for TpsValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Levels a (root), b (root + fifth), c (chord), d (key), e (chromatic).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasicSpace {
    pub levels: [PcSet; 5],
}

impl BasicSpace {
    pub fn level(&self, index: usize) -> PcSet {
        self.levels[index]
    }

    /// Number of levels containing `pc`.
    pub fn weight(&self, pc: PitchClass) -> usize {
        self.levels.iter().filter(|l| l.contains(pc)).count()
    }

    pub fn transpose(&self, semitones: i32) -> BasicSpace {
        BasicSpace {
            levels: self.levels.map(|l| l.transpose(semitones)),
        }
    }
}

fn sounded_space(chord: &SoundedChord, key: Key) -> BasicSpace {
    let root = chord.root_pc();
    let fifth = match chord.degree(5) {
        Some(d) if d.alteration != 0 => root.transpose(d.semitones() as i32),
        _ => root.transpose(Degree::new(5, 0).semitones() as i32),
    };
    let a = PcSet::EMPTY.with(root);
    let b = a.with(fifth);
    let c = b.union(chord.pitch_classes());
    let d = c.union(key.diatonic_set());
    BasicSpace {
        levels: [a, b, c, d, PcSet::ALL],
    }
}

pub fn basic_space(chord: &Chord, key: Key) -> Result<BasicSpace> {
    let c = chord.as_sounded().ok_or(Error::NoChord)?;
    Ok(sounded_space(c, key))
}

/// Minimal number of perfect-fifth steps between two pitch classes, 0..=6.
pub fn fifths_distance(x: PitchClass, y: PitchClass) -> u8 {
    // 7 is its own inverse mod 12, so k fifths up from x reach y iff
    // k = 7 * (y - x) mod 12.
    let k = (7 * x.interval_to(y) as u32 % 12) as u8;
    k.min(12 - k)
}

/// A chord resolved against its key, ready for repeated distance
/// evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TpsPoint {
    pub root: PitchClass,
    pub tonic: PitchClass,
    pub space: BasicSpace,
}

impl TpsPoint {
    pub fn new(chord: &SoundedChord, key: Key) -> Self {
        TpsPoint {
            root: chord.root_pc(),
            tonic: key.tonic,
            space: sounded_space(chord, key),
        }
    }

    /// The same chord expressed in a frame where the key tonic is C.
    /// Distances between key-relative points do not change when a piece is
    /// transposed.
    pub fn key_relative(chord: &SoundedChord, key: Key) -> Self {
        let shift = -(key.tonic.value() as i32);
        TpsPoint::new(&chord.transpose(shift), key.transpose(shift))
    }

    fn directed(&self, to: &TpsPoint) -> u32 {
        let i = fifths_distance(self.tonic, to.tonic) as u32;
        let j = fifths_distance(self.root, to.root) as u32;
        let k: u32 = (0..4)
            .map(|l| to.space.levels[l].difference(self.space.levels[l]).len() as u32)
            .sum();
        i + j + k
    }

    /// Symmetrised distance.
    pub fn distance(&self, other: &TpsPoint) -> TpsValue {
        TpsValue((self.directed(other) + other.directed(self)) as f64 / 2.0)
    }
}

/// Directed TPS distance δ(x→y).
pub fn directed_distance(x: &Chord, kx: Key, y: &Chord, ky: Key) -> Result<u32> {
    let x = x.as_sounded().ok_or(Error::NoChord)?;
    let y = y.as_sounded().ok_or(Error::NoChord)?;
    Ok(TpsPoint::new(x, kx).directed(&TpsPoint::new(y, ky)))
}

pub fn chord_distance(x: &Chord, kx: Key, y: &Chord, ky: Key) -> Result<TpsValue> {
    let x = x.as_sounded().ok_or(Error::NoChord)?;
    let y = y.as_sounded().ok_or(Error::NoChord)?;
    Ok(TpsPoint::new(x, kx).distance(&TpsPoint::new(y, ky)))
}

/// Distance from the key's tonic triad.
pub fn key_relative_value(chord: &Chord, key: Key) -> Result<TpsValue> {
    let c = chord.as_sounded().ok_or(Error::NoChord)?;
    Ok(sounded_key_relative_value(c, key))
}

pub(crate) fn sounded_key_relative_value(chord: &SoundedChord, key: Key) -> TpsValue {
    TpsPoint::new(&key.tonic_triad(), key).distance(&TpsPoint::new(chord, key))
}
