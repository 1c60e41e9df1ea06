//! Shared fixtures and independent reference implementations.
#![allow(dead_code, clippy::needless_range_loop)]

use harmory::harte::{parse_chord, Chord, Shorthand, SoundedChord};
use harmory::timeline::Timeline;
use harmory::tps::{Key, Mode};
use rand::seq::SliceRandom;
use rand::Rng;

pub const LETTERS: [&str; 7] = ["C", "D", "E", "F", "G", "A", "B"];

/// Random valid Harte string: root, optional shorthand, degree list with
/// omissions from the base and fresh additions, optional bass.
pub fn random_harte<R: Rng>(rng: &mut R) -> String {
    if rng.gen_ratio(1, 40) {
        return "N".into();
    }
    let mut s = LETTERS.choose(rng).unwrap().to_string();
    let acc = rng.gen_range(-2i32..=2);
    for _ in 0..acc.unsigned_abs() {
        s.push(if acc < 0 { 'b' } else { '#' });
    }
    let shorthand = if rng.gen_bool(0.7) {
        Some(*Shorthand::ALL.choose(rng).unwrap())
    } else {
        None
    };
    let base: Vec<(u8, i8)> = shorthand.map_or(vec![(1, 0)], |sh| sh.degrees().to_vec());
    let mut list = Vec::new();
    let mut kept: Vec<u8> = base.iter().map(|d| d.0).collect();
    for &(i, _) in &base {
        if kept.len() > 1 && rng.gen_ratio(1, 5) {
            kept.retain(|&k| k != i);
            list.push(format!("*{}", degree_text(i, base.iter().find(|d| d.0 == i).unwrap().1)));
        }
    }
    for _ in 0..rng.gen_range(0..3) {
        let i = rng.gen_range(1u8..=13);
        if kept.contains(&i) {
            continue;
        }
        kept.push(i);
        list.push(degree_text(i, rng.gen_range(-1i8..=1)));
    }
    if shorthand.is_none() && list.is_empty() {
        list.push("3".into());
    }
    if let Some(sh) = shorthand {
        s.push(':');
        s.push_str(sh.name());
        if !list.is_empty() {
            s.push_str(&format!("({})", list.join(",")));
        }
    } else {
        s.push_str(&format!(":({})", list.join(",")));
    }
    if rng.gen_ratio(1, 4) {
        s.push('/');
        s.push_str(&degree_text(rng.gen_range(1u8..=13), rng.gen_range(-1i8..=1)));
    }
    s
}

fn degree_text(interval: u8, alteration: i8) -> String {
    let mark = if alteration < 0 { "b" } else { "#" };
    format!("{}{}", mark.repeat(alteration.unsigned_abs() as usize), interval)
}

fn mask_of(pcs: impl IntoIterator<Item = u8>) -> u16 {
    pcs.into_iter().fold(0, |m, p| m | 1 << (p % 12))
}

/// Basic space levels a..d as bit masks, built directly from the level
/// definitions.
pub fn oracle_levels(chord: &SoundedChord, key: Key) -> [u16; 4] {
    let root = chord.root_pc().value();
    let fifth = match chord.degree(5) {
        Some(d) if d.alteration != 0 => (root as i32 + 7 + d.alteration as i32).rem_euclid(12) as u8,
        _ => (root + 7) % 12,
    };
    let scale: [u8; 7] = match key.mode {
        Mode::Major => [0, 2, 4, 5, 7, 9, 11],
        Mode::Minor => [0, 2, 3, 5, 7, 8, 11],
    };
    let a = mask_of([root]);
    let b = a | mask_of([fifth]);
    let c = b | mask_of(chord.pitch_classes().iter().map(|p| p.value()));
    let d = c | mask_of(scale.iter().map(|s| (key.tonic.value() + s) % 12));
    [a, b, c, d]
}

/// Fewest fifth steps from `x` to `y`, by walking both directions.
pub fn oracle_fifths(x: u8, y: u8) -> u32 {
    (0..=6)
        .find(|&k| (x as u32 + 7 * k) % 12 == y as u32 || (y as u32 + 7 * k) % 12 == x as u32)
        .unwrap()
}

pub fn oracle_directed(x: &SoundedChord, kx: Key, y: &SoundedChord, ky: Key) -> u32 {
    let lx = oracle_levels(x, kx);
    let ly = oracle_levels(y, ky);
    let k: u32 = (0..4).map(|l| (ly[l] & !lx[l]).count_ones()).sum();
    oracle_fifths(kx.tonic.value(), ky.tonic.value()) + oracle_fifths(x.root_pc().value(), y.root_pc().value()) + k
}

/// Symmetrised distance in half units.
pub fn oracle_distance_halves(x: &SoundedChord, kx: Key, y: &SoundedChord, ky: Key) -> u32 {
    oracle_directed(x, kx, y, ky) + oracle_directed(y, ky, x, kx)
}

/// Minimum (cost, length) over every monotone path through `cost`, by
/// exhaustive recursion.
pub fn brute_force_dtw(cost: &[Vec<u32>]) -> (u32, usize) {
    fn walk(cost: &[Vec<u32>], i: usize, j: usize, acc: u32, len: usize, best: &mut (u32, usize)) {
        let acc = acc + cost[i][j];
        let len = len + 1;
        let (n, m) = (cost.len(), cost[0].len());
        if i == n - 1 && j == m - 1 {
            *best = (*best).min((acc, len));
            return;
        }
        if i + 1 < n {
            walk(cost, i + 1, j, acc, len, best);
        }
        if j + 1 < m {
            walk(cost, i, j + 1, acc, len, best);
        }
        if i + 1 < n && j + 1 < m {
            walk(cost, i + 1, j + 1, acc, len, best);
        }
    }
    let mut best = (u32::MAX, usize::MAX);
    walk(cost, 0, 0, 0, 0, &mut best);
    best
}

pub fn sounded(text: &str) -> SoundedChord {
    match parse_chord(text).unwrap() {
        Chord::Sounded(c) => c,
        Chord::NoChord => panic!("{text} is N"),
    }
}

/// One event per chord, `beats` long each.
pub fn progression(id: &str, chords: &[&str], beats: i64, key: Option<Key>) -> Timeline {
    let prog: Vec<(&str, i64)> = chords.iter().map(|&c| (c, beats)).collect();
    Timeline::from_progression(id, &prog, key).unwrap()
}

/// Twenty chords in C major covering every shorthand family, inversions and
/// chromatic roots.
pub const TWENTY: [&str; 20] = [
    "C:maj", "G:maj", "A:min", "F:maj", "D:min7", "G:7", "C:maj7", "E:min",
    "B:hdim7", "E:7", "A:min(9)", "D:9", "G:sus4", "G:7/3", "Bb:maj", "F:min6",
    "C:aug", "C#:dim7", "D:sus2", "C:maj/5",
];

/// Six distinct progressions used as clique seeds.
pub const SEEDS: [&[&str]; 6] = [
    &["C:maj", "G:maj", "A:min", "F:maj", "C:maj", "G:maj", "F:maj", "C:maj"],
    &["C:maj", "C:maj", "F:maj", "F:maj", "G:7", "G:7", "C:maj", "C:maj"],
    &["A:min", "D:min", "E:7", "A:min", "F:maj", "D:min", "E:7", "A:min"],
    &["D:min7", "G:7", "C:maj7", "A:min7", "D:min7", "G:7", "C:maj7", "C:maj7"],
    &["C:maj", "E:min", "F:maj", "D:min", "B:dim", "E:7", "A:min", "A:min"],
    &["C:maj", "Bb:maj", "F:maj", "C:maj", "Eb:maj", "Bb:maj", "F:maj", "C:maj"],
];

/// Symmetric matrix with unit diagonal and uniform off-diagonal entries.
pub fn random_similarity<R: Rng>(n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut sim = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = rng.gen();
            sim[i][j] = v;
            sim[j][i] = v;
        }
    }
    sim
}
