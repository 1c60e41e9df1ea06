//! Local agreement of recurrent patterns.
//!
//! Each piece is reduced to its recurrent n-grams over a
//! transposition-invariant event encoding. A pattern of one piece agrees
//! with a pattern of the other when the DTW normalised cost between their
//! chord sequences is at most `tau`. The score is the harmonic mean of the
//! fractions of each piece's events covered by agreeing patterns.
//!
//! This definition is a reconstruction: it keeps the measure local,
//! recurrence-based and shared between the two pieces, and is exactly
//! testable.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use serde::Serialize;

use super::dtw::align_points;
use crate::timeline::Timeline;
use crate::tps::{self, fifths_distance, TpsPoint, TpsValue};
use crate::Result;

/// A window key element: key-relative TPS value and fifths step to the next
/// chord of the window (0 for the window's last chord).
pub type PatternSymbol = (TpsValue, u8);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternOccurrence {
    pub key: Vec<PatternSymbol>,
    pub positions: Vec<usize>,
    pub length: usize,
}

/// Per-piece material needed for LHARP, computed once.
#[derive(Debug, Clone)]
pub struct LharpProfile {
    pub points: Vec<TpsPoint>,
    pub patterns: Vec<PatternOccurrence>,
}

impl LharpProfile {
    pub fn new(tl: &Timeline, n_min: usize, n_max: usize) -> Self {
        LharpProfile {
            points: tl.key_relative_points(),
            patterns: extract_recurrent_patterns(tl, n_min, n_max),
        }
    }

    fn pattern_points(&self, p: &PatternOccurrence) -> &[TpsPoint] {
        let start = p.positions[0];
        &self.points[start..start + p.length]
    }
}

/// Recurrent windows of length `n_min..=n_max` over the sounded events.
/// Patterns come out ordered by length, then by first position.
pub fn extract_recurrent_patterns(tl: &Timeline, n_min: usize, n_max: usize) -> Vec<PatternOccurrence> {
    let events: Vec<_> = tl.sounded().collect();
    let values: Vec<TpsValue> = events
        .iter()
        .map(|e| tps::sounded_key_relative_value(e.chord, e.key))
        .collect();
    let roots: Vec<_> = events.iter().map(|e| e.chord.root_pc()).collect();
    let n = events.len();

    let mut out = Vec::new();
    for len in n_min.max(1)..=n_max {
        if len > n {
            break;
        }
        let mut windows: BTreeMap<Vec<(i64, u8)>, Vec<usize>> = BTreeMap::new();
        for start in 0..=(n - len) {
            let key: Vec<(i64, u8)> = (start..start + len)
                .map(|i| {
                    let step = if i + 1 < start + len {
                        fifths_distance(roots[i], roots[i + 1])
                    } else {
                        0
                    };
                    (values[i].halves(), step)
                })
                .collect();
            windows.entry(key).or_default().push(start);
        }
        let mut found: Vec<PatternOccurrence> = windows
            .into_iter()
            .filter(|(_, pos)| pos.len() >= 2)
            .map(|(key, positions)| PatternOccurrence {
                key: key.into_iter().map(|(h, s)| (TpsValue(h as f64 / 2.0), s)).collect(),
                positions,
                length: len,
            })
            .collect();
        found.sort_by_key(|p| p.positions[0]);
        out.extend(found);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalRegion {
    /// Half-open sounded-event interval in the first piece.
    pub a: (usize, usize),
    /// Half-open sounded-event interval in the second piece.
    pub b: (usize, usize),
    pub step_costs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LharpResult {
    pub coverage_a: Ratio<i64>,
    pub coverage_b: Ratio<i64>,
    pub score: Ratio<i64>,
    pub regions: Vec<LocalRegion>,
}

fn to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl LharpResult {
    pub fn score_f64(&self) -> f64 {
        to_f64(self.score)
    }

    pub fn coverage_f64(&self) -> (f64, f64) {
        (to_f64(self.coverage_a), to_f64(self.coverage_b))
    }
}

fn covered_runs(mask: &[bool]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut i = 0;
    while i < mask.len() {
        if mask[i] {
            let s = i;
            while i < mask.len() && mask[i] {
                i += 1;
            }
            runs.push((s, i));
        } else {
            i += 1;
        }
    }
    runs
}

fn run_of(runs: &[(usize, usize)], pos: usize) -> usize {
    runs.partition_point(|r| r.1 <= pos)
}

pub fn lharp_profiles(a: &LharpProfile, b: &LharpProfile, tau: f64) -> Result<LharpResult> {
    let mut agree_a = vec![false; a.patterns.len()];
    let mut agree_b = vec![false; b.patterns.len()];
    let mut pairs = Vec::new();
    for (pi, p) in a.patterns.iter().enumerate() {
        for (qi, q) in b.patterns.iter().enumerate() {
            let al = align_points(a.pattern_points(p), b.pattern_points(q), None)?;
            if al.normalized_cost <= tau {
                agree_a[pi] = true;
                agree_b[qi] = true;
                pairs.push((pi, qi));
            }
        }
    }

    let mask = |profile: &LharpProfile, agree: &[bool]| {
        let mut m = vec![false; profile.points.len()];
        for (p, _) in profile.patterns.iter().zip(agree).filter(|(_, &ok)| ok) {
            for &s in &p.positions {
                m[s..s + p.length].iter_mut().for_each(|x| *x = true);
            }
        }
        m
    };
    let mask_a = mask(a, &agree_a);
    let mask_b = mask(b, &agree_b);
    let coverage = |m: &[bool]| Ratio::new(m.iter().filter(|&&x| x).count() as i64, m.len().max(1) as i64);
    let ca = coverage(&mask_a);
    let cb = coverage(&mask_b);
    let zero = Ratio::from_integer(0);
    let score = if ca + cb == zero {
        zero
    } else {
        Ratio::from_integer(2) * ca * cb / (ca + cb)
    };

    let runs_a = covered_runs(&mask_a);
    let runs_b = covered_runs(&mask_b);
    let mut linked = BTreeSet::new();
    for &(pi, qi) in &pairs {
        for &pa in &a.patterns[pi].positions {
            for &qb in &b.patterns[qi].positions {
                linked.insert((run_of(&runs_a, pa), run_of(&runs_b, qb)));
            }
        }
    }
    let mut regions = Vec::with_capacity(linked.len());
    for (ra, rb) in linked {
        let (sa, ea) = runs_a[ra];
        let (sb, eb) = runs_b[rb];
        let al = align_points(&a.points[sa..ea], &b.points[sb..eb], None)?;
        regions.push(LocalRegion {
            a: (sa, ea),
            b: (sb, eb),
            step_costs: al.step_costs,
        });
    }

    Ok(LharpResult {
        coverage_a: ca,
        coverage_b: cb,
        score,
        regions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tps::Key;

    fn tl(chords: &[&str]) -> Timeline {
        let prog: Vec<(&str, i64)> = chords.iter().map(|c| (*c, 1)).collect();
        Timeline::from_progression("p", &prog, Some(Key::major(0))).unwrap()
    }

    #[test]
    fn window_hash_examples() {
        assert!(extract_recurrent_patterns(&tl(&["C", "D:min", "E:min", "F"]), 2, 3).is_empty());

        let pats = extract_recurrent_patterns(&tl(&["C", "G", "C", "G"]), 2, 2);
        assert_eq!(pats.len(), 1);
        assert_eq!(pats[0].positions, vec![0, 2]);
        assert_eq!(pats[0].key, vec![(TpsValue(0.0), 1), (TpsValue(5.0), 0)]);

        let pats = extract_recurrent_patterns(&tl(&["C", "C", "C", "C"]), 2, 2);
        assert_eq!(pats.len(), 1);
        assert_eq!(pats[0].positions, vec![0, 1, 2]);
    }

    #[test]
    fn worked_example() {
        let a = LharpProfile::new(&tl(&["C", "G", "C", "G"]), 2, 2);
        let b = LharpProfile::new(&tl(&["C", "G", "C", "G", "A:min", "F"]), 2, 2);
        let r = lharp_profiles(&a, &b, 0.0).unwrap();
        assert_eq!(r.coverage_a, Ratio::from_integer(1));
        assert_eq!(r.coverage_b, Ratio::new(2, 3));
        assert_eq!(r.score, Ratio::new(4, 5));
        assert_eq!(r.score_f64(), 0.8);
        assert_eq!(r.regions.len(), 1);
        assert_eq!(r.regions[0].a, (0, 4));
        assert_eq!(r.regions[0].b, (0, 4));
        assert_eq!(r.regions[0].step_costs, vec![0.0; 4]);
    }

    #[test]
    fn no_patterns_scores_zero() {
        let a = LharpProfile::new(&tl(&["C", "G"]), 2, 4);
        let b = LharpProfile::new(&tl(&["F", "D:min"]), 2, 4);
        let r = lharp_profiles(&a, &b, 1.0).unwrap();
        assert_eq!(r.score_f64(), 0.0);
        assert!(r.regions.is_empty());
    }
}
