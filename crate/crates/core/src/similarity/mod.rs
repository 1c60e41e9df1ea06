//! Pairwise harmonic similarity over TPS encodings: DTW, TPSD and LHARP.

mod dtw;
mod lharp;
mod tpsd;

pub use dtw::{align_points, align_seqs, Alignment, PointSeq};
pub use lharp::{
    extract_recurrent_patterns, lharp_profiles, LharpProfile, LharpResult, LocalRegion, PatternOccurrence,
};
pub use tpsd::tpsd_series;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::timeline::{beat_grid, Timeline};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Dtw,
    Tpsd,
    Lharp,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Dtw => "dtw",
            Measure::Tpsd => "tpsd",
            Measure::Lharp => "lharp",
        }
    }
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureParams {
    /// Cost scale `s` in `score = exp(-raw / s)` (DTW and TPSD).
    pub scale: f64,
    /// Optional Sakoe–Chiba band for DTW.
    pub band: Option<usize>,
    /// LHARP agreement threshold on DTW normalised cost.
    pub tau: f64,
    pub n_min: usize,
    pub n_max: usize,
}

impl Default for MeasureParams {
    fn default() -> Self {
        MeasureParams {
            scale: 5.0,
            band: None,
            tau: 1.0,
            n_min: 2,
            n_max: 4,
        }
    }
}

impl MeasureParams {
    pub fn validate(&self) -> Result<()> {
        if self.scale.is_nan() || self.scale <= 0.0 {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {}", self.scale)));
        }
        if self.tau.is_nan() || self.tau < 0.0 {
            return Err(Error::InvalidParameter(format!("tau must be non-negative, got {}", self.tau)));
        }
        if self.n_min < 2 || self.n_max < self.n_min {
            return Err(Error::InvalidParameter(format!(
                "pattern lengths need 2 <= n_min <= n_max, got {}..{}",
                self.n_min, self.n_max
            )));
        }
        Ok(())
    }

    fn report_params(&self, measure: Measure) -> Map<String, Value> {
        let mut m = Map::new();
        match measure {
            Measure::Dtw => {
                m.insert("scale".into(), json!(self.scale));
                if let Some(b) = self.band {
                    m.insert("band".into(), json!(b));
                }
            }
            Measure::Tpsd => {
                m.insert("scale".into(), json!(self.scale));
            }
            Measure::Lharp => {
                m.insert("tau".into(), json!(self.tau));
                m.insert("n_min".into(), json!(self.n_min));
                m.insert("n_max".into(), json!(self.n_max));
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityReport {
    pub measure: Measure,
    pub score: f64,
    pub raw: f64,
    pub params: Map<String, Value>,
    pub local_regions: Vec<LocalRegion>,
    /// LHARP only: covered fraction of each piece.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage: Option<(f64, f64)>,
}

impl SimilarityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

fn score_from_cost(raw: f64, scale: f64) -> f64 {
    (-raw / scale).exp()
}

/// DTW between the key-relative TPS sequences of two pieces. Cell cost is
/// the symmetrised TPS distance with each chord expressed in its own key.
pub fn dtw_align(a: &Timeline, b: &Timeline) -> Result<Alignment> {
    a.require_sounded()?;
    b.require_sounded()?;
    align_points(&a.key_relative_points(), &b.key_relative_points(), None)
}

pub fn dtw_similarity(a: &Timeline, b: &Timeline) -> Result<SimilarityReport> {
    compare(a, b, Measure::Dtw, &MeasureParams::default())
}

pub fn tpsd(a: &Timeline, b: &Timeline) -> Result<SimilarityReport> {
    compare(a, b, Measure::Tpsd, &MeasureParams::default())
}

pub fn lharp(a: &Timeline, b: &Timeline, tau: f64, n_min: usize, n_max: usize) -> Result<SimilarityReport> {
    let params = MeasureParams {
        tau,
        n_min,
        n_max,
        ..MeasureParams::default()
    };
    compare(a, b, Measure::Lharp, &params)
}

/// Per-piece encodings for one measure, so corpus-level work encodes each
/// piece once.
#[derive(Debug, Clone)]
pub enum Prepared {
    Dtw(PointSeq),
    Tpsd(Vec<f64>),
    Lharp(LharpProfile),
}

pub fn prepare(tl: &Timeline, measure: Measure, params: &MeasureParams) -> Result<Prepared> {
    tl.require_sounded()?;
    Ok(match measure {
        Measure::Dtw => Prepared::Dtw(PointSeq::new(&tl.key_relative_points())),
        Measure::Tpsd => Prepared::Tpsd(beat_grid(tl).into_iter().map(|v| v.0).collect()),
        Measure::Lharp => Prepared::Lharp(LharpProfile::new(tl, params.n_min, params.n_max)),
    })
}

/// Compares two prepared pieces. Also returns the number of elementary
/// comparisons (DTW cells, TPSD positionwise differences, LHARP pattern
/// pairs).
pub fn compare_prepared(a: &Prepared, b: &Prepared, params: &MeasureParams) -> Result<(SimilarityReport, u64)> {
    let (measure, score, raw, local_regions, coverage, count) = match (a, b) {
        (Prepared::Dtw(pa), Prepared::Dtw(pb)) => {
            let al = align_seqs(pa, pb, params.band)?;
            let score = score_from_cost(al.normalized_cost, params.scale);
            (Measure::Dtw, score, al.normalized_cost, Vec::new(), None, al.cells)
        }
        (Prepared::Tpsd(sa), Prepared::Tpsd(sb)) => {
            let (raw, count) = tpsd_series(sa, sb);
            (Measure::Tpsd, score_from_cost(raw, params.scale), raw, Vec::new(), None, count)
        }
        (Prepared::Lharp(la), Prepared::Lharp(lb)) => {
            let r = lharp_profiles(la, lb, params.tau)?;
            let s = r.score_f64();
            let count = (la.patterns.len() * lb.patterns.len()) as u64;
            (Measure::Lharp, s, s, r.regions.clone(), Some(r.coverage_f64()), count)
        }
        _ => return Err(Error::InvalidParameter("pieces prepared for different measures".into())),
    };
    Ok((
        SimilarityReport {
            measure,
            score,
            raw,
            params: params.report_params(measure),
            local_regions,
            coverage,
        },
        count,
    ))
}

pub fn compare(a: &Timeline, b: &Timeline, measure: Measure, params: &MeasureParams) -> Result<SimilarityReport> {
    params.validate()?;
    let pa = prepare(a, measure, params)?;
    let pb = prepare(b, measure, params)?;
    compare_prepared(&pa, &pb, params).map(|r| r.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityMatrix {
    pub ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Header row and first column carry the piece ids.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id");
        for id in &self.ids {
            write!(out, ",{}", csv_field(id)).unwrap();
        }
        out.push('\n');
        for (id, row) in self.ids.iter().zip(&self.values) {
            out.push_str(&csv_field(id));
            for v in row {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// All upper-triangle pairs of an `n`-element corpus, row-major.
pub(crate) fn upper_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
}

pub(crate) fn prepare_corpus(corpus: &[Timeline], measure: Measure, params: &MeasureParams) -> Result<Vec<Prepared>> {
    corpus
        .par_iter()
        .map(|tl| {
            prepare(tl, measure, params).map_err(|e| Error::Pair {
                a: tl.id.clone(),
                b: tl.id.clone(),
                source: Box::new(e),
            })
        })
        .collect()
}

/// Symmetric score matrix with unit diagonal. Pairs are evaluated in
/// parallel; each entry depends only on its pair, so the result is the same
/// as a sequential run.
pub fn corpus_similarity_matrix(
    corpus: &[Timeline],
    measure: Measure,
    params: &MeasureParams,
) -> Result<SimilarityMatrix> {
    if corpus.len() < 2 {
        return Err(Error::InvalidParameter("similarity matrix needs at least 2 pieces".into()));
    }
    params.validate()?;
    let prepared = prepare_corpus(corpus, measure, params)?;
    let n = corpus.len();
    let pairs = upper_pairs(n);
    let scores: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            compare_prepared(&prepared[i], &prepared[j], params)
                .map(|r| r.0.score)
                .map_err(|e| Error::Pair {
                    a: corpus[i].id.clone(),
                    b: corpus[j].id.clone(),
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;
    let mut values = vec![vec![1.0; n]; n];
    for (&(i, j), s) in pairs.iter().zip(scores) {
        values[i][j] = s;
        values[j][i] = s;
    }
    Ok(SimilarityMatrix {
        ids: corpus.iter().map(|t| t.id.clone()).collect(),
        values,
    })
}
