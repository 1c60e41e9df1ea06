//! Cover-song ranking metrics and measure benchmarking.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::harte::{Chord, PitchClass, Shorthand, SoundedChord};
use crate::similarity::{
    compare_prepared, corpus_similarity_matrix, prepare, upper_pairs, Measure, MeasureParams, SimilarityMatrix,
};
use crate::timeline::{Beats, ChordEvent, Timeline};
use crate::tps::{Key, Mode};
use crate::{Error, Result};

/// Piece id to clique (cover group) id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CliqueSet {
    map: BTreeMap<String, String>,
}

impl CliqueSet {
    pub fn from_pairs<I, A, B>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (p, c) in pairs {
            let p = p.into();
            if map.insert(p.clone(), c.into()).is_some() {
                return Err(Error::Clique(format!("piece '{p}' is listed twice")));
            }
        }
        Ok(CliqueSet { map })
    }

    /// Reads `piece_id,clique_id` CSV with that exact header.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = rdr.headers().map_err(csv_error)?;
        if header.len() != 2 || &header[0] != "piece_id" || &header[1] != "clique_id" {
            return Err(Error::Clique(format!(
                "expected header 'piece_id,clique_id', got '{}'",
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut pairs = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_error)?;
            if rec.len() != 2 || rec[0].is_empty() || rec[1].is_empty() {
                let line = rec.position().map_or(0, |p| p.line());
                return Err(Error::Clique(format!("line {line}: expected two non-empty fields")));
            }
            pairs.push((rec[0].to_string(), rec[1].to_string()));
        }
        Self::from_pairs(pairs)
    }

    pub fn clique(&self, piece: &str) -> Option<&str> {
        self.map.get(piece).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Clique(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryMetrics {
    pub query: String,
    pub clique: String,
    pub relevant: usize,
    pub average_precision: f64,
    pub first_relevant_rank: usize,
    /// Candidate ids, best first.
    pub ranking: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingMetrics {
    pub mean_average_precision: f64,
    pub precision_at_1: f64,
    pub mean_rank_first_relevant: f64,
    pub queries: Vec<QueryMetrics>,
}

impl RankingMetrics {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialise")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:<24} {:>8} {:>10}", "query", "AP", "first_rel").unwrap();
        for q in &self.queries {
            writeln!(out, "{:<24} {:>8.4} {:>10}", q.query, q.average_precision, q.first_relevant_rank).unwrap();
        }
        writeln!(out, "MAP  {:.4}", self.mean_average_precision).unwrap();
        writeln!(out, "P@1  {:.4}", self.precision_at_1).unwrap();
        writeln!(out, "MR1  {:.4}", self.mean_rank_first_relevant).unwrap();
        out
    }
}

/// Ranking metrics from a precomputed score matrix. Every piece with at
/// least one other clique member is a query; candidates are all other
/// pieces ranked by score, ties by id.
pub fn rank_metrics(matrix: &SimilarityMatrix, cliques: &CliqueSet) -> Result<RankingMetrics> {
    let ids = &matrix.ids;
    let mut labels = Vec::with_capacity(ids.len());
    for id in ids {
        labels.push(
            cliques
                .clique(id)
                .ok_or_else(|| Error::Clique(format!("piece '{id}' has no clique")))?,
        );
    }
    let mut sizes: BTreeMap<&str, usize> = BTreeMap::new();
    for l in &labels {
        *sizes.entry(l).or_insert(0) += 1;
    }

    let queries: Vec<QueryMetrics> = (0..ids.len())
        .into_par_iter()
        .filter(|&q| sizes[labels[q]] >= 2)
        .map(|q| {
            let mut cands: Vec<usize> = (0..ids.len()).filter(|&c| c != q).collect();
            cands.sort_by(|&x, &y| {
                matrix
                    .get(q, y)
                    .total_cmp(&matrix.get(q, x))
                    .then_with(|| ids[x].cmp(&ids[y]))
            });
            let mut hits = 0usize;
            let mut precision_sum = 0.0;
            let mut first = 0;
            for (rank, &c) in cands.iter().enumerate() {
                if labels[c] == labels[q] {
                    hits += 1;
                    precision_sum += hits as f64 / (rank + 1) as f64;
                    if first == 0 {
                        first = rank + 1;
                    }
                }
            }
            QueryMetrics {
                query: ids[q].clone(),
                clique: labels[q].to_string(),
                relevant: hits,
                average_precision: precision_sum / hits as f64,
                first_relevant_rank: first,
                ranking: cands.iter().map(|&c| ids[c].clone()).collect(),
            }
        })
        .collect();
    if queries.is_empty() {
        return Err(Error::Clique("no clique has two or more pieces in the corpus".into()));
    }
    let n = queries.len() as f64;
    Ok(RankingMetrics {
        mean_average_precision: queries.iter().map(|q| q.average_precision).sum::<f64>() / n,
        precision_at_1: queries.iter().filter(|q| q.first_relevant_rank == 1).count() as f64 / n,
        mean_rank_first_relevant: queries.iter().map(|q| q.first_relevant_rank as f64).sum::<f64>() / n,
        queries,
    })
}

pub fn evaluate_covers(
    corpus: &[Timeline],
    cliques: &CliqueSet,
    measure: Measure,
    params: &MeasureParams,
) -> Result<RankingMetrics> {
    for tl in corpus {
        if cliques.clique(&tl.id).is_none() {
            return Err(Error::Clique(format!("piece '{}' has no clique", tl.id)));
        }
    }
    let matrix = corpus_similarity_matrix(corpus, measure, params)?;
    rank_metrics(&matrix, cliques)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCount {
    pub a: String,
    pub b: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureTiming {
    pub measure: Measure,
    /// Full pairwise matrix, including per-piece encoding, in seconds.
    pub matrix_seconds: Vec<f64>,
    pub median_matrix_seconds: f64,
    pub min_matrix_seconds: f64,
    pub max_matrix_seconds: f64,
    pub median_pair_seconds: f64,
    pub total_count: u64,
    pub counts: Vec<PairCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub pieces: usize,
    pub pairs: usize,
    pub repetitions: usize,
    pub measures: Vec<MeasureTiming>,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{} pieces, {} pairs, {} repetitions",
            self.pieces, self.pairs, self.repetitions
        )
        .unwrap();
        writeln!(
            out,
            "{:<6} {:>14} {:>14} {:>14} {:>14} {:>12}",
            "measure", "median_s", "min_s", "max_s", "per_pair_s", "count"
        )
        .unwrap();
        for m in &self.measures {
            writeln!(
                out,
                "{:<6} {:>14.6} {:>14.6} {:>14.6} {:>14.9} {:>12}",
                m.measure.name(),
                m.median_matrix_seconds,
                m.min_matrix_seconds,
                m.max_matrix_seconds,
                m.median_pair_seconds,
                m.total_count
            )
            .unwrap();
        }
        out
    }

    pub fn measure(&self, m: Measure) -> Option<&MeasureTiming> {
        self.measures.iter().find(|t| t.measure == m)
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Times the full pairwise matrix of each measure `repetitions` times on one
/// thread. Counts are deterministic; timings are not.
pub fn benchmark_measures(
    corpus: &[Timeline],
    measures: &[Measure],
    params: &MeasureParams,
    repetitions: usize,
) -> Result<BenchReport> {
    if repetitions < 3 {
        return Err(Error::InvalidParameter(format!("repetitions must be >= 3, got {repetitions}")));
    }
    if corpus.len() < 2 {
        return Err(Error::InvalidParameter("benchmark needs at least 2 pieces".into()));
    }
    params.validate()?;
    let pairs = upper_pairs(corpus.len());
    let mut out = Vec::new();
    for &measure in measures {
        let mut times = Vec::with_capacity(repetitions);
        let mut counts = Vec::new();
        for rep in 0..repetitions {
            let t0 = Instant::now();
            let prepared = corpus
                .iter()
                .map(|tl| prepare(tl, measure, params))
                .collect::<Result<Vec<_>>>()?;
            let mut rep_counts = Vec::with_capacity(pairs.len());
            for &(i, j) in &pairs {
                let (_, count) = compare_prepared(&prepared[i], &prepared[j], params)?;
                rep_counts.push(count);
            }
            times.push(t0.elapsed().as_secs_f64());
            if rep == 0 {
                counts = rep_counts;
            }
        }
        let mut sorted = times.clone();
        sorted.sort_by(f64::total_cmp);
        let med = median(&sorted);
        out.push(MeasureTiming {
            measure,
            median_matrix_seconds: med,
            min_matrix_seconds: sorted[0],
            max_matrix_seconds: sorted[sorted.len() - 1],
            median_pair_seconds: med / pairs.len() as f64,
            matrix_seconds: times,
            total_count: counts.iter().sum(),
            counts: pairs
                .iter()
                .zip(counts)
                .map(|(&(i, j), count)| PairCount {
                    a: corpus[i].id.clone(),
                    b: corpus[j].id.clone(),
                    count,
                })
                .collect(),
        });
    }
    Ok(BenchReport {
        pieces: corpus.len(),
        pairs: pairs.len(),
        repetitions,
        measures: out,
    })
}

/// Seeded random corpus: each piece picks a key and strings diatonic triads
/// of 2 to 4 beats up to `beats` beats in total (the last chord is cut to
/// fit).
pub fn synthetic_corpus(pieces: usize, beats: i64, seed: u64) -> Vec<Timeline> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let major_degrees = [(0, Shorthand::Maj), (2, Shorthand::Min), (4, Shorthand::Min), (5, Shorthand::Maj), (7, Shorthand::Maj), (9, Shorthand::Min), (11, Shorthand::Dim)];
    let minor_degrees = [(0, Shorthand::Min), (2, Shorthand::Dim), (3, Shorthand::Maj), (5, Shorthand::Min), (7, Shorthand::Maj), (8, Shorthand::Maj), (11, Shorthand::Dim)];
    (0..pieces)
        .map(|p| {
            let tonic = rng.gen_range(0..12);
            let mode = if rng.gen_bool(0.5) { Mode::Major } else { Mode::Minor };
            let degrees = if mode == Mode::Major { &major_degrees } else { &minor_degrees };
            let key = Key::new(PitchClass::new(tonic), mode);
            let mut events = Vec::new();
            let mut t = 0i64;
            while t < beats {
                let d = rng.gen_range(2..=4).min(beats - t);
                let (offset, shorthand) = degrees[rng.gen_range(0..degrees.len())];
                let root = crate::harte::Natural::spell(PitchClass::new(tonic + offset));
                let chord = Chord::Sounded(SoundedChord::from_shorthand(root, shorthand));
                events.push(ChordEvent::new(Beats::from_integer(t), Beats::from_integer(d), chord));
                t += d;
            }
            Timeline::new(format!("synth{p:02}"), events, vec![(Beats::from_integer(0), key)])
                .expect("generated timeline is valid")
        })
        .collect()
}

/// Ids of pieces sharing each clique, for reporting.
pub fn clique_members(cliques: &CliqueSet) -> BTreeMap<&str, BTreeSet<&str>> {
    let mut out: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (p, c) in &cliques.map {
        out.entry(c.as_str()).or_default().insert(p.as_str());
    }
    out
}
