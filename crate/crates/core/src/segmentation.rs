//! Harmonic segmentation: TPS self-similarity matrix, checkerboard novelty
//! and peak picking.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::harte::Chord;
use crate::timeline::{Beats, Timeline};
use crate::tps::{Key, TpsPoint};
use crate::{Error, Result};

/// Self-similarity over the sounded events of a piece.
#[derive(Debug, Clone, PartialEq)]
pub struct Ssm {
    n: usize,
    cells: Vec<f64>,
    /// Sounded index -> index into `Timeline::events`.
    pub event_map: Vec<usize>,
}

impl Ssm {
    pub fn from_cells(n: usize, cells: Vec<f64>) -> Self {
        assert_eq!(cells.len(), n * n, "SSM must be square");
        Ssm {
            n,
            cells,
            event_map: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.n + j]
    }

    /// Plain (ASCII) PGM, maxval 255, value = round(255 * cell).
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.n, self.n);
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| ((self.get(i, j) * 255.0).round() as u8).to_string())
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// `cell(i,j) = 1 - δ(i,j) / δmax`, δ the symmetrised TPS distance with each
/// event in its governing key and δmax the largest distance in the piece (1
/// when all are zero). NoChord events are skipped.
pub fn build_ssm(tl: &Timeline) -> Result<Ssm> {
    tl.require_sounded()?;
    let points = tl.tps_points();
    let n = points.len();
    let mut dist = vec![0.0; n * n];
    let mut max = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = points[i].distance(&points[j]).0;
            dist[i * n + j] = d;
            dist[j * n + i] = d;
            max = max.max(d);
        }
    }
    if max == 0.0 {
        max = 1.0;
    }
    let cells = dist.into_iter().map(|d| 1.0 - d / max).collect();
    Ok(Ssm {
        n,
        cells,
        event_map: tl.sounded().map(|e| e.event_index).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoveltyCurve {
    pub values: Vec<f64>,
    pub kernel_size: usize,
}

impl NoveltyCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,value\n");
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{i},{v}").unwrap();
        }
        out
    }
}

/// Checkerboard-kernel novelty.
///
/// The kernel of half-width `h = kernel_size / 2` is centred between events
/// `i-1` and `i`; offsets `u, v` in `-h..h` weigh `S(i+u, i+v)` by
/// `sign(u) sign(v) exp(-taper ((u+1/2)^2 + (v+1/2)^2) / h^2)` with
/// `sign(u) = -1` for `u < 0`. Near the matrix borders the window shrinks
/// symmetrically to the largest half-width that fits, so a constant matrix
/// gives a zero curve everywhere. Negative sums are clamped to 0.
pub fn novelty(ssm: &Ssm, kernel_size: usize, taper: f64) -> Result<NoveltyCurve> {
    let n = ssm.len();
    if kernel_size < 2 || !kernel_size.is_multiple_of(2) || kernel_size > 2 * n {
        return Err(Error::KernelTooLarge { kernel_size, n });
    }
    if taper.is_nan() || taper <= 0.0 {
        return Err(Error::InvalidParameter(format!("taper must be positive, got {taper}")));
    }
    let h = (kernel_size / 2) as i64;
    let scale = (h * h) as f64;
    // Offsets a and -1-a have the same |u + 1/2|, so the four cells sharing
    // a weight are summed first. Constant windows then cancel exactly
    // instead of leaving rounding residue that peak picking would see.
    let weight = |a: i64, b: i64| {
        let (ca, cb) = (a as f64 + 0.5, b as f64 + 0.5);
        (-taper * (ca * ca + cb * cb) / scale).exp()
    };

    let mut values = Vec::with_capacity(n);
    for i in 0..n as i64 {
        let hi = h.min(i).min(n as i64 - i);
        let mut acc = 0.0;
        for a in 0..hi {
            let (fa, ba) = ((i + a) as usize, (i - 1 - a) as usize);
            for b in 0..hi {
                let (fb, bb) = ((i + b) as usize, (i - 1 - b) as usize);
                let same = ssm.get(fa, fb) + ssm.get(ba, bb);
                let cross = ssm.get(fa, bb) + ssm.get(ba, fb);
                acc += weight(a, b) * (same - cross);
            }
        }
        values.push(acc.max(0.0));
    }
    Ok(NoveltyCurve { values, kernel_size })
}

/// Strict interior local maxima at or above `mean + lambda * stdev`, kept
/// greedily by descending height (lower index first on ties) while staying
/// at least `min_gap` apart. Returned in ascending order.
pub fn pick_boundaries(curve: &NoveltyCurve, lambda: f64, min_gap: usize) -> Vec<usize> {
    let v = &curve.values;
    let n = v.len();
    if n < 3 {
        return Vec::new();
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    let threshold = mean + lambda * var.sqrt();

    let mut peaks: Vec<usize> = (1..n - 1)
        .filter(|&i| v[i] > v[i - 1] && v[i] > v[i + 1] && v[i] >= threshold)
        .collect();
    peaks.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));

    let mut kept: Vec<usize> = Vec::new();
    for p in peaks {
        if kept.iter().all(|&k| k.abs_diff(p) >= min_gap) {
            kept.push(p);
        }
    }
    kept.sort_unstable();
    kept
}

pub fn boundaries_csv(boundaries: &[usize]) -> String {
    let mut out = String::from("boundary_index\n");
    for b in boundaries {
        writeln!(out, "{b}").unwrap();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegParams {
    pub kernel_size: usize,
    pub taper: f64,
    pub lambda: f64,
    pub min_gap: usize,
    pub min_len: usize,
}

impl Default for SegParams {
    fn default() -> Self {
        SegParams {
            kernel_size: 8,
            taper: 1.0,
            lambda: 0.5,
            min_gap: 2,
            min_len: 2,
        }
    }
}

/// Contiguous run of sounded events `[start, end)` of one piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub piece_id: String,
    pub index: usize,
    pub start: usize,
    pub end: usize,
    pub chords: Vec<Chord>,
    pub keys: Vec<Key>,
    #[serde(
        serialize_with = "serialize_durations",
        deserialize_with = "deserialize_durations"
    )]
    pub durations: Vec<Beats>,
}

impl Segment {
    pub fn id(&self) -> String {
        segment_id(&self.piece_id, self.index)
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    /// Key-relative TPS points of the segment's chords.
    pub fn points(&self) -> Vec<TpsPoint> {
        self.chords
            .iter()
            .zip(&self.keys)
            .filter_map(|(c, &k)| c.as_sounded().map(|c| TpsPoint::key_relative(c, k)))
            .collect()
    }

    pub fn chord_sequence(&self) -> String {
        self.chords
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn segment_id(piece_id: &str, index: usize) -> String {
    format!("{piece_id}/seg/{index}")
}

fn serialize_durations<S: serde::Serializer>(d: &[Beats], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(d.iter().map(|b| crate::timeline::format_beats(*b)))
}

fn deserialize_durations<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<Beats>, D::Error> {
    let raw: Vec<String> = Vec::deserialize(d)?;
    raw.iter()
        .map(|s| {
            crate::timeline::parse_beats(s).ok_or_else(|| serde::de::Error::custom(format!("bad beat value '{s}'")))
        })
        .collect()
}

/// Full pipeline output for one piece.
#[derive(Debug, Clone)]
pub struct Segmentation {
    pub ssm: Ssm,
    pub novelty: NoveltyCurve,
    pub boundaries: Vec<usize>,
    pub segments: Vec<Segment>,
    pub params: SegParams,
}

/// Kernel size actually used for an `n`-event piece: the configured size,
/// capped at the largest even value not above `2n`.
pub fn effective_kernel(kernel_size: usize, n: usize) -> usize {
    let cap = (2 * n).max(2);
    kernel_size.min(cap) & !1
}

pub fn segment(tl: &Timeline, params: &SegParams) -> Result<Segmentation> {
    if params.min_len == 0 || params.min_gap == 0 {
        return Err(Error::InvalidParameter("min_len and min_gap must be positive".into()));
    }
    let ssm = build_ssm(tl)?;
    let n = ssm.len();
    let curve = novelty(&ssm, effective_kernel(params.kernel_size, n), params.taper)?;
    let boundaries = pick_boundaries(&curve, params.lambda, params.min_gap);

    let mut bounds: Vec<usize> = std::iter::once(0)
        .chain(boundaries.iter().copied())
        .chain(std::iter::once(n))
        .collect();
    while bounds.len() > 2 {
        let short = bounds
            .windows(2)
            .position(|w| w[1] - w[0] < params.min_len);
        match short {
            Some(0) => {
                bounds.remove(1);
            }
            Some(k) => {
                bounds.remove(k);
            }
            None => break,
        }
    }

    let sounded: Vec<_> = tl.sounded().collect();
    let segments = bounds
        .windows(2)
        .enumerate()
        .map(|(index, w)| {
            let evs = &sounded[w[0]..w[1]];
            Segment {
                piece_id: tl.id.clone(),
                index,
                start: w[0],
                end: w[1],
                chords: evs.iter().map(|e| Chord::Sounded(e.chord.clone())).collect(),
                keys: evs.iter().map(|e| e.key).collect(),
                durations: evs.iter().map(|e| e.duration).collect(),
            }
        })
        .collect();

    Ok(Segmentation {
        ssm,
        novelty: curve,
        boundaries,
        segments,
        params: *params,
    })
}

pub fn segment_timeline(tl: &Timeline, params: &SegParams) -> Result<Vec<Segment>> {
    segment(tl, params).map(|s| s.segments)
}
