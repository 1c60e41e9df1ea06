use std::collections::HashMap;

use serde::Serialize;

use crate::tps::TpsPoint;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alignment {
    pub path: Vec<(usize, usize)>,
    pub cost: f64,
    pub normalized_cost: f64,
    /// Cell cost at every path step.
    pub step_costs: Vec<f64>,
    /// Number of cost-matrix cells evaluated.
    #[serde(skip)]
    pub cells: u64,
}

/// A point sequence stored as indices into its distinct points, so cell
/// costs against another sequence are tabulated once per distinct pair.
/// Key-relative chord sequences reuse a small vocabulary, which makes the
/// DP loop a table lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSeq {
    distinct: Vec<TpsPoint>,
    index: Vec<u32>,
}

impl PointSeq {
    pub fn new(points: &[TpsPoint]) -> Self {
        let mut seen: HashMap<TpsPoint, u32> = HashMap::new();
        let mut distinct = Vec::new();
        let index = points
            .iter()
            .map(|p| {
                *seen.entry(*p).or_insert_with(|| {
                    distinct.push(*p);
                    (distinct.len() - 1) as u32
                })
            })
            .collect();
        PointSeq { distinct, index }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = TpsPoint> + '_ {
        self.index.iter().map(|&i| self.distinct[i as usize])
    }
}

/// Dynamic time warping with steps (1,1), (1,0), (0,1) and unit step
/// weights. Among minimum-cost paths the shortest is chosen, so the
/// normalised cost does not depend on argument order; remaining ties prefer
/// the diagonal, then (1,0). `band` restricts cells to `|i - j| <= band`.
pub fn align_points(a: &[TpsPoint], b: &[TpsPoint], band: Option<usize>) -> Result<Alignment> {
    align_seqs(&PointSeq::new(a), &PointSeq::new(b), band)
}

pub fn align_seqs(a: &PointSeq, b: &PointSeq, band: Option<usize>) -> Result<Alignment> {
    let nb = b.distinct.len();
    let table: Vec<u32> = a
        .distinct
        .iter()
        .flat_map(|x| b.distinct.iter().map(move |y| x.distance(y).halves() as u32))
        .collect();
    align_halves(a.len(), b.len(), band, |i, out| {
        let r = a.index[i] as usize * nb;
        let row = &table[r..r + nb];
        for (o, &bj) in out.iter_mut().zip(&b.index) {
            *o = row[bj as usize];
        }
    })
}

const DIAGONAL: u8 = 1;
const DOWN: u8 = 2;
const RIGHT: u8 = 3;
const UNREACHED: u64 = u64::MAX;

/// DP core over cell costs in half units. `fill_row(i, out)` writes the
/// costs of row `i` into `out` (length `m`); only cells inside the band are
/// read or counted.
///
/// The accumulator packs `(cost, path length)` as `cost << 32 | length`, so
/// the lexicographic minimum is a plain integer minimum.
pub(crate) fn align_halves(
    n: usize,
    m: usize,
    band: Option<usize>,
    mut fill_row: impl FnMut(usize, &mut [u32]),
) -> Result<Alignment> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter("cannot align an empty sequence".into()));
    }
    if let Some(w) = band {
        if w < n.abs_diff(m) {
            return Err(Error::InvalidParameter(format!(
                "band width {w} cannot reach the end of a {n}x{m} alignment"
            )));
        }
    }

    let mut prev = vec![UNREACHED; m];
    let mut cur = vec![UNREACHED; m];
    let mut costs = vec![0u32; n * m];
    let mut back = vec![0u8; n * m];
    let mut cells = 0u64;

    for i in 0..n {
        let (lo, hi) = match band {
            Some(w) => (i.saturating_sub(w), (i + w).min(m - 1)),
            None => (0, m - 1),
        };
        let row_costs = &mut costs[i * m..(i + 1) * m];
        fill_row(i, row_costs);
        let back_row = &mut back[i * m..(i + 1) * m];
        cur.fill(UNREACHED);
        cells += (hi - lo + 1) as u64;
        for j in lo..=hi {
            let step_add = ((row_costs[j] as u64) << 32) | 1;
            let (best, step) = if i == 0 && j == 0 {
                (0, 0)
            } else {
                let diag = if i > 0 && j > 0 { prev[j - 1] } else { UNREACHED };
                let down = if i > 0 { prev[j] } else { UNREACHED };
                let right = if j > 0 { cur[j - 1] } else { UNREACHED };
                // Strict comparisons keep the earlier candidate on ties.
                let (mut best, mut step) = (diag, DIAGONAL);
                if down < best {
                    (best, step) = (down, DOWN);
                }
                if right < best {
                    (best, step) = (right, RIGHT);
                }
                (best, step)
            };
            if best != UNREACHED {
                cur[j] = best + step_add;
                back_row[j] = step;
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }

    let packed = prev[m - 1];
    let total = (packed >> 32) as f64 / 2.0;
    let mut path = Vec::with_capacity((packed & 0xffff_ffff) as usize);
    let (mut i, mut j) = (n - 1, m - 1);
    loop {
        path.push((i, j));
        match back[i * m + j] {
            DIAGONAL => {
                i -= 1;
                j -= 1;
            }
            DOWN => i -= 1,
            RIGHT => j -= 1,
            _ => break,
        }
    }
    path.reverse();
    let step_costs: Vec<f64> = path.iter().map(|&(i, j)| costs[i * m + j] as f64 / 2.0).collect();
    Ok(Alignment {
        normalized_cost: total / path.len() as f64,
        cost: total,
        path,
        step_costs,
        cells,
    })
}
