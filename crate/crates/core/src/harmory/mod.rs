//! The harmonic memory: segments of every piece, grouped into patterns by
//! DTW similarity, with temporal (`nextSegment`) and similarity
//! (`similarTo`) links.

mod json;
mod ntriples;
mod query;

pub use json::{GraphDump, NodeDump};
pub use ntriples::{export_ntriples, import_ntriples, GraphView};
pub use query::{graph_stats, query_similar, GraphStats, PatternQuery, QueryHit};

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::segmentation::{segment_timeline, SegParams, Segment};
use crate::similarity::{align_seqs, upper_pairs, MeasureParams, PointSeq};
use crate::timeline::Timeline;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildParams {
    pub segmentation: SegParams,
    pub theta_sim: f64,
    pub theta_merge: f64,
    /// DTW score scale.
    pub scale: f64,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            segmentation: SegParams::default(),
            theta_sim: 0.6,
            theta_merge: 0.9,
            scale: MeasureParams::default().scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceNode {
    pub title: Option<String>,
    pub artist: Option<String>,
    /// Segment ids in temporal order.
    pub segments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternNode {
    /// Id of the representative segment; equal to the pattern id.
    pub medoid: String,
    /// Member segment ids, sorted.
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarEdge {
    pub a: String,
    pub b: String,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    #[serde(rename = "hasSegment")]
    HasSegment,
    #[serde(rename = "nextSegment")]
    NextSegment,
    #[serde(rename = "instanceOf")]
    InstanceOf,
    #[serde(rename = "similarTo")]
    SimilarTo,
}

impl EdgeKind {
    pub fn name(self) -> &'static str {
        match self {
            EdgeKind::HasSegment => "hasSegment",
            EdgeKind::NextSegment => "nextSegment",
            EdgeKind::InstanceOf => "instanceOf",
            EdgeKind::SimilarTo => "similarTo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    #[serde(rename = "type")]
    pub kind: EdgeKind,
    pub source: String,
    pub target: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryGraph {
    pub params: BuildParams,
    pub pieces: BTreeMap<String, PieceNode>,
    pub segments: BTreeMap<String, Segment>,
    pub patterns: BTreeMap<String, PatternNode>,
    /// Stored once per pair, `a < b`, sorted.
    pub similar: Vec<SimilarEdge>,
}

impl MemoryGraph {
    /// Pattern id of every segment.
    pub fn instance_of(&self) -> BTreeMap<&str, &str> {
        self.patterns
            .iter()
            .flat_map(|(pid, p)| p.members.iter().map(move |m| (m.as_str(), pid.as_str())))
            .collect()
    }

    /// All typed edges, sorted by kind, source, target.
    pub fn edges(&self) -> Vec<Edge> {
        let plain = |kind, source: &str, target: &str| Edge {
            kind,
            source: source.to_string(),
            target: target.to_string(),
            weight: None,
        };
        let mut edges = Vec::new();
        for (pid, piece) in &self.pieces {
            for s in &piece.segments {
                edges.push(plain(EdgeKind::HasSegment, pid, s));
            }
            for w in piece.segments.windows(2) {
                edges.push(plain(EdgeKind::NextSegment, &w[0], &w[1]));
            }
        }
        for (seg, pat) in self.instance_of() {
            edges.push(plain(EdgeKind::InstanceOf, seg, pat));
        }
        for e in &self.similar {
            edges.push(Edge {
                weight: Some(e.weight),
                ..plain(EdgeKind::SimilarTo, &e.a, &e.b)
            });
        }
        edges.sort_by(|x, y| (x.kind, &x.source, &x.target).cmp(&(y.kind, &y.source, &y.target)));
        edges
    }

    /// Pattern-level succession derived from `nextSegment`: how often one
    /// pattern is directly followed by another.
    pub fn pattern_successions(&self) -> BTreeMap<(String, String), usize> {
        let inst = self.instance_of();
        let mut out = BTreeMap::new();
        for piece in self.pieces.values() {
            for w in piece.segments.windows(2) {
                let key = (inst[w[0].as_str()].to_string(), inst[w[1].as_str()].to_string());
                *out.entry(key).or_insert(0) += 1;
            }
        }
        out
    }
}

/// Minimal disjoint-set forest with union by size and path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }

    /// Groups of element indices, each sorted, ordered by smallest member.
    pub fn groups(&mut self) -> Vec<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..self.parent.len() {
            let r = self.find(i);
            by_root.entry(r).or_default().push(i);
        }
        let mut groups: Vec<Vec<usize>> = by_root.into_values().collect();
        groups.sort_by_key(|g| g[0]);
        groups
    }
}

/// Pairwise DTW similarity between segments, as a dense symmetric matrix
/// with unit diagonal.
pub fn segment_similarities(segments: &[Segment], scale: f64) -> Result<Vec<Vec<f64>>> {
    let points: Vec<PointSeq> = segments.iter().map(|s| PointSeq::new(&s.points())).collect();
    let n = segments.len();
    let pairs = upper_pairs(n);
    let scores: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| align_seqs(&points[i], &points[j], None).map(|a| (-a.normalized_cost / scale).exp()))
        .collect::<Result<_>>()?;
    let mut m = vec![vec![1.0; n]; n];
    for (&(i, j), s) in pairs.iter().zip(scores) {
        m[i][j] = s;
        m[j][i] = s;
    }
    Ok(m)
}

/// Index of the medoid: maximal summed similarity to the other members,
/// ties to the smallest id.
fn medoid(members: &[usize], sim: &[Vec<f64>], ids: &[String]) -> usize {
    let total = |i: usize| members.iter().filter(|&&j| j != i).map(|&j| sim[i][j]).sum::<f64>();
    let mut best = members[0];
    let mut best_total = total(best);
    for &m in &members[1..] {
        let t = total(m);
        if t > best_total || (t == best_total && ids[m] < ids[best]) {
            best = m;
            best_total = t;
        }
    }
    best
}

pub fn build_memory(corpus: &[Timeline], params: &BuildParams) -> Result<MemoryGraph> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if !(params.theta_sim > 0.0 && params.theta_sim <= 1.0) {
        return Err(Error::InvalidParameter(format!("theta_sim must be in (0, 1], got {}", params.theta_sim)));
    }
    if params.theta_merge.is_nan() || params.theta_merge < params.theta_sim {
        return Err(Error::InvalidParameter(format!(
            "theta_merge ({}) must be >= theta_sim ({})",
            params.theta_merge, params.theta_sim
        )));
    }
    if params.scale.is_nan() || params.scale <= 0.0 {
        return Err(Error::InvalidParameter("scale must be positive".into()));
    }
    let mut seen = HashSet::new();
    for tl in corpus {
        if !seen.insert(tl.id.as_str()) {
            return Err(Error::InvalidParameter(format!("duplicate piece id '{}'", tl.id)));
        }
    }

    let per_piece: Vec<Vec<Segment>> = corpus
        .par_iter()
        .map(|tl| segment_timeline(tl, &params.segmentation))
        .collect::<Result<_>>()?;
    let segments: Vec<Segment> = per_piece.iter().flatten().cloned().collect();
    let ids: Vec<String> = segments.iter().map(Segment::id).collect();

    let sim = segment_similarities(&segments, params.scale)?;
    let n = segments.len();
    let mut uf = UnionFind::new(n);
    for (i, row) in sim.iter().enumerate() {
        for (j, &s) in row.iter().enumerate().skip(i + 1) {
            if s >= params.theta_merge {
                uf.union(i, j);
            }
        }
    }

    let mut patterns = BTreeMap::new();
    let mut medoids = Vec::new();
    for group in uf.groups() {
        let m = medoid(&group, &sim, &ids);
        let mut members: Vec<String> = group.iter().map(|&g| ids[g].clone()).collect();
        members.sort();
        medoids.push(m);
        patterns.insert(
            ids[m].clone(),
            PatternNode {
                medoid: ids[m].clone(),
                members,
            },
        );
    }

    let mut similar = Vec::new();
    for (x, &mi) in medoids.iter().enumerate() {
        for &mj in &medoids[x + 1..] {
            let w = sim[mi][mj];
            if w >= params.theta_sim {
                let (a, b) = if ids[mi] < ids[mj] { (mi, mj) } else { (mj, mi) };
                similar.push(SimilarEdge {
                    a: ids[a].clone(),
                    b: ids[b].clone(),
                    weight: w,
                });
            }
        }
    }
    similar.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));

    let pieces = corpus
        .iter()
        .zip(&per_piece)
        .map(|(tl, segs)| {
            (
                tl.id.clone(),
                PieceNode {
                    title: tl.title.clone(),
                    artist: tl.artist.clone(),
                    segments: segs.iter().map(Segment::id).collect(),
                },
            )
        })
        .collect();

    Ok(MemoryGraph {
        params: *params,
        pieces,
        segments: ids.into_iter().zip(segments).collect(),
        patterns,
        similar,
    })
}

/// Transitive closure of the `>= threshold` relation, by repeated
/// expansion. Quadratic per step; intended as a reference for small inputs.
pub fn brute_force_closure(sim: &[Vec<f64>], threshold: f64) -> BTreeSet<BTreeSet<usize>> {
    let n = sim.len();
    let mut reach: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| i == j || sim[i][j] >= threshold).collect())
        .collect();
    for k in 0..n {
        let via = reach[k].clone();
        for row in reach.iter_mut().filter(|row| row[k]) {
            for (r, &v) in row.iter_mut().zip(&via) {
                *r |= v;
            }
        }
    }
    (0..n)
        .map(|i| (0..n).filter(|&j| reach[i][j]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tps::Key;

    fn tl(id: &str, chords: &[&str]) -> Timeline {
        let prog: Vec<(&str, i64)> = chords.iter().map(|c| (*c, 1)).collect();
        Timeline::from_progression(id, &prog, Some(Key::major(0))).unwrap()
    }

    #[test]
    fn single_segment_piece() {
        let g = build_memory(&[tl("a", &["C", "C"])], &BuildParams::default()).unwrap();
        assert_eq!(g.patterns.len(), 1);
        assert!(g.similar.is_empty());
        assert!(g.edges().iter().all(|e| e.kind != EdgeKind::NextSegment));
    }

    #[test]
    fn identical_pieces_merge_pairwise() {
        let chords = ["C", "C", "C", "C", "F#", "F#", "F#", "F#"];
        let params = BuildParams {
            theta_merge: 1.0,
            ..BuildParams::default()
        };
        let g = build_memory(&[tl("a", &chords), tl("b", &chords)], &params).unwrap();
        assert_eq!(g.pieces["a"].segments.len(), 2);
        assert_eq!(g.patterns.len(), 2);
        for p in g.patterns.values() {
            assert_eq!(p.members.len(), 2);
            assert_eq!(p.medoid, p.members[0]);
        }
        assert_eq!(g.edges().iter().filter(|e| e.kind == EdgeKind::NextSegment).count(), 2);
    }

    #[test]
    fn high_theta_sim_gives_no_similarity_edges() {
        let params = BuildParams {
            theta_sim: 1.0,
            theta_merge: 1.0,
            ..BuildParams::default()
        };
        let g = build_memory(&[tl("a", &["C", "G"]), tl("b", &["F", "D:min"])], &params).unwrap();
        assert!(g.similar.is_empty());
    }

    #[test]
    fn parameter_validation() {
        assert!(matches!(build_memory(&[], &BuildParams::default()), Err(Error::EmptyCorpus)));
        let bad = BuildParams {
            theta_sim: 0.9,
            theta_merge: 0.5,
            ..BuildParams::default()
        };
        assert!(build_memory(&[tl("a", &["C"])], &bad).is_err());
        let dup = [tl("a", &["C"]), tl("a", &["G"])];
        assert!(build_memory(&dup, &BuildParams::default()).is_err());
    }

    #[test]
    fn union_find_groups() {
        let mut uf = UnionFind::new(5);
        uf.union(3, 1);
        uf.union(4, 3);
        assert_eq!(uf.groups(), vec![vec![0], vec![1, 3, 4], vec![2]]);
    }
}
