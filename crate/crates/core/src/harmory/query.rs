use std::collections::BTreeMap;

use serde::Serialize;

use super::{MemoryGraph, UnionFind};
use crate::harte::Chord;
use crate::similarity::align_points;
use crate::timeline::{estimate_key_from, Beats};
use crate::tps::{Key, TpsPoint};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PatternQuery {
    pub chords: Vec<Chord>,
    /// Estimated from the chords (one beat each) when absent.
    pub key: Option<Key>,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryHit {
    pub pattern: String,
    pub score: f64,
    pub chord_sequence: String,
    pub members: usize,
}

/// Top `k` patterns by DTW similarity of their medoid to the query; ties by
/// pattern id.
pub fn query_similar(g: &MemoryGraph, q: &PatternQuery) -> Result<Vec<QueryHit>> {
    if q.k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let sounded: Vec<_> = q.chords.iter().filter_map(Chord::as_sounded).collect();
    if sounded.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let key = q
        .key
        .unwrap_or_else(|| estimate_key_from(sounded.iter().map(|&c| (c, Beats::from_integer(1)))));
    let points: Vec<TpsPoint> = sounded.iter().map(|c| TpsPoint::key_relative(c, key)).collect();

    let mut hits = Vec::with_capacity(g.patterns.len());
    for (id, p) in &g.patterns {
        let medoid = &g.segments[&p.medoid];
        let al = align_points(&points, &medoid.points(), None)?;
        hits.push(QueryHit {
            pattern: id.clone(),
            score: (-al.normalized_cost / g.params.scale).exp(),
            chord_sequence: medoid.chord_sequence(),
            members: p.members.len(),
        });
    }
    hits.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.pattern.cmp(&b.pattern)));
    hits.truncate(q.k);
    Ok(hits)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphStats {
    pub pieces: usize,
    pub segments: usize,
    pub patterns: usize,
    pub edges: BTreeMap<&'static str, usize>,
    /// Connected components of patterns under `similarTo`.
    pub components: usize,
    pub largest_component: usize,
    /// Number of patterns with a given `similarTo` degree.
    pub degree_histogram: BTreeMap<usize, usize>,
    /// Number of patterns with a given member count.
    pub pattern_sizes: BTreeMap<usize, usize>,
}

pub fn graph_stats(g: &MemoryGraph) -> GraphStats {
    let mut edges = BTreeMap::new();
    for e in g.edges() {
        *edges.entry(e.kind.name()).or_insert(0) += 1;
    }
    let index: BTreeMap<&str, usize> = g.patterns.keys().enumerate().map(|(i, k)| (k.as_str(), i)).collect();
    let mut degree = vec![0usize; index.len()];
    let mut uf = UnionFind::new(index.len());
    for e in &g.similar {
        let (a, b) = (index[e.a.as_str()], index[e.b.as_str()]);
        degree[a] += 1;
        degree[b] += 1;
        uf.union(a, b);
    }
    let groups = uf.groups();
    let mut degree_histogram = BTreeMap::new();
    for d in degree {
        *degree_histogram.entry(d).or_insert(0) += 1;
    }
    let mut pattern_sizes = BTreeMap::new();
    for p in g.patterns.values() {
        *pattern_sizes.entry(p.members.len()).or_insert(0) += 1;
    }
    GraphStats {
        pieces: g.pieces.len(),
        segments: g.segments.len(),
        patterns: g.patterns.len(),
        edges,
        components: groups.len(),
        largest_component: groups.iter().map(Vec::len).max().unwrap_or(0),
        degree_histogram,
        pattern_sizes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmory::{build_memory, BuildParams};
    use crate::timeline::Timeline;

    fn corpus() -> Vec<Timeline> {
        let a = ["C", "C", "C", "C", "F#", "F#", "F#", "F#"];
        let b = ["G", "D", "G", "D"];
        let prog = |cs: &[&'static str]| cs.iter().map(|c| (*c, 1)).collect::<Vec<_>>();
        vec![
            Timeline::from_progression("a", &prog(&a), Some(Key::major(0))).unwrap(),
            Timeline::from_progression("b", &prog(&b), Some(Key::major(7))).unwrap(),
        ]
    }

    #[test]
    fn query_ranks_exact_match_first() {
        let g = build_memory(&corpus(), &BuildParams::default()).unwrap();
        let q = PatternQuery {
            chords: ["D", "A", "D", "A"].iter().map(|c| c.parse().unwrap()).collect(),
            key: Some(Key::major(2)),
            k: 1,
        };
        let hits = query_similar(&g, &q).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].pattern, "b/seg/0");
        assert_eq!(hits[0].score, 1.0);
    }

    #[test]
    fn query_errors() {
        let g = build_memory(&corpus(), &BuildParams::default()).unwrap();
        let q = PatternQuery {
            chords: vec![Chord::NoChord],
            key: None,
            k: 3,
        };
        assert!(matches!(query_similar(&g, &q), Err(Error::EmptyQuery)));
        let q = PatternQuery {
            chords: vec!["C".parse().unwrap()],
            key: None,
            k: 0,
        };
        assert!(query_similar(&g, &q).is_err());
    }

    #[test]
    fn stats_count_edges() {
        let g = build_memory(&corpus(), &BuildParams::default()).unwrap();
        let s = graph_stats(&g);
        assert_eq!(s.pieces, 2);
        assert_eq!(s.edges["hasSegment"], s.segments);
        assert_eq!(s.edges.get("instanceOf").copied().unwrap_or(0), s.segments);
        assert_eq!(s.degree_histogram.values().sum::<usize>(), s.patterns);
    }

    #[test]
    fn json_round_trip() {
        let g = build_memory(&corpus(), &BuildParams::default()).unwrap();
        let back = MemoryGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn ntriples_round_trip() {
        let g = build_memory(&corpus(), &BuildParams::default()).unwrap();
        let nt = crate::harmory::export_ntriples(&g);
        assert!(nt.ends_with(".\n"));
        let lines: Vec<&str> = nt.lines().collect();
        let mut sorted = lines.clone();
        sorted.sort();
        assert_eq!(lines, sorted);
        assert_eq!(crate::harmory::import_ntriples(&nt).unwrap(), crate::harmory::GraphView::of(&g));
    }
}
