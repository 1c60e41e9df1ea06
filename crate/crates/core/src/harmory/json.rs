use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BuildParams, Edge, EdgeKind, MemoryGraph, PatternNode, PieceNode, SimilarEdge};
use crate::segmentation::Segment;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum NodeDump {
    Piece {
        id: String,
        title: Option<String>,
        artist: Option<String>,
    },
    Segment {
        id: String,
        segment: Segment,
    },
    Pattern {
        id: String,
        medoid: String,
    },
}

/// Flat node/edge form of a [`MemoryGraph`]. Nodes are ordered pieces,
/// segments, patterns, each by id; edges by type, source, target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDump {
    pub params: BuildParams,
    pub nodes: Vec<NodeDump>,
    pub edges: Vec<Edge>,
}

impl GraphDump {
    pub fn of(g: &MemoryGraph) -> GraphDump {
        let mut nodes = Vec::with_capacity(g.pieces.len() + g.segments.len() + g.patterns.len());
        nodes.extend(g.pieces.iter().map(|(id, p)| NodeDump::Piece {
            id: id.clone(),
            title: p.title.clone(),
            artist: p.artist.clone(),
        }));
        nodes.extend(g.segments.iter().map(|(id, s)| NodeDump::Segment {
            id: id.clone(),
            segment: s.clone(),
        }));
        nodes.extend(g.patterns.iter().map(|(id, p)| NodeDump::Pattern {
            id: id.clone(),
            medoid: p.medoid.clone(),
        }));
        GraphDump {
            params: g.params,
            nodes,
            edges: g.edges(),
        }
    }

    pub fn into_graph(self) -> Result<MemoryGraph> {
        let mut pieces = BTreeMap::new();
        let mut segments = BTreeMap::new();
        let mut patterns = BTreeMap::new();
        for node in self.nodes {
            match node {
                NodeDump::Piece { id, title, artist } => {
                    pieces.insert(
                        id,
                        PieceNode {
                            title,
                            artist,
                            segments: Vec::new(),
                        },
                    );
                }
                NodeDump::Segment { id, segment } => {
                    if segment.id() != id {
                        return Err(Error::Schema(format!("segment node '{id}' describes '{}'", segment.id())));
                    }
                    segments.insert(id, segment);
                }
                NodeDump::Pattern { id, medoid } => {
                    patterns.insert(
                        id,
                        PatternNode {
                            medoid,
                            members: Vec::new(),
                        },
                    );
                }
            }
        }
        let missing = |what: &str, id: &str| Error::Schema(format!("edge refers to unknown {what} '{id}'"));
        let mut similar = Vec::new();
        for e in self.edges {
            match e.kind {
                EdgeKind::HasSegment => {
                    if !segments.contains_key(&e.target) {
                        return Err(missing("segment", &e.target));
                    }
                    pieces
                        .get_mut(&e.source)
                        .ok_or_else(|| missing("piece", &e.source))?
                        .segments
                        .push(e.target);
                }
                EdgeKind::InstanceOf => {
                    if !segments.contains_key(&e.source) {
                        return Err(missing("segment", &e.source));
                    }
                    patterns
                        .get_mut(&e.target)
                        .ok_or_else(|| missing("pattern", &e.target))?
                        .members
                        .push(e.source);
                }
                EdgeKind::SimilarTo => {
                    for p in [&e.source, &e.target] {
                        if !patterns.contains_key(p) {
                            return Err(missing("pattern", p));
                        }
                    }
                    let weight = e
                        .weight
                        .ok_or_else(|| Error::Schema("similarTo edge without weight".into()))?;
                    similar.push(SimilarEdge {
                        a: e.source,
                        b: e.target,
                        weight,
                    });
                }
                // Implied by segment order.
                EdgeKind::NextSegment => {}
            }
        }
        for p in pieces.values_mut() {
            p.segments.sort_by_key(|s| segments[s].index);
        }
        for (id, p) in patterns.iter_mut() {
            p.members.sort();
            if !p.members.contains(&p.medoid) {
                return Err(Error::Schema(format!("pattern '{id}' does not contain its medoid")));
            }
        }
        similar.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
        Ok(MemoryGraph {
            params: self.params,
            pieces,
            segments,
            patterns,
            similar,
        })
    }
}

impl MemoryGraph {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GraphDump::of(self)).expect("graph dump serialises")
    }

    pub fn from_json(text: &str) -> Result<MemoryGraph> {
        serde_json::from_str::<GraphDump>(text)?.into_graph()
    }
}
