//! Weighted document/element network model and the builders for the four
//! network variants.
//!
//! Documents carry node weight 1 and elements node weight 0, so that the
//! clustering quality function counts only documents in its size penalty.
//! Networks are immutable once built and safe to share across threads.

mod build;

pub use build::{build_extended_citation, build_mixed, build_pure, build_similarity, rescale_edges};

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

/// Relative tolerance for edge-weight bookkeeping assertions.
pub const WEIGHT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("empty node id in input row")]
    EmptyId,
    #[error("duplicate node id: {0}")]
    DuplicateId(String),
    #[error("edge endpoint {0} is out of range")]
    EdgeOutOfRange(u32),
    #[error("self-loop on node {0}")]
    SelfLoop(String),
    #[error("duplicate edge between {0} and {1}")]
    DuplicateEdge(String, String),
    #[error("edge weight must be positive and finite, got {0}")]
    InvalidWeight(f64),
    #[error("id appears as both document and element: {0}")]
    IdCollision(String),
    #[error("similarity score must be positive: ({a}, {b}) has score {score}")]
    NonPositiveScore { a: String, b: String, score: f64 },
    #[error("similarity score is not finite: ({a}, {b})")]
    NonFiniteScore { a: String, b: String },
    #[error("self-similarity pair for document {0}")]
    SelfPair(String),
    #[error("unknown document id in similarity scores: {0}")]
    UnknownDocument(String),
    #[error("similarity document {0} is absent from the pure network")]
    DocumentNotInPure(String),
    #[error("top-k parameter must be at least 1")]
    InvalidK,
    #[error("cannot rescale a network with no edges")]
    NoEdges,
    #[error("rescale target must be positive, got {0}")]
    InvalidTarget(f64),
    #[error("expected a {expected:?} network, got {got:?}")]
    VariantMismatch { expected: Variant, got: Variant },
}

/// Node role. Documents are the evaluation subjects; elements (external
/// source elements, non-core citation documents) only carry structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Document,
    Element,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKind::Document => write!(f, "document"),
            NodeKind::Element => write!(f, "element"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NodeRecord {
    pub id: String,
    pub kind: NodeKind,
}

impl NodeRecord {
    /// Node weight under the constant Potts model: documents 1, elements 0.
    pub fn weight(&self) -> f64 {
        match self.kind {
            NodeKind::Document => 1.0,
            NodeKind::Element => 0.0,
        }
    }
}

/// Undirected edge between two node indices, canonicalized so `a < b`.
#[derive(Debug, Clone, Copy)]
pub struct EdgeRecord {
    pub a: u32,
    pub b: u32,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Pure,
    Similarity,
    Mixed,
    ExtendedCitation,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Pure => write!(f, "pure"),
            Variant::Similarity => write!(f, "similarity"),
            Variant::Mixed => write!(f, "mixed"),
            Variant::ExtendedCitation => write!(f, "extended_citation"),
        }
    }
}

/// An immutable weighted network of documents and elements.
#[derive(Debug, Clone)]
pub struct Network {
    variant: Variant,
    nodes: Vec<NodeRecord>,
    index: HashMap<String, u32>,
    edges: Vec<EdgeRecord>,
    total_edge_weight: f64,
}

impl Network {
    /// Validated constructor for custom networks (synthetic fixtures,
    /// oracle inputs). The variant builders are the normal construction
    /// path; this one checks the shared structural invariants only.
    pub fn from_parts(
        variant: Variant,
        nodes: Vec<NodeRecord>,
        edges: Vec<EdgeRecord>,
    ) -> Result<Self, NetworkError> {
        let mut seen = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if n.id.is_empty() {
                return Err(NetworkError::EmptyId);
            }
            if seen.insert(n.id.clone(), i).is_some() {
                return Err(NetworkError::DuplicateId(n.id.clone()));
            }
        }
        let mut pairs = std::collections::HashSet::with_capacity(edges.len());
        let mut canonical = Vec::with_capacity(edges.len());
        for e in &edges {
            if e.a as usize >= nodes.len() || e.b as usize >= nodes.len() {
                return Err(NetworkError::EdgeOutOfRange(e.a.max(e.b)));
            }
            if e.a == e.b {
                return Err(NetworkError::SelfLoop(nodes[e.a as usize].id.clone()));
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(NetworkError::InvalidWeight(e.weight));
            }
            let (a, b) = (e.a.min(e.b), e.a.max(e.b));
            if !pairs.insert((a, b)) {
                return Err(NetworkError::DuplicateEdge(
                    nodes[a as usize].id.clone(),
                    nodes[b as usize].id.clone(),
                ));
            }
            canonical.push(EdgeRecord {
                a,
                b,
                weight: e.weight,
            });
        }
        Ok(Network::new(variant, nodes, canonical))
    }

    pub(crate) fn new(variant: Variant, nodes: Vec<NodeRecord>, edges: Vec<EdgeRecord>) -> Self {
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i as u32))
            .collect();
        let total_edge_weight = edges.iter().map(|e| e.weight).sum();
        Network {
            variant,
            nodes,
            index,
            edges,
            total_edge_weight,
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn document_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Document)
            .count()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn node(&self, idx: u32) -> &NodeRecord {
        &self.nodes[idx as usize]
    }

    pub fn node_index(&self, id: &str) -> Option<u32> {
        self.index.get(id).copied()
    }

    pub fn total_edge_weight(&self) -> f64 {
        self.total_edge_weight
    }

    /// Per-node degree (number of incident edges, not weight).
    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.nodes.len()];
        for e in &self.edges {
            deg[e.a as usize] += 1;
            deg[e.b as usize] += 1;
        }
        deg
    }

    /// Two-section debug export: node lines (id, kind, weight) then edge
    /// lines (id_a, id_b, weight), tab-separated.
    pub fn export<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "#nodes")?;
        for n in &self.nodes {
            writeln!(w, "{}\t{}\t{}", n.id, n.kind, n.weight())?;
        }
        writeln!(w, "#edges")?;
        for e in &self.edges {
            writeln!(
                w,
                "{}\t{}\t{}",
                self.nodes[e.a as usize].id, self.nodes[e.b as usize].id, e.weight
            )?;
        }
        Ok(())
    }
}
