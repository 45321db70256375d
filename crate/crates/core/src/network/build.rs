//! Builders for the four network variants.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::{EdgeRecord, Network, NetworkError, NodeKind, NodeRecord, Variant};

/// Builds the pure bipartite network from (element, document) link rows.
///
/// Elements linked to fewer than two distinct documents are removed, then
/// documents left without any element link are removed. Duplicate link rows
/// collapse to a single weight-1 edge. One pruning pass suffices: a removed
/// document had no kept element, so dropping it cannot take any kept element
/// below the threshold.
pub fn build_pure<'a, I>(links: I) -> Result<Network, NetworkError>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut rows: Vec<(&str, &str)> = Vec::new();
    let mut seen: HashSet<(&str, &str)> = HashSet::new();
    for (element, document) in links {
        if element.is_empty() || document.is_empty() {
            return Err(NetworkError::EmptyId);
        }
        if seen.insert((element, document)) {
            rows.push((element, document));
        }
    }

    let mut docs_per_element: HashMap<&str, u32> = HashMap::new();
    for &(element, _) in &rows {
        *docs_per_element.entry(element).or_insert(0) += 1;
    }

    let mut nodes: Vec<NodeRecord> = Vec::new();
    let mut index: HashMap<&str, u32> = HashMap::new();
    let mut edges: Vec<EdgeRecord> = Vec::new();
    for &(element, document) in &rows {
        if docs_per_element[element] < 2 {
            continue;
        }
        let e_idx = *index.entry(element).or_insert_with(|| {
            nodes.push(NodeRecord {
                id: element.to_string(),
                kind: NodeKind::Element,
            });
            (nodes.len() - 1) as u32
        });
        if nodes[e_idx as usize].kind != NodeKind::Element {
            return Err(NetworkError::IdCollision(element.to_string()));
        }
        let d_idx = *index.entry(document).or_insert_with(|| {
            nodes.push(NodeRecord {
                id: document.to_string(),
                kind: NodeKind::Document,
            });
            (nodes.len() - 1) as u32
        });
        if nodes[d_idx as usize].kind != NodeKind::Document {
            return Err(NetworkError::IdCollision(document.to_string()));
        }
        let (a, b) = if e_idx < d_idx {
            (e_idx, d_idx)
        } else {
            (d_idx, e_idx)
        };
        edges.push(EdgeRecord { a, b, weight: 1.0 });
    }

    Ok(Network::new(Variant::Pure, nodes, edges))
}

/// Builds the document-only text similarity network.
///
/// Every document keeps its `k` highest-scoring pairs (ties at the cutoff
/// broken by the lexicographically smaller partner id); when both directions
/// select the same pair the weights are summed. Duplicate unordered score
/// rows collapse to the highest score. Isolated documents stay in the
/// network.
pub fn build_similarity<'a, D, S>(doc_ids: D, scores: S, k: usize) -> Result<Network, NetworkError>
where
    D: IntoIterator<Item = &'a str>,
    S: IntoIterator<Item = (&'a str, &'a str, f64)>,
{
    if k == 0 {
        return Err(NetworkError::InvalidK);
    }
    let mut nodes: Vec<NodeRecord> = Vec::new();
    let mut index: HashMap<&str, u32> = HashMap::new();
    for id in doc_ids {
        if id.is_empty() {
            return Err(NetworkError::EmptyId);
        }
        index.entry(id).or_insert_with(|| {
            nodes.push(NodeRecord {
                id: id.to_string(),
                kind: NodeKind::Document,
            });
            (nodes.len() - 1) as u32
        });
    }

    let mut pair_scores: HashMap<(u32, u32), f64> = HashMap::new();
    for (a, b, score) in scores {
        if !score.is_finite() {
            return Err(NetworkError::NonFiniteScore {
                a: a.to_string(),
                b: b.to_string(),
            });
        }
        if score <= 0.0 {
            return Err(NetworkError::NonPositiveScore {
                a: a.to_string(),
                b: b.to_string(),
                score,
            });
        }
        if a == b {
            return Err(NetworkError::SelfPair(a.to_string()));
        }
        let ai = *index
            .get(a)
            .ok_or_else(|| NetworkError::UnknownDocument(a.to_string()))?;
        let bi = *index
            .get(b)
            .ok_or_else(|| NetworkError::UnknownDocument(b.to_string()))?;
        let key = if ai < bi { (ai, bi) } else { (bi, ai) };
        let entry = pair_scores.entry(key).or_insert(score);
        if score > *entry {
            *entry = score;
        }
    }

    // Per-document candidate lists, then top-k selection per document.
    let mut candidates: Vec<Vec<(u32, f64)>> = vec![Vec::new(); nodes.len()];
    for (&(a, b), &score) in &pair_scores {
        candidates[a as usize].push((b, score));
        candidates[b as usize].push((a, score));
    }

    let mut edge_weights: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for (doc, mut cands) in candidates.into_iter().enumerate() {
        cands.sort_by(|x, y| {
            y.1.partial_cmp(&x.1)
                .unwrap()
                .then_with(|| nodes[x.0 as usize].id.cmp(&nodes[y.0 as usize].id))
        });
        for &(partner, score) in cands.iter().take(k) {
            let doc = doc as u32;
            let key = if doc < partner {
                (doc, partner)
            } else {
                (partner, doc)
            };
            *edge_weights.entry(key).or_insert(0.0) += score;
        }
    }

    let edges = edge_weights
        .into_iter()
        .map(|((a, b), weight)| EdgeRecord { a, b, weight })
        .collect();
    Ok(Network::new(Variant::Similarity, nodes, edges))
}

/// Returns a copy of the network with every edge weight multiplied so the
/// total edge weight equals `target_total`.
pub fn rescale_edges(network: &Network, target_total: f64) -> Result<Network, NetworkError> {
    if network.edge_count() == 0 {
        return Err(NetworkError::NoEdges);
    }
    if !target_total.is_finite() || target_total <= 0.0 {
        return Err(NetworkError::InvalidTarget(target_total));
    }
    let factor = target_total / network.total_edge_weight();
    let edges = network
        .edges()
        .iter()
        .map(|e| EdgeRecord {
            a: e.a,
            b: e.b,
            weight: e.weight * factor,
        })
        .collect();
    Ok(Network::new(
        network.variant(),
        network.nodes().to_vec(),
        edges,
    ))
}

/// Combines a pure network with an (already rescaled) similarity network:
/// the pure node set, plus the union of both edge collections. Document to
/// document and document to element edges can never collide, so edges are
/// concatenated as-is.
pub fn build_mixed(pure: &Network, similarity: &Network) -> Result<Network, NetworkError> {
    if pure.variant() != Variant::Pure {
        return Err(NetworkError::VariantMismatch {
            expected: Variant::Pure,
            got: pure.variant(),
        });
    }
    if similarity.variant() != Variant::Similarity {
        return Err(NetworkError::VariantMismatch {
            expected: Variant::Similarity,
            got: similarity.variant(),
        });
    }
    let mut remap: Vec<u32> = Vec::with_capacity(similarity.node_count());
    for node in similarity.nodes() {
        let idx = pure
            .node_index(&node.id)
            .ok_or_else(|| NetworkError::DocumentNotInPure(node.id.clone()))?;
        remap.push(idx);
    }
    let mut edges = pure.edges().to_vec();
    for e in similarity.edges() {
        let (a, b) = (remap[e.a as usize], remap[e.b as usize]);
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        edges.push(EdgeRecord {
            a,
            b,
            weight: e.weight,
        });
    }
    Ok(Network::new(Variant::Mixed, pure.nodes().to_vec(), edges))
}

/// Builds the extended citation network: all core documents as weight-1
/// nodes with core-to-core citation edges, plus every non-core document with
/// citation links to at least two distinct core documents as a weight-0 node.
/// Non-core to non-core links are discarded; duplicate citation pairs
/// collapse to a single weight-1 edge.
pub fn build_extended_citation<'a, D, C>(
    core_docs: D,
    citations: C,
) -> Result<Network, NetworkError>
where
    D: IntoIterator<Item = &'a str>,
    C: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut nodes: Vec<NodeRecord> = Vec::new();
    let mut index: HashMap<&str, u32> = HashMap::new();
    for id in core_docs {
        if id.is_empty() {
            return Err(NetworkError::EmptyId);
        }
        index.entry(id).or_insert_with(|| {
            nodes.push(NodeRecord {
                id: id.to_string(),
                kind: NodeKind::Document,
            });
            (nodes.len() - 1) as u32
        });
    }
    let core_count = nodes.len() as u32;

    // Deduplicate by unordered pair; split into core-core edges and
    // non-core attachment lists.
    let mut rows: Vec<(&str, &str)> = Vec::new();
    let mut seen: HashSet<(&str, &str)> = HashSet::new();
    for (a, b) in citations {
        if a.is_empty() || b.is_empty() {
            return Err(NetworkError::EmptyId);
        }
        if a == b {
            continue; // self-citation carries no structure
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if seen.insert(key) {
            rows.push(key);
        }
    }

    let mut edges: Vec<EdgeRecord> = Vec::new();
    let mut noncore_links: HashMap<&str, Vec<u32>> = HashMap::new();
    let mut noncore_order: Vec<&str> = Vec::new();
    for &(a, b) in &rows {
        match (index.get(a).copied(), index.get(b).copied()) {
            (Some(ai), Some(bi)) => {
                let (a, b) = if ai < bi { (ai, bi) } else { (bi, ai) };
                edges.push(EdgeRecord { a, b, weight: 1.0 });
            }
            (Some(ci), None) => {
                if !noncore_links.contains_key(b) {
                    noncore_order.push(b);
                }
                noncore_links.entry(b).or_default().push(ci);
            }
            (None, Some(ci)) => {
                if !noncore_links.contains_key(a) {
                    noncore_order.push(a);
                }
                noncore_links.entry(a).or_default().push(ci);
            }
            (None, None) => {}
        }
    }

    for id in noncore_order {
        let cores = &noncore_links[id];
        if cores.len() < 2 {
            continue;
        }
        nodes.push(NodeRecord {
            id: id.to_string(),
            kind: NodeKind::Element,
        });
        let n_idx = (nodes.len() - 1) as u32;
        for &core in cores {
            edges.push(EdgeRecord {
                a: core,
                b: n_idx,
                weight: 1.0,
            });
        }
    }
    debug_assert!(nodes[..core_count as usize]
        .iter()
        .all(|n| n.kind == NodeKind::Document));

    Ok(Network::new(Variant::ExtendedCitation, nodes, edges))
}
