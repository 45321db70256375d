//! Brute-force oracles. Everything here recomputes results by enumeration
//! or direct recounting and stays independent of the implementation paths
//! it is used to check.

use std::collections::HashSet;

use crate::network::{Network, NodeKind};

use super::SynthError;

/// Exhaustive enumeration is capped at this many nodes (Bell(10) = 115975).
pub const MAX_EXHAUSTIVE_NODES: usize = 10;

#[derive(Debug, Clone)]
pub struct CpmOptimum {
    pub gamma: f64,
    pub quality: f64,
    pub partition: Vec<u32>,
}

/// Exact optimal constant-Potts quality over all partitions of the network's
/// nodes, found by exhaustive enumeration.
pub fn exhaustive_cpm_optimum(network: &Network, gamma: f64) -> Result<CpmOptimum, SynthError> {
    Ok(exhaustive_cpm_optima(network, &[gamma])?.pop().unwrap())
}

/// Single-enumeration variant evaluating several gamma values at once: the
/// internal weight and penalty of a partition do not depend on gamma, so each
/// leaf updates every gamma's best in one pass.
pub fn exhaustive_cpm_optima(
    network: &Network,
    gammas: &[f64],
) -> Result<Vec<CpmOptimum>, SynthError> {
    let n = network.node_count();
    if n > MAX_EXHAUSTIVE_NODES {
        return Err(SynthError::TooManyNodes(n));
    }
    let mut adj = vec![vec![0.0f64; n]; n];
    for e in network.edges() {
        adj[e.a as usize][e.b as usize] += e.weight;
        adj[e.b as usize][e.a as usize] += e.weight;
    }
    let node_weight: Vec<f64> = network.nodes().iter().map(|r| r.weight()).collect();

    let mut best: Vec<CpmOptimum> = gammas
        .iter()
        .map(|&gamma| CpmOptimum {
            gamma,
            quality: f64::NEG_INFINITY,
            partition: Vec::new(),
        })
        .collect();
    if n == 0 {
        for b in &mut best {
            b.quality = 0.0;
        }
        return Ok(best);
    }

    struct State<'a> {
        adj: &'a [Vec<f64>],
        node_weight: &'a [f64],
        assignment: Vec<u32>,
        blocks: Vec<Vec<usize>>,
        block_weight: Vec<f64>,
        best: Vec<CpmOptimum>,
    }

    fn recurse(s: &mut State<'_>, v: usize, internal: f64, penalty: f64) {
        let n = s.node_weight.len();
        if v == n {
            for b in &mut s.best {
                let quality = internal - b.gamma * penalty;
                if quality > b.quality {
                    b.quality = quality;
                    b.partition = s.assignment.clone();
                }
            }
            return;
        }
        let w_v = s.node_weight[v];
        let open = s.blocks.len();
        for b in 0..=open {
            let (d_internal, d_penalty) = if b < open {
                let gained: f64 = s.blocks[b].iter().map(|&u| s.adj[v][u]).sum();
                let w = s.block_weight[b];
                let d_pen = (w + w_v) * (w + w_v - 1.0) / 2.0 - w * (w - 1.0) / 2.0;
                (gained, d_pen)
            } else {
                (0.0, w_v * (w_v - 1.0) / 2.0)
            };
            if b == open {
                s.blocks.push(vec![v]);
                s.block_weight.push(w_v);
            } else {
                s.blocks[b].push(v);
                s.block_weight[b] += w_v;
            }
            s.assignment[v] = b as u32;
            recurse(s, v + 1, internal + d_internal, penalty + d_penalty);
            if b == open {
                s.blocks.pop();
                s.block_weight.pop();
            } else {
                s.blocks[b].pop();
                s.block_weight[b] -= w_v;
            }
        }
    }

    let mut state = State {
        adj: &adj,
        node_weight: &node_weight,
        assignment: vec![0; n],
        blocks: Vec::new(),
        block_weight: Vec::new(),
        best,
    };
    recurse(&mut state, 0, 0.0, 0.0);
    best = state.best;
    Ok(best)
}

/// Cluster selection and purity recomputed by straightforward recounting.
#[derive(Debug, Clone, PartialEq)]
pub struct RefSelection {
    pub threshold: u64,
    pub nsc: usize,
    pub covered_topic_docs: u64,
    pub purity: f64,
}

/// Recounts selection and purity from a raw assignment: clusters holding
/// topic documents are ordered by topic count (descending), then total
/// documents (ascending), then cluster id, and taken until the coverage
/// threshold is met.
pub fn reference_purity(
    assignment: &[u32],
    is_document: &[bool],
    topic_nodes: &[u32],
    coverage: f64,
) -> RefSelection {
    assert_eq!(assignment.len(), is_document.len());
    let k = assignment.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut docs = vec![0u64; k];
    let mut topic = vec![0u64; k];
    for (v, &c) in assignment.iter().enumerate() {
        if is_document[v] {
            docs[c as usize] += 1;
        }
    }
    let topic_set: HashSet<u32> = topic_nodes.iter().copied().collect();
    for &v in &topic_set {
        topic[assignment[v as usize] as usize] += 1;
    }

    let threshold = (coverage * topic_set.len() as f64).ceil() as u64;
    let mut candidates: Vec<usize> = (0..k).filter(|&c| topic[c] > 0).collect();
    candidates.sort_by(|&a, &b| {
        topic[b]
            .cmp(&topic[a])
            .then(docs[a].cmp(&docs[b]))
            .then(a.cmp(&b))
    });

    let mut covered = 0u64;
    let mut total = 0u64;
    let mut nsc = 0usize;
    for &c in &candidates {
        covered += topic[c];
        total += docs[c];
        nsc += 1;
        if covered >= threshold {
            break;
        }
    }
    RefSelection {
        threshold,
        nsc,
        covered_topic_docs: covered,
        purity: covered as f64 / total as f64,
    }
}

/// Reference complete-linkage grouping over Jaccard distance, recomputing
/// every group distance from the raw document sets at each step.
///
/// Groups merge while the smallest complete-linkage distance does not exceed
/// `threshold`; ties are broken by the lexicographically smallest (key_a,
/// key_b) pair, where a group's key is its smallest member code. Returns
/// groups of indices into `topics`.
pub fn reference_complete_linkage(
    topics: &[(String, Vec<u32>)],
    threshold: f64,
) -> Vec<Vec<usize>> {
    fn jaccard_distance(a: &[u32], b: &[u32]) -> f64 {
        let sa: HashSet<u32> = a.iter().copied().collect();
        let sb: HashSet<u32> = b.iter().copied().collect();
        let inter = sa.intersection(&sb).count();
        let union = sa.union(&sb).count();
        if union == 0 {
            return 0.0;
        }
        1.0 - inter as f64 / union as f64
    }

    let mut groups: Vec<Vec<usize>> = (0..topics.len()).map(|i| vec![i]).collect();
    loop {
        if groups.len() < 2 {
            break;
        }
        let key = |g: &[usize]| -> &str {
            g.iter()
                .map(|&i| topics[i].0.as_str())
                .min()
                .expect("group is non-empty")
        };
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..groups.len() {
            for j in (i + 1)..groups.len() {
                let dist = groups[i]
                    .iter()
                    .flat_map(|&a| {
                        groups[j]
                            .iter()
                            .map(move |&b| jaccard_distance(&topics[a].1, &topics[b].1))
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                let (lo, hi) = {
                    let (ki, kj) = (key(&groups[i]), key(&groups[j]));
                    if ki <= kj { (ki, kj) } else { (kj, ki) }
                };
                let better = match &best {
                    None => true,
                    Some((d, bi, bj)) => {
                        let (blo, bhi) = {
                            let (ki, kj) = (key(&groups[*bi]), key(&groups[*bj]));
                            if ki <= kj { (ki, kj) } else { (kj, ki) }
                        };
                        dist < *d || (dist == *d && (lo, hi) < (blo, bhi))
                    }
                };
                if better {
                    best = Some((dist, i, j));
                }
            }
        }
        match best {
            Some((dist, i, j)) if dist <= threshold => {
                let merged = groups.remove(j);
                groups[i].extend(merged);
            }
            _ => break,
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort_by_key(|g| g[0]);
    groups
}

/// Identifies the nodes that are documents, for feeding [`reference_purity`].
pub fn document_mask(network: &Network) -> Vec<bool> {
    network
        .nodes()
        .iter()
        .map(|n| n.kind == NodeKind::Document)
        .collect()
}
