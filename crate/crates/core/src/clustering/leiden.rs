//! Leiden engine for the constant Potts model with node weights.
//!
//! Quality of a partition: sum over clusters of
//! `W_in(c) - gamma * w_c * (w_c - 1) / 2`, where `W_in(c)` is the total
//! internal edge weight and `w_c` the total node weight of cluster `c`.
//! Weight-0 nodes contribute edges but never the size penalty.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

use crate::network::Network;

/// Gains below this are treated as floating-point noise, not improvements.
const MIN_GAIN: f64 = 1e-12;

/// Flat weighted graph in CSR form. Self-loops are kept out of the adjacency
/// and tracked separately (they arise on aggregate nodes).
#[derive(Debug, Clone)]
pub(crate) struct LeidenGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    pub(crate) node_weight: Vec<f64>,
    self_loop: Vec<f64>,
}

impl LeidenGraph {
    pub(crate) fn from_network(net: &Network) -> Self {
        let n = net.node_count();
        let mut deg = vec![0usize; n];
        for e in net.edges() {
            debug_assert_ne!(e.a, e.b, "networks carry no self-loops");
            deg[e.a as usize] += 1;
            deg[e.b as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + deg[v];
        }
        let mut targets = vec![0u32; offsets[n]];
        let mut weights = vec![0.0f64; offsets[n]];
        let mut cursor = offsets.clone();
        for e in net.edges() {
            targets[cursor[e.a as usize]] = e.b;
            weights[cursor[e.a as usize]] = e.weight;
            cursor[e.a as usize] += 1;
            targets[cursor[e.b as usize]] = e.a;
            weights[cursor[e.b as usize]] = e.weight;
            cursor[e.b as usize] += 1;
        }
        let node_weight = net.nodes().iter().map(|r| r.weight()).collect();
        LeidenGraph {
            offsets,
            targets,
            weights,
            node_weight,
            self_loop: vec![0.0; n],
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.node_weight.len()
    }

    fn neighbors(&self, v: usize) -> impl Iterator<Item = (u32, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }
}

/// Runs up to `iterations` full Leiden cycles on `graph`, starting from the
/// singleton partition, and returns the flat membership. Stops early once a
/// cycle yields no improving move.
pub(crate) fn leiden_flat(
    graph: &LeidenGraph,
    gamma: f64,
    rng: &mut ChaCha8Rng,
    iterations: u32,
) -> Vec<u32> {
    let mut flat: Vec<u32> = (0..graph.len() as u32).collect();
    for _ in 0..iterations {
        let improved = leiden_cycle(graph, &mut flat, gamma, rng);
        if !improved {
            break;
        }
    }
    flat
}

/// One Leiden cycle: local moving, refinement, and aggregation repeated
/// until the level graph stops coarsening. `flat` is updated in place.
fn leiden_cycle(base: &LeidenGraph, flat: &mut [u32], gamma: f64, rng: &mut ChaCha8Rng) -> bool {
    let mut owned: Option<LeidenGraph> = None;
    let mut membership: Vec<u32> = flat.to_vec();
    let mut orig_to_level: Vec<u32> = (0..base.len() as u32).collect();
    let mut improved = false;

    loop {
        let g = owned.as_ref().unwrap_or(base);
        improved |= local_move(g, &mut membership, gamma, rng);

        let comm_count = renumber_dense(&mut membership);
        if comm_count == g.len() {
            break; // every node is its own community; nothing to aggregate
        }
        let mut refined = refine(g, &membership, gamma, rng);
        let refined_count = renumber_dense(&mut refined);
        if refined_count == g.len() {
            break; // refinement kept all singletons; aggregation is a no-op
        }

        let agg = aggregate(g, &refined, refined_count);
        let mut next_membership = vec![0u32; refined_count];
        for v in 0..g.len() {
            next_membership[refined[v] as usize] = membership[v];
        }
        for slot in orig_to_level.iter_mut() {
            *slot = refined[*slot as usize];
        }
        membership = next_membership;
        owned = Some(agg);
    }

    for (i, slot) in flat.iter_mut().enumerate() {
        *slot = membership[orig_to_level[i] as usize];
    }
    improved
}

/// Queue-based local moving phase. Nodes move to the neighbor community (or
/// a fresh empty community) with the largest positive quality gain.
/// Isolated nodes are never visited, so their assignments and the consumed
/// randomness are independent of them.
fn local_move(g: &LeidenGraph, membership: &mut [u32], gamma: f64, rng: &mut ChaCha8Rng) -> bool {
    let n = g.len();
    let mut comm_count = 0u32;
    for &c in membership.iter() {
        comm_count = comm_count.max(c + 1);
    }
    let mut comm_weight = vec![0.0f64; comm_count as usize];
    let mut comm_nodes = vec![0u32; comm_count as usize];
    for v in 0..n {
        comm_weight[membership[v] as usize] += g.node_weight[v];
        comm_nodes[membership[v] as usize] += 1;
    }

    let mut active: Vec<u32> = (0..n as u32).filter(|&v| g.degree(v as usize) > 0).collect();
    active.shuffle(rng);
    let mut queue: VecDeque<u32> = active.into();
    let mut in_queue = vec![false; n];
    for &v in &queue {
        in_queue[v as usize] = true;
    }

    let mut edge_to: Vec<f64> = vec![0.0; comm_weight.len()];
    let mut touched: Vec<u32> = Vec::with_capacity(64);
    let mut improved = false;

    while let Some(v) = queue.pop_front() {
        let v = v as usize;
        in_queue[v] = false;
        let cur = membership[v];

        for (u, w) in g.neighbors(v) {
            let c = membership[u as usize];
            if edge_to[c as usize] == 0.0 {
                touched.push(c);
            }
            edge_to[c as usize] += w;
        }

        let w_v = g.node_weight[v];
        let w_cur_rest = comm_weight[cur as usize] - w_v;
        let base = edge_to[cur as usize] - gamma * w_v * w_cur_rest;

        let mut best = cur;
        let mut best_delta = 0.0f64;
        for &c in &touched {
            if c == cur {
                continue;
            }
            let delta = (edge_to[c as usize] - gamma * w_v * comm_weight[c as usize]) - base;
            if delta > best_delta {
                best = c;
                best_delta = delta;
            }
        }
        // Splitting off into a fresh community: gain is minus the base term.
        if comm_nodes[cur as usize] > 1 {
            let delta = -base;
            if delta > best_delta {
                best = u32::MAX;
                best_delta = delta;
            }
        }

        if best_delta > MIN_GAIN {
            let target = if best == u32::MAX {
                comm_weight.push(0.0);
                comm_nodes.push(0);
                edge_to.push(0.0);
                (comm_weight.len() - 1) as u32
            } else {
                best
            };
            comm_weight[cur as usize] -= w_v;
            comm_nodes[cur as usize] -= 1;
            comm_weight[target as usize] += w_v;
            comm_nodes[target as usize] += 1;
            membership[v] = target;
            improved = true;
            for (u, _) in g.neighbors(v) {
                let u = u as usize;
                if membership[u] != target && !in_queue[u] {
                    in_queue[u] = true;
                    queue.push_back(u as u32);
                }
            }
        }

        for &c in &touched {
            edge_to[c as usize] = 0.0;
        }
        touched.clear();
    }
    improved
}

/// Refinement phase: within each community, nodes start as singleton
/// sub-communities and singletons greedily merge into the best-gain
/// sub-community of the same parent community.
fn refine(g: &LeidenGraph, membership: &[u32], gamma: f64, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let n = g.len();
    let mut refined: Vec<u32> = (0..n as u32).collect();
    let mut sub_weight: Vec<f64> = g.node_weight.clone();
    let mut sub_size: Vec<u32> = vec![1; n];

    let mut order: Vec<u32> = (0..n as u32).filter(|&v| g.degree(v as usize) > 0).collect();
    order.shuffle(rng);

    let mut edge_to: Vec<f64> = vec![0.0; n];
    let mut touched: Vec<u32> = Vec::with_capacity(32);

    for &v in &order {
        let v = v as usize;
        if sub_size[refined[v] as usize] > 1 {
            continue; // only still-singleton nodes may merge
        }
        let home = membership[v];
        for (u, w) in g.neighbors(v) {
            let u = u as usize;
            if membership[u] != home {
                continue;
            }
            let s = refined[u];
            if edge_to[s as usize] == 0.0 {
                touched.push(s);
            }
            edge_to[s as usize] += w;
        }

        let w_v = g.node_weight[v];
        let own = refined[v];
        let mut best = own;
        let mut best_delta = 0.0f64;
        for &s in &touched {
            if s == own {
                continue;
            }
            let delta = edge_to[s as usize] - gamma * w_v * sub_weight[s as usize];
            if delta > best_delta {
                best = s;
                best_delta = delta;
            }
        }
        if best != own && best_delta > MIN_GAIN {
            sub_weight[own as usize] -= w_v;
            sub_size[own as usize] -= 1;
            sub_weight[best as usize] += w_v;
            sub_size[best as usize] += 1;
            refined[v] = best;
        }

        for &s in &touched {
            edge_to[s as usize] = 0.0;
        }
        touched.clear();
    }
    refined
}

/// Renumbers community ids densely by first appearance in node order.
/// Returns the number of communities.
fn renumber_dense(membership: &mut [u32]) -> usize {
    let mut remap: Vec<u32> = vec![u32::MAX; membership.len().max(
        membership.iter().map(|&c| c as usize + 1).max().unwrap_or(0),
    )];
    let mut next = 0u32;
    for slot in membership.iter_mut() {
        let c = *slot as usize;
        if remap[c] == u32::MAX {
            remap[c] = next;
            next += 1;
        }
        *slot = remap[c];
    }
    next as usize
}

/// Collapses each refined sub-community into a single aggregate node.
fn aggregate(g: &LeidenGraph, refined: &[u32], n_agg: usize) -> LeidenGraph {
    let mut node_weight = vec![0.0f64; n_agg];
    let mut self_loop = vec![0.0f64; n_agg];
    for (v, &rv) in refined.iter().enumerate() {
        node_weight[rv as usize] += g.node_weight[v];
        self_loop[rv as usize] += g.self_loop[v];
    }

    let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_agg];
    for (v, &rv) in refined.iter().enumerate() {
        for (u, w) in g.neighbors(v) {
            if (u as usize) <= v {
                continue; // each undirected edge once
            }
            let ru = refined[u as usize];
            if ru == rv {
                self_loop[rv as usize] += w;
            } else {
                adj[rv as usize].push((ru, w));
                adj[ru as usize].push((rv, w));
            }
        }
    }

    let mut offsets = vec![0usize; n_agg + 1];
    let mut targets = Vec::new();
    let mut weights = Vec::new();
    for (r, mut list) in adj.into_iter().enumerate() {
        list.sort_unstable_by_key(|&(t, _)| t);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(list.len());
        for (t, w) in list {
            match merged.last_mut() {
                Some(last) if last.0 == t => last.1 += w,
                _ => merged.push((t, w)),
            }
        }
        for (t, w) in merged {
            targets.push(t);
            weights.push(w);
        }
        offsets[r + 1] = targets.len();
    }

    LeidenGraph {
        offsets,
        targets,
        weights,
        node_weight,
        self_loop,
    }
}
