//! Node-weighted Leiden clustering under the constant Potts model, plus
//! resolution-sweep generation and endpoint auto-calibration.

mod leiden;

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::network::{Network, NodeKind};
use crate::util::derive_seed;

use leiden::{leiden_flat, LeidenGraph};

/// Default number of Leiden cycles per clustering run. Each cycle restarts
/// local moving from the flat partition; runs stop early once a cycle finds
/// no improving move.
pub const DEFAULT_ITERATIONS: u32 = 10;

/// Probe cap per direction during gamma-range calibration.
const MAX_PROBES: u32 = 40;

#[derive(Debug, Error)]
pub enum ClusteringError {
    #[error("degenerate gamma range: require 0 < gamma_min < gamma_max, got [{0}, {1}]")]
    DegenerateRange(f64, f64),
    #[error("sweep count must be at least 2, got {0}")]
    InvalidCount(usize),
    #[error("sweep grid is too dense to stay strictly increasing")]
    GridTooDense,
    #[error("calibration requires at least 2 document nodes and 1 edge")]
    DegenerateNetwork,
}

/// Per-cluster tallies, indexed by cluster id.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSummary {
    pub documents: u32,
    pub elements: u32,
    pub node_weight: f64,
    pub internal_edge_weight: f64,
}

/// A complete node-to-cluster assignment at one resolution value.
///
/// Cluster ids are contiguous from 0 in order of first appearance over the
/// network's node order; no cluster is empty.
#[derive(Debug, Clone)]
pub struct ClusteringSolution {
    pub resolution: f64,
    pub seed: u64,
    pub iterations: u32,
    pub assignment: Vec<u32>,
    pub clusters: Vec<ClusterSummary>,
    pub quality: f64,
}

impl ClusteringSolution {
    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn total_documents(&self) -> u64 {
        self.clusters.iter().map(|c| c.documents as u64).sum()
    }

    /// Fraction of clusters holding at most one document node. Weight-0
    /// nodes attach to their neighbors at any resolution, so "singleton" is
    /// counted in documents, mirroring the quality function's accounting.
    pub fn singleton_cluster_fraction(&self) -> f64 {
        if self.clusters.is_empty() {
            return 0.0;
        }
        let singles = self.clusters.iter().filter(|c| c.documents <= 1).count();
        singles as f64 / self.clusters.len() as f64
    }

    /// Fraction of all document nodes held by the largest cluster.
    pub fn giant_document_fraction(&self) -> f64 {
        let total = self.total_documents();
        if total == 0 {
            return 0.0;
        }
        let max = self.clusters.iter().map(|c| c.documents).max().unwrap_or(0);
        max as f64 / total as f64
    }
}

/// A resolution sweep: strictly increasing gamma values plus the seeding and
/// iteration policy shared by all runs.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub gamma_values: Vec<f64>,
    pub seed: u64,
    pub iterations: u32,
}

/// Result of gamma-range calibration. `warnings` is non-empty when a probe
/// cap was hit and the best endpoint found so far was returned.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub warnings: Vec<String>,
}

/// Clusters the network at one resolution. Deterministic given
/// `(network, resolution, seed, iterations)`; a network with no edges yields
/// all-singleton output.
pub fn cluster(
    network: &Network,
    resolution: f64,
    seed: u64,
    iterations: u32,
) -> ClusteringSolution {
    assert!(
        resolution > 0.0 && resolution.is_finite(),
        "resolution must be positive"
    );
    assert!(iterations >= 1, "iterations must be positive");
    let graph = LeidenGraph::from_network(network);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flat = leiden_flat(&graph, resolution, &mut rng, iterations);
    build_solution(network, flat, resolution, seed, iterations)
}

/// Recomputes the constant Potts quality of an assignment from scratch.
pub fn cpm_quality(network: &Network, assignment: &[u32], gamma: f64) -> f64 {
    assert_eq!(assignment.len(), network.node_count());
    let k = assignment.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut internal = vec![0.0f64; k];
    let mut weight = vec![0.0f64; k];
    for e in network.edges() {
        if assignment[e.a as usize] == assignment[e.b as usize] {
            internal[assignment[e.a as usize] as usize] += e.weight;
        }
    }
    for (v, node) in network.nodes().iter().enumerate() {
        weight[assignment[v] as usize] += node.weight();
    }
    let mut quality = 0.0;
    for c in 0..k {
        quality += internal[c] - gamma * weight[c] * (weight[c] - 1.0) / 2.0;
    }
    quality
}

fn build_solution(
    network: &Network,
    mut flat: Vec<u32>,
    resolution: f64,
    seed: u64,
    iterations: u32,
) -> ClusteringSolution {
    // Renumber by first appearance in node order.
    let max_id = flat.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut remap = vec![u32::MAX; max_id];
    let mut next = 0u32;
    for slot in flat.iter_mut() {
        if remap[*slot as usize] == u32::MAX {
            remap[*slot as usize] = next;
            next += 1;
        }
        *slot = remap[*slot as usize];
    }

    let mut clusters = vec![
        ClusterSummary {
            documents: 0,
            elements: 0,
            node_weight: 0.0,
            internal_edge_weight: 0.0,
        };
        next as usize
    ];
    for (v, node) in network.nodes().iter().enumerate() {
        let c = &mut clusters[flat[v] as usize];
        match node.kind {
            NodeKind::Document => c.documents += 1,
            NodeKind::Element => c.elements += 1,
        }
        c.node_weight += node.weight();
    }
    for e in network.edges() {
        if flat[e.a as usize] == flat[e.b as usize] {
            clusters[flat[e.a as usize] as usize].internal_edge_weight += e.weight;
        }
    }
    let quality = clusters
        .iter()
        .map(|c| c.internal_edge_weight - resolution * c.node_weight * (c.node_weight - 1.0) / 2.0)
        .sum();

    ClusteringSolution {
        resolution,
        seed,
        iterations,
        assignment: flat,
        clusters,
        quality,
    }
}

/// Finds sweep endpoints by doubling/halving probes from gamma 1: the upper
/// endpoint makes at least half of the clusters document-singletons, the
/// lower endpoint puts at least half of the document nodes in one cluster.
pub fn calibrate_gamma_range(network: &Network, seed: u64) -> Result<Calibration, ClusteringError> {
    if network.document_count() < 2 || network.edge_count() == 0 {
        return Err(ClusteringError::DegenerateNetwork);
    }
    let mut warnings = Vec::new();

    let mut gamma_max = 1.0f64;
    let mut probes = 0;
    loop {
        let sol = cluster(network, gamma_max, seed, DEFAULT_ITERATIONS);
        if sol.singleton_cluster_fraction() >= 0.5 {
            break;
        }
        probes += 1;
        if probes >= MAX_PROBES {
            warnings.push(format!(
                "gamma_max probe cap reached at {gamma_max}; singleton fraction still {:.3}",
                sol.singleton_cluster_fraction()
            ));
            break;
        }
        gamma_max *= 2.0;
    }

    let mut gamma_min = gamma_max.min(1.0) / 2.0;
    probes = 0;
    loop {
        let sol = cluster(network, gamma_min, seed, DEFAULT_ITERATIONS);
        if sol.giant_document_fraction() >= 0.5 {
            break;
        }
        probes += 1;
        if probes >= MAX_PROBES {
            warnings.push(format!(
                "gamma_min probe cap reached at {gamma_min}; giant-cluster fraction still {:.3}",
                sol.giant_document_fraction()
            ));
            break;
        }
        gamma_min /= 2.0;
    }

    Ok(Calibration {
        gamma_min,
        gamma_max,
        warnings,
    })
}

/// Geometrically spaced resolution grid from `gamma_min` to `gamma_max`
/// inclusive, strictly increasing.
pub fn generate_sweep(
    gamma_min: f64,
    gamma_max: f64,
    count: usize,
    seed: u64,
    iterations: u32,
) -> Result<SweepPlan, ClusteringError> {
    if !(gamma_min > 0.0 && gamma_min < gamma_max) {
        return Err(ClusteringError::DegenerateRange(gamma_min, gamma_max));
    }
    if count < 2 {
        return Err(ClusteringError::InvalidCount(count));
    }
    let ratio = gamma_max / gamma_min;
    let mut gamma_values = Vec::with_capacity(count);
    for i in 0..count {
        let t = i as f64 / (count - 1) as f64;
        gamma_values.push(gamma_min * ratio.powf(t));
    }
    gamma_values[0] = gamma_min;
    *gamma_values.last_mut().unwrap() = gamma_max;
    if gamma_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ClusteringError::GridTooDense);
    }
    Ok(SweepPlan {
        gamma_values,
        seed,
        iterations,
    })
}

/// Derives an independent, platform-stable seed for a numbered work stream
/// (sweep positions, per-network streams).
pub fn derive_stream_seed(seed: u64, index: u64) -> u64 {
    derive_seed(seed, index)
}

/// Runs one clustering per gamma value. Each run is independently seeded
/// from `(plan.seed, index)`, so results are identical regardless of worker
/// count; output order matches the plan.
pub fn run_sweep(network: &Network, plan: &SweepPlan) -> Vec<ClusteringSolution> {
    plan.gamma_values
        .par_iter()
        .enumerate()
        .map(|(i, &gamma)| {
            cluster(
                network,
                gamma,
                derive_seed(plan.seed, i as u64),
                plan.iterations,
            )
        })
        .collect()
}

/// Writes a solution as one header row carrying gamma, seed and quality,
/// then one `node_id<TAB>cluster_id` row per node.
pub fn export_solution<W: Write>(
    solution: &ClusteringSolution,
    network: &Network,
    mut w: W,
) -> io::Result<()> {
    writeln!(
        w,
        "gamma={}\tseed={}\tquality={}",
        solution.resolution, solution.seed, solution.quality
    )?;
    for (v, node) in network.nodes().iter().enumerate() {
        writeln!(w, "{}\t{}", node.id, solution.assignment[v])?;
    }
    Ok(())
}
