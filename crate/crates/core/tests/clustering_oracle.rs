//! Cross-checks the Leiden implementation against exhaustive enumeration
//! and the analytic gamma limits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scimap::clustering::{cluster, cpm_quality, DEFAULT_ITERATIONS};
use scimap::network::{EdgeRecord, Network, NodeKind, NodeRecord, Variant};
use scimap::synth::{exhaustive_cpm_optima, exhaustive_cpm_optimum};

fn random_network(rng: &mut ChaCha8Rng, connected: bool) -> Network {
    loop {
        let n_docs = rng.random_range(4..=8usize);
        let n_elems = rng.random_range(0..=2usize);
        let mut nodes: Vec<NodeRecord> = (0..n_docs)
            .map(|i| NodeRecord {
                id: format!("d{i}"),
                kind: NodeKind::Document,
            })
            .collect();
        let unit_weights = rng.random_bool(0.5);
        let mut edges: Vec<EdgeRecord> = Vec::new();
        for a in 0..n_docs {
            for b in (a + 1)..n_docs {
                if rng.random_bool(0.4) {
                    let weight = if unit_weights {
                        1.0
                    } else {
                        rng.random_range(0.2..2.0)
                    };
                    edges.push(EdgeRecord {
                        a: a as u32,
                        b: b as u32,
                        weight,
                    });
                }
            }
        }
        for e in 0..n_elems {
            nodes.push(NodeRecord {
                id: format!("e{e}"),
                kind: NodeKind::Element,
            });
            let idx = (n_docs + e) as u32;
            let first = rng.random_range(0..n_docs) as u32;
            let mut second = rng.random_range(0..n_docs) as u32;
            while second == first {
                second = rng.random_range(0..n_docs) as u32;
            }
            for d in [first, second] {
                edges.push(EdgeRecord {
                    a: d,
                    b: idx,
                    weight: 1.0,
                });
            }
        }
        let net = Network::from_parts(Variant::Mixed, nodes, edges).unwrap();
        if !connected || is_connected(&net) {
            return net;
        }
    }
}

fn is_connected(net: &Network) -> bool {
    let n = net.node_count();
    if n == 0 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for e in net.edges() {
        adj[e.a as usize].push(e.b as usize);
        adj[e.b as usize].push(e.a as usize);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

#[test]
fn leiden_matches_exhaustive_optimum_on_small_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut trials = 0usize;
    let mut matches = 0usize;
    for _ in 0..60 {
        let net = random_network(&mut rng, true);
        let gammas: Vec<f64> = (0..3)
            .map(|_| 10f64.powf(rng.random_range(-1.3..0.7)))
            .collect();
        let optima = exhaustive_cpm_optima(&net, &gammas).unwrap();
        for (opt, &gamma) in optima.iter().zip(&gammas) {
            for seed in [1u64, 2] {
                let sol = cluster(&net, gamma, seed, DEFAULT_ITERATIONS);
                assert!(
                    sol.quality <= opt.quality + 1e-9,
                    "Leiden exceeded the exhaustive optimum: {} > {} (gamma {gamma})",
                    sol.quality,
                    opt.quality
                );
                trials += 1;
                if (sol.quality - opt.quality).abs() <= 1e-9 * opt.quality.abs().max(1.0) {
                    matches += 1;
                }
            }
        }
    }
    let rate = matches as f64 / trials as f64;
    assert!(
        rate >= 0.95,
        "optimum match rate {rate:.3} ({matches}/{trials}) below 0.95"
    );
}

#[test]
fn single_cluster_attained_below_gamma_floor() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let net = random_network(&mut rng, true);
        let min_weight = net
            .edges()
            .iter()
            .map(|e| e.weight)
            .fold(f64::INFINITY, f64::min);
        let total_weight: f64 = net.nodes().iter().map(|n| n.weight()).sum();
        let gamma = 0.5 * min_weight / (total_weight * (total_weight - 1.0) / 2.0);
        let sol = cluster(&net, gamma, 3, DEFAULT_ITERATIONS);
        assert_eq!(
            sol.cluster_count(),
            1,
            "connected network should collapse at gamma {gamma}"
        );
        // The single-cluster partition is at least as good as any other:
        // spot-check against the exhaustive optimum.
        let opt = exhaustive_cpm_optimum(&net, gamma).unwrap();
        assert!((sol.quality - opt.quality).abs() <= 1e-9 * opt.quality.abs().max(1.0));
    }
}

#[test]
fn singletons_attained_above_max_edge_weight_on_document_networks() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        // Document-only graphs: weight-0 nodes attach to neighbors for free
        // at any gamma, so the all-singleton limit is a document-network
        // statement.
        let net = loop {
            let candidate = random_network(&mut rng, false);
            if candidate.nodes().iter().all(|n| n.kind == NodeKind::Document) {
                break candidate;
            }
        };
        let max_weight = net.edges().iter().map(|e| e.weight).fold(0.0, f64::max);
        let gamma = max_weight * 1.01 + 0.01;
        let sol = cluster(&net, gamma, 4, DEFAULT_ITERATIONS);
        assert_eq!(sol.cluster_count(), net.node_count());
        assert_eq!(sol.quality, 0.0);
    }
}

#[test]
fn reported_quality_matches_recomputation_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..40 {
        let net = random_network(&mut rng, false);
        let gamma = 10f64.powf(rng.random_range(-1.5..1.0));
        let sol = cluster(&net, gamma, 1, DEFAULT_ITERATIONS);
        let recomputed = cpm_quality(&net, &sol.assignment, gamma);
        assert!(
            (sol.quality - recomputed).abs() <= 1e-9 * recomputed.abs().max(1.0),
            "{} vs {}",
            sol.quality,
            recomputed
        );
        // Contiguous cluster ids, no empty clusters.
        let mut seen = vec![false; sol.cluster_count()];
        for &c in &sol.assignment {
            seen[c as usize] = true;
        }
        assert!(seen.into_iter().all(|s| s));
    }
}
