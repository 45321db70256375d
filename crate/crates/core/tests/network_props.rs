//! Property tests for the network builders.

use proptest::prelude::*;
use std::collections::{HashMap, HashSet};

use scimap::network::{
    build_mixed, build_pure, build_similarity, rescale_edges, NodeKind, WEIGHT_REL_TOL,
};

fn link_rows() -> impl Strategy<Value = Vec<(String, String)>> {
    proptest::collection::vec(
        (0u8..12, 0u8..20).prop_map(|(e, d)| (format!("e{e}"), format!("d{d}"))),
        0..60,
    )
}

fn score_rows() -> impl Strategy<Value = Vec<(u8, u8, f64)>> {
    proptest::collection::vec((0u8..15, 0u8..15, 0.01f64..1.0), 0..80)
}

proptest! {
    #[test]
    fn pure_invariants_hold(rows in link_rows()) {
        let net = build_pure(rows.iter().map(|(e, d)| (e.as_str(), d.as_str()))).unwrap();
        let deg = net.degrees();
        for (i, node) in net.nodes().iter().enumerate() {
            match node.kind {
                NodeKind::Element => prop_assert!(deg[i] >= 2, "element {} degree {}", node.id, deg[i]),
                NodeKind::Document => prop_assert!(deg[i] >= 1, "document {} degree {}", node.id, deg[i]),
            }
        }
        for e in net.edges() {
            let kinds = (net.node(e.a).kind, net.node(e.b).kind);
            prop_assert!(
                matches!(kinds, (NodeKind::Document, NodeKind::Element) | (NodeKind::Element, NodeKind::Document))
            );
            prop_assert_eq!(e.weight, 1.0);
        }

        // Idempotence: rebuilding from the surviving links changes nothing.
        let surviving: Vec<(String, String)> = net
            .edges()
            .iter()
            .map(|e| {
                let (x, y) = (net.node(e.a), net.node(e.b));
                if x.kind == NodeKind::Element {
                    (x.id.clone(), y.id.clone())
                } else {
                    (y.id.clone(), x.id.clone())
                }
            })
            .collect();
        let again = build_pure(surviving.iter().map(|(e, d)| (e.as_str(), d.as_str()))).unwrap();
        prop_assert_eq!(again.node_count(), net.node_count());
        prop_assert_eq!(again.edge_count(), net.edge_count());
    }

    #[test]
    fn similarity_edges_come_from_top_k(rows in score_rows(), k in 1usize..5) {
        let docs: Vec<String> = (0..15).map(|i| format!("d{i:02}")).collect();
        // Deduplicate pairs up front keeping the max score, mirroring the
        // builder's stated policy, so the oracle sees the same input.
        let mut dedup: HashMap<(String, String), f64> = HashMap::new();
        for (a, b, s) in &rows {
            if a == b {
                continue;
            }
            let (a, b) = (format!("d{a:02}"), format!("d{b:02}"));
            let key = if a < b { (a, b) } else { (b, a) };
            let e = dedup.entry(key).or_insert(*s);
            if *s > *e { *e = *s; }
        }
        let scores: Vec<(String, String, f64)> = dedup
            .iter()
            .map(|((a, b), s)| (a.clone(), b.clone(), *s))
            .collect();

        let net = build_similarity(
            docs.iter().map(String::as_str),
            scores.iter().map(|(a, b, s)| (a.as_str(), b.as_str(), *s)),
            k,
        )
        .unwrap();

        // Brute-force re-ranking: an edge must be in at least one endpoint's
        // top-k candidate list.
        let top_k = |doc: &str| -> HashSet<String> {
            let mut cands: Vec<(&str, f64)> = scores
                .iter()
                .filter_map(|(a, b, s)| {
                    if a == doc {
                        Some((b.as_str(), *s))
                    } else if b == doc {
                        Some((a.as_str(), *s))
                    } else {
                        None
                    }
                })
                .collect();
            cands.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then(x.0.cmp(y.0)));
            cands.into_iter().take(k).map(|(p, _)| p.to_string()).collect()
        };
        for e in net.edges() {
            let (a, b) = (&net.node(e.a).id, &net.node(e.b).id);
            prop_assert!(
                top_k(a).contains(b) || top_k(b).contains(a),
                "edge ({a}, {b}) not justified by any top-{k} list"
            );
        }
    }

    #[test]
    fn rescale_hits_target_total(rows in score_rows(), target in 0.1f64..1000.0) {
        let docs: Vec<String> = (0..15).map(|i| format!("d{i:02}")).collect();
        let mut dedup: HashMap<(u8, u8), f64> = HashMap::new();
        for (a, b, s) in rows {
            if a != b {
                dedup.insert((a.min(b), a.max(b)), s);
            }
        }
        let scores: Vec<(String, String, f64)> = dedup
            .into_iter()
            .map(|((a, b), s)| (format!("d{a:02}"), format!("d{b:02}"), s))
            .collect();
        let net = build_similarity(
            docs.iter().map(String::as_str),
            scores.iter().map(|(a, b, s)| (a.as_str(), b.as_str(), *s)),
            3,
        )
        .unwrap();
        prop_assume!(net.edge_count() > 0);
        let scaled = rescale_edges(&net, target).unwrap();
        prop_assert!((scaled.total_edge_weight() - target).abs() <= WEIGHT_REL_TOL * target);
    }

    #[test]
    fn mixed_preserves_nodes_and_sums_edges(rows in link_rows(), srows in score_rows()) {
        let pure = build_pure(rows.iter().map(|(e, d)| (e.as_str(), d.as_str()))).unwrap();
        prop_assume!(pure.document_count() >= 2);
        let docs: Vec<String> = pure
            .nodes()
            .iter()
            .filter(|n| n.kind == NodeKind::Document)
            .map(|n| n.id.clone())
            .collect();
        let mut dedup: HashMap<(String, String), f64> = HashMap::new();
        for (a, b, s) in srows {
            let (a, b) = (a as usize % docs.len(), b as usize % docs.len());
            if a == b {
                continue;
            }
            let (x, y) = (docs[a.min(b)].clone(), docs[a.max(b)].clone());
            dedup.insert((x, y), s);
        }
        let scores: Vec<(String, String, f64)> = dedup
            .into_iter()
            .map(|((a, b), s)| (a, b, s))
            .collect();
        let sim = build_similarity(
            docs.iter().map(String::as_str),
            scores.iter().map(|(a, b, s)| (a.as_str(), b.as_str(), *s)),
            2,
        )
        .unwrap();
        let sim = if sim.edge_count() > 0 {
            rescale_edges(&sim, pure.total_edge_weight()).unwrap()
        } else {
            sim
        };
        let mixed = build_mixed(&pure, &sim).unwrap();
        prop_assert_eq!(mixed.node_count(), pure.node_count());
        prop_assert_eq!(mixed.edge_count(), pure.edge_count() + sim.edge_count());
        for (m, p) in mixed.nodes().iter().zip(pure.nodes()) {
            prop_assert_eq!(&m.id, &p.id);
            prop_assert_eq!(m.weight(), p.weight());
        }
    }
}
