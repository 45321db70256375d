//! Property tests for purity profiles and their comparison.

use proptest::prelude::*;

use scimap::category_eval::{build_category_profile, top_third_membership, top_third_size};
use scimap::effectiveness::{
    build_topic_profile, compare_profiles, profile_grid_len, select_from_tallies, ClusterTally,
};
use scimap::topics::SizeBin;

fn points() -> impl Strategy<Value = Vec<(usize, f64)>> {
    proptest::collection::vec((1usize..40, 0.0f64..=1.0), 1..25)
}

proptest! {
    #[test]
    fn profiles_are_total_and_bounded(points in points(), size in 41u64..400, coverage in prop::sample::select(vec![0.25, 0.5, 0.75])) {
        let n = profile_grid_len(size, coverage);
        prop_assume!(n >= 1);
        let profile = build_topic_profile("t", &points, size, coverage).unwrap();
        prop_assert_eq!(profile.grid_len(), n);
        for v in &profile.values {
            prop_assert!((0.0..=1.0).contains(v), "value {v} out of range");
        }
    }

    #[test]
    fn compare_is_irreflexive_and_asymmetric(a in points(), b in points()) {
        let pa = build_topic_profile("t", &a, 100, 0.5).unwrap();
        let pb = build_topic_profile("t", &b, 100, 0.5).unwrap();
        prop_assert!(!compare_profiles(&pa, &pa).unwrap());
        prop_assert!(!compare_profiles(&pb, &pb).unwrap());
        let ab = compare_profiles(&pa, &pb).unwrap();
        let ba = compare_profiles(&pb, &pa).unwrap();
        prop_assert!(!(ab && ba), "both directions claim a strict majority");
    }

    #[test]
    fn selection_is_minimal_and_meets_threshold(
        tallies in proptest::collection::vec((1u64..30, 0u64..40), 1..20),
        coverage in prop::sample::select(vec![0.25, 0.5, 0.75]),
    ) {
        let tallies: Vec<ClusterTally> = tallies
            .into_iter()
            .enumerate()
            .map(|(i, (topic_docs, extra))| ClusterTally {
                cluster: i as u32,
                topic_docs,
                total_docs: topic_docs + extra,
            })
            .collect();
        let available: u64 = tallies.iter().map(|t| t.topic_docs).sum();
        let threshold = ((available as f64) * coverage).ceil() as u64;
        let sel = select_from_tallies(tallies.clone(), threshold, coverage).unwrap();
        prop_assert!(sel.covered_topic_docs >= threshold);
        // Dropping the last selected cluster violates the threshold.
        let last = *sel.selected_clusters.last().unwrap();
        let last_topic = tallies.iter().find(|t| t.cluster == last).unwrap().topic_docs;
        prop_assert!(sel.covered_topic_docs - last_topic < threshold);
        prop_assert!((0.0..=1.0).contains(&sel.purity));
    }

    #[test]
    fn top_third_marks_m_categories_per_position(
        values in proptest::collection::vec(proptest::collection::vec(0.0f64..=1.0, 6), 2..9)
    ) {
        let bin = SizeBin { lower: 40, upper: 80 };
        let profiles: Vec<_> = values
            .iter()
            .enumerate()
            .map(|(i, vals)| {
                build_category_profile(
                    &format!("C{i:02}"),
                    bin,
                    0.5,
                    &vals.iter().enumerate().map(|(g, &v)| ((g + 1) as f64, v)).collect::<Vec<_>>(),
                )
                .unwrap()
            })
            .collect();
        let refs: Vec<&_> = profiles.iter().collect();
        let fractions = top_third_membership(&refs).unwrap();
        let m = top_third_size(refs.len());
        let total: f64 = fractions.values().sum();
        prop_assert!((total - m as f64).abs() < 1e-9, "sum {total} != m {m}");
        for f in fractions.values() {
            prop_assert!((0.0..=1.0).contains(f));
        }
    }
}
