//! Category-level purity profiles across size bins, top-third counts, and
//! relative purity differences.

use std::collections::BTreeMap;

use crate::effectiveness::{fill_grid, EvalError};
use crate::topics::SizeBin;

/// A category's purity profile within one size bin. The grid length comes
/// from the bin midpoint: `N = floor(midpoint * coverage / 5)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryProfile {
    pub category: String,
    pub bin: SizeBin,
    pub coverage: f64,
    pub values: Vec<f64>,
}

impl CategoryProfile {
    pub fn grid_len(&self) -> usize {
        self.values.len()
    }
}

/// Grid length for a bin's category profiles, using the bin midpoint as the
/// size stand-in (bin 41-80 has midpoint 60).
pub fn bin_grid_len(bin: &SizeBin, coverage: f64) -> usize {
    crate::effectiveness::profile_grid_len_real(bin.midpoint(), coverage)
}

/// Arithmetic means of per-topic (nsc, purity) values on one clustering
/// solution. Returns None for an empty cell.
pub fn average_solution_points<I>(points: I) -> Option<(f64, f64)>
where
    I: IntoIterator<Item = (usize, f64)>,
{
    let mut count = 0usize;
    let mut nsc_sum = 0.0f64;
    let mut purity_sum = 0.0f64;
    for (nsc, purity) in points {
        count += 1;
        nsc_sum += nsc as f64;
        purity_sum += purity;
    }
    if count == 0 {
        return None;
    }
    Some((nsc_sum / count as f64, purity_sum / count as f64))
}

/// Builds a category profile from per-solution averaged (nsc, purity)
/// anchors, with the same max/zero/interpolate rules as topic profiles;
/// averaged NSC values act as anchors at their real coordinates.
pub fn build_category_profile(
    category: &str,
    bin: SizeBin,
    coverage: f64,
    anchors: &[(f64, f64)],
) -> Result<CategoryProfile, EvalError> {
    let n = bin_grid_len(&bin, coverage);
    if n == 0 {
        return Err(EvalError::EmptyGrid {
            size: bin.midpoint() as u64,
            coverage,
        });
    }
    let values = fill_grid(anchors, n)?;
    Ok(CategoryProfile {
        category: category.to_string(),
        bin,
        coverage,
        values,
    })
}

/// Number of categories counted as the "top third" of a ranking of `k`
/// categories: `max(1, round(k / 3))`, rounding half up.
pub fn top_third_size(k: usize) -> usize {
    ((k as f64 / 3.0 + 0.5).floor() as usize).max(1)
}

/// Per grid position, ranks the categories by purity (ties broken by
/// category id ascending) and marks the top third. Returns each category's
/// fraction of grid positions in the top third.
///
/// All profiles must share the bin, coverage, and grid, and at least two
/// categories are required for a meaningful ranking.
pub fn top_third_membership(
    profiles: &[&CategoryProfile],
) -> Result<BTreeMap<String, f64>, EvalError> {
    if profiles.len() < 2 {
        return Err(EvalError::EmptyCategory);
    }
    let first = profiles[0];
    if profiles.iter().any(|p| {
        p.bin != first.bin || p.coverage != first.coverage || p.grid_len() != first.grid_len()
    }) {
        return Err(EvalError::GridMismatch);
    }
    let n = first.grid_len();
    let m = top_third_size(profiles.len());

    let mut hits: BTreeMap<&str, usize> =
        profiles.iter().map(|p| (p.category.as_str(), 0)).collect();
    if hits.len() != profiles.len() {
        return Err(EvalError::GridMismatch); // duplicate category in ranking
    }
    for g in 0..n {
        let mut ranked: Vec<(&str, f64)> = profiles
            .iter()
            .map(|p| (p.category.as_str(), p.values[g]))
            .collect();
        ranked.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("purity values are finite")
                .then_with(|| a.0.cmp(b.0))
        });
        for &(cat, _) in ranked.iter().take(m) {
            *hits.get_mut(cat).unwrap() += 1;
        }
    }
    Ok(hits
        .into_iter()
        .map(|(cat, h)| (cat.to_string(), h as f64 / n as f64))
        .collect())
}

/// Mean of a category's per-bin top-third fractions over its kept bins.
pub fn top_third_count(per_bin_fractions: &[f64]) -> f64 {
    if per_bin_fractions.is_empty() {
        return 0.0;
    }
    per_bin_fractions.iter().sum::<f64>() / per_bin_fractions.len() as f64
}

/// Top-third count difference of a network against the reference network.
pub fn relative_purity_difference(count_x: f64, count_reference: f64) -> f64 {
    count_x - count_reference
}

#[cfg(test)]
mod tests {
    use super::*;

    const BIN_41_80: SizeBin = SizeBin {
        lower: 40,
        upper: 80,
    };

    #[test]
    fn averages_are_arithmetic_means() {
        assert_eq!(
            average_solution_points([(2, 0.4), (4, 0.6)]),
            Some((3.0, 0.5))
        );
        assert_eq!(average_solution_points([(5, 0.9)]), Some((5.0, 0.9)));
        let (nsc, p) = average_solution_points([(1, 0.9), (1, 0.6), (4, 0.3)]).unwrap();
        assert_eq!(nsc, 2.0);
        assert!((p - 0.6).abs() < 1e-12);
        assert_eq!(average_solution_points([]), None);
    }

    #[test]
    fn bin_grid_uses_midpoint() {
        assert_eq!(BIN_41_80.midpoint(), 60.0);
        assert_eq!(bin_grid_len(&BIN_41_80, 0.25), 3);
        assert_eq!(bin_grid_len(&BIN_41_80, 0.5), 6);
    }

    #[test]
    fn category_profile_interpolates_real_anchors() {
        let p = build_category_profile("A", BIN_41_80, 0.25, &[(1.0, 0.2), (3.0, 0.6)]).unwrap();
        assert_eq!(p.values.len(), 3);
        assert!((p.values[1] - 0.4).abs() < 1e-9);

        // Single anchor at a fractional coordinate: zero rule at 1,
        // interpolation at 2, tail hold at 3.
        let p = build_category_profile("A", BIN_41_80, 0.25, &[(2.5, 0.5)]).unwrap();
        assert!((p.values[0] - 0.0).abs() < 1e-12);
        assert!((p.values[1] - 1.0 / 3.0).abs() < 1e-9);
        assert!((p.values[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn top_third_size_rounds_half_up() {
        assert_eq!(top_third_size(2), 1);
        assert_eq!(top_third_size(3), 1);
        assert_eq!(top_third_size(4), 1);
        assert_eq!(top_third_size(5), 2);
        assert_eq!(top_third_size(6), 2);
        assert_eq!(top_third_size(17), 6);
    }

    fn cat_profile(category: &str, values: &[f64]) -> CategoryProfile {
        CategoryProfile {
            category: category.to_string(),
            bin: BIN_41_80,
            coverage: 0.5,
            values: values.to_vec(),
        }
    }

    #[test]
    fn top_third_fractions_follow_dominance() {
        // Ten grid positions; A is highest at 7 of them, B at 3, C never.
        let a = cat_profile("A", &[0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.1, 0.1, 0.1]);
        let b = cat_profile("B", &[0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.8, 0.8, 0.8]);
        let c = cat_profile("C", &[0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2]);
        let fractions = top_third_membership(&[&a, &b, &c]).unwrap();
        assert_eq!(fractions["A"], 0.7);
        assert_eq!(fractions["B"], 0.3);
        assert_eq!(fractions["C"], 0.0);
    }

    #[test]
    fn top_third_marks_exactly_m_per_position() {
        let a = cat_profile("A", &[0.9, 0.1, 0.5]);
        let b = cat_profile("B", &[0.8, 0.2, 0.5]);
        let c = cat_profile("C", &[0.7, 0.3, 0.5]);
        let d = cat_profile("D", &[0.6, 0.4, 0.5]);
        let e = cat_profile("E", &[0.5, 0.5, 0.5]);
        let profiles = [&a, &b, &c, &d, &e];
        let m = top_third_size(profiles.len());
        assert_eq!(m, 2);
        let fractions = top_third_membership(&profiles).unwrap();
        let total: f64 = fractions.values().sum();
        // Sum of per-position indicators equals m * N; dividing by N gives m.
        assert!((total - m as f64).abs() < 1e-12);
    }

    #[test]
    fn top_third_tie_breaks_by_category_id() {
        let a = cat_profile("A", &[0.5]);
        let b = cat_profile("B", &[0.5]);
        let c = cat_profile("C", &[0.4]);
        let fractions = top_third_membership(&[&c, &b, &a]).unwrap();
        assert_eq!(fractions["A"], 1.0);
        assert_eq!(fractions["B"], 0.0);
        assert_eq!(fractions["C"], 0.0);
    }

    #[test]
    fn top_third_requires_matching_grids() {
        let a = cat_profile("A", &[0.5, 0.5]);
        let b = cat_profile("B", &[0.5]);
        assert!(matches!(
            top_third_membership(&[&a, &b]),
            Err(EvalError::GridMismatch)
        ));
        assert!(matches!(
            top_third_membership(&[&a]),
            Err(EvalError::EmptyCategory)
        ));
    }

    #[test]
    fn counts_and_differences() {
        assert_eq!(top_third_count(&[0.5, 1.0]), 0.75);
        assert_eq!(top_third_count(&[0.3]), 0.3);
        assert_eq!(top_third_count(&[0.0, 0.0]), 0.0);

        assert!((relative_purity_difference(0.6, 0.2) - 0.4).abs() < 1e-12);
        assert_eq!(relative_purity_difference(0.5, 0.5), 0.0);
        assert_eq!(relative_purity_difference(0.0, 1.0), -1.0);
    }
}
