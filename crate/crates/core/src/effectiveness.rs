//! Per-topic clustering effectiveness: cluster selection under coverage,
//! purity, topic purity profiles, and profile comparison.
//!
//! Purity of a selection is the fraction of its documents that belong to
//! the topic; element and non-core nodes count in neither the numerator nor
//! the denominator. A topic's profile holds, for every number of selected
//! clusters from 1 to `floor(size * coverage / 5)`, the best purity across
//! clustering solutions, with gaps filled by linear interpolation.

use thiserror::Error;

use crate::clustering::ClusteringSolution;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("coverage must lie in (0, 1], got {0}")]
    InvalidCoverage(f64),
    #[error("no clusters selected")]
    EmptySelection,
    #[error("topic documents in the solution ({found}) cannot reach the threshold ({threshold})")]
    ThresholdUnreachable { found: u64, threshold: u64 },
    #[error("profile grid is empty: size {size} at coverage {coverage}")]
    EmptyGrid { size: u64, coverage: f64 },
    #[error("no profile points")]
    NoPoints,
    #[error("profiles do not share subject, coverage, and grid")]
    GridMismatch,
    #[error("empty category")]
    EmptyCategory,
}

/// Absolute slack for float comparisons on count-valued products like
/// `coverage * size`, which must land on exact integers when they
/// mathematically do.
const COUNT_EPS: f64 = 1e-9;

fn eps_ceil(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= COUNT_EPS {
        r as u64
    } else {
        x.ceil() as u64
    }
}

fn eps_floor(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= COUNT_EPS {
        r as u64
    } else {
        x.floor() as u64
    }
}

/// Minimum number of topic documents the selected clusters must jointly
/// contain: `ceil(coverage * topic_size)`.
pub fn coverage_threshold(topic_size: u64, coverage: f64) -> u64 {
    eps_ceil(coverage * topic_size as f64)
}

/// Profile grid length `N = floor(size * coverage / 5)`: the average number
/// of topic documents per selected cluster stays at least 5.
pub fn profile_grid_len(size: u64, coverage: f64) -> usize {
    profile_grid_len_real(size as f64, coverage)
}

/// Grid length over a real-valued size stand-in (category profiles use the
/// bin midpoint as the size).
pub fn profile_grid_len_real(size: f64, coverage: f64) -> usize {
    eps_floor(size * coverage / 5.0) as usize
}

/// Per-cluster tallies of one topic. Only document nodes are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterTally {
    pub cluster: u32,
    pub topic_docs: u64,
    pub total_docs: u64,
}

/// Outcome of cluster selection for one (solution, topic, coverage).
#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub coverage: f64,
    pub threshold: u64,
    pub selected_clusters: Vec<u32>,
    pub nsc: usize,
    pub covered_topic_docs: u64,
    pub selected_total_docs: u64,
    pub purity: f64,
}

/// Selects clusters for a topic: clusters holding topic documents are
/// ordered by topic-document count descending, ties by fewer total
/// documents, remaining ties by smaller cluster id, and taken until the
/// cumulative topic documents reach the coverage threshold.
pub fn select_clusters(
    solution: &ClusteringSolution,
    topic_nodes: &[u32],
    coverage: f64,
) -> Result<SelectionResult, EvalError> {
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(EvalError::InvalidCoverage(coverage));
    }
    let mut topic_nodes = topic_nodes.to_vec();
    topic_nodes.sort_unstable();
    topic_nodes.dedup();

    let mut topic_counts = vec![0u64; solution.cluster_count()];
    for &v in &topic_nodes {
        topic_counts[solution.assignment[v as usize] as usize] += 1;
    }
    let tallies: Vec<ClusterTally> = topic_counts
        .iter()
        .enumerate()
        .filter(|(_, &t)| t > 0)
        .map(|(c, &t)| ClusterTally {
            cluster: c as u32,
            topic_docs: t,
            total_docs: solution.clusters[c].documents as u64,
        })
        .collect();
    let threshold = coverage_threshold(topic_nodes.len() as u64, coverage);
    select_from_tallies(tallies, threshold, coverage)
}

/// The selection rule over raw tallies. `tallies` must hold one entry per
/// cluster containing topic documents.
pub fn select_from_tallies(
    mut tallies: Vec<ClusterTally>,
    threshold: u64,
    coverage: f64,
) -> Result<SelectionResult, EvalError> {
    let available: u64 = tallies.iter().map(|t| t.topic_docs).sum();
    if available < threshold {
        return Err(EvalError::ThresholdUnreachable {
            found: available,
            threshold,
        });
    }
    tallies.sort_by(|a, b| {
        b.topic_docs
            .cmp(&a.topic_docs)
            .then(a.total_docs.cmp(&b.total_docs))
            .then(a.cluster.cmp(&b.cluster))
    });

    let mut selected_clusters = Vec::new();
    let mut covered = 0u64;
    let mut total = 0u64;
    for t in &tallies {
        selected_clusters.push(t.cluster);
        covered += t.topic_docs;
        total += t.total_docs;
        if covered >= threshold {
            break;
        }
    }
    if selected_clusters.is_empty() || total == 0 {
        return Err(EvalError::EmptySelection);
    }
    Ok(SelectionResult {
        coverage,
        threshold,
        nsc: selected_clusters.len(),
        covered_topic_docs: covered,
        selected_total_docs: total,
        purity: covered as f64 / total as f64,
        selected_clusters,
    })
}

/// Purity of an already-selected set of clusters, given per-cluster
/// (topic documents, total documents) tallies.
pub fn purity(selected: &[(u64, u64)]) -> Result<f64, EvalError> {
    if selected.is_empty() {
        return Err(EvalError::EmptySelection);
    }
    let topic: u64 = selected.iter().map(|&(t, _)| t).sum();
    let total: u64 = selected.iter().map(|&(_, d)| d).sum();
    if total == 0 {
        return Err(EvalError::EmptySelection);
    }
    Ok(topic as f64 / total as f64)
}

/// A subject's purity value at every grid position 1..=N.
#[derive(Debug, Clone, PartialEq)]
pub struct PurityProfile {
    pub subject: String,
    pub coverage: f64,
    pub values: Vec<f64>,
}

impl PurityProfile {
    pub fn grid_len(&self) -> usize {
        self.values.len()
    }
}

/// Builds a topic's profile from per-solution (nsc, purity) points.
///
/// Per grid position the highest purity among solutions with that exact NSC
/// wins; a missing position 1 becomes 0; other gaps are filled by linear
/// interpolation between the nearest known points (points beyond N serve as
/// upper anchors); a tail without an upper anchor holds the last known
/// value.
pub fn build_topic_profile(
    subject: &str,
    points: &[(usize, f64)],
    size: u64,
    coverage: f64,
) -> Result<PurityProfile, EvalError> {
    let n = profile_grid_len(size, coverage);
    if n == 0 {
        return Err(EvalError::EmptyGrid { size, coverage });
    }
    let anchors: Vec<(f64, f64)> = points.iter().map(|&(nsc, p)| (nsc as f64, p)).collect();
    let values = fill_grid(&anchors, n)?;
    Ok(PurityProfile {
        subject: subject.to_string(),
        coverage,
        values,
    })
}

/// Shared max/zero/interpolate grid filling over real-valued anchors.
///
/// Anchors at the same coordinate merge by maximum. If no anchor sits at
/// coordinate 1, a zero anchor is added there. Exact anchors win; gaps are
/// linearly interpolated between the nearest anchors; a tail with no upper
/// anchor holds the last known value.
pub(crate) fn fill_grid(anchors: &[(f64, f64)], n: usize) -> Result<Vec<f64>, EvalError> {
    if anchors.is_empty() {
        return Err(EvalError::NoPoints);
    }
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(anchors.len() + 1);
    let mut sorted = anchors.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite anchor coordinates"));
    for (x, y) in sorted {
        match merged.last_mut() {
            Some(last) if last.0 == x => last.1 = last.1.max(y),
            _ => merged.push((x, y)),
        }
    }
    debug_assert!(merged[0].0 >= 1.0, "NSC coordinates start at 1");
    if merged[0].0 > 1.0 {
        merged.insert(0, (1.0, 0.0));
    }

    let mut values = Vec::with_capacity(n);
    for g in 1..=n {
        let x = g as f64;
        let idx = merged.partition_point(|&(c, _)| c < x);
        let v = if idx < merged.len() && merged[idx].0 == x {
            merged[idx].1
        } else if idx == merged.len() {
            merged[idx - 1].1 // tail hold
        } else {
            let (x0, y0) = merged[idx - 1];
            let (x1, y1) = merged[idx];
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        };
        values.push(v);
    }
    Ok(values)
}

/// True iff `a` beats `b` at strictly more than half of the grid positions
/// (ties never count as higher). Profiles must share subject, coverage, and
/// grid.
pub fn compare_profiles(a: &PurityProfile, b: &PurityProfile) -> Result<bool, EvalError> {
    if a.subject != b.subject || a.coverage != b.coverage || a.grid_len() != b.grid_len() {
        return Err(EvalError::GridMismatch);
    }
    let higher = a
        .values
        .iter()
        .zip(&b.values)
        .filter(|(x, y)| x > y)
        .count();
    Ok(2 * higher > a.grid_len())
}

/// Fraction of a category's topics whose profile in the evaluated network
/// beats the reference profile.
pub fn absolute_purity_difference<'a, I>(pairs: I) -> Result<f64, EvalError>
where
    I: IntoIterator<Item = (&'a PurityProfile, &'a PurityProfile)>,
{
    let mut topics = 0usize;
    let mut better = 0usize;
    for (x, reference) in pairs {
        topics += 1;
        if compare_profiles(x, reference)? {
            better += 1;
        }
    }
    if topics == 0 {
        return Err(EvalError::EmptyCategory);
    }
    Ok(better as f64 / topics as f64)
}
