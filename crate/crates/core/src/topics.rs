//! Hierarchical topic trees: annotation expansion, topic size bins,
//! redundancy filtering, and category filtering.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::util::stable_hash;

#[derive(Debug, Error)]
pub enum TopicError {
    #[error("duplicate tree code: {0}")]
    DuplicateCode(String),
    #[error("malformed tree code: {0:?}")]
    MalformedCode(String),
    #[error("tree code {code} is missing its parent {parent}")]
    MissingParent { code: String, parent: String },
    #[error("duplicate category id: {0}")]
    DuplicateCategory(String),
    #[error("category prefixes overlap: {0} and {1}")]
    OverlappingPrefixes(String, String),
    #[error("category {0} has no prefixes")]
    EmptyPrefixes(String),
}

/// The term owning one tree node.
#[derive(Debug, Clone)]
pub struct TreeTerm {
    pub term_id: String,
    pub term_name: String,
}

/// A hierarchical code tree. Parenthood is derived by truncating the final
/// dot-separated code segment; a term may own several codes but each code
/// maps to a single term.
#[derive(Debug, Clone, Default)]
pub struct TopicTree {
    nodes: BTreeMap<String, TreeTerm>,
    term_codes: BTreeMap<String, Vec<String>>,
}

impl TopicTree {
    pub fn from_rows<I>(rows: I) -> Result<Self, TopicError>
    where
        I: IntoIterator<Item = (String, String, String)>,
    {
        let mut nodes = BTreeMap::new();
        let mut term_codes: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (code, term_id, term_name) in rows {
            if code.is_empty() || code.split('.').any(|seg| seg.is_empty()) {
                return Err(TopicError::MalformedCode(code));
            }
            if nodes
                .insert(code.clone(), TreeTerm { term_id: term_id.clone(), term_name })
                .is_some()
            {
                return Err(TopicError::DuplicateCode(code));
            }
            term_codes.entry(term_id).or_default().push(code);
        }
        for code in nodes.keys() {
            if let Some(parent) = parent_code(code) {
                if !nodes.contains_key(parent) {
                    return Err(TopicError::MissingParent {
                        code: code.clone(),
                        parent: parent.to_string(),
                    });
                }
            }
        }
        Ok(TopicTree { nodes, term_codes })
    }

    pub fn contains(&self, code: &str) -> bool {
        self.nodes.contains_key(code)
    }

    pub fn term(&self, code: &str) -> Option<&TreeTerm> {
        self.nodes.get(code)
    }

    pub fn codes_for_term(&self, term_id: &str) -> Option<&[String]> {
        self.term_codes.get(term_id).map(Vec::as_slice)
    }

    pub fn codes(&self) -> impl Iterator<Item = &String> {
        self.nodes.keys()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Parent code, or None for a root-level code.
pub fn parent_code(code: &str) -> Option<&str> {
    code.rfind('.').map(|i| &code[..i])
}

/// All ancestor codes of `code`, nearest first, excluding `code` itself.
pub fn ancestors(code: &str) -> impl Iterator<Item = &str> {
    std::iter::successors(parent_code(code), |c| parent_code(c))
}

/// Number of dot-separated segments; deeper codes are more specific.
pub fn code_depth(code: &str) -> usize {
    code.split('.').count()
}

/// Expansion of per-document terms into ancestor-closed code sets.
#[derive(Debug, Clone, Default)]
pub struct Expansion {
    pub doc_codes: BTreeMap<u32, BTreeSet<String>>,
    pub unknown_terms: BTreeSet<String>,
}

/// Expands each document's terms into all of their codes plus every
/// ancestor code. Unknown term ids are reported, not fatal. Idempotent:
/// the output code sets are ancestor-closed.
pub fn expand_annotations<'a, I>(annotations: I, tree: &TopicTree) -> Expansion
where
    I: IntoIterator<Item = (u32, &'a str)>,
{
    let mut out = Expansion::default();
    for (doc, term) in annotations {
        let Some(codes) = tree.codes_for_term(term) else {
            out.unknown_terms.insert(term.to_string());
            continue;
        };
        let set = out.doc_codes.entry(doc).or_default();
        for code in codes {
            if set.insert(code.clone()) {
                for anc in ancestors(code) {
                    if !set.insert(anc.to_string()) {
                        break; // ancestors of an already-present code are present
                    }
                }
            }
        }
    }
    out
}

/// A doubling size interval (lower, upper], upper = 2 * lower.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SizeBin {
    pub lower: u64,
    pub upper: u64,
}

impl SizeBin {
    pub fn label(&self) -> String {
        format!("{}-{}", self.lower + 1, self.upper)
    }

    /// Average of the bin bounds; the size stand-in for category profiles.
    pub fn midpoint(&self) -> f64 {
        (self.lower + self.upper) as f64 / 2.0
    }
}

/// Maps a topic size to its bin: the unique (X, 2X] interval with
/// X = base * 2^k containing it. Sizes at or below `base` map to none.
pub fn assign_size_bin(size: u64, base: u64) -> Option<SizeBin> {
    assert!(base >= 1);
    if size <= base {
        return None;
    }
    let mut lower = base;
    while size > lower * 2 {
        lower *= 2;
    }
    Some(SizeBin {
        lower,
        upper: lower * 2,
    })
}

/// Keeps the bins holding at least half as many topics as the fullest bin.
pub fn filter_size_bins(bin_counts: &BTreeMap<SizeBin, usize>) -> BTreeSet<SizeBin> {
    let max = bin_counts.values().copied().max().unwrap_or(0);
    bin_counts
        .iter()
        .filter(|(_, &count)| 2 * count >= max)
        .map(|(&bin, _)| bin)
        .collect()
}

#[derive(Debug, Clone)]
pub struct CategoryDef {
    pub id: String,
    pub prefixes: Vec<String>,
    pub display_name: String,
}

/// Ordered category definitions plus excluded code prefixes. A code belongs
/// to the category whose prefix it starts with; excluded prefixes win over
/// category prefixes.
#[derive(Debug, Clone)]
pub struct CategoryConfig {
    categories: Vec<CategoryDef>,
    excluded_prefixes: Vec<String>,
}

impl CategoryConfig {
    pub fn new(
        categories: Vec<CategoryDef>,
        excluded_prefixes: Vec<String>,
    ) -> Result<Self, TopicError> {
        let mut seen = BTreeSet::new();
        for c in &categories {
            if !seen.insert(c.id.clone()) {
                return Err(TopicError::DuplicateCategory(c.id.clone()));
            }
            if c.prefixes.is_empty() {
                return Err(TopicError::EmptyPrefixes(c.id.clone()));
            }
        }
        let all: Vec<&String> = categories.iter().flat_map(|c| c.prefixes.iter()).collect();
        for (i, p) in all.iter().enumerate() {
            for q in &all[i + 1..] {
                if p.starts_with(q.as_str()) || q.starts_with(p.as_str()) {
                    return Err(TopicError::OverlappingPrefixes(
                        p.to_string(),
                        q.to_string(),
                    ));
                }
            }
        }
        Ok(CategoryConfig {
            categories,
            excluded_prefixes,
        })
    }

    /// The MeSH branch categories: branches A through Z, with the H, I and J
    /// branches replaced by their top-level tree nodes and the K, V, I03 and
    /// J03 prefixes excluded for having too few topics.
    pub fn mesh_default() -> Self {
        let table: &[(&str, &str)] = &[
            ("A", "Anatomy"),
            ("B", "Organisms"),
            ("C", "Diseases"),
            ("D", "Chemicals and Drugs"),
            (
                "E",
                "Analytical, Diagnostic and Therapeutic Techniques, and Equipment",
            ),
            ("F", "Psychiatry and Psychology"),
            ("G", "Phenomena and Processes"),
            ("H01", "Natural Science Disciplines"),
            ("H02", "Health Occupations"),
            ("I01", "Social Sciences"),
            ("I02", "Education"),
            ("J01", "Technology, Industry, and Agriculture"),
            ("J02", "Food and Beverages"),
            ("L", "Information Science"),
            ("M", "Named Groups"),
            ("N", "Health Care"),
            ("Z", "Geographicals"),
        ];
        let categories = table
            .iter()
            .map(|&(id, name)| CategoryDef {
                id: id.to_string(),
                prefixes: vec![id.to_string()],
                display_name: name.to_string(),
            })
            .collect();
        let excluded = ["K", "V", "I03", "J03"]
            .into_iter()
            .map(String::from)
            .collect();
        CategoryConfig::new(categories, excluded).expect("default config is valid")
    }

    pub fn categories(&self) -> &[CategoryDef] {
        &self.categories
    }

    pub fn excluded_prefixes(&self) -> &[String] {
        &self.excluded_prefixes
    }

    pub fn category_of(&self, code: &str) -> Option<&str> {
        if self
            .excluded_prefixes
            .iter()
            .any(|p| code.starts_with(p.as_str()))
        {
            return None;
        }
        self.categories
            .iter()
            .find(|c| c.prefixes.iter().any(|p| code.starts_with(p.as_str())))
            .map(|c| c.id.as_str())
    }
}

/// A tree node with its annotated documents, within one document subset.
#[derive(Debug, Clone)]
pub struct Topic {
    pub code: String,
    pub category: String,
    /// Sorted, distinct document indices.
    pub docs: Vec<u32>,
}

impl Topic {
    pub fn size(&self) -> u64 {
        self.docs.len() as u64
    }

    pub fn depth(&self) -> usize {
        code_depth(&self.code)
    }
}

/// Inverts an expansion into per-code topics, dropping codes outside every
/// category. Topics come out sorted by code with sorted document lists.
pub fn collect_topics<'a, I>(doc_codes: I, config: &CategoryConfig) -> Vec<Topic>
where
    I: IntoIterator<Item = (u32, &'a BTreeSet<String>)>,
{
    let mut by_code: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
    for (doc, codes) in doc_codes {
        for code in codes {
            by_code.entry(code.as_str()).or_default().push(doc);
        }
    }
    by_code
        .into_iter()
        .filter_map(|(code, mut docs)| {
            let category = config.category_of(code)?.to_string();
            docs.sort_unstable();
            docs.dedup();
            Some(Topic {
                code: code.to_string(),
                category,
                docs,
            })
        })
        .collect()
}

/// Jaccard similarity of two sorted, distinct index slices.
pub fn jaccard(a: &[u32], b: &[u32]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let mut inter = 0usize;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// Groups redundant topics by agglomerative clustering with complete
/// linkage over Jaccard distance, merging while the linkage distance stays
/// at or below `1 - threshold` (merge order: smallest linkage distance
/// first, ties by the lexicographically smallest code pair). Updates use
/// the Lance-Williams maximum rule. Groups come out with ascending member
/// indices, ordered by first member.
pub fn redundancy_groups(topics: &[Topic], threshold: f64) -> Vec<Vec<usize>> {
    let n = topics.len();
    if n <= 1 {
        return (0..n).map(|i| vec![i]).collect();
    }
    let cutoff = 1.0 - threshold;

    let mut dist = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = 1.0 - jaccard(&topics[i].docs, &topics[j].docs);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }

    // Active groups keyed by their lexicographically smallest member code.
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut key: Vec<&str> = (0..n).map(|i| topics[i].code.as_str()).collect();
    let mut active: Vec<bool> = vec![true; n];

    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..n {
                if !active[j] {
                    continue;
                }
                let d = dist[i][j];
                let pair = if key[i] <= key[j] {
                    (key[i], key[j])
                } else {
                    (key[j], key[i])
                };
                let better = match best {
                    None => true,
                    Some((bd, bi, bj)) => {
                        let bpair = if key[bi] <= key[bj] {
                            (key[bi], key[bj])
                        } else {
                            (key[bj], key[bi])
                        };
                        d < bd || (d == bd && pair < bpair)
                    }
                };
                if better {
                    best = Some((d, i, j));
                }
            }
        }
        match best {
            Some((d, i, j)) if d <= cutoff => {
                for t in 0..n {
                    if active[t] && t != i && t != j {
                        let m = dist[i][t].max(dist[j][t]);
                        dist[i][t] = m;
                        dist[t][i] = m;
                    }
                }
                let moved = std::mem::take(&mut members[j]);
                members[i].extend(moved);
                if key[j] < key[i] {
                    key[i] = key[j];
                }
                active[j] = false;
            }
            _ => break,
        }
    }

    let mut groups: Vec<Vec<usize>> = members
        .into_iter()
        .zip(active)
        .filter(|(_, a)| *a)
        .map(|(mut g, _)| {
            g.sort_unstable();
            g
        })
        .collect();
    groups.sort_by_key(|g| g[0]);
    groups
}

/// Redundancy filter over the topics of one category.
///
/// Topics with Jaccard similarity at or above `threshold` are grouped by
/// [`redundancy_groups`]; from each group the smallest topic is kept; ties
/// go to the deepest tree level, then to a deterministic pick keyed by the
/// seed and the tied codes. Returns the kept indices, ascending.
pub fn redundancy_filter(topics: &[Topic], threshold: f64, seed: u64) -> Vec<usize> {
    let mut kept = Vec::new();
    for group in redundancy_groups(topics, threshold) {
        let min_size = group.iter().map(|&t| topics[t].size()).min().unwrap();
        let smallest: Vec<usize> = group
            .iter()
            .copied()
            .filter(|&t| topics[t].size() == min_size)
            .collect();
        let max_depth = smallest.iter().map(|&t| topics[t].depth()).max().unwrap();
        let mut tied: Vec<usize> = smallest
            .into_iter()
            .filter(|&t| topics[t].depth() == max_depth)
            .collect();
        tied.sort_by(|&a, &b| topics[a].code.cmp(&topics[b].code));
        let pick = if tied.len() == 1 {
            tied[0]
        } else {
            let codes: Vec<&str> = tied.iter().map(|&t| topics[t].code.as_str()).collect();
            let h = stable_hash(seed, codes.join("\n").as_bytes());
            tied[(h % tied.len() as u64) as usize]
        };
        kept.push(pick);
    }
    kept.sort_unstable();
    kept
}

/// Keeps the categories that hold at least `min_per_bin` topics in every
/// kept size bin.
pub fn filter_categories(
    bin_counts: &BTreeMap<String, BTreeMap<SizeBin, usize>>,
    kept_bins: &BTreeSet<SizeBin>,
    min_per_bin: usize,
) -> BTreeSet<String> {
    bin_counts
        .iter()
        .filter(|(_, counts)| {
            kept_bins
                .iter()
                .all(|bin| counts.get(bin).copied().unwrap_or(0) >= min_per_bin)
        })
        .map(|(cat, _)| cat.clone())
        .collect()
}
