//! Planted-topic corpus generator. Produces the full set of pipeline input
//! tables with known ground truth, so every stage of the pipeline can be
//! scored against the planted structure.

pub mod oracle;

pub use oracle::{
    document_mask, exhaustive_cpm_optima, exhaustive_cpm_optimum, reference_complete_linkage,
    reference_purity, CpmOptimum, RefSelection,
};

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("exhaustive enumeration supports at most {max} nodes, got {0}", max = oracle::MAX_EXHAUSTIVE_NODES)]
    TooManyNodes(usize),
    #[error("probabilities must satisfy 0 <= p_out <= p_in <= 1 with p_in > 0")]
    InvalidProbability,
    #[error("infeasible spec: {0}")]
    Infeasible(String),
    #[error("category ids must be non-empty and prefix-free: {0}")]
    BadCategories(String),
}

/// How the synthetic text-similarity table relates to the planted topics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityMode {
    /// High scores within planted topics.
    Aligned,
    /// Scores independent of the planted topics.
    Uninformative,
    /// High scores within a second partition orthogonal to the topics.
    Antialigned,
}

impl std::str::FromStr for SimilarityMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "aligned" => Ok(SimilarityMode::Aligned),
            "uninformative" => Ok(SimilarityMode::Uninformative),
            "antialigned" => Ok(SimilarityMode::Antialigned),
            other => Err(format!("unknown similarity mode: {other}")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub topic_count: usize,
    pub docs_per_topic: usize,
    /// Topic index -> category id. Topics missing from the map fall into
    /// category "C01".
    pub categories: BTreeMap<usize, String>,
    pub element_count: usize,
    /// Relative weight of a home-topic document per link draw.
    pub p_in: f64,
    /// Relative weight of any other document per link draw.
    pub p_out: f64,
    pub links_per_element: usize,
    pub similarity_mode: SimilarityMode,
    pub tree_depth: usize,
    pub seed: u64,
}

impl PlantedSpec {
    /// Spec with every topic in one category.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        topic_count: usize,
        docs_per_topic: usize,
        element_count: usize,
        p_in: f64,
        p_out: f64,
        links_per_element: usize,
        similarity_mode: SimilarityMode,
        seed: u64,
    ) -> Self {
        PlantedSpec {
            topic_count,
            docs_per_topic,
            categories: BTreeMap::new(),
            element_count,
            p_in,
            p_out,
            links_per_element,
            similarity_mode,
            tree_depth: 3,
            seed,
        }
    }

    pub fn category_of(&self, topic: usize) -> &str {
        self.categories
            .get(&topic)
            .map(String::as_str)
            .unwrap_or("C01")
    }

    fn validate(&self) -> Result<(), SynthError> {
        if !(self.p_out >= 0.0 && self.p_out <= self.p_in && self.p_in <= 1.0 && self.p_in > 0.0) {
            return Err(SynthError::InvalidProbability);
        }
        if self.topic_count == 0 || self.docs_per_topic == 0 {
            return Err(SynthError::Infeasible("no documents".into()));
        }
        if self.links_per_element < 2 {
            return Err(SynthError::Infeasible(
                "links_per_element must be at least 2".into(),
            ));
        }
        let total = self.topic_count * self.docs_per_topic;
        if self.links_per_element > total {
            return Err(SynthError::Infeasible(format!(
                "links_per_element {} exceeds total documents {total}",
                self.links_per_element
            )));
        }
        if self.p_out == 0.0 && self.links_per_element > self.docs_per_topic {
            return Err(SynthError::Infeasible(
                "p_out = 0 but links_per_element exceeds docs_per_topic".into(),
            ));
        }
        if self.tree_depth == 0 {
            return Err(SynthError::Infeasible(
                "tree_depth must be at least 1".into(),
            ));
        }
        let mut ids: Vec<&str> = (0..self.topic_count).map(|t| self.category_of(t)).collect();
        ids.sort_unstable();
        ids.dedup();
        for a in &ids {
            if a.is_empty() {
                return Err(SynthError::BadCategories("empty id".into()));
            }
            for b in &ids {
                if a != b && b.starts_with(*a) {
                    return Err(SynthError::BadCategories(format!("{a} is a prefix of {b}")));
                }
            }
        }
        Ok(())
    }
}

/// All pipeline input tables for one planted corpus, plus the planted
/// assignments for scoring.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub spec: PlantedSpec,
    pub documents: Vec<String>,
    pub links: Vec<(String, String)>,
    pub similarity: Vec<(String, String, f64)>,
    pub annotations: Vec<(String, String)>,
    /// Rows of (tree_code, term_id, term_name).
    pub tree: Vec<(String, String, String)>,
    /// Rows of (category_id, prefixes, display_name).
    pub categories: Vec<(String, String, String)>,
    /// Rows of (document_id, leaf tree code, category_id).
    pub planted: Vec<(String, String, String)>,
}

fn doc_id(i: usize) -> String {
    format!("d{i:06}")
}

fn element_id(i: usize) -> String {
    format!("e{i:06}")
}

/// Code of the tree node for `topic` at `level` (1-based; level 1 is the
/// topic root, `tree_depth` the leaf).
fn topic_code(spec: &PlantedSpec, topic: usize, level: usize) -> String {
    let mut code = format!("{}T{topic:03}", spec.category_of(topic));
    for _ in 1..level {
        code.push_str(".001");
    }
    code
}

fn term_id_for(code: &str) -> String {
    format!("m-{code}")
}

/// Generates the corpus. Deterministic given the spec: identical specs give
/// identical outputs byte for byte.
pub fn generate(spec: &PlantedSpec) -> Result<SynthCorpus, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let total_docs = spec.topic_count * spec.docs_per_topic;
    let documents: Vec<String> = (0..total_docs).map(doc_id).collect();
    let topic_of = |d: usize| d / spec.docs_per_topic;

    // Element links: each element draws `links_per_element` distinct
    // documents; a home-topic document carries relative weight p_in per
    // draw, any other document p_out, so p_in = p_out is uniform over all
    // documents.
    let mut links = Vec::with_capacity(spec.element_count * spec.links_per_element);
    let n_home = spec.docs_per_topic;
    let n_out = total_docs - n_home;
    for e in 0..spec.element_count {
        let home = e % spec.topic_count;
        let home_base = home * spec.docs_per_topic;
        let mass_home = spec.p_in * n_home as f64;
        let mass_out = spec.p_out * n_out as f64;
        let mut chosen: Vec<usize> = Vec::with_capacity(spec.links_per_element);
        let mut attempts = 0usize;
        while chosen.len() < spec.links_per_element {
            attempts += 1;
            if attempts > 1000 * spec.links_per_element {
                return Err(SynthError::Infeasible(format!(
                    "element {e} could not draw {} distinct documents",
                    spec.links_per_element
                )));
            }
            let r: f64 = rng.random_range(0.0..mass_home + mass_out);
            let d = if r < mass_home || n_out == 0 {
                home_base + rng.random_range(0..n_home)
            } else {
                let off = rng.random_range(0..n_out);
                if off < home_base {
                    off
                } else {
                    off + n_home
                }
            };
            if !chosen.contains(&d) {
                chosen.push(d);
            }
        }
        chosen.sort_unstable();
        for d in chosen {
            links.push((element_id(e), doc_id(d)));
        }
    }

    // Similarity scores: candidate partners per document, deduplicated per
    // unordered pair keeping the highest score. The number of rng draws per
    // document is fixed, so output does not depend on collision patterns.
    let mut pair_scores: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    fn record(a: usize, b: usize, s: f64, map: &mut BTreeMap<(usize, usize), f64>) {
        if a == b {
            return;
        }
        let key = (a.min(b), a.max(b));
        let entry = map.entry(key).or_insert(s);
        if s > *entry {
            *entry = s;
        }
    }
    for d in 0..total_docs {
        match spec.similarity_mode {
            SimilarityMode::Uninformative => {
                for _ in 0..40 {
                    let p = rng.random_range(0..total_docs);
                    let s = rng.random_range(0.01..1.0);
                    record(d, p, s, &mut pair_scores);
                }
            }
            SimilarityMode::Aligned | SimilarityMode::Antialigned => {
                let (group, group_size): (usize, usize) = match spec.similarity_mode {
                    SimilarityMode::Aligned => (topic_of(d), spec.docs_per_topic),
                    _ => (d % spec.topic_count, total_docs / spec.topic_count),
                };
                let within = 30.min(group_size.saturating_sub(1));
                for _ in 0..within {
                    let k = rng.random_range(0..group_size);
                    let p = match spec.similarity_mode {
                        SimilarityMode::Aligned => group * spec.docs_per_topic + k,
                        _ => k * spec.topic_count + group,
                    };
                    let s = rng.random_range(0.6..1.0);
                    record(d, p, s, &mut pair_scores);
                }
                for _ in 0..10 {
                    let p = rng.random_range(0..total_docs);
                    let s = rng.random_range(0.01..0.3);
                    record(d, p, s, &mut pair_scores);
                }
            }
        }
    }
    let similarity: Vec<(String, String, f64)> = pair_scores
        .into_iter()
        .map(|((a, b), s)| (doc_id(a), doc_id(b), s))
        .collect();

    // Topic tree: one chain of depth `tree_depth` per topic; each document
    // is annotated with its topic's leaf term.
    let mut tree = Vec::new();
    for t in 0..spec.topic_count {
        for level in 1..=spec.tree_depth {
            let code = topic_code(spec, t, level);
            tree.push((
                code.clone(),
                term_id_for(&code),
                format!("Planted topic {t} level {level}"),
            ));
        }
    }
    let mut annotations = Vec::with_capacity(total_docs);
    let mut planted = Vec::with_capacity(total_docs);
    for d in 0..total_docs {
        let t = topic_of(d);
        let leaf = topic_code(spec, t, spec.tree_depth);
        annotations.push((doc_id(d), term_id_for(&leaf)));
        planted.push((doc_id(d), leaf, spec.category_of(t).to_string()));
    }

    let mut category_ids: Vec<&str> = (0..spec.topic_count).map(|t| spec.category_of(t)).collect();
    category_ids.sort_unstable();
    category_ids.dedup();
    let categories = category_ids
        .into_iter()
        .map(|c| {
            (
                c.to_string(),
                c.to_string(),
                format!("Planted category {c}"),
            )
        })
        .collect();

    Ok(SynthCorpus {
        spec: spec.clone(),
        documents,
        links,
        similarity,
        annotations,
        tree,
        categories,
        planted,
    })
}

/// Writes the corpus as the pipeline input files plus a manifest recording
/// the spec and the planted assignments.
pub fn write_fixture(corpus: &SynthCorpus, dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let write = |name: &str, header: &str, rows: &mut dyn Iterator<Item = String>| {
        let mut buf = String::new();
        buf.push_str(header);
        buf.push('\n');
        for row in rows {
            buf.push_str(&row);
            buf.push('\n');
        }
        fs::write(dir.join(name), buf)
    };

    write(
        "documents.tsv",
        "document_id",
        &mut corpus.documents.iter().cloned(),
    )?;
    write(
        "links.tsv",
        "element_id\tdocument_id",
        &mut corpus.links.iter().map(|(e, d)| format!("{e}\t{d}")),
    )?;
    write(
        "similarity.tsv",
        "doc_a\tdoc_b\tscore",
        &mut corpus
            .similarity
            .iter()
            .map(|(a, b, s)| format!("{a}\t{b}\t{s}")),
    )?;
    write(
        "annotations.tsv",
        "document_id\tterm_id",
        &mut corpus
            .annotations
            .iter()
            .map(|(d, t)| format!("{d}\t{t}")),
    )?;
    write(
        "tree.tsv",
        "tree_code\tterm_id\tterm_name",
        &mut corpus
            .tree
            .iter()
            .map(|(c, t, n)| format!("{c}\t{t}\t{n}")),
    )?;
    write(
        "categories.tsv",
        "category_id\tprefixes\tdisplay_name",
        &mut corpus
            .categories
            .iter()
            .map(|(i, p, n)| format!("{i}\t{p}\t{n}")),
    )?;

    #[derive(Serialize)]
    struct Manifest<'a> {
        spec: &'a PlantedSpec,
        planted: Vec<BTreeMap<&'static str, &'a str>>,
    }
    let manifest = Manifest {
        spec: &corpus.spec,
        planted: corpus
            .planted
            .iter()
            .map(|(d, code, cat)| {
                BTreeMap::from([
                    ("document", d.as_str()),
                    ("topic", code.as_str()),
                    ("category", cat.as_str()),
                ])
            })
            .collect(),
    };
    let mut f = fs::File::create(dir.join("manifest.json"))?;
    f.write_all(serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}
