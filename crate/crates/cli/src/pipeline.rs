//! End-to-end orchestration: networks, topic filtering, clustering sweeps,
//! both evaluation tracks, and report emission.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use scimap::category_eval::{
    average_solution_points, bin_grid_len, build_category_profile, relative_purity_difference,
    top_third_count, top_third_membership, CategoryProfile,
};
use scimap::clustering::{
    calibrate_gamma_range, derive_stream_seed, generate_sweep, run_sweep, ClusteringSolution,
};
use scimap::effectiveness::{
    absolute_purity_difference, build_topic_profile, profile_grid_len, select_clusters,
    PurityProfile,
};
use scimap::network::{
    build_extended_citation, build_mixed, build_pure, build_similarity, rescale_edges, Network,
    NodeKind, Variant,
};
use scimap::topics::{
    assign_size_bin, collect_topics, expand_annotations, filter_categories, filter_size_bins,
    redundancy_filter, SizeBin,
};

use crate::config::RunConfig;
use crate::ingest::{ingest, Tables};
use crate::report::{self, CategoryProfileRow, SolutionRow, SummaryRow, TopicProfileRow};

/// A stage-tagged pipeline failure.
#[derive(Debug)]
pub struct PipelineError {
    pub stage: &'static str,
    pub message: String,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.stage, self.message)
    }
}

impl std::error::Error for PipelineError {}

fn stage_err<E: fmt::Display>(stage: &'static str) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError {
        stage,
        message: e.to_string(),
    }
}

#[derive(Debug, Serialize)]
pub struct StageTiming {
    pub name: String,
    pub millis: u128,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: RunConfig,
    /// Input path -> sha256 of file bytes.
    pub inputs: BTreeMap<String, String>,
    /// Output file name -> sha256 of file bytes.
    pub outputs: BTreeMap<String, String>,
    /// Network variant -> [gamma_min, gamma_max] actually swept.
    pub gamma_ranges: BTreeMap<String, [f64; 2]>,
    pub stages: Vec<StageTiming>,
    pub warnings: Vec<String>,
}

struct StageClock {
    stages: Vec<StageTiming>,
    last: Instant,
}

impl StageClock {
    fn new() -> Self {
        StageClock {
            stages: Vec::new(),
            last: Instant::now(),
        }
    }

    fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.stages.push(StageTiming {
            name: name.to_string(),
            millis: now.duration_since(self.last).as_millis(),
        });
        self.last = now;
    }
}

/// One topic kept for evaluation within a document subset.
#[derive(Debug, Clone)]
struct EvalTopic {
    code: String,
    category: String,
    bin: SizeBin,
    /// Global document indices (into the documents table), sorted.
    docs_global: Vec<u32>,
}

impl EvalTopic {
    fn size(&self) -> u64 {
        self.docs_global.len() as u64
    }
}

/// Topics, kept bins, and kept categories for one document subset.
#[derive(Debug)]
struct TopicStage {
    topics: Vec<EvalTopic>,
}

/// A network with its clustering solutions and per-topic node lists.
struct NetworkRun {
    variant: Variant,
    stage: usize,
    network: Network,
    solutions: Vec<ClusteringSolution>,
    gamma_range: (f64, f64),
    /// Per topic (of its stage), the network node indices of its documents.
    topic_nodes: Vec<Vec<u32>>,
    /// points[topic][coverage][solution] = (nsc, purity)
    points: Vec<Vec<Vec<(usize, f64)>>>,
}

pub fn run_pipeline(config: &RunConfig) -> Result<RunManifest, PipelineError> {
    let mut clock = StageClock::new();
    let mut warnings: Vec<String> = Vec::new();

    let tables = ingest(config).map_err(stage_err("ingest"))?;
    clock.lap("ingest");

    let (networks, stages_subsets) = build_networks(config, &tables, &mut warnings)?;
    clock.lap("networks");

    let topic_stages = build_topic_stages(config, &tables, &stages_subsets, &mut warnings)?;
    clock.lap("topics");

    let mut runs = cluster_networks(config, networks, &topic_stages, &tables, &mut warnings)?;
    clock.lap("clustering");

    measure(config, &mut runs, &topic_stages)?;
    clock.lap("measurement");

    let topic_profiles = build_topic_profiles(config, &runs, &topic_stages);
    let absolute = absolute_track(config, &runs, &topic_stages, &topic_profiles, &mut warnings);
    clock.lap("absolute_evaluation");

    let (category_profiles, top_third, relative) =
        relative_track(config, &runs, &topic_stages, &mut warnings);
    clock.lap("relative_evaluation");

    let manifest = write_reports(
        config,
        &tables,
        &runs,
        &topic_profiles,
        &category_profiles,
        &top_third,
        &absolute,
        &relative,
        clock,
        warnings,
    )?;
    Ok(manifest)
}

/// Builds the pure, similarity (rescaled), mixed, and optional extended
/// citation networks. Returns the networks tagged with their topic-stage
/// index, plus the per-stage document subsets (global indices, sorted).
#[allow(clippy::type_complexity)]
fn build_networks(
    config: &RunConfig,
    tables: &Tables,
    warnings: &mut Vec<String>,
) -> Result<(Vec<(Variant, usize, Network)>, Vec<Vec<u32>>), PipelineError> {
    let stage: &'static str = "networks";
    let pure = build_pure(tables.links.iter().map(|(e, d)| (e.as_str(), d.as_str())))
        .map_err(stage_err(stage))?;
    if pure.is_empty() {
        return Err(PipelineError {
            stage,
            message: "pure network is empty after threshold pruning".to_string(),
        });
    }

    // The similarity network uses the same documents as the pure network,
    // so score rows are restricted to that subset first.
    let pure_doc_ids: Vec<&str> = pure
        .nodes()
        .iter()
        .filter(|n| n.kind == NodeKind::Document)
        .map(|n| n.id.as_str())
        .collect();
    let in_pure: std::collections::HashSet<&str> = pure_doc_ids.iter().copied().collect();
    let subset_scores: Vec<(&str, &str, f64)> = tables
        .similarity
        .iter()
        .filter(|(a, b, _)| in_pure.contains(a.as_str()) && in_pure.contains(b.as_str()))
        .map(|(a, b, s)| (a.as_str(), b.as_str(), *s))
        .collect();
    let bert = build_similarity(pure_doc_ids.iter().copied(), subset_scores, config.k)
        .map_err(stage_err(stage))?;
    let bert = if bert.edge_count() > 0 {
        rescale_edges(&bert, pure.total_edge_weight()).map_err(stage_err(stage))?
    } else {
        warnings.push("similarity network has no edges; skipping rescale".to_string());
        bert
    };
    let mixed = build_mixed(&pure, &bert).map_err(stage_err(stage))?;

    let mut subset_pure: Vec<u32> = pure_doc_ids
        .iter()
        .map(|id| tables.doc_index[*id])
        .collect();
    subset_pure.sort_unstable();

    let mut networks = vec![
        (Variant::Pure, 0usize, pure),
        (Variant::Similarity, 0, bert),
        (Variant::Mixed, 0, mixed),
    ];
    let mut subsets = vec![subset_pure];

    if let Some(citations) = &tables.citations {
        let citation = build_extended_citation(
            tables.documents.iter().map(String::as_str),
            citations.iter().map(|(a, b)| (a.as_str(), b.as_str())),
        )
        .map_err(stage_err(stage))?;
        if citation.document_count() < 2 || citation.edge_count() == 0 {
            warnings.push(
                "extended citation network is degenerate (fewer than 2 documents or no edges); skipped"
                    .to_string(),
            );
        } else {
            let subset: Vec<u32> = (0..tables.documents.len() as u32).collect();
            networks.push((Variant::ExtendedCitation, 1, citation));
            subsets.push(subset);
        }
    }
    Ok((networks, subsets))
}

/// Expands annotations once, then filters topics per document subset:
/// size bins, bin filter, per-category redundancy filter, category filter.
fn build_topic_stages(
    config: &RunConfig,
    tables: &Tables,
    subsets: &[Vec<u32>],
    warnings: &mut Vec<String>,
) -> Result<Vec<TopicStage>, PipelineError> {
    let expansion = expand_annotations(
        tables.annotations.iter().map(|(d, t)| (*d, t.as_str())),
        &tables.tree,
    );
    if !expansion.unknown_terms.is_empty() {
        warnings.push(format!(
            "{} annotation term(s) not in the tree, skipped: {}",
            expansion.unknown_terms.len(),
            expansion
                .unknown_terms
                .iter()
                .take(10)
                .cloned()
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }

    let mut stages = Vec::with_capacity(subsets.len());
    for (stage_idx, subset) in subsets.iter().enumerate() {
        let in_subset: std::collections::HashSet<u32> = subset.iter().copied().collect();
        let filtered = expansion
            .doc_codes
            .iter()
            .filter(|(doc, _)| in_subset.contains(doc))
            .map(|(doc, codes)| (*doc, codes));
        let all_topics = collect_topics(filtered, &tables.categories);

        // Size bins over every categorized topic, then the bin filter.
        let mut binned: Vec<(scimap::topics::Topic, SizeBin)> = all_topics
            .into_iter()
            .filter_map(|t| assign_size_bin(t.size(), config.bin_base).map(|bin| (t, bin)))
            .collect();
        let mut bin_counts: BTreeMap<SizeBin, usize> = BTreeMap::new();
        for (_, bin) in &binned {
            *bin_counts.entry(*bin).or_insert(0) += 1;
        }
        let kept_bins = filter_size_bins(&bin_counts);
        binned.retain(|(_, bin)| kept_bins.contains(bin));

        // Redundancy filter within each category.
        let mut by_category: BTreeMap<String, Vec<(scimap::topics::Topic, SizeBin)>> =
            BTreeMap::new();
        for (t, bin) in binned {
            by_category
                .entry(t.category.clone())
                .or_default()
                .push((t, bin));
        }
        let mut survivors: Vec<(scimap::topics::Topic, SizeBin)> = Vec::new();
        for (_, group) in by_category {
            let topics_only: Vec<scimap::topics::Topic> =
                group.iter().map(|(t, _)| t.clone()).collect();
            let kept = redundancy_filter(&topics_only, config.jaccard_threshold, config.seed);
            for idx in kept {
                survivors.push(group[idx].clone());
            }
        }

        // Category filter over the survivors.
        let mut cat_bin_counts: BTreeMap<String, BTreeMap<SizeBin, usize>> = BTreeMap::new();
        for (t, bin) in &survivors {
            *cat_bin_counts
                .entry(t.category.clone())
                .or_default()
                .entry(*bin)
                .or_insert(0) += 1;
        }
        let kept_categories = filter_categories(&cat_bin_counts, &kept_bins, config.min_per_bin);

        let topics: Vec<EvalTopic> = survivors
            .into_iter()
            .filter(|(t, _)| kept_categories.contains(&t.category))
            .map(|(t, bin)| EvalTopic {
                code: t.code,
                category: t.category,
                bin,
                docs_global: t.docs,
            })
            .collect();
        if topics.is_empty() {
            warnings.push(format!(
                "topic stage {stage_idx}: no topics survive filtering"
            ));
        }
        stages.push(TopicStage { topics });
    }
    Ok(stages)
}

/// Calibrates (or takes the configured) gamma range per network and runs
/// the sweep.
fn cluster_networks(
    config: &RunConfig,
    networks: Vec<(Variant, usize, Network)>,
    topic_stages: &[TopicStage],
    tables: &Tables,
    warnings: &mut Vec<String>,
) -> Result<Vec<NetworkRun>, PipelineError> {
    let stage: &'static str = "clustering";
    let mut pure_range: Option<(f64, f64)> = None;
    let mut runs = Vec::with_capacity(networks.len());
    for (variant, stage_idx, network) in networks {
        let tag = match variant {
            Variant::Pure => 0u64,
            Variant::Similarity => 1,
            Variant::Mixed => 2,
            Variant::ExtendedCitation => 3,
        };
        let seed = derive_stream_seed(config.seed, tag);
        let range = match config.gamma_range {
            Some(range) => range,
            None => match calibrate_gamma_range(&network, seed) {
                Ok(cal) => {
                    for w in &cal.warnings {
                        warnings.push(format!("{variant}: {w}"));
                    }
                    (cal.gamma_min, cal.gamma_max)
                }
                Err(e) => match pure_range {
                    Some(range) => {
                        warnings.push(format!(
                            "{variant}: calibration failed ({e}); reusing the pure network's range"
                        ));
                        range
                    }
                    None => {
                        return Err(PipelineError {
                            stage,
                            message: format!("{variant}: calibration failed: {e}"),
                        })
                    }
                },
            },
        };
        if variant == Variant::Pure {
            pure_range = Some(range);
        }
        let plan = generate_sweep(range.0, range.1, config.sweep_count, seed, config.iterations)
            .map_err(stage_err(stage))?;
        let solutions = run_sweep(&network, &plan);

        // Map each stage topic's documents to node indices in this network.
        let topic_nodes: Vec<Vec<u32>> = topic_stages[stage_idx]
            .topics
            .iter()
            .map(|t| {
                t.docs_global
                    .iter()
                    .map(|&g| {
                        network
                            .node_index(&tables.documents[g as usize])
                            .expect("topic documents are drawn from the network's subset")
                    })
                    .collect()
            })
            .collect();

        runs.push(NetworkRun {
            variant,
            stage: stage_idx,
            network,
            solutions,
            gamma_range: range,
            topic_nodes,
            points: Vec::new(),
        });
    }
    Ok(runs)
}

/// points[topic][coverage] or [solution][topic] layers of (nsc, purity).
type PointGrid = Vec<Vec<Vec<(usize, f64)>>>;

/// Computes (nsc, purity) for every (network, solution, topic, coverage).
fn measure(
    config: &RunConfig,
    runs: &mut [NetworkRun],
    topic_stages: &[TopicStage],
) -> Result<(), PipelineError> {
    for run in runs.iter_mut() {
        let n_topics = topic_stages[run.stage].topics.len();
        // [solution][topic][coverage]
        let per_solution: Result<PointGrid, PipelineError> = run
            .solutions
            .par_iter()
            .map(|sol| {
                run.topic_nodes
                    .iter()
                    .map(|nodes| {
                        config
                            .coverages
                            .iter()
                            .map(|&cov| {
                                select_clusters(sol, nodes, cov)
                                    .map(|sel| (sel.nsc, sel.purity))
                                    .map_err(stage_err("measurement"))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let per_solution = per_solution?;

        // Transpose to [topic][coverage][solution].
        let mut points =
            vec![vec![Vec::with_capacity(run.solutions.len()); config.coverages.len()]; n_topics];
        for sol_points in per_solution {
            for (t, topic_points) in sol_points.into_iter().enumerate() {
                for (c, p) in topic_points.into_iter().enumerate() {
                    points[t][c].push(p);
                }
            }
        }
        run.points = points;
    }
    Ok(())
}

/// Per (network, coverage): topic code -> profile. Topics whose grid is
/// empty at a coverage are excluded there.
type TopicProfileMap = BTreeMap<(Variant, usize), BTreeMap<String, PurityProfile>>;

fn build_topic_profiles(
    config: &RunConfig,
    runs: &[NetworkRun],
    topic_stages: &[TopicStage],
) -> TopicProfileMap {
    let mut out: TopicProfileMap = BTreeMap::new();
    for run in runs {
        for (c, _) in config.coverages.iter().enumerate() {
            let mut map = BTreeMap::new();
            for (t, topic) in topic_stages[run.stage].topics.iter().enumerate() {
                let coverage = config.coverages[c];
                if profile_grid_len(topic.size(), coverage) == 0 {
                    continue;
                }
                let profile =
                    build_topic_profile(&topic.code, &run.points[t][c], topic.size(), coverage)
                        .expect("non-empty grid and at least one solution point");
                map.insert(topic.code.clone(), profile);
            }
            out.insert((run.variant, c), map);
        }
    }
    out
}

/// Absolute purity differences: per (category, coverage, variant), the
/// fraction of the category's topics clustering better than in the
/// similarity reference.
fn absolute_track(
    config: &RunConfig,
    runs: &[NetworkRun],
    topic_stages: &[TopicStage],
    profiles: &TopicProfileMap,
    warnings: &mut Vec<String>,
) -> BTreeMap<(String, usize, Variant), f64> {
    let mut out = BTreeMap::new();
    for run in runs {
        if run.variant == Variant::Similarity {
            continue;
        }
        let category_of: HashMap<&str, &str> = topic_stages[run.stage]
            .topics
            .iter()
            .map(|t| (t.code.as_str(), t.category.as_str()))
            .collect();
        for c in 0..config.coverages.len() {
            let x_map = &profiles[&(run.variant, c)];
            let bert_map = &profiles[&(Variant::Similarity, c)];
            let mut per_category: BTreeMap<&str, Vec<(&PurityProfile, &PurityProfile)>> =
                BTreeMap::new();
            let mut skipped_grids = 0usize;
            for (code, x_profile) in x_map {
                let Some(bert_profile) = bert_map.get(code) else {
                    continue;
                };
                if x_profile.grid_len() != bert_profile.grid_len() {
                    skipped_grids += 1;
                    continue;
                }
                per_category
                    .entry(category_of[code.as_str()])
                    .or_default()
                    .push((x_profile, bert_profile));
            }
            if skipped_grids > 0 {
                warnings.push(format!(
                    "{}: {skipped_grids} topic(s) skipped in the absolute comparison at coverage {} (grid mismatch against the reference subset)",
                    run.variant, config.coverages[c]
                ));
            }
            for (category, pairs) in per_category {
                let diff = absolute_purity_difference(pairs)
                    .expect("per-category pair lists are non-empty");
                out.insert((category.to_string(), c, run.variant), diff);
            }
        }
    }
    out
}

type CategoryProfileMap = BTreeMap<(Variant, usize), BTreeMap<(String, SizeBin), CategoryProfile>>;
type TopThirdMap = BTreeMap<(String, usize, Variant), f64>;

/// Relative track: category profiles per size bin, top-third counts, and
/// differences against the similarity reference.
fn relative_track(
    config: &RunConfig,
    runs: &[NetworkRun],
    topic_stages: &[TopicStage],
    warnings: &mut Vec<String>,
) -> (CategoryProfileMap, TopThirdMap, TopThirdMap) {
    let mut profiles: CategoryProfileMap = BTreeMap::new();
    let mut top_third: TopThirdMap = BTreeMap::new();

    for run in runs {
        let stage = &topic_stages[run.stage];
        // (category, bin) -> topic indices
        let mut cells: BTreeMap<(String, SizeBin), Vec<usize>> = BTreeMap::new();
        for (t, topic) in stage.topics.iter().enumerate() {
            cells
                .entry((topic.category.clone(), topic.bin))
                .or_default()
                .push(t);
        }

        for c in 0..config.coverages.len() {
            let coverage = config.coverages[c];
            let mut map: BTreeMap<(String, SizeBin), CategoryProfile> = BTreeMap::new();
            for ((category, bin), topic_idxs) in &cells {
                if bin_grid_len(bin, coverage) == 0 {
                    continue;
                }
                let anchors: Vec<(f64, f64)> = (0..run.solutions.len())
                    .map(|s| {
                        average_solution_points(
                            topic_idxs.iter().map(|&t| run.points[t][c][s]),
                        )
                        .expect("cells hold at least one topic")
                    })
                    .collect();
                let profile = build_category_profile(category, *bin, coverage, &anchors)
                    .expect("non-empty grid and anchors");
                map.insert((category.clone(), *bin), profile);
            }

            // Rankings per bin; bins with a single category cannot be ranked.
            let bins: BTreeSet<SizeBin> = map.keys().map(|(_, bin)| *bin).collect();
            let mut fractions: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            for bin in bins {
                let in_bin: Vec<&CategoryProfile> = map
                    .iter()
                    .filter(|((_, b), _)| *b == bin)
                    .map(|(_, p)| p)
                    .collect();
                if in_bin.len() < 2 {
                    warnings.push(format!(
                        "{}: top-third ranking skipped for bin {} at coverage {coverage} (single category)",
                        run.variant,
                        bin.label()
                    ));
                    continue;
                }
                let ranked = top_third_membership(&in_bin)
                    .expect("profiles in one bin share the grid by construction");
                for (category, fraction) in ranked {
                    fractions.entry(category).or_default().push(fraction);
                }
            }
            for (category, per_bin) in fractions {
                top_third.insert(
                    (category, c, run.variant),
                    top_third_count(&per_bin),
                );
            }
            profiles.insert((run.variant, c), map);
        }
    }

    // Relative differences against the similarity reference.
    let mut relative: TopThirdMap = BTreeMap::new();
    for ((category, c, variant), &count) in &top_third {
        if *variant == Variant::Similarity {
            continue;
        }
        if let Some(&reference) = top_third.get(&(category.clone(), *c, Variant::Similarity)) {
            relative.insert(
                (category.clone(), *c, *variant),
                relative_purity_difference(count, reference),
            );
        }
    }
    (profiles, top_third, relative)
}

/// Writes every report file plus the manifest; on failure the files
/// written so far are removed.
#[allow(clippy::too_many_arguments)]
fn write_reports(
    config: &RunConfig,
    tables: &Tables,
    runs: &[NetworkRun],
    topic_profiles: &TopicProfileMap,
    category_profiles: &CategoryProfileMap,
    top_third: &TopThirdMap,
    absolute: &BTreeMap<(String, usize, Variant), f64>,
    relative: &TopThirdMap,
    mut clock: StageClock,
    mut warnings: Vec<String>,
) -> Result<RunManifest, PipelineError> {
    let stage: &'static str = "reports";
    let out_dir = &config.output;
    fs::create_dir_all(out_dir).map_err(stage_err(stage))?;

    let mut solution_rows = Vec::new();
    for run in runs {
        for (i, sol) in run.solutions.iter().enumerate() {
            solution_rows.push(SolutionRow {
                network: run.variant.to_string(),
                gamma_index: i,
                gamma: sol.resolution,
                seed: sol.seed,
                clusters: sol.cluster_count(),
                quality: sol.quality,
            });
        }
    }

    let mut topic_rows = Vec::new();
    for ((variant, c), map) in topic_profiles {
        for (code, profile) in map {
            for (i, &purity) in profile.values.iter().enumerate() {
                topic_rows.push(TopicProfileRow {
                    network: variant.to_string(),
                    topic: code.clone(),
                    coverage: config.coverages[*c],
                    nsc: i + 1,
                    purity,
                });
            }
        }
    }
    topic_rows.sort_by(|a, b| {
        a.topic
            .cmp(&b.topic)
            .then(a.coverage.partial_cmp(&b.coverage).unwrap())
            .then(a.network.cmp(&b.network))
            .then(a.nsc.cmp(&b.nsc))
    });

    let mut category_rows = Vec::new();
    for ((variant, c), map) in category_profiles {
        for ((category, bin), profile) in map {
            for (i, &purity) in profile.values.iter().enumerate() {
                category_rows.push(CategoryProfileRow {
                    network: variant.to_string(),
                    category: category.clone(),
                    bin: bin.label(),
                    bin_lower: bin.lower,
                    coverage: config.coverages[*c],
                    nsc: i + 1,
                    purity,
                });
            }
        }
    }
    category_rows.sort_by(|a, b| {
        a.category
            .cmp(&b.category)
            .then(a.bin_lower.cmp(&b.bin_lower))
            .then(a.coverage.partial_cmp(&b.coverage).unwrap())
            .then(a.network.cmp(&b.network))
            .then(a.nsc.cmp(&b.nsc))
    });

    // Summary rows: one per (category, coverage, network) holding whichever
    // measures exist for that combination.
    let mut summary_keys: BTreeSet<(String, usize, Variant)> = BTreeSet::new();
    summary_keys.extend(top_third.keys().cloned());
    summary_keys.extend(absolute.keys().cloned());
    summary_keys.extend(relative.keys().cloned());
    let summary_rows: Vec<SummaryRow> = summary_keys
        .into_iter()
        .map(|(category, c, variant)| SummaryRow {
            category: category.clone(),
            coverage: config.coverages[c],
            network: variant.to_string(),
            top_third_count: top_third.get(&(category.clone(), c, variant)).copied(),
            absolute_diff: absolute.get(&(category.clone(), c, variant)).copied(),
            relative_diff: relative.get(&(category.clone(), c, variant)).copied(),
        })
        .collect();

    let mut written: Vec<PathBuf> = Vec::new();
    let mut outputs: BTreeMap<String, String> = BTreeMap::new();
    let mut write_file = |name: &str, content: String| -> Result<(), PipelineError> {
        let path = out_dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(stage_err(stage))?;
        }
        fs::write(&path, &content).map_err(stage_err(stage))?;
        written.push(path);
        outputs.insert(name.to_string(), sha256_hex(content.as_bytes()));
        Ok(())
    };

    let result = (|| -> Result<(), PipelineError> {
        write_file("solutions.csv", report::render_solutions(&solution_rows))?;
        write_file(
            "topic_profiles.csv",
            report::render_topic_profiles(&topic_rows),
        )?;
        write_file(
            "category_profiles.csv",
            report::render_category_profiles(&category_rows),
        )?;
        write_file("summary.csv", report::render_summary(&summary_rows))?;
        if config.dump_solutions {
            for run in runs {
                for (i, sol) in run.solutions.iter().enumerate() {
                    let mut buf = Vec::new();
                    scimap::clustering::export_solution(sol, &run.network, &mut buf)
                        .map_err(stage_err(stage))?;
                    let name = format!("solutions/{}_{i:04}.tsv", run.variant);
                    write_file(&name, String::from_utf8(buf).expect("exports are UTF-8"))?;
                }
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        for path in &written {
            let _ = fs::remove_file(path);
        }
        return Err(e);
    }

    let mut inputs: BTreeMap<String, String> = BTreeMap::new();
    let mut input_paths = vec![
        config.links.clone(),
        config.similarity.clone(),
        config.documents.clone(),
        config.annotations.clone(),
        config.tree.clone(),
    ];
    input_paths.extend(config.categories.clone());
    input_paths.extend(config.citations.clone());
    for path in input_paths {
        let bytes = fs::read(&path).map_err(stage_err(stage))?;
        inputs.insert(path.display().to_string(), sha256_hex(&bytes));
    }
    let _ = tables; // inputs are digested from the files themselves

    let gamma_ranges = runs
        .iter()
        .map(|r| {
            (
                r.variant.to_string(),
                [r.gamma_range.0, r.gamma_range.1],
            )
        })
        .collect();

    warnings.sort();
    warnings.dedup();
    clock.lap("reports");
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        inputs,
        outputs,
        gamma_ranges,
        stages: clock.stages,
        warnings,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(stage_err(stage))?;
    fs::write(out_dir.join("manifest.json"), json + "\n").map_err(stage_err(stage))?;
    Ok(manifest)
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
