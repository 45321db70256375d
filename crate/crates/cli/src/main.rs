use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scimap::synth::{self, PlantedSpec, SimilarityMode};
use scimap_cli::config::{parse_config_str, PartialConfig, RunConfig};
use scimap_cli::ingest::ingest;
use scimap_cli::pipeline::run_pipeline;
use scimap_cli::plot::{nearest_subjects, render_profile_svg, PlotError};
use scimap_cli::report::{parse_category_profiles, parse_topic_profiles};

#[derive(Parser)]
#[command(
    name = "scimap",
    version,
    about = "Document networks, clustering sweeps, and topic purity reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate input files and report table sizes without running anything.
    IngestCheck(RunArgs),
    /// Run the full pipeline and write reports into the output directory.
    Run(RunArgs),
    /// Render purity-profile SVG plots from a finished run's output.
    Plot(PlotArgs),
    /// Generate a synthetic planted-topic corpus as pipeline input files.
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file of `key = value` lines; flags override file settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    links: Option<PathBuf>,
    #[arg(long)]
    similarity: Option<PathBuf>,
    #[arg(long)]
    documents: Option<PathBuf>,
    #[arg(long)]
    annotations: Option<PathBuf>,
    #[arg(long)]
    tree: Option<PathBuf>,
    #[arg(long)]
    categories: Option<PathBuf>,
    #[arg(long)]
    citations: Option<PathBuf>,
    /// Comma-separated coverage values, e.g. 0.25,0.5,0.75
    #[arg(long)]
    coverages: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    bin_base: Option<u64>,
    #[arg(long)]
    min_per_bin: Option<usize>,
    #[arg(long)]
    jaccard_threshold: Option<f64>,
    #[arg(long)]
    gamma_min: Option<f64>,
    #[arg(long)]
    gamma_max: Option<f64>,
    #[arg(long)]
    sweep_count: Option<usize>,
    #[arg(long)]
    iterations: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write one per-node assignment file per clustering solution.
    #[arg(long)]
    dump_solutions: bool,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, String> {
        let base = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                parse_config_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
            }
            None => PartialConfig::default(),
        };
        let coverages = match &self.coverages {
            Some(list) => {
                let mut out = Vec::new();
                for part in list.split(',') {
                    out.push(
                        part.trim()
                            .parse::<f64>()
                            .map_err(|_| format!("invalid coverage value {part:?}"))?,
                    );
                }
                Some(out)
            }
            None => None,
        };
        let overrides = PartialConfig {
            links: self.links.clone(),
            similarity: self.similarity.clone(),
            documents: self.documents.clone(),
            annotations: self.annotations.clone(),
            tree: self.tree.clone(),
            categories: self.categories.clone(),
            citations: self.citations.clone(),
            coverages,
            k: self.k,
            bin_base: self.bin_base,
            min_per_bin: self.min_per_bin,
            jaccard_threshold: self.jaccard_threshold,
            gamma_min: self.gamma_min,
            gamma_max: self.gamma_max,
            sweep_count: self.sweep_count,
            iterations: self.iterations,
            seed: self.seed,
            output: self.output.clone(),
            dump_solutions: if self.dump_solutions { Some(true) } else { None },
        };
        base.merged(overrides).resolve().map_err(|e| e.to_string())
    }
}

#[derive(Args)]
struct PlotArgs {
    /// Output directory of a finished run.
    #[arg(long)]
    dir: PathBuf,
    /// Topic code, or category id when --bin is given.
    #[arg(long)]
    subject: String,
    #[arg(long)]
    coverage: f64,
    /// Size-bin label (e.g. 41-80) to plot a category profile.
    #[arg(long)]
    bin: Option<String>,
    /// Comma-separated network variants; default: all present.
    #[arg(long)]
    variants: Option<String>,
    /// Where to write the SVG; default: <dir>/plots/<subject>_<coverage>.svg
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 3)]
    topics: usize,
    #[arg(long, default_value_t = 100)]
    docs_per_topic: usize,
    #[arg(long, default_value_t = 200)]
    elements: usize,
    #[arg(long, default_value_t = 0.95)]
    p_in: f64,
    #[arg(long, default_value_t = 0.02)]
    p_out: f64,
    #[arg(long, default_value_t = 3)]
    links_per_element: usize,
    #[arg(long, default_value = "aligned")]
    similarity_mode: String,
    #[arg(long, default_value_t = 3)]
    tree_depth: usize,
    /// Distribute topics round-robin over this many categories.
    #[arg(long, default_value_t = 1)]
    category_count: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::IngestCheck(args) => {
            let config = args.resolve()?;
            let tables = ingest(&config).map_err(|e| format!("[ingest] {e}"))?;
            println!("documents\t{}", tables.documents.len());
            println!("links\t{}", tables.links.len());
            println!("similarity\t{}", tables.similarity.len());
            println!(
                "citations\t{}",
                tables.citations.as_ref().map_or(0, Vec::len)
            );
            println!("annotations\t{}", tables.annotations.len());
            println!("tree_nodes\t{}", tables.tree.len());
            println!("categories\t{}", tables.categories.categories().len());
            Ok(())
        }
        Command::Run(args) => {
            let config = args.resolve()?;
            let manifest = run_pipeline(&config).map_err(|e| e.to_string())?;
            for warning in &manifest.warnings {
                eprintln!("warning: {warning}");
            }
            println!(
                "wrote {} report file(s) to {}",
                manifest.outputs.len(),
                config.output.display()
            );
            Ok(())
        }
        Command::Plot(args) => plot_command(args),
        Command::Synth(args) => synth_command(args),
    }
}

fn plot_command(args: PlotArgs) -> Result<(), String> {
    let wanted: Option<BTreeSet<String>> = args.variants.as_ref().map(|list| {
        list.split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    });
    if let Some(w) = &wanted {
        if w.is_empty() {
            return Err(PlotError::EmptyVariantFilter.to_string());
        }
    }

    // series: variant -> (nsc, purity) points; subjects: everything
    // plottable, for suggestions when the query misses.
    let mut series: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    let mut subjects: BTreeSet<String> = BTreeSet::new();
    match &args.bin {
        None => {
            let path = args.dir.join("topic_profiles.csv");
            let text =
                std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let rows = parse_topic_profiles(&text)
                .map_err(|e| format!("{} line {}: {}", path.display(), e.line, e.message))?;
            for row in rows {
                subjects.insert(row.topic.clone());
                if row.topic == args.subject && row.coverage == args.coverage {
                    series
                        .entry(row.network)
                        .or_default()
                        .push((row.nsc, row.purity));
                }
            }
        }
        Some(bin) => {
            let path = args.dir.join("category_profiles.csv");
            let text =
                std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let rows = parse_category_profiles(&text)
                .map_err(|e| format!("{} line {}: {}", path.display(), e.line, e.message))?;
            for row in rows {
                subjects.insert(row.category.clone());
                if row.category == args.subject && row.coverage == args.coverage && &row.bin == bin
                {
                    series
                        .entry(row.network)
                        .or_default()
                        .push((row.nsc, row.purity));
                }
            }
        }
    }
    if series.is_empty() {
        return Err(PlotError::UnknownSubject {
            subject: args.subject.clone(),
            nearest: nearest_subjects(&args.subject, subjects.into_iter()),
        }
        .to_string());
    }
    if let Some(wanted) = &wanted {
        series.retain(|variant, _| wanted.contains(variant));
        if series.is_empty() {
            return Err("no selected variant has a profile for this subject".to_string());
        }
    }
    let series: BTreeMap<String, Vec<f64>> = series
        .into_iter()
        .map(|(variant, mut points)| {
            points.sort_by_key(|&(nsc, _)| nsc);
            (variant, points.into_iter().map(|(_, p)| p).collect())
        })
        .collect();

    let svg =
        render_profile_svg(&args.subject, args.coverage, &series).map_err(|e| e.to_string())?;
    let out = args.out.unwrap_or_else(|| {
        args.dir.join("plots").join(format!(
            "{}_{}.svg",
            args.subject.replace('.', "_"),
            args.coverage
        ))
    });
    if let Some(parent) = out.parent() {
        std::fs::create_dir_all(parent).map_err(|e| format!("{}: {e}", parent.display()))?;
    }
    std::fs::write(&out, svg).map_err(|e| format!("{}: {e}", out.display()))?;
    println!("wrote {}", out.display());
    Ok(())
}

fn synth_command(args: SynthArgs) -> Result<(), String> {
    let mode: SimilarityMode = args.similarity_mode.parse()?;
    let mut spec = PlantedSpec::new(
        args.topics,
        args.docs_per_topic,
        args.elements,
        args.p_in,
        args.p_out,
        args.links_per_element,
        mode,
        args.seed,
    );
    spec.tree_depth = args.tree_depth;
    if args.category_count > 1 {
        spec.categories = (0..args.topics)
            .map(|t| (t, format!("C{:02}", (t % args.category_count) + 1)))
            .collect();
    }
    let corpus = synth::generate(&spec).map_err(|e| e.to_string())?;
    synth::write_fixture(&corpus, &args.out).map_err(|e| e.to_string())?;
    println!(
        "wrote planted corpus ({} documents, {} elements) to {}",
        corpus.documents.len(),
        args.elements,
        args.out.display()
    );
    Ok(())
}
