//! Run configuration: a `key = value` file plus command-line overrides.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: expected `key = value`")]
    Malformed { line: usize },
    #[error("config line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("invalid value for {key}: {value:?} ({reason})")]
    BadValue {
        key: &'static str,
        value: String,
        reason: String,
    },
    #[error("missing required setting: {0}")]
    Missing(&'static str),
    #[error("coverages must lie in (0, 1], got {0}")]
    BadCoverage(f64),
    #[error("sweep count must lie in [2, 10000], got {0}")]
    BadSweepCount(usize),
    #[error("gamma range requires 0 < gamma_min < gamma_max, got [{0}, {1}]")]
    BadGammaRange(f64, f64),
    #[error("gamma_min and gamma_max must be set together")]
    HalfGammaRange,
    #[error("{0} must be at least 1")]
    BelowOne(&'static str),
    #[error("jaccard threshold must lie in (0, 1], got {0}")]
    BadJaccard(f64),
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub links: PathBuf,
    pub similarity: PathBuf,
    pub documents: PathBuf,
    pub annotations: PathBuf,
    pub tree: PathBuf,
    pub categories: Option<PathBuf>,
    pub citations: Option<PathBuf>,
    pub coverages: Vec<f64>,
    pub k: usize,
    pub bin_base: u64,
    pub min_per_bin: usize,
    pub jaccard_threshold: f64,
    pub gamma_range: Option<(f64, f64)>,
    pub sweep_count: usize,
    pub iterations: u32,
    pub seed: u64,
    pub output: PathBuf,
    pub dump_solutions: bool,
}

/// Partially specified configuration; file settings and command-line
/// overrides merge before resolution.
#[derive(Debug, Clone, Default)]
pub struct PartialConfig {
    pub links: Option<PathBuf>,
    pub similarity: Option<PathBuf>,
    pub documents: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub tree: Option<PathBuf>,
    pub categories: Option<PathBuf>,
    pub citations: Option<PathBuf>,
    pub coverages: Option<Vec<f64>>,
    pub k: Option<usize>,
    pub bin_base: Option<u64>,
    pub min_per_bin: Option<usize>,
    pub jaccard_threshold: Option<f64>,
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
    pub sweep_count: Option<usize>,
    pub iterations: Option<u32>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub dump_solutions: Option<bool>,
}

impl PartialConfig {
    /// Later settings win: `self` is the base, `over` the override.
    pub fn merged(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            links: over.links.or(self.links),
            similarity: over.similarity.or(self.similarity),
            documents: over.documents.or(self.documents),
            annotations: over.annotations.or(self.annotations),
            tree: over.tree.or(self.tree),
            categories: over.categories.or(self.categories),
            citations: over.citations.or(self.citations),
            coverages: over.coverages.or(self.coverages),
            k: over.k.or(self.k),
            bin_base: over.bin_base.or(self.bin_base),
            min_per_bin: over.min_per_bin.or(self.min_per_bin),
            jaccard_threshold: over.jaccard_threshold.or(self.jaccard_threshold),
            gamma_min: over.gamma_min.or(self.gamma_min),
            gamma_max: over.gamma_max.or(self.gamma_max),
            sweep_count: over.sweep_count.or(self.sweep_count),
            iterations: over.iterations.or(self.iterations),
            seed: over.seed.or(self.seed),
            output: over.output.or(self.output),
            dump_solutions: over.dump_solutions.or(self.dump_solutions),
        }
    }

    /// Applies defaults and validates.
    pub fn resolve(self) -> Result<RunConfig, ConfigError> {
        let mut coverages = self.coverages.unwrap_or_else(|| vec![0.25, 0.5, 0.75]);
        for &c in &coverages {
            if !(c > 0.0 && c <= 1.0) {
                return Err(ConfigError::BadCoverage(c));
            }
        }
        coverages.sort_by(|a, b| a.partial_cmp(b).unwrap());
        coverages.dedup();

        let sweep_count = self.sweep_count.unwrap_or(100);
        if !(2..=10_000).contains(&sweep_count) {
            return Err(ConfigError::BadSweepCount(sweep_count));
        }
        let gamma_range = match (self.gamma_min, self.gamma_max) {
            (None, None) => None,
            (Some(lo), Some(hi)) => {
                if !(lo > 0.0 && lo < hi) {
                    return Err(ConfigError::BadGammaRange(lo, hi));
                }
                Some((lo, hi))
            }
            _ => return Err(ConfigError::HalfGammaRange),
        };
        let k = self.k.unwrap_or(20);
        if k < 1 {
            return Err(ConfigError::BelowOne("k"));
        }
        let bin_base = self.bin_base.unwrap_or(40);
        if bin_base < 1 {
            return Err(ConfigError::BelowOne("bin_base"));
        }
        let min_per_bin = self.min_per_bin.unwrap_or(5);
        if min_per_bin < 1 {
            return Err(ConfigError::BelowOne("min_per_bin"));
        }
        let jaccard_threshold = self.jaccard_threshold.unwrap_or(0.5);
        if !(jaccard_threshold > 0.0 && jaccard_threshold <= 1.0) {
            return Err(ConfigError::BadJaccard(jaccard_threshold));
        }
        let iterations = self.iterations.unwrap_or(10);
        if iterations < 1 {
            return Err(ConfigError::BelowOne("iterations"));
        }

        Ok(RunConfig {
            links: self.links.ok_or(ConfigError::Missing("links"))?,
            similarity: self.similarity.ok_or(ConfigError::Missing("similarity"))?,
            documents: self.documents.ok_or(ConfigError::Missing("documents"))?,
            annotations: self
                .annotations
                .ok_or(ConfigError::Missing("annotations"))?,
            tree: self.tree.ok_or(ConfigError::Missing("tree"))?,
            categories: self.categories,
            citations: self.citations,
            coverages,
            k,
            bin_base,
            min_per_bin,
            jaccard_threshold,
            gamma_range,
            sweep_count,
            iterations,
            seed: self.seed.unwrap_or(42),
            output: self.output.ok_or(ConfigError::Missing("output"))?,
            dump_solutions: self.dump_solutions.unwrap_or(false),
        })
    }
}

/// Parses a config file: one `key = value` per line, `#` comments, blank
/// lines allowed. Unknown and duplicate keys are errors.
pub fn parse_config_str(text: &str) -> Result<PartialConfig, ConfigError> {
    let mut out = PartialConfig::default();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Malformed { line });
        };
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(ConfigError::Malformed { line });
        }
        if seen.insert(key.to_string(), line).is_some() {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
        apply_key(&mut out, key, value, line)?;
    }
    Ok(out)
}

fn apply_key(
    out: &mut PartialConfig,
    key: &str,
    value: &str,
    line: usize,
) -> Result<(), ConfigError> {
    fn num<T: std::str::FromStr>(key: &'static str, value: &str) -> Result<T, ConfigError> {
        value.parse().map_err(|_| ConfigError::BadValue {
            key,
            value: value.to_string(),
            reason: "not a valid number".to_string(),
        })
    }
    match key {
        "links" => out.links = Some(PathBuf::from(value)),
        "similarity" => out.similarity = Some(PathBuf::from(value)),
        "documents" => out.documents = Some(PathBuf::from(value)),
        "annotations" => out.annotations = Some(PathBuf::from(value)),
        "tree" => out.tree = Some(PathBuf::from(value)),
        "categories" => out.categories = Some(PathBuf::from(value)),
        "citations" => out.citations = Some(PathBuf::from(value)),
        "output" => out.output = Some(PathBuf::from(value)),
        "coverages" => {
            let mut list = Vec::new();
            for part in value.split(',') {
                list.push(num::<f64>("coverages", part.trim())?);
            }
            out.coverages = Some(list);
        }
        "k" => out.k = Some(num("k", value)?),
        "bin_base" => out.bin_base = Some(num("bin_base", value)?),
        "min_per_bin" => out.min_per_bin = Some(num("min_per_bin", value)?),
        "jaccard_threshold" => out.jaccard_threshold = Some(num("jaccard_threshold", value)?),
        "gamma_min" => out.gamma_min = Some(num("gamma_min", value)?),
        "gamma_max" => out.gamma_max = Some(num("gamma_max", value)?),
        "sweep_count" => out.sweep_count = Some(num("sweep_count", value)?),
        "iterations" => out.iterations = Some(num("iterations", value)?),
        "seed" => out.seed = Some(num("seed", value)?),
        "dump_solutions" => {
            out.dump_solutions = Some(match value {
                "true" | "1" | "yes" => true,
                "false" | "0" | "no" => false,
                _ => {
                    return Err(ConfigError::BadValue {
                        key: "dump_solutions",
                        value: value.to_string(),
                        reason: "expected true or false".to_string(),
                    })
                }
            })
        }
        _ => {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            })
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> PartialConfig {
        parse_config_str(
            "links = a.tsv\nsimilarity = s.tsv\ndocuments = d.tsv\n\
             annotations = an.tsv\ntree = t.tsv\noutput = out\n",
        )
        .unwrap()
    }

    #[test]
    fn defaults_apply() {
        let cfg = base().resolve().unwrap();
        assert_eq!(cfg.coverages, vec![0.25, 0.5, 0.75]);
        assert_eq!(cfg.k, 20);
        assert_eq!(cfg.bin_base, 40);
        assert_eq!(cfg.min_per_bin, 5);
        assert_eq!(cfg.jaccard_threshold, 0.5);
        assert_eq!(cfg.sweep_count, 100);
        assert_eq!(cfg.iterations, 10);
        assert_eq!(cfg.seed, 42);
        assert!(cfg.gamma_range.is_none());
        assert!(!cfg.dump_solutions);
    }

    #[test]
    fn file_values_and_comments_parse() {
        let text = "# a comment\nlinks = a.tsv # trailing\ncoverages = 0.5, 0.75\nseed = 7\n\n";
        let p = parse_config_str(text).unwrap();
        assert_eq!(p.links.unwrap(), PathBuf::from("a.tsv"));
        assert_eq!(p.coverages.unwrap(), vec![0.5, 0.75]);
        assert_eq!(p.seed.unwrap(), 7);
    }

    #[test]
    fn override_wins() {
        let over = PartialConfig {
            seed: Some(9),
            ..PartialConfig::default()
        };
        let cfg = base().merged(over).resolve().unwrap();
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(matches!(
            parse_config_str("mystery = 1\n"),
            Err(ConfigError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            parse_config_str("seed = 1\nseed = 2\n"),
            Err(ConfigError::DuplicateKey { line: 2, .. })
        ));
        assert!(matches!(
            parse_config_str("seed\n"),
            Err(ConfigError::Malformed { line: 1 })
        ));
    }

    #[test]
    fn validation_catches_bad_settings() {
        let mut p = base();
        p.coverages = Some(vec![0.0]);
        assert!(matches!(p.resolve(), Err(ConfigError::BadCoverage(_))));

        let mut p = base();
        p.sweep_count = Some(1);
        assert!(matches!(p.resolve(), Err(ConfigError::BadSweepCount(1))));

        let mut p = base();
        p.gamma_min = Some(1.0);
        assert!(matches!(p.resolve(), Err(ConfigError::HalfGammaRange)));

        let mut p = base();
        p.gamma_min = Some(2.0);
        p.gamma_max = Some(1.0);
        assert!(matches!(p.resolve(), Err(ConfigError::BadGammaRange(..))));
    }

    #[test]
    fn missing_required_setting_is_reported() {
        let p = parse_config_str("links = a.tsv\n").unwrap();
        assert!(matches!(p.resolve(), Err(ConfigError::Missing(_))));
    }
}
