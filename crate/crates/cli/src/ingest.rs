//! File ingestion and validation for the pipeline's tab-separated inputs.
//!
//! Each table has a string-level parser (also the fuzzing surface) that
//! checks the header, field counts, and field syntax; `ingest` combines the
//! tables and verifies referential integrity.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use scimap::topics::{CategoryConfig, CategoryDef, TopicTree};

use crate::config::RunConfig;

/// Offender lists in dangling-reference errors are capped at this length.
const MAX_OFFENDERS: usize = 20;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: not valid UTF-8")]
    NotUtf8 { path: String },
    #[error("{file} line {line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("{file}: {kind} references unknown documents ({total} total): {}", offenders.join(", "))]
    Dangling {
        file: String,
        kind: &'static str,
        offenders: Vec<String>,
        total: usize,
    },
    #[error("{file}: {source}")]
    Tree {
        file: String,
        source: scimap::topics::TopicError,
    },
}

/// A row-level parse failure; the caller attaches the file name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: usize,
    pub message: String,
}

fn rows_with_header<'a>(
    text: &'a str,
    header: &str,
    fields: usize,
) -> Result<Vec<(usize, Vec<&'a str>)>, RowError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first == header => {}
        Some((_, first)) => {
            return Err(RowError {
                line: 1,
                message: format!("expected header {header:?}, got {first:?}"),
            })
        }
        None => {
            return Err(RowError {
                line: 1,
                message: format!("empty file, expected header {header:?}"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        if raw.is_empty() {
            continue;
        }
        let parts: Vec<&str> = raw.split('\t').collect();
        if parts.len() != fields {
            return Err(RowError {
                line,
                message: format!("expected {fields} fields, got {}", parts.len()),
            });
        }
        if parts.iter().any(|p| p.is_empty()) {
            return Err(RowError {
                line,
                message: "empty field".to_string(),
            });
        }
        rows.push((line, parts));
    }
    Ok(rows)
}

pub fn parse_documents_str(text: &str) -> Result<Vec<String>, RowError> {
    let rows = rows_with_header(text, "document_id", 1)?;
    let mut seen: HashMap<&str, usize> = HashMap::with_capacity(rows.len());
    let mut out = Vec::with_capacity(rows.len());
    for (line, parts) in rows {
        if seen.insert(parts[0], line).is_some() {
            return Err(RowError {
                line,
                message: format!("duplicate document id {:?}", parts[0]),
            });
        }
        out.push(parts[0].to_string());
    }
    Ok(out)
}

pub fn parse_links_str(text: &str) -> Result<Vec<(String, String)>, RowError> {
    let rows = rows_with_header(text, "element_id\tdocument_id", 2)?;
    Ok(rows
        .into_iter()
        .map(|(_, p)| (p[0].to_string(), p[1].to_string()))
        .collect())
}

pub fn parse_similarity_str(text: &str) -> Result<Vec<(String, String, f64)>, RowError> {
    let rows = rows_with_header(text, "doc_a\tdoc_b\tscore", 3)?;
    let mut out = Vec::with_capacity(rows.len());
    for (line, p) in rows {
        let score: f64 = p[2].parse().map_err(|_| RowError {
            line,
            message: format!("invalid score {:?}", p[2]),
        })?;
        if !score.is_finite() {
            return Err(RowError {
                line,
                message: format!("score is not finite: {:?}", p[2]),
            });
        }
        out.push((p[0].to_string(), p[1].to_string(), score));
    }
    Ok(out)
}

pub fn parse_citations_str(text: &str) -> Result<Vec<(String, String)>, RowError> {
    let rows = rows_with_header(text, "citing_id\tcited_id", 2)?;
    Ok(rows
        .into_iter()
        .map(|(_, p)| (p[0].to_string(), p[1].to_string()))
        .collect())
}

pub fn parse_annotations_str(text: &str) -> Result<Vec<(String, String)>, RowError> {
    let rows = rows_with_header(text, "document_id\tterm_id", 2)?;
    Ok(rows
        .into_iter()
        .map(|(_, p)| (p[0].to_string(), p[1].to_string()))
        .collect())
}

pub fn parse_tree_str(text: &str) -> Result<Vec<(String, String, String)>, RowError> {
    let rows = rows_with_header(text, "tree_code\tterm_id\tterm_name", 3)?;
    Ok(rows
        .into_iter()
        .map(|(_, p)| (p[0].to_string(), p[1].to_string(), p[2].to_string()))
        .collect())
}

pub fn parse_categories_str(text: &str) -> Result<Vec<CategoryDef>, RowError> {
    let rows = rows_with_header(text, "category_id\tprefixes\tdisplay_name", 3)?;
    let mut out = Vec::with_capacity(rows.len());
    for (line, p) in rows {
        let prefixes: Vec<String> = p[1]
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if prefixes.is_empty() {
            return Err(RowError {
                line,
                message: "no prefixes".to_string(),
            });
        }
        out.push(CategoryDef {
            id: p[0].to_string(),
            prefixes,
            display_name: p[2].to_string(),
        });
    }
    Ok(out)
}

/// Validated, typed tables ready for the pipeline.
#[derive(Debug)]
pub struct Tables {
    pub documents: Vec<String>,
    pub doc_index: HashMap<String, u32>,
    pub links: Vec<(String, String)>,
    pub similarity: Vec<(String, String, f64)>,
    pub citations: Option<Vec<(String, String)>>,
    /// (global document index, term id)
    pub annotations: Vec<(u32, String)>,
    pub tree: TopicTree,
    pub categories: CategoryConfig,
}

fn read_text(path: &Path) -> Result<String, IngestError> {
    let bytes = fs::read(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    String::from_utf8(bytes).map_err(|_| IngestError::NotUtf8 {
        path: path.display().to_string(),
    })
}

fn attach<T>(result: Result<T, RowError>, path: &Path) -> Result<T, IngestError> {
    result.map_err(|e| IngestError::Parse {
        file: path.display().to_string(),
        line: e.line,
        message: e.message,
    })
}

/// Reads and validates every input table, checking referential integrity:
/// link, similarity, and annotation rows must reference known documents.
pub fn ingest(config: &RunConfig) -> Result<Tables, IngestError> {
    let documents = attach(
        parse_documents_str(&read_text(&config.documents)?),
        &config.documents,
    )?;
    let doc_index: HashMap<String, u32> = documents
        .iter()
        .enumerate()
        .map(|(i, d)| (d.clone(), i as u32))
        .collect();

    let links = attach(parse_links_str(&read_text(&config.links)?), &config.links)?;
    check_known(
        links.iter().map(|(_, d)| d.as_str()),
        &doc_index,
        &config.links,
        "link rows",
    )?;

    let similarity = attach(
        parse_similarity_str(&read_text(&config.similarity)?),
        &config.similarity,
    )?;
    check_known(
        similarity
            .iter()
            .flat_map(|(a, b, _)| [a.as_str(), b.as_str()]),
        &doc_index,
        &config.similarity,
        "similarity rows",
    )?;

    let annotation_rows = attach(
        parse_annotations_str(&read_text(&config.annotations)?),
        &config.annotations,
    )?;
    check_known(
        annotation_rows.iter().map(|(d, _)| d.as_str()),
        &doc_index,
        &config.annotations,
        "annotation rows",
    )?;
    let annotations = annotation_rows
        .into_iter()
        .map(|(d, t)| (doc_index[&d], t))
        .collect();

    let citations = match &config.citations {
        Some(path) => Some(attach(parse_citations_str(&read_text(path)?), path)?),
        None => None,
    };

    let tree_rows = attach(parse_tree_str(&read_text(&config.tree)?), &config.tree)?;
    let tree = TopicTree::from_rows(tree_rows).map_err(|source| IngestError::Tree {
        file: config.tree.display().to_string(),
        source,
    })?;

    let categories = match &config.categories {
        Some(path) => {
            let defs = attach(parse_categories_str(&read_text(path)?), path)?;
            CategoryConfig::new(defs, Vec::new()).map_err(|source| IngestError::Tree {
                file: path.display().to_string(),
                source,
            })?
        }
        None => CategoryConfig::mesh_default(),
    };

    Ok(Tables {
        documents,
        doc_index,
        links,
        similarity,
        citations,
        annotations,
        tree,
        categories,
    })
}

fn check_known<'a>(
    ids: impl Iterator<Item = &'a str>,
    doc_index: &HashMap<String, u32>,
    path: &Path,
    kind: &'static str,
) -> Result<(), IngestError> {
    let mut offenders = Vec::new();
    let mut total = 0usize;
    for id in ids {
        if !doc_index.contains_key(id) {
            total += 1;
            if offenders.len() < MAX_OFFENDERS && !offenders.iter().any(|o| o == id) {
                offenders.push(id.to_string());
            }
        }
    }
    if total > 0 {
        return Err(IngestError::Dangling {
            file: path.display().to_string(),
            kind,
            offenders,
            total,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_count_errors_carry_line_numbers() {
        let text = "doc_a\tdoc_b\tscore\nd1\td2\n";
        let err = parse_similarity_str(text).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("expected 3 fields"), "{}", err.message);
    }

    #[test]
    fn header_mismatch_is_line_one() {
        let err = parse_links_str("wrong\theader\n").unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn similarity_scores_must_be_numeric_and_finite() {
        let bad = "doc_a\tdoc_b\tscore\nd1\td2\tabc\n";
        assert!(parse_similarity_str(bad).is_err());
        let inf = "doc_a\tdoc_b\tscore\nd1\td2\tinf\n";
        assert!(parse_similarity_str(inf).is_err());
        let ok = "doc_a\tdoc_b\tscore\nd1\td2\t0.5\n";
        assert_eq!(parse_similarity_str(ok).unwrap().len(), 1);
    }

    #[test]
    fn documents_must_be_unique() {
        let text = "document_id\nd1\nd1\n";
        let err = parse_documents_str(text).unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn empty_fields_are_rejected() {
        let text = "element_id\tdocument_id\ne1\t\n";
        assert!(parse_links_str(text).is_err());
    }

    #[test]
    fn categories_split_prefixes() {
        let text = "category_id\tprefixes\tdisplay_name\nX\tX01, X02\tExample\n";
        let defs = parse_categories_str(text).unwrap();
        assert_eq!(defs[0].prefixes, vec!["X01", "X02"]);
    }
}
