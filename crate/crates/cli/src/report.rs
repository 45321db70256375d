//! Renderers and parsers for the pipeline's tab-separated report files.
//! Numbers use Rust's shortest round-trip formatting, so output bytes are
//! platform-stable.

use crate::ingest::RowError;

#[derive(Debug, Clone)]
pub struct SolutionRow {
    pub network: String,
    pub gamma_index: usize,
    pub gamma: f64,
    pub seed: u64,
    pub clusters: usize,
    pub quality: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicProfileRow {
    pub network: String,
    pub topic: String,
    pub coverage: f64,
    pub nsc: usize,
    pub purity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryProfileRow {
    pub network: String,
    pub category: String,
    pub bin: String,
    pub bin_lower: u64,
    pub coverage: f64,
    pub nsc: usize,
    pub purity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub category: String,
    pub coverage: f64,
    pub network: String,
    pub top_third_count: Option<f64>,
    pub absolute_diff: Option<f64>,
    pub relative_diff: Option<f64>,
}

pub fn render_solutions(rows: &[SolutionRow]) -> String {
    let mut out = String::from("network\tgamma_index\tgamma\tseed\tclusters\tquality\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            r.network, r.gamma_index, r.gamma, r.seed, r.clusters, r.quality
        ));
    }
    out
}

pub fn render_topic_profiles(rows: &[TopicProfileRow]) -> String {
    let mut out = String::from("network\ttopic\tcoverage\tnsc\tpurity\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            r.network, r.topic, r.coverage, r.nsc, r.purity
        ));
    }
    out
}

pub fn render_category_profiles(rows: &[CategoryProfileRow]) -> String {
    let mut out = String::from("network\tcategory\tbin\tcoverage\tnsc\tpurity\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            r.network, r.category, r.bin, r.coverage, r.nsc, r.purity
        ));
    }
    out
}

pub fn render_summary(rows: &[SummaryRow]) -> String {
    fn opt(v: Option<f64>) -> String {
        v.map(|x| x.to_string()).unwrap_or_default()
    }
    let mut out =
        String::from("category\tcoverage\tnetwork\ttop_third_count\tabsolute_diff\trelative_diff\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            r.category,
            r.coverage,
            r.network,
            opt(r.top_third_count),
            opt(r.absolute_diff),
            opt(r.relative_diff)
        ));
    }
    out
}

fn split_rows<'a>(
    text: &'a str,
    header: &str,
    fields: usize,
) -> Result<Vec<(usize, Vec<&'a str>)>, RowError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first == header => {}
        _ => {
            return Err(RowError {
                line: 1,
                message: format!("expected header {header:?}"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, raw) in lines {
        if raw.is_empty() {
            continue;
        }
        let parts: Vec<&str> = raw.split('\t').collect();
        if parts.len() != fields {
            return Err(RowError {
                line: i + 1,
                message: format!("expected {fields} fields, got {}", parts.len()),
            });
        }
        rows.push((i + 1, parts));
    }
    Ok(rows)
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T, RowError> {
    s.parse().map_err(|_| RowError {
        line,
        message: format!("invalid {what}: {s:?}"),
    })
}

pub fn parse_topic_profiles(text: &str) -> Result<Vec<TopicProfileRow>, RowError> {
    let rows = split_rows(text, "network\ttopic\tcoverage\tnsc\tpurity", 5)?;
    rows.into_iter()
        .map(|(line, p)| {
            Ok(TopicProfileRow {
                network: p[0].to_string(),
                topic: p[1].to_string(),
                coverage: parse_num(p[2], line, "coverage")?,
                nsc: parse_num(p[3], line, "nsc")?,
                purity: parse_num(p[4], line, "purity")?,
            })
        })
        .collect()
}

pub fn parse_category_profiles(text: &str) -> Result<Vec<CategoryProfileRow>, RowError> {
    let rows = split_rows(text, "network\tcategory\tbin\tcoverage\tnsc\tpurity", 6)?;
    rows.into_iter()
        .map(|(line, p)| {
            let bin_lower: u64 = match p[2].split_once('-') {
                Some((lo, _)) => parse_num::<u64>(lo, line, "bin")?.saturating_sub(1),
                None => {
                    return Err(RowError {
                        line,
                        message: format!("invalid bin label {:?}", p[2]),
                    })
                }
            };
            Ok(CategoryProfileRow {
                network: p[0].to_string(),
                category: p[1].to_string(),
                bin: p[2].to_string(),
                bin_lower,
                coverage: parse_num(p[3], line, "coverage")?,
                nsc: parse_num(p[4], line, "nsc")?,
                purity: parse_num(p[5], line, "purity")?,
            })
        })
        .collect()
}

pub fn parse_summary(text: &str) -> Result<Vec<SummaryRow>, RowError> {
    let rows = split_rows(
        text,
        "category\tcoverage\tnetwork\ttop_third_count\tabsolute_diff\trelative_diff",
        6,
    )?;
    fn opt(s: &str, line: usize, what: &str) -> Result<Option<f64>, RowError> {
        if s.is_empty() {
            Ok(None)
        } else {
            parse_num(s, line, what).map(Some)
        }
    }
    rows.into_iter()
        .map(|(line, p)| {
            Ok(SummaryRow {
                category: p[0].to_string(),
                coverage: parse_num(p[1], line, "coverage")?,
                network: p[2].to_string(),
                top_third_count: opt(p[3], line, "top_third_count")?,
                absolute_diff: opt(p[4], line, "absolute_diff")?,
                relative_diff: opt(p[5], line, "relative_diff")?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topic_profiles_round_trip() {
        let rows = vec![
            TopicProfileRow {
                network: "pure".into(),
                topic: "A01.456".into(),
                coverage: 0.25,
                nsc: 1,
                purity: 0.5,
            },
            TopicProfileRow {
                network: "pure".into(),
                topic: "A01.456".into(),
                coverage: 0.25,
                nsc: 2,
                purity: 0.625,
            },
        ];
        let text = render_topic_profiles(&rows);
        assert_eq!(parse_topic_profiles(&text).unwrap(), rows);
    }

    #[test]
    fn summary_round_trips_empty_fields() {
        let rows = vec![SummaryRow {
            category: "A".into(),
            coverage: 0.5,
            network: "similarity".into(),
            top_third_count: Some(0.25),
            absolute_diff: None,
            relative_diff: None,
        }];
        let text = render_summary(&rows);
        assert!(text.lines().nth(1).unwrap().ends_with("0.25\t\t"));
        assert_eq!(parse_summary(&text).unwrap(), rows);
    }

    #[test]
    fn category_profiles_round_trip() {
        let rows = vec![CategoryProfileRow {
            network: "mixed".into(),
            category: "C01".into(),
            bin: "81-160".into(),
            bin_lower: 80,
            coverage: 0.75,
            nsc: 3,
            purity: 0.125,
        }];
        let text = render_category_profiles(&rows);
        assert_eq!(parse_category_profiles(&text).unwrap(), rows);
    }
}
