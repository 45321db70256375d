//! SVG line plots of purity profiles: NSC on the x axis, purity on a fixed
//! [0, 1] y axis, one polyline per network variant.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("no profiles match subject {subject:?}; nearest matches: {}", nearest.join(", "))]
    UnknownSubject {
        subject: String,
        nearest: Vec<String>,
    },
    #[error("no network variants selected")]
    EmptyVariantFilter,
    #[error("profile series are empty")]
    EmptySeries,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

fn color_for(variant: &str) -> &'static str {
    match variant {
        "pure" => "#1f77b4",
        "similarity" => "#ff7f0e",
        "mixed" => "#2ca02c",
        "extended_citation" => "#d62728",
        _ => "#7f7f7f",
    }
}

/// Renders one plot: `series` maps a network variant to its purity values
/// over the NSC grid 1..=N (all series share the grid).
pub fn render_profile_svg(
    subject: &str,
    coverage: f64,
    series: &BTreeMap<String, Vec<f64>>,
) -> Result<String, PlotError> {
    if series.is_empty() {
        return Err(PlotError::EmptySeries);
    }
    let n = series.values().map(|v| v.len()).max().unwrap_or(0);
    if n == 0 {
        return Err(PlotError::EmptySeries);
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x = |nsc: usize| -> f64 {
        if n == 1 {
            MARGIN_LEFT + plot_w / 2.0
        } else {
            MARGIN_LEFT + plot_w * (nsc as f64 - 1.0) / (n as f64 - 1.0)
        }
    };
    let y = |purity: f64| -> f64 { MARGIN_TOP + plot_h * (1.0 - purity) };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{} (coverage {})</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        escape(subject),
        coverage
    ));

    // Axes and gridlines.
    for i in 0..=4 {
        let v = i as f64 / 4.0;
        let yy = y(v);
        svg.push_str(&format!(
            "<line x1=\"{MARGIN_LEFT:.1}\" y1=\"{yy:.1}\" x2=\"{:.1}\" y2=\"{yy:.1}\" stroke=\"#dddddd\"/>\n",
            MARGIN_LEFT + plot_w
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{v}</text>\n",
            MARGIN_LEFT - 8.0,
            yy + 4.0
        ));
    }
    let step = (n / 10).max(1);
    for nsc in (1..=n).step_by(step) {
        let xx = x(nsc);
        svg.push_str(&format!(
            "<text x=\"{xx:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{nsc}</text>\n",
            MARGIN_TOP + plot_h + 18.0
        ));
    }
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT:.1}\" y1=\"{MARGIN_TOP:.1}\" x2=\"{MARGIN_LEFT:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        MARGIN_TOP + plot_h
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">NSC</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">Purity</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    // Series and legend.
    for (i, (variant, values)) in series.iter().enumerate() {
        let color = color_for(variant);
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(idx, &p)| format!("{:.2},{:.2}", x(idx + 1), y(p.clamp(0.0, 1.0))))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        let ly = MARGIN_TOP + 10.0 + i as f64 * 18.0;
        let lx = MARGIN_LEFT + plot_w + 12.0;
        svg.push_str(&format!(
            "<line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            lx + 18.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            lx + 24.0,
            ly + 4.0,
            escape(variant)
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Ranks known subjects by closeness to the query for error suggestions.
pub fn nearest_subjects(query: &str, known: impl Iterator<Item = String>) -> Vec<String> {
    let mut scored: Vec<(usize, String)> = known
        .map(|name| {
            let common = query
                .chars()
                .zip(name.chars())
                .take_while(|(a, b)| a == b)
                .count();
            (common, name)
        })
        .collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.truncate(5);
    scored.into_iter().map(|(_, name)| name).collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_has_one_polyline_per_variant_and_fixed_y_range() {
        let mut series = BTreeMap::new();
        series.insert("pure".to_string(), vec![0.2, 0.4, 0.6]);
        series.insert("similarity".to_string(), vec![0.1, 0.2, 0.3]);
        series.insert("mixed".to_string(), vec![0.3, 0.5, 0.7]);
        let svg = render_profile_svg("A01.456", 0.5, &series).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        // Fixed axis labels 0 and 1 regardless of the data range.
        assert!(svg.contains(">0</text>"));
        assert!(svg.contains(">1</text>"));
        assert!(svg.contains("A01.456 (coverage 0.5)"));
    }

    #[test]
    fn empty_series_is_an_error() {
        let series = BTreeMap::new();
        assert!(matches!(
            render_profile_svg("x", 0.5, &series),
            Err(PlotError::EmptySeries)
        ));
    }

    #[test]
    fn nearest_subjects_prefers_shared_prefixes() {
        let known = ["A01.456", "A01.999", "B02"].map(String::from);
        let out = nearest_subjects("A01.4", known.into_iter());
        assert_eq!(out[0], "A01.456");
    }
}
