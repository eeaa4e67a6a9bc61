//! Static SVG scatter plots of projected keywords.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::trend::{ClusterAssignment, ProjectedPoint};

pub const WIDTH: f64 = 1000.0;
pub const HEIGHT: f64 = 800.0;
pub const MARGIN_FRACTION: f64 = 0.05;

/// Fill colors, cycled by cluster id.
pub const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#ad494a",
];
const UNCLUSTERED: &str = "#cccccc";

#[derive(Debug, Error)]
pub enum SvgError {
    #[error("cannot plot an empty point set")]
    Empty,
    #[error("failed to write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Maps `value` from `[lo, hi]` onto `[start, end]`; a degenerate range maps
/// to the midpoint.
fn scale(value: f64, lo: f64, hi: f64, start: f64, end: f64) -> f64 {
    if hi > lo {
        start + (value - lo) / (hi - lo) * (end - start)
    } else {
        (start + end) / 2.0
    }
}

/// Renders one labeled circle per point, colored by cluster id.
pub fn render_scatter_svg(
    title: Option<&str>,
    points: &[ProjectedPoint],
    clusters: &ClusterAssignment,
) -> Result<String, SvgError> {
    if points.is_empty() {
        return Err(SvgError::Empty);
    }
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        x_lo = x_lo.min(p.xy.0);
        x_hi = x_hi.max(p.xy.0);
        y_lo = y_lo.min(p.xy.1);
        y_hi = y_hi.max(p.xy.1);
    }
    let mx = WIDTH * MARGIN_FRACTION;
    let my = HEIGHT * MARGIN_FRACTION;
    let lookup = clusters.lookup();

    let mut svg = String::new();
    let w = |svg: &mut String, s: std::fmt::Arguments| svg.write_fmt(s).expect("write to string");
    w(
        &mut svg,
        format_args!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ),
    );
    if let Some(t) = title {
        w(&mut svg, format_args!("<title>{}</title>\n", escape(t)));
    }
    w(
        &mut svg,
        format_args!("<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>\n"),
    );
    for p in points {
        let cx = scale(p.xy.0, x_lo, x_hi, mx, WIDTH - mx);
        // SVG y grows downward.
        let cy = scale(p.xy.1, y_lo, y_hi, HEIGHT - my, my);
        let fill = lookup
            .get(p.keyword.as_str())
            .map(|id| PALETTE[id % PALETTE.len()])
            .unwrap_or(UNCLUSTERED);
        w(
            &mut svg,
            format_args!("<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"5\" fill=\"{fill}\" stroke=\"#333333\" stroke-width=\"0.5\"/>\n"),
        );
        w(
            &mut svg,
            format_args!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
                cx + 7.0,
                cy - 7.0,
                escape(&p.keyword)
            ),
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_scatter_svg(
    points: &[ProjectedPoint],
    clusters: &ClusterAssignment,
    path: impl AsRef<Path>,
    title: Option<&str>,
) -> Result<(), SvgError> {
    let path = path.as_ref();
    let svg = render_scatter_svg(title, points, clusters)?;
    fs::write(path, svg).map_err(|source| SvgError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trend::cluster_points;

    fn pts(coords: &[(&str, f64, f64)]) -> Vec<ProjectedPoint> {
        coords
            .iter()
            .map(|&(k, x, y)| ProjectedPoint {
                keyword: k.to_string(),
                full_vector: vec![],
                xy: (x, y),
            })
            .collect()
    }

    #[test]
    fn single_point() {
        let p = pts(&[("solar", 1.0, 2.0)]);
        let svg = render_scatter_svg(None, &p, &cluster_points(&p, 1.0)).unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert_eq!(svg.matches("<text").count(), 1);
        assert!(svg.contains("cx=\"500.00\" cy=\"400.00\""));
    }

    #[test]
    fn two_clusters_two_colors() {
        let p = pts(&[("a", 0.0, 0.0), ("b", 0.1, 0.0), ("c", 5.0, 5.0)]);
        let svg = render_scatter_svg(Some("x & y"), &p, &cluster_points(&p, 1.0)).unwrap();
        assert!(svg.contains(PALETTE[0]) && svg.contains(PALETTE[1]));
        assert!(!svg.contains(PALETTE[2]));
        assert!(svg.contains("<title>x &amp; y</title>"));
        // Extremes land on the 5% margins.
        assert!(svg.contains("cx=\"50.00\" cy=\"760.00\""));
        assert!(svg.contains("cx=\"950.00\" cy=\"40.00\""));
    }

    #[test]
    fn empty_is_error_and_output_is_deterministic() {
        let empty = ClusterAssignment {
            clusters: vec![],
            threshold: 1.0,
        };
        assert!(matches!(render_scatter_svg(None, &[], &empty), Err(SvgError::Empty)));
        let p = pts(&[("a", 0.3, 0.1), ("b<", -0.2, 0.9)]);
        let c = cluster_points(&p, 0.5);
        assert_eq!(render_scatter_svg(None, &p, &c).unwrap(), render_scatter_svg(None, &p, &c).unwrap());
        assert!(render_scatter_svg(None, &p, &c).unwrap().contains("b&lt;"));
    }
}
