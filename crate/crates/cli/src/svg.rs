//! Static SVG line charts of a section's rows.
//!
//! Each point carries its label and value as data attributes, written with
//! the CSV number format; the axis labels are the extreme plotted values.

use crate::output::fmt_num;
use crate::run::Row;
use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 56.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Ratio column (or `lhs` when no row has a ratio) against row order, on a
/// log axis when the values are positive and span over two decades. `None`
/// for fewer than two plottable rows.
pub fn ratio_chart(title: &str, rows: &[Row]) -> Option<String> {
    let has_ratio = rows.iter().any(|r| r.ratio.is_some());
    let (column, pts): (&str, Vec<(&str, f64)>) = if has_ratio {
        ("ratio", rows.iter().filter_map(|r| r.ratio.map(|v| (r.label.as_str(), v))).collect())
    } else {
        ("lhs", rows.iter().filter_map(|r| r.lhs.map(|v| (r.label.as_str(), v))).collect())
    };
    let pts: Vec<(&str, f64)> = pts.into_iter().filter(|(_, v)| v.is_finite()).collect();
    if pts.len() < 2 {
        return None;
    }
    let lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let log = lo > 0.0 && hi / lo > 100.0;
    let map = |v: f64| if log { v.log10() } else { v };
    let (ylo, yhi) = (map(lo), map(hi));
    let span = if yhi > ylo { yhi - ylo } else { 1.0 };
    let px = |i: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * i as f64 / (pts.len() - 1) as f64;
    let py = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (map(v) - ylo) / span;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" data-column="{column}" data-scale="{}">"#,
        if log { "log" } else { "linear" }
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{} ({column})</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<path d="M{MARGIN} {MARGIN} V{} H{}" fill="none" stroke="black"/>"#,
        HEIGHT - MARGIN,
        WIDTH - MARGIN
    );
    for (v, anchor_y) in [(hi, MARGIN), (lo, HEIGHT - MARGIN)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{anchor_y}" text-anchor="end" font-family="sans-serif" font-size="10">{}</text>"#,
            MARGIN - 4.0,
            fmt_num(v)
        );
    }
    let line: Vec<String> = pts.iter().enumerate().map(|(i, p)| format!("{:.2},{:.2}", px(i), py(p.1))).collect();
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue"/>"#, line.join(" "));
    for (i, (label, v)) in pts.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="steelblue" data-label="{}" data-value="{}"/>"#,
            px(i),
            py(*v),
            escape(label),
            fmt_num(*v)
        );
    }
    s.push_str("</svg>\n");
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(label: &str, ratio: f64) -> Row {
        Row {
            section: "s".into(),
            label: label.into(),
            lhs: Some(ratio),
            rhs: Some(1.0),
            ratio: Some(ratio),
            bound: None,
            margin: None,
            log_scale: Some(0.0),
        }
    }

    #[test]
    fn data_attributes_match_csv_format() {
        let rows = vec![row("a", 0.25), row("b<1>", 3.0), row("c", f64::NAN)];
        let svg = ratio_chart("t&t", &rows).unwrap();
        assert!(svg.contains(r#"data-label="a" data-value="2.5e-1""#));
        assert!(svg.contains(r#"data-label="b&lt;1&gt;" data-value="3e0""#));
        assert!(!svg.contains("NaN"));
        assert!(svg.contains("t&amp;t"));
        assert!(svg.contains(r#"data-scale="linear""#));
    }

    #[test]
    fn log_axis_for_wide_ranges() {
        let rows = vec![row("a", 1.0), row("b", 1e-6)];
        assert!(ratio_chart("x", &rows).unwrap().contains(r#"data-scale="log""#));
        assert!(ratio_chart("x", &rows[..1]).is_none());
    }
}
