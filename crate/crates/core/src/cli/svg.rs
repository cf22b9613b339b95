//! Minimal SVG line plots of scalar path components.

use std::fmt::Write as _;

use crate::paths::PiecewisePath;

const WIDTH: f64 = 640.0;
const PANEL: f64 = 160.0;
const MARGIN: f64 = 40.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Vertices of the graph of component `i`, with vertical segments at jumps.
fn polyline(path: &PiecewisePath, i: usize) -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for k in path.knots() {
        pts.push((k.t, k.left[i]));
        pts.push((k.t, k.value[i]));
        pts.push((k.t, k.right[i]));
    }
    pts.dedup();
    pts
}

/// One stacked panel per named path, first component only for vector paths
/// unless they are two-dimensional.
pub fn render(title: &str, panels: &[(&str, &PiecewisePath)]) -> String {
    let height = MARGIN + panels.len() as f64 * (PANEL + MARGIN);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<text x="{MARGIN}" y="20">{title}</text>"#);
    for (p, (name, path)) in panels.iter().enumerate() {
        let top = MARGIN + p as f64 * (PANEL + MARGIN);
        let (a, b) = path.domain();
        let comps: Vec<usize> = (0..path.dim().min(2)).collect();
        let lines: Vec<Vec<(f64, f64)>> = comps.iter().map(|&i| polyline(path, i)).collect();
        let (mut lo, mut hi) = lines
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &(_, y)| {
                (l.min(y), h.max(y))
            });
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let span = (b - a).max(1e-12);
        let x = |t: f64| MARGIN + (t - a) / span * (WIDTH - 2.0 * MARGIN);
        let y = |v: f64| top + PANEL - (v - lo) / (hi - lo) * PANEL;
        let _ = writeln!(
            svg,
            r##"<rect x="{MARGIN}" y="{top}" width="{}" height="{PANEL}" fill="none" stroke="#999"/>"##,
            WIDTH - 2.0 * MARGIN
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">{name}</text>"#,
            MARGIN + 4.0,
            top + 14.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">[{a:.3}, {b:.3}] x [{lo:.3}, {hi:.3}]</text>"#,
            WIDTH - MARGIN - 200.0,
            top + PANEL + 14.0
        );
        for (c, line) in lines.iter().enumerate() {
            let points: Vec<String> = line
                .iter()
                .map(|&(t, v)| format!("{:.2},{:.2}", x(t), y(v)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                COLORS[c % COLORS.len()],
                points.join(" ")
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::Knot;

    #[test]
    fn jumps_become_vertical_segments() {
        let p = PiecewisePath::new(vec![
            Knot::scalar(0.0, 0.0, 0.0, 0.0),
            Knot::scalar(1.0, 0.0, 0.0, 1.0),
            Knot::scalar(2.0, 1.0, 1.0, 1.0),
        ])
        .unwrap();
        assert_eq!(
            polyline(&p, 0),
            vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (2.0, 1.0)]
        );
        let svg = render("test", &[("z", &p)]);
        assert!(svg.starts_with("<svg") && svg.contains("polyline"));
    }
}
