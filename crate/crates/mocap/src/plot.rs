//! Trajectory plots of 2-D embeddings: an SVG with one arrow per pair of
//! consecutive frames, and a CSV of the points.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use mocap_core::embed::Embedding;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 40.0;
const LEGEND_WIDTH: f64 = 180.0;

const PALETTE: [&str; 12] = [
    "#1f77b4", "#9467bd", "#d62728", "#2ca02c", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#637939",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Colour per label, assigned in sorted label order.
fn colours(embeddings: &[Embedding]) -> BTreeMap<&str, &'static str> {
    let mut labels: Vec<&str> = embeddings.iter().map(|e| e.label.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, PALETTE[i % PALETTE.len()]))
        .collect()
}

/// SVG document; `metadata` is embedded verbatim (escaped).
pub fn render_svg(embeddings: &[Embedding], metadata: &str) -> String {
    let pts = embeddings.iter().flat_map(|e| e.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for p in pts {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let sx = (WIDTH - 2.0 * MARGIN) / (x1 - x0).max(1e-12);
    let sy = (HEIGHT - 2.0 * MARGIN) / (y1 - y0).max(1e-12);
    let map = |p: &[f64; 2]| {
        (
            MARGIN + (p[0] - x0) * sx,
            HEIGHT - MARGIN - (p[1] - y0) * sy,
        )
    };
    let colour = colours(embeddings);

    let mut s = String::new();
    let total_width = WIDTH + LEGEND_WIDTH;
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total_width}\" height=\"{HEIGHT}\" viewBox=\"0 0 {total_width} {HEIGHT}\">"
    );
    let _ = writeln!(s, "<metadata>{}</metadata>", escape(metadata));
    s.push_str("<defs>\n");
    for (i, c) in colour.values().enumerate() {
        let _ = writeln!(
            s,
            "<marker id=\"head{i}\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"5\" markerHeight=\"5\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"{c}\"/></marker>"
        );
    }
    s.push_str("</defs>\n");
    let _ = writeln!(
        s,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let marker: BTreeMap<&str, usize> = colour.keys().enumerate().map(|(i, l)| (*l, i)).collect();
    for e in embeddings {
        let c = colour[e.label.as_str()];
        let m = marker[e.label.as_str()];
        let _ = writeln!(s, "<g data-source=\"{}\">", escape(&e.source_id));
        for w in e.points.windows(2) {
            let (ax, ay) = map(&w[0]);
            let (bx, by) = map(&w[1]);
            let _ = writeln!(
                s,
                "<line class=\"arrow\" x1=\"{ax:.3}\" y1=\"{ay:.3}\" x2=\"{bx:.3}\" y2=\"{by:.3}\" stroke=\"{c}\" stroke-width=\"1\" marker-end=\"url(#head{m})\"/>"
            );
        }
        s.push_str("</g>\n");
    }
    for (i, (label, c)) in colour.iter().enumerate() {
        let y = MARGIN + 20.0 * i as f64;
        let _ = writeln!(
            s,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"12\" height=\"12\" fill=\"{c}\"/><text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" font-family=\"sans-serif\">{}</text>",
            WIDTH + 10.0,
            y,
            WIDTH + 28.0,
            y + 11.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// CSV rows `source_id,label,frame,x,y` (frames 1-based) after a
/// `# config: ...` comment line.
pub fn render_csv(embeddings: &[Embedding], metadata: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# config: {metadata}");
    s.push_str("source_id,label,frame,x,y\n");
    for e in embeddings {
        for (i, p) in e.points.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{:?},{:?}",
                csv_field(&e.source_id),
                csv_field(&e.label),
                i + 1,
                p[0],
                p[1]
            );
        }
    }
    s
}
