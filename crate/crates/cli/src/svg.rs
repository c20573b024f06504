//! Static SVG renderings of exported results.

use std::fmt::Write;

use clustvar_core::Hierarchy;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

/// Leaf order of a depth-first walk from the root, left child first.
fn leaf_order(h: &Hierarchy) -> Vec<usize> {
    let p = h.n_leaves();
    let mut order = Vec::with_capacity(p);
    let mut stack = vec![p + h.merges.len() - 1];
    while let Some(node) = stack.pop() {
        if node < p {
            order.push(node);
        } else {
            let m = &h.merges[node - p];
            stack.push(m.right);
            stack.push(m.left);
        }
    }
    order
}

pub fn dendrogram(h: &Hierarchy, title: &str) -> String {
    let p = h.n_leaves();
    let mut out = String::new();
    open(&mut out, title);
    if h.merges.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let order = leaf_order(h);
    let top = h.merges.iter().map(|m| m.height).fold(0.0, f64::max).max(1e-12);
    let base = HEIGHT - MARGIN - 60.0;
    let span = base - MARGIN;
    let step = (WIDTH - 2.0 * MARGIN) / p as f64;
    let y_of = |height: f64| base - span * height.max(0.0) / top;

    let mut x = vec![0.0; p + h.merges.len()];
    for (slot, &leaf) in order.iter().enumerate() {
        x[leaf] = MARGIN + step * (slot as f64 + 0.5);
        let _ = writeln!(
            out,
            r#"<text transform="translate({:.2},{:.2}) rotate(-60)" text-anchor="end">{}</text>"#,
            x[leaf],
            base + 12.0,
            escape(&h.labels[leaf])
        );
    }
    for (i, m) in h.merges.iter().enumerate() {
        let node = p + i;
        x[node] = (x[m.left] + x[m.right]) / 2.0;
        let y = y_of(m.height);
        for child in [m.left, m.right] {
            let _ = writeln!(
                out,
                r#"<path d="M{:.2},{:.2} V{:.2} H{:.2}" fill="none" stroke="black"/>"#,
                x[child],
                y_of(h.height_of(child)),
                y,
                x[node]
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<line x1="{m}" y1="{base:.2}" x2="{m}" y2="{MARGIN}" stroke="gray"/><text x="{}" y="{:.2}" text-anchor="end">0</text><text x="{}" y="{:.2}" text-anchor="end">{:.3}</text>"#,
        MARGIN - 4.0,
        base + 4.0,
        MARGIN - 4.0,
        MARGIN + 4.0,
        top,
        m = MARGIN - 2.0,
    );
    out.push_str("</svg>\n");
    out
}

/// Line chart of `(x, y)` points with y in data units.
pub fn curve(points: &[(usize, f64)], title: &str, y_label: &str) -> String {
    let mut out = String::new();
    open(&mut out, title);
    if points.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let (x_min, x_max) = (points[0].0 as f64, points[points.len() - 1].0 as f64);
    let (mut y_min, mut y_max) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| (lo.min(y), hi.max(y)));
    if (y_max - y_min).abs() < 1e-12 {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let px = |x: f64| MARGIN + (WIDTH - 2.0 * MARGIN) * (x - x_min) / (x_max - x_min).max(1.0);
    let py = |y: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (y - y_min) / (y_max - y_min);

    let path: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", px(x as f64), py(y)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        path.join(" ")
    );
    for &(x, y) in points {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/><text x="{:.2}" y="{}" text-anchor="middle">{x}</text>"#,
            px(x as f64),
            py(y),
            px(x as f64),
            HEIGHT - MARGIN + 16.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y_max:.3}</text><text x="{:.2}" y="{:.2}" text-anchor="end">{y_min:.3}</text>"#,
        MARGIN - 6.0,
        py(y_max) + 4.0,
        MARGIN - 6.0,
        py(y_min) + 4.0
    );
    let _ = writeln!(
        out,
        r#"<text transform="translate(14,{:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        HEIGHT / 2.0,
        escape(y_label)
    );
    out.push_str("</svg>\n");
    out
}
