//! Self-contained SVG plots: a line overlay for solutions and a two-color
//! heat map for existence maps. No timestamps, so output is reproducible.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

pub struct Series<'a> {
    pub label: &'a str,
    pub values: &'a [f64],
    pub color: &'a str,
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !(lo.is_finite() && hi.is_finite()) {
        (0.0, 1.0)
    } else if hi - lo <= f64::EPSILON * (1.0 + hi.abs()) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn axes(out: &mut String, (x0, x1): (f64, f64), (y0, y1): (f64, f64), xlabel: &str, ylabel: &str) {
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let x = LEFT + f * pw;
        let y = TOP + ph - f * ph;
        let _ = writeln!(
            out,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#,
            TOP + ph + 16.0,
            x0 + f * (x1 - x0)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            y0 + f * (y1 - y0)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(ylabel)
    );
}

/// Overlaid line plot of several series sharing the abscissa `x`.
pub fn line_plot(title: &str, x: &[f64], series: &[Series], xlabel: &str, ylabel: &str) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let xr = range(x.iter().copied());
    let yr = range(series.iter().flat_map(|s| s.values.iter().copied()).chain([0.0]));
    axes(&mut out, xr, yr, xlabel, ylabel);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    for (k, s) in series.iter().enumerate() {
        let points: Vec<String> = x
            .iter()
            .zip(s.values)
            .map(|(xv, yv)| {
                let px = LEFT + (xv - xr.0) / (xr.1 - xr.0) * pw;
                let py = TOP + ph - (yv - yr.0) / (yr.1 - yr.0) * ph;
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            s.color,
            points.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            s.color,
            lx + 26.0,
            ly + 4.0,
            escape(s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One cell of a heat map.
pub struct HeatCell {
    pub filled: bool,
    pub marked: bool,
}

/// Heat map over `xs × ys`; `cells[j * xs.len() + i]` belongs to
/// `(xs[i], ys[j])`. Filled cells are green, others grey; marked cells get
/// a dark outline.
pub fn heat_map(
    title: &str,
    xs: &[f64],
    ys: &[f64],
    cells: &[HeatCell],
    labels: (&str, &str),
    legend: (&str, &str, &str),
) -> String {
    assert_eq!(cells.len(), xs.len() * ys.len());
    let mut out = String::new();
    header(&mut out, title);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let (cw, ch) = (pw / xs.len() as f64, ph / ys.len() as f64);
    for (j, _) in ys.iter().enumerate() {
        for (i, _) in xs.iter().enumerate() {
            let cell = &cells[j * xs.len() + i];
            let x = LEFT + i as f64 * cw;
            let y = TOP + ph - (j + 1) as f64 * ch;
            let fill = if cell.filled { "#2e8b57" } else { "#d3d3d3" };
            let stroke = if cell.marked { r##"stroke="#111" stroke-width="2""## } else { r#"stroke="white""# };
            let _ = writeln!(
                out,
                r#"<rect class="cell" x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="{fill}" {stroke}/>"#
            );
        }
    }
    // tick labels at cell centres, thinned to at most eight per axis
    let step_x = xs.len().div_ceil(8);
    for (i, v) in xs.iter().enumerate().step_by(step_x) {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{v:.3}</text>"#,
            LEFT + (i as f64 + 0.5) * cw,
            TOP + ph + 16.0
        );
    }
    let step_y = ys.len().div_ceil(8);
    for (j, v) in ys.iter().enumerate().step_by(step_y) {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.3e}</text>"#,
            LEFT - 6.0,
            TOP + ph - (j as f64 + 0.5) * ch + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(labels.0)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(labels.1)
    );
    let lx = WIDTH - RIGHT + 12.0;
    let entries = [
        (r##"fill="#2e8b57" stroke="white""##, legend.0),
        (r##"fill="#d3d3d3" stroke="white""##, legend.1),
        (r##"fill="white" stroke="#111" stroke-width="2""##, legend.2),
    ];
    for (k, (style, text)) in entries.iter().enumerate() {
        let ly = TOP + 18.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{lx}" y="{ly}" width="12" height="12" {style}/><text x="{}" y="{}">{}</text>"#,
            lx + 18.0,
            ly + 10.0,
            escape(text)
        );
    }
    out.push_str("</svg>\n");
    out
}
