//! Static SVG plots of success-rate results.

use super::policy::{AmbiguityMatrix, ScalingCurve};
use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 320.0;
const MARGIN: f64 = 48.0;

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n<text x=\"{}\" y=\"20\" text-anchor=\"middle\">{}</text>\n",
        W / 2.0,
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Success rate against demonstration count (log x axis) with CI whiskers.
pub fn curve_svg(curve: &ScalingCurve) -> String {
    let mut s = header(&format!("{} success rate vs demonstrations", curve.variant));
    let (x0, x1, y0, y1) = (MARGIN, W - MARGIN / 2.0, H - MARGIN, MARGIN);
    let _ = writeln!(s, "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>");
    let _ = writeln!(s, "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>");
    let ys = |r: f64| y0 + (y1 - y0) * r;
    for r in [0.0, 0.5, 1.0] {
        let _ = writeln!(s, "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{r:.1}</text>", x0 - 6.0, ys(r) + 4.0);
    }
    let counts: Vec<f64> = curve.points.iter().map(|p| (p.demos.max(1) as f64).ln()).collect();
    let (lo, hi) = counts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &c| (a.min(c), b.max(c)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let xs = |c: f64| x0 + 16.0 + (x1 - x0 - 32.0) * (c - lo) / span;
    let mut path = String::new();
    for (p, &c) in curve.points.iter().zip(&counts) {
        let x = xs(c);
        let _ = writeln!(s, "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"gray\"/>", ys(p.ci_lo), ys(p.ci_hi));
        let _ = writeln!(s, "<circle cx=\"{x:.1}\" cy=\"{:.1}\" r=\"3\"/>", ys(p.rate));
        let _ = writeln!(s, "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>", y0 + 16.0, p.demos);
        path += &format!("{}{x:.1},{:.1}", if path.is_empty() { "M" } else { " L" }, ys(p.rate));
    }
    let _ = writeln!(s, "<path d=\"{path}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\"/>");
    s + "</svg>\n"
}

/// Grid of cells shaded by success rate, picks down and places across.
pub fn matrix_svg(matrix: &AmbiguityMatrix) -> String {
    let mut s = header(&format!("{} success rate by picks x places", matrix.variant));
    let mut picks: Vec<usize> = matrix.cells.iter().map(|c| c.picks).collect();
    let mut places: Vec<usize> = matrix.cells.iter().map(|c| c.places).collect();
    picks.sort_unstable();
    picks.dedup();
    places.sort_unstable();
    places.dedup();
    let cw = (W - 2.0 * MARGIN) / places.len().max(1) as f64;
    let ch = (H - 2.0 * MARGIN) / picks.len().max(1) as f64;
    for (j, q) in places.iter().enumerate() {
        let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{q}</text>", MARGIN + cw * (j as f64 + 0.5), MARGIN - 6.0);
    }
    for (i, p) in picks.iter().enumerate() {
        let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{p}</text>", MARGIN - 6.0, MARGIN + ch * (i as f64 + 0.5) + 4.0);
    }
    for c in &matrix.cells {
        let i = picks.iter().position(|&p| p == c.picks).expect("listed");
        let j = places.iter().position(|&q| q == c.places).expect("listed");
        let (x, y) = (MARGIN + cw * j as f64, MARGIN + ch * i as f64);
        let shade = (255.0 * (1.0 - c.rate)).round() as u8;
        let _ = writeln!(s, "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{cw:.1}\" height=\"{ch:.1}\" fill=\"rgb({shade},{shade},255)\" stroke=\"white\"/>");
        let ink = if c.rate > 0.5 { "white" } else { "black" };
        let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" fill=\"{ink}\">{:.2}</text>", x + cw / 2.0, y + ch / 2.0 + 4.0, c.rate);
    }
    s + "</svg>\n"
}
