//! Native SVG log-log scatter of (epsilon, t) with the fitted power law.
//!
//! Fixed 800x600 canvas, log10 axes with decade ticks, no external
//! dependencies. The caption states the fitted exponent next to the
//! predicted K_I/2 so a plot is self-describing.

use std::fmt::Write as _;

use pgt_core::FitResult;

const W: f64 = 800.0;
const H: f64 = 600.0;
const ML: f64 = 70.0; // left margin
const MR: f64 = 25.0;
const MT: f64 = 45.0;
const MB: f64 = 55.0;

/// `points` are (log10 epsilon, log10 t) pairs, precomputed in extended
/// precision so that epsilons far below f64 range still plot correctly.
pub fn render(points: &[(f64, f64)], fit: &FitResult) -> String {
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (x0, x1) = padded_range(&xs);
    let (y0, y1) = padded_range(&ys);
    let sx = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
    let sy = |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        W - ML - MR,
        H - MT - MB
    );

    // Decade ticks and grid lines.
    for d in (x0.ceil() as i64)..=(x1.floor() as i64) {
        let x = sx(d as f64);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{MT}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\"/>",
            H - MB
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">1e{d}</text>",
            H - MB + 18.0
        );
    }
    for d in (y0.ceil() as i64)..=(y1.floor() as i64) {
        let y = sy(d as f64);
        let _ = writeln!(
            svg,
            "<line x1=\"{ML}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>",
            W - MR
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">1e{d}</text>",
            ML - 6.0,
            y + 4.0
        );
    }

    // Fitted line t = c * eps^(-alpha) across the x range.
    if fit.alpha.is_finite() && fit.prefactor > 0.0 {
        let line_y = |x: f64| fit.prefactor.log10() - fit.alpha * x;
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>",
            sx(x0),
            sy(line_y(x0)),
            sx(x1),
            sy(line_y(x1))
        );
    }

    for (x, y) in xs.iter().zip(&ys) {
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"#2c5f8a\"/>",
            sx(*x),
            sy(*y)
        );
    }

    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"28\" font-size=\"14\" text-anchor=\"middle\">arrival time vs tolerance: alpha = {:.4}, K_I/2 = {:.1}, r^2 = {:.4}</text>",
        W / 2.0,
        fit.alpha,
        fit.reference,
        fit.r_squared
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">epsilon</text>",
        ML + (W - ML - MR) / 2.0,
        H - 14.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">t</text>",
        MT + (H - MT - MB) / 2.0,
        MT + (H - MT - MB) / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn padded_range(vals: &[f64]) -> (f64, f64) {
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(0.5);
    (lo - pad, hi + pad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_fixed_canvas() {
        let fit = FitResult {
            alpha: 0.5,
            prefactor: 2.0,
            r_squared: 0.99,
            n_points: 3,
            reference: 0.5,
            consistent: true,
            insufficient_data: false,
        };
        let svg = render(&[(-2.0, 1.0), (-4.0, 2.0), (-6.0, 3.0)], &fit);
        assert!(svg.contains("width=\"800\" height=\"600\""));
        assert!(svg.matches("<circle").count() == 3);
        assert!(svg.contains("alpha = 0.5000"));
    }
}
