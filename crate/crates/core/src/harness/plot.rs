//! Self-contained log-log SVG plots of fitted sweeps.

use std::fmt::Write;

use super::fit::RateFit;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 48.0;

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn covering(values: impl Iterator<Item = f64>) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let pad = ((hi - lo) * 0.08).max(0.05);
        Axis { lo: lo - pad, hi: hi + pad }
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }
}

/// Log-log scatter of the fitted pairs with the fitted line, annotated by slope.
pub fn render_svg(title: &str, fits: &[(String, RateFit)]) -> String {
    let xs = Axis::covering(fits.iter().flat_map(|(_, f)| f.pairs.iter().map(|p| p.0.log10())));
    let ys = Axis::covering(fits.iter().flat_map(|(_, f)| f.pairs.iter().map(|p| p.1.log10())));
    let px = |lx: f64| MARGIN + xs.frac(lx) * (WIDTH - 2.0 * MARGIN);
    let py = |ly: f64| HEIGHT - MARGIN - ys.frac(ly) * (HEIGHT - 2.0 * MARGIN);
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.1} {y0:.1} L{x0:.1} {y1:.1} L{x1:.1} {y1:.1}" stroke="black" fill="none"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">log10 k</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" font-family="sans-serif" font-size="11" transform="rotate(-90 14 {:.1})" text-anchor="middle">log10 error</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for tick in [xs.lo, 0.5 * (xs.lo + xs.hi), xs.hi] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">{:.2}</text>"#,
            px(tick),
            y1 + 14.0,
            tick
        );
    }
    for tick in [ys.lo, 0.5 * (ys.lo + ys.hi), ys.hi] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="end">{:.2}</text>"#,
            x0 - 4.0,
            py(tick) + 3.0,
            tick
        );
    }
    for (i, (label, fit)) in fits.iter().enumerate() {
        let color = palette[i % palette.len()];
        let lk: Vec<f64> = fit.pairs.iter().map(|p| p.0.log10()).collect();
        let (kmin, kmax) = lk.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        // the fit is in natural logs; the plot is in log10 on both axes, so the slope carries over
        let line = |lx: f64| (fit.intercept / std::f64::consts::LN_10) + fit.slope * lx;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-dasharray="4 3"/>"#,
            px(kmin),
            py(line(kmin)),
            px(kmax),
            py(line(kmax))
        );
        for p in &fit.pairs {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="{color}"/>"#,
                px(p.0.log10()),
                py(p.1.log10())
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="{color}" text-anchor="end">{}: slope {:.3} (r² {:.4})</text>"#,
            x1,
            y0 + 14.0 * (i as f64 + 1.0),
            escape(label),
            fit.slope,
            fit.r2
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
