//! Minimal static SVG line charts.

use std::fmt::Write as _;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 360.0;
const MARGIN: (f64, f64, f64, f64) = (60.0, 20.0, 30.0, 40.0); // left, right, top, bottom
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#7f7f7f"];
const MAX_POINTS: usize = 2000;

pub struct Series<'a> {
    pub label: &'a str,
    pub values: &'a [f64],
}

fn bounds(series: &[Series]) -> (f64, f64) {
    let (lo, hi) = series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Render `series` against the shared `x` axis.
pub fn line_chart(title: &str, x_label: &str, x: &[f64], series: &[Series]) -> String {
    let (l, r, t, b) = MARGIN;
    let pw = WIDTH - l - r;
    let ph = HEIGHT - t - b;
    let x0 = x.first().copied().unwrap_or(0.0);
    let x1 = x.last().copied().unwrap_or(1.0).max(x0 + 1e-12);
    let (y0, y1) = bounds(series);
    let sx = |v: f64| l + (v - x0) / (x1 - x0) * pw;
    let sy = |v: f64| t + (1.0 - (v - y0) / (y1 - y0)) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{title}</text>"#, WIDTH / 2.0);
    let _ = writeln!(svg, r##"<rect x="{l}" y="{t}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##);
    for k in 0..=4 {
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" text-anchor="end">{}</text><line x1="{l}" x2="{}" y1="{}" y2="{}" stroke="#ddd"/>"##,
            l - 4.0,
            sy(fy) + 4.0,
            fmt_tick(fy),
            l + pw,
            sy(fy),
            sy(fy)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            sx(fx),
            t + ph + 16.0,
            fmt_tick(fx)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        l + pw / 2.0,
        HEIGHT - 6.0
    );

    let stride = x.len().div_ceil(MAX_POINTS).max(1);
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut path = String::new();
        for (j, (xv, yv)) in x.iter().zip(s.values).enumerate().step_by(stride) {
            if yv.is_finite() {
                let _ = write!(path, "{}{:.2},{:.2}", if j == 0 { "M" } else { " L" }, sx(*xv), sy(*yv));
            }
        }
        let _ = writeln!(svg, r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="1.2"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            l + 8.0,
            t + 14.0 * (k + 1) as f64,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 || (1e-2..1e4).contains(&v.abs()) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_every_series() {
        let x: Vec<f64> = (0..5000).map(|k| k as f64 * 1e-4).collect();
        let a: Vec<f64> = x.iter().map(|t| t.sin()).collect();
        let b = vec![0.5; x.len()];
        let svg = line_chart("demo", "t", &x, &[Series { label: "a", values: &a }, Series { label: "b", values: &b }]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<path").count(), 2);
        assert!(svg.contains(">demo<"));
    }

    #[test]
    fn flat_and_empty_inputs() {
        let svg = line_chart("flat", "t", &[0.0, 1.0], &[Series { label: "c", values: &[2.0, 2.0] }]);
        assert!(!svg.contains("NaN"));
        let svg = line_chart("empty", "t", &[], &[]);
        assert!(svg.contains("</svg>"));
    }
}
