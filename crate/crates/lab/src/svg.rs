//! Minimal SVG figures: line charts and heatmaps with contour lines.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Axes {
    pub log_x: bool,
    pub log_y: bool,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 0.5 * lo.abs().max(1.0), hi + 0.5 * hi.abs().max(1.0))
    }
}

/// Tick label with about three significant digits.
fn short(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 {
        "0".into()
    } else if (1e-3..1e4).contains(&a) {
        let digits = (2 - a.log10().floor() as i32).max(0) as usize;
        let t = format!("{v:.digits$}");
        if t.contains('.') {
            t.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            t
        }
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes_and_ticks(out: &mut String, f: &Frame, labels: (&str, &str), axes: Axes) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    let tick = |v: f64, log: bool| short(if log { 10f64.powf(v) } else { v });
    for k in 0..=4 {
        let s = k as f64 / 4.0;
        let xv = f.x.0 + s * (f.x.1 - f.x.0);
        let yv = f.y.0 + s * (f.y.1 - f.y.0);
        let (px, py) = (f.px(xv), f.py(yv));
        let _ = writeln!(out, r#"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
            y0 + 18.0,
            tick(xv, axes.log_x)
        );
        let _ = writeln!(out, r#"<line x1="{}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            py + 4.0,
            tick(yv, axes.log_y)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(labels.0)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(labels.1)
    );
}

/// Line chart of `series`; points that are non-finite (or non-positive on a
/// log axis) are dropped.
pub fn line_chart(title: &str, labels: (&str, &str), series: &[Series], axes: Axes) -> String {
    let map = |v: f64, log: bool| if log { v.log10() } else { v };
    let mapped: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .map(|&(x, y)| (map(x, axes.log_x), map(y, axes.log_y)))
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .collect()
        })
        .collect();
    let all = mapped.iter().flatten();
    let (mut xl, mut xh, mut yl, mut yh) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        xl = xl.min(x);
        xh = xh.max(x);
        yl = yl.min(y);
        yh = yh.max(y);
    }
    if !xl.is_finite() {
        (xl, xh, yl, yh) = (0.0, 1.0, 0.0, 1.0);
    }
    let f = Frame {
        x: if xh > xl { (xl, xh) } else { padded(xl, xh) },
        y: padded(yl, yh),
    };
    let mut out = String::new();
    header(&mut out, title);
    axes_and_ticks(&mut out, &f, labels, axes);
    for (k, (s, pts)) in series.iter().zip(&mapped).enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        if pts.len() <= 64 {
            for &(x, y) in pts {
                let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#, f.px(x), f.py(y));
            }
        }
        let ly = TOP + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{ly}" fill="{colour}" text-anchor="end">{}</text>"#,
            WIDTH - RIGHT - 8.0,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Colour ramp from dark blue (0) to yellow (1).
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (68.0 + t * (253.0 - 68.0)) as u8;
    let g = (1.0 + t * (231.0 - 1.0)) as u8;
    let b = (84.0 + t * (37.0 - 84.0)).max(0.0) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Segments of the `level` set of a row-major grid (`values[i * ny + j]`
/// at `(xs[i], ys[j])`), by marching squares. Cells touching a missing
/// value are skipped.
pub fn contour_segments(xs: &[f64], ys: &[f64], values: &[Option<f64>], level: f64) -> Vec<[(f64, f64); 2]> {
    let ny = ys.len();
    let at = |i: usize, j: usize| values[i * ny + j];
    let mut segs = Vec::new();
    for i in 0..xs.len().saturating_sub(1) {
        for j in 0..ny.saturating_sub(1) {
            let corners = [(i, j), (i, j + 1), (i + 1, j + 1), (i + 1, j)];
            let vals: Option<Vec<f64>> = corners.iter().map(|&(a, b)| at(a, b)).collect();
            let Some(vals) = vals else { continue };
            let mut hits = Vec::new();
            for k in 0..4 {
                let (va, vb) = (vals[k] - level, vals[(k + 1) % 4] - level);
                if (va > 0.0) != (vb > 0.0) {
                    let s = va / (va - vb);
                    let (a, b) = (corners[k], corners[(k + 1) % 4]);
                    hits.push((xs[a.0] + s * (xs[b.0] - xs[a.0]), ys[a.1] + s * (ys[b.1] - ys[a.1])));
                }
            }
            if hits.len() >= 2 {
                segs.push([hits[0], hits[1]]);
            }
            if hits.len() == 4 {
                segs.push([hits[2], hits[3]]);
            }
        }
    }
    segs
}

/// Heatmap of a row-major grid with contour lines at `levels`. Missing
/// values are drawn grey.
pub fn heatmap(
    title: &str,
    labels: (&str, &str),
    xs: &[f64],
    ys: &[f64],
    values: &[Option<f64>],
    levels: &[f64],
) -> String {
    let (lo, hi) = values
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let edges = |v: &[f64], k: usize| -> (f64, f64) {
        let left = if k == 0 { v[0] } else { 0.5 * (v[k - 1] + v[k]) };
        let right = if k + 1 == v.len() { v[k] } else { 0.5 * (v[k] + v[k + 1]) };
        (left, right)
    };
    let f = Frame {
        x: (xs[0], xs[xs.len() - 1]),
        y: (ys[0], ys[ys.len() - 1]),
    };
    let mut out = String::new();
    header(&mut out, title);
    let ny = ys.len();
    for i in 0..xs.len() {
        let (xa, xb) = edges(xs, i);
        for j in 0..ny {
            let (ya, yb) = edges(ys, j);
            let fill = values[i * ny + j].map_or_else(|| "#bbbbbb".to_string(), |v| ramp((v - lo) / span));
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}" stroke="none"/>"#,
                f.px(xa),
                f.py(yb),
                f.px(xb) - f.px(xa),
                f.py(ya) - f.py(yb)
            );
        }
    }
    for &level in levels {
        for [a, b] in contour_segments(xs, ys, values, level) {
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="white" stroke-width="1.2"/>"#,
                f.px(a.0),
                f.py(a.1),
                f.px(b.0),
                f.py(b.1)
            );
        }
    }
    axes_and_ticks(&mut out, &f, labels, Axes::default());
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_labels_are_short() {
        assert_eq!(short(0.0), "0");
        assert_eq!(short(4.56789), "4.57");
        assert_eq!(short(0.004506), "0.00451");
        assert_eq!(short(1234.7), "1235");
        assert_eq!(short(-2.5), "-2.5");
        assert_eq!(short(8.273e-11), "8.27e-11");
    }

    #[test]
    fn circle_contour_has_the_right_radius() {
        let xs: Vec<f64> = (0..41).map(|k| -1.0 + k as f64 / 20.0).collect();
        let values: Vec<Option<f64>> = xs
            .iter()
            .flat_map(|x| xs.iter().map(move |y| Some(x * x + y * y)))
            .collect();
        let segs = contour_segments(&xs, &xs, &values, 0.25);
        assert!(segs.len() > 20);
        for s in segs {
            for p in s {
                let r = (p.0 * p.0 + p.1 * p.1).sqrt();
                assert!((r - 0.5).abs() < 0.01, "{r}");
            }
        }
    }

    #[test]
    fn missing_cells_are_skipped() {
        let xs = [0.0, 1.0];
        let segs = contour_segments(&xs, &xs, &[Some(0.0), None, Some(1.0), Some(1.0)], 0.5);
        assert!(segs.is_empty());
    }

    #[test]
    fn figures_are_well_formed() {
        let s = line_chart(
            "a < b",
            ("x", "y"),
            &[Series {
                name: "s".into(),
                points: vec![(1.0, 2.0), (2.0, 3.0), (0.0, -1.0)],
            }],
            Axes { log_x: true, log_y: false },
        );
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("a &lt; b"));
        assert_eq!(s.matches("<circle").count(), 2);
        let h = heatmap("h", ("x", "y"), &[0.0, 1.0], &[0.0, 1.0], &[Some(0.0), None, Some(1.0), Some(2.0)], &[0.5]);
        assert!(h.contains("#bbbbbb"));
    }
}
