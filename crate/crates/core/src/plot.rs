//! Minimal static SVG charts for reports. Output depends only on the data,
//! so equal inputs give byte-identical files.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug)]
struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Self { lo: 0.0, hi: 1.0 };
        }
        if hi - lo < 1e-12 {
            return Self { lo: lo - 0.5, hi: hi + 0.5 };
        }
        let pad = 0.05 * (hi - lo);
        Self { lo: lo - pad, hi: hi + pad }
    }

    fn ticks(&self) -> Vec<f64> {
        (0..=4).map(|i| self.lo + (self.hi - self.lo) * i as f64 / 4.0).collect()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

struct Frame {
    x: Axis,
    y: Axis,
    out: String,
}

impl Frame {
    fn new(title: &str, desc: &str, xlabel: &str, ylabel: &str, x: Axis, y: Axis, x_ticks: bool) -> Self {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, "<desc>{}</desc>", esc(desc));
        let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(title));
        let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
        let _ = writeln!(out, r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y1 - y0);
        let mut f = Self { x, y, out };
        for t in x.ticks().into_iter().filter(|_| x_ticks) {
            let px = f.px(t);
            let _ = writeln!(f.out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, num(px), y1 + 16.0, tick_label(t));
        }
        for t in y.ticks() {
            let py = f.py(t);
            let _ = writeln!(f.out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, x0 - 6.0, num(py + 4.0), tick_label(t));
        }
        let _ = writeln!(f.out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 12.0, esc(xlabel));
        let _ = writeln!(
            f.out,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            (y0 + y1) / 2.0,
            esc(ylabel)
        );
        f
    }

    fn px(&self, v: f64) -> f64 {
        LEFT + (v - self.x.lo) / (self.x.hi - self.x.lo) * (W - RIGHT - LEFT)
    }

    fn py(&self, v: f64) -> f64 {
        H - BOTTOM - (v - self.y.lo) / (self.y.hi - self.y.lo) * (H - BOTTOM - TOP)
    }

    fn legend(&mut self, labels: &[String]) {
        for (i, l) in labels.iter().enumerate() {
            let y = TOP + 14.0 + 16.0 * i as f64;
            let x = W - RIGHT - 110.0;
            let _ = writeln!(self.out, r#"<circle cx="{x}" cy="{}" r="4" fill="{}"/>"#, y - 4.0, PALETTE[i % PALETTE.len()]);
            let _ = writeln!(self.out, r#"<text x="{}" y="{y}">{}</text>"#, x + 10.0, esc(l));
        }
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn tick_label(v: f64) -> String {
    if v.abs() >= 1000.0 || (v.abs() < 0.01 && v != 0.0) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

/// Scatter plot of one or more series, with optional cross markers.
pub fn scatter(title: &str, desc: &str, xlabel: &str, ylabel: &str, series: &[Series], crosses: &[(f64, f64)]) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter()).chain(crosses.iter());
    let x = Axis::fit(all().map(|p| p.0));
    let y = Axis::fit(all().map(|p| p.1));
    let mut f = Frame::new(title, desc, xlabel, ylabel, x, y, true);
    for (i, s) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        for &(a, b) in &s.points {
            let _ = writeln!(
                f.out,
                r#"<circle cx="{}" cy="{}" r="2" fill="{colour}" fill-opacity="0.6"/>"#,
                num(f.px(a)),
                num(f.py(b))
            );
        }
    }
    for &(a, b) in crosses {
        let (cx, cy) = (f.px(a), f.py(b));
        let _ = writeln!(
            f.out,
            r#"<path d="M{} {}L{} {}M{} {}L{} {}" stroke="black" stroke-width="2.5"/>"#,
            num(cx - 7.0),
            num(cy - 7.0),
            num(cx + 7.0),
            num(cy + 7.0),
            num(cx - 7.0),
            num(cy + 7.0),
            num(cx + 7.0),
            num(cy - 7.0)
        );
    }
    let labels: Vec<String> = series.iter().map(|s| s.label.clone()).collect();
    if labels.len() > 1 {
        f.legend(&labels);
    }
    f.finish()
}

/// Labelled vertical bars with optional symmetric error whiskers.
pub fn bars(title: &str, desc: &str, xlabel: &str, ylabel: &str, bars: &[(String, f64, f64)], y_max: Option<f64>) -> String {
    let top = y_max.unwrap_or_else(|| bars.iter().map(|b| b.1 + b.2).fold(0.0, f64::max).max(1e-9) * 1.1);
    let x = Axis { lo: 0.0, hi: bars.len().max(1) as f64 };
    let y = Axis { lo: 0.0, hi: top };
    let mut f = Frame::new(title, desc, xlabel, ylabel, x, y, false);
    let slot = (W - RIGHT - LEFT) / bars.len().max(1) as f64;
    for (i, (label, v, err)) in bars.iter().enumerate() {
        let x0 = LEFT + slot * (i as f64 + 0.2);
        let (yv, y0) = (f.py(*v), f.py(0.0));
        let _ = writeln!(
            f.out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
            num(x0),
            num(yv),
            num(slot * 0.6),
            num(y0 - yv),
            PALETTE[0]
        );
        let cx = x0 + slot * 0.3;
        if *err > 0.0 {
            let (a, b) = (f.py(v + err), f.py((v - err).max(0.0)));
            let _ = writeln!(f.out, r#"<path d="M{0} {1}L{0} {2}" stroke="black"/>"#, num(cx), num(a), num(b));
        }
        let _ = writeln!(
            f.out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            num(cx),
            H - BOTTOM + 16.0,
            esc(label)
        );
    }
    f.finish()
}

/// Counts of `values` in `bins` equal-width bins over `[lo, hi]`; the last
/// bin is closed.
pub fn histogram_counts(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    for &v in values {
        if !(lo..=hi).contains(&v) {
            continue;
        }
        let b = (((v - lo) / (hi - lo)) * bins as f64).floor() as usize;
        counts[b.min(bins - 1)] += 1;
    }
    counts
}

/// Histogram over `[lo, hi]` drawn as bars.
pub fn histogram(title: &str, desc: &str, xlabel: &str, values: &[f64], lo: f64, hi: f64, bins: usize) -> String {
    let counts = histogram_counts(values, lo, hi, bins);
    let width = (hi - lo) / bins as f64;
    let data: Vec<(String, f64, f64)> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (format!("{:.0}", lo + width * (i as f64 + 0.5)), c as f64, 0.0))
        .collect();
    bars(title, desc, xlabel, "count", &data, None)
}

/// Polyline with highlighted points.
pub fn line(title: &str, desc: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)], marked: &[bool], hline: Option<f64>) -> String {
    let x = Axis::fit(points.iter().map(|p| p.0));
    let y = Axis::fit(points.iter().map(|p| p.1).chain(hline));
    let mut f = Frame::new(title, desc, xlabel, ylabel, x, y, true);
    if let Some(h) = hline {
        let py = num(f.py(h));
        let _ = writeln!(
            f.out,
            r#"<path d="M{LEFT} {py}L{} {py}" stroke="gray" stroke-dasharray="4 3"/>"#,
            W - RIGHT
        );
    }
    let path: Vec<String> = points
        .iter()
        .enumerate()
        .map(|(i, p)| format!("{}{} {}", if i == 0 { 'M' } else { 'L' }, num(f.px(p.0)), num(f.py(p.1))))
        .collect();
    if !path.is_empty() {
        let _ = writeln!(f.out, r#"<path d="{}" fill="none" stroke="{}"/>"#, path.concat(), PALETTE[0]);
    }
    for (i, p) in points.iter().enumerate() {
        let hot = marked.get(i).copied().unwrap_or(false);
        let _ = writeln!(
            f.out,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{}"/>"#,
            num(f.px(p.0)),
            num(f.py(p.1)),
            if hot { 5 } else { 3 },
            if hot { PALETTE[1] } else { PALETTE[0] }
        );
    }
    f.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scatter_is_well_formed_and_stable() {
        let s = vec![
            Series { label: "A".into(), points: vec![(0.0, 1.0), (2.0, -1.0)] },
            Series { label: "B & C".into(), points: vec![(1.0, 0.5)] },
        ];
        let a = scatter("t", "fingerprint x", "x", "y", &s, &[(1.0, 0.0)]);
        let b = scatter("t", "fingerprint x", "x", "y", &s, &[(1.0, 0.0)]);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<circle").count(), 3 + 2);
        assert!(a.contains("B &amp; C"));
        assert!(a.contains("<desc>fingerprint x</desc>"));
    }

    #[test]
    fn histogram_bins() {
        assert_eq!(histogram_counts(&[0.0, 20.0, 20.0, 100.0, 150.0], 0.0, 100.0, 5), vec![1, 2, 0, 0, 1]);
        let svg = histogram("h", "", "pct", &[0.0, 100.0], 0.0, 100.0, 5);
        assert_eq!(svg.matches("<rect").count(), 2 + 5);
    }

    #[test]
    fn degenerate_ranges_do_not_produce_nan() {
        let svg = line("l", "", "x", "y", &[(1.0, 2.0)], &[true], None);
        assert!(!svg.contains("NaN"));
        let svg = bars("b", "", "x", "y", &[], None);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
