//! Minimal hand-written SVG line charts.

use std::fmt::Write;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

pub fn color(k: usize) -> &'static str {
    PALETTE[k % PALETTE.len()]
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: Option<String>,
    pub color: String,
    pub points: Vec<(f64, f64)>,
    pub width: f64,
    pub opacity: f64,
}

impl Series {
    pub fn new(label: &str, color: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: Some(label.to_string()),
            color: color.to_string(),
            points,
            width: 1.5,
            opacity: 1.0,
        }
    }

    /// A faint unlabeled line, for many overlaid sample paths.
    pub fn faint(color: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: None,
            color: color.to_string(),
            points,
            width: 0.6,
            opacity: 0.25,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub series: Vec<Series>,
    pub markers: Vec<(f64, String)>,
}

impl Chart {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            x_range: (0.0, 1.0),
            y_range: (0.0, 1.0),
            series: Vec::new(),
            markers: Vec::new(),
        }
    }

    /// Sets both ranges to cover every series, with a small vertical pad.
    pub fn fit(mut self) -> Self {
        let pts = self.series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if x0 < x1 {
            self.x_range = (x0, x1);
        }
        if y0 <= y1 {
            let pad = ((y1 - y0) * 0.05).max(1e-9);
            self.y_range = (y0 - pad, y1 + pad);
        }
        self
    }

    /// Renders into a `w × h` box whose top-left corner is `(ox, oy)`.
    fn render_into(&self, out: &mut String, ox: f64, oy: f64, w: f64, h: f64) {
        let (left, right, top, bottom) = (56.0, 12.0, 26.0, 40.0);
        let (pw, ph) = (w - left - right, h - top - bottom);
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        let sx = |x: f64| ox + left + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| oy + top + (1.0 - (y - y0) / (y1 - y0)) * ph;

        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="#333"/>"##,
            ox + left,
            oy + top
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{}</text>"#,
            ox + left + pw / 2.0,
            oy + 17.0,
            escape(&self.title)
        );
        for k in 0..=4 {
            let fx = x0 + (x1 - x0) * k as f64 / 4.0;
            let fy = y0 + (y1 - y0) * k as f64 / 4.0;
            let _ = writeln!(
                out,
                r##"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text>"##,
                sx(fx),
                oy + top + ph + 14.0,
                tick(fx, x1 - x0)
            );
            let _ = writeln!(
                out,
                r##"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{}</text>"##,
                ox + left - 4.0,
                sy(fy) + 3.0,
                tick(fy, y1 - y0)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            ox + left + pw / 2.0,
            oy + h - 6.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
            ox + 12.0,
            oy + top + ph / 2.0,
            ox + 12.0,
            oy + top + ph / 2.0,
            escape(&self.y_label)
        );

        for s in &self.series {
            if s.points.is_empty() {
                continue;
            }
            let mut d = String::new();
            for (k, &(x, y)) in s.points.iter().enumerate() {
                let _ = write!(d, "{}{:.2},{:.2}", if k == 0 { "M" } else { " L" }, sx(x), sy(y));
            }
            let _ = writeln!(
                out,
                r#"<path d="{d}" fill="none" stroke="{}" stroke-width="{}" stroke-opacity="{}"/>"#,
                s.color, s.width, s.opacity
            );
        }
        for (x, label) in &self.markers {
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#555" stroke-dasharray="2,2"/>"##,
                sx(*x),
                oy + top,
                sx(*x),
                oy + top + ph
            );
            let _ = writeln!(
                out,
                r##"<text x="{:.2}" y="{:.2}" font-size="10" fill="#555">{}</text>"##,
                sx(*x) + 3.0,
                oy + top + 11.0,
                escape(label)
            );
        }
        let mut row = 0.0;
        for s in self.series.iter().filter(|s| s.label.is_some()) {
            let y = oy + top + 12.0 + row * 13.0;
            let x = ox + left + pw - 110.0;
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="2"/>"#,
                y - 4.0,
                x + 16.0,
                y - 4.0,
                s.color
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{y:.2}" font-size="10">{}</text>"#,
                x + 20.0,
                escape(s.label.as_deref().unwrap_or(""))
            );
            row += 1.0;
        }
    }
}

/// Lays charts out in a grid with `cols` columns.
pub fn render_grid(charts: &[Chart], cols: usize, cell_w: f64, cell_h: f64) -> String {
    let rows = charts.len().div_ceil(cols.max(1));
    let (w, h) = (cell_w * cols as f64, cell_h * rows as f64);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for (k, chart) in charts.iter().enumerate() {
        let (r, c) = (k / cols, k % cols);
        chart.render_into(&mut out, c as f64 * cell_w, r as f64 * cell_h, cell_w, cell_h);
    }
    out.push_str("</svg>\n");
    out
}

pub fn render(chart: &Chart, w: f64, h: f64) -> String {
    render_grid(std::slice::from_ref(chart), 1, w, h)
}

/// Tick label with enough decimals to tell ticks `span / 4` apart.
fn tick(v: f64, span: f64) -> String {
    let step = (span / 4.0).abs();
    let decimals = if step > 0.0 {
        (1.0 - step.log10().floor()).clamp(0.0, 12.0) as usize
    } else {
        3
    };
    let s = format!("{v:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        &s
    };
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_series_legend_and_marker() {
        let mut chart = Chart::new("title <x>", "t", "x");
        chart.series.push(Series::new("a", color(0), vec![(0.0, 0.0), (1.0, 1.0)]));
        chart.series.push(Series::faint(color(1), vec![(0.0, 0.5), (1.0, 0.5)]));
        chart.markers.push((0.5, "mark".into()));
        let svg = render(&chart.fit(), 400.0, 300.0);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<path").count(), 2);
        assert!(svg.contains("title &lt;x&gt;"));
        assert!(svg.contains(">mark</text>"));
    }

    #[test]
    fn ticks_are_compact() {
        assert_eq!(tick(0.5, 1.0), "0.5");
        assert_eq!(tick(2.0, 3.0), "2");
        assert_eq!(tick(-0.0, 1.0), "0");
        assert_eq!(tick(0.00125, 0.002), "0.00125");
        assert_eq!(tick(250.75, 999.0), "251");
        assert_eq!(tick(500.0, 999.0), "500");
    }
}
