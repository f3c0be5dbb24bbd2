//! Minimal self-contained SVG charts.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 48.0;
const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#9c755f",
];

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

struct Canvas {
    body: String,
    y_lo: f64,
    y_hi: f64,
}

impl Canvas {
    fn new(title: &str, y_lo: f64, y_hi: f64) -> Canvas {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(body, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            body,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        Canvas { body, y_lo, y_hi }
    }

    fn plot_w(&self) -> f64 {
        WIDTH - LEFT - RIGHT
    }

    fn y(&self, v: f64) -> f64 {
        let h = HEIGHT - TOP - BOTTOM;
        TOP + h * (self.y_hi - v) / (self.y_hi - self.y_lo)
    }

    fn axes(&mut self, ticks: usize) {
        let x0 = LEFT;
        let x1 = WIDTH - RIGHT;
        for i in 0..=ticks {
            let v = self.y_lo + (self.y_hi - self.y_lo) * i as f64 / ticks as f64;
            let y = self.y(v);
            let _ = writeln!(
                self.body,
                "<line x1=\"{x0}\" y1=\"{y:.2}\" x2=\"{x1}\" y2=\"{y:.2}\" stroke=\"#ddd\"/>\n\
                 <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
                x0 - 4.0,
                y + 4.0,
                trim_number(v)
            );
        }
        let yz = self.y(self.y_lo.max(0.0).min(self.y_hi));
        let _ = writeln!(
            self.body,
            r#"<line x1="{x0}" y1="{yz:.2}" x2="{x1}" y2="{yz:.2}" stroke="black"/>"#
        );
        let _ = writeln!(
            self.body,
            r#"<line x1="{x0}" y1="{TOP}" x2="{x0}" y2="{:.2}" stroke="black"/>"#,
            HEIGHT - BOTTOM
        );
    }

    fn bar(&mut self, x: f64, w: f64, value: f64, fill: &str, tip: &str) {
        let base = self.y(0.0_f64.clamp(self.y_lo, self.y_hi));
        let top = self.y(value);
        let (y, h) = if top < base {
            (top, base - top)
        } else {
            (base, top - base)
        };
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}"><title>{}</title></rect>"#,
            escape(tip)
        );
    }

    fn x_label(&mut self, x: f64, text: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            HEIGHT - BOTTOM + 16.0,
            escape(text)
        );
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn trim_number(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Bar chart of histogram `counts` whose bin `i` starts at `lo + i·width`.
pub fn histogram(title: &str, lo: f64, width: f64, counts: &[usize]) -> String {
    let max = counts.iter().copied().max().unwrap_or(0).max(1);
    let mut c = Canvas::new(title, 0.0, max as f64);
    c.axes(max.min(5));
    let bw = c.plot_w() / counts.len().max(1) as f64;
    for (i, &n) in counts.iter().enumerate() {
        let start = lo + i as f64 * width;
        let tip = format!("[{start:.2}, {:.2}): {n}", start + width);
        c.bar(
            LEFT + i as f64 * bw + 1.0,
            bw - 2.0,
            n as f64,
            PALETTE[0],
            &tip,
        );
    }
    for i in (0..=counts.len()).step_by(4) {
        c.x_label(LEFT + i as f64 * bw, &trim_number(lo + i as f64 * width));
    }
    c.finish()
}

/// Grouped bars: one group per entry of `groups`, one bar per series.
/// `values[s][g]` is series `s` in group `g`.
pub fn grouped_bars(
    title: &str,
    groups: &[&str],
    series: &[String],
    values: &[Vec<f64>],
) -> String {
    let all = values.iter().flatten().copied().filter(|v| v.is_finite());
    let (mut lo, mut hi) = all.fold((0.0_f64, 1.0_f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    lo = (lo * 4.0).floor() / 4.0;
    hi = (hi * 4.0).ceil() / 4.0;
    let mut c = Canvas::new(title, lo, hi);
    c.axes(4);
    let gw = c.plot_w() / groups.len().max(1) as f64;
    let bw = gw * 0.8 / series.len().max(1) as f64;
    for (g, name) in groups.iter().enumerate() {
        let gx = LEFT + g as f64 * gw + gw * 0.1;
        for (s, model) in series.iter().enumerate() {
            let v = values[s][g];
            let tip = format!("{model} {name}: {v:.4}");
            c.bar(
                gx + s as f64 * bw,
                bw * 0.9,
                v,
                PALETTE[s % PALETTE.len()],
                &tip,
            );
        }
        c.x_label(LEFT + (g as f64 + 0.5) * gw, name);
    }
    for (s, model) in series.iter().enumerate() {
        let x = LEFT + 8.0 + s as f64 * 110.0;
        let y = HEIGHT - 14.0;
        let _ = writeln!(
            c.body,
            r#"<rect x="{x:.2}" y="{:.2}" width="10" height="10" fill="{}"/><text x="{:.2}" y="{y:.2}">{}</text>"#,
            y - 9.0,
            PALETTE[s % PALETTE.len()],
            x + 14.0,
            escape(model)
        );
    }
    c.finish()
}
