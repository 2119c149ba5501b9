//! Minimal SVG renderer for the report command.
//!
//! Emits standalone vector graphics with no external assets: line charts
//! for perturbation curves and box plots for score distributions. Output
//! is a pure function of the input, so identical results render to
//! byte-identical files.

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 42.0;
const MARGIN_BOTTOM: f64 = 52.0;

/// Fixed palette; series beyond its length cycle.
pub const PALETTE: [&str; 7] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// One polyline in a line chart.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub color: String,
    pub dashed: bool,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

fn coord(v: f64) -> String {
    format!("{v:.2}")
}

fn tick_label(v: f64) -> String {
    format!("{v:.2}")
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn from_ranges((x_min, x_max): (f64, f64), (y_min, y_max): (f64, f64)) -> Frame {
        let pad = |lo: f64, hi: f64| {
            if hi - lo < 1e-9 {
                (lo - 0.5, hi + 0.5)
            } else {
                let p = 0.05 * (hi - lo);
                (lo - p, hi + p)
            }
        };
        let (y_min, y_max) = pad(y_min, y_max);
        Frame { x_min, x_max, y_min, y_max }
    }

    fn px(&self, x: f64) -> f64 {
        let span = (self.x_max - self.x_min).max(1e-12);
        MARGIN_LEFT + (x - self.x_min) / span * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let span = (self.y_max - self.y_min).max(1e-12);
        HEIGHT - MARGIN_BOTTOM - (y - self.y_min) / span * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn header(out: &mut String) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
}

fn axes(out: &mut String, frame: &Frame, title: &str, x_label: &str, y_label: &str) {
    let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        coord((x0 + x1) / 2.0),
        escape(title)
    ));
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        coord(x0),
        coord(y0),
        coord(x1),
        coord(y0)
    ));
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        coord(x0),
        coord(y0),
        coord(x0),
        coord(y1)
    ));
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = frame.x_min + t * (frame.x_max - frame.x_min);
        let yv = frame.y_min + t * (frame.y_max - frame.y_min);
        let xp = frame.px(xv);
        let yp = frame.py(yv);
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
            coord(xp),
            coord(y0),
            coord(xp),
            coord(y0 + 5.0)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            coord(xp),
            coord(y0 + 18.0),
            tick_label(xv)
        ));
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
            coord(x0 - 5.0),
            coord(yp),
            coord(x0),
            coord(yp)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            coord(x0 - 8.0),
            coord(yp + 4.0),
            tick_label(yv)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        coord((x0 + x1) / 2.0),
        coord(HEIGHT - 14.0),
        escape(x_label)
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
        coord((y0 + y1) / 2.0),
        coord((y0 + y1) / 2.0),
        escape(y_label)
    ));
}

fn legend(out: &mut String, entries: &[(String, String, bool)]) {
    let x = WIDTH - MARGIN_RIGHT + 16.0;
    for (i, (label, color, dashed)) in entries.iter().enumerate() {
        let y = MARGIN_TOP + 14.0 + 20.0 * i as f64;
        let dash = if *dashed { " stroke-dasharray=\"6 3\"" } else { "" };
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"2\"{dash}/>\n",
            coord(x),
            coord(y),
            coord(x + 22.0),
            coord(y)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">{}</text>\n",
            coord(x + 28.0),
            coord(y + 4.0),
            escape(label)
        ));
    }
}

/// Renders one line chart; every series shares the axes.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    for s in series {
        for &y in &s.ys {
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
        for &x in &s.xs {
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
        }
    }
    if !y_lo.is_finite() {
        (y_lo, y_hi) = (0.0, 1.0);
    }
    if !x_lo.is_finite() {
        (x_lo, x_hi) = (0.0, 1.0);
    }
    let frame = Frame::from_ranges((x_lo, x_hi), (y_lo, y_hi));

    let mut out = String::new();
    header(&mut out);
    axes(&mut out, &frame, title, x_label, y_label);
    for s in series {
        let points: Vec<String> = s
            .xs
            .iter()
            .zip(&s.ys)
            .map(|(&x, &y)| format!("{},{}", coord(frame.px(x)), coord(frame.py(y))))
            .collect();
        let dash = if s.dashed { " stroke-dasharray=\"6 3\"" } else { "" };
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{dash} points=\"{}\"/>\n",
            s.color,
            points.join(" ")
        ));
    }
    let entries: Vec<(String, String, bool)> =
        series.iter().map(|s| (s.label.clone(), s.color.clone(), s.dashed)).collect();
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}

/// Quartile by linear interpolation on the sorted sample.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Renders one box (min, quartiles, median, max whiskers) per group.
pub fn box_plot(title: &str, y_label: &str, groups: &[(String, Vec<f64>)]) -> String {
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for (_, values) in groups {
        for &v in values {
            y_lo = y_lo.min(v);
            y_hi = y_hi.max(v);
        }
    }
    if !y_lo.is_finite() {
        (y_lo, y_hi) = (0.0, 1.0);
    }
    let frame = Frame::from_ranges((0.0, groups.len().max(1) as f64), (y_lo, y_hi));

    let mut out = String::new();
    header(&mut out);
    axes(&mut out, &frame, title, "", y_label);
    let slot = (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / groups.len().max(1) as f64;
    let box_w = (slot * 0.5).min(60.0);
    for (i, (label, values)) in groups.iter().enumerate() {
        let cx = MARGIN_LEFT + slot * (i as f64 + 0.5);
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            coord(cx),
            coord(HEIGHT - MARGIN_BOTTOM + 18.0),
            escape(label)
        ));
        if values.is_empty() {
            continue;
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
        let q1 = quantile(&sorted, 0.25);
        let med = quantile(&sorted, 0.5);
        let q3 = quantile(&sorted, 0.75);
        let color = PALETTE[i % PALETTE.len()];
        let (bx0, bx1) = (cx - box_w / 2.0, cx + box_w / 2.0);
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\"/>\n",
            coord(cx),
            coord(frame.py(min)),
            coord(cx),
            coord(frame.py(q1))
        ));
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\"/>\n",
            coord(cx),
            coord(frame.py(q3)),
            coord(cx),
            coord(frame.py(max))
        ));
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{color}\" \
             fill-opacity=\"0.25\" stroke=\"{color}\"/>\n",
            coord(bx0),
            coord(frame.py(q3)),
            coord(box_w),
            coord((frame.py(q1) - frame.py(q3)).max(0.5))
        ));
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            coord(bx0),
            coord(frame.py(med)),
            coord(bx1),
            coord(frame.py(med))
        ));
    }
    out.push_str("</svg>\n");
    out
}
