//! Self-contained SVG line charts built from aggregate CSV rows.
//!
//! Output is a pure function of the rows: coordinates are printed with a
//! fixed precision and series follow first-appearance order.

use std::fmt::Write as _;

use awtc_polar::experiments::AggregateRow;

const WIDTH: f64 = 680.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 52.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    /// Minimum linear y range; widened to fit the data.
    pub y_range: Option<(f64, f64)>,
    /// Dashed horizontal line with a legend entry.
    pub reference: Option<(String, f64)>,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tick step of 1, 2 or 5 times a power of ten giving about five ticks.
fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let m = if r <= 1.0 {
        1.0
    } else if r <= 2.0 {
        2.0
    } else if r <= 5.0 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn decimals(step: f64) -> usize {
    (-step.log10().floor()).max(0.0) as usize
}

struct YAxis {
    log: bool,
    lo: f64,
    hi: f64,
    ticks: Vec<(f64, String)>,
}

impl YAxis {
    fn linear(chart: &Chart) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in chart.series.iter().flat_map(|s| &s.points) {
            lo = lo.min(p.y - p.err);
            hi = hi.max(p.y + p.err);
        }
        if let Some((_, r)) = chart.reference {
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if let Some((a, b)) = chart.y_range {
            lo = lo.min(a);
            hi = hi.max(b);
        }
        if !lo.is_finite() || !hi.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            hi = lo + 1.0;
        }
        let step = nice_step(hi - lo);
        let lo = (lo / step).floor() * step;
        let hi = (hi / step).ceil() * step;
        let prec = decimals(step);
        let count = ((hi - lo) / step).round() as usize;
        let ticks = (0..=count)
            .map(|k| {
                let v = lo + k as f64 * step;
                (v, format!("{v:.prec$}"))
            })
            .collect();
        YAxis { log: false, lo, hi, ticks }
    }

    fn log(chart: &Chart) -> Self {
        let positive: Vec<f64> = chart
            .series
            .iter()
            .flat_map(|s| &s.points)
            .flat_map(|p| [p.y, p.y + p.err])
            .filter(|&v| v > 0.0)
            .collect();
        let (mut lo, mut hi) = if positive.is_empty() {
            (0, 1)
        } else {
            let min = positive.iter().copied().fold(f64::INFINITY, f64::min);
            let max = positive.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (min.log10().floor() as i32, max.log10().ceil() as i32)
        };
        if hi <= lo {
            hi = lo + 1;
        }
        lo = lo.min(hi - 1);
        let ticks = (lo..=hi).map(|k| (k as f64, format!("1e{k}"))).collect();
        YAxis {
            log: true,
            lo: lo as f64,
            hi: hi as f64,
            ticks,
        }
    }

    /// Screen y of a data value; `None` for non-positive values on a log axis.
    fn map(&self, v: f64, plot_h: f64) -> Option<f64> {
        let t = if self.log {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        Some(TOP + plot_h * (1.0 - (t - self.lo) / (self.hi - self.lo)))
    }
}

/// Renders the chart. On a log axis, non-positive means are left out of
/// the polyline and marked on the bottom edge.
pub fn render(chart: &Chart) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let xs: Vec<f64> = chart.series.iter().flat_map(|s| s.points.iter().map(|p| p.x)).collect();
    let (mut x_lo, mut x_hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !x_lo.is_finite() {
        (x_lo, x_hi) = (0.0, 1.0);
    }
    if x_hi - x_lo < 1e-12 {
        x_lo -= 1.0;
        x_hi += 1.0;
    }
    let sx = |x: f64| LEFT + plot_w * (x - x_lo) / (x_hi - x_lo);
    let axis = if chart.log_y { YAxis::log(chart) } else { YAxis::linear(chart) };
    let sy = |v: f64| axis.map(v, plot_h);
    let bottom = TOP + plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(&chart.title)
    );

    for (v, label) in &axis.ticks {
        let y = if axis.log { TOP + plot_h * (1.0 - (v - axis.lo) / (axis.hi - axis.lo)) } else { sy(*v).unwrap() };
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            escape(label)
        );
    }
    let first_tick = x_lo.ceil() as i64;
    let last_tick = x_hi.floor() as i64;
    for k in first_tick..=last_tick {
        let x = sx(k as f64);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000"/>"##, bottom + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{k}</text>"#, bottom + 19.0);
    }
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#000"/>"##
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(&chart.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + plot_h / 2.0,
        escape(&chart.y_label)
    );

    let legend_x = LEFT + plot_w + 16.0;
    let mut legend_y = TOP + 10.0;
    if let Some((label, value)) = &chart.reference {
        if let Some(y) = sy(*value) {
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#555" stroke-dasharray="6 4"/>"##,
                LEFT + plot_w
            );
        }
        let _ = writeln!(
            s,
            r##"<line x1="{legend_x:.2}" y1="{legend_y:.2}" x2="{:.2}" y2="{legend_y:.2}" stroke="#555" stroke-dasharray="6 4"/>"##,
            legend_x + 22.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            legend_x + 28.0,
            legend_y + 4.0,
            escape(label)
        );
        legend_y += 20.0;
    }

    for (k, series) in chart.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut path = Vec::new();
        for p in &series.points {
            let x = sx(p.x);
            match sy(p.y) {
                Some(y) => {
                    path.push(format!("{x:.2},{y:.2}"));
                    if p.err > 0.0 {
                        let hi = sy(p.y + p.err).unwrap_or(y);
                        let lo = sy(p.y - p.err).unwrap_or(bottom);
                        let _ = writeln!(
                            s,
                            r#"<line x1="{x:.2}" y1="{lo:.2}" x2="{x:.2}" y2="{hi:.2}" stroke="{color}"/>"#
                        );
                    }
                    let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
                }
                None => {
                    let _ = writeln!(
                        s,
                        r#"<path d="M{:.2},{:.2} l4,-7 l4,7 z" fill="{color}"/>"#,
                        x - 4.0,
                        bottom
                    );
                }
            }
        }
        if path.len() > 1 {
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
        }
        let _ = writeln!(
            s,
            r#"<line x1="{legend_x:.2}" y1="{legend_y:.2}" x2="{:.2}" y2="{legend_y:.2}" stroke="{color}" stroke-width="2"/>"#,
            legend_x + 22.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            legend_x + 28.0,
            legend_y + 4.0,
            escape(&series.label)
        );
        legend_y += 20.0;
    }
    s.push_str("</svg>\n");
    s
}

/// One series per `beta`, points at `x = n`, for the given metric.
fn series_for(rows: &[AggregateRow], metric: &str) -> Vec<Series> {
    let mut out: Vec<(f64, Series)> = Vec::new();
    for row in rows.iter().filter(|r| r.metric == metric) {
        let point = Point {
            x: row.n as f64,
            y: row.mean,
            err: row.stderr,
        };
        match out.iter_mut().find(|(b, _)| *b == row.beta) {
            Some((_, s)) => s.points.push(point),
            None => out.push((
                row.beta,
                Series {
                    label: format!("beta = {}", row.beta),
                    points: vec![point],
                },
            )),
        }
    }
    for (_, s) in &mut out {
        s.points.sort_by(|a, b| a.x.total_cmp(&b.x));
    }
    out.into_iter().map(|(_, s)| s).collect()
}

/// Charts for an aggregate CSV, as `(file name, svg)` pairs.
pub fn charts_from_aggregate(rows: &[AggregateRow]) -> Vec<(String, String)> {
    let Some(first) = rows.first() else {
        return Vec::new();
    };
    let kind = first.kind.as_str();
    let t = first.blocks;
    let capacity = 1.0 - first.rho_w - first.rho_r;
    let x_label = "log2 N".to_string();
    let mut charts = Vec::new();
    let mut add = |metric: &str, chart: Chart| {
        if rows.iter().any(|r| r.metric == metric) {
            charts.push((format!("{kind}_{metric}.svg"), render(&chart)));
        }
    };
    match kind {
        "bounds" => {
            add(
                "ber_bound",
                Chart {
                    title: format!("Reliability bound, T = {t}"),
                    x_label: x_label.clone(),
                    y_label: "mean bound value".into(),
                    log_y: true,
                    y_range: None,
                    reference: None,
                    series: series_for(rows, "ber_bound"),
                },
            );
            add(
                "leak_bound",
                Chart {
                    title: format!("Leakage bound, T = {t}"),
                    x_label: x_label.clone(),
                    y_label: "mean bound value".into(),
                    log_y: true,
                    y_range: None,
                    reference: None,
                    series: series_for(rows, "leak_bound"),
                },
            );
        }
        "simulate" => {
            add(
                "bob_ber",
                Chart {
                    title: format!("Bob message BER, T = {t}"),
                    x_label: x_label.clone(),
                    y_label: "bit error rate".into(),
                    log_y: true,
                    y_range: None,
                    reference: None,
                    series: series_for(rows, "bob_ber"),
                },
            );
            add(
                "eve_ber",
                Chart {
                    title: format!("Eve message BER, T = {t}"),
                    x_label: x_label.clone(),
                    y_label: "bit error rate".into(),
                    log_y: false,
                    y_range: Some((0.4, 0.6)),
                    reference: Some(("0.5".into(), 0.5)),
                    series: series_for(rows, "eve_ber"),
                },
            );
        }
        _ => {}
    }
    add(
        "secrecy_rate",
        Chart {
            title: "Secrecy rate".into(),
            x_label,
            y_label: "R_s".into(),
            log_y: false,
            y_range: Some((0.0, capacity * 1.1)),
            reference: Some((format!("C_s = {capacity:.2}"), capacity)),
            series: series_for(rows, "secrecy_rate"),
        },
    );
    charts
}
