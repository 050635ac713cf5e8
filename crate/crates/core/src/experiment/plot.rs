use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::run::{ExperimentResult, SummaryRow};
use crate::error::{Error, Result};
use crate::estimators::Method;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
/// Errors below this are drawn at the floor of the log axis.
const MIN_ERROR: f64 = 1e-16;

fn color(method: Method) -> &'static str {
    match method {
        Method::LeastSquares => "#d62728",
        Method::InstrumentalVariable => "#1f77b4",
        Method::BiasCompensation => "#2ca02c",
        Method::HoKalman => "#9467bd",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    /// Decade-aligned range around `log10` of the values.
    fn spanning(values: impl Iterator<Item = f64>) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let l = v.max(MIN_ERROR).log10();
            lo = lo.min(l);
            hi = hi.max(l);
        }
        let (mut lo, mut hi) = (lo.floor(), hi.ceil());
        if hi - lo < 1.0 {
            lo -= 0.5;
            hi += 0.5;
        }
        Axis { lo, hi }
    }

    fn frac(&self, v: f64) -> f64 {
        (v.max(MIN_ERROR).log10() - self.lo) / (self.hi - self.lo)
    }

    fn decades(&self) -> impl Iterator<Item = i32> {
        (self.lo.ceil() as i32)..=(self.hi.floor() as i32)
    }
}

/// Renders median `err_max` against `T` on log-log axes with IQR whiskers.
pub fn render_svg(res: &ExperimentResult) -> Result<String> {
    let points: Vec<&SummaryRow> = res.summary.iter().filter(|s| s.median.is_some()).collect();
    if points.is_empty() {
        return Err(Error::EmptyPlot);
    }
    let xs = Axis::spanning(points.iter().map(|s| s.horizon as f64));
    let ys = Axis::spanning(points.iter().flat_map(|s| [s.q1, s.median, s.q3]).flatten());
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |t: f64| LEFT + xs.frac(t) * plot_w;
    let py = |e: f64| TOP + (1.0 - ys.frac(e)) * plot_h;

    let mut s = String::new();
    let title = if res.config.description.is_empty() { "Estimation error" } else { &res.config.description };
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        escape(&truncate(title, 110))
    );

    let _ = writeln!(s, r#"<g class="axes" stroke="black" fill="none">"#);
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}"/>"#);
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g class="ticks">"#);
    for d in xs.decades() {
        let x = px(10f64.powi(d));
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/>"##, TOP + plot_h);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"#, TOP + plot_h + 18.0);
    }
    for d in ys.decades() {
        let y = py(10f64.powi(d));
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##, LEFT + plot_w);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">T</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">median error</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    let mut legend_row = 0;
    for &method in &res.config.estimators {
        let series: Vec<&&SummaryRow> = points.iter().filter(|p| p.estimator == method).collect();
        if series.is_empty() {
            continue;
        }
        let c = color(method);
        let _ = writeln!(s, r#"<g class="series" data-estimator="{method}">"#);
        let coords: Vec<String> = series
            .iter()
            .map(|p| format!("{:.2},{:.2}", px(p.horizon as f64), py(p.median.unwrap_or(MIN_ERROR))))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#,
            coords.join(" ")
        );
        for p in &series {
            let x = px(p.horizon as f64);
            if let (Some(q1), Some(q3)) = (p.q1, p.q3) {
                let (y1, y3) = (py(q1), py(q3));
                let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{y1:.2}" x2="{x:.2}" y2="{y3:.2}" stroke="{c}"/>"#);
                for y in [y1, y3] {
                    let _ = writeln!(
                        s,
                        r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{c}"/>"#,
                        x - 4.0,
                        x + 4.0
                    );
                }
            }
            let _ = writeln!(
                s,
                r#"<circle cx="{x:.2}" cy="{:.2}" r="3" fill="{c}"/>"#,
                py(p.median.unwrap_or(MIN_ERROR))
            );
        }
        let _ = writeln!(s, "</g>");

        let ly = TOP + 10.0 + 20.0 * legend_row as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<g class="legend"><line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{c}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{method}</text></g>"#,
            lx + 25.0,
            lx + 32.0,
            ly + 4.0
        );
        legend_row += 1;
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn truncate(s: &str, max: usize) -> String {
    if s.chars().count() <= max {
        s.to_string()
    } else {
        s.chars().take(max - 3).chain("...".chars()).collect()
    }
}

pub fn emit_svg_plot(res: &ExperimentResult, path: impl AsRef<Path>) -> Result<()> {
    let svg = render_svg(res)?;
    fs::write(path, svg)?;
    Ok(())
}
