//! Minimal self-contained SVG line plots for run metrics.
//!
//! No external plotting dependencies: the renderer emits a fixed-size
//! 800 x 500 SVG with axes, tick labels, a legend, and one polyline per
//! series. The y axis switches to log scale when every plotted value is
//! positive, which is the common case for convergence metrics.

/// One named line on the plot.
#[derive(Debug, Clone)]
pub struct PlotSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 56.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Render a line plot. Non-finite points are dropped; if after filtering a
/// series is empty it is skipped. Returns a complete `<svg>` document.
pub fn render_line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[PlotSeries],
) -> String {
    let cleaned: Vec<PlotSeries> = series
        .iter()
        .map(|s| PlotSeries {
            label: s.label.clone(),
            points: s
                .points
                .iter()
                .copied()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .collect(),
        })
        .filter(|s| !s.points.is_empty())
        .collect();

    let log_y = !cleaned.is_empty()
        && cleaned
            .iter()
            .all(|s| s.points.iter().all(|&(_, y)| y > 0.0));

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in &cleaned {
        for &(x, y) in &s.points {
            let ty = if log_y { y.log10() } else { y };
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(ty);
            y_max = y_max.max(ty);
        }
    }
    if cleaned.is_empty() {
        x_min = 0.0;
        x_max = 1.0;
        y_min = 0.0;
        y_max = 1.0;
    }
    if x_max - x_min < 1e-12 {
        x_max = x_min + 1.0;
    }
    if y_max - y_min < 1e-12 {
        y_max = y_min + 1.0;
        y_min -= 1.0;
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let py = |ty: f64| MARGIN_TOP + (y_max - ty) / (y_max - y_min) * plot_h;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"13\">\n"
    ));
    out.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"26\" text-anchor=\"middle\" font-size=\"16\" fill=\"#222\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));

    // Gridlines and tick labels.
    for (tick, label) in y_ticks(y_min, y_max, log_y) {
        let y = py(tick);
        out.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#ddd\"/>\n",
            MARGIN_LEFT,
            WIDTH - MARGIN_RIGHT
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" fill=\"#444\">{}</text>\n",
            MARGIN_LEFT - 8.0,
            y + 4.0,
            escape(&label)
        ));
    }
    for (tick, label) in lin_ticks(x_min, x_max) {
        let x = px(tick);
        out.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#eee\"/>\n",
            MARGIN_TOP,
            HEIGHT - MARGIN_BOTTOM
        ));
        out.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\" fill=\"#444\">{}</text>\n",
            HEIGHT - MARGIN_BOTTOM + 20.0,
            escape(&label)
        ));
    }

    // Axes.
    out.push_str(&format!(
        "<line x1=\"{l:.1}\" y1=\"{t:.1}\" x2=\"{l:.1}\" y2=\"{b:.1}\" stroke=\"#222\"/>\n\
         <line x1=\"{l:.1}\" y1=\"{b:.1}\" x2=\"{r:.1}\" y2=\"{b:.1}\" stroke=\"#222\"/>\n",
        l = MARGIN_LEFT,
        r = WIDTH - MARGIN_RIGHT,
        t = MARGIN_TOP,
        b = HEIGHT - MARGIN_BOTTOM
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" fill=\"#222\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    ));
    let y_title = if log_y {
        format!("{y_label} (log scale)")
    } else {
        y_label.to_string()
    };
    out.push_str(&format!(
        "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" fill=\"#222\" \
         transform=\"rotate(-90 18 {mid:.1})\">{}</text>\n",
        (MARGIN_TOP + plot_h / 2.0),
        escape(&y_title),
        mid = MARGIN_TOP + plot_h / 2.0
    ));

    // Series polylines.
    for (i, s) in cleaned.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = String::new();
        for &(x, y) in &s.points {
            let ty = if log_y { y.log10() } else { y };
            pts.push_str(&format!("{:.2},{:.2} ", px(x), py(ty)));
        }
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
            pts.trim_end()
        ));
    }

    // Legend.
    for (i, s) in cleaned.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let lx = WIDTH - MARGIN_RIGHT - 180.0;
        let ly = MARGIN_TOP + 10.0 + 20.0 * i as f64;
        out.push_str(&format!(
            "<line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" \
             stroke=\"{color}\" stroke-width=\"2.5\"/>\n",
            lx + 26.0
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"#222\">{}</text>\n",
            lx + 34.0,
            ly + 4.0,
            escape(&s.label)
        ));
    }

    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Roughly six round-number ticks covering [min, max].
fn lin_ticks(min: f64, max: f64) -> Vec<(f64, String)> {
    let span = max - min;
    let raw_step = span / 5.0;
    let mag = 10f64.powf(raw_step.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw_step)
        .unwrap_or(mag * 10.0);
    let mut ticks = Vec::new();
    let mut t = (min / step).ceil() * step;
    while t <= max + step * 1e-9 {
        let label = if step >= 1.0 && t.abs() < 1e15 {
            format!("{t:.0}")
        } else {
            crate::csvio::format_float((t * 1e12).round() / 1e12)
        };
        ticks.push((t, label));
        t += step;
    }
    ticks
}

/// Integer powers of ten spanning the (already log10-transformed) range,
/// thinned to at most ~8 labels.
fn y_ticks(min: f64, max: f64, log_y: bool) -> Vec<(f64, String)> {
    if !log_y {
        return lin_ticks(min, max);
    }
    let lo = min.floor() as i64;
    let hi = max.ceil() as i64;
    let count = (hi - lo).max(1);
    let stride = ((count as f64) / 8.0).ceil() as i64;
    (lo..=hi)
        .filter(|e| (e - lo) % stride == 0)
        .map(|e| (e as f64, format!("1e{e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_scale_is_used_for_positive_series() {
        let s = PlotSeries {
            label: "decay".into(),
            points: (0..50).map(|i| (i as f64, 0.5f64.powi(i))).collect(),
        };
        let svg = render_line_plot("t", "iteration", "metric", &[s]);
        assert!(svg.contains("log scale"));
        assert!(svg.contains("<polyline"));
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn mixed_sign_series_fall_back_to_linear() {
        let s = PlotSeries {
            label: "wave".into(),
            points: (0..20).map(|i| (i as f64, (i as f64).sin())).collect(),
        };
        let svg = render_line_plot("t", "x", "y", &[s]);
        assert!(!svg.contains("log scale"));
    }

    #[test]
    fn non_finite_points_are_dropped_not_rendered() {
        let s = PlotSeries {
            label: "gappy".into(),
            points: vec![(0.0, f64::NAN), (1.0, 1.0), (2.0, 2.0)],
        };
        let svg = render_line_plot("t", "x", "y", &[s]);
        assert!(!svg.contains("NaN"));
        assert!(svg.contains("<polyline"));
    }

    #[test]
    fn labels_are_escaped() {
        let svg = render_line_plot("a<b>&c", "x", "y", &[]);
        assert!(svg.contains("a&lt;b&gt;&amp;c"));
    }
}
