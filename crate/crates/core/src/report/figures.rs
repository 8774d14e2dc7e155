//! SVG renderers for the three figures.
//!
//! Every drawn element carries a `class` and `data-*` attributes holding the
//! plotted values, so documents can be checked structurally.

use crate::error::Result;
use crate::experiments::{
    fig2_cell_id, fig3_cell_id, fig3_corners, fig3_level, CellSummary, Population, ResultTable, CALLOUT_COOPERATORS,
    FIG2_LEVELS, FIG3_STEPS, GENERAL_COOPERATOR_SHARE,
};
use crate::report::svg::{attrs, num, Svg};
use crate::stats::{marginal_improvements, PairwiseResult};

const AXIS: &str = "#333333";
const LINE_COLORS: [&str; 4] = ["#1b6ca8", "#d1495b", "#2e933c", "#7a4eab"];

/// Linear map from a data rectangle onto a pixel rectangle (y grows up).
#[derive(Clone, Copy)]
struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        self.left + (v - self.x0) / (self.x1 - self.x0) * self.width
    }

    fn y(&self, v: f64) -> f64 {
        self.top + self.height - (v - self.y0) / (self.y1 - self.y0) * self.height
    }

    fn bottom(&self) -> f64 {
        self.top + self.height
    }

    fn axes(&self, svg: &mut Svg, x_label: &str, y_label: &str, y_ticks: &[f64]) {
        svg.empty(
            "rect",
            attrs()
                .s("class", "plot-area")
                .n("x", self.left)
                .n("y", self.top)
                .n("width", self.width)
                .n("height", self.height)
                .s("fill", "none")
                .s("stroke", AXIS),
        );
        for &t in y_ticks {
            let y = self.y(t);
            svg.empty(
                "line",
                attrs()
                    .n("x1", self.left - 4.0)
                    .n("y1", y)
                    .n("x2", self.left)
                    .n("y2", y)
                    .s("stroke", AXIS),
            );
            svg.text(
                attrs()
                    .n("x", self.left - 6.0)
                    .n("y", y + 4.0)
                    .s("text-anchor", "end"),
                &format!("{t}"),
            );
        }
        svg.text(
            attrs()
                .s("class", "axis-label")
                .n("x", self.left + self.width / 2.0)
                .n("y", self.bottom() + 34.0)
                .s("text-anchor", "middle"),
            x_label,
        );
        let (cx, cy) = (self.left - 38.0, self.top + self.height / 2.0);
        svg.text(
            attrs()
                .s("class", "axis-label")
                .n("x", cx)
                .n("y", cy)
                .s("text-anchor", "middle")
                .s("transform", &format!("rotate(-90 {} {})", num(cx), num(cy))),
            y_label,
        );
    }

    fn x_tick(&self, svg: &mut Svg, v: f64, label: &str) {
        let x = self.x(v);
        svg.empty(
            "line",
            attrs()
                .n("x1", x)
                .n("y1", self.bottom())
                .n("x2", x)
                .n("y2", self.bottom() + 4.0)
                .s("stroke", AXIS),
        );
        svg.text(
            attrs()
                .n("x", x)
                .n("y", self.bottom() + 16.0)
                .s("text-anchor", "middle"),
            label,
        );
    }
}

fn summaries<'a>(table: &'a ResultTable, ids: &[u32]) -> Result<Vec<&'a CellSummary>> {
    table.require(ids)?;
    Ok(ids.iter().map(|&id| table.summary(id).expect("required")).collect())
}

fn star_points(cx: f64, cy: f64, outer: f64) -> String {
    let inner = outer * 0.45;
    (0..10)
        .map(|i| {
            let r = if i % 2 == 0 { outer } else { inner };
            let a = std::f64::consts::PI * (f64::from(i) / 5.0 - 0.5);
            format!("{},{}", num(cx + r * a.cos()), num(cy + r * a.sin()))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn ci_whisker(svg: &mut Svg, class: &str, x: f64, lo: f64, hi: f64) {
    svg.empty(
        "line",
        attrs()
            .s("class", class)
            .n("x1", x)
            .n("y1", lo)
            .n("x2", x)
            .n("y2", hi)
            .s("stroke", AXIS),
    );
    for y in [lo, hi] {
        svg.empty(
            "line",
            attrs()
                .n("x1", x - 3.0)
                .n("y1", y)
                .n("x2", x + 3.0)
                .n("y2", y)
                .s("stroke", AXIS),
        );
    }
}

/// Mean performance against cooperator share with CI whiskers, marginal
/// improvement bars, a star at the general-population share, and the
/// fixed-5%-cooperator series as an inset.
pub fn render_fig1(main: &ResultTable, callout: &ResultTable) -> Result<String> {
    let main_ids: Vec<u32> = main.summaries.iter().map(|s| s.cell_id).collect();
    let mut points = summaries(main, &main_ids)?;
    if points.len() < 2 {
        return Err(crate::error::Error::MissingCells {
            table: main.name.clone(),
            ids: (0..2).filter(|id| !main_ids.contains(id)).collect(),
        });
    }
    points.sort_by(|a, b| a.mix.cooperators.total_cmp(&b.mix.cooperators));
    let inset = summaries(callout, &(0..5).collect::<Vec<_>>())?;

    let series: Vec<(f64, f64)> = points.iter().map(|s| (s.mix.cooperators, s.mean)).collect();
    let deltas = marginal_improvements(&series)?;
    let y_min = deltas.iter().fold(0.0_f64, |m, &d| m.min(d)) * 1.1;

    let mut svg = Svg::new(960.0, 460.0);
    svg.title("Mean performance by proportion of cooperators");
    let n = points.len() as f64;
    // evenly spaced categories; the axis labels carry the actual shares
    let frame = Frame {
        left: 70.0,
        top: 40.0,
        width: 500.0,
        height: 360.0,
        x0: -0.5,
        x1: n - 0.5,
        y0: y_min,
        y1: 1.05,
    };
    let ticks = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
    frame.axes(&mut svg, "Proportion of cooperators", "Performance (share of needs met)", &ticks);
    for (i, p) in points.iter().enumerate() {
        frame.x_tick(&mut svg, i as f64, &format!("{}", p.mix.cooperators));
    }

    svg.open("g", attrs().s("class", "bars").s("fill", "#9fc5e8"));
    for (i, &d) in deltas.iter().enumerate() {
        let xc = frame.x(i as f64 + 0.5);
        let (ya, yb) = (frame.y(0.0), frame.y(d));
        svg.empty(
            "rect",
            attrs()
                .s("class", "bar")
                .s("data-from", &format!("{}", points[i].mix.cooperators))
                .s("data-to", &format!("{}", points[i + 1].mix.cooperators))
                .s("data-value", &format!("{d:.6}"))
                .n("x", xc - 12.0)
                .n("y", ya.min(yb))
                .n("width", 24.0)
                .n("height", (ya - yb).abs()),
        );
    }
    svg.close("g");

    let line: Vec<(f64, f64)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (frame.x(i as f64), frame.y(p.mean)))
        .collect();
    svg.polyline(&line, attrs().s("class", "mean-line").s("stroke", LINE_COLORS[0]).n("stroke-width", 2.0));
    for (i, p) in points.iter().enumerate() {
        let x = frame.x(i as f64);
        ci_whisker(&mut svg, "ci", x, frame.y(p.ci_lo), frame.y(p.ci_hi));
        svg.empty(
            "circle",
            attrs()
                .s("class", "point")
                .s("data-x", &format!("{}", p.mix.cooperators))
                .s("data-mean", &format!("{:.6}", p.mean))
                .n("cx", x)
                .n("cy", frame.y(p.mean))
                .n("r", 3.5)
                .s("fill", LINE_COLORS[0]),
        );
    }
    if let Some(i) = points.iter().position(|p| p.mix.cooperators == GENERAL_COOPERATOR_SHARE) {
        let (x, y) = (frame.x(i as f64), frame.y(points[i].mean));
        svg.empty(
            "polygon",
            attrs()
                .s("class", "star")
                .s("data-x", &format!("{GENERAL_COOPERATOR_SHARE}"))
                .s("points", &star_points(x, y - 16.0, 8.0))
                .s("fill", "#f1c232")
                .s("stroke", AXIS),
        );
    }

    let inset_frame = Frame {
        left: 660.0,
        top: 60.0,
        width: 200.0,
        height: 160.0,
        x0: -0.1,
        x1: 1.1,
        y0: 0.0,
        y1: 1.05,
    };
    svg.open("g", attrs().s("class", "inset"));
    inset_frame.axes(&mut svg, "Reciprocator share of non-cooperators", "Performance", &[0.0, 0.5, 1.0]);
    let shares: Vec<f64> = inset
        .iter()
        .map(|s| s.mix.reciprocators / (1.0 - CALLOUT_COOPERATORS))
        .collect();
    for &sh in &shares {
        inset_frame.x_tick(&mut svg, sh, &format!("{}", (sh * 100.0).round() / 100.0));
    }
    let inset_line: Vec<(f64, f64)> = inset
        .iter()
        .zip(&shares)
        .map(|(p, &sh)| (inset_frame.x(sh), inset_frame.y(p.mean)))
        .collect();
    svg.polyline(&inset_line, attrs().s("class", "inset-line").s("stroke", LINE_COLORS[1]).n("stroke-width", 1.5));
    for (p, &sh) in inset.iter().zip(&shares) {
        let x = inset_frame.x(sh);
        ci_whisker(&mut svg, "inset-ci", x, inset_frame.y(p.ci_lo), inset_frame.y(p.ci_hi));
        svg.empty(
            "circle",
            attrs()
                .s("class", "inset-point")
                .s("data-x", &format!("{}", (sh * 100.0).round() / 100.0))
                .s("data-mean", &format!("{:.6}", p.mean))
                .n("cx", x)
                .n("cy", inset_frame.y(p.mean))
                .n("r", 3.0)
                .s("fill", LINE_COLORS[1]),
        );
    }
    svg.text(
        attrs().n("x", inset_frame.left).n("y", inset_frame.top - 10.0),
        &format!("Cooperators fixed at {}%", CALLOUT_COOPERATORS * 100.0),
    );
    svg.close("g");

    svg.text(
        attrs().s("class", "legend").n("x", 660.0).n("y", 290.0),
        "line: mean performance, whiskers: 95% CI",
    );
    svg.text(
        attrs().s("class", "legend").n("x", 660.0).n("y", 306.0),
        "bars: marginal improvement between points",
    );
    svg.text(
        attrs().s("class", "legend").n("x", 660.0).n("y", 322.0),
        "star: general population (13% cooperators)",
    );
    svg.text(
        attrs().s("class", "legend").n("x", 660.0).n("y", 338.0),
        "non-rival goods, high need heterogeneity",
    );
    Ok(svg.finish())
}

fn fig2_mean(table: &ResultTable, pops: &[Population], ri: usize, hi: usize) -> f64 {
    let total: f64 = pops
        .iter()
        .map(|&p| table.summary(fig2_cell_id(p, ri, hi)).expect("required").mean)
        .sum();
    total / pops.len() as f64
}

struct Series {
    class: &'static str,
    key: &'static str,
    label: String,
    values: [f64; 3],
}

fn line_panel(svg: &mut Svg, frame: &Frame, panel: &str, title: &str, x_label: &str, series: &[Series]) {
    svg.open("g", attrs().s("class", "panel").s("data-panel", panel));
    svg.text(
        attrs().s("class", "panel-title").n("x", frame.left).n("y", frame.top - 12.0),
        &format!("{panel}. {title}"),
    );
    frame.axes(svg, x_label, "Performance", &[0.0, 0.25, 0.5, 0.75, 1.0]);
    for &lv in &FIG2_LEVELS {
        frame.x_tick(svg, lv, &format!("{lv}"));
    }
    for (i, s) in series.iter().enumerate() {
        let color = if s.class == "main-effect" { "#000000" } else { LINE_COLORS[i % LINE_COLORS.len()] };
        let pts: Vec<(f64, f64)> = FIG2_LEVELS
            .iter()
            .zip(s.values)
            .map(|(&x, y)| (frame.x(x), frame.y(y)))
            .collect();
        let values: Vec<String> = s.values.iter().map(|v| format!("{v:.6}")).collect();
        let dash = if s.class == "main-effect" { "6 3" } else { "none" };
        svg.polyline(
            &pts,
            attrs()
                .s("class", s.class)
                .s(s.key, &s.label)
                .s("data-values", &values.join(" "))
                .s("stroke", color)
                .s("stroke-dasharray", dash)
                .n("stroke-width", 2.0),
        );
        let ly = frame.bottom() + 56.0 + 14.0 * i as f64;
        svg.text(
            attrs().n("x", frame.left).n("y", ly).s("fill", color),
            &s.label,
        );
    }
    svg.close("g");
}

/// Three panels: rivalry main effect with heterogeneity lines, heterogeneity
/// main effect with rivalry lines, and per-population rivalry lines. The
/// all-free-rider population appears only in a footnote.
pub fn render_fig2(table: &ResultTable) -> Result<String> {
    let ids: Vec<u32> = Population::ALL
        .iter()
        .flat_map(|&p| (0..3).flat_map(move |ri| (0..3).map(move |hi| fig2_cell_id(p, ri, hi))))
        .collect();
    table.require(&ids)?;
    let plotted = Population::PLOTTED;

    let mut svg = Svg::new(960.0, 460.0);
    svg.title("Main effects and interactions of rivalry and need heterogeneity");
    let frame_at = |i: usize| Frame {
        left: 70.0 + 310.0 * i as f64,
        top: 50.0,
        width: 240.0,
        height: 250.0,
        x0: -0.1,
        x1: 1.1,
        y0: 0.0,
        y1: 1.0,
    };

    let by_rivalry = |hi: usize| -> [f64; 3] { [0, 1, 2].map(|ri| fig2_mean(table, &plotted, ri, hi)) };
    let mut a: Vec<Series> = (0..3)
        .map(|hi| Series {
            class: "h-line",
            key: "data-heterogeneity",
            label: format!("H={}", FIG2_LEVELS[hi]),
            values: by_rivalry(hi),
        })
        .collect();
    a.push(Series {
        class: "main-effect",
        key: "data-factor",
        label: "mean over H".into(),
        values: [0, 1, 2].map(|ri| (0..3).map(|hi| fig2_mean(table, &plotted, ri, hi)).sum::<f64>() / 3.0),
    });
    line_panel(&mut svg, &frame_at(0), "A", "Main effect of rivalry", "Rivalry", &a);

    let mut b: Vec<Series> = (0..3)
        .map(|ri| Series {
            class: "r-line",
            key: "data-rivalry",
            label: format!("R={}", FIG2_LEVELS[ri]),
            values: [0, 1, 2].map(|hi| fig2_mean(table, &plotted, ri, hi)),
        })
        .collect();
    b.push(Series {
        class: "main-effect",
        key: "data-factor",
        label: "mean over R".into(),
        values: [0, 1, 2].map(|hi| (0..3).map(|ri| fig2_mean(table, &plotted, ri, hi)).sum::<f64>() / 3.0),
    });
    line_panel(&mut svg, &frame_at(1), "B", "Main effect of need heterogeneity", "Need heterogeneity", &b);

    let c: Vec<Series> = plotted
        .iter()
        .map(|&p| Series {
            class: "population-line",
            key: "data-population",
            label: p.label().into(),
            values: [0, 1, 2].map(|ri| (0..3).map(|hi| fig2_mean(table, &[p], ri, hi)).sum::<f64>() / 3.0),
        })
        .collect();
    line_panel(&mut svg, &frame_at(2), "C", "Rivalry by population", "Rivalry", &c);

    let fr_max = (0..3)
        .flat_map(|ri| (0..3).map(move |hi| (ri, hi)))
        .map(|(ri, hi)| fig2_mean(table, &[Population::FreeRiders], ri, hi))
        .fold(f64::NEG_INFINITY, f64::max);
    svg.text(
        attrs()
            .s("class", "footnote")
            .s("data-max", &format!("{fr_max:.6}"))
            .n("x", 70.0)
            .n("y", 440.0),
        &format!(
            "Free-rider populations (not plotted): max mean performance {:.4} across all 9 conditions",
            fr_max
        ),
    );
    Ok(svg.finish())
}

/// Green (low) to red (high) in ten steps.
pub fn ramp_color(class: u32) -> String {
    let t = f64::from(class.min(9)) / 9.0;
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(26.0, 215.0), lerp(150.0, 48.0), lerp(65.0, 39.0))
}

/// Ten equal-width bins over `[min, max]`.
pub fn color_class(value: f64, min: f64, max: f64) -> u32 {
    if max <= min {
        return 0;
    }
    (((value - min) / (max - min) * 10.0).floor() as i64).clamp(0, 9) as u32
}

fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        "ns"
    }
}

fn fmt_p(p: f64) -> String {
    if p < 0.001 {
        "p<0.001".into()
    } else {
        format!("p={p:.3}")
    }
}

/// 11 x 11 heatmap of mean performance over rivalry (rows) and need
/// heterogeneity (columns), with the corner Tukey comparisons listed.
pub fn render_fig3(table: &ResultTable, tukey: &[PairwiseResult]) -> Result<String> {
    let ids: Vec<u32> = (0..FIG3_STEPS)
        .flat_map(|ri| (0..FIG3_STEPS).map(move |hi| fig3_cell_id(ri, hi)))
        .collect();
    let cells = summaries(table, &ids)?;
    let min = cells.iter().map(|s| s.mean).fold(f64::INFINITY, f64::min);
    let max = cells.iter().map(|s| s.mean).fold(f64::NEG_INFINITY, f64::max);

    let size = 30.0;
    let (left, top) = (170.0, 40.0);
    let grid = size * f64::from(FIG3_STEPS);
    let mut svg = Svg::new(960.0, 420.0);
    svg.title("Performance of the general population by rivalry and need heterogeneity");
    svg.open("g", attrs().s("class", "heatmap"));
    for ri in 0..FIG3_STEPS {
        for hi in 0..FIG3_STEPS {
            let s = table.summary(fig3_cell_id(ri, hi)).expect("required");
            let class = color_class(s.mean, min, max);
            svg.empty(
                "rect",
                attrs()
                    .s("class", "cell")
                    .s("data-rivalry", &format!("{}", fig3_level(ri)))
                    .s("data-heterogeneity", &format!("{}", fig3_level(hi)))
                    .s("data-mean", &format!("{:.6}", s.mean))
                    .s("data-class", &class.to_string())
                    .n("x", left + size * f64::from(hi))
                    .n("y", top + size * f64::from(FIG3_STEPS - 1 - ri))
                    .n("width", size)
                    .n("height", size)
                    .s("fill", &ramp_color(class)),
            );
        }
    }
    svg.close("g");
    for step in (0..FIG3_STEPS).step_by(2) {
        let lv = format!("{}", fig3_level(step));
        svg.text(
            attrs()
                .n("x", left + size * (f64::from(step) + 0.5))
                .n("y", top + grid + 16.0)
                .s("text-anchor", "middle"),
            &lv,
        );
        svg.text(
            attrs()
                .n("x", left - 6.0)
                .n("y", top + size * (f64::from(FIG3_STEPS - 1 - step) + 0.5) + 4.0)
                .s("text-anchor", "end"),
            &lv,
        );
    }
    svg.text(
        attrs()
            .s("class", "axis-label")
            .n("x", left + grid / 2.0)
            .n("y", top + grid + 36.0)
            .s("text-anchor", "middle"),
        "Need heterogeneity",
    );
    let (cx, cy) = (left - 44.0, top + grid / 2.0);
    svg.text(
        attrs()
            .s("class", "axis-label")
            .n("x", cx)
            .n("y", cy)
            .s("text-anchor", "middle")
            .s("transform", &format!("rotate(-90 {} {})", num(cx), num(cy))),
        "Rivalry",
    );

    let top_step = FIG3_STEPS - 1;
    for (label, id) in fig3_corners() {
        let (ri, hi) = (id / FIG3_STEPS, id % FIG3_STEPS);
        let s = table.summary(id).expect("required");
        let x = left + size * f64::from(hi) + if hi == 0 { -8.0 } else { size + 8.0 };
        let y = top + size * f64::from(top_step - ri) + if ri == 0 { size + 14.0 } else { -6.0 };
        svg.text(
            attrs()
                .s("class", "corner")
                .s("data-corner", label)
                .s("data-class", &color_class(s.mean, min, max).to_string())
                .n("x", x)
                .n("y", y)
                .s("text-anchor", if hi == 0 { "end" } else { "start" }),
            &format!("{label}: {:.3}", s.mean),
        );
    }

    let legend_x = left + grid + 130.0;
    svg.open("g", attrs().s("class", "legend"));
    svg.text(attrs().n("x", legend_x).n("y", top + 4.0), "Mean performance");
    for class in 0..10u32 {
        svg.empty(
            "rect",
            attrs()
                .s("class", "legend-swatch")
                .s("data-class", &class.to_string())
                .n("x", legend_x + 18.0 * f64::from(class))
                .n("y", top + 12.0)
                .n("width", 18.0)
                .n("height", 14.0)
                .s("fill", &ramp_color(class)),
        );
    }
    svg.text(
        attrs().s("class", "legend-min").n("x", legend_x).n("y", top + 40.0),
        &format!("low {min:.3}"),
    );
    svg.text(
        attrs()
            .s("class", "legend-max")
            .n("x", legend_x + 180.0)
            .n("y", top + 40.0)
            .s("text-anchor", "end"),
        &format!("high {max:.3}"),
    );
    svg.close("g");

    svg.open("g", attrs().s("class", "tukey"));
    svg.text(
        attrs().n("x", legend_x).n("y", top + 80.0),
        "Tukey HSD, corner pairs",
    );
    for (i, pair) in tukey.iter().enumerate() {
        svg.text(
            attrs()
                .s("class", "tukey-pair")
                .s("data-a", &pair.labels.0)
                .s("data-b", &pair.labels.1)
                .s("data-p", &format!("{:.6e}", pair.p))
                .s("data-significant", if pair.significant { "true" } else { "false" })
                .n("x", legend_x)
                .n("y", top + 98.0 + 16.0 * i as f64),
            &format!(
                "{} vs {}: diff {:.3}, {} {}",
                pair.labels.0,
                pair.labels.1,
                pair.mean_diff,
                fmt_p(pair.p),
                significance_stars(pair.p)
            ),
        );
    }
    svg.close("g");
    Ok(svg.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn color_bins() {
        assert_eq!(color_class(0.0, 0.0, 1.0), 0);
        assert_eq!(color_class(1.0, 0.0, 1.0), 9);
        assert_eq!(color_class(0.55, 0.0, 1.0), 5);
        assert_eq!(color_class(0.3, 0.3, 0.3), 0);
        assert_eq!(ramp_color(0), "#1a9641");
        assert_eq!(ramp_color(9), "#d73027");
    }

    #[test]
    fn p_labels() {
        assert_eq!(fmt_p(1e-9), "p<0.001");
        assert_eq!(fmt_p(0.0059), "p=0.006");
        assert_eq!(significance_stars(0.0059), "**");
    }
}
