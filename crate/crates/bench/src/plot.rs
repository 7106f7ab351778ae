//! Standalone SVG line charts of median trajectories.

use std::fmt::Write as _;
use std::path::Path;

use crate::aggregate::MedianTable;
use crate::error::{BenchError, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Quantity on the vertical axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YAxis {
    /// Best objective so far (negated expected cut; lower is better).
    Objective,
    /// Best approximation ratio so far (higher is better).
    Ratio,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 1e4 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Renders `table` as an SVG document.
pub fn render_svg(table: &MedianTable, axis: YAxis) -> Result<String> {
    let label = table.file_stem();
    if table.series.is_empty() {
        return Err(BenchError::EmptyPlot(format!("{label} has no series")));
    }
    if table.grid.is_empty() {
        return Err(BenchError::EmptyPlot(format!("{label} has an empty shot grid")));
    }
    if let Some(s) = table.series.iter().find(|s| s.median.len() != table.grid.len()) {
        return Err(BenchError::EmptyPlot(format!(
            "{label}: series {} does not match the grid",
            s.optimizer
        )));
    }
    let map = |v: f64| match axis {
        YAxis::Objective => v,
        YAxis::Ratio => table.ratio(v),
    };
    let values: Vec<f64> = table
        .series
        .iter()
        .flat_map(|s| s.median.iter().chain(&s.q25).chain(&s.q75))
        .map(|&v| map(v))
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(BenchError::EmptyPlot(format!("{label} contains non-finite values")));
    }
    let (mut lo, mut hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let x_max = (*table.grid.last().expect("grid nonempty")).max(1) as f64;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |shots: u64| LEFT + shots as f64 / x_max * plot_w;
    // larger values sit higher on screen, so svg y runs opposite to the data
    let sy = |v: f64| TOP + (hi - v) / (hi - lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let title = format!(
        "{} p={} B={} ({}), median over trials",
        table.graph, table.p, table.shots, table.model
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(&title)
    );
    // axes and ticks
    let _ = writeln!(
        svg,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
    );
    for i in 0..=TICKS {
        let t = i as f64 / TICKS as f64;
        let xs = (t * x_max).round() as u64;
        let x = sx(xs);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 18.0,
            xs
        );
        let v = lo + t * (hi - lo);
        let y = sy(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#444"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            fmt_tick(v)
        );
    }
    let y_label = match axis {
        YAxis::Objective => "best objective so far (-<H_P>)",
        YAxis::Ratio => "best approximation ratio so far",
    };
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">cumulative shots</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 18.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(y_label)
    );

    for (i, s) in table.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        // interquartile band
        let mut band = String::new();
        for (g, v) in table.grid.iter().zip(&s.q75) {
            let _ = write!(band, "{:.2},{:.2} ", sx(*g), sy(map(*v)));
        }
        for (g, v) in table.grid.iter().zip(&s.q25).rev() {
            let _ = write!(band, "{:.2},{:.2} ", sx(*g), sy(map(*v)));
        }
        let _ = writeln!(
            svg,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
            band.trim_end()
        );
        let mut line = String::new();
        for (g, v) in table.grid.iter().zip(&s.median) {
            let _ = write!(line, "{:.2},{:.2} ", sx(*g), sy(map(*v)));
        }
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.trim_end()
        );
        let ly = TOP + 10.0 + 22.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{} (n={})</text>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0,
            escape(&s.optimizer),
            s.trials
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes the chart to `path`. Nothing is written if the table cannot be drawn.
pub fn emit_plot(table: &MedianTable, path: &Path, axis: YAxis) -> Result<()> {
    let svg = render_svg(table, axis)?;
    std::fs::write(path, svg).map_err(|e| BenchError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::{aggregate_median, shot_grid, StepSeries};

    fn table(n_series: usize) -> MedianTable {
        let grid = shot_grid(1000, 11);
        let trial = StepSeries {
            initial: -2.0,
            steps: vec![(100, -2.5), (400, -4.0), (900, -5.5)],
        };
        MedianTable {
            graph: "cycle6".into(),
            p: 5,
            shots: 50,
            model: "mfn".into(),
            maxcut: 6.0,
            series: (0..n_series)
                .map(|i| aggregate_median(&format!("opt{i}"), std::slice::from_ref(&trial), &grid).unwrap())
                .collect(),
            grid,
        }
    }

    fn polyline_ys(svg: &str) -> Vec<Vec<f64>> {
        svg.lines()
            .filter(|l| l.starts_with("<polyline"))
            .map(|l| {
                let pts = l.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
                pts.split_whitespace()
                    .map(|p| p.split(',').nth(1).unwrap().parse().unwrap())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn one_polyline_per_series() {
        let svg = render_svg(&table(2), YAxis::Objective).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("cumulative shots"));
        assert!(svg.contains("opt1 (n=1)"));
    }

    #[test]
    fn monotone_best_so_far_is_monotone_on_screen() {
        let svg = render_svg(&table(1), YAxis::Objective).unwrap();
        let ys = &polyline_ys(&svg)[0];
        // objective decreases, so the line moves down the page (svg y grows)
        assert!(ys.windows(2).all(|w| w[1] >= w[0]));
        let svg = render_svg(&table(1), YAxis::Ratio).unwrap();
        let ys = &polyline_ys(&svg)[0];
        assert!(ys.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn empty_table_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.svg");
        assert!(matches!(
            emit_plot(&table(0), &path, YAxis::Objective),
            Err(BenchError::EmptyPlot(_))
        ));
        assert!(!path.exists());
    }
}
