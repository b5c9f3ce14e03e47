//! Standalone SVG scatter plots with a connecting polyline.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

impl std::fmt::Display for Scale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("column `{0}` not found in CSV header")]
    MissingColumn(String),
    #[error("row {row}: `{value}` is not a number")]
    NotNumeric { row: usize, value: String },
    #[error("row {row}: log scale needs positive y, got {value}")]
    NonPositive { row: usize, value: f64 },
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;

/// Reads `(x, y)` pairs from the named CSV columns.
pub fn read_points(csv_path: &Path, x_column: &str, y_column: &str) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_path(csv_path)
        .with_context(|| format!("opening {}", csv_path.display()))?;
    let header = r.headers()?.clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| PlotError::MissingColumn(name.into()))
    };
    let (xi, yi) = (find(x_column)?, find(y_column)?);
    let mut pts = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| {
            let s = rec.get(i).unwrap_or("");
            s.trim().parse::<f64>().map_err(|_| PlotError::NotNumeric {
                row: row + 1,
                value: s.into(),
            })
        };
        pts.push((num(xi)?, num(yi)?));
    }
    Ok(pts)
}

pub fn render_svg(
    points: &[(f64, f64)],
    x_label: &str,
    y_label: &str,
    scale: Scale,
) -> Result<String> {
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for (row, &(x, y)) in points.iter().enumerate() {
        let y = match scale {
            Scale::Linear => y,
            Scale::Log if y > 0.0 => y.log10(),
            Scale::Log => bail!(PlotError::NonPositive {
                row: row + 1,
                value: y
            }),
        };
        pts.push((x, y));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let range = |vals: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if lo == hi {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = range(&mut pts.iter().map(|p| p.0));
    let (y0, y1) = range(&mut pts.iter().map(|p| p.1));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let tick = |v: f64, log: bool| {
        if log {
            format!("{:.4e}", 10f64.powf(v))
        } else {
            format!("{v:.4}")
        }
    };

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )?;
    writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )?;
    let (bx, by) = (MARGIN, HEIGHT - MARGIN);
    writeln!(s, r#"<g class="axes" stroke="black" stroke-width="1">"#)?;
    writeln!(
        s,
        r#"<line x1="{bx}" y1="{by}" x2="{}" y2="{by}"/>"#,
        WIDTH - MARGIN
    )?;
    writeln!(s, r#"<line x1="{bx}" y1="{by}" x2="{bx}" y2="{MARGIN}"/>"#)?;
    writeln!(s, "</g>")?;
    writeln!(
        s,
        r#"<g class="labels" font-family="sans-serif" font-size="11">"#
    )?;
    writeln!(
        s,
        r#"<text x="{bx}" y="{}">{}</text>"#,
        by + 16.0,
        tick(x0, false)
    )?;
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        WIDTH - MARGIN,
        by + 16.0,
        tick(x1, false)
    )?;
    writeln!(
        s,
        r#"<text x="{}" y="{by}" text-anchor="end">{}</text>"#,
        bx - 4.0,
        tick(y0, scale == Scale::Log)
    )?;
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        bx - 4.0,
        MARGIN + 4.0,
        tick(y1, scale == Scale::Log)
    )?;
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    )?;
    let y_title = match scale {
        Scale::Linear => escape(y_label),
        Scale::Log => format!("{} (log)", escape(y_label)),
    };
    writeln!(
        s,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">{y_title}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    )?;
    writeln!(s, "</g>")?;
    if !pts.is_empty() {
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        writeln!(
            s,
            r#"<polyline class="line" fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        )?;
        writeln!(s, r#"<g class="marks" fill="steelblue">"#)?;
        for &(x, y) in &pts {
            writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3"/>"#, px(x), py(y))?;
        }
        writeln!(s, "</g>")?;
    }
    writeln!(s, "</svg>")?;
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders `y_column` against `x_column` of a CSV file into `svg_path`.
pub fn emit_plot(
    csv_path: &Path,
    x_column: &str,
    y_column: &str,
    scale: Scale,
    svg_path: &Path,
) -> Result<()> {
    let pts = read_points(csv_path, x_column, y_column)?;
    let svg = render_svg(&pts, x_column, y_column, scale)?;
    std::fs::write(svg_path, svg).with_context(|| format!("writing {}", svg_path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn marks(svg: &str) -> usize {
        svg.matches("<circle").count()
    }

    #[test]
    fn empty_data_draws_only_axes() {
        let svg = render_svg(&[], "x", "y", Scale::Linear).unwrap();
        assert_eq!(marks(&svg), 0);
        assert!(!svg.contains("<polyline"));
        assert!(svg.contains("class=\"axes\""));
    }

    #[test]
    fn two_points_give_rising_polyline() {
        let svg = render_svg(&[(2.0, 2.0), (1.0, 1.0)], "x", "y", Scale::Linear).unwrap();
        assert_eq!(marks(&svg), 2);
        let line = svg.lines().find(|l| l.contains("<polyline")).unwrap();
        let pts: Vec<(f64, f64)> = line
            .split("points=\"")
            .nth(1)
            .unwrap()
            .trim_end_matches("\"/>")
            .split(' ')
            .map(|p| {
                let (a, b) = p.split_once(',').unwrap();
                (a.parse().unwrap(), b.parse().unwrap())
            })
            .collect();
        assert_eq!(pts.len(), 2);
        // SVG y grows downward.
        assert!(pts[0].0 < pts[1].0 && pts[0].1 > pts[1].1);
    }

    #[test]
    fn output_is_deterministic_and_checks_columns() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("d.csv");
        std::fs::write(&csv, "j,ratio\n1,2.5\n2,1.25\n3,0.5\n").unwrap();
        let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
        emit_plot(&csv, "j", "ratio", Scale::Log, &a).unwrap();
        emit_plot(&csv, "j", "ratio", Scale::Log, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        let err = emit_plot(&csv, "j", "nope", Scale::Linear, &a).unwrap_err();
        assert!(err.downcast_ref::<PlotError>().is_some());
    }
}
