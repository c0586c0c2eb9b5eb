//! Deterministic SVG plots rendered directly from the CSV reports: fixed
//! canvas, fixed tick layout, no randomness, so identical input yields a
//! byte-identical file. The plots are a reading convenience; no test
//! asserts numbers from them.

use std::path::Path;

use super::report::{atomic_write, read_spectrum_csv, read_sweep_csv, read_trace_csv};
use super::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// log10 of the energy against time from a trace CSV.
    Energy,
    /// Eigenvalue cloud in the complex plane from a spectrum CSV.
    Spectrum,
    /// Resolvent norm against frequency from a sweep CSV.
    Sweep,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 52.0;
const TICKS: usize = 5;

struct AxisRange {
    min: f64,
    max: f64,
}

impl AxisRange {
    fn of(values: &[f64]) -> Self {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &v in values {
            min = min.min(v);
            max = max.max(v);
        }
        if !min.is_finite() || !max.is_finite() {
            return Self { min: 0.0, max: 1.0 };
        }
        if min == max {
            return Self {
                min: min - 0.5,
                max: max + 0.5,
            };
        }
        let pad = 0.03 * (max - min);
        Self {
            min: min - pad,
            max: max + pad,
        }
    }

    fn to_x(&self, v: f64) -> f64 {
        LEFT + (v - self.min) / (self.max - self.min) * (WIDTH - LEFT - RIGHT)
    }

    fn to_y(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (v - self.min) / (self.max - self.min) * (HEIGHT - TOP - BOTTOM)
    }
}

fn coord(v: f64) -> String {
    format!("{:.2}", v)
}

fn tick_label(v: f64) -> String {
    format!("{:.4e}", v)
}

fn render(points: &[(f64, f64)], scatter: bool, x_label: &str, y_label: &str) -> String {
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let x_range = AxisRange::of(&xs);
    let y_range = AxisRange::of(&ys);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        coord(LEFT),
        coord(TOP),
        coord(WIDTH - LEFT - RIGHT),
        coord(HEIGHT - TOP - BOTTOM),
    ));

    for i in 0..TICKS {
        let frac = i as f64 / (TICKS - 1) as f64;
        let xv = x_range.min + frac * (x_range.max - x_range.min);
        let xp = x_range.to_x(xv);
        svg.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n",
            coord(xp),
            coord(HEIGHT - BOTTOM),
            coord(HEIGHT - BOTTOM + 6.0),
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            coord(xp),
            coord(HEIGHT - BOTTOM + 20.0),
            tick_label(xv),
        ));
        let yv = y_range.min + frac * (y_range.max - y_range.min);
        let yp = y_range.to_y(yv);
        svg.push_str(&format!(
            "<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"black\"/>\n",
            coord(yp),
            coord(LEFT - 6.0),
            coord(LEFT),
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            coord(LEFT - 9.0),
            coord(yp + 4.0),
            tick_label(yv),
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        coord(LEFT + 0.5 * (WIDTH - LEFT - RIGHT)),
        coord(HEIGHT - 12.0),
        x_label,
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        coord(TOP + 0.5 * (HEIGHT - TOP - BOTTOM)),
        coord(TOP + 0.5 * (HEIGHT - TOP - BOTTOM)),
        y_label,
    ));

    if !points.is_empty() {
        if scatter {
            for &(x, y) in points {
                svg.push_str(&format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"steelblue\"/>\n",
                    coord(x_range.to_x(x)),
                    coord(y_range.to_y(y)),
                ));
            }
        } else {
            let mut d = String::new();
            for (i, &(x, y)) in points.iter().enumerate() {
                let cmd = if i == 0 { 'M' } else { 'L' };
                d.push_str(&format!(
                    "{}{} {} ",
                    cmd,
                    coord(x_range.to_x(x)),
                    coord(y_range.to_y(y)),
                ));
            }
            svg.push_str(&format!(
                "<path d=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n",
                d.trim_end(),
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Renders `csv` as an SVG of the requested kind into `out`.
pub fn emit_plot(csv: &Path, kind: PlotKind, out: &Path) -> CliResult<()> {
    let (points, scatter, x_label, y_label): (Vec<(f64, f64)>, bool, &str, &str) = match kind {
        PlotKind::Energy => {
            let (times, energies, _) = read_trace_csv(csv)?;
            let pts = times
                .into_iter()
                .zip(energies)
                .filter(|(_, e)| *e > 0.0)
                .map(|(t, e)| (t, e.log10()))
                .collect();
            (pts, false, "t", "log10 E")
        }
        PlotKind::Spectrum => {
            let eigenvalues = read_spectrum_csv(csv)?;
            let pts = eigenvalues.into_iter().map(|z| (z.re, z.im)).collect();
            (pts, true, "Re", "Im")
        }
        PlotKind::Sweep => {
            let (lambdas, norms) = read_sweep_csv(csv)?;
            (
                lambdas.into_iter().zip(norms).collect(),
                false,
                "lambda",
                "resolvent norm",
            )
        }
    };
    let svg = render(&points, scatter, x_label, y_label);
    atomic_write(out, svg.as_bytes())
}
