//! Minimal dependency-free SVG line charts: polyline curves, optional band
//! shading, horizontal guide lines, x ticks every 0.5 mm.

use crate::error::Result;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 42.0;
const MARGIN_B: f64 = 52.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

pub struct Series {
    pub label: String,
    /// (x, y); NaN y values are skipped.
    pub points: Vec<(f64, f64)>,
    /// Optional (x, lo, hi) confidence band.
    pub band: Option<Vec<(f64, f64, f64)>>,
}

pub struct Chart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub x_max: f64,
    pub y_max: f64,
    /// Dashed horizontal guide lines (e.g. 0.05 and 0.95).
    pub guides: &'a [f64],
    pub series: &'a [Series],
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart<'_> {
    fn sx(&self, x: f64) -> f64 {
        MARGIN_L + x / self.x_max * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn sy(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B - y / self.y_max * (HEIGHT - MARGIN_T - MARGIN_B)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
             <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
             <text x=\"{tx}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{title}</text>\n",
            tx = (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
            title = esc(self.title),
        );

        // axes
        let x0 = self.sx(0.0);
        let y0 = self.sy(0.0);
        let x1 = self.sx(self.x_max);
        let y1 = self.sy(self.y_max);
        let _ = write!(
            s,
            "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
             <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
        );

        // x ticks every 0.5 mm
        let mut tick = 0.0;
        while tick <= self.x_max + 1e-9 {
            let px = self.sx(tick);
            let _ = write!(
                s,
                "<line x1=\"{px}\" y1=\"{y0}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>\n\
                 <text x=\"{px}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{tick:.1}</text>\n",
                y0 + 5.0,
                y0 + 18.0,
            );
            tick += 0.5;
        }
        // y ticks, quarters
        for i in 0..=4 {
            let v = self.y_max * i as f64 / 4.0;
            let py = self.sy(v);
            let _ = write!(
                s,
                "<line x1=\"{}\" y1=\"{py}\" x2=\"{x0}\" y2=\"{py}\" stroke=\"black\"/>\n\
                 <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{v:.2}</text>\n",
                x0 - 5.0,
                x0 - 8.0,
                py + 4.0,
            );
        }
        // axis labels
        let _ = write!(
            s,
            "<text x=\"{cx}\" y=\"{by}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{xl}</text>\n\
             <text x=\"16\" y=\"{cy}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {cy})\">{yl}</text>\n",
            cx = (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
            by = HEIGHT - 12.0,
            cy = (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
            xl = esc(self.x_label),
            yl = esc(self.y_label),
        );

        // guides
        for &g in self.guides {
            if g <= self.y_max {
                let py = self.sy(g);
                let _ = write!(
                    s,
                    "<line x1=\"{x0}\" y1=\"{py}\" x2=\"{x1}\" y2=\"{py}\" stroke=\"#777\" stroke-dasharray=\"6 4\"/>\n"
                );
            }
        }

        // bands then curves
        for (idx, series) in self.series.iter().enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            if let Some(band) = &series.band {
                let valid: Vec<&(f64, f64, f64)> = band
                    .iter()
                    .filter(|(_, lo, hi)| lo.is_finite() && hi.is_finite())
                    .collect();
                if valid.len() > 1 {
                    let mut d = String::from("M");
                    for (x, _, hi) in valid.iter() {
                        let _ = write!(d, " {:.2},{:.2}", self.sx(*x), self.sy(*hi));
                    }
                    for (x, lo, _) in valid.iter().rev() {
                        let _ = write!(d, " {:.2},{:.2}", self.sx(*x), self.sy(*lo));
                    }
                    let _ = write!(
                        s,
                        "<path d=\"{d} Z\" fill=\"{color}\" fill-opacity=\"0.18\" stroke=\"none\"/>\n"
                    );
                }
            }
            let pts: Vec<String> = series
                .points
                .iter()
                .filter(|(_, y)| y.is_finite())
                .map(|(x, y)| format!("{:.2},{:.2}", self.sx(*x), self.sy(*y)))
                .collect();
            if pts.len() > 1 {
                let _ = write!(
                    s,
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.4\"/>\n",
                    pts.join(" ")
                );
            }
            // legend
            let ly = MARGIN_T + 18.0 * idx as f64;
            let lx = WIDTH - MARGIN_R + 12.0;
            let _ = write!(
                s,
                "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n\
                 <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
                lx + 22.0,
                lx + 28.0,
                ly + 4.0,
                esc(&series.label),
            );
        }

        s.push_str("</svg>\n");
        s
    }
}

pub fn write_chart(path: &Path, chart: &Chart<'_>) -> Result<()> {
    fs::write(path, chart.render())?;
    Ok(())
}
