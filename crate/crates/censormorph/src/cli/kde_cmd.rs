//! `kde` subcommand: density curves for one or more distance files.

use crate::cli::{csv, svg};
use crate::error::{Error, Result};
use crate::kde::{default_grid, gaussian_kde, silverman_bandwidth, DensityCurve};
use crate::lcdm::{load_distances, Hemisphere};
use std::path::{Path, PathBuf};

pub struct KdeRequest {
    pub files: Vec<PathBuf>,
    pub bandwidth: Option<f64>,
    pub grid_points: usize,
    /// Scale each curve by its sample size (counts per mm instead of a
    /// density integrating to one).
    pub scale_counts: bool,
}

pub struct KdeOutput {
    pub labels: Vec<String>,
    pub grid: Vec<f64>,
    pub curves: Vec<DensityCurve>,
}

pub fn compute(request: &KdeRequest) -> Result<KdeOutput> {
    if request.files.is_empty() {
        return Err(Error::EmptyInput("kde needs at least one input file".into()));
    }
    let mut labels = Vec::new();
    let mut samples = Vec::new();
    for (i, path) in request.files.iter().enumerate() {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| format!("sample{i}"));
        let label = if labels.contains(&stem) {
            format!("{stem}_{i}")
        } else {
            stem
        };
        let set = load_distances(path, &label, Hemisphere::Left)?;
        labels.push(label);
        samples.push(set);
    }

    let bandwidths: Vec<f64> = match request.bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => vec![h; samples.len()],
        Some(h) => return Err(Error::InvalidBandwidth(h)),
        None => samples
            .iter()
            .map(|s| silverman_bandwidth(s.distances()))
            .collect::<Result<_>>()?,
    };

    // one shared grid spanning every sample, padded by the widest bandwidth
    let h_max = bandwidths.iter().cloned().fold(0.0f64, f64::max);
    let all: Vec<f64> = samples
        .iter()
        .flat_map(|s| s.distances().iter().copied())
        .collect();
    let grid = default_grid(&all, h_max, request.grid_points);

    let mut curves = Vec::with_capacity(samples.len());
    for (set, &h) in samples.iter().zip(&bandwidths) {
        let mut curve = gaussian_kde(set.distances(), h, &grid)?;
        if request.scale_counts {
            for d in curve.density.iter_mut() {
                *d *= set.len() as f64;
            }
        }
        curves.push(curve);
    }
    Ok(KdeOutput {
        labels,
        grid,
        curves,
    })
}

pub fn write_outputs(output: &KdeOutput, out_dir: &Path, emit_svg: bool) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();

    let mut text = String::from("grid");
    for label in &output.labels {
        text.push(',');
        text.push_str(label);
    }
    text.push('\n');
    for (i, &g) in output.grid.iter().enumerate() {
        text.push_str(&csv::fmt_sig(g));
        for curve in &output.curves {
            text.push(',');
            text.push_str(&csv::fmt_sig(curve.density[i]));
        }
        text.push('\n');
    }
    let csv_path = out_dir.join("kde.csv");
    csv::write_string(&csv_path, &text)?;
    written.push(csv_path);

    if emit_svg {
        let y_max = output
            .curves
            .iter()
            .flat_map(|c| c.density.iter().copied())
            .fold(0.0f64, f64::max)
            .max(1e-12);
        let x_max = output.grid.last().copied().unwrap_or(1.0).max(0.5);
        let series: Vec<svg::Series> = output
            .labels
            .iter()
            .zip(&output.curves)
            .map(|(label, curve)| svg::Series {
                label: format!("{label} (h = {:.3})", curve.bandwidth),
                points: output.grid.iter().copied().zip(curve.density.iter().copied()).collect(),
                band: None,
            })
            .collect();
        let chart = svg::Chart {
            title: "kernel density estimates",
            x_label: "distance (mm)",
            y_label: "density",
            x_max,
            y_max: y_max * 1.05,
            guides: &[],
            series: &series,
        };
        let svg_path = out_dir.join("kde.svg");
        svg::write_chart(&svg_path, &chart)?;
        written.push(svg_path);
    }
    Ok(written)
}

pub fn run(request: &KdeRequest, out_dir: &Path, emit_svg: bool) -> Result<()> {
    let output = compute(request)?;
    let written = write_outputs(&output, out_dir, emit_svg)?;
    println!(
        "kde: {} curve(s) on a {}-point grid; wrote {} file(s) to {}",
        output.curves.len(),
        output.grid.len(),
        written.len(),
        out_dir.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    #[test]
    fn identical_inputs_give_identical_curves() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.txt");
        let p2 = dir.path().join("b.txt");
        let mut body = String::new();
        for i in 0..60 {
            body.push_str(&format!("{}\n", 0.05 * i as f64));
        }
        std::fs::write(&p1, &body).unwrap();
        std::fs::write(&p2, &body).unwrap();

        let request = KdeRequest {
            files: vec![p1, p2],
            bandwidth: None,
            grid_points: 128,
            scale_counts: false,
        };
        let out = compute(&request).unwrap();
        assert_eq!(out.curves.len(), 2);
        assert_eq!(out.curves[0].density, out.curves[1].density);
    }

    #[test]
    fn empty_file_is_reported() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.flush().unwrap();
        let request = KdeRequest {
            files: vec![f.path().to_path_buf()],
            bandwidth: None,
            grid_points: 64,
            scale_counts: false,
        };
        assert!(matches!(compute(&request), Err(Error::EmptyFile(_))));
    }

    #[test]
    fn count_scaling_multiplies_density() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        let mut body = String::new();
        for i in 0..40 {
            body.push_str(&format!("{}\n", 0.1 * i as f64));
        }
        std::fs::write(&p, &body).unwrap();
        let plain = compute(&KdeRequest {
            files: vec![p.clone()],
            bandwidth: Some(0.3),
            grid_points: 64,
            scale_counts: false,
        })
        .unwrap();
        let scaled = compute(&KdeRequest {
            files: vec![p],
            bandwidth: Some(0.3),
            grid_points: 64,
            scale_counts: true,
        })
        .unwrap();
        for (a, b) in plain.curves[0].density.iter().zip(&scaled.curves[0].density) {
            assert!((b - a * 40.0).abs() < 1e-12);
        }
    }
}
