//! `mc` subcommand: run a size or power scenario and emit curves.

use crate::censoring::CensoringSchedule;
use crate::cli::{csv, svg};
use crate::error::{Error, Result};
use crate::harness::{run_scenario, CurveSet, Preset, SampleSpec, ScenarioConfig, TestSelection};
use crate::simulator::RemainderPlacement;
use crate::stats::Alternative;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McKind {
    Size,
    Power,
}

impl McKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            McKind::Size => "size",
            McKind::Power => "power",
        }
    }

    fn default_preset(&self) -> Preset {
        match self {
            McKind::Size => Preset::Null,
            McKind::Power => Preset::Alternative,
        }
    }
}

pub struct McRequest {
    pub kind: McKind,
    pub preset: Option<String>,
    /// Explicit specs as LABEL:ETA:R:N strings; overrides the preset.
    pub samples: Vec<String>,
    pub n_mc: Option<usize>,
    pub quick: bool,
    pub alpha: f64,
    pub seed: u64,
    pub schedule: CensoringSchedule,
    pub placement: Option<RemainderPlacement>,
}

fn parse_sample_spec(text: &str) -> Result<SampleSpec> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 4 {
        return Err(Error::ConfigError(format!(
            "sample spec '{text}' must be LABEL:ETA:R:N"
        )));
    }
    let bad = |what: &str| Error::ConfigError(format!("sample spec '{text}': bad {what}"));
    Ok(SampleSpec {
        label: parts[0].trim().to_string(),
        eta: parts[1].trim().parse().map_err(|_| bad("eta"))?,
        r: parts[2].trim().parse().map_err(|_| bad("r"))?,
        n: parts[3].trim().parse().map_err(|_| bad("n"))?,
    })
}

pub fn build_config(request: &McRequest) -> Result<ScenarioConfig> {
    let (sample_specs, n_mc, placement) = if !request.samples.is_empty() {
        if request.preset.is_some() {
            return Err(Error::ConfigError(
                "choose either --preset or explicit --sample specs, not both".into(),
            ));
        }
        let specs = request
            .samples
            .iter()
            .map(|s| parse_sample_spec(s))
            .collect::<Result<Vec<_>>>()?;
        let n_mc = request.n_mc.unwrap_or(if request.quick { 200 } else { 1000 });
        (
            specs,
            n_mc,
            request.placement.unwrap_or_default(),
        )
    } else {
        let preset = match &request.preset {
            Some(name) => Preset::parse(name)
                .ok_or_else(|| Error::ConfigError(format!("unknown preset '{name}'")))?,
            None => request.kind.default_preset(),
        };
        (
            preset.sample_specs(request.quick),
            request.n_mc.unwrap_or(preset.n_mc(request.quick)),
            request.placement.unwrap_or(preset.remainder_placement()),
        )
    };

    Ok(ScenarioConfig {
        sample_specs,
        n_mc,
        alpha: request.alpha,
        schedule: request.schedule.clone(),
        tests: TestSelection::default(),
        master_seed: request.seed,
        remainder_placement: placement,
    })
}

fn file_safe(comparison: &str) -> String {
    comparison
        .replace('<', "_lt_")
        .replace('>', "_gt_")
        .replace('~', "_vs_")
}

pub fn write_outputs(
    curves: &CurveSet,
    kind: McKind,
    out_dir: &Path,
    emit_svg: bool,
    alpha: f64,
) -> Result<Vec<std::path::PathBuf>> {
    let mut written = Vec::new();
    let csv_path = out_dir.join(format!("mc_{}.csv", kind.as_str()));
    csv::write_string(&csv_path, &csv::curves_csv_string(curves))?;
    written.push(csv_path);

    if emit_svg {
        for (test, comparison) in curves.comparisons() {
            let rows = curves.curve(test, &comparison);
            let x_max = rows.last().map(|r| r.gamma).unwrap_or(1.0).max(0.5);
            let one_sided = rows
                .iter()
                .any(|r| matches!(r.alternative, Alternative::Less | Alternative::Greater));
            let guides: Vec<f64> = if one_sided {
                vec![alpha, 1.0 - alpha]
            } else {
                vec![alpha]
            };

            let p_series = [svg::Series {
                label: format!("mean p ({comparison})"),
                points: rows.iter().map(|r| (r.gamma, r.mean_p)).collect(),
                band: Some(rows.iter().map(|r| (r.gamma, r.p_lo, r.p_hi)).collect()),
            }];
            let p_chart = svg::Chart {
                title: &format!("{test} {comparison}: average p-value"),
                x_label: "censoring distance (mm)",
                y_label: "average p-value",
                x_max,
                y_max: 1.0,
                guides: &guides,
                series: &p_series,
            };
            let p_path = out_dir.join(format!(
                "mc_{}_{}_{}_pvalue.svg",
                kind.as_str(),
                test,
                file_safe(&comparison)
            ));
            svg::write_chart(&p_path, &p_chart)?;
            written.push(p_path);

            let r_series = [svg::Series {
                label: format!("rejection rate ({comparison})"),
                points: rows.iter().map(|r| (r.gamma, r.rejection_rate)).collect(),
                band: Some(rows.iter().map(|r| (r.gamma, r.rej_lo, r.rej_hi)).collect()),
            }];
            let r_chart = svg::Chart {
                title: &format!("{test} {comparison}: rejection rate"),
                x_label: "censoring distance (mm)",
                y_label: "rejection rate",
                x_max,
                y_max: 1.0,
                guides: &[alpha],
                series: &r_series,
            };
            let r_path = out_dir.join(format!(
                "mc_{}_{}_{}_rejection.svg",
                kind.as_str(),
                test,
                file_safe(&comparison)
            ));
            svg::write_chart(&r_path, &r_chart)?;
            written.push(r_path);
        }
    }
    Ok(written)
}

pub fn run(request: &McRequest, out_dir: &Path, emit_svg: bool) -> Result<()> {
    let config = build_config(request)?;
    let curves = run_scenario(&config)?;
    let written = write_outputs(&curves, request.kind, out_dir, emit_svg, request.alpha)?;
    println!(
        "{} scenario: {} samples, {} replications, {} steps; wrote {} file(s) to {}",
        request.kind.as_str(),
        config.sample_specs.len(),
        config.n_mc,
        config.schedule.len(),
        written.len(),
        out_dir.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schedule() -> CensoringSchedule {
        CensoringSchedule::new(0.5, 5.5, 1.0).unwrap()
    }

    #[test]
    fn preset_and_overrides() {
        let request = McRequest {
            kind: McKind::Size,
            preset: None,
            samples: vec![],
            n_mc: Some(7),
            quick: true,
            alpha: 0.05,
            seed: 3,
            schedule: schedule(),
            placement: None,
        };
        let config = build_config(&request).unwrap();
        assert_eq!(config.n_mc, 7);
        assert_eq!(config.sample_specs.len(), 3);
        assert!(config.sample_specs.iter().all(|s| s.n == 2000));
    }

    #[test]
    fn explicit_samples_parse() {
        let request = McRequest {
            kind: McKind::Power,
            preset: None,
            samples: vec!["A:0:1.0:500".into(), "B:50:1.2:600".into()],
            n_mc: Some(3),
            quick: false,
            alpha: 0.05,
            seed: 3,
            schedule: schedule(),
            placement: Some(RemainderPlacement::Sorted),
        };
        let config = build_config(&request).unwrap();
        assert_eq!(config.sample_specs[1].eta, 50);
        assert_eq!(config.sample_specs[1].n, 600);
        assert_eq!(config.remainder_placement, RemainderPlacement::Sorted);
    }

    #[test]
    fn unknown_preset_is_config_error() {
        let request = McRequest {
            kind: McKind::Size,
            preset: Some("mystery".into()),
            samples: vec![],
            n_mc: None,
            quick: true,
            alpha: 0.05,
            seed: 3,
            schedule: schedule(),
            placement: None,
        };
        assert!(matches!(build_config(&request), Err(Error::ConfigError(_))));
    }

    #[test]
    fn bad_sample_spec_is_config_error() {
        for text in ["A:0:1.0", "A:x:1:100", "A:0:one:100"] {
            assert!(parse_sample_spec(text).is_err(), "{text}");
        }
    }
}
