//! Monte Carlo estimation of empirical size and power across the censoring
//! schedule, with pointwise 95% confidence bands.
//!
//! Every replication draws one sample per spec from a seed derived from
//! (master seed, replication index, label), so results are bit-identical
//! regardless of how many threads execute the replications.

use crate::censoring::{censor_sweep, CensoringSchedule};
use crate::error::{Error, Result};
use crate::lcdm::{pool, Hemisphere, PooledSample};
use crate::simulator::{
    derive_profile, derive_stream_seed, generate, reference_profile, FrequencyProfile,
    GeneratorParams, RemainderPlacement,
};
use crate::stats::{self, tail, Alternative, TestKind, TestResult};
use rayon::prelude::*;

/// One synthetic sample in a scenario.
#[derive(Debug, Clone)]
pub struct SampleSpec {
    pub label: String,
    pub eta: u32,
    pub r: f64,
    pub n: usize,
}

/// Which tests a scenario runs. Pairwise tests run for every ordered pair of
/// sample labels with the `less` alternative; the `greater` p-value is its
/// exact complement.
#[derive(Debug, Clone)]
pub struct TestSelection {
    pub kruskal_wallis: bool,
    pub anova_hov: bool,
    pub anova_welch: bool,
    pub wilcoxon: bool,
    pub welch_t: bool,
    pub pairwise_alternative: Alternative,
}

impl Default for TestSelection {
    fn default() -> Self {
        TestSelection {
            kruskal_wallis: true,
            anova_hov: true,
            anova_welch: true,
            wilcoxon: true,
            welch_t: true,
            pairwise_alternative: Alternative::Less,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub sample_specs: Vec<SampleSpec>,
    pub n_mc: usize,
    pub alpha: f64,
    pub schedule: CensoringSchedule,
    pub tests: TestSelection,
    pub master_seed: u64,
    pub remainder_placement: RemainderPlacement,
}

/// Aggregated curve point for one (step, test, comparison).
#[derive(Debug, Clone)]
pub struct CurveRow {
    pub step: usize,
    pub gamma: f64,
    pub test: TestKind,
    pub comparison: String,
    pub alternative: Alternative,
    pub mean_p: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    pub rejection_rate: f64,
    pub rej_lo: f64,
    pub rej_hi: f64,
    pub n_valid: usize,
}

#[derive(Debug, Clone)]
pub struct CurveSet {
    pub rows: Vec<CurveRow>,
    pub n_mc: usize,
    pub alpha: f64,
}

impl CurveSet {
    /// Rows for one test and comparison, in step order.
    pub fn curve(&self, test: TestKind, comparison: &str) -> Vec<&CurveRow> {
        self.rows
            .iter()
            .filter(|r| r.test == test && r.comparison == comparison)
            .collect()
    }

    pub fn comparisons(&self) -> Vec<(TestKind, String)> {
        let mut seen: Vec<(TestKind, String)> = Vec::new();
        for r in &self.rows {
            let key = (r.test, r.comparison.clone());
            if !seen.contains(&key) {
                seen.push(key);
            }
        }
        seen
    }
}

/// Normal-approximation binomial confidence interval, clamped to [0, 1].
pub fn rejection_band(successes: u64, trials: u64, level: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials {
        return Err(Error::InvalidCounts { successes, trials });
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence level must be in (0, 1), got {level}"
        )));
    }
    let p = successes as f64 / trials as f64;
    let z = tail::norm_sf_inv((1.0 - level) / 2.0);
    let half = z * (p * (1.0 - p) / trials as f64).sqrt();
    Ok(((p - half).clamp(0.0, 1.0), (p + half).clamp(0.0, 1.0)))
}

/// Mean with a normal-theory band (mean +/- z sd/sqrt(n)), clamped to [0, 1]
/// for p-value aggregation. A single value yields a zero-width band.
pub fn mean_band(values: &[f64], level: f64) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyInput("mean_band needs at least one value".into()));
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence level must be in (0, 1), got {level}"
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean.clamp(0.0, 1.0), mean.clamp(0.0, 1.0)));
    }
    let sd = (values.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    let z = tail::norm_sf_inv((1.0 - level) / 2.0);
    let half = z * sd / n.sqrt();
    Ok(((mean - half).clamp(0.0, 1.0), (mean + half).clamp(0.0, 1.0)))
}

enum SlotKind {
    MultiGroup(TestKind),
    Pair { test: TestKind, a: usize, b: usize },
}

struct Slot {
    kind: SlotKind,
    test: TestKind,
    comparison: String,
    alternative: Alternative,
}

fn pair_symbol(alt: Alternative) -> &'static str {
    match alt {
        Alternative::Less => "<",
        Alternative::Greater => ">",
        _ => "~",
    }
}

fn build_slots(config: &ScenarioConfig) -> Vec<Slot> {
    let labels: Vec<&str> = config.sample_specs.iter().map(|s| s.label.as_str()).collect();
    let mut slots = Vec::new();
    for (on, test) in [
        (config.tests.kruskal_wallis, TestKind::KruskalWallis),
        (config.tests.anova_hov, TestKind::AnovaFHov),
        (config.tests.anova_welch, TestKind::AnovaFWelch),
    ] {
        if on {
            slots.push(Slot {
                kind: SlotKind::MultiGroup(test),
                test,
                comparison: "all".into(),
                alternative: Alternative::NotApplicable,
            });
        }
    }
    let alt = config.tests.pairwise_alternative;
    for (on, test) in [
        (config.tests.wilcoxon, TestKind::Wilcoxon),
        (config.tests.welch_t, TestKind::WelchT),
    ] {
        if on {
            for a in 0..labels.len() {
                for b in a + 1..labels.len() {
                    slots.push(Slot {
                        kind: SlotKind::Pair { test, a, b },
                        test,
                        comparison: format!("{}{}{}", labels[a], pair_symbol(alt), labels[b]),
                        alternative: alt,
                    });
                }
            }
        }
    }
    slots
}

fn run_guarded(kind: &SlotKind, groups: &[&[f64]], alternative: Alternative) -> TestResult {
    match kind {
        SlotKind::MultiGroup(test) => stats::guarded_multi_group(*test, groups),
        SlotKind::Pair { test, .. } => {
            stats::guarded_pairwise(*test, groups[0], groups[1], alternative)
        }
    }
}

fn check_config(config: &ScenarioConfig) -> Result<()> {
    if config.sample_specs.len() < 2 {
        return Err(Error::ConfigError(
            "a scenario needs at least two sample specs".into(),
        ));
    }
    let mut labels: Vec<&str> = config.sample_specs.iter().map(|s| s.label.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() != config.sample_specs.len() {
        return Err(Error::ConfigError("sample labels must be unique".into()));
    }
    if config.n_mc == 0 {
        return Err(Error::ConfigError("n_mc must be at least 1".into()));
    }
    if !(0.0 < config.alpha && config.alpha < 1.0) {
        return Err(Error::ConfigError(format!(
            "alpha must be in (0, 1), got {}",
            config.alpha
        )));
    }
    Ok(())
}

/// Runs the full scenario: generate, censor, test, aggregate.
///
/// Replications execute in parallel on the current rayon pool; aggregation
/// reduces them in replication order, so the output is independent of the
/// degree of parallelism.
pub fn run_scenario(config: &ScenarioConfig) -> Result<CurveSet> {
    check_config(config)?;
    let slots = build_slots(config);
    let steps = config.schedule.steps().to_vec();
    let n_cells = steps.len() * slots.len();

    let reference = reference_profile();
    let profiles: Vec<FrequencyProfile> = config
        .sample_specs
        .iter()
        .map(|s| derive_profile(&reference, s.eta, config.remainder_placement))
        .collect::<Result<_>>()?;

    let per_rep: Vec<Vec<f64>> = (0..config.n_mc)
        .into_par_iter()
        .map(|rep| -> Result<Vec<f64>> {
            let mut pooled: Vec<PooledSample> = Vec::with_capacity(config.sample_specs.len());
            for (spec, profile) in config.sample_specs.iter().zip(&profiles) {
                let params = GeneratorParams {
                    eta: spec.eta,
                    r: spec.r,
                    n: spec.n,
                    seed: derive_stream_seed(config.master_seed, rep as u64, &spec.label),
                };
                let set = generate(profile, &params)?;
                pooled.push(pool(&[set], spec.label.clone(), Hemisphere::Left)?);
            }
            let counts: Vec<Vec<usize>> = pooled
                .iter()
                .map(|p| censor_sweep(p, &config.schedule).iter().map(|v| v.count).collect())
                .collect();

            let mut p_values = vec![f64::NAN; n_cells];
            let mut groups: Vec<&[f64]> = Vec::with_capacity(pooled.len());
            for (si, _) in steps.iter().enumerate() {
                for (ti, slot) in slots.iter().enumerate() {
                    groups.clear();
                    match &slot.kind {
                        SlotKind::MultiGroup(_) => {
                            for (p, c) in pooled.iter().zip(&counts) {
                                groups.push(&p.distances()[..c[si]]);
                            }
                        }
                        SlotKind::Pair { a, b, .. } => {
                            groups.push(&pooled[*a].distances()[..counts[*a][si]]);
                            groups.push(&pooled[*b].distances()[..counts[*b][si]]);
                        }
                    }
                    let result = run_guarded(&slot.kind, &groups, slot.alternative);
                    if result.valid {
                        p_values[si * slots.len() + ti] = result.p_value;
                    }
                }
            }
            Ok(p_values)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(n_cells);
    let mut cell_values: Vec<f64> = Vec::with_capacity(config.n_mc);
    for (si, step) in steps.iter().enumerate() {
        for (ti, slot) in slots.iter().enumerate() {
            cell_values.clear();
            let mut rejects: u64 = 0;
            for rep in &per_rep {
                let p = rep[si * slots.len() + ti];
                if !p.is_nan() {
                    cell_values.push(p);
                    if p < config.alpha {
                        rejects += 1;
                    }
                }
            }
            let n_valid = cell_values.len();
            let (mean_p, p_lo, p_hi, rejection_rate, rej_lo, rej_hi) = if n_valid == 0 {
                (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN)
            } else {
                let mean_p = cell_values.iter().sum::<f64>() / n_valid as f64;
                let (p_lo, p_hi) = mean_band(&cell_values, 0.95)?;
                let (rej_lo, rej_hi) = rejection_band(rejects, n_valid as u64, 0.95)?;
                let rate = rejects as f64 / n_valid as f64;
                (mean_p, p_lo, p_hi, rate, rej_lo, rej_hi)
            };
            rows.push(CurveRow {
                step: step.k,
                gamma: step.gamma,
                test: slot.test,
                comparison: slot.comparison.clone(),
                alternative: slot.alternative,
                mean_p,
                p_lo,
                p_hi,
                rejection_rate,
                rej_lo,
                rej_hi,
                n_valid,
            });
        }
    }
    Ok(CurveSet {
        rows,
        n_mc: config.n_mc,
        alpha: config.alpha,
    })
}

/// Shipped scenario presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Three identically distributed samples; calibrates empirical size.
    Null,
    /// One reference sample, one wider-offset sample (r = 1.2), one
    /// count-shifted sample (eta = 50); exercises empirical power.
    Alternative,
}

impl Preset {
    pub fn parse(name: &str) -> Option<Preset> {
        match name.trim().to_ascii_lowercase().as_str() {
            "null" | "null-eq10" => Some(Preset::Null),
            "alt" | "alternative" | "alt-eq12" => Some(Preset::Alternative),
            _ => None,
        }
    }

    pub fn sample_specs(&self, quick: bool) -> Vec<SampleSpec> {
        let n = if quick { 2_000 } else { 10_000 };
        let spec = |label: &str, eta: u32, r: f64| SampleSpec {
            label: label.to_string(),
            eta,
            r,
            n,
        };
        match self {
            Preset::Null => vec![spec("X", 0, 1.0), spec("Y", 0, 1.0), spec("Z", 0, 1.0)],
            Preset::Alternative => vec![spec("X", 0, 1.0), spec("Y", 0, 1.2), spec("Z", 50, 1.0)],
        }
    }

    pub fn n_mc(&self, quick: bool) -> usize {
        if quick {
            200
        } else {
            1_000
        }
    }

    /// The shifted sample only reproduces the published censored ordering
    /// (its censored distances exceeding the reference sample's from about
    /// 4 mm on) when the leftover stack is merged into the descending sort;
    /// appending it instead inverts that ordering.
    pub fn remainder_placement(&self) -> RemainderPlacement {
        match self {
            Preset::Null => RemainderPlacement::Append,
            Preset::Alternative => RemainderPlacement::Sorted,
        }
    }
}
