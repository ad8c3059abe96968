//! The censored-analysis driver: run the battery at every censoring step for
//! every group comparison of a study, or in pooled-only mode at the final
//! step with the distributional extras.

use crate::censoring::{censor_sweep, CensoringSchedule};
use crate::error::{Error, Result};
use crate::lcdm::{load_distances, pool, Hemisphere, PooledSample, StudyManifest};
use crate::stats::{self, holm_adjust, Alternative, TestKind, TestResult};
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    /// Skip the sweep: analyze the pooled (final-step) data only, adding
    /// Kolmogorov-Smirnov pairs and per-group Lilliefors normality tests.
    pub pooled_only: bool,
    /// Attach Holm-adjusted p-values to pooled-mode pairwise rows.
    pub holm: bool,
    /// Monte Carlo replications for the Lilliefors p-value.
    pub lilliefors_mc: usize,
    pub seed: u64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            pooled_only: false,
            holm: false,
            lilliefors_mc: 2_000,
            seed: 1,
        }
    }
}

/// One output row: a test outcome at one censoring step for one comparison.
#[derive(Debug, Clone)]
pub struct AnalysisRow {
    pub step: usize,
    pub gamma: f64,
    pub comparison: String,
    pub result: TestResult,
    pub reliable: bool,
    /// Censored counts of the groups entering this row's comparison.
    pub counts: Vec<usize>,
    pub p_holm: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct HemisphereReport {
    pub hemisphere: Hemisphere,
    pub groups: Vec<String>,
    pub rows: Vec<AnalysisRow>,
    pub raw_count: usize,
    pub clipped_count: usize,
}

#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub reports: Vec<HemisphereReport>,
    pub warnings: Vec<String>,
}

fn multi_row(
    test: TestKind,
    step: usize,
    gamma: f64,
    reliable: bool,
    slices: &[&[f64]],
    counts: &[usize],
) -> AnalysisRow {
    AnalysisRow {
        step,
        gamma,
        comparison: "all".into(),
        result: stats::guarded_multi_group(test, slices),
        reliable,
        counts: counts.to_vec(),
        p_holm: None,
    }
}

fn pair_row(
    test: TestKind,
    step: usize,
    gamma: f64,
    reliable: bool,
    labels: (&str, &str),
    x: &[f64],
    y: &[f64],
) -> AnalysisRow {
    let alternative = if test == TestKind::KsTwoSample {
        Alternative::TwoSided
    } else {
        Alternative::Less
    };
    let comparison = if test == TestKind::KsTwoSample {
        format!("{}~{}", labels.0, labels.1)
    } else {
        format!("{}<{}", labels.0, labels.1)
    };
    AnalysisRow {
        step,
        gamma,
        comparison,
        result: stats::guarded_pairwise(test, x, y, alternative),
        reliable,
        counts: vec![x.len(), y.len()],
        p_holm: None,
    }
}

fn rows_at_step(
    groups: &[PooledSample],
    counts: &[usize],
    step: usize,
    gamma: f64,
    reliable: bool,
) -> Vec<AnalysisRow> {
    let slices: Vec<&[f64]> = groups
        .iter()
        .zip(counts)
        .map(|(g, &c)| &g.distances()[..c])
        .collect();
    let mut rows = Vec::with_capacity(3 + slices.len() * (slices.len() - 1));
    for test in [TestKind::KruskalWallis, TestKind::AnovaFHov, TestKind::AnovaFWelch] {
        rows.push(multi_row(test, step, gamma, reliable, &slices, counts));
    }
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            for test in [TestKind::Wilcoxon, TestKind::WelchT] {
                rows.push(pair_row(
                    test,
                    step,
                    gamma,
                    reliable,
                    (&groups[i].group, &groups[j].group),
                    slices[i],
                    slices[j],
                ));
            }
        }
    }
    rows
}

/// Runs the full battery at every schedule step. Steps execute in parallel
/// on the current rayon pool; row order is deterministic.
pub fn sweep_rows(groups: &[PooledSample], schedule: &CensoringSchedule) -> Vec<AnalysisRow> {
    let counts_per_group: Vec<Vec<usize>> = groups
        .iter()
        .map(|g| censor_sweep(g, schedule).iter().map(|v| v.count).collect())
        .collect();
    let steps = schedule.steps();
    let per_step: Vec<Vec<AnalysisRow>> = (0..steps.len())
        .into_par_iter()
        .map(|si| {
            let counts: Vec<usize> = counts_per_group.iter().map(|c| c[si]).collect();
            rows_at_step(
                groups,
                &counts,
                steps[si].k,
                steps[si].gamma,
                schedule.is_reliable(steps[si].gamma),
            )
        })
        .collect();
    per_step.into_iter().flatten().collect()
}

/// Pooled-only analysis: the final step's battery plus Kolmogorov-Smirnov
/// pairs and a Lilliefors normality test per group, Holm-adjusted on request.
pub fn pooled_rows(
    groups: &[PooledSample],
    schedule: &CensoringSchedule,
    options: &AnalyzeOptions,
) -> Result<Vec<AnalysisRow>> {
    let last = *schedule.steps().last().expect("schedule is never empty");
    let counts: Vec<usize> = groups
        .iter()
        .map(|g| g.distances().partition_point(|&d| d <= last.gamma))
        .collect();
    let reliable = schedule.is_reliable(last.gamma);
    let mut rows = rows_at_step(groups, &counts, last.k, last.gamma, reliable);

    let slices: Vec<&[f64]> = groups
        .iter()
        .zip(&counts)
        .map(|(g, &c)| &g.distances()[..c])
        .collect();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            rows.push(pair_row(
                TestKind::KsTwoSample,
                last.k,
                last.gamma,
                reliable,
                (&groups[i].group, &groups[j].group),
                slices[i],
                slices[j],
            ));
        }
    }
    for (g, slice) in groups.iter().zip(&slices) {
        let result = match stats::lilliefors(slice, options.lilliefors_mc, options.seed) {
            Ok(r) => r,
            Err(Error::InsufficientGroupSize(m)) => {
                TestResult::invalid(TestKind::Lilliefors, Alternative::NotApplicable, &m)
            }
            Err(Error::ZeroVariance) => {
                TestResult::invalid(TestKind::Lilliefors, Alternative::NotApplicable, "zero-variance")
            }
            Err(e) => return Err(e),
        };
        rows.push(AnalysisRow {
            step: last.k,
            gamma: last.gamma,
            comparison: g.group.clone(),
            result,
            reliable,
            counts: vec![slice.len()],
            p_holm: None,
        });
    }

    if options.holm {
        for family in [TestKind::Wilcoxon, TestKind::WelchT, TestKind::KsTwoSample] {
            let idx: Vec<usize> = rows
                .iter()
                .enumerate()
                .filter(|(_, r)| r.result.test == family && r.result.valid)
                .map(|(i, _)| i)
                .collect();
            let raw: Vec<f64> = idx.iter().map(|&i| rows[i].result.p_value).collect();
            let adjusted = holm_adjust(&raw)?;
            for (&i, adj) in idx.iter().zip(adjusted) {
                rows[i].p_holm = Some(adj);
            }
        }
    }
    Ok(rows)
}

/// Loads, clips and pools every group of every hemisphere in the manifest,
/// then runs either the sweep or the pooled-only battery.
pub fn analyze(
    manifest: &StudyManifest,
    schedule: &CensoringSchedule,
    options: &AnalyzeOptions,
) -> Result<AnalysisReport> {
    let mut warnings = Vec::new();
    if let Some(voxel) = manifest.voxel_size_mm {
        if schedule.delta > voxel {
            warnings.push(format!(
                "bin size delta = {} mm exceeds the voxel size {} mm; local differences may be oversmoothed",
                schedule.delta, voxel
            ));
        }
    }

    let mut reports = Vec::new();
    for hemisphere in manifest.hemispheres() {
        let entries: Vec<_> = manifest
            .entries
            .iter()
            .filter(|e| e.hemisphere == hemisphere)
            .collect();
        let mut labels: Vec<&str> = Vec::new();
        for e in &entries {
            if !labels.contains(&e.group.as_str()) {
                labels.push(&e.group);
            }
        }
        if labels.len() < 2 {
            return Err(Error::SingleGroup(labels.first().unwrap_or(&"").to_string()));
        }

        let mut raw_count = 0usize;
        let mut clipped_count = 0usize;
        let mut groups = Vec::with_capacity(labels.len());
        for &label in &labels {
            let mut sets = Vec::new();
            for e in entries.iter().filter(|e| e.group == label) {
                let set = load_distances(&e.path, &e.subject_id, hemisphere)?;
                let set = set.clip(manifest.clip_lo_mm, manifest.clip_hi_mm)?;
                raw_count += set.raw_count;
                clipped_count += set.clipped_count;
                sets.push(set);
            }
            groups.push(pool(&sets, label, hemisphere)?);
        }

        let rows = if options.pooled_only {
            pooled_rows(&groups, schedule, options)?
        } else {
            sweep_rows(&groups, schedule)
        };
        reports.push(HemisphereReport {
            hemisphere,
            groups: labels.into_iter().map(String::from).collect(),
            rows,
            raw_count,
            clipped_count,
        });
    }
    Ok(AnalysisReport { reports, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lcdm::DistanceSet;

    fn pooled(label: &str, values: Vec<f64>) -> PooledSample {
        pool(
            &[DistanceSet::new("s", Hemisphere::Left, values)],
            label,
            Hemisphere::Left,
        )
        .unwrap()
    }

    #[test]
    fn sweep_produces_one_row_per_step_test_and_comparison() {
        let groups = [
            pooled("A", vec![0.1, 0.4, 1.0, 2.0]),
            pooled("B", vec![0.2, 0.8, 1.5, 3.0]),
            pooled("C", vec![0.3, 0.9, 2.5, 4.0]),
        ];
        let schedule = CensoringSchedule::new(0.5, 5.5, 1.0).unwrap();
        let rows = sweep_rows(&groups, &schedule);
        // 3 multi-group + 3 pairs x 2 tests = 9 rows per step
        assert_eq!(rows.len(), schedule.len() * 9);
        // no duplicate (step, test, comparison)
        let mut keys: Vec<(usize, TestKind, String)> = rows
            .iter()
            .map(|r| (r.step, r.result.test, r.comparison.clone()))
            .collect();
        let before = keys.len();
        keys.sort_by(|a, b| (a.0, a.1.as_str(), &a.2).cmp(&(b.0, b.1.as_str(), &b.2)));
        keys.dedup();
        assert_eq!(keys.len(), before);
        // reliability flag follows the window
        for r in &rows {
            assert_eq!(r.reliable, r.gamma >= 1.0);
        }
        // early empty steps are invalid, not absent
        let early: Vec<_> = rows.iter().filter(|r| r.step == 0).collect();
        assert!(early.iter().all(|r| !r.result.valid));
    }

    #[test]
    fn pooled_mode_adds_ks_and_lilliefors() {
        let groups = [
            pooled("A", (0..40).map(|i| i as f64 * 0.1).collect()),
            pooled("B", (0..40).map(|i| 0.05 + i as f64 * 0.1).collect()),
        ];
        let schedule = CensoringSchedule::new(0.5, 5.5, 1.0).unwrap();
        let options = AnalyzeOptions {
            pooled_only: true,
            holm: true,
            lilliefors_mc: 200,
            seed: 3,
        };
        let rows = pooled_rows(&groups, &schedule, &options).unwrap();
        assert!(rows.iter().any(|r| r.result.test == TestKind::KsTwoSample));
        assert_eq!(
            rows.iter().filter(|r| r.result.test == TestKind::Lilliefors).count(),
            2
        );
        // holm attached to valid pairwise rows only
        for r in &rows {
            let pairwise = matches!(
                r.result.test,
                TestKind::Wilcoxon | TestKind::WelchT | TestKind::KsTwoSample
            );
            assert_eq!(r.p_holm.is_some(), pairwise && r.result.valid);
            if let Some(adj) = r.p_holm {
                assert!(adj >= r.result.p_value - 1e-15);
            }
        }
    }
}
