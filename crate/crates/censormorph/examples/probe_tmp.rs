// Temporary development probe: null-calibration bounds at quick scale.

use censormorph::censoring::CensoringSchedule;
use censormorph::harness::{run_scenario, Preset, ScenarioConfig, TestSelection};
use censormorph::stats::TestKind;

fn main() {
    for seed in [1u64, 2, 3] {
        let preset = Preset::Null;
        let config = ScenarioConfig {
            sample_specs: preset.sample_specs(true),
            n_mc: 200,
            alpha: 0.05,
            schedule: CensoringSchedule::new(0.01, 5.5, 1.0).unwrap(),
            tests: TestSelection {
                anova_hov: false,
                anova_welch: false,
                welch_t: false,
                ..Default::default()
            },
            master_seed: seed,
            remainder_placement: preset.remainder_placement(),
        };
        let start = std::time::Instant::now();
        let curves = run_scenario(&config).unwrap();
        println!("== null quick run, seed {seed} ({:.1?})", start.elapsed());
        for comparison in ["all", "X<Y", "X<Z", "Y<Z"] {
            let test = if comparison == "all" {
                TestKind::KruskalWallis
            } else {
                TestKind::Wilcoxon
            };
            let rows = curves.curve(test, comparison);
            let mut worst_rej: (f64, usize) = (0.05, 0);
            let mut worst_rej_lo: (f64, usize) = (0.05, 0);
            let mut worst_mean_lo: (f64, usize) = (0.5, 0);
            let mut worst_mean_hi: (f64, usize) = (0.5, 0);
            let mut violations = 0;
            for row in rows.iter().filter(|r| r.step >= 25) {
                if row.rejection_rate > worst_rej.0 {
                    worst_rej = (row.rejection_rate, row.step);
                }
                if row.rejection_rate < worst_rej_lo.0 {
                    worst_rej_lo = (row.rejection_rate, row.step);
                }
                if row.mean_p < worst_mean_lo.0 {
                    worst_mean_lo = (row.mean_p, row.step);
                }
                if row.mean_p > worst_mean_hi.0 {
                    worst_mean_hi = (row.mean_p, row.step);
                }
                if !(0.01..=0.10).contains(&row.rejection_rate)
                    || !(0.42..=0.58).contains(&row.mean_p)
                {
                    violations += 1;
                }
            }
            println!(
                "  {test} {comparison}: rej in [{:.3}@{}, {:.3}@{}], mean_p in [{:.3}@{}, {:.3}@{}], violations {violations}",
                worst_rej_lo.0, worst_rej_lo.1, worst_rej.0, worst_rej.1,
                worst_mean_lo.0, worst_mean_lo.1, worst_mean_hi.0, worst_mean_hi.1
            );
        }
    }
}
