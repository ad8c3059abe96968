//! Censoring schedule and prefix views.
//!
//! A censoring step keeps every pooled distance `d <= gamma` where
//! `gamma = k * delta`. Because pooled samples are sorted, a censored view is
//! just a prefix, and a whole sweep is a single cursor pass over the sample.

use crate::error::{Error, Result};
use crate::lcdm::PooledSample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub k: usize,
    pub gamma: f64,
}

/// The grid of censoring thresholds `gamma = k * delta` for
/// `k = 0 ..= floor(d_max / delta)`, plus the start of the reliable
/// reporting window.
#[derive(Debug, Clone)]
pub struct CensoringSchedule {
    pub delta: f64,
    pub d_max: f64,
    pub reliable_lo: f64,
    steps: Vec<Step>,
}

pub const DEFAULT_DELTA_MM: f64 = 0.01;
pub const DEFAULT_D_MAX_MM: f64 = 5.5;
pub const DEFAULT_RELIABLE_LO_MM: f64 = 1.0;

impl CensoringSchedule {
    pub fn new(delta: f64, d_max: f64, reliable_lo: f64) -> Result<CensoringSchedule> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive (got {delta})"
            )));
        }
        if !(d_max > 0.0) || !d_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "d_max must be positive (got {d_max})"
            )));
        }
        if !(0.0..=d_max).contains(&reliable_lo) {
            return Err(Error::InvalidParameter(format!(
                "reliable_lo must lie in [0, d_max] (got {reliable_lo})"
            )));
        }
        // The +1e-9 guards against d_max/delta landing just below an integer
        // (5.5 / 0.01 evaluates to 549.9999... in binary floating point).
        let k_max = (d_max / delta + 1e-9).floor() as usize;
        let steps = (0..=k_max)
            .map(|k| Step {
                k,
                // one multiplication, never accumulated addition
                gamma: k as f64 * delta,
            })
            .collect();
        Ok(CensoringSchedule {
            delta,
            d_max,
            reliable_lo,
            steps,
        })
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Whether results at this threshold fall inside the reliable window.
    pub fn is_reliable(&self, gamma: f64) -> bool {
        gamma >= self.reliable_lo
    }
}

/// A prefix view of a pooled sample: the distances `<= gamma`.
#[derive(Debug, Clone, Copy)]
pub struct CensoredView<'a> {
    /// Schedule step this view came from; `None` for ad hoc thresholds.
    pub step_k: Option<usize>,
    pub gamma: f64,
    pub count: usize,
    pub source: &'a PooledSample,
}

impl<'a> CensoredView<'a> {
    pub fn distances(&self) -> &'a [f64] {
        &self.source.distances()[..self.count]
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

/// Censors a pooled sample at one threshold (inclusive, `d <= gamma`).
pub fn censor(sample: &PooledSample, gamma: f64) -> CensoredView<'_> {
    let count = sample.distances().partition_point(|&d| d <= gamma);
    CensoredView {
        step_k: None,
        gamma,
        count,
        source: sample,
    }
}

/// Censors a pooled sample at every step of the schedule with a single
/// cursor pass: O(N + S) after the ingest sort.
pub fn censor_sweep<'a>(
    sample: &'a PooledSample,
    schedule: &CensoringSchedule,
) -> Vec<CensoredView<'a>> {
    let distances = sample.distances();
    let mut views = Vec::with_capacity(schedule.len());
    let mut cursor = 0usize;
    for step in schedule.steps() {
        while cursor < distances.len() && distances[cursor] <= step.gamma {
            cursor += 1;
        }
        views.push(CensoredView {
            step_k: Some(step.k),
            gamma: step.gamma,
            count: cursor,
            source: sample,
        });
    }
    views
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lcdm::{pool, DistanceSet, Hemisphere};
    use rand::{Rng, SeedableRng};

    fn pooled(values: Vec<f64>) -> PooledSample {
        pool(
            &[DistanceSet::new("s", Hemisphere::Left, values)],
            "g",
            Hemisphere::Left,
        )
        .unwrap()
    }

    #[test]
    fn paper_default_schedule_has_551_steps() {
        let s = CensoringSchedule::new(0.01, 5.5, 1.0).unwrap();
        assert_eq!(s.len(), 551);
        assert_eq!(s.steps().first().unwrap().k, 0);
        assert_eq!(s.steps().last().unwrap().k, 550);
        assert!((s.steps().last().unwrap().gamma - 5.5).abs() < 1e-12);
    }

    #[test]
    fn coarse_schedule() {
        let s = CensoringSchedule::new(0.5, 5.5, 1.0).unwrap();
        assert_eq!(s.len(), 12);
        let gammas: Vec<f64> = s.steps().iter().map(|st| st.gamma).collect();
        assert_eq!(gammas[0], 0.0);
        assert_eq!(gammas[1], 0.5);
        assert_eq!(gammas[11], 5.5);
    }

    #[test]
    fn zero_delta_rejected() {
        assert!(matches!(
            CensoringSchedule::new(0.0, 5.5, 1.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            CensoringSchedule::new(0.01, 0.0, 0.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            CensoringSchedule::new(0.01, 5.5, 6.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn censor_threshold_is_inclusive() {
        let p = pooled(vec![-0.1, 0.3, 0.3, 2.7]);
        assert_eq!(censor(&p, 0.3).count, 3);
        assert_eq!(censor(&p, -0.2).count, 0);
        assert_eq!(censor(&p, 5.5).count, 4);
    }

    #[test]
    fn final_step_covers_clipped_sample() {
        let set = DistanceSet::new("s", Hemisphere::Left, vec![-0.7, -0.1, 2.0, 5.5, 5.6]);
        let clipped = set.clip(-0.5, 5.5).unwrap();
        let p = pool(&[clipped], "g", Hemisphere::Left).unwrap();
        let view = censor(&p, 5.5);
        assert_eq!(view.count, p.len());
        assert_eq!(view.distances(), p.distances());
    }

    #[test]
    fn sweep_counts_match_hand_prefixes() {
        let p = pooled(vec![0.2, 0.7, 1.4]);
        let s = CensoringSchedule::new(0.5, 1.5, 0.0).unwrap();
        let counts: Vec<usize> = censor_sweep(&p, &s).iter().map(|v| v.count).collect();
        assert_eq!(counts, vec![0, 1, 2, 3]);
    }

    #[test]
    fn sweep_on_empty_sample() {
        let set = DistanceSet::new("s", Hemisphere::Left, vec![]);
        let p = pool(&[set], "g", Hemisphere::Left).unwrap();
        let s = CensoringSchedule::new(0.5, 1.5, 0.0).unwrap();
        assert!(censor_sweep(&p, &s).iter().all(|v| v.count == 0));
    }

    // Oracle: an independent per-step binary search must agree with the
    // single-pass sweep on 1000 random samples.
    #[test]
    fn sweep_matches_binary_search_oracle() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(20240917);
        for _ in 0..1000 {
            let n = rng.gen_range(0..120);
            let values: Vec<f64> = (0..n)
                .map(|_| {
                    // coarse lattice so exact ties happen regularly
                    (rng.gen_range(-60i32..=560) as f64) * 0.01
                })
                .collect();
            let p = pooled(values);
            let delta = [0.01, 0.07, 0.25, 0.5][rng.gen_range(0..4)];
            let schedule = CensoringSchedule::new(delta, 5.5, 1.0).unwrap();
            let sweep = censor_sweep(&p, &schedule);
            for (step, view) in schedule.steps().iter().zip(&sweep) {
                let oracle = p.distances().partition_point(|&d| d <= step.gamma);
                assert_eq!(view.count, oracle, "delta={delta} gamma={}", step.gamma);
            }
        }
    }

    #[test]
    fn views_are_nested_prefixes() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let values: Vec<f64> = (0..500).map(|_| rng.gen_range(-0.5..5.5)).collect();
        let p = pooled(values);
        let s = CensoringSchedule::new(0.05, 5.5, 1.0).unwrap();
        let views = censor_sweep(&p, &s);
        for w in views.windows(2) {
            assert!(w[0].count <= w[1].count);
            assert_eq!(&w[1].distances()[..w[0].count], w[0].distances());
        }
        // exactness: retained <= gamma < excluded
        for v in &views {
            if v.count > 0 {
                assert!(v.distances()[v.count - 1] <= v.gamma);
            }
            if v.count < p.len() {
                assert!(p.distances()[v.count] > v.gamma);
            }
        }
    }
}
