//! Synthetic LCDM-like distance generation.
//!
//! Distances are drawn as (J + U) / 2 where J is a categorical stack index
//! and U an independent uniform offset on [0, r). The reference stack counts
//! come from one real hemisphere's distance histogram on half-millimeter
//! layers; derived profiles shift the counts by |count - eta| and carry the
//! leftover mass in an extra thirteenth stack.

use crate::error::{Error, Result};
use crate::lcdm::{DistanceSet, Hemisphere};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Reference stack counts (voxels per half-millimeter layer).
///
/// The fifth entry is 1469, which is what both the published layer
/// proportions (0.126) and the published total (11659) require; sources
/// sometimes quote 1492 for it, inconsistently with both.
pub const REFERENCE_STACKS: [u64; 12] = [
    2059, 1898, 1764, 1670, 1469, 1268, 814, 417, 142, 81, 61, 16,
];

pub const REFERENCE_TOTAL: u64 = 11659;

/// Largest admissible shift: the maximum reference stack count.
pub const MAX_ETA: u32 = 2059;

/// Stack counts with their normalized probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyProfile {
    stacks: Vec<u64>,
    total: u64,
    probabilities: Vec<f64>,
}

impl FrequencyProfile {
    pub fn from_stacks(stacks: Vec<u64>) -> Result<FrequencyProfile> {
        let total: u64 = stacks.iter().sum();
        if stacks.is_empty() || total == 0 {
            return Err(Error::InvalidParams(
                "a frequency profile needs at least one non-empty stack".into(),
            ));
        }
        let probabilities = stacks.iter().map(|&s| s as f64 / total as f64).collect();
        Ok(FrequencyProfile {
            stacks,
            total,
            probabilities,
        })
    }

    pub fn stacks(&self) -> &[u64] {
        &self.stacks
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Closed-form mean of (J + U)/2 with U uniform on [0, r).
    pub fn expected_mean(&self, r: f64) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| p * (i as f64 + r / 2.0) / 2.0)
            .sum()
    }

    /// Closed-form variance of (J + U)/2 with U uniform on [0, r).
    pub fn expected_variance(&self, r: f64) -> f64 {
        let mean_j: f64 = self
            .probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| p * i as f64)
            .sum();
        let var_j: f64 = self
            .probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| p * (i as f64 - mean_j) * (i as f64 - mean_j))
            .sum();
        (var_j + r * r / 12.0) / 4.0
    }
}

/// The reference profile: 12 stacks, total 11659.
pub fn reference_profile() -> FrequencyProfile {
    FrequencyProfile::from_stacks(REFERENCE_STACKS.to_vec()).expect("reference stacks are valid")
}

/// Where the leftover-mass stack of a derived profile goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RemainderPlacement {
    /// Appended after the descending-sorted entries (index 12).
    #[default]
    Append,
    /// Merged into the descending sort.
    Sorted,
}

impl RemainderPlacement {
    pub fn as_str(&self) -> &'static str {
        match self {
            RemainderPlacement::Append => "append",
            RemainderPlacement::Sorted => "sorted",
        }
    }
}

impl std::str::FromStr for RemainderPlacement {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "append" => Ok(RemainderPlacement::Append),
            "sorted" => Ok(RemainderPlacement::Sorted),
            other => Err(format!("unknown remainder placement '{other}'")),
        }
    }
}

/// Derives a 13-stack profile: |v_i - eta| sorted descending plus a
/// remainder stack that restores the original total.
pub fn derive_profile(
    reference: &FrequencyProfile,
    eta: u32,
    placement: RemainderPlacement,
) -> Result<FrequencyProfile> {
    let max_stack = reference.stacks().iter().copied().max().unwrap_or(0);
    if u64::from(eta) >= max_stack {
        return Err(Error::EtaOutOfRange {
            eta,
            reason: format!("must be below the maximum stack count {max_stack}"),
        });
    }
    let mut shifted: Vec<u64> = reference
        .stacks()
        .iter()
        .map(|&v| v.abs_diff(u64::from(eta)))
        .collect();
    shifted.sort_unstable_by(|a, b| b.cmp(a));
    let shifted_sum: u64 = shifted.iter().sum();
    if shifted_sum > reference.total() {
        // Large eta inflates the shifted counts past the original total, so
        // no non-negative remainder exists.
        return Err(Error::EtaOutOfRange {
            eta,
            reason: format!(
                "shifted counts sum to {shifted_sum}, above the profile total {}",
                reference.total()
            ),
        });
    }
    let remainder = reference.total() - shifted_sum;
    shifted.push(remainder);
    if placement == RemainderPlacement::Sorted {
        shifted.sort_unstable_by(|a, b| b.cmp(a));
    }
    FrequencyProfile::from_stacks(shifted)
}

/// Parameters of one generated sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParams {
    pub eta: u32,
    pub r: f64,
    pub n: usize,
    pub seed: u64,
}

impl GeneratorParams {
    fn validate(&self) -> Result<()> {
        if self.eta >= MAX_ETA {
            return Err(Error::EtaOutOfRange {
                eta: self.eta,
                reason: format!("must be below {MAX_ETA}"),
            });
        }
        if !(self.r > 0.0 && self.r < 2.0) {
            return Err(Error::InvalidParams(format!(
                "r must lie in (0, 2) (got {})",
                self.r
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        Ok(())
    }
}

/// Draws n distances (J + U)/2, J from the profile, U uniform on [0, r),
/// deterministically from the seed. Output is sorted.
pub fn generate(profile: &FrequencyProfile, params: &GeneratorParams) -> Result<DistanceSet> {
    params.validate()?;
    let mut cumulative = Vec::with_capacity(profile.probabilities().len());
    let mut acc = 0.0;
    for &p in profile.probabilities() {
        acc += p;
        cumulative.push(acc);
    }
    let top = cumulative.len() - 1;

    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
    let mut values = Vec::with_capacity(params.n);
    for _ in 0..params.n {
        let u: f64 = rng.gen();
        let stack = cumulative.partition_point(|&c| c <= u).min(top);
        let offset: f64 = rng.gen::<f64>() * params.r;
        values.push((stack as f64 + offset) / 2.0);
    }
    Ok(DistanceSet::new("mc", Hemisphere::Left, values))
}

/// Exact CDF of the generator's output law:
/// F(x) = sum_i p_i clamp((2x - i)/r, 0, 1).
pub fn mixture_cdf(profile: &FrequencyProfile, r: f64, x: f64) -> f64 {
    assert!(r > 0.0, "mixture_cdf needs r > 0");
    profile
        .probabilities()
        .iter()
        .enumerate()
        .map(|(i, p)| p * ((2.0 * x - i as f64) / r).clamp(0.0, 1.0))
        .sum()
}

fn splitmix_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-stream seed: a splitmix64 hash of the master seed, the
/// replication index and the sample label, so replications can run in any
/// order (or in parallel) with identical results.
pub fn derive_stream_seed(master_seed: u64, replication: u64, label: &str) -> u64 {
    const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut h = splitmix_mix(master_seed ^ 0xD1B5_4A32_D192_ED03);
    h = splitmix_mix(h.wrapping_add(GOLDEN.wrapping_mul(replication.wrapping_add(1))));
    for &b in label.as_bytes() {
        h = splitmix_mix(h ^ u64::from(b));
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;

    #[test]
    fn reference_profile_matches_published_numbers() {
        let p = reference_profile();
        assert_eq!(p.stacks().len(), 12);
        assert_eq!(p.stacks()[0], 2059);
        assert_eq!(p.total(), 11659);
        assert!((p.probabilities()[0] - 2059.0 / 11659.0).abs() < 1e-15);
        assert!((p.probabilities()[0] - 0.1766).abs() < 5e-5);
        let sum: f64 = p.probabilities().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);

        // published layer proportions, 3 decimals
        let published = [
            0.177, 0.163, 0.151, 0.143, 0.126, 0.109, 0.070, 0.036, 0.012, 0.007, 0.005, 0.001,
        ];
        for (p_i, v_i) in p.probabilities().iter().zip(published) {
            assert!((p_i - v_i).abs() < 5.5e-4, "{p_i} vs {v_i}");
        }
    }

    #[test]
    fn derive_with_zero_eta_appends_empty_stack() {
        let reference = reference_profile();
        for placement in [RemainderPlacement::Append, RemainderPlacement::Sorted] {
            let d = derive_profile(&reference, 0, placement).unwrap();
            assert_eq!(d.stacks().len(), 13);
            assert_eq!(&d.stacks()[..12], reference.stacks());
            assert_eq!(d.stacks()[12], 0);
            assert_eq!(d.total(), reference.total());
        }
    }

    #[test]
    fn derive_with_eta_50_hand_arithmetic() {
        let reference = reference_profile();
        // |v_i - 50| sorted descending, remainder restores the total
        let expected_sorted_part = [
            2009u64, 1848, 1714, 1620, 1419, 1218, 764, 367, 92, 34, 31, 11,
        ];
        let shifted_sum: u64 = expected_sorted_part.iter().sum();
        assert_eq!(shifted_sum, 11127);
        let remainder = 11659 - shifted_sum;
        assert_eq!(remainder, 532);

        let appended = derive_profile(&reference, 50, RemainderPlacement::Append).unwrap();
        assert_eq!(&appended.stacks()[..12], &expected_sorted_part);
        assert_eq!(appended.stacks()[12], remainder);
        assert_eq!(appended.total(), 11659);

        let merged = derive_profile(&reference, 50, RemainderPlacement::Sorted).unwrap();
        assert_eq!(
            merged.stacks(),
            &[2009, 1848, 1714, 1620, 1419, 1218, 764, 532, 367, 92, 34, 31, 11]
        );
        assert_eq!(merged.total(), 11659);
    }

    #[test]
    fn derive_rejects_out_of_range_eta() {
        let reference = reference_profile();
        assert!(matches!(
            derive_profile(&reference, 2059, RemainderPlacement::Append),
            Err(Error::EtaOutOfRange { .. })
        ));
        // formally below the max stack, but the shifted counts overshoot the
        // total so no non-negative remainder exists
        assert!(matches!(
            derive_profile(&reference, 2058, RemainderPlacement::Append),
            Err(Error::EtaOutOfRange { .. })
        ));
    }

    #[test]
    fn generated_sample_respects_support_and_frequencies() {
        let profile = reference_profile();
        let params = GeneratorParams {
            eta: 0,
            r: 1.0,
            n: 10_000,
            seed: 99,
        };
        let sample = generate(&profile, &params).unwrap();
        assert_eq!(sample.len(), 10_000);
        assert!(sample.distances().iter().all(|&d| (0.0..6.0).contains(&d)));

        // empirical stack frequencies within 3 binomial standard deviations
        let mut counts = vec![0usize; 12];
        for &d in sample.distances() {
            counts[(d * 2.0).floor() as usize] += 1;
        }
        for (i, (&c, &p)) in counts.iter().zip(profile.probabilities()).enumerate() {
            let n = params.n as f64;
            let sd = (n * p * (1.0 - p)).sqrt();
            assert!(
                ((c as f64) - n * p).abs() <= 3.0 * sd,
                "stack {i}: count {c}, expected {}",
                n * p
            );
        }

        // sample mean within 3 standard errors of the closed form
        let mean: f64 = sample.distances().iter().sum::<f64>() / params.n as f64;
        let se = (profile.expected_variance(1.0) / params.n as f64).sqrt();
        assert!((mean - profile.expected_mean(1.0)).abs() < 3.0 * se);
    }

    #[test]
    fn generation_is_deterministic() {
        let profile = reference_profile();
        let params = GeneratorParams {
            eta: 0,
            r: 1.3,
            n: 500,
            seed: 31337,
        };
        let a = generate(&profile, &params).unwrap();
        let b = generate(&profile, &params).unwrap();
        assert_eq!(a.distances(), b.distances());
        let c = generate(
            &profile,
            &GeneratorParams {
                seed: 31338,
                ..params
            },
        )
        .unwrap();
        assert_ne!(a.distances(), c.distances());
    }

    #[test]
    fn generator_rejects_bad_params() {
        let profile = reference_profile();
        for params in [
            GeneratorParams { eta: 2059, r: 1.0, n: 10, seed: 0 },
            GeneratorParams { eta: 0, r: 0.0, n: 10, seed: 0 },
            GeneratorParams { eta: 0, r: 2.0, n: 10, seed: 0 },
            GeneratorParams { eta: 0, r: 1.0, n: 0, seed: 0 },
        ] {
            assert!(generate(&profile, &params).is_err(), "{params:?}");
        }
    }

    #[test]
    fn mixture_cdf_support_bounds_and_stack_boundary() {
        let profile = reference_profile();
        assert_eq!(mixture_cdf(&profile, 1.0, -0.1), 0.0);
        assert!((mixture_cdf(&profile, 1.0, 6.0) - 1.0).abs() < 1e-12);
        assert!((mixture_cdf(&profile, 1.0, 100.0) - 1.0).abs() < 1e-12);
        let p0 = profile.probabilities()[0];
        assert!((mixture_cdf(&profile, 1.0, 0.5) - p0).abs() < 1e-15);
    }

    #[test]
    fn generated_law_matches_mixture_cdf() {
        let profile = reference_profile();
        let params = GeneratorParams {
            eta: 0,
            r: 1.0,
            n: 20_000,
            seed: 4242,
        };
        let sample = generate(&profile, &params).unwrap();
        let d = stats::ks_statistic_against(sample.distances(), |x| {
            mixture_cdf(&profile, 1.0, x)
        });
        let threshold = 1.36 / (params.n as f64).sqrt() * 1.5;
        assert!(d < threshold, "KS distance {d} vs {threshold}");
    }

    #[test]
    fn zero_eta_profile_is_statistically_identical_to_reference() {
        let reference = reference_profile();
        let derived = derive_profile(&reference, 0, RemainderPlacement::Append).unwrap();
        let mut rejections = 0;
        let mut p_values = Vec::new();
        for seed in 0..60u64 {
            let a = generate(
                &reference,
                &GeneratorParams { eta: 0, r: 1.0, n: 4000, seed: derive_stream_seed(11, seed, "ref") },
            )
            .unwrap();
            let b = generate(
                &derived,
                &GeneratorParams { eta: 0, r: 1.0, n: 4000, seed: derive_stream_seed(11, seed, "drv") },
            )
            .unwrap();
            let r = stats::ks_two_sample(a.distances(), b.distances()).unwrap();
            if r.p_value < 0.05 {
                rejections += 1;
            }
            p_values.push(r.p_value);
        }
        assert!(rejections <= 9, "{rejections} rejections out of 60");
        p_values.sort_unstable_by(f64::total_cmp);
        let dist_to_uniform = stats::ks_statistic_against(&p_values, |x| x.clamp(0.0, 1.0));
        assert!(dist_to_uniform < 0.25, "p-values far from uniform: {dist_to_uniform}");
    }

    #[test]
    fn wider_uniform_accumulates_past_half_integers() {
        let profile = reference_profile();
        let n = 100_000;
        let narrow = generate(
            &profile,
            &GeneratorParams { eta: 0, r: 1.0, n, seed: 2024 },
        )
        .unwrap();
        let wide = generate(
            &profile,
            &GeneratorParams { eta: 0, r: 1.2, n, seed: 2025 },
        )
        .unwrap();
        let count_in = |xs: &[f64], lo: f64, hi: f64| {
            xs.partition_point(|&d| d < hi) - xs.partition_point(|&d| d < lo)
        };
        for k in 1..=11 {
            let m = k as f64 * 0.5;
            let c_narrow = count_in(narrow.distances(), m, m + 0.1) as f64;
            let c_wide = count_in(wide.distances(), m, m + 0.1) as f64;
            let sigma = (c_narrow + c_wide).sqrt();
            assert!(
                c_wide > c_narrow + 3.0 * sigma,
                "band [{m}, {}]: wide {c_wide} vs narrow {c_narrow}",
                m + 0.1
            );
        }
    }

    #[test]
    fn stream_seeds_differ_by_role() {
        let a = derive_stream_seed(7, 0, "X");
        let b = derive_stream_seed(7, 0, "Y");
        let c = derive_stream_seed(7, 1, "X");
        let d = derive_stream_seed(8, 0, "X");
        assert!(a != b && a != c && a != d && b != c);
        assert_eq!(a, derive_stream_seed(7, 0, "X"));
    }
}
