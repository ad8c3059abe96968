//! The hypothesis-test battery.
//!
//! Multi-group: Kruskal-Wallis and one-way ANOVA F (classical and Welch).
//! Pairwise: Wilcoxon rank sum (normal approximation, no continuity
//! correction) and Welch's t. Distributional: two-sample Kolmogorov-Smirnov
//! and a Monte Carlo Lilliefors normality test. Rank- and ecdf-based tests
//! take samples sorted ascending, which pooled distance data already is.
//!
//! Structural misuse (empty groups, too few groups) returns an error.
//! Degenerate data (all values tied, zero variance) returns a `TestResult`
//! with `valid == false` so a censoring sweep can continue past it.

pub mod ranks;
pub mod tail;

pub use ranks::{mid_rank, RankedPool, TieGroup};

use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestKind {
    KruskalWallis,
    AnovaFHov,
    AnovaFWelch,
    Wilcoxon,
    WelchT,
    KsTwoSample,
    Lilliefors,
}

impl TestKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TestKind::KruskalWallis => "kruskal_wallis",
            TestKind::AnovaFHov => "anova_f_hov",
            TestKind::AnovaFWelch => "anova_f_welch",
            TestKind::Wilcoxon => "wilcoxon",
            TestKind::WelchT => "welch_t",
            TestKind::KsTwoSample => "ks_two_sample",
            TestKind::Lilliefors => "lilliefors",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Alternative {
    TwoSided,
    Less,
    Greater,
    NotApplicable,
}

impl Alternative {
    pub fn as_str(&self) -> &'static str {
        match self {
            Alternative::TwoSided => "two_sided",
            Alternative::Less => "less",
            Alternative::Greater => "greater",
            Alternative::NotApplicable => "not_applicable",
        }
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one test: statistic, p-value, degrees of freedom where the
/// reference distribution has them, and a validity flag for degenerate data.
#[derive(Debug, Clone)]
pub struct TestResult {
    pub test: TestKind,
    pub statistic: f64,
    pub p_value: f64,
    pub alternative: Alternative,
    pub df1: Option<f64>,
    pub df2: Option<f64>,
    pub valid: bool,
    pub invalid_reason: Option<String>,
}

impl TestResult {
    fn ok(
        test: TestKind,
        statistic: f64,
        p_value: f64,
        alternative: Alternative,
        df1: Option<f64>,
        df2: Option<f64>,
    ) -> Self {
        TestResult {
            test,
            statistic,
            p_value,
            alternative,
            df1,
            df2,
            valid: true,
            invalid_reason: None,
        }
    }

    /// A degenerate-data result: NaN statistic and p-value, reason recorded.
    pub fn invalid(test: TestKind, alternative: Alternative, reason: &str) -> Self {
        TestResult {
            test,
            statistic: f64::NAN,
            p_value: f64::NAN,
            alternative,
            df1: None,
            df2: None,
            valid: false,
            invalid_reason: Some(reason.to_string()),
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Two-pass sample variance with the unbiased (n-1) denominator.
fn sample_variance(xs: &[f64], m: f64) -> f64 {
    debug_assert!(xs.len() >= 2);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

fn one_sided_pair(p_small_when_positive: f64, stat_nonneg: bool) -> (f64, f64) {
    // Returns (p_less, p_greater) with the complement computed as 1 - p so
    // the pair always sums to exactly 1.
    if stat_nonneg {
        let pg = p_small_when_positive;
        (1.0 - pg, pg)
    } else {
        let pl = p_small_when_positive;
        (pl, 1.0 - pl)
    }
}

fn pick_alternative(
    alternative: Alternative,
    p_less: f64,
    p_greater: f64,
) -> Result<f64> {
    match alternative {
        Alternative::Less => Ok(p_less),
        Alternative::Greater => Ok(p_greater),
        Alternative::TwoSided => Ok((2.0 * p_less.min(p_greater)).min(1.0)),
        Alternative::NotApplicable => Err(Error::InvalidParameter(
            "pairwise tests need a two_sided, less, or greater alternative".into(),
        )),
    }
}

/// Kruskal-Wallis H test with mid-rank tie correction; p-value from the
/// chi-squared upper tail with (groups - 1) degrees of freedom.
pub fn kruskal_wallis(samples: &[&[f64]]) -> Result<TestResult> {
    let g = samples.len();
    if g < 2 {
        return Err(Error::TooFewGroups(g));
    }
    for (i, s) in samples.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::EmptyGroup(i));
        }
    }
    let ranked = mid_rank(samples)?;
    let n = ranked.n_total as f64;
    let lens: Vec<usize> = samples.iter().map(|s| s.len()).collect();
    let rank_sums = ranked.segment_rank_sums(&lens);

    let mut h = 0.0;
    for (sum, &len) in rank_sums.iter().zip(&lens) {
        h += sum * sum / len as f64;
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);

    let correction = 1.0 - ranked.tie_correction_sum() / (n * n * n - n);
    if correction <= 0.0 {
        return Ok(TestResult::invalid(
            TestKind::KruskalWallis,
            Alternative::NotApplicable,
            "all-values-tied",
        ));
    }
    let h = h / correction;
    let df = (g - 1) as f64;
    let p = tail::chi2_sf(h, df)?;
    Ok(TestResult::ok(
        TestKind::KruskalWallis,
        h,
        p,
        Alternative::NotApplicable,
        Some(df),
        None,
    ))
}

/// One-way ANOVA F test. With `hov` the classical equal-variance form,
/// without it Welch's heteroscedastic form with its Welch-Satterthwaite
/// style denominator degrees of freedom.
pub fn anova_f(samples: &[&[f64]], hov: bool) -> Result<TestResult> {
    let g = samples.len();
    if g < 2 {
        return Err(Error::TooFewGroups(g));
    }
    for (i, s) in samples.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::EmptyGroup(i));
        }
    }
    let kind = if hov {
        TestKind::AnovaFHov
    } else {
        TestKind::AnovaFWelch
    };

    if hov {
        let n_total: usize = samples.iter().map(|s| s.len()).sum();
        if n_total <= g {
            return Err(Error::InsufficientGroupSize(format!(
                "classical ANOVA needs N - g >= 1 (N = {n_total}, g = {g})"
            )));
        }
        let grand = samples.iter().flat_map(|s| s.iter()).sum::<f64>() / n_total as f64;
        let mut ssb = 0.0;
        let mut ssw = 0.0;
        for s in samples {
            let m = mean(s);
            ssb += s.len() as f64 * (m - grand) * (m - grand);
            ssw += s.iter().map(|&x| (x - m) * (x - m)).sum::<f64>();
        }
        let df1 = (g - 1) as f64;
        let df2 = (n_total - g) as f64;
        let msw = ssw / df2;
        if msw == 0.0 {
            return Ok(TestResult::invalid(
                kind,
                Alternative::NotApplicable,
                "zero-within-variance",
            ));
        }
        let f = (ssb / df1) / msw;
        let p = tail::f_sf(f, df1, df2)?;
        Ok(TestResult::ok(
            kind,
            f,
            p,
            Alternative::NotApplicable,
            Some(df1),
            Some(df2),
        ))
    } else {
        for (i, s) in samples.iter().enumerate() {
            if s.len() < 2 {
                return Err(Error::InsufficientGroupSize(format!(
                    "Welch ANOVA needs every group size >= 2 (group {i} has {})",
                    s.len()
                )));
            }
        }
        let means: Vec<f64> = samples.iter().map(|s| mean(s)).collect();
        let vars: Vec<f64> = samples
            .iter()
            .zip(&means)
            .map(|(s, &m)| sample_variance(s, m))
            .collect();
        if vars.iter().any(|&v| v == 0.0) {
            return Ok(TestResult::invalid(
                kind,
                Alternative::NotApplicable,
                "zero-variance",
            ));
        }
        let weights: Vec<f64> = samples
            .iter()
            .zip(&vars)
            .map(|(s, &v)| s.len() as f64 / v)
            .collect();
        let w_total: f64 = weights.iter().sum();
        let weighted_mean =
            weights.iter().zip(&means).map(|(w, m)| w * m).sum::<f64>() / w_total;

        let gf = g as f64;
        let numerator = weights
            .iter()
            .zip(&means)
            .map(|(w, m)| w * (m - weighted_mean) * (m - weighted_mean))
            .sum::<f64>()
            / (gf - 1.0);
        let lambda: f64 = samples
            .iter()
            .zip(&weights)
            .map(|(s, &w)| {
                let frac = 1.0 - w / w_total;
                frac * frac / (s.len() as f64 - 1.0)
            })
            .sum();
        let denominator = 1.0 + 2.0 * (gf - 2.0) / (gf * gf - 1.0) * lambda;
        let f = numerator / denominator;
        let df1 = gf - 1.0;
        let df2 = (gf * gf - 1.0) / (3.0 * lambda);
        let p = tail::f_sf(f, df1, df2)?;
        Ok(TestResult::ok(
            kind,
            f,
            p,
            Alternative::NotApplicable,
            Some(df1),
            Some(df2),
        ))
    }
}

/// Wilcoxon rank sum test via the tie-corrected normal approximation,
/// without continuity correction, so the one-sided p-values are exact
/// complements. The statistic is the rank sum of `x`.
pub fn wilcoxon_rank_sum(x: &[f64], y: &[f64], alternative: Alternative) -> Result<TestResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyInput("wilcoxon needs both samples non-empty".into()));
    }
    let ranked = mid_rank(&[x, y])?;
    let nx = x.len() as f64;
    let ny = y.len() as f64;
    let n = nx + ny;
    let w: f64 = ranked.mid_ranks[..x.len()].iter().sum();

    let mean_w = nx * (n + 1.0) / 2.0;
    let tie_term = ranked.tie_correction_sum() / (n * (n - 1.0));
    let var_w = nx * ny / 12.0 * ((n + 1.0) - tie_term);
    if var_w <= 0.0 {
        return Ok(TestResult::invalid(
            TestKind::Wilcoxon,
            alternative,
            "all-values-tied",
        ));
    }
    let z = (w - mean_w) / var_w.sqrt();
    let (p_less, p_greater) = one_sided_pair(tail::norm_sf(z.abs()), z >= 0.0);
    let p = pick_alternative(alternative, p_less, p_greater)?;
    Ok(TestResult::ok(TestKind::Wilcoxon, w, p, alternative, None, None))
}

/// Welch's two-sample t test with Welch-Satterthwaite degrees of freedom.
pub fn welch_t(x: &[f64], y: &[f64], alternative: Alternative) -> Result<TestResult> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::InsufficientGroupSize(
            "Welch t needs both samples of size >= 2".into(),
        ));
    }
    let mx = mean(x);
    let my = mean(y);
    let vx = sample_variance(x, mx);
    let vy = sample_variance(y, my);
    if vx == 0.0 && vy == 0.0 {
        return Ok(TestResult::invalid(TestKind::WelchT, alternative, "zero-variance"));
    }
    let ax = vx / x.len() as f64;
    let ay = vy / y.len() as f64;
    let se2 = ax + ay;
    let t = (mx - my) / se2.sqrt();
    let df = se2 * se2
        / (ax * ax / (x.len() as f64 - 1.0) + ay * ay / (y.len() as f64 - 1.0));
    let (p_less, p_greater) = one_sided_pair(tail::t_sf(t.abs(), df)?, t >= 0.0);
    let p = pick_alternative(alternative, p_less, p_greater)?;
    Ok(TestResult::ok(
        TestKind::WelchT,
        t,
        p,
        alternative,
        Some(df),
        None,
    ))
}

/// Two-sample Kolmogorov-Smirnov test: D = sup |ecdf_x - ecdf_y| with the
/// asymptotic Kolmogorov p-value. Inputs must be sorted ascending.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyInput("ks needs both samples non-empty".into()));
    }
    debug_assert!(x.windows(2).all(|w| w[0] <= w[1]));
    debug_assert!(y.windows(2).all(|w| w[0] <= w[1]));

    let nx = x.len() as f64;
    let ny = y.len() as f64;
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < x.len() || j < y.len() {
        let v = match (x.get(i), y.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        while i < x.len() && x[i] == v {
            i += 1;
        }
        while j < y.len() && y[j] == v {
            j += 1;
        }
        let diff = (i as f64 / nx - j as f64 / ny).abs();
        if diff > d {
            d = diff;
        }
    }
    let lambda = d * (nx * ny / (nx + ny)).sqrt();
    let p = tail::kolmogorov_sf(lambda);
    Ok(TestResult::ok(
        TestKind::KsTwoSample,
        d,
        p,
        Alternative::TwoSided,
        None,
        None,
    ))
}

/// Kolmogorov distance between a sorted sample's ecdf and an arbitrary CDF.
pub fn ks_statistic_against(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let upper = (i + 1) as f64 / n - f;
        let lower = f - i as f64 / n;
        d = d.max(upper).max(lower);
    }
    d
}

fn lilliefors_statistic(sorted: &[f64]) -> f64 {
    let m = mean(sorted);
    let sd = sample_variance(sorted, m).sqrt();
    ks_statistic_against(sorted, |x| 1.0 - tail::norm_sf((x - m) / sd))
}

/// Lilliefors normality test: D against the normal fitted by sample mean and
/// standard deviation, with the p-value estimated from `n_mc` seeded Monte
/// Carlo replications of standard-normal samples of the same size.
/// Input must be sorted ascending.
pub fn lilliefors(x: &[f64], n_mc: usize, seed: u64) -> Result<TestResult> {
    if x.len() < 4 {
        return Err(Error::InsufficientGroupSize(
            "lilliefors needs n >= 4".into(),
        ));
    }
    if n_mc == 0 {
        return Err(Error::InvalidParameter("lilliefors needs n_mc >= 1".into()));
    }
    debug_assert!(x.windows(2).all(|w| w[0] <= w[1]));
    let m = mean(x);
    if sample_variance(x, m) == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let d_obs = lilliefors_statistic(x);

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut exceed = 0usize;
    let mut sim = vec![0.0f64; x.len()];
    for _ in 0..n_mc {
        for v in sim.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        sim.sort_unstable_by(f64::total_cmp);
        if lilliefors_statistic(&sim) >= d_obs {
            exceed += 1;
        }
    }
    let p = exceed as f64 / n_mc as f64;
    Ok(TestResult::ok(
        TestKind::Lilliefors,
        d_obs,
        p,
        Alternative::NotApplicable,
        None,
        None,
    ))
}

/// Runs a multi-group test with structural preconditions (empty or
/// undersized groups) mapped to invalid results instead of errors, so sweep
/// drivers continue past degenerate steps.
pub fn guarded_multi_group(test: TestKind, groups: &[&[f64]]) -> TestResult {
    if groups.iter().any(|g| g.is_empty()) {
        return TestResult::invalid(test, Alternative::NotApplicable, "empty-group");
    }
    let outcome = match test {
        TestKind::KruskalWallis => kruskal_wallis(groups),
        TestKind::AnovaFHov => anova_f(groups, true),
        TestKind::AnovaFWelch => {
            if groups.iter().any(|g| g.len() < 2) {
                return TestResult::invalid(
                    test,
                    Alternative::NotApplicable,
                    "insufficient-group-size",
                );
            }
            anova_f(groups, false)
        }
        other => panic!("{other} is not a multi-group test"),
    };
    outcome.unwrap_or_else(|e| TestResult::invalid(test, Alternative::NotApplicable, &e.to_string()))
}

/// Pairwise counterpart of [`guarded_multi_group`].
pub fn guarded_pairwise(
    test: TestKind,
    x: &[f64],
    y: &[f64],
    alternative: Alternative,
) -> TestResult {
    let outcome = match test {
        TestKind::Wilcoxon => {
            if x.is_empty() || y.is_empty() {
                return TestResult::invalid(test, alternative, "empty-group");
            }
            wilcoxon_rank_sum(x, y, alternative)
        }
        TestKind::WelchT => {
            if x.len() < 2 || y.len() < 2 {
                return TestResult::invalid(test, alternative, "insufficient-group-size");
            }
            welch_t(x, y, alternative)
        }
        TestKind::KsTwoSample => {
            if x.is_empty() || y.is_empty() {
                return TestResult::invalid(test, Alternative::TwoSided, "empty-group");
            }
            ks_two_sample(x, y)
        }
        other => panic!("{other} is not a pairwise test"),
    };
    outcome.unwrap_or_else(|e| TestResult::invalid(test, alternative, &e.to_string()))
}

/// Holm step-down multiplicity adjustment. Output order matches input order.
pub fn holm_adjust(p_values: &[f64]) -> Result<Vec<f64>> {
    for &p in p_values {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange(p));
        }
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));

    let mut adjusted = vec![0.0f64; m];
    let mut running_max = 0.0f64;
    for (rank, &idx) in order.iter().enumerate() {
        let scaled = ((m - rank) as f64 * p_values[idx]).min(1.0);
        running_max = running_max.max(scaled);
        adjusted[idx] = running_max;
    }
    Ok(adjusted)
}
