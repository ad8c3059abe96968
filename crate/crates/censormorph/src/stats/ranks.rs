//! Mid-rank computation over pooled samples.
//!
//! Inputs are the per-group sorted slices; ranking is a k-way merge, so a
//! censoring sweep never re-sorts anything.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TieGroup {
    pub value: f64,
    pub multiplicity: usize,
}

/// Ranks of the pooled concatenation, with tied values averaged.
#[derive(Debug, Clone)]
pub struct RankedPool {
    /// Aligned with the concatenation of the input samples in order.
    pub mid_ranks: Vec<f64>,
    /// Only groups of two or more tied observations.
    pub tie_groups: Vec<TieGroup>,
    pub n_total: usize,
}

impl RankedPool {
    /// Sum of t^3 - t over tie groups, the shared correction term of the
    /// rank tests.
    pub fn tie_correction_sum(&self) -> f64 {
        self.tie_groups
            .iter()
            .map(|t| {
                let t = t.multiplicity as f64;
                t * t * t - t
            })
            .sum()
    }

    /// Rank sums per input segment given the original sample lengths.
    pub fn segment_rank_sums(&self, lens: &[usize]) -> Vec<f64> {
        let mut sums = Vec::with_capacity(lens.len());
        let mut offset = 0;
        for &len in lens {
            sums.push(self.mid_ranks[offset..offset + len].iter().sum());
            offset += len;
        }
        sums
    }
}

fn assert_sorted(s: &[f64]) {
    debug_assert!(
        s.windows(2).all(|w| w[0] <= w[1]),
        "rank test samples must be sorted ascending"
    );
}

/// Mid-ranks of the pooled, sorted concatenation of `samples`.
/// Every sample must already be sorted ascending.
pub fn mid_rank(samples: &[&[f64]]) -> Result<RankedPool> {
    let n_total: usize = samples.iter().map(|s| s.len()).sum();
    if n_total == 0 {
        return Err(Error::EmptyInput("mid_rank needs at least one observation".into()));
    }
    for s in samples {
        assert_sorted(s);
    }

    let mut offsets = Vec::with_capacity(samples.len());
    let mut acc = 0;
    for s in samples {
        offsets.push(acc);
        acc += s.len();
    }

    let mut cursors = vec![0usize; samples.len()];
    let mut mid_ranks = vec![0.0f64; n_total];
    let mut tie_groups = Vec::new();
    let mut positions: Vec<usize> = Vec::new();
    let mut assigned = 0usize;

    while assigned < n_total {
        let mut value = f64::INFINITY;
        for (gi, s) in samples.iter().enumerate() {
            if cursors[gi] < s.len() {
                let x = s[cursors[gi]];
                if x < value {
                    value = x;
                }
            }
        }
        positions.clear();
        for (gi, s) in samples.iter().enumerate() {
            while cursors[gi] < s.len() && s[cursors[gi]] == value {
                positions.push(offsets[gi] + cursors[gi]);
                cursors[gi] += 1;
            }
        }
        let m = positions.len();
        // ranks assigned+1 ..= assigned+m averaged
        let mid = (2 * assigned + m + 1) as f64 / 2.0;
        for &p in &positions {
            mid_ranks[p] = mid;
        }
        if m >= 2 {
            tie_groups.push(TieGroup {
                value,
                multiplicity: m,
            });
        }
        assigned += m;
    }

    Ok(RankedPool {
        mid_ranks,
        tie_groups,
        n_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_ties_gives_integer_ranks() {
        let r = mid_rank(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(r.mid_ranks, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert!(r.tie_groups.is_empty());
    }

    #[test]
    fn ties_are_averaged() {
        // pooled sorted: 1, 2, 2, 2, 3 -> value 2 spans ranks 2..4, mid 3
        let r = mid_rank(&[&[1.0, 2.0, 2.0], &[2.0, 3.0]]).unwrap();
        assert_eq!(r.mid_ranks, vec![1.0, 3.0, 3.0, 3.0, 5.0]);
        assert_eq!(r.tie_groups.len(), 1);
        assert_eq!(r.tie_groups[0].multiplicity, 3);
    }

    #[test]
    fn total_tie_averages_everything() {
        let r = mid_rank(&[&[7.0, 7.0, 7.0], &[7.0, 7.0]]).unwrap();
        assert!(r.mid_ranks.iter().all(|&m| m == 3.0));
        assert_eq!(r.tie_groups[0].multiplicity, 5);
    }

    #[test]
    fn rank_sum_is_conserved() {
        let r = mid_rank(&[&[1.0, 1.0, 4.0], &[0.5, 1.0, 2.0, 2.0]]).unwrap();
        let n = r.n_total as f64;
        let total: f64 = r.mid_ranks.iter().sum();
        assert!((total - n * (n + 1.0) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(
            mid_rank(&[&[], &[]]),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn segment_sums_align_with_inputs() {
        let r = mid_rank(&[&[1.0, 3.0], &[2.0]]).unwrap();
        let sums = r.segment_rank_sums(&[2, 1]);
        assert_eq!(sums, vec![4.0, 2.0]);
    }
}
