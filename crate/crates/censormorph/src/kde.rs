//! Gaussian kernel density estimation for distance samples.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// A density estimate evaluated on a grid.
#[derive(Debug, Clone)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
    pub n: usize,
}

impl DensityCurve {
    /// Trapezoid integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        let mut total = 0.0;
        for w in self.grid.windows(2).zip(self.density.windows(2)) {
            let (g, d) = w;
            total += (g[1] - g[0]) * (d[0] + d[1]) / 2.0;
        }
        total
    }
}

fn quantile_type7(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let h = (n as f64 - 1.0) * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule of thumb: 0.9 min(sd, IQR/1.34) n^(-1/5).
pub fn silverman_bandwidth(sample: &[f64]) -> Result<f64> {
    if sample.len() < 2 {
        return Err(Error::InsufficientData(
            "bandwidth selection needs n >= 2".into(),
        ));
    }
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let sd = (sample.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt();

    let mut sorted = sample.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let iqr = quantile_type7(&sorted, 0.75) - quantile_type7(&sorted, 0.25);

    let spread = sd.min(iqr / 1.34);
    if spread <= 0.0 {
        return Err(Error::ZeroSpread);
    }
    Ok(0.9 * spread * n.powf(-0.2))
}

/// 512 equally spaced points spanning the sample range extended by four
/// bandwidths on each side.
pub fn default_grid(sample: &[f64], bandwidth: f64, points: usize) -> Vec<f64> {
    let min = sample.iter().copied().fold(f64::INFINITY, f64::min);
    let max = sample.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = min - 4.0 * bandwidth;
    let hi = max + 4.0 * bandwidth;
    let points = points.max(2);
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

pub const DEFAULT_GRID_POINTS: usize = 512;

/// Direct-evaluation Gaussian KDE: density(g) = mean of phi((g - x_i)/h) / h.
pub fn gaussian_kde(sample: &[f64], bandwidth: f64, grid: &[f64]) -> Result<DensityCurve> {
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(Error::InvalidBandwidth(bandwidth));
    }
    if sample.is_empty() {
        return Err(Error::EmptyInput("kde needs at least one observation".into()));
    }
    let norm = 1.0 / ((2.0 * PI).sqrt() * bandwidth * sample.len() as f64);
    let density = grid
        .iter()
        .map(|&g| {
            let mut acc = 0.0;
            for &x in sample {
                let u = (g - x) / bandwidth;
                acc += (-0.5 * u * u).exp();
            }
            acc * norm
        })
        .collect();
    Ok(DensityCurve {
        grid: grid.to_vec(),
        density,
        bandwidth,
        n: sample.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::tail::norm_sf_inv;

    #[test]
    fn single_kernel_peak_value() {
        let curve = gaussian_kde(&[0.0], 1.0, &[0.0]).unwrap();
        assert!((curve.density[0] - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
        assert!((curve.density[0] - 0.39894).abs() < 1e-5);
    }

    #[test]
    fn symmetric_sample_gives_symmetric_density() {
        let grid: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.1).collect();
        let curve = gaussian_kde(&[-1.0, 1.0], 0.5, &grid).unwrap();
        let n = grid.len();
        for i in 0..n {
            assert!((curve.density[i] - curve.density[n - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn mass_is_conserved_on_wide_grid() {
        // deterministic near-normal sample
        let n = 1000;
        let sample: Vec<f64> = (0..n)
            .map(|i| -norm_sf_inv((i as f64 + 0.5) / n as f64))
            .collect();
        let h = silverman_bandwidth(&sample).unwrap();
        let grid = default_grid(&sample, h, DEFAULT_GRID_POINTS);
        let curve = gaussian_kde(&sample, h, &grid).unwrap();
        let integral = curve.integral();
        assert!(
            (0.98..=1.0).contains(&integral),
            "integral = {integral}"
        );
        assert!(curve.density.iter().all(|&d| d >= 0.0 && d.is_finite()));
    }

    #[test]
    fn silverman_on_normal_quantile_grid() {
        let n = 100;
        let sample: Vec<f64> = (0..n)
            .map(|i| -norm_sf_inv((i as f64 + 0.5) / n as f64))
            .collect();
        let h = silverman_bandwidth(&sample).unwrap();
        let rough = 0.9 * (n as f64).powf(-0.2);
        assert!((h - rough).abs() / rough < 0.1, "h = {h}, rough = {rough}");
    }

    #[test]
    fn silverman_scales_homogeneously() {
        let sample = [0.3, 1.1, 1.9, 2.0, 4.7, 5.2];
        let h = silverman_bandwidth(&sample).unwrap();
        let scaled: Vec<f64> = sample.iter().map(|&x| 3.0 * x).collect();
        let h3 = silverman_bandwidth(&scaled).unwrap();
        assert!((h3 - 3.0 * h).abs() < 1e-12);
    }

    #[test]
    fn degenerate_spread_is_rejected() {
        assert!(matches!(
            silverman_bandwidth(&[2.0, 2.0, 2.0]),
            Err(Error::ZeroSpread)
        ));
        assert!(matches!(
            silverman_bandwidth(&[1.0]),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            gaussian_kde(&[1.0], 0.0, &[0.0]),
            Err(Error::InvalidBandwidth(_))
        ));
    }

    #[test]
    fn shift_equivariance() {
        let sample = [0.2, 0.9, 1.4, 3.3];
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let base = gaussian_kde(&sample, 0.4, &grid).unwrap();
        let c = 2.5;
        let shifted_sample: Vec<f64> = sample.iter().map(|&x| x + c).collect();
        let shifted_grid: Vec<f64> = grid.iter().map(|&g| g + c).collect();
        let shifted = gaussian_kde(&shifted_sample, 0.4, &shifted_grid).unwrap();
        for (a, b) in base.density.iter().zip(&shifted.density) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
