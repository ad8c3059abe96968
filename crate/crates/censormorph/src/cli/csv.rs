//! CSV emission. All numbers are written with 6 significant digits, LF line
//! endings, and invalid results as empty cells plus a reason column.

use crate::cli::analyze::HemisphereReport;
use crate::error::Result;
use crate::harness::CurveSet;
use std::fs;
use std::path::Path;

/// Formats a float with 6 significant digits, fixed-point where reasonable
/// and scientific notation for extreme magnitudes. NaN becomes the empty
/// string (the CSV "not applicable" encoding).
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return String::new();
    }
    if x == 0.0 {
        return "0".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if !(-5..=14).contains(&exp) {
        format!("{x:.5e}")
    } else {
        let decimals = (5 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

pub const ANALYSIS_HEADER: &str = "hemisphere,step,gamma_mm,test,comparison,alternative,statistic,df1,df2,p_value,reliable,n_group1,n_group2,n_group3,reason";

/// Renders one hemisphere's analysis rows. With `holm` a `p_holm` column is
/// appended (pooled-mode pairwise rows only carry values there).
pub fn analysis_csv_string(report: &HemisphereReport, holm: bool) -> String {
    let mut out = String::new();
    out.push_str(ANALYSIS_HEADER);
    if holm {
        out.push_str(",p_holm");
    }
    out.push('\n');
    for row in &report.rows {
        let r = &row.result;
        let mut counts = [String::new(), String::new(), String::new()];
        for (slot, &c) in counts.iter_mut().zip(row.counts.iter()) {
            *slot = c.to_string();
        }
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            report.hemisphere,
            row.step,
            fmt_sig(row.gamma),
            r.test,
            row.comparison,
            r.alternative,
            fmt_sig(r.statistic),
            fmt_opt(r.df1),
            fmt_opt(r.df2),
            fmt_sig(r.p_value),
            row.reliable,
            counts[0],
            counts[1],
            counts[2],
            r.invalid_reason.as_deref().unwrap_or(""),
        ));
        if holm {
            out.push(',');
            out.push_str(&fmt_opt(row.p_holm));
        }
        out.push('\n');
    }
    out
}

pub const CURVES_HEADER: &str =
    "step,gamma_mm,test,comparison,alternative,mean_p,p_lo,p_hi,rejection_rate,rej_lo,rej_hi,n_valid";

pub fn curves_csv_string(curves: &CurveSet) -> String {
    let mut out = String::new();
    out.push_str(CURVES_HEADER);
    out.push('\n');
    for row in &curves.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.step,
            fmt_sig(row.gamma),
            row.test,
            row.comparison,
            row.alternative,
            fmt_sig(row.mean_p),
            fmt_sig(row.p_lo),
            fmt_sig(row.p_hi),
            fmt_sig(row.rejection_rate),
            fmt_sig(row.rej_lo),
            fmt_sig(row.rej_hi),
            row.n_valid,
        ));
    }
    out
}

pub fn write_string(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(5.5), "5.50000");
        assert_eq!(fmt_sig(0.05), "0.0500000");
        assert_eq!(fmt_sig(550.0), "550.000");
        assert_eq!(fmt_sig(4.571428571428571), "4.57143");
        assert_eq!(fmt_sig(0.101701396587), "0.101701");
        assert_eq!(fmt_sig(-1.2247448713915889), "-1.22474");
        assert_eq!(fmt_sig(47.0 * 0.01), "0.470000");
        assert_eq!(fmt_sig(1.0e-7), "1.00000e-7");
        assert_eq!(fmt_sig(f64::NAN), "");
    }

    #[test]
    fn six_digit_round_trip_is_stable() {
        for &x in &[0.123456789, 3.9999999, 1234.5678, 1e-3, 0.05] {
            let once = fmt_sig(x);
            let twice = fmt_sig(once.parse::<f64>().unwrap());
            assert_eq!(once, twice);
        }
    }
}
