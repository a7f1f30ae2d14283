//! Log-log trends of claim ratios along a family.

use serde::Serialize;

use super::eval::{ClaimResult, Verdict};
use super::{Exactness, SCHEMA};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Slopes within `±SLOPE_THRESHOLD` count as flat.
pub const SLOPE_THRESHOLD: f64 = 0.1;

/// `(numerator, denominator)` of the tolerated growth of the largest constant
/// between the lower and upper halves of a size range.
pub const BOUNDED_SLACK: (i64, i64) = (21, 20);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrendFlag {
    Bounded,
    Growing,
    Shrinking,
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendPoint {
    pub n: usize,
    pub ratio_approx: Option<f64>,
    pub constant: Option<Rational>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendReport {
    pub schema: &'static str,
    pub claim: String,
    pub exactness: Exactness,
    pub family: String,
    pub seed: u64,
    pub points: Vec<TrendPoint>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
    pub flag: TrendFlag,
    /// Whether the largest constant on the upper half of the size range stays
    /// within [`BOUNDED_SLACK`] of the largest one on the lower half.
    pub bounded: Option<bool>,
    pub max_constant: Option<Rational>,
    pub holds: usize,
    pub fails: usize,
    pub skipped: usize,
}

/// Least squares fit of `ln y` against `ln x`: `(slope, intercept, r²)`.
/// Needs two distinct abscissae; a constant series has `r² = 1`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let m = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy <= f64::EPSILON * m { 1.0 } else { 1.0 - sse / syy };
    Some((slope, intercept, r2))
}

/// `max{C(n) : N/2 ≤ n ≤ N} ≤ (21/20)·max{C(n) : N/4 ≤ n ≤ N/2}` with `N`
/// the largest size; `None` when either half is empty.
pub fn boundedness(constants: &[(usize, Rational)]) -> Option<bool> {
    let top = constants.iter().map(|c| c.0).max()?;
    let in_range = |lo: usize, hi: usize| {
        constants.iter().filter(move |(n, _)| 4 * n >= lo && 4 * n <= hi).map(|c| c.1.clone()).max()
    };
    let upper = in_range(2 * top, 4 * top)?;
    let lower = in_range(top, 2 * top)?;
    let slack = Rational::from(BOUNDED_SLACK.0) / Rational::from(BOUNDED_SLACK.1);
    Some(upper <= &slack * &lower)
}

/// Summarizes the results of one claim on one family at several sizes.
pub fn trend(results: &[ClaimResult]) -> Result<TrendReport> {
    let first = results.first().ok_or_else(|| Error::Invalid("a trend needs at least 3 sizes, got 0".into()))?;
    if results.iter().any(|r| r.claim != first.claim || r.family != first.family || r.seed != first.seed) {
        return Err(Error::Invalid("a trend needs results of one claim on one family".into()));
    }
    let mut sizes: Vec<usize> = results.iter().map(|r| r.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::Invalid(format!("a trend needs at least 3 sizes, got {}", sizes.len())));
    }
    let mut points: Vec<TrendPoint> = results
        .iter()
        .map(|r| TrendPoint { n: r.n, ratio_approx: r.ratio_approx, constant: r.constant.clone(), verdict: r.verdict })
        .collect();
    points.sort_by_key(|p| p.n);
    let xy: Vec<(f64, f64)> = points.iter().filter_map(|p| Some((p.n as f64, p.ratio_approx?))).collect();
    let fit = fit_loglog(&xy);
    let usable = xy.iter().filter(|(_, y)| *y > 0.0 && y.is_finite()).count();
    let flag = match fit {
        Some((s, _, _)) if usable >= 3 => {
            if s > SLOPE_THRESHOLD {
                TrendFlag::Growing
            } else if s < -SLOPE_THRESHOLD {
                TrendFlag::Shrinking
            } else {
                TrendFlag::Bounded
            }
        }
        _ => TrendFlag::Undetermined,
    };
    let constants: Vec<(usize, Rational)> = points.iter().filter_map(|p| Some((p.n, p.constant.clone()?))).collect();
    let count = |v: Verdict| results.iter().filter(|r| r.verdict == v).count();
    Ok(TrendReport {
        schema: SCHEMA,
        claim: first.claim.clone(),
        exactness: first.exactness,
        family: first.family.clone(),
        seed: first.seed,
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        r2: fit.map(|f| f.2),
        flag,
        bounded: boundedness(&constants),
        max_constant: constants.iter().map(|c| c.1.clone()).max(),
        holds: count(Verdict::Holds),
        fails: count(Verdict::Fails),
        skipped: count(Verdict::Skipped),
        points,
    })
}

/// One report per `(claim, family, seed)` series, in order of first appearance.
pub fn trends_by_series(results: &[ClaimResult]) -> Result<Vec<TrendReport>> {
    let mut keys: Vec<(&str, &str, u64)> = Vec::new();
    for r in results {
        let k = (r.claim.as_str(), r.family.as_str(), r.seed);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(c, f, s)| {
            let series: Vec<ClaimResult> =
                results.iter().filter(|r| r.claim == c && r.family == f && r.seed == s).cloned().collect();
            trend(&series)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_power_laws() {
        let (s, _, r2) = fit_loglog(&[(2.0, 4.0), (4.0, 16.0), (8.0, 64.0)]).unwrap();
        assert!((s - 2.0).abs() < 1e-9 && (r2 - 1.0).abs() < 1e-9);
        let (s, i, r2) = fit_loglog(&[(2.0, 3.0), (4.0, 3.0), (8.0, 3.0)]).unwrap();
        assert!(s.abs() < 1e-12 && (i - 3f64.ln()).abs() < 1e-12 && r2 == 1.0);
        assert!(fit_loglog(&[(2.0, 1.0), (2.0, 5.0)]).is_none());
    }

    #[test]
    fn boundedness_compares_halves() {
        let c = |v: &[(usize, i64)]| v.iter().map(|(n, x)| (*n, Rational::from(*x))).collect::<Vec<_>>();
        assert_eq!(boundedness(&c(&[(8, 20), (16, 20), (32, 21)])), Some(true));
        assert_eq!(boundedness(&c(&[(8, 20), (16, 20), (32, 22)])), Some(false));
        // N/2 belongs to both halves.
        assert_eq!(boundedness(&c(&[(16, 10), (32, 10)])), Some(true));
        assert_eq!(boundedness(&c(&[(32, 10)])), None);
        assert_eq!(boundedness(&c(&[(6, 1), (32, 10)])), None);
    }
}
