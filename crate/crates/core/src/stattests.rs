//! Statistical battery: Kolmogorov-Smirnov, chi-square, autocorrelation,
//! Jarque-Bera and sample moments.
//!
//! Chaotic streams are serially dependent, so iid critical values do not
//! apply. Pass thresholds are therefore configuration ([`Thresholds`]),
//! with defaults set from calibration runs rather than p-values.
//! Shapiro-Wilk is not provided.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::export::{fmt_f64, write_csv};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Unbiased (1/(n-1)) variance.
    pub variance: f64,
    /// `m3 / m2^1.5` with central moments; `None` for zero variance.
    pub skewness: Option<f64>,
    /// `m4 / m2^2 - 3`; `None` for zero variance.
    pub excess_kurtosis: Option<f64>,
}

fn central_moments(samples: &[f64]) -> (f64, f64, f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (mean, m2 / n, m3 / n, m4 / n)
}

pub fn moments(samples: &[f64]) -> Result<Moments> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let (mean, m2, m3, m4) = central_moments(samples);
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2) - 3.0))
    } else {
        (None, None)
    };
    Ok(Moments {
        n,
        mean,
        variance: m2 * n as f64 / (n as f64 - 1.0),
        skewness,
        excess_kurtosis,
    })
}

/// `sup |F_emp - F|` by a sweep over the sorted sample.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        d.max(above).max(below)
    }))
}

/// Pearson statistic against equal-width bins on [0, 1].
pub fn chi_square_uniform(samples: &[f64], bins: usize) -> Result<f64> {
    if bins == 0 {
        return Err(Error::InvalidConfig("chi-square needs at least one bin".into()));
    }
    let needed = 5 * bins;
    if samples.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: samples.len(),
        });
    }
    let mut counts = vec![0usize; bins];
    for &x in samples {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain {
                what: "chi-square sample",
                value: x,
                lo: 0.0,
                hi: 1.0,
            });
        }
        counts[((x * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let expected = samples.len() as f64 / bins as f64;
    Ok(counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum())
}

/// Sample autocorrelation at `lag`, normalized by `n` (biased form).
/// Lag 0 is accepted and gives 1.
pub fn autocorrelation(samples: &[f64], lag: usize) -> Result<f64> {
    let n = samples.len();
    if n <= lag {
        return Err(Error::InsufficientData {
            needed: lag + 1,
            got: n,
        });
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let denom: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    if !(denom > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let num: f64 = samples
        .iter()
        .zip(&samples[lag..])
        .map(|(a, b)| (a - mean) * (b - mean))
        .sum();
    Ok(num / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JarqueBera {
    pub statistic: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// `JB = n/6 (S^2 + K^2/4)` with excess kurtosis `K`.
pub fn jarque_bera(samples: &[f64]) -> Result<JarqueBera> {
    let n = samples.len();
    if n < 8 {
        return Err(Error::InsufficientData { needed: 8, got: n });
    }
    let (_, m2, m3, m4) = central_moments(samples);
    if !(m2 > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let s = m3 / m2.powf(1.5);
    let k = m4 / (m2 * m2) - 3.0;
    Ok(JarqueBera {
        statistic: n as f64 / 6.0 * (s * s + k * k / 4.0),
        skewness: s,
        excess_kurtosis: k,
    })
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub test: String,
    pub statistic: f64,
    /// Upper bound for one-sided checks, or the interval for two-sided ones.
    pub threshold: Threshold,
    pub pass: bool,
    pub n: usize,
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Threshold {
    Max(f64),
    Within { lo: f64, hi: f64 },
}

impl Threshold {
    pub fn admits(&self, statistic: f64) -> bool {
        match *self {
            Threshold::Max(t) => statistic <= t,
            Threshold::Within { lo, hi } => statistic >= lo && statistic <= hi,
        }
    }
}

impl TestReport {
    pub fn new(test: impl Into<String>, statistic: f64, threshold: Threshold, n: usize) -> Self {
        TestReport {
            test: test.into(),
            statistic,
            threshold,
            pass: threshold.admits(statistic),
            n,
            params: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

/// Battery thresholds. Defaults come from calibration of chaotic streams
/// at n = 1e5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub ks: f64,
    /// Accepted range of chi-square divided by the number of bins.
    pub chi2_per_bin: (f64, f64),
    /// `None` reports the autocorrelation without judging it.
    pub acf_abs: Option<f64>,
    pub skewness_abs: f64,
    pub excess_kurtosis_abs: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            ks: 0.02,
            chi2_per_bin: (0.5, 2.0),
            acf_abs: None,
            skewness_abs: 0.05,
            excess_kurtosis_abs: 0.1,
        }
    }
}

impl Thresholds {
    /// JB bound implied by the skewness and kurtosis tolerances at size `n`.
    pub fn jarque_bera_max(&self, n: usize) -> f64 {
        n as f64 / 6.0 * (self.skewness_abs.powi(2) + self.excess_kurtosis_abs.powi(2) / 4.0)
    }
}

pub fn ks_report<F: Fn(f64) -> f64>(samples: &[f64], cdf: F, t: &Thresholds) -> Result<TestReport> {
    let d = ks_statistic(samples, cdf)?;
    Ok(TestReport::new("ks", d, Threshold::Max(t.ks), samples.len()))
}

pub fn chi2_report(samples: &[f64], bins: usize, t: &Thresholds) -> Result<TestReport> {
    let stat = chi_square_uniform(samples, bins)?;
    let (lo, hi) = t.chi2_per_bin;
    let b = bins as f64;
    Ok(TestReport::new(
        "chi2",
        stat,
        Threshold::Within { lo: lo * b, hi: hi * b },
        samples.len(),
    )
    .param("bins", b))
}

pub fn acf_report(samples: &[f64], lag: usize, t: &Thresholds) -> Result<TestReport> {
    let r = autocorrelation(samples, lag)?;
    let mut report = match t.acf_abs {
        Some(bound) => TestReport::new("acf", r, Threshold::Within { lo: -bound, hi: bound }, samples.len()),
        None => TestReport::new("acf", r, Threshold::Within { lo: -1.0, hi: 1.0 }, samples.len()),
    };
    // within [-1, 1] is a tautology up to rounding: report only
    if t.acf_abs.is_none() {
        report.pass = true;
    }
    Ok(report.param("lag", lag as f64))
}

pub fn jb_report(samples: &[f64], t: &Thresholds) -> Result<TestReport> {
    let jb = jarque_bera(samples)?;
    Ok(TestReport::new(
        "jarque-bera",
        jb.statistic,
        Threshold::Max(t.jarque_bera_max(samples.len())),
        samples.len(),
    )
    .param("skewness", jb.skewness)
    .param("excess_kurtosis", jb.excess_kurtosis))
}

/// Rows `test, statistic, threshold, pass`; two-sided thresholds are
/// written as `lo..hi`.
pub fn write_battery_csv<W: Write>(reports: &[TestReport], out: W) -> io::Result<()> {
    let rows = reports.iter().map(|r| {
        let threshold = match r.threshold {
            Threshold::Max(t) => fmt_f64(t),
            Threshold::Within { lo, hi } => format!("{}..{}", fmt_f64(lo), fmt_f64(hi)),
        };
        vec![r.test.clone(), fmt_f64(r.statistic), threshold, r.pass.to_string()]
    });
    write_csv(out, &["test", "statistic", "threshold", "pass"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randgen::SourceConfig;
    use crate::special::normal_quantile;
    use proptest::prelude::*;

    fn uniform_cdf(x: f64) -> f64 {
        x.clamp(0.0, 1.0)
    }

    /// Brute force: the supremum is attained at a sample point, on either
    /// side of the jump.
    fn ks_enumerate(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
        let n = samples.len() as f64;
        let mut d: f64 = 0.0;
        for &x in samples {
            let at = samples.iter().filter(|&&y| y <= x).count() as f64 / n;
            let before = samples.iter().filter(|&&y| y < x).count() as f64 / n;
            d = d.max((at - cdf(x)).abs()).max((before - cdf(x)).abs());
        }
        d
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_statistic(&[0.5], uniform_cdf).unwrap(), 0.5);
        assert_eq!(ks_enumerate(&[0.25, 0.75], uniform_cdf), 0.25);
        assert_eq!(ks_statistic(&[0.25, 0.75], uniform_cdf).unwrap(), 0.25);
        let n = 400;
        let grid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&grid, uniform_cdf).unwrap();
        assert!((d - 0.5 / n as f64).abs() < 1e-15);
        assert!(ks_statistic(&[], uniform_cdf).is_err());
    }

    #[test]
    fn chi_square_examples() {
        let balanced: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert_eq!(chi_square_uniform(&balanced, 10).unwrap(), 0.0);
        let lopsided = vec![0.1; 20];
        assert_eq!(chi_square_uniform(&lopsided, 2).unwrap(), 20.0);
        assert!(chi_square_uniform(&lopsided, 5).is_err());
        assert!(chi_square_uniform(&[1.5; 10], 2).is_err());
    }

    #[test]
    fn chi_square_on_chaotic_uniforms() {
        let s = SourceConfig::default().uniforms(31, 100_000).unwrap();
        let stat = chi_square_uniform(&s.values, 100).unwrap();
        assert!((0.5..=2.0).contains(&(stat / 100.0)), "{stat}");
    }

    #[test]
    fn raw_logistic_orbit_is_uncorrelated() {
        use crate::dynamics::{orbit, Map1D, OrbitConfig};
        let o = orbit(
            &Map1D::logistic(4.0).unwrap(),
            &OrbitConfig::new(9, 1_000_000).burn_in(100),
        )
        .unwrap();
        let r = autocorrelation(&o.values, 1).unwrap();
        assert!(r.abs() < 0.02, "{r}");
    }

    #[test]
    fn autocorrelation_examples() {
        let alt: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = autocorrelation(&alt, 1).unwrap();
        assert!((r + 1.0).abs() < 0.01);
        assert_eq!(autocorrelation(&[1.0, 2.0, 4.0], 0).unwrap(), 1.0);
        assert!(matches!(autocorrelation(&[3.0; 10], 1), Err(Error::ZeroVariance)));
        assert!(autocorrelation(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn jarque_bera_examples() {
        let n = 1000;
        let two: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        let jb = jarque_bera(&two).unwrap();
        assert!(jb.skewness.abs() < 1e-15);
        assert!((jb.excess_kurtosis + 2.0).abs() < 1e-12);
        assert!((jb.statistic - n as f64 / 6.0).abs() < 1e-9);

        let m = 10_000;
        let grid: Vec<f64> = (0..m).map(|i| normal_quantile((i as f64 + 0.5) / m as f64)).collect();
        assert!(jarque_bera(&grid).unwrap().statistic < 10.0);

        assert!(matches!(jarque_bera(&[2.0; 10]), Err(Error::ZeroVariance)));
        assert!(jarque_bera(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn moment_examples() {
        let m = moments(&[0.0, 1.0]).unwrap();
        assert_eq!((m.mean, m.variance), (0.5, 0.5));
        let c = moments(&[3.0; 4]).unwrap();
        assert_eq!(c.variance, 0.0);
        assert!(c.skewness.is_none() && c.excess_kurtosis.is_none());
        assert!(moments(&[1.0]).is_err());

        let s = SourceConfig::default().uniforms(8, 100_000).unwrap();
        let m = moments(&s.values).unwrap();
        assert!((m.mean - 0.5).abs() < 0.005);
        assert!((m.variance - 1.0 / 12.0).abs() < 0.002);
    }

    #[test]
    fn reports_apply_thresholds() {
        let t = Thresholds::default();
        let r = ks_report(&[0.5], uniform_cdf, &t).unwrap();
        assert!(!r.pass);
        let grid: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_report(&grid, uniform_cdf, &t).unwrap().pass);
        assert!(!chi2_report(&grid, 10, &t).unwrap().pass); // too balanced
        assert!(acf_report(&grid, 1, &t).unwrap().pass);

        let mut buf = Vec::new();
        write_battery_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("test,statistic,threshold,pass\nks,"));
        assert!(text.trim_end().ends_with("false"));
    }

    proptest! {
        #[test]
        fn ks_bounded_and_order_free(mut xs in proptest::collection::vec(0.0f64..1.0, 1..60)) {
            let d = ks_statistic(&xs, uniform_cdf).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert!((d - ks_enumerate(&xs, uniform_cdf)).abs() < 1e-12);
            xs.reverse();
            prop_assert_eq!(d, ks_statistic(&xs, uniform_cdf).unwrap());
        }

        #[test]
        fn chi_square_order_free(mut xs in proptest::collection::vec(0.0f64..=1.0, 50..120)) {
            let a = chi_square_uniform(&xs, 10).unwrap();
            xs.sort_by(f64::total_cmp);
            prop_assert_eq!(a, chi_square_uniform(&xs, 10).unwrap());
        }

        #[test]
        fn acf_and_jb_ranges(xs in proptest::collection::vec(-5.0f64..5.0, 10..80), lag in 0usize..9) {
            if let Ok(r) = autocorrelation(&xs, lag) {
                prop_assert!(r.abs() <= 1.0 + 1e-12);
            }
            if let Ok(jb) = jarque_bera(&xs) {
                prop_assert!(jb.statistic >= 0.0);
            }
        }
    }
}
