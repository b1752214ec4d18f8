//! Geometric Brownian motion driven by chaos-derived Gaussians.
//!
//! Paths are stepped exactly: `S_t = S0 exp((mu - sigma^2/2) t + sigma W_t)`
//! with `W` accumulated from `sqrt(dt) Z` on the time grid.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::derive_seed;
use crate::error::{Error, Result};
use crate::export::{fmt_f64, write_csv};
use crate::randgen::{gaussian_pairs, SourceConfig};
use crate::special::normal_cdf;
use crate::stattests::{jarque_bera, ks_statistic, moments, Moments, TestReport, Threshold, Thresholds};

/// Smallest sample accepted by [`normality_report`].
pub const MIN_NORMALITY_SAMPLES: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GbmConfig {
    pub s0: f64,
    pub mu: f64,
    pub sigma: f64,
    /// Horizon `T`.
    pub t: f64,
    pub steps: usize,
    pub n_paths: usize,
    pub master_seed: u64,
    pub source: SourceConfig,
}

impl GbmConfig {
    pub fn new(s0: f64, mu: f64, sigma: f64, t: f64, steps: usize, n_paths: usize, master_seed: u64) -> Self {
        GbmConfig {
            s0,
            mu,
            sigma,
            t,
            steps,
            n_paths,
            master_seed,
            source: SourceConfig::for_normals(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.s0 > 0.0 && self.s0.is_finite()) {
            return bad(format!("S0 = {} must be positive", self.s0));
        }
        if !self.mu.is_finite() {
            return bad(format!("mu = {}", self.mu));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma = {} must be nonnegative", self.sigma));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return bad(format!("T = {} must be positive", self.t));
        }
        if self.steps == 0 || self.n_paths == 0 {
            return bad("steps and paths must be >= 1".into());
        }
        if self.source.stride == 0 {
            return bad("source stride must be >= 1".into());
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t / self.steps as f64
    }

    pub fn drift(&self) -> f64 {
        self.mu - 0.5 * self.sigma * self.sigma
    }

    pub fn times(&self) -> Vec<f64> {
        let mut times: Vec<f64> = (0..=self.steps)
            .map(|j| self.t * j as f64 / self.steps as f64)
            .collect();
        times[self.steps] = self.t;
        times
    }

    /// Seed of path `i`.
    pub fn path_seed(&self, i: usize) -> u64 {
        derive_seed(self.master_seed, i as u64)
    }

    /// `steps` standard normals for path `i`.
    fn normals(&self, i: usize) -> Result<Vec<f64>> {
        let n = self.steps + self.steps % 2;
        let stream = self.source.uniforms(self.path_seed(i), n)?;
        let mut z = gaussian_pairs(&stream).values;
        z.truncate(self.steps);
        Ok(z)
    }

    /// Prices of path `i` on [`GbmConfig::times`].
    pub fn path(&self, i: usize, times: &[f64]) -> Result<Vec<f64>> {
        let z = self.normals(i)?;
        let scale = self.sigma * self.dt().sqrt();
        let drift = self.drift();
        let mut w = 0.0;
        let mut prices = Vec::with_capacity(times.len());
        prices.push(self.s0);
        for (zj, &t) in z.iter().zip(&times[1..]) {
            w += zj;
            prices.push(self.s0 * (drift * t + scale * w).exp());
        }
        Ok(prices)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSet {
    pub config: GbmConfig,
    pub times: Vec<f64>,
    pub paths: Vec<Vec<f64>>,
}

impl PathSet {
    /// Rows `time, path_id, price`, path by path.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let rows = self.paths.iter().enumerate().flat_map(|(id, p)| {
            self.times
                .iter()
                .zip(p)
                .map(move |(t, s)| vec![fmt_f64(*t), id.to_string(), fmt_f64(*s)])
        });
        write_csv(out, &["time", "path_id", "price"], rows)
    }

    pub fn terminal_values(&self) -> Vec<f64> {
        self.paths.iter().map(|p| *p.last().unwrap()).collect()
    }
}

/// Every path in full. Paths are generated in parallel, each from its own
/// seed, and stored in path order.
pub fn gbm_paths(config: &GbmConfig) -> Result<PathSet> {
    config.validate()?;
    let times = config.times();
    let paths = (0..config.n_paths)
        .into_par_iter()
        .map(|i| config.path(i, &times))
        .collect::<Result<Vec<_>>>()?;
    Ok(PathSet {
        config: *config,
        times,
        paths,
    })
}

/// `S_T` of every path without keeping the paths.
pub fn gbm_terminal_values(config: &GbmConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let times = config.times();
    (0..config.n_paths)
        .into_par_iter()
        .map(|i| config.path(i, &times).map(|p| p[config.steps]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GbmSummary {
    pub n_paths: usize,
    pub mean_terminal: f64,
    /// `S0 e^(mu T)`.
    pub expected_terminal: f64,
    pub mean_ratio: f64,
    /// Sample variance of `ln(S_T / S0)`.
    pub log_return_variance: f64,
    /// `sigma^2 T`.
    pub expected_log_variance: f64,
    /// `None` when `sigma = 0`.
    pub variance_ratio: Option<f64>,
}

/// Moment checks on terminal values, summed in path order.
pub fn summarize_terminal(config: &GbmConfig, terminal: &[f64]) -> Result<GbmSummary> {
    let n = terminal.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let mean_terminal = terminal.iter().sum::<f64>() / n as f64;
    let logs: Vec<f64> = terminal.iter().map(|s| (s / config.s0).ln()).collect();
    let log_return_variance = moments(&logs)?.variance;
    let expected_terminal = config.s0 * (config.mu * config.t).exp();
    let expected_log_variance = config.sigma * config.sigma * config.t;
    Ok(GbmSummary {
        n_paths: n,
        mean_terminal,
        expected_terminal,
        mean_ratio: mean_terminal / expected_terminal,
        log_return_variance,
        expected_log_variance,
        variance_ratio: (expected_log_variance > 0.0).then(|| log_return_variance / expected_log_variance),
    })
}

/// Log-increments rescaled to standard normals:
/// `(ln(S_{j+1}/S_j) - drift dt) / (sigma sqrt(dt))`.
pub fn standardized_increments(paths: &PathSet) -> Result<Vec<f64>> {
    let c = &paths.config;
    if c.sigma == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let times = &paths.times;
    let scale = c.sigma * c.dt().sqrt();
    let drift = c.drift();
    Ok(paths
        .paths
        .iter()
        .flat_map(|p| {
            p.windows(2)
                .zip(times.windows(2))
                .map(move |(s, t)| ((s[1] / s[0]).ln() - drift * (t[1] - t[0])) / scale)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityReport {
    pub n: usize,
    pub moments: Moments,
    pub reports: Vec<TestReport>,
    pub pass: bool,
}

/// Moments, KS against the standard normal and Jarque-Bera, judged by `t`.
pub fn normality_report(samples: &[f64], t: &Thresholds) -> Result<NormalityReport> {
    let n = samples.len();
    if n < MIN_NORMALITY_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_NORMALITY_SAMPLES,
            got: n,
        });
    }
    let jb = jarque_bera(samples)?;
    let m = moments(samples)?;
    let reports = vec![
        TestReport::new("ks-normal", ks_statistic(samples, normal_cdf)?, Threshold::Max(t.ks), n),
        TestReport::new("jarque-bera", jb.statistic, Threshold::Max(t.jarque_bera_max(n)), n),
        TestReport::new(
            "skewness",
            jb.skewness,
            Threshold::Within {
                lo: -t.skewness_abs,
                hi: t.skewness_abs,
            },
            n,
        ),
        TestReport::new(
            "excess-kurtosis",
            jb.excess_kurtosis,
            Threshold::Within {
                lo: -t.excess_kurtosis_abs,
                hi: t.excess_kurtosis_abs,
            },
            n,
        ),
    ];
    Ok(NormalityReport {
        n,
        moments: m,
        pass: reports.iter().all(|r| r.pass),
        reports,
    })
}
