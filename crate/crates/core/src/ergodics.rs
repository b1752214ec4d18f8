//! Ergodic probes on orbits: Birkhoff averages, visit histograms,
//! grid coverage, two-orbit divergence and fixed points of the Gauss map.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{ChaoticMap, Map1D, Orbit, StateCheck};
use crate::error::{Error, Result};
use crate::export::{fmt_f64, write_csv};
use crate::measures::{DensityHistogram, InvariantLaw};
use crate::quad::integrate_pieces;

/// Relative tolerance of the quadrature behind Birkhoff references.
pub const REFERENCE_TOLERANCE: f64 = 1e-9;
/// Divergence slopes are fitted while `d < SATURATION * diameter`.
pub const SATURATION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Observable {
    /// `1` on `[lo, hi]`, `0` elsewhere.
    Indicator {
        lo: f64,
        hi: f64,
    },
    Constant {
        value: f64,
    },
    /// `x^k`.
    Power {
        k: i32,
    },
}

impl Observable {
    pub fn id(&self) -> String {
        match *self {
            Observable::Indicator { lo, hi } => format!("indicator[{lo},{hi}]"),
            Observable::Constant { value } => format!("constant({value})"),
            Observable::Power { k } => format!("x^{k}"),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Observable::Indicator { lo, hi } => {
                if x >= lo && x <= hi {
                    1.0
                } else {
                    0.0
                }
            }
            Observable::Constant { value } => value,
            Observable::Power { k } => x.powi(k),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Observable::Indicator { lo, hi } => vec![lo, hi],
            _ => Vec::new(),
        }
    }

    /// `int f dmu`, by quadrature of `f(F^-1(u))` over `(0, 1)`. In this
    /// form the density's endpoint singularities never reach the integrand.
    pub fn expectation(&self, law: &InvariantLaw) -> f64 {
        let breaks: Vec<f64> = self.breakpoints().iter().map(|&b| law.cdf(b)).collect();
        integrate_pieces(
            |u| law.quantile(u).map_or(f64::NAN, |x| self.eval(x)),
            0.0,
            1.0,
            &breaks,
            REFERENCE_TOLERANCE,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableReport {
    pub observable: String,
    pub map: String,
    pub time_average: f64,
    /// Space average under the invariant law, when the map has one.
    pub reference: Option<f64>,
    pub abs_error: Option<f64>,
    pub n: usize,
}

pub fn birkhoff_average(orbit: &Orbit<Map1D>, f: &Observable) -> Result<ObservableReport> {
    if orbit.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let n = orbit.len();
    let time_average = orbit.values.iter().map(|&x| f.eval(x)).sum::<f64>() / n as f64;
    let reference = InvariantLaw::for_map(&orbit.map).map(|law| f.expectation(&law));
    Ok(ObservableReport {
        observable: f.id(),
        map: orbit.map.label(),
        time_average,
        reference,
        abs_error: reference.map(|r| (time_average - r).abs()),
        n,
    })
}

fn bin_index(x: f64, lo: f64, width: f64, bins: usize) -> usize {
    (((x - lo) / width * bins as f64) as usize).min(bins - 1)
}

/// Visit frequencies on `bins` equal bins over the map's domain.
pub fn visit_density(orbit: &Orbit<Map1D>, bins: usize) -> Result<DensityHistogram> {
    if bins == 0 {
        return Err(Error::InvalidConfig("bins must be >= 1".into()));
    }
    if orbit.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let d = orbit.map.domain();
    let mut counts = vec![0usize; bins];
    for &x in &orbit.values {
        counts[bin_index(x, d.lo, d.width(), bins)] += 1;
    }
    let n = orbit.len() as f64;
    let masses = counts.iter().map(|&c| c as f64 / n).collect();
    DensityHistogram::new(DensityHistogram::uniform_edges(d, bins), masses)
}

/// Fraction of the `bins` equal bins visited at least once.
pub fn transitivity_probe(orbit: &Orbit<Map1D>, bins: usize) -> Result<f64> {
    if bins == 0 {
        return Err(Error::InvalidConfig("bins must be >= 1".into()));
    }
    let d = orbit.map.domain();
    let mut seen = vec![false; bins];
    for &x in &orbit.values {
        seen[bin_index(x, d.lo, d.width(), bins)] = true;
    }
    Ok(seen.iter().filter(|&&s| s).count() as f64 / bins as f64)
}

// ---------------------------------------------------------------------------
// Sensitivity
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceProfile {
    pub map: String,
    pub epsilon: f64,
    /// `d(T^n x0, T^n y0)` for `n = 0..=horizon`.
    pub distances: Vec<f64>,
    /// Least-squares slope of `ln d_n` over the pre-saturation window.
    pub exponent_estimate: Option<f64>,
    /// Number of leading distances used by the fit.
    pub window: usize,
    /// Every distance is zero.
    pub degenerate: bool,
}

impl DivergenceProfile {
    /// Rows `n, distance`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let rows = self
            .distances
            .iter()
            .enumerate()
            .map(|(n, d)| vec![n.to_string(), fmt_f64(*d)]);
        write_csv(out, &["n", "distance"], rows)
    }
}

/// Follows `x0` and a copy displaced by `epsilon` for `horizon` steps.
pub fn sensitivity_divergence<M: ChaoticMap>(
    map: &M,
    x0: M::State,
    epsilon: f64,
    horizon: usize,
) -> Result<DivergenceProfile> {
    if !(epsilon > 0.0 && epsilon < map.diameter()) {
        return Err(Error::InvalidConfig(format!("separation {epsilon} out of range")));
    }
    if horizon < 10 {
        return Err(Error::InvalidConfig("horizon must be >= 10".into()));
    }
    let (mut x, mut y) = (x0, map.displace(&x0, epsilon));
    let mut distances = Vec::with_capacity(horizon + 1);
    distances.push(map.distance(&x, &y));
    for step in 1..=horizon {
        x = map.step(x);
        y = map.step(y);
        for s in [&x, &y] {
            if map.check(s) == StateCheck::Escaped {
                return Err(Error::Divergence {
                    step,
                    state: M::headline(s),
                });
            }
        }
        distances.push(map.distance(&x, &y));
    }
    let limit = SATURATION * map.diameter();
    let window = distances.iter().take_while(|&&d| d > 0.0 && d < limit).count();
    let exponent_estimate = if window >= 2 {
        let logs: Vec<f64> = distances[..window].iter().map(|d| d.ln()).collect();
        Some(ls_slope(&logs))
    } else {
        None
    };
    Ok(DivergenceProfile {
        map: map.label(),
        epsilon,
        degenerate: distances.iter().all(|&d| d == 0.0),
        distances,
        exponent_estimate,
        window,
    })
}

/// Slope of `ys` against `0, 1, 2, ...`.
fn ls_slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivitySweep {
    pub map: String,
    pub epsilon: f64,
    pub horizon: usize,
    pub seeds: Vec<u64>,
    pub exponents: Vec<Option<f64>>,
    /// Mean over the seeds with a defined exponent.
    pub mean_exponent: Option<f64>,
}

/// [`sensitivity_divergence`] from each seed's starting state, run in
/// parallel; results keep seed order.
pub fn sensitivity_sweep<M>(map: &M, seeds: &[u64], epsilon: f64, horizon: usize) -> Result<SensitivitySweep>
where
    M: ChaoticMap + Sync,
    M::State: Send,
{
    let exponents = seeds
        .par_iter()
        .map(|&s| sensitivity_divergence(map, map.initial_state(s), epsilon, horizon).map(|p| p.exponent_estimate))
        .collect::<Result<Vec<_>>>()?;
    let defined: Vec<f64> = exponents.iter().flatten().copied().collect();
    Ok(SensitivitySweep {
        map: map.label(),
        epsilon,
        horizon,
        seeds: seeds.to_vec(),
        mean_exponent: (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64),
        exponents,
    })
}

// ---------------------------------------------------------------------------
// Gauss fixed points
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicPoint {
    pub k: u32,
    pub x: f64,
    /// `|T(x) - x|`.
    pub residual: f64,
}

/// Fixed points `x_k = (-k + sqrt(k^2 + 4)) / 2` of the Gauss map, the
/// roots of `x^2 + kx - 1 = 0` in `(1/(k+1), 1/k)`.
pub fn gauss_periodic_points(k_max: u32) -> Result<Vec<PeriodicPoint>> {
    if k_max == 0 {
        return Err(Error::InvalidConfig("k_max must be >= 1".into()));
    }
    (1..=k_max)
        .map(|k| {
            let kf = k as f64;
            // rationalized form, free of cancellation for large k
            let x = 2.0 / (kf + (kf * kf + 4.0).sqrt());
            let residual = (Map1D::Gauss.forward(x) - x).abs();
            if residual > 1e-12 || (1.0 / x).floor() as u32 != k {
                return Err(Error::Singular(residual));
            }
            Ok(PeriodicPoint { k, x, residual })
        })
        .collect()
}
