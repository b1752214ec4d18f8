//! Chaotic orbit -> uniform stream -> arbitrary law.
//!
//! A uniform stream is the orbit pushed through the CDF of the map's
//! invariant law. Any target law is then reached through its generalized
//! inverse `inf { x : F(x) >= u }`. Vectors with independent margins use one
//! orbit per coordinate, seeded from a master seed.

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use serde::Serialize;

use crate::dynamics::{derive_seed, orbit, ChaoticMap, Interval, Map1D, Orbit, OrbitConfig};
use crate::error::{Error, Result};
use crate::export::{fmt_f64, write_csv};
use crate::measures::InvariantLaw;
use crate::special::{normal_cdf, normal_quantile};
use crate::stattests::{moments, Moments};

/// Absolute tolerance of the bisection fallback in [`generalized_inverse`].
pub const BISECTION_TOLERANCE: f64 = 1e-12;
pub const BISECTION_MAX_ITER: usize = 200;
/// Box-Muller floor on the radial uniform.
pub const BOX_MULLER_FLOOR: f64 = 1e-300;
/// Stride used for Gaussian sources. Uniformized logistic iterates satisfy
/// `u[n+1] = tent(u[n])` exactly, so Box-Muller on adjacent values is badly
/// skewed; 16 steps apart the pairs are indistinguishable from independent
/// at the sample sizes we test.
pub const GAUSSIAN_STRIDE: usize = 16;
pub const DEFAULT_BURN_IN: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub map: String,
    pub burn_in: usize,
    pub stride: usize,
}

impl Provenance {
    pub fn of<M: ChaoticMap>(orbit: &Orbit<M>) -> Self {
        Provenance {
            seed: orbit.config.seed,
            map: orbit.map.label(),
            burn_in: orbit.config.burn_in,
            stride: orbit.config.stride,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformStream {
    pub provenance: Provenance,
    pub law: InvariantLaw,
    pub values: Vec<f64>,
}

impl UniformStream {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Applies the invariant CDF to every orbit value, preserving order.
pub fn uniformize(orbit: &Orbit<Map1D>, law: &InvariantLaw) -> Result<UniformStream> {
    let support = law.support();
    let values = orbit
        .values
        .iter()
        .map(|&x| {
            if support.contains(x) {
                Ok(law.cdf(x))
            } else {
                Err(Error::SupportMismatch {
                    law: law.name().to_string(),
                    value: x,
                })
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(UniformStream {
        provenance: Provenance::of(orbit),
        law: *law,
        values,
    })
}

/// Where uniform streams come from: a catalog map, its invariant law, and
/// how the orbit is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceConfig {
    pub map: Map1D,
    pub law: InvariantLaw,
    pub burn_in: usize,
    pub stride: usize,
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig {
            map: Map1D::Logistic { lambda: 4.0 },
            law: InvariantLaw::Arcsine,
            burn_in: DEFAULT_BURN_IN,
            stride: 1,
        }
    }
}

impl SourceConfig {
    pub fn new(map: Map1D) -> Result<Self> {
        let law = InvariantLaw::for_map(&map)
            .ok_or_else(|| Error::Unsupported(format!("no closed-form invariant law for {}", map.label())))?;
        Ok(SourceConfig {
            map,
            law,
            ..SourceConfig::default()
        })
    }

    /// Logistic source spaced for Box-Muller pairs.
    pub fn for_normals() -> Self {
        SourceConfig {
            stride: GAUSSIAN_STRIDE,
            ..SourceConfig::default()
        }
    }

    pub fn stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    /// `n` uniforms from the orbit seeded with `seed`. Empty for `n = 0`.
    pub fn uniforms(&self, seed: u64, n: usize) -> Result<UniformStream> {
        if n == 0 {
            return Ok(UniformStream {
                provenance: Provenance {
                    seed,
                    map: self.map.label(),
                    burn_in: self.burn_in,
                    stride: self.stride,
                },
                law: self.law,
                values: Vec::new(),
            });
        }
        let cfg = OrbitConfig::new(seed, n).burn_in(self.burn_in).stride(self.stride);
        uniformize(&orbit(&self.map, &cfg)?, &self.law)
    }
}

// ---------------------------------------------------------------------------
// Target laws
// ---------------------------------------------------------------------------

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum SpecKind {
    Continuous {
        cdf: RealFn,
        quantile: Option<RealFn>,
        support: Interval,
    },
    /// Ordered atoms with cumulative probabilities (last entry exactly 1).
    Discrete { atoms: Vec<f64>, cumulative: Vec<f64> },
}

/// A target law, given by its CDF and optionally a closed-form quantile.
#[derive(Clone)]
pub struct DistributionSpec {
    name: String,
    kind: SpecKind,
}

impl fmt::Debug for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("DistributionSpec");
        d.field("name", &self.name);
        match &self.kind {
            SpecKind::Continuous { quantile, support, .. } => d
                .field("support", support)
                .field("closed_form_quantile", &quantile.is_some()),
            SpecKind::Discrete { atoms, cumulative } => d.field("atoms", atoms).field("cumulative", cumulative),
        }
        .finish()
    }
}

impl DistributionSpec {
    pub fn continuous<C>(name: impl Into<String>, support: Interval, cdf: C) -> Result<Self>
    where
        C: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(support.lo < support.hi) {
            return Err(Error::InvalidConfig(format!(
                "empty support [{}, {}]",
                support.lo, support.hi
            )));
        }
        Ok(DistributionSpec {
            name: name.into(),
            kind: SpecKind::Continuous {
                cdf: Arc::new(cdf),
                quantile: None,
                support,
            },
        })
    }

    /// Attaches a closed-form quantile to a continuous spec.
    pub fn with_quantile<Q>(mut self, q: Q) -> Self
    where
        Q: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if let SpecKind::Continuous { quantile, .. } = &mut self.kind {
            *quantile = Some(Arc::new(q));
        }
        self
    }

    pub fn discrete(name: impl Into<String>, atoms: Vec<f64>, probs: &[f64]) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != probs.len() {
            return Err(Error::InvalidConfig(format!(
                "{} atoms with {} probabilities",
                atoms.len(),
                probs.len()
            )));
        }
        if atoms.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidConfig("atoms must be strictly increasing".into()));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidConfig("negative probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!("probabilities sum to {total}")));
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc.min(1.0)
            })
            .collect();
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(DistributionSpec {
            name: name.into(),
            kind: SpecKind::Discrete { atoms, cumulative },
        })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        let spec = Self::continuous(format!("uniform({a},{b})"), Interval::new(a, b), move |x| {
            ((x - a) / (b - a)).clamp(0.0, 1.0)
        })?;
        Ok(spec.with_quantile(move |u| a + (b - a) * u))
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidConfig(format!("exponential rate {rate}")));
        }
        let spec = Self::continuous(
            format!("exponential({rate})"),
            Interval::new(0.0, f64::INFINITY),
            move |x| if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() },
        )?;
        Ok(spec.with_quantile(move |u| -(-u).ln_1p() / rate))
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
            return Err(Error::InvalidConfig(format!("normal({mean}, {sd})")));
        }
        let spec = Self::continuous(
            format!("normal({mean},{sd})"),
            Interval::new(f64::NEG_INFINITY, f64::INFINITY),
            move |x| normal_cdf((x - mean) / sd),
        )?;
        Ok(spec.with_quantile(move |u| mean + sd * normal_quantile(u)))
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidConfig(format!("bernoulli p = {p}")));
        }
        Self::discrete(format!("bernoulli({p})"), vec![0.0, 1.0], &[1.0 - p, p])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &SpecKind {
        &self.kind
    }

    pub fn support(&self) -> Interval {
        match &self.kind {
            SpecKind::Continuous { support, .. } => *support,
            SpecKind::Discrete { atoms, .. } => Interval::new(atoms[0], *atoms.last().unwrap()),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match &self.kind {
            SpecKind::Continuous { cdf, .. } => cdf(x),
            SpecKind::Discrete { atoms, cumulative } => {
                let k = atoms.partition_point(|&a| a <= x);
                if k == 0 {
                    0.0
                } else {
                    cumulative[k - 1]
                }
            }
        }
    }
}

/// `inf { x : F(x) >= u }`.
///
/// Uses the closed-form quantile when the spec has one; otherwise bisects
/// to [`BISECTION_TOLERANCE`], growing the bracket from `[-1, 1]` when the
/// support is unbounded. Discrete specs return the smallest atom whose
/// cumulative probability reaches `u`.
pub fn generalized_inverse(spec: &DistributionSpec, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain {
            what: "quantile level",
            value: u,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let (cdf, quantile, support) = match &spec.kind {
        SpecKind::Discrete { atoms, cumulative } => {
            let k = cumulative.partition_point(|&c| c < u);
            return Ok(atoms[k.min(atoms.len() - 1)]);
        }
        SpecKind::Continuous { cdf, quantile, support } => (cdf, quantile, support),
    };
    if u == 0.0 && support.lo == f64::NEG_INFINITY {
        return Err(Error::SupportLowerBound(spec.name.clone()));
    }
    if u == 1.0 && support.hi == f64::INFINITY {
        return Err(Error::SupportUpperBound(spec.name.clone()));
    }
    if let Some(q) = quantile {
        return Ok(q(u).clamp(support.lo, support.hi));
    }
    bisect_inverse(cdf.as_ref(), *support, u, &spec.name)
}

fn bisect_inverse(cdf: &dyn Fn(f64) -> f64, support: Interval, u: f64, name: &str) -> Result<f64> {
    let never = || Error::InvalidConfig(format!("cdf of {name} never brackets {u}"));
    let (mut a, mut b) = match (support.lo.is_finite(), support.hi.is_finite()) {
        (true, true) => (support.lo, support.hi),
        (true, false) => (support.lo, support.lo + 1.0),
        (false, true) => (support.hi - 1.0, support.hi),
        (false, false) => (-1.0, 1.0),
    };
    if support.lo.is_finite() && cdf(a) >= u {
        return Ok(a);
    }
    let mut width = (b - a).max(1.0);
    while cdf(a) >= u {
        a -= width;
        width *= 2.0;
        if !a.is_finite() {
            return Err(never());
        }
    }
    let mut width = (b - a).max(1.0);
    while cdf(b) < u {
        b += width;
        width *= 2.0;
        if !b.is_finite() {
            return Err(never());
        }
    }
    for _ in 0..BISECTION_MAX_ITER {
        if b - a <= BISECTION_TOLERANCE {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if cdf(m) >= u {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(b)
}

// ---------------------------------------------------------------------------
// Sample batches
// ---------------------------------------------------------------------------

/// Samples stored row-major, `dim` reals per row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBatch {
    pub spec: String,
    pub dim: usize,
    pub values: Vec<f64>,
    pub provenance: Provenance,
    /// Trailing uniforms left unused (odd-length Box-Muller input).
    pub dropped: usize,
}

impl SampleBatch {
    pub fn rows(&self) -> usize {
        self.values.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Values of coordinate `j`, in row order.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().skip(j).step_by(self.dim).copied().collect()
    }

    /// One row per sample; header `value` or `x0,x1,...`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let header: Vec<String> = if self.dim == 1 {
            vec!["value".to_string()]
        } else {
            (0..self.dim).map(|j| format!("x{j}")).collect()
        };
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = self
            .values
            .chunks(self.dim.max(1))
            .map(|r| r.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>());
        write_csv(out, &header, rows)
    }

    pub fn summary(&self) -> BatchSummary {
        BatchSummary {
            spec: self.spec.clone(),
            n: self.rows(),
            dim: self.dim,
            dropped: self.dropped,
            moments: (0..self.dim).map(|j| moments(&self.column(j)).ok()).collect(),
            provenance: self.provenance.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub spec: String,
    pub n: usize,
    pub dim: usize,
    pub dropped: usize,
    /// Per coordinate; `None` when fewer than two rows.
    pub moments: Vec<Option<Moments>>,
    pub provenance: Provenance,
}

/// Maps the first `n` uniforms through the generalized inverse of `spec`.
pub fn sample_law(stream: &UniformStream, spec: &DistributionSpec, n: usize) -> Result<SampleBatch> {
    if stream.len() < n {
        return Err(Error::InsufficientData {
            needed: n,
            got: stream.len(),
        });
    }
    let values = stream.values[..n]
        .iter()
        .map(|&u| generalized_inverse(spec, u))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SampleBatch {
        spec: spec.name().to_string(),
        dim: 1,
        values,
        provenance: stream.provenance.clone(),
        dropped: 0,
    })
}

/// Box-Muller: each pair `(u1, u2)` becomes two independent standard
/// normals. An odd trailing uniform is dropped and counted in `dropped`.
pub fn gaussian_pairs(stream: &UniformStream) -> SampleBatch {
    let mut values = Vec::with_capacity(stream.len());
    for pair in stream.values.chunks_exact(2) {
        let (z1, z2) = box_muller(pair[0], pair[1]);
        values.push(z1);
        values.push(z2);
    }
    SampleBatch {
        spec: "normal(0,1)".into(),
        dim: 1,
        values,
        provenance: stream.provenance.clone(),
        dropped: stream.len() % 2,
    }
}

#[inline]
pub fn box_muller(u1: f64, u2: f64) -> (f64, f64) {
    let r = (-2.0 * u1.max(BOX_MULLER_FLOOR).ln()).sqrt();
    let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
    (r * c, r * s)
}

/// Vectors with independent margins (product copula): coordinate `i` comes
/// from its own orbit seeded with `derive_seed(master_seed, i)`.
pub fn multivariate_sample(
    master_seed: u64,
    marginals: &[DistributionSpec],
    n: usize,
    source: &SourceConfig,
) -> Result<SampleBatch> {
    let d = marginals.len();
    if d == 0 {
        return Err(Error::InvalidConfig("dimension must be >= 1".into()));
    }
    let columns = marginals
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let stream = source.uniforms(derive_seed(master_seed, i as u64), n)?;
            sample_law(&stream, spec, n).map(|b| b.values)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let mut values = Vec::with_capacity(n * d);
    for r in 0..n {
        values.extend(columns.iter().map(|c| c[r]));
    }
    let names: Vec<&str> = marginals.iter().map(|m| m.name()).collect();
    Ok(SampleBatch {
        spec: names.join(" x "),
        dim: d,
        values,
        provenance: Provenance {
            seed: master_seed,
            map: source.map.label(),
            burn_in: source.burn_in,
            stride: source.stride,
        },
        dropped: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::orbit_from;
    use crate::stattests::ks_statistic;
    use proptest::prelude::*;

    fn logistic_stream(seed: u64, n: usize) -> UniformStream {
        SourceConfig::default().uniforms(seed, n).unwrap()
    }

    #[test]
    fn uniformize_examples() {
        let map = Map1D::Logistic { lambda: 4.0 };
        let o = orbit_from(&map, 0.75, &OrbitConfig::new(1, 2)).unwrap();
        let s = uniformize(&o, &InvariantLaw::Arcsine).unwrap();
        assert!((s.values[0] - InvariantLaw::Arcsine.cdf(0.75)).abs() < 1e-15);
        assert!((InvariantLaw::Arcsine.cdf(0.5) - 0.5).abs() < 1e-15);

        let mut o = orbit(&map, &OrbitConfig::new(5, 100)).unwrap();
        o.values.sort_by(f64::total_cmp);
        let s = uniformize(&o, &InvariantLaw::Arcsine).unwrap();
        assert!(s.values.windows(2).all(|w| w[0] <= w[1]));

        let cheb = orbit(&Map1D::Chebyshev { k: 2 }, &OrbitConfig::new(5, 10)).unwrap();
        assert!(matches!(
            uniformize(&cheb, &InvariantLaw::Arcsine),
            Err(Error::SupportMismatch { .. })
        ));
    }

    #[test]
    fn uniformized_logistic_passes_ks() {
        let s = logistic_stream(17, 100_000);
        let d = ks_statistic(&s.values, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d < 0.02, "KS = {d}");
    }

    #[test]
    fn tent_stream_is_its_own_orbit() {
        let src = SourceConfig::new(Map1D::Tent).unwrap();
        let s = src.uniforms(3, 40).unwrap();
        let o = orbit(&Map1D::Tent, &OrbitConfig::new(3, 40).burn_in(src.burn_in)).unwrap();
        assert_eq!(s.values, o.values);
    }

    #[test]
    fn no_law_for_generic_logistic() {
        assert!(SourceConfig::new(Map1D::Logistic { lambda: 3.9 }).is_err());
    }

    #[test]
    fn exponential_inverse() {
        let spec = DistributionSpec::exponential(1.0).unwrap();
        let u = 1.0 - (-1.0f64).exp();
        assert!((generalized_inverse(&spec, u).unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(generalized_inverse(&spec, 0.0).unwrap(), 0.0);
        assert!(matches!(
            generalized_inverse(&spec, 1.0),
            Err(Error::SupportUpperBound(_))
        ));
        assert!(generalized_inverse(&spec, 1.5).is_err());
        assert!(generalized_inverse(&spec, f64::NAN).is_err());
    }

    #[test]
    fn bernoulli_inverse_takes_the_infimum() {
        let spec = DistributionSpec::bernoulli(0.5).unwrap();
        assert_eq!(generalized_inverse(&spec, 0.3).unwrap(), 0.0);
        assert_eq!(generalized_inverse(&spec, 0.5).unwrap(), 0.0);
        assert_eq!(generalized_inverse(&spec, 0.7).unwrap(), 1.0);
        assert_eq!(generalized_inverse(&spec, 1.0).unwrap(), 1.0);
        assert_eq!(generalized_inverse(&spec, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn normal_bounds() {
        let spec = DistributionSpec::normal(0.0, 1.0).unwrap();
        assert!(matches!(
            generalized_inverse(&spec, 0.0),
            Err(Error::SupportLowerBound(_))
        ));
        assert!(matches!(
            generalized_inverse(&spec, 1.0),
            Err(Error::SupportUpperBound(_))
        ));
    }

    /// Logistic-type law on the whole line, with no closed-form quantile.
    fn logistic_law() -> DistributionSpec {
        DistributionSpec::continuous("logistic-law", Interval::new(f64::NEG_INFINITY, f64::INFINITY), |x| {
            1.0 / (1.0 + (-x).exp())
        })
        .unwrap()
    }

    #[test]
    fn bisection_inverts_cdf() {
        let specs = [
            logistic_law(),
            // Weibull(k = 2) on [0, inf), no quantile attached
            DistributionSpec::continuous("weibull", Interval::new(0.0, f64::INFINITY), |x| {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x * x).exp_m1()
                }
            })
            .unwrap(),
            // shifted far from the initial bracket
            DistributionSpec::continuous("far", Interval::new(f64::NEG_INFINITY, f64::INFINITY), |x| {
                normal_cdf(x - 1000.0)
            })
            .unwrap(),
        ];
        for spec in &specs {
            for i in 1..200 {
                let u = i as f64 / 200.0;
                let x = generalized_inverse(spec, u).unwrap();
                assert!((spec.cdf(x) - u).abs() < 1e-9, "{} u={u}", spec.name());
            }
        }
        // closed form for the logistic law: ln(u / (1 - u))
        let x = generalized_inverse(&specs[0], 0.9).unwrap();
        assert!((x - (0.9f64 / 0.1).ln()).abs() < 1e-11);
    }

    #[test]
    fn bisection_returns_infimum_on_flat_cdf() {
        // F is flat at 1/2 on [1, 2]: inf{x : F(x) >= 1/2} = 1
        let spec = DistributionSpec::continuous("gap", Interval::new(0.0, 3.0), |x| {
            if x < 1.0 {
                0.5 * x
            } else if x < 2.0 {
                0.5
            } else {
                (0.5 + 0.5 * (x - 2.0)).min(1.0)
            }
        })
        .unwrap();
        let x = generalized_inverse(&spec, 0.5).unwrap();
        assert!((x - 1.0).abs() < 1e-12);
        assert_eq!(generalized_inverse(&spec, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn invalid_specs() {
        assert!(DistributionSpec::discrete("d", vec![0.0, 1.0], &[0.3, 0.3]).is_err());
        assert!(DistributionSpec::discrete("d", vec![1.0, 0.0], &[0.5, 0.5]).is_err());
        assert!(DistributionSpec::discrete("d", vec![], &[]).is_err());
        assert!(DistributionSpec::exponential(0.0).is_err());
        assert!(DistributionSpec::normal(0.0, -1.0).is_err());
        assert!(DistributionSpec::bernoulli(1.2).is_err());
        assert!(DistributionSpec::uniform(1.0, 1.0).is_err());
    }

    #[test]
    fn sample_law_examples() {
        let s = logistic_stream(9, 1000);
        let id = sample_law(&s, &DistributionSpec::uniform(0.0, 1.0).unwrap(), 1000).unwrap();
        assert_eq!(id.values, s.values);
        let empty = sample_law(&s, &DistributionSpec::uniform(0.0, 1.0).unwrap(), 0).unwrap();
        assert!(empty.values.is_empty());
        assert!(matches!(
            sample_law(&s, &DistributionSpec::uniform(0.0, 1.0).unwrap(), 1001),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn exponential_mean_matches_birkhoff_oracle() {
        let n = 100_000;
        let src = SourceConfig::default();
        let s = src.uniforms(21, n).unwrap();
        let batch = sample_law(&s, &DistributionSpec::exponential(1.0).unwrap(), n).unwrap();
        let mean = batch.values.iter().sum::<f64>() / n as f64;

        // time average of -ln(1 - F(x)) along the raw orbit, composed by hand
        let raw = orbit(&src.map, &OrbitConfig::new(21, n).burn_in(src.burn_in)).unwrap();
        let oracle = raw
            .values
            .iter()
            .map(|&x| -(1.0 - 2.0 / std::f64::consts::PI * x.sqrt().asin()).ln())
            .sum::<f64>()
            / n as f64;
        assert!((mean - oracle).abs() < 1e-9);
        assert!((mean - 1.0).abs() < 0.03, "mean = {mean}");
    }

    #[test]
    fn box_muller_examples() {
        assert_eq!(box_muller(1.0, 0.3), (0.0, 0.0));
        let u1: f64 = 0.2;
        let (z1, z2) = box_muller(u1, 0.25);
        assert!(z1.abs() < 1e-15);
        assert!((z2 - (-2.0 * u1.ln()).sqrt()).abs() < 1e-15);
        assert!(box_muller(0.0, 0.0).0.is_finite());
    }

    #[test]
    fn gaussian_pairs_drop_odd_tail() {
        let s = logistic_stream(4, 7);
        let b = gaussian_pairs(&s);
        assert_eq!(b.values.len(), 6);
        assert_eq!(b.dropped, 1);
        let even = gaussian_pairs(&logistic_stream(4, 8));
        assert_eq!(even.dropped, 0);
    }

    #[test]
    fn chaotic_normals_have_standard_moments() {
        let s = SourceConfig::for_normals().uniforms(77, 100_000).unwrap();
        let z = gaussian_pairs(&s);
        let m = moments(&z.values).unwrap();
        assert!(m.mean.abs() < 0.02, "{m:?}");
        assert!((0.98..=1.02).contains(&m.variance), "{m:?}");
    }

    #[test]
    fn multivariate_examples() {
        let src = SourceConfig::default();
        let spec = DistributionSpec::exponential(2.0).unwrap();
        let one = multivariate_sample(5, std::slice::from_ref(&spec), 500, &src).unwrap();
        let direct = sample_law(&src.uniforms(derive_seed(5, 0), 500).unwrap(), &spec, 500).unwrap();
        assert_eq!(one.values, direct.values);
        assert!(multivariate_sample(5, &[], 10, &src).is_err());

        let n = 100_000;
        let u = DistributionSpec::uniform(0.0, 1.0).unwrap();
        let b = multivariate_sample(99, &[u.clone(), u.clone()], n, &src).unwrap();
        assert_eq!(b.rows(), n);
        let (x, y) = (b.column(0), b.column(1));
        let r = pearson(&x, &y);
        assert!(r.abs() < 0.02, "r = {r}");
        for col in [&x, &y] {
            assert!(ks_statistic(col, |t| t.clamp(0.0, 1.0)).unwrap() < 0.02);
        }
    }

    fn pearson(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        let mut syy = 0.0;
        for (a, b) in x.iter().zip(y) {
            sxy += (a - mx) * (b - my);
            sxx += (a - mx) * (a - mx);
            syy += (b - my) * (b - my);
        }
        sxy / (sxx * syy).sqrt()
    }

    #[test]
    fn pipeline_is_deterministic() {
        let src = SourceConfig::new(Map1D::Gauss).unwrap();
        let spec = DistributionSpec::normal(1.0, 2.0).unwrap();
        let a = multivariate_sample(12, std::slice::from_ref(&spec), 2000, &src).unwrap();
        let b = multivariate_sample(12, &[spec], 2000, &src).unwrap();
        let bits = |v: &SampleBatch| v.values.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn batch_csv_shape() {
        let src = SourceConfig::default();
        let u = DistributionSpec::uniform(0.0, 1.0).unwrap();
        let b = multivariate_sample(1, &[u.clone(), u], 3, &src).unwrap();
        let mut buf = Vec::new();
        b.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x0,x1");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1].split(',').count(), 2);
        let s = b.summary();
        assert_eq!((s.n, s.dim), (3, 2));
    }

    fn any_spec() -> impl Strategy<Value = DistributionSpec> {
        prop_oneof![
            (0.01f64..5.0).prop_map(|r| DistributionSpec::exponential(r).unwrap()),
            (-3.0f64..3.0, 0.1f64..4.0).prop_map(|(m, s)| DistributionSpec::normal(m, s).unwrap()),
            (0.0f64..1.0).prop_map(|p| DistributionSpec::bernoulli(p).unwrap()),
            Just(logistic_law()),
            proptest::collection::vec(0.01f64..1.0, 1..8).prop_map(|w| {
                let total: f64 = w.iter().sum();
                let probs: Vec<f64> = w.iter().map(|x| x / total).collect();
                let atoms: Vec<f64> = (0..probs.len()).map(|i| i as f64 * 1.5 - 2.0).collect();
                DistributionSpec::discrete("mix", atoms, &probs).unwrap()
            }),
        ]
    }

    proptest! {
        #[test]
        fn inverse_is_monotone(spec in any_spec(), a in 1e-9f64..1.0, b in 1e-9f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let hi = hi.min(1.0 - 1e-9);
            let lo = lo.min(hi);
            prop_assert!(generalized_inverse(&spec, lo).unwrap() <= generalized_inverse(&spec, hi).unwrap());
        }

        #[test]
        fn discrete_inverse_is_the_infimum(w in proptest::collection::vec(0.01f64..1.0, 1..10), u in 0.0f64..=1.0) {
            let total: f64 = w.iter().sum();
            let probs: Vec<f64> = w.iter().map(|x| x / total).collect();
            let atoms: Vec<f64> = (0..probs.len()).map(|i| i as f64).collect();
            let spec = DistributionSpec::discrete("d", atoms.clone(), &probs).unwrap();
            let x = generalized_inverse(&spec, u).unwrap();
            prop_assert!(spec.cdf(x) >= u);
            for &a in atoms.iter().filter(|&&a| a < x) {
                prop_assert!(spec.cdf(a) < u);
            }
        }
    }
}
