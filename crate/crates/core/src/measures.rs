//! Invariant laws of the 1D catalog, Frobenius-Perron residuals, and the
//! push-forward of histogram measures.
//!
//! CDFs and quantiles are closed forms (arcsine and base-2 log); quadrature
//! only appears in tests and in reference values for ergodic averages.

use std::f64::consts::{LN_2, PI};
use std::io::{self, Write};

use serde::Serialize;

use crate::dynamics::{ChaoticMap, Interval, Map1D};
use crate::error::{check_interval, Error, Result};
use crate::export::{fmt_f64, write_csv};

/// Default number of Gauss-map branches summed in partial mode.
pub const GAUSS_TRUNCATION: usize = 10_000;
/// `|T'|` below this at a preimage makes the Frobenius-Perron term singular.
pub const SINGULAR_DERIVATIVE: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

/// `1 / (pi sqrt(x(1-x)))` on the open unit interval, 0 elsewhere.
pub fn logistic_density(x: f64) -> f64 {
    if x > 0.0 && x < 1.0 {
        1.0 / (PI * (x * (1.0 - x)).sqrt())
    } else {
        0.0
    }
}

pub fn logistic_cdf(x: f64) -> Result<f64> {
    check_interval("logistic cdf argument", x, 0.0, 1.0)?;
    Ok(2.0 / PI * x.sqrt().asin())
}

pub fn logistic_quantile(u: f64) -> Result<f64> {
    check_interval("logistic quantile level", u, 0.0, 1.0)?;
    let s = (0.5 * PI * u).sin();
    Ok((s * s).min(1.0))
}

pub fn gauss_density(x: f64) -> Result<f64> {
    check_interval("gauss density argument", x, 0.0, 1.0)?;
    Ok(1.0 / (LN_2 * (1.0 + x)))
}

pub fn gauss_cdf(x: f64) -> Result<f64> {
    check_interval("gauss cdf argument", x, 0.0, 1.0)?;
    Ok(x.ln_1p() / LN_2)
}

pub fn gauss_quantile(u: f64) -> Result<f64> {
    check_interval("gauss quantile level", u, 0.0, 1.0)?;
    Ok((u * LN_2).exp_m1().min(1.0))
}

/// `1 / (pi sqrt(1 - x^2))` on (-1, 1), 0 elsewhere.
pub fn chebyshev_density(x: f64) -> f64 {
    if x > -1.0 && x < 1.0 {
        1.0 / (PI * ((1.0 - x) * (1.0 + x)).sqrt())
    } else {
        0.0
    }
}

/// Preimages of `y` under `4x(1-x)`; `{0.5}` for the double root at 1.
pub fn logistic_preimages(y: f64) -> Result<Vec<f64>> {
    check_interval("logistic preimage target", y, 0.0, 1.0)?;
    let s = (1.0 - y).sqrt();
    if s == 0.0 {
        Ok(vec![0.5])
    } else {
        Ok(vec![0.5 * (1.0 - s), 0.5 * (1.0 + s)])
    }
}

/// `1/(y + p)` for `p = 1..=p_max`, one preimage per branch.
pub fn gauss_preimages(y: f64, p_max: usize) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&y) {
        return Err(Error::Domain {
            what: "gauss preimage target",
            value: y,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if p_max == 0 {
        return Err(Error::InvalidConfig("p_max must be >= 1".into()));
    }
    Ok((1..=p_max).map(|p| 1.0 / (y + p as f64)).collect())
}

// ---------------------------------------------------------------------------
// Invariant laws
// ---------------------------------------------------------------------------

/// Absolutely continuous invariant law of a catalog map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvariantLaw {
    /// Arcsine law on [0, 1]; invariant for the logistic map at lambda = 4.
    Arcsine,
    /// Gauss measure `dx / (ln 2 (1 + x))` on [0, 1].
    GaussKuzmin,
    /// Lebesgue measure on [0, 1]; invariant for the tent map.
    Uniform,
    /// Arcsine law on [-1, 1]; invariant for every Chebyshev map.
    ChebyshevArcsine,
}

impl InvariantLaw {
    /// The law shipped for `map`, if it has a known closed form.
    pub fn for_map(map: &Map1D) -> Option<Self> {
        match *map {
            Map1D::Logistic { lambda: 4.0 } => Some(InvariantLaw::Arcsine),
            Map1D::Logistic { .. } => None,
            Map1D::Gauss => Some(InvariantLaw::GaussKuzmin),
            Map1D::Tent => Some(InvariantLaw::Uniform),
            Map1D::Chebyshev { .. } => Some(InvariantLaw::ChebyshevArcsine),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InvariantLaw::Arcsine => "arcsine",
            InvariantLaw::GaussKuzmin => "gauss-kuzmin",
            InvariantLaw::Uniform => "uniform",
            InvariantLaw::ChebyshevArcsine => "chebyshev-arcsine",
        }
    }

    pub fn support(&self) -> Interval {
        match self {
            InvariantLaw::ChebyshevArcsine => Interval::new(-1.0, 1.0),
            _ => Interval::UNIT,
        }
    }

    /// Density; 0 outside the support and at singular endpoints.
    pub fn density(&self, x: f64) -> f64 {
        match self {
            InvariantLaw::Arcsine => logistic_density(x),
            InvariantLaw::GaussKuzmin => gauss_density(x).unwrap_or(0.0),
            InvariantLaw::Uniform => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            InvariantLaw::ChebyshevArcsine => chebyshev_density(x),
        }
    }

    /// CDF, extended by 0 below and 1 above the support.
    pub fn cdf(&self, x: f64) -> f64 {
        let s = self.support();
        if x <= s.lo {
            return 0.0;
        }
        if x >= s.hi {
            return 1.0;
        }
        match self {
            InvariantLaw::Arcsine => 2.0 / PI * x.sqrt().asin(),
            InvariantLaw::GaussKuzmin => x.ln_1p() / LN_2,
            InvariantLaw::Uniform => x,
            InvariantLaw::ChebyshevArcsine => 0.5 + x.asin() / PI,
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_interval("quantile level", u, 0.0, 1.0)?;
        Ok(match self {
            InvariantLaw::Arcsine => logistic_quantile(u)?,
            InvariantLaw::GaussKuzmin => gauss_quantile(u)?,
            InvariantLaw::Uniform => u,
            InvariantLaw::ChebyshevArcsine => (PI * (u - 0.5)).sin(),
        })
    }

    /// Breakpoints where the density is non-smooth, for quadrature.
    pub fn breakpoints(&self) -> Vec<f64> {
        let s = self.support();
        vec![s.lo, s.hi]
    }
}

// ---------------------------------------------------------------------------
// Frobenius-Perron residual
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FpResidual {
    pub y: f64,
    /// `|sum rho(x)/|T'(x)| - rho(y)|` over the evaluated preimages.
    pub residual: f64,
    /// Bound on the omitted terms of a truncated countable sum (0 if exact).
    pub tail_bound: f64,
}

/// Residual of the Frobenius-Perron equation for `law` under `map` at `y`.
///
/// For the Gauss map, `truncation = 0` selects the exact telescoping sum
/// `sum_p 1/((y+p)(y+p+1)) = 1/(y+1)`; otherwise the first `truncation`
/// branches are summed and the tail bound `1/((y+P+1) ln 2)` is reported.
/// Other maps have finitely many preimages and ignore `truncation`.
pub fn fp_residual(map: &Map1D, law: &InvariantLaw, y: f64, truncation: usize) -> Result<FpResidual> {
    if map.domain() != law.support() {
        return Err(Error::Unsupported(format!(
            "{} law on a {} map",
            law.name(),
            map.name()
        )));
    }
    let s = law.support();
    if !(y > s.lo && y < s.hi) {
        return Err(Error::Domain {
            what: "frobenius-perron point",
            value: y,
            lo: s.lo,
            hi: s.hi,
        });
    }
    let target = law.density(y);
    if matches!(map, Map1D::Gauss) && truncation == 0 {
        if *law != InvariantLaw::GaussKuzmin {
            return Err(Error::Unsupported("exact mode needs the Gauss-Kuzmin law".into()));
        }
        let sum = 1.0 / (LN_2 * (y + 1.0));
        return Ok(FpResidual {
            y,
            residual: (sum - target).abs(),
            tail_bound: 0.0,
        });
    }
    let mut sum = 0.0;
    for x in map.preimages(y, truncation.max(1))? {
        let slope = map.derivative(x).abs();
        if slope < SINGULAR_DERIVATIVE {
            return Err(Error::Singular(y));
        }
        sum += law.density(x) / slope;
    }
    let tail_bound = match map {
        Map1D::Gauss => 1.0 / ((y + truncation as f64 + 1.0) * LN_2),
        _ => 0.0,
    };
    Ok(FpResidual {
        y,
        residual: (sum - target).abs(),
        tail_bound,
    })
}

/// `n` evenly spaced points strictly inside `support` (cell midpoints).
pub fn interior_grid(support: Interval, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| support.lo + support.width() * (i as f64 + 0.5) / n as f64)
        .collect()
}

// ---------------------------------------------------------------------------
// Histogram measures
// ---------------------------------------------------------------------------

/// A probability measure with piecewise-constant density on bins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityHistogram {
    edges: Vec<f64>,
    masses: Vec<f64>,
}

const MASS_TOLERANCE: f64 = 1e-12;

impl DensityHistogram {
    pub fn new(edges: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || masses.len() + 1 != edges.len() {
            return Err(Error::InvalidConfig(format!(
                "{} edges do not bound {} bins",
                edges.len(),
                masses.len()
            )));
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidConfig("histogram edges must strictly increase".into()));
        }
        if masses.iter().any(|&m| !(m >= 0.0)) {
            return Err(Error::InvalidConfig("histogram masses must be nonnegative".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidConfig(format!("histogram mass {total} != 1")));
        }
        Ok(DensityHistogram { edges, masses })
    }

    /// Equal-width edges over `domain`.
    pub fn uniform_edges(domain: Interval, bins: usize) -> Vec<f64> {
        let mut edges: Vec<f64> = (0..=bins)
            .map(|i| domain.lo + domain.width() * i as f64 / bins as f64)
            .collect();
        edges[bins] = domain.hi;
        edges
    }

    /// Normalizes nonnegative `weights` over `edges`.
    pub fn from_weights(edges: Vec<f64>, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidConfig("histogram weights sum to zero".into()));
        }
        Self::new(edges, weights.iter().map(|w| w / total).collect())
    }

    /// Mass of each bin under `law`, from CDF differences.
    pub fn from_law(law: &InvariantLaw, edges: Vec<f64>) -> Result<Self> {
        let masses: Vec<f64> = edges.windows(2).map(|w| law.cdf(w[1]) - law.cdf(w[0])).collect();
        Self::from_weights(edges, &masses)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn l1_distance(&self, other: &DensityHistogram) -> Result<f64> {
        if self.edges != other.edges {
            return Err(Error::InvalidConfig("histograms have different edges".into()));
        }
        Ok(self.masses.iter().zip(&other.masses).map(|(a, b)| (a - b).abs()).sum())
    }

    /// L1 distance to the discretization of `law` on the same edges.
    pub fn l1_to_law(&self, law: &InvariantLaw) -> Result<f64> {
        self.l1_distance(&Self::from_law(law, self.edges.clone())?)
    }

    /// Rows `edge_low, edge_high, mass`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let rows = self
            .edges
            .windows(2)
            .zip(&self.masses)
            .map(|(w, m)| vec![fmt_f64(w[0]), fmt_f64(w[1]), fmt_f64(*m)]);
        write_csv(out, &["edge_low", "edge_high", "mass"], rows)
    }
}

/// Cumulative mass of a histogram. Linear inside each bin, except that an
/// end bin flagged in `sqrt_ends` distributes its mass like
/// `sqrt(distance to the end)`, the profile of a density with an inverse
/// square-root singularity there.
struct CumulativeMass<'a> {
    edges: &'a [f64],
    masses: &'a [f64],
    prefix: Vec<f64>,
    sqrt_ends: (bool, bool),
}

impl<'a> CumulativeMass<'a> {
    fn new(h: &'a DensityHistogram, sqrt_ends: (bool, bool)) -> Self {
        let mut prefix = Vec::with_capacity(h.masses.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for m in &h.masses {
            acc += m;
            prefix.push(acc);
        }
        CumulativeMass {
            edges: &h.edges,
            masses: &h.masses,
            prefix,
            sqrt_ends,
        }
    }

    fn at(&self, x: f64) -> f64 {
        let n = self.masses.len();
        if x <= self.edges[0] {
            return 0.0;
        }
        if x >= self.edges[n] {
            return self.prefix[n];
        }
        let i = self.edges.partition_point(|&e| e <= x) - 1;
        let width = self.edges[i + 1] - self.edges[i];
        let frac = if i == 0 && self.sqrt_ends.0 {
            ((x - self.edges[0]) / width).sqrt()
        } else if i == n - 1 && self.sqrt_ends.1 {
            1.0 - ((self.edges[n] - x) / width).sqrt()
        } else {
            (x - self.edges[i]) / width
        };
        self.prefix[i] + frac * self.masses[i]
    }
}

/// Domain ends reached by the forward orbit of a critical point. Invariant
/// densities blow up like an inverse square root at such ends.
fn fold_ends(map: &Map1D) -> (bool, bool) {
    let dom = map.domain();
    let mut ends = (false, false);
    for c in map.critical_points() {
        let mut v = c;
        for _ in 0..3 {
            v = map.forward(v);
            ends.0 |= (v - dom.lo).abs() < 1e-12;
            ends.1 |= (v - dom.hi).abs() < 1e-12;
        }
    }
    ends
}

/// `psi(z2) - psi(z1)` for `z1, z2` large, from the asymptotic series.
fn digamma_difference(z1: f64, z2: f64) -> f64 {
    let inv = |z: f64, k: i32| z.powi(-k);
    ((z2 - z1) / z1).ln_1p() - 0.5 * (inv(z2, 1) - inv(z1, 1)) - (inv(z2, 2) - inv(z1, 2)) / 12.0
        + (inv(z2, 4) - inv(z1, 4)) / 120.0
}

/// One step of the transfer of `hist` under `map`: the mass of bin `A` in
/// the result is the input mass of the preimage of `A`.
///
/// Preimages of bin edges are taken branch by branch, and the input is
/// treated as piecewise-uniform inside each bin, except for end bins that
/// the critical orbit lands on, which get a square-root profile. Edges must
/// span the map's
/// domain. For the Gauss map the branches beyond the truncation fall inside
/// the first input bin, where the density is constant, so their total
/// contribution is summed in closed form through digamma differences.
pub fn pushforward(hist: &DensityHistogram, map: &Map1D) -> Result<DensityHistogram> {
    let dom = map.domain();
    let edges = hist.edges();
    let n = hist.bins();
    if (edges[0] - dom.lo).abs() > 1e-12 || (edges[n] - dom.hi).abs() > 1e-12 {
        return Err(Error::InvalidConfig(format!(
            "histogram [{}, {}] does not span the {} domain",
            edges[0],
            edges[n],
            map.name()
        )));
    }
    let truncation = match map {
        Map1D::Gauss => GAUSS_TRUNCATION.max((1.0 / edges[1]).ceil() as usize),
        _ => 0,
    };
    let branches = map.branches(truncation)?;
    let cum = CumulativeMass::new(hist, fold_ends(map));

    let mut masses = vec![0.0; n];
    for br in &branches {
        // Preimages of the clipped edges, shared between neighbouring bins.
        let lo = br.range.lo;
        let hi = br.range.hi;
        let mut prev: Option<f64> = None;
        for (i, mass) in masses.iter_mut().enumerate() {
            let c = edges[i].clamp(lo, hi);
            let d = edges[i + 1].clamp(lo, hi);
            if d <= c {
                prev = None;
                continue;
            }
            let mc = match prev {
                Some(v) => v,
                None => cum.at(map.branch_inverse(br, c)),
            };
            let md = cum.at(map.branch_inverse(br, d));
            *mass += (md - mc).abs();
            prev = Some(md);
        }
    }

    if matches!(map, Map1D::Gauss) {
        let h0 = hist.masses()[0] / (edges[1] - edges[0]);
        let shift = truncation as f64 + 1.0;
        for (i, mass) in masses.iter_mut().enumerate() {
            *mass += h0 * digamma_difference(edges[i] + shift, edges[i + 1] + shift);
        }
    }

    let total: f64 = masses.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvalidConfig(format!("push-forward lost mass: total {total}")));
    }
    Ok(DensityHistogram {
        edges: edges.to_vec(),
        masses,
    })
}

/// Flat start plus two starts weighted by `t^4` toward either end of the
/// domain, on `bins` equal bins.
pub fn contrasting_starts(domain: Interval, bins: usize) -> Result<Vec<DensityHistogram>> {
    if bins == 0 {
        return Err(Error::InvalidConfig("bins must be >= 1".into()));
    }
    let edges = DensityHistogram::uniform_edges(domain, bins);
    let ramp = |left: bool| -> Vec<f64> {
        (0..bins)
            .map(|i| {
                let t = (i as f64 + 0.5) / bins as f64;
                if left { 1.0 - t } else { t }.powi(4)
            })
            .collect()
    };
    Ok(vec![
        DensityHistogram::from_weights(edges.clone(), &vec![1.0; bins])?,
        DensityHistogram::from_weights(edges.clone(), &ramp(true))?,
        DensityHistogram::from_weights(edges, &ramp(false))?,
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub map: String,
    pub law: String,
    pub bins: usize,
    pub iterations: usize,
    /// L1 distance of each final histogram to the discretized law.
    pub l1_to_law: Vec<f64>,
    pub max_pairwise_l1: f64,
    /// Largest `|total mass - 1|` seen over all steps.
    pub max_mass_drift: f64,
}

/// Pushes each of the [`contrasting_starts`] forward `iterations` times.
pub fn pushforward_convergence(
    map: &Map1D,
    law: &InvariantLaw,
    bins: usize,
    iterations: usize,
) -> Result<ConvergenceReport> {
    let mut drift: f64 = 0.0;
    let mut finals = Vec::new();
    for mut h in contrasting_starts(map.domain(), bins)? {
        for _ in 0..iterations {
            h = pushforward(&h, map)?;
            drift = drift.max((h.total_mass() - 1.0).abs());
        }
        finals.push(h);
    }
    let mut pairwise: f64 = 0.0;
    for i in 0..finals.len() {
        for j in i + 1..finals.len() {
            pairwise = pairwise.max(finals[i].l1_distance(&finals[j])?);
        }
    }
    Ok(ConvergenceReport {
        map: map.label(),
        law: law.name().to_string(),
        bins,
        iterations,
        l1_to_law: finals.iter().map(|h| h.l1_to_law(law)).collect::<Result<_>>()?,
        max_pairwise_l1: pairwise,
        max_mass_drift: drift,
    })
}
