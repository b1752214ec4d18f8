//! Chaotic maps and deterministic orbit generation.
//!
//! The one-dimensional catalog is fixed: logistic, Gauss (continued
//! fraction), tent and Chebyshev. The Hénon map is the only planar map.
//! Orbits are sequential state machines driven from a 64-bit seed, so
//! identical `(map, config)` pairs reproduce bit-identical values on every
//! platform.
//!
//! The doubling map is deliberately absent: in binary floating point every
//! orbit reaches 0 within about 53 steps. The tent map has the same dyadic
//! weakness over longer horizons and is kept for its analytic properties
//! only; use the logistic map for long streams.

use serde::Serialize;

use crate::error::{check_interval, Error, Result};

/// Gauss-map states below this are treated as having collapsed onto 0.
pub const GAUSS_DEGENERACY: f64 = 1e-15;
/// Hénon states with `|x|` above this have left the basin of the attractor.
pub const HENON_ESCAPE: f64 = 10.0;
/// Upper bound on consecutive reseeds at a single step before giving up.
pub const MAX_RESEEDS: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

// ---------------------------------------------------------------------------
// Single steps with domain checks
// ---------------------------------------------------------------------------

pub fn step_logistic(x: f64, lambda: f64) -> Result<f64> {
    check_interval("logistic state", x, 0.0, 1.0)?;
    check_interval("logistic lambda", lambda, 0.0, 4.0)?;
    Ok(logistic(x, lambda))
}

pub fn step_gauss(x: f64) -> Result<f64> {
    check_interval("gauss state", x, 0.0, 1.0)?;
    Ok(gauss(x))
}

pub fn step_tent(x: f64) -> Result<f64> {
    check_interval("tent state", x, 0.0, 1.0)?;
    Ok(tent(x))
}

pub fn step_chebyshev(x: f64, k: u32) -> Result<f64> {
    check_interval("chebyshev state", x, -1.0, 1.0)?;
    if k < 2 {
        return Err(Error::InvalidConfig(format!("chebyshev degree {k} < 2")));
    }
    Ok(chebyshev(x, k))
}

pub fn step_henon(x: f64, y: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    let (nx, ny) = henon(x, y, a, b);
    if nx.is_finite() && ny.is_finite() {
        Ok((nx, ny))
    } else {
        Err(Error::Divergence { step: 1, state: nx })
    }
}

#[inline]
fn logistic(x: f64, lambda: f64) -> f64 {
    let v = lambda * x * (1.0 - x);
    // also folds -0.0 into +0.0
    if v <= 0.0 {
        0.0
    } else {
        v.min(1.0)
    }
}

#[inline]
fn gauss(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let r = 1.0 / x;
    r - r.floor()
}

#[inline]
fn tent(x: f64) -> f64 {
    if x <= 0.5 {
        2.0 * x
    } else {
        2.0 * (1.0 - x)
    }
}

#[inline]
fn chebyshev(x: f64, k: u32) -> f64 {
    (k as f64 * x.acos()).cos().clamp(-1.0, 1.0)
}

#[inline]
fn henon(x: f64, y: f64, a: f64, b: f64) -> (f64, f64) {
    (1.0 - a * x * x + y, b * x)
}

// ---------------------------------------------------------------------------
// Seeds
// ---------------------------------------------------------------------------

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function: a bijection on `u64` with full avalanche.
pub fn mix(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th independent stream under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix(master ^ mix(index))
}

// Low-period points of the shipped maps that an odd dyadic can land on
// exactly (after the affine map onto the Chebyshev domain as well).
const EXCLUDED_STARTS: [f64; 3] = [0.25, 0.5, 0.75];

/// Maps a seed to a starting point in the open unit interval.
///
/// `x0 = (2 mix(seed) + 1) / 2^65`, re-mixed whenever rounding to `f64`
/// lands on an endpoint or an excluded low-period point.
pub fn seed_to_initial(seed: u64) -> f64 {
    let mut m = mix(seed);
    loop {
        let numerator = 2 * (m as u128) + 1;
        let x = numerator as f64 * 2f64.powi(-65);
        if x > 0.0 && x < 1.0 && !EXCLUDED_STARTS.contains(&x) {
            return x;
        }
        m = mix(m);
    }
}

// ---------------------------------------------------------------------------
// Map descriptors
// ---------------------------------------------------------------------------

/// The one-dimensional map catalog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "map", rename_all = "lowercase")]
pub enum Map1D {
    Logistic { lambda: f64 },
    Gauss,
    Tent,
    Chebyshev { k: u32 },
}

/// A monotone piece of a 1D map. The inverse of the map restricted to
/// `piece` sends `range` back onto `piece`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub index: usize,
    pub piece: Interval,
    pub range: Interval,
}

impl Map1D {
    pub fn logistic(lambda: f64) -> Result<Self> {
        check_interval("logistic lambda", lambda, 0.0, 4.0)?;
        Ok(Map1D::Logistic { lambda })
    }

    pub fn chebyshev(k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidConfig(format!("chebyshev degree {k} < 2")));
        }
        Ok(Map1D::Chebyshev { k })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Map1D::Logistic { .. } => "logistic",
            Map1D::Gauss => "gauss",
            Map1D::Tent => "tent",
            Map1D::Chebyshev { .. } => "chebyshev",
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Map1D::Logistic { lambda } => vec![("lambda", lambda)],
            Map1D::Chebyshev { k } => vec![("k", k as f64)],
            Map1D::Gauss | Map1D::Tent => Vec::new(),
        }
    }

    /// Caveat for maps whose floating-point orbits are unfit for long streams.
    pub fn long_orbit_warning(&self) -> Option<&'static str> {
        match self {
            Map1D::Tent => Some(
                "tent orbits collapse onto dyadic rationals in floating point; \
                 not recommended for long orbit generation",
            ),
            _ => None,
        }
    }

    pub fn domain(&self) -> Interval {
        match self {
            Map1D::Chebyshev { .. } => Interval::new(-1.0, 1.0),
            _ => Interval::UNIT,
        }
    }

    /// The map itself. Callers keep `x` inside [`Map1D::domain`].
    #[inline]
    pub fn forward(&self, x: f64) -> f64 {
        match *self {
            Map1D::Logistic { lambda } => logistic(x, lambda),
            Map1D::Gauss => gauss(x),
            Map1D::Tent => tent(x),
            Map1D::Chebyshev { k } => chebyshev(x, k),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Map1D::Logistic { lambda } => lambda * (1.0 - 2.0 * x),
            Map1D::Gauss => -1.0 / (x * x),
            Map1D::Tent => {
                if x <= 0.5 {
                    2.0
                } else {
                    -2.0
                }
            }
            // T_k' = k U_{k-1}
            Map1D::Chebyshev { k } => {
                let (mut prev, mut cur) = (1.0, 2.0 * x);
                if k == 1 {
                    return 1.0;
                }
                for _ in 2..k {
                    let next = 2.0 * x * cur - prev;
                    prev = cur;
                    cur = next;
                }
                k as f64 * cur
            }
        }
    }

    pub fn critical_points(&self) -> Vec<f64> {
        match *self {
            Map1D::Logistic { .. } => vec![0.5],
            Map1D::Gauss | Map1D::Tent => Vec::new(),
            Map1D::Chebyshev { k } => (1..k)
                .map(|j| (j as f64 * std::f64::consts::PI / k as f64).cos())
                .collect(),
        }
    }

    /// Monotone branches. The Gauss map has countably many; only the first
    /// `truncation` are returned for it (the argument is ignored otherwise).
    pub fn branches(&self, truncation: usize) -> Result<Vec<Branch>> {
        use std::f64::consts::PI;
        match *self {
            Map1D::Logistic { lambda } => {
                if lambda <= 0.0 {
                    return Err(Error::Unsupported("logistic map with lambda = 0".into()));
                }
                let range = Interval::new(0.0, lambda / 4.0);
                Ok(vec![
                    Branch {
                        index: 0,
                        piece: Interval::new(0.0, 0.5),
                        range,
                    },
                    Branch {
                        index: 1,
                        piece: Interval::new(0.5, 1.0),
                        range,
                    },
                ])
            }
            Map1D::Tent => Ok(vec![
                Branch {
                    index: 0,
                    piece: Interval::new(0.0, 0.5),
                    range: Interval::UNIT,
                },
                Branch {
                    index: 1,
                    piece: Interval::new(0.5, 1.0),
                    range: Interval::UNIT,
                },
            ]),
            Map1D::Chebyshev { k } => Ok((0..k as usize)
                .map(|j| {
                    let a = ((j + 1) as f64 * PI / k as f64).cos();
                    let b = (j as f64 * PI / k as f64).cos();
                    Branch {
                        index: j,
                        piece: Interval::new(a, b),
                        range: Interval::new(-1.0, 1.0),
                    }
                })
                .collect()),
            Map1D::Gauss => {
                if truncation == 0 {
                    return Err(Error::InvalidConfig("gauss truncation must be >= 1".into()));
                }
                Ok((1..=truncation)
                    .map(|p| Branch {
                        index: p - 1,
                        piece: Interval::new(1.0 / (p as f64 + 1.0), 1.0 / p as f64),
                        range: Interval::UNIT,
                    })
                    .collect())
            }
        }
    }

    /// Inverse of the map on `branch`, for `y` in `branch.range`.
    pub fn branch_inverse(&self, branch: &Branch, y: f64) -> f64 {
        match *self {
            Map1D::Logistic { lambda } => {
                let s = (1.0 - 4.0 * y / lambda).max(0.0).sqrt();
                if branch.index == 0 {
                    0.5 * (1.0 - s)
                } else {
                    0.5 * (1.0 + s)
                }
            }
            Map1D::Tent => {
                if branch.index == 0 {
                    0.5 * y
                } else {
                    1.0 - 0.5 * y
                }
            }
            Map1D::Chebyshev { k } => {
                use std::f64::consts::PI;
                let theta = y.clamp(-1.0, 1.0).acos();
                let j = branch.index;
                let offset = if j.is_multiple_of(2) { theta } else { PI - theta };
                ((j as f64 * PI + offset) / k as f64).cos()
            }
            Map1D::Gauss => 1.0 / (y + (branch.index + 1) as f64),
        }
    }

    /// All preimages of `y`, deduplicated (double roots appear once).
    pub fn preimages(&self, y: f64, truncation: usize) -> Result<Vec<f64>> {
        let dom = self.domain();
        check_interval("preimage target", y, dom.lo, dom.hi)?;
        let mut out: Vec<f64> = Vec::new();
        for br in self.branches(truncation)? {
            let in_range = if matches!(self, Map1D::Gauss) {
                y >= br.range.lo && y < br.range.hi
            } else {
                br.range.contains(y)
            };
            if in_range {
                let x = self.branch_inverse(&br, y);
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        Ok(out)
    }
}

/// The Hénon map `(x, y) -> (1 - a x^2 + y, b x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Henon {
    pub a: f64,
    pub b: f64,
}

impl Henon {
    pub const CLASSIC: Henon = Henon { a: 1.4, b: 0.3 };

    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite henon parameters ({a}, {b})")));
        }
        Ok(Henon { a, b })
    }

    #[inline]
    pub fn forward(&self, p: [f64; 2]) -> [f64; 2] {
        let (x, y) = henon(p[0], p[1], self.a, self.b);
        [x, y]
    }
}

// ---------------------------------------------------------------------------
// Orbits
// ---------------------------------------------------------------------------

/// Outcome of checking a freshly computed state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateCheck {
    Ok,
    /// Collapsed onto an absorbing point (floating-point artefact).
    Degenerate,
    /// Left the region where the orbit can stay bounded.
    Escaped,
}

/// Common interface for orbit generation over 1D and 2D maps.
pub trait ChaoticMap: Clone {
    type State: Copy + PartialEq + std::fmt::Debug;

    fn label(&self) -> String;
    /// Starting state for a seed.
    fn initial_state(&self, seed: u64) -> Self::State;
    fn step(&self, s: Self::State) -> Self::State;
    fn check(&self, s: &Self::State) -> StateCheck;
    fn distance(&self, a: &Self::State, b: &Self::State) -> f64;
    /// Diameter of the region orbits live in.
    fn diameter(&self) -> f64;
    /// `s` displaced by `eps`, staying inside the domain.
    fn displace(&self, s: &Self::State, eps: f64) -> Self::State;
    /// Scalar summary of a state for error reporting.
    fn headline(s: &Self::State) -> f64;
}

impl ChaoticMap for Map1D {
    type State = f64;

    fn label(&self) -> String {
        let params: Vec<String> = self.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        if params.is_empty() {
            self.name().to_string()
        } else {
            format!("{}({})", self.name(), params.join(","))
        }
    }

    fn initial_state(&self, seed: u64) -> f64 {
        let d = self.domain();
        d.lo + d.width() * seed_to_initial(seed)
    }

    #[inline]
    fn step(&self, s: f64) -> f64 {
        self.forward(s)
    }

    #[inline]
    fn check(&self, s: &f64) -> StateCheck {
        let x = *s;
        if !x.is_finite() {
            return StateCheck::Degenerate;
        }
        let absorbed = match *self {
            Map1D::Gauss => x < GAUSS_DEGENERACY,
            Map1D::Logistic { lambda } => lambda > 1.0 && x == 0.0,
            Map1D::Tent => x == 0.0,
            Map1D::Chebyshev { .. } => x == 1.0,
        };
        if absorbed {
            StateCheck::Degenerate
        } else {
            StateCheck::Ok
        }
    }

    fn distance(&self, a: &f64, b: &f64) -> f64 {
        (a - b).abs()
    }

    fn diameter(&self) -> f64 {
        self.domain().width()
    }

    fn displace(&self, s: &f64, eps: f64) -> f64 {
        if self.domain().contains(s + eps) {
            s + eps
        } else {
            s - eps
        }
    }

    fn headline(s: &f64) -> f64 {
        *s
    }
}

impl ChaoticMap for Henon {
    type State = [f64; 2];

    fn label(&self) -> String {
        format!("henon(a={},b={})", self.a, self.b)
    }

    fn initial_state(&self, seed: u64) -> [f64; 2] {
        [seed_to_initial(seed), 0.0]
    }

    #[inline]
    fn step(&self, s: [f64; 2]) -> [f64; 2] {
        self.forward(s)
    }

    #[inline]
    fn check(&self, s: &[f64; 2]) -> StateCheck {
        if s[0].is_finite() && s[1].is_finite() && s[0].abs() <= HENON_ESCAPE {
            StateCheck::Ok
        } else {
            StateCheck::Escaped
        }
    }

    fn distance(&self, a: &[f64; 2], b: &[f64; 2]) -> f64 {
        (a[0] - b[0]).hypot(a[1] - b[1])
    }

    /// Diagonal of the box `[-1.5, 1.5] x [-0.45, 0.45]` holding the
    /// classic attractor.
    fn diameter(&self) -> f64 {
        3.0f64.hypot(0.9)
    }

    fn displace(&self, s: &[f64; 2], eps: f64) -> [f64; 2] {
        [s[0] + eps, s[1]]
    }

    fn headline(s: &[f64; 2]) -> f64 {
        s[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReseedPolicy {
    Halt,
    PerturbAndContinue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OrbitConfig {
    pub seed: u64,
    pub burn_in: usize,
    pub length: usize,
    pub stride: usize,
    pub reseed_policy: ReseedPolicy,
}

impl OrbitConfig {
    pub fn new(seed: u64, length: usize) -> Self {
        OrbitConfig {
            seed,
            burn_in: 0,
            length,
            stride: 1,
            reseed_policy: ReseedPolicy::PerturbAndContinue,
        }
    }

    pub fn burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn policy(mut self, policy: ReseedPolicy) -> Self {
        self.reseed_policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::InvalidConfig("orbit length must be >= 1".into()));
        }
        if self.stride == 0 {
            return Err(Error::InvalidConfig("orbit stride must be >= 1".into()));
        }
        Ok(())
    }
}

/// A recorded orbit: `values[j] = T^(burn_in + stride * (j + 1))(x0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit<M: ChaoticMap> {
    pub map: M,
    pub config: OrbitConfig,
    pub values: Vec<M::State>,
    pub reseed_count: usize,
}

impl<M: ChaoticMap> Orbit<M> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Orbit from the seed's canonical starting state.
pub fn orbit<M: ChaoticMap>(map: &M, config: &OrbitConfig) -> Result<Orbit<M>> {
    config.validate()?;
    orbit_from(map, map.initial_state(config.seed), config)
}

/// Orbit from an explicit starting state; the seed only drives reseeding.
pub fn orbit_from<M: ChaoticMap>(map: &M, start: M::State, config: &OrbitConfig) -> Result<Orbit<M>> {
    config.validate()?;
    let mut stepper = Stepper {
        map,
        config,
        state: start,
        steps: 0,
        reseeds: 0,
    };
    for _ in 0..config.burn_in {
        stepper.advance()?;
    }
    let mut values = Vec::with_capacity(config.length);
    for _ in 0..config.length {
        for _ in 0..config.stride {
            stepper.advance()?;
        }
        values.push(stepper.state);
    }
    Ok(Orbit {
        map: map.clone(),
        config: *config,
        values,
        reseed_count: stepper.reseeds,
    })
}

struct Stepper<'a, M: ChaoticMap> {
    map: &'a M,
    config: &'a OrbitConfig,
    state: M::State,
    steps: usize,
    reseeds: usize,
}

impl<M: ChaoticMap> Stepper<'_, M> {
    #[inline]
    fn advance(&mut self) -> Result<()> {
        self.steps += 1;
        let mut next = self.map.step(self.state);
        let mut attempts = 0;
        loop {
            let verdict = self.map.check(&next);
            if verdict == StateCheck::Ok {
                break;
            }
            let state = M::headline(&next);
            if self.config.reseed_policy == ReseedPolicy::Halt {
                return Err(match verdict {
                    StateCheck::Escaped => Error::Divergence {
                        step: self.steps,
                        state,
                    },
                    _ => Error::Degenerate {
                        step: self.steps,
                        state,
                    },
                });
            }
            self.reseeds += 1;
            attempts += 1;
            if attempts > MAX_RESEEDS {
                return Err(Error::Degenerate {
                    step: self.steps,
                    state,
                });
            }
            next = self
                .map
                .initial_state(derive_seed(self.config.seed, self.reseeds as u64));
        }
        self.state = next;
        Ok(())
    }
}
