use std::fmt;
use std::io;
use std::path::Path;

use serde_json::{json, Value};

use chaosgen::applications::{
    gbm_paths, gbm_terminal_values, normality_report, standardized_increments, summarize_terminal, GbmConfig,
    MIN_NORMALITY_SAMPLES,
};
use chaosgen::attractor::{box_counting_dimension, empirical_density_2d, henon_cloud};
use chaosgen::dynamics::{orbit, ChaoticMap, Henon, Map1D, Orbit, OrbitConfig};
use chaosgen::ergodics::{birkhoff_average, sensitivity_sweep, transitivity_probe, visit_density, Observable};
use chaosgen::measures::{fp_residual, interior_grid, pushforward_convergence, InvariantLaw};
use chaosgen::randgen::{multivariate_sample, DistributionSpec, SourceConfig};
use chaosgen::special::normal_cdf;
use chaosgen::stattests::{acf_report, chi2_report, jb_report, ks_report, Thresholds};

use crate::args::*;
use crate::output::{envelope, resolve, write_atomic, write_json};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
    Io(io::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Io(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) => f.write_str(m),
            Failure::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl From<chaosgen::Error> for Failure {
    fn from(e: chaosgen::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

/// A finished run: the JSON document to report, and whether every check
/// passed.
pub struct Outcome {
    pub doc: Value,
    pub pass: bool,
}

type Run = Result<Outcome, Failure>;

enum AnyMap {
    Interval(Map1D),
    Henon(Henon),
}

fn build_map(m: &MapArgs) -> Result<AnyMap, Failure> {
    Ok(match m.map {
        MapId::Logistic => AnyMap::Interval(Map1D::logistic(m.lambda)?),
        MapId::Gauss => AnyMap::Interval(Map1D::Gauss),
        MapId::Tent => AnyMap::Interval(Map1D::Tent),
        MapId::Chebyshev => AnyMap::Interval(Map1D::chebyshev(m.k)?),
        MapId::Henon => AnyMap::Henon(Henon::new(m.a, m.b)?),
    })
}

fn interval_map(m: &MapArgs, what: &str) -> Result<Map1D, Failure> {
    match build_map(m)? {
        AnyMap::Interval(map) => Ok(map),
        AnyMap::Henon(_) => usage(format!("{what} needs an interval map, not henon")),
    }
}

fn law_of(map: &Map1D, what: &str) -> Result<InvariantLaw, Failure> {
    InvariantLaw::for_map(map)
        .map(Ok)
        .unwrap_or_else(|| usage(format!("{what}: no closed-form invariant density for {}", map.label())))
}

fn warn(doc: &mut serde_json::Map<String, Value>, map: &Map1D) {
    if let Some(w) = map.long_orbit_warning() {
        eprintln!("warning: {w}");
        doc.insert("warning".into(), json!(w));
    }
}

fn path_str(p: &Path) -> Value {
    json!(p.display().to_string())
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

fn target_law(a: &GenerateArgs) -> Result<DistributionSpec, Failure> {
    Ok(match a.law {
        LawId::Uniform => DistributionSpec::uniform(a.low, a.high)?,
        LawId::Exponential => DistributionSpec::exponential(a.rate)?,
        LawId::Normal => DistributionSpec::normal(a.mean, a.sd)?,
        LawId::Bernoulli => DistributionSpec::bernoulli(a.p)?,
    })
}

pub fn generate(a: &GenerateArgs) -> Run {
    let map = interval_map(&a.map, "generate")?;
    if a.stride == 0 {
        return usage("--stride must be >= 1");
    }
    let source = SourceConfig::new(map)?.burn_in(a.burn_in).stride(a.stride);
    let spec = target_law(a)?;
    let batch = multivariate_sample(a.seed, &vec![spec; a.dim], a.n, &source)?;

    let mut doc = envelope("generate", a);
    warn(&mut doc, &map);
    doc.insert("summary".into(), json!(batch.summary()));
    let path = match a.format {
        Format::Csv => {
            let path = resolve(&a.output, "samples.csv");
            write_atomic(&path, |w| batch.write_csv(w))?;
            path
        }
        Format::Json => {
            let path = resolve(&a.output, "samples.json");
            let mut full = doc.clone();
            full.insert("values".into(), json!(batch.values));
            write_json(&path, &Value::Object(full))?;
            path
        }
    };
    doc.insert("output".into(), path_str(&path));
    Ok(Outcome {
        doc: Value::Object(doc),
        pass: true,
    })
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

/// Known Lyapunov exponents of the shipped maps.
fn reference_exponent(map: &Map1D) -> Option<f64> {
    match *map {
        Map1D::Logistic { lambda: 4.0 } => Some(std::f64::consts::LN_2),
        Map1D::Tent => Some(std::f64::consts::LN_2),
        Map1D::Chebyshev { k } => Some((k as f64).ln()),
        _ => None,
    }
}

pub fn verify(a: &VerifyArgs) -> Run {
    let map = build_map(&a.map)?;
    let mut checks = Vec::new();
    let mut cached: Option<Orbit<Map1D>> = None;
    for &suite in &a.suite {
        let check = match (suite, &map) {
            (Suite::Sensitivity, _) => verify_sensitivity(a, &map)?,
            (_, AnyMap::Henon(_)) => {
                return usage(format!(
                    "suite {suite:?} needs an interval map; henon has no 1D density"
                ))
            }
            (_, AnyMap::Interval(m)) => {
                if matches!(suite, Suite::Birkhoff | Suite::Density | Suite::Transitivity) && cached.is_none() {
                    cached = Some(orbit(m, &OrbitConfig::new(a.seed, a.n).burn_in(a.burn_in))?);
                }
                let o = cached.as_ref();
                match suite {
                    Suite::Fp => verify_fp(a, m)?,
                    Suite::Pushforward => verify_pushforward(a, m)?,
                    Suite::Birkhoff => verify_birkhoff(a, m, o.unwrap())?,
                    Suite::Density => verify_density(a, m, o.unwrap())?,
                    Suite::Transitivity => verify_transitivity(a, o.unwrap())?,
                    Suite::Sensitivity => unreachable!(),
                }
            }
        };
        checks.push(check);
    }
    let pass = checks.iter().all(|c| c["pass"] == json!(true));
    let mut doc = envelope("verify", a);
    if let AnyMap::Interval(m) = &map {
        warn(&mut doc, m);
    }
    doc.insert("checks".into(), json!(checks));
    doc.insert("pass".into(), json!(pass));
    let path = resolve(&a.output, "verify.json");
    doc.insert("output".into(), path_str(&path));
    let doc = Value::Object(doc);
    write_json(&path, &doc)?;
    Ok(Outcome { doc, pass })
}

fn verify_fp(a: &VerifyArgs, map: &Map1D) -> Result<Value, Failure> {
    let law = law_of(map, "fp")?;
    if a.grid == 0 {
        return usage("--grid must be >= 1");
    }
    let (mut worst, mut worst_y) = (0.0f64, f64::NAN);
    for y in interior_grid(law.support(), a.grid) {
        // truncation 0: exact telescoping sum for the Gauss map
        let r = fp_residual(map, &law, y, 0)?;
        if r.residual > worst || worst_y.is_nan() {
            worst = r.residual;
            worst_y = y;
        }
    }
    Ok(json!({
        "suite": "fp",
        "map": map.label(),
        "law": law.name(),
        "points": a.grid,
        "max_residual": worst,
        "worst_y": worst_y,
        "threshold": a.fp_tol,
        "pass": worst < a.fp_tol,
    }))
}

fn verify_birkhoff(a: &VerifyArgs, map: &Map1D, o: &Orbit<Map1D>) -> Result<Value, Failure> {
    law_of(map, "birkhoff")?;
    let d = map.domain();
    let lo = a.lo.unwrap_or(d.lo);
    let hi = a.hi.unwrap_or(0.5 * (d.lo + d.hi));
    if lo.partial_cmp(&hi).is_none_or(|o| o.is_gt()) {
        return usage("--lo must not exceed --hi");
    }
    let r = birkhoff_average(o, &Observable::Indicator { lo, hi })?;
    let pass = r.abs_error.is_some_and(|e| e < a.birkhoff_tol);
    Ok(json!({ "suite": "birkhoff", "report": r, "threshold": a.birkhoff_tol, "pass": pass }))
}

fn verify_density(a: &VerifyArgs, map: &Map1D, o: &Orbit<Map1D>) -> Result<Value, Failure> {
    let law = law_of(map, "density")?;
    let bins = a.bins.unwrap_or(200);
    let l1 = visit_density(o, bins)?.l1_to_law(&law)?;
    Ok(json!({
        "suite": "density",
        "map": map.label(),
        "law": law.name(),
        "bins": bins,
        "n": o.len(),
        "l1_to_law": l1,
        "threshold": a.l1_tol,
        "pass": l1 < a.l1_tol,
    }))
}

fn verify_pushforward(a: &VerifyArgs, map: &Map1D) -> Result<Value, Failure> {
    let law = law_of(map, "pushforward")?;
    let r = pushforward_convergence(map, &law, a.bins.unwrap_or(200), a.iterations)?;
    let pass = r.l1_to_law.iter().all(|&d| d < a.l1_tol) && r.max_pairwise_l1 < a.l1_tol && r.max_mass_drift <= 1e-12;
    Ok(json!({ "suite": "pushforward", "report": r, "threshold": a.l1_tol, "pass": pass }))
}

fn verify_transitivity(a: &VerifyArgs, o: &Orbit<Map1D>) -> Result<Value, Failure> {
    let bins = a.bins.unwrap_or(100);
    let coverage = transitivity_probe(o, bins)?;
    Ok(json!({
        "suite": "transitivity",
        "map": o.map.label(),
        "bins": bins,
        "n": o.len(),
        "coverage": coverage,
        "pass": coverage == 1.0,
    }))
}

fn verify_sensitivity(a: &VerifyArgs, map: &AnyMap) -> Result<Value, Failure> {
    let seeds: Vec<u64> = (0..a.seeds).collect();
    let (sweep, reference) = match map {
        AnyMap::Interval(m) => (
            sensitivity_sweep(m, &seeds, a.epsilon, a.horizon.unwrap_or(60))?,
            reference_exponent(m),
        ),
        AnyMap::Henon(h) => (sensitivity_sweep(h, &seeds, a.epsilon, a.horizon.unwrap_or(100))?, None),
    };
    let mean = sweep.mean_exponent;
    let abs_error = mean.zip(reference).map(|(m, r)| (m - r).abs());
    let pass = mean.is_some_and(|m| m > 0.0) && abs_error.is_none_or(|e| e < a.exponent_tol);
    Ok(json!({
        "suite": "sensitivity",
        "map": sweep.map,
        "epsilon": sweep.epsilon,
        "horizon": sweep.horizon,
        "seeds": seeds.len(),
        "mean_exponent": mean,
        "reference": reference,
        "abs_error": abs_error,
        "threshold": a.exponent_tol,
        "exponents": sweep.exponents,
        "pass": pass,
    }))
}

// ---------------------------------------------------------------------------
// henon
// ---------------------------------------------------------------------------

pub fn henon(a: &HenonArgs) -> Run {
    if a.n == 0 {
        return usage("--n must be >= 1");
    }
    let cloud = henon_cloud(a.a, a.b, a.seed, a.burn_in, a.n)?;
    let mut doc = envelope("henon", a);
    doc.insert("points".into(), json!(cloud.len()));
    doc.insert("bounds".into(), json!(cloud.bounds()));
    if !a.no_cloud {
        let path = resolve(&a.output, "henon_cloud.csv");
        write_atomic(&path, |w| cloud.write_csv(w))?;
        doc.insert("output".into(), path_str(&path));
    }
    if let Some(cells) = a.grid {
        let grid = empirical_density_2d(&cloud, cells, cells)?;
        let path = resolve(&a.grid_output, "henon_density.csv");
        write_atomic(&path, |w| grid.write_csv(w))?;
        doc.insert(
            "density".into(),
            json!({
                "nx": cells,
                "ny": cells,
                "occupied_fraction": grid.occupied_fraction(),
                "output": path_str(&path),
            }),
        );
    }
    if a.dimension {
        let fit = box_counting_dimension(&cloud.points, a.k_min, a.k_max)?;
        doc.insert("dimension".into(), json!(fit));
    }
    let doc = Value::Object(doc);
    if let Some(p) = &a.summary {
        write_json(p, &doc)?;
    }
    Ok(Outcome { doc, pass: true })
}

// ---------------------------------------------------------------------------
// gbm
// ---------------------------------------------------------------------------

pub fn gbm(a: &GbmArgs) -> Run {
    let cfg = GbmConfig::new(a.s0, a.mu, a.sigma, a.t, a.steps, a.paths, a.seed);
    cfg.validate()?;
    let mut doc = envelope("gbm", a);
    let terminal = if a.summary_only {
        gbm_terminal_values(&cfg)?
    } else {
        let paths = gbm_paths(&cfg)?;
        let path = resolve(&a.output, "gbm_paths.csv");
        write_atomic(&path, |w| paths.write_csv(w))?;
        doc.insert("output".into(), path_str(&path));
        if cfg.sigma > 0.0 && cfg.steps * cfg.n_paths >= MIN_NORMALITY_SAMPLES {
            let z = standardized_increments(&paths)?;
            doc.insert("normality".into(), json!(normality_report(&z, &Thresholds::default())?));
        }
        paths.terminal_values()
    };
    if terminal.len() >= 2 {
        doc.insert("summary".into(), json!(summarize_terminal(&cfg, &terminal)?));
    }
    let doc = Value::Object(doc);
    if let Some(p) = &a.summary {
        write_json(p, &doc)?;
    }
    Ok(Outcome { doc, pass: true })
}

// ---------------------------------------------------------------------------
// test
// ---------------------------------------------------------------------------

fn read_column(path: &Path, column: &str) -> Result<Vec<f64>, Failure> {
    let mut rdr =
        csv::Reader::from_path(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let headers = rdr
        .headers()
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        .clone();
    let idx = match headers.iter().position(|h| h == column) {
        Some(i) => i,
        None => match column.parse::<usize>() {
            Ok(i) if i < headers.len() => i,
            _ => return usage(format!("no column {column:?} in {}", path.display())),
        },
    };
    let mut values = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let cell = rec.get(idx).unwrap_or("");
        let v = cell
            .trim()
            .parse::<f64>()
            .map_err(|_| Failure::Usage(format!("row {}: {cell:?} is not a number", line + 2)))?;
        values.push(v);
    }
    Ok(values)
}

pub fn test(a: &TestArgs) -> Run {
    let values = read_column(&a.input, &a.column)?;
    let mut t = Thresholds::default();
    if let Some(ks) = a.ks_max {
        t.ks = ks;
    }
    t.acf_abs = a.acf_max;
    let mut reports = Vec::new();
    let tests = a.tests.clone().unwrap_or_else(|| match a.reference {
        Reference::Uniform => vec![TestId::Ks, TestId::Chi2, TestId::Acf],
        Reference::Normal => vec![TestId::Ks, TestId::Acf, TestId::Jb],
    });
    for &test in &tests {
        reports.push(match test {
            TestId::Ks => match a.reference {
                Reference::Uniform => ks_report(&values, |x| x.clamp(0.0, 1.0), &t)?,
                Reference::Normal => ks_report(&values, normal_cdf, &t)?,
            },
            TestId::Chi2 => chi2_report(&values, a.bins, &t)?,
            TestId::Acf => acf_report(&values, a.lag, &t)?,
            TestId::Jb => jb_report(&values, &t)?,
        });
    }
    let pass = reports.iter().all(|r| r.pass);
    let mut doc = envelope("test", a);
    doc.insert("n".into(), json!(values.len()));
    doc.insert("reports".into(), json!(reports));
    doc.insert("pass".into(), json!(pass));
    let path = resolve(&a.output, "test.json");
    doc.insert("output".into(), path_str(&path));
    let doc = Value::Object(doc);
    write_json(&path, &doc)?;
    Ok(Outcome { doc, pass })
}
