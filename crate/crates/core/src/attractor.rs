//! Hénon attractor: point clouds, empirical 2D densities and the
//! box-counting dimension.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{orbit, Henon, OrbitConfig, ReseedPolicy};
use crate::error::{Error, Result};
use crate::export::{fmt_f64, write_csv};

pub const DEFAULT_BURN_IN: usize = 1_000;
/// Smallest cloud accepted by [`box_counting_dimension`].
pub const MIN_DIMENSION_POINTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointCloud2D {
    pub a: f64,
    pub b: f64,
    pub seed: u64,
    pub burn_in: usize,
    pub points: Vec<[f64; 2]>,
}

impl PointCloud2D {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bounds(&self) -> Bounds {
        Bounds::of(&self.points)
    }

    /// Rows `x, y`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let rows = self.points.iter().map(|p| vec![fmt_f64(p[0]), fmt_f64(p[1])]);
        write_csv(out, &["x", "y"], rows)
    }
}

/// `n` points of the Hénon orbit from `(x0, 0)` after `burn_in` steps.
/// Escape from the basin is an error, never a reseed.
pub fn henon_cloud(a: f64, b: f64, seed: u64, burn_in: usize, n: usize) -> Result<PointCloud2D> {
    let map = Henon::new(a, b)?;
    let cfg = OrbitConfig::new(seed, n).burn_in(burn_in).policy(ReseedPolicy::Halt);
    Ok(PointCloud2D {
        a,
        b,
        seed,
        burn_in,
        points: orbit(&map, &cfg)?.values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Bounds {
    pub fn of(points: &[[f64; 2]]) -> Self {
        points.iter().fold(
            Bounds {
                x_lo: f64::INFINITY,
                x_hi: f64::NEG_INFINITY,
                y_lo: f64::INFINITY,
                y_hi: f64::NEG_INFINITY,
            },
            |b, p| Bounds {
                x_lo: b.x_lo.min(p[0]),
                x_hi: b.x_hi.max(p[0]),
                y_lo: b.y_lo.min(p[1]),
                y_hi: b.y_hi.max(p[1]),
            },
        )
    }

    pub fn contains(&self, p: &[f64; 2]) -> bool {
        p[0] >= self.x_lo && p[0] <= self.x_hi && p[1] >= self.y_lo && p[1] <= self.y_hi
    }

    pub fn diagonal(&self) -> f64 {
        (self.x_hi - self.x_lo).hypot(self.y_hi - self.y_lo)
    }
}

/// Cell of `v` among `n` equal cells over `[lo, hi]`; a flat range maps
/// everything to cell 0.
fn cell(v: f64, lo: f64, hi: f64, n: usize) -> usize {
    if hi > lo {
        (((v - lo) / (hi - lo) * n as f64) as usize).min(n - 1)
    } else {
        0
    }
}

/// Normalized occupancy grid, `masses[iy * nx + ix]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid2D {
    pub bounds: Bounds,
    pub nx: usize,
    pub ny: usize,
    pub masses: Vec<f64>,
}

impl Grid2D {
    pub fn mass(&self, ix: usize, iy: usize) -> f64 {
        self.masses[iy * self.nx + ix]
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn occupied_fraction(&self) -> f64 {
        self.masses.iter().filter(|&&m| m > 0.0).count() as f64 / self.masses.len() as f64
    }

    pub fn l1_distance(&self, other: &Grid2D) -> Result<f64> {
        if self.bounds != other.bounds || self.nx != other.nx || self.ny != other.ny {
            return Err(Error::InvalidConfig("grids differ in shape or bounds".into()));
        }
        Ok(self.masses.iter().zip(&other.masses).map(|(a, b)| (a - b).abs()).sum())
    }

    /// Rows `ix, iy, mass`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let rows = (0..self.ny).flat_map(|iy| {
            (0..self.nx).map(move |ix| vec![ix.to_string(), iy.to_string(), fmt_f64(self.mass(ix, iy))])
        });
        write_csv(out, &["ix", "iy", "mass"], rows)
    }
}

/// Occupancy over the cloud's own bounding box.
pub fn empirical_density_2d(cloud: &PointCloud2D, nx: usize, ny: usize) -> Result<Grid2D> {
    density_in(&cloud.points, cloud.bounds(), nx, ny)
}

/// Occupancy over fixed `bounds`, so grids from different clouds compare
/// cell by cell.
pub fn density_in(points: &[[f64; 2]], bounds: Bounds, nx: usize, ny: usize) -> Result<Grid2D> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidConfig("grid needs at least one cell per axis".into()));
    }
    if points.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut counts = vec![0usize; nx * ny];
    for p in points {
        if !bounds.contains(p) {
            return Err(Error::InvalidConfig(format!(
                "point ({}, {}) outside grid bounds",
                p[0], p[1]
            )));
        }
        let ix = cell(p[0], bounds.x_lo, bounds.x_hi, nx);
        let iy = cell(p[1], bounds.y_lo, bounds.y_hi, ny);
        counts[iy * nx + ix] += 1;
    }
    let n = points.len() as f64;
    Ok(Grid2D {
        bounds,
        nx,
        ny,
        masses: counts.iter().map(|&c| c as f64 / n).collect(),
    })
}

/// Average of the per-seed grids over shared `bounds`. Clouds are built in
/// parallel and summed in seed order.
pub fn monte_carlo_density(
    map: Henon,
    seeds: &[u64],
    burn_in: usize,
    n: usize,
    bounds: Bounds,
    nx: usize,
    ny: usize,
) -> Result<Grid2D> {
    if seeds.is_empty() {
        return Err(Error::InvalidConfig("at least one seed required".into()));
    }
    let grids = seeds
        .par_iter()
        .map(|&s| {
            let cloud = henon_cloud(map.a, map.b, s, burn_in, n)?;
            density_in(&cloud.points, bounds, nx, ny)
        })
        .collect::<Result<Vec<Grid2D>>>()?;
    let mut masses = vec![0.0; nx * ny];
    for g in &grids {
        for (m, v) in masses.iter_mut().zip(&g.masses) {
            *m += v;
        }
    }
    let k = grids.len() as f64;
    masses.iter_mut().for_each(|m| *m /= k);
    Ok(Grid2D { bounds, nx, ny, masses })
}

// ---------------------------------------------------------------------------
// Box counting
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionFit {
    /// Box sides `diagonal * 2^-k` for `k = k_min..=k_max`.
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    pub slope: f64,
    /// Indices into `scales` used by the fit.
    pub fit_window: Vec<usize>,
    pub k_min: u32,
    pub k_max: u32,
    pub n: usize,
}

fn occupied_boxes(points: &[[f64; 2]], bounds: &Bounds, side: f64) -> usize {
    let mut keys: Vec<u64> = points
        .iter()
        .map(|p| {
            let ix = ((p[0] - bounds.x_lo) / side) as u64;
            let iy = ((p[1] - bounds.y_lo) / side) as u64;
            (ix << 32) | iy
        })
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

/// Slope of `ln N(eps)` against `ln(1/eps)`.
///
/// The two coarsest scales are left out of the fit, as is every scale with
/// more than `n/10` occupied boxes, where a finite sample undercounts.
pub fn box_counting_dimension(points: &[[f64; 2]], k_min: u32, k_max: u32) -> Result<DimensionFit> {
    if points.len() < MIN_DIMENSION_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_DIMENSION_POINTS,
            got: points.len(),
        });
    }
    if k_min > k_max || k_max > 30 {
        return Err(Error::InvalidConfig(format!("scale range {k_min}..={k_max}")));
    }
    let bounds = Bounds::of(points);
    let diagonal = bounds.diagonal();
    if !(diagonal > 0.0) {
        return Err(Error::InvalidConfig("all points coincide".into()));
    }
    let ks: Vec<u32> = (k_min..=k_max).collect();
    let scales: Vec<f64> = ks.iter().map(|&k| diagonal * 0.5f64.powi(k as i32)).collect();
    let counts: Vec<usize> = scales
        .par_iter()
        .map(|&side| occupied_boxes(points, &bounds, side))
        .collect();
    let saturated = points.len() / 10;
    let fit_window: Vec<usize> = (2..ks.len()).filter(|&i| counts[i] <= saturated).collect();
    if fit_window.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: fit_window.len(),
        });
    }
    let xs: Vec<f64> = fit_window.iter().map(|&i| -scales[i].ln()).collect();
    let ys: Vec<f64> = fit_window.iter().map(|&i| (counts[i] as f64).ln()).collect();
    Ok(DimensionFit {
        slope: ls_fit(&xs, &ys),
        scales,
        counts,
        fit_window,
        k_min,
        k_max,
        n: points.len(),
    })
}

fn ls_fit(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::derive_seed;
    use crate::randgen::SourceConfig;

    fn classic(seed: u64, n: usize) -> PointCloud2D {
        henon_cloud(1.4, 0.3, seed, DEFAULT_BURN_IN, n).unwrap()
    }

    /// `n` points uniform on the unit square, from two chaotic streams.
    fn square(n: usize) -> Vec<[f64; 2]> {
        let src = SourceConfig::default();
        let u = src.uniforms(derive_seed(3, 0), n).unwrap().values;
        let v = src.uniforms(derive_seed(3, 1), n).unwrap().values;
        u.into_iter().zip(v).map(|(a, b)| [a, b]).collect()
    }

    #[test]
    fn cloud_examples() {
        let c = classic(1, 100_000);
        assert_eq!(c.len(), 100_000);
        assert!(c.points.iter().all(|p| p[0].abs() <= 1.5 && p[1].abs() <= 0.45));
        assert_eq!(c, classic(1, 100_000));

        let flat = henon_cloud(1.4, 0.0, 2, DEFAULT_BURN_IN, 1000).unwrap();
        assert!(flat.points.iter().all(|p| p[1] == 0.0));

        assert!(matches!(
            henon_cloud(3.0, 0.3, 1, 10, 100),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn density_examples() {
        let c = classic(4, 1_000_000);
        let g = empirical_density_2d(&c, 256, 256).unwrap();
        assert!((g.total_mass() - 1.0).abs() < 1e-12);
        assert!(g.occupied_fraction() < 0.1, "{}", g.occupied_fraction());
        assert_eq!(g, empirical_density_2d(&c, 256, 256).unwrap());

        let bounds = Bounds {
            x_lo: -1.5,
            x_hi: 1.5,
            y_lo: -0.45,
            y_hi: 0.45,
        };
        let a = density_in(&c.points, bounds, 64, 64).unwrap();
        let b = density_in(&classic(5, 1_000_000).points, bounds, 64, 64).unwrap();
        assert!(a.l1_distance(&b).unwrap() < 0.1);

        let mut buf = Vec::new();
        density_in(&c.points[..10], bounds, 2, 3)
            .unwrap()
            .write_csv(&mut buf)
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("ix,iy,mass\n"));
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn density_rejects_bad_input() {
        let b = Bounds::of(&[[0.0, 0.0], [1.0, 1.0]]);
        assert!(density_in(&[], b, 4, 4).is_err());
        assert!(density_in(&[[2.0, 0.0]], b, 4, 4).is_err());
        assert!(density_in(&[[0.5, 0.5]], b, 0, 4).is_err());
    }

    #[test]
    fn monte_carlo_is_an_average() {
        let bounds = Bounds {
            x_lo: -1.5,
            x_hi: 1.5,
            y_lo: -0.45,
            y_hi: 0.45,
        };
        let mc = monte_carlo_density(Henon::CLASSIC, &[1, 2], 100, 5000, bounds, 16, 16).unwrap();
        let g1 = density_in(&classic_burn(1), bounds, 16, 16).unwrap();
        let g2 = density_in(&classic_burn(2), bounds, 16, 16).unwrap();
        for i in 0..256 {
            assert!((mc.masses[i] - 0.5 * (g1.masses[i] + g2.masses[i])).abs() < 1e-15);
        }
        assert!((mc.total_mass() - 1.0).abs() < 1e-12);
    }

    fn classic_burn(seed: u64) -> Vec<[f64; 2]> {
        henon_cloud(1.4, 0.3, seed, 100, 5000).unwrap().points
    }

    #[test]
    fn henon_dimension() {
        for seed in [1, 2] {
            let fit = box_counting_dimension(&classic(seed, 1_000_000).points, 2, 10).unwrap();
            assert!((fit.slope - 1.26).abs() < 0.05, "{fit:?}");
            assert!(fit.counts.windows(2).all(|w| w[0] <= w[1]));
            assert!(!fit.fit_window.contains(&0) && !fit.fit_window.contains(&1));
        }
    }

    #[test]
    fn square_dimension() {
        let fit = box_counting_dimension(&square(1_000_000), 2, 10).unwrap();
        assert!((fit.slope - 2.0).abs() < 0.1, "{fit:?}");
        assert!(fit.fit_window.iter().all(|&i| fit.counts[i] <= 100_000));
    }

    #[test]
    fn segment_dimension() {
        let n = 1_000_000;
        let pts: Vec<[f64; 2]> = SourceConfig::default()
            .uniforms(8, n)
            .unwrap()
            .values
            .into_iter()
            .map(|x| [x, x])
            .collect();
        let fit = box_counting_dimension(&pts, 2, 10).unwrap();
        assert!((fit.slope - 1.0).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn dimension_needs_points() {
        assert!(matches!(
            box_counting_dimension(&square(1000), 2, 10),
            Err(Error::InsufficientData { .. })
        ));
        assert!(box_counting_dimension(&square(100_000), 5, 3).is_err());
    }
}
