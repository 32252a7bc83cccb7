//! Hit-or-miss Monte Carlo estimates of `Vol_n(K + tB^n)` in low dimension,
//! used as an independent check on the assembled Steiner polynomials.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angles::QuadratureConfig;
use crate::error::{Error, Result};
use crate::families::{simplex_hyperplane_basis, FamilyInstance, Kind};
use crate::numfmt;
use crate::polynomials::minkowski_polynomial;

/// Highest dimension the estimator accepts; beyond it hit rates are too small to be useful.
pub const MAX_DIMENSION: usize = 6;
/// Relative allowance on the tube radius in the hit test.
pub const HIT_SLACK: f64 = 1e-12;
/// Rows with `|z|` above this are flagged.
pub const Z_FLAG: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub chunk_size: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 0x5EED,
            chunk_size: 1 << 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    #[serde(with = "numfmt::scalar")]
    pub value: f64,
    #[serde(with = "numfmt::scalar")]
    pub std_error: f64,
    #[serde(with = "numfmt::scalar")]
    pub ci95_low: f64,
    #[serde(with = "numfmt::scalar")]
    pub ci95_high: f64,
    pub samples_used: u64,
}

/// Euclidean distance from `point` to the body `K` of the given kind and size.
///
/// Simplex points are given in the `n` orthonormal coordinates of the
/// hyperplane `Σ ξ_i = ρ` in `R^{n+1}`, with the origin at the centroid.
pub fn distance_to_body(kind: Kind, n: usize, rho: f64, point: &[f64]) -> Result<f64> {
    if point.len() != n {
        return Err(Error::Domain(format!("point has {} coordinates, expected {n}", point.len())));
    }
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("size parameter must be positive, got {rho}")));
    }
    Ok(match kind {
        Kind::Ball => (norm(point) - rho).max(0.0),
        Kind::Cube => point
            .iter()
            .map(|x| (x.abs() - rho).max(0.0).powi(2))
            .sum::<f64>()
            .sqrt(),
        Kind::CrossPolytope => {
            let p = project_l1_ball(point, rho);
            dist(point, &p)
        }
        Kind::Simplex => {
            let xi = simplex_ambient(&simplex_hyperplane_basis(n), rho, point);
            let p = project_simplex(&xi, rho);
            dist(&xi, &p)
        }
    })
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// `θ ≥ 0` with `Σ max(v_i − θ, 0) = z`, for `v` with `Σ v_i > z`.
fn threshold(v: &[f64], z: f64) -> f64 {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - z) / (k + 1) as f64;
        if u > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    theta
}

pub(crate) fn project_l1_ball(x: &[f64], rho: f64) -> Vec<f64> {
    let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    if abs.iter().sum::<f64>() <= rho {
        return x.to_vec();
    }
    let theta = threshold(&abs, rho);
    x.iter().map(|v| v.signum() * (v.abs() - theta).max(0.0)).collect()
}

/// Projection onto `{ξ ≥ 0, Σ ξ = ρ}`.
pub(crate) fn project_simplex(xi: &[f64], rho: f64) -> Vec<f64> {
    let theta = threshold(xi, rho);
    xi.iter().map(|v| (v - theta).max(0.0)).collect()
}

fn simplex_ambient(basis: &[Vec<f64>], rho: f64, y: &[f64]) -> Vec<f64> {
    let m = basis.len() + 1;
    let mut xi = vec![rho / m as f64; m];
    for (row, yk) in basis.iter().zip(y) {
        for (x, b) in xi.iter_mut().zip(row) {
            *x += yk * b;
        }
    }
    xi
}

/// Half-width of the sampling box; simplex boxes are centered at the centroid.
fn box_half_width(instance: &FamilyInstance, t: f64) -> f64 {
    match instance.kind {
        Kind::Simplex => instance.circumradius() + t,
        _ => instance.rho + t,
    }
}

pub fn estimate_tube_volume(instance: &FamilyInstance, t: f64, cfg: &McConfig) -> Result<McEstimate> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t must be finite and nonnegative, got {t}")));
    }
    if instance.n > MAX_DIMENSION {
        return Err(Error::Domain(format!(
            "Monte Carlo validation is limited to n <= {MAX_DIMENSION}, got {}",
            instance.n
        )));
    }
    if cfg.samples == 0 || cfg.chunk_size == 0 {
        return Err(Error::Domain("samples and chunk_size must be positive".into()));
    }
    let n = instance.n;
    let h = box_half_width(instance, t);
    // projections are exact only up to rounding, so interior points may sit at ~1e-17
    let reach = t + HIT_SLACK * (instance.rho + t);
    let basis = simplex_hyperplane_basis(n);
    let chunks = cfg.samples.div_ceil(cfg.chunk_size);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(chunk);
            let count = cfg.chunk_size.min(cfg.samples - chunk * cfg.chunk_size);
            let mut point = vec![0.0; n];
            let mut hits = 0u64;
            for _ in 0..count {
                for x in point.iter_mut() {
                    *x = rng.gen_range(-h..h);
                }
                let d = match instance.kind {
                    Kind::Simplex => {
                        let xi = simplex_ambient(&basis, instance.rho, &point);
                        dist(&xi, &project_simplex(&xi, instance.rho))
                    }
                    kind => distance_to_body(kind, n, instance.rho, &point).expect("dimension matches"),
                };
                if d <= reach {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let box_volume = (2.0 * h).powi(n as i32);
    let p = hits as f64 / cfg.samples as f64;
    let value = box_volume * p;
    let std_error = box_volume * (p * (1.0 - p) / cfg.samples as f64).sqrt();
    Ok(McEstimate {
        value,
        std_error,
        ci95_low: value - 1.96 * std_error,
        ci95_high: value + 1.96 * std_error,
        samples_used: cfg.samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    #[serde(with = "numfmt::scalar")]
    pub t: f64,
    #[serde(with = "numfmt::scalar")]
    pub poly: f64,
    #[serde(with = "numfmt::scalar")]
    pub mc: f64,
    #[serde(with = "numfmt::scalar")]
    pub stderr: f64,
    #[serde(with = "numfmt::scalar")]
    pub z: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub instance: FamilyInstance,
    pub config: McConfig,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn all_within(&self) -> bool {
        self.rows.iter().all(|r| !r.flagged)
    }

    /// Columns `t,poly,mc,stderr,z`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,poly,mc,stderr,z\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                numfmt::fmt17(r.t),
                numfmt::fmt17(r.poly),
                numfmt::fmt17(r.mc),
                numfmt::fmt17(r.stderr),
                numfmt::fmt17(r.z)
            );
        }
        out
    }
}

fn z_score(mc: &McEstimate, exact: f64) -> f64 {
    let diff = mc.value - exact;
    if mc.std_error > 0.0 {
        diff / mc.std_error
    } else if diff.abs() <= 1e-12 * exact.abs().max(1.0) {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Compares `M_K(t)` with the Monte Carlo estimate at each `t`, all with the same seed.
pub fn validate_family(
    instance: &FamilyInstance,
    t_grid: &[f64],
    cfg: &McConfig,
    qcfg: &QuadratureConfig,
) -> Result<ComparisonTable> {
    if let Some(t) = t_grid.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::Domain(format!("t must be nonnegative, got {t}")));
    }
    let poly = minkowski_polynomial(instance, qcfg)?;
    let rows = t_grid
        .iter()
        .map(|&t| {
            let mc = estimate_tube_volume(instance, t, cfg)?;
            let exact = poly.value(t);
            let z = z_score(&mc, exact);
            Ok(ComparisonRow {
                t,
                poly: exact,
                mc: mc.value,
                stderr: mc.std_error,
                z,
                flagged: !(z.abs() <= Z_FLAG),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonTable {
        instance: *instance,
        config: *cfg,
        rows,
    })
}
