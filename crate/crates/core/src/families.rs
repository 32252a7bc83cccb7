//! Face data, intrinsic volumes and quermassintegrals of the four regular
//! families: Euclidean balls, cubes, cross-polytopes (l1-balls) and regular
//! simplexes.
//!
//! For a regular polytope all `l`-faces share one volume `v_l` and one external
//! angle `γ_l`, so `V_l = ν_l γ_l v_l`. Balls have no faces and are handled
//! through the binomial expansion of `κ_n (ρ + t)^n`.
//!
//! Values are carried as natural logs; `binomial(n, r)(2ρ)^r` leaves the
//! double range near `n ≈ 300`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::angles::{gamma_cross, gamma_simplex, QuadratureConfig};
use crate::error::{Error, Result};
use crate::specfun::{binomial_exact, log_binomial, log_factorial, log_unit_ball_volume};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Ball,
    Cube,
    #[serde(rename = "crosspolytope")]
    CrossPolytope,
    Simplex,
}

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::Ball, Kind::Cube, Kind::CrossPolytope, Kind::Simplex];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Ball => "ball",
            Kind::Cube => "cube",
            Kind::CrossPolytope => "crosspolytope",
            Kind::Simplex => "simplex",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "ball" => Ok(Kind::Ball),
            "cube" => Ok(Kind::Cube),
            "crosspolytope" | "cross" | "octahedron" => Ok(Kind::CrossPolytope),
            "simplex" => Ok(Kind::Simplex),
            other => Err(Error::Domain(format!("unknown family '{other}'"))),
        }
    }
}

/// One member of a family: kind, dimension `n >= 1` and size `ρ > 0`.
///
/// `ρ` is the radius of the ball, the half-edge of the cube, the l1-radius of
/// the cross-polytope and the coordinate sum of the simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyInstance {
    pub kind: Kind,
    pub n: usize,
    pub rho: f64,
}

impl FamilyInstance {
    pub fn new(kind: Kind, n: usize, rho: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Domain(format!("size parameter must be positive, got {rho}")));
        }
        Ok(Self { kind, n, rho })
    }

    pub fn unit(kind: Kind, n: usize) -> Result<Self> {
        Self::new(kind, n, 1.0)
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(self.kind, self.n, rho)
    }

    /// `ln Vol_n(K)`.
    pub fn ln_volume(&self) -> f64 {
        let n = self.n as f64;
        let lr = self.rho.ln();
        match self.kind {
            Kind::Ball => log_unit_ball_volume(self.n) + n * lr,
            Kind::Cube => n * (2.0 * self.rho).ln(),
            Kind::CrossPolytope => n * std::f64::consts::LN_2 + n * lr - log_factorial(self.n),
            Kind::Simplex => n * lr + 0.5 * (n + 1.0).ln() - log_factorial(self.n),
        }
    }

    pub fn volume(&self) -> f64 {
        self.ln_volume().exp()
    }

    /// Closed-form shape factor `σ_K = Vol_{n-1}(∂K) / Vol_n(K)` (units 1/length).
    pub fn shape_factor(&self) -> f64 {
        let n = self.n as f64;
        let s = match self.kind {
            Kind::Ball | Kind::Cube => n,
            Kind::CrossPolytope => n.powf(1.5),
            Kind::Simplex => n.powf(1.5) * (n + 1.0).sqrt(),
        };
        s / self.rho
    }

    /// Circumradius, used to size Monte Carlo bounding boxes.
    pub fn circumradius(&self) -> f64 {
        let n = self.n as f64;
        match self.kind {
            Kind::Ball | Kind::CrossPolytope => self.rho,
            Kind::Cube => self.rho * n.sqrt(),
            Kind::Simplex => self.rho * (n / (n + 1.0)).sqrt(),
        }
    }
}

fn check_face_index(kind: Kind, n: usize, l: usize) -> Result<()> {
    if kind == Kind::Ball {
        return Err(Error::UnsupportedKind(kind));
    }
    if n == 0 || l > n {
        return Err(Error::Domain(format!(
            "{kind}: face dimension must satisfy 0 <= l <= n, got n={n} l={l}"
        )));
    }
    Ok(())
}

/// Number `ν_l` of `l`-faces; `l = n` counts the body itself once.
///
/// Errors when the count does not fit in `u128`; [`ln_face_count`] covers
/// every dimension.
pub fn face_count(kind: Kind, n: usize, l: usize) -> Result<u128> {
    check_face_index(kind, n, l)?;
    let (n64, l64) = (n as u64, l as u64);
    let overflow = || Error::Domain(format!("{kind}: face count for n={n} l={l} overflows u128"));
    let count = match kind {
        Kind::Cube => {
            let b = binomial_exact(n64, l64).ok_or_else(overflow)?;
            1u128
                .checked_shl((n - l) as u32)
                .filter(|_| n - l < 128)
                .and_then(|p| p.checked_mul(b))
        }
        Kind::CrossPolytope if l == n => Some(1),
        Kind::CrossPolytope => {
            let b = binomial_exact(n64, l64 + 1).ok_or_else(overflow)?;
            1u128
                .checked_shl((l + 1) as u32)
                .filter(|_| l + 1 < 128)
                .and_then(|p| p.checked_mul(b))
        }
        Kind::Simplex => binomial_exact(n64 + 1, n64 - l64),
        Kind::Ball => unreachable!("rejected above"),
    };
    count.ok_or_else(overflow)
}

/// `ln ν_l`.
pub fn ln_face_count(kind: Kind, n: usize, l: usize) -> Result<f64> {
    check_face_index(kind, n, l)?;
    let ln2 = std::f64::consts::LN_2;
    Ok(match kind {
        Kind::Cube => (n - l) as f64 * ln2 + log_binomial(n, l),
        Kind::CrossPolytope if l == n => 0.0,
        Kind::CrossPolytope => (l + 1) as f64 * ln2 + log_binomial(n, l + 1),
        Kind::Simplex => log_binomial(n + 1, n - l),
        Kind::Ball => unreachable!("rejected above"),
    })
}

/// `ln v_l`, the log of the `l`-volume of one `l`-face.
pub fn ln_face_volume(kind: Kind, n: usize, l: usize, rho: f64) -> Result<f64> {
    check_face_index(kind, n, l)?;
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("size parameter must be positive, got {rho}")));
    }
    let lf = l as f64;
    Ok(match kind {
        Kind::Cube => lf * (2.0 * rho).ln(),
        Kind::CrossPolytope if l == n => FamilyInstance { kind, n, rho }.ln_volume(),
        // faces of both are regular l-simplexes with edge ρ√2
        Kind::CrossPolytope | Kind::Simplex => {
            lf * rho.ln() + 0.5 * (lf + 1.0).ln() - log_factorial(l)
        }
        Kind::Ball => unreachable!("rejected above"),
    })
}

pub fn face_volume(kind: Kind, n: usize, l: usize, rho: f64) -> Result<f64> {
    ln_face_volume(kind, n, l, rho).map(f64::exp)
}

/// Normalized external angle `γ_l` at an `l`-face; `1` for `l = n`.
pub fn external_angle(kind: Kind, n: usize, l: usize, cfg: &QuadratureConfig) -> Result<f64> {
    check_face_index(kind, n, l)?;
    if l == n {
        return Ok(1.0);
    }
    let wrap = |e: Error| Error::Angle {
        kind,
        n,
        l,
        source: Box::new(e),
    };
    match kind {
        Kind::Cube => Ok(0.5f64.powi((n - l) as i32)),
        Kind::CrossPolytope => gamma_cross(n, l, cfg).map(|v| v.value).map_err(wrap),
        Kind::Simplex => gamma_simplex(n, l, cfg).map(|v| v.value).map_err(wrap),
        Kind::Ball => unreachable!("rejected above"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceData {
    pub l: usize,
    /// `ν_l` when it fits in `u128`.
    pub nu: Option<u128>,
    pub ln_nu: f64,
    pub v: f64,
    pub gamma: f64,
}

pub fn face_data(instance: &FamilyInstance, l: usize, cfg: &QuadratureConfig) -> Result<FaceData> {
    let FamilyInstance { kind, n, rho } = *instance;
    Ok(FaceData {
        l,
        nu: face_count(kind, n, l).ok(),
        ln_nu: ln_face_count(kind, n, l)?,
        v: face_volume(kind, n, l, rho)?,
        gamma: external_angle(kind, n, l, cfg)?,
    })
}

/// Intrinsic volumes `V_0..V_n` and quermassintegrals `W_0..W_n` of one body,
/// related through `binomial(n,l) W_l = κ_l V_{n-l} = m_l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuermassVector {
    pub n: usize,
    ln_v: Vec<f64>,
    ln_w: Vec<f64>,
}

impl QuermassVector {
    /// Builds both sequences from `ln V_0..ln V_n`.
    pub fn from_ln_intrinsic(ln_v: Vec<f64>) -> Result<Self> {
        if ln_v.len() < 2 {
            return Err(Error::Domain("need at least V_0 and V_1".into()));
        }
        let n = ln_v.len() - 1;
        let ln_w = (0..=n)
            .map(|l| log_unit_ball_volume(l) + ln_v[n - l] - log_binomial(n, l))
            .collect();
        Ok(Self { n, ln_v, ln_w })
    }

    /// Builds both sequences from quermassintegrals `W_0..W_n` given directly.
    pub fn from_quermass(w: &[f64]) -> Result<Self> {
        if w.len() < 2 {
            return Err(Error::Domain("need at least W_0 and W_1".into()));
        }
        if let Some(bad) = w.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::Domain(format!("W_{bad} = {} is not positive", w[bad])));
        }
        let n = w.len() - 1;
        let ln_w: Vec<f64> = w.iter().map(|x| x.ln()).collect();
        let ln_v = (0..=n)
            .map(|r| {
                let l = n - r;
                ln_w[l] + log_binomial(n, l) - log_unit_ball_volume(l)
            })
            .collect();
        Ok(Self { n, ln_v, ln_w })
    }

    pub fn ln_v(&self) -> &[f64] {
        &self.ln_v
    }

    pub fn ln_w(&self) -> &[f64] {
        &self.ln_w
    }

    pub fn v(&self, r: usize) -> f64 {
        self.ln_v[r].exp()
    }

    pub fn w(&self, l: usize) -> f64 {
        self.ln_w[l].exp()
    }

    pub fn v_values(&self) -> Vec<f64> {
        self.ln_v.iter().map(|x| x.exp()).collect()
    }

    pub fn w_values(&self) -> Vec<f64> {
        self.ln_w.iter().map(|x| x.exp()).collect()
    }

    /// Indices `l` where `W_l² < W_{l-1} W_{l+1} (1 - slack)`.
    pub fn alexandrov_fenchel_violations(&self, slack: f64) -> Vec<usize> {
        let tol = (1.0 - slack).ln();
        (1..self.n)
            .filter(|&l| 2.0 * self.ln_w[l] < self.ln_w[l - 1] + self.ln_w[l + 1] + tol)
            .collect()
    }
}

/// Intrinsic volumes of `instance`.
///
/// Polytopes go through `V_r = ν_r γ_r v_r`; the ball through the expansion of
/// `κ_n (ρ + t)^n`, which gives `V_r = κ_n binomial(n, r) ρ^r / κ_{n-r}`.
pub fn intrinsic_volumes(instance: &FamilyInstance, cfg: &QuadratureConfig) -> Result<QuermassVector> {
    let FamilyInstance { kind, n, rho } = *instance;
    let ln_rho = rho.ln();
    let ln_v = match kind {
        Kind::Ball => (0..=n)
            .map(|r| {
                log_unit_ball_volume(n) + log_binomial(n, r) + r as f64 * ln_rho
                    - log_unit_ball_volume(n - r)
            })
            .collect(),
        _ => (0..=n)
            .map(|r| {
                let gamma = external_angle(kind, n, r, cfg)?;
                Ok(ln_face_count(kind, n, r)? + gamma.ln() + ln_face_volume(kind, n, r, rho)?)
            })
            .collect::<Result<Vec<f64>>>()?,
    };
    QuermassVector::from_ln_intrinsic(ln_v)
}

/// Orthonormal basis of the hyperplane `Σ ξ_i = const` in `R^{n+1}`.
///
/// Row `k` is `(1, .., 1, -(k+1), 0, ..) / √((k+1)(k+2))` with `k+1` leading ones.
pub fn simplex_hyperplane_basis(n: usize) -> Vec<Vec<f64>> {
    (1..=n)
        .map(|k| {
            let norm = ((k * (k + 1)) as f64).sqrt();
            let mut row = vec![0.0; n + 1];
            for x in row.iter_mut().take(k) {
                *x = 1.0 / norm;
            }
            row[k] = -(k as f64) / norm;
            row
        })
        .collect()
}
