//! Steiner–Minkowski polynomials `M_K(t) = Σ m_l t^l` and their renormalized
//! form `𝓜_K(τ) = M_K(τ/σ_K) / Vol_n(K) = Σ j_{n,l} μ_l τ^l / l!`.
//!
//! Coefficients are assembled in log-space. `j_{n,n} = n!/n^n` is far below
//! one for large `n`, so `μ_l` is extracted as
//! `exp(ln c_l + ln l! − ln j_{n,l})` rather than by division.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize};

use crate::angles::{i_cross, i_simplex, QuadratureConfig};
use crate::error::{Error, Result};
use crate::families::{intrinsic_volumes, FamilyInstance, Kind, QuermassVector};
use crate::numfmt;
use crate::specfun::{log_binomial, log_factorial, log_gamma_unchecked, log_jensen, log_unit_ball_volume};

/// Relative slack for the Alexandrov–Fenchel-derived checks.
pub const LEMMA1_SLACK: f64 = 1e-9;

/// Relative slack for the coefficient bound `c_l <= 1/l!`.
pub const LEMMA2_SLACK: f64 = 1e-10;

/// `M_K(t)`; `m_l` has units length^{n−l}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinkowskiPolynomial {
    pub kind: Kind,
    pub n: usize,
    #[serde(with = "numfmt::scalar")]
    pub rho: f64,
    #[serde(rename = "coefficients", with = "numfmt::vector")]
    m: Vec<f64>,
    #[serde(skip)]
    ln_m: Vec<f64>,
}

impl MinkowskiPolynomial {
    fn from_ln(instance: &FamilyInstance, ln_m: Vec<f64>) -> Self {
        Self {
            kind: instance.kind,
            n: instance.n,
            rho: instance.rho,
            m: ln_m.iter().map(|x| x.exp()).collect(),
            ln_m,
        }
    }

    pub fn instance(&self) -> FamilyInstance {
        FamilyInstance {
            kind: self.kind,
            n: self.n,
            rho: self.rho,
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.m
    }

    pub fn ln_coefficients(&self) -> &[f64] {
        &self.ln_m
    }

    pub fn m(&self, l: usize) -> f64 {
        self.m[l]
    }

    /// `Vol_n(K)`
    pub fn volume(&self) -> f64 {
        self.m[0]
    }

    /// `Vol_{n-1}(∂K)`
    pub fn surface_area(&self) -> f64 {
        self.m[1]
    }

    /// `m_1 / m_0`, the shape factor read off the polynomial.
    pub fn shape_factor(&self) -> f64 {
        (self.ln_m[1] - self.ln_m[0]).exp()
    }

    /// `M_K(t)` for `t >= 0`, summed term by term from the logs.
    pub fn value(&self, t: f64) -> f64 {
        if t == 0.0 {
            return self.m[0];
        }
        let lt = t.ln();
        self.ln_m
            .iter()
            .enumerate()
            .map(|(l, lm)| (lm + l as f64 * lt).exp())
            .sum()
    }
}

impl<'de> Deserialize<'de> for MinkowskiPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            kind: Kind,
            n: usize,
            #[serde(with = "numfmt::scalar")]
            rho: f64,
            #[serde(with = "numfmt::vector")]
            coefficients: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        if raw.coefficients.len() != raw.n + 1 {
            return Err(serde::de::Error::custom("coefficient count must be n + 1"));
        }
        Ok(Self {
            kind: raw.kind,
            n: raw.n,
            rho: raw.rho,
            ln_m: raw.coefficients.iter().map(|x| x.ln()).collect(),
            m: raw.coefficients,
        })
    }
}

/// `𝓜_K(τ) = Σ c_l τ^l` with `c_l = j_{n,l} μ_l / l!`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenormalizedPolynomial {
    pub kind: Kind,
    pub n: usize,
    #[serde(with = "numfmt::scalar")]
    pub rho: f64,
    #[serde(rename = "coefficients", with = "numfmt::vector")]
    c: Vec<f64>,
    #[serde(with = "numfmt::vector")]
    mu: Vec<f64>,
    #[serde(skip)]
    ln_c: Vec<f64>,
}

impl<'de> Deserialize<'de> for RenormalizedPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            kind: Kind,
            n: usize,
            #[serde(with = "numfmt::scalar")]
            rho: f64,
            #[serde(with = "numfmt::vector")]
            coefficients: Vec<f64>,
            #[serde(with = "numfmt::vector")]
            mu: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        if raw.coefficients.len() != raw.n + 1 || raw.mu.len() != raw.n + 1 {
            return Err(serde::de::Error::custom("coefficient and mu counts must be n + 1"));
        }
        // logs come from μ, which never underflows
        let ln_c = (0..=raw.n)
            .map(|l| log_jensen(raw.n, l) + raw.mu[l].ln() - log_factorial(l))
            .collect();
        Ok(Self {
            kind: raw.kind,
            n: raw.n,
            rho: raw.rho,
            c: raw.coefficients,
            mu: raw.mu,
            ln_c,
        })
    }
}

impl RenormalizedPolynomial {
    /// Builds the polynomial from `ln c_0..ln c_n`.
    pub fn from_ln_coefficients(kind: Kind, n: usize, rho: f64, ln_c: Vec<f64>) -> Result<Self> {
        if ln_c.len() != n + 1 {
            return Err(Error::Domain(format!(
                "expected {} coefficients, got {}",
                n + 1,
                ln_c.len()
            )));
        }
        let mu = ln_c
            .iter()
            .enumerate()
            .map(|(l, lc)| (lc + log_factorial(l) - log_jensen(n, l)).exp())
            .collect();
        Ok(Self {
            kind,
            n,
            rho,
            c: ln_c.iter().map(|x| x.exp()).collect(),
            mu,
            ln_c,
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn ln_coefficients(&self) -> &[f64] {
        &self.ln_c
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Copy with `μ_l` replaced; coefficients follow.
    pub fn with_mu(&self, l: usize, value: f64) -> Self {
        let mut mu = self.mu.clone();
        mu[l] = value;
        let ln_c: Vec<f64> = (0..=self.n)
            .map(|k| log_jensen(self.n, k) + mu[k].ln() - log_factorial(k))
            .collect();
        Self {
            c: ln_c.iter().map(|x| x.exp()).collect(),
            mu,
            ln_c,
            ..self.clone()
        }
    }
}

/// Assembles `M_K(t)` with `m_l = κ_l V_{n-l}(K)`; for balls `m_l = κ_n binomial(n,l) ρ^{n-l}`.
pub fn minkowski_polynomial(instance: &FamilyInstance, cfg: &QuadratureConfig) -> Result<MinkowskiPolynomial> {
    let n = instance.n;
    let ln_m = match instance.kind {
        Kind::Ball => {
            let lr = instance.rho.ln();
            (0..=n)
                .map(|l| log_unit_ball_volume(n) + log_binomial(n, l) + (n - l) as f64 * lr)
                .collect()
        }
        _ => {
            let q = intrinsic_volumes(instance, cfg)?;
            (0..=n)
                .map(|l| log_unit_ball_volume(l) + q.ln_v()[n - l])
                .collect()
        }
    };
    Ok(MinkowskiPolynomial::from_ln(instance, ln_m))
}

/// `c_l = m_l / (vol · σ^l)`, `μ_l = c_l l! / j_{n,l}`.
pub fn renormalize(poly: &MinkowskiPolynomial, sigma: f64, vol: f64) -> Result<RenormalizedPolynomial> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("shape factor must be positive, got {sigma}: body is not solid")));
    }
    if !(vol > 0.0) {
        return Err(Error::Domain(format!("volume must be positive, got {vol}: body is not solid")));
    }
    renormalize_ln(poly, sigma.ln(), vol.ln())
}

/// [`renormalize`] with `ln σ` and `ln vol`, usable when `vol` overflows.
pub fn renormalize_ln(poly: &MinkowskiPolynomial, ln_sigma: f64, ln_vol: f64) -> Result<RenormalizedPolynomial> {
    if !ln_sigma.is_finite() || !ln_vol.is_finite() {
        return Err(Error::Domain("shape factor and volume must be positive and finite".into()));
    }
    let ln_c = poly
        .ln_m
        .iter()
        .enumerate()
        .map(|(l, lm)| lm - ln_vol - l as f64 * ln_sigma)
        .collect();
    RenormalizedPolynomial::from_ln_coefficients(poly.kind, poly.n, poly.rho, ln_c)
}

/// The full pipeline: assemble, then renormalize by the closed-form shape factor
/// and `m_0`.
pub fn renormalized(instance: &FamilyInstance, cfg: &QuadratureConfig) -> Result<RenormalizedPolynomial> {
    let poly = minkowski_polynomial(instance, cfg)?;
    let ln_vol = poly.ln_m[0];
    renormalize_ln(&poly, instance.shape_factor().ln(), ln_vol)
}

/// Every coefficient sequence of one body, indexed by `l`: `m_l`, `W_l`, the
/// intrinsic volume `V_l`, `c_l` and `μ_l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub l: usize,
    #[serde(with = "numfmt::scalar")]
    pub m: f64,
    #[serde(with = "numfmt::scalar")]
    pub w: f64,
    #[serde(with = "numfmt::scalar")]
    pub v: f64,
    #[serde(with = "numfmt::scalar")]
    pub c: f64,
    #[serde(with = "numfmt::scalar")]
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub kind: Kind,
    pub n: usize,
    #[serde(with = "numfmt::scalar")]
    pub rho: f64,
    #[serde(with = "numfmt::scalar")]
    pub shape_factor: f64,
    #[serde(with = "numfmt::scalar")]
    pub volume: f64,
    pub rows: Vec<CoefficientRow>,
}

pub fn coefficient_table(instance: &FamilyInstance, cfg: &QuadratureConfig) -> Result<CoefficientTable> {
    let q = intrinsic_volumes(instance, cfg)?;
    let poly = minkowski_polynomial(instance, cfg)?;
    let r = renormalize_ln(&poly, instance.shape_factor().ln(), poly.ln_m[0])?;
    let rows = (0..=instance.n)
        .map(|l| CoefficientRow {
            l,
            m: poly.m[l],
            w: q.w(l),
            v: q.v(l),
            c: r.coefficients()[l],
            mu: r.mu()[l],
        })
        .collect();
    Ok(CoefficientTable {
        kind: instance.kind,
        n: instance.n,
        rho: instance.rho,
        shape_factor: instance.shape_factor(),
        volume: poly.m[0],
        rows,
    })
}

/// `μ_l = W_0^{l-1} W_l / W_1^l`.
pub fn mu_from_quermass(w: &QuermassVector) -> Result<Vec<f64>> {
    let lw = w.ln_w();
    if let Some(bad) = lw.iter().position(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("W_{bad} is not positive and finite")));
    }
    Ok((0..lw.len())
        .map(|l| {
            let lf = l as f64;
            ((lf - 1.0) * lw[0] + lw[l] - lf * lw[1]).exp()
        })
        .collect())
}

/// `𝓜` built straight from the family's displayed closed form, bypassing the
/// intrinsic-volume pipeline.
///
/// * ball: `(1 + τ/n)^n`
/// * cube: `j_{n,l} (√π/2)^l / (Γ(l/2+1) l!)`
/// * cross-polytope: `(√π/2)^l j_{n,l}² √n/√(n−l+1) · 2n^{(l−1)/2}/Γ(l/2) · I_{n,l} / l!`
/// * simplex: `π^{l/2} I_{n,l} √(n−l+1)/√(n+1) ((n+1)/n)^{l/2} j_{n+1,l} j_{n,l} / (Γ(l/2+1) l!)`
pub fn closed_form_renormalized(kind: Kind, n: usize, cfg: &QuadratureConfig) -> Result<RenormalizedPolynomial> {
    if n == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let nf = n as f64;
    let ln_half_sqrt_pi = (0.5 * PI.sqrt()).ln();
    let ln_c = (0..=n)
        .map(|l| -> Result<f64> {
            let lf = l as f64;
            let jl = log_jensen(n, l);
            let lfact = log_factorial(l);
            Ok(match kind {
                Kind::Ball => jl - lfact,
                Kind::Cube => jl + lf * ln_half_sqrt_pi - log_gamma_unchecked(0.5 * lf + 1.0) - lfact,
                Kind::CrossPolytope if l == 0 => 0.0,
                Kind::CrossPolytope => {
                    let i = i_cross(n, l, cfg).map_err(|e| wrap(kind, n, l, e))?.value;
                    lf * ln_half_sqrt_pi + 2.0 * jl + 0.5 * nf.ln() - 0.5 * (nf - lf + 1.0).ln()
                        + 2f64.ln()
                        + 0.5 * (lf - 1.0) * nf.ln()
                        - log_gamma_unchecked(0.5 * lf)
                        + i.ln()
                        - lfact
                }
                Kind::Simplex => {
                    let i = i_simplex(n, l, cfg).map_err(|e| wrap(kind, n, l, e))?.value;
                    0.5 * lf * PI.ln() + i.ln() + 0.5 * (nf - lf + 1.0).ln() - 0.5 * (nf + 1.0).ln()
                        + 0.5 * lf * ((nf + 1.0) / nf).ln()
                        + log_jensen(n + 1, l)
                        + jl
                        - log_gamma_unchecked(0.5 * lf + 1.0)
                        - lfact
                }
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    RenormalizedPolynomial::from_ln_coefficients(kind, n, 1.0, ln_c)
}

fn wrap(kind: Kind, n: usize, l: usize, e: Error) -> Error {
    Error::Angle {
        kind,
        n,
        l,
        source: Box::new(e),
    }
}

/// `𝓜(τ)` by Horner's rule.
pub fn evaluate(poly: &RenormalizedPolynomial, tau: Complex64) -> Complex64 {
    poly.c
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * tau + c)
}

/// Indices failing `0 < μ_l <= 1` or log-concavity of `μ`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    /// `μ_l <= 0` or not finite.
    pub nonpositive: Vec<usize>,
    /// `μ_l > 1` beyond the slack.
    pub above_one: Vec<usize>,
    /// `μ_l² < μ_{l-1} μ_{l+1} (1 − slack)`.
    pub not_log_concave: Vec<usize>,
}

impl Lemma1Report {
    pub fn is_clean(&self) -> bool {
        self.nonpositive.is_empty() && self.above_one.is_empty() && self.not_log_concave.is_empty()
    }
}

pub fn check_lemma1(poly: &RenormalizedPolynomial, slack: f64) -> Lemma1Report {
    let mu = &poly.mu;
    let mut report = Lemma1Report::default();
    for (l, &m) in mu.iter().enumerate() {
        if !(m > 0.0) || !m.is_finite() {
            report.nonpositive.push(l);
        } else if m > 1.0 + slack {
            report.above_one.push(l);
        }
    }
    for l in 1..mu.len().saturating_sub(1) {
        if mu[l] * mu[l] < mu[l - 1] * mu[l + 1] * (1.0 - slack) {
            report.not_log_concave.push(l);
        }
    }
    report
}

/// Indices where `c_l > (1 + slack)/l!`.
pub fn coefficient_bound_violations(poly: &RenormalizedPolynomial, slack: f64) -> Vec<usize> {
    poly.ln_c
        .iter()
        .enumerate()
        .filter(|(l, lc)| **lc > -log_factorial(*l) + slack.ln_1p())
        .map(|(l, _)| l)
        .collect()
}
