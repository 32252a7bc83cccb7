//! All complex zeros of renormalized polynomials via Aberth–Ehrlich
//! simultaneous iteration on a precision ladder: double, double-double, then
//! multiprecision at 256, 512, ... bits. A rung is accepted once it reproduces
//! the roots of the rung below it.
//!
//! The polynomial is solved in the scaled variable `u = τ/s` with
//! `s = (c_0/c_n)^{1/n}`, which puts the geometric mean of the root moduli at 1.
//! For the ball `s = n` exactly.
//!
//! A multiple root of order `m` can only be resolved to about `ε^{1/m}` by any
//! pointwise iteration. Approximations whose Weierstrass inclusion disks
//! overlap are merged, and the cluster is replaced by the nearby zero of the
//! `(m-1)`-th derivative, which is well conditioned.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angles::QuadratureConfig;
use crate::error::{Error, Result};
use crate::families::{FamilyInstance, Kind};
use crate::numfmt;
use crate::polynomials::{renormalized, RenormalizedPolynomial};
use crate::precision::{mp, mp_int, mp_pi, Cx, Dd, Mp, Real, DD_EPSILON};

/// Default relative tolerance for distinguishing real roots, scaled by `1 + |root|`.
pub const DEFAULT_IMAG_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootConfig {
    /// Aberth sweeps per precision rung.
    pub max_iterations: usize,
    /// Residual bound relative to `Σ |c_l| |τ|^l`.
    pub residual_tol: f64,
    /// Two rungs agree when matched roots differ by at most this times `1 + |u|`.
    pub agreement_tol: f64,
    pub max_precision_bits: usize,
    /// Relative uncertainty of coefficients supplied as doubles.
    pub coefficient_rel_error: f64,
    pub merge_clusters: bool,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            max_iterations: 600,
            residual_tol: 1e-12,
            agreement_tol: 1e-10,
            max_precision_bits: 2048,
            coefficient_rel_error: 4.0 * f64::EPSILON,
            merge_clusters: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    /// Zeros in `τ`, sorted by decreasing real part.
    #[serde(with = "pairs")]
    pub roots: Vec<Complex64>,
    /// `|𝓜(root)|` plus a bound on evaluation and coefficient rounding.
    #[serde(with = "numfmt::vector")]
    pub residuals: Vec<f64>,
    /// `Σ |c_l| |root|^l` for each root.
    #[serde(with = "numfmt::vector")]
    pub scales: Vec<f64>,
    /// How far each root can move when the coefficients vary within their
    /// stated uncertainty (first order, or the cluster radius for merged roots).
    #[serde(with = "numfmt::vector")]
    pub uncertainties: Vec<f64>,
    /// Significand bits of the accepted rung.
    pub precision_bits: usize,
    #[serde(with = "numfmt::scalar")]
    pub scale: f64,
    /// Sizes of merged clusters (only those with more than one member).
    pub clusters: Vec<usize>,
    pub iterations: usize,
    pub precision_used: String,
}

mod pairs {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(zs: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<[String; 2]> = zs
            .iter()
            .map(|z| [numfmt::fmt17(z.re), numfmt::fmt17(z.im)])
            .collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Complex64>, D::Error> {
        let raw = Vec::<[String; 2]>::deserialize(d)?;
        raw.iter()
            .map(|[re, im]| {
                Ok(Complex64::new(
                    numfmt::parse17(re).map_err(serde::de::Error::custom)?,
                    numfmt::parse17(im).map_err(serde::de::Error::custom)?,
                ))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroLocationReport {
    pub all_negative_real: bool,
    pub all_left_half_plane: bool,
    #[serde(with = "numfmt::scalar")]
    pub max_real_part: f64,
    #[serde(with = "numfmt::scalar")]
    pub max_abs_imag_among_roots: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rung {
    Double,
    DoubleDouble,
    Multi(usize),
}

impl Rung {
    fn bits(self) -> usize {
        match self {
            Rung::Double => 53,
            Rung::DoubleDouble => 106,
            Rung::Multi(b) => b,
        }
    }

    fn eps(self) -> f64 {
        match self {
            Rung::Double => f64::EPSILON / 2.0,
            Rung::DoubleDouble => DD_EPSILON,
            Rung::Multi(b) => 2f64.powi(-(b as i32)),
        }
    }

    fn label(self) -> String {
        match self {
            Rung::Double => "double".into(),
            Rung::DoubleDouble => "double-double".into(),
            Rung::Multi(b) => format!("{b}-bit multiprecision"),
        }
    }
}

fn ladder(max_bits: usize) -> Vec<Rung> {
    let mut rungs = vec![Rung::Double, Rung::DoubleDouble];
    let mut b = 256;
    while b <= max_bits {
        rungs.push(Rung::Multi(b));
        b *= 2;
    }
    rungs
}

/// Scaled polynomial `Σ a_l u^l` in a form every rung can instantiate.
struct Problem<'a> {
    n: usize,
    scale: f64,
    abs_a: Vec<f64>,
    /// Relative uncertainty of each `a_l` before rounding into a rung.
    rel_err: Vec<f64>,
    coeffs: &'a (dyn Fn(usize) -> Vec<Mp> + Sync),
    source: &'static str,
}

#[derive(Debug, Clone)]
struct RungResult {
    roots: Vec<Complex64>,
    raw: Vec<Complex64>,
    /// Radius within which each root moves under the coefficient uncertainty.
    uncertainty: Vec<f64>,
    clusters: Vec<usize>,
    iterations: usize,
    converged: bool,
}

/// Rounding bound for a Horner evaluation of degree `n` with unit roundoff `eps`.
fn eval_bound(n: usize, eps: f64, scale: f64) -> f64 {
    8.0 * (n as f64 + 1.0) * eps * scale
}

fn abs_sum(abs_a: &[f64], r: f64) -> f64 {
    abs_a.iter().rev().fold(0.0, |s, a| s * r + a)
}

fn horner<T: Real>(a: &[T], z: &Cx<T>, bits: usize) -> (Cx<T>, Cx<T>) {
    let mut p = Cx::real(T::lift(0.0, bits), bits);
    let mut dp = p.clone();
    for al in a.iter().rev() {
        dp = dp * z.clone() + p.clone();
        p = (p * z.clone()).add_real(al);
    }
    (p, dp)
}

/// Positive root of `|a_n| x^n = Σ_{l<n} |a_l| x^l`, an upper bound on root moduli.
fn cauchy_radius(abs_a: &[f64]) -> f64 {
    let n = abs_a.len() - 1;
    let f = |x: f64| {
        let mut s = abs_a[n];
        for l in (0..n).rev() {
            s = s * x - abs_a[l];
        }
        s
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn circle_start(n: usize, radius: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect()
}

fn solve_rung<T: Real>(prob: &Problem, rung: Rung, start: &[Complex64], cfg: &RootConfig) -> RungResult {
    let n = prob.n;
    let bits = rung.bits();
    let eps = rung.eps();
    let a: Vec<T> = (prob.coeffs)(bits + 32).iter().map(|x| T::from_mp(x, bits)).collect();
    let one = Cx::real(T::lift(1.0, bits), bits);

    let mut z: Vec<Cx<T>> = start.iter().map(|&s| Cx::lift(s, bits)).collect();
    let mut done = vec![false; n];
    let mut iterations = 0;
    for _ in 0..cfg.max_iterations {
        iterations += 1;
        let mut all_done = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (p, dp) = horner(&a, &z[i], bits);
            let r = z[i].norm();
            if p.norm() <= eval_bound(n, eps, abs_sum(&prob.abs_a, r)) {
                done[i] = true;
                continue;
            }
            all_done = false;
            let mut sum = Cx::real(T::lift(0.0, bits), bits);
            for j in 0..n {
                if j != i {
                    let d = z[i].clone() - z[j].clone();
                    if d.norm() > 0.0 {
                        sum = sum + d.recip();
                    }
                }
            }
            let ratio = p / dp;
            let w = ratio.clone() / (one.clone() - ratio * sum);
            let wn = w.norm();
            if !wn.is_finite() {
                // stuck on a critical point or a coincident neighbour
                let kick = Complex64::new(1e-3, 7e-4) * (1.0 + r);
                z[i] = z[i].clone() + Cx::lift(kick, bits);
                continue;
            }
            z[i] = z[i].clone() - w;
            if wn <= 4.0 * eps * z[i].norm() {
                done[i] = true;
            }
        }
        if all_done {
            break;
        }
    }
    let converged = done.iter().all(|&d| d);
    let raw: Vec<Complex64> = z.iter().map(|v| v.to_c64()).collect();

    let mut clusters = Vec::new();
    let mut uncertainty = vec![f64::NAN; n];
    if cfg.merge_clusters && n > 1 {
        for group in find_clusters(prob, &a, &z, rung) {
            if group.len() > 1 {
                if let Some((value, radius)) = merge_cluster(prob, &a, &z, &group, rung) {
                    for &i in &group {
                        z[i] = value.clone();
                        uncertainty[i] = radius;
                    }
                    clusters.push(group.len());
                }
            }
        }
    }
    for i in 0..n {
        if uncertainty[i].is_nan() {
            let (_, dp) = horner(&a, &z[i], bits);
            uncertainty[i] = noise(prob, rung, z[i].norm()) / dp.norm();
        }
    }
    RungResult {
        roots: z.iter().map(|v| v.to_c64()).collect(),
        raw,
        uncertainty,
        clusters,
        iterations,
        converged,
    }
}

/// Bound on `|p̃(u) - p(u)|` over all `p̃` within the coefficient uncertainty,
/// plus the evaluation error, at `|u| = r`.
fn noise(prob: &Problem, rung: Rung, r: f64) -> f64 {
    let mut u = 0.0;
    for l in (0..=prob.n).rev() {
        u = u * r + (prob.rel_err[l] + rung.eps()) * prob.abs_a[l];
    }
    u + eval_bound(prob.n, rung.eps(), abs_sum(&prob.abs_a, r))
}

/// Weierstrass inclusion radii
/// `n (|p(z_i)| + δ_i) / (|a_n| Π_{j≠i} |z_i - z_j|)`, where `δ_i` bounds the
/// evaluation error and the coefficient uncertainty at `z_i`. Each connected
/// component of k intersecting disks holds exactly k zeros of every polynomial
/// within the coefficient uncertainty.
fn find_clusters<T: Real>(prob: &Problem, a: &[T], z: &[Cx<T>], rung: Rung) -> Vec<Vec<usize>> {
    let n = z.len();
    let bits = rung.bits();
    let ln_lead = prob.abs_a[n].ln();
    let radii: Vec<f64> = (0..n)
        .map(|i| {
            let (p, _) = horner(a, &z[i], bits);
            let r = z[i].norm();
                    let num = p.norm() + noise(prob, rung, r);
            let mut ln_prod = ln_lead;
            for j in 0..n {
                if j != i {
                    let d = (z[i].clone() - z[j].clone()).norm();
                    if d == 0.0 {
                        return f64::INFINITY;
                    }
                    ln_prod += d.ln();
                }
            }
            (n as f64) * (num.ln() - ln_prod).exp()
        })
        .collect();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (z[i].clone() - z[j].clone()).norm() <= radii[i] + radii[j] {
                let (x, y) = (find(&mut parent, i), find(&mut parent, j));
                if x != y {
                    parent[x] = y;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Coefficients of `p(x + v)` in powers of `v`, by repeated synthetic division.
fn taylor_shift<T: Real>(p: &[Cx<T>], x: &Cx<T>) -> Vec<Cx<T>> {
    let mut b = p.to_vec();
    let n = b.len() - 1;
    for k in 0..n {
        for j in (k..n).rev() {
            b[j] = b[j].clone() + x.clone() * b[j + 1].clone();
        }
    }
    b
}

fn taylor_shift_abs(p: &[f64], x: f64) -> Vec<f64> {
    let mut b = p.to_vec();
    let n = b.len() - 1;
    for k in 0..n {
        for j in (k..n).rev() {
            b[j] += x * b[j + 1];
        }
    }
    b
}

/// Collapses a cluster of `k` approximations onto the zero `x` of `p^{(k-1)}`
/// near their centroid. The merge is accepted only if some polynomial within
/// the coefficient uncertainty (and the rounding error of this test) has a
/// `k`-fold zero at `x`: the perturbation `Σ_{j<k} t_j (u-x)^j`, built from the
/// Taylor coefficients of `p` at `x`, must be coefficientwise negligible. A
/// cloud of distinct but ill-conditioned roots fails this test. Returns the
/// merged value and the radius `(noise / |p^{(k)}(x)/k!|)^{1/k}` of the cluster.
fn merge_cluster<T: Real>(prob: &Problem, a: &[T], z: &[Cx<T>], group: &[usize], rung: Rung) -> Option<(Cx<T>, f64)> {
    let bits = rung.bits();
    let eps = rung.eps();
    let k = group.len();
    let n = a.len() - 1;
    let mut centroid = Cx::real(T::lift(0.0, bits), bits);
    for &i in group {
        centroid = centroid + z[i].clone();
    }
    let centroid = centroid.scale(&(T::lift(1.0, bits) / T::lift(k as f64, bits)));
    let spread = group
        .iter()
        .map(|&i| (z[i].clone() - centroid.clone()).norm())
        .fold(0.0, f64::max);

    // q = p^{(k-1)}/(k-1)!
    let mut q = Vec::with_capacity(n + 2 - k);
    let mut b = T::lift(1.0, bits);
    for l in 0..=(n + 1 - k) {
        if l > 0 {
            b = b * T::lift((l + k - 1) as f64, bits) / T::lift(l as f64, bits);
        }
        q.push(a[l + k - 1].clone() * b.clone());
    }
    let mut x = centroid.clone();
    for _ in 0..200 {
        let (p, dp) = horner(&q, &x, bits);
        let step = p / dp;
        let sn = step.norm();
        if !sn.is_finite() {
            return None;
        }
        x = x - step;
        if sn <= 4.0 * eps * (1.0 + x.norm()) {
            break;
        }
    }
    if (x.clone() - centroid.clone()).norm() > 2.0 * spread + 8.0 * eps * (1.0 + centroid.norm()) {
        return None;
    }

    let ac: Vec<Cx<T>> = a.iter().map(|v| Cx::real(v.clone(), bits)).collect();
    let t = taylor_shift(&ac, &x);
    let e = taylor_shift(&t[..k], &(Cx::lift(Complex64::new(0.0, 0.0), bits) - x.clone()));
    let r = x.norm();
    let t_abs = taylor_shift_abs(&prob.abs_a, r);
    let e_abs = taylor_shift_abs(&t_abs[..k], r);
    let slack = 4.0 * (k as f64 + 1.0);
    for l in 0..k {
        let allowed = (prob.rel_err[l] + eps) * prob.abs_a[l] + 8.0 * (n as f64 + 1.0) * eps * e_abs[l];
        if e[l].norm() > slack * allowed {
            return None;
        }
    }
    let level = noise(prob, rung, r);
    Some((x, (level / t[k].norm()).powf(1.0 / k as f64)))
}

/// Whether every root of `a` has a distinct partner in `b` within tolerance.
fn agree(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    let mut used = vec![false; b.len()];
    for za in a {
        let best = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, zb)| (j, (za - zb).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1));
        match best {
            Some((j, d)) if d <= tol * (1.0 + za.norm()) => used[j] = true,
            _ => return false,
        }
    }
    true
}

fn run_ladder(prob: &Problem, cfg: &RootConfig) -> Result<(RungResult, Rung, Option<Rung>)> {
    let n = prob.n;
    let mut start = circle_start(n, cauchy_radius(&prob.abs_a));
    let mut prev: Option<(RungResult, Rung)> = None;
    let mut total_iterations = 0;
    for rung in ladder(cfg.max_precision_bits) {
        let mut res = match rung {
            Rung::Double => solve_rung::<f64>(prob, rung, &start, cfg),
            Rung::DoubleDouble => solve_rung::<Dd>(prob, rung, &start, cfg),
            Rung::Multi(_) => solve_rung::<Mp>(prob, rung, &start, cfg),
        };
        total_iterations += res.iterations;
        res.iterations = total_iterations;
        if let Some((p, prung)) = &prev {
            if res.converged && p.converged && agree(&res.roots, &p.roots, cfg.agreement_tol) {
                return Ok((res, rung, Some(*prung)));
            }
        }
        if res.raw.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            start = res.raw.clone();
        }
        prev = Some((res, rung));
    }
    let (res, _) = prev.expect("ladder has at least two rungs");
    let a: Vec<Dd> = (prob.coeffs)(256).iter().map(|x| Dd::from_mp(x, 0)).collect();
    let residuals: Vec<f64> = res
        .roots
        .iter()
        .map(|&u| horner(&a, &Cx::lift(u, 0), 0).0.norm())
        .collect();
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    Err(Error::RootsNotConverged {
        iterations: res.iterations,
        best: res.roots.iter().map(|z| z * prob.scale).collect(),
        residuals,
        max_residual,
    })
}

/// `(|𝓜(τ)|, Σ |c_l| |τ|^l, coefficient rounding bound)` in double-double,
/// evaluated through the scaled coefficients `c_l s^l` so that no
/// coefficient underflows.
fn evaluate_scaled(ln_c: &[f64], ln_s: f64, tau: Complex64) -> (f64, f64, f64) {
    let s = ln_s.exp();
    let u: Cx<Dd> = Cx::lift(tau / s, 0);
    let r = (tau / s).norm();
    let mut p = Cx::real(Dd::ZERO, 0);
    let mut scale = 0.0;
    let mut coef_err = 0.0;
    for (l, lc) in ln_c.iter().enumerate().rev() {
        let arg = lc + l as f64 * ln_s;
        let al = arg.exp();
        p = (p * u.clone()).add_real(&Dd::new(al));
        scale = scale * r + al;
        coef_err = coef_err * r + 2.0 * f64::EPSILON * (1.0 + arg.abs()) * al;
    }
    (p.norm(), scale, coef_err)
}

fn finish(
    poly: &RenormalizedPolynomial,
    ln_s: f64,
    prob: &Problem,
    res: RungResult,
    rung: Rung,
    confirmed: Option<Rung>,
    residual_tol: f64,
) -> Result<RootSet> {
    let n = prob.n;
    let scale = prob.scale;
    let mut order: Vec<(Complex64, f64)> = res
        .roots
        .iter()
        .zip(&res.uncertainty)
        .map(|(u, r)| (u * scale, r * scale))
        .collect();
    order.sort_by(|(x, _), (y, _)| y.re.total_cmp(&x.re).then(x.im.total_cmp(&y.im)));
    let (taus, uncertainties): (Vec<Complex64>, Vec<f64>) = order.into_iter().unzip();
    let ln_c = poly.ln_coefficients();
    let mut residuals = Vec::with_capacity(n);
    let mut scales = Vec::with_capacity(n);
    for t in &taus {
        let (p, sc, ce) = evaluate_scaled(ln_c, ln_s, *t);
        residuals.push(p + eval_bound(n, DD_EPSILON, sc) + ce);
        scales.push(sc);
    }
    let confirmed = confirmed
        .map(|r| format!(", confirmed at {}", r.label()))
        .unwrap_or_default();
    let precision_used = format!(
        "{}{}; tau = {:.6e} * u; coefficients: {}; {} cluster(s) merged",
        rung.label(),
        confirmed,
        scale,
        prob.source,
        res.clusters.len()
    );
    if residuals.iter().zip(&scales).any(|(r, s)| !(*r <= residual_tol * s)) {
        let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
        return Err(Error::RootsNotConverged {
            iterations: res.iterations,
            best: taus,
            residuals,
            max_residual,
        });
    }
    Ok(RootSet {
        roots: taus,
        residuals,
        scales,
        uncertainties,
        precision_bits: rung.bits(),
        scale,
        clusters: res.clusters,
        iterations: res.iterations,
        precision_used,
    })
}

fn check_degree(poly: &RenormalizedPolynomial) -> Result<(usize, f64)> {
    let n = poly.degree();
    if n == 0 {
        return Err(Error::Domain("a constant polynomial has no roots".into()));
    }
    let ln_c = poly.ln_coefficients();
    if ln_c.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("root finding needs every coefficient positive".into()));
    }
    Ok((n, (ln_c[0] - ln_c[n]) / n as f64))
}

/// Finds all `n` zeros of `poly`, counted with multiplicity. The stored
/// coefficients are taken as exact up to `cfg.coefficient_rel_error`.
pub fn find_roots(poly: &RenormalizedPolynomial, cfg: &RootConfig) -> Result<RootSet> {
    let (n, ln_s) = check_degree(poly)?;
    let ln_c = poly.ln_coefficients();
    let args: Vec<f64> = (0..=n).map(|l| ln_c[l] + l as f64 * ln_s - ln_c[0]).collect();
    let a: Vec<f64> = args.iter().map(|x| x.exp()).collect();
    let rel_err: Vec<f64> = args
        .iter()
        .map(|x| cfg.coefficient_rel_error + 2.0 * f64::EPSILON * (1.0 + x.abs()))
        .collect();
    let coeffs = |bits: usize| a.iter().map(|&x| mp(x, bits)).collect::<Vec<_>>();
    let prob = Problem {
        n,
        scale: ln_s.exp(),
        abs_a: a.clone(),
        rel_err,
        coeffs: &coeffs,
        source: "double",
    };
    let (res, rung, confirmed) = run_ladder(&prob, cfg)?;
    finish(poly, ln_s, &prob, res, rung, confirmed, cfg.residual_tol)
}

/// `c_l` of the renormalized ball or cube polynomial at `bits` of precision:
/// `binom(n,l)/n^l` and `binom(n,l) κ_l/(2n)^l` respectively.
pub fn exact_coefficients(kind: Kind, n: usize, bits: usize) -> Option<Vec<Mp>> {
    let denom = match kind {
        Kind::Ball => n as u64,
        Kind::Cube => 2 * n as u64,
        _ => return None,
    };
    let pi = mp_pi(bits);
    let mut out = Vec::with_capacity(n + 1);
    let mut b = mp(1.0, bits);
    let (mut kappa_prev, mut kappa) = (mp(1.0, bits), mp(1.0, bits));
    for l in 0..=n {
        if l > 0 {
            b = b * mp_int((n - l + 1) as u64, bits) / (mp_int(l as u64, bits) * mp_int(denom, bits));
            // κ_l = 2π κ_{l-2} / l
            let next = if l == 1 {
                mp(2.0, bits)
            } else {
                mp(2.0, bits) * pi.clone() * kappa_prev.clone() / mp_int(l as u64, bits)
            };
            kappa_prev = kappa;
            kappa = next;
        }
        out.push(match kind {
            Kind::Ball => b.clone(),
            _ => b.clone() * kappa.clone(),
        });
    }
    Some(out)
}

/// Zeros of the renormalized polynomial of a family member (independent of ρ).
/// Ball and cube coefficients are regenerated from their closed forms at the
/// working precision of each rung. The other families use the computed
/// double-precision coefficients, whose uncertainty is at least ten times the
/// quadrature tolerance.
pub fn find_family_roots(kind: Kind, n: usize, qcfg: &QuadratureConfig, cfg: &RootConfig) -> Result<RootSet> {
    let poly = renormalized(&FamilyInstance::unit(kind, n)?, qcfg)?;
    if !matches!(kind, Kind::Ball | Kind::Cube) {
        let cfg = RootConfig {
            coefficient_rel_error: cfg.coefficient_rel_error.max(10.0 * qcfg.rel_tol),
            ..*cfg
        };
        return find_roots(&poly, &cfg);
    }
    let (n, ln_s) = check_degree(&poly)?;
    let ln_c = poly.ln_coefficients();
    let abs_a: Vec<f64> = (0..=n).map(|l| (ln_c[l] + l as f64 * ln_s - ln_c[0]).exp()).collect();
    let s = ln_s.exp();
    let coeffs = |bits: usize| {
        let c = exact_coefficients(kind, n, bits).expect("closed form exists");
        let s = mp(s, bits);
        let mut pow = mp(1.0, bits);
        let mut out = Vec::with_capacity(n + 1);
        for cl in &c {
            out.push(cl.clone() * pow.clone());
            pow *= s.clone();
        }
        let lead = out[n].clone();
        out.into_iter().map(|x| x / lead.clone()).collect::<Vec<_>>()
    };
    let prob = Problem {
        n,
        scale: s,
        abs_a,
        rel_err: vec![0.0; n + 1],
        coeffs: &coeffs,
        source: "closed form",
    };
    let (res, rung, confirmed) = run_ladder(&prob, cfg)?;
    finish(&poly, ln_s, &prob, res, rung, confirmed, cfg.residual_tol)
}

/// Classifies zero locations. A root counts as real when
/// `|Im| <= imag_tol · (1 + |root|)`.
pub fn classify_zeros(rs: &RootSet, imag_tol: f64) -> ZeroLocationReport {
    let mut all_negative_real = true;
    let mut all_left_half_plane = true;
    let mut max_real_part = f64::NEG_INFINITY;
    let mut max_abs_imag = 0.0f64;
    for z in &rs.roots {
        let real = z.im.abs() <= imag_tol * (1.0 + z.norm());
        if !(z.re < 0.0) {
            all_left_half_plane = false;
            all_negative_real = false;
        }
        if !real {
            all_negative_real = false;
        }
        max_real_part = max_real_part.max(z.re);
        max_abs_imag = max_abs_imag.max(z.im.abs());
    }
    ZeroLocationReport {
        all_negative_real,
        all_left_half_plane,
        max_real_part,
        max_abs_imag_among_roots: max_abs_imag,
    }
}
