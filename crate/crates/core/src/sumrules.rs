//! Sum rules for block Jacobi matrices with free tails: the P₂ and C₀ rules,
//! the step-by-step rules and their nonlocal generating identity, plus the
//! `det W(E)` identity for `Δ(J)` and its weight-transform corollary.
//!
//! Eigenvalues outside `[−2, 2]` are written `E = z + z⁻¹` with `z ∈ (−1, 1)`;
//! `β = 1/z` is the root of modulus greater than one.

use std::cell::RefCell;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::block_jacobi::{abs_matrix, bound_states, m_closed_disk, BlockJacobi, Tail};
use crate::numerics::{quad_with, real_roots, CMat, Endpoints, RealPoly};
use crate::periodic_jacobi::{bands, discriminant_oprl, m_quadratic, PeriodicJacobi};
use crate::{Error, Result, C64};

const QUAD_TOL: f64 = 1e-11;

/// `F(β + β⁻¹) = ¼[β² − β⁻² − log β⁴]` for `|β| > 1`.
pub fn f_of_e(e: f64) -> Result<f64> {
    if !(e.abs() > 2.0) || !e.is_finite() {
        return Err(Error::domain(format!("F needs |E| > 2, got {e}")));
    }
    let beta = 0.5 * (e + e.signum() * (e * e - 4.0).sqrt());
    Ok(f_of_beta(beta))
}

fn f_of_beta(beta: f64) -> f64 {
    let b2 = beta * beta;
    0.25 * (b2 - 1.0 / b2 - 2.0 * b2.ln())
}

/// `G(a) = a² − 1 − log a²`.
pub fn g_of_a(a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("G needs a > 0, got {a}")));
    }
    Ok(a * a - 1.0 - (a * a).ln())
}

/// `b(z, a) = (a − z)/(1 − az)` for `a > 0` and `(z − a)/(1 − az)` otherwise,
/// so that `b(0, a) = |a|`.
pub fn blaschke_factor(z: C64, a: f64) -> C64 {
    let den = C64::new(1.0, 0.0) - z * a;
    if a > 0.0 {
        (C64::new(a, 0.0) - z) / den
    } else {
        (z - a) / den
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlaschkeEval {
    pub value: C64,
    /// Factors left out because `|a| > r_cut`.
    pub dropped: usize,
    /// `Σ (1 − |a|)·(1 + |z|)/(1 − |z|)` over dropped factors, a bound on the
    /// log-modulus error for `|z| < 1`.
    pub tail_bound: f64,
}

/// `Π b(z, zeros) / Π b(z, poles)` over points with `|a| ≤ r_cut`.
pub fn blaschke_b(z: C64, zeros: &[f64], poles: &[f64], r_cut: f64) -> Result<BlaschkeEval> {
    if !(r_cut > 0.0 && r_cut <= 1.0) {
        return Err(Error::input(format!("r_cut must lie in (0, 1], got {r_cut}")));
    }
    if let Some(a) = zeros.iter().chain(poles).find(|a| !(a.abs() < 1.0) || **a == 0.0) {
        return Err(Error::input(format!("Blaschke point {a} is not in (−1,1)∖{{0}}")));
    }
    if let Some(p) = poles.iter().find(|&&p| (z - p).norm() == 0.0) {
        return Err(Error::domain(format!("z = {z} is a pole ({p}) of the Blaschke product")));
    }
    let mut value = C64::new(1.0, 0.0);
    let (mut dropped, mut tail) = (0, 0.0);
    let zr = z.norm();
    for (pts, inv) in [(zeros, false), (poles, true)] {
        for &a in pts {
            if a.abs() > r_cut {
                dropped += 1;
                tail += (1.0 - a.abs()) * (1.0 + zr) / (1.0 - zr).max(f64::EPSILON);
                continue;
            }
            let f = blaschke_factor(z, a);
            value = if inv { value / f } else { value * f };
        }
    }
    Ok(BlaschkeEval { value, dropped, tail_bound: tail })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub label: String,
    pub value: f64,
}

fn term(label: &str, value: f64) -> Term {
    Term { label: label.to_string(), value }
}

/// Both sides of a sum rule, term by term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRuleReport {
    pub rule: String,
    pub lhs_terms: Vec<Term>,
    pub rhs_terms: Vec<Term>,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub quad_error: f64,
    pub all_finite: bool,
}

impl SumRuleReport {
    fn new(rule: &str, lhs_terms: Vec<Term>, rhs_terms: Vec<Term>, quad_error: f64) -> Self {
        let lhs: f64 = lhs_terms.iter().map(|t| t.value).sum();
        let rhs: f64 = rhs_terms.iter().map(|t| t.value).sum();
        let all_finite = lhs_terms.iter().chain(&rhs_terms).all(|t| t.value.is_finite());
        SumRuleReport { rule: rule.to_string(), lhs_terms, rhs_terms, lhs, rhs, residual: (lhs - rhs).abs(), quad_error, all_finite }
    }
}

fn require_free(j: &BlockJacobi) -> Result<()> {
    if j.tail() != Tail::Free {
        return Err(Error::input("sum rules need a free tail"));
    }
    Ok(())
}

/// `log(|sin θ|^ℓ / |det Im M(e^{iθ})|)`.
fn boundary_log(j: &BlockJacobi, theta: f64) -> Result<f64> {
    let m = m_closed_disk(j, C64::from_polar(1.0, theta))?.value;
    let d = m.imag_part().det().re.abs();
    let s = theta.sin().abs().powi(j.l() as i32);
    if !(d > 0.0) {
        return Err(Error::numeric(format!("det Im M vanishes at θ = {theta}")));
    }
    Ok(s.ln() - d.ln())
}

/// `∫₀^{2π} f dθ`, split at π with cosine clustering at 0, π and 2π so the
/// logarithmic endpoint behaviour of the boundary integrands is resolved.
fn circle_integral(f: impl Fn(f64) -> Result<f64> + Sync, tol: f64) -> Result<(f64, f64)> {
    let halves: Vec<Result<(f64, f64)>> = [(0.0, PI), (PI, 2.0 * PI)]
        .par_iter()
        .map(|&(a, b)| {
            let err = RefCell::new(None);
            let g = |t: f64| match f(t) {
                Ok(v) if v.is_finite() => v,
                Ok(v) => {
                    err.borrow_mut().get_or_insert_with(|| Error::numeric(format!("integrand is {v} at θ = {t}")));
                    0.0
                }
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    0.0
                }
            };
            let r = quad_with(g, a, b, tol, Endpoints::Arccos)?;
            match err.into_inner() {
                Some(e) => Err(e),
                None => Ok((r.value, r.error)),
            }
        })
        .collect();
    let mut out = (0.0, 0.0);
    for h in halves {
        let (v, e) = h?;
        out.0 += v;
        out.1 += e;
    }
    Ok(out)
}

/// `Tr(¼B² + ½G(|A|))`, with `Tr G(|A|) = Tr(A†A) − ℓ − log det(A†A)`.
fn coefficient_term(a: &CMat, b: &CMat) -> f64 {
    let l = a.rows() as f64;
    let ata = &a.adjoint() * a;
    let g = ata.trace().re - l - ata.det().re.ln();
    0.25 * (b * b).trace().re + 0.5 * g
}

fn log_det_abs(a: &CMat) -> f64 {
    a.det().norm().ln()
}

/// `(1/2π)∫ log(sin^ℓθ/det Im M) sin²θ dθ + Σ F(E) = Σ Tr(¼Bₙ² + ½G(|Aₙ|))`.
pub fn p2_sides(j: &BlockJacobi) -> Result<SumRuleReport> {
    require_free(j)?;
    let (integral, qerr) = circle_integral(|t| Ok(boundary_log(j, t)? * t.sin().powi(2)), QUAD_TOL)?;
    let eig: f64 = bound_states(j)?.iter().map(|z| f_of_beta(1.0 / z)).sum();
    let coeff: f64 = j.blocks().iter().map(|(a, b)| coefficient_term(a, b)).sum();
    Ok(SumRuleReport::new(
        "p2",
        vec![term("boundary_integral", integral / (2.0 * PI)), term("eigenvalue_sum", eig)],
        vec![term("coefficient_sum", coeff)],
        qerr / (2.0 * PI),
    ))
}

/// The three quantities of the C₀ rule and `Z − A₀ − E₀`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C0Terms {
    pub z: f64,
    pub e0: f64,
    pub a0: f64,
    pub residual: f64,
    pub quad_error: f64,
}

pub fn c0_terms(j: &BlockJacobi) -> Result<C0Terms> {
    c0_terms_tol(j, QUAD_TOL)
}

pub fn c0_terms_tol(j: &BlockJacobi, tol: f64) -> Result<C0Terms> {
    require_free(j)?;
    let (integral, qerr) = circle_integral(|t| boundary_log(j, t), tol)?;
    let z = integral / (4.0 * PI);
    let e0: f64 = bound_states(j)?.iter().map(|z| -z.abs().ln()).sum();
    let a0: f64 = -j.blocks().iter().map(|(a, _)| log_det_abs(a)).sum::<f64>();
    Ok(C0Terms { z, e0, a0, residual: z - a0 - e0, quad_error: qerr / (4.0 * PI) })
}

/// Sorted-by-energy pairing of the bound states of `𝒥` and `𝒥⁽¹⁾`; the
/// difference `Σ h(𝒥) − Σ h(𝒥⁽¹⁾)` is accumulated pair by pair.
fn paired_difference(zs: &[f64], zs1: &[f64], h: impl Fn(f64) -> f64) -> f64 {
    (0..zs.len().max(zs1.len()))
        .map(|k| zs.get(k).map_or(0.0, |&z| h(z)) - zs1.get(k).map_or(0.0, |&z| h(z)))
        .sum()
}

/// The C₀, C₁ and P₂ step-by-step rules relating `𝒥` to `𝒥⁽¹⁾`, with
/// `w(θ) = log(det Im M⁽¹⁾ / det Im M)`:
///
/// * C₀: `(1/4π)∫w + Σ log|z(𝒥)| − Σ log|z(𝒥⁽¹⁾)| = −log det|A₁|`
/// * C₁: `−(1/2π)∫w cos θ + Σ(z − z⁻¹)(𝒥⁽¹⁾) − Σ(z − z⁻¹)(𝒥) = Tr B₁`
/// * P₂: `(1/2π)∫w sin²θ + Σ F(𝒥) − Σ F(𝒥⁽¹⁾) = Tr(¼B₁² + ½G(|A₁|))`
pub fn step_sum_rules(j: &BlockJacobi) -> Result<Vec<SumRuleReport>> {
    require_free(j)?;
    let j1 = j.stripped(1);
    let (a1, b1) = j.block(1).expect("free tail always has a first block");
    let w = |t: f64| -> Result<f64> { Ok(boundary_log(j, t)? - boundary_log(&j1, t)?) };
    let (i0, e0) = circle_integral(w, QUAD_TOL)?;
    let (i1, e1) = circle_integral(|t| Ok(w(t)? * t.cos()), QUAD_TOL)?;
    let (i2, e2) = circle_integral(|t| Ok(w(t)? * t.sin().powi(2)), QUAD_TOL)?;
    let (zs, zs1) = (bound_states(j)?, bound_states(&j1)?);
    let c0 = SumRuleReport::new(
        "c0_step",
        vec![
            term("boundary_integral", i0 / (4.0 * PI)),
            term("eigenvalue_sum", paired_difference(&zs, &zs1, |z| z.abs().ln())),
        ],
        vec![term("log_det_abs_a1", -log_det_abs(&a1))],
        e0 / (4.0 * PI),
    );
    let c1 = SumRuleReport::new(
        "c1_step",
        vec![
            term("boundary_integral", -i1 / (2.0 * PI)),
            term("eigenvalue_sum", -paired_difference(&zs, &zs1, |z| z - 1.0 / z)),
        ],
        vec![term("trace_b1", b1.trace().re)],
        e1 / (2.0 * PI),
    );
    let p2 = SumRuleReport::new(
        "p2_step",
        vec![
            term("boundary_integral", i2 / (2.0 * PI)),
            term("eigenvalue_sum", paired_difference(&zs, &zs1, |z| f_of_beta(1.0 / z))),
        ],
        vec![term("coefficient_term", coefficient_term(&a1, &b1))],
        e2 / (2.0 * PI),
    );
    Ok(vec![c0, c1, p2])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlocalSample {
    pub z: C64,
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
    pub blaschke_arg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlocalReport {
    pub samples: Vec<NonlocalSample>,
    pub skipped: Vec<(C64, String)>,
    pub max_residual: f64,
}

/// Ten points spread over the disk, off the real axis where poles live.
pub fn default_z_samples() -> Vec<C64> {
    [(0.3, 0.0), (0.2, 0.9), (0.5, 1.6), (0.6, 2.5), (0.45, -0.7), (0.7, 1.1), (0.8, -2.2), (0.85, 0.4), (0.9, 1.9), (0.35, 3.0)]
        .iter()
        .map(|&(r, t)| C64::from_polar(r, t))
        .collect()
}

/// `det(|A₁| M(z)/z) = B(z)·exp((1/4π)∫ (e^{iθ}+z)/(e^{iθ}−z) log(det Im M/det Im M⁽¹⁾) dθ)`,
/// where `B` has zeros at the bound states of `𝒥⁽¹⁾` and poles at those of `𝒥`.
pub fn nonlocal_check(j: &BlockJacobi, zs: &[C64]) -> Result<NonlocalReport> {
    require_free(j)?;
    let j1 = j.stripped(1);
    let (a1, _) = j.block(1).expect("free tail always has a first block");
    let abs_a1 = abs_matrix(&a1)?;
    let (poles, zeros) = (bound_states(j)?, bound_states(&j1)?);
    let w = |t: f64| -> Result<f64> { Ok(boundary_log(&j1, t)? - boundary_log(j, t)?) };
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for &z in zs {
        if !(z.norm() > 0.0 && z.norm() < 1.0) {
            return Err(Error::domain(format!("sample z = {z} is not in the punctured disk")));
        }
        if let Some(p) = poles.iter().chain(&zeros).find(|&&p| (z - p).norm() < 1e-4) {
            skipped.push((z, format!("within 1e-4 of the singularity at {p}")));
            continue;
        }
        let m = m_closed_disk(j, z)?.value;
        let lhs = (&abs_a1 * &m.scale(z.inv())).det();
        let kernel = |t: f64| {
            let e = C64::from_polar(1.0, t);
            (e + z) / (e - z)
        };
        let (re, _) = circle_integral(|t| Ok(kernel(t).re * w(t)?), QUAD_TOL)?;
        let (im, _) = circle_integral(|t| Ok(kernel(t).im * w(t)?), QUAD_TOL)?;
        let b = blaschke_b(z, &zeros, &poles, 1.0)?.value;
        let rhs = b * (C64::new(re, im) / (4.0 * PI)).exp();
        samples.push(NonlocalSample { z, lhs, rhs, residual: (lhs - rhs).norm(), blaschke_arg: b.arg() });
    }
    let max_residual = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
    Ok(NonlocalReport { samples, skipped, max_residual })
}

/// `Im m(x + i0)/π` for the half-line periodic operator, zero off the bands.
pub fn periodic_weight(j0: &PeriodicJacobi, x: f64) -> f64 {
    let [qa, qb, qc] = m_quadratic(j0, C64::new(x, 0.0));
    let disc = (qb * qb - qa * qc * 4.0).re;
    if disc >= 0.0 || qa.norm() == 0.0 {
        return 0.0;
    }
    (-disc).sqrt() / (2.0 * qa.norm()) / PI
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetWReport {
    pub e: f64,
    pub preimages: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

/// The `p` simple preimages `Δ⁻¹(E)` for `E ∈ (−2, 2)`.
fn preimages(j0: &PeriodicJacobi, e: f64) -> Result<(RealPoly, Vec<f64>)> {
    if !(e.abs() < 2.0) {
        return Err(Error::domain(format!("E = {e} is not in (−2, 2)")));
    }
    let d = discriminant_oprl(j0);
    let shifted = &d.poly - &RealPoly::constant(e);
    let amax = j0.a().iter().fold(0.0f64, |m, &a| m.max(a));
    let lo = j0.b().iter().fold(f64::INFINITY, |m, &b| m.min(b)) - 2.0 * amax - 1.0;
    let hi = j0.b().iter().fold(f64::NEG_INFINITY, |m, &b| m.max(b)) + 2.0 * amax + 1.0;
    let roots = real_roots(&shifted, lo, hi, 1e-14)?;
    if roots.iter().any(|&(_, m)| m > 1) || roots.len() != j0.p() {
        return Err(Error::domain(format!("E = {e} has a multiple preimage under Δ")));
    }
    Ok((d.poly.derivative(), roots.into_iter().map(|(x, _)| x).collect()))
}

/// `p₀, …, p_{p−1}` at `x` from the three-term recurrence of `J₀`.
fn orthonormal_values(j0: &PeriodicJacobi, x: f64) -> Vec<f64> {
    let p = j0.p();
    let mut out = vec![1.0];
    let (mut prev, mut cur) = (0.0, 1.0);
    for n in 1..p {
        let a_prev = if n >= 2 { j0.a()[n - 2] } else { 0.0 };
        let next = ((x - j0.b()[n - 1]) * cur - a_prev * prev) / j0.a()[n - 1];
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

/// `det W(E)` from `W_kj = Σ_ℓ ω(x_ℓ)/|Δ′(x_ℓ)| p_{k−1}(x_ℓ) p_{j−1}(x_ℓ)` against
/// `(Π aⱼ^{p−j})⁻² (Π aⱼ)ᵖ Π ω(xⱼ)`, with `J = J₀`.
pub fn det_w_check(j0: &PeriodicJacobi, omega: impl Fn(f64) -> f64, e: f64) -> Result<DetWReport> {
    let (dp, xs) = preimages(j0, e)?;
    let p = j0.p();
    let det = det_w(j0, &omega, &dp, &xs);
    let a = j0.a();
    let log_pref: f64 = -2.0 * (1..=p).map(|k| (p - k) as f64 * a[k - 1].ln()).sum::<f64>()
        + p as f64 * a.iter().map(|x| x.ln()).sum::<f64>();
    let rhs = log_pref.exp() * xs.iter().map(|&x| omega(x)).product::<f64>();
    let rel_err = (det - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE);
    Ok(DetWReport { e, preimages: xs, lhs: det, rhs, rel_err })
}

fn det_w(j0: &PeriodicJacobi, omega: &impl Fn(f64) -> f64, dp: &RealPoly, xs: &[f64]) -> f64 {
    let p = j0.p();
    let vals: Vec<Vec<f64>> = xs.iter().map(|&x| orthonormal_values(j0, x)).collect();
    let wts: Vec<f64> = xs.iter().map(|&x| omega(x) / dp.eval(x).abs()).collect();
    let w = CMat::from_fn(p, p, |k, jj| {
        C64::new((0..p).map(|l| wts[l] * vals[l][k] * vals[l][jj]).sum(), 0.0)
    });
    w.det().re
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightTransformReport {
    pub alpha: f64,
    /// `∫_{−2}^{2} (4 − E²)^α |log det W(E)| dE`, `None` when it diverges.
    pub lhs: Option<f64>,
    /// `∫_σ dist(x, ℝ∖σ)^α |log ω(x)| dx`, `None` when it diverges.
    pub rhs: Option<f64>,
    pub finiteness_agrees: bool,
    pub ratio: Option<f64>,
}

/// Integral of `f` with the integrand capped at `K = 10³, 10⁶, 10⁹`; finite when
/// the last two caps agree to `1e−4` relative. A quadrature failure at a higher
/// cap (the capped spike cannot be resolved) also counts as divergence.
fn capped_integral(f: &impl Fn(f64) -> f64, intervals: &[(f64, f64)]) -> Result<Option<f64>> {
    let capped = |k: f64, tol: f64| -> Result<f64> {
        intervals.iter().try_fold(0.0, |acc, &(a, b)| {
            let g = |x: f64| {
                let v = f(x);
                if v.is_nan() { k } else { v.min(k) }
            };
            Ok(acc + quad_with(g, a, b, tol, Endpoints::Arccos)?.value)
        })
    };
    let mut prev = capped(1e3, 1e-9)?;
    for k in [1e6, 1e9] {
        match capped(k, 1e-9 * prev.abs().max(1.0)) {
            Ok(v) if (v - prev).abs() <= 1e-4 * v.abs().max(1.0) => return Ok(Some(v)),
            Ok(v) => prev = v,
            Err(Error::Numeric(_)) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Compares the two sides of the weight-transform equivalence: finiteness of
/// one integral should match finiteness of the other.
pub fn weight_transform_check(j0: &PeriodicJacobi, alpha: f64, omega: impl Fn(f64) -> f64) -> Result<WeightTransformReport> {
    if !(alpha > -1.0) {
        return Err(Error::domain(format!("alpha must exceed −1, got {alpha}")));
    }
    let d = discriminant_oprl(j0);
    let bs = bands(&d, 1e-9)?;
    // merge bands that touch at closed gaps
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for &(lo, hi) in &bs.bands {
        match merged.last_mut() {
            Some(last) if (lo - last.1).abs() <= 1e-7 => last.1 = hi,
            _ => merged.push((lo, hi)),
        }
    }
    let dp = d.poly.derivative();
    let lhs_f = |e: f64| -> f64 {
        match preimages(j0, e) {
            Ok((_, xs)) => (4.0 - e * e).powf(alpha) * det_w(j0, &omega, &dp, &xs).ln().abs(),
            Err(_) => f64::NAN,
        }
    };
    let rhs_f = |x: f64| -> f64 {
        let dist = merged.iter().find(|&&(lo, hi)| lo <= x && x <= hi).map_or(0.0, |&(lo, hi)| (x - lo).min(hi - x));
        dist.powf(alpha) * omega(x).ln().abs()
    };
    let lhs = capped_integral(&lhs_f, &[(-2.0, 2.0)])?;
    let rhs = capped_integral(&rhs_f, &merged)?;
    Ok(WeightTransformReport {
        alpha,
        lhs,
        rhs,
        finiteness_agrees: lhs.is_some() == rhs.is_some(),
        ratio: lhs.zip(rhs).map(|(l, r)| l / r),
    })
}

/// Twelve eventually-free operators: one to three nontrivial blocks, `ℓ ∈ {1, 2, 3}`.
pub fn fixture_library() -> Vec<(String, BlockJacobi)> {
    let c = |re: f64, im: f64| C64::new(re, im);
    let r = |rows: &[&[f64]]| CMat::from_real(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
    let scalar = |a: &[f64], b: &[f64]| BlockJacobi::scalar(a, b, Tail::Free).expect("valid fixture");
    let block = |l: usize, blocks: Vec<(CMat, CMat)>| BlockJacobi::new(l, blocks, Tail::Free).expect("valid fixture");
    let herm2 = |d0: f64, d1: f64, off: C64| CMat::from_rows(&[vec![c(d0, 0.0), off], vec![off.conj(), c(d1, 0.0)]]);
    vec![
        ("scalar_b0.5".into(), scalar(&[1.0], &[0.5])),
        ("scalar_b1.5".into(), scalar(&[1.0], &[1.5])),
        ("scalar_a2".into(), scalar(&[2.0], &[0.0])),
        ("scalar_rank2".into(), scalar(&[1.3, 0.9], &[0.4, -1.2])),
        ("scalar_rank3".into(), scalar(&[0.7, 1.4, 1.1], &[1.0, 0.2, -0.5])),
        ("block2_diag".into(), block(2, vec![(CMat::identity(2), r(&[&[1.5, 0.0], &[0.0, 0.0]]))])),
        (
            "block2_complex".into(),
            block(2, vec![(r(&[&[1.2, 0.3], &[0.0, 0.9]]), herm2(0.9, -1.6, c(0.4, 0.2)))]),
        ),
        (
            "block2_rank2".into(),
            block(
                2,
                vec![
                    (CMat::from_rows(&[vec![c(0.8, 0.1), c(0.2, 0.0)], vec![c(0.0, -0.3), c(1.1, 0.0)]]), herm2(0.9, 0.1, c(0.0, 0.5))),
                    (r(&[&[1.0, 0.0], &[0.4, 1.3]]), herm2(-0.4, 0.7, c(0.3, -0.1))),
                ],
            ),
        ),
        (
            "block2_rank3".into(),
            block(
                2,
                vec![
                    (r(&[&[1.1, 0.0], &[0.0, 0.95]]), herm2(2.2, -0.3, c(0.1, 0.1))),
                    (r(&[&[0.9, -0.2], &[0.2, 1.05]]), herm2(0.0, 0.0, c(0.6, 0.0))),
                    (CMat::identity(2), herm2(-0.5, -2.1, c(0.0, 0.0))),
                ],
            ),
        ),
        ("block3_rank1".into(), block(3, vec![(CMat::diag_real(&[1.4, 1.0, 0.8]), r(&[&[0.5, 0.2, 0.0], &[0.2, -1.3, 0.4], &[0.0, 0.4, 0.9]]))])),
        (
            "block3_rank2".into(),
            block(
                3,
                vec![
                    (CMat::identity(3), CMat::diag_real(&[1.8, 0.0, -1.7])),
                    (
                        CMat::from_rows(&[
                            vec![c(1.2, 0.0), c(0.1, 0.1), c(0.0, 0.0)],
                            vec![c(0.0, 0.0), c(0.9, 0.0), c(0.2, 0.0)],
                            vec![c(0.0, -0.1), c(0.0, 0.0), c(1.0, 0.0)],
                        ]),
                        r(&[&[0.0, 0.3, 0.0], &[0.3, 1.1, 0.1], &[0.0, 0.1, -0.2]]),
                    ),
                ],
            ),
        ),
        (
            "block3_rank3".into(),
            block(
                3,
                vec![
                    (r(&[&[1.0, 0.3, 0.0], &[0.0, 1.1, 0.0], &[0.2, 0.0, 0.85]]), CMat::diag_real(&[0.4, 1.2, -0.6])),
                    (CMat::diag_real(&[0.75, 1.25, 1.0]), r(&[&[0.0, 0.5, 0.1], &[0.5, 0.0, 0.0], &[0.1, 0.0, 0.3]])),
                    (CMat::identity(3), CMat::diag_real(&[-2.4, 0.1, 0.0])),
                ],
            ),
        ),
    ]
}
