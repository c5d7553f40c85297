//! Distances to isospectral tori: the weighted metrics `d_m`, their finite-window
//! versions `d̃_m`, the discriminant-coefficient map F and its Jacobian, a Toda-flow
//! sampler, and damped Gauss–Newton projection onto `{Δ_J = Δ_{J₀}}`.

use crate::cmv::{PeriodicVerblunsky, VerblunskySeq};
use crate::magic::JacobiSeq;
use crate::numerics::{CMat, RealPoly};
use crate::periodic_jacobi::{discriminant_oprl, PeriodicJacobi};
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};

/// Terms kept in `d_m`; `e^{−40}` is below double precision relative to the first term.
pub const D_M_TERMS: usize = 40;

/// Jacobi parameters readable at a site.
pub trait JacobiCoeffs {
    fn ab(&self, n: i64) -> Option<(f64, f64)>;
}

impl JacobiCoeffs for JacobiSeq {
    fn ab(&self, n: i64) -> Option<(f64, f64)> {
        Some((self.a_at(n)?, self.b_at(n)?))
    }
}

impl JacobiCoeffs for PeriodicJacobi {
    fn ab(&self, n: i64) -> Option<(f64, f64)> {
        Some((self.a_at(n), self.b_at(n)))
    }
}

pub trait VerblunskyCoeffs {
    fn alpha(&self, n: i64) -> Option<C64>;
}

impl VerblunskyCoeffs for VerblunskySeq {
    fn alpha(&self, n: i64) -> Option<C64> {
        self.alpha_at(n)
    }
}

impl VerblunskyCoeffs for PeriodicVerblunsky {
    fn alpha(&self, n: i64) -> Option<C64> {
        Some(self.alpha_at(n))
    }
}

fn jacobi_gap(x: &impl JacobiCoeffs, y: &impl JacobiCoeffs, n: i64) -> Option<f64> {
    let (a, b) = x.ab(n)?;
    let (a2, b2) = y.ab(n)?;
    Some((a - a2).abs() + (b - b2).abs())
}

/// `Σ_{k=0}^{40} e^{−k}(|a_{m+k}−a′_{m+k}| + |b_{m+k}−b′_{m+k}|)`, stopping early
/// where either sequence ends.
pub fn d_m_jacobi(x: &impl JacobiCoeffs, y: &impl JacobiCoeffs, m: i64) -> f64 {
    (0..=D_M_TERMS as i64)
        .map_while(|k| jacobi_gap(x, y, m + k).map(|g| (-k as f64).exp() * g))
        .sum()
}

/// Unweighted window `Σ_{k<p}` of the same differences.
pub fn tilde_d_m_jacobi(x: &impl JacobiCoeffs, y: &impl JacobiCoeffs, m: i64, p: usize) -> Result<f64> {
    (0..p as i64)
        .map(|k| jacobi_gap(x, y, m + k).ok_or_else(|| Error::input(format!("site {} is undefined", m + k))))
        .sum()
}

/// `Σ_{k=0}^{40} e^{−k}|α_{m+k} − α′_{m+k}|`.
pub fn d_m_opuc(x: &impl VerblunskyCoeffs, y: &impl VerblunskyCoeffs, m: i64) -> f64 {
    (0..=D_M_TERMS as i64)
        .map_while(|k| Some((-k as f64).exp() * (x.alpha(m + k)? - y.alpha(m + k)?).norm()))
        .sum()
}

/// `Σ_{k=0}^{p} |α_{m+k} − α′_{m+k}|`: the window includes `k = p`, since
/// `α₀ … α_{p−1}` do not determine a point of the torus.
pub fn tilde_d_m_opuc(x: &impl VerblunskyCoeffs, y: &impl VerblunskyCoeffs, m: i64, p: usize) -> Result<f64> {
    (0..=p as i64)
        .map(|k| match (x.alpha(m + k), y.alpha(m + k)) {
            (Some(u), Some(v)) => Ok((u - v).norm()),
            _ => Err(Error::input(format!("index {} is undefined", m + k))),
        })
        .sum()
}

/// Points on (or near) `T_{J₀}` produced by a flow, with their flow times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusSample {
    pub reference: PeriodicJacobi,
    pub points: Vec<PeriodicJacobi>,
    pub times: Vec<f64>,
}

/// Minimum of `d_m` over sample points and their cyclic shifts. An upper bound
/// for the distance to the torus, since the sample need not fill it.
pub fn dist_to_sample(x: &impl JacobiCoeffs, s: &TorusSample, m: i64) -> Result<f64> {
    if s.points.is_empty() {
        return Err(Error::input("empty torus sample"));
    }
    Ok(s.points
        .iter()
        .flat_map(|pt| (0..pt.p()).map(move |k| pt.shifted(k)))
        .map(|pt| d_m_jacobi(x, &pt, m))
        .fold(f64::INFINITY, f64::min))
}

fn coeff_vec(j: &PeriodicJacobi) -> Vec<f64> {
    let mut c = discriminant_oprl(j).poly.coeffs().to_vec();
    c.resize(j.p() + 1, 0.0);
    c
}

/// Discriminant coefficients `c₀ … c_p` of a period-p cell: the map F.
pub fn f_map(j: &PeriodicJacobi) -> Vec<f64> {
    coeff_vec(j)
}

/// Euclidean distance between discriminant coefficient lists.
pub fn coeff_mismatch(block: &PeriodicJacobi, j0: &PeriodicJacobi) -> Result<f64> {
    if block.p() != j0.p() {
        return Err(Error::input(format!("period {} differs from reference period {}", block.p(), j0.p())));
    }
    Ok(coeff_vec(block).iter().zip(coeff_vec(j0)).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
}

type PolyMat = [[RealPoly; 2]; 2];

fn pm_mul(x: &PolyMat, y: &PolyMat) -> PolyMat {
    let e = |i: usize, j: usize| &(&x[i][0] * &y[0][j]) + &(&x[i][1] * &y[1][j]);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn pm_identity() -> PolyMat {
    let (o, z) = (RealPoly::constant(1.0), RealPoly::constant(0.0));
    [[o.clone(), z.clone()], [z, o]]
}

fn pm_const(m: [[f64; 2]; 2]) -> PolyMat {
    m.map(|r| r.map(RealPoly::constant))
}

/// Jacobian of F with respect to `(a₁…a_p, b₁…b_p)`: a `(p+1)×2p` matrix, from
/// prefix and suffix products of the transfer factors.
pub fn f_jacobian(j: &PeriodicJacobi) -> Vec<Vec<f64>> {
    let p = j.p();
    let step = |k: usize| -> PolyMat {
        let (a, b) = (j.a()[k], j.b()[k]);
        [
            [RealPoly::new(vec![-b / a, 1.0 / a]), RealPoly::constant(-1.0 / a)],
            [RealPoly::constant(a), RealPoly::constant(0.0)],
        ]
    };
    // prefix[k] = Λ_k⋯Λ_1 (0-based: factors 0..k), suffix[k] = Λ_p⋯Λ_{k+1}
    let mut prefix = vec![pm_identity()];
    for k in 0..p {
        let next = pm_mul(&step(k), &prefix[k]);
        prefix.push(next);
    }
    let mut suffix = vec![pm_identity(); p + 1];
    for k in (0..p).rev() {
        suffix[k] = pm_mul(&suffix[k + 1], &step(k));
    }
    let mut jac = vec![vec![0.0; 2 * p]; p + 1];
    for k in 0..p {
        let (a, b) = (j.a()[k], j.b()[k]);
        let da: PolyMat = [
            [RealPoly::new(vec![b / (a * a), -1.0 / (a * a)]), RealPoly::constant(1.0 / (a * a))],
            [RealPoly::constant(1.0), RealPoly::constant(0.0)],
        ];
        let db = pm_const([[-1.0 / a, 0.0], [0.0, 0.0]]);
        for (col, d) in [(k, da), (p + k, db)] {
            let t = pm_mul(&pm_mul(&suffix[k + 1], &d), &prefix[k]);
            let tr = &t[0][0] + &t[1][1];
            for (i, c) in tr.coeffs().iter().enumerate().take(p + 1) {
                jac[i][col] = *c;
            }
        }
    }
    jac
}

fn toda_rhs(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let p = a.len();
    let da = (0..p).map(|n| a[n] * (b[(n + 1) % p] - b[n])).collect();
    let db = (0..p).map(|n| 2.0 * (a[n] * a[n] - a[(n + p - 1) % p].powi(2))).collect();
    (da, db)
}

fn rk4_step(a: &mut [f64], b: &mut [f64], h: f64) {
    let axpy = |x: &[f64], d: &[f64], s: f64| x.iter().zip(d).map(|(u, v)| u + s * v).collect::<Vec<_>>();
    let (ka1, kb1) = toda_rhs(a, b);
    let (ka2, kb2) = toda_rhs(&axpy(a, &ka1, h / 2.0), &axpy(b, &kb1, h / 2.0));
    let (ka3, kb3) = toda_rhs(&axpy(a, &ka2, h / 2.0), &axpy(b, &kb2, h / 2.0));
    let (ka4, kb4) = toda_rhs(&axpy(a, &ka3, h), &axpy(b, &kb3, h));
    for n in 0..a.len() {
        a[n] += h / 6.0 * (ka1[n] + 2.0 * ka2[n] + 2.0 * ka3[n] + ka4[n]);
        b[n] += h / 6.0 * (kb1[n] + 2.0 * kb2[n] + 2.0 * kb3[n] + kb4[n]);
    }
}

/// Relative drift tolerated in the discriminant coefficients along a flow.
pub const TODA_DRIFT_TOL: f64 = 1e-8;

/// Periodic Toda flow `a′ₙ = aₙ(b_{n+1}−bₙ)`, `b′ₙ = 2(aₙ² − a²_{n−1})` by RK4 with
/// step at most `dt`, recording the state at each of the ascending `times`.
pub fn toda_sample(j0: &PeriodicJacobi, times: &[f64], dt: f64) -> Result<TorusSample> {
    if !(dt > 0.0) {
        return Err(Error::input("dt must be positive"));
    }
    if times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::input("times must be nonnegative and ascending"));
    }
    let scale = coeff_vec(j0).iter().map(|c| c * c).sum::<f64>().sqrt();
    let (mut a, mut b) = (j0.a().to_vec(), j0.b().to_vec());
    let mut t = 0.0;
    let mut points = Vec::with_capacity(times.len());
    for &target in times {
        let steps = ((target - t) / dt).ceil() as usize;
        if steps > 0 {
            let h = (target - t) / steps as f64;
            for _ in 0..steps {
                rk4_step(&mut a, &mut b, h);
            }
        }
        t = target;
        let pt = PeriodicJacobi::new(a.clone(), b.clone())
            .map_err(|e| Error::numeric(format!("flow left the parameter domain at t = {t}: {e}; use a smaller dt")))?;
        let drift = coeff_mismatch(&pt, j0)? / scale;
        if drift > TODA_DRIFT_TOL {
            return Err(Error::numeric(format!(
                "discriminant drift {drift:.3e} at t = {t} exceeds {TODA_DRIFT_TOL:e}; use a smaller dt than {dt}"
            )));
        }
        points.push(pt);
    }
    Ok(TorusSample { reference: j0.clone(), points, times: times.to_vec() })
}

/// Result of projecting a cell onto `T_{J₀}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Projection {
    pub point: PeriodicJacobi,
    /// Euclidean distance in `(a, b)` from the input cell.
    pub distance: f64,
    pub mismatch: f64,
    pub iterations: usize,
}

fn pack(j: &PeriodicJacobi) -> Vec<f64> {
    j.a().iter().chain(j.b()).copied().collect()
}

fn unpack(x: &[f64]) -> Result<PeriodicJacobi> {
    let p = x.len() / 2;
    PeriodicJacobi::new(x[..p].to_vec(), x[p..].to_vec())
}

/// `Jᵀ(JJᵀ + λ)⁻¹ r`: the minimum-norm (damped) solution of `J d = r`.
fn min_norm_step(jac: &[Vec<f64>], r: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let (rows, cols) = (jac.len(), jac[0].len());
    let g = CMat::from_fn(rows, rows, |i, k| {
        let dot: f64 = (0..cols).map(|c| jac[i][c] * jac[k][c]).sum();
        C64::new(dot + if i == k { lambda } else { 0.0 }, 0.0)
    });
    let y = g.inverse()?.mat_vec(&r.iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>());
    Ok((0..cols).map(|c| (0..rows).map(|i| jac[i][c] * y[i].re).sum()).collect())
}

/// Levenberg–Marquardt on `F(x) = F(J₀)` with minimum-norm steps (λ from 1e−6),
/// then nearest-point refinement: re-linearise at the iterate and take the
/// minimum-norm correction measured from the input cell.
pub fn project_to_torus(block: &PeriodicJacobi, j0: &PeriodicJacobi, tol: f64) -> Result<Projection> {
    if block.p() != j0.p() {
        return Err(Error::input(format!("period {} differs from reference period {}", block.p(), j0.p())));
    }
    if !(tol > 0.0) {
        return Err(Error::input("tolerance must be positive"));
    }
    let y0 = coeff_vec(j0);
    let x0 = pack(block);
    let resid = |x: &[f64]| -> Option<(Vec<f64>, f64)> {
        let j = unpack(x).ok()?;
        let r: Vec<f64> = coeff_vec(&j).iter().zip(&y0).map(|(f, y)| y - f).collect();
        let n = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        Some((r, n))
    };
    let mut x = x0.clone();
    let (mut r, mut err) = resid(&x).ok_or_else(|| Error::input("invalid input cell"))?;
    let mut lambda = 1e-6;
    let mut iterations = 0;
    while err > tol {
        iterations += 1;
        if iterations > 200 || lambda > 1e12 {
            return Err(Error::numeric(format!(
                "projection diverged after {iterations} iterations: residual {err:.3e}, last iterate a = {:?}, b = {:?}",
                &x[..x.len() / 2],
                &x[x.len() / 2..]
            )));
        }
        let jac = f_jacobian(&unpack(&x)?);
        let d = min_norm_step(&jac, &r, lambda)?;
        let trial: Vec<f64> = x.iter().zip(&d).map(|(u, v)| u + v).collect();
        match resid(&trial) {
            Some((rt, et)) if et < err => {
                x = trial;
                r = rt;
                err = et;
                lambda = (lambda / 10.0).max(1e-15);
            }
            _ => lambda *= 10.0,
        }
    }
    let dist = |x: &[f64]| x.iter().zip(&x0).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    for _ in 0..20 {
        let Ok(j) = unpack(&x) else { break };
        let jac = f_jacobian(&j);
        // J(x_new − x0) = r + J(x − x0)
        let rhs: Vec<f64> = (0..r.len())
            .map(|i| r[i] + (0..x.len()).map(|c| jac[i][c] * (x[c] - x0[c])).sum::<f64>())
            .collect();
        let Ok(d) = min_norm_step(&jac, &rhs, 0.0) else { break };
        let trial: Vec<f64> = x0.iter().zip(&d).map(|(u, v)| u + v).collect();
        match resid(&trial) {
            Some((rt, et)) if et <= tol && dist(&trial) < dist(&x) - 1e-15 => {
                x = trial;
                r = rt;
                err = et;
            }
            _ => break,
        }
    }
    let point = unpack(&x)?;
    Ok(Projection { distance: dist(&x), mismatch: err, point, iterations })
}

/// Upper bounds for `(d_m(J, T_{J₀}), d̃_m(J, T_{J₀}))`: the better of the J₀ shifts and
/// the periodic extension of the projected cell starting at `m`.
pub fn torus_distances(seq: &JacobiSeq, j0: &PeriodicJacobi, m: i64) -> Result<(f64, f64)> {
    let p = j0.p();
    let mut cands: Vec<PeriodicJacobi> = (0..p).map(|k| j0.shifted(k)).collect();
    // cell index (n−1) mod p holds site n
    let mut a = vec![0.0; p];
    let mut b = vec![0.0; p];
    for n in m..m + p as i64 {
        let (an, bn) = seq.ab(n).ok_or_else(|| Error::input(format!("site {n} is undefined")))?;
        let k = (n - 1).rem_euclid(p as i64) as usize;
        a[k] = an;
        b[k] = bn;
    }
    if let Ok(proj) = project_to_torus(&PeriodicJacobi::new(a, b)?, j0, 1e-13) {
        cands.push(proj.point);
    }
    let mut d = f64::INFINITY;
    let mut dt = f64::INFINITY;
    for c in &cands {
        d = d.min(d_m_jacobi(seq, c, m));
        dt = dt.min(tilde_d_m_jacobi(seq, c, m, p)?);
    }
    Ok((d, dt))
}
