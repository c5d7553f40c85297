//! A fixed p-periodic Jacobi operator J₀: transfer matrices, discriminant, bands,
//! capacity, harmonic measure, Lyapunov exponent, Floquet fibers and the
//! half-line m-function.

use crate::magic::JacobiSeq;
use crate::numerics::{
    quad_with, real_roots, tridiag_eigen, CMat, Endpoints, HermitianMatrix, Mobius2, RealPoly,
};
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};

/// Period-p Jacobi parameters `(a₁…a_p, b₁…b_p)`, with `J₁₁ = b₁` and `J_{n,n+1} = aₙ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PeriodicJacobiJson", into = "PeriodicJacobiJson")]
pub struct PeriodicJacobi {
    a: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PeriodicJacobiJson {
    p: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl TryFrom<PeriodicJacobiJson> for PeriodicJacobi {
    type Error = Error;
    fn try_from(j: PeriodicJacobiJson) -> Result<Self> {
        if j.a.len() != j.p || j.b.len() != j.p {
            return Err(Error::input(format!(
                "period p = {} but |a| = {}, |b| = {}",
                j.p,
                j.a.len(),
                j.b.len()
            )));
        }
        PeriodicJacobi::new(j.a, j.b)
    }
}

impl From<PeriodicJacobi> for PeriodicJacobiJson {
    fn from(j: PeriodicJacobi) -> Self {
        PeriodicJacobiJson { p: j.p(), a: j.a, b: j.b }
    }
}

impl PeriodicJacobi {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::input("a and b must be nonempty and of equal length"));
        }
        if let Some(x) = a.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
            return Err(Error::input(format!("off-diagonal parameters must be positive, got {x}")));
        }
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("diagonal parameters must be finite"));
        }
        Ok(PeriodicJacobi { a, b })
    }

    /// `aₙ ≡ 1, bₙ ≡ 0` viewed as period p.
    pub fn free(p: usize) -> Self {
        PeriodicJacobi { a: vec![1.0; p.max(1)], b: vec![0.0; p.max(1)] }
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `a` at 1-based index `n`, extended periodically to all integers.
    pub fn a_at(&self, n: i64) -> f64 {
        self.a[(n - 1).rem_euclid(self.p() as i64) as usize]
    }

    pub fn b_at(&self, n: i64) -> f64 {
        self.b[(n - 1).rem_euclid(self.p() as i64) as usize]
    }

    /// Cyclic shift by `k`: the new cell starts at old index `k+1`.
    pub fn shifted(&self, k: usize) -> PeriodicJacobi {
        let p = self.p();
        PeriodicJacobi {
            a: (0..p).map(|j| self.a[(j + k) % p]).collect(),
            b: (0..p).map(|j| self.b[(j + k) % p]).collect(),
        }
    }
}

/// Trace of the one-period transfer matrix, with its source period and capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct Discriminant {
    pub poly: RealPoly,
    pub p: usize,
    pub capacity: f64,
}

impl Discriminant {
    pub fn eval(&self, x: f64) -> f64 {
        self.poly.eval(x)
    }

    pub fn eval_c(&self, z: C64) -> C64 {
        self.poly.eval_c(z)
    }

    pub fn coeffs(&self) -> &[f64] {
        self.poly.coeffs()
    }
}

/// Closed bands, touching points of closed gaps, and open gaps, all ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSet {
    pub bands: Vec<(f64, f64)>,
    pub closed_gaps: Vec<f64>,
    pub open_gaps: Vec<(f64, f64)>,
}

impl BandSet {
    pub fn contains(&self, x: f64) -> bool {
        self.bands.iter().any(|&(lo, hi)| lo <= x && x <= hi)
    }

    pub fn hull(&self) -> (f64, f64) {
        (self.bands[0].0, self.bands.last().unwrap().1)
    }
}

/// `Λ(x) = (1/a)·[[x−b, −1],[a², 0]]`, the one-step transfer matrix.
pub fn transfer_step(a: f64, b: f64, x: C64) -> Result<Mobius2> {
    if !(a > 0.0) {
        return Err(Error::input(format!("transfer step needs a > 0, got {a}")));
    }
    Ok(Mobius2::new((x - b) / a, C64::new(-1.0 / a, 0.0), C64::new(a, 0.0), C64::new(0.0, 0.0)))
}

/// Product `T(x) = Λ_p(x)⋯Λ₁(x)` evaluated at a point.
pub fn transfer_matrix(j0: &PeriodicJacobi, x: C64) -> Mobius2 {
    j0.a.iter().zip(&j0.b).fold(Mobius2::identity(), |t, (&a, &b)| {
        transfer_step(a, b, x).expect("validated a > 0") * t
    })
}

/// Exact polynomial product of the p transfer factors; Δ is the trace.
pub fn discriminant_oprl(j0: &PeriodicJacobi) -> Discriminant {
    let zero = RealPoly::constant(0.0);
    let one = RealPoly::constant(1.0);
    let mut t = [[one.clone(), zero.clone()], [zero, one]];
    for (&a, &b) in j0.a.iter().zip(&j0.b) {
        // Λ = [[ (x−b)/a, −1/a ], [ a, 0 ]]
        let l11 = RealPoly::new(vec![-b / a, 1.0 / a]);
        let next = [
            [
                &(&l11 * &t[0][0]) + &t[1][0].scale(-1.0 / a),
                &(&l11 * &t[0][1]) + &t[1][1].scale(-1.0 / a),
            ],
            [t[0][0].scale(a), t[0][1].scale(a)],
        ];
        t = next;
    }
    Discriminant { poly: &t[0][0] + &t[1][1], p: j0.p(), capacity: capacity(j0) }
}

/// `(a₁⋯a_p)^{1/p}`.
pub fn capacity(j0: &PeriodicJacobi) -> f64 {
    (j0.a.iter().map(|a| a.ln()).sum::<f64>() / j0.p() as f64).exp()
}

/// Bands from the 2p roots of `Δ∓2`; edges closer than `1e−8·scale` merge into a closed gap.
pub fn bands(d: &Discriminant, tol: f64) -> Result<BandSet> {
    let p = d.p;
    let c = d.poly.coeffs();
    let lead = d.poly.leading();
    let cauchy = 1.0
        + c[..c.len() - 1]
            .iter()
            .enumerate()
            .map(|(k, &x)| if k == 0 { (x.abs() + 2.0) / lead.abs() } else { x.abs() / lead.abs() })
            .fold(0.0, f64::max);
    let mut edges = Vec::with_capacity(2 * p);
    for shift in [-2.0, 2.0] {
        for (r, m) in real_roots(&d.poly.shift(shift), -cauchy, cauchy, tol)? {
            edges.extend(std::iter::repeat_n(r, m));
        }
    }
    if edges.len() != 2 * p {
        return Err(Error::numeric(format!(
            "expected {} band edges, found {} ({edges:?})",
            2 * p,
            edges.len()
        )));
    }
    edges.sort_by(f64::total_cmp);
    let scale = edges.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut bands: Vec<(f64, f64)> = edges.chunks(2).map(|w| (w[0], w[1])).collect();
    let mut closed_gaps = Vec::new();
    let mut open_gaps = Vec::new();
    for k in 0..p - 1 {
        let (hi, lo) = (bands[k].1, bands[k + 1].0);
        if lo - hi <= 1e-8 * scale {
            let mid = 0.5 * (hi + lo);
            bands[k].1 = mid;
            bands[k + 1].0 = mid;
            closed_gaps.push(mid);
        } else {
            open_gaps.push((hi, lo));
        }
    }
    for &(lo, hi) in &bands {
        let v = d.eval(0.5 * (lo + hi));
        if v.abs() > 2.0 + 1e-9 {
            return Err(Error::numeric(format!("|Δ| = {v} > 2 inside computed band [{lo}, {hi}]")));
        }
    }
    Ok(BandSet { bands, closed_gaps, open_gaps })
}

/// Density of harmonic measure: `(2/p)·|Δ′(x)|/√(4−Δ(x)²)·(1/2π)`.
pub fn harmonic_density(d: &Discriminant, x: f64) -> Result<f64> {
    let v = d.eval(x);
    if !(v.abs() < 2.0) {
        return Err(Error::domain(format!("x = {x} is not inside a band (Δ = {v})")));
    }
    Ok(density_unchecked(d, x))
}

fn density_unchecked(d: &Discriminant, x: f64) -> f64 {
    let v = d.eval(x);
    let s = 4.0 - v * v;
    if s <= 0.0 {
        return 0.0;
    }
    let dv = d.poly.derivative().eval(x);
    2.0 / d.p as f64 * dv.abs() / s.sqrt() / (2.0 * std::f64::consts::PI)
}

/// `∫ f dν` over one band. Δ maps the band monotonically onto `[−2, 2]`, so with
/// `Δ(x) = 2cos φ` the harmonic measure becomes `dφ/(pπ)` on `[0, π]`; each node
/// inverts Δ by safeguarded Newton.
pub fn band_integral(d: &Discriminant, band: (f64, f64), f: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
    let (lo, hi) = band;
    let dp = d.poly.derivative();
    let sgn = if d.eval(hi) > d.eval(lo) { 1.0 } else { -1.0 };
    let invert = |u: f64| -> f64 {
        let (mut a, mut b) = (lo, hi);
        let mut x = 0.5 * (a + b);
        for _ in 0..200 {
            let r = d.eval(x) - u;
            if sgn * r > 0.0 {
                b = x;
            } else {
                a = x;
            }
            let step = r / dp.eval(x);
            let eps = 4.0 * f64::EPSILON * x.abs().max(1.0);
            if step.abs() <= eps {
                return x - step;
            }
            let next = x - step;
            x = if step.is_finite() && next > a && next < b { next } else { 0.5 * (a + b) };
            if b - a <= eps {
                break;
            }
        }
        x
    };
    let p = d.p as f64;
    let g = |phi: f64| f(invert(2.0 * phi.cos())) / (p * std::f64::consts::PI);
    Ok(quad_with(g, 0.0, std::f64::consts::PI, tol, Endpoints::Plain)?.value)
}

/// `∫ f dν` over the whole spectrum.
pub fn harmonic_integral(d: &Discriminant, bs: &BandSet, f: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
    let per = tol / bs.bands.len() as f64;
    bs.bands.iter().map(|&b| band_integral(d, b, &f, per)).sum()
}

/// `(1/p)·log|Δ/2 + √(Δ²/4 − 1)|`, taking the root of modulus ≥ 1.
pub fn lyapunov(d: &Discriminant, z: C64) -> f64 {
    let w = d.eval_c(z) * 0.5;
    let s = (w * w - 1.0).sqrt();
    let big = (w + s).norm().max((w - s).norm());
    (big.ln() / d.p as f64).max(0.0)
}

/// Floquet fiber `J(θ)`: the p×p cyclic Jacobi matrix with corners `a_p e^{∓iθ}`.
pub fn floquet_fiber(j0: &PeriodicJacobi, theta: f64) -> HermitianMatrix {
    let p = j0.p();
    let mut m = CMat::zeros(p, p);
    for i in 0..p {
        m[(i, i)] += C64::new(j0.b[i], 0.0);
    }
    for i in 0..p.saturating_sub(1) {
        m[(i, i + 1)] += C64::new(j0.a[i], 0.0);
        m[(i + 1, i)] += C64::new(j0.a[i], 0.0);
    }
    let ap = j0.a[p - 1];
    m[(0, p - 1)] += C64::from_polar(ap, -theta);
    m[(p - 1, 0)] += C64::from_polar(ap, theta);
    HermitianMatrix::new(m).expect("fiber is Hermitian by construction")
}

/// Coefficients `(A, B, C)` of the fixed-point quadratic `A m² + B m + C = 0` of the
/// one-period stripping map; unimodular normalisation makes `B² − 4AC = Δ(E)² − 4`.
pub fn m_quadratic(j0: &PeriodicJacobi, e: C64) -> [C64; 3] {
    let t = stripping_map(j0, e);
    [t.t[1][0], t.t[1][1] - t.t[0][0], -t.t[0][1]]
}

/// `S₁∘⋯∘S_p` where `Sⱼ(m) = 1/(bⱼ − E − aⱼ² m)`, each normalised to determinant 1.
fn stripping_map(j0: &PeriodicJacobi, e: C64) -> Mobius2 {
    j0.a.iter().zip(&j0.b).fold(Mobius2::identity(), |t, (&a, &b)| {
        t * Mobius2::new(C64::new(0.0, 0.0), C64::new(1.0 / a, 0.0), C64::new(-a, 0.0), (b - e) / a)
    })
}

/// Half-line m-function `m(E) = ⟨δ₁, (J₀ − E)⁻¹ δ₁⟩`.
///
/// The two fixed points of the period map are the Floquet solutions; the one
/// attracting under iteration (larger multiplier) is the Weyl solution, and for
/// `Im E ≠ 0` it is also the root with `Im m · Im E > 0`.
pub fn periodic_m(j0: &PeriodicJacobi, e: C64) -> Result<C64> {
    let d = discriminant_oprl(j0);
    if e.im == 0.0 && d.eval(e.re).abs() <= 2.0 {
        return Err(Error::domain(format!("E = {} lies in the spectrum", e.re)));
    }
    let t = stripping_map(j0, e);
    let [qa, qb, qc] = [t.t[1][0], t.t[1][1] - t.t[0][0], -t.t[0][1]];
    let disc = qb * qb - qa * qc * 4.0;
    if qa.norm() == 0.0 {
        return Err(Error::numeric(format!("degenerate fixed-point quadratic at E = {e}")));
    }
    let sq = disc.sqrt();
    let roots = [(-qb + sq) / (qa * 2.0), (-qb - sq) / (qa * 2.0)];
    let mult = |m: C64| (t.t[1][0] * m + t.t[1][1]).norm();
    let attracting = if mult(roots[0]) >= mult(roots[1]) { roots[0] } else { roots[1] };
    if e.im == 0.0 {
        return Ok(attracting);
    }
    let herglotz: Vec<C64> = roots.iter().copied().filter(|m| m.im * e.im > 0.0).collect();
    match herglotz.len() {
        1 => Ok(herglotz[0]),
        2 => Ok(attracting),
        _ => Err(Error::numeric(format!(
            "no root of the m-function quadratic is Herglotz at E = {e} (discriminant {disc})"
        ))),
    }
}

/// Atoms `(x, weight)` of a discrete measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointMeasure {
    pub atoms: Vec<(f64, f64)>,
}

impl PointMeasure {
    pub fn moment(&self, k: i32) -> f64 {
        self.atoms.iter().map(|(x, w)| w * x.powi(k)).sum()
    }
}

/// Normalised zero counting measure of `pₙ`: eigenvalues of the top-left n×n
/// truncation, each with weight 1/n.
pub fn zero_measure(seq: &JacobiSeq, n: usize) -> Result<PointMeasure> {
    if n == 0 || n > seq.len() {
        return Err(Error::input(format!("need 1 ≤ n ≤ {}, got {n}", seq.len())));
    }
    let te = tridiag_eigen(&seq.b()[..n], &seq.a()[..n - 1], 0)?;
    Ok(PointMeasure { atoms: te.values.into_iter().map(|x| (x, 1.0 / n as f64)).collect() })
}
