//! Block Jacobi matrices (MOPRL): type 1/2/3 normal forms, `|A|` and its 𝓛 factor,
//! Nevai diagnostics, the matrix m-function by coefficient stripping down to an
//! exact free tail, truncation spectral measures, and zeros/poles of `det M`.

use crate::numerics::{herm_eigen, herm_eigenvalues, CMat, HermitianMatrix};
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    /// No information beyond the listed blocks.
    None,
    /// `Aₙ = 1`, `Bₙ = 0` after the listed blocks.
    Free,
}

/// Blocks `(A₁, B₁), (A₂, B₂), …` of
/// ```text
/// 𝒥 = [[B₁, A₁, 0, …], [A₁†, B₂, A₂, …], …]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BlockJacobiJson", into = "BlockJacobiJson")]
pub struct BlockJacobi {
    l: usize,
    blocks: Vec<(CMat, CMat)>,
    tail: Tail,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Serialize, Deserialize)]
struct BlockJson {
    #[serde(rename = "A")]
    a: Vec<Vec<Entry>>,
    #[serde(rename = "B")]
    b: Vec<Vec<Entry>>,
}

#[derive(Serialize, Deserialize)]
struct BlockJacobiJson {
    l: usize,
    blocks: Vec<BlockJson>,
    tail: Tail,
}

fn mat_from_json(rows: &[Vec<Entry>]) -> CMat {
    CMat::from_rows(
        &rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|e| match *e {
                        Entry::Real(x) => C64::new(x, 0.0),
                        Entry::Complex([x, y]) => C64::new(x, y),
                    })
                    .collect()
            })
            .collect::<Vec<_>>(),
    )
}

fn mat_to_json(m: &CMat) -> Vec<Vec<Entry>> {
    let real = m.to_rows().iter().flatten().all(|z| z.im == 0.0);
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(|z| if real { Entry::Real(z.re) } else { Entry::Complex([z.re, z.im]) }).collect())
        .collect()
}

impl TryFrom<BlockJacobiJson> for BlockJacobi {
    type Error = Error;
    fn try_from(j: BlockJacobiJson) -> Result<Self> {
        for blk in &j.blocks {
            if blk.a.iter().chain(&blk.b).any(|r| r.len() != j.l) || blk.a.len() != j.l || blk.b.len() != j.l {
                return Err(Error::input(format!("every block must be {0}×{0}", j.l)));
            }
        }
        let blocks = j.blocks.iter().map(|b| (mat_from_json(&b.a), mat_from_json(&b.b))).collect();
        BlockJacobi::new(j.l, blocks, j.tail)
    }
}

impl From<BlockJacobi> for BlockJacobiJson {
    fn from(j: BlockJacobi) -> Self {
        BlockJacobiJson {
            l: j.l,
            blocks: j.blocks.iter().map(|(a, b)| BlockJson { a: mat_to_json(a), b: mat_to_json(b) }).collect(),
            tail: j.tail,
        }
    }
}

/// Smallest singular value.
pub fn min_singular(a: &CMat) -> Result<f64> {
    let ev = herm_eigen(&HermitianMatrix::new((&a.adjoint() * a).hermitian_part())?)?;
    Ok(ev.values[0].max(0.0).sqrt())
}

impl BlockJacobi {
    pub fn new(l: usize, blocks: Vec<(CMat, CMat)>, tail: Tail) -> Result<Self> {
        if l == 0 {
            return Err(Error::input("block size must be positive"));
        }
        let mut out = Vec::with_capacity(blocks.len());
        for (n, (a, b)) in blocks.into_iter().enumerate() {
            if (a.rows(), a.cols(), b.rows(), b.cols()) != (l, l, l, l) {
                return Err(Error::input(format!("block {} is not {l}×{l}", n + 1)));
            }
            if a.to_rows().iter().flatten().chain(b.to_rows().iter().flatten()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::input(format!("block {} has non-finite entries", n + 1)));
            }
            if min_singular(&a)? <= 1e-12 * a.op_norm() {
                return Err(Error::input(format!("A_{} is singular", n + 1)));
            }
            let b = HermitianMatrix::new(b).map_err(|e| Error::input(format!("B_{}: {e}", n + 1)))?;
            out.push((a, b.into_matrix()));
        }
        Ok(BlockJacobi { l, blocks: out, tail })
    }

    /// Free blocks `Aₙ = 1, Bₙ = 0` for `n ≤ len`, followed by a free tail.
    pub fn free(l: usize, len: usize) -> Self {
        BlockJacobi { l, blocks: vec![(CMat::identity(l), CMat::zeros(l, l)); len], tail: Tail::Free }
    }

    /// Scalar Jacobi parameters as 1×1 blocks.
    pub fn scalar(a: &[f64], b: &[f64], tail: Tail) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::input("a and b must have equal length"));
        }
        let blocks = a.iter().zip(b).map(|(&x, &y)| (CMat::diag_real(&[x]), CMat::diag_real(&[y]))).collect();
        BlockJacobi::new(1, blocks, tail)
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn blocks(&self) -> &[(CMat, CMat)] {
        &self.blocks
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `(Aₙ, Bₙ)` for 1-based `n`, including the free tail.
    pub fn block(&self, n: usize) -> Option<(CMat, CMat)> {
        if n >= 1 && n <= self.blocks.len() {
            Some(self.blocks[n - 1].clone())
        } else if n > self.blocks.len() && self.tail == Tail::Free {
            Some((CMat::identity(self.l), CMat::zeros(self.l, self.l)))
        } else {
            None
        }
    }

    /// `𝒥` with the first `k` blocks stripped.
    pub fn stripped(&self, k: usize) -> BlockJacobi {
        BlockJacobi { l: self.l, blocks: self.blocks[k.min(self.len())..].to_vec(), tail: self.tail }
    }

    /// Direct sum with another block Jacobi matrix of the same length and tail.
    pub fn direct_sum(&self, other: &BlockJacobi) -> Result<BlockJacobi> {
        if self.tail != other.tail {
            return Err(Error::input("tails differ"));
        }
        let n = self.len().max(other.len());
        let blocks = (1..=n)
            .map(|k| {
                let (a1, b1) = self.block(k).ok_or_else(|| Error::input("lengths differ without a free tail"))?;
                let (a2, b2) = other.block(k).ok_or_else(|| Error::input("lengths differ without a free tail"))?;
                Ok((a1.direct_sum(&a2), b1.direct_sum(&b2)))
            })
            .collect::<Result<Vec<_>>>()?;
        BlockJacobi::new(self.l + other.l, blocks, self.tail)
    }

    /// The `ℓN × ℓN` truncation.
    pub fn truncation(&self, n: usize) -> Result<HermitianMatrix> {
        let l = self.l;
        let mut m = CMat::zeros(l * n, l * n);
        for k in 1..=n {
            let (a, b) = self.block(k).ok_or_else(|| Error::input(format!("block {k} is undefined")))?;
            m.set_submatrix((k - 1) * l, (k - 1) * l, &b);
            if k < n {
                m.set_submatrix((k - 1) * l, k * l, &a);
                m.set_submatrix(k * l, (k - 1) * l, &a.adjoint());
            }
        }
        HermitianMatrix::new(m)
    }
}

/// Which normal forms a block Jacobi matrix is in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TypeFlags {
    /// Every `Aₙ > 0`.
    pub type1: bool,
    /// Every `A₁⋯Aₙ > 0`.
    pub type2: bool,
    /// Every `Aₙ` lower triangular with positive diagonal.
    pub type3: bool,
}

const TYPE_TOL: f64 = 1e-10;

fn is_positive_definite(m: &CMat) -> bool {
    let scale = m.max_abs().max(1.0);
    if m.hermitian_defect() > TYPE_TOL * scale {
        return false;
    }
    match herm_eigen(&HermitianMatrix::trusted(m.hermitian_part())) {
        Ok(e) => e.values[0] > TYPE_TOL * scale,
        Err(_) => false,
    }
}

pub fn classify_type(j: &BlockJacobi) -> TypeFlags {
    let type1 = j.blocks.iter().all(|(a, _)| is_positive_definite(a));
    let type3 = j.blocks.iter().all(|(a, _)| a.is_lower_pos_diag(TYPE_TOL));
    let mut prod = CMat::identity(j.l);
    let mut type2 = true;
    for (a, _) in &j.blocks {
        prod = &prod * a;
        if !is_positive_definite(&prod) {
            type2 = false;
            break;
        }
    }
    TypeFlags { type1, type2, type3 }
}

/// `f(H)` for Hermitian `H` through its eigendecomposition.
fn herm_fn(h: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let e = herm_eigen(&HermitianMatrix::new(h.hermitian_part())?)?;
    let n = h.rows();
    let d = CMat::diag_real(&e.values.iter().map(|&x| f(x)).collect::<Vec<_>>());
    let _ = n;
    Ok(&(&e.vectors * &d) * &e.vectors.adjoint())
}

/// `√(A†A)`.
pub fn abs_matrix(a: &CMat) -> Result<CMat> {
    herm_fn(&(&a.adjoint() * a), |x| x.max(0.0).sqrt())
}

/// Polar form `X = P W` with `P = (XX†)^{1/2} > 0` and `W` unitary.
pub fn polar_left(x: &CMat) -> Result<(CMat, CMat)> {
    let p = herm_fn(&(x * &x.adjoint()), |v| v.max(0.0).sqrt())?;
    let w = &p.inverse()? * x;
    Ok((p, w))
}

/// Gram–Schmidt (applied twice) on the columns of `x`, in the given order.
/// Returns the orthonormal columns and the coefficients `r[k][j] = ⟨q_k, x_j⟩`.
fn gram_schmidt(x: &CMat, order: &[usize]) -> Result<(CMat, CMat)> {
    let n = x.rows();
    let mut q = CMat::zeros(n, x.cols());
    let mut r = CMat::zeros(x.cols(), x.cols());
    let scale = x.max_abs().max(f64::MIN_POSITIVE);
    for (step, &j) in order.iter().enumerate() {
        let mut v: Vec<C64> = (0..n).map(|i| x[(i, j)]).collect();
        for _ in 0..2 {
            for &k in &order[..step] {
                let c: C64 = (0..n).map(|i| q[(i, k)].conj() * v[i]).sum();
                r[(k, j)] += c;
                for i in 0..n {
                    v[i] -= c * q[(i, k)];
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-13 * scale {
            return Err(Error::numeric("matrix is numerically singular"));
        }
        r[(j, j)] = C64::new(norm, 0.0);
        for i in 0..n {
            q[(i, j)] = v[i] / norm;
        }
    }
    Ok((q, r))
}

/// `B = W L` with `W` unitary and `L ∈ 𝓛`, by Gram–Schmidt on the columns of `B`
/// from right to left.
pub fn ql_decompose(b: &CMat) -> Result<(CMat, CMat)> {
    let order: Vec<usize> = (0..b.cols()).rev().collect();
    let (w, l) = gram_schmidt(b, &order)?;
    Ok((w, l))
}

/// `X = L Q` with `L ∈ 𝓛` and `Q` unitary.
pub fn lq_decompose(x: &CMat) -> Result<(CMat, CMat)> {
    let order: Vec<usize> = (0..x.rows()).collect();
    let (q, r) = gram_schmidt(&x.adjoint(), &order)?;
    Ok((r.adjoint(), q.adjoint()))
}

/// `(|A|, L)` where `L ∈ 𝓛` is the unique such matrix with `|L| = |A|`.
pub fn abs_and_cholesky(a: &CMat) -> Result<(CMat, CMat)> {
    if !a.is_square() {
        return Err(Error::input("matrix must be square"));
    }
    let abs = abs_matrix(a)?;
    let (_, l) = ql_decompose(&abs)?;
    Ok((abs, l))
}

/// Equivalent block Jacobi matrix of the given type (1, 2 or 3) under
/// `Ãₙ = UₙAₙU⁻¹ₙ₊₁`, `B̃ₙ = UₙBₙUₙ⁻¹` with `U₁ = 1`.
pub fn to_type(j: &BlockJacobi, target: u8) -> Result<BlockJacobi> {
    if !(1..=3).contains(&target) {
        return Err(Error::input(format!("target type must be 1, 2 or 3, got {target}")));
    }
    let mut u = CMat::identity(j.l);
    let mut prod = CMat::identity(j.l);
    let mut out = Vec::with_capacity(j.len());
    for (a, b) in &j.blocks {
        let x = &u * a;
        let (new_a, next_u) = match target {
            1 => polar_left(&x)?,
            2 => {
                let (p, w) = polar_left(&(&prod * &x))?;
                let new_a = &prod.inverse()? * &p;
                prod = p;
                (new_a, w)
            }
            _ => lq_decompose(&x)?,
        };
        let new_b = &(&u * b) * &u.adjoint();
        out.push((new_a, new_b.hermitian_part()));
        u = next_u;
    }
    BlockJacobi::new(j.l, out, j.tail)
}

/// Tail suprema over `n ≥ N` of `‖Bₙ‖`, `‖Aₙ†Aₙ − 1‖`, `‖Aₙ − 1‖`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NevaiRow {
    pub n: usize,
    pub b: f64,
    pub ata_minus_1: f64,
    pub a_minus_1: f64,
}

pub fn nevai_diagnostic(j: &BlockJacobi, grid: &[usize]) -> Vec<NevaiRow> {
    let eye = CMat::identity(j.l);
    let norms: Vec<[f64; 3]> = j
        .blocks
        .iter()
        .map(|(a, b)| [b.op_norm(), (&(&a.adjoint() * a) - &eye).op_norm(), (a - &eye).op_norm()])
        .collect();
    grid.iter()
        .map(|&n| {
            let mut s = [0.0f64; 3];
            for v in norms.iter().skip(n.max(1) - 1) {
                for k in 0..3 {
                    s[k] = s[k].max(v[k]);
                }
            }
            NevaiRow { n, b: s[0], ata_minus_1: s[1], a_minus_1: s[2] }
        })
        .collect()
}

/// `M(z) = −m(z + z⁻¹)` at a point of the punctured disk.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixHerglotzEval {
    pub z: C64,
    pub e: C64,
    pub value: CMat,
}

fn require_free_tail(j: &BlockJacobi) -> Result<()> {
    if j.tail != Tail::Free {
        return Err(Error::input("the m-function needs a free tail"));
    }
    Ok(())
}

/// Strips the listed blocks from the free seed `m = −z·1` using
/// `m⁽ⁿ⁾ = (B_{n+1} − E − A_{n+1} m⁽ⁿ⁺¹⁾ A†_{n+1})⁻¹`.
pub fn m_from_tail(j: &BlockJacobi, z: C64) -> Result<MatrixHerglotzEval> {
    require_free_tail(j)?;
    if !(z.norm() > 0.0 && z.norm() < 1.0) {
        return Err(Error::domain(format!("z = {z} is not in the punctured unit disk")));
    }
    m_closed_disk(j, z)
}

/// As [`m_from_tail`] but also accepting `|z| = 1`, where `M` is the boundary
/// value (rational in `z`, so no radial limit is needed).
pub(crate) fn m_closed_disk(j: &BlockJacobi, z: C64) -> Result<MatrixHerglotzEval> {
    require_free_tail(j)?;
    let e = z + z.inv();
    let mut m = CMat::scalar(j.l, -z);
    let e_mat = CMat::scalar(j.l, e);
    for (n, (a, b)) in j.blocks.iter().enumerate().rev() {
        let inner = &(&(b - &e_mat) - &(&(a * &m) * &a.adjoint()));
        m = inner.inverse().map_err(|_| {
            Error::numeric(format!("z = {z} is at (or numerically near) a pole of the m-function stripped {n} times"))
        })?;
    }
    Ok(MatrixHerglotzEval { z, e, value: m.scale_re(-1.0) })
}

/// Spectral measure of a finite truncation: eigenvalues and `ℓ×ℓ` weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPointMeasure {
    pub atoms: Vec<(f64, CMat)>,
}

impl MatrixPointMeasure {
    pub fn total_weight(&self, l: usize) -> CMat {
        self.atoms.iter().fold(CMat::zeros(l, l), |acc, (_, w)| &acc + w)
    }

    /// `∫ dμ(x)/(x − E)`.
    pub fn stieltjes(&self, l: usize, e: C64) -> CMat {
        self.atoms.iter().fold(CMat::zeros(l, l), |acc, (x, w)| &acc + &w.scale((C64::new(*x, 0.0) - e).inv()))
    }
}

pub fn truncation_measure(j: &BlockJacobi, n: usize) -> Result<MatrixPointMeasure> {
    if n == 0 {
        return Err(Error::input("truncation size must be positive"));
    }
    let l = j.l;
    let eig = herm_eigen(&j.truncation(n)?)?;
    let atoms = eig
        .values
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let v: Vec<C64> = (0..l).map(|i| eig.vectors[(i, k)]).collect();
            (x, CMat::from_fn(l, l, |r, c| v[r] * v[c].conj()))
        })
        .collect();
    Ok(MatrixPointMeasure { atoms })
}

/// A zero or pole of `det M` on the real axis: `order > 0` for a pole of that
/// order, `< 0` for a zero. `fit_residual` is the distance of the fitted slope
/// from the nearest integer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetMSingularity {
    pub z: f64,
    pub order: i32,
    pub fit_residual: f64,
}

fn det_m(j: &BlockJacobi, z: C64) -> Result<C64> {
    Ok(m_from_tail(j, z)?.value.det())
}

/// Mean of `log|det M|` on a circle.
fn circle_mean_log(j: &BlockJacobi, c: f64, r: f64) -> Result<f64> {
    let k = 64;
    let mut s = 0.0;
    for i in 0..k {
        let t = (i as f64 + 0.5) * std::f64::consts::TAU / k as f64;
        s += det_m(j, C64::new(c, 0.0) + C64::from_polar(r, t))?.norm().ln();
    }
    Ok(s / k as f64)
}

/// Order of `det M` at `c`: minus the least-squares slope of the circle means of
/// `log|det M|` against `log r` for `r ∈ {1e−3, 2e−3, 4e−3}`.
pub fn singularity_order(j: &BlockJacobi, c: f64) -> Result<(i32, f64)> {
    let rs = [1e-3, 2e-3, 4e-3];
    let xs: Vec<f64> = rs.iter().map(|r: &f64| r.ln()).collect();
    let ys = rs.iter().map(|&r| circle_mean_log(j, c, r)).collect::<Result<Vec<_>>>()?;
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let order = (-slope).round();
    Ok((order as i32, (-slope - order).abs()))
}

/// Sign-change scan of `1/det M` on `grid` points of `[lo, hi]`, bisection, then
/// order fitting. Each sign change is either a pole (`1/det M → 0`) or a zero
/// (`1/det M → ∞`). Even orders show no sign change; they are looked for at
/// local extrema of `|1/det M|` and kept when the fitted order is even and nonzero.
pub fn poles_of_det_m(j: &BlockJacobi, lo: f64, hi: f64, grid: usize) -> Result<Vec<DetMSingularity>> {
    require_free_tail(j)?;
    if !(lo < hi) || lo <= -1.0 || hi >= 1.0 || (lo <= 0.0 && hi >= 0.0) {
        return Err(Error::domain(format!("interval [{lo}, {hi}] must lie in (−1,1) and exclude 0")));
    }
    if grid < 4 {
        return Err(Error::input("grid needs at least 4 points"));
    }
    // nudge grid points off exact singularities of stripped m-functions
    let f = |x: f64| -> Result<f64> {
        let mut t = x;
        for k in 0..8 {
            match det_m(j, C64::new(t, 0.0)) {
                Ok(d) => return Ok(1.0 / d.re),
                Err(_) => t = x + 1e-9 * (k + 1) as f64,
            }
        }
        Err(Error::numeric(format!("cannot evaluate det M near z = {x}")))
    };
    let xs: Vec<f64> = (0..grid).map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64).collect();
    let vals = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let changes: Vec<usize> = (0..grid - 1).filter(|&i| vals[i].signum() != vals[i + 1].signum()).collect();
    if changes.windows(2).any(|w| w[1] == w[0] + 1) {
        return Err(Error::numeric(format!(
            "sign changes in adjacent grid cells on [{lo}, {hi}]; refine the grid beyond {grid} points"
        )));
    }
    let mut out = Vec::new();
    // even orders: local extrema of |1/det M| away from sign changes
    for i in 1..grid - 1 {
        let (a, b, c) = (vals[i - 1].abs(), vals[i].abs(), vals[i + 1].abs());
        let touches_change = changes.iter().any(|&k| k + 1 >= i && k <= i);
        if touches_change || !((b < a && b < c) || (b > a && b > c)) {
            continue;
        }
        let sign = if b < a { 1.0 } else { -1.0 };
        let g = |x: f64| f(x).map(|v| sign * v.abs().ln());
        let z = golden_min(g, xs[i - 1], xs[i + 1])?;
        let (order, fit_residual) = singularity_order(j, z)?;
        if order != 0 && order % 2 == 0 && fit_residual < 0.1 {
            out.push(DetMSingularity { z, order, fit_residual });
        }
    }
    for i in changes {
        let (mut a, mut b) = (xs[i], xs[i + 1]);
        let mut fa = vals[i];
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = f(m)?;
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        let z = 0.5 * (a + b);
        let (order, fit_residual) = singularity_order(j, z)?;
        if order != 0 {
            out.push(DetMSingularity { z, order, fit_residual });
        }
    }
    Ok(out)
}

fn golden_min(g: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<f64> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - r * (b - a), a + r * (b - a));
    let (mut g1, mut g2) = (g(x1)?, g(x2)?);
    while b - a > 1e-12 * (1.0 + a.abs()) {
        if g1 < g2 {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - r * (b - a);
            g1 = g(x1)?;
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + r * (b - a);
            g2 = g(x2)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Points `z ∈ (−1,1)` with `z + z⁻¹` an eigenvalue of `𝒥` outside `[−2, 2]`,
/// repeated by multiplicity and ordered by eigenvalue.
///
/// Beyond the listed blocks an ℓ² solution is `u_{n+1} = z uₙ`, so `E = z + z⁻¹`
/// is an eigenvalue iff it is one of `K(z) = 𝒥_N + z P_N`, where `P_N` projects
/// on the last block. Each sorted eigenvalue of `K(z)` is nondecreasing in `z`
/// while `z + z⁻¹` decreases on both halves of `(−1,1)∖{0}`, so every branch
/// crosses at most once and bisection finds it.
pub fn bound_states(j: &BlockJacobi) -> Result<Vec<f64>> {
    require_free_tail(j)?;
    let (l, n) = (j.l, j.len() + 1);
    let base = j.truncation(n)?.into_matrix();
    let k_of = |z: f64| -> Result<Vec<f64>> {
        let mut k = base.clone();
        for i in 0..l {
            k[((n - 1) * l + i, (n - 1) * l + i)] += C64::new(z, 0.0);
        }
        herm_eigenvalues(&HermitianMatrix::new(k)?)
    };
    let mut out = Vec::new();
    for side in [-1.0f64, 1.0] {
        let edge = k_of(side)?;
        for (idx, &lam) in edge.iter().enumerate() {
            if side * lam <= 2.0 {
                continue;
            }
            // φ(z) = λ_idx(K(z)) − z − 1/z, increasing; bracket (side·0⁺, side)
            let phi = |z: f64| k_of(z).map(|v| v[idx] - z - 1.0 / z);
            let (mut lo, mut hi) = if side > 0.0 { (0.0, 1.0) } else { (-1.0, 0.0) };
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi || mid == 0.0 {
                    break;
                }
                if phi(mid)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
    }
    out.sort_by(|a, b| (a + 1.0 / a).total_cmp(&(b + 1.0 / b)));
    Ok(out)
}

/// Partial products `Ã₁⋯Ãₙ` of the listed `A` blocks.
pub fn partial_products(j: &BlockJacobi) -> Vec<CMat> {
    let mut prod = CMat::identity(j.l);
    j.blocks
        .iter()
        .map(|(a, _)| {
            prod = &prod * a;
            prod.clone()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_block_jacobi(rng: &mut ChaCha8Rng, l: usize, len: usize, amp: f64) -> BlockJacobi {
        let blocks = (0..len)
            .map(|_| {
                let a = CMat::from_fn(l, l, |i, j| {
                    let d = if i == j { 1.0 } else { 0.0 };
                    c(d + amp * rng.gen_range(-1.0..1.0), amp * rng.gen_range(-1.0..1.0))
                });
                let g = CMat::from_fn(l, l, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                (a, g.hermitian_part().scale_re(amp))
            })
            .collect();
        BlockJacobi::new(l, blocks, Tail::Free).unwrap()
    }

    #[test]
    fn json_round_trip() {
        let src = r#"{"l":2,"blocks":[{"A":[[1,0],[0.5,2]],"B":[[1,[0,1]],[[0,-1],0]]}],"tail":"free"}"#;
        let j: BlockJacobi = serde_json::from_str(src).unwrap();
        assert_eq!(j.blocks()[0].1[(0, 1)], c(0.0, 1.0));
        let back: BlockJacobi = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
        assert_eq!(back, j);
        let bad = r#"{"l":1,"blocks":[{"A":[[0]],"B":[[0]]}],"tail":"free"}"#;
        assert!(serde_json::from_str::<BlockJacobi>(bad).is_err());
    }

    #[test]
    fn classify_examples() {
        let free = BlockJacobi::free(2, 3);
        assert_eq!(classify_type(&free), TypeFlags { type1: true, type2: true, type3: true });
        let neg = BlockJacobi::scalar(&[-2.0], &[0.0], Tail::Free).unwrap();
        assert_eq!(classify_type(&neg), TypeFlags { type1: false, type2: false, type3: false });
    }

    #[test]
    fn to_type_examples() {
        let free = BlockJacobi::free(2, 3);
        for t in 1..=3 {
            assert_eq!(to_type(&free, t).unwrap(), free);
        }
        let s = BlockJacobi::new(
            1,
            vec![
                (CMat::from_rows(&[vec![c(0.0, 2.0)]]), CMat::diag_real(&[0.3])),
                (CMat::from_rows(&[vec![c(-1.5, 0.0)]]), CMat::diag_real(&[-0.1])),
            ],
            Tail::Free,
        )
        .unwrap();
        let t3 = to_type(&s, 3).unwrap();
        assert!((t3.blocks()[0].0[(0, 0)] - 2.0).norm() < 1e-14);
        assert!((t3.blocks()[1].0[(0, 0)] - 1.5).norm() < 1e-14);
        assert!(to_type(&s, 4).is_err());
    }

    #[test]
    fn normal_forms_and_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for l in 1..=3 {
            let j = random_block_jacobi(&mut rng, l, 6, 0.4);
            let t1 = to_type(&j, 1).unwrap();
            let t2 = to_type(&j, 2).unwrap();
            let t3 = to_type(&j, 3).unwrap();
            assert!(classify_type(&t1).type1);
            assert!(classify_type(&t2).type2);
            assert!(classify_type(&t3).type3);
            let back = to_type(&t1, 3).unwrap();
            for ((a, b), (a2, b2)) in back.blocks().iter().zip(t3.blocks()) {
                assert!((a - a2).max_abs() < 1e-10 && (b - b2).max_abs() < 1e-10);
            }
            let ev = |x: &BlockJacobi| {
                crate::numerics::herm_eigenvalues(&x.truncation(6).unwrap()).unwrap()
            };
            let e0 = ev(&j);
            for x in [&t1, &t2, &t3] {
                for (u, v) in e0.iter().zip(ev(x)) {
                    assert!((u - v).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn abs_and_cholesky_examples() {
        let d = CMat::diag_real(&[2.0, 3.0]);
        let (abs, l) = abs_and_cholesky(&d).unwrap();
        assert!((&abs - &d).max_abs() < 1e-14 && (&l - &d).max_abs() < 1e-14);
        let th = 0.7f64;
        let u = CMat::from_rows(&[vec![c(th.cos(), 0.0), c(0.0, th.sin())], vec![c(0.0, th.sin()), c(th.cos(), 0.0)]]);
        let (abs, l) = abs_and_cholesky(&u).unwrap();
        assert!((&abs - &CMat::identity(2)).max_abs() < 1e-14 && (&l - &CMat::identity(2)).max_abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut ratios = Vec::new();
        for _ in 0..200 {
            let a = CMat::from_fn(3, 3, |i, j| {
                c(if i == j { 1.0 } else { 0.0 } + 0.15 * rng.gen_range(-1.0..1.0), 0.15 * rng.gen_range(-1.0..1.0))
            });
            let (abs, l) = abs_and_cholesky(&a).unwrap();
            assert!(l.is_lower_pos_diag(1e-12));
            assert!((&abs_matrix(&l).unwrap() - &abs).max_abs() < 1e-12);
            let eye = CMat::identity(3);
            let (x, y) = ((&abs - &eye).op_norm(), (&a - &eye).op_norm());
            if y > 1e-3 {
                ratios.push(x / y);
            }
        }
        // ‖|A|−1‖ ≤ C‖A−1‖ always; the reverse fails for unitary A, so only the upper bound is a theorem
        assert!(ratios.iter().all(|&r| r <= 3.0));
    }

    #[test]
    fn nevai_examples() {
        let free = BlockJacobi::free(2, 4);
        assert!(nevai_diagnostic(&free, &[1, 2]).iter().all(|r| r.b == 0.0 && r.a_minus_1 == 0.0));
        let b = CMat::diag_real(&[1.0, 0.0]);
        let j = BlockJacobi::new(2, vec![(CMat::identity(2), b); 10], Tail::None).unwrap();
        assert!((nevai_diagnostic(&j, &[5])[0].b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn m_function_examples() {
        let free = BlockJacobi::free(2, 3);
        let z = c(0.3, 0.2);
        assert!((&m_from_tail(&free, z).unwrap().value - &CMat::scalar(2, z)).max_abs() < 1e-15);
        let t = 0.7;
        let j = BlockJacobi::scalar(&[1.0], &[t], Tail::Free).unwrap();
        let m = m_from_tail(&j, z).unwrap().value[(0, 0)];
        assert!((m - z / (1.0 - t * z)).norm() < 1e-14);
        assert!(m_from_tail(&j, c(1.0, 0.0)).is_err());
        // (M/z)⁻¹ = 1 − B₁z − (A₁†A₁ − 1)z² + O(z³)
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let j = random_block_jacobi(&mut rng, 2, 4, 0.3);
        let (a1, b1) = j.block(1).unwrap();
        let eye = CMat::identity(2);
        for &h in &[1e-2, 5e-3] {
            let z = c(h, 0.0);
            let lhs = m_from_tail(&j, z).unwrap().value.scale(z.inv()).inverse().unwrap();
            let rhs = &(&eye - &b1.scale(z)) - &(&(&a1.adjoint() * &a1) - &eye).scale(z * z);
            assert!((&lhs - &rhs).max_abs() < 50.0 * h.powi(3));
        }
    }

    #[test]
    fn truncation_measure_examples() {
        let free = BlockJacobi::free(1, 2);
        let mu = truncation_measure(&free, 2).unwrap();
        assert!((mu.atoms[0].0 + 1.0).abs() < 1e-14 && (mu.atoms[1].0 - 1.0).abs() < 1e-14);
        assert!((mu.atoms[0].1[(0, 0)].re - 0.5).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let j = random_block_jacobi(&mut rng, 2, 5, 0.3);
        let mu = truncation_measure(&j, 60).unwrap();
        assert!((&mu.total_weight(2) - &CMat::identity(2)).max_abs() < 1e-10);
        let z = c((3.0 - 5f64.sqrt()) / 2.0, 0.0);
        let m = m_from_tail(&j, z).unwrap().value.scale_re(-1.0);
        let mu = truncation_measure(&j, 400).unwrap();
        assert!((&mu.stieltjes(2, c(3.0, 0.0)) - &m).max_abs() < 1e-4);
    }

    #[test]
    fn pole_examples() {
        let free = BlockJacobi::free(1, 2);
        assert!(poles_of_det_m(&free, 0.05, 0.95, 200).unwrap().is_empty());
        let j = BlockJacobi::scalar(&[1.0], &[1.5], Tail::Free).unwrap();
        let poles = poles_of_det_m(&j, 0.05, 0.95, 200).unwrap();
        assert_eq!(poles.len(), 1);
        assert!((poles[0].z - 2.0 / 3.0).abs() < 1e-10 && poles[0].order == 1);
        let k = BlockJacobi::scalar(&[1.0, 1.0], &[2.5, 0.3], Tail::Free).unwrap();
        let both = j.direct_sum(&k).unwrap();
        let pk = poles_of_det_m(&k, 0.05, 0.95, 200).unwrap();
        let pb = poles_of_det_m(&both, 0.05, 0.95, 400).unwrap();
        for p in pk.iter().chain(&poles) {
            let hit = pb.iter().find(|q| (q.z - p.z).abs() < 1e-8).expect("summand pole missing");
            let expected: i32 = poles.iter().chain(&pk).filter(|q| (q.z - p.z).abs() < 1e-8).map(|q| q.order).sum();
            assert_eq!(hit.order, expected);
        }
        // a shared pole has even order and no sign change
        let twice = j.direct_sum(&j).unwrap();
        let p2 = poles_of_det_m(&twice, 0.05, 0.95, 200).unwrap();
        assert_eq!(p2.len(), 1);
        assert!((p2[0].z - 2.0 / 3.0).abs() < 1e-7 && p2[0].order == 2);
        assert!(poles_of_det_m(&j, -0.5, 0.5, 100).is_err());
    }

    #[test]
    fn type2_products_stabilise_after_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut j = random_block_jacobi(&mut rng, 2, 4, 0.3);
        j.blocks.extend(std::iter::repeat_n((CMat::identity(2), CMat::zeros(2, 2)), 4));
        let prods = partial_products(&to_type(&j, 2).unwrap());
        for n in 4..8 {
            assert!((&prods[n] - &prods[3]).max_abs() < 1e-12);
        }
        assert!(is_positive_definite(&prods[7]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn herglotz_and_stripping(seed in 0u64..1000, l in 1usize..4, r in 0.05f64..0.95, th in 0.05f64..3.09) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let j = random_block_jacobi(&mut rng, l, 4, 0.4);
            let z = C64::from_polar(r, th);
            let Ok(m) = m_from_tail(&j, z) else { return Ok(()) };
            let im = crate::numerics::herm_eigenvalues(&HermitianMatrix::new(m.value.imag_part()).unwrap()).unwrap();
            prop_assert!(im[0] >= -1e-12);
            // one forward stripping step reproduces M of the shifted operator
            let Ok(m1) = m_from_tail(&j.stripped(1), z) else { return Ok(()) };
            let (a, b) = j.block(1).unwrap();
            let e = CMat::scalar(l, z + z.inv());
            let small = m1.value.scale_re(-1.0);
            let rebuilt = (&(&b - &e) - &(&(&a * &small) * &a.adjoint())).inverse().unwrap().scale_re(-1.0);
            prop_assert!((&rebuilt - &m.value).max_abs() <= 1e-10 * (1.0 + m.value.max_abs()));
        }

        #[test]
        fn equivalence_preserves_measure(seed in 0u64..1000, l in 1usize..4, target in 1u8..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let j = random_block_jacobi(&mut rng, l, 5, 0.4);
            let t = to_type(&j, target).unwrap();
            let (m1, m2) = (truncation_measure(&j, 20).unwrap(), truncation_measure(&t, 20).unwrap());
            // U₁ = 1, so the matrix measure itself is unchanged: compare moments
            for k in 0..6 {
                let mom = |mu: &MatrixPointMeasure| {
                    mu.atoms.iter().fold(CMat::zeros(l, l), |acc, (x, w)| &acc + &w.scale_re(x.powi(k)))
                };
                prop_assert!((&mom(&m1) - &mom(&m2)).max_abs() < 1e-9);
            }
        }
    }
}
