//! CMV side: Θ blocks, windows of `C = LM`, closed-form extreme diagonals of
//! `C^{±ℓ}`, the Laurent discriminant of a periodic CMV matrix, and the Θ/transfer
//! equivalence behind it.
//!
//! Index conventions: `L = ⊕Θ(α₂ⱼ)` on pairs `{2j, 2j+1}` and `M = ⊕Θ(α₂ⱼ₊₁)` on
//! pairs `{2j+1, 2j+2}`, so `L₀₀ = ᾱ₀`. Two-sided: `M₀₀ = −α₋₁`; one-sided: `M₀₀ = 1`.
//!
//! The Lyapunov exponent from the discriminant differs from the other common OPUC
//! convention by `−½log|z|`; only the discriminant-based one is exposed here.

use crate::magic::Sides;
use crate::numerics::{CMat, LaurentPoly, Mobius2};
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};
use std::ops::Range;

pub fn rho(alpha: C64) -> f64 {
    (1.0 - alpha.norm_sqr()).max(0.0).sqrt()
}

fn check_alpha(alpha: C64) -> Result<()> {
    if !(alpha.norm() < 1.0) {
        return Err(Error::input(format!("Verblunsky coefficient {alpha} is not in the open unit disk")));
    }
    Ok(())
}

/// Verblunsky coefficients `α_offset … α_{offset+len−1}`; one-sided sequences start at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VerblunskySeqJson", into = "VerblunskySeqJson")]
pub struct VerblunskySeq {
    offset: i64,
    alpha: Vec<C64>,
    sides: Sides,
}

#[derive(Serialize, Deserialize)]
struct VerblunskySeqJson {
    offset: i64,
    alpha: Vec<[f64; 2]>,
    sides: Sides,
}

impl TryFrom<VerblunskySeqJson> for VerblunskySeq {
    type Error = Error;
    fn try_from(j: VerblunskySeqJson) -> Result<Self> {
        VerblunskySeq::new(j.offset, j.alpha.iter().map(|a| C64::new(a[0], a[1])).collect(), j.sides)
    }
}

impl From<VerblunskySeq> for VerblunskySeqJson {
    fn from(v: VerblunskySeq) -> Self {
        VerblunskySeqJson {
            offset: v.offset,
            alpha: v.alpha.iter().map(|a| [a.re, a.im]).collect(),
            sides: v.sides,
        }
    }
}

impl VerblunskySeq {
    pub fn new(offset: i64, alpha: Vec<C64>, sides: Sides) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::input("empty Verblunsky sequence"));
        }
        for &a in &alpha {
            check_alpha(a)?;
        }
        if sides == Sides::One && offset != 0 {
            return Err(Error::input("one-sided Verblunsky sequences start at index 0"));
        }
        Ok(VerblunskySeq { offset, alpha, sides })
    }

    /// `len` coefficients of a periodic sequence starting at `offset`.
    pub fn from_periodic(v0: &PeriodicVerblunsky, offset: i64, len: usize, sides: Sides) -> Self {
        let alpha = (0..len as i64).map(|k| v0.alpha_at(offset + k)).collect();
        VerblunskySeq { offset, alpha, sides }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn sides(&self) -> Sides {
        self.sides
    }

    pub fn alphas(&self) -> &[C64] {
        &self.alpha
    }

    /// Index range on which coefficients are defined.
    pub fn range(&self) -> Range<i64> {
        self.offset..self.offset + self.alpha.len() as i64
    }

    pub fn alpha_at(&self, n: i64) -> Option<C64> {
        self.range().contains(&n).then(|| self.alpha[(n - self.offset) as usize])
    }

    pub fn conj(&self) -> VerblunskySeq {
        VerblunskySeq { offset: self.offset, alpha: self.alpha.iter().map(|a| a.conj()).collect(), sides: self.sides }
    }
}

/// Even-period Verblunsky coefficients `α₀ … α_{p−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PeriodicVerblunskyJson", into = "PeriodicVerblunskyJson")]
pub struct PeriodicVerblunsky {
    alpha: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct PeriodicVerblunskyJson {
    p: usize,
    alpha: Vec<[f64; 2]>,
}

impl TryFrom<PeriodicVerblunskyJson> for PeriodicVerblunsky {
    type Error = Error;
    fn try_from(j: PeriodicVerblunskyJson) -> Result<Self> {
        if j.alpha.len() != j.p {
            return Err(Error::input(format!("period p = {} but {} coefficients", j.p, j.alpha.len())));
        }
        PeriodicVerblunsky::new(j.alpha.iter().map(|a| C64::new(a[0], a[1])).collect())
    }
}

impl From<PeriodicVerblunsky> for PeriodicVerblunskyJson {
    fn from(v: PeriodicVerblunsky) -> Self {
        PeriodicVerblunskyJson { p: v.p(), alpha: v.alpha.iter().map(|a| [a.re, a.im]).collect() }
    }
}

impl PeriodicVerblunsky {
    /// Odd periods are rejected; use [`sieve2`] to double them first.
    pub fn new(alpha: Vec<C64>) -> Result<Self> {
        if alpha.is_empty() || !alpha.len().is_multiple_of(2) {
            return Err(Error::input(format!(
                "period must be even, got {} (sieve odd periods to 2p first)",
                alpha.len()
            )));
        }
        for &a in &alpha {
            check_alpha(a)?;
        }
        Ok(PeriodicVerblunsky { alpha })
    }

    pub fn p(&self) -> usize {
        self.alpha.len()
    }

    pub fn alphas(&self) -> &[C64] {
        &self.alpha
    }

    pub fn alpha_at(&self, n: i64) -> C64 {
        self.alpha[n.rem_euclid(self.p() as i64) as usize]
    }
}

/// Two-sieved sequence `β₂ₖ₊₁ = αₖ`, `β₂ₖ = 0`: a period-p cycle (any parity) becomes period 2p.
pub fn sieve2(alpha: &[C64]) -> Result<PeriodicVerblunsky> {
    let mut out = Vec::with_capacity(2 * alpha.len());
    for &a in alpha {
        out.push(C64::new(0.0, 0.0));
        out.push(a);
    }
    PeriodicVerblunsky::new(out)
}

/// `Θ(α) = [[ᾱ, ρ], [ρ, −α]]`.
pub fn theta_block(alpha: C64) -> Result<CMat> {
    check_alpha(alpha)?;
    let r = C64::new(rho(alpha), 0.0);
    Ok(CMat::from_rows(&[vec![alpha.conj(), r], vec![r, -alpha]]))
}

/// Entry `(i, k)` of the block diagonal factor whose blocks start at indices of
/// parity `start_parity`, built from `coef(n)` for the block starting at `n`.
/// `None` means the needed coefficient is undefined.
fn factor_entry(
    v: &VerblunskySeq,
    start_parity: i64,
    i: i64,
    k: i64,
    conj: bool,
) -> Option<C64> {
    if v.sides == Sides::One && (i < 0 || k < 0) {
        return Some(C64::new(0.0, 0.0));
    }
    let start = if (i - start_parity).rem_euclid(2) == 0 { i } else { i - 1 };
    if k < start || k > start + 1 {
        return Some(C64::new(0.0, 0.0));
    }
    if v.sides == Sides::One && start == -1 {
        // the one-sided M starts with a 1×1 block
        return Some(if i == 0 && k == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    }
    let a = v.alpha_at(start)?;
    let a = if conj { a.conj() } else { a };
    let r = C64::new(rho(a), 0.0);
    Some(match (i - start, k - start) {
        (0, 0) => a.conj(),
        (1, 1) => -a,
        _ => r,
    })
}

pub(crate) fn l_entry(v: &VerblunskySeq, i: i64, k: i64) -> Option<C64> {
    factor_entry(v, 0, i, k, false)
}

pub(crate) fn m_entry(v: &VerblunskySeq, i: i64, k: i64) -> Option<C64> {
    factor_entry(v, 1, i, k, false)
}

/// Entries of `L⁻¹ = L†` and `M⁻¹ = M†` (blocks `Θ(ᾱ)`).
#[cfg(test)]
pub(crate) fn l_inv_entry(v: &VerblunskySeq, i: i64, k: i64) -> Option<C64> {
    factor_entry(v, 0, i, k, true)
}

#[cfg(test)]
pub(crate) fn m_inv_entry(v: &VerblunskySeq, i: i64, k: i64) -> Option<C64> {
    factor_entry(v, 1, i, k, true)
}

/// A rectangular piece of an infinite matrix, anchored at global indices.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixWindow {
    pub row0: i64,
    pub col0: i64,
    pub m: CMat,
}

impl MatrixWindow {
    /// Entry at global indices, zero outside the stored block.
    pub fn get(&self, i: i64, j: i64) -> C64 {
        let (r, c) = (i - self.row0, j - self.col0);
        if r < 0 || c < 0 || r as usize >= self.m.rows() || c as usize >= self.m.cols() {
            C64::new(0.0, 0.0)
        } else {
            self.m[(r as usize, c as usize)]
        }
    }
}

/// Rows `rows` of `C = LM`, columns `rows.start−2 .. rows.end+2` (five-diagonal).
pub fn cmv_window(v: &VerblunskySeq, rows: Range<i64>) -> Result<MatrixWindow> {
    if rows.is_empty() {
        return Err(Error::input("empty row range"));
    }
    if v.sides == Sides::One && rows.start < 0 {
        return Err(Error::input("one-sided CMV rows start at 0"));
    }
    let col0 = if v.sides == Sides::One { (rows.start - 2).max(0) } else { rows.start - 2 };
    let col1 = rows.end + 2;
    let mut m = CMat::zeros(rows.clone().count(), (col1 - col0) as usize);
    for i in rows.clone() {
        for j in col0..col1 {
            let mut s = C64::new(0.0, 0.0);
            for k in (i - 1)..=(i + 1) {
                let l = l_entry(v, i, k).ok_or_else(|| undefined(i))?;
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                s += l * m_entry(v, k, j).ok_or_else(|| undefined(i))?;
            }
            m[((i - rows.start) as usize, (j - col0) as usize)] = s;
        }
    }
    Ok(MatrixWindow { row0: rows.start, col0, m })
}

fn undefined(i: i64) -> Error {
    Error::input(format!("CMV row {i} needs a Verblunsky coefficient outside the sequence"))
}

/// Which extreme-diagonal entry of `C^{±ℓ}` to evaluate in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerEntry {
    /// `(Cℓ)_{2m,2m+2ℓ} = ρ₂ₘ⋯ρ₂ₘ₊₂ℓ₋₁`
    PosOuterEven,
    /// `(Cℓ)_{2m+1,2m+2ℓ+1} = 0`
    PosOuterOdd,
    /// `(C⁻ℓ)_{2m,2m+2ℓ} = 0`
    NegOuterEven,
    /// `(C⁻ℓ)_{2m+1,2m+2ℓ+1} = ρ₂ₘ₊₁⋯ρ₂ₘ₊₂ℓ`
    NegOuterOdd,
    /// `(Cℓ)_{2m,2m+2ℓ−1} = ρ₂ₘ⋯ρ₂ₘ₊₂ℓ₋₂ · ᾱ₂ₘ₊₂ℓ₋₁`
    PosSubouterEven,
    /// `(Cℓ)_{2m+1,2m+2ℓ} = −α₂ₘ · ρ₂ₘ₊₁⋯ρ₂ₘ₊₂ℓ₋₁`
    PosSubouterOdd,
    /// `(C⁻ℓ)_{2m,2m+2ℓ−1} = −ᾱ₂ₘ₋₁ · ρ₂ₘ⋯ρ₂ₘ₊₂ℓ₋₂`
    NegSubouterEven,
    /// `(C⁻ℓ)_{2m+1,2m+2ℓ} = ρ₂ₘ₊₁⋯ρ₂ₘ₊₂ℓ₋₁ · α₂ₘ₊₂ℓ`
    NegSubouterOdd,
}

impl PowerEntry {
    pub const ALL: [PowerEntry; 8] = [
        PowerEntry::PosOuterEven,
        PowerEntry::PosOuterOdd,
        PowerEntry::NegOuterEven,
        PowerEntry::NegOuterOdd,
        PowerEntry::PosSubouterEven,
        PowerEntry::PosSubouterOdd,
        PowerEntry::NegSubouterEven,
        PowerEntry::NegSubouterOdd,
    ];

    /// `(power sign, row, column)` of the entry for given `ℓ, m`.
    pub fn position(self, l: i64, m: i64) -> (i64, i64, i64) {
        use PowerEntry::*;
        let e = 2 * m;
        match self {
            PosOuterEven => (1, e, e + 2 * l),
            PosOuterOdd => (1, e + 1, e + 2 * l + 1),
            NegOuterEven => (-1, e, e + 2 * l),
            NegOuterOdd => (-1, e + 1, e + 2 * l + 1),
            PosSubouterEven => (1, e, e + 2 * l - 1),
            PosSubouterOdd => (1, e + 1, e + 2 * l),
            NegSubouterEven => (-1, e, e + 2 * l - 1),
            NegSubouterOdd => (-1, e + 1, e + 2 * l),
        }
    }
}

/// Closed-form extreme-diagonal entry of `C^{±ℓ}`.
pub fn cmv_power_entry(v: &VerblunskySeq, l: i64, m: i64, which: PowerEntry) -> Result<C64> {
    use PowerEntry::*;
    if l < 1 {
        return Err(Error::input(format!("power ℓ must be ≥ 1, got {l}")));
    }
    let e = 2 * m;
    let alpha = |n: i64| -> Result<C64> {
        if v.sides == Sides::One && n == -1 {
            // one-sided M₀₀ = 1 corresponds to α₋₁ = −1
            return Ok(C64::new(-1.0, 0.0));
        }
        v.alpha_at(n)
            .ok_or_else(|| Error::input(format!("α_{n} is outside the sequence")))
    };
    let rhos = |lo: i64, hi: i64| -> Result<f64> {
        (lo..=hi).map(|n| alpha(n).map(rho)).product()
    };
    Ok(match which {
        PosOuterOdd | NegOuterEven => C64::new(0.0, 0.0),
        PosOuterEven => rhos(e, e + 2 * l - 1)?.into(),
        NegOuterOdd => rhos(e + 1, e + 2 * l)?.into(),
        PosSubouterEven => alpha(e + 2 * l - 1)?.conj() * rhos(e, e + 2 * l - 2)?,
        PosSubouterOdd => -alpha(e)? * rhos(e + 1, e + 2 * l - 1)?,
        NegSubouterEven => -alpha(e - 1)?.conj() * rhos(e, e + 2 * l - 2)?,
        NegSubouterOdd => alpha(e + 2 * l)? * rhos(e + 1, e + 2 * l - 1)?,
    })
}

/// One-step OPUC transfer matrix `Mₙ(z) = ρₙ⁻¹[[z, −ᾱₙ], [−αₙz, 1]]`.
pub fn opuc_transfer(alpha: C64, z: C64) -> Mobius2 {
    let r = rho(alpha);
    Mobius2::new(z / r, -alpha.conj() / r, -alpha * z / r, C64::new(1.0 / r, 0.0))
}

/// `Δ(z) = Tr(z^{−p/2} M_{p−1}(z)⋯M₀(z))` as a Laurent polynomial on `[−p/2, p/2]`.
pub fn discriminant_opuc(v: &PeriodicVerblunsky) -> LaurentPoly {
    // polynomial 2×2 matrices, coefficient vectors degree-0 first
    type P = Vec<C64>;
    let mul = |a: &P, b: &P| -> P {
        let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let add = |a: &P, b: &P| -> P {
        (0..a.len().max(b.len()))
            .map(|k| a.get(k).copied().unwrap_or_default() + b.get(k).copied().unwrap_or_default())
            .collect()
    };
    let one = vec![C64::new(1.0, 0.0)];
    let zero = vec![C64::new(0.0, 0.0)];
    let mut t: [[P; 2]; 2] = [[one.clone(), zero.clone()], [zero.clone(), one]];
    for &a in &v.alpha {
        let r = rho(a);
        let m: [[P; 2]; 2] = [
            [vec![C64::new(0.0, 0.0), C64::new(1.0 / r, 0.0)], vec![-a.conj() / r]],
            [vec![C64::new(0.0, 0.0), -a / r], vec![C64::new(1.0 / r, 0.0)]],
        ];
        t = [
            [add(&mul(&m[0][0], &t[0][0]), &mul(&m[0][1], &t[1][0])), add(&mul(&m[0][0], &t[0][1]), &mul(&m[0][1], &t[1][1]))],
            [add(&mul(&m[1][0], &t[0][0]), &mul(&m[1][1], &t[1][0])), add(&mul(&m[1][0], &t[0][1]), &mul(&m[1][1], &t[1][1]))],
        ];
    }
    let p = v.p();
    let mut tr = add(&t[0][0], &t[1][1]);
    tr.resize(p + 1, C64::new(0.0, 0.0));
    LaurentPoly::new(-(p as i32) / 2, tr)
}

/// Checks `(zy, y′) = Θ(α)(x, x′) ⟺ (x′, y′) = M(z)(y, x)` on samples `(x, x′, y)`:
/// the forward direction takes `(x, x′)`, the reverse takes `(y, x)`. Returns the
/// largest residual.
pub fn theta_transfer_check(alpha: C64, z: C64, samples: &[(C64, C64, C64)]) -> Result<f64> {
    check_alpha(alpha)?;
    if z.norm() == 0.0 {
        return Err(Error::domain("z must be nonzero"));
    }
    let th = theta_block(alpha)?;
    let tm = opuc_transfer(alpha, z);
    let mut worst: f64 = 0.0;
    for &(x, xp, y) in samples {
        // forward: from (x, x′) compute y, y′ through Θ, then check the transfer side
        let out = th.mat_vec(&[x, xp]);
        let (yf, ypf) = (out[0] / z, out[1]);
        let back = tm.act([yf, x]);
        worst = worst.max((back[0] - xp).norm()).max((back[1] - ypf).norm());
        // reverse: from (y, x) compute x′, y′ through M(z), then check Θ
        let [xr, ypr] = tm.act([y, x]);
        let th_out = th.mat_vec(&[x, xr]);
        worst = worst.max((th_out[0] - z * y).norm()).max((th_out[1] - ypr).norm());
    }
    Ok(worst)
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

    fn random_seq(rng: &mut ChaCha8Rng, offset: i64, len: usize, sides: Sides) -> VerblunskySeq {
        let alpha = (0..len)
            .map(|_| C64::from_polar(rng.gen_range(0.0..0.8), rng.gen_range(0.0..6.3)))
            .collect();
        VerblunskySeq::new(offset, alpha, sides).unwrap()
    }

    /// Dense `C^{±ℓ}` on a window by explicit products of `L`, `M` (or their inverses).
    fn brute_power(v: &VerblunskySeq, l: usize, neg: bool) -> (i64, CMat) {
        let r = v.range();
        let n = r.clone().count();
        let fac = |f: fn(&VerblunskySeq, i64, i64) -> Option<C64>| {
            CMat::from_fn(n, n, |i, j| f(v, r.start + i as i64, r.start + j as i64).unwrap_or_default())
        };
        let step = if neg {
            &fac(m_inv_entry) * &fac(l_inv_entry)
        } else {
            &fac(l_entry) * &fac(m_entry)
        };
        let mut p = CMat::identity(n);
        for _ in 0..l {
            p = &p * &step;
        }
        (r.start, p)
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta_block(c(0.0, 0.0)).unwrap(), CMat::from_real(&[vec![0.0, 1.0], vec![1.0, 0.0]]));
        let a = c(0.3, -0.4);
        let prod = &theta_block(a).unwrap() * &theta_block(a.conj()).unwrap();
        assert!((&prod - &CMat::identity(2)).max_abs() < 1e-15);
        let h = theta_block(c(0.5, 0.0)).unwrap();
        assert!((h[(0, 1)].re - 3f64.sqrt() / 2.0).abs() < 1e-15 && h[(1, 1)].re == -0.5);
        assert!(theta_block(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn window_examples() {
        let zero = VerblunskySeq::new(-10, vec![c(0.0, 0.0); 20], Sides::Two).unwrap();
        let w = cmv_window(&zero, -4..4).unwrap();
        for m in -2..2 {
            assert_eq!(w.get(2 * m, 2 * m + 2), c(1.0, 0.0));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v = random_seq(&mut rng, -12, 24, Sides::Two);
        let w = cmv_window(&v, -8..8).unwrap();
        for j in -4..4 {
            let lhs = w.get(2 * j, 2 * j + 1).norm_sqr() + w.get(2 * j, 2 * j + 2).norm_sqr();
            assert!((lhs - rho(v.alpha_at(2 * j).unwrap()).powi(2)).abs() < 1e-14);
        }
        // interior columns are orthonormal: a column j is supported in rows j−2..j+2
        for j in -5..5 {
            for k in -5..5 {
                let ip: C64 = (-8..8).map(|i| w.get(i, j).conj() * w.get(i, k)).sum();
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-12);
            }
        }
        assert!(cmv_window(&v, -12..0).is_err());
    }

    #[test]
    fn one_sided_corner() {
        let v = VerblunskySeq::new(0, vec![c(0.3, 0.1), c(-0.2, 0.4), c(0.1, 0.0), c(0.5, 0.0)], Sides::One)
            .unwrap();
        let w = cmv_window(&v, 0..2).unwrap();
        // C₀₀ = L₀₀·M₀₀ = ᾱ₀·1, C₀₁ = ρ₀·M₁₁ = ρ₀ᾱ₁
        assert!((w.get(0, 0) - c(0.3, -0.1)).norm() < 1e-15);
        assert!((w.get(0, 1) - c(-0.2, -0.4) * rho(c(0.3, 0.1))).norm() < 1e-15);
    }

    #[test]
    fn power_entry_examples() {
        let zero = VerblunskySeq::new(-10, vec![c(0.0, 0.0); 20], Sides::Two).unwrap();
        for l in 1..4 {
            assert_eq!(cmv_power_entry(&zero, l, 0, PowerEntry::PosOuterEven).unwrap(), c(1.0, 0.0));
        }
        let half = VerblunskySeq::new(0, vec![c(0.5, 0.0); 10], Sides::One).unwrap();
        let e = cmv_power_entry(&half, 1, 1, PowerEntry::PosOuterEven).unwrap();
        assert!((e - c(0.75, 0.0)).norm() < 1e-15);
        let (start, p1) = brute_power(&half, 1, false);
        assert!((p1[((2 - start) as usize, (4 - start) as usize)] - c(0.75, 0.0)).norm() < 1e-15);
        assert_eq!(cmv_power_entry(&half, 2, 1, PowerEntry::PosOuterOdd).unwrap(), c(0.0, 0.0));
        assert!(cmv_power_entry(&half, 0, 1, PowerEntry::PosOuterOdd).is_err());
    }

    #[test]
    fn power_entries_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for sides in [Sides::Two, Sides::One] {
            let offset = if sides == Sides::Two { -20 } else { 0 };
            let v = random_seq(&mut rng, offset, 40, sides);
            for l in 1..=4usize {
                let (start, pos) = brute_power(&v, l, false);
                let (_, neg) = brute_power(&v, l, true);
                let ms: Vec<i64> = if sides == Sides::Two { (-4..4).collect() } else { (0..6).collect() };
                for m in ms {
                    for which in PowerEntry::ALL {
                        let (sgn, i, j) = which.position(l as i64, m);
                        let mat = if sgn > 0 { &pos } else { &neg };
                        let brute = mat[((i - start) as usize, (j - start) as usize)];
                        let closed = cmv_power_entry(&v, l as i64, m, which).unwrap();
                        assert!((brute - closed).norm() < 1e-12, "{which:?} ℓ={l} m={m}: {brute} vs {closed}");
                    }
                }
            }
        }
    }

    #[test]
    fn discriminant_examples() {
        let free = PeriodicVerblunsky::new(vec![c(0.0, 0.0); 2]).unwrap();
        let d = discriminant_opuc(&free);
        assert_eq!((d.lo(), d.hi()), (-1, 1));
        assert!((d.coeff(1) - 1.0).norm() < 1e-15 && (d.coeff(-1) - 1.0).norm() < 1e-15);
        assert!(d.coeff(0).norm() < 1e-15);
        let k = (4.0f64 / 3.0).sqrt();
        for s in [0.5, -0.5] {
            let d = discriminant_opuc(&PeriodicVerblunsky::new(vec![c(0.0, 0.0), c(s, 0.0)]).unwrap());
            assert!((d.coeff(1) - k).norm() < 1e-12 && (d.coeff(-1) - k).norm() < 1e-12);
            assert!(d.coeff(0).norm() < 1e-12);
        }
        assert!(PeriodicVerblunsky::new(vec![c(0.1, 0.0); 3]).is_err());
        assert_eq!(sieve2(&[c(0.1, 0.0); 3]).unwrap().p(), 6);
    }

    #[test]
    fn theta_transfer_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut g = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let samples: Vec<_> = (0..100).map(|_| (g(), g(), g())).collect();
        assert!(theta_transfer_check(c(0.0, 0.0), c(0.7, 0.2), &samples).unwrap() < 1e-15);
        for _ in 0..10 {
            let a = g() * 0.7;
            assert!(theta_transfer_check(a, c(0.4, -0.9), &samples).unwrap() <= 1e-12);
            let z = C64::from_polar(1.0, g().re * 3.0);
            assert!(theta_transfer_check(a, z, &samples).unwrap() <= 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn discriminant_is_real_on_circle(
            half in 1usize..5,
            raw in proptest::collection::vec((0.0..0.9f64, 0.0..6.3f64), 8),
        ) {
            let alpha: Vec<C64> = raw[..2 * half].iter().map(|&(r, t)| C64::from_polar(r, t)).collect();
            let v = PeriodicVerblunsky::new(alpha.clone()).unwrap();
            let d = discriminant_opuc(&v);
            let scale = d.coeffs().iter().map(|x| x.norm()).fold(1.0, f64::max);
            prop_assert!(d.circle_reality_defect() <= 1e-12 * scale);
            let top: f64 = alpha.iter().map(|&a| rho(a)).product();
            prop_assert!((d.coeff(half as i32) * top - 1.0).norm() <= 1e-12);
            let z = C64::new(0.3, 0.8);
            let lhs = d.eval(z.conj()).unwrap();
            let rhs = d.eval(z.inv()).unwrap().conj();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * scale * 10.0);
        }
    }
}
