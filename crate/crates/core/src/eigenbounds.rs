//! Comparison bounds for block Jacobi matrices: scalar operators `J±` with
//! `J₋ ⊗ 1 ≤ 𝒥 ≤ J₊ ⊗ 1`, the resulting eigenvalue ordering outside `[−2, 2]`,
//! and the bound `Σ (E² − 4)^{1/2} ≤ 2ℓ Σ‖Bₙ‖ + 4ℓ Σ‖Aₙ − 1‖`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::block_jacobi::{bound_states, BlockJacobi, Tail};
use crate::magic::{JacobiSeq, Sides};
use crate::numerics::{herm_eigen, herm_eigenvalues, CMat, HermitianMatrix};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

fn dev(a: &CMat) -> f64 {
    (a - &CMat::identity(a.rows())).op_norm()
}

/// `bₙ = ±(‖Bₙ‖ + ‖A_{n−1} − 1‖ + ‖Aₙ − 1‖)` with `aₙ ≡ 1`, one entry past the
/// listed blocks (it still sees `A_len`); beyond that the operator is free.
pub fn comparison_jacobi(j: &BlockJacobi, sign: Sign) -> JacobiSeq {
    let n = j.len() + 1;
    let blocks = j.blocks();
    let b: Vec<f64> = (0..n)
        .map(|k| {
            let bn = blocks.get(k).map_or(0.0, |(_, b)| b.op_norm());
            let prev = if k >= 1 { dev(&blocks[k - 1].0) } else { 0.0 };
            let cur = blocks.get(k).map_or(0.0, |(a, _)| dev(a));
            sign.factor() * (bn + prev + cur)
        })
        .collect();
    JacobiSeq::new(1, vec![1.0; n], b, Sides::One).expect("unit off-diagonals and finite diagonals")
}

/// `J± ⊗ 1_ℓ` as a block Jacobi matrix with a free tail.
fn lifted(j: &BlockJacobi, sign: Sign) -> BlockJacobi {
    let s = comparison_jacobi(j, sign);
    let l = j.l();
    let blocks = s.b().iter().map(|&b| (CMat::identity(l), CMat::scalar(l, C64::new(b, 0.0)))).collect();
    BlockJacobi::new(l, blocks, Tail::Free).expect("identity off-diagonal blocks")
}

fn truncated(j: &BlockJacobi, n: usize) -> Result<CMat> {
    Ok(j.truncation(n)?.into_matrix())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sandwich {
    /// Smallest eigenvalue of the truncation of `J₊ ⊗ 1 − 𝒥`.
    pub upper_margin: f64,
    /// Smallest eigenvalue of the truncation of `𝒥 − J₋ ⊗ 1`.
    pub lower_margin: f64,
}

/// Margins of `J₋ ⊗ 1 ≤ 𝒥 ≤ J₊ ⊗ 1` on the first `n` blocks; a margin below
/// `−1e−10` is reported with its witness vector.
pub fn sandwich_check(j: &BlockJacobi, n: usize) -> Result<Sandwich> {
    if n == 0 {
        return Err(Error::input("truncation size must be positive"));
    }
    let jm = truncated(j, n)?;
    let mut margins = [0.0; 2];
    for (slot, sign) in [Sign::Plus, Sign::Minus].into_iter().enumerate() {
        let cmp = truncated(&lifted(j, sign), n)?;
        let diff = if sign == Sign::Plus { &cmp - &jm } else { &jm - &cmp };
        let eig = herm_eigen(&HermitianMatrix::new(diff.hermitian_part())?)?;
        margins[slot] = eig.values[0];
        if eig.values[0] < -1e-10 {
            let w: Vec<String> = (0..diff.rows()).map(|i| format!("{:.6}", eig.vectors[(i, 0)])).collect();
            return Err(Error::structural(format!(
                "{sign:?} comparison violated by {} with witness [{}]",
                eig.values[0],
                w.join(", ")
            )));
        }
    }
    Ok(Sandwich { upper_margin: margins[0], lower_margin: margins[1] })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenComparison {
    pub sign: Sign,
    /// 1-based rank counted outward from `±2`.
    pub j: usize,
    pub e: f64,
    /// The matching eigenvalue of `J± ⊗ 1`, absent if it has fewer.
    pub e_comparison: Option<f64>,
    pub holds: bool,
}

/// Eigenvalues outside `[−2, 2]` of a Hermitian matrix: those above 2 in
/// decreasing order and those below −2 in increasing order.
fn outside(m: &CMat) -> Result<(Vec<f64>, Vec<f64>)> {
    let ev = herm_eigenvalues(&HermitianMatrix::new(m.hermitian_part())?)?;
    let plus = ev.iter().rev().copied().take_while(|&e| e > 2.0).collect();
    let minus = ev.iter().copied().take_while(|&e| e < -2.0).collect();
    Ok((plus, minus))
}

/// `|E_j^±(𝒥)| ≤ |E_j^±(J± ⊗ 1)|` for every `j`, on `n`-block truncations.
pub fn eigen_order_check(j: &BlockJacobi, n: usize) -> Result<Vec<EigenComparison>> {
    if n == 0 {
        return Err(Error::input("truncation size must be positive"));
    }
    let (jp, jn) = outside(&truncated(j, n)?)?;
    let (cp, _) = outside(&truncated(&lifted(j, Sign::Plus), n)?)?;
    let (_, cn) = outside(&truncated(&lifted(j, Sign::Minus), n)?)?;
    let mut out = Vec::new();
    for (sign, es, cs) in [(Sign::Plus, jp, cp), (Sign::Minus, jn, cn)] {
        for (k, &e) in es.iter().enumerate() {
            let c = cs.get(k).copied();
            let holds = c.is_some_and(|c| e.abs() <= c.abs() + 1e-9);
            out.push(EigenComparison { sign, j: k + 1, e, e_comparison: c, holds });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HtBound {
    pub lhs: f64,
    pub rhs: f64,
    /// Truncation sizes (in blocks) and the lhs at each.
    pub history: Vec<(usize, f64)>,
    /// False when doubling did not settle and the lhs came from [`bound_states`].
    pub truncation_converged: bool,
}

const HT_MAX_DIM: usize = 1024;

/// `Σ (E² − 4)^{1/2}` over eigenvalues outside `[−2, 2]`, doubling the
/// truncation until it moves by less than `1e−6`, against `2ℓΣ‖Bₙ‖ + 4ℓΣ‖Aₙ − 1‖`.
///
/// A bound state just outside `[−2, 2]` decays slowly and can keep the
/// truncations moving past the size cap; the sum is then taken from the exact
/// free-tail characterisation, which the truncations approach from below.
pub fn ht_bound(j: &BlockJacobi) -> Result<HtBound> {
    if j.tail() != Tail::Free {
        return Err(Error::input("the bound needs a free tail"));
    }
    let l = j.l() as f64;
    let rhs = 2.0 * l * j.blocks().iter().map(|(_, b)| b.op_norm()).sum::<f64>()
        + 4.0 * l * j.blocks().iter().map(|(a, _)| dev(a)).sum::<f64>();
    let lhs_at = |n: usize| -> Result<f64> {
        let (p, m) = outside(&truncated(j, n)?)?;
        Ok(p.iter().chain(&m).map(|e| (e * e - 4.0).sqrt()).sum())
    };
    let mut n = 2 * (j.len() + 1);
    let mut history = vec![(n, lhs_at(n)?)];
    while 2 * n * j.l() <= HT_MAX_DIM {
        n *= 2;
        let v = lhs_at(n)?;
        let prev = history.last().expect("nonempty").1;
        history.push((n, v));
        if (v - prev).abs() <= 1e-6 {
            return Ok(HtBound { lhs: v, rhs, history, truncation_converged: true });
        }
    }
    let exact: f64 = bound_states(j)?.iter().map(|z| (1.0 / z - z).abs()).sum();
    let last = history.last().expect("nonempty").1;
    if last > exact + 1e-9 {
        return Err(Error::numeric(format!("truncation sum {last} exceeds the exact bound-state sum {exact}")));
    }
    Ok(HtBound { lhs: exact, rhs, history, truncation_converged: false })
}

/// A Nevai-class fixture: `ℓ ≤ 3`, at most ten nontrivial blocks whose
/// deviation from the free blocks decays like `1/n`.
pub fn random_nevai(rng: &mut ChaCha8Rng) -> BlockJacobi {
    let l = rng.gen_range(1..=3);
    let len = rng.gen_range(1..=10);
    let blocks = (0..len)
        .map(|k| {
            let amp = 0.8 / (1.0 + k as f64);
            let a = CMat::from_fn(l, l, |i, jj| {
                let d = if i == jj { 1.0 } else { 0.0 };
                C64::new(d + amp * rng.gen_range(-0.5..0.5), amp * rng.gen_range(-0.3..0.3))
            });
            let g = CMat::from_fn(l, l, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            (a, g.hermitian_part().scale_re(2.0 * amp))
        })
        .collect();
    BlockJacobi::new(l, blocks, Tail::Free).expect("diagonally dominant A blocks are invertible")
}

/// Everything above in one report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub comparisons: Vec<EigenComparison>,
    pub sandwich: Sandwich,
    pub bound: HtBound,
}

pub fn bound_report(j: &BlockJacobi, n: usize) -> Result<BoundReport> {
    Ok(BoundReport { comparisons: eigen_order_check(j, n)?, sandwich: sandwich_check(j, n)?, bound: ht_bound(j)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn comparison_examples() {
        let free = comparison_jacobi(&BlockJacobi::free(2, 3), Sign::Plus);
        assert!(free.b().iter().all(|&b| b == 0.0) && free.a().iter().all(|&a| a == 1.0));
        let j = BlockJacobi::new(2, vec![(CMat::identity(2), CMat::diag_real(&[1.0, -1.0]))], Tail::Free).unwrap();
        let (p, m) = (comparison_jacobi(&j, Sign::Plus), comparison_jacobi(&j, Sign::Minus));
        assert_abs_diff_eq!(p.b()[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.b()[0], -1.0, epsilon = 1e-14);
        assert_eq!(p.b()[1], 0.0);
        let j = BlockJacobi::new(2, vec![(CMat::diag_real(&[2.0, 1.0]), CMat::zeros(2, 2))], Tail::Free).unwrap();
        let p = comparison_jacobi(&j, Sign::Plus);
        assert_abs_diff_eq!(p.b()[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.b()[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn off_diagonal_dilation_sits_between_norm_multiples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let c = CMat::from_fn(2, 2, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let mut dil = CMat::zeros(4, 4);
            dil.set_submatrix(0, 2, &c);
            dil.set_submatrix(2, 0, &c.adjoint());
            let n = c.op_norm();
            let ev = herm_eigenvalues(&HermitianMatrix::new(dil).unwrap()).unwrap();
            assert_abs_diff_eq!(ev[3], n, epsilon = 1e-12);
            assert_abs_diff_eq!(ev[0], -n, epsilon = 1e-12);
        }
    }

    #[test]
    fn free_is_vacuous() {
        let f = BlockJacobi::free(2, 2);
        let s = sandwich_check(&f, 10).unwrap();
        assert!(s.upper_margin.abs() < 1e-12 && s.lower_margin.abs() < 1e-12);
        assert!(eigen_order_check(&f, 10).unwrap().is_empty());
        let b = ht_bound(&f).unwrap();
        assert_eq!((b.lhs, b.rhs), (0.0, 0.0));
    }

    #[test]
    fn scalar_equality_case() {
        let j = BlockJacobi::scalar(&[1.0], &[1.5], Tail::Free).unwrap();
        let c = eigen_order_check(&j, 60).unwrap();
        assert_eq!(c.len(), 1);
        assert_abs_diff_eq!(c[0].e, c[0].e_comparison.unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(c[0].e, 13.0 / 6.0, epsilon = 1e-12);
        let b = ht_bound(&BlockJacobi::scalar(&[1.0], &[2.0], Tail::Free).unwrap()).unwrap();
        assert_abs_diff_eq!(b.lhs, 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(b.rhs, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn block_example() {
        let j = BlockJacobi::new(2, vec![(CMat::identity(2), CMat::diag_real(&[1.5, 0.0]))], Tail::Free).unwrap();
        let c = eigen_order_check(&j, 60).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c[0].holds);
        let (cp, _) = outside(&truncated(&lifted(&j, Sign::Plus), 60).unwrap()).unwrap();
        assert_eq!(cp.len(), 2);
        assert!(cp.iter().all(|e| (e - 13.0 / 6.0).abs() < 1e-12));
        let b = ht_bound(&j).unwrap();
        assert!(b.lhs <= b.rhs);
    }

    #[test]
    fn random_nevai_fixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let j = random_nevai(&mut rng);
            let s = sandwich_check(&j, 80).unwrap();
            assert!(s.upper_margin >= -1e-10 && s.lower_margin >= -1e-10);
            assert!(eigen_order_check(&j, 80).unwrap().iter().all(|c| c.holds));
            let b = ht_bound(&j).unwrap();
            assert!(b.lhs <= b.rhs + 1e-9, "{b:?}");
            assert!(b.history.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9));
        }
    }
}
