use crate::{Error, Result, C64};
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

/// Real polynomial, coefficients stored degree-0 first.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPoly {
    coeffs: Vec<f64>,
}

impl RealPoly {
    /// Builds a polynomial, trimming trailing zero coefficients.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        RealPoly { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        RealPoly::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        RealPoly::new(vec![0.0, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_c(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Bound on `Σ|cₖ||x|ᵏ`, the natural magnitude against which an evaluation is small.
    pub fn magnitude_at(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
    }

    pub fn derivative(&self) -> RealPoly {
        if self.coeffs.len() == 1 {
            return RealPoly::constant(0.0);
        }
        RealPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> RealPoly {
        RealPoly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// `self + c` for a constant `c`.
    pub fn shift(&self, c: f64) -> RealPoly {
        let mut v = self.coeffs.clone();
        v[0] += c;
        RealPoly::new(v)
    }
}

impl Add for &RealPoly {
    type Output = RealPoly;
    fn add(self, rhs: &RealPoly) -> RealPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RealPoly::new(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&0.0) + rhs.coeffs.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }
}

impl Sub for &RealPoly {
    type Output = RealPoly;
    fn sub(self, rhs: &RealPoly) -> RealPoly {
        self + &rhs.scale(-1.0)
    }
}

impl Mul for &RealPoly {
    type Output = RealPoly;
    fn mul(self, rhs: &RealPoly) -> RealPoly {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RealPoly::new(out)
    }
}

/// Laurent polynomial `Σ_{k=lo}^{hi} cₖ zᵏ` with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly {
    lo: i32,
    coeffs: Vec<C64>,
}

impl LaurentPoly {
    /// `coeffs[i]` multiplies `z^(lo+i)`.
    pub fn new(lo: i32, coeffs: Vec<C64>) -> Self {
        assert!(!coeffs.is_empty(), "LaurentPoly needs at least one coefficient");
        LaurentPoly { lo, coeffs }
    }

    pub fn from_map(map: &BTreeMap<i32, C64>) -> Self {
        let lo = *map.keys().next().unwrap_or(&0);
        let hi = *map.keys().next_back().unwrap_or(&0);
        let coeffs = (lo..=hi)
            .map(|k| map.get(&k).copied().unwrap_or_default())
            .collect();
        LaurentPoly { lo, coeffs }
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.coeffs.len() as i32 - 1
    }

    /// Coefficient of `zᵏ` (zero outside the stored range).
    pub fn coeff(&self, k: i32) -> C64 {
        if k < self.lo || k > self.hi() {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[(k - self.lo) as usize]
        }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        if z == C64::new(0.0, 0.0) && self.lo < 0 {
            return Err(Error::domain("Laurent polynomial evaluated at z = 0"));
        }
        let horner = self
            .coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c);
        Ok(horner * z.powi(self.lo))
    }

    /// Largest `|c₋ₖ − conj(cₖ)|`; zero exactly when the polynomial is real on |z| = 1.
    pub fn circle_reality_defect(&self) -> f64 {
        let m = self.lo.abs().max(self.hi().abs());
        (-m..=m)
            .map(|k| (self.coeff(-k) - self.coeff(k).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_real_on_circle(&self, tol: f64) -> bool {
        self.circle_reality_defect() <= tol
    }
}

/// Either polynomial flavour, for generic evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Poly {
    Real(RealPoly),
    Laurent(LaurentPoly),
}

pub fn poly_eval(p: &Poly, z: C64) -> Result<C64> {
    match p {
        Poly::Real(r) => Ok(r.eval_c(z)),
        Poly::Laurent(l) => l.eval(z),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn evaluates_real_and_laurent() {
        let p = RealPoly::new(vec![-2.0, 0.0, 1.0]);
        assert_eq!(poly_eval(&Poly::Real(p.clone()), C64::new(0.0, 0.0)).unwrap().re, -2.0);
        assert_eq!(p.eval(2.0), 2.0);
        let l = LaurentPoly::new(-1, vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let v = l.eval(C64::from_polar(1.0, PI / 3.0)).unwrap();
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(l.is_real_on_circle(0.0));
        assert!(l.eval(C64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn arithmetic_and_trim() {
        let a = RealPoly::new(vec![1.0, 1.0, 0.0]);
        assert_eq!(a.degree(), 1);
        let sq = &a * &a;
        assert_eq!(sq.coeffs(), &[1.0, 2.0, 1.0]);
        assert_eq!(sq.derivative().coeffs(), &[2.0, 2.0]);
        assert!((&sq - &sq).is_zero());
    }
}
