use super::eigen::herm_eigenvalues;
use crate::{Error, Result, C64};
use std::ops::{Add, Index, IndexMut, Mul, Sub};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMat { rows, cols, data }
    }

    /// Real matrix from row vectors; panics on ragged input.
    pub fn from_real(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        CMat::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        CMat::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let mut m = CMat::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    pub fn scalar(n: usize, s: C64) -> Self {
        CMat::identity(n).scale(s)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec()).collect()
    }

    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> CMat {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value, from the top eigenvalue of the Hermitian dilation `[[0,A],[A†,0]]`.
    pub fn op_norm(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        let (r, c) = (self.rows, self.cols);
        let dil = CMat::from_fn(r + c, r + c, |i, j| {
            if i < r && j >= r {
                self[(i, j - r)]
            } else if i >= r && j < r {
                self[(j, i - r)].conj()
            } else {
                ZERO
            }
        });
        let ev = herm_eigenvalues(&HermitianMatrix::trusted(dil))
            .expect("dilation is Hermitian by construction");
        ev.last().copied().unwrap_or(0.0).max(0.0)
    }

    pub fn submatrix(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> CMat {
        CMat::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_submatrix(&mut self, r0: usize, c0: usize, m: &CMat) {
        for i in 0..m.rows {
            for j in 0..m.cols {
                self[(r0 + i, c0 + j)] = m[(i, j)];
            }
        }
    }

    /// Largest `|Aᵢⱼ − conj(Aⱼᵢ)|`.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut d: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..=i {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> CMat {
        (self + &self.adjoint()).scale_re(0.5)
    }

    /// `(A − A†)/(2i)`.
    pub fn imag_part(&self) -> CMat {
        (self - &self.adjoint()).scale(C64::new(0.0, -0.5))
    }

    /// Lower triangular with strictly positive real diagonal (up to `tol`).
    pub fn is_lower_pos_diag(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(1.0);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if self[(i, j)].norm() > tol * scale {
                    return false;
                }
            }
            let d = self[(i, i)];
            if d.im.abs() > tol * scale || d.re <= tol * scale {
                return false;
            }
        }
        true
    }

    /// LU with partial pivoting; returns (LU packed, permutation sign) or None when singular.
    fn lu(&self) -> Option<(CMat, Vec<usize>, f64)> {
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == 0.0 || !pmax.is_finite() {
                return None;
            }
            if piv != k {
                for j in 0..n {
                    a.data.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let d = a[(k, k)];
            for i in (k + 1)..n {
                let f = a[(i, k)] / d;
                a[(i, k)] = f;
                for j in (k + 1)..n {
                    let t = a[(k, j)];
                    a[(i, j)] -= f * t;
                }
            }
        }
        Some((a, perm, sign))
    }

    pub fn det(&self) -> C64 {
        assert!(self.is_square());
        match self.lu() {
            None => ZERO,
            Some((lu, _, sign)) => (0..self.rows).map(|i| lu[(i, i)]).product::<C64>() * sign,
        }
    }

    /// Inverse via LU; fails when the smallest pivot is below `1e−14·‖A‖`.
    pub fn inverse(&self) -> Result<CMat> {
        if !self.is_square() {
            return Err(Error::input("inverse of a non-square matrix"));
        }
        let n = self.rows;
        let scale = self.max_abs();
        let (lu, perm, _) = self
            .lu()
            .ok_or_else(|| Error::numeric("singular matrix in inverse"))?;
        let min_piv = (0..n).map(|i| lu[(i, i)].norm()).fold(f64::INFINITY, f64::min);
        if min_piv <= 1e-14 * scale {
            return Err(Error::numeric(format!(
                "numerically singular matrix (pivot {min_piv:.3e}, scale {scale:.3e})"
            )));
        }
        let mut inv = CMat::zeros(n, n);
        for col in 0..n {
            let mut x: Vec<C64> = (0..n).map(|i| if perm[i] == col { ONE } else { ZERO }).collect();
            for i in 0..n {
                for k in 0..i {
                    let t = lu[(i, k)] * x[k];
                    x[i] -= t;
                }
            }
            for i in (0..n).rev() {
                for k in (i + 1)..n {
                    let t = lu[(i, k)] * x[k];
                    x[i] -= t;
                }
                x[i] /= lu[(i, i)];
            }
            for i in 0..n {
                inv[(i, col)] = x[i];
            }
        }
        Ok(inv)
    }

    pub fn mat_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &CMat) -> CMat {
        let mut m = CMat::zeros(self.rows + other.rows, self.cols + other.cols);
        m.set_submatrix(0, 0, self);
        m.set_submatrix(self.rows, self.cols, other);
        m
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// A square matrix known to be Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMat,
}

impl HermitianMatrix {
    /// Validates conjugate symmetry to `1e−12·max(1, ‖M‖_max)` and symmetrises.
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::input("Hermitian matrix must be square"));
        }
        let defect = m.hermitian_defect();
        if defect > 1e-12 * m.max_abs().max(1.0) {
            return Err(Error::input(format!("matrix is not Hermitian (defect {defect:.3e})")));
        }
        Ok(HermitianMatrix { m: m.hermitian_part() })
    }

    /// Skips validation; for matrices Hermitian by construction.
    pub(crate) fn trusted(m: CMat) -> Self {
        HermitianMatrix { m }
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }
}
