use super::matrix::{CMat, HermitianMatrix};
use crate::{Error, Result, C64};

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

/// Result of a symmetric tridiagonal eigensolve.
///
/// `leading_rows[r][k]` is component `r` of the eigenvector for `values[k]`, for
/// the number of leading rows that was requested.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    pub leading_rows: Vec<Vec<f64>>,
}

/// Dimension up to which cyclic Jacobi is used; larger problems go through
/// Householder tridiagonalisation and implicit QL.
const JACOBI_MAX_DIM: usize = 32;

pub fn herm_eigen(h: &HermitianMatrix) -> Result<Eigen> {
    if h.dim() <= JACOBI_MAX_DIM {
        jacobi(h.matrix(), true)
    } else {
        householder_ql(h.matrix(), true)
    }
}

pub fn herm_eigenvalues(h: &HermitianMatrix) -> Result<Vec<f64>> {
    let e = if h.dim() <= JACOBI_MAX_DIM {
        jacobi(h.matrix(), false)?
    } else {
        householder_ql(h.matrix(), false)?
    };
    Ok(e.values)
}

fn jacobi(m: &CMat, want_vectors: bool) -> Result<Eigen> {
    let n = m.rows();
    let mut a = m.clone();
    let mut v = CMat::identity(if want_vectors { n } else { 0 });
    let norm = a.frobenius();
    let mut converged = n <= 1;
    for _sweep in 0..80 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-17 * norm || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let beta = apq.norm();
                if beta == 0.0 {
                    continue;
                }
                let u = apq / beta;
                let ub = u.conj();
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * beta);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * ub * s;
                    a[(k, q)] = akp * s + akq * ub * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * u * s;
                    a[(q, k)] = apk * s + aqk * u * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                if want_vectors {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * c - vkq * ub * s;
                        v[(k, q)] = vkp * s + vkq * ub * c;
                    }
                }
            }
        }
    }
    if !converged {
        return Err(Error::numeric("Jacobi eigensolver did not converge in 80 sweeps"));
    }
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    Ok(sorted(diag, if want_vectors { Some(v) } else { None }))
}

fn sorted(values: Vec<f64>, vectors: Option<CMat>) -> Eigen {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let vals = idx.iter().map(|&i| values[i]).collect();
    let vecs = match vectors {
        Some(v) => CMat::from_fn(v.rows(), v.cols(), |r, c| v[(r, idx[c])]),
        None => CMat::zeros(0, 0),
    };
    Eigen { values: vals, vectors: vecs }
}

/// Householder reduction of a Hermitian matrix to real symmetric tridiagonal form,
/// followed by implicit QL.
fn householder_ql(m: &CMat, want_vectors: bool) -> Result<Eigen> {
    let n = m.rows();
    let mut a = m.clone();
    let mut q = if want_vectors { CMat::identity(n) } else { CMat::zeros(0, 0) };
    let mut v = vec![C64::new(0.0, 0.0); n];
    let mut p = vec![C64::new(0.0, 0.0); n];
    for k in 0..n.saturating_sub(2) {
        let m_len = n - k - 1;
        let xnorm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        for (t, i) in (k + 1..n).enumerate() {
            v[t] = a[(i, k)];
        }
        v[0] -= alpha;
        let vnorm = v[..m_len].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v[..m_len].iter_mut() {
            *z /= vnorm;
        }
        // trailing block S ← S − v w† − w v†, with w = 2Sv − 2(v†Sv)v
        for (t, pt) in p[..m_len].iter_mut().enumerate() {
            *pt = (0..m_len).map(|s| a[(k + 1 + t, k + 1 + s)] * v[s]).sum();
        }
        let c: C64 = (0..m_len).map(|t| v[t].conj() * p[t]).sum();
        let w: Vec<C64> = (0..m_len).map(|t| p[t] * 2.0 - v[t] * c.re * 2.0).collect();
        for t in 0..m_len {
            for s in 0..m_len {
                let upd = v[t] * w[s].conj() + w[t] * v[s].conj();
                a[(k + 1 + t, k + 1 + s)] -= upd;
            }
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in (k + 2)..n {
            a[(i, k)] = C64::new(0.0, 0.0);
            a[(k, i)] = C64::new(0.0, 0.0);
        }
        if want_vectors {
            for r in 0..n {
                let s: C64 = (0..m_len).map(|t| q[(r, k + 1 + t)] * v[t]).sum();
                for t in 0..m_len {
                    let upd = s * v[t].conj() * 2.0;
                    q[(r, k + 1 + t)] -= upd;
                }
            }
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut phases = vec![C64::new(1.0, 0.0); n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for i in 0..n.saturating_sub(1) {
        let e = a[(i + 1, i)];
        off[i] = e.norm();
        phases[i + 1] = if off[i] > 0.0 { phases[i] * e / off[i] } else { phases[i] };
    }
    let rows = if want_vectors { n } else { 0 };
    let te = tridiag_eigen(&diag, &off, rows)?;
    if !want_vectors {
        return Ok(Eigen { values: te.values, vectors: CMat::zeros(0, 0) });
    }
    // eigenvectors = Q · diag(phases) · Z
    let vecs = CMat::from_fn(n, n, |r, col| {
        (0..n).map(|j| q[(r, j)] * phases[j] * te.leading_rows[j][col]).sum()
    });
    Ok(Eigen { values: te.values, vectors: vecs })
}

/// Symmetric tridiagonal eigensolver (implicit QL with Wilkinson-type shifts).
///
/// `diag` has length n, `off[i]` couples i and i+1. Only the first `rows`
/// components of each eigenvector are accumulated, so asking for one row (the
/// spectral weights of the first basis vector) costs O(n²).
pub fn tridiag_eigen(diag: &[f64], off: &[f64], rows: usize) -> Result<TridiagEigen> {
    let n = diag.len();
    if n == 0 {
        return Ok(TridiagEigen { values: vec![], leading_rows: vec![] });
    }
    if off.len() + 1 != n {
        return Err(Error::input("tridiagonal off-diagonal must have length n−1"));
    }
    let rows = rows.min(n);
    let mut d = diag.to_vec();
    let mut e: Vec<f64> = off.to_vec();
    e.push(0.0);
    let mut z: Vec<Vec<f64>> = (0..rows)
        .map(|r| (0..n).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
        .collect();
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 200 {
                    return Err(Error::numeric("tridiagonal QL failed to converge"));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for zr in z.iter_mut() {
                        let hh = zr[i + 1];
                        zr[i + 1] = s * zr[i] + c * hh;
                        zr[i] = c * zr[i] - s * hh;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    Ok(TridiagEigen {
        values: idx.iter().map(|&i| d[i]).collect(),
        leading_rows: z.iter().map(|zr| idx.iter().map(|&i| zr[i]).collect()).collect(),
    })
}
