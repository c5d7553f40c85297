//! Real roots by derivative bracketing.
//!
//! Between consecutive real critical points a polynomial is strictly monotone, so
//! each such interval holds at most one simple root, located by bisection. A
//! critical point where the polynomial is negligible is a multiple root; the
//! test is whether the two roots a tiny perturbation would split it into lie
//! within `10·tol` of it.

use super::poly::RealPoly;
use crate::{Error, Result};

pub fn real_roots(p: &RealPoly, lo: f64, hi: f64, tol: f64) -> Result<Vec<(f64, usize)>> {
    if p.is_zero() {
        return Err(Error::input("real_roots of the zero polynomial"));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::input(format!("invalid root interval [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::input("root tolerance must be positive"));
    }
    roots_rec(p, lo, hi, tol)
}

fn roots_rec(p: &RealPoly, lo: f64, hi: f64, tol: f64) -> Result<Vec<(f64, usize)>> {
    match p.degree() {
        0 => return Ok(vec![]),
        1 => {
            let r = -p.coeffs()[0] / p.coeffs()[1];
            return Ok(if (lo..=hi).contains(&r) { vec![(r, 1)] } else { vec![] });
        }
        _ => {}
    }
    let dp = p.derivative();
    let crit = roots_rec(&dp, lo, hi, tol)?;
    let eps = f64::EPSILON * 4.0 * (p.degree() as f64 + 1.0);

    // multiple roots sit on critical points
    let mut at_crit = Vec::with_capacity(crit.len());
    for &(c, mult_dp) in &crit {
        let order = mult_dp + 1;
        let mut dk = p.clone();
        let mut fact = 1.0;
        for k in 1..=order {
            dk = dk.derivative();
            fact *= k as f64;
        }
        let spread = dk.eval(c).abs() / fact * (10.0 * tol).powi(order as i32);
        let rounding = eps * p.magnitude_at(c);
        at_crit.push(p.eval(c).abs() <= spread + rounding);
    }

    let mut out = Vec::new();
    let mut pts = vec![(lo, false)];
    pts.extend(crit.iter().zip(&at_crit).map(|(&(c, _), &r)| (c, r)));
    pts.push((hi, false));
    let is_root_at = |x: f64| p.eval(x).abs() <= eps * p.magnitude_at(x);
    if is_root_at(lo) && crit.first().is_none_or(|&(c, _)| c > lo) {
        out.push((lo, 1));
        pts[0].1 = true;
    }
    for w in pts.windows(2) {
        let ((u, ru), (v, rv)) = (w[0], w[1]);
        if ru || rv || v <= u {
            continue;
        }
        let (fu, fv) = (p.eval(u), p.eval(v));
        if fu == 0.0 || fv == 0.0 || (fu > 0.0) == (fv > 0.0) {
            if fv == 0.0 && v == hi {
                out.push((hi, 1));
            }
            continue;
        }
        out.push((bisect(p, u, v, fu, tol)?, 1));
    }
    for (&(c, m), &r) in crit.iter().zip(&at_crit) {
        if r {
            out.push((c, m + 1));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

fn bisect(p: &RealPoly, mut u: f64, mut v: f64, fu: f64, tol: f64) -> Result<f64> {
    let up = fu > 0.0;
    for _ in 0..400 {
        let mid = 0.5 * (u + v);
        if mid <= u || mid >= v || v - u <= tol * 1e-3 {
            return Ok(mid);
        }
        let fm = p.eval(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == up {
            u = mid;
        } else {
            v = mid;
        }
    }
    Err(Error::numeric(format!("bisection did not converge; bracket [{u}, {v}]")))
}
