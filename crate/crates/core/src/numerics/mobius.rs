use crate::C64;
use std::ops::Mul;

/// A 2×2 complex matrix, used both as a transfer matrix and as the fractional
/// linear map `m ↦ (t₁₁m + t₁₂)/(t₂₁m + t₂₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius2 {
    pub t: [[C64; 2]; 2],
}

impl Mobius2 {
    pub fn new(t11: C64, t12: C64, t21: C64, t22: C64) -> Self {
        Mobius2 { t: [[t11, t12], [t21, t22]] }
    }

    pub fn real(t11: f64, t12: f64, t21: f64, t22: f64) -> Self {
        Mobius2::new(t11.into(), t12.into(), t21.into(), t22.into())
    }

    pub fn identity() -> Self {
        Mobius2::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn det(&self) -> C64 {
        self.t[0][0] * self.t[1][1] - self.t[0][1] * self.t[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.t[0][0] + self.t[1][1]
    }

    pub fn scale(&self, s: C64) -> Self {
        let t = self.t;
        Mobius2::new(t[0][0] * s, t[0][1] * s, t[1][0] * s, t[1][1] * s)
    }

    /// Fractional linear action on `m`.
    pub fn apply(&self, m: C64) -> C64 {
        (self.t[0][0] * m + self.t[0][1]) / (self.t[1][0] * m + self.t[1][1])
    }

    /// Matrix action on a column vector.
    pub fn act(&self, v: [C64; 2]) -> [C64; 2] {
        [
            self.t[0][0] * v[0] + self.t[0][1] * v[1],
            self.t[1][0] * v[0] + self.t[1][1] * v[1],
        ]
    }

    pub fn max_abs_diff(&self, other: &Mobius2) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.t[i][j] - other.t[i][j]).norm());
            }
        }
        d
    }
}

impl Mul for Mobius2 {
    type Output = Mobius2;
    fn mul(self, r: Mobius2) -> Mobius2 {
        let a = self.t;
        let b = r.t;
        Mobius2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(v: (f64, f64)) -> C64 {
        C64::new(v.0, v.1)
    }

    fn arb_mobius() -> impl Strategy<Value = Mobius2> {
        let e = (-2.0..2.0f64, -2.0..2.0f64);
        (e.clone(), e.clone(), e.clone(), e).prop_filter_map("singular", |(a, b, cc, d)| {
            let m = Mobius2::new(c(a), c(b), c(cc), c(d));
            (m.det().norm() > 0.1).then_some(m)
        })
    }

    proptest! {
        #[test]
        fn composition_matches_fraction(f in arb_mobius(), g in arb_mobius(), h in arb_mobius(),
                                        w in (-1.0..1.0f64, -1.0..1.0f64)) {
            let w = c(w);
            let gw = g.apply(w);
            let den_g = (g.t[1][0] * w + g.t[1][1]).norm();
            let den_f = (f.t[1][0] * gw + f.t[1][1]).norm();
            prop_assume!(den_g > 0.1 && den_f > 0.1 && gw.norm() < 10.0);
            let direct = f.apply(gw);
            let comp = (f * g).apply(w);
            prop_assert!((direct - comp).norm() <= 1e-12 * (1.0 + direct.norm()));
            let left = ((f * g) * h).max_abs_diff(&(f * (g * h)));
            prop_assert!(left < 1e-12 * 64.0);
        }
    }
}
