//! Complex polynomials, coefficients stored in ascending degree.

use crate::linalg::{eigenvalues, CMat};
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// Default relative trim tolerance.
pub const TRIM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoly {
    /// ascending; empty means the zero polynomial
    pub coeffs: Vec<C64>,
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

impl ComplexPoly {
    pub fn zero() -> Self {
        ComplexPoly { coeffs: vec![] }
    }

    pub fn constant(c: C64) -> Self {
        ComplexPoly { coeffs: vec![c] }.trimmed_exact()
    }

    pub fn one() -> Self {
        Self::constant(one())
    }

    pub fn from_coeffs(coeffs: Vec<C64>) -> Self {
        ComplexPoly { coeffs }.trimmed_exact()
    }

    /// Monic polynomial ∏(λ − r).
    pub fn from_roots(roots: &[C64]) -> Result<Self> {
        if roots.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite root".into()));
        }
        let mut c = vec![one()];
        for &r in roots {
            let mut next = vec![C64::new(0.0, 0.0); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= r * ck;
            }
            c = next;
        }
        Ok(ComplexPoly { coeffs: c })
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn eval(&self, z: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest index whose coefficient exceeds tol × max modulus.
    pub fn effective_degree(&self, tol: f64) -> Option<usize> {
        let m = self.max_coeff();
        if m == 0.0 {
            return None;
        }
        self.coeffs.iter().rposition(|c| c.norm() > tol * m)
    }

    fn trimmed_exact(mut self) -> Self {
        while matches!(self.coeffs.last(), Some(c) if *c == C64::new(0.0, 0.0)) {
            self.coeffs.pop();
        }
        self
    }

    /// Drop leading coefficients below tol relative to the largest.
    pub fn trimmed(&self, tol: f64) -> Self {
        match self.effective_degree(tol) {
            None => Self::zero(),
            Some(d) => ComplexPoly { coeffs: self.coeffs[..=d].to_vec() },
        }
    }

    pub fn monic(&self) -> Result<Self> {
        let l = self.leading();
        if l.norm() == 0.0 {
            return Err(Error::InvalidArgument("zero polynomial has no monic form".into()));
        }
        let mut c: Vec<C64> = self.coeffs.iter().map(|x| x / l).collect();
        *c.last_mut().unwrap() = one();
        Ok(ComplexPoly { coeffs: c })
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexPoly { coeffs: self.coeffs.iter().map(|c| c * s).collect() }.trimmed_exact()
    }

    pub fn derivative(&self) -> Self {
        ComplexPoly {
            coeffs: self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect(),
        }
    }

    /// λ ↦ p(λ + s), via repeated synthetic division.
    pub fn shift(&self, s: C64) -> Self {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let hi = c[j + 1];
                c[j] += s * hi;
            }
        }
        ComplexPoly { coeffs: c }.trimmed_exact()
    }

    /// Unique interpolant of degree ≤ |nodes|−1.
    pub fn lagrange_interpolate(nodes: &[C64], values: &[C64]) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::Shape(format!("{} nodes vs {} values", nodes.len(), values.len())));
        }
        let scale = nodes.iter().map(|x| x.norm()).fold(1.0, f64::max);
        let mut min_d = f64::INFINITY;
        for a in 0..nodes.len() {
            for b in 0..a {
                min_d = min_d.min((nodes[a] - nodes[b]).norm());
            }
        }
        if min_d <= 1e-8 * scale {
            return Err(Error::DegenerateNodes(min_d));
        }
        let mut acc = vec![C64::new(0.0, 0.0); nodes.len()];
        for a in 0..nodes.len() {
            let others: Vec<C64> = nodes.iter().enumerate().filter(|&(b, _)| b != a).map(|(_, &x)| x).collect();
            let den: C64 = others.iter().map(|&x| nodes[a] - x).product();
            let basis = Self::from_roots(&others)?;
            let w = values[a] / den;
            for (k, c) in basis.coeffs.iter().enumerate() {
                acc[k] += w * c;
            }
        }
        Ok(Self::from_coeffs(acc))
    }

    /// All roots with multiplicity, from the companion matrix of the trimmed monic form.
    pub fn roots(&self) -> Result<Vec<C64>> {
        let p = self.trimmed(TRIM_TOL);
        let d = match p.degree() {
            None => return Err(Error::InvalidArgument("roots of the zero polynomial".into())),
            Some(d) => d,
        };
        if d == 0 {
            return Ok(vec![]);
        }
        let p = p.monic()?;
        let mut comp = CMat::zeros(d, d);
        for i in 1..d {
            comp[(i, i - 1)] = one();
        }
        for i in 0..d {
            comp[(i, d - 1)] = -p.coeffs[i];
        }
        let mut r = eigenvalues(&comp)?;
        let dp = p.derivative();
        for z in r.iter_mut() {
            for _ in 0..2 {
                let f = p.eval(*z);
                let g = dp.eval(*z);
                if g.norm() > 0.0 {
                    let step = f / g;
                    if step.norm() < 1e-3 * (1.0 + z.norm()) {
                        *z -= step;
                    }
                }
            }
        }
        Ok(r)
    }
}

impl Add for &ComplexPoly {
    type Output = ComplexPoly;
    fn add(self, o: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let c = (0..n)
            .map(|k| self.coeffs.get(k).copied().unwrap_or_default() + o.coeffs.get(k).copied().unwrap_or_default())
            .collect();
        ComplexPoly::from_coeffs(c)
    }
}

impl Neg for &ComplexPoly {
    type Output = ComplexPoly;
    fn neg(self) -> ComplexPoly {
        ComplexPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;
    fn sub(self, o: &ComplexPoly) -> ComplexPoly {
        self + &(-o)
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;
    fn mul(self, o: &ComplexPoly) -> ComplexPoly {
        if self.is_zero() || o.is_zero() {
            return ComplexPoly::zero();
        }
        let mut c = vec![C64::new(0.0, 0.0); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        ComplexPoly::from_coeffs(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use proptest::prelude::*;

    fn r(x: f64) -> C64 {
        c64(x, 0.0)
    }

    #[test]
    fn from_roots_fixtures() {
        assert_eq!(ComplexPoly::from_roots(&[]).unwrap().coeffs, vec![r(1.0)]);
        assert_eq!(ComplexPoly::from_roots(&[r(-0.5)]).unwrap().coeffs, vec![r(0.5), r(1.0)]);
        assert_eq!(ComplexPoly::from_roots(&[r(1.0), r(-1.0)]).unwrap().coeffs, vec![r(-1.0), r(0.0), r(1.0)]);
        assert!(ComplexPoly::from_roots(&[c64(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn eval_fixtures() {
        let p = ComplexPoly::from_roots(&[r(1.0), r(-1.0)]).unwrap();
        assert_eq!(p.eval(r(2.0)), r(3.0));
        assert_eq!(ComplexPoly::one().eval(c64(3.0, -7.0)), r(1.0));
        assert_eq!(ComplexPoly::from_roots(&[r(-0.5)]).unwrap().eval(r(-0.5)), r(0.0));
    }

    #[test]
    fn interpolation_fixtures() {
        let p = ComplexPoly::lagrange_interpolate(&[r(0.0), r(1.0)], &[r(1.0), r(2.0)]).unwrap();
        assert!((p.coeffs[0] - 1.0).norm() < 1e-14 && (p.coeffs[1] - 1.0).norm() < 1e-14);
        let q = ComplexPoly::lagrange_interpolate(&[r(0.0), r(1.0), r(2.0)], &[r(-1.0), r(0.0), r(3.0)]).unwrap();
        for (a, b) in q.coeffs.iter().zip([r(-1.0), r(0.0), r(1.0)]) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!(matches!(
            ComplexPoly::lagrange_interpolate(&[r(1.0), r(1.0)], &[r(0.0), r(1.0)]),
            Err(Error::DegenerateNodes(_))
        ));
    }

    #[test]
    fn roots_fixtures() {
        let p = ComplexPoly::from_roots(&[r(-0.5)]).unwrap();
        let z = p.roots().unwrap();
        assert!((z[0] + 0.5).norm() < 1e-14);
        let mut z = ComplexPoly::from_roots(&[r(1.0), r(-1.0)]).unwrap().roots().unwrap();
        z.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((z[0] + 1.0).norm() < 1e-12 && (z[1] - 1.0).norm() < 1e-12);
        assert!(ComplexPoly::zero().roots().is_err());
    }

    #[test]
    fn effective_degree_fixtures() {
        let p = ComplexPoly::from_coeffs(vec![r(0.0), r(0.0), r(1.0), r(1e-14)]);
        assert_eq!(p.effective_degree(1e-10), Some(2));
        assert_eq!(ComplexPoly::one().effective_degree(1e-10), Some(0));
        assert_eq!(ComplexPoly::zero().effective_degree(1e-10), None);
    }

    #[test]
    fn shift_matches_eval() {
        let p = ComplexPoly::from_roots(&[c64(0.3, 1.0), c64(-2.0, 0.5), r(4.0)]).unwrap();
        let s = c64(0.7, -0.2);
        let q = p.shift(s);
        for z in [r(0.0), c64(1.0, 2.0), c64(-3.0, 0.1)] {
            assert!((q.eval(z) - p.eval(z + s)).norm() < 1e-12 * (1.0 + p.eval(z + s).norm()));
        }
    }

    fn cplx() -> impl Strategy<Value = C64> {
        (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| c64(a, b))
    }

    fn separated(v: &[C64], d: f64) -> bool {
        (0..v.len()).all(|a| (0..a).all(|b| (v[a] - v[b]).norm() >= d))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn roots_round_trip(rs in prop::collection::vec(cplx(), 1..=12)) {
            prop_assume!(separated(&rs, 0.1));
            let p = ComplexPoly::from_roots(&rs).unwrap();
            let found = p.roots().unwrap();
            let back = ComplexPoly::from_roots(&found).unwrap();
            let scale = p.max_coeff();
            for (a, b) in p.coeffs.iter().zip(back.coeffs.iter()) {
                prop_assert!((a - b).norm() <= 1e-8 * scale);
            }
            for z in &rs {
                let m = found.iter().map(|f| (f - z).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(m < 1e-6);
            }
        }

        #[test]
        fn roots_are_zeros(rs in prop::collection::vec(cplx(), 0..=8)) {
            let p = ComplexPoly::from_roots(&rs).unwrap();
            let s = rs.iter().map(|z| z.norm()).fold(1.0, f64::max).powi(rs.len() as i32);
            for z in &rs {
                prop_assert!(p.eval(*z).norm() <= 1e-10 * s);
            }
        }

        #[test]
        fn interpolation_exact(cs in prop::collection::vec(cplx(), 1..=8), xs in prop::collection::vec(cplx(), 8)) {
            let p = ComplexPoly::from_coeffs(cs.clone());
            prop_assume!(!p.is_zero());
            let n = cs.len();
            let nodes = &xs[..n];
            prop_assume!(separated(nodes, 0.3));
            let vals: Vec<C64> = nodes.iter().map(|&x| p.eval(x)).collect();
            let q = ComplexPoly::lagrange_interpolate(nodes, &vals).unwrap();
            let scale = p.max_coeff();
            for k in 0..n {
                let qk = q.coeffs.get(k).copied().unwrap_or_default();
                prop_assert!((qk - p.coeffs[k]).norm() <= 1e-8 * scale, "k={} {} vs {}", k, qk, p.coeffs[k]);
            }
        }

        #[test]
        fn eval_linear(a in prop::collection::vec(cplx(), 0..6), b in prop::collection::vec(cplx(), 0..6), z in cplx()) {
            let p = ComplexPoly::from_coeffs(a);
            let q = ComplexPoly::from_coeffs(b);
            let lhs = (&p + &q).eval(z);
            let rhs = p.eval(z) + q.eval(z);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + p.eval(z).norm() + q.eval(z).norm()));
        }
    }
}
