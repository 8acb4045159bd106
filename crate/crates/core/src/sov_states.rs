//! SoV basis, separate states, and the D-product (ABA-like) representation.

use crate::chain_model::vandermonde;
use crate::dense_oracle::{monodromy, ref_up, row_apply, StateVector};
use crate::linalg::{pair, CMat, KahanVec};
use crate::{ChainParams, ComplexPoly, Error, Result, C64};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// h as a bit list: h[a] = bit a of `idx`.
pub fn h_bits(idx: usize, n: usize) -> Vec<u8> {
    (0..n).map(|a| ((idx >> a) & 1) as u8).collect()
}

/// d_h(λ) = ∏ (λ − ξ_n + h_n η).
pub fn d_h(params: &ChainParams, h: &[u8], l: C64) -> C64 {
    params.xi.iter().zip(h).map(|(x, &b)| l - x + params.eta * b as f64).product()
}

/// All 2^N left and right SoV basis vectors, indexed by h as an integer.
pub struct SovBasis {
    pub n: usize,
    pub right: Vec<StateVector>,
    pub left: Vec<StateVector>,
}

impl SovBasis {
    pub fn new(params: &ChainParams) -> Self {
        let n = params.n_sites();
        let dim = params.dim();
        let v0 = vandermonde(&params.xi);
        // −B(ξ_a)/a(ξ_a) on kets, C(ξ_a)/d(ξ_a−η) on bras
        let mut raise: Vec<CMat> = Vec::with_capacity(n);
        let mut lower: Vec<CMat> = Vec::with_capacity(n);
        for a in 0..n {
            let m = monodromy(params, params.xi[a]);
            raise.push(m.b * (-C64::new(1.0, 0.0) / params.a(params.xi[a])));
            lower.push(m.c / params.d(params.xi[a] - params.eta));
        }
        let mut right: Vec<StateVector> = Vec::with_capacity(dim);
        let mut left: Vec<StateVector> = Vec::with_capacity(dim);
        let base = ref_up(n) / v0;
        for idx in 0..dim {
            if idx == 0 {
                right.push(base.clone());
                left.push(base.clone());
                continue;
            }
            let top = usize::BITS as usize - 1 - idx.leading_zeros() as usize;
            let prev = idx & !(1 << top);
            right.push(&raise[top] * &right[prev]);
            left.push(row_apply(&left[prev], &lower[top]));
        }
        SovBasis { n, right, left }
    }

    pub fn state(&self, h: &[u8], side: Side) -> &StateVector {
        let idx = h.iter().enumerate().map(|(a, &b)| (b as usize) << a).sum::<usize>();
        match side {
            Side::Right => &self.right[idx],
            Side::Left => &self.left[idx],
        }
    }
}

/// One SoV basis vector ⟨h| or |h⟩, including the 1/V(ξ) prefactor.
pub fn sov_basis_state(params: &ChainParams, h: &[u8], side: Side) -> Result<StateVector> {
    if h.len() != params.n_sites() || h.iter().any(|&b| b > 1) {
        return Err(Error::InvalidArgument("h must be a bit list of length N".into()));
    }
    let mut v = ref_up(params.n_sites()) / vandermonde(&params.xi);
    for a in 0..params.n_sites() {
        if h[a] == 1 {
            let m = monodromy(params, params.xi[a]);
            v = match side {
                Side::Right => (&m.b * &v) * (-C64::new(1.0, 0.0) / params.a(params.xi[a])),
                Side::Left => row_apply(&v, &m.c) / params.d(params.xi[a] - params.eta),
            };
        }
    }
    Ok(v)
}

/// Max residuals of ⟨k|h⟩ = δ/(V(ξ)V(ξ−hη)) and of Σ_h V V |h⟩⟨h| = 1.
pub fn sov_gram_check(params: &ChainParams, basis: &SovBasis) -> (f64, f64) {
    let n = params.n_sites();
    let dim = params.dim();
    let v0 = vandermonde(&params.xi);
    let mut gram = 0.0f64;
    let mut resolution = CMat::zeros(dim, dim);
    for h in 0..dim {
        let hb = h_bits(h, n);
        let w = v0 * vandermonde(&params.shifted_xi(&hb));
        for k in 0..dim {
            let got = pair(&basis.left[k], &basis.right[h]);
            let want = if k == h { C64::new(1.0, 0.0) / w } else { C64::new(0.0, 0.0) };
            gram = gram.max((got - want).norm() * w.norm());
        }
        resolution += &basis.right[h] * basis.left[h].transpose() * w;
    }
    let id = CMat::identity(dim, dim);
    (gram, crate::linalg::op_norm(&(resolution - id)))
}

/// The 2N values defining a separate state up to normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparateStateSpec {
    pub side: Side,
    /// α(ξ_a)
    pub xi_values: Vec<C64>,
    /// α(ξ_a − η)
    pub shifted_values: Vec<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<C64>>,
}

impl SeparateStateSpec {
    pub fn from_roots(params: &ChainParams, roots: &[C64], side: Side) -> Result<Self> {
        let p = ComplexPoly::from_roots(roots)?;
        Ok(SeparateStateSpec {
            side,
            xi_values: params.xi.iter().map(|&x| p.eval(x)).collect(),
            shifted_values: params.xi.iter().map(|&x| p.eval(x - params.eta)).collect(),
            roots: Some(roots.to_vec()),
        })
    }

    /// The constant function 1.
    pub fn one(params: &ChainParams, side: Side) -> Self {
        let n = params.n_sites();
        SeparateStateSpec { side, xi_values: vec![C64::new(1.0, 0.0); n], shifted_values: vec![C64::new(1.0, 0.0); n], roots: Some(vec![]) }
    }

    /// +1 at ξ_a, −1 at ξ_a − η.
    pub fn one_alt(params: &ChainParams, side: Side) -> Self {
        let n = params.n_sites();
        SeparateStateSpec { side, xi_values: vec![C64::new(1.0, 0.0); n], shifted_values: vec![C64::new(-1.0, 0.0); n], roots: None }
    }

    pub fn validate(&self, params: &ChainParams) -> Result<()> {
        let n = params.n_sites();
        if self.xi_values.len() != n || self.shifted_values.len() != n {
            return Err(Error::Shape(format!("spec carries {} / {} values for N = {n}", self.xi_values.len(), self.shifted_values.len())));
        }
        Ok(())
    }

    /// Values entering the right-state weights: β̄(ξ−η) = −a(ξ)/d(ξ−η) β(ξ−η).
    pub fn bar_shifted(&self, params: &ChainParams) -> Vec<C64> {
        params
            .xi
            .iter()
            .zip(&self.shifted_values)
            .map(|(&x, &b)| -params.a(x) / params.d(x - params.eta) * b)
            .collect()
    }
}

/// Σ_h ∏ α(ξ_a − h_a η) V(ξ − hη) ⟨h| (left), or the β̄-weighted ket sum (right).
pub fn separate_state_dense(params: &ChainParams, basis: &SovBasis, spec: &SeparateStateSpec) -> Result<StateVector> {
    spec.validate(params)?;
    let n = params.n_sites();
    let dim = params.dim();
    let shifted = match spec.side {
        Side::Left => spec.shifted_values.clone(),
        Side::Right => spec.bar_shifted(params),
    };
    let mut acc = KahanVec::zeros(dim);
    for h in 0..dim {
        let hb = h_bits(h, n);
        let mut w = vandermonde(&params.shifted_xi(&hb));
        for a in 0..n {
            w *= if hb[a] == 0 { spec.xi_values[a] } else { shifted[a] };
        }
        let v = match spec.side {
            Side::Left => &basis.left[h],
            Side::Right => &basis.right[h],
        };
        acc.add_scaled(w, v);
    }
    Ok(acc.finish())
}

/// Base state for the D-product representation.
#[derive(Debug, Clone, PartialEq)]
pub enum AbaBase {
    /// (−1)^{RN} ∏ D(α_k) on |1⟩.
    One,
    /// (−1)^{(N−R̂)N} ∏d(λ)/∏d(λ̂) ∏ D(λ̂_k) on |1_alt⟩, with `target` = the λ roots.
    OneAlt { target: Vec<C64> },
}

/// D-product representation of a polynomial separate state.
pub fn separate_state_aba(params: &ChainParams, basis: &SovBasis, roots: &[C64], base: &AbaBase, side: Side) -> Result<StateVector> {
    let n = params.n_sites();
    let (start, pre) = match base {
        AbaBase::One => {
            let s = separate_state_dense(params, basis, &SeparateStateSpec::one(params, side))?;
            (s, if (roots.len() * n) % 2 == 1 { -1.0 } else { 1.0 })
        }
        AbaBase::OneAlt { .. } => {
            let s = separate_state_dense(params, basis, &SeparateStateSpec::one_alt(params, side))?;
            (s, if ((n - roots.len().min(n)) * n) % 2 == 1 { -1.0 } else { 1.0 })
        }
    };
    let mut v = start * C64::new(pre, 0.0);
    for &r in roots {
        let d = monodromy(params, r).d;
        v = match side {
            Side::Right => &d * &v,
            Side::Left => row_apply(&v, &d),
        };
    }
    if let AbaBase::OneAlt { target } = base {
        let num: C64 = target.iter().map(|&x| params.d(x)).product();
        let den: C64 = roots.iter().map(|&x| params.d(x)).product();
        v *= num / den;
    }
    Ok(v)
}

/// max over h and λ of ‖D(λ)|h⟩ − d_h(λ)|h⟩‖ and the same on bras, relative.
pub fn d_eigen_check(params: &ChainParams, basis: &SovBasis, points: &[C64]) -> f64 {
    let n = params.n_sites();
    let mut worst = 0.0f64;
    for &l in points {
        let d = monodromy(params, l).d;
        for idx in 0..params.dim() {
            let e = d_h(params, &h_bits(idx, n), l);
            let (r, lv) = (&basis.right[idx], &basis.left[idx]);
            let scale = |v: &StateVector| v.norm() * (1.0 + e.norm());
            worst = worst.max((&d * r - r * e).norm() / scale(r));
            worst = worst.max((row_apply(lv, &d) - lv * e).norm() / scale(lv));
        }
    }
    worst
}

/// D-product against the SoV sum for the prefixes of `points` up to size N, both sides.
pub fn d_product_check(params: &ChainParams, basis: &SovBasis, points: &[C64]) -> Result<f64> {
    let n = params.n_sites();
    let mut worst = 0.0f64;
    for k in 0..=n {
        let roots = &points[..k.min(points.len())];
        for side in [Side::Left, Side::Right] {
            let dense = separate_state_dense(params, basis, &SeparateStateSpec::from_roots(params, roots, side)?)?;
            let aba = separate_state_aba(params, basis, roots, &AbaBase::One, side)?;
            worst = worst.max((&dense - aba).norm() / dense.norm().max(1e-300));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_model::sample_generic_params;
    use crate::dense_oracle::{product_state, DenseOperator};
    use crate::c64;
    use crate::linalg::CVec;

    fn r(x: f64) -> C64 {
        c64(x, 0.0)
    }

    fn close(a: &CVec, b: &CVec, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
    }

    #[test]
    fn basis_fixtures() {
        let p = ChainParams::fixture_n1();
        let l1 = sov_basis_state(&p, &[1], Side::Left).unwrap();
        assert!(close(&l1, &CVec::from_vec(vec![r(0.0), r(-1.0)]), 1e-15));
        let r0 = sov_basis_state(&p, &[0], Side::Right).unwrap();
        assert!(close(&r0, &CVec::from_vec(vec![r(1.0), r(0.0)]), 1e-15));
        let b = SovBasis::new(&p);
        assert!((pair(&b.left[0], &b.right[0]) - 1.0).norm() < 1e-15);
        assert!(pair(&b.left[1], &b.right[0]).norm() < 1e-15);
        let p3 = sample_generic_params(3, 2, 0.3).unwrap();
        let b3 = SovBasis::new(&p3);
        for idx in 0..8 {
            let h = h_bits(idx, 3);
            assert!(close(&sov_basis_state(&p3, &h, Side::Right).unwrap(), &b3.right[idx], 1e-12));
            assert!(close(&sov_basis_state(&p3, &h, Side::Left).unwrap(), &b3.left[idx], 1e-12));
        }
    }

    #[test]
    fn d_eigenrelations() {
        let p = sample_generic_params(3, 6, 0.3).unwrap();
        let b = SovBasis::new(&p);
        let l = c64(0.41, -0.23);
        let d: DenseOperator = monodromy(&p, l).d;
        for idx in 0..8 {
            let h = h_bits(idx, 3);
            let e = d_h(&p, &h, l);
            assert!(close(&(&d * &b.right[idx]), &(&b.right[idx] * e), 1e-10));
            assert!(close(&row_apply(&b.left[idx], &d), &(&b.left[idx] * e), 1e-10));
        }
    }

    #[test]
    fn gram_and_resolution() {
        for n in 1..=4 {
            let p = sample_generic_params(n, 3, 0.3).unwrap();
            let b = SovBasis::new(&p);
            let (g, id) = sov_gram_check(&p, &b);
            assert!(g < 1e-9 && id < 1e-9, "n={n} g={g} id={id}");
        }
    }

    #[test]
    fn separate_state_fixtures() {
        let p = ChainParams::fixture_n1();
        let b = SovBasis::new(&p);
        let one_l = separate_state_dense(&p, &b, &SeparateStateSpec::one(&p, Side::Left)).unwrap();
        assert!(close(&one_l, &CVec::from_vec(vec![r(1.0), r(-1.0)]), 1e-15));
        let q = SeparateStateSpec::from_roots(&p, &[r(-0.5)], Side::Right).unwrap();
        let v = separate_state_dense(&p, &b, &q).unwrap();
        assert!(close(&v, &CVec::from_vec(vec![r(0.5), r(0.5)]), 1e-15));
        let aba = separate_state_aba(&p, &b, &[r(-0.5)], &AbaBase::One, Side::Right).unwrap();
        assert!(close(&aba, &v, 1e-15));
        let empty = separate_state_aba(&p, &b, &[], &AbaBase::One, Side::Right).unwrap();
        assert!(close(&empty, &CVec::from_vec(vec![r(1.0), r(-1.0)]), 1e-15));
    }

    #[test]
    fn reference_states_dense_forms() {
        for n in 1..=5 {
            let p = sample_generic_params(n, 17, 0.3).unwrap();
            let b = SovBasis::new(&p);
            let want = product_state(r(1.0), r(-1.0), n);
            for side in [Side::Left, Side::Right] {
                let one = separate_state_dense(&p, &b, &SeparateStateSpec::one(&p, side)).unwrap();
                assert!(close(&one, &want, 1e-10), "n={n} {side:?}");
            }
            let alt_want = product_state(r(1.0), r(1.0), n);
            for side in [Side::Left, Side::Right] {
                let alt = separate_state_dense(&p, &b, &SeparateStateSpec::one_alt(&p, side)).unwrap();
                assert!(close(&alt, &alt_want, 1e-10), "n={n} alt {side:?}");
            }
        }
    }

    #[test]
    fn aba_equals_dense_random_roots() {
        for n in 1..=5 {
            let p = sample_generic_params(n, 29 + n as u64, 0.3).unwrap();
            let b = SovBasis::new(&p);
            for k in 0..4 {
                let roots: Vec<C64> = (0..(k % (n + 1)) + 1).map(|j| c64(0.3 * j as f64 - 0.7, 0.5 + 0.2 * k as f64)).collect();
                for side in [Side::Left, Side::Right] {
                    let spec = SeparateStateSpec::from_roots(&p, &roots, side).unwrap();
                    let dense = separate_state_dense(&p, &b, &spec).unwrap();
                    let aba = separate_state_aba(&p, &b, &roots, &AbaBase::One, side).unwrap();
                    assert!(close(&dense, &aba, 1e-10), "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn projective_rescaling() {
        let p = sample_generic_params(3, 9, 0.3).unwrap();
        let b = SovBasis::new(&p);
        let spec = SeparateStateSpec::from_roots(&p, &[c64(0.2, 0.3), c64(-1.0, 0.1)], Side::Right).unwrap();
        let c = [c64(2.0, 1.0), c64(-0.5, 0.3), c64(0.1, -3.0)];
        let mut scaled = spec.clone();
        for a in 0..3 {
            scaled.xi_values[a] *= c[a];
            scaled.shifted_values[a] *= c[a];
        }
        let v = separate_state_dense(&p, &b, &spec).unwrap();
        let w = separate_state_dense(&p, &b, &scaled).unwrap();
        let f: C64 = c.iter().product();
        assert!(close(&(v * f), &w, 1e-12));
    }

    #[test]
    fn spec_validation_and_json() {
        let p = ChainParams::fixture_n2();
        let mut s = SeparateStateSpec::one(&p, Side::Left);
        s.xi_values.pop();
        assert!(s.validate(&p).is_err());
        let t = SeparateStateSpec::from_roots(&p, &[c64(0.5, 0.5)], Side::Right).unwrap();
        let j = serde_json::to_string(&t).unwrap();
        assert!(j.contains("\"side\":\"right\""));
        let back: SeparateStateSpec = serde_json::from_str(&j).unwrap();
        assert_eq!(back, t);
    }
}
