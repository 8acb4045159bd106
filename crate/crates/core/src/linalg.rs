//! Thin helpers over nalgebra for the complex dense algebra used everywhere.

use crate::{Error, Result, C64};
use nalgebra::{DMatrix, DVector};

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Determinant with the empty-matrix convention det₀ = 1.
pub fn det(m: &CMat) -> C64 {
    if m.nrows() == 0 {
        return C64::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

pub fn solve(m: &CMat, b: &CVec) -> Result<CVec> {
    m.clone().lu().solve(b).ok_or(Error::Singular)
}

/// Eigenvalues of a general complex matrix (complex Schur form).
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(vec![]);
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::RetryExhausted("schur iteration".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Eigenvector for a known eigenvalue by shifted inverse iteration.
pub fn eigenvector(m: &CMat, w: C64) -> Result<CVec> {
    let n = m.nrows();
    let scale = m.norm().max(1.0);
    let shift = w + C64::new(1e-11, 7e-12) * scale;
    let lu = (m - CMat::identity(n, n) * shift).lu();
    // deterministic, generic start
    let mut v = CVec::from_fn(n, |i, _| C64::new(1.0 + 0.37 * (i as f64).sin(), 0.21 * (i as f64 + 0.5).cos()));
    for _ in 0..4 {
        v = lu.solve(&v).ok_or(Error::Singular)?;
        let nv = v.norm();
        if !nv.is_finite() || nv == 0.0 {
            return Err(Error::Singular);
        }
        v /= C64::new(nv, 0.0);
    }
    Ok(v)
}

/// Spectral norm (largest singular value).
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// 2-norm condition number.
pub fn cond(m: &CMat) -> f64 {
    let s = m.clone().svd(false, false).singular_values;
    s.max() / s.min()
}

/// Bilinear pairing Σ u_i v_i (no conjugation).
pub fn pair(u: &CVec, v: &CVec) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b).sum()
}

/// Bilinear u·M·v.
pub fn sandwich(u: &CVec, m: &CMat, v: &CVec) -> C64 {
    pair(u, &(m * v))
}

/// Left action u·M as a column vector (i.e. Mᵀu).
pub fn left_apply(u: &CVec, m: &CMat) -> CVec {
    m.tr_mul(u)
}

/// Kahan-compensated accumulation of complex vectors.
pub struct KahanVec {
    sum: CVec,
    comp: CVec,
}

impl KahanVec {
    pub fn zeros(n: usize) -> Self {
        KahanVec { sum: CVec::zeros(n), comp: CVec::zeros(n) }
    }

    pub fn add_scaled(&mut self, w: C64, v: &CVec) {
        for i in 0..v.len() {
            let y = w * v[i] - self.comp[i];
            let t = self.sum[i] + y;
            self.comp[i] = (t - self.sum[i]) - y;
            self.sum[i] = t;
        }
    }

    pub fn finish(self) -> CVec {
        self.sum
    }
}
