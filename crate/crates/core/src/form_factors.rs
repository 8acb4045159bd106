//! Local spin form factors between transfer-matrix eigenstates, the
//! reconstruction of σ⁻ from transfer matrices, and dense matrix elements.

use crate::chain_model::vandermonde;
use crate::dense_oracle::{global_operators, local_op, monodromy, sigma_minus, sigma_plus, sigma_z, transfer_antiperiodic, DenseOperator, Local, StateVector};
use crate::determinant_engine::t;
use crate::linalg::{det, op_norm, pair, sandwich, CMat};
use crate::scalar_products::gaudin_norm;
use crate::sov_states::{separate_state_dense, SeparateStateSpec, Side, SovBasis};
use crate::{ChainParams, ComplexPoly, EigenRecord, Error, Result, Spectrum, C64};
use serde::{Deserialize, Serialize};

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn parity(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Local operators with closed form factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpinOp {
    SigmaMinus,
    SigmaZ,
    SigmaPlus,
}

impl SpinOp {
    pub const ALL: [SpinOp; 3] = [SpinOp::SigmaMinus, SpinOp::SigmaZ, SpinOp::SigmaPlus];

    pub fn local(self) -> Local {
        match self {
            SpinOp::SigmaMinus => sigma_minus(),
            SpinOp::SigmaZ => sigma_z(),
            SpinOp::SigmaPlus => sigma_plus(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpinOp::SigmaMinus => "sigma-",
            SpinOp::SigmaZ => "sigmaz",
            SpinOp::SigmaPlus => "sigma+",
        }
    }
}

/// (−1)^N ∏_{j<n} T(ξ_j)/a(ξ_j) · D(ξ_n)/a(ξ_n) · ∏_{j>n} T(ξ_j)/a(ξ_j).
pub fn reconstruct_sigma_minus_raw(params: &ChainParams, site: usize) -> Result<DenseOperator> {
    params.check_site(site)?;
    let n = params.n_sites();
    let mut op = CMat::identity(params.dim(), params.dim()) * c(parity(n));
    for j in 1..=n {
        let x = params.xi[j - 1];
        let f = if j == site { monodromy(params, x).d } else { transfer_antiperiodic(params, x) };
        op = op * f / params.a(x);
    }
    Ok(op)
}

/// That product equals (−1)^N σ⁻Γˣ; this returns σ⁻.
pub fn reconstruct_sigma_minus(params: &ChainParams, site: usize) -> Result<DenseOperator> {
    let g = global_operators(params).gamma_x;
    Ok(reconstruct_sigma_minus_raw(params, site)? * g * c(parity(params.n_sites())))
}

/// Case of the σ⁻ form factor by Q-degrees of bra (R) and ket (R').
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FfCase {
    /// |R − R'| > 1
    Selection,
    /// R = R' + 1
    BraHigher,
    /// R' = R + 1
    KetHigher,
    /// R = R', τ ≠ τ'
    Equal,
    /// τ = τ'
    Diagonal,
}

impl FfCase {
    pub fn name(self) -> &'static str {
        match self {
            FfCase::Selection => "selection",
            FfCase::BraHigher => "bra-higher",
            FfCase::KetHigher => "ket-higher",
            FfCase::Equal => "equal",
            FfCase::Diagonal => "diagonal",
        }
    }
}

pub fn same_eigenvalue(a: &EigenRecord, b: &EigenRecord) -> bool {
    let n = a.tau.coeffs.len().max(b.tau.coeffs.len());
    let s = a.tau.max_coeff().max(b.tau.max_coeff()).max(1.0);
    (0..n).all(|k| (a.tau.coeffs.get(k).copied().unwrap_or_default() - b.tau.coeffs.get(k).copied().unwrap_or_default()).norm() <= 1e-8 * s)
}

pub fn ff_case(bra: &EigenRecord, ket: &EigenRecord) -> FfCase {
    let (r, rp) = (bra.degree, ket.degree);
    if r.abs_diff(rp) > 1 {
        FfCase::Selection
    } else if r == rp + 1 {
        FfCase::BraHigher
    } else if rp == r + 1 {
        FfCase::KetHigher
    } else if same_eigenvalue(bra, ket) {
        FfCase::Diagonal
    } else {
        FfCase::Equal
    }
}

fn reversed(v: &[C64]) -> Vec<C64> {
    v.iter().rev().copied().collect()
}

/// Rows from `rows`, first |rows|−1 columns from `cols` with the row-set
/// polynomial, last column t(row − ξ_n).
fn f_minus(params: &ChainParams, rows: &[C64], cols: &[C64], q_row: &ComplexPoly, xn: C64) -> CMat {
    let eta = params.eta;
    let r = rows.len();
    CMat::from_fn(r, r, |j, k| {
        if k + 1 < r {
            let y = cols[k];
            params.a(y) / params.d(y) * q_row.eval(y - eta) * t(rows[j] - y, eta) + q_row.eval(y + eta) * t(y - rows[j], eta)
        } else {
            t(rows[j] - xn, eta)
        }
    })
}

fn prod_an_dn(params: &ChainParams, site: usize, bra_roots: &[C64], ket_roots: &[C64]) -> Result<C64> {
    let mut v = c(1.0);
    for &x in bra_roots {
        v *= params.a_n(site, x)?;
    }
    for &x in ket_roots {
        v *= params.d_n(site, x)?;
    }
    Ok(v)
}

/// Rank-one perturbed matrix F + P for R = R'. On the diagonal of the τ = τ'
/// case the removable singularity is replaced by its limit.
fn f_equal(params: &ChainParams, bra: &EigenRecord, ket: &EigenRecord, xn: C64, same: bool) -> CMat {
    let eta = params.eta;
    let lam = &bra.bethe_roots;
    let lp = &ket.bethe_roots;
    let q = &bra.q_tau;
    let dq = q.derivative();
    let r = lam.len();
    let ad = |y: C64| params.a(y) / params.d(y);
    let dad = |y: C64| ad(y) * params.xi.iter().map(|&x| 1.0 / (y - x + eta) - 1.0 / (y - x)).sum::<C64>();
    CMat::from_fn(r, r, |j, k| {
        let y = lp[k];
        let w1 = ad(y) * q.eval(y - eta);
        let w2 = q.eval(y + eta);
        let base = if same && j == k {
            let g1 = dad(y) * q.eval(y - eta) + ad(y) * dq.eval(y - eta);
            let h1 = dq.eval(y + eta);
            -(g1 - h1) - 2.0 * w2 / eta
        } else {
            w1 * t(lam[j] - y, eta) + w2 * t(y - lam[j], eta)
        };
        base + (w1 + w2) * t(lam[j] - xn, eta)
    })
}

/// ⟨Q_τ|σ⁻_n|Q_τ'⟩ in SoV normalization.
pub fn ff_sigma_minus(params: &ChainParams, bra: &EigenRecord, ket: &EigenRecord, site: usize) -> Result<(FfCase, C64)> {
    params.check_site(site)?;
    for rec in [bra, ket] {
        if rec.residuals.bethe > crate::determinant_engine::ON_SHELL_GATE {
            return Err(Error::NotOnShell(rec.residuals.bethe));
        }
    }
    let n = params.n_sites() as i32;
    let eta = params.eta;
    let xn = params.xi[site - 1];
    let lam = &bra.bethe_roots;
    let lp = &ket.bethe_roots;
    let (r, rp) = (lam.len(), lp.len());
    let case = ff_case(bra, ket);
    let pre_ad = prod_an_dn(params, site, lam, lp)?;
    let bra_sign = parity(r);
    let value = match case {
        FfCase::Selection => c(0.0),
        FfCase::BraHigher => {
            let pre = 2f64.powi(n - 2 * r as i32) * parity(n as usize - 1) * bra.q_tau.eval(xn) / ket.q_tau.eval(xn);
            bra_sign * pre * pre_ad / (vandermonde(lam) * vandermonde(&reversed(lp))) * det(&f_minus(params, lam, lp, &bra.q_tau, xn))
        }
        FfCase::KetHigher => {
            let pre = 2f64.powi(n - 2 * rp as i32) * parity(n as usize - 1) * ket.q_tau.eval(xn - eta) / bra.q_tau.eval(xn - eta);
            bra_sign * pre * pre_ad / (vandermonde(&reversed(lam)) * vandermonde(lp)) * det(&f_minus(params, lp, lam, &ket.q_tau, xn))
        }
        FfCase::Equal | FfCase::Diagonal => {
            let same = case == FfCase::Diagonal;
            let sgn = if r == 0 { -1.0 } else { 1.0 };
            let pre = sgn * 2f64.powi(n - 2 * r as i32 - 1) * bra.q_tau.eval(xn) / ket.q_tau.eval(xn);
            let v = pre * pre_ad / (vandermonde(lam) * vandermonde(&reversed(lp))) * det(&f_equal(params, bra, ket, xn, same));
            if same && r > 0 {
                v - gaudin_norm(params, bra)?
            } else {
                v
            }
        }
    };
    Ok((case, value))
}

/// σ⁻ form factor with the uncorrected sign and prefactor; negative control.
pub fn ff_sigma_minus_unsigned(params: &ChainParams, bra: &EigenRecord, ket: &EigenRecord, site: usize) -> Result<C64> {
    let (case, v) = ff_sigma_minus(params, bra, ket, site)?;
    let r = bra.degree;
    let n = params.n_sites();
    Ok(match case {
        FfCase::Selection => v,
        FfCase::BraHigher | FfCase::KetHigher => v * parity(r),
        FfCase::Equal | FfCase::Diagonal => {
            let ours = if r == 0 { -1.0 } else { 1.0 };
            let back = if case == FfCase::Diagonal && r > 0 { gaudin_norm(params, bra)? } else { c(0.0) };
            (v + back) * ours * parity(n - r.min(n))
        }
    })
}

/// σᶻ = 2(R − R')σ⁻.
pub fn ff_sigma_z(params: &ChainParams, bra: &EigenRecord, ket: &EigenRecord, site: usize) -> Result<C64> {
    let (_, v) = ff_sigma_minus(params, bra, ket, site)?;
    Ok(v * 2.0 * (bra.degree as f64 - ket.degree as f64))
}

/// σᶻ with the opposite factor 2(R' − R).
pub fn ff_sigma_z_flipped(params: &ChainParams, bra: &EigenRecord, ket: &EigenRecord, site: usize) -> Result<C64> {
    Ok(-ff_sigma_z(params, bra, ket, site)?)
}

/// σ⁺ = (−1)^{R−R'}σ⁻.
pub fn ff_sigma_plus(params: &ChainParams, bra: &EigenRecord, ket: &EigenRecord, site: usize) -> Result<C64> {
    let (_, v) = ff_sigma_minus(params, bra, ket, site)?;
    Ok(v * parity(bra.degree + ket.degree))
}

pub fn form_factor(params: &ChainParams, bra: &EigenRecord, ket: &EigenRecord, site: usize, op: SpinOp) -> Result<C64> {
    match op {
        SpinOp::SigmaMinus => Ok(ff_sigma_minus(params, bra, ket, site)?.1),
        SpinOp::SigmaZ => ff_sigma_z(params, bra, ket, site),
        SpinOp::SigmaPlus => ff_sigma_plus(params, bra, ket, site),
    }
}

/// Eigenstate vectors |Q_τ⟩ and ⟨Q_τ| from the SoV constructors.
pub fn eigen_states(params: &ChainParams, basis: &SovBasis, record: &EigenRecord) -> Result<(StateVector, StateVector)> {
    let l = separate_state_dense(params, basis, &SeparateStateSpec::from_roots(params, &record.bethe_roots, Side::Left)?)?;
    let r = separate_state_dense(params, basis, &SeparateStateSpec::from_roots(params, &record.bethe_roots, Side::Right)?)?;
    Ok((l, r))
}

/// Dense bilinear ⟨bra|op_n|ket⟩.
pub fn dense_matrix_element(bra: &StateVector, ket: &StateVector, op: SpinOp, site: usize, n: usize) -> C64 {
    sandwich(bra, &local_op(&op.local(), site, n), ket)
}

/// Sˣ on |Q_τ⟩: (2R−N, the rejected N−2R, dense Rayleigh quotient).
pub fn sx_eigenvalue_check(params: &ChainParams, basis: &SovBasis, record: &EigenRecord) -> Result<(i64, i64, C64)> {
    let (l, r) = eigen_states(params, basis, record)?;
    let sx = global_operators(params).sx;
    let dense = sandwich(&l, &sx, &r) / pair(&l, &r);
    let n = params.n_sites() as i64;
    let rr = record.degree as i64;
    Ok((2 * rr - n, n - 2 * rr, dense))
}

/// Worst errors over a full spectrum, relative to ‖bra‖‖ket‖.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FormFactorSweep {
    pub combinations: usize,
    pub selection: f64,
    pub bra_higher: f64,
    pub ket_higher: f64,
    pub equal: f64,
    pub diagonal: f64,
    pub sigma_z: f64,
    pub sigma_plus: f64,
    pub gamma_x_consistency: f64,
    /// smallest error, relative to the value, of the flipped σᶻ sign over pairs with a nonzero value
    pub sigma_z_rejected_best: f64,
    pub reconstruction: f64,
    pub reconstruction_raw: f64,
    pub sx_eigenvalue: f64,
    pub sx_rejected_best: f64,
}

pub fn form_factor_sweep(spectrum: &Spectrum, basis: &SovBasis) -> Result<FormFactorSweep> {
    let params = &spectrum.params;
    let n = params.n_sites();
    let gx = global_operators(params).gamma_x;
    let states = spectrum.records.iter().map(|r| eigen_states(params, basis, r)).collect::<Result<Vec<_>>>()?;
    let mut out = FormFactorSweep { sigma_z_rejected_best: f64::INFINITY, sx_rejected_best: f64::INFINITY, ..Default::default() };
    for (bi, bra) in spectrum.records.iter().enumerate() {
        for (ki, ket) in spectrum.records.iter().enumerate() {
            let (bl, _) = &states[bi];
            let (_, kr) = &states[ki];
            let scale = bl.norm() * kr.norm();
            for site in 1..=n {
                let (case, fm) = ff_sigma_minus(params, bra, ket, site)?;
                let dm = dense_matrix_element(bl, kr, SpinOp::SigmaMinus, site, n);
                let e = (fm - dm).norm() / scale;
                let slot = match case {
                    FfCase::Selection => &mut out.selection,
                    FfCase::BraHigher => &mut out.bra_higher,
                    FfCase::KetHigher => &mut out.ket_higher,
                    FfCase::Equal => &mut out.equal,
                    FfCase::Diagonal => &mut out.diagonal,
                };
                *slot = slot.max(e);
                if case == FfCase::Selection {
                    *slot = slot.max(dm.norm() / scale);
                }
                let dz = dense_matrix_element(bl, kr, SpinOp::SigmaZ, site, n);
                let fz = ff_sigma_z(params, bra, ket, site)?;
                out.sigma_z = out.sigma_z.max((fz - dz).norm() / scale);
                if dz.norm() > 1e-6 * scale {
                    out.sigma_z_rejected_best = out.sigma_z_rejected_best.min((ff_sigma_z_flipped(params, bra, ket, site)? - dz).norm() / dz.norm());
                }
                let dp = dense_matrix_element(bl, kr, SpinOp::SigmaPlus, site, n);
                let fp = ff_sigma_plus(params, bra, ket, site)?;
                out.sigma_plus = out.sigma_plus.max((fp - dp).norm() / scale);
                let conj = sandwich(bl, &(&gx * local_op(&sigma_minus(), site, n) * &gx), kr);
                out.gamma_x_consistency = out.gamma_x_consistency.max((conj - fp).norm() / scale);
                out.combinations += 3;
            }
        }
        let (d, p, dense) = sx_eigenvalue_check(params, basis, bra)?;
        out.sx_eigenvalue = out.sx_eigenvalue.max((dense - d as f64).norm());
        if p != d {
            out.sx_rejected_best = out.sx_rejected_best.min((dense - p as f64).norm());
        }
    }
    for site in 1..=n {
        let target = local_op(&sigma_minus(), site, n);
        out.reconstruction = out.reconstruction.max(op_norm(&(reconstruct_sigma_minus(params, site)? - &target)));
        out.reconstruction_raw = out.reconstruction_raw.max(op_norm(&(reconstruct_sigma_minus_raw(params, site)? - &target)));
    }
    Ok(out)
}
