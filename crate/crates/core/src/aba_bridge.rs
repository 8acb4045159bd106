//! Bethe states of the σᶻ-twisted chain, their correspondence with SoV
//! eigenstates, and the two routes to the R = R' form factor.

use crate::dense_oracle::{global_operators, local_op, monodromy, ref_down, ref_up, row_apply, sigma_z, tensor_power, transfer_antiperiodic, transfer_twisted, u_matrix, StateVector};
use crate::determinant_engine::{coinciding_limit_along, column_substituted_unchecked, gen_slavnov_unchecked, generic_direction, Limit, LIMIT_SCHEDULE};
use crate::form_factors::{dense_matrix_element, eigen_states, ff_sigma_minus, same_eigenvalue, SpinOp};
use crate::linalg::{eigenvalues, op_norm, pair, CMat};
use crate::sov_states::{separate_state_dense, SeparateStateSpec, Side, SovBasis};
use crate::{ChainParams, EigenRecord, Error, Result, Spectrum, C64};
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

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetheFlavor {
    /// ∏B(λ_j)|0⟩
    BOnUp,
    /// ∏C(λ_j)|0'⟩
    COnDown,
}

pub fn bethe_state(params: &ChainParams, roots: &[C64], flavor: BetheFlavor) -> StateVector {
    let n = params.n_sites();
    let mut v = match flavor {
        BetheFlavor::BOnUp => ref_up(n),
        BetheFlavor::COnDown => ref_down(n),
    };
    for &l in roots {
        let m = monodromy(params, l);
        v = match flavor {
            BetheFlavor::BOnUp => &m.b * &v,
            BetheFlavor::COnDown => &m.c * &v,
        };
    }
    v
}

/// ⟨0'|∏B(λ_j), the dual Bethe state used with the C-flavor ket.
pub fn bethe_dual_state(params: &ChainParams, roots: &[C64]) -> StateVector {
    let mut v = ref_down(params.n_sites());
    for &l in roots {
        v = row_apply(&v, &monodromy(params, l).b);
    }
    v
}

pub fn gamma_u_inverse(n: usize) -> CMat {
    let u = u_matrix();
    tensor_power(&[[u[0][0], u[1][0]], [u[0][1], u[1][1]]], n)
}

/// ‖T_−(λ) − Γ_U T(λ) Γ_U⁻¹‖ / ‖T_−(λ)‖.
pub fn similarity_residual(params: &ChainParams, l: C64) -> f64 {
    let n = params.n_sites();
    let g = global_operators(params).gamma_u;
    let tw = transfer_twisted(params, l);
    let conj = &g * transfer_antiperiodic(params, l) * gamma_u_inverse(n);
    op_norm(&(&tw - conj)) / op_norm(&tw).max(1e-300)
}

/// Largest gap between the sorted spectra of the two transfer matrices.
pub fn isospectrality_residual(params: &ChainParams, l: C64) -> Result<f64> {
    let key = |z: &C64| (z.re, z.im);
    let mut a = eigenvalues(&transfer_antiperiodic(params, l))?;
    let mut b = eigenvalues(&transfer_twisted(params, l))?;
    a.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
    b.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
    let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale)
}

/// ‖T_−(λ)Ψ − τ(λ)Ψ‖ / ‖Ψ‖ for the C-flavor state of a record.
pub fn twisted_eigen_residual(params: &ChainParams, record: &EigenRecord, l: C64) -> f64 {
    let psi = bethe_state(params, &record.bethe_roots, BetheFlavor::COnDown);
    let tv = transfer_twisted(params, l) * &psi;
    let tau = record.tau.eval(l);
    (tv - &psi * tau).norm() / (psi.norm() * (1.0 + tau.norm()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub ratio: C64,
    pub expected: C64,
    pub spread: f64,
}

/// (−1)^{N(R−1)} 2^{N/2−R}.
pub fn correspondence_constant(n: usize, r: usize) -> C64 {
    let sign = if r == 0 { parity(n) } else { parity(n * (r - 1)) };
    c(sign * 2f64.powf(n as f64 / 2.0 - r as f64))
}

/// Ratio of |Q_τ⟩ to Γ_U⁻¹∏C(λ)|0'⟩ and its spread over components.
pub fn correspondence_check(params: &ChainParams, basis: &SovBasis, record: &EigenRecord) -> Result<Correspondence> {
    let n = params.n_sites();
    let q = separate_state_dense(params, basis, &SeparateStateSpec::from_roots(params, &record.bethe_roots, Side::Right)?)?;
    let g = gamma_u_inverse(n) * bethe_state(params, &record.bethe_roots, BetheFlavor::COnDown);
    let k = (0..g.len()).max_by(|&i, &j| g[i].norm().partial_cmp(&g[j].norm()).unwrap()).unwrap_or(0);
    if g[k].norm() <= 1e-300 {
        return Err(Error::SpectrumPairing(0.0));
    }
    let ratio = q[k] / g[k];
    let spread = (&q - &g * ratio).norm() / q.norm();
    Ok(Correspondence { ratio, expected: correspondence_constant(n, record.degree), spread })
}

/// (‖|1⟩ − ⊗(1,−1)‖, ‖|1⟩ − (−√2)^N Γ_U⁻¹|0'⟩‖).
pub fn one_explicit_check(params: &ChainParams, basis: &SovBasis) -> Result<(f64, f64)> {
    let n = params.n_sites();
    let one = separate_state_dense(params, basis, &SeparateStateSpec::one(params, Side::Right))?;
    let prod = crate::dense_oracle::product_state(c(1.0), c(-1.0), n);
    let via_u = gamma_u_inverse(n) * ref_down(n) * c((-(2f64.sqrt())).powi(n as i32));
    Ok(((&one - prod).norm(), (&one - via_u).norm()))
}

/// ⟨0'|∏B(λ)∏C(λ)|0'⟩ against the Gaudin form without the 2^{N−2R} factor.
pub fn aba_norm_check(params: &ChainParams, record: &EigenRecord) -> Result<(C64, C64)> {
    let lam = &record.bethe_roots;
    let dense = pair(&bethe_dual_state(params, lam), &bethe_state(params, lam, BetheFlavor::COnDown));
    let g = crate::scalar_products::gaudin_norm(params, record)?;
    let n = params.n_sites() as i32;
    Ok((dense, g / 2f64.powi(n - 2 * lam.len() as i32)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnSubstituted {
    pub sov: C64,
    pub aba: C64,
    pub diff: f64,
}

/// (w_sov, w_aba) at each point y.
fn weights(params: &ChainParams, bra: &EigenRecord, ket: &EigenRecord, ys: &[C64]) -> Vec<(C64, C64)> {
    let eta = params.eta;
    ys.iter()
        .map(|&y| {
            let am = params.a(y) * bra.q_tau.eval(y - eta);
            ((am + params.d(y) * bra.q_tau.eval(y + eta)) / am, 2.0 * ket.q_tau.eval(y - eta) / bra.q_tau.eval(y - eta))
        })
        .collect()
}

/// S + Σ_m w_m S^{(m)} at the given y-set, for the chosen weight column.
fn weighted_sum(params: &ChainParams, bra: &EigenRecord, xn: C64, ys: &[C64], w: &[C64]) -> Result<C64> {
    let mu = c(-1.0);
    let lam = &bra.bethe_roots;
    let mut v = gen_slavnov_unchecked(mu, lam, ys, &params.xi, params.eta)?;
    for (m, wm) in w.iter().enumerate() {
        v += wm * column_substituted_unchecked(mu, lam, ys, &params.xi, params.eta, m, xn)?;
    }
    Ok(v)
}

/// Column-substituted Slavnov sums of the SoV and ABA form factors, R = R' ≥ 1.
/// For τ = τ' the weights are taken at λ' and the Slavnov values as limits y → λ'.
pub fn column_substituted_crosscheck(params: &ChainParams, bra: &EigenRecord, ket: &EigenRecord, site: usize) -> Result<ColumnSubstituted> {
    params.check_site(site)?;
    let r = bra.degree;
    if r != ket.degree || r == 0 {
        return Err(Error::Shape(format!("needs equal nonzero degrees, got {} and {}", r, ket.degree)));
    }
    let xn = params.xi[site - 1];
    let w = weights(params, bra, ket, &ket.bethe_roots);
    let ws: Vec<C64> = w.iter().map(|p| p.0).collect();
    let wa: Vec<C64> = w.iter().map(|p| p.1).collect();
    if !same_eigenvalue(bra, ket) {
        let sov = weighted_sum(params, bra, xn, &ket.bethe_roots, &ws)?;
        let aba = weighted_sum(params, bra, xn, &ket.bethe_roots, &wa)?;
        let diff = (sov - aba).norm() / sov.norm().max(aba.norm()).max(1e-300);
        return Ok(ColumnSubstituted { sov, aba, diff });
    }
    let dir = generic_direction(r);
    let base = &ket.bethe_roots;
    let ls: Limit = coinciding_limit_along(|ys| weighted_sum(params, bra, xn, ys, &ws), base, &dir, &LIMIT_SCHEDULE)?;
    let la: Limit = coinciding_limit_along(|ys| weighted_sum(params, bra, xn, ys, &wa), base, &dir, &LIMIT_SCHEDULE)?;
    let wdev = w.iter().map(|p| (p.0 - 2.0).norm().max((p.1 - 2.0).norm())).fold(0.0, f64::max) / 2.0;
    let diff = ((ls.value - la.value).norm() / ls.value.norm().max(la.value.norm()).max(1e-300)).max(wdev);
    Ok(ColumnSubstituted { sov: ls.value, aba: la.value, diff })
}

/// sgn 2^{N−2R−1} Q_τ(ξ_n)/Q_τ'(ξ_n) ∏a_n(λ)∏d_n(λ'), the factor taking the
/// SoV sum to ⟨Q_τ|σ⁻_n|Q_τ'⟩.
pub fn sov_sum_prefactor(params: &ChainParams, bra: &EigenRecord, ket: &EigenRecord, site: usize) -> Result<C64> {
    let n = params.n_sites() as i32;
    let r = bra.degree;
    let xn = params.xi[site - 1];
    let sgn = if r == 0 { -1.0 } else { 1.0 };
    let mut v = c(sgn * 2f64.powi(n - 2 * r as i32 - 1)) * bra.q_tau.eval(xn) / ket.q_tau.eval(xn);
    for &x in &bra.bethe_roots {
        v *= params.a_n(site, x)?;
    }
    for &x in &ket.bethe_roots {
        v *= params.d_n(site, x)?;
    }
    Ok(v)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AbaSweep {
    pub states: usize,
    pub twisted_eigen: f64,
    pub isospectrality: f64,
    pub similarity: f64,
    pub constant_error: f64,
    pub ratio_spread: f64,
    pub one_product: f64,
    pub one_via_u: f64,
    pub aba_norm: f64,
    pub column_sub_pairs: usize,
    pub column_sub: f64,
    pub sov_sum_vs_dense: f64,
    pub sov_sum_vs_formula: f64,
    pub aba_sigma_z_vs_dense: f64,
    /// distinct C-flavor states up to scale
    pub distinct_states: usize,
}

pub fn aba_sweep(spectrum: &Spectrum, basis: &SovBasis) -> Result<AbaSweep> {
    let params = &spectrum.params;
    let n = params.n_sites();
    let probe = C64::new(0.31, -0.57) * params.scale().max(1.0);
    let mut out = AbaSweep { states: spectrum.records.len(), ..Default::default() };
    out.isospectrality = isospectrality_residual(params, probe)?;
    out.similarity = similarity_residual(params, probe);
    let (p1, p2) = one_explicit_check(params, basis)?;
    out.one_product = p1;
    out.one_via_u = p2;
    let mut psis: Vec<StateVector> = Vec::new();
    for rec in &spectrum.records {
        out.twisted_eigen = out.twisted_eigen.max(twisted_eigen_residual(params, rec, probe));
        let cr = correspondence_check(params, basis, rec)?;
        out.constant_error = out.constant_error.max((cr.ratio - cr.expected).norm() / cr.expected.norm());
        out.ratio_spread = out.ratio_spread.max(cr.spread);
        let (d, g) = aba_norm_check(params, rec)?;
        out.aba_norm = out.aba_norm.max((d - g).norm() / d.norm().max(g.norm()));
        let psi = bethe_state(params, &rec.bethe_roots, BetheFlavor::COnDown);
        let unit = &psi / C64::new(psi.norm(), 0.0);
        let dup = psis.iter().any(|q| (1.0 - pair(&q.map(|z| z.conj()), &unit).norm()) < 1e-8);
        if !dup {
            psis.push(unit);
        }
    }
    out.distinct_states = psis.len();
    for bra in &spectrum.records {
        for ket in &spectrum.records {
            if bra.degree != ket.degree || bra.degree == 0 {
                continue;
            }
            let same = same_eigenvalue(bra, ket);
            let (bl, _) = eigen_states(params, basis, bra)?;
            let (_, kr) = eigen_states(params, basis, ket)?;
            let scale = bl.norm() * kr.norm();
            let dual = bethe_dual_state(params, &bra.bethe_roots);
            let psi = bethe_state(params, &ket.bethe_roots, BetheFlavor::COnDown);
            for site in 1..=n {
                let ab = column_substituted_crosscheck(params, bra, ket, site)?;
                out.column_sub = out.column_sub.max(ab.diff);
                out.column_sub_pairs += 1;
                if same {
                    continue;
                }
                let k = sov_sum_prefactor(params, bra, ket, site)?;
                let dense = dense_matrix_element(&bl, &kr, SpinOp::SigmaMinus, site, n);
                out.sov_sum_vs_dense = out.sov_sum_vs_dense.max((k * ab.sov - dense).norm() / scale);
                let (_, f) = ff_sigma_minus(params, bra, ket, site)?;
                out.sov_sum_vs_formula = out.sov_sum_vs_formula.max((k * ab.sov - f).norm() / scale);
                let z = crate::linalg::sandwich(&dual, &local_op(&sigma_z(), site, n), &psi);
                let zr = z * 2f64.powi(n as i32 - 2 * bra.degree as i32 - 1);
                out.aba_sigma_z_vs_dense = out.aba_sigma_z_vs_dense.max((zr - dense).norm() / scale);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_model::sample_generic_params;
    use crate::spectrum_tq::full_spectrum;

    #[test]
    fn n1_bethe_state() {
        let p = ChainParams::fixture_n1();
        let psi = bethe_state(&p, &[c(-0.5)], BetheFlavor::COnDown);
        assert!((psi[0] - 1.0).norm() < 1e-15 && psi[1].norm() < 1e-15);
        let tw = transfer_twisted(&p, C64::new(0.3, 0.8));
        assert!((tw[(0, 0)] - 1.0).norm() < 1e-15 && (tw[(1, 1)] + 1.0).norm() < 1e-15);
        assert_eq!(bethe_state(&p, &[], BetheFlavor::BOnUp), ref_up(1));
        let s = full_spectrum(&p, 1).unwrap();
        let b = SovBasis::new(&p);
        let cr = correspondence_check(&p, &b, &s.records[0]).unwrap();
        assert!((cr.expected + 2f64.sqrt()).norm() < 1e-15);
        assert!((cr.ratio - cr.expected).norm() < 1e-12 && cr.spread < 1e-12);
        let (a, u) = one_explicit_check(&p, &b).unwrap();
        assert!(a < 1e-14 && u < 1e-14);
    }

    #[test]
    fn n2_constant() {
        assert!((correspondence_constant(2, 1) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn sweep_small_n() {
        for n in 1..=4 {
            let p = sample_generic_params(n, 700 + n as u64, 0.3).unwrap();
            let s = full_spectrum(&p, 7).unwrap();
            let b = SovBasis::new(&p);
            let w = aba_sweep(&s, &b).unwrap();
            for v in [w.twisted_eigen, w.isospectrality, w.similarity, w.constant_error, w.ratio_spread, w.one_product, w.one_via_u, w.column_sub] {
                assert!(v < 1e-9, "{n} {w:?}");
            }
            for v in [w.aba_norm, w.sov_sum_vs_dense, w.sov_sum_vs_formula, w.aba_sigma_z_vs_dense] {
                assert!(v < 1e-8, "{n} {w:?}");
            }
            assert_eq!(w.distinct_states, 1 << n);
        }
    }
}
