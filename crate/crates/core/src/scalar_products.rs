//! Scalar products of separate states: the direct determinant, the A±
//! forms, the Izergin form, eigenstate cases, and the Gaudin norm.

use crate::chain_model::vandermonde;
use crate::determinant_engine::{
    a_pm, coinciding_limit_along, e_pm, gen_slavnov, gen_slavnov_unchecked, generic_direction, izergin, izergin_stable, random_generic_set,
    slavnov_identity_sign, Limit, Sign, LIMIT_SCHEDULE,
};
use crate::linalg::{cond, det, pair, CMat};
use crate::sov_states::{separate_state_dense, SeparateStateSpec, Side, SovBasis};
use crate::spectrum_tq::{full_spectrum_with, Route};
use crate::{ChainParams, EigenRecord, Error, Result, Spectrum, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
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

fn prod_d(params: &ChainParams, roots: &[C64]) -> C64 {
    roots.iter().map(|&x| params.d(x)).product()
}

fn union(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().chain(b).copied().collect()
}

/// M[a,b] = ξ_a^{b} α(ξ_a)β(ξ_a) + (ξ_a−η)^{b} α(ξ_a−η) β̄(ξ_a−η).
pub fn sp_direct_matrix(params: &ChainParams, left: &SeparateStateSpec, right: &SeparateStateSpec) -> Result<CMat> {
    left.validate(params)?;
    right.validate(params)?;
    if left.side != Side::Left || right.side != Side::Right {
        return Err(Error::Shape("scalar product needs a left and a right spec".into()));
    }
    let n = params.n_sites();
    let bar = right.bar_shifted(params);
    Ok(CMat::from_fn(n, n, |a, b| {
        let x = params.xi[a];
        let p = b as i32;
        x.powi(p) * left.xi_values[a] * right.xi_values[a] + (x - params.eta).powi(p) * left.shifted_values[a] * bar[a]
    }))
}

/// det M / V(ξ).
pub fn sp_direct(params: &ChainParams, left: &SeparateStateSpec, right: &SeparateStateSpec) -> Result<C64> {
    Ok(det(&sp_direct_matrix(params, left, right)?) / vandermonde(&params.xi))
}

/// Condition number of the direct matrix.
pub fn sp_direct_condition(params: &ChainParams, left: &SeparateStateSpec, right: &SeparateStateSpec) -> Result<f64> {
    Ok(cond(&sp_direct_matrix(params, left, right)?))
}

/// (−1)^{N(R+S)} ∏d(u) A⁺_ξ[−E⁻_u], u = α ∪ β.
pub fn sp_a_form(params: &ChainParams, alpha: &[C64], beta: &[C64]) -> Result<C64> {
    let n = params.n_sites();
    let u = union(alpha, beta);
    let f = params.xi.iter().map(|&x| Ok(-e_pm(&u, x, params.eta, Sign::Minus)?)).collect::<Result<Vec<_>>>()?;
    Ok(parity(n * u.len()) * prod_d(params, &u) * a_pm(&params.xi, &f, params.eta, Sign::Plus)?)
}

fn b_form_with(params: &ChainParams, alpha: &[C64], beta: &[C64], inner: Sign) -> Result<C64> {
    let n = params.n_sites();
    let u = union(alpha, beta);
    let f = u.iter().map(|&x| Ok(-e_pm(&params.xi, x, params.eta, inner)?)).collect::<Result<Vec<_>>>()?;
    let pow = 2f64.powi(n as i32 - u.len() as i32);
    Ok(parity(n * u.len()) * pow * prod_d(params, &u) * a_pm(&u, &f, params.eta, Sign::Minus)?)
}

/// (−1)^{N(R+S)} 2^{N−R−S} ∏d(u) A⁻_u[−E⁺_ξ]. Smooth as the ξ_a merge.
pub fn sp_b_form(params: &ChainParams, alpha: &[C64], beta: &[C64]) -> Result<C64> {
    b_form_with(params, alpha, beta, Sign::Plus)
}

/// The B-form with E⁻_ξ inside; negative control.
pub fn sp_b_form_e_minus(params: &ChainParams, alpha: &[C64], beta: &[C64]) -> Result<C64> {
    b_form_with(params, alpha, beta, Sign::Minus)
}

fn izergin_form_with(params: &ChainParams, alpha: &[C64], beta: &[C64], stable: bool) -> Result<C64> {
    let n = params.n_sites();
    let u = union(alpha, beta);
    if u.len() != n {
        return Err(Error::Shape(format!("Izergin form needs R + S = {n}, got {}", u.len())));
    }
    let iz = if stable { izergin_stable(c(-1.0), &u, &params.xi, params.eta)? } else { izergin(c(-1.0), &u, &params.xi, params.eta)? };
    Ok(parity(n * (n + 1)) * prod_d(params, &u) * iz)
}

/// (−1)^{N(R+S+1)} ∏d(u) I^{(−1)}_N(u, ξ), for R + S = N.
pub fn sp_izergin_form(params: &ChainParams, alpha: &[C64], beta: &[C64]) -> Result<C64> {
    izergin_form_with(params, alpha, beta, false)
}

/// Izergin form through the divided-difference determinant.
pub fn sp_izergin_form_stable(params: &ChainParams, alpha: &[C64], beta: &[C64]) -> Result<C64> {
    izergin_form_with(params, alpha, beta, true)
}

/// Which branch of the eigenstate scalar product applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenCase {
    Vanishing,
    Balanced,
    Excess,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenProduct {
    pub case: EigenCase,
    /// (representation, value); Balanced carries both Izergin and Slavnov.
    pub values: Vec<(&'static str, C64)>,
}

impl EigenProduct {
    pub fn value(&self) -> C64 {
        self.values[self.values.len() - 1].1
    }
}

/// ∏_a Q_τ(ξ_a)/Q_{−τ}(ξ_a).
pub fn izergin_eigen_constant(params: &ChainParams, record: &EigenRecord) -> C64 {
    params.xi.iter().map(|&x| record.q_tau.eval(x) / record.q_minus_tau.eval(x)).product()
}

/// Balanced-case Slavnov form (−1)^M 2^{N−2M} ∏d(α)∏d(λ) S^{(−1)}_M(λ, α).
pub fn eigen_slavnov_form(params: &ChainParams, alpha: &[C64], roots: &[C64]) -> Result<C64> {
    let n = params.n_sites();
    let m = alpha.len();
    let pre = parity(m) * 2f64.powi(n as i32 - 2 * m as i32) * prod_d(params, alpha) * prod_d(params, roots);
    Ok(pre * gen_slavnov(c(-1.0), roots, alpha, &params.xi, params.eta)?)
}

/// Balanced-case Izergin form without the ∏Q_τ/Q_{−τ} constant.
pub fn eigen_izergin_form_bare(params: &ChainParams, alpha: &[C64], record: &EigenRecord) -> Result<C64> {
    let hat = record.minus_roots()?;
    let u = union(alpha, &hat);
    Ok(prod_d(params, alpha) * prod_d(params, &hat) * izergin(c(1.0), &u, &params.xi, params.eta)?)
}

/// ⟨α|Q_τ⟩ by case on M = |α| against R = deg Q_τ.
pub fn sp_with_eigenstate(params: &ChainParams, alpha: &[C64], record: &EigenRecord) -> Result<EigenProduct> {
    let n = params.n_sites();
    let m = alpha.len();
    let r = record.degree;
    let lam = &record.bethe_roots;
    if m < r {
        return Ok(EigenProduct { case: EigenCase::Vanishing, values: vec![("vanishing", c(0.0))] });
    }
    if m == r {
        let iz = izergin_eigen_constant(params, record) * eigen_izergin_form_bare(params, alpha, record)?;
        let sl = eigen_slavnov_form(params, alpha, lam)?;
        return Ok(EigenProduct { case: EigenCase::Balanced, values: vec![("izergin", iz), ("slavnov", sl)] });
    }
    let s = m - r;
    let sign = parity(n * (r + m) + r + s * (s + 1) / 2);
    let pre = sign * 2f64.powi(n as i32 - (m + r) as i32) * prod_d(params, alpha) * prod_d(params, lam);
    let v = pre * gen_slavnov(c(-1.0), lam, alpha, &params.xi, params.eta)?;
    Ok(EigenProduct { case: EigenCase::Excess, values: vec![("generalized-slavnov", v)] })
}

/// Φ_mn = ∂/∂λ_n log[a(λ_m)/d(λ_m) ∏_b (λ_m−λ_b−η)/(λ_m−λ_b+η)].
pub fn gaudin_matrix(params: &ChainParams, roots: &[C64]) -> CMat {
    let eta = params.eta;
    let r = roots.len();
    CMat::from_fn(r, r, |m, k| {
        let l = roots[m];
        if m == k {
            let mut v: C64 = params.xi.iter().map(|&x| 1.0 / (l - x + eta) - 1.0 / (l - x)).sum();
            for (b, &y) in roots.iter().enumerate() {
                if b != m {
                    v += 1.0 / (l - y - eta) - 1.0 / (l - y + eta);
                }
            }
            v
        } else {
            let dl = l - roots[k];
            -1.0 / (dl - eta) + 1.0 / (dl + eta)
        }
    })
}

/// Central finite-difference version of the same Jacobian.
pub fn gaudin_matrix_fd(params: &ChainParams, roots: &[C64], step: f64) -> CMat {
    let eta = params.eta;
    let logf = |pts: &[C64], m: usize| -> C64 {
        let l = pts[m];
        let mut v = (params.a(l) / params.d(l)).ln();
        for &y in pts {
            v += ((l - y - eta) / (l - y + eta)).ln();
        }
        v
    };
    let r = roots.len();
    CMat::from_fn(r, r, |m, k| {
        let mut p = roots.to_vec();
        let mut q = roots.to_vec();
        p[k] += step;
        q[k] -= step;
        // branch jumps of ln cancel in exp; differentiate the unwrapped difference
        let diff = logf(&p, m) - logf(&q, m);
        let two_pi = 2.0 * std::f64::consts::PI;
        let im = diff.im - two_pi * (diff.im / two_pi).round();
        C64::new(diff.re, im) / (2.0 * step)
    })
}

/// 2^{N−2R} (∏d(λ))² ∏_{m,n}(λ_m−λ_n+η) / ∏_{m≠n}(λ_m−λ_n) det Φ.
pub fn gaudin_norm(params: &ChainParams, record: &EigenRecord) -> Result<C64> {
    let lam = &record.bethe_roots;
    let n = params.n_sites();
    let r = lam.len();
    let scale = params.scale().max(1.0);
    let mut num = c(1.0);
    let mut den = c(1.0);
    for m in 0..r {
        for k in 0..r {
            num *= lam[m] - lam[k] + params.eta;
            if m != k {
                let dl = lam[m] - lam[k];
                if dl.norm() < 1e-8 * scale {
                    return Err(Error::DegenerateSet("coinciding Bethe roots; use the limit route".into()));
                }
                den *= dl;
            }
        }
    }
    let d2 = prod_d(params, lam).powi(2);
    Ok(2f64.powi(n as i32 - 2 * r as i32) * d2 * num / den * det(&gaudin_matrix(params, lam)))
}

/// Slavnov form of ⟨α|Q_τ⟩ at α = λ + εv, extrapolated to ε → 0.
pub fn gaudin_via_slavnov_limit(params: &ChainParams, record: &EigenRecord) -> Result<Limit> {
    let lam = &record.bethe_roots;
    let n = params.n_sites();
    let r = lam.len();
    let dir = generic_direction(r);
    let pre_sign = parity(r) * 2f64.powi(n as i32 - 2 * r as i32);
    coinciding_limit_along(
        |al| Ok(pre_sign * prod_d(params, al) * prod_d(params, lam) * gen_slavnov_unchecked(c(-1.0), lam, al, &params.xi, params.eta)?),
        lam,
        &dir,
        &LIMIT_SCHEDULE,
    )
}

/// Dense bilinear pairing of two separate states.
pub fn sp_dense(params: &ChainParams, basis: &SovBasis, left: &SeparateStateSpec, right: &SeparateStateSpec) -> Result<(C64, f64)> {
    let l = separate_state_dense(params, basis, left)?;
    let r = separate_state_dense(params, basis, right)?;
    Ok((pair(&l, &r), l.norm() * r.norm()))
}

/// Worst relative errors of each representation against the dense pairing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSweep {
    pub pairs: usize,
    pub direct: f64,
    pub a_form: f64,
    pub b_form: f64,
    pub izergin_form: f64,
    pub izergin_cases: usize,
    /// smallest error, relative to the value, of the E⁻ B-form
    pub b_form_rejected_best: f64,
}

fn rel_to(v: C64, dense: C64, norms: f64) -> f64 {
    (v - dense).norm() / dense.norm().max(1e-12 * norms).max(1e-300)
}

/// Random root sets, sizes 0..=N+1 each.
pub fn coherence_sweep(params: &ChainParams, basis: &SovBasis, seed: u64, pairs: usize) -> Result<CoherenceSweep> {
    let n = params.n_sites();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5c_a1a2);
    let mut out = CoherenceSweep { pairs, b_form_rejected_best: f64::INFINITY, ..Default::default() };
    let rad = params.scale() + 0.5;
    for i in 0..pairs {
        let (r, s) = if i % 4 == 0 {
            let r = rng.random_range(0..=n);
            (r, n - r)
        } else {
            (rng.random_range(0..=n + 1), rng.random_range(0..=n + 1))
        };
        let u = random_generic_set(&mut rng, r + s, rad, &params.xi, params.eta, 0.15);
        let (alpha, beta) = u.split_at(r);
        let left = SeparateStateSpec::from_roots(params, alpha, Side::Left)?;
        let right = SeparateStateSpec::from_roots(params, beta, Side::Right)?;
        let (dense, norms) = sp_dense(params, basis, &left, &right)?;
        out.direct = out.direct.max(rel_to(sp_direct(params, &left, &right)?, dense, norms));
        out.a_form = out.a_form.max(rel_to(sp_a_form(params, alpha, beta)?, dense, norms));
        out.b_form = out.b_form.max(rel_to(sp_b_form(params, alpha, beta)?, dense, norms));
        if r + s > 0 && dense.norm() > 1e-6 * norms {
            out.b_form_rejected_best = out.b_form_rejected_best.min((sp_b_form_e_minus(params, alpha, beta)? - dense).norm() / dense.norm());
        }
        if r + s == n {
            out.izergin_form = out.izergin_form.max(rel_to(sp_izergin_form(params, alpha, beta)?, dense, norms));
            out.izergin_cases += 1;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EigenSweep {
    pub cases: usize,
    pub vanishing: f64,
    pub balanced_izergin: f64,
    pub balanced_slavnov: f64,
    pub excess: f64,
    /// smallest error, relative to the value, of the Izergin form without ∏Q_τ/Q_{−τ}
    pub izergin_rejected_best: f64,
    pub gaudin: f64,
    pub gaudin_fd_matrix: f64,
    pub gaudin_limit: f64,
}

/// All eigenstates against random α of size 0..=N+1, plus norms.
pub fn eigen_sweep(spectrum: &Spectrum, basis: &SovBasis, seed: u64) -> Result<EigenSweep> {
    let params = &spectrum.params;
    let n = params.n_sites();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe16e_5ca1);
    let mut out = EigenSweep { izergin_rejected_best: f64::INFINITY, ..Default::default() };
    let rad = params.scale() + 0.5;
    for rec in &spectrum.records {
        let ket = separate_state_dense(params, basis, &SeparateStateSpec::from_roots(params, &rec.bethe_roots, Side::Right)?)?;
        let mut avoid = params.xi.clone();
        avoid.extend(&rec.bethe_roots);
        for m in 0..=n + 1 {
            let alpha = random_generic_set(&mut rng, m, rad, &avoid, params.eta, 0.15);
            let bra = separate_state_dense(params, basis, &SeparateStateSpec::from_roots(params, &alpha, Side::Left)?)?;
            let dense = pair(&bra, &ket);
            let norms = bra.norm() * ket.norm();
            let e = |v: C64| (v - dense).norm() / norms;
            let p = sp_with_eigenstate(params, &alpha, rec)?;
            out.cases += 1;
            match p.case {
                EigenCase::Vanishing => out.vanishing = out.vanishing.max(e(p.value()).max(dense.norm() / norms)),
                EigenCase::Balanced => {
                    out.balanced_izergin = out.balanced_izergin.max(e(p.values[0].1));
                    out.balanced_slavnov = out.balanced_slavnov.max(e(p.values[1].1));
                    if m > 0 && dense.norm() > 1e-6 * norms {
                        let v = eigen_izergin_form_bare(params, &alpha, rec)?;
                        out.izergin_rejected_best = out.izergin_rejected_best.min((v - dense).norm() / dense.norm());
                    }
                }
                EigenCase::Excess => out.excess = out.excess.max(e(p.value())),
            }
        }
        let bra = separate_state_dense(params, basis, &SeparateStateSpec::from_roots(params, &rec.bethe_roots, Side::Left)?)?;
        let norm = pair(&bra, &ket);
        let g = gaudin_norm(params, rec)?;
        out.gaudin = out.gaudin.max((g - norm).norm() / norm.norm());
        if rec.degree > 0 {
            let fd = gaudin_matrix_fd(params, &rec.bethe_roots, 1e-6);
            let an = gaudin_matrix(params, &rec.bethe_roots);
            out.gaudin_fd_matrix = out.gaudin_fd_matrix.max((fd - &an).norm() / an.norm());
        }
        let lim = gaudin_via_slavnov_limit(params, rec)?;
        out.gaudin_limit = out.gaudin_limit.max((lim.value - g).norm() / g.norm());
    }
    Ok(out)
}

/// Worst residuals of the on-shell Slavnov identities over a spectrum.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OnShellSweep {
    pub root_sets: usize,
    pub slavnov_balanced: f64,
    pub slavnov_excess: f64,
    pub half_filling: f64,
    pub half_filling_cases: usize,
    /// best error of the identity read without its sign, over S ≥ 1 or odd M
    pub unsigned_best: f64,
}

/// Balanced and excess Slavnov identities and the N = 2M corollary for every root set, `ysets` y-draws each.
pub fn on_shell_sweep(spectrum: &Spectrum, seed: u64, ysets: usize) -> Result<OnShellSweep> {
    use crate::determinant_engine::slavnov_identity_check;
    let params = &spectrum.params;
    let n = params.n_sites();
    let eta = params.eta;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0b_5e11);
    let mut out = OnShellSweep { root_sets: spectrum.records.len(), unsigned_best: f64::INFINITY, ..Default::default() };
    let rad = params.scale() + 0.5;
    for rec in &spectrum.records {
        let lam = &rec.bethe_roots;
        let m = lam.len();
        let mut avoid = params.xi.clone();
        avoid.extend(lam);
        for k in 0..ysets {
            let s = k % 3;
            let ys = random_generic_set(&mut rng, m + s, rad, &avoid, eta, 0.15);
            let (lhs, rhs) = slavnov_identity_check(c(-1.0), lam, &ys, &params.xi, eta)?;
            let e = (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-300);
            if s == 0 {
                out.slavnov_balanced = out.slavnov_balanced.max(e);
            } else {
                out.slavnov_excess = out.slavnov_excess.max(e);
            }
            if slavnov_identity_sign(m, s) < 0.0 {
                out.unsigned_best = out.unsigned_best.min((lhs + rhs).norm() / lhs.norm().max(rhs.norm()));
            }
            if s == 0 && 2 * m == n {
                let iz = izergin(c(-1.0), &union(lam, &ys), &params.xi, eta)?;
                let v = parity(m) * parity(n) * iz;
                out.half_filling = out.half_filling.max((lhs - v).norm() / lhs.norm().max(v.norm()));
                out.half_filling_cases += 1;
            }
        }
    }
    Ok(out)
}

/// One ε-point of the near-homogeneous stress.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StressPoint {
    pub eps: f64,
    pub b_form: C64,
    pub izergin_form: C64,
    pub slavnov_form: C64,
    /// raw direct determinant, relative to the B form
    pub raw_direct_dev: f64,
    pub raw_condition: f64,
    pub bethe: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomogeneousStress {
    pub n: usize,
    pub points: Vec<StressPoint>,
    /// successive differences, relative to the last value
    pub b_diffs: Vec<f64>,
    pub izergin_diffs: Vec<f64>,
    pub slavnov_diffs: Vec<f64>,
    /// smallest d_k / d_{k+1} over all three forms, times ε_{k+1}/ε_k
    pub min_shrink: f64,
    /// log-log slope of cond over decades where cond stays below COND_CEILING
    pub cond_slope: f64,
    pub cond_decades: usize,
}

const STRESS_POINTS: [(f64, f64); 8] =
    [(0.3, 0.7), (-0.8, 0.2), (1.1, -0.4), (-0.2, -0.9), (0.5, -1.1), (-0.4, -0.3), (0.9, 0.6), (-1.2, -0.5)];

/// Cond values above this are not resolvable in double precision.
pub const COND_CEILING: f64 = 1e15;

fn tau_distance(a: &crate::ComplexPoly, b: &crate::ComplexPoly) -> f64 {
    let n = a.coeffs.len().max(b.coeffs.len());
    (0..n)
        .map(|k| (a.coeffs.get(k).copied().unwrap_or_default() - b.coeffs.get(k).copied().unwrap_or_default()).norm())
        .fold(0.0, f64::max)
}

/// ξ_a = ε·a, η = 1: the B, Izergin and Slavnov forms along a decreasing ε
/// list, with the eigenstate of degree ⌊N/2⌋ tracked by nearest τ.
pub fn homogeneous_stress(n: usize, eps_list: &[f64], seed: u64) -> Result<HomogeneousStress> {
    if n < 2 || n > STRESS_POINTS.len() || eps_list.len() < 2 {
        return Err(Error::InvalidArgument("stress needs 2 <= n <= 8 and at least two eps values".into()));
    }
    let m = n / 2;
    let pts: Vec<C64> = STRESS_POINTS.iter().map(|&(x, y)| C64::new(x, y)).collect();
    let (alpha, beta) = (&pts[..m], &pts[m..n]);
    let mut prev_tau: Option<crate::ComplexPoly> = None;
    let mut points = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let xi = (1..=n).map(|a| c(eps * a as f64)).collect();
        let params = ChainParams::limit_family(c(1.0), xi);
        let spec = full_spectrum_with(&params, seed, Route::Coefficients)?;
        let cands = spec.records.iter().filter(|r| r.degree == m);
        let rec = match &prev_tau {
            None => cands.into_iter().next(),
            Some(t) => cands.min_by(|x, y| tau_distance(&x.tau, t).partial_cmp(&tau_distance(&y.tau, t)).unwrap()),
        }
        .ok_or_else(|| Error::InvalidArgument("no eigenstate of the tracked degree".into()))?;
        prev_tau = Some(rec.tau.clone());
        let b_form = sp_b_form(&params, alpha, beta)?;
        let left = SeparateStateSpec::from_roots(&params, alpha, Side::Left)?;
        let right = SeparateStateSpec::from_roots(&params, beta, Side::Right)?;
        points.push(StressPoint {
            eps,
            b_form,
            izergin_form: sp_izergin_form_stable(&params, alpha, beta)?,
            slavnov_form: eigen_slavnov_form(&params, alpha, &rec.bethe_roots)?,
            raw_direct_dev: crate::rel_err(sp_direct(&params, &left, &right)?, b_form, 1e-300),
            raw_condition: sp_direct_condition(&params, &left, &right)?,
            bethe: rec.residuals.bethe,
        });
    }
    let diffs = |f: fn(&StressPoint) -> C64| -> Vec<f64> {
        let last = f(points.last().unwrap()).norm().max(1e-300);
        points.windows(2).map(|w| (f(&w[1]) - f(&w[0])).norm() / last).collect()
    };
    let b_diffs = diffs(|p| p.b_form);
    let izergin_diffs = diffs(|p| p.izergin_form);
    let slavnov_diffs = diffs(|p| p.slavnov_form);
    let mut min_shrink = f64::INFINITY;
    for d in [&b_diffs, &izergin_diffs, &slavnov_diffs] {
        for k in 0..d.len().saturating_sub(1) {
            let ratio = eps_list[k + 1] / eps_list[k];
            min_shrink = min_shrink.min(d[k] / d[k + 1].max(1e-300) * ratio);
        }
    }
    let (mut slope, mut decades) = (f64::INFINITY, 0);
    for w in points.windows(2) {
        if w[1].raw_condition < COND_CEILING {
            slope = slope.min((w[1].raw_condition / w[0].raw_condition).log10() / (w[0].eps / w[1].eps).log10());
            decades += 1;
        }
    }
    Ok(HomogeneousStress { n, points, b_diffs, izergin_diffs, slavnov_diffs, min_shrink, cond_slope: slope, cond_decades: decades })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_model::sample_generic_params;
    use crate::spectrum_tq::full_spectrum;
    use crate::{c64, rel_err};

    #[test]
    fn n1_fixtures() {
        let p = ChainParams::fixture_n1();
        let one_l = SeparateStateSpec::one(&p, Side::Left);
        let one_r = SeparateStateSpec::one(&p, Side::Right);
        assert!((sp_direct(&p, &one_l, &one_r).unwrap() - 2.0).norm() < 1e-14);
        assert!((sp_a_form(&p, &[], &[]).unwrap() - 2.0).norm() < 1e-14);
        let h = [c(-0.5)];
        assert!(sp_a_form(&p, &h, &[]).unwrap().norm() < 1e-14);
        assert!(sp_izergin_form(&p, &h, &[]).unwrap().norm() < 1e-14);
        assert!(matches!(sp_izergin_form(&p, &[], &[]), Err(Error::Shape(_))));
        let s = full_spectrum(&p, 1).unwrap();
        let (minus, plus) = (&s.records[0], &s.records[1]);
        assert!(sp_with_eigenstate(&p, &[], plus).unwrap().value().norm() < 1e-15);
        assert!((sp_with_eigenstate(&p, &[], minus).unwrap().value() - 2.0).norm() < 1e-14);
        assert!((gaudin_norm(&p, minus).unwrap() - 2.0).norm() < 1e-14);
        assert!((gaudin_norm(&p, plus).unwrap() - 0.5).norm() < 1e-12);
        let phi = gaudin_matrix(&p, &[c(-0.5)]);
        assert!((phi[(0, 0)] - 4.0).norm() < 1e-14);
    }

    #[test]
    fn n2_fixture_forms() {
        let p = ChainParams::fixture_n2();
        let b = SovBasis::new(&p);
        let alpha = [c64(0.4, 0.7)];
        let beta = [c64(-1.1, 0.3)];
        let l = SeparateStateSpec::from_roots(&p, &alpha, Side::Left).unwrap();
        let r = SeparateStateSpec::from_roots(&p, &beta, Side::Right).unwrap();
        let (dense, _) = sp_dense(&p, &b, &l, &r).unwrap();
        for v in [sp_direct(&p, &l, &r).unwrap(), sp_a_form(&p, &alpha, &beta).unwrap(), sp_b_form(&p, &alpha, &beta).unwrap(), sp_izergin_form(&p, &alpha, &beta).unwrap()] {
            assert!(rel_err(v, dense, 1e-300) < 1e-10);
        }
        assert!(rel_err(sp_b_form_e_minus(&p, &alpha, &beta).unwrap(), dense, 1e-300) > 1e-3);
        let s = full_spectrum(&p, 2).unwrap();
        for rec in &s.records {
            let g = gaudin_norm(&p, rec).unwrap();
            let bra = separate_state_dense(&p, &b, &SeparateStateSpec::from_roots(&p, &rec.bethe_roots, Side::Left).unwrap()).unwrap();
            let ket = separate_state_dense(&p, &b, &SeparateStateSpec::from_roots(&p, &rec.bethe_roots, Side::Right).unwrap()).unwrap();
            assert!(rel_err(g, pair(&bra, &ket), 1e-300) < 1e-9);
        }
    }

    #[test]
    fn orthogonal_eigenstates() {
        let p = sample_generic_params(3, 9, 0.3).unwrap();
        let s = full_spectrum(&p, 9).unwrap();
        for x in &s.records {
            for y in &s.records {
                if std::ptr::eq(x, y) {
                    continue;
                }
                let l = SeparateStateSpec::from_roots(&p, &x.bethe_roots, Side::Left).unwrap();
                let r = SeparateStateSpec::from_roots(&p, &y.bethe_roots, Side::Right).unwrap();
                let v = sp_direct(&p, &l, &r).unwrap();
                let g = gaudin_norm(&p, x).unwrap().norm().sqrt() * gaudin_norm(&p, y).unwrap().norm().sqrt();
                assert!(v.norm() <= 1e-9 * g.max(1.0));
            }
        }
    }

    #[test]
    fn sweeps_small_n() {
        for n in 1..=4 {
            let p = sample_generic_params(n, 300 + n as u64, 0.3).unwrap();
            let b = SovBasis::new(&p);
            let co = coherence_sweep(&p, &b, 1, 12).unwrap();
            assert!(co.direct < 1e-9 && co.a_form < 1e-9 && co.b_form < 1e-9 && co.izergin_form < 1e-9, "{co:?}");
            let s = full_spectrum(&p, 3).unwrap();
            let ei = eigen_sweep(&s, &b, 2).unwrap();
            assert!(ei.vanishing < 1e-9 && ei.balanced_izergin < 1e-9 && ei.balanced_slavnov < 1e-9 && ei.excess < 1e-9, "{ei:?}");
            assert!(ei.gaudin < 1e-8 && ei.gaudin_fd_matrix < 1e-5 && ei.gaudin_limit < 1e-6, "{ei:?}");
            let os = on_shell_sweep(&s, 4, 6).unwrap();
            assert!(os.slavnov_balanced < 1e-9 && os.slavnov_excess < 1e-9 && os.half_filling < 1e-9, "{os:?}");
        }
    }

    #[test]
    fn stress_n2() {
        let st = homogeneous_stress(2, &[1e-2, 1e-3, 1e-4], 5).unwrap();
        assert!(st.min_shrink > 0.3, "{st:?}");
        assert!(st.points.iter().all(|p| p.bethe < 1e-8));
        assert!((st.points[0].b_form - st.points[0].izergin_form).norm() < 1e-9 * st.points[0].b_form.norm());
    }
}
