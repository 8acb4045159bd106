//! Transfer-matrix eigenvalues τ(λ), Baxter polynomials Q_τ, Bethe roots,
//! and the p-q decomposition.

use crate::dense_oracle::{diagonalize_transfer_auto, transfer_antiperiodic, EigenTriple, StateVector};
use crate::linalg::{cond, pair, sandwich, solve, CMat, CVec};
use crate::{ChainParams, ComplexPoly, Error, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Relative tolerance for detecting the degree of Q.
pub const Q_DEGREE_TOL: f64 = 1e-8;
const AUX_RETRIES: usize = 16;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub discrete_system: f64,
    pub functional_tq: f64,
    pub bethe: f64,
    pub wronskian: f64,
    pub held_out_tau: f64,
    pub uniqueness: f64,
    pub pq_reconstruction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub tau: ComplexPoly,
    pub q_tau: ComplexPoly,
    pub q_minus_tau: ComplexPoly,
    pub bethe_roots: Vec<C64>,
    /// R = deg Q_τ
    pub degree: usize,
    /// eigenvalue at the diagonalization point
    pub value_at_ref: C64,
    /// index of the −τ record
    pub partner: usize,
    /// sign s in τ = s·½[p(λ−η)q(λ+η) − q(λ−η)p(λ+η)]
    pub pq_sign: i8,
    pub residuals: Residuals,
}

impl EigenRecord {
    pub fn minus_roots(&self) -> Result<Vec<C64>> {
        roots_or_empty(&self.q_minus_tau)
    }
}

pub fn roots_or_empty(p: &ComplexPoly) -> Result<Vec<C64>> {
    if p.degree() == Some(0) {
        Ok(vec![])
    } else {
        p.roots()
    }
}

/// A full spectrum with the dense eigenvectors it came from.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub params: ChainParams,
    pub records: Vec<EigenRecord>,
    pub vectors: Vec<EigenTriple>,
}

/// ⟨l|T(λ)|r⟩ / ⟨l|r⟩.
pub fn rayleigh(params: &ChainParams, right: &StateVector, left: &StateVector, l: C64) -> Result<C64> {
    let den = pair(left, right);
    if den.norm() < 1e-12 * left.norm() * right.norm() {
        return Err(Error::Biorthogonality);
    }
    Ok(sandwich(left, &transfer_antiperiodic(params, l), right) / den)
}

/// τ interpolated from Rayleigh quotients at the given nodes.
pub fn extract_tau_at(params: &ChainParams, right: &StateVector, left: &StateVector, nodes: &[C64]) -> Result<ComplexPoly> {
    let vals = nodes.iter().map(|&x| rayleigh(params, right, left, x)).collect::<Result<Vec<_>>>()?;
    ComplexPoly::lagrange_interpolate(nodes, &vals)
}

/// τ interpolated at λ = ξ_a.
pub fn extract_tau(params: &ChainParams, right: &StateVector, left: &StateVector) -> Result<ComplexPoly> {
    extract_tau_at(params, right, left, &params.xi)
}

/// Fixed generic points, used when the ξ_a are too close to serve as nodes.
pub fn generic_nodes(n: usize) -> Vec<C64> {
    (0..n).map(|k| C64::from_polar(0.9 + 0.31 * k as f64, 0.6 + 1.7 * k as f64)).collect()
}

/// max_n |τ(ξ_n)τ(ξ_n−η) + a(ξ_n)d(ξ_n−η)| relative to |a·d|.
pub fn check_discrete_system(params: &ChainParams, tau: &ComplexPoly) -> f64 {
    params
        .xi
        .iter()
        .map(|&x| {
            let ad = params.a(x) * params.d(x - params.eta);
            (tau.eval(x) * tau.eval(x - params.eta) + ad).norm() / ad.norm().max(1e-300)
        })
        .fold(0.0, f64::max)
}

/// Relative residual of τQ = −aQ(λ−η) + dQ(λ+η) at the given points.
pub fn tq_functional_residual(params: &ChainParams, tau: &ComplexPoly, q: &ComplexPoly, points: &[C64]) -> f64 {
    points
        .iter()
        .map(|&l| {
            let lhs = tau.eval(l) * q.eval(l);
            let m = params.a(l) * q.eval(l - params.eta);
            let p = params.d(l) * q.eval(l + params.eta);
            (lhs + m - p).norm() / (m.norm() + p.norm()).max(1e-300)
        })
        .fold(0.0, f64::max)
}

/// Matrix layout for the Cramer system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemLayout {
    /// C[a,b] = δ_ab τ(ξ_a)/a(ξ_a) + L_b(ξ_a − η)
    Working,
    /// the index-transposed reading, kept as a negative control
    Transposed,
}

/// Lagrange basis L_b(x) over the nodes.
fn lagrange_basis(nodes: &[C64], b: usize, x: C64) -> C64 {
    nodes.iter().enumerate().filter(|&(c, _)| c != b).map(|(_, &y)| (x - y) / (nodes[b] - y)).product()
}

/// Result of one T-Q linear solve.
#[derive(Debug, Clone)]
pub struct QSolve {
    pub q: ComplexPoly,
    pub aux: C64,
    pub condition: f64,
}

/// Solve for Q with a given auxiliary point ξ_{N+1} (Q(ξ_{N+1}) = 1).
pub fn solve_q_with_aux(params: &ChainParams, tau: &ComplexPoly, aux: C64, layout: SystemLayout) -> Result<QSolve> {
    let n = params.n_sites();
    let mut nodes = params.xi.clone();
    nodes.push(aux);
    let mut c = CMat::zeros(n, n);
    let mut rhs = CVec::zeros(n);
    for a in 0..n {
        for b in 0..n {
            let diag = if a == b { tau.eval(nodes[a]) / params.a(nodes[a]) } else { C64::new(0.0, 0.0) };
            let off = match layout {
                SystemLayout::Working => lagrange_basis(&nodes, b, nodes[a] - params.eta),
                SystemLayout::Transposed => lagrange_basis(&nodes, a, nodes[b] - params.eta),
            };
            c[(a, b)] = diag + off;
        }
        rhs[a] = -lagrange_basis(&nodes, n, nodes[a] - params.eta);
    }
    let condition = cond(&c);
    let x = solve(&c, &rhs)?;
    let mut vals: Vec<C64> = x.iter().copied().collect();
    vals.push(C64::new(1.0, 0.0));
    let raw = ComplexPoly::lagrange_interpolate(&nodes, &vals)?;
    let q = raw.trimmed(Q_DEGREE_TOL).monic()?;
    Ok(QSolve { q, aux, condition })
}

/// Draw ξ_{N+1} away from every ξ_a and ξ_a − η.
pub fn draw_aux(params: &ChainParams, rng: &mut ChaCha8Rng) -> C64 {
    let rad = 2.0 * (params.scale() + params.eta.norm());
    let sep = params.margin.max(0.3 * params.eta.norm());
    loop {
        let z = C64::new(rng.random_range(-rad..rad), rng.random_range(-rad..rad));
        let ok = params.xi.iter().all(|&x| (z - x).norm() >= sep && (z - x + params.eta).norm() >= sep);
        if ok {
            return z;
        }
    }
}

/// Working T-Q solve with bounded re-draws of the auxiliary point.
pub fn solve_q_from_tau(params: &ChainParams, tau: &ComplexPoly, rng: &mut ChaCha8Rng) -> Result<QSolve> {
    let scale = params.scale().max(1.0);
    for _ in 0..AUX_RETRIES {
        let aux = draw_aux(params, rng);
        let s = match solve_q_with_aux(params, tau, aux, SystemLayout::Working) {
            Ok(s) => s,
            Err(Error::Singular) => continue,
            Err(e) => return Err(e),
        };
        if s.condition > 1e12 {
            continue;
        }
        let qmax = s.q.max_coeff();
        let qmin = params.xi.iter().map(|&x| s.q.eval(x).norm()).fold(f64::INFINITY, f64::min);
        if qmin < 1e-10 * qmax * scale.powi(s.q.degree().unwrap_or(0) as i32) {
            continue;
        }
        return Ok(s);
    }
    Err(Error::RetryExhausted("T-Q linear system".into()))
}

/// Q as the null vector of the coefficient-space T-Q map on degree ≤ N.
/// Conditioning does not depend on the ξ spacing. Returns (Q, σ_min/σ_max, σ_next/σ_max).
pub fn solve_q_coefficient(params: &ChainParams, tau: &ComplexPoly) -> Result<(ComplexPoly, f64, f64)> {
    let n = params.n_sites();
    let a_poly = ComplexPoly::from_roots(&params.xi.iter().map(|x| x - params.eta).collect::<Vec<_>>())?;
    let d_poly = ComplexPoly::from_roots(&params.xi)?;
    let rows = 2 * n + 1;
    let mut m = CMat::zeros(rows, n + 1);
    for k in 0..=n {
        let mut e = vec![C64::new(0.0, 0.0); k + 1];
        e[k] = C64::new(1.0, 0.0);
        let mono = ComplexPoly::from_coeffs(e);
        let col = &(&(tau * &mono) + &(&a_poly * &mono.shift(-params.eta))) - &(&d_poly * &mono.shift(params.eta));
        for (i, c) in col.coeffs.iter().enumerate() {
            m[(i, k)] = *c;
        }
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.ok_or(Error::Singular)?;
    let s = &svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[i].partial_cmp(&s[j]).unwrap());
    let kmin = order[0];
    let smax = s[order[s.len() - 1]];
    let gap = if s.len() > 1 { s[order[1]] / smax } else { 1.0 };
    let coeffs: Vec<C64> = (0..=n).map(|k| vt[(kmin, k)].conj()).collect();
    let q = ComplexPoly::from_coeffs(coeffs).trimmed(1e-9).monic()?;
    Ok((q, s[kmin] / smax, gap))
}

/// max_a |a(λ_a)/d(λ_a) ∏_b (λ_a−λ_b−η)/(λ_a−λ_b+η) − 1|, b = a included.
pub fn bethe_residuals(params: &ChainParams, roots: &[C64]) -> Result<f64> {
    let scale = params.scale().max(1.0);
    let mut worst = 0.0f64;
    for &x in roots {
        for &xi in &params.xi {
            if (x - xi).norm() < 1e-8 * scale {
                return Err(Error::PoleCollision(format!("root {x} at inhomogeneity {xi}")));
            }
        }
        let mut v = params.a(x) / params.d(x);
        for &y in roots {
            let den = x - y + params.eta;
            if den.norm() < 1e-12 * scale {
                return Err(Error::PoleCollision(format!("roots {x}, {y} differ by −η")));
            }
            v *= (x - y - params.eta) / den;
        }
        worst = worst.max((v - 1.0).norm());
    }
    Ok(worst)
}

/// (q, p, sign, wronskian residual, reconstruction residual).
pub struct PqDecomposition {
    pub q: ComplexPoly,
    pub p: ComplexPoly,
    pub sign: i8,
    pub wronskian: f64,
    pub reconstruction: f64,
}

/// q = lower-degree of {Q_τ, Q_{−τ}}, p = the other, both monic.
pub fn pq_decomposition(params: &ChainParams, tau: &ComplexPoly, q_tau: &ComplexPoly, q_minus: &ComplexPoly, points: &[C64]) -> PqDecomposition {
    let (q, p, q_is_tau) = if q_tau.degree() <= q_minus.degree() {
        (q_tau.clone(), q_minus.clone(), true)
    } else {
        (q_minus.clone(), q_tau.clone(), false)
    };
    let eta = params.eta;
    let half = C64::new(0.5, 0.0);
    let mut wr = 0.0f64;
    let mut rec = [0.0f64; 2];
    for &l in points {
        let w = half * (p.eval(l) * q.eval(l - eta) + q.eval(l) * p.eval(l - eta));
        let d = params.d(l);
        wr = wr.max((w - d).norm() / d.norm().max(1e-300));
        let st = half * (p.eval(l - eta) * q.eval(l + eta) - q.eval(l - eta) * p.eval(l + eta));
        let t = tau.eval(l);
        let sc = st.norm().max(t.norm()).max(1e-300);
        rec[0] = rec[0].max((t - st).norm() / sc);
        rec[1] = rec[1].max((t + st).norm() / sc);
    }
    let sign: i8 = if q_is_tau { 1 } else { -1 };
    let reconstruction = if sign == 1 { rec[0] } else { rec[1] };
    PqDecomposition { q, p, sign, wronskian: wr, reconstruction }
}

/// Which T-Q route produced the polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// τ at the ξ_a, Cramer system on ξ_1..ξ_{N+1}
    Nodes,
    /// τ at fixed generic points, coefficient-space null vector
    Coefficients,
}

fn check_points(params: &ChainParams, count: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let rad = params.scale() + params.eta.norm();
    (0..count).map(|_| C64::new(rng.random_range(-rad..rad), rng.random_range(-rad..rad))).collect()
}

/// All 2^N eigen-records at the given parameters.
pub fn full_spectrum(params: &ChainParams, seed: u64) -> Result<Spectrum> {
    full_spectrum_with(params, seed, Route::Nodes)
}

pub fn full_spectrum_with(params: &ChainParams, seed: u64, route: Route) -> Result<Spectrum> {
    let n = params.n_sites();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_a11);
    let vectors = diagonalize_transfer_auto(params)?;
    let mut records = Vec::with_capacity(vectors.len());
    for tr in &vectors {
        let held = check_points(params, 1, &mut rng)[0];
        let (tau, q, uniq) = match route {
            Route::Nodes => {
                let tau = extract_tau(params, &tr.right, &tr.left)?;
                let s1 = solve_q_from_tau(params, &tau, &mut rng)?;
                let s2 = solve_q_from_tau(params, &tau, &mut rng)?;
                let uniq = coeff_distance(&s1.q, &s2.q);
                (tau, s1.q, uniq)
            }
            Route::Coefficients => {
                let tau = extract_tau_at(params, &tr.right, &tr.left, &generic_nodes(n))?;
                let (q, _, _) = solve_q_coefficient(params, &tau)?;
                (tau, q, 0.0)
            }
        };
        let rq = rayleigh(params, &tr.right, &tr.left, held)?;
        let held_out = (rq - tau.eval(held)).norm() / rq.norm().max(1.0);
        let roots = roots_or_empty(&q)?;
        let pts = check_points(params, 2 * n + 2, &mut rng);
        let residuals = Residuals {
            discrete_system: check_discrete_system(params, &tau),
            functional_tq: tq_functional_residual(params, &tau, &q, &pts),
            // roots a distance η apart make the ratio form singular; such a record
            // keeps an infinite residual instead of aborting the whole spectrum
            bethe: match bethe_residuals(params, &roots) {
                Err(Error::PoleCollision(_)) => f64::INFINITY,
                other => other?,
            },
            held_out_tau: held_out,
            uniqueness: uniq,
            ..Default::default()
        };
        records.push(EigenRecord {
            degree: roots.len(),
            tau,
            q_minus_tau: ComplexPoly::one(),
            q_tau: q,
            bethe_roots: roots,
            value_at_ref: tr.value,
            partner: usize::MAX,
            pq_sign: 0,
            residuals,
        });
    }
    pair_records(params, &mut records, &mut rng)?;
    Ok(Spectrum { params: params.clone(), records, vectors })
}

fn coeff_distance(p: &ComplexPoly, q: &ComplexPoly) -> f64 {
    let n = p.coeffs.len().max(q.coeffs.len());
    let s = p.max_coeff().max(q.max_coeff()).max(1e-300);
    (0..n)
        .map(|k| (p.coeffs.get(k).copied().unwrap_or_default() - q.coeffs.get(k).copied().unwrap_or_default()).norm())
        .fold(0.0, f64::max)
        / s
}

fn padded(p: &ComplexPoly, n: usize) -> Vec<C64> {
    (0..n).map(|k| p.coeffs.get(k).copied().unwrap_or_default()).collect()
}

/// Match τ ↔ −τ and fill Q_{−τ}, p-q data.
fn pair_records(params: &ChainParams, records: &mut [EigenRecord], rng: &mut ChaCha8Rng) -> Result<()> {
    let n = params.n_sites();
    let taus: Vec<Vec<C64>> = records.iter().map(|r| padded(&r.tau, n)).collect();
    let scale = taus.iter().flatten().map(|c| c.norm()).fold(1e-300, f64::max);
    for i in 0..records.len() {
        let mut best = (usize::MAX, f64::INFINITY);
        for j in 0..records.len() {
            let d = taus[i].iter().zip(&taus[j]).map(|(a, b)| (a + b).norm()).fold(0.0, f64::max);
            if d < best.1 {
                best = (j, d);
            }
        }
        if best.1 > 1e-7 * scale {
            return Err(Error::SpectrumPairing(best.1 / scale));
        }
        records[i].partner = best.0;
    }
    let pts = check_points(params, 2 * n, rng);
    for i in 0..records.len() {
        let j = records[i].partner;
        let qm = records[j].q_tau.clone();
        let pq = pq_decomposition(params, &records[i].tau, &records[i].q_tau, &qm, &pts);
        records[i].q_minus_tau = qm;
        records[i].pq_sign = pq.sign;
        records[i].residuals.wronskian = pq.wronskian;
        records[i].residuals.pq_reconstruction = pq.reconstruction;
    }
    Ok(())
}

/// Leading coefficient of τ at λ^{N−1} (zero if τ has lower degree).
pub fn tau_top_coefficient(params: &ChainParams, tau: &ComplexPoly) -> C64 {
    tau.coeffs.get(params.n_sites() - 1).copied().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_model::sample_generic_params;
    use crate::c64;
    use crate::dense_oracle::product_state;
    use crate::sov_states::{separate_state_dense, SeparateStateSpec, Side, SovBasis};

    fn r(x: f64) -> C64 {
        c64(x, 0.0)
    }

    #[test]
    fn n1_closed_forms() {
        let p = ChainParams::fixture_n1();
        let v = product_state(r(1.0), r(-1.0), 1);
        let tau = extract_tau(&p, &v, &v).unwrap();
        assert!((tau.eval(r(0.7)) + 1.0).norm() < 1e-14);
        let w = product_state(r(1.0), r(1.0), 1);
        let tau_p = extract_tau(&p, &w, &w).unwrap();
        assert!((tau_p.eval(r(-3.0)) - 1.0).norm() < 1e-14);
        assert!(check_discrete_system(&p, &tau) < 1e-14);
        assert!(check_discrete_system(&p, &tau_p) < 1e-14);
        let bad = &tau_p + &ComplexPoly::constant(r(0.1));
        assert!(check_discrete_system(&p, &bad) > 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let qm = solve_q_from_tau(&p, &tau, &mut rng).unwrap().q;
        assert_eq!(qm.degree(), Some(0));
        let qp = solve_q_from_tau(&p, &tau_p, &mut rng).unwrap().q;
        assert!((qp.coeffs[0] - 0.5).norm() < 1e-12 && qp.degree() == Some(1));
        assert!(bethe_residuals(&p, &[r(-0.5)]).unwrap() < 1e-14);
        assert_eq!(bethe_residuals(&p, &[]).unwrap(), 0.0);
        assert!(bethe_residuals(&p, &[r(0.0)]).is_err());
    }

    #[test]
    fn n1_spectrum_records() {
        let s = full_spectrum(&ChainParams::fixture_n1(), 3).unwrap();
        assert_eq!(s.records.len(), 2);
        let minus = &s.records[0];
        let plus = &s.records[1];
        assert_eq!(minus.degree, 0);
        assert_eq!(plus.degree, 1);
        assert!((plus.bethe_roots[0] + 0.5).norm() < 1e-12);
        assert_eq!(minus.partner, 1);
        assert_eq!(plus.q_minus_tau.degree(), Some(0));
        let pq = pq_decomposition(&s.params, &plus.tau, &plus.q_tau, &plus.q_minus_tau, &[r(0.3), c64(1.0, 2.0)]);
        assert!(pq.reconstruction < 1e-12 && pq.wronskian < 1e-12);
    }

    #[test]
    fn transposed_layout_fails() {
        let p = sample_generic_params(3, 4, 0.3).unwrap();
        let s = full_spectrum(&p, 4).unwrap();
        let mut worst = 0.0f64;
        for rec in &s.records {
            let aux = c64(1.3, 2.1);
            if let Ok(t) = solve_q_with_aux(&p, &rec.tau, aux, SystemLayout::Transposed) {
                worst = worst.max(tq_functional_residual(&p, &rec.tau, &t.q, &[c64(0.3, 0.2), c64(-1.0, 0.5)]));
            } else {
                worst = f64::INFINITY;
            }
        }
        assert!(worst > 1e-3);
    }

    #[test]
    fn spectrum_gates_small_n() {
        for n in 1..=5 {
            let p = sample_generic_params(n, 100 + n as u64, 0.3).unwrap();
            let s = full_spectrum(&p, 7).unwrap();
            assert_eq!(s.records.len(), 1 << n);
            let b = SovBasis::new(&p);
            let lam = c64(0.23, -0.61);
            let t = transfer_antiperiodic(&p, lam);
            for rec in &s.records {
                let res = &rec.residuals;
                assert!(res.functional_tq < 1e-8 && res.bethe < 1e-7 && res.discrete_system < 1e-9, "{res:?}");
                assert!(res.uniqueness < 1e-9 && res.wronskian < 1e-8 && res.pq_reconstruction < 1e-8, "{res:?}");
                assert!(res.held_out_tau < 1e-9);
                assert_eq!(rec.degree + rec.q_minus_tau.degree().unwrap(), n);
                assert!(s.records[rec.partner].partner < s.records.len());
                let top = tau_top_coefficient(&p, &rec.tau);
                assert!((top - p.eta * (2.0 * rec.degree as f64 - n as f64)).norm() < 1e-8);
                for side in [Side::Right, Side::Left] {
                    let v = separate_state_dense(&p, &b, &SeparateStateSpec::from_roots(&p, &rec.bethe_roots, side).unwrap()).unwrap();
                    let tv = match side {
                        Side::Right => &t * &v,
                        Side::Left => t.tr_mul(&v),
                    };
                    assert!((tv - &v * rec.tau.eval(lam)).norm() <= 1e-8 * v.norm() * (1.0 + rec.tau.eval(lam).norm()));
                }
            }
        }
    }

    #[test]
    fn eigenstates_from_both_references() {
        use crate::sov_states::{separate_state_aba, AbaBase};
        for n in 1..=4 {
            let p = sample_generic_params(n, 40 + n as u64, 0.3).unwrap();
            let s = full_spectrum(&p, 1).unwrap();
            let b = SovBasis::new(&p);
            for rec in &s.records {
                let hat = rec.minus_roots().unwrap();
                for side in [Side::Right, Side::Left] {
                    let want = separate_state_dense(&p, &b, &SeparateStateSpec::from_roots(&p, &rec.bethe_roots, side).unwrap()).unwrap();
                    let one = separate_state_aba(&p, &b, &rec.bethe_roots, &AbaBase::One, side).unwrap();
                    let alt = separate_state_aba(&p, &b, &hat, &AbaBase::OneAlt { target: rec.bethe_roots.clone() }, side).unwrap();
                    assert!((&want - one).norm() <= 1e-11 * want.norm());
                    assert!((&want - alt).norm() <= 1e-11 * want.norm());
                }
            }
        }
    }

    #[test]
    fn coefficient_route_agrees_with_nodes() {
        let p = sample_generic_params(4, 77, 0.3).unwrap();
        let a = full_spectrum_with(&p, 1, Route::Nodes).unwrap();
        let b = full_spectrum_with(&p, 1, Route::Coefficients).unwrap();
        for (x, y) in a.records.iter().zip(&b.records) {
            assert!(coeff_distance(&x.q_tau, &y.q_tau) < 1e-8);
            assert!(y.residuals.functional_tq < 1e-8);
        }
    }
}
