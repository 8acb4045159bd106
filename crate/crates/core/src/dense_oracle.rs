//! Exact 2^N-dimensional operators: monodromy entries, transfer matrices,
//! global symmetries and local spin operators.
//!
//! Basis index 0 is spin up; site 1 is the most significant tensor factor.

use crate::linalg::{eigenvalues, eigenvector, op_norm, pair, CMat, CVec};
use crate::{ChainParams, Error, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type DenseOperator = CMat;
pub type StateVector = CVec;

fn z0() -> C64 {
    C64::new(0.0, 0.0)
}

fn z1() -> C64 {
    C64::new(1.0, 0.0)
}

/// 2×2 single-site matrix, row-major.
pub type Local = [[C64; 2]; 2];

pub fn sigma_minus() -> Local {
    [[z0(), z0()], [z1(), z0()]]
}

pub fn sigma_plus() -> Local {
    [[z0(), z1()], [z0(), z0()]]
}

pub fn sigma_x() -> Local {
    [[z0(), z1()], [z1(), z0()]]
}

pub fn sigma_y() -> Local {
    [[z0(), C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), z0()]]
}

pub fn sigma_z() -> Local {
    [[z1(), z0()], [z0(), -z1()]]
}

fn local_mul(a: &Local, b: &Local) -> Local {
    let mut r = [[z0(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

/// Bit of `site` (1-based) inside a basis index.
#[inline]
fn bit(idx: usize, site: usize, n: usize) -> usize {
    (idx >> (n - site)) & 1
}

#[inline]
fn with_bit(idx: usize, site: usize, n: usize, v: usize) -> usize {
    let m = 1 << (n - site);
    (idx & !m) | (v * m)
}

/// The operator `op` acting on `site`, identity elsewhere.
pub fn local_op(op: &Local, site: usize, n: usize) -> DenseOperator {
    let dim = 1 << n;
    let mut m = CMat::zeros(dim, dim);
    for r in 0..dim {
        let br = bit(r, site, n);
        for bc in 0..2 {
            let v = op[br][bc];
            if v != z0() {
                m[(r, with_bit(r, site, n, bc))] = v;
            }
        }
    }
    m
}

/// R(λ) = λ I + η P on C²⊗C².
pub fn r_matrix(l: C64, eta: C64) -> CMat {
    let mut r = CMat::zeros(4, 4);
    r[(0, 0)] = l + eta;
    r[(3, 3)] = l + eta;
    r[(1, 1)] = l;
    r[(2, 2)] = l;
    r[(1, 2)] = eta;
    r[(2, 1)] = eta;
    r
}

/// e_{ki} on `site` applied from the left: keeps rows with bit k, reading from bit i.
fn apply_e(k: usize, i: usize, site: usize, n: usize, x: &CMat) -> CMat {
    let dim = x.nrows();
    let mut out = CMat::zeros(dim, x.ncols());
    for r in 0..dim {
        if bit(r, site, n) == k {
            let src = with_bit(r, site, n, i);
            out.row_mut(r).copy_from(&x.row(src));
        }
    }
    out
}

/// The four auxiliary-space entries of the monodromy matrix.
#[derive(Debug, Clone)]
pub struct Monodromy {
    pub a: DenseOperator,
    pub b: DenseOperator,
    pub c: DenseOperator,
    pub d: DenseOperator,
}

impl Monodromy {
    fn entry(&self, i: usize, j: usize) -> &CMat {
        match (i, j) {
            (0, 0) => &self.a,
            (0, 1) => &self.b,
            (1, 0) => &self.c,
            _ => &self.d,
        }
    }

    /// Antiperiodic transfer matrix B + C.
    pub fn transfer(&self) -> DenseOperator {
        &self.b + &self.c
    }

    /// σᶻ-twisted transfer matrix A − D.
    pub fn twisted(&self) -> DenseOperator {
        &self.a - &self.d
    }
}

fn step(params: &ChainParams, site: usize, l: C64, m: &[CMat; 4]) -> [CMat; 4] {
    let n = params.n_sites();
    let shift = l - params.xi[site - 1];
    let idx = |i: usize, j: usize| 2 * i + j;
    let mut out: [CMat; 4] = std::array::from_fn(|_| CMat::zeros(0, 0));
    for i in 0..2 {
        for j in 0..2 {
            let mut e = &m[idx(i, j)] * shift;
            for k in 0..2 {
                e += apply_e(k, i, site, n, &m[idx(k, j)]) * params.eta;
            }
            out[idx(i, j)] = e;
        }
    }
    out
}

fn start(dim: usize) -> [CMat; 4] {
    [CMat::identity(dim, dim), CMat::zeros(dim, dim), CMat::zeros(dim, dim), CMat::identity(dim, dim)]
}

/// Monodromy built site by site, M ← L_n M for n = 1..N.
pub fn monodromy(params: &ChainParams, l: C64) -> Monodromy {
    let mut m = start(params.dim());
    for site in 1..=params.n_sites() {
        m = step(params, site, l, &m);
    }
    let [a, b, c, d] = m;
    Monodromy { a, b, c, d }
}

/// Monodromy and its exact λ-derivative (product rule, dL/dλ = identity).
pub fn monodromy_with_derivative(params: &ChainParams, l: C64) -> (Monodromy, Monodromy) {
    let dim = params.dim();
    let mut m = start(dim);
    let mut dm: [CMat; 4] = std::array::from_fn(|_| CMat::zeros(dim, dim));
    for site in 1..=params.n_sites() {
        let mut next_d = step(params, site, l, &dm);
        for k in 0..4 {
            next_d[k] += &m[k];
        }
        dm = next_d;
        m = step(params, site, l, &m);
    }
    let [a, b, c, d] = m;
    let [da, db, dc, dd] = dm;
    (Monodromy { a, b, c, d }, Monodromy { a: da, b: db, c: dc, d: dd })
}

/// One monodromy entry; `which` ∈ {'A','B','C','D'}.
pub fn monodromy_entry(params: &ChainParams, which: char, l: C64) -> Result<DenseOperator> {
    let m = monodromy(params, l);
    let (i, j) = match which {
        'A' => (0, 0),
        'B' => (0, 1),
        'C' => (1, 0),
        'D' => (1, 1),
        _ => return Err(Error::InvalidArgument(format!("unknown entry {which}"))),
    };
    Ok(m.entry(i, j).clone())
}

pub fn transfer_antiperiodic(params: &ChainParams, l: C64) -> DenseOperator {
    monodromy(params, l).transfer()
}

pub fn transfer_twisted(params: &ChainParams, l: C64) -> DenseOperator {
    monodromy(params, l).twisted()
}

/// ‖B(λ)C(λ−η) − A(λ)D(λ−η) + a(λ)d(λ−η)‖ relative to the scalar scale.
pub fn quantum_det_check(params: &ChainParams, l: C64) -> f64 {
    let m0 = monodromy(params, l);
    let m1 = monodromy(params, l - params.eta);
    let s = params.a(l) * params.d(l - params.eta);
    let dim = params.dim();
    let r = &m0.b * &m1.c - &m0.a * &m1.d + CMat::identity(dim, dim) * s;
    let scale = s.norm().max(op_norm(&m0.b) * op_norm(&m1.c)).max(1e-300);
    op_norm(&r) / scale
}

/// Global operators: total Sˣ, Γˣ = ⊗σˣ, Γ_U = ⊗U.
pub struct GlobalOps {
    pub sx: DenseOperator,
    pub gamma_x: DenseOperator,
    pub gamma_u: DenseOperator,
}

pub fn u_matrix() -> Local {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [[C64::new(s, 0.0), C64::new(s, 0.0)], [C64::new(-s, 0.0), C64::new(s, 0.0)]]
}

pub fn tensor_power(op: &Local, n: usize) -> DenseOperator {
    let mut m = CMat::from_element(1, 1, z1());
    let l = CMat::from_row_slice(2, 2, &[op[0][0], op[0][1], op[1][0], op[1][1]]);
    for _ in 0..n {
        m = m.kronecker(&l);
    }
    m
}

pub fn global_operators(params: &ChainParams) -> GlobalOps {
    let n = params.n_sites();
    let dim = params.dim();
    let mut sx = CMat::zeros(dim, dim);
    for site in 1..=n {
        sx += local_op(&sigma_x(), site, n);
    }
    GlobalOps { sx, gamma_x: tensor_power(&sigma_x(), n), gamma_u: tensor_power(&u_matrix(), n) }
}

/// All-up reference state |0⟩.
pub fn ref_up(n: usize) -> StateVector {
    let mut v = CVec::zeros(1 << n);
    v[0] = z1();
    v
}

/// All-down reference state |0'⟩.
pub fn ref_down(n: usize) -> StateVector {
    let dim = 1 << n;
    let mut v = CVec::zeros(dim);
    v[dim - 1] = z1();
    v
}

/// ⊗(u0, u1) as a vector.
pub fn product_state(u0: C64, u1: C64, n: usize) -> StateVector {
    let dim = 1 << n;
    CVec::from_fn(dim, |idx, _| {
        (1..=n).map(|s| if bit(idx, s, n) == 0 { u0 } else { u1 }).product()
    })
}

/// An eigenpair of the antiperiodic transfer matrix at the reference point.
#[derive(Debug, Clone)]
pub struct EigenTriple {
    pub value: C64,
    pub right: StateVector,
    pub left: StateVector,
}

/// Default reference point, scaled with the parameter spread.
pub fn default_reference_point(params: &ChainParams) -> C64 {
    C64::new(0.37, 0.41) * params.scale().max(1.0)
}

/// Diagonalize T(λ₀); asserts a simple spectrum and biorthogonal pairs.
pub fn diagonalize_transfer(params: &ChainParams, l0: C64) -> Result<Vec<EigenTriple>> {
    let t = transfer_antiperiodic(params, l0);
    let tt = t.transpose();
    let mut w = eigenvalues(&t)?;
    w.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    let scale = op_norm(&t).max(1e-300);
    let mut gap = f64::INFINITY;
    for i in 0..w.len() {
        for j in 0..i {
            gap = gap.min((w[i] - w[j]).norm());
        }
    }
    if gap < 1e-6 * scale {
        return Err(Error::DegenerateSpectrum(gap / scale));
    }
    let mut out = Vec::with_capacity(w.len());
    for &value in &w {
        let right = eigenvector(&t, value)?;
        let left = eigenvector(&tt, value)?;
        let res_r = (&t * &right - &right * value).norm() / right.norm();
        let res_l = (&tt * &left - &left * value).norm() / left.norm();
        if res_r > 1e-9 * scale || res_l > 1e-9 * scale {
            return Err(Error::RetryExhausted(format!("eigenpair residual {:e}", res_r.max(res_l) / scale)));
        }
        if pair(&left, &right).norm() < 1e-10 * left.norm() * right.norm() {
            return Err(Error::Biorthogonality);
        }
        out.push(EigenTriple { value, right, left });
    }
    Ok(out)
}

/// Diagonalize with a few retries of the reference point.
pub fn diagonalize_transfer_auto(params: &ChainParams) -> Result<Vec<EigenTriple>> {
    let base = default_reference_point(params);
    let mut last = Error::DegenerateSpectrum(0.0);
    for k in 0..6 {
        let l0 = base * C64::new(1.0 + 0.13 * k as f64, 0.07 * k as f64);
        match diagonalize_transfer(params, l0) {
            Ok(v) => return Ok(v),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Pauli-built antiperiodic Hamiltonian: Σ_n (σˣσˣ + σʸσʸ + σᶻσᶻ − 1) with
/// σ^a_{N+1} = σˣ₁ σ^a₁ σˣ₁.
pub fn hamiltonian_pauli(n: usize) -> DenseOperator {
    let dim = 1 << n;
    let mut h = CMat::zeros(dim, dim);
    let x = sigma_x();
    for site in 1..=n {
        for s in [sigma_x(), sigma_y(), sigma_z()] {
            let here = local_op(&s, site, n);
            let next = if site < n { local_op(&s, site + 1, n) } else { local_op(&local_mul(&local_mul(&x, &s), &x), 1, n) };
            h += here * next;
        }
        h -= CMat::identity(dim, dim);
    }
    h
}

/// 2η T(0)⁻¹ T'(0) − 2N at the given parameters.
pub fn hamiltonian_from_transfer(params: &ChainParams) -> Result<DenseOperator> {
    let (m, dm) = monodromy_with_derivative(params, z0());
    let t = m.transfer();
    let dt = dm.transfer();
    let inv = t.try_inverse().ok_or(Error::Singular)?;
    let n = params.n_sites();
    let dim = params.dim();
    Ok(inv * dt * (params.eta * 2.0) - CMat::identity(dim, dim) * C64::new(2.0 * n as f64, 0.0))
}

/// Bare T(0)⁻¹ T'(0), kept for reporting the missing affine convention.
pub fn log_derivative_bare(params: &ChainParams) -> Result<DenseOperator> {
    let (m, dm) = monodromy_with_derivative(params, z0());
    let inv = m.transfer().try_inverse().ok_or(Error::Singular)?;
    Ok(inv * dm.transfer())
}

/// ‖H_pauli − (2η T(0)⁻¹T'(0) − 2N)‖ with ξ_n = ε·n, η = 1.
pub fn hamiltonian_limit_check(n_sites: usize, eps: f64) -> Result<f64> {
    if n_sites == 0 || n_sites > 8 {
        return Err(Error::InvalidArgument("n_sites outside 1..=8".into()));
    }
    let xi = (1..=n_sites).map(|k| C64::new(eps * k as f64, 0.0)).collect();
    let p = ChainParams::limit_family(z1(), xi);
    let h = hamiltonian_from_transfer(&p)?;
    Ok(op_norm(&(hamiltonian_pauli(n_sites) - h)))
}

/// Worst relative residuals of the structural identities at a few λ.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleGates {
    pub commutativity: f64,
    pub quantum_det: f64,
    pub sx_symmetry: f64,
    pub gamma_x_symmetry: f64,
    pub similarity: f64,
}

fn commutator_rel(x: &CMat, y: &CMat) -> f64 {
    op_norm(&(x * y - y * x)) / (op_norm(x) * op_norm(y)).max(1e-300)
}

pub fn oracle_gates(params: &ChainParams, seed: u64, points: usize) -> OracleGates {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x04ac_1e);
    let rad = params.scale() + params.eta.norm();
    let ls: Vec<C64> = (0..points.max(2)).map(|_| C64::new(rng.random_range(-rad..rad), rng.random_range(-rad..rad))).collect();
    let ts: Vec<DenseOperator> = ls.iter().map(|&l| transfer_antiperiodic(params, l)).collect();
    let g = global_operators(params);
    // U is real orthogonal, so Γ_U⁻¹ = Γ_Uᵀ
    let gu_inv = g.gamma_u.transpose();
    let mut out = OracleGates::default();
    for (i, (l, t)) in ls.iter().zip(&ts).enumerate() {
        for u in &ts[i + 1..] {
            out.commutativity = out.commutativity.max(commutator_rel(t, u));
        }
        out.quantum_det = out.quantum_det.max(quantum_det_check(params, *l));
        out.sx_symmetry = out.sx_symmetry.max(commutator_rel(&g.sx, t));
        out.gamma_x_symmetry = out.gamma_x_symmetry.max(commutator_rel(&g.gamma_x, t));
        let tw = transfer_twisted(params, *l);
        let sim = op_norm(&(&tw - &g.gamma_u * t * &gu_inv)) / op_norm(&tw).max(1e-300);
        out.similarity = out.similarity.max(sim);
    }
    out
}

/// Hamiltonian deviation at ξ_n = ε·n for each ε, and the smallest
/// log-log slope between neighbouring ε.
pub fn hamiltonian_decay(n_sites: usize, eps_list: &[f64]) -> Result<(Vec<(f64, f64)>, f64)> {
    let devs: Vec<(f64, f64)> = eps_list.iter().map(|&e| hamiltonian_limit_check(n_sites, e).map(|d| (e, d))).collect::<Result<_>>()?;
    let slope = devs
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).log10() / (w[0].0 / w[1].0).log10())
        .fold(f64::INFINITY, f64::min);
    Ok((devs, slope))
}

/// Apply an operator from the left to a row vector: returns (uᵀ M)ᵀ.
pub fn row_apply(u: &StateVector, m: &DenseOperator) -> StateVector {
    m.tr_mul(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_model::sample_generic_params;
    use crate::c64;

    fn r(x: f64) -> C64 {
        c64(x, 0.0)
    }

    fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn r_matrix_fixtures() {
        let r0 = r_matrix(r(0.0), r(1.0));
        assert_eq!(r0[(1, 2)], r(1.0));
        assert_eq!(r0[(0, 0)], r(1.0));
        let r1 = r_matrix(r(1.0), r(1.0));
        assert_eq!(r1[(0, 0)], r(2.0));
        assert_eq!(r1[(3, 3)], r(2.0));
        assert_eq!(r1[(1, 1)], r(1.0));
        assert_eq!(r1[(1, 2)], r(1.0));
        let l = c64(0.4, 0.3);
        let prod = r_matrix(l, r(1.0)) * r_matrix(-l, r(1.0));
        let f = (l + 1.0) * (-l + 1.0);
        assert!(close(&prod, &(CMat::identity(4, 4) * f), 1e-14));
    }

    #[test]
    fn monodromy_n1_fixtures() {
        let p = ChainParams::fixture_n1();
        let sm = local_op(&sigma_minus(), 1, 1);
        let b = monodromy_entry(&p, 'B', c64(0.3, 0.2)).unwrap();
        assert!(close(&b, &sm, 1e-15));
        let d = monodromy_entry(&p, 'D', r(-0.5)).unwrap();
        assert!(close(&d, &CMat::from_diagonal(&CVec::from_vec(vec![r(-0.5), r(0.5)])), 1e-15));
        let t = transfer_antiperiodic(&p, c64(1.7, -0.4));
        assert!(close(&t, &local_op(&sigma_x(), 1, 1), 1e-15));
        assert!(monodromy_entry(&p, 'Q', r(0.0)).is_err());
    }

    #[test]
    fn highest_weight() {
        let p = sample_generic_params(4, 3, 0.3).unwrap();
        let m = monodromy(&p, c64(0.2, 0.9));
        let up = ref_up(4);
        assert!((&m.b * &up).norm() > 1e-3);
        assert!((&m.c * &up).norm() < 1e-13);
    }

    #[test]
    fn quantum_det_fixtures() {
        let p = ChainParams::fixture_n1();
        assert!(quantum_det_check(&p, r(0.0)) < 1e-14);
        let p4 = sample_generic_params(4, 8, 0.3).unwrap();
        assert!(quantum_det_check(&p4, c64(0.31, -0.77)) < 1e-10);
        assert!(quantum_det_check(&p4, p4.xi[0]) < 1e-10);
    }

    #[test]
    fn global_operator_fixtures() {
        let p = ChainParams::fixture_n1();
        let g = global_operators(&p);
        let u = &g.gamma_u;
        let ut = u.transpose();
        assert!(close(&(u * &ut), &CMat::identity(2, 2), 1e-15));
        let conj = u * local_op(&sigma_x(), 1, 1) * &ut;
        assert!(close(&conj, &local_op(&sigma_z(), 1, 1), 1e-15));
        let p3 = sample_generic_params(3, 1, 0.3).unwrap();
        let g3 = global_operators(&p3);
        assert!(close(&(&g3.gamma_x * &g3.gamma_x), &CMat::identity(8, 8), 1e-15));
        // Γˣ = (−i)^N exp(iπ Sˣ/2); Sˣ has integer spectrum so use the product form
        let mut e = CMat::identity(8, 8);
        for s in 1..=3 {
            let sx = local_op(&sigma_x(), s, 3);
            // exp(iπσˣ/2) = i σˣ
            e = e * (sx * C64::new(0.0, 1.0));
        }
        let rhs = e * C64::new(0.0, -1.0).powi(3);
        assert!(close(&g3.gamma_x, &rhs, 1e-13));
    }

    #[test]
    fn diagonalize_n1() {
        let p = ChainParams::fixture_n1();
        let es = diagonalize_transfer(&p, c64(0.37, 0.41)).unwrap();
        assert_eq!(es.len(), 2);
        assert!((es[0].value + 1.0).norm() < 1e-12);
        assert!((es[1].value - 1.0).norm() < 1e-12);
        let v = &es[0].right;
        assert!((v[0] + v[1]).norm() < 1e-12 * v.norm());
    }

    #[test]
    fn hamiltonian_exact_at_zero() {
        for n in 1..=4 {
            assert!(hamiltonian_limit_check(n, 0.0).unwrap() < 1e-9, "n={n}");
        }
        let h1 = hamiltonian_pauli(1);
        assert!(close(&h1, &(CMat::identity(2, 2) * r(-2.0)), 1e-15));
    }

    #[test]
    fn derivative_matches_difference() {
        let p = sample_generic_params(3, 5, 0.3).unwrap();
        let l = c64(0.2, 0.1);
        let (_, dm) = monodromy_with_derivative(&p, l);
        let h = 1e-6;
        let fd = (transfer_antiperiodic(&p, l + h) - transfer_antiperiodic(&p, l - h)) / C64::new(2.0 * h, 0.0);
        assert!((dm.transfer() - &fd).norm() < 1e-6 * (1.0 + fd.norm()));
    }

    #[test]
    fn gates_small_n() {
        for n in 1..=4 {
            let p = sample_generic_params(n, 40 + n as u64, 0.3).unwrap();
            let g = oracle_gates(&p, 1, 4);
            for v in [g.commutativity, g.quantum_det, g.sx_symmetry, g.gamma_x_symmetry, g.similarity] {
                assert!(v < 1e-12, "n={n} {g:?}");
            }
        }
    }

    #[test]
    fn hamiltonian_decays_linearly() {
        let (devs, slope) = hamiltonian_decay(3, &[1e-2, 1e-3, 1e-4]).unwrap();
        assert!(slope > 0.9, "{devs:?}");
    }
}
