//! E± products, dressed-Vandermonde functionals A±, Izergin and Slavnov
//! determinants, and the identities that connect them.

use crate::chain_model::vandermonde;
use crate::linalg::{det, CMat};
use crate::{Error, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Relative radius around poles of t and E±.
pub const POLE_GUARD: f64 = 1e-8;
/// Bethe residual accepted as on-shell.
pub const ON_SHELL_GATE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

fn set_scale(sets: &[&[C64]], eta: C64) -> f64 {
    sets.iter().flat_map(|s| s.iter()).map(|z| z.norm()).fold(eta.norm().max(1.0), f64::max)
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// E^±_{set}(y) = ∏ (y − x ± η)/(y − x).
pub fn e_pm(set: &[C64], y: C64, eta: C64, sign: Sign) -> Result<C64> {
    let guard = 1e-12 * set_scale(&[set, &[y]], eta);
    let mut v = c(1.0);
    for &x in set {
        if (y - x).norm() <= guard {
            return Err(Error::PoleCollision(format!("E± at {y} on set point {x}")));
        }
        v *= (y - x + sign.value() * eta) / (y - x);
    }
    Ok(v)
}

/// E^±_{set}(y)/E^∓_{set}(y) = ∏ (y − x ± η)/(y − x ∓ η), finite at y in the set.
pub fn e_ratio(set: &[C64], y: C64, eta: C64, sign: Sign) -> C64 {
    let s = sign.value() * eta;
    set.iter().map(|&x| (y - x + s) / (y - x - s)).product()
}

/// A^±_{set}[f] = det[x_a^{b−1} − f(x_a)(x_a ± η)^{b−1}] / V(set).
pub fn a_pm(set: &[C64], f: &[C64], eta: C64, sign: Sign) -> Result<C64> {
    let m = set.len();
    if f.len() != m {
        return Err(Error::Shape(format!("{} values for {} points", f.len(), m)));
    }
    if m == 0 {
        return Ok(c(1.0));
    }
    let scale = set_scale(&[set], eta);
    for a in 0..m {
        for b in 0..a {
            if (set[a] - set[b]).norm() <= 1e-10 * scale {
                return Err(Error::DegenerateSet(format!("points {} and {} coincide", set[b], set[a])));
            }
        }
    }
    let s = sign.value() * eta;
    let mat = CMat::from_fn(m, m, |a, b| set[a].powi(b as i32) - f[a] * (set[a] + s).powi(b as i32));
    Ok(det(&mat) / vandermonde(set))
}

/// t_μ(x) = μ/x − 1/(x+η).
pub fn t_mu(x: C64, eta: C64, mu: C64) -> C64 {
    mu / x - 1.0 / (x + eta)
}

/// t(x) = t_1(x) = η/(x(x+η)).
pub fn t(x: C64, eta: C64) -> C64 {
    eta / (x * (x + eta))
}

fn guard_t(x: C64, eta: C64, scale: f64) -> Result<()> {
    let r = POLE_GUARD * scale;
    if x.norm() <= r || (x + eta).norm() <= r {
        Err(Error::PoleCollision(format!("t argument {x} at a pole")))
    } else {
        Ok(())
    }
}

fn cross_product(xs: &[C64], ys: &[C64], eta: C64) -> C64 {
    xs.iter().flat_map(|&x| ys.iter().map(move |&y| x - y + eta)).product()
}

fn reversed(v: &[C64]) -> Vec<C64> {
    v.iter().rev().copied().collect()
}

/// ∏(x_a − y_b + η) det[t_μ(x_a − y_b)] / (V(x) V(y_N, …, y_1)).
pub fn izergin(mu: C64, xs: &[C64], ys: &[C64], eta: C64) -> Result<C64> {
    let n = xs.len();
    if ys.len() != n {
        return Err(Error::Shape(format!("izergin sizes {} and {}", n, ys.len())));
    }
    if n == 0 {
        return Ok(c(1.0));
    }
    let scale = set_scale(&[xs, ys], eta);
    for &x in xs {
        for &y in ys {
            guard_t(x - y, eta, scale)?;
        }
    }
    let m = CMat::from_fn(n, n, |a, b| t_mu(xs[a] - ys[b], eta, mu));
    Ok(cross_product(xs, ys, eta) * det(&m) / (vandermonde(xs) * vandermonde(&reversed(ys))))
}

/// The same determinant with V(y) divided out analytically by divided
/// differences in the columns. Stable when the y_b nearly coincide.
pub fn izergin_stable(mu: C64, xs: &[C64], ys: &[C64], eta: C64) -> Result<C64> {
    let n = xs.len();
    if ys.len() != n {
        return Err(Error::Shape(format!("izergin sizes {} and {}", n, ys.len())));
    }
    if n == 0 {
        return Ok(c(1.0));
    }
    let scale = set_scale(&[xs, ys], eta);
    for &x in xs {
        for &y in ys {
            guard_t(x - y, eta, scale)?;
        }
    }
    let m = CMat::from_fn(n, n, |a, b| {
        let p: C64 = ys[..=b].iter().map(|&y| 1.0 / (xs[a] - y)).product();
        let q: C64 = ys[..=b].iter().map(|&y| 1.0 / (xs[a] + eta - y)).product();
        mu * p - q
    });
    let sign = if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * cross_product(xs, ys, eta) * det(&m) / vandermonde(xs))
}

/// (A⁺_{y}[μE⁻_{x}], (1−μ)^{N−M} A⁻_{x}[μE⁺_{y}]) with |x| = M, |y| = N.
pub fn a_pm_unbalanced_check(mu: C64, xs: &[C64], ys: &[C64], eta: C64) -> Result<(C64, C64)> {
    let fy = ys.iter().map(|&y| Ok(mu * e_pm(xs, y, eta, Sign::Minus)?)).collect::<Result<Vec<_>>>()?;
    let fx = xs.iter().map(|&x| Ok(mu * e_pm(ys, x, eta, Sign::Plus)?)).collect::<Result<Vec<_>>>()?;
    let lhs = a_pm(ys, &fy, eta, Sign::Plus)?;
    let rhs = (c(1.0) - mu).powi(ys.len() as i32 - xs.len() as i32) * a_pm(xs, &fx, eta, Sign::Minus)?;
    Ok((lhs, rhs))
}

/// max_a |−μ a(x_a)/d(x_a) ∏_b (x_a−x_b−η)/(x_a−x_b+η) − 1| for the μ-twisted chain.
pub fn bethe_residual_mu(mu: C64, xs: &[C64], xi: &[C64], eta: C64) -> f64 {
    xs.iter()
        .map(|&x| {
            let ad: C64 = xi.iter().map(|&z| (x - z + eta) / (x - z)).product();
            let mut v = -mu * ad;
            for &y in xs {
                v *= (x - y - eta) / (x - y + eta);
            }
            (v - 1.0).norm()
        })
        .fold(0.0, f64::max)
}

/// Matrix H^{(μ)} of the generalized Slavnov determinant; rows j ≤ M from the
/// x set, rows j > M monomial.
fn slavnov_matrix(mu: C64, xs: &[C64], ys: &[C64], xi: &[C64], eta: C64) -> Result<CMat> {
    let m = xs.len();
    let mp = ys.len();
    let scale = set_scale(&[xs, ys, xi], eta);
    let mut h = CMat::zeros(mp, mp);
    for k in 0..mp {
        let y = ys[k];
        let e = mu * e_pm(xi, y, eta, Sign::Plus)?;
        let r = e_ratio(xs, y, eta, Sign::Plus);
        for j in 0..mp {
            h[(j, k)] = if j < m {
                guard_t(xs[j] - y, eta, scale)?;
                guard_t(y - xs[j], eta, scale)?;
                e * t(xs[j] - y, eta) - r * t(y - xs[j], eta)
            } else {
                let p = (j - m) as i32;
                e * y.powi(p) - r * (y + eta).powi(p)
            };
        }
    }
    Ok(h)
}

fn slavnov_prefactor(xs: &[C64], ys: &[C64], eta: C64) -> C64 {
    cross_product(xs, ys, eta) / (vandermonde(xs) * vandermonde(&reversed(ys)))
}

fn check_on_shell(mu: C64, xs: &[C64], xi: &[C64], eta: C64) -> Result<()> {
    let r = bethe_residual_mu(mu, xs, xi, eta);
    if r.is_nan() || r > ON_SHELL_GATE {
        Err(Error::NotOnShell(r))
    } else {
        Ok(())
    }
}

/// Generalized Slavnov determinant S^{(μ)}_{M,M+S} without the on-shell gate.
pub fn gen_slavnov_unchecked(mu: C64, xs: &[C64], ys: &[C64], xi: &[C64], eta: C64) -> Result<C64> {
    if ys.len() < xs.len() {
        return Err(Error::Shape(format!("{} x-points exceed {} y-points", xs.len(), ys.len())));
    }
    if ys.is_empty() {
        return Ok(c(1.0));
    }
    let h = slavnov_matrix(mu, xs, ys, xi, eta)?;
    Ok(slavnov_prefactor(xs, ys, eta) * det(&h))
}

/// S^{(μ)}_{M,M+S}; xs must be on-shell for (μ, ξ).
pub fn gen_slavnov(mu: C64, xs: &[C64], ys: &[C64], xi: &[C64], eta: C64) -> Result<C64> {
    check_on_shell(mu, xs, xi, eta)?;
    gen_slavnov_unchecked(mu, xs, ys, xi, eta)
}

/// S^{(μ)}_M with |xs| = |ys|.
pub fn slavnov(mu: C64, xs: &[C64], ys: &[C64], xi: &[C64], eta: C64) -> Result<C64> {
    if xs.len() != ys.len() {
        return Err(Error::Shape(format!("slavnov sizes {} and {}", xs.len(), ys.len())));
    }
    gen_slavnov(mu, xs, ys, xi, eta)
}

/// Slavnov determinant with column m of H taken entirely at z instead of y_m.
/// Prefactors keep the original ys. z = y_m gives the plain value.
pub fn column_evaluated_slavnov(mu: C64, xs: &[C64], ys: &[C64], xi: &[C64], eta: C64, m: usize, z: C64) -> Result<C64> {
    if m >= ys.len() || xs.len() != ys.len() {
        return Err(Error::Shape(format!("column {m} of {}", ys.len())));
    }
    check_on_shell(mu, xs, xi, eta)?;
    let mut h = slavnov_matrix(mu, xs, ys, xi, eta)?;
    let mut zs = ys.to_vec();
    zs[m] = z;
    let hz = slavnov_matrix(mu, xs, &zs, xi, eta)?;
    h.set_column(m, &hz.column(m));
    Ok(slavnov_prefactor(xs, ys, eta) * det(&h))
}

/// Column m replaced by μE⁺_ξ(y_m)·t(x_j − z); the ratio term is dropped.
/// This is the reading that stays finite at z = ξ_n.
pub fn column_substituted_slavnov(mu: C64, xs: &[C64], ys: &[C64], xi: &[C64], eta: C64, m: usize, z: C64) -> Result<C64> {
    if m >= ys.len() || xs.len() != ys.len() {
        return Err(Error::Shape(format!("column {m} of {}", ys.len())));
    }
    check_on_shell(mu, xs, xi, eta)?;
    column_substituted_unchecked(mu, xs, ys, xi, eta, m, z)
}

pub fn column_substituted_unchecked(mu: C64, xs: &[C64], ys: &[C64], xi: &[C64], eta: C64, m: usize, z: C64) -> Result<C64> {
    let mut h = slavnov_matrix(mu, xs, ys, xi, eta)?;
    let scale = set_scale(&[xs, ys, xi], eta);
    let e = mu * e_pm(xi, ys[m], eta, Sign::Plus)?;
    for j in 0..xs.len() {
        guard_t(xs[j] - z, eta, scale)?;
        h[(j, m)] = e * t(xs[j] - z, eta);
    }
    Ok(slavnov_prefactor(xs, ys, eta) * det(&h))
}

/// Sign in S_{M,M+S}(x, y) = sign · A⁻_{x∪y}[μE⁺_ξ] for on-shell x.
pub fn slavnov_identity_sign(m: usize, s: usize) -> f64 {
    if (m + s * (s + 1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// (S_{M,M+S}, sign·A⁻_{x∪y}[μE⁺_ξ]).
pub fn slavnov_identity_check(mu: C64, xs: &[C64], ys: &[C64], xi: &[C64], eta: C64) -> Result<(C64, C64)> {
    let lhs = gen_slavnov(mu, xs, ys, xi, eta)?;
    let u: Vec<C64> = xs.iter().chain(ys).copied().collect();
    let f = u.iter().map(|&z| Ok(mu * e_pm(xi, z, eta, Sign::Plus)?)).collect::<Result<Vec<_>>>()?;
    let rhs = slavnov_identity_sign(xs.len(), ys.len() - xs.len()) * a_pm(&u, &f, eta, Sign::Minus)?;
    Ok((lhs, rhs))
}

/// Extrapolated ε → 0 value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limit {
    pub value: C64,
    pub error: f64,
}

/// Default ε-schedule for coinciding-point limits.
pub const LIMIT_SCHEDULE: [f64; 4] = [4e-3, 2e-3, 1e-3, 5e-4];

/// Polynomial (Neville) extrapolation of f(ε) to ε = 0 over the schedule.
pub fn coinciding_limit<F: FnMut(f64) -> Result<C64>>(mut f: F, schedule: &[f64]) -> Result<Limit> {
    if schedule.is_empty() {
        return Err(Error::LimitFailure("empty schedule".into()));
    }
    let vals = schedule.iter().map(|&e| f(e)).collect::<Result<Vec<_>>>()?;
    if vals.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::LimitFailure(format!("non-finite samples {vals:?}")));
    }
    let value = neville_at_zero(schedule, &vals);
    // error: drop the coarsest sample and compare
    let second = if vals.len() > 1 { neville_at_zero(&schedule[1..], &vals[1..]) } else { value };
    let error = (value - second).norm();
    let scale = value.norm().max(1e-300);
    if !(error <= 1e-3 * scale) {
        return Err(Error::LimitFailure(format!("extrapolation error {error:.3e} at value {value}")));
    }
    Ok(Limit { value, error })
}

fn neville_at_zero(eps: &[f64], vals: &[C64]) -> C64 {
    let n = vals.len();
    let mut p = vals.to_vec();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (p[i + 1] * eps[i] - p[i] * eps[i + k]) / (eps[i] - eps[i + k]);
        }
    }
    p[0]
}

/// Limit of f(base + ε·direction) as ε → 0.
pub fn coinciding_limit_along<F: FnMut(&[C64]) -> Result<C64>>(mut f: F, base: &[C64], direction: &[C64], schedule: &[f64]) -> Result<Limit> {
    if base.len() != direction.len() {
        return Err(Error::Shape("direction length".into()));
    }
    coinciding_limit(
        |e| {
            let pts: Vec<C64> = base.iter().zip(direction).map(|(b, d)| b + d * e).collect();
            f(&pts)
        },
        schedule,
    )
}

/// Fixed generic direction for limits of size n.
pub fn generic_direction(n: usize) -> Vec<C64> {
    (0..n).map(|k| C64::from_polar(1.0 + 0.37 * k as f64, 0.4 + 2.1 * k as f64)).collect()
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, rad: f64) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.random_range(-rad..rad), rng.random_range(-rad..rad))).collect()
}

/// Random set whose points stay ≥ sep apart from each other, from the avoided
/// points, and from the avoided points shifted by ±η.
pub fn random_generic_set(rng: &mut ChaCha8Rng, n: usize, rad: f64, avoid: &[C64], eta: C64, sep: f64) -> Vec<C64> {
    loop {
        let pts = random_points(rng, n, rad);
        let mut ok = true;
        for (i, &p) in pts.iter().enumerate() {
            for &q in pts[..i].iter().chain(avoid) {
                if (p - q).norm() < sep || (p - q + eta).norm() < sep || (p - q - eta).norm() < sep {
                    ok = false;
                }
            }
        }
        if ok {
            return pts;
        }
    }
}

/// Worst residuals of the off-shell identities over random instances.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OffShellSweep {
    pub instances: usize,
    pub sign_flip: f64,
    pub izergin_expansion: f64,
    pub unbalanced_expansion: f64,
    pub zero_overlap: f64,
    pub izergin_stable: f64,
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

/// Sign-flip, Izergin expansion, unbalanced expansion and the zero-overlap corollary on random data.
pub fn off_shell_sweep(seed: u64, instances: usize, max_size: usize) -> Result<OffShellSweep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1de_0001);
    let eta = c(1.0);
    let mus = [c(-1.0), c(2.0), C64::new(0.5, 0.5)];
    let mut out = OffShellSweep { instances, ..Default::default() };
    for i in 0..instances {
        let m = 1 + i % max_size;
        let xs = random_generic_set(&mut rng, m, 1.5, &[], eta, 0.15);
        let f = random_points(&mut rng, m, 1.0);
        for sign in [Sign::Plus, Sign::Minus] {
            let fp: Vec<C64> = xs.iter().zip(&f).map(|(&x, &v)| -e_ratio(&xs, x, eta, sign) * v).collect();
            let lhs = a_pm(&xs, &f, eta, sign)?;
            let rhs = a_pm(&xs, &fp, eta, sign.flip())?;
            out.sign_flip = out.sign_flip.max(rel(lhs, rhs));
        }
        let mu = mus[i % 3];
        let ys = random_generic_set(&mut rng, m, 1.5, &xs, eta, 0.15);
        let iz = izergin(mu, &xs, &ys, eta)?;
        let sgn = if m % 2 == 0 { 1.0 } else { -1.0 };
        let fx = xs.iter().map(|&x| Ok(mu * e_pm(&ys, x, eta, Sign::Plus)?)).collect::<Result<Vec<_>>>()?;
        let fy = ys.iter().map(|&y| Ok(mu * e_pm(&xs, y, eta, Sign::Minus)?)).collect::<Result<Vec<_>>>()?;
        let r1 = sgn * a_pm(&xs, &fx, eta, Sign::Minus)?;
        let r2 = sgn * a_pm(&ys, &fy, eta, Sign::Plus)?;
        out.izergin_expansion = out.izergin_expansion.max(rel(iz, r1)).max(rel(iz, r2));
        out.izergin_stable = out.izergin_stable.max(rel(iz, izergin_stable(mu, &xs, &ys, eta)?));
    }
    for mu in &mus {
        for m in 0..=4 {
            for n in 0..=4 {
                let xs = random_generic_set(&mut rng, m, 1.5, &[], eta, 0.15);
                let ys = random_generic_set(&mut rng, n, 1.5, &xs, eta, 0.15);
                let (l, r) = a_pm_unbalanced_check(*mu, &xs, &ys, eta)?;
                out.unbalanced_expansion = out.unbalanced_expansion.max((l - r).norm() / l.norm().max(r.norm()).max(1.0));
            }
        }
    }
    for m in 0..=5 {
        for n in m + 1..=5 {
            let xs = random_generic_set(&mut rng, m, 1.5, &[], eta, 0.15);
            let ys = random_generic_set(&mut rng, n, 1.5, &xs, eta, 0.15);
            for sign in [Sign::Plus, Sign::Minus] {
                let f = ys.iter().map(|&y| e_pm(&xs, y, eta, sign.flip())).collect::<Result<Vec<_>>>()?;
                out.zero_overlap = out.zero_overlap.max(a_pm(&ys, &f, eta, sign)?.norm());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use proptest::prelude::*;

    const ETA: C64 = C64 { re: 1.0, im: 0.0 };

    #[test]
    fn e_pm_fixtures() {
        assert_eq!(e_pm(&[], c64(0.3, 0.0), ETA, Sign::Plus).unwrap(), c(1.0));
        assert_eq!(e_pm(&[c(0.0)], c(1.0), ETA, Sign::Plus).unwrap(), c(2.0));
        assert_eq!(e_pm(&[c(0.0)], c(1.0), ETA, Sign::Minus).unwrap(), c(0.0));
        assert!(matches!(e_pm(&[c(0.0)], c(0.0), ETA, Sign::Plus), Err(Error::PoleCollision(_))));
    }

    #[test]
    fn a_pm_fixtures() {
        let xs = [c64(0.2, 0.1), c64(-0.7, 0.4), c64(1.1, -0.3)];
        for s in [Sign::Plus, Sign::Minus] {
            assert!((a_pm(&xs, &[c(0.0); 3], ETA, s).unwrap() - 1.0).norm() < 1e-14);
        }
        assert_eq!(a_pm(&[c(0.0)], &[c(2.0)], ETA, Sign::Plus).unwrap(), c(-1.0));
        assert!(matches!(a_pm(&[c(0.1), c(0.1)], &[c(1.0); 2], ETA, Sign::Plus), Err(Error::DegenerateSet(_))));
    }

    #[test]
    fn izergin_fixtures() {
        assert!((izergin(c(1.0), &[c(1.0)], &[c(0.0)], ETA).unwrap() - 1.0).norm() < 1e-15);
        let (x, y) = (c64(0.4, 0.9), c64(-1.3, 0.2));
        assert!((izergin(c(1.0), &[x], &[y], ETA).unwrap() - ETA / (x - y)).norm() < 1e-14);
        let mu = c64(0.3, -0.8);
        let v = izergin(mu, &[x], &[y], ETA).unwrap();
        assert!((v - (mu * (x - y + ETA) / (x - y) - 1.0)).norm() < 1e-14);
    }

    #[test]
    fn izergin_permutation_symmetry() {
        let xs = [c64(0.2, 0.1), c64(-0.7, 0.4), c64(1.1, -0.3)];
        let ys = [c64(-0.5, -0.9), c64(0.9, 0.8), c64(0.1, 1.4)];
        let v = izergin(c(-1.0), &xs, &ys, ETA).unwrap();
        let px = [xs[2], xs[0], xs[1]];
        let py = [ys[2], ys[0], ys[1]];
        assert!(rel(v, izergin(c(-1.0), &px, &py, ETA).unwrap()) < 1e-13);
    }

    #[test]
    fn unbalanced_fixtures() {
        let xs = [c64(0.3, 0.2)];
        let ys = [c64(-0.6, 0.5), c64(1.2, -0.4), c64(0.1, -1.1)];
        let (l, r) = a_pm_unbalanced_check(c(2.0), &xs, &ys, ETA).unwrap();
        assert!(rel(l, r) < 1e-12);
        let (l, _) = a_pm_unbalanced_check(c(1.0), &xs, &ys[..2], ETA).unwrap();
        assert!(l.norm() < 1e-12);
    }

    #[test]
    fn slavnov_n1_chain() {
        let xi = [c(0.0)];
        let x = [c(-0.5)];
        for y in [c64(0.3, 0.7), c64(-1.2, 0.4), c64(2.0, -1.0)] {
            let (s, a) = slavnov_identity_check(c(-1.0), &x, &[y], &xi, ETA).unwrap();
            assert!(rel(s, a) < 1e-13);
            // M=0, S=1 carries the sign −1 relative to 1 + E⁺_ξ(y)
            let g = gen_slavnov(c(-1.0), &[], &[y], &xi, ETA).unwrap();
            assert!(rel(g, -(1.0 + e_pm(&xi, y, ETA, Sign::Plus).unwrap())) < 1e-14);
        }
        assert!(matches!(slavnov(c(-1.0), &[c(0.3)], &[c(0.1)], &xi, ETA), Err(Error::NotOnShell(_))));
        assert!(matches!(gen_slavnov(c(-1.0), &x, &[], &xi, ETA), Err(Error::Shape(_))));
    }

    #[test]
    fn slavnov_other_twist() {
        // single root of μ(x+1)/x = 1 at ξ=0
        let mu = c(2.0);
        let xi = [c(0.0)];
        let x = [mu / (1.0 - mu)];
        assert!(bethe_residual_mu(mu, &x, &xi, ETA) < 1e-14);
        let (s, a) = slavnov_identity_check(mu, &x, &[c64(0.4, -0.9)], &xi, ETA).unwrap();
        assert!(rel(s, a) < 1e-13);
    }

    #[test]
    fn column_variants() {
        let xi = [c(0.0)];
        let x = [c(-0.5)];
        let y = [c64(0.3, 0.7)];
        let s = slavnov(c(-1.0), &x, &y, &xi, ETA).unwrap();
        assert!(rel(s, column_evaluated_slavnov(c(-1.0), &x, &y, &xi, ETA, 0, y[0]).unwrap()) < 1e-15);
        let z = c64(0.9, -0.2);
        let v = column_substituted_slavnov(c(-1.0), &x, &y, &xi, ETA, 0, z).unwrap();
        let h = -e_pm(&xi, y[0], ETA, Sign::Plus).unwrap() * t(x[0] - z, ETA);
        assert!(rel(v, slavnov_prefactor(&x, &y, ETA) * h) < 1e-14);
        assert!(column_evaluated_slavnov(c(-1.0), &x, &y, &xi, ETA, 0, xi[0]).is_err());
    }

    #[test]
    fn limit_helper() {
        let l = coinciding_limit(|_| Ok(c64(2.0, -1.0)), &LIMIT_SCHEDULE).unwrap();
        assert!((l.value - c64(2.0, -1.0)).norm() < 1e-14);
        let (x, y) = (c64(0.3, 0.1), c64(0.3, 0.1));
        let l = coinciding_limit_along(|p| Ok((p[0] - p[1]) / (p[0] - p[1])), &[x, y], &[c(1.0), c(0.0)], &LIMIT_SCHEDULE).unwrap();
        assert!((l.value - 1.0).norm() < 1e-12);
        let l = coinciding_limit(|e| Ok(c(3.0) + c(e) + c(e * e)), &LIMIT_SCHEDULE).unwrap();
        assert!((l.value - 3.0).norm() < 1e-12);
        assert!(coinciding_limit(|e| Ok(c(1.0 / e)), &LIMIT_SCHEDULE).is_err());
    }

    #[test]
    fn sweep_small() {
        let s = off_shell_sweep(5, 30, 5).unwrap();
        assert!(s.sign_flip < 1e-10 && s.izergin_expansion < 1e-10, "{s:?}");
        assert!(s.unbalanced_expansion < 1e-10 && s.zero_overlap < 1e-11, "{s:?}");
        assert!(s.izergin_stable < 1e-10, "{s:?}");
    }

    fn cpt() -> impl Strategy<Value = C64> {
        (-1.5..1.5f64, -1.5..1.5f64).prop_map(|(a, b)| c64(a, b))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn sign_flip_holds(seed in 0u64..10_000, m in 1usize..=5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xs = random_generic_set(&mut rng, m, 1.5, &[], ETA, 0.15);
            let f = random_points(&mut rng, m, 1.0);
            let fp: Vec<C64> = xs.iter().zip(&f).map(|(&x, &v)| -e_ratio(&xs, x, ETA, Sign::Plus) * v).collect();
            prop_assert!(rel(a_pm(&xs, &f, ETA, Sign::Plus).unwrap(), a_pm(&xs, &fp, ETA, Sign::Minus).unwrap()) < 1e-10);
        }

        #[test]
        fn izergin_forms_agree(seed in 0u64..10_000, n in 1usize..=5, mu in cpt()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xs = random_generic_set(&mut rng, n, 1.5, &[], ETA, 0.15);
            let ys = random_generic_set(&mut rng, n, 1.5, &xs, ETA, 0.15);
            let a = izergin(mu, &xs, &ys, ETA).unwrap();
            let b = izergin_stable(mu, &xs, &ys, ETA).unwrap();
            prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(b.norm()).max(1.0));
        }
    }
}
