//! Chain parameters and the scalar products a, d, a_n, d_n, V.

use crate::{Error, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default genericity margin as a fraction of |η|.
pub const DEFAULT_MARGIN: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainParams {
    pub eta: C64,
    pub xi: Vec<C64>,
    pub margin: f64,
}

#[derive(Serialize, Deserialize)]
struct ParamsJson {
    n_sites: usize,
    eta: [f64; 2],
    xi: Vec<[f64; 2]>,
    margin: f64,
}

impl Serialize for ChainParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ParamsJson {
            n_sites: self.xi.len(),
            eta: [self.eta.re, self.eta.im],
            xi: self.xi.iter().map(|z| [z.re, z.im]).collect(),
            margin: self.margin,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChainParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ParamsJson::deserialize(d)?;
        if j.xi.len() != j.n_sites {
            return Err(serde::de::Error::custom("n_sites does not match xi length"));
        }
        let xi = j.xi.iter().map(|p| C64::new(p[0], p[1])).collect();
        ChainParams::new(C64::new(j.eta[0], j.eta[1]), xi, j.margin).map_err(serde::de::Error::custom)
    }
}

/// min over a≠b, h ∈ {−1,0,1} of |ξ_a − ξ_b − hη|.
pub fn genericity_margin(eta: C64, xi: &[C64]) -> f64 {
    let mut m = f64::INFINITY;
    for a in 0..xi.len() {
        for b in 0..xi.len() {
            if a == b {
                continue;
            }
            for h in [-1.0, 0.0, 1.0] {
                m = m.min((xi[a] - xi[b] - eta * h).norm());
            }
        }
    }
    m
}

impl ChainParams {
    /// Checked constructor: enforces the margin δ.
    pub fn new(eta: C64, xi: Vec<C64>, margin: f64) -> Result<Self> {
        if xi.is_empty() {
            return Err(Error::InvalidArgument("need at least one site".into()));
        }
        if !(margin > 0.0) || eta.norm() < margin {
            return Err(Error::InvalidArgument(format!("|eta| = {} below margin {margin}", eta.norm())));
        }
        let g = genericity_margin(eta, &xi);
        if g < margin {
            return Err(Error::InvalidArgument(format!("genericity margin {g} < {margin}")));
        }
        Ok(ChainParams { eta, xi, margin })
    }

    /// No genericity certificate; only for ε-scaled limit families.
    pub fn limit_family(eta: C64, xi: Vec<C64>) -> Self {
        ChainParams { eta, xi, margin: 0.0 }
    }

    /// ξ₁ = 0, η = 1.
    pub fn fixture_n1() -> Self {
        Self::new(C64::new(1.0, 0.0), vec![C64::new(0.0, 0.0)], 1.0).unwrap()
    }

    /// ξ = (0, 2), η = 1.
    pub fn fixture_n2() -> Self {
        Self::new(C64::new(1.0, 0.0), vec![C64::new(0.0, 0.0), C64::new(2.0, 0.0)], 1.0).unwrap()
    }

    pub fn n_sites(&self) -> usize {
        self.xi.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.xi.len()
    }

    pub fn genericity(&self) -> f64 {
        genericity_margin(self.eta, &self.xi)
    }

    /// Typical modulus of ξ and η, used as a scale in tolerances.
    pub fn scale(&self) -> f64 {
        self.xi.iter().map(|z| z.norm()).fold(self.eta.norm(), f64::max)
    }

    pub fn a(&self, l: C64) -> C64 {
        self.xi.iter().map(|x| l - x + self.eta).product()
    }

    pub fn d(&self, l: C64) -> C64 {
        self.xi.iter().map(|x| l - x).product()
    }

    /// a_n: shifted factors for j ≤ n (1-based site).
    pub fn a_n(&self, site: usize, l: C64) -> Result<C64> {
        self.check_site(site)?;
        Ok(self.xi.iter().enumerate().map(|(j, x)| if j < site { l - x + self.eta } else { l - x }).product())
    }

    /// d_n: shifted factors for j > n (1-based site).
    pub fn d_n(&self, site: usize, l: C64) -> Result<C64> {
        self.check_site(site)?;
        Ok(self.xi.iter().enumerate().map(|(j, x)| if j < site { l - x } else { l - x + self.eta }).product())
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.xi.len() {
            return Err(Error::InvalidArgument(format!("site {site} outside 1..={}", self.xi.len())));
        }
        Ok(())
    }

    /// ξ_a − h_a η.
    pub fn shifted_xi(&self, h: &[u8]) -> Vec<C64> {
        self.xi.iter().zip(h).map(|(x, &hb)| x - self.eta * hb as f64).collect()
    }

    /// Both sides of the Vandermonde shift identity, diagonal-excluded form:
    /// ∏_n ∏_{m≠n} ((ξ_n−ξ_m+η)/(ξ_n−ξ_m−η))^{h_n} · V(ξ−hη) = V(ξ+hη).
    pub fn vandermonde_shift_check(&self, h: &[u8]) -> Result<(C64, C64)> {
        self.shift_sides(h, false)
    }

    /// Rejected variant: prefactor (−1)^N with the m = n factor included.
    pub fn vandermonde_shift_diagonal_included(&self, h: &[u8]) -> Result<(C64, C64)> {
        self.shift_sides(h, true)
    }

    fn shift_sides(&self, h: &[u8], diag: bool) -> Result<(C64, C64)> {
        let n = self.xi.len();
        if h.len() != n || h.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument("h must be a bit list of length N".into()));
        }
        let mut pre = C64::new(if diag && n % 2 == 1 { -1.0 } else { 1.0 }, 0.0);
        for a in 0..n {
            if h[a] == 0 {
                continue;
            }
            for m in 0..n {
                if m == a && !diag {
                    continue;
                }
                let x = self.xi[a] - self.xi[m];
                pre *= (x + self.eta) / (x - self.eta);
            }
        }
        let minus = self.shifted_xi(h);
        let plus: Vec<C64> = self.xi.iter().zip(h).map(|(x, &hb)| x + self.eta * hb as f64).collect();
        Ok((pre * vandermonde(&minus), vandermonde(&plus)))
    }
}

/// V(v) = ∏_{b<a} (v_a − v_b), in list order.
pub fn vandermonde(v: &[C64]) -> C64 {
    let mut r = C64::new(1.0, 0.0);
    for a in 0..v.len() {
        for b in 0..a {
            r *= v[a] - v[b];
        }
    }
    r
}

fn draw(rng: &mut ChaCha8Rng, half: f64) -> C64 {
    let re = rng.random_range(-half..half);
    // imaginary part kept away from zero
    let im = rng.random_range(0.15..half) * if rng.random::<bool>() { 1.0 } else { -1.0 };
    C64::new(re, im)
}

/// Deterministic per seed; rejection-resamples until the margin holds.
pub fn sample_generic_params(n_sites: usize, seed: u64, margin: f64) -> Result<ChainParams> {
    if n_sites == 0 {
        return Err(Error::InvalidArgument("n_sites must be ≥ 1".into()));
    }
    if !(margin > 0.0) {
        return Err(Error::InvalidArgument("margin must be positive".into()));
    }
    let eta = C64::new(1.0, 0.0);
    if margin > eta.norm() {
        return Err(Error::SamplingFailure { margin, tries: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = 0.6 + 0.45 * n_sites as f64;
    const TRIES: usize = 2000;
    for _ in 0..TRIES {
        let xi: Vec<C64> = (0..n_sites).map(|_| draw(&mut rng, half)).collect();
        if genericity_margin(eta, &xi) >= margin {
            return ChainParams::new(eta, xi, margin);
        }
    }
    Err(Error::SamplingFailure { margin, tries: TRIES })
}

/// `count` generic points in a box around the chain, kept away from the ξ_a,
/// from ξ_a ± η and from each other.
pub fn sample_points(params: &ChainParams, seed: u64, count: usize) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let rad = params.scale() + params.eta.norm();
    crate::determinant_engine::random_generic_set(&mut rng, count, rad, &params.xi, params.eta, 0.1)
}
