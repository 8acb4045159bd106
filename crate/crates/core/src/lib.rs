//! Separation of variables for the antiperiodic spin-1/2 XXX chain.
//!
//! Every closed formula here (SoV states, T-Q spectrum, determinant
//! representations, form factors) has a brute-force counterpart in
//! [`dense_oracle`], and the test suites compare the two.

pub mod aba_bridge;
pub mod chain_model;
pub mod cli_harness;
pub mod complex_poly;
pub mod dense_oracle;
pub mod determinant_engine;
pub mod error;
pub mod form_factors;
pub mod linalg;
pub mod scalar_products;
pub mod sov_states;
pub mod spectrum_tq;

pub use num_complex::Complex64 as C64;

pub use chain_model::ChainParams;
pub use complex_poly::ComplexPoly;
pub use error::{Error, Result};
pub use spectrum_tq::{EigenRecord, Spectrum};

/// Shorthand for a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Relative distance |a−b| / max(|a|,|b|,floor).
pub fn rel_err(a: C64, b: C64, floor: f64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(floor)
}
