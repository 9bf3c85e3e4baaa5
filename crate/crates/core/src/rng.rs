//! Deterministic random number generation.
//!
//! Every stochastic routine in the crate draws from a ChaCha8 generator that
//! is derived from a single experiment seed.  Independent consumers get
//! independent streams of the same seeded generator, so adding draws to one
//! consumer never perturbs another and whole runs replay bit for bit.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Stream ids for the fixed consumers of an experiment seed.  Ad hoc
/// consumers (per-segment field noise, per-trial sweeps) start at
/// [`streams::DYNAMIC_BASE`] and add their own offset.
pub mod streams {
    pub const GENERATORS: u64 = 1;
    pub const CODE_SEARCH: u64 = 2;
    pub const COMPLETION: u64 = 3;
    pub const SYNTHESIS: u64 = 4;
    pub const CONTROL: u64 = 5;
    pub const PROJECTION: u64 = 6;
    pub const SWEEP: u64 = 7;
    pub const FIELDS: u64 = 8;
    pub const INITIAL_STATE: u64 = 9;
    pub const DYNAMIC_BASE: u64 = 1 << 32;
}

/// Root generator for a seed (stream 0).
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    rng_stream(seed, 0)
}

/// Generator for one consumer stream of a seed.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian: re and im are N(0, 1/2), so E|z|^2 = 1.
pub fn standard_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}
