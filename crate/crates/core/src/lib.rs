//! Simulation and analysis of non-Markovian permutation-noise channels acting on
//! path-encoded qudits.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no IO. It provides:
//!
//! - [`numerics`]: a small dense complex linear-algebra kernel (Jacobi
//!   eigensolver, one-sided Jacobi SVD, Kronecker product, partial trace).
//! - [`states`]: density matrices, pure states, entropies, purification,
//!   fidelity and random-state sampling.
//! - [`channels`]: permutation unitaries, the probabilistic map family
//!   `t ↦ Λ_t`, Choi matrices and CP-divisibility witnessing.
//! - [`capacities`]: relative entropy of coherence, entropy exchange, quantum
//!   mutual information, coherent information and loss, with sweeps and
//!   ensemble extremization.
//! - [`tomography`]: mutually unbiased bases in `d = 4`, Born-rule count
//!   simulation, `RρR` maximum-likelihood reconstruction and Poisson
//!   Monte-Carlo error bars.
//! - [`vault`]: CMYK image encoding, per-pixel evolution with an optional
//!   classical register, compensation and decoding.
//!
//! All entropies are in bits. All indices are zero-based, matrices are stored
//! row-major, and every random routine takes a caller-supplied generator.

#![no_std]

extern crate alloc;

pub mod capacities;
pub mod channels;
mod error;
pub mod numerics;
pub mod states;
pub mod tomography;
pub mod vault;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Seeded generator used wherever the crate derives independent streams from
/// a master seed (per Monte-Carlo repetition, per pixel).
pub type StreamRng = rand_chacha::ChaCha8Rng;

/// Independent generator number `stream` derived from `master_seed`.
pub fn stream_rng(master_seed: u64, stream: u64) -> StreamRng {
    use rand::SeedableRng;
    let mut rng = StreamRng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}
