//! Simulator and checkers for the teleportation argument against
//! superluminal classical signalling.
//!
//! The crate combines four pieces: a dense few-qubit simulator
//! ([`qstate`]), Kraus channels with no-cloning and no-signalling checks
//! ([`channels`]), the teleportation protocol ([`teleport`]) and 1+1D
//! Lorentz kinematics ([`relativity`]). The [`scenario`] module composes them
//! into a single run: teleport with a message of arbitrary speed, find a
//! frame in which reception precedes emission, and certify that both qubits
//! pass a probability-one test for the input state during that interval.

pub mod channels;
pub mod error;
pub mod qstate;
pub mod relativity;
pub mod scenario;
pub mod teleport;
pub mod tol;

pub use error::{Error, Result};

/// Deterministic generator threaded through every sampling operation.
pub type SimRng = rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}
