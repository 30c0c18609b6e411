//! Ordered factorization of quantum time evolution.
//!
//! Given a Hamiltonian H(t) = Σ_n h_n(t) G_n on a d-dimensional Hilbert
//! space, this crate computes the exact time-ordered propagator U(t) on a
//! time grid and then greedily synthesizes it as a time-ordered product of
//! elementary exponentials exp(−i F_q G_{p_q}), each acting over a
//! contiguous time slice. A fixed-schedule Trotter baseline and brute-force
//! search oracles are included for comparison and verification.

pub mod baseline;
pub mod error;
pub mod evolve;
pub mod factorize;
pub mod lie;
pub mod matrix;
pub mod oracle;
pub mod problem;
pub mod pulse;

pub use error::{Error, Result};
pub use matrix::{frob_distance, herm_expm, score, unitarity_defect, MatchMetric, SquareMatrix};
