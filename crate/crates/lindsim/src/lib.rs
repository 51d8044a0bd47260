//! Classical simulator and verification suite for a randomized, minimal-ancilla
//! quantum algorithm solving Lindblad dynamics.
//!
//! The crate has three layers:
//!
//! - exact symbolic algebra of phased Pauli strings ([`pauli`]) and the Lindblad
//!   input model with its transfer matrix ([`model`]);
//! - the randomized circuit machinery: samplers for the circuit distribution
//!   ([`sampler`]) and the dissipative-block operators with their
//!   amplitude-amplification block encodings ([`channels`]);
//! - execution and ground truth: a dense density-matrix engine on system plus one
//!   Hadamard-test ancilla ([`simulator`]) and an exact propagator oracle built
//!   from the matrix exponential of the transfer matrix ([`oracle`]).
//!
//! Everything is dense and double-precision, sized for desk-scale verification
//! (up to six system qubits).

pub mod channels;
pub mod cli;
pub mod error;
pub mod model;
pub mod oracle;
pub mod pauli;
pub mod sampler;
pub mod simulator;

pub use error::Error;

/// Largest system qubit count for which dense matrices are constructed.
pub const DENSE_LIMIT: usize = 6;
