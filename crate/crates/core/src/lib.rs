//! Auditable quantum authentication and best-of-both-worlds multiparty
//! quantum computation with publicly verifiable identifiable abort, simulated
//! on a stabilizer backend.
//!
//! The crate is layered bottom-up:
//!
//! * [`symplectic`]: Pauli and Clifford algebra.
//! * [`backend`]: stabilizer tableau and dense state vector simulation.
//! * [`qecc`]: CSS codes (Steane by default) with transversal gates.
//! * [`authcode`]: Clifford and trap authentication codes.
//! * [`aqa`]: the auditable authentication protocol and its checker.
//! * [`mpqc`]: input encoding, redistributed computation, the composed
//!   protocol, the partition driver and ideal reference functionalities.
//! * [`harness`]: adversaries, scenarios, Monte-Carlo statistics and
//!   transcripts.

pub mod aqa;
pub mod authcode;
pub mod backend;
pub mod error;
pub mod harness;
pub mod mpqc;
pub mod qecc;
pub mod rng;
pub mod symplectic;

pub use error::{Error, Result};
pub use symplectic::{random_clifford, random_pauli, Bits, CliffordOp, Gate, PauliOp};
