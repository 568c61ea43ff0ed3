//! Pauli and Clifford algebra over GF(2) with exact phase tracking.
//!
//! Qubit 0 is the leftmost tensor factor throughout the crate; in dense
//! vectors it is the most significant bit of the basis index.

pub mod bits;
pub mod clifford;
pub mod gates;
pub mod pauli;
pub mod sampling;

pub use bits::Bits;
pub use clifford::CliffordOp;
pub use gates::Gate;
pub use pauli::PauliOp;
pub use sampling::{random_clifford, random_pauli};
