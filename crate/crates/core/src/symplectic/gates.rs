//! Elementary Clifford gates and their serializable identifiers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::clifford::CliffordOp;
use super::pauli::PauliOp;
use crate::error::Error;

fn table(x: &[&str], z: &[&str]) -> CliffordOp {
    let parse = |s: &&str| s.parse::<PauliOp>().expect("static gate table");
    CliffordOp::from_images(x.iter().map(parse).collect(), z.iter().map(parse).collect())
        .expect("static gate table is symplectic")
}

pub fn h() -> CliffordOp {
    table(&["Z"], &["X"])
}

/// Phase gate, `X ↦ Y`.
pub fn s() -> CliffordOp {
    table(&["Y"], &["Z"])
}

pub fn sdg() -> CliffordOp {
    table(&["-Y"], &["Z"])
}

pub fn x() -> CliffordOp {
    table(&["X"], &["-Z"])
}

pub fn y() -> CliffordOp {
    table(&["-X"], &["-Z"])
}

pub fn z() -> CliffordOp {
    table(&["-X"], &["Z"])
}

/// CNOT with qubit 0 as control.
pub fn cx() -> CliffordOp {
    table(&["XX", "IX"], &["ZI", "ZZ"])
}

pub fn cz() -> CliffordOp {
    table(&["XZ", "ZX"], &["ZI", "IZ"])
}

pub fn swap() -> CliffordOp {
    table(&["IX", "XI"], &["IZ", "ZI"])
}

/// Named gates usable in circuits and code descriptors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gate {
    I,
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    CX,
    CZ,
    Swap,
}

impl Gate {
    pub const ALL: [Gate; 10] = [
        Gate::I,
        Gate::X,
        Gate::Y,
        Gate::Z,
        Gate::H,
        Gate::S,
        Gate::Sdg,
        Gate::CX,
        Gate::CZ,
        Gate::Swap,
    ];

    pub fn arity(self) -> usize {
        match self {
            Gate::CX | Gate::CZ | Gate::Swap => 2,
            _ => 1,
        }
    }

    pub fn clifford(self) -> CliffordOp {
        match self {
            Gate::I => CliffordOp::identity(1),
            Gate::X => x(),
            Gate::Y => y(),
            Gate::Z => z(),
            Gate::H => h(),
            Gate::S => s(),
            Gate::Sdg => sdg(),
            Gate::CX => cx(),
            Gate::CZ => cz(),
            Gate::Swap => swap(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::I => "I",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::H => "H",
            Gate::S => "S",
            Gate::Sdg => "Sdg",
            Gate::CX => "CX",
            Gate::CZ => "CZ",
            Gate::Swap => "Swap",
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Gate::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s) || (s.eq_ignore_ascii_case("CNOT") && *g == Gate::CX))
            .ok_or_else(|| Error::Parse(format!("unknown gate {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_tables_are_valid_and_named() {
        for g in Gate::ALL {
            let c = g.clifford();
            assert_eq!(c.num_qubits(), g.arity());
            assert_eq!(g.name().parse::<Gate>().unwrap(), g);
        }
        assert_eq!("cnot".parse::<Gate>().unwrap(), Gate::CX);
    }

    #[test]
    fn s_squared_is_z_and_sdg_inverts_s() {
        assert_eq!(s().compose(&s()).unwrap(), z());
        assert!(s().compose(&sdg()).unwrap().is_identity());
        assert_eq!(h().compose(&h()).unwrap(), CliffordOp::identity(1));
    }
}
