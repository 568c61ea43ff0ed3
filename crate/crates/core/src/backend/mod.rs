//! State simulation: a stabilizer tableau for protocol runs and a small dense
//! state vector for arbitrary-unitary experiments.

pub mod dense;
mod registers;
mod state;
pub mod tableau;
pub mod teleport;

pub use dense::DenseState;
pub use registers::RegisterMap;
pub use state::{BackendKind, QuantumState};
pub use tableau::Tableau;
pub use teleport::{tp_receive, tp_send};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One entry of a [`prepare`] request.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PrepSpec {
    Zeros { name: String, k: usize },
    Plus { name: String, k: usize },
    /// `k` Bell pairs; qubit `i` of `a` is paired with qubit `i` of `b`.
    Epr { a: String, b: String, k: usize },
}

impl PrepSpec {
    pub fn zeros(name: &str, k: usize) -> Self {
        PrepSpec::Zeros { name: name.into(), k }
    }

    pub fn plus(name: &str, k: usize) -> Self {
        PrepSpec::Plus { name: name.into(), k }
    }

    pub fn epr(a: &str, b: &str, k: usize) -> Self {
        PrepSpec::Epr {
            a: a.into(),
            b: b.into(),
            k,
        }
    }

    fn qubits(&self) -> usize {
        match self {
            PrepSpec::Zeros { k, .. } | PrepSpec::Plus { k, .. } => *k,
            PrepSpec::Epr { k, .. } => 2 * k,
        }
    }
}

/// Builds a fresh state holding the requested registers in order.
pub fn prepare(kind: BackendKind, spec: &[PrepSpec]) -> Result<(QuantumState, RegisterMap)> {
    let total = spec.iter().map(PrepSpec::qubits).sum();
    let mut st = QuantumState::new(kind, total)?;
    let mut regs = RegisterMap::new();
    let mut next = 0;
    let mut take = |k: usize| {
        let r: Vec<usize> = (next..next + k).collect();
        next += k;
        r
    };
    for item in spec {
        match item {
            PrepSpec::Zeros { name, k } => regs.insert(name, take(*k), total)?,
            PrepSpec::Plus { name, k } => {
                let r = take(*k);
                st.prepare_plus(&r)?;
                regs.insert(name, r, total)?;
            }
            PrepSpec::Epr { a, b, k } => {
                let ra = take(*k);
                let rb = take(*k);
                st.prepare_epr(&ra, &rb)?;
                regs.insert(a, ra, total)?;
                regs.insert(b, rb, total)?;
            }
        }
    }
    Ok((st, regs))
}
