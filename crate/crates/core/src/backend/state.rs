use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::{gates, Bits, CliffordOp, Gate, PauliOp};

use super::dense::DenseState;
use super::tableau::Tableau;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Stabilizer,
    Dense,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Stabilizer => "stabilizer",
            BackendKind::Dense => "dense",
        })
    }
}

impl FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stabilizer" => Ok(BackendKind::Stabilizer),
            "dense" => Ok(BackendKind::Dense),
            other => Err(Error::Parse(format!("unknown backend {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
enum Inner {
    Stabilizer(Tableau),
    Dense(DenseState),
}

/// A simulated register of qubits on either backend.
///
/// Qubits are allocated in `|0⟩` and can be released after use; released
/// qubits are reset and recycled by later allocations, which keeps the
/// tableau small in long protocol runs.
#[derive(Clone, Debug)]
pub struct QuantumState {
    inner: Inner,
    free: Vec<usize>,
}

impl QuantumState {
    pub fn new(kind: BackendKind, n: usize) -> Result<Self> {
        let inner = match kind {
            BackendKind::Stabilizer => Inner::Stabilizer(Tableau::new(n)),
            BackendKind::Dense => Inner::Dense(DenseState::new(n)?),
        };
        Ok(Self { inner, free: Vec::new() })
    }

    pub fn from_tableau(t: Tableau) -> Self {
        Self {
            inner: Inner::Stabilizer(t),
            free: Vec::new(),
        }
    }

    pub fn from_dense(d: DenseState) -> Self {
        Self {
            inner: Inner::Dense(d),
            free: Vec::new(),
        }
    }

    pub fn kind(&self) -> BackendKind {
        match self.inner {
            Inner::Stabilizer(_) => BackendKind::Stabilizer,
            Inner::Dense(_) => BackendKind::Dense,
        }
    }

    pub fn num_qubits(&self) -> usize {
        match &self.inner {
            Inner::Stabilizer(t) => t.num_qubits(),
            Inner::Dense(d) => d.num_qubits(),
        }
    }

    pub fn tableau(&self) -> Option<&Tableau> {
        match &self.inner {
            Inner::Stabilizer(t) => Some(t),
            Inner::Dense(_) => None,
        }
    }

    pub fn dense(&self) -> Option<&DenseState> {
        match &self.inner {
            Inner::Dense(d) => Some(d),
            Inner::Stabilizer(_) => None,
        }
    }

    /// `k` qubits in `|0⟩`, recycled ones first (lowest index first).
    pub fn alloc(&mut self, k: usize) -> Result<Vec<usize>> {
        let reuse = k.min(self.free.len());
        self.free.sort_unstable_by(|a, b| b.cmp(a));
        let mut out: Vec<usize> = self.free.split_off(self.free.len() - reuse);
        out.reverse();
        let fresh = k - reuse;
        if fresh > 0 {
            let range = match &mut self.inner {
                Inner::Stabilizer(t) => t.add_qubits(fresh),
                Inner::Dense(d) => d.add_qubits(fresh)?,
            };
            out.extend(range);
        }
        Ok(out)
    }

    /// Measures and resets `qubits`, then returns them to the free pool.
    pub fn release<R: Rng + ?Sized>(&mut self, qubits: &[usize], rng: &mut R) -> Result<()> {
        for &q in qubits {
            self.reset(q, rng)?;
            self.free.push(q);
        }
        Ok(())
    }

    /// Number of qubits currently in use.
    pub fn live_qubits(&self) -> usize {
        self.num_qubits() - self.free.len()
    }

    pub fn apply_clifford(&mut self, positions: &[usize], c: &CliffordOp) -> Result<()> {
        match &mut self.inner {
            Inner::Stabilizer(t) => t.apply_clifford(positions, c),
            Inner::Dense(d) => d.apply_clifford(positions, c),
        }
    }

    pub fn apply_gate(&mut self, gate: Gate, positions: &[usize]) -> Result<()> {
        Error::check_dim(gate.arity(), positions.len())?;
        match (&mut self.inner, gate) {
            (Inner::Stabilizer(t), Gate::H) => t.h(positions[0]),
            (Inner::Stabilizer(t), Gate::S) => t.s(positions[0]),
            (Inner::Stabilizer(t), Gate::Sdg) => t.sdg(positions[0]),
            (Inner::Stabilizer(t), Gate::X) => t.x(positions[0]),
            (Inner::Stabilizer(t), Gate::Z) => t.z(positions[0]),
            (Inner::Stabilizer(t), Gate::CX) => t.cx(positions[0], positions[1]),
            _ => self.apply_clifford(positions, &gate.clifford()),
        }
    }

    pub fn apply_pauli(&mut self, positions: &[usize], p: &PauliOp) -> Result<()> {
        match &mut self.inner {
            Inner::Stabilizer(t) => t.apply_pauli(positions, p),
            Inner::Dense(d) => d.apply_pauli(positions, p),
        }
    }

    /// Arbitrary unitary; dense backend only.
    pub fn apply_unitary(&mut self, positions: &[usize], u: &DMatrix<Complex64>) -> Result<()> {
        match &mut self.inner {
            Inner::Dense(d) => d.apply_unitary(positions, u),
            Inner::Stabilizer(_) => Err(Error::WrongBackend { expected: "dense" }),
        }
    }

    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool> {
        match &mut self.inner {
            Inner::Stabilizer(t) => t.measure(q, rng),
            Inner::Dense(d) => d.measure(q, rng),
        }
    }

    pub fn measure_z<R: Rng + ?Sized>(&mut self, positions: &[usize], rng: &mut R) -> Result<Bits> {
        let mut out = Bits::zeros(positions.len());
        for (k, &q) in positions.iter().enumerate() {
            out.set(k, self.measure(q, rng)?);
        }
        Ok(out)
    }

    /// Measures `q` and returns it to `|0⟩`.
    pub fn reset<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<()> {
        if self.measure(q, rng)? {
            self.apply_gate(Gate::X, &[q])?;
        }
        Ok(())
    }

    /// `Some(bit)` if measuring the Hermitian Pauli `p` on `positions` is
    /// deterministic (`true` for eigenvalue `-1`).
    pub fn peek_pauli(&self, positions: &[usize], p: &PauliOp) -> Result<Option<bool>> {
        match &self.inner {
            Inner::Stabilizer(t) => t.peek_pauli(positions, p),
            Inner::Dense(d) => {
                if !p.is_hermitian() {
                    return Err(Error::Parse(format!("{p} is not Hermitian")));
                }
                let e = d.expectation(positions, p)?;
                Ok(if (e - 1.0).abs() < 1e-9 {
                    Some(false)
                } else if (e + 1.0).abs() < 1e-9 {
                    Some(true)
                } else {
                    None
                })
            }
        }
    }

    /// Equality up to global phase; both states must use the same backend.
    pub fn state_equal(&self, other: &QuantumState) -> Result<bool> {
        match (&self.inner, &other.inner) {
            (Inner::Stabilizer(a), Inner::Stabilizer(b)) => Ok(a.same_state(b)),
            (Inner::Dense(a), Inner::Dense(b)) => {
                if a.num_qubits() != b.num_qubits() {
                    return Ok(false);
                }
                Ok((a.fidelity(b)? - 1.0).abs() < 1e-10)
            }
            _ => Err(Error::WrongBackend {
                expected: match self.kind() {
                    BackendKind::Stabilizer => "stabilizer",
                    BackendKind::Dense => "dense",
                },
            }),
        }
    }

    /// Dense amplitudes of the whole state.
    pub fn amplitudes(&self) -> Result<Vec<Complex64>> {
        match &self.inner {
            Inner::Stabilizer(t) => t.to_dense(),
            Inner::Dense(d) => Ok(d.amplitudes().to_vec()),
        }
    }

    pub(crate) fn prepare_plus(&mut self, positions: &[usize]) -> Result<()> {
        for &q in positions {
            self.apply_gate(Gate::H, &[q])?;
        }
        Ok(())
    }

    /// Prepares `(a[i], b[i])` in `|Φ+⟩` for every `i`.
    pub fn prepare_epr(&mut self, a: &[usize], b: &[usize]) -> Result<()> {
        Error::check_dim(a.len(), b.len())?;
        let cx = gates::cx();
        for (&p, &q) in a.iter().zip(b) {
            self.apply_gate(Gate::H, &[p])?;
            self.apply_clifford(&[p, q], &cx)?;
        }
        Ok(())
    }
}
