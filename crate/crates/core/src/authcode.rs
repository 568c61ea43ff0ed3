//! Clifford and trap authentication codes.
//!
//! Both codes are a Clifford encoder `E` acting on the message followed by
//! `|0⟩` auxiliary qubits, so they share the [`AuthKey`] interface that the
//! auditable protocol consumes. In the frame `E†(·)` the message sits at
//! positions `0..message_len()` and every other position should read `0`.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::backend::QuantumState;
use crate::error::{Error, Result};
use crate::qecc::CssCode;
use crate::symplectic::{gates, random_clifford, Bits, CliffordOp, PauliOp};

/// Result of decoding an authenticated register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthVerdict {
    pub accept: bool,
    /// Qubits holding the plaintext; `None` on reject.
    pub plaintext: Option<Vec<usize>>,
    /// Z outcomes of the non-message frame positions.
    pub flags: Bits,
}

/// Key material of an authentication code with a Clifford encoder.
pub trait AuthKey: Clone + Send + Sync + std::fmt::Debug {
    fn message_len(&self) -> usize;

    fn total_len(&self) -> usize;

    /// `E`, acting on `[message, 0…0]`.
    fn encoder(&self) -> &CliffordOp;

    /// Frame positions the auditor compares against the checking portal.
    fn checked(&self) -> Vec<usize>;

    /// Frame positions that are neither message nor checked.
    fn discarded(&self) -> Vec<usize> {
        let checked = self.checked();
        (self.message_len()..self.total_len())
            .filter(|i| !checked.contains(i))
            .collect()
    }

    /// The auditor accepts iff fewer than this many checked bits disagree.
    fn flip_tolerance(&self) -> usize;

    /// A new independent key with the same shape.
    fn fresh<R: Rng + ?Sized>(&self, rng: &mut R) -> Self;

    /// Encodes the message on `msg` with the `|0⟩` qubits `aux`.
    fn encode(&self, state: &mut QuantumState, msg: &[usize], aux: &[usize]) -> Result<()> {
        Error::check_dim(self.message_len(), msg.len())?;
        Error::check_dim(self.total_len() - self.message_len(), aux.len())?;
        let mut regs = msg.to_vec();
        regs.extend_from_slice(aux);
        state.apply_clifford(&regs, self.encoder())
    }

    /// Undoes `E` on `regs`, measures every non-message position and
    /// accepts iff all read `0`. On reject the message qubits are reset.
    fn decode<R: Rng + ?Sized>(
        &self,
        state: &mut QuantumState,
        regs: &[usize],
        rng: &mut R,
    ) -> Result<AuthVerdict> {
        Error::check_dim(self.total_len(), regs.len())?;
        state.apply_clifford(regs, &self.encoder().inverse())?;
        let (msg, rest) = regs.split_at(self.message_len());
        let flags = state.measure_z(rest, rng)?;
        let accept = flags.is_zero();
        if !accept {
            for &q in msg {
                state.reset(q, rng)?;
            }
        }
        Ok(AuthVerdict {
            accept,
            plaintext: accept.then(|| msg.to_vec()),
            flags,
        })
    }
}

/// Clifford code key: `E` uniform on `ℓ + t` qubits, traps at `ℓ..ℓ+t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordKey {
    ell: usize,
    t: usize,
    e: CliffordOp,
}

impl CliffordKey {
    pub fn random<R: Rng + ?Sized>(ell: usize, t: usize, rng: &mut R) -> Self {
        let e = if ell + t == 0 {
            CliffordOp::identity(0)
        } else {
            random_clifford(ell + t, rng)
        };
        Self { ell, t, e }
    }

    pub fn from_clifford(ell: usize, t: usize, e: CliffordOp) -> Result<Self> {
        Error::check_dim(ell + t, e.num_qubits())?;
        Ok(Self { ell, t, e })
    }

    pub fn traps(&self) -> usize {
        self.t
    }
}

impl AuthKey for CliffordKey {
    fn message_len(&self) -> usize {
        self.ell
    }

    fn total_len(&self) -> usize {
        self.ell + self.t
    }

    fn encoder(&self) -> &CliffordOp {
        &self.e
    }

    fn checked(&self) -> Vec<usize> {
        (self.ell..self.ell + self.t).collect()
    }

    fn flip_tolerance(&self) -> usize {
        1
    }

    fn fresh<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        Self::random(self.ell, self.t, rng)
    }
}

/// Trap code key for one logical qubit: the code block (`t` qubits), `t`
/// `|0⟩` traps and `t` `|+⟩` traps, permuted and one-time padded.
///
/// The encoder is `X^x Z^z Π (QECC ⊗ I^t ⊗ H^t)` on `[message, 0^{3t-1}]`,
/// so in its frame positions `1..t` are the code ancillas and `t..3t` the
/// traps.
#[derive(Clone, Debug)]
pub struct TrapKey {
    code: CssCode,
    perm: Vec<usize>,
    x: Bits,
    z: Bits,
    e: CliffordOp,
}

impl TrapKey {
    pub fn random<R: Rng + ?Sized>(code: &CssCode, rng: &mut R) -> Self {
        let n = 3 * code.q();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        let x = Bits::random(n, rng);
        let z = Bits::random(n, rng);
        Self::new(code.clone(), perm, x, z).expect("shapes agree by construction")
    }

    pub fn new(code: CssCode, perm: Vec<usize>, x: Bits, z: Bits) -> Result<Self> {
        let t = code.q();
        let n = 3 * t;
        Error::check_dim(n, perm.len())?;
        Error::check_dim(n, x.len())?;
        Error::check_dim(n, z.len())?;
        let mut base = code.encoder().tensor(&CliffordOp::identity(t));
        for _ in 0..t {
            base = base.tensor(&gates::h());
        }
        let e = CliffordOp::from_pauli(&PauliOp::from_xz(x.clone(), z.clone()))
            .compose(&CliffordOp::permutation(&perm)?)?
            .compose(&base)?;
        Ok(Self { code, perm, x, z, e })
    }

    pub fn code(&self) -> &CssCode {
        &self.code
    }

    /// Ciphertext position of frame position `k`.
    pub fn position_of(&self, k: usize) -> usize {
        self.perm[k]
    }

    pub fn pad(&self) -> (&Bits, &Bits) {
        (&self.x, &self.z)
    }
}

impl AuthKey for TrapKey {
    fn message_len(&self) -> usize {
        1
    }

    fn total_len(&self) -> usize {
        3 * self.code.q()
    }

    fn encoder(&self) -> &CliffordOp {
        &self.e
    }

    fn checked(&self) -> Vec<usize> {
        (self.code.q()..3 * self.code.q()).collect()
    }

    fn flip_tolerance(&self) -> usize {
        self.code.d()
    }

    fn fresh<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        Self::random(&self.code, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{BackendKind, Tableau};
    use crate::symplectic::Gate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fresh_state(n: usize) -> QuantumState {
        QuantumState::from_tableau(Tableau::new(n))
    }

    #[test]
    fn clifford_roundtrip_keeps_plus_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let key = CliffordKey::random(1, 4, &mut rng);
        let mut st = fresh_state(5);
        st.apply_gate(Gate::H, &[0]).unwrap();
        key.encode(&mut st, &[0], &[1, 2, 3, 4]).unwrap();
        let v = key.decode(&mut st, &[0, 1, 2, 3, 4], &mut rng).unwrap();
        assert!(v.accept);
        assert_eq!(st.peek_pauli(&[0], &"X".parse().unwrap()).unwrap(), Some(false));
    }

    #[test]
    fn empty_trap_set_always_accepts() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let key = CliffordKey::from_clifford(1, 0, CliffordOp::identity(1)).unwrap();
        let mut st = fresh_state(1);
        st.apply_gate(Gate::X, &[0]).unwrap();
        assert!(key.decode(&mut st, &[0], &mut rng).unwrap().accept);
        assert_eq!(key.checked(), Vec::<usize>::new());
    }

    #[test]
    fn rejection_resets_the_plaintext() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let key = CliffordKey::from_clifford(1, 1, CliffordOp::identity(2)).unwrap();
        let mut st = fresh_state(2);
        st.apply_gate(Gate::X, &[0]).unwrap();
        st.apply_gate(Gate::X, &[1]).unwrap();
        let v = key.decode(&mut st, &[0, 1], &mut rng).unwrap();
        assert!(!v.accept && v.plaintext.is_none());
        assert_eq!(st.peek_pauli(&[0], &"Z".parse().unwrap()).unwrap(), Some(false));
    }

    #[test]
    fn trap_roundtrip_and_layout() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let code = CssCode::steane();
        let key = TrapKey::random(&code, &mut rng);
        assert_eq!(key.total_len(), 21);
        assert_eq!(key.checked(), (7..21).collect::<Vec<_>>());
        assert_eq!(key.discarded(), (1..7).collect::<Vec<_>>());
        let mut st = QuantumState::new(BackendKind::Stabilizer, 21).unwrap();
        st.apply_gate(Gate::X, &[0]).unwrap();
        key.encode(&mut st, &[0], &(1..21).collect::<Vec<_>>()).unwrap();
        let v = key.decode(&mut st, &(0..21).collect::<Vec<_>>(), &mut rng).unwrap();
        assert!(v.accept);
        assert_eq!(st.peek_pauli(&[0], &"Z".parse().unwrap()).unwrap(), Some(true));
    }

    #[test]
    fn trap_encoding_places_plus_traps() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let code = CssCode::steane();
        let key = TrapKey::random(&code, &mut rng);
        let mut st = QuantumState::new(BackendKind::Stabilizer, 21).unwrap();
        key.encode(&mut st, &[0], &(1..21).collect::<Vec<_>>()).unwrap();
        let (x, z) = key.pad();
        for k in 7..21 {
            let pos = key.position_of(k);
            let (letter, flip) = if k < 14 { ('Z', x.get(pos)) } else { ('X', z.get(pos)) };
            let obs = PauliOp::single(1, 0, letter);
            assert_eq!(st.peek_pauli(&[pos], &obs).unwrap(), Some(flip), "frame {k}");
        }
    }
}
