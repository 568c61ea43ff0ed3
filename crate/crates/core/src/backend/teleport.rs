//! Teleportation through shared EPR pairs.

use rand::Rng;

use crate::error::{Error, Result};
use crate::symplectic::{gates, Bits, Gate, PauliOp};

use super::QuantumState;

/// Bell-measures `m` against the sender halves `s`; returns `(z, x)` where
/// `z` comes from `m` and `x` from `s`.
///
/// Afterwards the receiver halves hold `X^x Z^z |ψ⟩`.
pub fn tp_send<R: Rng + ?Sized>(
    state: &mut QuantumState,
    m: &[usize],
    s: &[usize],
    rng: &mut R,
) -> Result<(Bits, Bits)> {
    Error::check_dim(m.len(), s.len())?;
    let cx = gates::cx();
    for (&a, &b) in m.iter().zip(s) {
        state.apply_clifford(&[a, b], &cx)?;
        state.apply_gate(Gate::H, &[a])?;
    }
    let z = state.measure_z(m, rng)?;
    let x = state.measure_z(s, rng)?;
    Ok((z, x))
}

/// Applies `(X^x Z^z)†` to the receiver halves.
pub fn tp_receive(state: &mut QuantumState, r: &[usize], z: &Bits, x: &Bits) -> Result<()> {
    Error::check_dim(r.len(), z.len())?;
    Error::check_dim(r.len(), x.len())?;
    let p = PauliOp::from_xz(x.clone(), z.clone()).adjoint();
    state.apply_pauli(r, &p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{prepare, PrepSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn teleporting_one_arrives_as_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let (mut st, regs) = prepare(
                crate::backend::BackendKind::Stabilizer,
                &[PrepSpec::zeros("M", 1), PrepSpec::epr("S", "R", 1)],
            )
            .unwrap();
            let m = regs.get("M").unwrap().to_vec();
            st.apply_gate(Gate::X, &m).unwrap();
            let (z, x) = tp_send(&mut st, &m, regs.get("S").unwrap(), &mut rng).unwrap();
            tp_receive(&mut st, regs.get("R").unwrap(), &z, &x).unwrap();
            assert!(st.measure(regs.get("R").unwrap()[0], &mut rng).unwrap());
        }
    }
}
