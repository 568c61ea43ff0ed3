//! Trusted-party reference functionalities for real-vs-ideal comparisons.

use std::collections::BTreeSet;

use rand::Rng;

use crate::aqa::AqaVerdict;
use crate::authcode::AuthKey;
use crate::backend::QuantumState;
use crate::error::Result;
use crate::symplectic::PauliOp;

use super::circuit::{CircuitIR, EffectiveInput, Reference};

/// The trusted party receives `regs` encoded under `key` from `sender`.
///
/// If the sender deviates or the ciphertext does not verify, the sender is
/// identified and the registers are discarded. Otherwise the plaintext is
/// re-authenticated under a fresh key on new qubits, which are returned.
pub fn ideal_aqa<K: AuthKey, R: Rng + ?Sized>(
    state: &mut QuantumState,
    key: &K,
    regs: &[usize],
    sender: usize,
    deviate: bool,
    rng: &mut R,
) -> Result<(AqaVerdict<K>, Vec<usize>)> {
    if deviate {
        state.release(regs, rng)?;
        return Ok((AqaVerdict::Identified { party: sender }, Vec::new()));
    }
    let v = key.decode(state, regs, rng)?;
    let Some(msg) = v.plaintext else {
        state.release(regs, rng)?;
        return Ok((AqaVerdict::Identified { party: sender }, Vec::new()));
    };
    let ell = key.message_len();
    state.release(&regs[ell..], rng)?;
    let fresh = key.fresh(rng);
    let aux = state.alloc(fresh.total_len() - ell)?;
    fresh.encode(state, &msg, &aux)?;
    let mut out = msg;
    out.extend(aux);
    let verdict = AqaVerdict::Accepted {
        correction: PauliOp::identity(fresh.total_len()),
        key: fresh,
        flips: 0,
    };
    Ok((verdict, out))
}

/// What the ideal-world adversary decides.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdealChoices {
    /// Corrupted parties that abort before the computation.
    pub abort_before: BTreeSet<usize>,
    /// Corrupted parties that abort after seeing their outputs.
    pub abort_after_output: BTreeSet<usize>,
}

#[derive(Clone, Debug)]
pub struct IdealOutcome {
    pub aborted: bool,
    /// `Corr`, sorted.
    pub identified: Vec<usize>,
    /// Public classical output; empty if nothing was computed.
    pub r_out: Vec<bool>,
    pub reference: Option<Reference>,
}

/// Computation with abort bookkeeping: the trusted party computes unless
/// more than `thres` parties abort up front. `inputs` are the inputs after
/// the adversary's substitutions.
pub fn ideal_rqc<R: Rng + ?Sized>(
    circuit: &CircuitIR,
    inputs: &[EffectiveInput],
    choices: &IdealChoices,
    thres: usize,
    rng: &mut R,
) -> Result<IdealOutcome> {
    let corr: Vec<usize> = choices.abort_before.iter().copied().collect();
    if corr.len() > thres {
        return Ok(IdealOutcome {
            aborted: true,
            identified: corr,
            r_out: Vec::new(),
            reference: None,
        });
    }
    let reference = Reference::run(circuit, inputs, None, rng)?.expect("unforced run always succeeds");
    Ok(IdealOutcome {
        aborted: false,
        identified: corr,
        r_out: reference.classical(circuit),
        reference: Some(reference),
    })
}

/// [`ideal_rqc`] followed by output delivery. The public output is published
/// first; parties aborting afterwards join `Corr`, and the run aborts if
/// `Corr` then exceeds `thres`.
pub fn ideal_mpqc<R: Rng + ?Sized>(
    circuit: &CircuitIR,
    inputs: &[EffectiveInput],
    choices: &IdealChoices,
    thres: usize,
    rng: &mut R,
) -> Result<IdealOutcome> {
    let mut out = ideal_rqc(circuit, inputs, choices, thres, rng)?;
    if out.aborted {
        return Ok(out);
    }
    let corr: BTreeSet<usize> = out
        .identified
        .iter()
        .chain(&choices.abort_after_output)
        .copied()
        .collect();
    out.identified = corr.into_iter().collect();
    out.aborted = out.identified.len() > thres;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::authcode::CliffordKey;
    use crate::mpqc::InputState;
    use crate::rng::SimRng;
    use rand::SeedableRng;
    use serde_json::json;

    #[test]
    fn honest_ideal_aqa_keeps_the_plaintext() {
        let mut rng = SimRng::seed_from_u64(7);
        let mut st = QuantumState::new(crate::backend::BackendKind::Stabilizer, 0).unwrap();
        let ref_half = st.alloc(2).unwrap();
        let msg = st.alloc(2).unwrap();
        for i in 0..2 {
            st.prepare_epr(&ref_half[i..=i], &msg[i..=i]).unwrap();
        }
        let key = CliffordKey::random(2, 3, &mut rng);
        let aux = st.alloc(3).unwrap();
        key.encode(&mut st, &msg, &aux).unwrap();
        let mut regs = msg.clone();
        regs.extend(aux);
        let (v, out) = ideal_aqa(&mut st, &key, &regs, 0, false, &mut rng).unwrap();
        let AqaVerdict::Accepted { key: k2, .. } = v else {
            panic!("honest sender identified");
        };
        let d = k2.decode(&mut st, &out, &mut rng).unwrap();
        let pt = d.plaintext.unwrap();
        for i in 0..2 {
            for p in ["XX", "ZZ"] {
                let g: PauliOp = p.parse().unwrap();
                assert_eq!(st.peek_pauli(&[ref_half[i], pt[i]], &g).unwrap(), Some(false));
            }
        }
    }

    #[test]
    fn deviating_sender_is_identified() {
        let mut rng = SimRng::seed_from_u64(8);
        let mut st = QuantumState::new(crate::backend::BackendKind::Stabilizer, 0).unwrap();
        let regs = st.alloc(4).unwrap();
        let key = CliffordKey::random(1, 3, &mut rng);
        let (v, out) = ideal_aqa(&mut st, &key, &regs, 5, true, &mut rng).unwrap();
        assert_eq!(v.identified(), Some(5));
        assert!(out.is_empty());
    }

    fn cnot_measure() -> CircuitIR {
        serde_json::from_value(json!({
            "inputs": [1, 1],
            "instructions": [
                {"op": "gate", "gate": "CX", "qubits": [0, 1]},
                {"op": "measure", "qubit": 1}
            ]
        }))
        .unwrap()
    }

    #[test]
    fn abort_after_output_names_the_party() {
        let mut rng = SimRng::seed_from_u64(9);
        let inputs = vec![EffectiveInput::State(InputState::One); 2];
        let choices = IdealChoices {
            abort_after_output: [1].into(),
            ..Default::default()
        };
        let out = ideal_mpqc(&cnot_measure(), &inputs, &choices, 0, &mut rng).unwrap();
        assert!(out.aborted);
        assert_eq!(out.identified, vec![1]);
        assert_eq!(out.r_out, vec![false]);
    }

    #[test]
    fn aborts_within_threshold_still_compute() {
        let mut rng = SimRng::seed_from_u64(10);
        let inputs = vec![EffectiveInput::State(InputState::One), EffectiveInput::State(InputState::Zero)];
        let choices = IdealChoices {
            abort_before: [0].into(),
            ..Default::default()
        };
        let out = ideal_rqc(&cnot_measure(), &inputs, &choices, 1, &mut rng).unwrap();
        assert!(!out.aborted);
        assert_eq!(out.r_out, vec![true]);
        let out = ideal_rqc(&cnot_measure(), &inputs, &choices, 0, &mut rng).unwrap();
        assert!(out.aborted && out.r_out.is_empty());
    }
}
