//! Logical circuits and their direct (reference) evaluation.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::backend::{QuantumState, Tableau};
use crate::error::{Error, Result};
use crate::symplectic::{Gate, PauliOp};

/// Single-qubit stabilizer states usable as inputs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputState {
    #[default]
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl InputState {
    pub fn prepare(self, state: &mut QuantumState, q: usize) -> Result<()> {
        let gates: &[Gate] = match self {
            InputState::Zero => &[],
            InputState::One => &[Gate::X],
            InputState::Plus => &[Gate::H],
            InputState::Minus => &[Gate::X, Gate::H],
            InputState::PlusI => &[Gate::H, Gate::S],
            InputState::MinusI => &[Gate::X, Gate::H, Gate::S],
        };
        for &g in gates {
            state.apply_gate(g, &[q])?;
        }
        Ok(())
    }

    /// The signed Pauli stabilizing this state.
    pub fn stabilizer(self) -> PauliOp {
        let s = match self {
            InputState::Zero => "+Z",
            InputState::One => "-Z",
            InputState::Plus => "+X",
            InputState::Minus => "-X",
            InputState::PlusI => "+Y",
            InputState::MinusI => "-Y",
        };
        s.parse().expect("literal")
    }
}

/// What actually entered the computation for one logical input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EffectiveInput {
    State(InputState),
    /// A state followed by a Pauli applied by its (corrupted) owner.
    Tampered(InputState, PauliOp),
    /// A computational basis state fixed by a crashed owner's leftover half.
    Basis(bool),
}

impl EffectiveInput {
    fn prepare(&self, t: &mut QuantumState, q: usize) -> Result<()> {
        match self {
            EffectiveInput::State(s) => s.prepare(t, q),
            EffectiveInput::Tampered(s, p) => {
                s.prepare(t, q)?;
                t.apply_pauli(&[q], p)
            }
            EffectiveInput::Basis(b) => {
                if *b {
                    t.apply_gate(Gate::X, &[q])?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Instruction {
    Gate { gate: Gate, qubits: Vec<usize> },
    Measure { qubit: usize },
}

/// A Clifford circuit on logical qubits.
///
/// Logical qubits are numbered party by party (`inputs[0]` qubits of party
/// 0 first), followed by `ancillas` qubits in `|0⟩`. Every qubit that is
/// never measured is delivered to a receiver: by default its input owner,
/// or the party given in `receivers`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitIR {
    pub inputs: Vec<usize>,
    #[serde(default)]
    pub ancillas: usize,
    pub instructions: Vec<Instruction>,
    #[serde(default)]
    pub receivers: BTreeMap<usize, usize>,
}

impl CircuitIR {
    pub fn num_parties(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.iter().sum()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_inputs() + self.ancillas
    }

    /// Owner of each input qubit, in logical order.
    pub fn input_owners(&self) -> Vec<usize> {
        self.inputs
            .iter()
            .enumerate()
            .flat_map(|(p, &k)| std::iter::repeat(p).take(k))
            .collect()
    }

    pub fn measured(&self) -> Vec<usize> {
        self.instructions
            .iter()
            .filter_map(|i| match i {
                Instruction::Measure { qubit } => Some(*qubit),
                Instruction::Gate { .. } => None,
            })
            .collect()
    }

    /// Unmeasured logical qubits with their receivers, in logical order.
    pub fn outputs(&self) -> Vec<(usize, usize)> {
        let measured: BTreeSet<usize> = self.measured().into_iter().collect();
        let owners = self.input_owners();
        (0..self.num_qubits())
            .filter(|q| !measured.contains(q))
            .map(|q| {
                let r = self.receivers.get(&q).copied().or_else(|| owners.get(q).copied());
                (q, r.expect("validated circuit"))
            })
            .collect()
    }

    pub fn has_public_outputs(&self) -> bool {
        !self.measured().is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_qubits();
        let bad = |m: String| Err(Error::Config(m));
        let mut measured = BTreeSet::new();
        for (k, ins) in self.instructions.iter().enumerate() {
            match ins {
                Instruction::Gate { gate, qubits } => {
                    if qubits.len() != gate.arity() {
                        return bad(format!("instruction {k}: {gate} takes {} qubits", gate.arity()));
                    }
                    let distinct: BTreeSet<_> = qubits.iter().collect();
                    if distinct.len() != qubits.len() {
                        return bad(format!("instruction {k}: repeated qubit"));
                    }
                    for q in qubits {
                        if *q >= n {
                            return bad(format!("instruction {k}: qubit {q} out of range"));
                        }
                        if measured.contains(q) {
                            return bad(format!("instruction {k}: qubit {q} used after measurement"));
                        }
                    }
                }
                Instruction::Measure { qubit } => {
                    if *qubit >= n {
                        return bad(format!("instruction {k}: qubit {qubit} out of range"));
                    }
                    if !measured.insert(*qubit) {
                        return bad(format!("instruction {k}: qubit {qubit} measured twice"));
                    }
                }
            }
        }
        for (&q, &p) in &self.receivers {
            if q >= n || p >= self.num_parties() {
                return bad(format!("receiver entry {q} -> {p} out of range"));
            }
        }
        for q in self.num_inputs()..n {
            if !measured.contains(&q) && !self.receivers.contains_key(&q) {
                return bad(format!("ancilla {q} is neither measured nor delivered"));
            }
        }
        Ok(())
    }
}

/// Direct evaluation of a circuit on a stabilizer tableau.
#[derive(Clone, Debug)]
pub struct Reference {
    state: QuantumState,
    outcomes: BTreeMap<usize, bool>,
}

impl Reference {
    /// Evaluates `circuit` on `inputs` (one per input qubit). Measurement
    /// outcomes are taken from `forced` when given, otherwise sampled.
    /// Returns `None` if a forced outcome has probability zero.
    pub fn run<R: Rng + ?Sized>(
        circuit: &CircuitIR,
        inputs: &[EffectiveInput],
        forced: Option<&[bool]>,
        rng: &mut R,
    ) -> Result<Option<Self>> {
        Error::check_dim(circuit.num_inputs(), inputs.len())?;
        let mut st = QuantumState::from_tableau(Tableau::new(circuit.num_qubits()));
        for (q, inp) in inputs.iter().enumerate() {
            inp.prepare(&mut st, q)?;
        }
        let mut outcomes = BTreeMap::new();
        let mut k = 0;
        for ins in &circuit.instructions {
            match ins {
                Instruction::Gate { gate, qubits } => st.apply_gate(*gate, qubits)?,
                Instruction::Measure { qubit } => {
                    let z = PauliOp::z_on(1, 0);
                    let bit = match (st.peek_pauli(&[*qubit], &z)?, forced) {
                        (Some(b), Some(f)) if f.get(k) != Some(&b) => return Ok(None),
                        (Some(b), _) => b,
                        (None, Some(f)) => {
                            let want = *f.get(k).ok_or_else(|| Error::Config("too few forced outcomes".into()))?;
                            // A stabilizer anticommuting with Z maps one
                            // post-measurement branch onto the other.
                            let n = st.num_qubits();
                            let swap = st
                                .tableau()
                                .expect("reference is a tableau")
                                .stabilizers()
                                .iter()
                                .find(|g| g.x().get(*qubit))
                                .cloned()
                                .expect("random outcome has an anticommuting stabilizer");
                            if st.measure(*qubit, rng)? != want {
                                st.apply_pauli(&(0..n).collect::<Vec<_>>(), &swap)?;
                            }
                            want
                        }
                        (None, None) => st.measure(*qubit, rng)?,
                    };
                    outcomes.insert(*qubit, bit);
                    k += 1;
                }
            }
        }
        Ok(Some(Self { state: st, outcomes }))
    }

    /// Measurement outcomes in instruction order.
    pub fn classical(&self, circuit: &CircuitIR) -> Vec<bool> {
        circuit.measured().iter().map(|q| self.outcomes[q]).collect()
    }

    pub fn state(&self) -> &QuantumState {
        &self.state
    }

    /// Signed generators of the reduced state on `keep` (in the given
    /// order): the stabilizers supported inside `keep`.
    pub fn output_stabilizers(&self, keep: &[usize]) -> Vec<PauliOp> {
        let t = self.state.tableau().expect("reference is a tableau");
        let n = t.num_qubits();
        let mut rows: Vec<PauliOp> = t.stabilizers().to_vec();
        let mut pivot_row = 0;
        for q in (0..n).filter(|q| !keep.contains(q)) {
            for bit in [0, 1] {
                let has = |p: &PauliOp| if bit == 0 { p.x().get(q) } else { p.z().get(q) };
                let Some(r) = (pivot_row..rows.len()).find(|&r| has(&rows[r])) else {
                    continue;
                };
                rows.swap(pivot_row, r);
                let pivot = rows[pivot_row].clone();
                for (k, row) in rows.iter_mut().enumerate() {
                    if k != pivot_row && has(row) {
                        *row = row.compose(&pivot).expect("same size");
                    }
                }
                pivot_row += 1;
            }
        }
        rows[pivot_row..]
            .iter()
            .filter_map(|g| {
                let mut local = g.gather(keep);
                local.set_phase(g.phase());
                (!local.is_identity()).then_some(local)
            })
            .collect()
    }

    /// Whether the qubits `positions` of `actual` (one per entry of `keep`)
    /// are in exactly the reference output state.
    pub fn outputs_match(&self, keep: &[usize], actual: &QuantumState, positions: &[usize]) -> Result<bool> {
        Error::check_dim(keep.len(), positions.len())?;
        for g in self.output_stabilizers(keep) {
            if actual.peek_pauli(positions, &g)? != Some(false) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cnot_measure() -> CircuitIR {
        CircuitIR {
            inputs: vec![1, 1],
            ancillas: 0,
            instructions: vec![
                Instruction::Gate {
                    gate: Gate::CX,
                    qubits: vec![0, 1],
                },
                Instruction::Measure { qubit: 1 },
            ],
            receivers: BTreeMap::new(),
        }
    }

    #[test]
    fn validation_catches_reuse_and_undelivered_ancilla() {
        let mut c = cnot_measure();
        c.validate().unwrap();
        c.instructions.push(Instruction::Gate {
            gate: Gate::H,
            qubits: vec![1],
        });
        assert!(c.validate().is_err());
        let mut c = cnot_measure();
        c.ancillas = 1;
        assert!(c.validate().is_err());
        c.receivers.insert(2, 0);
        c.validate().unwrap();
    }

    #[test]
    fn forced_reference_follows_requested_branch() {
        let c = cnot_measure();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inputs = [EffectiveInput::State(InputState::Plus), EffectiveInput::State(InputState::One)];
        for r in [false, true] {
            let reference = Reference::run(&c, &inputs, Some(&[r]), &mut rng).unwrap().unwrap();
            assert_eq!(reference.classical(&c), vec![r]);
            let g = reference.output_stabilizers(&[0]);
            assert_eq!(g.len(), 1);
            // q1 = 1 ⊕ q0, so the remaining qubit is |¬r⟩.
            assert!(g[0].same_bits(&PauliOp::z_on(1, 0)));
            assert_eq!(g[0].is_negative(), !r);
        }
        let inputs = [EffectiveInput::State(InputState::Zero), EffectiveInput::State(InputState::Zero)];
        assert!(Reference::run(&c, &inputs, Some(&[true]), &mut rng).unwrap().is_none());
    }

    #[test]
    fn outputs_default_to_input_owners() {
        let mut c = cnot_measure();
        c.receivers.insert(0, 1);
        assert_eq!(c.outputs(), vec![(0, 1)]);
        assert_eq!(cnot_measure().outputs(), vec![(0, 0)]);
    }

    #[test]
    fn circuit_json_shape() {
        let c = cnot_measure();
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"op\":\"gate\"") && s.contains("\"CX\""));
        let back: CircuitIR = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
