//! Input encoding, redistributed computation and output delivery.
//!
//! Every logical qubit is encoded in the CSS code and its shares are spread
//! round-robin over the participating parties. A party keeps one block per
//! logical qubit (its shares followed by `t` traps) and the whole register
//! is encrypted under a Clifford key only the trusted classical party knows.
//! Logical Clifford gates are key updates; logical measurements re-key the
//! measured block so that its traps check the reported outcome; outputs are
//! re-keyed per receiver and delivered through auditable authentication.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde_json::json;

use crate::aqa::{aqa_abandon, aqa_check, aqa_receive, aqa_send, aqa_setup, AqaPortals, AqaReport, AqaSecret};
use crate::authcode::{AuthKey, CliffordKey};
use crate::backend::{tp_send, BackendKind, QuantumState};
use crate::error::{Error, Result};
use crate::harness::adversary::{hooks, Flow, Hooks, Site};
use crate::harness::scheduler::{Holder, RoundScheduler};
use crate::harness::transcript::{kinds, Sender, Transcript};
use crate::qecc::{Basis, CssCode};
use crate::rng::SimRng;
use crate::symplectic::{gates, random_clifford, random_pauli, Bits, CliffordOp, Gate, PauliOp};

use super::circuit::{CircuitIR, EffectiveInput, InputState, Instruction, Reference};
use super::cmpc::CmpcState;

/// Public parameters of one protocol instance.
#[derive(Clone, Debug)]
pub struct MpqcParams {
    pub code: CssCode,
    /// Traps per share block.
    pub t: usize,
    pub thres: usize,
}

/// Owner of share `k` of every logical qubit: `group[k % n]`.
pub fn share_map(group: &[usize], q: usize) -> Vec<usize> {
    (0..q).map(|k| group[k % group.len()]).collect()
}

/// Whether `thres` identified parties can always be tolerated by erasure
/// decoding with `parties` participants.
pub fn thres_is_valid(code: &CssCode, parties: usize, thres: usize) -> bool {
    let (q, d) = (code.q(), code.d());
    if parties == 0 || parties > q || thres >= parties {
        return false;
    }
    let mut counts = vec![0usize; parties];
    for k in 0..q {
        counts[k % parties] += 1;
    }
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let worst: usize = counts.iter().take(thres).sum();
    worst < d && (d - 1) * parties > thres * q
}

/// The largest valid threshold not above `cap`.
pub fn max_thres(code: &CssCode, parties: usize, cap: usize) -> usize {
    (0..=cap).rev().find(|&t| thres_is_valid(code, parties, t)).unwrap_or(0)
}

/// Quantum state, randomness, round clock and adversary of one run.
pub struct Session<'h> {
    pub state: QuantumState,
    pub rng: SimRng,
    pub sched: RoundScheduler,
    pub hooks: &'h mut dyn Hooks,
}

impl<'h> Session<'h> {
    pub fn new(rng: SimRng, hooks: &'h mut dyn Hooks) -> Self {
        Self {
            state: QuantumState::new(BackendKind::Stabilizer, 0).expect("empty state"),
            rng,
            sched: RoundScheduler::new(),
            hooks,
        }
    }

    fn release(&mut self, qubits: &[usize]) -> Result<()> {
        self.sched.retire(qubits);
        self.state.release(qubits, &mut self.rng)
    }

    fn alloc_for(&mut self, k: usize, holder: Holder) -> Result<Vec<usize>> {
        let q = self.state.alloc(k)?;
        self.sched.assign(&q, holder);
        Ok(q)
    }
}

/// One delivered output qubit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputSlot {
    pub logical: usize,
    pub receiver: usize,
    /// `None` when the receiver could not recover it.
    pub qubit: Option<usize>,
}

/// Result of a protocol run.
#[derive(Clone, Debug)]
pub struct MpqcOutcome {
    pub aborted: bool,
    /// `Corr` at the end of the run.
    pub identified: Vec<usize>,
    pub r_out: Vec<bool>,
    /// Logical measurements whose outcome string did not decode.
    pub decode_failures: usize,
    pub effective_inputs: Vec<EffectiveInput>,
    pub outputs: Vec<OutputSlot>,
}

#[derive(Clone, Debug)]
struct Block {
    /// Share indices held in this block.
    shares: Vec<usize>,
    /// Share qubits, then trap qubits.
    qubits: Vec<usize>,
}

#[derive(Clone, Debug)]
struct Party {
    /// The encrypted register; frame position `i` is `reg[i]`.
    reg: Vec<usize>,
    blocks: BTreeMap<usize, Block>,
    key: CliffordOp,
    pad: PauliOp,
}

impl Party {
    fn frame(&self, qubits: &[usize]) -> Vec<usize> {
        qubits
            .iter()
            .map(|q| self.reg.iter().position(|r| r == q).expect("qubit in register"))
            .collect()
    }
}

/// Outcome of the re-keying check of one measured block.
pub fn solve_bits(r: &Bits, c_x: &Bits, c_t: &[Bits], s: usize) -> Option<Bits> {
    let t = r.len().checked_sub(s)?;
    if c_x.len() != s + t || c_t.len() != s || c_t.iter().any(|row| row.len() != t) {
        return None;
    }
    let plain = r.xor(c_x);
    let b = plain.slice(0, s);
    let mut traps = Bits::zeros(t);
    for k in b.ones_iter() {
        traps.xor_assign(&c_t[k]);
    }
    (traps == plain.slice(s, s + t)).then_some(b)
}

/// The block Clifford of a measurement step: CNOTs from share `k` into the
/// traps selected by `c_t[k]`, then `X^{c_x} Z^{c_z}`.
fn measure_clifford(c_z: &Bits, c_x: &Bits, c_t: &[Bits]) -> Result<CliffordOp> {
    let s = c_t.len();
    let m = c_x.len();
    let mut c = CliffordOp::identity(m);
    for (k, row) in c_t.iter().enumerate() {
        for i in row.ones_iter() {
            c = gates::cx().embed(&[k, s + i], m)?.compose(&c)?;
        }
    }
    CliffordOp::from_pauli(&PauliOp::from_xz(c_x.clone(), c_z.clone())).compose(&c)
}

/// Delivery of one packet from `sender` to `receiver`.
struct Delivery {
    sender: usize,
    receiver: usize,
    /// Output logical qubits in the packet, with the share indices of each.
    content: Vec<(usize, Vec<usize>)>,
    portals: AqaPortals,
    secret: AqaSecret<CliffordKey>,
}

/// A running instance for a fixed group of parties.
pub struct Protocol {
    params: MpqcParams,
    circuit: CircuitIR,
    group: Vec<usize>,
    owners: Vec<usize>,
    parties: BTreeMap<usize, Party>,
    cmpc: CmpcState,
    /// Sender halves of the input EPR pairs, by logical input.
    e_s: BTreeMap<usize, usize>,
    effective: Vec<EffectiveInput>,
    r_out: Vec<bool>,
    decode_failures: usize,
    finished: bool,
}

impl Protocol {
    /// Trusted preprocessing: encodes every logical qubit, hands out the
    /// encrypted share registers and opens a transcript segment (continuing
    /// `transcript` if given).
    pub fn setup(
        s: &mut Session<'_>,
        params: MpqcParams,
        circuit: &CircuitIR,
        group: &[usize],
        transcript: Option<Transcript>,
    ) -> Result<Self> {
        circuit.validate()?;
        let q = params.code.q();
        let group: Vec<usize> = group.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if group.is_empty() || group.len() > q {
            return Err(Error::Config(format!(
                "a group of {} parties does not fit {q} shares",
                group.len()
            )));
        }
        if let Some(&p) = group.iter().find(|&&p| p >= circuit.num_parties()) {
            return Err(Error::Config(format!("party {p} is not in the circuit")));
        }
        if !thres_is_valid(&params.code, group.len(), params.thres) {
            return Err(Error::Config(format!(
                "thres {} is not tolerable with {} parties and a [[{q},1,{}]] code",
                params.thres,
                group.len(),
                params.code.d()
            )));
        }
        for ins in &circuit.instructions {
            if let Instruction::Gate { gate, .. } = ins {
                params.code.transversal_gate(*gate)?;
            }
        }
        let round = s.sched.round();
        let cmpc = match transcript {
            Some(t) => CmpcState::continuing(t, &group, params.thres, "bobw0", round),
            None => CmpcState::new(&group, params.thres, "bobw0"),
        };
        let owners = share_map(&group, q);
        let in_group: BTreeSet<usize> = group.iter().copied().collect();
        let input_owners = circuit.input_owners();

        let mut blocks: BTreeMap<usize, BTreeMap<usize, Block>> = BTreeMap::new();
        let mut e_s = BTreeMap::new();
        for logical in 0..circuit.num_qubits() {
            let head = s.state.alloc(1)?;
            let anc = s.state.alloc(q - 1)?;
            if let Some(&o) = input_owners.get(logical).filter(|o| in_group.contains(o)) {
                let half = s.alloc_for(1, Holder::Party(o))?;
                s.state.prepare_epr(&half, &head)?;
                e_s.insert(logical, half[0]);
            }
            params.code.encode(&mut s.state, head[0], &anc)?;
            let mut shares = head;
            shares.extend(anc);
            for &j in &group {
                let idx: Vec<usize> = (0..q).filter(|&k| owners[k] == j).collect();
                let mut qubits: Vec<usize> = idx.iter().map(|&k| shares[k]).collect();
                qubits.extend(s.state.alloc(params.t)?);
                blocks.entry(j).or_default().insert(logical, Block { shares: idx, qubits });
            }
        }
        let mut parties = BTreeMap::new();
        for (j, blocks) in blocks {
            let reg: Vec<usize> = blocks.values().flat_map(|b| b.qubits.iter().copied()).collect();
            s.sched.assign(&reg, Holder::Party(j));
            let key = random_clifford(reg.len(), &mut s.rng);
            let pad = random_pauli(reg.len(), &mut s.rng);
            s.state.apply_clifford(&reg, &key)?;
            s.state.apply_pauli(&reg, &pad)?;
            parties.insert(j, Party { reg, blocks, key, pad });
        }
        s.sched.advance();
        Ok(Self {
            params,
            circuit: circuit.clone(),
            group,
            owners,
            parties,
            cmpc,
            e_s,
            effective: Vec::new(),
            r_out: Vec::new(),
            decode_failures: 0,
            finished: false,
        })
    }

    pub fn group(&self) -> &[usize] {
        &self.group
    }

    pub fn cmpc(&self) -> &CmpcState {
        &self.cmpc
    }

    pub fn effective_inputs(&self) -> &[EffectiveInput] {
        &self.effective
    }

    pub fn r_out(&self) -> &[bool] {
        &self.r_out
    }

    fn identify(&mut self, s: &mut Session<'_>, party: usize, reason: &str) -> Result<()> {
        self.cmpc.identify(s.sched.round(), party, reason);
        if let Some(p) = self.parties.remove(&party) {
            s.release(&p.reg)?;
        }
        Ok(())
    }

    /// Online input encoding: each owner teleports its inputs (`inputs[i]`
    /// for logical input `i`) into the encoded registers and every party
    /// removes the resulting Pauli under its key.
    pub fn ie_run(&mut self, s: &mut Session<'_>, inputs: &[InputState]) -> Result<()> {
        Error::check_dim(self.circuit.num_inputs(), inputs.len())?;
        let input_owners = self.circuit.input_owners();
        let mut fix: BTreeMap<usize, PauliOp> = self
            .parties
            .iter()
            .map(|(&j, p)| (j, PauliOp::identity(p.reg.len())))
            .collect();
        let mut per_owner: BTreeMap<usize, usize> = BTreeMap::new();
        let mut effective = Vec::with_capacity(inputs.len());
        for (logical, &chosen) in inputs.iter().enumerate() {
            let owner = input_owners[logical];
            let index = *per_owner.entry(owner).and_modify(|k| *k += 1).or_insert(0);
            let Some(&half) = self.e_s.get(&logical) else {
                effective.push(EffectiveInput::State(InputState::Zero));
                continue;
            };
            let substituted = if s.hooks.is_corrupted(owner) {
                s.hooks.input(owner, index)
            } else {
                None
            };
            let base = substituted.unwrap_or(chosen);
            let m = s.alloc_for(1, Holder::Party(owner))?;
            base.prepare(&mut s.state, m[0])?;
            let tamper = if s.hooks.is_corrupted(owner) && !self.cmpc.is_identified(owner) {
                s.sched.check_owned(Holder::Party(owner), &m)?;
                let site = Site {
                    hook: hooks::IE_PRE_SEND,
                    party: owner,
                    regs: &m,
                    zero_traps: &[],
                };
                s.hooks.quantum(&site, &mut s.state, &mut s.rng)?
            } else {
                crate::harness::adversary::Tamper::none()
            };
            if tamper.flow != Flow::Continue || self.cmpc.is_identified(owner) {
                // The owner's half collapses the encoded half to a basis state.
                let b = s.state.measure(half, &mut s.rng)?;
                s.release(&[half])?;
                s.release(&m)?;
                effective.push(EffectiveInput::Basis(b));
                self.identify(s, owner, "no input")?;
                continue;
            }
            let (z, x) = tp_send(&mut s.state, &m, &[half], &mut s.rng)?;
            s.release(&m)?;
            s.release(&[half])?;
            s.sched.advance();
            self.cmpc.publish(
                s.sched.round(),
                Sender::Party(owner),
                kinds::IE_REPORT,
                json!({ "logical": logical, "z": z.get(0), "x": x.get(0) }),
            );
            effective.push(match tamper.pauli {
                Some(p) => EffectiveInput::Tampered(base, p),
                None => EffectiveInput::State(base),
            });
            let logical_fix = PauliOp::from_xz(x, z);
            let spread = self.params.code.conjugate_through_encoder(&logical_fix)?;
            for (&j, party) in &self.parties {
                let block = &party.blocks[&logical];
                let frame = party.frame(&block.qubits[..block.shares.len()]);
                let acc = fix.get_mut(&j).expect("every party has a fix");
                for (&k, &f) in block.shares.iter().zip(&frame) {
                    if spread.x().get(k) {
                        acc.x_mut().flip(f);
                    }
                    if spread.z().get(k) {
                        acc.z_mut().flip(f);
                    }
                }
            }
        }
        for (j, c) in fix {
            let Some(party) = self.parties.get_mut(&j) else { continue };
            let correction = party.pad.compose(&party.key.conjugate(&c)?)?;
            s.state.apply_pauli(&party.reg, &correction.adjoint())?;
            party.pad = PauliOp::identity(party.reg.len());
        }
        self.e_s.clear();
        self.effective = effective;
        s.sched.advance();
        Ok(())
    }

    /// A logical Clifford gate: only the keys change.
    pub fn clifford_step(&mut self, gate: Gate, logical: &[usize]) -> Result<()> {
        let phys = self.params.code.transversal_gate(gate)?.clifford();
        Error::check_dim(gate.arity(), logical.len())?;
        for party in self.parties.values_mut() {
            let n = party.reg.len();
            let mut g = CliffordOp::identity(n);
            let s = party.blocks[&logical[0]].shares.len();
            for idx in 0..s {
                let qubits: Vec<usize> = logical.iter().map(|l| party.blocks[l].qubits[idx]).collect();
                g = phys.embed(&party.frame(&qubits), n)?.compose(&g)?;
            }
            party.key = party.key.compose(&g.inverse())?;
        }
        Ok(())
    }

    /// Verified transversal measurement of `logical`. Returns the decoded
    /// bit, or `None` once the run must abort.
    pub fn measure_step(&mut self, s: &mut Session<'_>, logical: usize) -> Result<Option<bool>> {
        let t = self.params.t;
        let mut share_bits: BTreeMap<usize, bool> = BTreeMap::new();
        let ids: Vec<usize> = self.parties.keys().copied().collect();
        let mut failed = Vec::new();
        let mut measured = Vec::new();
        for j in ids {
            let party = &self.parties[&j];
            let block = party.blocks[&logical].clone();
            let sj = block.shares.len();
            let c_z = Bits::random(sj + t, &mut s.rng);
            let c_x = Bits::random(sj + t, &mut s.rng);
            let c_t: Vec<Bits> = (0..sj).map(|_| Bits::random(t, &mut s.rng)).collect();
            let n = party.reg.len();
            let bpos = party.frame(&block.qubits);
            let rest: Vec<usize> = (0..n).filter(|f| !bpos.contains(f)).collect();
            let fresh = if rest.is_empty() {
                CliffordOp::identity(0)
            } else {
                random_clifford(rest.len(), &mut s.rng)
            };
            let v = fresh
                .embed(&rest, n)?
                .compose(&measure_clifford(&c_z, &c_x, &c_t)?.embed(&bpos, n)?)?
                .compose(&party.key.inverse())?;
            s.state.apply_clifford(&party.reg, &v)?;

            let mut flow = Flow::Continue;
            if s.hooks.is_corrupted(j) {
                s.sched.check_owned(Holder::Party(j), &block.qubits)?;
                let zero_traps: Vec<usize> = (sj..sj + t).collect();
                let site = Site {
                    hook: hooks::RQC_PRE_MEASURE,
                    party: j,
                    regs: &block.qubits,
                    zero_traps: &zero_traps,
                };
                flow = s.hooks.quantum(&site, &mut s.state, &mut s.rng)?.flow;
            }
            let mut r = s.state.measure_z(&block.qubits, &mut s.rng)?;
            if flow == Flow::Continue && s.hooks.is_corrupted(j) {
                flow = s.hooks.report(hooks::RQC_REPORT, j, &mut r, t, &mut s.rng)?;
            }
            let party = self.parties.get_mut(&j).expect("present");
            party.reg = rest.iter().map(|&f| party.reg[f]).collect();
            party.key = fresh;
            party.pad = PauliOp::identity(party.reg.len());
            party.blocks.remove(&logical);
            measured.extend(block.qubits.iter().copied());
            if flow != Flow::Continue {
                failed.push((j, "no measurement report"));
                continue;
            }
            self.cmpc.publish(
                s.sched.round() + 1,
                Sender::Party(j),
                kinds::RQC_REPORT,
                json!({ "logical": logical, "r": r.to_hex(), "len": r.len() }),
            );
            match solve_bits(&r, &c_x, &c_t, sj) {
                Some(b) => {
                    for (i, &k) in block.shares.iter().enumerate() {
                        share_bits.insert(k, b.get(i));
                    }
                }
                None => failed.push((j, "measurement check")),
            }
        }
        s.sched.advance();
        s.release(&measured)?;
        for (j, reason) in failed {
            self.identify(s, j, reason)?;
        }
        if self.check_abort(s) {
            return Ok(None);
        }
        let q = self.params.code.q();
        let mut bits = Bits::zeros(q);
        let mut erasures = Vec::new();
        for k in 0..q {
            match share_bits.get(&k) {
                Some(&b) if !self.cmpc.is_identified(self.owners[k]) => bits.set(k, b),
                _ => erasures.push(k),
            }
        }
        let bit = match self.params.code.classical_decode(&bits, &erasures, Basis::Z) {
            Some(b) => b,
            None => {
                self.decode_failures += 1;
                false
            }
        };
        self.r_out.push(bit);
        Ok(Some(bit))
    }

    fn check_abort(&mut self, s: &Session<'_>) -> bool {
        if self.cmpc.must_abort() && !self.finished {
            self.cmpc.publish_abort(s.sched.round());
            self.finished = true;
        }
        self.finished
    }

    /// Runs the circuit's instructions. Returns `false` on abort.
    pub fn run_circuit(&mut self, s: &mut Session<'_>) -> Result<bool> {
        for ins in self.circuit.instructions.clone() {
            match ins {
                Instruction::Gate { gate, qubits } => self.clifford_step(gate, &qubits)?,
                Instruction::Measure { qubit } => {
                    if self.measure_step(s, qubit)?.is_none() {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(!self.check_abort(s))
    }

    /// Ends a run that stops before delivery: publishes the classical
    /// output (or the abort) and releases every register.
    pub fn close(mut self, s: &mut Session<'_>) -> Result<(MpqcOutcome, Transcript)> {
        if !self.check_abort(s) {
            self.cmpc.publish_output(s.sched.round(), &self.r_out);
            self.finished = true;
        }
        let regs: Vec<usize> = self.parties.values().flat_map(|p| p.reg.iter().copied()).collect();
        s.release(&regs)?;
        self.parties.clear();
        Ok(self.outcome(Vec::new()))
    }

    fn outcome(self, outputs: Vec<OutputSlot>) -> (MpqcOutcome, Transcript) {
        let aborted = self.cmpc.must_abort();
        let outcome = MpqcOutcome {
            aborted,
            identified: self.cmpc.corr().iter().copied().collect(),
            r_out: self.r_out,
            decode_failures: self.decode_failures,
            effective_inputs: self.effective,
            outputs,
        };
        (outcome, self.cmpc.into_transcript())
    }

    /// Re-keys every share per receiver, delivers the packets through
    /// pairwise AQA and lets each receiver decode its outputs.
    pub fn deliver(mut self, s: &mut Session<'_>) -> Result<(MpqcOutcome, Transcript)> {
        if self.check_abort(s) {
            let regs: Vec<usize> = self.parties.values().flat_map(|p| p.reg.iter().copied()).collect();
            s.release(&regs)?;
            return Ok(self.outcome(Vec::new()));
        }
        let mut wanted: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (logical, receiver) in self.circuit.outputs() {
            if self.group.contains(&receiver) && !self.cmpc.is_identified(receiver) {
                wanted.entry(receiver).or_default().push(logical);
            }
        }

        let mut deliveries = Vec::new();
        let senders: Vec<usize> = self.parties.keys().copied().collect();
        for &j in &senders {
            let party = &self.parties[&j];
            let n = party.reg.len();
            let mut v = CliffordOp::identity(n);
            let mut packets = Vec::new();
            for (&i, logicals) in &wanted {
                let mut shares = Vec::new();
                let mut traps = Vec::new();
                let mut content = Vec::new();
                for l in logicals {
                    let b = &party.blocks[l];
                    let sj = b.shares.len();
                    shares.extend_from_slice(&b.qubits[..sj]);
                    traps.extend_from_slice(&b.qubits[sj..]);
                    content.push((*l, b.shares.clone()));
                }
                let key = CliffordKey::random(shares.len(), traps.len(), &mut s.rng);
                let mut packet = shares;
                packet.extend(traps);
                v = key.encoder().embed(&party.frame(&packet), n)?.compose(&v)?;
                packets.push((i, packet, key, content));
            }
            let v = v.compose(&party.key.inverse())?;
            s.state.apply_clifford(&party.reg, &v)?;
            let sent: BTreeSet<usize> = packets.iter().flat_map(|p| p.1.iter().copied()).collect();
            let leftover: Vec<usize> = party.reg.iter().copied().filter(|q| !sent.contains(q)).collect();
            s.release(&leftover)?;
            let party = self.parties.get_mut(&j).expect("present");
            party.reg.clear();
            party.blocks.clear();
            for (i, packet, key, content) in packets {
                let (portals, secret) = aqa_setup(&mut s.state, &key, &mut s.rng)?;
                s.sched.assign(&portals.s, Holder::Party(j));
                s.sched.assign(&portals.c, Holder::Party(j));
                s.sched.assign(&portals.r, Holder::Party(i));
                deliveries.push((packet, Delivery {
                    sender: j,
                    receiver: i,
                    content,
                    portals,
                    secret,
                }));
            }
        }
        s.sched.advance();

        let mut accepted = Vec::new();
        for (packet, mut d) in deliveries {
            let j = d.sender;
            let mut flow = if self.cmpc.is_identified(j) { Flow::Crash } else { Flow::Continue };
            if flow == Flow::Continue && s.hooks.is_corrupted(j) {
                s.sched.check_owned(Holder::Party(j), &packet)?;
                let site = Site {
                    hook: hooks::AQA_PRE_SEND,
                    party: j,
                    regs: &packet,
                    zero_traps: &[],
                };
                flow = s.hooks.quantum(&site, &mut s.state, &mut s.rng)?.flow;
            }
            if flow != Flow::Continue {
                aqa_abandon(&mut s.state, &mut d.portals, &mut s.rng)?;
                s.release(&packet)?;
                s.release(&d.portals.r)?;
                if !self.cmpc.is_identified(j) {
                    self.identify(s, j, "no aqa report")?;
                }
                continue;
            }
            let mut report = aqa_send(&mut s.state, &mut d.portals, &packet, &mut s.rng)?;
            s.sched.retire(&packet);
            if s.hooks.is_corrupted(j) {
                let honest = report.concat();
                let mut bits = honest.clone();
                let checked = report.r_c.len();
                let flow = s.hooks.report(hooks::AQA_REPORT, j, &mut bits, checked, &mut s.rng)?;
                if flow != Flow::Continue {
                    s.release(&d.portals.r)?;
                    self.identify(s, j, "no aqa report")?;
                    continue;
                }
                report.apply_offset(&bits.xor(&honest))?;
            }
            let round = s.sched.round();
            self.cmpc.publish(
                round,
                Sender::Party(j),
                kinds::AQA_REPORT,
                json!({ "sender": j, "receiver": d.receiver, "report": report_json(&report) }),
            );
            let verdict = aqa_check(&d.secret, &report, j)?;
            self.cmpc.publish(
                round,
                Sender::Cmpc,
                kinds::AQA_VERDICT,
                json!({
                    "sender": j,
                    "receiver": d.receiver,
                    "accepted": verdict.is_accepted(),
                    "identified": verdict.identified(),
                }),
            );
            if verdict.is_accepted() {
                accepted.push((d, verdict));
            } else {
                s.release(&d.portals.r)?;
                self.identify(s, j, "aqa")?;
            }
        }
        s.sched.advance();

        if self.check_abort(s) {
            for (d, _) in accepted {
                s.release(&d.portals.r)?;
            }
            return Ok(self.outcome(Vec::new()));
        }
        self.cmpc.publish_output(s.sched.round(), &self.r_out);
        self.finished = true;

        let q = self.params.code.q();
        let mut received: BTreeMap<(usize, usize), BTreeMap<usize, usize>> = BTreeMap::new();
        for (d, verdict) in accepted {
            let crate::aqa::AqaVerdict::Accepted { key, .. } = &verdict else { unreachable!() };
            if self.cmpc.is_identified(d.sender) {
                s.release(&d.portals.r)?;
                continue;
            }
            aqa_receive(&mut s.state, &d.portals, &verdict)?;
            let dec = key.decode(&mut s.state, &d.portals.r, &mut s.rng)?;
            let ell = key.message_len();
            s.release(&d.portals.r[ell..])?;
            if !dec.accept {
                s.release(&d.portals.r[..ell])?;
                continue;
            }
            let mut at = 0;
            for (logical, shares) in &d.content {
                let slot = received.entry((d.receiver, *logical)).or_default();
                for &k in shares {
                    slot.insert(k, d.portals.r[at]);
                    at += 1;
                }
            }
        }
        let mut outputs = Vec::new();
        for (&i, logicals) in &wanted {
            for &l in logicals {
                let got = received.remove(&(i, l)).unwrap_or_default();
                let mut shares = Vec::with_capacity(q);
                let mut erasures = Vec::new();
                for k in 0..q {
                    match got.get(&k) {
                        Some(&qb) => shares.push(qb),
                        None => {
                            shares.push(s.alloc_for(1, Holder::Party(i))?[0]);
                            erasures.push(k);
                        }
                    }
                }
                let ok = erasures.len() < self.params.code.d()
                    && self.params.code.decode(&mut s.state, &shares, &erasures, &mut s.rng)?;
                s.release(&shares[1..])?;
                let qubit = if ok {
                    Some(shares[0])
                } else {
                    s.release(&shares[..1])?;
                    None
                };
                outputs.push(OutputSlot {
                    logical: l,
                    receiver: i,
                    qubit,
                });
            }
        }
        Ok(self.outcome(outputs))
    }
}

fn report_json(r: &AqaReport) -> serde_json::Value {
    serde_json::to_value(r).expect("report serializes")
}

/// Full run for `group`: preprocessing, input encoding, computation and
/// delivery. Inputs of parties outside `group` are replaced by `|0⟩` and
/// their outputs are dropped.
pub fn bobw0_run(
    s: &mut Session<'_>,
    params: MpqcParams,
    circuit: &CircuitIR,
    group: &[usize],
    inputs: &[InputState],
    transcript: Option<Transcript>,
) -> Result<(MpqcOutcome, Transcript)> {
    let mut p = Protocol::setup(s, params, circuit, group, transcript)?;
    p.ie_run(s, inputs)?;
    if !p.check_abort(s) {
        p.run_circuit(s)?;
    }
    p.deliver(s)
}

/// Randomly chosen inputs, for tests and scenarios that sample them.
pub fn random_inputs<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<InputState> {
    const ALL: [InputState; 6] = [
        InputState::Zero,
        InputState::One,
        InputState::Plus,
        InputState::Minus,
        InputState::PlusI,
        InputState::MinusI,
    ];
    (0..k).map(|_| ALL[rng.gen_range(0..ALL.len())]).collect()
}

/// Whether a finished run's public output and the outputs of the receivers
/// accepted by `keep` agree with direct evaluation on the effective inputs.
pub fn outputs_correct<R: Rng + ?Sized>(
    circuit: &CircuitIR,
    outcome: &MpqcOutcome,
    state: &QuantumState,
    keep: impl Fn(usize) -> bool,
    rng: &mut R,
) -> Result<bool> {
    if outcome.aborted || outcome.decode_failures > 0 {
        return Ok(false);
    }
    let Some(reference) = Reference::run(circuit, &outcome.effective_inputs, Some(&outcome.r_out), rng)? else {
        return Ok(false);
    };
    let mut logical = Vec::new();
    let mut qubits = Vec::new();
    for slot in outcome.outputs.iter().filter(|s| keep(s.receiver)) {
        match slot.qubit {
            Some(q) => {
                logical.push(slot.logical);
                qubits.push(q);
            }
            None => return Ok(false),
        }
    }
    reference.outputs_match(&logical, state, &qubits)
}
