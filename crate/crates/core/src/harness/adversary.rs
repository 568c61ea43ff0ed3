//! Adversary hook points and scripted strategies.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::backend::QuantumState;
use crate::error::{Error, Result};
use crate::mpqc::InputState;
use crate::rng::SimRng;
use crate::symplectic::{Bits, PauliOp};

/// Registry of hook ids.
pub mod hooks {
    /// Sender's ciphertext just before it is teleported into an AQA.
    pub const AQA_PRE_SEND: &str = "aqa.pre_send";
    /// The AQA report `r_z ‖ r_x ‖ r_c` before it is published.
    pub const AQA_REPORT: &str = "aqa.report";
    /// An input qubit before it is teleported in input encoding.
    pub const IE_PRE_SEND: &str = "ie.pre_send";
    /// A share block after the re-keying Clifford, before measurement.
    pub const RQC_PRE_MEASURE: &str = "rqc.measure.pre_measure";
    /// The measured block's outcome string before it is reported.
    pub const RQC_REPORT: &str = "rqc.measure.report";

    pub const ALL: [&str; 5] = [AQA_PRE_SEND, AQA_REPORT, IE_PRE_SEND, RQC_PRE_MEASURE, RQC_REPORT];

    pub fn is_report(id: &str) -> bool {
        id == AQA_REPORT || id == RQC_REPORT
    }
}

/// What a party does after a hook ran.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Continue,
    /// Skip this one message.
    Drop,
    /// Stop participating for the rest of the run.
    Crash,
}

/// A quantum hook point.
#[derive(Clone, Copy, Debug)]
pub struct Site<'a> {
    pub hook: &'a str,
    pub party: usize,
    pub regs: &'a [usize],
    /// Register indices of `|0⟩`-traps, for key-aware test adversaries.
    pub zero_traps: &'a [usize],
}

/// Outcome of a quantum hook.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tamper {
    pub flow: Flow,
    /// Pauli applied to the site's register, if any.
    pub pauli: Option<PauliOp>,
}

impl Tamper {
    pub fn none() -> Self {
        Tamper {
            flow: Flow::Continue,
            pauli: None,
        }
    }
}

/// The protocol-facing side of an adversary.
pub trait Hooks {
    fn is_corrupted(&self, party: usize) -> bool;

    fn has_crashed(&self, party: usize) -> bool;

    fn quantum(&mut self, site: &Site<'_>, state: &mut QuantumState, rng: &mut SimRng) -> Result<Tamper>;

    /// May rewrite `report`, whose last `checked` bits are trap outcomes.
    fn report(&mut self, hook: &str, party: usize, report: &mut Bits, checked: usize, rng: &mut SimRng)
        -> Result<Flow>;

    /// Replacement for input `index` of `party`.
    fn input(&mut self, party: usize, index: usize) -> Option<InputState>;
}

/// Every party follows the protocol.
#[derive(Clone, Copy, Debug, Default)]
pub struct Honest;

impl Hooks for Honest {
    fn is_corrupted(&self, _: usize) -> bool {
        false
    }

    fn has_crashed(&self, _: usize) -> bool {
        false
    }

    fn quantum(&mut self, _: &Site<'_>, _: &mut QuantumState, _: &mut SimRng) -> Result<Tamper> {
        Ok(Tamper::none())
    }

    fn report(&mut self, _: &str, _: usize, _: &mut Bits, _: usize, _: &mut SimRng) -> Result<Flow> {
        Ok(Flow::Continue)
    }

    fn input(&mut self, _: usize, _: usize) -> Option<InputState> {
        None
    }
}

/// Complex entries as `[re, im]` pairs.
pub type MatrixRepr = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    /// A fixed Pauli on register indices `positions` (default `0..len`).
    Pauli {
        pauli: PauliOp,
        #[serde(default)]
        positions: Option<Vec<usize>>,
    },
    /// A uniformly random non-identity Pauli on the whole register.
    RandomPauli {
        #[serde(default)]
        x_only: bool,
    },
    /// X flips on `weight` of the `|0⟩`-traps (needs key knowledge).
    TrapFlips { weight: usize },
    /// XOR a fixed offset (hex, see `Bits::to_hex`) into the report.
    ReportOffset { offset: String },
    /// XOR a uniformly random nonzero offset into the report.
    RandomReportOffset,
    /// Flip the first `weight` trap bits of the report.
    CheckFlips { weight: usize },
    Drop,
    Abort,
    SubstituteInput { state: InputState },
    /// Arbitrary unitary on register indices `positions` (dense backend).
    DenseUnitary { matrix: MatrixRepr, positions: Vec<usize> },
}

impl Action {
    fn fits(&self, hook: &str) -> bool {
        match self {
            Action::Drop | Action::Abort => true,
            Action::ReportOffset { .. } | Action::RandomReportOffset | Action::CheckFlips { .. } => {
                hooks::is_report(hook)
            }
            Action::SubstituteInput { .. } => hook == hooks::IE_PRE_SEND,
            _ => !hooks::is_report(hook),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HookBinding {
    pub hook: String,
    /// Defaults to every corrupted party.
    #[serde(default)]
    pub party: Option<usize>,
    #[serde(flatten)]
    pub action: Action,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AdversaryConfig {
    #[serde(default)]
    pub corrupted: Vec<usize>,
    #[serde(default)]
    pub hooks: Vec<HookBinding>,
}

impl AdversaryConfig {
    pub fn honest() -> Self {
        Self::default()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let set: BTreeSet<usize> = self.corrupted.iter().copied().collect();
        if set.len() != self.corrupted.len() {
            return Err(Error::Config("corrupted set lists a party twice".into()));
        }
        if n > 0 && set.len() > n - 1 {
            return Err(Error::Config(format!("at most {} of {n} parties can be corrupted", n - 1)));
        }
        if let Some(p) = set.iter().find(|&&p| p >= n) {
            return Err(Error::Config(format!("corrupted party {p} out of range")));
        }
        for b in &self.hooks {
            if !hooks::ALL.contains(&b.hook.as_str()) {
                return Err(Error::Config(format!("unknown hook {:?}", b.hook)));
            }
            if !b.action.fits(&b.hook) {
                return Err(Error::Config(format!("action {:?} cannot bind to {}", b.action, b.hook)));
            }
            if let Some(p) = b.party {
                if !set.contains(&p) {
                    return Err(Error::Config(format!("hook bound to honest party {p}")));
                }
            }
        }
        Ok(())
    }
}

fn matrix(repr: &MatrixRepr) -> Result<DMatrix<Complex64>> {
    let rows = repr.len();
    if repr.iter().any(|r| r.len() != rows) {
        return Err(Error::Config("unitary must be square".into()));
    }
    Ok(DMatrix::from_fn(rows, rows, |r, c| Complex64::new(repr[r][c][0], repr[r][c][1])))
}

/// Runs the actions of an [`AdversaryConfig`].
#[derive(Clone, Debug)]
pub struct ScriptedAdversary {
    corrupted: BTreeSet<usize>,
    bindings: Vec<HookBinding>,
    crashed: BTreeSet<usize>,
}

impl ScriptedAdversary {
    pub fn new(cfg: &AdversaryConfig) -> Self {
        Self {
            corrupted: cfg.corrupted.iter().copied().collect(),
            bindings: cfg.hooks.clone(),
            crashed: BTreeSet::new(),
        }
    }

    pub fn corrupted(&self) -> &BTreeSet<usize> {
        &self.corrupted
    }

    fn bound<'a>(&'a self, hook: &'a str, party: usize) -> impl Iterator<Item = &'a Action> + 'a {
        self.bindings
            .iter()
            .filter(move |b| b.hook == hook && b.party.map_or(self.corrupted.contains(&party), |p| p == party))
            .map(|b| &b.action)
    }
}

impl Hooks for ScriptedAdversary {
    fn is_corrupted(&self, party: usize) -> bool {
        self.corrupted.contains(&party)
    }

    fn has_crashed(&self, party: usize) -> bool {
        self.crashed.contains(&party)
    }

    fn quantum(&mut self, site: &Site<'_>, state: &mut QuantumState, rng: &mut SimRng) -> Result<Tamper> {
        if self.crashed.contains(&site.party) {
            return Ok(Tamper {
                flow: Flow::Crash,
                pauli: None,
            });
        }
        let len = site.regs.len();
        let mut applied = PauliOp::identity(len);
        let mut flow = Flow::Continue;
        let actions: Vec<Action> = self.bound(site.hook, site.party).cloned().collect();
        for action in actions {
            match action {
                Action::Pauli { pauli, positions } => {
                    let pos = positions.unwrap_or_else(|| (0..pauli.num_qubits()).collect());
                    Error::check_dim(pos.len(), pauli.num_qubits())?;
                    if pos.iter().any(|&p| p >= len) {
                        return Err(Error::Config(format!("attack position out of range at {}", site.hook)));
                    }
                    applied.mul_assign_right(&pauli.embed(&pos, len));
                }
                Action::RandomPauli { x_only } => {
                    let p = if x_only {
                        PauliOp::from_xz(Bits::random_nonzero(len, rng), Bits::zeros(len))
                    } else {
                        loop {
                            let p = PauliOp::random(len, rng);
                            if !p.is_identity() {
                                break p;
                            }
                        }
                    };
                    applied.mul_assign_right(&p);
                }
                Action::TrapFlips { weight } => {
                    if site.zero_traps.len() < weight {
                        return Err(Error::Config(format!(
                            "trap flips need {weight} known traps at {}",
                            site.hook
                        )));
                    }
                    for &k in &site.zero_traps[..weight] {
                        applied.mul_assign_right(&PauliOp::x_on(len, k));
                    }
                }
                Action::DenseUnitary { matrix: m, positions } => {
                    let regs: Vec<usize> = positions.iter().map(|&p| site.regs[p]).collect();
                    state.apply_unitary(&regs, &matrix(&m)?)?;
                }
                Action::Drop => flow = Flow::Drop,
                Action::Abort => {
                    self.crashed.insert(site.party);
                    flow = Flow::Crash;
                }
                Action::SubstituteInput { .. }
                | Action::ReportOffset { .. }
                | Action::RandomReportOffset
                | Action::CheckFlips { .. } => {}
            }
        }
        let pauli = if applied.is_identity() {
            None
        } else {
            state.apply_pauli(site.regs, &applied)?;
            Some(applied)
        };
        Ok(Tamper { flow, pauli })
    }

    fn report(
        &mut self,
        hook: &str,
        party: usize,
        report: &mut Bits,
        checked: usize,
        rng: &mut SimRng,
    ) -> Result<Flow> {
        if self.crashed.contains(&party) {
            return Ok(Flow::Crash);
        }
        let mut flow = Flow::Continue;
        let len = report.len();
        let actions: Vec<Action> = self.bound(hook, party).cloned().collect();
        for action in actions {
            match action {
                Action::ReportOffset { offset } => report.xor_assign(&Bits::from_hex(&offset, len)?),
                Action::RandomReportOffset => report.xor_assign(&Bits::random_nonzero(len, rng)),
                Action::CheckFlips { weight } => {
                    if weight > checked {
                        return Err(Error::Config(format!("cannot flip {weight} of {checked} trap bits")));
                    }
                    for k in len - checked..len - checked + weight {
                        report.flip(k);
                    }
                }
                Action::Drop => flow = Flow::Drop,
                Action::Abort => {
                    self.crashed.insert(party);
                    flow = Flow::Crash;
                }
                _ => {}
            }
        }
        Ok(flow)
    }

    fn input(&mut self, party: usize, _index: usize) -> Option<InputState> {
        self.bound(hooks::IE_PRE_SEND, party).find_map(|a| match a {
            Action::SubstituteInput { state } => Some(*state),
            _ => None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::BackendKind;
    use rand::SeedableRng;

    fn cfg(json: &str) -> AdversaryConfig {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn config_validation() {
        let ok = cfg(r#"{"corrupted":[1],"hooks":[{"hook":"aqa.report","action":"random_report_offset"}]}"#);
        ok.validate(3).unwrap();
        let wrong_hook = cfg(r#"{"corrupted":[1],"hooks":[{"hook":"aqa.report","action":"random_pauli"}]}"#);
        assert!(wrong_hook.validate(3).is_err());
        let honest_bound = cfg(r#"{"corrupted":[1],"hooks":[{"hook":"aqa.report","party":0,"action":"drop"}]}"#);
        assert!(honest_bound.validate(3).is_err());
        let all = cfg(r#"{"corrupted":[0,1,2]}"#);
        assert!(all.validate(3).is_err());
    }

    #[test]
    fn abort_is_persistent() {
        let c = cfg(r#"{"corrupted":[0],"hooks":[{"hook":"aqa.pre_send","action":"abort"}]}"#);
        let mut adv = ScriptedAdversary::new(&c);
        let mut rng = SimRng::seed_from_u64(0);
        let mut st = QuantumState::new(BackendKind::Stabilizer, 2).unwrap();
        let site = Site {
            hook: hooks::AQA_PRE_SEND,
            party: 0,
            regs: &[0, 1],
            zero_traps: &[],
        };
        assert_eq!(adv.quantum(&site, &mut st, &mut rng).unwrap().flow, Flow::Crash);
        let mut r = Bits::zeros(4);
        assert_eq!(adv.report(hooks::RQC_REPORT, 0, &mut r, 2, &mut rng).unwrap(), Flow::Crash);
        assert_eq!(adv.report(hooks::RQC_REPORT, 1, &mut r, 2, &mut rng).unwrap(), Flow::Continue);
    }

    #[test]
    fn check_flips_touch_only_trap_bits() {
        let c = cfg(r#"{"corrupted":[0],"hooks":[{"hook":"aqa.report","action":"check_flips","weight":2}]}"#);
        let mut adv = ScriptedAdversary::new(&c);
        let mut rng = SimRng::seed_from_u64(0);
        let mut r = Bits::zeros(10);
        adv.report(hooks::AQA_REPORT, 0, &mut r, 4, &mut rng).unwrap();
        assert_eq!(r.ones_iter().collect::<Vec<_>>(), vec![6, 7]);
    }
}
