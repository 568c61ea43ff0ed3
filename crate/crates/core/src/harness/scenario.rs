//! Scenario configs and the Monte-Carlo driver.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::aqa::{aqa_abandon, aqa_check, aqa_receive, aqa_send, aqa_setup, range_oracle, AqaVerdict};
use crate::authcode::{AuthKey, CliffordKey, TrapKey};
use crate::backend::{BackendKind, QuantumState};
use crate::error::{Error, Result};
use crate::mpqc::{
    bobw0_run, hierarchy_run, ideal_mpqc, max_thres, outputs_correct, random_inputs, thres_is_valid, CircuitIR,
    EffectiveInput, IdealChoices, InputState, MpqcParams, Protocol, Reference, ScriptedSwia, Session,
};
use crate::qecc::CssCode;
use crate::rng::{trial_rng, SimRng};
use crate::symplectic::PauliOp;

use super::adversary::{hooks, AdversaryConfig, Flow, Hooks, ScriptedAdversary, Site};
use super::stats::{TrialOutcome, TrialStats};
use super::transcript::{kinds, observer_replay, Sender, Transcript};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Aqa,
    Ie,
    Rqc,
    Mpqc,
    Hierarchy,
    IdealVsReal,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AqaForm {
    #[default]
    Clifford,
    Trap,
}

fn default_ell() -> usize {
    1
}

fn default_trials() -> u64 {
    1
}

/// One experiment, as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Label used in tables and file names.
    pub name: String,
    pub kind: ScenarioKind,
    #[serde(default)]
    pub form: AqaForm,
    /// Number of parties; must match the circuit when given.
    #[serde(default)]
    pub n: Option<usize>,
    /// Message qubits of a single AQA.
    #[serde(default = "default_ell")]
    pub ell: usize,
    /// Traps: per AQA message for the Clifford form, per share block otherwise.
    pub t: usize,
    #[serde(default)]
    pub thres: usize,
    /// Code descriptor file, relative to the config file. Steane if absent.
    #[serde(default)]
    pub code_file: Option<PathBuf>,
    #[serde(default)]
    pub circuit: Option<CircuitIR>,
    /// Fixed inputs, one per input qubit; sampled per trial if absent.
    #[serde(default)]
    pub inputs: Option<Vec<InputState>>,
    #[serde(default)]
    pub adversary: AdversaryConfig,
    /// Sets the partition oracle splits off, in order.
    #[serde(default)]
    pub swia_splits: Vec<Vec<usize>>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_backend")]
    pub backend: BackendKind,
}

fn default_backend() -> BackendKind {
    BackendKind::Stabilizer
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config; `code_file` is resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let (Some(f), Some(dir)) = (&cfg.code_file, path.parent()) {
            if f.is_relative() {
                cfg.code_file = Some(dir.join(f));
            }
        }
        Ok(cfg)
    }
}

/// Execution options that do not change results.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses the rayon default.
    pub jobs: usize,
    /// Directory for one transcript per trial.
    pub transcripts: Option<PathBuf>,
}

/// A validated scenario, ready to run.
#[derive(Clone, Debug)]
pub struct Scenario {
    cfg: ScenarioConfig,
    code: CssCode,
}

impl Scenario {
    pub fn new(cfg: ScenarioConfig) -> Result<Self> {
        let bad = |m: String| Err(Error::Config(m));
        let code = match &cfg.code_file {
            Some(p) => CssCode::load(p).map_err(|e| Error::Config(format!("code file {}: {e}", p.display())))?,
            None => CssCode::steane(),
        };
        if cfg.trials == 0 {
            return bad("trials must be positive".into());
        }
        if cfg.kind == ScenarioKind::Aqa {
            if cfg.circuit.is_some() || !cfg.swia_splits.is_empty() {
                return bad("aqa scenarios take no circuit or splits".into());
            }
            match cfg.form {
                AqaForm::Clifford if cfg.ell == 0 || cfg.t == 0 => return bad("the Clifford form needs ell, t >= 1".into()),
                AqaForm::Trap if cfg.ell != 1 => return bad("the trap form authenticates one qubit (ell = 1)".into()),
                _ => {}
            }
            if cfg.n.is_some_and(|n| n != 2) {
                return bad("an aqa scenario has exactly 2 parties".into());
            }
            cfg.adversary.validate(2)?;
            if cfg.adversary.corrupted.iter().any(|&p| p != 0) {
                return bad("only the sender (party 0) can be corrupted in an aqa scenario".into());
            }
            return Ok(Self { cfg, code });
        }

        if cfg.backend != BackendKind::Stabilizer {
            return bad(format!("{:?} scenarios run on the stabilizer backend only", cfg.kind));
        }
        let Some(circuit) = &cfg.circuit else {
            return bad("a circuit is required".into());
        };
        circuit.validate()?;
        let n = circuit.num_parties();
        if cfg.n.is_some_and(|m| m != n) {
            return bad(format!("n = {} but the circuit has {n} parties", cfg.n.unwrap()));
        }
        if let Some(inputs) = &cfg.inputs {
            Error::check_dim(circuit.num_inputs(), inputs.len())
                .map_err(|_| Error::Config(format!("{} inputs for {} input qubits", inputs.len(), circuit.num_inputs())))?;
        }
        cfg.adversary.validate(n)?;
        if !thres_is_valid(&code, n, cfg.thres) {
            return bad(format!(
                "thres {} is not tolerable with {n} parties and a [[{},1,{}]] code (largest valid: {})",
                cfg.thres,
                code.q(),
                code.d(),
                max_thres(&code, n, n)
            ));
        }
        if cfg.kind == ScenarioKind::Hierarchy {
            if circuit.has_public_outputs() {
                return bad("hierarchy scenarios need a circuit with private outputs only".into());
            }
        } else if !cfg.swia_splits.is_empty() {
            return bad("swia_splits only apply to hierarchy scenarios".into());
        }
        if cfg.kind == ScenarioKind::IdealVsReal && !cfg.adversary.corrupted.is_empty() {
            return bad("ideal_vs_real compares honest runs".into());
        }
        // Transversality and share layout, checked once up front.
        let mut honest = super::adversary::Honest;
        let mut s = Session::new(trial_rng(cfg.seed, u64::MAX), &mut honest);
        let group: Vec<usize> = (0..n).collect();
        Protocol::setup(&mut s, Self::params_of(&cfg, &code), circuit, &group, None)?;
        Ok(Self { cfg, code })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    fn params_of(cfg: &ScenarioConfig, code: &CssCode) -> MpqcParams {
        MpqcParams {
            code: code.clone(),
            t: cfg.t,
            thres: cfg.thres,
        }
    }

    fn params(&self) -> MpqcParams {
        Self::params_of(&self.cfg, &self.code)
    }

    fn corrupted(&self) -> BTreeSet<usize> {
        self.cfg.adversary.corrupted.iter().copied().collect()
    }

    fn inputs(&self, rng: &mut SimRng) -> Vec<InputState> {
        let circuit = self.cfg.circuit.as_ref().expect("validated");
        self.cfg
            .inputs
            .clone()
            .unwrap_or_else(|| random_inputs(circuit.num_inputs(), rng))
    }

    /// Runs trial `i` alone.
    pub fn run_trial(&self, i: u64) -> Result<(TrialOutcome, Transcript)> {
        let mut rng = trial_rng(self.cfg.seed, i);
        let (mut out, transcript) = match self.cfg.kind {
            ScenarioKind::Aqa => match self.cfg.form {
                AqaForm::Clifford => {
                    let key = CliffordKey::random(self.cfg.ell, self.cfg.t, &mut rng);
                    self.aqa_trial(key, Vec::new(), rng)?
                }
                AqaForm::Trap => {
                    let key = TrapKey::random(&self.code, &mut rng);
                    let q = self.code.q();
                    let zero_traps = (q..2 * q).map(|f| key.position_of(f)).collect();
                    self.aqa_trial(key, zero_traps, rng)?
                }
            },
            ScenarioKind::Ie | ScenarioKind::Rqc => self.rqc_trial(rng)?,
            ScenarioKind::Mpqc => self.mpqc_trial(rng)?,
            ScenarioKind::Hierarchy => self.hierarchy_trial(rng)?,
            ScenarioKind::IdealVsReal => self.ideal_vs_real_trial(rng, i)?,
        };
        out.replay_ok = match observer_replay(&transcript) {
            Ok(v) => v.aborted == out.aborted && v.identified == out.identified,
            Err(_) => false,
        };
        Ok((out, transcript))
    }

    fn aqa_trial<K: AuthKey>(&self, key: K, zero_traps: Vec<usize>, mut rng: SimRng) -> Result<(TrialOutcome, Transcript)> {
        let (sender, receiver) = (0usize, 1usize);
        let mut adv = ScriptedAdversary::new(&self.cfg.adversary);
        let mut st = QuantumState::new(self.cfg.backend, 0)?;
        let ell = key.message_len();
        let m = key.total_len();
        let reference = st.alloc(ell)?;
        let input = st.alloc(m)?;
        for i in 0..ell {
            st.prepare_epr(&reference[i..=i], &input[i..=i])?;
        }
        key.encode(&mut st, &input[..ell], &input[ell..])?;
        let (mut portals, secret) = aqa_setup(&mut st, &key, &mut rng)?;

        let mut t = Transcript::new();
        t.push(
            0,
            Sender::Cmpc,
            kinds::PARAMS,
            json!({"protocol": "aqa", "ell": ell, "traps": m - ell, "thres": 0, "parties": [sender, receiver]}),
        );
        let site = Site {
            hook: hooks::AQA_PRE_SEND,
            party: sender,
            regs: &input,
            zero_traps: &zero_traps,
        };
        let tamper = adv.quantum(&site, &mut st, &mut rng)?;
        let mut outcome = TrialOutcome::default();
        let verdict = if tamper.flow != Flow::Continue {
            aqa_abandon(&mut st, &mut portals, &mut rng)?;
            st.release(&input, &mut rng)?;
            AqaVerdict::Identified { party: sender }
        } else {
            let mut report = aqa_send(&mut st, &mut portals, &input, &mut rng)?;
            let honest = report.concat();
            let mut bits = honest.clone();
            let flow = adv.report(hooks::AQA_REPORT, sender, &mut bits, key.checked().len(), &mut rng)?;
            if flow != Flow::Continue {
                AqaVerdict::Identified { party: sender }
            } else {
                let offset = bits.xor(&honest);
                outcome.oracle_hit = range_oracle(&secret.e_tilde, &key.checked(), &offset);
                report.apply_offset(&offset)?;
                t.push(
                    1,
                    Sender::Party(sender),
                    kinds::AQA_REPORT,
                    json!({"sender": sender, "receiver": receiver, "report": report}),
                );
                aqa_check(&secret, &report, sender)?
            }
        };
        let identified = verdict.identified();
        t.push(
            2,
            Sender::Cmpc,
            kinds::AQA_VERDICT,
            json!({"sender": sender, "receiver": receiver, "accepted": verdict.is_accepted(), "identified": identified}),
        );
        match identified {
            Some(p) => {
                t.push(2, Sender::Cmpc, kinds::ABORT, json!({"identified": [p]}));
                outcome.aborted = true;
                outcome.identified = vec![p];
            }
            None => t.push(2, Sender::Cmpc, kinds::OUTPUT, json!({"r_out": ""})),
        }
        if let AqaVerdict::Accepted { key: out, flips, .. } = &verdict {
            outcome.accepted = true;
            outcome.flips = Some(*flips);
            aqa_receive(&mut st, &portals, &verdict)?;
            let dec = out.decode(&mut st, &portals.r, &mut rng)?;
            outcome.output_correct = match dec.plaintext {
                Some(pt) => bell_pairs_intact(&st, &reference, &pt)?,
                None => false,
            };
        }
        Ok((outcome, t))
    }

    fn rqc_trial(&self, rng: SimRng) -> Result<(TrialOutcome, Transcript)> {
        let circuit = self.cfg.circuit.as_ref().expect("validated");
        let mut adv = ScriptedAdversary::new(&self.cfg.adversary);
        let mut s = Session::new(rng, &mut adv);
        let inputs = self.inputs(&mut s.rng);
        let group: Vec<usize> = (0..circuit.num_parties()).collect();
        let mut p = Protocol::setup(&mut s, self.params(), circuit, &group, None)?;
        p.ie_run(&mut s, &inputs)?;
        if self.cfg.kind == ScenarioKind::Rqc && !p.cmpc().must_abort() {
            p.run_circuit(&mut s)?;
        }
        let (res, t) = p.close(&mut s)?;
        let mut out = TrialOutcome::from_run(&res);
        out.output_correct = !res.aborted
            && res.decode_failures == 0
            && match self.cfg.kind {
                ScenarioKind::Rqc => {
                    Reference::run(circuit, &res.effective_inputs, Some(&res.r_out), &mut s.rng)?.is_some()
                }
                _ => true,
            };
        Ok((out, t))
    }

    fn mpqc_trial(&self, rng: SimRng) -> Result<(TrialOutcome, Transcript)> {
        let circuit = self.cfg.circuit.as_ref().expect("validated");
        let corrupted = self.corrupted();
        let mut adv = ScriptedAdversary::new(&self.cfg.adversary);
        let mut s = Session::new(rng, &mut adv);
        let inputs = self.inputs(&mut s.rng);
        let group: Vec<usize> = (0..circuit.num_parties()).collect();
        let (res, t) = bobw0_run(&mut s, self.params(), circuit, &group, &inputs, None)?;
        let mut out = TrialOutcome::from_run(&res);
        let state = std::mem::replace(&mut s.state, QuantumState::new(BackendKind::Stabilizer, 0)?);
        out.output_correct = outputs_correct(circuit, &res, &state, |p| !corrupted.contains(&p), &mut s.rng)?;
        Ok((out, t))
    }

    fn hierarchy_trial(&self, rng: SimRng) -> Result<(TrialOutcome, Transcript)> {
        let circuit = self.cfg.circuit.as_ref().expect("validated");
        let corrupted = self.corrupted();
        let mut adv = ScriptedAdversary::new(&self.cfg.adversary);
        let mut s = Session::new(rng, &mut adv);
        let inputs = self.inputs(&mut s.rng);
        let parties: Vec<usize> = (0..circuit.num_parties()).collect();
        let mut oracle = ScriptedSwia::new(&self.cfg.swia_splits);
        let (res, t) = hierarchy_run(&mut s, &self.params(), circuit, &parties, &inputs, &mut oracle)?;
        let state = std::mem::replace(&mut s.state, QuantumState::new(BackendKind::Stabilizer, 0)?);
        // Only groups with an honest member owe anyone an output.
        let mut correct = true;
        for (group, leaf) in &res.leaves {
            if group.iter().any(|p| !corrupted.contains(p)) {
                correct &= outputs_correct(circuit, leaf, &state, |p| !corrupted.contains(&p), &mut s.rng)?;
            }
        }
        let out = TrialOutcome {
            accepted: !res.aborted,
            aborted: res.aborted,
            identified: res.identified,
            output_correct: correct,
            decode_failures: res.leaves.iter().map(|(_, l)| l.decode_failures).sum(),
            ..Default::default()
        };
        Ok((out, t))
    }

    fn ideal_vs_real_trial(&self, rng: SimRng, i: u64) -> Result<(TrialOutcome, Transcript)> {
        let circuit = self.cfg.circuit.as_ref().expect("validated");
        let (mut out, t) = self.mpqc_trial(rng)?;
        let mut ideal_rng = trial_rng(self.cfg.seed ^ IDEAL_STREAM_SALT, i);
        let inputs: Vec<EffectiveInput> = self
            .inputs(&mut ideal_rng)
            .into_iter()
            .map(EffectiveInput::State)
            .collect();
        let ideal = ideal_mpqc(circuit, &inputs, &IdealChoices::default(), self.cfg.thres, &mut ideal_rng)?;
        out.ideal_key = Some(if ideal.aborted { "abort".into() } else { bit_string(&ideal.r_out) });
        Ok((out, t))
    }

    /// Runs every trial and aggregates, writing transcripts if asked.
    pub fn run(&self, opts: &RunOptions) -> Result<TrialStats> {
        let start = Instant::now();
        if let Some(dir) = &opts.transcripts {
            std::fs::create_dir_all(dir)?;
        }
        let work = || -> Result<Vec<TrialOutcome>> {
            (0..self.cfg.trials)
                .into_par_iter()
                .map(|i| {
                    let (out, t) = self.run_trial(i)?;
                    if let Some(dir) = &opts.transcripts {
                        t.write_to(&dir.join(format!("{}_{i:06}.jsonl", self.cfg.name)))?;
                    }
                    Ok(out)
                })
                .collect()
        };
        let outcomes = if opts.jobs > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(opts.jobs)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?
                .install(work)?
        } else {
            work()?
        };
        let mut stats = TrialStats::aggregate(&self.cfg.name, &self.corrupted(), &outcomes);
        stats.seconds = start.elapsed().as_secs_f64();
        Ok(stats)
    }
}

const IDEAL_STREAM_SALT: u64 = 0x1dea_1dea_1dea_1dea;

/// Validates `cfg` and runs it.
pub fn run_scenario(cfg: ScenarioConfig, opts: &RunOptions) -> Result<TrialStats> {
    Scenario::new(cfg)?.run(opts)
}

pub(crate) fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Whether each `reference[i]`, `plaintext[i]` pair is still a `|Φ+⟩` pair.
pub fn bell_pairs_intact(st: &QuantumState, reference: &[usize], plaintext: &[usize]) -> Result<bool> {
    Error::check_dim(reference.len(), plaintext.len())?;
    let xx: PauliOp = "XX".parse().expect("literal");
    let zz: PauliOp = "ZZ".parse().expect("literal");
    for (&a, &b) in reference.iter().zip(plaintext) {
        for g in [&xx, &zz] {
            if st.peek_pauli(&[a, b], g)? != Some(false) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Rows for the CSV output, seconds included.
pub fn csv_header() -> &'static str {
    "scenario,trials,accepted,identified_correct,identified_wrong,aborts,output_correct,seconds"
}

/// Keys absent from one side count as zero.
pub fn total_variation(a: &BTreeMap<String, u64>, b: &BTreeMap<String, u64>) -> f64 {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    if na == 0 || nb == 0 {
        return if na == nb { 0.0 } else { 1.0 };
    }
    let keys: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .map(|k| {
            let pa = *a.get(k).unwrap_or(&0) as f64 / na as f64;
            let pb = *b.get(k).unwrap_or(&0) as f64 / nb as f64;
            (pa - pb).abs()
        })
        .sum::<f64>()
        / 2.0
}
