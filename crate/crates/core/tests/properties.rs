//! Property tests across the layers, each against an independent route.

use aqa_core::aqa::{aqa_check, aqa_send, aqa_setup, range_oracle};
use aqa_core::authcode::{AuthKey, CliffordKey, TrapKey};
use aqa_core::backend::dense::{clifford_unitary, pauli_matrix};
use aqa_core::backend::{BackendKind, QuantumState};
use aqa_core::harness::adversary::{AdversaryConfig, ScriptedAdversary};
use aqa_core::harness::transcript::{observer_replay, Transcript};
use aqa_core::mpqc::{
    bobw0_run, hierarchy_run, outputs_correct, random_inputs, share_map, thres_is_valid, CircuitIR, InputState,
    MpqcParams, ScriptedSwia, Session,
};
use aqa_core::qecc::CssCode;
use aqa_core::rng::trial_rng;
use aqa_core::{random_clifford, Bits, Gate, PauliOp};
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn close(a: &DMatrix<C>, b: &DMatrix<C>) -> bool {
    (a - b).norm() < 1e-9
}

/// Equal up to a global phase.
fn same_ray(a: &[C], b: &[C]) -> bool {
    let ip: C = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    (ip.norm() - 1.0).abs() < 1e-9
}

fn pauli_strategy(n: usize) -> impl Strategy<Value = PauliOp> {
    (any::<u64>(), any::<u64>(), 0u8..4).prop_map(move |(x, z, p)| {
        let mask = (1u64 << n) - 1;
        PauliOp::new(Bits::from_u64(x & mask, n), Bits::from_u64(z & mask, n), p).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pauli_product_matches_matrices(a in pauli_strategy(3), b in pauli_strategy(3)) {
        let ab = a.compose(&b).unwrap();
        prop_assert!(close(&pauli_matrix(&ab), &(pauli_matrix(&a) * pauli_matrix(&b))));
        let commute = close(&(pauli_matrix(&a) * pauli_matrix(&b)), &(pauli_matrix(&b) * pauli_matrix(&a)));
        prop_assert_eq!(a.commutes_with(&b), commute);
    }

    #[test]
    fn pauli_group_laws(a in pauli_strategy(4), b in pauli_strategy(4), c in pauli_strategy(4)) {
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert!(a.compose(&a.adjoint()).unwrap() == PauliOp::identity(4));
    }

    #[test]
    fn clifford_conjugation_matches_unitary(seed in any::<u64>(), p in pauli_strategy(3)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_clifford(3, &mut rng);
        let u = clifford_unitary(&c).unwrap();
        let img = c.conjugate(&p).unwrap();
        prop_assert!(close(&(&u * pauli_matrix(&p) * u.adjoint()), &pauli_matrix(&img)));
    }

    #[test]
    fn clifford_group_laws(seed in any::<u64>(), p in pauli_strategy(4), q in pauli_strategy(4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_clifford(4, &mut rng);
        let b = random_clifford(4, &mut rng);
        let ab = a.compose(&b).unwrap();
        prop_assert_eq!(ab.conjugate(&p).unwrap(), a.conjugate(&b.conjugate(&p).unwrap()).unwrap());
        prop_assert!(a.compose(&a.inverse()).unwrap().is_identity());
        let (pa, qa) = (a.conjugate(&p).unwrap(), a.conjugate(&q).unwrap());
        prop_assert_eq!(pa.commutes_with(&qa), p.commutes_with(&q));
    }

    #[test]
    fn tableau_tracks_dense_evolution(seed in any::<u64>(), depth in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 4;
        let mut tab = QuantumState::new(BackendKind::Stabilizer, n).unwrap();
        let mut dense = QuantumState::new(BackendKind::Dense, n).unwrap();
        let gates = [Gate::H, Gate::S, Gate::Sdg, Gate::X, Gate::Y, Gate::Z, Gate::CX, Gate::CZ, Gate::Swap];
        for _ in 0..depth {
            let g = gates[rng.gen_range(0..gates.len())];
            let a = rng.gen_range(0..n);
            let pos = if g.arity() == 2 {
                vec![a, (a + rng.gen_range(1..n)) % n]
            } else {
                vec![a]
            };
            tab.apply_gate(g, &pos).unwrap();
            dense.apply_gate(g, &pos).unwrap();
        }
        prop_assert!(same_ray(&tab.amplitudes().unwrap(), &dense.amplitudes().unwrap()));
        let p = PauliOp::random(n, &mut rng);
        let p = PauliOp::hermitian(p.x().clone(), p.z().clone(), rng.gen());
        let all: Vec<usize> = (0..n).collect();
        if let Some(minus) = tab.peek_pauli(&all, &p).unwrap() {
            let e = dense.dense().unwrap().expectation(&all, &p).unwrap();
            let want = if minus { -1.0 } else { 1.0 };
            prop_assert!((e - want).abs() < 1e-9);
        }
    }

    #[test]
    fn authentication_roundtrip(seed in any::<u64>(), t in 1usize..5, trap in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut st = QuantumState::new(BackendKind::Stabilizer, 0).unwrap();
        let r = st.alloc(1).unwrap();
        let key: Box<dyn Fn(&mut QuantumState, &[usize], &mut ChaCha8Rng) -> bool> = if trap {
            let k = TrapKey::random(&CssCode::steane(), &mut rng);
            Box::new(move |st, regs, rng| roundtrip(&k, st, regs, rng))
        } else {
            let k = CliffordKey::random(1, t, &mut rng);
            Box::new(move |st, regs, rng| roundtrip(&k, st, regs, rng))
        };
        prop_assert!(key(&mut st, &r, &mut rng));
    }

    #[test]
    fn aqa_accepts_exactly_offsets_in_range(seed in any::<u64>(), t in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let key = CliffordKey::random(1, t, &mut rng);
        let mut st = QuantumState::new(BackendKind::Stabilizer, 0).unwrap();
        let input = st.alloc(1 + t).unwrap();
        key.encode(&mut st, &input[..1], &input[1..]).unwrap();
        let (mut portals, secret) = aqa_setup(&mut st, &key, &mut rng).unwrap();
        let mut report = aqa_send(&mut st, &mut portals, &input, &mut rng).unwrap();
        let len = report.concat().len();
        let offset = Bits::random(len, &mut rng);
        report.apply_offset(&offset).unwrap();
        let v = aqa_check(&secret, &report, 0).unwrap();
        prop_assert_eq!(v.is_accepted(), range_oracle(&secret.e_tilde, &key.checked(), &offset));
    }

    #[test]
    fn valid_thresholds_tolerate_every_corruption(parties in 1usize..=7, thres in 0usize..7) {
        let code = CssCode::steane();
        prop_assume!(thres_is_valid(&code, parties, thres));
        let group: Vec<usize> = (0..parties).collect();
        let owners = share_map(&group, code.q());
        // Every set of `thres` parties holds fewer than d shares.
        for mask in 0u32..1 << parties {
            if mask.count_ones() as usize == thres {
                let lost = owners.iter().filter(|&&o| mask >> o & 1 == 1).count();
                prop_assert!(lost < code.d());
            }
        }
    }
}

fn roundtrip<K: AuthKey>(k: &K, st: &mut QuantumState, r: &[usize], rng: &mut ChaCha8Rng) -> bool {
    let regs = st.alloc(k.total_len()).unwrap();
    st.prepare_epr(r, &regs[..1]).unwrap();
    k.encode(st, &regs[..1], &regs[1..]).unwrap();
    let v = k.decode(st, &regs, rng).unwrap();
    v.accept
        && ["XX", "ZZ"]
            .iter()
            .all(|g| st.peek_pauli(&[r[0], regs[0]], &g.parse().unwrap()).unwrap() == Some(false))
}

fn cnot_measure(n: usize) -> CircuitIR {
    let mut inputs = vec![0; n];
    inputs[0] = 1;
    inputs[1] = 1;
    serde_json::from_value(json!({
        "inputs": inputs,
        "instructions": [
            {"op": "gate", "gate": "CX", "qubits": [0, 1]},
            {"op": "measure", "qubit": 1}
        ]
    }))
    .unwrap()
}

/// Built-in strategies, bound to every corrupted party.
fn strategy(i: usize) -> serde_json::Value {
    [
        json!([{"hook": "aqa.pre_send", "action": "random_pauli"}]),
        json!([{"hook": "aqa.report", "action": "random_report_offset"}]),
        json!([{"hook": "aqa.pre_send", "action": "abort"}]),
        json!([{"hook": "ie.pre_send", "action": "abort"}]),
        json!([{"hook": "rqc.measure.pre_measure", "action": "random_pauli", "x_only": true}]),
        json!([{"hook": "rqc.measure.report", "action": "check_flips", "weight": 1}]),
        json!([{"hook": "ie.pre_send", "action": "substitute_input", "state": "minus"}]),
        json!([{"hook": "aqa.report", "action": "drop"}]),
    ][i]
        .clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Identification soundness and the dichotomy at n = 7, thres = 1:
    /// either honest outputs are correct, or the run aborts naming only
    /// corrupted parties; with at most one corruption it never aborts.
    #[test]
    fn bobw_dichotomy(seed in any::<u64>(), mask in 0u8..127, which in 0usize..8) {
        let corrupted: Vec<usize> = (0..7).filter(|p| mask >> p & 1 == 1).collect();
        prop_assume!(corrupted.len() <= 5);
        let cfg: AdversaryConfig = serde_json::from_value(json!({"corrupted": corrupted, "hooks": strategy(which)})).unwrap();
        let mut adv = ScriptedAdversary::new(&cfg);
        let mut s = Session::new(trial_rng(seed, 0), &mut adv);
        let circuit = cnot_measure(7);
        let inputs = random_inputs(2, &mut s.rng);
        let params = MpqcParams { code: CssCode::steane(), t: 3, thres: 1 };
        let group: Vec<usize> = (0..7).collect();
        let (out, t) = bobw0_run(&mut s, params, &circuit, &group, &inputs, None).unwrap();
        prop_assert!(out.identified.iter().all(|p| corrupted.contains(p)));
        prop_assert_eq!(out.aborted, out.identified.len() > 1);
        let state = std::mem::replace(&mut s.state, QuantumState::new(BackendKind::Stabilizer, 0).unwrap());
        let honest_ok = outputs_correct(&circuit, &out, &state, |p| !corrupted.contains(&p), &mut s.rng).unwrap();
        // Random Paulis and offsets slip through with probability about
        // 2^-t; their rates are covered by the acceptance runs.
        let detection_is_certain = !matches!(which, 0 | 1 | 4);
        if detection_is_certain {
            prop_assert!(out.aborted || honest_ok);
        }
        if corrupted.len() <= 1 {
            prop_assert!(!out.aborted);
        }
        let v = observer_replay(&t).unwrap();
        prop_assert_eq!(v.aborted, out.aborted);
        prop_assert_eq!(&v.identified, &out.identified);
        let back = Transcript::parse(&t.to_jsonl()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn partition_tree_counts(k in 0usize..4, seed in any::<u64>()) {
        let corrupted: Vec<usize> = (0..k).collect();
        let cfg: AdversaryConfig = serde_json::from_value(json!({"corrupted": corrupted})).unwrap();
        let mut adv = ScriptedAdversary::new(&cfg);
        let mut s = Session::new(trial_rng(seed, 0), &mut adv);
        let circuit: CircuitIR = serde_json::from_value(json!({
            "inputs": [1, 1, 0, 0],
            "instructions": [{"op": "gate", "gate": "CX", "qubits": [0, 1]}]
        }))
        .unwrap();
        let splits: Vec<Vec<usize>> = (0..k).map(|p| vec![p]).collect();
        let mut oracle = ScriptedSwia::new(&splits);
        let params = MpqcParams { code: CssCode::steane(), t: 2, thres: 1 };
        let inputs = [InputState::Plus, InputState::One];
        let (out, _) = hierarchy_run(&mut s, &params, &circuit, &[0, 1, 2, 3], &inputs, &mut oracle).unwrap();
        prop_assert!(out.tree.leaves().len() <= k + 1);
        prop_assert!(out.oracle_calls <= 2 * k + 1);
    }
}
