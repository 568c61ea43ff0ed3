use aqa_core::aqa::{aqa_check, aqa_receive, aqa_send, aqa_setup};
use aqa_core::authcode::{AuthKey, CliffordKey};
use aqa_core::backend::{BackendKind, QuantumState};
use aqa_core::harness::adversary::{AdversaryConfig, ScriptedAdversary};
use aqa_core::mpqc::{bobw0_run, random_inputs, CircuitIR, MpqcParams, Session};
use aqa_core::qecc::CssCode;
use aqa_core::rng::trial_rng;
use aqa_core::{random_clifford, Gate};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tableau_gates(c: &mut Criterion) {
    let n = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let gates: Vec<(Gate, Vec<usize>)> = (0..1000)
        .map(|_| {
            let a = rng.gen_range(0..n);
            let b = (a + rng.gen_range(1..n)) % n;
            match rng.gen_range(0..3) {
                0 => (Gate::H, vec![a]),
                1 => (Gate::S, vec![a]),
                _ => (Gate::CX, vec![a, b]),
            }
        })
        .collect();
    c.bench_function("tableau_1000_gates_64q", |bch| {
        bch.iter_batched(
            || QuantumState::new(BackendKind::Stabilizer, n).unwrap(),
            |mut st| {
                for (g, q) in &gates {
                    st.apply_gate(*g, q).unwrap();
                }
                st
            },
            BatchSize::SmallInput,
        )
    });
}

fn clifford_sampling(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    c.bench_function("random_clifford_9q", |bch| bch.iter(|| random_clifford(9, &mut rng)));
}

fn aqa_round(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    c.bench_function("aqa_round_ell1_t8", |bch| {
        bch.iter(|| {
            let key = CliffordKey::random(1, 8, &mut rng);
            let mut st = QuantumState::new(BackendKind::Stabilizer, 0).unwrap();
            let input = st.alloc(9).unwrap();
            key.encode(&mut st, &input[..1], &input[1..]).unwrap();
            let (mut portals, secret) = aqa_setup(&mut st, &key, &mut rng).unwrap();
            let report = aqa_send(&mut st, &mut portals, &input, &mut rng).unwrap();
            let v = aqa_check(&secret, &report, 0).unwrap();
            aqa_receive(&mut st, &portals, &v).unwrap();
            v.is_accepted()
        })
    });
}

fn mpqc_run(c: &mut Criterion) {
    let circuit: CircuitIR = serde_json::from_str(
        r#"{"inputs": [1, 1, 0, 0, 0, 0, 0],
            "instructions": [{"op": "gate", "gate": "CX", "qubits": [0, 1]}, {"op": "measure", "qubit": 1}]}"#,
    )
    .unwrap();
    let cfg: AdversaryConfig = serde_json::from_str(r#"{"corrupted": []}"#).unwrap();
    let group: Vec<usize> = (0..7).collect();
    let mut seed = 0;
    let mut g = c.benchmark_group("mpqc");
    g.sample_size(10);
    g.bench_function("bobw0_honest_n7_t4", |bch| {
        bch.iter(|| {
            seed += 1;
            let mut adv = ScriptedAdversary::new(&cfg);
            let mut s = Session::new(trial_rng(seed, 0), &mut adv);
            let inputs = random_inputs(2, &mut s.rng);
            let params = MpqcParams { code: CssCode::steane(), t: 4, thres: 1 };
            bobw0_run(&mut s, params, &circuit, &group, &inputs, None).unwrap().0.aborted
        })
    });
    g.finish();
}

criterion_group!(benches, tableau_gates, clifford_sampling, aqa_round, mpqc_run);
criterion_main!(benches);
