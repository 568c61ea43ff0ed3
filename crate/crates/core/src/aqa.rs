//! Auditable quantum authentication.
//!
//! A trusted setup distributes three portals: the sending portal `S` (EPR
//! halves the sender teleports through), the checking portal `C` (the trap
//! part of the receiver's halves, handed back to the sender under a pad) and
//! the receiving portal `R` (the message part, already re-authenticated
//! under a fresh key `E′`). The sender publishes the teleport outcomes and
//! the `C` measurement; the auditor decides from those classical values
//! alone whether the sender behaved, so every party and outside observer can
//! check the verdict.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::authcode::AuthKey;
use crate::backend::{tp_send, QuantumState};
use crate::error::{Error, Result};
use crate::symplectic::{gates, random_pauli, Bits, CliffordOp, PauliOp};

/// Quantum registers created by [`aqa_setup`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AqaPortals {
    pub s: Vec<usize>,
    pub c: Vec<usize>,
    pub r: Vec<usize>,
    consumed: bool,
}

impl AqaPortals {
    pub fn is_consumed(&self) -> bool {
        self.consumed
    }
}

/// What the auditor keeps from setup.
#[derive(Clone, Debug)]
pub struct AqaSecret<K> {
    pub p_m: PauliOp,
    pub p_s: PauliOp,
    pub p_r: PauliOp,
    pub p_c: PauliOp,
    /// Key the incoming ciphertext is encoded under.
    pub key: K,
    /// Fresh key of the receiving portal.
    pub key_out: K,
    /// `P_M† E`.
    pub e_tilde: CliffordOp,
}

/// The sender's public message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AqaReport {
    pub r_z: Bits,
    pub r_x: Bits,
    pub r_c: Bits,
}

#[derive(Serialize, Deserialize)]
struct ReportRepr {
    r_z: String,
    r_x: String,
    r_c: String,
    m: usize,
    c: usize,
}

impl Serialize for AqaReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ReportRepr {
            r_z: self.r_z.to_hex(),
            r_x: self.r_x.to_hex(),
            r_c: self.r_c.to_hex(),
            m: self.r_z.len(),
            c: self.r_c.len(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AqaReport {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ReportRepr::deserialize(d)?;
        let bits = |h: &str, n| Bits::from_hex(h, n).map_err(serde::de::Error::custom);
        Ok(AqaReport {
            r_z: bits(&r.r_z, r.m)?,
            r_x: bits(&r.r_x, r.m)?,
            r_c: bits(&r.r_c, r.c)?,
        })
    }
}

impl AqaReport {
    /// `r_z ‖ r_x ‖ r_c`.
    pub fn concat(&self) -> Bits {
        self.r_z.concat(&self.r_x).concat(&self.r_c)
    }

    /// XORs `offset` (laid out as [`AqaReport::concat`]) into the report.
    pub fn apply_offset(&mut self, offset: &Bits) -> Result<()> {
        let m = self.r_z.len();
        let c = self.r_c.len();
        Error::check_dim(2 * m + c, offset.len())?;
        self.r_z.xor_assign(&offset.slice(0, m));
        self.r_x.xor_assign(&offset.slice(m, 2 * m));
        self.r_c.xor_assign(&offset.slice(2 * m, 2 * m + c));
        Ok(())
    }
}

/// The auditor's public decision.
#[derive(Clone, Debug)]
pub enum AqaVerdict<K> {
    Accepted {
        /// `P′`; the receiver applies `P′†` to its portal.
        correction: PauliOp,
        /// The key the receiver's register is now encoded under.
        key: K,
        /// Number of checked positions that disagreed.
        flips: usize,
    },
    Identified { party: usize },
}

impl<K> AqaVerdict<K> {
    pub fn is_accepted(&self) -> bool {
        matches!(self, AqaVerdict::Accepted { .. })
    }

    pub fn identified(&self) -> Option<usize> {
        match self {
            AqaVerdict::Identified { party } => Some(*party),
            AqaVerdict::Accepted { .. } => None,
        }
    }
}

/// Sets up the portals for a message encoded under `key`.
pub fn aqa_setup<K: AuthKey, R: Rng + ?Sized>(
    state: &mut QuantumState,
    key: &K,
    rng: &mut R,
) -> Result<(AqaPortals, AqaSecret<K>)> {
    let m = key.total_len();
    let checked = key.checked();
    let e_s = state.alloc(m)?;
    let e_r = state.alloc(m)?;
    state.prepare_epr(&e_s, &e_r)?;

    let p_m = random_pauli(m, rng);
    let p_s = random_pauli(m, rng);
    let p_r = random_pauli(m, rng);
    let p_c = random_pauli(checked.len(), rng);
    let key_out = key.fresh(rng);
    let e_tilde = CliffordOp::from_pauli(&p_m.adjoint()).compose(key.encoder())?;

    state.apply_clifford(&e_r, &e_tilde.inverse())?;
    let pick = |idx: &[usize]| idx.iter().map(|&k| e_r[k]).collect::<Vec<_>>();
    let mu = pick(&(0..key.message_len()).collect::<Vec<_>>());
    let c = pick(&checked);
    state.release(&pick(&key.discarded()), rng)?;
    state.apply_pauli(&c, &p_c)?;

    let mut r = mu;
    r.extend(state.alloc(m - key.message_len())?);
    state.apply_clifford(&r, key_out.encoder())?;
    state.apply_pauli(&r, &p_r)?;
    state.apply_pauli(&e_s, &p_s)?;

    Ok((
        AqaPortals {
            s: e_s,
            c,
            r,
            consumed: false,
        },
        AqaSecret {
            p_m,
            p_s,
            p_r,
            p_c,
            key: key.clone(),
            key_out,
            e_tilde,
        },
    ))
}

/// Teleports the ciphertext on `input` through the sending portal and
/// measures the checking portal. Consumes the sender-side portals.
pub fn aqa_send<R: Rng + ?Sized>(
    state: &mut QuantumState,
    portals: &mut AqaPortals,
    input: &[usize],
    rng: &mut R,
) -> Result<AqaReport> {
    if portals.consumed {
        return Err(Error::PortalConsumed);
    }
    Error::check_dim(portals.s.len(), input.len())?;
    portals.consumed = true;
    let (r_z, r_x) = tp_send(state, input, &portals.s, rng)?;
    let r_c = state.measure_z(&portals.c, rng)?;
    state.release(input, rng)?;
    state.release(&portals.s, rng)?;
    state.release(&portals.c, rng)?;
    Ok(AqaReport { r_z, r_x, r_c })
}

/// Discards the sender-side portals without sending, as a crashed sender
/// would leave them.
pub fn aqa_abandon<R: Rng + ?Sized>(state: &mut QuantumState, portals: &mut AqaPortals, rng: &mut R) -> Result<()> {
    if portals.consumed {
        return Err(Error::PortalConsumed);
    }
    portals.consumed = true;
    state.release(&portals.s, rng)?;
    state.release(&portals.c, rng)
}

/// One-time pads the sender's reports pick up from `P_M` and `P_S`: the
/// x-parts of `TP (P_M ⊗ P_S) TP†` on `M` and on `S`, where `TP` is the
/// teleport-measurement circuit `H_M · CNOT(M→S)`.
pub fn teleport_pads(p_m: &PauliOp, p_s: &PauliOp) -> Result<(Bits, Bits)> {
    Error::check_dim(p_m.num_qubits(), p_s.num_qubits())?;
    let tp = gates::h().tensor(&CliffordOp::identity(1)).compose(&gates::cx())?;
    let m = p_m.num_qubits();
    let mut s_z = Bits::zeros(m);
    let mut s_x = Bits::zeros(m);
    for i in 0..m {
        let pair = p_m.slice(i, i + 1).tensor(&p_s.slice(i, i + 1));
        let img = tp.conjugate(&pair)?;
        s_z.set(i, img.x().get(0));
        s_x.set(i, img.x().get(1));
    }
    Ok((s_z, s_x))
}

/// The auditor's check of `report` from `sender`.
pub fn aqa_check<K: AuthKey>(secret: &AqaSecret<K>, report: &AqaReport, sender: usize) -> Result<AqaVerdict<K>> {
    let key = &secret.key;
    let m = key.total_len();
    let checked = key.checked();
    Error::check_dim(m, report.r_z.len())?;
    Error::check_dim(m, report.r_x.len())?;
    Error::check_dim(checked.len(), report.r_c.len())?;

    let (s_z, s_x) = teleport_pads(&secret.p_m, &secret.p_s)?;
    let r_z = report.r_z.xor(&s_z);
    let r_x = report.r_x.xor(&s_x);
    let r_c = report.r_c.xor(secret.p_c.x());

    let q = secret.e_tilde.inverse().conjugate(&PauliOp::from_xz(r_x, r_z))?;
    let flips = q.x().gather(&checked).xor(&r_c).weight();
    if flips >= key.flip_tolerance() {
        return Ok(AqaVerdict::Identified { party: sender });
    }
    let ell = key.message_len();
    let msg: Vec<usize> = (0..ell).collect();
    let q_mu = q.gather(&msg).without_phase().embed(&msg, m);
    let correction = secret.p_r.compose(&secret.key_out.encoder().conjugate(&q_mu)?)?;
    Ok(AqaVerdict::Accepted {
        correction,
        key: secret.key_out.clone(),
        flips,
    })
}

/// Removes the correction from the receiving portal; afterwards it holds
/// the message encoded under the verdict's key.
pub fn aqa_receive<K>(state: &mut QuantumState, portals: &AqaPortals, verdict: &AqaVerdict<K>) -> Result<()> {
    match verdict {
        AqaVerdict::Accepted { correction, .. } => state.apply_pauli(&portals.r, &correction.adjoint()),
        AqaVerdict::Identified { .. } => Err(Error::VerdictNotAccepted),
    }
}

/// Basis images of the linear map `δ ↦ x(Ẽ† X^{δ_x} Z^{δ_z} Ẽ)` restricted to
/// `checked`, for `δ = (δ_z, δ_x)` in the report layout.
pub fn range_basis(e_tilde: &CliffordOp, checked: &[usize]) -> Vec<Bits> {
    let m = e_tilde.num_qubits();
    let inv = e_tilde.inverse();
    let mut images = Vec::with_capacity(2 * m);
    for k in 0..2 * m {
        let p = if k < m {
            PauliOp::z_on(m, k)
        } else {
            PauliOp::x_on(m, k - m)
        };
        images.push(inv.conjugate(&p).expect("same size").x().gather(checked));
    }
    images
}

/// Whether `v = (δ, w)` lies in the range of `δ ↦ (δ, L(δ))`, by summing the
/// basis images selected by `δ`.
pub fn range_oracle(e_tilde: &CliffordOp, checked: &[usize], v: &Bits) -> bool {
    let m = e_tilde.num_qubits();
    assert_eq!(v.len(), 2 * m + checked.len());
    let basis = range_basis(e_tilde, checked);
    let mut image = Bits::zeros(checked.len());
    for k in v.slice(0, 2 * m).ones_iter() {
        image.xor_assign(&basis[k]);
    }
    image == v.slice(2 * m, v.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::authcode::{CliffordKey, TrapKey};
    use crate::backend::{BackendKind, QuantumState};
    use crate::qecc::CssCode;
    use crate::symplectic::Gate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Runs setup + send of `|b⟩` under a random key, returns the verdict
    /// and the receiver's decoded bit.
    fn honest_round<K: AuthKey>(key: K, b: bool, rng: &mut ChaCha8Rng) -> (AqaVerdict<K>, Option<bool>) {
        let mut st = QuantumState::new(BackendKind::Stabilizer, 0).unwrap();
        let m = key.total_len();
        let input = st.alloc(m).unwrap();
        if b {
            st.apply_gate(Gate::X, &input[..1]).unwrap();
        }
        key.encode(&mut st, &input[..key.message_len()], &input[key.message_len()..])
            .unwrap();
        let (mut portals, secret) = aqa_setup(&mut st, &key, rng).unwrap();
        let report = aqa_send(&mut st, &mut portals, &input, rng).unwrap();
        let verdict = aqa_check(&secret, &report, 0).unwrap();
        if !verdict.is_accepted() {
            return (verdict, None);
        }
        aqa_receive(&mut st, &portals, &verdict).unwrap();
        let AqaVerdict::Accepted { key: out, .. } = &verdict else { unreachable!() };
        let dec = out.decode(&mut st, &portals.r, rng).unwrap();
        assert!(dec.accept);
        let bit = st.measure(portals.r[0], rng).unwrap();
        (verdict, Some(bit))
    }

    #[test]
    fn pads_match_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a = random_pauli(5, &mut rng);
            let b = random_pauli(5, &mut rng);
            let (s_z, s_x) = teleport_pads(&a, &b).unwrap();
            assert_eq!(s_z, a.z().xor(b.z()));
            assert_eq!(s_x, a.x().xor(b.x()));
        }
    }

    #[test]
    fn honest_clifford_round_delivers() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for b in [false, true] {
            for _ in 0..20 {
                let key = CliffordKey::random(1, 3, &mut rng);
                let (v, bit) = honest_round(key, b, &mut rng);
                assert!(matches!(v, AqaVerdict::Accepted { flips: 0, .. }));
                assert_eq!(bit, Some(b));
            }
        }
    }

    #[test]
    fn honest_trap_round_delivers() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let code = CssCode::steane();
        for b in [false, true] {
            let key = TrapKey::random(&code, &mut rng);
            let (v, bit) = honest_round(key, b, &mut rng);
            assert!(matches!(v, AqaVerdict::Accepted { flips: 0, .. }));
            assert_eq!(bit, Some(b));
        }
    }

    #[test]
    fn second_send_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut st = QuantumState::new(BackendKind::Stabilizer, 0).unwrap();
        let key = CliffordKey::random(1, 1, &mut rng);
        let input = st.alloc(2).unwrap();
        let (mut portals, _) = aqa_setup(&mut st, &key, &mut rng).unwrap();
        aqa_send(&mut st, &mut portals, &input, &mut rng).unwrap();
        let input = st.alloc(2).unwrap();
        assert!(matches!(
            aqa_send(&mut st, &mut portals, &input, &mut rng),
            Err(Error::PortalConsumed)
        ));
    }

    #[test]
    fn checked_flip_is_always_identified() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut st = QuantumState::new(BackendKind::Stabilizer, 0).unwrap();
        let key = CliffordKey::random(1, 3, &mut rng);
        let input = st.alloc(4).unwrap();
        key.encode(&mut st, &input[..1], &input[1..]).unwrap();
        let (mut portals, secret) = aqa_setup(&mut st, &key, &mut rng).unwrap();
        let mut report = aqa_send(&mut st, &mut portals, &input, &mut rng).unwrap();
        report.r_c.flip(1);
        assert_eq!(aqa_check(&secret, &report, 7).unwrap().identified(), Some(7));
    }

    #[test]
    fn range_oracle_contains_zero_and_images() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let e = crate::symplectic::random_clifford(4, &mut rng);
        let checked = [2, 3];
        assert!(range_oracle(&e, &checked, &Bits::zeros(10)));
        let delta = Bits::random(8, &mut rng);
        let p = PauliOp::from_xz(delta.slice(4, 8), delta.slice(0, 4));
        let w = e.inverse().conjugate(&p).unwrap().x().gather(&checked);
        assert!(range_oracle(&e, &checked, &delta.concat(&w)));
    }

    #[test]
    fn report_json_uses_hex_fields() {
        let r = AqaReport {
            r_z: Bits::from_u64(0b1010, 4),
            r_x: Bits::from_u64(1, 4),
            r_c: Bits::from_u64(3, 2),
        };
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"r_z\""));
        let back: AqaReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
