//! CSS codes: encoding circuit, transversal gates, classical decoding of
//! transversal measurements and quantum decoding with erasures.
//!
//! A code is loaded from a [`CodeDescriptor`]; [`CssCode::steane`] is the
//! built-in `[[7,1,3]]` default. The encoder takes the logical qubit at
//! position 0 and `|0⟩` ancillas at positions `1..q`.

pub mod gf2;

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::backend::QuantumState;
use crate::error::{Error, Result};
use crate::symplectic::{Bits, CliffordOp, Gate, PauliOp};

/// Measurement basis of a transversal logical measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

/// JSON form of a CSS code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeDescriptor {
    pub name: String,
    pub q: usize,
    pub d: usize,
    /// Supports of the X-type stabilizer generators, as `0`/`1` strings.
    pub x_stabilizers: Vec<String>,
    pub z_stabilizers: Vec<String>,
    pub x_logical: String,
    pub z_logical: String,
    /// Logical gate → gate applied on every share.
    pub transversal: BTreeMap<Gate, Gate>,
}

impl CodeDescriptor {
    pub fn steane() -> Self {
        let h = ["0001111", "0110011", "1010101"].map(String::from).to_vec();
        let transversal = [
            (Gate::I, Gate::I),
            (Gate::X, Gate::X),
            (Gate::Y, Gate::Y),
            (Gate::Z, Gate::Z),
            (Gate::H, Gate::H),
            (Gate::S, Gate::Sdg),
            (Gate::Sdg, Gate::S),
            (Gate::CX, Gate::CX),
            (Gate::CZ, Gate::CZ),
            (Gate::Swap, Gate::Swap),
        ]
        .into_iter()
        .collect();
        Self {
            name: "steane".into(),
            q: 7,
            d: 3,
            x_stabilizers: h.clone(),
            z_stabilizers: h,
            x_logical: "1111111".into(),
            z_logical: "1111111".into(),
            transversal,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn parse_row(s: &str, q: usize) -> Result<Bits> {
    if s.len() != q || !s.bytes().all(|c| c == b'0' || c == b'1') {
        return Err(Error::Config(format!("code row {s:?} is not a {q}-bit 0/1 string")));
    }
    Ok(Bits::from_bools(&s.bytes().map(|c| c == b'1').collect::<Vec<_>>()))
}

/// An `[[q, 1, d]]` CSS code.
#[derive(Clone, Debug)]
pub struct CssCode {
    desc: CodeDescriptor,
    hx: Vec<Bits>,
    hz: Vec<Bits>,
    x_logical: Bits,
    z_logical: Bits,
    encoder: CliffordOp,
    decoder: CliffordOp,
    /// Words consistent with the Z-type checks (outcomes of a Z-basis
    /// transversal measurement), and likewise for X.
    words_z: Vec<Bits>,
    words_x: Vec<Bits>,
}

impl CssCode {
    pub fn steane() -> Self {
        Self::from_descriptor(CodeDescriptor::steane()).expect("built-in descriptor is valid")
    }

    pub fn from_descriptor(desc: CodeDescriptor) -> Result<Self> {
        let q = desc.q;
        let rows = |v: &[String]| v.iter().map(|s| parse_row(s, q)).collect::<Result<Vec<_>>>();
        let hx = rows(&desc.x_stabilizers)?;
        let hz = rows(&desc.z_stabilizers)?;
        let x_logical = parse_row(&desc.x_logical, q)?;
        let z_logical = parse_row(&desc.z_logical, q)?;
        for a in &hx {
            if hz.iter().any(|b| a.dot(b)) {
                return Err(Error::Config("X and Z stabilizers do not commute".into()));
            }
            if a.dot(&z_logical) {
                return Err(Error::Config("logical Z anticommutes with a stabilizer".into()));
            }
        }
        if hz.iter().any(|b| b.dot(&x_logical)) {
            return Err(Error::Config("logical X anticommutes with a stabilizer".into()));
        }
        if !x_logical.dot(&z_logical) {
            return Err(Error::Config("logical X and Z commute".into()));
        }
        if gf2::rank(&hx) + gf2::rank(&hz) != q - 1 || hx.len() + hz.len() != q - 1 {
            return Err(Error::Config(format!(
                "expected {} independent stabilizers for one logical qubit",
                q - 1
            )));
        }
        let words_z = gf2::span(&gf2::kernel(&hz, q), q);
        let words_x = gf2::span(&gf2::kernel(&hx, q), q);
        let dist = |words: &[Bits], logical: &Bits| {
            words
                .iter()
                .filter(|w| w.dot(logical))
                .map(Bits::weight)
                .min()
                .unwrap_or(0)
        };
        // Logical X operators live in ker(hz) and are detected by Z_L.
        let d = dist(&words_z, &z_logical).min(dist(&words_x, &x_logical));
        if d != desc.d {
            return Err(Error::Config(format!("descriptor claims d = {}, code has d = {d}", desc.d)));
        }
        let encoder = build_encoder(q, &hx, &hz, &x_logical, &z_logical)?;
        let decoder = encoder.inverse();
        let code = Self {
            desc,
            hx,
            hz,
            x_logical,
            z_logical,
            encoder,
            decoder,
            words_z,
            words_x,
        };
        for (&logical, &physical) in &code.desc.transversal {
            if !code.implements(logical, physical) {
                return Err(Error::NonTransversal(format!("{logical} (as {physical} on each share)")));
            }
        }
        Ok(code)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_descriptor(CodeDescriptor::load(path)?)
    }

    pub fn descriptor(&self) -> &CodeDescriptor {
        &self.desc
    }

    pub fn name(&self) -> &str {
        &self.desc.name
    }

    /// Physical qubits per logical qubit.
    pub fn q(&self) -> usize {
        self.desc.q
    }

    pub fn d(&self) -> usize {
        self.desc.d
    }

    pub fn encoder(&self) -> &CliffordOp {
        &self.encoder
    }

    pub fn decoder(&self) -> &CliffordOp {
        &self.decoder
    }

    pub fn x_stabilizers(&self) -> &[Bits] {
        &self.hx
    }

    pub fn z_stabilizers(&self) -> &[Bits] {
        &self.hz
    }

    pub fn logical_x(&self) -> PauliOp {
        PauliOp::from_xz(self.x_logical.clone(), Bits::zeros(self.q()))
    }

    pub fn logical_z(&self) -> PauliOp {
        PauliOp::from_xz(Bits::zeros(self.q()), self.z_logical.clone())
    }

    pub fn is_transversal(&self, gate: Gate) -> bool {
        self.desc.transversal.contains_key(&gate)
    }

    /// Whether `physical` on every share implements `logical`.
    fn implements(&self, logical: Gate, physical: Gate) -> bool {
        let k = logical.arity();
        if physical.arity() != k {
            return false;
        }
        let q = self.q();
        let enc = (1..k).fold(self.encoder.clone(), |acc, _| acc.tensor(&self.encoder));
        let g = logical.clifford();
        let pg = physical.clifford();
        let mut phys = CliffordOp::identity(k * q);
        for j in 0..q {
            let pos: Vec<usize> = (0..k).map(|b| b * q + j).collect();
            phys = pg.embed(&pos, k * q).expect("valid positions").compose(&phys).expect("same size");
        }
        let u = enc.inverse().compose(&phys).and_then(|x| x.compose(&enc)).expect("same size");
        let logical_pos: Vec<usize> = (0..k).map(|b| b * q).collect();
        let is_ancilla = |i: usize| i % q != 0;
        for i in 0..k * q {
            if is_ancilla(i) {
                let img = u.z_image(i);
                let ok = img.x().is_zero()
                    && logical_pos.iter().all(|&p| !img.z().get(p))
                    && !img.is_negative();
                if !ok {
                    return false;
                }
            }
        }
        for (b, &lp) in logical_pos.iter().enumerate() {
            for (img, want) in [
                (u.x_image(lp), g.x_image(b)),
                (u.z_image(lp), g.z_image(b)),
            ] {
                let anc_x_clean = (0..k * q).filter(|&i| is_ancilla(i)).all(|i| !img.x().get(i));
                if !anc_x_clean {
                    return false;
                }
                // Z factors on |0⟩ ancillas have eigenvalue +1, so only the
                // logical part and the overall sign matter.
                let mut logical = img.gather(&logical_pos);
                let anc_y = (0..k * q).filter(|&i| is_ancilla(i) && img.x().get(i) && img.z().get(i)).count();
                logical.set_phase(img.phase() + 4 - (anc_y % 4) as u8);
                if logical != *want {
                    return false;
                }
            }
        }
        true
    }

    /// The gate applied to each share for `gate`; `Err` if not transversal.
    pub fn transversal_gate(&self, gate: Gate) -> Result<Gate> {
        self.desc
            .transversal
            .get(&gate)
            .copied()
            .ok_or_else(|| Error::NonTransversal(gate.to_string()))
    }

    /// Per-share physical Cliffords implementing `gate`; entry `j` acts on
    /// share `j` of each operand.
    pub fn transversal_physical(&self, gate: Gate) -> Result<Vec<CliffordOp>> {
        let g = self.transversal_gate(gate)?.clifford();
        Ok(vec![g; self.q()])
    }

    /// `QECC (p ⊗ I) QECC†` for a one-qubit logical Pauli `p`.
    pub fn conjugate_through_encoder(&self, p: &PauliOp) -> Result<PauliOp> {
        Error::check_dim(1, p.num_qubits())?;
        self.encoder.conjugate(&p.tensor(&PauliOp::identity(self.q() - 1)))
    }

    /// Encodes the logical qubit at `logical` with `|0⟩` ancillas.
    pub fn encode(&self, state: &mut QuantumState, logical: usize, ancillas: &[usize]) -> Result<()> {
        Error::check_dim(self.q() - 1, ancillas.len())?;
        let mut pos = vec![logical];
        pos.extend_from_slice(ancillas);
        state.apply_clifford(&pos, &self.encoder)
    }

    /// Decodes the logical bit of a transversal measurement outcome,
    /// treating `erasures` as unknown. `None` when no consistent word lies
    /// within the correction radius or when the nearest words disagree.
    pub fn classical_decode(&self, bits: &Bits, erasures: &[usize], basis: Basis) -> Option<bool> {
        if bits.len() != self.q() || erasures.len() >= self.d() {
            return None;
        }
        let (words, logical) = match basis {
            Basis::Z => (&self.words_z, &self.z_logical),
            Basis::X => (&self.words_x, &self.x_logical),
        };
        let mut mask = Bits::ones(self.q());
        for &e in erasures {
            if e >= self.q() {
                return None;
            }
            mask.set(e, false);
        }
        let radius = (self.d() - 1 - erasures.len()) / 2;
        let diff = |w: &Bits| w.xor(bits).and_weight(&mask);
        let best = words.iter().map(diff).min()?;
        if best > radius {
            return None;
        }
        let mut values = words.iter().filter(|w| diff(w) == best).map(|w| w.dot(logical));
        let first = values.next()?;
        values.all(|v| v == first).then_some(first)
    }

    /// Syndrome table for errors supported on `erasures` plus up to the
    /// remaining correction radius elsewhere: syndrome → logical Pauli.
    fn syndrome_table(&self, erasures: &[usize]) -> Result<BTreeMap<Bits, PauliOp>> {
        let q = self.q();
        if erasures.len() >= self.d() {
            return Err(Error::Config(format!(
                "{} erasures exceed what a distance-{} code recovers",
                erasures.len(),
                self.d()
            )));
        }
        let radius = (self.d() - 1 - erasures.len()) / 2;
        let others: Vec<usize> = (0..q).filter(|i| !erasures.contains(i)).collect();
        let mut errors = Vec::new();
        for code in 0..(1usize << (2 * erasures.len())) {
            let mut p = PauliOp::identity(q);
            for (k, &e) in erasures.iter().enumerate() {
                p.x_mut().set(e, code >> (2 * k) & 1 == 1);
                p.z_mut().set(e, code >> (2 * k + 1) & 1 == 1);
            }
            errors.push(p);
        }
        for _ in 0..radius {
            let mut next = errors.clone();
            for p in &errors {
                for &i in &others {
                    if p.x().get(i) || p.z().get(i) {
                        continue;
                    }
                    for (x, z) in [(true, false), (false, true), (true, true)] {
                        let mut e = p.clone();
                        e.x_mut().set(i, x);
                        e.z_mut().set(i, z);
                        next.push(e);
                    }
                }
            }
            errors = next;
        }
        let mut table: BTreeMap<Bits, PauliOp> = BTreeMap::new();
        for e in errors {
            let u = self.decoder.conjugate(&e)?;
            let syndrome = u.x().slice(1, q);
            let fix = u.slice(0, 1).without_phase();
            if let Some(prev) = table.get(&syndrome) {
                if !prev.same_bits(&fix) {
                    return Err(Error::Config("error set is not correctable".into()));
                }
            } else {
                table.insert(syndrome, fix);
            }
        }
        Ok(table)
    }

    /// Quantum decoding of one codeword held on `shares` (share `j` at
    /// `shares[j]`) whose qubits at `erasures` (share indices) are unknown.
    ///
    /// Leaves the corrected logical qubit on `shares[0]`, measures the
    /// remaining shares as syndrome, and returns `false` if the syndrome is
    /// not in the correctable set.
    pub fn decode<R: Rng + ?Sized>(
        &self,
        state: &mut QuantumState,
        shares: &[usize],
        erasures: &[usize],
        rng: &mut R,
    ) -> Result<bool> {
        Error::check_dim(self.q(), shares.len())?;
        let table = self.syndrome_table(erasures)?;
        state.apply_clifford(shares, &self.decoder)?;
        let syndrome = state.measure_z(&shares[1..], rng)?;
        match table.get(&syndrome) {
            Some(fix) => {
                state.apply_pauli(&shares[..1], fix)?;
                Ok(true)
            }
            None => Ok(false),
        }
    }
}

/// Encoder images: `Z_0 → Z_L`, `X_0 → X_L`, `Z_j →` stabilizers, and
/// `X_j →` matching destabilizers.
fn build_encoder(q: usize, hx: &[Bits], hz: &[Bits], xl: &Bits, zl: &Bits) -> Result<CliffordOp> {
    let zero = Bits::zeros(q);
    let mut stabs: Vec<PauliOp> = hx.iter().map(|r| PauliOp::from_xz(r.clone(), zero.clone())).collect();
    stabs.extend(hz.iter().map(|r| PauliOp::from_xz(zero.clone(), r.clone())));
    let logicals = [
        PauliOp::from_xz(xl.clone(), zero.clone()),
        PauliOp::from_xz(zero.clone(), zl.clone()),
    ];
    // ⟨v, w⟩ = v_x·w_z + v_z·w_x, so the constraint row for w is (w_z, w_x).
    let constraint = |w: &PauliOp| w.z().concat(w.x());
    let rows: Vec<Bits> = stabs.iter().chain(&logicals).map(constraint).collect();
    let mut destabs = Vec::with_capacity(stabs.len());
    for i in 0..stabs.len() {
        let mut rhs = Bits::zeros(rows.len());
        rhs.set(i, true);
        let v = gf2::solve(&rows, &rhs)
            .ok_or_else(|| Error::Config("stabilizers are not independent".into()))?;
        destabs.push(PauliOp::hermitian(v.slice(0, q), v.slice(q, 2 * q), false));
    }
    for l in 0..destabs.len() {
        for k in 0..l {
            if !destabs[l].commutes_with(&destabs[k]) {
                let fixed = destabs[l].compose(&stabs[k])?;
                destabs[l] = PauliOp::hermitian(fixed.x().clone(), fixed.z().clone(), false);
            }
        }
    }
    let mut x_img = vec![logicals[0].clone()];
    x_img.extend(destabs);
    let mut z_img = vec![logicals[1].clone()];
    z_img.extend(stabs);
    CliffordOp::from_images(x_img, z_img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{BackendKind, Tableau};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bits(s: &str) -> Bits {
        parse_row(s, s.len()).unwrap()
    }

    /// Independent nearest-codeword oracle for the Hamming code.
    fn hamming_syndrome(v: &Bits) -> usize {
        (0..7).filter(|&i| v.get(i)).fold(0, |acc, i| acc ^ (i + 1))
    }

    #[test]
    fn steane_descriptor_validates() {
        let c = CssCode::steane();
        assert_eq!((c.q(), c.d()), (7, 3));
        assert!(c.encoder().validate().is_ok());
    }

    #[test]
    fn wrong_transversal_entry_is_rejected() {
        let mut d = CodeDescriptor::steane();
        d.transversal.insert(Gate::S, Gate::S);
        assert!(matches!(CssCode::from_descriptor(d), Err(Error::NonTransversal(_))));
    }

    #[test]
    fn wrong_distance_is_rejected() {
        let mut d = CodeDescriptor::steane();
        d.d = 5;
        assert!(CssCode::from_descriptor(d).is_err());
    }

    #[test]
    fn descriptor_json_roundtrip() {
        let d = CodeDescriptor::steane();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(CodeDescriptor::from_json(&s).unwrap(), d);
    }

    #[test]
    fn encoded_zero_measures_to_hamming_codewords() {
        let code = CssCode::steane();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let mut st = QuantumState::new(BackendKind::Stabilizer, 7).unwrap();
            code.encode(&mut st, 0, &[1, 2, 3, 4, 5, 6]).unwrap();
            let m = st.measure_z(&(0..7).collect::<Vec<_>>(), &mut rng).unwrap();
            assert_eq!(hamming_syndrome(&m), 0);
            assert_eq!(m.weight() % 2, 0);
            assert_eq!(code.classical_decode(&m, &[], Basis::Z), Some(false));
        }
    }

    #[test]
    fn classical_decode_matches_hamming_oracle() {
        let code = CssCode::steane();
        for v in 0..128u64 {
            let w = Bits::from_u64(v, 7);
            let mut fixed = w.clone();
            let s = hamming_syndrome(&w);
            if s != 0 {
                // Syndrome of the Hamming checks is the 1-based index of the flip.
                fixed.flip(s - 1);
            }
            assert_eq!(code.classical_decode(&w, &[], Basis::Z), Some(fixed.weight() % 2 == 1));
        }
        assert_eq!(code.classical_decode(&bits("1111110"), &[], Basis::Z), Some(true));
    }

    #[test]
    fn classical_decode_with_two_erasures() {
        let code = CssCode::steane();
        let words = &code.words_z;
        for w in words {
            for a in 0..7 {
                for b in (a + 1)..7 {
                    let mut damaged = w.clone();
                    damaged.set(a, !damaged.get(a));
                    assert_eq!(
                        code.classical_decode(&damaged, &[a, b], Basis::Z),
                        Some(w.weight() % 2 == 1)
                    );
                }
            }
        }
    }

    #[test]
    fn logical_x_conjugates_to_transversal_x() {
        let code = CssCode::steane();
        let p = code.conjugate_through_encoder(&"X".parse().unwrap()).unwrap();
        assert!(p.same_bits(&code.logical_x()));
        assert!(code.conjugate_through_encoder(&"I".parse().unwrap()).unwrap().is_identity());
    }

    #[test]
    fn transversal_cnot_on_encoded_one_zero() {
        let code = CssCode::steane();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut st = QuantumState::from_tableau(Tableau::new(14));
        st.apply_gate(Gate::X, &[0]).unwrap();
        code.encode(&mut st, 0, &[1, 2, 3, 4, 5, 6]).unwrap();
        code.encode(&mut st, 7, &[8, 9, 10, 11, 12, 13]).unwrap();
        let g = code.transversal_gate(Gate::CX).unwrap();
        for j in 0..7 {
            st.apply_gate(g, &[j, 7 + j]).unwrap();
        }
        let a = st.measure_z(&(0..7).collect::<Vec<_>>(), &mut rng).unwrap();
        let b = st.measure_z(&(7..14).collect::<Vec<_>>(), &mut rng).unwrap();
        assert_eq!(code.classical_decode(&a, &[], Basis::Z), Some(true));
        assert_eq!(code.classical_decode(&b, &[], Basis::Z), Some(true));
    }

    #[test]
    fn quantum_decode_fixes_single_errors() {
        let code = CssCode::steane();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for q in 0..7 {
            for letter in ['X', 'Y', 'Z'] {
                let mut st = QuantumState::new(BackendKind::Stabilizer, 7).unwrap();
                st.apply_gate(Gate::H, &[0]).unwrap();
                code.encode(&mut st, 0, &[1, 2, 3, 4, 5, 6]).unwrap();
                st.apply_pauli(&[q], &PauliOp::single(1, 0, letter)).unwrap();
                let shares: Vec<usize> = (0..7).collect();
                assert!(code.decode(&mut st, &shares, &[], &mut rng).unwrap());
                assert_eq!(st.peek_pauli(&[0], &"X".parse().unwrap()).unwrap(), Some(false));
            }
        }
    }
}
